use crate::error::{Error, Result};
use crate::C64;

use super::{
    density::psd_sqrt, hermitian_eigenvalues, offsets, CMat, CVec, DensityMatrix, StateVector, TOL,
    ZERO,
};

/// One branch of a POVM measurement.
#[derive(Clone, Debug)]
pub struct PovmOutcome {
    pub probability: f64,
    /// Lüders post-measurement state, `(√E ⊗ I)|ψ⟩/√p`; `None` when `p = 0`.
    pub post_state: Option<StateVector>,
}

impl PovmOutcome {
    /// `p·|post⟩⟨post|`, the unnormalized branch operator.
    pub fn weighted(&self, dims: &[usize]) -> DensityMatrix {
        match &self.post_state {
            Some(s) => DensityMatrix::trusted(
                s.outer() * C64::new(self.probability, 0.0),
                dims.to_vec(),
                false,
            ),
            None => {
                let n = dims.iter().product();
                DensityMatrix::trusted(CMat::zeros(n, n), dims.to_vec(), false)
            }
        }
    }
}

/// Measures `register` of `state` with the POVM `elements`.
///
/// The elements must be positive semidefinite and sum to the identity within
/// `1e-10`. Returns one outcome per element, in order.
pub fn povm_measure(state: &StateVector, elements: &[CMat], register: usize) -> Result<Vec<PovmOutcome>> {
    let dims = state.dims();
    if register >= dims.len() {
        return Err(Error::Parameter(format!("register {register} out of range")));
    }
    let rd = dims[register];
    let mut total = CMat::zeros(rd, rd);
    for e in elements {
        if e.shape() != (rd, rd) {
            return Err(Error::Dimension(format!(
                "POVM element is {}x{}, register has dimension {rd}",
                e.nrows(),
                e.ncols()
            )));
        }
        if hermitian_eigenvalues(e)[0] < -TOL {
            return Err(Error::Parameter("POVM element is not positive semidefinite".into()));
        }
        total += e;
    }
    let defect = (total - CMat::identity(rd, rd)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > TOL {
        return Err(Error::Parameter(format!("POVM elements do not sum to identity (defect {defect:e})")));
    }

    let rest: Vec<usize> = (0..dims.len()).filter(|&r| r != register).collect();
    let inner = offsets(dims, &[register]);
    let outer = offsets(dims, &rest);
    let psi = state.amplitudes();
    let mut out = Vec::with_capacity(elements.len());
    for e in elements {
        let root = psd_sqrt(e);
        let mut branch = CVec::from_element(psi.len(), ZERO);
        let mut buf = CVec::from_element(rd, ZERO);
        for &base in &outer {
            for (k, &o) in inner.iter().enumerate() {
                buf[k] = psi[base + o];
            }
            let y = &root * &buf;
            for (k, &o) in inner.iter().enumerate() {
                branch[base + o] = y[k];
            }
        }
        let p = branch.norm_squared();
        let post_state = if p > 0.0 {
            Some(StateVector::unnormalized(branch, dims.to_vec())?.normalize()?)
        } else {
            None
        };
        out.push(PovmOutcome { probability: p, post_state });
    }
    Ok(out)
}
