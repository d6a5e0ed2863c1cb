use crate::error::{Error, Result};
use crate::C64;

use super::{offsets, product, CMat, StateVector, TOL, ZERO};

/// A density matrix over an ordered list of registers.
///
/// Validation checks hermiticity, unit trace and positivity (eigenvalues
/// clipped at `−1e-10`). Unnormalized operators, such as partial traces of
/// unnormalized example states, are allowed when explicitly flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMat,
    dims: Vec<usize>,
    normalized: bool,
}

impl DensityMatrix {
    pub fn new(entries: CMat, dims: Vec<usize>) -> Result<Self> {
        let rho = Self { entries, dims, normalized: true };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips the trace check; hermiticity and positivity are still required.
    pub fn unnormalized(entries: CMat, dims: Vec<usize>) -> Result<Self> {
        let rho = Self { entries, dims, normalized: false };
        rho.validate()?;
        Ok(rho)
    }

    /// No validation at all. For internal results that are valid by
    /// construction.
    pub(crate) fn trusted(entries: CMat, dims: Vec<usize>, normalized: bool) -> Self {
        Self { entries, dims, normalized }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            entries: state.outer(),
            dims: state.dims().to_vec(),
            normalized: state.is_normalized(),
        }
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Checks the density-matrix invariants at the default tolerances.
    pub fn validate(&self) -> Result<()> {
        let m = &self.entries;
        if !m.is_square() || m.nrows() != product(&self.dims) {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not match register dims {:?}",
                m.nrows(),
                m.ncols(),
                self.dims
            )));
        }
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > TOL {
            return Err(Error::Parameter(format!("matrix is not Hermitian (defect {herm:e})")));
        }
        if self.normalized {
            let t = m.trace();
            if (t.re - 1.0).abs() > TOL || t.im.abs() > TOL {
                return Err(Error::Parameter(format!("trace is {t}, expected 1")));
            }
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -TOL {
            return Err(Error::Parameter(format!("matrix has negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Real spectrum of the Hermitian part `(A + A†)/2`, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).iter().map(|l| l.abs()).sum()
}

/// Square root of a positive semidefinite matrix (negative eigenvalues from
/// rounding are clipped to zero).
pub fn psd_sqrt(a: &CMat) -> CMat {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let s = CMat::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    v * s * v.adjoint()
}

/// Traces out `traced` registers of a matrix laid out over `dims`.
pub fn partial_trace_matrix(m: &CMat, dims: &[usize], traced: &[usize]) -> Result<CMat> {
    if traced.iter().any(|&t| t >= dims.len()) {
        return Err(Error::Parameter(format!(
            "register index out of range in {traced:?} for {} registers",
            dims.len()
        )));
    }
    if m.nrows() != product(dims) || !m.is_square() {
        return Err(Error::Dimension("matrix does not match register dims".into()));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|r| !traced.contains(r)).collect();
    let ko = offsets(dims, &kept);
    let to = offsets(dims, traced);
    let n = ko.len();
    Ok(CMat::from_fn(n, n, |i, j| {
        to.iter().fold(ZERO, |acc, &t| acc + m[(ko[i] + t, ko[j] + t)])
    }))
}

/// `tr_register(ρ)`.
pub fn partial_trace(rho: &DensityMatrix, register: usize) -> Result<DensityMatrix> {
    if register >= rho.dims.len() || rho.dims.len() < 2 {
        return Err(Error::Parameter(format!(
            "cannot trace out register {register} of a {}-register state",
            rho.dims.len()
        )));
    }
    let m = partial_trace_matrix(&rho.entries, &rho.dims, &[register])?;
    let dims: Vec<usize> =
        rho.dims.iter().enumerate().filter(|&(i, _)| i != register).map(|(_, &d)| d).collect();
    Ok(DensityMatrix { entries: m, dims, normalized: rho.normalized })
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "trace distance between {}- and {}-dimensional operators",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(&rho.entries - &sigma.entries)))
}

/// Trace distance between two pure states, `√(1 − |⟨a|b⟩|²)`.
pub fn pure_trace_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension("pure states of different lengths".into()));
    }
    let o = a.inner(b).norm_sqr() / (a.norm_squared() * b.norm_squared());
    Ok((1.0 - o).max(0.0).sqrt())
}
