use crate::error::{Error, Result};
use crate::C64;

use super::{offsets, product, unitarity_defect, CMat, CVec, ONE, TOL, ZERO};

/// A pure state over an ordered list of registers.
///
/// Unnormalized vectors are allowed when explicitly flagged, since some
/// worked examples manipulate norm-√2 vectors directly.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVec,
    dims: Vec<usize>,
    normalized: bool,
}

impl StateVector {
    /// A normalized state; fails unless `‖amplitudes‖² = 1` within `1e-10`.
    pub fn new(amplitudes: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let n = amplitudes.norm_squared();
        if (n - 1.0).abs() > TOL {
            return Err(Error::Parameter(format!("state has squared norm {n}, expected 1")));
        }
        Ok(Self { amplitudes, dims, normalized: true })
    }

    /// An explicitly unnormalized vector.
    pub fn unnormalized(amplitudes: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        Ok(Self { amplitudes, dims, normalized: false })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = product(&dims);
        if index >= n {
            return Err(Error::Parameter(format!("basis index {index} out of range {n}")));
        }
        let mut a = CVec::from_element(n, ZERO);
        a[index] = ONE;
        Ok(Self { amplitudes: a, dims, normalized: true })
    }

    /// `|0…0⟩`.
    pub fn zero(dims: Vec<usize>) -> Self {
        Self::basis(dims, 0).expect("index 0 is always valid")
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut CVec {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Rescales to unit norm and clears the unnormalized flag.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.amplitudes.norm();
        if n == 0.0 {
            return Err(Error::Parameter("cannot normalize the zero vector".into()));
        }
        self.amplitudes /= C64::new(n, 0.0);
        self.normalized = true;
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|ψ⟩⟨ψ|` as a matrix.
    pub fn outer(&self) -> CMat {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || product(dims) != len {
        return Err(Error::Dimension(format!(
            "register dims {dims:?} do not describe a vector of length {len}"
        )));
    }
    Ok(())
}

/// A unitary acting on a subset of registers.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryGate {
    matrix: CMat,
    targets: Vec<usize>,
}

impl UnitaryGate {
    /// Fails unless `U·U† = I` within `1e-10`.
    pub fn new(matrix: CMat, targets: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("gate matrix is not square".into()));
        }
        let defect = unitarity_defect(&matrix);
        if defect > TOL {
            return Err(Error::Parameter(format!("gate is not unitary (defect {defect:e})")));
        }
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != targets.len() || targets.is_empty() {
            return Err(Error::Parameter(format!("bad target list {targets:?}")));
        }
        Ok(Self { matrix, targets })
    }

    pub fn identity(dim: usize, targets: Vec<usize>) -> Result<Self> {
        Self::new(CMat::identity(dim, dim), targets)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), targets: self.targets.clone() }
    }
}

/// Applies `gate` to the registers it targets. Norm is preserved.
pub fn apply_gate(state: &StateVector, gate: &UnitaryGate) -> Result<StateVector> {
    let dims = state.dims();
    if gate.targets.iter().any(|&t| t >= dims.len()) {
        return Err(Error::Dimension(format!(
            "gate targets {:?} but state has {} registers",
            gate.targets,
            dims.len()
        )));
    }
    let gdim: usize = gate.targets.iter().map(|&t| dims[t]).product();
    if gdim != gate.dim() {
        return Err(Error::Dimension(format!(
            "gate of dimension {} applied to registers of total dimension {gdim}",
            gate.dim()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|r| !gate.targets.contains(r)).collect();
    let inner = offsets(dims, &gate.targets);
    let outer = offsets(dims, &rest);
    let src = state.amplitudes();
    let mut out = CVec::from_element(src.len(), ZERO);
    let mut buf = CVec::from_element(gdim, ZERO);
    for &base in &outer {
        for (k, &o) in inner.iter().enumerate() {
            buf[k] = src[base + o];
        }
        let y = &gate.matrix * &buf;
        for (k, &o) in inner.iter().enumerate() {
            out[base + o] = y[k];
        }
    }
    Ok(StateVector { amplitudes: out, dims: dims.to_vec(), normalized: state.normalized })
}
