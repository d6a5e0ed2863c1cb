//! Dense complex linear algebra at desk scale.
//!
//! Registers are ordered most-significant first: a state on registers with
//! dimensions `[d0, d1, d2]` stores amplitude `(i0, i1, i2)` at index
//! `(i0·d1 + i1)·d2 + i2`.

mod density;
mod gram_schmidt;
mod povm;
mod state;

pub use density::{
    hermitian_eigenvalues, partial_trace, partial_trace_matrix, psd_sqrt, pure_trace_distance,
    trace_distance, trace_norm, DensityMatrix,
};
pub use gram_schmidt::{complete_basis, gram_schmidt};
pub(crate) use gram_schmidt::orthonormalize_with_residuals;
pub use povm::{povm_measure, PovmOutcome};
pub use state::{apply_gate, StateVector, UnitaryGate};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Default tolerance for unitarity, hermiticity and normalization checks.
pub const TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// The `d`-point DFT, `F[j,k] = ω^{jk}/√d`. Maps `|0⟩` to the uniform
/// superposition.
pub fn dft_matrix(d: usize) -> CMat {
    let s = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |j, k| {
        let r = (j * k) % d;
        C64::from_polar(s, 2.0 * std::f64::consts::PI * r as f64 / d as f64)
    })
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let (q, r) = g.qr().unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unit vector, uniform on the complex sphere.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// `max |(U·U† − I)_{ij}|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let p = u * u.adjoint();
    let n = u.nrows();
    (p - CMat::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Offsets of every multi-index over `regs` (row-major in the order given).
pub(crate) fn offsets(dims: &[usize], regs: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &r in regs {
        let mut next = Vec::with_capacity(out.len() * dims[r]);
        for &o in &out {
            for i in 0..dims[r] {
                next.push(o + i * st[r]);
            }
        }
        out = next;
    }
    out
}
