//! Reduction circuits `X = Z·T†·U·T` on `R ⊗ S` (`S` a qubit, basis index
//! `r·2 + s`, good flag `s = 1`).
//!
//! * `Sec2`: `T|0⟩ = |u⟩` (uniform superposition), `Z` flips `S` when
//!   `R = 0`. The flagged amplitude is `|n̄tr(U)|`.
//! * `Sec4`: additionally `T|1⟩ = D|u⟩`, and `Z` flips `S` when `R ∈ {0, 1}`.
//!   The flagged part is `α|0⟩ + β|1⟩` with `α = n̄tr(U)`,
//!   `β = n̄tr(D†U)`.
//!
//! [`StructuredT`] applies `T` as a product of Householder reflections in
//! `O(d)`; the dense builders exist for small-`d` cross-checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensembles::DiagonalOracle;
use crate::error::{param, Result};
use crate::linalg::{complete_basis, kron, CMat, CVec, UnitaryGate, ONE, ZERO};
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sec2,
    Sec4,
}

impl Variant {
    /// Oracle-register values whose flag `Z` flips.
    pub fn marked(self) -> &'static [usize] {
        match self {
            Variant::Sec2 => &[0],
            Variant::Sec4 => &[0, 1],
        }
    }
}

fn uniform(d: usize) -> CVec {
    CVec::from_element(d, C64::new(1.0 / (d as f64).sqrt(), 0.0))
}

fn d_phase(k: usize, d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Dense Householder reflection sending `|0⟩` to the uniform superposition.
pub fn uniform_reflection(d: usize) -> CMat {
    let u = uniform(d);
    let mut w = -u;
    w[0] += ONE;
    let n = w.norm();
    if n < 1e-15 {
        return CMat::identity(d, d);
    }
    w /= C64::new(n, 0.0);
    CMat::identity(d, d) - &w * w.adjoint() * C64::new(2.0, 0.0)
}

/// `m ⊗ I_aux`.
pub fn lift_r(m: &CMat, aux: usize) -> CMat {
    kron(m, &CMat::identity(aux, aux))
}

/// The `2d × 2d` permutation flipping `S` for every `R` value in `marked`.
pub fn flag_gate(d: usize, marked: &[usize]) -> CMat {
    let mut z = CMat::identity(2 * d, 2 * d);
    for &r in marked {
        z[(2 * r, 2 * r)] = ZERO;
        z[(2 * r + 1, 2 * r + 1)] = ZERO;
        z[(2 * r, 2 * r + 1)] = ONE;
        z[(2 * r + 1, 2 * r)] = ONE;
    }
    z
}

/// Dense `T` with `T|0⟩ = |u⟩`, `T|1⟩ = D|u⟩`; remaining columns come from
/// Gram–Schmidt over the standard basis.
pub fn build_t_sec4(d: usize) -> Result<UnitaryGate> {
    if d < 2 {
        return param("the twisted reduction needs d >= 2");
    }
    let u = uniform(d);
    let du = CVec::from_fn(d, |k, _| u[k] * d_phase(k, d));
    UnitaryGate::new(complete_basis(&[u, du], d)?, vec![0])
}

/// Dense `X = Z·(T†UT ⊗ I)` for `oracle` and an explicit `T`.
pub fn dense_reduction(oracle: &DiagonalOracle, t: &CMat, variant: Variant) -> Result<CMat> {
    let d = oracle.dim();
    if t.shape() != (d, d) {
        return Err(crate::Error::Dimension(format!("T must be {d}x{d}")));
    }
    let u = CMat::from_diagonal(&CVec::from_vec(oracle.entries()));
    let core = lift_r(&(t.adjoint() * u * t), 2);
    Ok(flag_gate(d, variant.marked()) * core)
}

/// A unit Householder vector `w` (`H = I − 2ww†`), or none for `H = I`.
#[derive(Clone, Debug)]
struct Householder(Option<CVec>);

impl Householder {
    /// Reflection sending unit `a` to unit `b`; needs `⟨a|b⟩` real.
    fn between(a: &CVec, b: &CVec) -> Self {
        let w = a - b;
        let n = w.norm();
        if n < 1e-14 {
            Householder(None)
        } else {
            Householder(Some(w / C64::new(n, 0.0)))
        }
    }

    fn apply(&self, x: &mut [C64], stride: usize, offset: usize) {
        let Some(w) = &self.0 else { return };
        let mut dot = ZERO;
        for (r, wr) in w.iter().enumerate() {
            dot += wr.conj() * x[r * stride + offset];
        }
        let c = dot * 2.0;
        for (r, wr) in w.iter().enumerate() {
            x[r * stride + offset] -= wr * c;
        }
    }

    fn apply_vec(&self, x: &mut CVec) {
        self.apply(x.as_mut_slice(), 1, 0);
    }
}

/// `T` as `H1` (sec2) or `H1·H2·P` (sec4), applied in `O(d)`.
#[derive(Clone, Debug)]
pub struct StructuredT {
    d: usize,
    h1: Householder,
    h2: Householder,
    /// Phase `P|1⟩ = σ|1⟩`.
    sigma: C64,
}

impl StructuredT {
    pub fn new(d: usize, variant: Variant) -> Result<Self> {
        if d == 0 {
            return param("reduction dimension must be positive");
        }
        let u = uniform(d);
        let mut e0 = CVec::zeros(d);
        e0[0] = ONE;
        let h1 = Householder::between(&e0, &u);
        let one = C64::new(1.0, 0.0);
        if variant == Variant::Sec2 {
            return Ok(Self { d, h1, h2: Householder(None), sigma: one });
        }
        if d < 2 {
            return param("the twisted reduction needs d >= 2");
        }
        let mut v = CVec::from_fn(d, |k, _| u[k] * d_phase(k, d));
        h1.apply_vec(&mut v);
        let sigma = if v[1].norm() > 1e-300 { v[1] / v[1].norm() } else { one };
        let mut e1 = CVec::zeros(d);
        e1[1] = ONE;
        let target = v * sigma.conj();
        let h2 = Householder::between(&e1, &target);
        Ok(Self { d, h1, h2, sigma })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Applies `T` (or `T†`) to register `R` of a vector on `R ⊗ S` with
    /// `|S| = aux`.
    pub fn apply(&self, x: &mut [C64], aux: usize, adjoint: bool) {
        for s in 0..aux {
            if adjoint {
                self.h1.apply(x, aux, s);
                self.h2.apply(x, aux, s);
                if self.d > 1 {
                    x[aux + s] *= self.sigma.conj();
                }
            } else {
                if self.d > 1 {
                    x[aux + s] *= self.sigma;
                }
                self.h2.apply(x, aux, s);
                self.h1.apply(x, aux, s);
            }
        }
    }

    /// Dense form, for checks.
    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::identity(self.d, self.d);
        for j in 0..self.d {
            let mut col = m.column(j).into_owned();
            self.apply(col.as_mut_slice(), 1, false);
            m.set_column(j, &col);
        }
        m
    }
}

/// The reduction unitary built around a concrete diagonal oracle, applied
/// in `O(d)` per call.
#[derive(Clone, Debug)]
pub struct ReductionCircuit {
    variant: Variant,
    t: StructuredT,
    entries: Vec<C64>,
}

impl ReductionCircuit {
    pub fn new(oracle: &DiagonalOracle, variant: Variant) -> Result<Self> {
        Ok(Self { variant, t: StructuredT::new(oracle.dim(), variant)?, entries: oracle.entries() })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    /// Dimension of `R ⊗ S`.
    pub fn dim(&self) -> usize {
        2 * self.d()
    }

    fn flag(&self, x: &mut [C64]) {
        for &r in self.variant.marked() {
            x.swap(2 * r, 2 * r + 1);
        }
    }

    fn diag(&self, x: &mut [C64], inverse: bool) {
        for (pair, u) in x.chunks_mut(2).zip(&self.entries) {
            let u = if inverse { u.conj() } else { *u };
            pair[0] *= u;
            pair[1] *= u;
        }
    }

    /// `X` (or `X†`) in place.
    pub fn apply(&self, x: &mut [C64], inverse: bool) {
        if inverse {
            self.flag(x);
            self.t.apply(x, 2, false);
            self.diag(x, true);
            self.t.apply(x, 2, true);
        } else {
            self.t.apply(x, 2, false);
            self.diag(x, false);
            self.t.apply(x, 2, true);
            self.flag(x);
        }
    }

    /// `X|0⟩|0⟩`.
    pub fn prepare(&self) -> CVec {
        let mut x = CVec::zeros(self.dim());
        x[0] = ONE;
        self.apply(x.as_mut_slice(), false);
        x
    }
}

/// Flagged amplitude of `X|0⟩|0⟩` against its predicted value.
#[derive(Clone, Debug)]
pub struct ReductionCheck {
    pub flagged_amplitude: f64,
    pub expected_amplitude: f64,
    /// `R`-register part of the flagged component, unnormalized.
    pub flagged_state: CVec,
    /// Predicted flagged component: `n̄tr(U)|0⟩` or `α|0⟩ + β|1⟩`.
    pub expected_state: CVec,
}

impl ReductionCheck {
    /// Largest deviation of the flagged component from its prediction.
    pub fn state_error(&self) -> f64 {
        (&self.flagged_state - &self.expected_state).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn reduction_state_check(oracle: &DiagonalOracle, variant: Variant) -> Result<ReductionCheck> {
    let c = ReductionCircuit::new(oracle, variant)?;
    let x = c.prepare();
    let d = oracle.dim();
    let flagged_state = CVec::from_fn(d, |r, _| x[2 * r + 1]);
    let mut expected_state = CVec::zeros(d);
    expected_state[0] = oracle.normalized_trace();
    if variant == Variant::Sec4 {
        expected_state[1] = oracle.twisted(-1).normalized_trace();
    }
    Ok(ReductionCheck {
        flagged_amplitude: flagged_state.norm(),
        expected_amplitude: expected_state.norm(),
        flagged_state,
        expected_state,
    })
}
