//! The three two-qubit-ish purifications used to contrast orthogonal and
//! coherent perturbations of a purification register.

use crate::error::Result;
use crate::linalg::{partial_trace, trace_distance, CVec, DensityMatrix, StateVector, ZERO};
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExampleState {
    /// `|0⟩|0⟩ + |1⟩|1⟩`.
    Base,
    /// Each label perturbed towards a shared orthogonal `|⊥⟩`.
    Orthogonal,
    /// Each label perturbed towards the other label.
    Coherent,
}

/// Unnormalized example state on `O ⊗ P` with `P = span{|0⟩, |1⟩, |⊥⟩}`.
pub fn example_state(kind: ExampleState, eps: f64) -> Result<StateVector> {
    let s = (1.0 - eps * eps).sqrt();
    let c = |x: f64| C64::new(x, 0.0);
    let mut v = CVec::from_element(6, ZERO);
    match kind {
        ExampleState::Base => {
            v[0] = c(1.0);
            v[4] = c(1.0);
        }
        ExampleState::Orthogonal => {
            v[0] = c(s);
            v[2] = c(eps);
            v[4] = c(s);
            v[5] = c(eps);
        }
        ExampleState::Coherent => {
            v[0] = c(s);
            v[1] = c(eps);
            v[3] = c(eps);
            v[4] = c(s);
        }
    }
    StateVector::unnormalized(v, vec![2, 3])
}

/// `tr_P` of the normalized example state.
pub fn example_reduced(kind: ExampleState, eps: f64) -> Result<DensityMatrix> {
    let psi = example_state(kind, eps)?.normalize()?;
    partial_trace(&DensityMatrix::from_pure(&psi), 1)
}

/// Trace distance between the reduced base state and the reduced `kind`
/// state.
pub fn example_pair_distance(kind: ExampleState, eps: f64) -> Result<f64> {
    trace_distance(&example_reduced(ExampleState::Base, eps)?, &example_reduced(kind, eps)?)
}
