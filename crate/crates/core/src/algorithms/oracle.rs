use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{complete_basis, unitarity_defect, CMat, CVec, StateVector, TOL, ZERO};
use crate::C64;

use super::reduction::ReductionCircuit;

/// Forward / inverse application counts.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub forward: u64,
    pub inverse: u64,
}

impl QueryCounts {
    pub fn total(self) -> u64 {
        self.forward + self.inverse
    }
}

impl std::ops::Add for QueryCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { forward: self.forward + o.forward, inverse: self.inverse + o.inverse }
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Dense(CMat),
    Reduction(ReductionCircuit),
    /// Exact two-dimensional Grover dynamics: `θ = asin a` and the
    /// normalized good component of `X|0⟩`.
    Subspace { theta: f64, good: Option<CVec> },
}

/// A state-preparation unitary `X` on `R ⊗ S` (`S` a qubit, basis index
/// `r·2 + s`), with `X|0⟩ = a|good⟩|1⟩ + √(1−a²)|bad⟩|0⟩`.
///
/// Algorithms see `X` only through Grover-iterate measurements: preparing
/// `Q^k X|0⟩` with `Q = X·S_0·X†·S_good` and measuring the flag. Each such
/// shot costs `k + 1` forward and `k` inverse applications, which the
/// counters record.
#[derive(Clone, Debug)]
pub struct PreparationOracle {
    backend: Backend,
    dim: usize,
    counts: QueryCounts,
    cache: BTreeMap<usize, f64>,
}

fn good_part(x: &CVec) -> CVec {
    CVec::from_fn(x.len(), |i, _| if i % 2 == 1 { x[i] } else { ZERO })
}

impl PreparationOracle {
    /// From an explicit unitary.
    pub fn dense(x: CMat) -> Result<Self> {
        let dim = x.nrows();
        if x.ncols() != dim || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::Dimension("preparation unitary must be square of even size".into()));
        }
        if unitarity_defect(&x) > TOL {
            return param("preparation matrix is not unitary");
        }
        Ok(Self { backend: Backend::Dense(x), dim, counts: QueryCounts::default(), cache: BTreeMap::new() })
    }

    /// A unitary whose first column is `x0 = X|0⟩` (normalized), completed
    /// by Gram–Schmidt.
    pub fn from_first_column(x0: &CVec) -> Result<Self> {
        let n = x0.norm();
        if (n - 1.0).abs() > TOL {
            return param(format!("first column must be a unit vector, norm {n}"));
        }
        Self::dense(complete_basis(std::slice::from_ref(x0), x0.len())?)
    }

    /// The reduction circuit, simulated as a full statevector.
    pub fn reduction(circuit: ReductionCircuit) -> Self {
        let dim = circuit.dim();
        Self { backend: Backend::Reduction(circuit), dim, counts: QueryCounts::default(), cache: BTreeMap::new() }
    }

    /// The reduction circuit with Grover iterates evolved in the exact
    /// two-dimensional invariant subspace of `X|0⟩`.
    pub fn reduction_subspace(circuit: &ReductionCircuit) -> Self {
        Self::subspace(&circuit.prepare())
    }

    /// Subspace backend from the prepared state `X|0⟩`.
    pub fn subspace(x0: &CVec) -> Self {
        let g = good_part(x0);
        let a = g.norm().min(1.0);
        let good = (a > 0.0).then(|| g / C64::new(a, 0.0));
        Self {
            backend: Backend::Subspace { theta: a.asin(), good },
            dim: x0.len(),
            counts: QueryCounts::default(),
            cache: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    pub fn reset_counts(&mut self) {
        self.counts = QueryCounts::default();
    }

    /// `X` or `X†` on a full vector; only for the statevector backends.
    fn apply(&self, x: &mut CVec, inverse: bool) {
        match &self.backend {
            Backend::Dense(m) => {
                *x = if inverse { m.ad_mul(x) } else { m * &*x };
            }
            Backend::Reduction(c) => c.apply(x.as_mut_slice(), inverse),
            Backend::Subspace { .. } => unreachable!("subspace backend has no full action"),
        }
    }

    /// Applies `X` once to a caller state, charging one forward query.
    pub fn forward(&mut self, x: &mut CVec) -> Result<()> {
        self.check_len(x)?;
        if matches!(self.backend, Backend::Subspace { .. }) {
            return param("the subspace backend does not expose the full unitary");
        }
        self.apply(x, false);
        self.counts.forward += 1;
        Ok(())
    }

    /// Applies `X†` once, charging one inverse query.
    pub fn inverse(&mut self, x: &mut CVec) -> Result<()> {
        self.check_len(x)?;
        if matches!(self.backend, Backend::Subspace { .. }) {
            return param("the subspace backend does not expose the full unitary");
        }
        self.apply(x, true);
        self.counts.inverse += 1;
        Ok(())
    }

    fn check_len(&self, x: &CVec) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("state of length {} for oracle of dimension {}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// `Q^k X|0⟩` for the statevector backends; not charged.
    fn iterate_state(&self, k: usize) -> CVec {
        let mut x = CVec::zeros(self.dim);
        x[0] = C64::new(1.0, 0.0);
        self.apply(&mut x, false);
        for _ in 0..k {
            for i in (1..self.dim).step_by(2) {
                x[i] = -x[i];
            }
            self.apply(&mut x, true);
            x[0] = -x[0];
            self.apply(&mut x, false);
        }
        x
    }

    /// Probability that `Q^k X|0⟩` carries the good flag. Not charged.
    fn good_probability(&mut self, k: usize) -> f64 {
        if let Some(&p) = self.cache.get(&k) {
            return p;
        }
        let p = match &self.backend {
            Backend::Subspace { theta, .. } => ((2 * k + 1) as f64 * theta).sin().powi(2),
            _ => good_part(&self.iterate_state(k)).norm_squared(),
        }
        .clamp(0.0, 1.0);
        self.cache.insert(k, p);
        p
    }

    fn charge(&mut self, k: usize, shots: u64) {
        self.counts.forward += (k as u64 + 1) * shots;
        self.counts.inverse += k as u64 * shots;
    }

    /// Prepares `Q^k X|0⟩` `shots` times, measures the flag each time and
    /// returns the number of good outcomes.
    pub fn sample_good<R: Rng + ?Sized>(&mut self, k: usize, shots: u64, rng: &mut R) -> u64 {
        let p = self.good_probability(k);
        self.charge(k, shots);
        if shots == 0 {
            return 0;
        }
        Binomial::new(shots, p).expect("probability in [0, 1]").sample(rng)
    }

    /// One shot of `Q^k X|0⟩` with a flag measurement; on a good outcome
    /// returns the post-measurement state.
    pub fn measure_iterate<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Option<StateVector> {
        let p = self.good_probability(k);
        self.charge(k, 1);
        if rng.random::<f64>() >= p {
            return None;
        }
        let good = match &self.backend {
            Backend::Subspace { good, .. } => good.clone()?,
            _ => {
                let g = good_part(&self.iterate_state(k));
                let n = g.norm();
                if n == 0.0 {
                    return None;
                }
                g / C64::new(n, 0.0)
            }
        };
        StateVector::new(good, vec![self.dim / 2, 2]).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{draw, EnsembleKind, EnsembleSpec};
    use crate::algorithms::reduction::Variant;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forward_then_inverse_is_identity_and_counted() {
        let mut r = rng::stream(91);
        let x0 = crate::linalg::random_state(8, &mut r);
        let mut o = PreparationOracle::from_first_column(&x0).unwrap();
        let mut v = crate::linalg::random_state(8, &mut r);
        let w = v.clone();
        o.forward(&mut v).unwrap();
        o.inverse(&mut v).unwrap();
        assert!((v - w).norm() < 1e-10);
        assert_eq!(o.counts(), QueryCounts { forward: 1, inverse: 1 });
        o.sample_good(3, 10, &mut r);
        assert_eq!(o.counts(), QueryCounts { forward: 41, inverse: 31 });
    }

    #[test]
    fn backends_agree_on_iterate_probabilities() {
        let mut r = rng::stream(92);
        for variant in [Variant::Sec2, Variant::Sec4] {
            let spec = EnsembleSpec::new(EnsembleKind::Biased1, 40, 257, 0.5).unwrap();
            let u = draw(&spec, &mut r).unwrap();
            let c = ReductionCircuit::new(&u, variant).unwrap();
            let mut full = PreparationOracle::reduction(c.clone());
            let mut sub = PreparationOracle::reduction_subspace(&c);
            for k in [0usize, 1, 2, 5, 9] {
                assert_abs_diff_eq!(full.good_probability(k), sub.good_probability(k), epsilon = 1e-10);
            }
            let gf = full.iterate_state(4);
            let g = good_part(&gf) / C64::new(good_part(&gf).norm(), 0.0);
            let Backend::Subspace { good: Some(gs), .. } = &sub.backend else { panic!() };
            assert_abs_diff_eq!(g.dotc(gs).norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_amplitude_is_fixed() {
        let mut x0 = CVec::zeros(4);
        x0[0] = C64::new(1.0, 0.0);
        let mut o = PreparationOracle::subspace(&x0);
        let mut r = rng::stream(93);
        assert_eq!(o.sample_good(7, 1000, &mut r), 0);
        assert!(o.measure_iterate(3, &mut r).is_none());
    }
}
