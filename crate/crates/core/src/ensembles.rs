//! Random diagonal oracles: the unbiased / biased ensembles, the twisted pair
//! used for the amplification task, and normalized-trace statistics.
//!
//! An oracle is stored as its exponent vector `e` over the order-`q` group
//! plus an integer twist `t`; entry `k` of the diagonal is
//! `ω^{e_k} · exp(2πi·t·k/d)`. The twist is the power of the fixed diagonal
//! `D = diag(exp(2πik/d))`, so `DV` is `V` with the twist incremented.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::par::{self, Exec};
use crate::phase::{self, PhaseDistribution};
use crate::rng;
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Entries i.i.d. from `μ_0`.
    Unbiased0,
    /// Entries i.i.d. from `μ_ε`.
    Biased1,
    /// `U = V` with `V` from the biased ensemble.
    #[serde(rename = "sec4_v")]
    Sec4V,
    /// `U = DV` with `V` from the biased ensemble.
    #[serde(rename = "sec4_dv")]
    Sec4DV,
}

impl EnsembleKind {
    pub fn twist(self) -> i64 {
        match self {
            EnsembleKind::Sec4DV => 1,
            _ => 0,
        }
    }

    pub fn is_biased(self) -> bool {
        !matches!(self, EnsembleKind::Unbiased0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub d: usize,
    pub q: u32,
    pub eps: f64,
    /// Multiply every entry by one shared phase drawn from `μ_0`.
    #[serde(default)]
    pub phase_randomize: bool,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, d: usize, q: u32, eps: f64) -> Result<Self> {
        let spec = Self { kind, d, q, eps, phase_randomize: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_phase_randomization(mut self, on: bool) -> Self {
        self.phase_randomize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return param("ensemble dimension must be positive");
        }
        PhaseDistribution::new(self.eps, self.q)?;
        Ok(())
    }

    /// Bias of the per-entry distribution actually sampled.
    pub fn entry_bias(&self) -> f64 {
        if self.kind.is_biased() {
            self.eps
        } else {
            0.0
        }
    }
}

/// A diagonal unitary `diag(ω^{e_k} · e^{2πi·t·k/d})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalOracle {
    exponents: Vec<u32>,
    order: u32,
    twist: i64,
}

impl DiagonalOracle {
    pub fn new(exponents: Vec<u32>, order: u32) -> Result<Self> {
        if order < 2 {
            return param(format!("group order must be at least 2, got {order}"));
        }
        if exponents.is_empty() {
            return param("oracle dimension must be positive");
        }
        if let Some(&e) = exponents.iter().find(|&&e| e >= order) {
            return param(format!("exponent {e} not reduced mod {order}"));
        }
        Ok(Self { exponents, order, twist: 0 })
    }

    pub fn identity(d: usize, q: u32) -> Result<Self> {
        Self::new(vec![0; d], q)
    }

    /// Builds from arbitrary integer exponents, reducing them mod `q`.
    pub fn from_powers(powers: &[i64], q: u32) -> Result<Self> {
        let exps = powers.iter().map(|&p| p.rem_euclid(q as i64) as u32).collect();
        Self::new(exps, q)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    /// `D^t · self`.
    pub fn twisted(&self, t: i64) -> Self {
        Self { twist: (self.twist + t).rem_euclid(self.dim() as i64), ..self.clone() }
    }

    /// `U†`.
    pub fn inverse(&self) -> Self {
        let q = self.order;
        Self {
            exponents: self.exponents.iter().map(|&e| (q - e) % q).collect(),
            order: q,
            twist: (-self.twist).rem_euclid(self.dim() as i64),
        }
    }

    fn twist_phase(&self, k: usize) -> C64 {
        if self.twist == 0 {
            return C64::new(1.0, 0.0);
        }
        let d = self.dim() as i64;
        let r = (self.twist * k as i64).rem_euclid(d) as f64;
        C64::from_polar(1.0, 2.0 * PI * r / d as f64)
    }

    /// Diagonal entry `k`.
    pub fn entry(&self, k: usize) -> C64 {
        phase::root_of_unity(self.exponents[k] as i64, self.order) * self.twist_phase(k)
    }

    /// All diagonal entries.
    pub fn entries(&self) -> Vec<C64> {
        let table = root_table(self.order);
        (0..self.dim())
            .map(|k| table[self.exponents[k] as usize] * self.twist_phase(k))
            .collect()
    }

    /// Applies `U` (or `U†`) to a vector laid out as `d` consecutive blocks
    /// of length `block`, block `k` belonging to oracle index `k`.
    pub fn apply_blocks(&self, amps: &mut [C64], block: usize, inverse: bool) -> Result<()> {
        if amps.len() != self.dim() * block {
            return Err(Error::Dimension(format!(
                "oracle of dimension {} applied to vector of length {} with block {block}",
                self.dim(),
                amps.len()
            )));
        }
        for (chunk, u) in amps.chunks_mut(block).zip(self.entries()) {
            let u = if inverse { u.conj() } else { u };
            for a in chunk {
                *a *= u;
            }
        }
        Ok(())
    }

    /// `n̄tr(U) = (1/d)·tr(U)`, summed with Neumaier compensation.
    pub fn normalized_trace(&self) -> C64 {
        let table = root_table(self.order);
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for (k, &e) in self.exponents.iter().enumerate() {
            let z = table[e as usize] * self.twist_phase(k);
            re.add(z.re);
            im.add(z.im);
        }
        let d = self.dim() as f64;
        C64::new(re.total() / d, im.total() / d)
    }
}

fn root_table(q: u32) -> Vec<C64> {
    (0..q as i64).map(|k| phase::root_of_unity(k, q)).collect()
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Draws one oracle from `spec`.
pub fn draw<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<DiagonalOracle> {
    spec.validate()?;
    let dist = PhaseDistribution::new(spec.entry_bias(), spec.q)?;
    let mut exponents: Vec<u32> = (0..spec.d).map(|_| dist.sample_exponent(rng)).collect();
    if spec.phase_randomize {
        let phi = rng.random_range(0..spec.q);
        for e in &mut exponents {
            *e = (*e + phi) % spec.q;
        }
    }
    Ok(DiagonalOracle { exponents, order: spec.q, twist: 0 }.twisted(spec.kind.twist()))
}

/// `E[n̄tr(U)]` for `U` drawn from `spec`.
pub fn expected_normalized_trace(spec: &EnsembleSpec) -> Result<C64> {
    spec.validate()?;
    if spec.phase_randomize || spec.kind.twist().rem_euclid(spec.d as i64) != 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    phase::mean(spec.entry_bias(), spec.q)
}

/// Dimension constant: at `d = C/ε²` both normalized-trace events hold
/// with empirical rate at least 0.99.
pub const CALIBRATED_C: f64 = 800.0;

/// `⌈C/ε²⌉`.
pub fn calibrated_dimension(eps: f64) -> usize {
    (CALIBRATED_C / (eps * eps)).ceil() as usize
}

/// Hoeffding tail bound `4·exp(−d·t²/8)` on `Pr[|n̄tr − E n̄tr| ≥ t]`.
pub fn hoeffding_tail(d: usize, t: f64) -> f64 {
    4.0 * (-(d as f64) * t * t / 8.0).exp()
}

/// Normalized traces of `trials` independent draws; trial `i` uses the
/// stream derived from `(seed, i)`.
pub fn sample_traces(spec: &EnsembleSpec, trials: usize, seed: u64, exec: Exec) -> Result<Vec<C64>> {
    spec.validate()?;
    par::map_range(exec, trials, |i| {
        let mut r = rng::trial_stream(seed, &[i as u64]);
        draw(spec, &mut r).map(|u| u.normalized_trace())
    })
    .into_iter()
    .collect()
}

/// Fraction of `trials` draws with `|n̄tr − E[n̄tr]| ≥ t`.
pub fn concentration_check(spec: &EnsembleSpec, t: f64, trials: usize, seed: u64, exec: Exec) -> Result<f64> {
    if trials < 100 {
        return param(format!("concentration check needs at least 100 trials, got {trials}"));
    }
    let mean = expected_normalized_trace(spec)?;
    let traces = sample_traces(spec, trials, seed, exec)?;
    let hits = traces.iter().filter(|z| (**z - mean).norm() >= t).count();
    Ok(hits as f64 / trials as f64)
}

/// Gap statistics for the unbiased vs biased ensembles.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceGap {
    /// Fraction of unbiased draws with `|n̄tr| < 0.1ε`.
    pub unbiased_below: f64,
    /// Fraction of biased draws with `|n̄tr| ≥ 0.2ε`.
    pub biased_above: f64,
}

/// Runs both ensembles at `(ε, d, q)`; the two ensembles use disjoint
/// streams derived from `seed`.
pub fn trace_gap_check(eps: f64, d: usize, q: u32, trials: usize, seed: u64, exec: Exec) -> Result<TraceGap> {
    let s0 = EnsembleSpec::new(EnsembleKind::Unbiased0, d, q, eps)?;
    let s1 = EnsembleSpec::new(EnsembleKind::Biased1, d, q, eps)?;
    let t0 = sample_traces(&s0, trials, rng::derive_seed(seed, &[0]), exec)?;
    let t1 = sample_traces(&s1, trials, rng::derive_seed(seed, &[1]), exec)?;
    let n = trials.max(1) as f64;
    Ok(TraceGap {
        unbiased_below: t0.iter().filter(|z| z.norm() < 0.1 * eps).count() as f64 / n,
        biased_above: t1.iter().filter(|z| z.norm() >= 0.2 * eps).count() as f64 / n,
    })
}
