use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{draw, DiagonalOracle, EnsembleKind, EnsembleSpec};
use crate::error::{param, Result};
use crate::par::{self, Exec};
use crate::rng;

use super::amplify::amplitude_amplify;
use super::estimate::{amplitude_estimate, naive_estimate};
use super::oracle::{PreparationOracle, QueryCounts};
use super::reduction::{ReductionCircuit, Variant};

/// How Grover iterates are simulated.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Full `2d`-dimensional statevector.
    Statevector,
    /// Exact evolution in the two-dimensional span of `X|0⟩`'s good and bad
    /// parts.
    #[default]
    Subspace,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Amplitude estimation at error `0.05ε`, threshold `0.15ε`.
    Estimation,
    /// Sampling with `⌈50/ε²⌉` shots, same threshold.
    Naive,
    /// Amplitude amplification on the twisted pair, then a computational
    /// basis measurement of `R`.
    Amplification,
    /// The amplification distinguisher wrapped with a random twist coin to
    /// tell the unbiased and biased ensembles apart.
    Lifted,
}

impl Method {
    /// The two hypotheses, in trial order.
    pub fn labels(self) -> [u8; 2] {
        match self {
            Method::Amplification => [1, 2],
            _ => [0, 1],
        }
    }

    pub fn ensemble(self, b: u8) -> EnsembleKind {
        match (self, b) {
            (Method::Amplification, 1) => EnsembleKind::Sec4V,
            (Method::Amplification, _) => EnsembleKind::Sec4DV,
            (_, 0) => EnsembleKind::Unbiased0,
            _ => EnsembleKind::Biased1,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub guess: u8,
    /// Amplitude estimate, or for amplification the probability of outcome
    /// `|0⟩` in the returned state.
    pub estimate: f64,
    pub counts: QueryCounts,
}

fn prep(u: &DiagonalOracle, variant: Variant, engine: Engine) -> Result<PreparationOracle> {
    let c = ReductionCircuit::new(u, variant)?;
    Ok(match engine {
        Engine::Statevector => PreparationOracle::reduction(c),
        Engine::Subspace => PreparationOracle::reduction_subspace(&c),
    })
}

/// Shots of the naive baseline.
pub fn naive_shots(eps: f64) -> u64 {
    (50.0 / (eps * eps)).ceil() as u64
}

fn threshold_guess(a_hat: f64, eps: f64) -> u8 {
    u8::from(a_hat >= 0.15 * eps)
}

pub fn distinguish_by_estimation<R: Rng + ?Sized>(u: &DiagonalOracle, eps: f64, engine: Engine, rng: &mut R) -> Result<Decision> {
    let mut x = prep(u, Variant::Sec2, engine)?;
    let a_hat = amplitude_estimate(&mut x, 0.05 * eps, rng)?;
    Ok(Decision { guess: threshold_guess(a_hat, eps), estimate: a_hat, counts: x.counts() })
}

pub fn distinguish_naive<R: Rng + ?Sized>(u: &DiagonalOracle, eps: f64, engine: Engine, rng: &mut R) -> Result<Decision> {
    if eps.is_nan() || eps <= 0.0 {
        return param("naive baseline needs eps > 0");
    }
    let mut x = prep(u, Variant::Sec2, engine)?;
    let a_hat = naive_estimate(&mut x, naive_shots(eps), rng)?;
    Ok(Decision { guess: threshold_guess(a_hat, eps), estimate: a_hat, counts: x.counts() })
}

/// Guess `1` on outcome `|0⟩_R`, `2` on `|1⟩_R`. If amplification gives up,
/// guesses uniformly.
pub fn distinguish_by_amplification<R: Rng + ?Sized>(u: &DiagonalOracle, eps: f64, engine: Engine, rng: &mut R) -> Result<Decision> {
    let _ = eps;
    let mut x = prep(u, Variant::Sec4, engine)?;
    let out = amplitude_amplify(&mut x, rng);
    let Some(state) = out.state else {
        return Ok(Decision { guess: 1 + u8::from(rng.random::<bool>()), estimate: f64::NAN, counts: out.counts });
    };
    let amps = state.amplitudes();
    let p0 = amps[0].norm_sqr() + amps[1].norm_sqr();
    let total: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let r: f64 = rng.random::<f64>() * total;
    let guess = if r < p0 { 1 } else { 2 };
    Ok(Decision { guess, estimate: p0 / total, counts: out.counts })
}

/// Tells the unbiased from the biased ensemble with the amplification
/// distinguisher: flip `b' ∈ {1, 2}`, run on `U` or `DU`, answer `1` iff the
/// distinguisher returns `b'`. Returns the decision and the coin.
pub fn estimation_via_amplification<R: Rng + ?Sized>(
    u: &DiagonalOracle,
    eps: f64,
    engine: Engine,
    rng: &mut R,
) -> Result<(Decision, u8)> {
    let coin = 1 + u8::from(rng.random::<bool>());
    let target = if coin == 2 { u.twisted(1) } else { u.clone() };
    let inner = distinguish_by_amplification(&target, eps, engine, rng)?;
    Ok((Decision { guess: u8::from(inner.guess == coin), ..inner }, coin))
}

/// Per-trial record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub b: u8,
    pub b_hat: u8,
    pub a_hat: f64,
    pub fwd_queries: u64,
    pub inv_queries: u64,
    pub seed: u64,
}

impl TrialRow {
    pub fn correct(&self) -> bool {
        self.b == self.b_hat
    }
}

/// Runs one trial from its own seed: the oracle is drawn first, then the
/// algorithm consumes the same stream.
pub fn run_trial(method: Method, eps: f64, d: usize, q: u32, b: u8, seed: u64, engine: Engine) -> Result<Decision> {
    let mut r = rng::stream(seed);
    let spec = EnsembleSpec::new(method.ensemble(b), d, q, eps)?;
    let u = draw(&spec, &mut r)?;
    match method {
        Method::Estimation => distinguish_by_estimation(&u, eps, engine, &mut r),
        Method::Naive => distinguish_naive(&u, eps, engine, &mut r),
        Method::Amplification => distinguish_by_amplification(&u, eps, engine, &mut r),
        Method::Lifted => estimation_via_amplification(&u, eps, engine, &mut r).map(|(d, _)| d),
    }
}

/// `trials` trials alternating between the two hypotheses; trial `i` uses
/// seed `derive_seed(master, [i])`.
#[allow(clippy::too_many_arguments)]
pub fn run_trials(
    method: Method,
    eps: f64,
    d: usize,
    q: u32,
    trials: usize,
    master: u64,
    engine: Engine,
    exec: Exec,
) -> Result<Vec<TrialRow>> {
    let labels = method.labels();
    par::map_range(exec, trials, |i| {
        let b = labels[i % 2];
        let seed = rng::derive_seed(master, &[i as u64]);
        run_trial(method, eps, d, q, b, seed, engine).map(|dec| TrialRow {
            trial: i,
            b,
            b_hat: dec.guess,
            a_hat: dec.estimate,
            fwd_queries: dec.counts.forward,
            inv_queries: dec.counts.inverse,
            seed,
        })
    })
    .into_iter()
    .collect()
}
