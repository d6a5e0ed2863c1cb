use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

use super::oracle::PreparationOracle;

/// `√(good fraction)` over `shots` plain preparations: `shots` forward
/// queries, no inverses.
pub fn naive_estimate<R: Rng + ?Sized>(x: &mut PreparationOracle, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return param("naive estimation needs at least one shot");
    }
    let hits = x.sample_good(0, shots, rng);
    Ok((hits as f64 / shots as f64).max(0.0).sqrt())
}

/// Maximum-likelihood amplitude estimation over Grover powers
/// `k ∈ {0} ∪ {⌊k_max/2^i⌋}` with `k_max = ⌈depth/ε⌉`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub shots_per_level: u64,
    /// Independent runs whose median is returned.
    pub repetitions: usize,
    pub depth: f64,
    /// Likelihood grid points per fringe of the deepest level.
    pub grid_per_fringe: usize,
}

impl Default for AeConfig {
    fn default() -> Self {
        Self { shots_per_level: 16, repetitions: 5, depth: 0.5, grid_per_fringe: 40 }
    }
}

impl AeConfig {
    /// Grover powers used for target error `eps`, ascending.
    pub fn schedule(&self, eps: f64) -> Vec<usize> {
        let k_max = (self.depth / eps).ceil() as usize;
        let mut ks = vec![0];
        let mut k = k_max;
        while k > 0 {
            ks.push(k);
            k /= 2;
        }
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Exact query cost (forward + inverse) of one call.
    pub fn query_cost(&self, eps: f64) -> u64 {
        let per_run: u64 = self.schedule(eps).iter().map(|&k| (2 * k as u64 + 1) * self.shots_per_level).sum();
        per_run * self.repetitions as u64
    }

    /// `K` with cost `≤ K/ε`.
    pub fn query_constant(&self, eps: f64) -> f64 {
        self.query_cost(eps) as f64 * eps
    }
}

pub fn amplitude_estimate<R: Rng + ?Sized>(x: &mut PreparationOracle, eps: f64, rng: &mut R) -> Result<f64> {
    amplitude_estimate_with(x, eps, &AeConfig::default(), rng)
}

pub fn amplitude_estimate_with<R: Rng + ?Sized>(
    x: &mut PreparationOracle,
    eps: f64,
    cfg: &AeConfig,
    rng: &mut R,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("target error must be in (0, 1), got {eps}"));
    }
    if cfg.repetitions == 0 || cfg.shots_per_level == 0 || cfg.grid_per_fringe == 0 {
        return param("estimation config needs positive repetitions, shots and grid");
    }
    let ks = cfg.schedule(eps);
    let mut runs: Vec<f64> = (0..cfg.repetitions)
        .map(|_| {
            let hits: Vec<u64> = ks.iter().map(|&k| x.sample_good(k, cfg.shots_per_level, rng)).collect();
            mle(&ks, &hits, cfg.shots_per_level, cfg.grid_per_fringe).sin()
        })
        .collect();
    runs.sort_by(f64::total_cmp);
    Ok(runs[runs.len() / 2])
}

fn log_likelihood(theta: f64, ks: &[usize], hits: &[u64], shots: u64) -> f64 {
    const FLOOR: f64 = 1e-300;
    ks.iter()
        .zip(hits)
        .map(|(&k, &h)| {
            let p = ((2 * k + 1) as f64 * theta).sin().powi(2);
            let good = if h > 0 { h as f64 * p.max(FLOOR).ln() } else { 0.0 };
            let bad = if h < shots { (shots - h) as f64 * (1.0 - p).max(FLOOR).ln() } else { 0.0 };
            good + bad
        })
        .sum()
}

/// Grid search over `θ ∈ [0, π/2]` then golden-section refinement.
fn mle(ks: &[usize], hits: &[u64], shots: u64, per_fringe: usize) -> f64 {
    let k_max = *ks.last().unwrap_or(&0);
    let points = per_fringe * (2 * k_max + 1) + 1;
    let step = FRAC_PI_2 / (points - 1) as f64;
    let f = |t: f64| log_likelihood(t, ks, hits, shots);
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..points {
        let t = i as f64 * step;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), (best.0 + step).min(FRAC_PI_2));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    let t = (lo + hi) / 2.0;
    if f(t) >= best.1 {
        t
    } else {
        best.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVec, ONE};
    use crate::rng;
    use crate::C64;

    fn oracle_with(a: f64) -> PreparationOracle {
        let mut x0 = CVec::zeros(4);
        x0[1] = C64::new(a, 0.0);
        x0[2] = C64::new((1.0 - a * a).sqrt(), 0.0);
        PreparationOracle::subspace(&x0)
    }

    #[test]
    fn schedule_halves_down_from_depth() {
        let cfg = AeConfig::default();
        assert_eq!(cfg.schedule(0.1), vec![0, 1, 2, 5]);
        assert_eq!(cfg.schedule(0.01), vec![0, 1, 3, 6, 12, 25, 50]);
        let c1 = cfg.query_constant(0.01);
        assert!(c1 < 180.0, "{c1}");
    }

    #[test]
    fn naive_extremes() {
        let mut r = rng::stream(101);
        assert_eq!(naive_estimate(&mut oracle_with(1.0), 50, &mut r).unwrap(), 1.0);
        assert_eq!(naive_estimate(&mut oracle_with(0.0), 50, &mut r).unwrap(), 0.0);
        let mut o = oracle_with(0.3);
        naive_estimate(&mut o, 10, &mut r).unwrap();
        assert_eq!((o.counts().forward, o.counts().inverse), (10, 0));
        assert!(naive_estimate(&mut o, 0, &mut r).is_err());
    }

    #[test]
    fn zero_amplitude_estimates_zero() {
        let mut r = rng::stream(102);
        for eps in [0.1, 0.01] {
            assert!(amplitude_estimate(&mut oracle_with(0.0), eps, &mut r).unwrap() < eps);
        }
        let mut x0 = CVec::zeros(2);
        x0[1] = ONE;
        assert!((amplitude_estimate(&mut PreparationOracle::subspace(&x0), 0.05, &mut r).unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn counter_matches_schedule() {
        let mut r = rng::stream(103);
        let mut o = oracle_with(0.4);
        amplitude_estimate(&mut o, 0.05, &mut r).unwrap();
        assert_eq!(o.counts().total(), AeConfig::default().query_cost(0.05));
        assert!(o.counts().inverse > 0);
    }
}
