//! The cyclic group of order-`q` roots of unity and the biased phase
//! distributions over it.
//!
//! `μ_ε = (1 − ε)·uniform + ε·uniform(right half)`, where the right half is
//! the `2⌊q/4⌋ + 1` roots `ω^{−⌊q/4⌋}, …, ω^{⌊q/4⌋}`. Exponents are stored as
//! their representatives in `0..q`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::C64;

/// Default group order: a prime comfortably above `1/ε²` for the default
/// biases used by the experiments.
pub const DEFAULT_ORDER: u32 = 257;

/// An element `ω^exponent` of the order-`q` cyclic group.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicPhase {
    exponent: u32,
    order: u32,
}

impl CyclicPhase {
    pub fn new(exponent: i64, order: u32) -> Result<Self> {
        check_order(order)?;
        Ok(Self { exponent: exponent.rem_euclid(order as i64) as u32, order })
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    pub fn order(self) -> u32 {
        self.order
    }

    /// `exp(2πi·exponent/q)`.
    pub fn value(self) -> C64 {
        root_of_unity(self.exponent as i64, self.order)
    }

    pub fn inv(self) -> Self {
        Self { exponent: (self.order - self.exponent) % self.order, order: self.order }
    }
}

impl std::ops::Mul for CyclicPhase {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.order, other.order);
        Self { exponent: (self.exponent + other.exponent) % self.order, order: self.order }
    }
}

/// `ω^k` for `ω = e^{2πi/q}`, with `k` reduced first so large powers stay
/// accurate.
pub fn root_of_unity(k: i64, q: u32) -> C64 {
    let r = k.rem_euclid(q as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / q as f64)
}

fn check_order(q: u32) -> Result<()> {
    if q < 2 {
        return param(format!("group order q = {q} must be at least 2"));
    }
    Ok(())
}

fn check_bias(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return param(format!("bias ε = {eps} must lie in [0, 1]"));
    }
    Ok(())
}

/// `⌊q/4⌋`.
pub fn half_width(q: u32) -> u32 {
    q / 4
}

/// Number of roots in the right half, `2⌊q/4⌋ + 1`.
pub fn support_size(q: u32) -> u32 {
    2 * half_width(q) + 1
}

/// Whether exponent `k` (in `0..q`) lies in the right-half support.
pub fn in_right_half(q: u32, k: u32) -> bool {
    let h = half_width(q);
    k <= h || k >= q - h
}

/// The exponents of the right half, in order `0, 1, …, h, q−h, …, q−1`.
pub fn right_half(q: u32) -> Vec<u32> {
    let h = half_width(q);
    (0..=h).chain((q - h..q).filter(|&k| k > h)).collect()
}

/// `μ_ε(ω^k)`.
pub fn pmf(eps: f64, q: u32, k: u32) -> Result<f64> {
    check_order(q)?;
    check_bias(eps)?;
    if k >= q {
        return param(format!("exponent {k} out of range for order {q}"));
    }
    Ok(pmf_unchecked(eps, q, k))
}

fn pmf_unchecked(eps: f64, q: u32, k: u32) -> f64 {
    let qf = q as f64;
    if in_right_half(q, k) {
        (1.0 + eps * (qf / support_size(q) as f64 - 1.0)) / qf
    } else {
        (1.0 - eps) / qf
    }
}

/// Normalized Dirichlet kernel `(1/s)·Σ_{j=−h}^{h} ω^{jm}` with `s = 2h+1`,
/// i.e. `E_{g∼μ_1}[g^m]`. Real for every `m`.
pub fn dirichlet(q: u32, m: i64) -> f64 {
    let r = m.rem_euclid(q as i64);
    if r == 0 {
        return 1.0;
    }
    let s = support_size(q) as f64;
    let x = PI * r as f64 / q as f64;
    (s * x).sin() / (s * x.sin())
}

/// `E_{g∼μ_ε}[g] = ε·D(q)`.
pub fn mean(eps: f64, q: u32) -> Result<C64> {
    check_order(q)?;
    check_bias(eps)?;
    Ok(C64::new(eps * dirichlet(q, 1), 0.0))
}

/// `E_{g∼μ_ε}[g^m]` for any integer `m`.
pub fn moment(eps: f64, q: u32, m: i64) -> Result<C64> {
    check_order(q)?;
    check_bias(eps)?;
    Ok(moment_unchecked(eps, q, m))
}

fn moment_unchecked(eps: f64, q: u32, m: i64) -> C64 {
    if m.rem_euclid(q as i64) == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::new(eps * dirichlet(q, m), 0.0)
    }
}

/// `μ_ε` over the order-`q` group with its probability table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    order: u32,
    bias: f64,
    pmf: Vec<f64>,
}

impl PhaseDistribution {
    pub fn new(eps: f64, q: u32) -> Result<Self> {
        check_order(q)?;
        check_bias(eps)?;
        let pmf = (0..q).map(|k| pmf_unchecked(eps, q, k)).collect();
        Ok(Self { order: q, bias: eps, pmf })
    }

    pub fn uniform(q: u32) -> Result<Self> {
        Self::new(0.0, q)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> C64 {
        moment_unchecked(self.bias, self.order, 1)
    }

    pub fn moment(&self, m: i64) -> C64 {
        moment_unchecked(self.bias, self.order, m)
    }

    /// Draws an exponent. Sampling goes through the mixture: with
    /// probability `ε` a uniform element of the right half, otherwise a
    /// uniform element of the group. An all-zero stream yields exponent 0.
    pub fn sample_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let q = self.order;
        let u: f64 = rng.random();
        if u < self.bias {
            let h = half_width(q);
            let j = rng.random_range(0..support_size(q));
            if j <= h {
                j
            } else {
                q - (j - h)
            }
        } else {
            rng.random_range(0..q)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CyclicPhase {
        CyclicPhase { exponent: self.sample_exponent(rng), order: self.order }
    }
}

/// Free-function form of [`PhaseDistribution::sample`].
pub fn sample<R: Rng + ?Sized>(eps: f64, q: u32, rng: &mut R) -> Result<CyclicPhase> {
    Ok(PhaseDistribution::new(eps, q)?.sample(rng))
}

/// Memoized moments `E_{μ_ε}[g^m]` for `m ∈ [−range, range]`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    order: u32,
    bias: f64,
    range: i64,
    values: Vec<C64>,
}

impl MomentTable {
    pub fn new(eps: f64, q: u32, range: usize) -> Result<Self> {
        check_order(q)?;
        check_bias(eps)?;
        let range = range as i64;
        let values = (-range..=range).map(|m| moment_unchecked(eps, q, m)).collect();
        Ok(Self { order: q, bias: eps, range, values })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn range(&self) -> i64 {
        self.range
    }

    /// Moment `m`; falls back to the closed form outside the memoized range.
    #[inline]
    pub fn get(&self, m: i64) -> C64 {
        if m.abs() <= self.range {
            self.values[(m + self.range) as usize]
        } else {
            moment_unchecked(self.bias, self.order, m)
        }
    }
}
