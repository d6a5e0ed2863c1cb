//! The ε-biased Fourier transform.
//!
//! Column `k` of `F̃` is `|F̃_k⟩ = Σ_g √μ_ε(g)·g^k |g⟩`. These columns are unit
//! vectors but not orthogonal for `ε > 0`. Gram–Schmidt (in column order)
//! turns them into an orthonormal basis `|G̅_k⟩`, and
//! `F^{(ε)} = Σ_j |j⟩⟨G̅_j|` maps `|F̃_k⟩` into `span{|0⟩, …, |k⟩}`:
//!
//! ```text
//! F^{(ε)} |F̃_k⟩ = α_k(k)|k⟩ + Σ_{ℓ<k} α_ℓ(k)|ℓ⟩
//! ```
//!
//! Rows of the group axis are indexed by exponent, so `|g⟩ = |j⟩` for
//! `g = ω^j`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::linalg::{hermitian_eigenvalues, orthonormalize_with_residuals, CMat, CVec};
use crate::phase::{self, PhaseDistribution};
use crate::C64;

/// Largest order accepted for dense construction.
pub const MAX_DENSE_ORDER: u32 = 4096;

#[derive(Clone, Debug)]
pub struct BiasedBasis {
    order: u32,
    bias: f64,
    ftilde: CMat,
    /// Columns `|G̅_k⟩`.
    gbar: CMat,
    /// Norms `‖G_k‖` of the Gram–Schmidt residuals.
    residuals: Vec<f64>,
    /// `α = F^{(ε)} F̃`; column `k` holds the coefficients `α_ℓ(k)`.
    alpha: CMat,
}

/// The `F̃` matrix alone.
pub fn ftilde(q: u32, eps: f64) -> Result<CMat> {
    let dist = PhaseDistribution::new(eps, q)?;
    let table: Vec<C64> = (0..q as i64).map(|k| phase::root_of_unity(k, q)).collect();
    let qq = q as usize;
    Ok(CMat::from_fn(qq, qq, |j, k| table[(j * k) % qq] * dist.pmf()[j].sqrt()))
}

impl BiasedBasis {
    /// Builds `F̃`, its Gram–Schmidt basis and `F^{(ε)}`. Any `ε < 1` is
    /// accepted; the bounds checked elsewhere only hold for `ε < 1/2`.
    pub fn build(q: u32, eps: f64) -> Result<Self> {
        if q > MAX_DENSE_ORDER {
            return param(format!("order {q} exceeds dense limit {MAX_DENSE_ORDER}"));
        }
        if !(0.0..1.0).contains(&eps) {
            return param(format!("biased transform needs 0 <= eps < 1, got {eps}"));
        }
        let ftilde = ftilde(q, eps)?;
        let (gbar, residuals) = orthonormalize_with_residuals(&ftilde)?;
        let alpha = gbar.ad_mul(&ftilde);
        Ok(Self { order: q, bias: eps, ftilde, gbar, residuals, alpha })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn ftilde(&self) -> &CMat {
        &self.ftilde
    }

    pub fn gbar(&self) -> &CMat {
        &self.gbar
    }

    /// The unitary `F^{(ε)}`.
    pub fn f_eps(&self) -> CMat {
        self.gbar.adjoint()
    }

    /// Coefficient matrix `F^{(ε)} F̃`.
    pub fn alpha_matrix(&self) -> &CMat {
        &self.alpha
    }

    /// Diagonal coefficient `α_k(k) = ⟨G̅_k|F̃_k⟩`.
    pub fn alpha(&self, k: usize) -> C64 {
        self.alpha[(k, k)]
    }

    pub fn residual_norm(&self, k: usize) -> f64 {
        self.residuals[k]
    }

    /// `⟨F̃_k|Π_{k−1}|F̃_k⟩` with `Π_{k−1} = Σ_{j<k} |G̅_j⟩⟨G̅_j|`.
    pub fn overlap(&self, k: usize) -> f64 {
        self.alpha.view((0, k), (k, 1)).norm_squared()
    }

    /// `⟨v|Π_{k−1}|v⟩`.
    pub fn projector_weight(&self, v: &CVec, k: usize) -> f64 {
        self.gbar.columns(0, k).ad_mul(v).norm_squared()
    }

    /// Largest `|α_ℓ(k)|` below the diagonal.
    pub fn lower_leakage(&self) -> f64 {
        let n = self.alpha.nrows();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for l in k + 1..n {
                worst = worst.max(self.alpha[(l, k)].norm());
            }
        }
        worst
    }

    pub fn summary(&self) -> BasisSummary {
        let q = self.order as usize;
        let min_alpha_sq = (0..q).map(|k| self.alpha(k).norm_sqr()).fold(f64::INFINITY, f64::min);
        let max_overlap = (0..q).map(|k| self.overlap(k)).fold(0.0, f64::max);
        let spectrum = singular_values(&self.ftilde);
        BasisSummary {
            q: self.order,
            eps: self.bias,
            min_alpha_sq,
            sigma_min: spectrum[0],
            sigma_max: spectrum[q - 1],
            max_overlap,
        }
    }
}

/// One grid row of the lemma checks.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSummary {
    pub q: u32,
    pub eps: f64,
    pub min_alpha_sq: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub max_overlap: f64,
}

/// Ascending singular values of `m`, via the eigenvalues of `m†m`.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    hermitian_eigenvalues(&m.ad_mul(m)).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularWindow {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Full ascending spectrum of `F̃`.
    pub spectrum: Vec<f64>,
}

/// Singular values of `F̃` for `(q, ε)`.
pub fn singular_window(q: u32, eps: f64) -> Result<SingularWindow> {
    let spectrum = singular_values(&ftilde(q, eps)?);
    Ok(SingularWindow { sigma_min: spectrum[0], sigma_max: spectrum[spectrum.len() - 1], spectrum })
}

/// The predicted spectrum `{√(q·μ_ε(k))}`, ascending.
pub fn predicted_spectrum(q: u32, eps: f64) -> Result<Vec<f64>> {
    let dist = PhaseDistribution::new(eps, q)?;
    let mut s: Vec<f64> = dist.pmf().iter().map(|p| (q as f64 * p).sqrt()).collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Overlap `⟨F̃_k|Π_{k−1}|F̃_k⟩` and the residual cross-check
/// `1 − ‖G_k‖²`.
pub fn overlap_bound_check(q: u32, eps: f64, k: usize) -> Result<(f64, f64)> {
    if k == 0 || k >= q as usize {
        return param(format!("overlap index must be in 1..{q}, got {k}"));
    }
    let b = BiasedBasis::build(q, eps)?;
    Ok((b.overlap(k), 1.0 - b.residual_norm(k).powi(2)))
}

/// `Σ_{i=1}^{q−1} |E_{μ_ε}[g^i]|²` by direct summation of moments.
pub fn moment_energy(eps: f64, q: u32) -> Result<f64> {
    let dist = PhaseDistribution::new(eps, q)?;
    Ok((1..q as i64).map(|i| dist.moment(i).norm_sqr()).sum())
}

/// Closed form `ε²(q/(2⌊q/4⌋+1) − 1)` of [`moment_energy`].
pub fn moment_energy_closed(eps: f64, q: u32) -> f64 {
    eps * eps * (q as f64 / phase::support_size(q) as f64 - 1.0)
}

/// Lower bound on `|α_k|²` from the Gram–Schmidt argument.
pub fn alpha_sq_bound(eps: f64) -> f64 {
    1.0 - 2.0 * eps * eps / (1.0 - eps)
}

/// The weaker stated bound `1 − 4ε²`.
pub fn alpha_sq_bound_loose(eps: f64) -> f64 {
    1.0 - 4.0 * eps * eps
}
