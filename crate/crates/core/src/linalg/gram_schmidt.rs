use crate::error::{Error, Result};
use crate::C64;

use super::{CMat, CVec, ONE, ZERO};

/// Relative residual below which a column counts as dependent.
const DEGENERACY: f64 = 1e-8;

/// Orthonormalizes `columns` in order with classical Gram–Schmidt plus one
/// re-orthogonalization pass.
///
/// Output `k` spans the same space as inputs `0..=k`, and `⟨out_k|in_k⟩` is
/// real and positive.
pub fn gram_schmidt(columns: &[CVec]) -> Result<Vec<CVec>> {
    let Some(first) = columns.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension("Gram-Schmidt input columns differ in length".into()));
    }
    let m = CMat::from_columns(columns);
    let q = orthonormalize_columns(&m)?;
    Ok(q.column_iter().map(|c| c.into_owned()).collect())
}

/// Matrix form of [`gram_schmidt`]: orthonormalizes the columns of `m`.
pub(crate) fn orthonormalize_columns(m: &CMat) -> Result<CMat> {
    orthonormalize_with_residuals(m).map(|(q, _)| q)
}

/// As [`orthonormalize_columns`], also returning the norm of each column's
/// residual after projecting out its predecessors.
pub(crate) fn orthonormalize_with_residuals(m: &CMat) -> Result<(CMat, Vec<f64>)> {
    let (n, k) = m.shape();
    if k > n {
        return Err(Error::Degenerate { column: n, residual: 0.0 });
    }
    let mut q = CMat::zeros(n, k);
    let mut residuals = Vec::with_capacity(k);
    for j in 0..k {
        let f = m.column(j);
        let f_norm = f.norm();
        let mut g = f.into_owned();
        if j > 0 {
            let basis = q.columns(0, j);
            for _ in 0..2 {
                let coeffs = basis.ad_mul(&g);
                g.gemv(C64::new(-1.0, 0.0), &basis, &coeffs, ONE);
            }
        }
        let norm = g.norm();
        if f_norm == 0.0 || norm < DEGENERACY * f_norm {
            return Err(Error::Degenerate { column: j, residual: norm });
        }
        g /= C64::new(norm, 0.0);
        q.set_column(j, &g);
        residuals.push(norm);
    }
    Ok((q, residuals))
}

/// Extends orthonormal `columns` to a full orthonormal basis of `C^dim`,
/// drawing new directions from the standard basis in order. The given
/// columns come first, unchanged.
pub fn complete_basis(columns: &[CVec], dim: usize) -> Result<CMat> {
    let mut basis: Vec<CVec> = columns.to_vec();
    if basis.iter().any(|c| c.len() != dim) {
        return Err(Error::Dimension("basis completion with mismatched column lengths".into()));
    }
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut g = CVec::from_element(dim, ZERO);
        g[e] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&g);
                g.axpy(-c, b, ONE);
            }
        }
        let norm = g.norm();
        // A standard vector far from the current span; dim ≥ 2 guarantees one
        // with residual ≥ 1/√dim exists while the basis is incomplete.
        if norm > 0.5 / (dim as f64).sqrt() {
            basis.push(g / C64::new(norm, 0.0));
        }
    }
    if basis.len() != dim {
        return Err(Error::Degenerate { column: basis.len(), residual: 0.0 });
    }
    Ok(CMat::from_columns(&basis))
}
