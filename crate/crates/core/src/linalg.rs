//! Truncated SVD and small dense helpers.

use crate::{CMatrix, Error, Result, C64};

/// How many singular triplets [`truncated_svd`] keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep every `σ_i > tol · σ₁`, so that `σ_{k+1} ≤ tol · σ₁`.
    Relative(f64),
    /// Keep every `σ_i > tol`.
    Absolute(f64),
    /// Keep exactly `min(k, min(m, n))` triplets.
    ExactRank(usize),
}

/// `m ≈ u · diag(s) · vᴴ` with `k` orthonormal columns in `u` and `v`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
    pub rank: usize,
    /// All singular values, descending, before truncation.
    pub spectrum: Vec<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }

    /// First discarded singular value, zero if nothing was cut.
    pub fn first_discarded(&self) -> f64 {
        self.spectrum.get(self.rank).copied().unwrap_or(0.0)
    }
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn kept(spectrum: &[f64], mode: Truncation) -> usize {
    match mode {
        Truncation::Relative(tol) => {
            let Some(&top) = spectrum.first() else { return 0 };
            if top == 0.0 {
                return 0;
            }
            spectrum.iter().take_while(|&&s| s > tol * top).count()
        }
        Truncation::Absolute(tol) => spectrum.iter().take_while(|&&s| s > tol).count(),
        Truncation::ExactRank(k) => k.min(spectrum.len()),
    }
}

pub fn truncated_svd(m: &CMatrix, mode: Truncation) -> Result<TruncatedSvd> {
    check_finite(m)?;
    let (nr, nc) = m.shape();
    if nr == 0 || nc == 0 {
        return Ok(TruncatedSvd {
            u: CMatrix::zeros(nr, 0),
            s: Vec::new(),
            v: CMatrix::zeros(nc, 0),
            rank: 0,
            spectrum: Vec::new(),
        });
    }
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let spectrum: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let k = kept(&spectrum, mode);

    let mut uk = CMatrix::zeros(nr, k);
    let mut vk = CMatrix::zeros(nc, k);
    for (j, &src) in order.iter().take(k).enumerate() {
        uk.set_column(j, &u.column(src));
        vk.set_column(j, &v_t.row(src).adjoint());
    }
    Ok(TruncatedSvd {
        u: uk,
        s: spectrum[..k].to_vec(),
        v: vk,
        rank: k,
        spectrum,
    })
}

/// Number of singular values above `tol · σ₁`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    Ok(kept(&singular_values(m)?, Truncation::Relative(tol)))
}

pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// `‖a − b‖_F / ‖b‖_F`, or the absolute error when `b` vanishes.
pub fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = (a - b).norm();
    let base = b.norm();
    if base == 0.0 {
        diff
    } else {
        diff / base
    }
}

/// `blockdiag(a, b)`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Column `v` as an `n × 1` matrix.
pub fn column(v: &[C64]) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v)
}
