//! Schatten norms, the space-time operators built from the propagator, and
//! the duality check between sandwiched operators and densities.

mod duality;
mod surface;

pub use duality::{
    duality_check, Discretization, DualityExponents, DualityReport, SchattenRecord, WeightSampler,
};
pub use surface::{
    build_propagation_matrix, build_t_z, build_t_z_with, continuum_limit_pairing,
    discrete_limit_pairing, extension_operator, extrapolate_to_zero, g_z_weight, sandwich_operator,
    surface_coefficients, PropagationMatrix, SurfacePoint, TzOperator, PROPAGATION_LIMIT,
};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Singular values below this fraction of the largest are set to zero.
pub const CLAMP_RELATIVE: f64 = 1e-10;

/// Singular values (descending) and the Schatten-r norm built from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub singular_values: Vec<f64>,
    pub r: f64,
    pub norm: f64,
    pub rows: usize,
    pub cols: usize,
}

fn check_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 1.0 {
        return Err(out_of_range("r", format!("Schatten exponent must lie in [1, ∞], got {r}")));
    }
    Ok(())
}

/// (Σ sʳ)^{1/r}; r = ∞ gives the largest entry.
pub fn schatten_sum(s: &[f64], r: f64) -> f64 {
    if r == f64::INFINITY {
        return s.iter().copied().fold(0.0, f64::max);
    }
    let mut terms: Vec<f64> = s.iter().map(|&v| v.powf(r)).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().powf(1.0 / r)
}

fn report(mut s: Vec<f64>, r: f64, rows: usize, cols: usize) -> SchattenReport {
    s.iter_mut().for_each(|v| *v = v.max(0.0));
    s.sort_by(|a, b| b.total_cmp(a));
    let top = s.first().copied().unwrap_or(0.0);
    for v in s.iter_mut() {
        if *v < CLAMP_RELATIVE * top {
            *v = 0.0;
        }
    }
    SchattenReport {
        norm: schatten_sum(&s, r),
        singular_values: s,
        r,
        rows,
        cols,
    }
}

/// Schatten-r norm of a dense matrix from its SVD.
pub fn schatten_norm(t: &DMatrix<Complex64>, r: f64) -> Result<SchattenReport> {
    check_r(r)?;
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = if t.is_empty() {
        Vec::new()
    } else {
        SVD::new(t.clone(), false, false).singular_values.iter().copied().collect()
    };
    Ok(report(s, r, t.nrows(), t.ncols()))
}

/// An operator U C U* known through the small matrices U*U and C, with U
/// itself kept only when it is small enough to densify.
#[derive(Clone, Debug)]
pub struct LowRankOperator {
    rows: usize,
    gram: DMatrix<Complex64>,
    core: Option<DMatrix<Complex64>>,
    factor: Option<DMatrix<Complex64>>,
}

impl LowRankOperator {
    /// `core = None` means the identity.
    pub fn new(
        rows: usize,
        gram: DMatrix<Complex64>,
        core: Option<DMatrix<Complex64>>,
        factor: Option<DMatrix<Complex64>>,
    ) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::ShapeMismatch("factor Gram matrix must be square".into()));
        }
        if let Some(c) = &core {
            if c.shape() != gram.shape() {
                return Err(Error::ShapeMismatch("core and Gram sizes differ".into()));
            }
        }
        if let Some(u) = &factor {
            if u.ncols() != gram.ncols() || u.nrows() != rows {
                return Err(Error::ShapeMismatch("factor does not match the Gram size".into()));
            }
        }
        Ok(LowRankOperator {
            rows,
            gram,
            core,
            factor,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn rank_bound(&self) -> usize {
        self.gram.ncols()
    }

    /// Nonzero singular values of U C U*: with U*U = VΛV* and R = Λ^{1/2}V*,
    /// they are the singular values of R C R*.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.gram.is_empty() {
            return Vec::new();
        }
        let eig = SymmetricEigen::new(self.gram.clone());
        match &self.core {
            None => eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            Some(c) => {
                let k = self.gram.ncols();
                let r = DMatrix::from_fn(k, k, |i, j| {
                    Complex64::from(eig.eigenvalues[i].max(0.0).sqrt()) * eig.eigenvectors[(j, i)].conj()
                });
                let m = &r * c * r.adjoint();
                SVD::new(m, false, false).singular_values.iter().copied().collect()
            }
        }
    }

    pub fn schatten(&self, r: f64) -> Result<SchattenReport> {
        check_r(r)?;
        Ok(report(self.singular_values(), r, self.rows, self.rows))
    }

    /// Number of singular values above `tol`·s₁.
    pub fn rank(&self, tol: f64) -> usize {
        let s = self.singular_values();
        let top = s.iter().copied().fold(0.0, f64::max);
        s.iter().filter(|&&v| v > tol * top).count()
    }

    /// U C U* as a dense matrix; needs the factor and rows² within the guard.
    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        let u = self.factor.as_ref().ok_or_else(|| Error::SizeGuard {
            entries: self.rows * self.gram.ncols(),
            limit: PROPAGATION_LIMIT,
        })?;
        let entries = self.rows * self.rows;
        if entries > PROPAGATION_LIMIT {
            return Err(Error::SizeGuard {
                entries,
                limit: PROPAGATION_LIMIT,
            });
        }
        Ok(match &self.core {
            None => u * u.adjoint(),
            Some(c) => u * c * u.adjoint(),
        })
    }
}
