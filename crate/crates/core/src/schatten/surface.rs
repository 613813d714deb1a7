//! The surface λ = 2|ν| + n, the extension operator on it and the analytic
//! family T_z with multiplier (λ − 2|ν| − n)₊^z / Γ(z + 1).

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LowRankOperator, SchattenReport};
use crate::basis::{MultiIndex, MultiIndexPair, SampledBasis, Truncation};
use crate::error::{out_of_range, Error, Result};
use crate::gamma::{gamma, nonpositive_integer, recip_gamma};
use crate::grid::{GridSpec, SpaceTimeField, TimeGrid};
use crate::semigroup::{reduce_time, SampledPropagator};
use crate::twisted::SpectralCoeffs;

/// Largest dense space-time matrix (entries) the operators will build.
pub const PROPAGATION_LIMIT: usize = 20_000_000;

/// A lattice point (μ, ν, λ) of ℕ₀ⁿ × ℕ₀ⁿ × ℤ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub mu: MultiIndex,
    pub nu: MultiIndex,
    pub lambda: i64,
}

impl SurfacePoint {
    pub fn new(mu: MultiIndex, nu: MultiIndex, lambda: i64) -> Result<Self> {
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: nu.dim(),
            });
        }
        Ok(SurfacePoint { mu, nu, lambda })
    }

    /// The point over (μ, ν) that lies on the surface.
    pub fn on_surface_over(pair: &MultiIndexPair) -> Self {
        SurfacePoint {
            mu: pair.mu.clone(),
            nu: pair.nu.clone(),
            lambda: pair.eigenvalue() as i64,
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// 2|ν| + n.
    pub fn threshold(&self) -> i64 {
        (2 * self.nu.degree() + self.dim()) as i64
    }

    pub fn on_surface(&self) -> bool {
        self.lambda == self.threshold()
    }

    fn pair(&self) -> MultiIndexPair {
        MultiIndexPair {
            mu: self.mu.clone(),
            nu: self.nu.clone(),
        }
    }
}

/// Surface data f̂ = (2π)ⁿ û for which the extension of f is (2π)ⁿ e^{−itℒ}u.
pub fn surface_coefficients(u: &SpectralCoeffs) -> Vec<(SurfacePoint, Complex64)> {
    let scale = TAU.powi(u.truncation().dim() as i32);
    u.truncation()
        .pairs()
        .iter()
        .zip(u.coeffs())
        .map(|(p, &c)| (SurfacePoint::on_surface_over(p), c * scale))
        .collect()
}

/// Σ f̂(μ, ν, λ) Φ_μν(z) e^{−iλt} sampled on the time grid × space grid.
/// Every point must lie on the surface.
pub fn extension_operator(
    data: &[(SurfacePoint, Complex64)],
    time: &TimeGrid,
    grid: &GridSpec,
) -> Result<SpaceTimeField> {
    let n = grid.dim();
    let mut pairs: Vec<MultiIndexPair> = Vec::new();
    let mut coeffs: Vec<Complex64> = Vec::new();
    for (sp, c) in data {
        if sp.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sp.dim(),
            });
        }
        if !c.is_finite() {
            return Err(Error::NonFinite);
        }
        if !sp.on_surface() {
            return Err(Error::OffSurface {
                nu_degree: sp.nu.degree(),
                lambda: sp.lambda,
            });
        }
        let p = sp.pair();
        match pairs.iter().position(|q| *q == p) {
            Some(i) => coeffs[i] += c,
            None => {
                pairs.push(p);
                coeffs.push(*c);
            }
        }
    }
    if pairs.is_empty() {
        return Ok(SpaceTimeField::zeros(*time, *grid));
    }
    let tr = Truncation::from_pairs(n, pairs)?;
    let prop = SampledPropagator::new(SampledBasis::new(&tr, grid)?, *time);
    prop.evolve(&coeffs)
}

/// The space-time operator A: û ↦ e^{−itℒ}u on a truncation, discretized on
/// weighted ℓ² so that A*A approximates the identity times |𝕋|.
#[derive(Clone, Debug)]
pub struct PropagationMatrix {
    prop: SampledPropagator,
}

/// Builds A for the truncation on the given grids, refusing sizes past
/// [`PROPAGATION_LIMIT`].
pub fn build_propagation_matrix(
    tr: &Truncation,
    time: &TimeGrid,
    grid: &GridSpec,
) -> Result<PropagationMatrix> {
    if tr.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: tr.dim(),
        });
    }
    let entries = time.len() * grid.len() * tr.len();
    if entries > PROPAGATION_LIMIT {
        return Err(Error::SizeGuard {
            entries,
            limit: PROPAGATION_LIMIT,
        });
    }
    Ok(PropagationMatrix {
        prop: SampledPropagator::new(SampledBasis::new(tr, grid)?, *time),
    })
}

impl PropagationMatrix {
    pub fn propagator(&self) -> &SampledPropagator {
        &self.prop
    }

    pub fn truncation(&self) -> &Truncation {
        self.prop.basis().truncation()
    }

    pub fn time(&self) -> &TimeGrid {
        self.prop.time()
    }

    pub fn grid(&self) -> &GridSpec {
        self.prop.basis().grid()
    }

    pub fn rows(&self) -> usize {
        self.time().len() * self.grid().len()
    }

    pub fn cols(&self) -> usize {
        self.truncation().len()
    }

    /// Entries √(w_t w_z) e^{−iλt} Φ(z), rows time-major.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let basis = self.prop.basis();
        let phi = basis.values();
        let wz = basis.weights();
        let lam = self.truncation().eigenvalues();
        let time = self.time();
        let nodes = wz.len();
        let wt = time.weight().sqrt();
        DMatrix::from_fn(self.rows(), self.cols(), |r, c| {
            let (j, z) = (r / nodes, r % nodes);
            let ph = Complex64::from_polar(wt * wz[z].sqrt(), -reduce_time(time.node(j) * lam[c] as f64));
            ph * phi[(z, c)]
        })
    }

    /// A*A.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let ones = SpaceTimeField::from_values(
            *self.time(),
            *self.grid(),
            vec![Complex64::new(1.0, 0.0); self.rows()],
        )
        .expect("constant field is finite");
        self.prop.weighted_gram(&ones).expect("grids agree")
    }

    /// Unweighted samples of e^{−itℒ}u.
    pub fn apply(&self, coeffs: &[Complex64]) -> Result<SpaceTimeField> {
        self.prop.evolve(coeffs)
    }

    /// T_S = AA*, kept in factored form.
    pub fn t_s(&self) -> LowRankOperator {
        let factor = (self.rows() * self.cols() <= PROPAGATION_LIMIT / 4).then(|| self.dense());
        LowRankOperator::new(self.rows(), self.gram(), None, factor).expect("shapes agree")
    }
}

/// W A (A*|W|²A as Gram, identity core): the Schatten norms of W T_S W̄
/// are those of this operator.
pub fn sandwich_operator(w: &SpaceTimeField, a: &PropagationMatrix) -> Result<LowRankOperator> {
    if w.time().len() != a.time().len() || w.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let sq = SpaceTimeField::from_values(
        *w.time(),
        *w.grid(),
        w.values().iter().map(|v| Complex64::from(v.norm_sqr())).collect(),
    )?;
    let gram = a.propagator().weighted_gram(&sq)?;
    let factor = (a.rows() * a.rows() <= PROPAGATION_LIMIT).then(|| {
        let mut d = a.dense();
        for (r, mut row) in d.row_iter_mut().enumerate() {
            row *= w.values()[r];
        }
        d
    });
    LowRankOperator::new(a.rows(), gram, None, factor)
}

fn pole_error(z: Complex64) -> Error {
    Error::GammaPole { re: z.re, im: z.im }
}

/// (λ − 2|ν| − n)₊^z / Γ(z + 1). At z = −1 − k the factor 1/Γ vanishes and
/// the weight is only meaningful as a limit, so those points are refused.
pub fn g_z_weight(z: Complex64, sp: &SurfacePoint) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(Error::NonFinite);
    }
    if nonpositive_integer(z + 1.0).is_some() {
        return Err(pole_error(z));
    }
    let m = sp.lambda - sp.threshold();
    if m <= 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((z * (m as f64).ln()).exp() * recip_gamma(z + 1.0))
}

/// Σ_{λ > c} φ(λ)(λ − c)^z / Γ(z + 1) over c < λ ≤ `lambda_max`. On the
/// lattice this goes to 0 as z → −1, not to φ(c).
pub fn discrete_limit_pairing(
    z: Complex64,
    c: i64,
    phi: impl Fn(i64) -> f64,
    lambda_max: i64,
) -> Result<Complex64> {
    if nonpositive_integer(z + 1.0).is_some() {
        return Err(pole_error(z));
    }
    let rg = recip_gamma(z + 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for lam in (c + 1)..=lambda_max {
        acc += phi(lam) * (z * ((lam - c) as f64).ln()).exp();
    }
    Ok(acc * rg)
}

/// ∫_c^{c+X} φ(λ)(λ − c)^z dλ / Γ(z + 1) for real z > −1, through the
/// substitution u = (λ − c)^{z+1} and composite Simpson in u.
pub fn continuum_limit_pairing(z: f64, c: f64, phi: impl Fn(f64) -> f64, reach: f64) -> Result<f64> {
    if !(z > -1.0) || !z.is_finite() {
        return Err(out_of_range("z", format!("need real z > −1, got {z}")));
    }
    if !(reach > 0.0) || !reach.is_finite() {
        return Err(out_of_range("reach", "support length must be positive"));
    }
    let a = z + 1.0;
    let upper = reach.powf(a);
    let panels = 20_000;
    let h = upper / panels as f64;
    let f = |u: f64| phi(c + u.powf(1.0 / a));
    let mut acc = f(0.0) + f(upper);
    for i in 1..panels {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = acc * h / 3.0;
    // dλ (λ−c)^z = du / (z+1), and (z+1) Γ(z+1) = Γ(z+2)
    Ok(integral / gamma(Complex64::from(z + 2.0)).re)
}

/// Richardson extrapolation to ε = 0 from values at ε, ε/2, ε/4 with an
/// error expansion in powers of ε.
pub fn extrapolate_to_zero(values: [f64; 3]) -> f64 {
    let [p1, p2, p4] = values;
    (8.0 * p4 - 6.0 * p2 + p1) / 3.0
}

/// T_z = U D U* with U the columns e^{−iλt}Φ_μν and D the multiplier on
/// λ ≤ Λ. The surface operator T_{−1} uses the surface indicator instead.
#[derive(Clone, Debug)]
pub struct TzOperator {
    z: Complex64,
    lambda_max: i64,
    columns: Vec<(usize, i64)>,
    multipliers: Vec<Complex64>,
    op: LowRankOperator,
}

/// T_z with the default window Λ = 2k_max + n + 8.
pub fn build_t_z(z: Complex64, tr: &Truncation, time: &TimeGrid, grid: &GridSpec) -> Result<TzOperator> {
    let lambda_max = (2 * tr.k_max() + tr.dim() + 8) as i64;
    build_t_z_with(z, tr, time, grid, lambda_max)
}

pub fn build_t_z_with(
    z: Complex64,
    tr: &Truncation,
    time: &TimeGrid,
    grid: &GridSpec,
    lambda_max: i64,
) -> Result<TzOperator> {
    if tr.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: tr.dim(),
        });
    }
    let surface = z == Complex64::new(-1.0, 0.0);
    let top = (2 * tr.k_max() + tr.dim()) as i64;
    let required = if surface { top } else { top + 1 };
    if lambda_max < required {
        return Err(Error::FrequencyWindow {
            lambda_max,
            required,
        });
    }
    if time.len() as i64 <= 2 * lambda_max {
        return Err(Error::TimeResolution {
            nt: time.len(),
            lambda_max,
        });
    }
    let mut columns = Vec::new();
    let mut multipliers = Vec::new();
    for (a, p) in tr.pairs().iter().enumerate() {
        for lam in 0..=lambda_max {
            let sp = SurfacePoint::on_surface_over(p);
            let sp = SurfacePoint { lambda: lam, ..sp };
            let g = if surface {
                Complex64::from(if sp.on_surface() { 1.0 } else { 0.0 })
            } else {
                g_z_weight(z, &sp)?
            };
            if g != Complex64::new(0.0, 0.0) {
                columns.push((a, lam));
                multipliers.push(g);
            }
        }
    }
    let basis = SampledBasis::new(tr, grid)?;
    let g_phi = basis.gram();
    let wt = time.weight();
    let nodes = time.nodes();
    let k = columns.len();
    let time_gram = |d: i64| -> Complex64 {
        nodes
            .iter()
            .map(|&t| Complex64::from_polar(wt, reduce_time(t * d as f64)))
            .sum()
    };
    let gram = DMatrix::from_fn(k, k, |i, j| {
        let (a, la) = columns[i];
        let (b, lb) = columns[j];
        g_phi[(a, b)] * time_gram(la - lb)
    });
    let rows = time.len() * grid.len();
    let factor = (rows * k <= PROPAGATION_LIMIT / 4).then(|| {
        let phi = basis.values();
        let wz = basis.weights();
        let ng = grid.len();
        let cols: Vec<Vec<Complex64>> = columns
            .par_iter()
            .map(|&(a, lam)| {
                (0..rows)
                    .map(|r| {
                        let (j, zi) = (r / ng, r % ng);
                        let ph = Complex64::from_polar(
                            (wt * wz[zi]).sqrt(),
                            -reduce_time(nodes[j] * lam as f64),
                        );
                        ph * phi[(zi, a)]
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(rows, k, |r, c| cols[c][r])
    });
    let core = if surface {
        None
    } else {
        Some(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(multipliers.clone())))
    };
    Ok(TzOperator {
        z,
        lambda_max,
        columns,
        multipliers,
        op: LowRankOperator::new(rows, gram, core, factor)?,
    })
}

impl TzOperator {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn lambda_max(&self) -> i64 {
        self.lambda_max
    }

    /// (mode index, λ) for each retained column.
    pub fn columns(&self) -> &[(usize, i64)] {
        &self.columns
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    pub fn max_multiplier(&self) -> f64 {
        self.multipliers.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    pub fn operator(&self) -> &LowRankOperator {
        &self.op
    }

    pub fn operator_norm(&self) -> f64 {
        self.op.schatten(f64::INFINITY).map(|r| r.norm).unwrap_or(0.0)
    }

    pub fn schatten(&self, r: f64) -> Result<SchattenReport> {
        self.op.schatten(r)
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        self.op.dense()
    }
}
