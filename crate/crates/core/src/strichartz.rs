//! Orthonormal systems, their space-time densities Σ n_j |e^{−itℒ}u_j|²,
//! and sweeps of the mixed-norm quotient across exponents and system sizes.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{count_up_to_degree, SampledBasis, Truncation};
use crate::error::{out_of_range, Error, Result};
use crate::grid::{mixed_norm, GridSpec, SpaceTimeField, TimeGrid};
use crate::schatten::schatten_sum;
use crate::semigroup::SampledPropagator;
use crate::singularity::loglog_fit;

/// Columns of coefficient vectors, orthonormal in ℓ² over the truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalSystem {
    truncation: Truncation,
    coeffs: DMatrix<Complex64>,
    seed: Option<u64>,
}

impl OrthonormalSystem {
    /// Checks orthonormality to 1e−10.
    pub fn from_columns(truncation: Truncation, coeffs: DMatrix<Complex64>) -> Result<Self> {
        if coeffs.nrows() != truncation.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficient rows for {} modes",
                coeffs.nrows(),
                truncation.len()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sys = OrthonormalSystem {
            truncation,
            coeffs,
            seed: None,
        };
        if sys.gram_error() > 1e-10 {
            return Err(out_of_range("coeffs", "columns are not orthonormal"));
        }
        Ok(sys)
    }

    /// The basis functions at the given mode positions.
    pub fn eigenfunctions(truncation: Truncation, modes: &[usize]) -> Result<Self> {
        let d = truncation.len();
        if let Some(&bad) = modes.iter().find(|&&i| i >= d) {
            return Err(out_of_range("modes", format!("mode {bad} outside a truncation of {d}")));
        }
        let coeffs = DMatrix::from_fn(d, modes.len(), |r, c| {
            Complex64::from(if modes[c] == r { 1.0 } else { 0.0 })
        });
        Self::from_columns(truncation, coeffs)
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn coeffs(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// max |C*C − I|.
    pub fn gram_error(&self) -> f64 {
        let g = self.coeffs.adjoint() * &self.coeffs;
        let id = DMatrix::<Complex64>::identity(g.nrows(), g.ncols());
        (g - id).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The same functions written in a larger truncation.
    pub fn embed(&self, target: &Truncation) -> Result<DMatrix<Complex64>> {
        if target.dim() != self.truncation.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: self.truncation.dim(),
            });
        }
        let mut out = DMatrix::zeros(target.len(), self.len());
        for (i, p) in self.truncation.pairs().iter().enumerate() {
            let row = target
                .position(p)
                .ok_or_else(|| out_of_range("target", format!("mode {p:?} is missing")))?;
            out.row_mut(row).copy_from(&self.coeffs.row(i));
        }
        Ok(out)
    }
}

/// Modified Gram–Schmidt, applied twice, on a seeded complex Gaussian matrix.
pub fn sample_orthonormal_system(tr: &Truncation, n_functions: usize, seed: u64) -> Result<OrthonormalSystem> {
    if n_functions > tr.len() {
        return Err(Error::SystemTooLarge {
            requested: n_functions,
            available: tr.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = tr.len();
    let mut a = DMatrix::from_fn(d, n_functions, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    for j in 0..n_functions {
        for _ in 0..2 {
            for i in 0..j {
                let proj = a.column(i).dotc(&a.column(j));
                let qi = a.column(i).into_owned();
                a.column_mut(j).axpy(-proj, &qi, Complex64::new(1.0, 0.0));
            }
        }
        let norm = a.column(j).norm();
        a.column_mut(j).unscale_mut(norm);
    }
    Ok(OrthonormalSystem {
        truncation: tr.clone(),
        coeffs: a,
        seed: Some(seed),
    })
}

/// The weights n_j of a density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector(Vec<Complex64>);

impl CoefficientVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CoefficientVector(values))
    }

    pub fn real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::from(v)).collect())
    }

    pub fn ones(len: usize) -> Self {
        CoefficientVector(vec![Complex64::new(1.0, 0.0); len])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoefficientVector(self.0.iter().map(|v| v * c).collect())
    }

    /// (Σ|n_j|^{2q/(q+1)})^{(q+1)/(2q)}.
    pub fn strichartz_norm(&self, q: f64) -> f64 {
        let mags: Vec<f64> = self.0.iter().map(|v| v.norm()).collect();
        schatten_sum(&mags, 2.0 * q / (q + 1.0))
    }
}

/// p on the line 1/p + n/q = n (p = ∞ at q = 1), with no range check.
pub fn line_exponent(n: usize, q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else {
        q / (n as f64 * (q - 1.0))
    }
}

/// The p paired with q for 1 ≤ q ≤ 1 + 1/n.
pub fn admissible_exponents(n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(out_of_range("n", "dimension must be at least 1"));
    }
    let top = 1.0 + 1.0 / n as f64;
    if !(q >= 1.0 && q <= top + 1e-15) {
        return Err(out_of_range("q", format!("need 1 ≤ q ≤ {top}, got {q}")));
    }
    Ok(line_exponent(n, q))
}

/// Densities on a fixed truncation and grid, with Lebesgue measure in time.
#[derive(Clone, Debug)]
pub struct StrichartzHarness {
    prop: SampledPropagator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzQuotient {
    pub p: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub admissible: bool,
}

impl StrichartzHarness {
    pub fn new(tr: &Truncation, time: &TimeGrid, grid: &GridSpec) -> Result<Self> {
        Ok(StrichartzHarness {
            prop: SampledPropagator::new(SampledBasis::new(tr, grid)?, *time),
        })
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

    pub fn density(&self, sys: &OrthonormalSystem, nj: &CoefficientVector) -> Result<SpaceTimeField> {
        if nj.len() != sys.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} functions",
                nj.len(),
                sys.len()
            )));
        }
        let coeffs = sys.embed(self.truncation())?;
        self.prop.density(&coeffs, nj.values())
    }

    /// ‖ρ‖_{L^p_t L^q_z} / (Σ|n_j|^{2q/(q+1)})^{(q+1)/(2q)} for a density
    /// already computed.
    pub fn quotient_of(&self, rho: &SpaceTimeField, nj: &CoefficientVector, p: f64, q: f64) -> Result<StrichartzQuotient> {
        if nj.is_zero() {
            return Err(Error::ZeroCoefficients);
        }
        let n = self.grid().dim();
        let lhs = mixed_norm(rho, p, q)?;
        let rhs = nj.strichartz_norm(q);
        let admissible = admissible_exponents(n, q).is_ok_and(|pp| pp == p || (pp - p).abs() < 1e-12 * p);
        Ok(StrichartzQuotient {
            p,
            q,
            lhs,
            rhs,
            ratio: lhs / rhs,
            admissible,
        })
    }

    pub fn ratio(&self, sys: &OrthonormalSystem, nj: &CoefficientVector, p: f64, q: f64) -> Result<StrichartzQuotient> {
        if nj.is_zero() {
            return Err(Error::ZeroCoefficients);
        }
        let rho = self.density(sys, nj)?;
        self.quotient_of(&rho, nj, p, q)
    }
}

/// Σ n_j |e^{−itℒ}u_j|² on the given grids.
pub fn density(
    sys: &OrthonormalSystem,
    nj: &CoefficientVector,
    time: &TimeGrid,
    grid: &GridSpec,
) -> Result<SpaceTimeField> {
    StrichartzHarness::new(sys.truncation(), time, grid)?.density(sys, nj)
}

pub fn strichartz_ratio(
    sys: &OrthonormalSystem,
    nj: &CoefficientVector,
    p: f64,
    q: f64,
    time: &TimeGrid,
    grid: &GridSpec,
) -> Result<StrichartzQuotient> {
    StrichartzHarness::new(sys.truncation(), time, grid)?.ratio(sys, nj, p, q)
}

/// Where the random systems of a sweep live.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportMode {
    /// the smallest Truncation(n, k) with at least N modes
    #[default]
    Saturating,
    /// Truncation(n, k_max) for every N
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub n: usize,
    pub q_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub k_max: usize,
    pub m: usize,
    pub half_width: Option<f64>,
    pub nt: usize,
    pub support: SupportMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 1,
            q_values: vec![1.0, 1.25, 1.5, 2.0],
            n_values: vec![1, 2, 4, 8, 16],
            trials: 20,
            seed: 0,
            k_max: 8,
            m: 48,
            half_width: None,
            nt: 32,
            support: SupportMode::Saturating,
        }
    }
}

impl SweepConfig {
    fn support_degree(&self, n_functions: usize) -> usize {
        match self.support {
            SupportMode::Fixed => self.k_max,
            SupportMode::Saturating => (0..)
                .find(|&k| count_up_to_degree(self.n, k).pow(2) >= n_functions)
                .expect("modes grow without bound"),
        }
    }

    fn trial_seed(&self, n_functions: usize, trial: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add((n_functions as u64) << 32)
            .wrapping_add(trial as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "N")]
    pub n_functions: usize,
    pub trial: usize,
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMax {
    pub q: f64,
    #[serde(rename = "N")]
    pub n_functions: usize,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub support: SupportMode,
    pub m: usize,
    pub half_width: f64,
    pub nt: usize,
    pub max_ratio: f64,
    pub max_by_cell: Vec<CellMax>,
    /// slope of ln(mean LHS) against ln N over N ≥ 2 at (p, q) = (2, 2), nj ≡ 1
    pub growth_exponent: Option<f64>,
    pub growth_points: Vec<(usize, f64)>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Runs every (q, N, trial) cell with nj ≡ 1. Rows come back sorted by
/// (q, N, trial).
pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.n == 0 {
        return Err(out_of_range("n", "dimension must be at least 1"));
    }
    if cfg.trials == 0 || cfg.n_values.is_empty() || cfg.q_values.is_empty() {
        return Err(out_of_range("config", "need at least one q, one N and one trial"));
    }
    if let Some(&bad) = cfg.q_values.iter().find(|q| !(**q >= 1.0) || !q.is_finite()) {
        return Err(out_of_range("q_values", format!("q = {bad} is below 1")));
    }
    if cfg.n_values.contains(&0) {
        return Err(out_of_range("n_values", "system sizes must be positive"));
    }
    let mut warnings = Vec::new();
    for &q in &cfg.q_values {
        if admissible_exponents(cfg.n, q).is_err() {
            warnings.push(format!("q = {q} is outside 1 ≤ q ≤ 1 + 1/n; p taken from the line"));
        }
    }
    let k_top = cfg.n_values.iter().map(|&nf| cfg.support_degree(nf)).max().unwrap_or(0);
    let tr = Truncation::new(cfg.n, k_top)?;
    let half_width = cfg.half_width.unwrap_or_else(|| GridSpec::default_half_width(cfg.n, k_top));
    let grid = GridSpec::new(cfg.n, half_width, cfg.m)?;
    let time = TimeGrid::lebesgue(cfg.nt)?;
    let harness = StrichartzHarness::new(&tr, &time, &grid)?;

    let cells: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&nf| (0..cfg.trials).map(move |t| (nf, t)))
        .collect();
    type CellOut = (Vec<SweepRow>, (usize, f64));
    let outputs: Vec<CellOut> = cells
        .par_iter()
        .map(|&(nf, trial)| -> Result<CellOut> {
            let sub = Truncation::new(cfg.n, cfg.support_degree(nf))?;
            let sys = sample_orthonormal_system(&sub, nf, cfg.trial_seed(nf, trial))?;
            let nj = CoefficientVector::ones(nf);
            let rho = harness.density(&sys, &nj)?;
            let mut rows = Vec::with_capacity(cfg.q_values.len());
            for &q in &cfg.q_values {
                let p = line_exponent(cfg.n, q);
                let r = harness.quotient_of(&rho, &nj, p, q)?;
                rows.push(SweepRow {
                    n: cfg.n,
                    p,
                    q,
                    n_functions: nf,
                    trial,
                    ratio: r.ratio,
                    lhs: r.lhs,
                    rhs: r.rhs,
                });
            }
            Ok((rows, (nf, mixed_norm(&rho, 2.0, 2.0)?)))
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut lhs22: Vec<(usize, f64)> = Vec::new();
    for (r, l) in outputs {
        rows.extend(r);
        lhs22.push(l);
    }
    rows.sort_by(|a, b| {
        a.q.total_cmp(&b.q)
            .then(a.n_functions.cmp(&b.n_functions))
            .then(a.trial.cmp(&b.trial))
    });
    if let Some(bad) = rows.iter().find(|r| !r.ratio.is_finite()) {
        warnings.push(format!("non-finite ratio at q = {}, N = {}", bad.q, bad.n_functions));
    }

    let mut max_by_cell: Vec<CellMax> = Vec::new();
    for r in &rows {
        match max_by_cell.iter_mut().find(|c| c.q == r.q && c.n_functions == r.n_functions) {
            Some(c) => c.max_ratio = c.max_ratio.max(r.ratio),
            None => max_by_cell.push(CellMax {
                q: r.q,
                n_functions: r.n_functions,
                max_ratio: r.ratio,
            }),
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);

    let mut ns: Vec<usize> = cfg.n_values.iter().copied().filter(|&nf| nf >= 2).collect();
    ns.sort_unstable();
    ns.dedup();
    let growth_points: Vec<(usize, f64)> = ns
        .iter()
        .map(|&nf| {
            let vals: Vec<f64> = lhs22.iter().filter(|l| l.0 == nf).map(|l| l.1).collect();
            (nf, vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    let growth_exponent = if growth_points.len() >= 2 {
        let xs: Vec<f64> = growth_points.iter().map(|g| g.0 as f64).collect();
        let ys: Vec<f64> = growth_points.iter().map(|g| g.1).collect();
        Some(loglog_fit(&xs, &ys)?.slope)
    } else {
        warnings.push("growth exponent needs two system sizes N ≥ 2".into());
        None
    };

    Ok(SweepReport {
        rows,
        summary: SweepSummary {
            n: cfg.n,
            support: cfg.support,
            m: cfg.m,
            half_width,
            nt: cfg.nt,
            max_ratio,
            max_by_cell,
            growth_exponent,
            growth_points,
            warnings,
        },
    })
}

/// Columns n, p, q, N, trial, ratio, lhs, rhs.
pub fn write_rows_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
