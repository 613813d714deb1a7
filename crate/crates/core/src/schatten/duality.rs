//! Random weights, the exponent bookkeeping between the Schatten side and
//! the density side, and the alternating duality check.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{schatten_sum, PropagationMatrix, CLAMP_RELATIVE};
use crate::basis::{SampledBasis, Truncation};
use crate::error::{out_of_range, Error, Result};
use crate::grid::{lp_norm_slice, mixed_norm, GridSpec, SpaceTimeField, TimeGrid};
use crate::semigroup::reduce_time;

/// Grid parameters recorded next to numerical output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n: usize,
    pub k_max: usize,
    pub m: usize,
    pub half_width: f64,
    pub nt: usize,
}

impl Discretization {
    pub fn of(a: &PropagationMatrix) -> Self {
        Discretization {
            n: a.grid().dim(),
            k_max: a.truncation().k_max(),
            m: a.grid().points_per_axis(),
            half_width: a.grid().half_width(),
            nt: a.time().len(),
        }
    }
}

/// One Schatten computation as written by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchattenRecord {
    pub operator: String,
    pub r: f64,
    pub singular_values: Vec<f64>,
    pub norm: f64,
    pub discretization: Discretization,
    pub seed: Option<u64>,
}

fn conj_exp(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

fn half_of_conj(x: f64) -> f64 {
    conj_exp(x) / 2.0
}

/// Exponents pairing ‖W T_S W̄‖_{S^α} ≤ C‖W‖²_{L^a_t L^b_z} with
/// ‖Σ n_j|e^{−itℒ}u_j|²‖_{L^c_t L^d_z} ≤ C‖n‖_{ℓ^{α'}}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityExponents {
    pub w_time: f64,
    pub w_space: f64,
    pub density_time: f64,
    pub density_space: f64,
    pub alpha: f64,
}

impl DualityExponents {
    /// W ∈ L_t^{2q/(2−q)} L_z^{2p/(2−p)} against densities in
    /// L_t^{q'/2} L_z^{p'/2}, for 1 ≤ p, q < 2.
    pub fn from_lemma(p: f64, q: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(1.0..2.0).contains(&v) {
                return Err(out_of_range(name, format!("need 1 ≤ {name} < 2, got {v}")));
            }
        }
        if !(alpha >= 1.0) {
            return Err(out_of_range("alpha", "Schatten exponent must be at least 1"));
        }
        Ok(DualityExponents {
            w_time: 2.0 * q / (2.0 - q),
            w_space: 2.0 * p / (2.0 - p),
            density_time: half_of_conj(q),
            density_space: half_of_conj(p),
            alpha,
        })
    }

    /// Densities in L^p_t L^q_z, W ∈ L^{2p'}_t L^{2q'}_z and α = 2q/(q − 1).
    pub fn from_theorem(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(out_of_range("p", "need p ≥ 1"));
        }
        if !(q > 1.0) {
            return Err(out_of_range("q", "need q > 1 for a finite Schatten exponent"));
        }
        Ok(DualityExponents {
            w_time: 2.0 * conj_exp(p),
            w_space: 2.0 * conj_exp(q),
            density_time: p,
            density_space: q,
            alpha: if q.is_infinite() { 2.0 } else { 2.0 * q / (q - 1.0) },
        })
    }

    /// The diagonal p = q = (n + 1)/n.
    pub fn diagonal(n: usize) -> Result<Self> {
        let q = (n as f64 + 1.0) / n as f64;
        Self::from_theorem(q, q)
    }

    pub fn alpha_dual(&self) -> f64 {
        conj_exp(self.alpha)
    }
}

/// Smooth random weights: complex Gaussian coefficients on modes with
/// |μ|, |ν| ≤ 3 and time frequencies |m| ≤ 3, damped by e^{−0.2λ} and
/// normalized in ℓ².
#[derive(Clone, Debug)]
pub struct WeightSampler {
    basis: SampledBasis,
    time_modes: i64,
    damping: f64,
}

impl WeightSampler {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        let tr = Truncation::new(grid.dim(), 3)?;
        Ok(WeightSampler {
            basis: SampledBasis::new(&tr, grid)?,
            time_modes: 3,
            damping: 0.2,
        })
    }

    pub fn sample(&self, seed: u64, time: &TimeGrid) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = self.basis.len();
        let nm = (2 * self.time_modes + 1) as usize;
        let lam = self.basis.truncation().eigenvalues();
        let mut g: Vec<Complex64> = (0..modes * nm)
            .map(|i| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * (-self.damping * lam[i / nm] as f64).exp()
            })
            .collect();
        let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        g.iter_mut().for_each(|v| *v /= norm);
        let coeffs = DMatrix::from_row_slice(modes, nm, &g);
        // spatial profiles for each time frequency
        let profiles = self.basis.values() * coeffs;
        let nodes = self.basis.grid().len();
        let mut values = Vec::with_capacity(time.len() * nodes);
        for j in 0..time.len() {
            let t = time.node(j);
            let ph: Vec<Complex64> = (-self.time_modes..=self.time_modes)
                .map(|m| Complex64::from_polar(1.0, reduce_time(m as f64 * t)))
                .collect();
            for z in 0..nodes {
                values.push((0..nm).map(|k| ph[k] * profiles[(z, k)]).sum());
            }
        }
        SpaceTimeField::from_values(*time, *self.basis.grid(), values).expect("samples are finite")
    }
}

/// Constants seen on both sides of the duality and their agreement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub exponents: DualityExponents,
    /// sup ‖W T_S W̄‖_{S^α} / ‖W‖²
    pub c_schatten: f64,
    /// sup ‖ρ‖ / ‖n‖_{ℓ^{α'}}
    pub c_density: f64,
    pub schatten_ratios: Vec<f64>,
    pub density_ratios: Vec<f64>,
    pub skipped_zero_weights: usize,
    /// max(C_S, C_D) / min(C_S, C_D) − 1
    pub relative_gap: f64,
}

fn weight_norm_sq(w: &SpaceTimeField, exps: &DualityExponents) -> Result<f64> {
    Ok(mixed_norm(w, exps.w_time, exps.w_space)?.powi(2))
}

/// Eigenpairs of A*|W|²A: the squared singular values of WA and the
/// coefficient vectors of the right singular functions.
fn sandwich_spectrum(a: &PropagationMatrix, w: &SpaceTimeField) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let sq = SpaceTimeField::from_values(
        *w.time(),
        *w.grid(),
        w.values().iter().map(|v| Complex64::from(v.norm_sqr())).collect(),
    )?;
    let g = a.propagator().weighted_gram(&sq)?;
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let s = eig
        .eigenvalues
        .iter()
        .map(|&l| if l < CLAMP_RELATIVE * top { 0.0 } else { l })
        .collect();
    Ok((s, eig.eigenvectors))
}

fn density_ratio(
    a: &PropagationMatrix,
    coeffs: &DMatrix<Complex64>,
    nj: &[Complex64],
    exps: &DualityExponents,
) -> Result<(f64, SpaceTimeField)> {
    let rho = a.propagator().density(coeffs, nj)?;
    let mags: Vec<f64> = nj.iter().map(|v| v.norm()).collect();
    let den = schatten_sum(&mags, exps.alpha_dual());
    if den == 0.0 {
        return Err(Error::ZeroCoefficients);
    }
    Ok((mixed_norm(&rho, exps.density_time, exps.density_space)? / den, rho))
}

/// The system extremal against W: eigenvectors of A*|W|²A weighted by
/// s_j^{α−1}, where s_j are the eigenvalues (the singular values of W T_S W̄).
fn system_from_weight(s: &[f64], v: &DMatrix<Complex64>, alpha: f64) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] > 0.0).collect();
    let coeffs = DMatrix::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
    let nj = if alpha.is_infinite() {
        let top = keep
            .iter()
            .enumerate()
            .max_by(|x, y| s[*x.1].total_cmp(&s[*y.1]))
            .map(|x| x.0);
        (0..keep.len())
            .map(|c| Complex64::from(if Some(c) == top { 1.0 } else { 0.0 }))
            .collect()
    } else {
        // scaled by the top eigenvalue so repeated pairings neither blow up nor underflow
        let top = keep.iter().map(|&j| s[j]).fold(0.0, f64::max);
        keep.iter().map(|&j| Complex64::from((s[j] / top).powf(alpha - 1.0))).collect()
    };
    (coeffs, nj)
}

/// The weight extremal against a non-negative density:
/// |W|² = ρ^{d−1} ‖ρ(t)‖_d^{c−d}, (c, d) the density exponents.
fn weight_from_density(rho: &SpaceTimeField, exps: &DualityExponents) -> Option<SpaceTimeField> {
    let (c, d) = (exps.density_time, exps.density_space);
    if c.is_infinite() || d.is_infinite() {
        return None;
    }
    let w = rho.grid().weights();
    let nodes = rho.grid().len();
    let mut values = Vec::with_capacity(rho.values().len());
    let peak = rho.values().iter().map(|v| v.re).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    for j in 0..rho.time().len() {
        let frame: Vec<Complex64> = rho.frame(j).iter().map(|v| v / peak).collect();
        let frame = &frame[..];
        let norm = lp_norm_slice(frame, &w, d);
        let scale = if norm > 0.0 { norm.powf(c - d) } else { 0.0 };
        for v in frame.iter().take(nodes) {
            let r = v.re.max(0.0);
            values.push(Complex64::from((r.powf(d - 1.0) * scale).sqrt()));
        }
    }
    SpaceTimeField::from_values(*rho.time(), *rho.grid(), values).ok()
}

/// Estimates the best constants on the Schatten side (from the weights and
/// the weights extremal against the systems) and on the density side (from
/// the systems and the systems extremal against the weights), alternating
/// the two pairings for `rounds` steps from every starting point.
pub fn duality_check(
    a: &PropagationMatrix,
    systems: &[(DMatrix<Complex64>, Vec<Complex64>)],
    weights: &[SpaceTimeField],
    exps: &DualityExponents,
    rounds: usize,
) -> Result<DualityReport> {
    let mut schatten_ratios = Vec::new();
    let mut density_ratios = Vec::new();
    let mut skipped = 0;

    let from_weight = |w: SpaceTimeField,
                           sr: &mut Vec<f64>,
                           dr: &mut Vec<f64>,
                           skipped: &mut usize|
     -> Result<Option<SpaceTimeField>> {
        let den = weight_norm_sq(&w, exps)?;
        if den == 0.0 {
            *skipped += 1;
            return Ok(None);
        }
        let (s, v) = sandwich_spectrum(a, &w)?;
        sr.push(schatten_sum(&s, exps.alpha) / den);
        let (coeffs, nj) = system_from_weight(&s, &v, exps.alpha);
        if coeffs.ncols() == 0 {
            return Ok(None);
        }
        let (ratio, rho) = density_ratio(a, &coeffs, &nj, exps)?;
        dr.push(ratio);
        Ok(weight_from_density(&rho, exps))
    };

    for w in weights {
        let mut next = Some(w.clone());
        for _ in 0..=rounds {
            match next.take() {
                Some(w) => next = from_weight(w, &mut schatten_ratios, &mut density_ratios, &mut skipped)?,
                None => break,
            }
        }
    }
    for (coeffs, nj) in systems {
        let (ratio, rho) = density_ratio(a, coeffs, nj, exps)?;
        density_ratios.push(ratio);
        if nj.iter().any(|v| v.im != 0.0 || v.re < 0.0) {
            continue;
        }
        let mut next = weight_from_density(&rho, exps);
        for _ in 0..rounds {
            match next.take() {
                Some(w) => next = from_weight(w, &mut schatten_ratios, &mut density_ratios, &mut skipped)?,
                None => break,
            }
        }
    }
    let c_schatten = schatten_ratios.iter().copied().fold(0.0, f64::max);
    let c_density = density_ratios.iter().copied().fold(0.0, f64::max);
    let lo = c_schatten.min(c_density);
    let relative_gap = if lo > 0.0 {
        c_schatten.max(c_density) / lo - 1.0
    } else {
        f64::INFINITY
    };
    Ok(DualityReport {
        exponents: *exps,
        c_schatten,
        c_density,
        schatten_ratios,
        density_ratios,
        skipped_zero_weights: skipped,
        relative_gap,
    })
}
