//! Twisted convolution, the special Hermite transform, the projections P_k
//! and the twisted Laplacian on sampled fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{phi_k, SampledBasis, Truncation};
use crate::error::{out_of_range, Error, Result};
use crate::fourier::AxisSpectral;
use crate::grid::{Field, GridSpec};

/// Coefficients f̂(μ, ν) aligned with a truncation's index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoeffs {
    truncation: Truncation,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn new(truncation: Truncation, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != truncation.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                truncation.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SpectralCoeffs { truncation, coeffs })
    }

    pub fn zeros(truncation: Truncation) -> Self {
        SpectralCoeffs {
            coeffs: vec![Complex64::new(0.0, 0.0); truncation.len()],
            truncation,
        }
    }

    /// The i-th unit vector.
    pub fn unit(truncation: Truncation, i: usize) -> Self {
        let mut c = Self::zeros(truncation);
        c.coeffs[i] = Complex64::new(1.0, 0.0);
        c
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Σ |f̂|².
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Samples of f on the lattice hℤ^{2n} that contains every difference of two
/// grid nodes. Entry p on an axis holds f at (p − M/2 + 1)·h.
fn lattice_samples(f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    let ax = AxisSpectral::new(grid);
    let mut v = f.values().to_vec();
    for axis in 0..grid.num_axes() {
        ax.shift(&mut v, grid.num_axes(), axis, 0.5 * grid.spacing());
    }
    v
}

struct ConvolutionPlan {
    m: usize,
    axes: usize,
    /// per-node axis indices, node-major
    index: Vec<usize>,
    weights: Vec<f64>,
    nodes: Vec<f64>,
}

impl ConvolutionPlan {
    fn new(grid: &GridSpec) -> Self {
        let axes = grid.num_axes();
        let mut index = vec![0; grid.len() * axes];
        for (node, chunk) in index.chunks_mut(axes).enumerate() {
            grid.unravel(node, chunk);
        }
        ConvolutionPlan {
            m: grid.points_per_axis(),
            axes,
            index,
            weights: grid.weights(),
            nodes: grid.axis_nodes(),
        }
    }

    fn node(&self, i: usize) -> &[usize] {
        &self.index[i * self.axes..(i + 1) * self.axes]
    }

    /// Flat lattice position of ζ_i − w_j, or None outside the domain.
    fn lattice_offset(&self, zi: &[usize], wj: &[usize]) -> Option<usize> {
        let half = (self.m / 2) as isize - 1;
        let mut p = 0usize;
        for (&a, &b) in zi.iter().zip(wj) {
            let k = a as isize - b as isize + half;
            if k < 0 || k >= self.m as isize {
                return None;
            }
            p = p * self.m + k as usize;
        }
        Some(p)
    }
}

fn check_grids(f: &Field, g: &Field) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// f × g(ζ) = ∫ f(ζ − w) g(w) e^{(i/2) Im(ζ·w̄)} dw with ζ·w̄ = Σ ζ_j conj(w_j).
///
/// Direct quadrature over all node pairs, O(M^{4n}). f is evaluated at ζ − w
/// through its band-limited lattice samples and taken as zero outside [−L, L].
pub fn twisted_convolve(f: &Field, g: &Field) -> Result<Field> {
    check_grids(f, g)?;
    let grid = *f.grid();
    let lat = lattice_samples(f);
    let plan = ConvolutionPlan::new(&grid);
    let gw: Vec<Complex64> = g.values().iter().zip(&plan.weights).map(|(v, &w)| v * w).collect();
    let out: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let zi = plan.node(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, gwj) in gw.iter().enumerate() {
                let wj = plan.node(j);
                let Some(p) = plan.lattice_offset(zi, wj) else { continue };
                let mut phase = 0.0;
                for c in 0..grid.dim() {
                    let (xz, yz) = (plan.nodes[zi[2 * c]], plan.nodes[zi[2 * c + 1]]);
                    let (xw, yw) = (plan.nodes[wj[2 * c]], plan.nodes[wj[2 * c + 1]]);
                    phase += yz * xw - xz * yw;
                }
                acc += lat[p] * gwj * Complex64::from_polar(1.0, 0.5 * phase);
            }
            acc
        })
        .collect();
    Field::from_values(grid, out)
}

/// Same quadrature as [`twisted_convolve`] with the phase split into per-axis
/// factors e^{(i/2) y x′} read from a precomputed M × M table.
pub fn twisted_convolve_fast(f: &Field, g: &Field) -> Result<Field> {
    check_grids(f, g)?;
    let grid = *f.grid();
    let m = grid.points_per_axis();
    let lat = lattice_samples(f);
    let plan = ConvolutionPlan::new(&grid);
    let table: Vec<Complex64> = (0..m * m)
        .map(|ab| Complex64::from_polar(1.0, 0.5 * plan.nodes[ab / m] * plan.nodes[ab % m]))
        .collect();
    let gw: Vec<Complex64> = g.values().iter().zip(&plan.weights).map(|(v, &w)| v * w).collect();
    let n = grid.dim();
    let out: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let zi = plan.node(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, gwj) in gw.iter().enumerate() {
                let wj = plan.node(j);
                let Some(p) = plan.lattice_offset(zi, wj) else { continue };
                let mut phase = Complex64::new(1.0, 0.0);
                for c in 0..n {
                    phase *= table[zi[2 * c + 1] * m + wj[2 * c]] * table[zi[2 * c] * m + wj[2 * c + 1]].conj();
                }
                acc += lat[p] * gwj * phase;
            }
            acc
        })
        .collect();
    Field::from_values(grid, out)
}

/// f̂(μ, ν) = ⟨f, Φ_μν⟩ for every mode of `tr`.
pub fn forward_transform(f: &Field, tr: &Truncation) -> Result<SpectralCoeffs> {
    let basis = SampledBasis::new(tr, f.grid())?;
    forward_with(&basis, f)
}

pub fn forward_with(basis: &SampledBasis, f: &Field) -> Result<SpectralCoeffs> {
    SpectralCoeffs::new(basis.truncation().clone(), basis.analyze(f)?)
}

/// Σ f̂(μ, ν) Φ_μν sampled on `grid`.
pub fn inverse_transform(c: &SpectralCoeffs, grid: &GridSpec) -> Result<Field> {
    let basis = SampledBasis::new(c.truncation(), grid)?;
    inverse_with(&basis, c)
}

pub fn inverse_with(basis: &SampledBasis, c: &SpectralCoeffs) -> Result<Field> {
    if basis.truncation() != c.truncation() {
        return Err(Error::ShapeMismatch("coefficients and basis use different truncations".into()));
    }
    basis.synthesize(c.coeffs())
}

/// P_k f through the transform: keep the modes with |ν| = k.
pub fn project_k(f: &Field, k: usize, tr: &Truncation) -> Result<Field> {
    let basis = SampledBasis::new(tr, f.grid())?;
    project_k_with(&basis, f, k)
}

pub fn project_k_with(basis: &SampledBasis, f: &Field, k: usize) -> Result<Field> {
    let tr = basis.truncation();
    if k > tr.k_max() {
        return Err(out_of_range("k", format!("{k} exceeds the truncation degree {}", tr.k_max())));
    }
    let mut c = basis.analyze(f)?;
    for (ci, pair) in c.iter_mut().zip(tr.pairs()) {
        if pair.nu.degree() != k {
            *ci = Complex64::new(0.0, 0.0);
        }
    }
    basis.synthesize(&c)
}

/// P_k f = (2π)^{−n} f × φ_k, computed by twisted convolution.
pub fn project_k_convolution(f: &Field, k: usize) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.dim();
    let values = (0..grid.len())
        .map(|i| phi_k(k, &grid.point(i), n))
        .collect::<Result<Vec<_>>>()?;
    let phi = Field::from_values(grid, values)?;
    let mut out = twisted_convolve_fast(f, &phi)?;
    out.scale(Complex64::from((2.0 * PI).powf(-(n as f64))));
    Ok(out)
}

/// How ∂/∂x and ∂/∂y are discretized in [`apply_twisted_laplacian_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeScheme {
    /// Fourier differentiation on the zero-padded grid.
    #[default]
    Spectral,
    /// Centered fourth-order differences, zero outside the grid.
    FiniteDifference4,
}

/// ℒf = −Δf + |ζ|²/4 f + i Σ_j (y_j ∂_{x_j} − x_j ∂_{y_j}) f.
pub fn apply_twisted_laplacian(f: &Field) -> Result<Field> {
    apply_twisted_laplacian_with(f, DerivativeScheme::Spectral)
}

pub fn apply_twisted_laplacian_with(f: &Field, scheme: DerivativeScheme) -> Result<Field> {
    let grid = *f.grid();
    let m = grid.points_per_axis();
    if m < 16 {
        return Err(out_of_range("M", format!("need at least 16 nodes per axis, got {m}")));
    }
    let axes = grid.num_axes();
    let derive = |axis: usize, order: u32| -> Vec<Complex64> {
        match scheme {
            DerivativeScheme::Spectral => {
                let mut v = f.values().to_vec();
                AxisSpectral::new(&grid).derivative(&mut v, axes, axis, order);
                v
            }
            DerivativeScheme::FiniteDifference4 => fd4(f.values(), &grid, axis, order),
        }
    };
    let mut out: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r2: f64 = grid.point(i).iter().map(|z| z.norm_sqr()).sum();
            v * (0.25 * r2)
        })
        .collect();
    let mut coords = vec![0.0; axes];
    for c in 0..grid.dim() {
        let (ax, ay) = (2 * c, 2 * c + 1);
        let dxx = derive(ax, 2);
        let dyy = derive(ay, 2);
        let dx = derive(ax, 1);
        let dy = derive(ay, 1);
        for (i, o) in out.iter_mut().enumerate() {
            grid.coords(i, &mut coords);
            let (x, y) = (coords[ax], coords[ay]);
            *o += -(dxx[i] + dyy[i]) + Complex64::i() * (y * dx[i] - x * dy[i]);
        }
    }
    Field::from_values(grid, out)
}

fn fd4(values: &[Complex64], grid: &GridSpec, axis: usize, order: u32) -> Vec<Complex64> {
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let stride = m.pow((grid.num_axes() - 1 - axis) as u32);
    let (stencil, scale): ([f64; 5], f64) = match order {
        1 => ([1.0, -8.0, 0.0, 8.0, -1.0], 1.0 / (12.0 * h)),
        2 => ([-1.0, 16.0, -30.0, 16.0, -1.0], 1.0 / (12.0 * h * h)),
        _ => unreachable!("only first and second derivatives are used"),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = (idx / stride) % m;
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, &c) in stencil.iter().enumerate() {
            let p = pos as isize + s as isize - 2;
            if c != 0.0 && p >= 0 && p < m as isize {
                acc += values[(idx as isize + (s as isize - 2) * stride as isize) as usize] * c;
            }
        }
        *o = acc * scale;
    }
    out
}
