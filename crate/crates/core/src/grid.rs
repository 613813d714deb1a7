//! Uniform tensor grids on ℂⁿ ≅ ℝ²ⁿ and on the time circle, with trapezoid
//! quadrature, Lᵖ norms and mixed space-time norms.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// A uniform grid with `m` nodes per real axis on [−L, L], 2n axes ordered
/// (x₁, y₁, x₂, y₂, …) and laid out row-major (last axis fastest).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
    m: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(out_of_range("n", "dimension must be at least 1"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(out_of_range("L", format!("half-width must be positive, got {half_width}")));
        }
        if m < 8 || m % 2 != 0 {
            return Err(out_of_range("M", format!("need an even node count ≥ 8, got {m}")));
        }
        let total = (m as u128).checked_pow(2 * n as u32);
        if total.map_or(true, |t| t > u32::MAX as u128) {
            return Err(out_of_range("M", "grid has too many nodes"));
        }
        Ok(GridSpec { n, half_width, m })
    }

    /// L = 2√(2k_max + n) + 5: past the turning radius of every mode in
    /// Truncation(n, k_max) with a Gaussian tail margin.
    pub fn default_half_width(n: usize, k_max: usize) -> f64 {
        2.0 * ((2 * k_max + n) as f64).sqrt() + 5.0
    }

    pub fn default_for(n: usize, k_max: usize, m: usize) -> Result<Self> {
        Self::new(n, Self::default_half_width(n, k_max), m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn num_axes(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.m.pow(2 * self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.m - 1) as f64
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.m).map(|i| -self.half_width + i as f64 * h).collect()
    }

    pub fn axis_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.m];
        w[0] = 0.5 * h;
        w[self.m - 1] = 0.5 * h;
        w
    }

    /// Total measure (2L)^{2n}; the trapezoid weights sum to it exactly.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(2 * self.n as i32)
    }

    /// Tensor-product trapezoid weights for every node.
    pub fn weights(&self) -> Vec<f64> {
        let aw = self.axis_weights();
        let mut out = vec![1.0];
        for _ in 0..self.num_axes() {
            out = out.iter().flat_map(|&a| aw.iter().map(move |&b| a * b)).collect();
        }
        out
    }

    /// Per-axis node indices of a flat index.
    pub fn unravel(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = idx % self.m;
            idx /= self.m;
        }
    }

    /// Real coordinates (x₁, y₁, …) of a flat index.
    pub fn coords(&self, idx: usize, out: &mut [f64]) {
        let mut ix = vec![0; self.num_axes()];
        self.unravel(idx, &mut ix);
        let h = self.spacing();
        for (o, &i) in out.iter_mut().zip(&ix) {
            *o = -self.half_width + i as f64 * h;
        }
    }

    /// The node as a point of ℂⁿ.
    pub fn point(&self, idx: usize) -> Vec<Complex64> {
        let mut c = vec![0.0; self.num_axes()];
        self.coords(idx, &mut c);
        c.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Free-function spelling of [`GridSpec::new`].
pub fn make_grid(n: usize, half_width: f64, m: usize) -> Result<GridSpec> {
    GridSpec::new(n, half_width, m)
}

/// Complex samples on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Field {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field { grid, values })
    }

    /// Samples `f` at every node; `f` receives the point of ℂⁿ.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[Complex64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &Field) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |self − other| over nodes.
    pub fn max_diff(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Little-endian layout: n (u64), L (f64), M (u64), then re/im pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.values.len());
        out.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.half_width.to_le_bytes());
        out.extend_from_slice(&(self.grid.m as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 24 {
            return Err(Error::Encoding("header shorter than 24 bytes".into()));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().unwrap() };
        let n = u64::from_le_bytes(word(0)) as usize;
        let l = f64::from_le_bytes(word(1));
        let m = u64::from_le_bytes(word(2)) as usize;
        let grid = GridSpec::new(n, l, m).map_err(|e| Error::Encoding(e.to_string()))?;
        let body = &bytes[24..];
        if body.len() != 16 * grid.len() {
            return Err(Error::Encoding(format!(
                "expected {} payload bytes, found {}",
                16 * grid.len(),
                body.len()
            )));
        }
        let values = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Field::from_values(grid, values)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Field::from_bytes(&buf)
    }
}

/// Pairwise (tree) summation in index order; the reduction order is fixed so
/// results are reproducible bit for bit.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + std::ops::Add<Output = T>,
{
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// ⟨f, g⟩ = Σ f · conj(g) · w.
pub fn inner_product(f: &Field, g: &Field) -> Result<Complex64> {
    f.grid.check_same(&g.grid)?;
    let w = f.grid.weights();
    let terms: Vec<Complex64> = f
        .values
        .iter()
        .zip(&g.values)
        .zip(&w)
        .map(|((a, b), &w)| a * b.conj() * w)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Weighted Lᵖ norm of raw samples; p = ∞ is the max modulus.
pub(crate) fn lp_norm_slice(values: &[Complex64], weights: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let terms: Vec<f64> = if p == 1.0 {
        values.iter().zip(weights).map(|(v, &w)| v.norm() * w).collect()
    } else if p == 2.0 {
        values.iter().zip(weights).map(|(v, &w)| v.norm_sqr() * w).collect()
    } else {
        values.iter().zip(weights).map(|(v, &w)| v.norm().powf(p) * w).collect()
    };
    let s = pairwise_sum(&terms);
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(out_of_range(name, format!("exponent must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// (Σ |f|ᵖ w)^{1/p}, with p = ∞ the max modulus over nodes.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(lp_norm_slice(&f.values, &f.grid.weights(), p))
}

/// Whether time weights are 2π/N_t (Lebesgue measure on 𝕋) or 1/N_t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeMeasure {
    Lebesgue,
    Normalized,
}

/// N_t midpoint nodes t_j = −π + (j + ½)·2π/N_t; neither 0 nor ±π is a node
/// when N_t is even.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nt: usize,
    measure: TimeMeasure,
}

impl TimeGrid {
    pub fn new(nt: usize, measure: TimeMeasure) -> Result<Self> {
        if nt < 2 || nt % 2 != 0 {
            return Err(out_of_range("nt", format!("need an even node count ≥ 2, got {nt}")));
        }
        Ok(TimeGrid { nt, measure })
    }

    pub fn lebesgue(nt: usize) -> Result<Self> {
        Self::new(nt, TimeMeasure::Lebesgue)
    }

    pub fn normalized(nt: usize) -> Result<Self> {
        Self::new(nt, TimeMeasure::Normalized)
    }

    pub fn len(&self) -> usize {
        self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn measure(&self) -> TimeMeasure {
        self.measure
    }

    pub fn with_measure(self, measure: TimeMeasure) -> Self {
        TimeGrid { measure, ..self }
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + (j as f64 + 0.5) * 2.0 * PI / self.nt as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.node(j)).collect()
    }

    pub fn weight(&self) -> f64 {
        match self.measure {
            TimeMeasure::Lebesgue => 2.0 * PI / self.nt as f64,
            TimeMeasure::Normalized => 1.0 / self.nt as f64,
        }
    }
}

/// Samples on TimeGrid × GridSpec, time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    time: TimeGrid,
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(time: TimeGrid, grid: GridSpec) -> Self {
        SpaceTimeField {
            values: vec![Complex64::new(0.0, 0.0); time.len() * grid.len()],
            time,
            grid,
        }
    }

    pub fn from_values(time: TimeGrid, grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != time.len() * grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} × {} nodes",
                values.len(),
                time.len(),
                grid.len()
            )));
        }
        Ok(SpaceTimeField { time, grid, values })
    }

    /// Stacks one field per time node.
    pub fn from_frames(time: TimeGrid, frames: Vec<Field>) -> Result<Self> {
        if frames.len() != time.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} frames for {} time nodes",
                frames.len(),
                time.len()
            )));
        }
        let grid = frames[0].grid;
        let mut values = Vec::with_capacity(time.len() * grid.len());
        for f in frames {
            grid.check_same(&f.grid)?;
            values.extend(f.values);
        }
        Ok(SpaceTimeField { time, grid, values })
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn frame(&self, j: usize) -> &[Complex64] {
        let s = self.grid.len();
        &self.values[j * s..(j + 1) * s]
    }

    pub fn frame_mut(&mut self, j: usize) -> &mut [Complex64] {
        let s = self.grid.len();
        &mut self.values[j * s..(j + 1) * s]
    }

    pub fn frame_field(&self, j: usize) -> Field {
        Field {
            grid: self.grid,
            values: self.frame(j).to_vec(),
        }
    }
}

/// ‖F‖_{L^p_t L^q_z} = (Σ_t w_t ‖F(t)‖_q^p)^{1/p}, p = ∞ taking the max over t.
pub fn mixed_norm(f: &SpaceTimeField, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let w = f.grid.weights();
    let inner: Vec<f64> = (0..f.time.len())
        .map(|j| lp_norm_slice(f.frame(j), &w, q))
        .collect();
    let wt = f.time.weight();
    if p == f64::INFINITY {
        return Ok(inner.into_iter().fold(0.0, f64::max));
    }
    let terms: Vec<f64> = inner.iter().map(|&v| wt * v.powf(p)).collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

/// Exponents (p, q) of a mixed norm L^p_t L^q_z on 𝕋 × ℂⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub n: usize,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64, n: usize) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if n == 0 {
            return Err(out_of_range("n", "dimension must be at least 1"));
        }
        Ok(ExponentPair { p, q, n })
    }

    /// 1/p + n/q = n.
    pub fn on_line(&self) -> bool {
        let inv_p = if self.p.is_infinite() { 0.0 } else { 1.0 / self.p };
        (inv_p + self.n as f64 / self.q - self.n as f64).abs() < 1e-12
    }

    /// 1 ≤ q ≤ 1 + 1/n.
    pub fn in_range(&self) -> bool {
        self.q >= 1.0 && self.q <= 1.0 + 1.0 / self.n as f64 + 1e-15
    }
}
