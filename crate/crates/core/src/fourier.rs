//! Band-limited operations along one grid axis: spectral derivatives and
//! fractional-cell shifts. Lines are zero-padded to 2M before the FFT so the
//! periodic extension stays smooth; the Nyquist bin is dropped.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

pub(crate) struct AxisSpectral {
    m: usize,
    h: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AxisSpectral {
    pub(crate) fn new(grid: &GridSpec) -> Self {
        let m = grid.points_per_axis();
        let mut planner = FftPlanner::new();
        AxisSpectral {
            m,
            h: grid.spacing(),
            forward: planner.plan_fft_forward(2 * m),
            inverse: planner.plan_fft_inverse(2 * m),
        }
    }

    /// Angular frequency of bin j on the padded line; None for the Nyquist bin.
    fn wavenumber(&self, j: usize) -> Option<f64> {
        let len = 2 * self.m;
        let scale = 2.0 * PI / (len as f64 * self.h);
        match j.cmp(&self.m) {
            std::cmp::Ordering::Less => Some(j as f64 * scale),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(-((len - j) as f64) * scale),
        }
    }

    /// Applies the Fourier multiplier `symbol(k)` to every line along `axis`.
    fn apply(&self, values: &mut [Complex64], num_axes: usize, axis: usize, symbol: impl Fn(f64) -> Complex64) {
        let m = self.m;
        let len = 2 * m;
        let mult: Vec<Complex64> = (0..len)
            .map(|j| {
                self.wavenumber(j)
                    .map_or(Complex64::new(0.0, 0.0), |k| symbol(k) / len as f64)
            })
            .collect();
        let stride = m.pow((num_axes - 1 - axis) as u32);
        let block = stride * m;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for outer in (0..values.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = if i < m { values[base + i * stride] } else { Complex64::new(0.0, 0.0) };
                }
                self.forward.process_with_scratch(&mut buf, &mut scratch);
                buf.iter_mut().zip(&mult).for_each(|(b, s)| *b *= s);
                self.inverse.process_with_scratch(&mut buf, &mut scratch);
                for i in 0..m {
                    values[base + i * stride] = buf[i];
                }
            }
        }
    }

    /// ∂^order along `axis`.
    pub(crate) fn derivative(&self, values: &mut [Complex64], num_axes: usize, axis: usize, order: u32) {
        self.apply(values, num_axes, axis, |k| Complex64::new(0.0, k).powu(order));
    }

    /// f ↦ f(· + s) along `axis`.
    pub(crate) fn shift(&self, values: &mut [Complex64], num_axes: usize, axis: usize, s: f64) {
        self.apply(values, num_axes, axis, |k| Complex64::from_polar(1.0, k * s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_line(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        grid.axis_nodes()
            .iter()
            .flat_map(|&x| grid.axis_nodes().into_iter().map(move |y| (x, y)))
            .map(|(x, y)| Complex64::new(f(x) * (-y * y / 2.0).exp(), 0.0))
            .collect()
    }

    #[test]
    fn derivative_of_a_gaussian() {
        let grid = GridSpec::new(1, 10.0, 48).unwrap();
        let ax = AxisSpectral::new(&grid);
        let mut v = gaussian_line(&grid, |x| (-x * x / 2.0).exp());
        ax.derivative(&mut v, 2, 0, 1);
        let want = gaussian_line(&grid, |x| -x * (-x * x / 2.0).exp());
        let err = v.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err:e}");
        let mut v = gaussian_line(&grid, |x| (-x * x / 2.0).exp());
        ax.derivative(&mut v, 2, 1, 2);
        let want: Vec<Complex64> = grid
            .axis_nodes()
            .iter()
            .flat_map(|&x| grid.axis_nodes().into_iter().map(move |y| (x, y)))
            .map(|(x, y)| Complex64::new((y * y - 1.0) * (-(x * x + y * y) / 2.0).exp(), 0.0))
            .collect();
        let err = v.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err:e}");
    }

    #[test]
    fn half_cell_shift() {
        let grid = GridSpec::new(1, 9.0, 40).unwrap();
        let ax = AxisSpectral::new(&grid);
        let s = grid.spacing() / 2.0;
        let mut v = gaussian_line(&grid, |x| (-(x - 1.0) * (x - 1.0) / 2.0).exp());
        ax.shift(&mut v, 2, 0, s);
        let want = gaussian_line(&grid, |x| (-(x + s - 1.0) * (x + s - 1.0) / 2.0).exp());
        let err = v.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err:e}");
    }
}
