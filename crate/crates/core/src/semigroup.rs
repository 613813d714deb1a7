//! The semigroup e^{−ηℒ}, η = r + it, through the Mehler kernel and through
//! the spectral multiplier e^{−η(2|ν|+n)}.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::SampledBasis;
use crate::error::{out_of_range, Error, Result};
use crate::grid::{Field, SpaceTimeField, TimeGrid};
use crate::twisted::{forward_with, inverse_with, twisted_convolve_fast, SpectralCoeffs};

/// η = r + it with r ≥ 0 and t reduced to [−π, π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    r: f64,
    t: f64,
}

/// t mod 2π in [−π, π).
pub fn reduce_time(t: f64) -> f64 {
    (t + PI).rem_euclid(TAU) - PI
}

impl ComplexTime {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        if !(r.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite);
        }
        if r < 0.0 {
            return Err(out_of_range("r", format!("real part must be ≥ 0, got {r}")));
        }
        Ok(ComplexTime { r, t: reduce_time(t) })
    }

    pub fn real(r: f64) -> Result<Self> {
        Self::new(r, 0.0)
    }

    pub fn imaginary(t: f64) -> Result<Self> {
        Self::new(0.0, t)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eta(&self) -> Complex64 {
        Complex64::new(self.r, self.t)
    }

    /// ω = e^{−2η}.
    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar((-2.0 * self.r).exp(), -2.0 * self.t)
    }

    /// e^{−ηλ} for an integer eigenvalue λ.
    pub fn multiplier(&self, lambda: usize) -> Complex64 {
        let l = lambda as f64;
        // reduce tλ before exponentiating so periodic times give identical phases
        Complex64::from_polar((-self.r * l).exp(), -reduce_time(self.t * l))
    }
}

/// K_η(ζ) = (2π)^{−n} e^{−nη} (1 − ω)^{−n} exp(−(1 + ω)/(1 − ω) · |ζ|²/4).
pub fn mehler_kernel(eta: ComplexTime, zeta: &[Complex64]) -> Result<Complex64> {
    let n = zeta.len() as i32;
    if n == 0 {
        return Err(out_of_range("zeta", "point must have at least one coordinate"));
    }
    let omega = eta.omega();
    let one = Complex64::new(1.0, 0.0);
    let gap = (one - omega).norm();
    if gap <= 1e-12 {
        return Err(Error::SingularTime {
            r: eta.r,
            t: eta.t,
            gap,
        });
    }
    let r2: f64 = zeta.iter().map(|z| z.norm_sqr()).sum();
    let prefactor = (2.0 * PI).powi(-n) * (-eta.eta() * n as f64).exp() * (one - omega).powi(-n);
    Ok(prefactor * (-(one + omega) / (one - omega) * (0.25 * r2)).exp())
}

/// Multiplies the coefficient of (μ, ν) by e^{−η(2|ν|+n)}.
pub fn evolve_spectral(c: &SpectralCoeffs, eta: ComplexTime) -> SpectralCoeffs {
    let mut out = c.clone();
    for (v, pair) in out.coeffs_mut().iter_mut().zip(c.truncation().pairs()) {
        *v *= eta.multiplier(pair.eigenvalue());
    }
    out
}

/// e^{−ηℒ}f = f × K_η by twisted convolution on the grid of f.
pub fn evolve_kernel(f: &Field, eta: ComplexTime) -> Result<Field> {
    let grid = *f.grid();
    let values = (0..grid.len())
        .map(|i| mehler_kernel(eta, &grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    let kernel = Field::from_values(grid, values)?;
    twisted_convolve_fast(f, &kernel)
}

/// e^{−itℒ}u in coefficient space.
pub fn propagate(u: &SpectralCoeffs, t: f64) -> Result<SpectralCoeffs> {
    Ok(evolve_spectral(u, ComplexTime::imaginary(t)?))
}

/// e^{−itℒ}u for a sampled u, through the transform on `basis`.
pub fn propagate_field(basis: &SampledBasis, u: &Field, t: f64) -> Result<Field> {
    let c = forward_with(basis, u)?;
    inverse_with(basis, &propagate(&c, t)?)
}

/// max over the given points and time nodes of |K_{it}(ζ)|·|sin t|ⁿ.
pub fn boundary_kernel_envelope(points: &[Vec<Complex64>], time: &TimeGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in time.nodes() {
        let eta = ComplexTime::imaginary(t)?;
        for z in points {
            let k = mehler_kernel(eta, z)?;
            worst = worst.max(k.norm() * t.sin().abs().powi(z.len() as i32));
        }
    }
    Ok(worst)
}

/// A sampled basis paired with a time grid: evaluates e^{−itℒ}u and
/// densities Σ n_j |e^{−itℒ}u_j|² for coefficient vectors, without forming
/// the space-time matrix.
#[derive(Clone, Debug)]
pub struct SampledPropagator {
    basis: SampledBasis,
    time: TimeGrid,
    /// column indices grouped by |ν|
    groups: Vec<Vec<usize>>,
}

impl SampledPropagator {
    pub fn new(basis: SampledBasis, time: TimeGrid) -> Self {
        let tr = basis.truncation();
        let mut groups = vec![Vec::new(); tr.k_max() + 1];
        for (i, p) in tr.pairs().iter().enumerate() {
            groups[p.nu.degree()].push(i);
        }
        SampledPropagator { basis, time, groups }
    }

    pub fn basis(&self) -> &SampledBasis {
        &self.basis
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    fn phases(&self, j: usize) -> Vec<Complex64> {
        let eta = ComplexTime::imaginary(self.time.node(j)).expect("time nodes are finite");
        let n = self.basis.grid().dim();
        (0..self.groups.len()).map(|k| eta.multiplier(2 * k + n)).collect()
    }

    /// Φ_k C_k for every degree k: nodes × columns(C) per group.
    fn grouped_products(&self, coeffs: &DMatrix<Complex64>) -> Vec<DMatrix<Complex64>> {
        let phi = self.basis.values();
        self.groups
            .iter()
            .map(|idx| {
                let mut acc = DMatrix::zeros(phi.nrows(), coeffs.ncols());
                for &i in idx {
                    acc += phi.column(i) * coeffs.row(i);
                }
                acc
            })
            .collect()
    }

    fn check_coeffs(&self, rows: usize) -> Result<()> {
        if rows != self.basis.len() {
            return Err(Error::ShapeMismatch(format!(
                "{rows} coefficient rows for {} modes",
                self.basis.len()
            )));
        }
        Ok(())
    }

    /// Samples of e^{−itℒ}u on every (t, z) node.
    pub fn evolve(&self, coeffs: &[Complex64]) -> Result<SpaceTimeField> {
        self.check_coeffs(coeffs.len())?;
        let c = DMatrix::from_column_slice(coeffs.len(), 1, coeffs);
        let parts = self.grouped_products(&c);
        let nodes = self.basis.grid().len();
        let mut out = SpaceTimeField::zeros(self.time, *self.basis.grid());
        out.values_mut()
            .par_chunks_mut(nodes)
            .enumerate()
            .for_each(|(j, frame)| {
                for (ph, part) in self.phases(j).iter().zip(&parts) {
                    for (o, v) in frame.iter_mut().zip(part.iter()) {
                        *o += ph * v;
                    }
                }
            });
        Ok(out)
    }

    /// ρ(t, z) = Σ_j n_j |e^{−itℒ}u_j(z)|², u_j the columns of `coeffs`.
    pub fn density(&self, coeffs: &DMatrix<Complex64>, nj: &[Complex64]) -> Result<SpaceTimeField> {
        self.check_coeffs(coeffs.nrows())?;
        if nj.len() != coeffs.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} functions",
                nj.len(),
                coeffs.ncols()
            )));
        }
        let parts = self.grouped_products(coeffs);
        let nodes = self.basis.grid().len();
        let mut out = SpaceTimeField::zeros(self.time, *self.basis.grid());
        out.values_mut()
            .par_chunks_mut(nodes)
            .enumerate()
            .for_each(|(j, frame)| {
                let ph = self.phases(j);
                for (f, &w) in nj.iter().enumerate() {
                    if w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (z, o) in frame.iter_mut().enumerate() {
                        let u: Complex64 = ph.iter().zip(&parts).map(|(p, m)| p * m[(z, f)]).sum();
                        *o += w * u.norm_sqr();
                    }
                }
            });
        Ok(out)
    }

    /// A* |W|² A for the space-time matrix A with entries
    /// √(w_t w_z) e^{−iλt} Φ(z); `weight` holds |W|² (only the real part is read).
    pub fn weighted_gram(&self, weight: &SpaceTimeField) -> Result<DMatrix<Complex64>> {
        if weight.time().len() != self.time.len() || weight.grid() != self.basis.grid() {
            return Err(Error::ShapeMismatch("weight and propagator live on different grids".into()));
        }
        let kmax = self.groups.len() - 1;
        let wz = self.basis.weights();
        let wt = self.time.weight();
        let nodes = wz.len();
        // V_d(z) = Σ_t w_t e^{i t d} |W(t, z)|² for d = 2(k_a − k_b)
        let shifts: Vec<i64> = (-(kmax as i64)..=kmax as i64).collect();
        let v: Vec<Vec<Complex64>> = shifts
            .par_iter()
            .map(|&s| {
                let mut acc = vec![Complex64::new(0.0, 0.0); nodes];
                for j in 0..self.time.len() {
                    let ph = Complex64::from_polar(wt, reduce_time(self.time.node(j) * 2.0 * s as f64));
                    for (a, w) in acc.iter_mut().zip(weight.frame(j)) {
                        *a += ph * w.re;
                    }
                }
                acc.iter_mut().zip(wz).for_each(|(a, &w)| *a *= w);
                acc
            })
            .collect();
        let tr = self.basis.truncation();
        let deg: Vec<usize> = tr.pairs().iter().map(|p| p.nu.degree()).collect();
        let phi = self.basis.values();
        let m = tr.len();
        let rows: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let s = deg[a] as i64 - deg[b] as i64 + kmax as i64;
                        let vd = &v[s as usize];
                        phi.column(a)
                            .iter()
                            .zip(phi.column(b).iter())
                            .zip(vd)
                            .map(|((x, y), w)| x.conj() * y * w)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(DMatrix::from_fn(m, m, |a, b| rows[a][b]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Truncation;
    use crate::grid::GridSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_time_at_origin() {
        for &r in &[0.1, 0.5, 2.0] {
            let k = mehler_kernel(ComplexTime::real(r).unwrap(), &[c(0.0, 0.0)]).unwrap();
            let want = (-r as f64).exp() / (1.0 - (-2.0 * r as f64).exp()) / (2.0 * PI);
            assert!((k - want).norm() < 1e-14 * want);
        }
    }

    #[test]
    fn periodic_in_t() {
        let z = [c(0.8, -1.3)];
        for &t in &[0.3, -2.0, 3.0] {
            let a = mehler_kernel(ComplexTime::new(0.2, t).unwrap(), &z).unwrap();
            let b = mehler_kernel(ComplexTime::new(0.2, t + TAU).unwrap(), &z).unwrap();
            assert!((a - b).norm() <= 1e-13 * a.norm());
        }
    }

    #[test]
    fn boundary_bound_and_envelope() {
        let z = [c(0.0, 0.0)];
        let k = mehler_kernel(ComplexTime::new(0.1, 1.0).unwrap(), &z).unwrap();
        assert!(k.norm() <= 2.0 / 1f64.sin());
        let tg = TimeGrid::lebesgue(16).unwrap();
        let pts = vec![vec![c(0.0, 0.0)], vec![c(2.0, 1.0)], vec![c(-5.0, 3.0)]];
        let env = boundary_kernel_envelope(&pts, &tg).unwrap();
        assert!((env - 1.0 / (4.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn singular_times_rejected() {
        assert!(matches!(
            mehler_kernel(ComplexTime::new(0.0, 0.0).unwrap(), &[c(1.0, 0.0)]),
            Err(Error::SingularTime { .. })
        ));
        assert!(mehler_kernel(ComplexTime::new(0.0, PI).unwrap(), &[c(1.0, 0.0)]).is_err());
        assert!(ComplexTime::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn spectral_semigroup() {
        let tr = Truncation::new(1, 3).unwrap();
        let coeffs: Vec<Complex64> = (0..tr.len()).map(|i| c(1.0 + i as f64, -0.5)).collect();
        let u = SpectralCoeffs::new(tr.clone(), coeffs).unwrap();
        assert_eq!(evolve_spectral(&u, ComplexTime::real(0.0).unwrap()), u);
        let a = ComplexTime::new(0.3, 1.1).unwrap();
        let b = ComplexTime::new(0.2, -0.4).unwrap();
        let ab = ComplexTime::new(0.5, 0.7).unwrap();
        let two = evolve_spectral(&evolve_spectral(&u, a), b);
        let one = evolve_spectral(&u, ab);
        for (x, y) in two.coeffs().iter().zip(one.coeffs()) {
            assert!((x - y).norm() < 1e-13 * x.norm().max(1.0));
        }
        let p = propagate(&u, 0.9).unwrap();
        assert!((p.energy() - u.energy()).abs() < 1e-12 * u.energy());
        let q = propagate(&u, 0.9 + TAU).unwrap();
        for (x, y) in p.coeffs().iter().zip(q.coeffs()) {
            assert!((x - y).norm() < 1e-12 * x.norm());
        }
    }

    #[test]
    fn kernel_path_on_the_ground_state() {
        let grid = GridSpec::default_for(1, 2, 32).unwrap();
        let tr = Truncation::new(1, 0).unwrap();
        let g = SampledBasis::new(&tr, &grid).unwrap().column(0);
        let out = evolve_kernel(&g, ComplexTime::real(0.5).unwrap()).unwrap();
        let mut want = g.clone();
        want.scale(c((-0.5f64).exp(), 0.0));
        assert!(out.max_diff(&want).unwrap() < 1e-8);
    }
}
