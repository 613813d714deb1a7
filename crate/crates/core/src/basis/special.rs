//! Special Hermite functions
//!
//! Φ_μν(x + iy) = (2π)^{−n/2} ∫ e^{i x·ξ} Φ_μ(ξ + y/2) Φ_ν(ξ − y/2) dξ
//!
//! The integrand is a polynomial times e^{−|ξ|² − |y|²/4}, so each coordinate
//! is one Gauss–Hermite sum; the n-dimensional value is the product of the
//! one-dimensional ones.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauss::{self, GaussHermite};
use super::hermite::hermite_table_into;
use super::{MultiIndex, MultiIndexPair};
use crate::error::{Error, Result};

/// Nodes needed for `pair` at `zeta`: 2·max(|μ|, |ν|) + 20 plus ⌈x²/2⌉ for the
/// oscillation of e^{ixξ} at the largest |Re ζ_j|.
pub fn required_order(pair: &MultiIndexPair, zeta: &[Complex64]) -> usize {
    let k = pair.mu.degree().max(pair.nu.degree());
    let x = zeta.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    order_for(k, x)
}

pub(crate) fn order_for(k: usize, x_abs: f64) -> usize {
    2 * k + 20 + (0.5 * x_abs * x_abs).ceil() as usize
}

/// Radius beyond which a one-dimensional factor with indices (μ, ν) is below
/// e^{−60} and is returned as exactly zero.
pub fn negligible_radius(mu: usize, nu: usize) -> f64 {
    2.0 * ((mu + nu + 1) as f64).sqrt() + 16.0
}

/// Φ_μν(ζ) with an `order`-point rule per coordinate.
pub fn special_hermite(pair: &MultiIndexPair, zeta: &[Complex64], order: usize) -> Result<Complex64> {
    if zeta.len() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            found: zeta.len(),
        });
    }
    if zeta.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (mu, nu) = (pair.mu.entries(), pair.nu.entries());
    if zeta
        .iter()
        .enumerate()
        .any(|(j, z)| z.norm() > negligible_radius(mu[j], nu[j]))
    {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let required = required_order(pair, zeta);
    if order < required {
        return Err(Error::InsufficientQuadrature {
            required,
            given: order,
        });
    }
    let rule = gauss::rule(order);
    Ok(zeta
        .iter()
        .enumerate()
        .map(|(j, &z)| special_hermite_1d(mu[j], nu[j], z, &rule))
        .product())
}

/// Φ_μν(ζ) at the order given by [`required_order`].
pub fn special_hermite_auto(pair: &MultiIndexPair, zeta: &[Complex64]) -> Result<Complex64> {
    special_hermite(pair, zeta, required_order(pair, zeta))
}

fn special_hermite_1d(mu: usize, nu: usize, z: Complex64, rule: &GaussHermite) -> Complex64 {
    let k = mu.max(nu);
    let mut a = vec![0.0; k + 1];
    let mut b = vec![0.0; k + 1];
    let mut acc = Complex64::new(0.0, 0.0);
    for (&xi, &w) in rule.nodes().iter().zip(rule.scaled_weights()) {
        hermite_table_into(xi + 0.5 * z.im, &mut a);
        hermite_table_into(xi - 0.5 * z.im, &mut b);
        acc += Complex64::from_polar(w * a[mu] * b[nu], z.re * xi);
    }
    acc / (2.0 * PI).sqrt()
}

/// All one-dimensional Φ_μν(z) with μ, ν ≤ `k`, row-major as `[μ·(k+1) + ν]`.
pub(crate) fn special_hermite_1d_table(k: usize, z: Complex64, rule: &GaussHermite) -> Vec<Complex64> {
    let dim = k + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    if z.norm() > negligible_radius(k, k) {
        return out;
    }
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    let scale = 1.0 / (2.0 * PI).sqrt();
    for (&xi, &w) in rule.nodes().iter().zip(rule.scaled_weights()) {
        hermite_table_into(xi + 0.5 * z.im, &mut a);
        hermite_table_into(xi - 0.5 * z.im, &mut b);
        let c = Complex64::from_polar(w * scale, z.re * xi);
        for (mu, &am) in a.iter().enumerate() {
            let ca = c * am;
            for (nu, &bn) in b.iter().enumerate() {
                out[mu * dim + nu] += ca * bn;
            }
        }
    }
    out
}

/// φ_k(ζ) = (2π)^{n/2} Σ_{|ν| = k} Φ_νν(ζ).
pub fn phi_k(k: usize, zeta: &[Complex64], n: usize) -> Result<Complex64> {
    if zeta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: zeta.len(),
        });
    }
    if zeta.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    // diagonal 1D tables per coordinate, then sum over the simplex |ν| = k
    let diag: Vec<Vec<Complex64>> = zeta
        .iter()
        .map(|&z| {
            let rule = gauss::rule(order_for(k, z.re.abs()));
            let t = special_hermite_1d_table(k, z, &rule);
            (0..=k).map(|j| t[j * (k + 1) + j]).collect()
        })
        .collect();
    let sum: Complex64 = MultiIndex::of_degree(n, k)
        .iter()
        .map(|nu| {
            nu.entries()
                .iter()
                .zip(&diag)
                .map(|(&j, d)| d[j])
                .product::<Complex64>()
        })
        .sum();
    Ok(sum * (2.0 * PI).powf(0.5 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::hermite::{hermite_1d, hermite_tensor};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Trapezoid rule on [−a, a] for the defining integral; for a
    /// Gaussian-decaying analytic integrand it converges geometrically.
    fn oracle_1d(mu: usize, nu: usize, z: Complex64) -> Complex64 {
        let (a, m) = (16.0, 8001);
        let h = 2.0 * a / (m - 1) as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..m {
            let xi = -a + i as f64 * h;
            let g = hermite_1d(mu, xi + z.im / 2.0) * hermite_1d(nu, xi - z.im / 2.0);
            acc += Complex64::from_polar(g * h, z.re * xi);
        }
        acc / (2.0 * PI).sqrt()
    }

    /// Laguerre L_k^{(α)} by its three-term recurrence.
    fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for j in 0..k {
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn gaussian_values() {
        let p = MultiIndexPair::scalar(0, 0);
        let v = special_hermite_auto(&p, &[c(0.0, 0.0)]).unwrap();
        assert!((v - (2.0 * PI).powf(-0.5)).norm() < 1e-15);
        let v = special_hermite_auto(&p, &[c(2.0, 0.0)]).unwrap();
        assert!((v - (2.0 * PI).powf(-0.5) * (-1.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn matches_refined_quadrature() {
        let z = c(0.7, 0.3);
        let got = special_hermite_auto(&MultiIndexPair::scalar(1, 0), &[z]).unwrap();
        assert!((got - oracle_1d(1, 0, z)).norm() < 1e-13);
        for &(mu, nu, z) in &[(3, 5, c(-2.2, 1.4)), (8, 8, c(4.0, -3.5)), (0, 7, c(9.5, 0.5))] {
            let got = special_hermite_auto(&MultiIndexPair::scalar(mu, nu), &[z]).unwrap();
            let want = oracle_1d(mu, nu, z);
            assert!((got - want).norm() < 1e-12, "({mu},{nu}) at {z}: {got} vs {want}");
        }
    }

    #[test]
    fn coordinate_factorization_against_2d_oracle() {
        let pair = MultiIndexPair::new(vec![1, 2].into(), vec![2, 0].into()).unwrap();
        let zeta = [c(0.6, -0.4), c(-1.1, 0.8)];
        let got = special_hermite_auto(&pair, &zeta).unwrap();
        // nested trapezoid over ℝ² of the defining integral
        let (a, m) = (9.0, 401);
        let h = 2.0 * a / (m - 1) as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let xi = [-a + i as f64 * h, -a + j as f64 * h];
                let plus = [xi[0] + zeta[0].im / 2.0, xi[1] + zeta[1].im / 2.0];
                let minus = [xi[0] - zeta[0].im / 2.0, xi[1] - zeta[1].im / 2.0];
                let g = hermite_tensor(&pair.mu, &plus).unwrap() * hermite_tensor(&pair.nu, &minus).unwrap();
                acc += Complex64::from_polar(g * h * h, zeta[0].re * xi[0] + zeta[1].re * xi[1]);
            }
        }
        let want = acc / (2.0 * PI);
        assert!((got - want).norm() <= 1e-10 * want.norm(), "{got} vs {want}");
        let parts = special_hermite_auto(&MultiIndexPair::scalar(1, 2), &zeta[..1]).unwrap()
            * special_hermite_auto(&MultiIndexPair::scalar(2, 0), &zeta[1..]).unwrap();
        assert!((got - parts).norm() <= 1e-10 * got.norm());
    }

    #[test]
    fn diagonal_modes_are_real_at_origin() {
        for k in 0..=8 {
            let v = special_hermite_auto(&MultiIndexPair::scalar(k, k), &[c(0.0, 0.0)]).unwrap();
            assert!(v.im.abs() < 1e-10);
            // Φ_kk(0) = (2π)^{−1/2} ‖h_k‖²
            assert!((v.re - (2.0 * PI).powf(-0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn order_is_checked() {
        let p = MultiIndexPair::scalar(4, 2);
        let z = [c(6.0, 1.0)];
        assert_eq!(required_order(&p, &z), 8 + 20 + 18);
        match special_hermite(&p, &z, 30) {
            Err(Error::InsufficientQuadrature { required: 46, given: 30 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(special_hermite(&p, &z, 46).is_ok());
        assert!(special_hermite(&p, &[c(0.0, 0.0), c(0.0, 0.0)], 46).is_err());
    }

    #[test]
    fn far_points_vanish() {
        let p = MultiIndexPair::scalar(3, 1);
        assert_eq!(special_hermite(&p, &[c(1e6, 0.0)], 1).unwrap(), c(0.0, 0.0));
        assert_eq!(special_hermite_auto(&p, &[c(0.0, -40.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn phi_k_values() {
        assert!((phi_k(0, &[c(0.0, 0.0)], 1).unwrap() - 1.0).norm() < 1e-14);
        let z = c(1.3, -0.9);
        let want = (-z.norm_sqr() / 4.0).exp();
        assert!((phi_k(0, &[z], 1).unwrap() - want).norm() < 1e-14);
        // closed form L_k^{(n−1)}(|ζ|²/2) e^{−|ζ|²/4}, used only as a cross-check
        for k in 0..=8 {
            let got = phi_k(k, &[z], 1).unwrap();
            let want = laguerre(k, 0.0, z.norm_sqr() / 2.0) * (-z.norm_sqr() / 4.0).exp();
            assert!((got - want).norm() < 1e-12, "k = {k}");
        }
        let zeta = [c(0.4, 0.2), c(-0.5, 1.0)];
        let r2: f64 = zeta.iter().map(|z| z.norm_sqr()).sum();
        let want = laguerre(3, 1.0, r2 / 2.0) * (-r2 / 4.0).exp();
        assert!((phi_k(3, &zeta, 2).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn phi_k_is_the_diagonal_sum() {
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        let terms: Complex64 = MultiIndex::of_degree(2, 2)
            .into_iter()
            .map(|nu| {
                let p = MultiIndexPair::new(nu.clone(), nu).unwrap();
                special_hermite_auto(&p, &origin).unwrap()
            })
            .sum();
        let got = phi_k(2, &origin, 2).unwrap();
        assert!((got - 2.0 * PI * terms).norm() < 1e-13);
        assert!((got - 3.0).norm() < 1e-12);
    }
}
