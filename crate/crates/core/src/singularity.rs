//! The Abel-regularized series Σ k^z e^{−(τ+it)k}, its singular part
//! Γ(z+1)(τ+it)^{−z−1}, and the blow-up rate of the kernel
//! t^{−z−1} Σ e^{−it(2k+n)} φ_k.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::gamma::gamma;
use crate::semigroup::{mehler_kernel, reduce_time, ComplexTime};

/// Terms beyond the cutoff are below this relative size.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Damping used for the kernel series, small enough to be invisible at t ≥ 0.01.
pub const KERNEL_TAU: f64 = 1e-9;

/// Slope fits use only samples with t in this window.
pub const FIT_WINDOW: (f64, f64) = (0.01, 0.3);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    z: Complex64,
    tau: f64,
    k_cut: u64,
    t_samples: Vec<f64>,
}

impl ProbeConfig {
    /// Cutoff chosen so that e^{−τ k_cut} < 1e−10.
    pub fn new(z: Complex64, tau: f64, t_samples: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(out_of_range("tau", "Abel parameter must be positive"));
        }
        let k_cut = ((-TAIL_TOLERANCE.ln()) / tau).ceil() as u64 + 1;
        Self::with_cutoff(z, tau, k_cut, t_samples)
    }

    pub fn with_cutoff(z: Complex64, tau: f64, k_cut: u64, t_samples: Vec<f64>) -> Result<Self> {
        if !z.is_finite() || !(z.re > -1.0 && z.re <= 0.0) {
            return Err(out_of_range("z", format!("need −1 < Re z ≤ 0, got {z}")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(out_of_range("tau", "Abel parameter must be positive"));
        }
        if (-tau * k_cut as f64).exp() >= TAIL_TOLERANCE {
            return Err(out_of_range("k_cut", format!("e^(−τ·{k_cut}) is not below {TAIL_TOLERANCE:e}")));
        }
        for &t in &t_samples {
            if !t.is_finite() || t == 0.0 || t.abs() > std::f64::consts::PI {
                return Err(out_of_range("t_samples", format!("sample {t} is not in [−π, π]∖{{0}}")));
            }
        }
        Ok(ProbeConfig {
            z,
            tau,
            k_cut,
            t_samples,
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k_cut(&self) -> u64 {
        self.k_cut
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.z, tau, self.t_samples.clone())
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Σ_{k=1}^{k_cut} k^z e^{−(τ+it)k}, summed in ascending k (0₊^z = 0).
pub fn abel_sum(cfg: &ProbeConfig, t: f64) -> Complex64 {
    let (mut re, mut im) = (Compensated::default(), Compensated::default());
    for k in 1..=cfg.k_cut {
        let kf = k as f64;
        let lk = kf.ln();
        let modulus = (cfg.z.re * lk - cfg.tau * kf).exp();
        let term = Complex64::from_polar(modulus, cfg.z.im * lk - reduce_time(t * kf));
        re.add(term.re);
        im.add(term.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Γ(z+1)(τ+it)^{−z−1} on the principal branch.
pub fn singular_term(z: Complex64, t: f64, tau: f64) -> Result<Complex64> {
    if tau == 0.0 && t == 0.0 {
        return Err(Error::BranchAmbiguous);
    }
    if !(tau >= 0.0) || !t.is_finite() || !tau.is_finite() || !z.is_finite() {
        return Err(out_of_range("tau", "need τ ≥ 0 and finite inputs"));
    }
    let s = Complex64::new(tau, t);
    Ok(gamma(z + 1.0) * (-(z + 1.0) * s.ln()).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub t: f64,
    pub abel: Complex64,
    pub singular: Complex64,
    pub remainder: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderProfile {
    pub z: Complex64,
    pub tau: f64,
    pub rows: Vec<ProbeRow>,
    pub sup_remainder: f64,
    /// max second divided difference of |b̂| between consecutive same-sign samples
    pub max_second_difference: f64,
}

/// b̂(t) = abel_sum − singular_term on the sample set, in sorted t order.
pub fn remainder_profile(cfg: &ProbeConfig) -> RemainderProfile {
    let mut ts = cfg.t_samples.clone();
    ts.sort_by(f64::total_cmp);
    let rows: Vec<ProbeRow> = ts
        .par_iter()
        .map(|&t| {
            let abel = abel_sum(cfg, t);
            let singular = singular_term(cfg.z, t, cfg.tau).expect("τ > 0");
            ProbeRow {
                t,
                abel,
                singular,
                remainder: abel - singular,
            }
        })
        .collect();
    let sup_remainder = rows.iter().map(|r| r.remainder.norm()).fold(0.0, f64::max);
    let mut max_second_difference: f64 = 0.0;
    for w in rows.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        if a.t.signum() != c.t.signum() {
            continue;
        }
        let d1 = (b.remainder - a.remainder) / (b.t - a.t);
        let d2 = (c.remainder - b.remainder) / (c.t - b.t);
        max_second_difference = max_second_difference.max((2.0 * (d2 - d1) / (c.t - a.t)).norm());
    }
    RemainderProfile {
        z: cfg.z,
        tau: cfg.tau,
        rows,
        sup_remainder,
        max_second_difference,
    }
}

/// Writes the profile with columns
/// z_re, z_im, t, tau, abel_re, abel_im, singular_re, singular_im, remainder_abs.
pub fn write_profile_csv(profile: &RemainderProfile, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "z_re",
        "z_im",
        "t",
        "tau",
        "abel_re",
        "abel_im",
        "singular_re",
        "singular_im",
        "remainder_abs",
    ])?;
    for r in &profile.rows {
        out.serialize((
            profile.z.re,
            profile.z.im,
            r.t,
            profile.tau,
            r.abel.re,
            r.abel.im,
            r.singular.re,
            r.singular.im,
            r.remainder.norm(),
        ))?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares line through (ln x, ln y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch("x and y lengths differ".into()));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} usable points", pts.len())));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// |t^{−z−1} Σ_k e^{−η(2k+n)} φ_k(u − w)| at η = τ + it, the series summed
/// in closed form as (2π)ⁿ K_η.
pub fn h_kernel(z: Complex64, u: &[Complex64], w: &[Complex64], t: f64) -> Result<f64> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: w.len(),
        });
    }
    let zeta: Vec<Complex64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    let k = mehler_kernel(ComplexTime::new(KERNEL_TAU, t)?, &zeta)?;
    let series = k * TAU.powi(u.len() as i32);
    Ok(((-(z + 1.0)) * Complex64::from(t).ln()).exp().norm() * series.norm())
}

/// Fitted slope of ln|H| against ln t over the samples inside [`FIT_WINDOW`].
pub fn h_kernel_rate(z: Complex64, u: &[Complex64], w: &[Complex64], t_samples: &[f64]) -> Result<LogLogFit> {
    for &t in t_samples {
        if !(t > 0.0 && t <= 0.5) {
            return Err(out_of_range("t_samples", format!("sample {t} is not in (0, 0.5]")));
        }
    }
    let ts: Vec<f64> = t_samples
        .iter()
        .copied()
        .filter(|t| (FIT_WINDOW.0..=FIT_WINDOW.1).contains(t))
        .collect();
    if ts.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} samples inside the fit window", ts.len())));
    }
    let hs = ts
        .iter()
        .map(|&t| h_kernel(z, u, w, t))
        .collect::<Result<Vec<f64>>>()?;
    loglog_fit(&ts, &hs)
}

/// Log-spaced samples on [a, b].
pub fn log_samples(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
