use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use twistlab::basis::{SampledBasis, Truncation};
use twistlab::grid::{lp_norm, mixed_norm, GridSpec, TimeGrid};
use twistlab::schatten::{
    build_propagation_matrix, duality_check, sandwich_operator, Discretization, DualityExponents, SchattenRecord,
    WeightSampler,
};
use twistlab::semigroup::{boundary_kernel_envelope, evolve_kernel, evolve_spectral, propagate, ComplexTime};
use twistlab::singularity::{h_kernel_rate, log_samples, remainder_profile, write_profile_csv, ProbeConfig};
use twistlab::strichartz::{sample_orthonormal_system, sweep, write_rows_csv, SupportMode, SweepConfig};
use twistlab::twisted::{apply_twisted_laplacian, SpectralCoeffs};

use crate::config::{DualityOpts, SchattenOpts, Settings, SingularityOpts, SweepOpts};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

fn at_most(name: &str, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        value,
        limit,
        pass: value <= limit,
    }
}

/// What a subcommand produced: the JSON report, its CSV rendering and the
/// checks that decide the exit status.
pub struct Outcome {
    pub json: Value,
    pub csv: String,
    pub checks: Vec<Check>,
}

pub type CmdResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn grid_of(s: &Settings) -> Result<GridSpec, String> {
    match s.grid_l {
        Some(l) => GridSpec::new(s.n, l, s.grid_m),
        None => GridSpec::default_for(s.n, s.kmax, s.grid_m),
    }
    .map_err(err)
}

fn settings_json(s: &Settings) -> Value {
    json!({ "n": s.n, "kmax": s.kmax, "grid_m": s.grid_m, "grid_l": s.grid_l, "nt": s.nt, "seed": s.seed })
}

fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from("name,value,limit,pass\n");
    for c in checks {
        out.push_str(&format!("{},{:e},{:e},{}\n", c.name, c.value, c.limit, c.pass));
    }
    out
}

fn random_coeffs(tr: &Truncation, seed: u64) -> SpectralCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..tr.len())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    SpectralCoeffs::new(tr.clone(), v).expect("sizes agree")
}

pub fn verify_basis(s: &Settings) -> CmdResult {
    let tr = Truncation::new(s.n, s.kmax).map_err(err)?;
    let grid = grid_of(s)?;
    let basis = SampledBasis::new(&tr, &grid).map_err(err)?;
    let g = basis.gram();
    let gram_err = (g - DMatrix::<Complex64>::identity(tr.len(), tr.len()))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let mut residual: f64 = 0.0;
    if grid.points_per_axis() >= 16 {
        for (i, p) in tr.pairs().iter().enumerate() {
            if p.mu.degree() > 6 || p.nu.degree() > 6 {
                continue;
            }
            let f = basis.column(i);
            let mut lf = apply_twisted_laplacian(&f).map_err(err)?;
            lf.add_scaled(Complex64::from(-(p.eigenvalue() as f64)), &f).map_err(err)?;
            residual = residual.max(lp_norm(&lf, 2.0).map_err(err)? / lp_norm(&f, 2.0).map_err(err)?);
        }
    }
    let checks = vec![at_most("gram_error", gram_err, 1e-6), at_most("eigen_residual", residual, 1e-3)];
    Ok(Outcome {
        json: json!({ "command": "verify-basis", "settings": settings_json(s), "modes": tr.len(), "checks": checks }),
        csv: checks_csv(&checks),
        checks,
    })
}

pub fn verify_kernel(s: &Settings) -> CmdResult {
    let tr = Truncation::new(s.n, s.kmax).map_err(err)?;
    let grid = grid_of(s)?;
    let time = TimeGrid::lebesgue(s.nt).map_err(err)?;
    let stride = (grid.len() / 200).max(1);
    let points: Vec<Vec<Complex64>> = (0..grid.len()).step_by(stride).map(|i| grid.point(i)).collect();
    let envelope = boundary_kernel_envelope(&points, &time).map_err(err)?;

    let basis = SampledBasis::new(&tr, &grid).map_err(err)?;
    let u = random_coeffs(&tr, s.seed);
    let f = basis.synthesize(u.coeffs()).map_err(err)?;
    let eta = ComplexTime::real(0.5).map_err(err)?;
    let by_kernel = evolve_kernel(&f, eta).map_err(err)?;
    let by_spectrum = basis.synthesize(evolve_spectral(&u, eta).coeffs()).map_err(err)?;
    let mut d = by_kernel;
    d.add_scaled(Complex64::from(-1.0), &by_spectrum).map_err(err)?;
    let rel = lp_norm(&d, 2.0).map_err(err)? / lp_norm(&by_spectrum, 2.0).map_err(err)?;

    let mut period: f64 = 0.0;
    for j in 0..time.len() {
        let t = time.node(j);
        let a = propagate(&u, t).map_err(err)?;
        let b = propagate(&u, t + TAU).map_err(err)?;
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            period = period.max((x - y).norm());
        }
    }
    let checks = vec![
        at_most("boundary_envelope", envelope, 2.0),
        at_most("kernel_vs_spectral", rel, 1e-6),
        at_most("periodicity", period, 1e-12),
    ];
    Ok(Outcome {
        json: json!({ "command": "verify-kernel", "settings": settings_json(s), "checks": checks }),
        csv: checks_csv(&checks),
        checks,
    })
}

pub fn schatten_bound(s: &Settings, o: &SchattenOpts) -> CmdResult {
    let samples = o.samples.unwrap_or(50);
    if samples == 0 {
        return Err("samples must be positive".into());
    }
    let exps = DualityExponents::diagonal(s.n).map_err(err)?;
    let r = o.r.unwrap_or(exps.alpha);
    let tr = Truncation::new(s.n, s.kmax).map_err(err)?;
    let grid = grid_of(s)?;
    let time = TimeGrid::normalized(s.nt).map_err(err)?;
    let a = build_propagation_matrix(&tr, &time, &grid).map_err(err)?;
    let sampler = WeightSampler::new(&grid).map_err(err)?;
    let disc = Discretization::of(&a);
    let mut records = Vec::with_capacity(samples);
    let mut ratios = Vec::with_capacity(samples);
    let mut csv = String::from("seed,r,norm,weight_norm_sq,ratio\n");
    for i in 0..samples as u64 {
        let seed = s.seed.wrapping_add(i);
        let w = sampler.sample(seed, &time);
        let rep = sandwich_operator(&w, &a).map_err(err)?.schatten(r).map_err(err)?;
        let wn = mixed_norm(&w, exps.w_time, exps.w_space).map_err(err)?.powi(2);
        let ratio = rep.norm / wn;
        csv.push_str(&format!("{seed},{r},{:e},{wn:e},{ratio:e}\n", rep.norm));
        ratios.push(ratio);
        records.push(SchattenRecord {
            operator: "W T_S W̄".into(),
            r,
            singular_values: rep.singular_values,
            norm: rep.norm,
            discretization: disc.clone(),
            seed: Some(seed),
        });
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let max = sorted[sorted.len() - 1];
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let checks = vec![
        Check {
            name: "max_ratio_finite".into(),
            value: max,
            limit: f64::INFINITY,
            pass: max.is_finite(),
        },
        at_most("max_over_median", max / median, 5.0),
    ];
    Ok(Outcome {
        json: json!({
            "command": "schatten-bound",
            "settings": settings_json(s),
            "max_ratio": max,
            "median_ratio": median,
            "records": records,
            "checks": checks,
        }),
        csv,
        checks,
    })
}

pub fn singularity(s: &Settings, o: &SingularityOpts) -> CmdResult {
    let z = Complex64::new(o.z_re.unwrap_or(-0.5), o.z_im.unwrap_or(0.0));
    let tau = o.tau.unwrap_or(1e-4);
    let (t_min, t_max) = (o.t_min.unwrap_or(0.01), o.t_max.unwrap_or(std::f64::consts::PI));
    if !(t_min > 0.0 && t_max >= t_min) {
        return Err("need 0 < t-min ≤ t-max".into());
    }
    let ts = log_samples(t_min, t_max, o.samples.unwrap_or(48).max(1));
    let u = vec![Complex64::new(0.3, -0.2); s.n];
    let w = vec![Complex64::new(-0.1, 0.4); s.n];
    let fit = h_kernel_rate(z, &u, &w, &log_samples(0.01, 0.3, 16)).map_err(err)?;
    let want = -(z.re + 1.0 + s.n as f64);
    let mut checks = vec![at_most("kernel_slope_error", (fit.slope - want).abs(), 0.1)];
    let mut json = json!({
        "command": "singularity",
        "settings": settings_json(s),
        "z": [z.re, z.im],
        "kernel_slope": fit.slope,
        "expected_slope": want,
    });
    let mut csv = String::new();
    if z.re > -1.0 && z.re <= 0.0 {
        let cfg = ProbeConfig::new(z, tau, ts).map_err(err)?;
        let prof = remainder_profile(&cfg);
        checks.push(Check {
            name: "remainder_finite".into(),
            value: prof.sup_remainder,
            limit: f64::INFINITY,
            pass: prof.sup_remainder.is_finite(),
        });
        let mut buf = Vec::new();
        write_profile_csv(&prof, &mut buf).map_err(err)?;
        csv = String::from_utf8(buf).map_err(err)?;
        json["profile"] = serde_json::to_value(&prof).map_err(err)?;
    } else if csv.is_empty() {
        csv = checks_csv(&checks);
    }
    json["checks"] = serde_json::to_value(&checks).map_err(err)?;
    Ok(Outcome { json, csv, checks })
}

pub fn strichartz_sweep(s: &Settings, o: &SweepOpts) -> CmdResult {
    let base = SweepConfig::default();
    let support = match o.support.as_deref() {
        None | Some("saturating") => SupportMode::Saturating,
        Some("fixed") => SupportMode::Fixed,
        Some(other) => return Err(format!("unknown support mode `{other}` (saturating or fixed)")),
    };
    let cfg = SweepConfig {
        n: s.n,
        q_values: o.q.clone().unwrap_or(base.q_values),
        n_values: o.sizes.clone().unwrap_or(base.n_values),
        trials: o.trials.unwrap_or(base.trials),
        seed: s.seed,
        k_max: s.kmax,
        m: s.grid_m,
        half_width: s.grid_l,
        nt: s.nt,
        support,
    };
    let rep = sweep(&cfg).map_err(err)?;
    let finite = rep.rows.iter().all(|r| r.ratio.is_finite());
    let mut checks = vec![Check {
        name: "ratios_finite".into(),
        value: rep.summary.max_ratio,
        limit: f64::INFINITY,
        pass: finite,
    }];
    if let Some(g) = rep.summary.growth_exponent {
        checks.push(Check {
            name: "growth_below_triangle_rate".into(),
            value: g,
            limit: 1.0,
            pass: g < 1.0,
        });
    }
    let mut buf = Vec::new();
    write_rows_csv(&rep.rows, &mut buf).map_err(err)?;
    Ok(Outcome {
        json: json!({
            "command": "strichartz-sweep",
            "settings": settings_json(s),
            "summary": rep.summary,
            "rows": rep.rows,
            "checks": checks,
        }),
        csv: String::from_utf8(buf).map_err(err)?,
        checks,
    })
}

pub fn duality(s: &Settings, o: &DualityOpts) -> CmdResult {
    let samples = o.samples.unwrap_or(10);
    let rounds = o.rounds.unwrap_or(3);
    let tr = Truncation::new(s.n, s.kmax).map_err(err)?;
    let grid = grid_of(s)?;
    let time = TimeGrid::normalized(s.nt).map_err(err)?;
    let a = build_propagation_matrix(&tr, &time, &grid).map_err(err)?;
    let sampler = WeightSampler::new(&grid).map_err(err)?;
    let weights: Vec<_> = (0..samples as u64).map(|i| sampler.sample(s.seed.wrapping_add(i), &time)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x5eed);
    let systems = (0..samples)
        .map(|i| {
            let nf = 1 + (3 * i) % tr.len();
            let sys = sample_orthonormal_system(&tr, nf, s.seed.wrapping_add(1000 + i as u64))?;
            let nj = (0..nf).map(|_| Complex64::from(rng.random::<f64>() + 0.05)).collect();
            Ok((sys.coeffs().clone(), nj))
        })
        .collect::<twistlab::Result<Vec<_>>>()
        .map_err(err)?;
    let exps = DualityExponents::diagonal(s.n).map_err(err)?;
    let rep = duality_check(&a, &systems, &weights, &exps, rounds).map_err(err)?;
    let factor = rep.relative_gap + 1.0;
    let checks = vec![
        Check {
            name: "constants_finite".into(),
            value: rep.c_schatten.max(rep.c_density),
            limit: f64::INFINITY,
            pass: rep.c_schatten.is_finite() && rep.c_density.is_finite(),
        },
        at_most("constant_ratio", factor, 3.0),
    ];
    let mut csv = String::from("side,index,ratio\n");
    for (i, r) in rep.schatten_ratios.iter().enumerate() {
        csv.push_str(&format!("schatten,{i},{r:e}\n"));
    }
    for (i, r) in rep.density_ratios.iter().enumerate() {
        csv.push_str(&format!("density,{i},{r:e}\n"));
    }
    Ok(Outcome {
        json: json!({ "command": "duality-check", "settings": settings_json(s), "report": rep, "checks": checks }),
        csv,
        checks,
    })
}
