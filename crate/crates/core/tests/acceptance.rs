//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are pinned below.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use tqg_core::config::parse_config_str;
use tqg_core::experiment::run_experiment;
use tqg_core::field::{random_gevrey_field, random_gevrey_field_banded};
use tqg_core::integrator::{cr_residual, integrate_path, integrate_ray, RaySpec};
use tqg_core::lemmas::{
    lattice_sum, leading_term_ratio, log_slope, split_report, verify_algebraic, verify_veltovor,
    veltovor_single_mode, DEFAULT_RADII,
};
use tqg_core::norms::estimate_radius;
use tqg_core::tracker::{calibrate_c, gevrey_energy, region_predicate, RunRecord};
use tqg_core::{
    advect, sobolev_norm, velocity, AdvectionMethod, SpectralField, SpectralGrid, TqgDataSet,
    VectorSpectralField,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    verdict(
        v.pass && took <= budget,
        format!("{} time={:.2}s (budget {}s)", v.detail, took.as_secs_f64(), budget.as_secs()),
    )
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Real random data with G(0) = target.
fn scaled_data(n: usize, seed: u64, phi0: f64, target: f64) -> TqgDataSet {
    let g = SpectralGrid::new(n).unwrap();
    let build = |amp: f64| {
        let f = |s: u64| random_gevrey_field_banded(&g, seed * 16 + s, 0.6, 1.0, amp, true, Some(n as i64 / 4));
        TqgDataSet::from_bathymetry(&f(1), f(2), f(3), f(4), phi0).unwrap()
    };
    let unit = build(1.0);
    let g0 = gevrey_energy(&unit.initial_state(), phi0).unwrap();
    build((target / g0).sqrt())
}

fn criterion_1() -> Verdict {
    timed(Duration::from_secs(10), || {
        let g = SpectralGrid::new(16).unwrap();
        let mut worst: f64 = 0.0;
        for t in 0..50u64 {
            let real = t % 2 == 0;
            let psi = random_gevrey_field_banded(&g, 1000 + t, 0.1, 1.0, 1.0, real, Some(5));
            let f = random_gevrey_field_banded(&g, 2000 + t, 0.1, 1.0, 1.0, real, Some(5));
            let u = velocity(&psi);
            let a = advect(&u, &f, AdvectionMethod::Pseudospectral).unwrap();
            let b = advect(&u, &f, AdvectionMethod::Convolution).unwrap();
            worst = worst.max(a.minus(&b).unwrap().max_abs());
        }
        verdict(worst < 1e-12, format!("max_coeff_err={worst:.3e} (< 1e-12)"))
    })
}

fn criterion_2() -> Verdict {
    timed(Duration::from_secs(30), || {
        let g = SpectralGrid::new(32).unwrap();
        let z = SpectralField::zeros(&g);
        let q = SpectralField::from_modes(&g, &[((2, -3), Complex64::new(0.7, -0.2))], true).unwrap();
        let data = TqgDataSet::new(VectorSpectralField::zeros(&g), z.clone(), z, q, 0.3).unwrap();
        let x0 = data.initial_state();
        let mut worst: f64 = 0.0;
        let mut violations = 0;
        let mut completed = true;
        for theta in [0.0, 0.4, 1.0] {
            let mut rec = RunRecord::new(format!("theta{theta}"), theta, &data).unwrap();
            let ray = RaySpec::new(theta, 1.0, 1e-3).unwrap();
            assert_eq!(ray.steps(), 1000);
            let traj = integrate_ray(&data, &ray, 100, |s, x| rec.observe(s, x)).unwrap();
            completed &= traj.completed();
            for (_, x) in traj.snapshots.iter().chain(std::iter::once(&traj.last)) {
                worst = worst.max(x.max_coeff_diff(&x0));
            }
            violations += rec.monitor(1.0).unwrap().violations.len();
        }
        verdict(
            completed && worst < 1e-12 && violations == 0,
            format!("max_coeff_change={worst:.3e} (< 1e-12) violations={violations}"),
        )
    })
}

fn criterion_3() -> Verdict {
    timed(Duration::from_secs(300), || {
        let g = SpectralGrid::new(64).unwrap();
        let f = |s: u64| random_gevrey_field(&g, 300 + s, 0.3, 1.0, 0.05, true);
        let data = TqgDataSet::from_bathymetry(&f(1), f(2), f(3), f(4), 0.3).unwrap();
        let l2_0 = sobolev_norm(&data.b0, 0.0);
        let ray = RaySpec::new(0.0, 1.0, 5e-4).unwrap();
        let mut drift: f64 = 0.0;
        let mut defect: f64 = 0.0;
        let traj = integrate_ray(&data, &ray, 100, |_, x| {
            drift = drift.max(rel_diff(sobolev_norm(&x.b, 0.0), l2_0));
            defect = defect.max(x.b.reality_defect()).max(x.q.reality_defect());
            Ok(())
        })
        .unwrap();
        verdict(
            traj.completed() && drift < 1e-6 && defect < 1e-10,
            format!("l2_drift={drift:.3e} (< 1e-6) reality_defect={defect:.3e} (< 1e-10)"),
        )
    })
}

fn smooth_complex(n: usize, seed: u64, amp: f64) -> TqgDataSet {
    let g = SpectralGrid::new(n).unwrap();
    let f = |s: u64| random_gevrey_field_banded(&g, seed * 10 + s, 0.5, 1.0, amp, false, Some(3));
    TqgDataSet::from_bathymetry(&f(1), f(2), f(3), f(4), 0.2).unwrap()
}

fn criterion_4() -> Verdict {
    let data = smooth_complex(32, 5, 1.0);
    let end = Complex64::from_polar(0.5, 0.3);
    let x1 = integrate_path(&data, &[end], 0.025).unwrap();
    let x2 = integrate_path(&data, &[end], 0.0125).unwrap();
    let x3 = integrate_path(&data, &[end], 0.00625).unwrap();
    let ratio = x1.max_coeff_diff(&x2) / x2.max_coeff_diff(&x3);
    verdict((12.0..=20.0).contains(&ratio), format!("richardson_ratio={ratio:.3} (in [12, 20])"))
}

fn criterion_5() -> Verdict {
    let data = scaled_data(32, 5, 0.3, 5e-3);
    let g0 = gevrey_energy(&data.initial_state(), data.phi0).unwrap();
    let (s_c, theta, ds) = (0.2, 0.3, 0.0125);
    let r1 = cr_residual(&data, s_c, theta, 0.1, ds).unwrap();
    let r2 = cr_residual(&data, s_c, theta, 0.05, ds).unwrap();
    let ratio = r1 / r2;
    let end = Complex64::from_polar(0.4, 0.5);
    let direct = integrate_path(&data, &[end], 1e-2).unwrap();
    let corner = integrate_path(&data, &[Complex64::new(end.re, 0.0), end], 1e-2).unwrap();
    let two_path = direct.max_coeff_diff(&corner) / direct.max_abs();
    verdict(
        g0 <= 1e-2 && (3.2..=4.8).contains(&ratio) && two_path < 1e-6,
        format!("G(0)={g0:.2e} cr_ratio={ratio:.3} (in [3.2, 4.8]) two_path_rel={two_path:.3e} (< 1e-6)"),
    )
}

fn criterion_6() -> Verdict {
    let g = SpectralGrid::new(32).unwrap();
    let mut worst: f64 = 0.0;
    let mut single: f64 = 0.0;
    for r in [0.0, 1.0, 2.0, 3.0] {
        let report = verify_veltovor(&g, r, 1000, 6).unwrap();
        assert_eq!(report.trials, 1000);
        worst = worst.max(report.max_ratio);
        for k in [(1, 0), (0, -1)] {
            single = single.max((veltovor_single_mode(&g, k, r).unwrap() - 0.25).abs());
        }
        for k in [(5, 0), (3, 4), (-4, 3)] {
            single = single.max((veltovor_single_mode(&g, k, r).unwrap() - 625.0 / 676.0).abs());
        }
    }
    verdict(
        worst < 1.0 && single <= 1e-14,
        format!("max_ratio={worst:.6} (< 1) single_mode_err={single:.1e} (<= 1e-14)"),
    )
}

/// ζ(s, a) by Euler–Maclaurin with 20 direct terms and 6 Bernoulli corrections.
fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const B2K: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let m = 20.0;
    let mut sum: f64 = (0..20).map(|n| (n as f64 + a).powf(-s)).sum();
    let x = m + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    let mut rising = s; // s(s+1)…(s+2k−2)
    let mut fact = 2.0; // (2k)!
    for (k, b) in B2K.iter().enumerate() {
        let k = k as f64 + 1.0;
        sum += b / fact * rising * x.powf(-s - 2.0 * k + 1.0);
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    sum
}

/// Σ over nonzero j ∈ ℤ² of |j|^{−2s} = 4ζ(s)β(s).
fn epstein(s: f64) -> f64 {
    let zeta = hurwitz_zeta(s, 1.0);
    let beta = 4f64.powf(-s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75));
    4.0 * zeta * beta
}

fn criterion_7() -> Verdict {
    let oracle = epstein(1.5);
    let table = lattice_sum(3.0, &DEFAULT_RADII).unwrap();
    let limit = table.limit.unwrap_or(f64::NAN);
    let exponent = table.tail_exponent.unwrap_or(f64::NAN);
    let limit_err = rel_diff(limit, oracle);
    let exp_err = rel_diff(exponent, -1.0);
    let slope = log_slope(&lattice_sum(2.5, &DEFAULT_RADII).unwrap()).unwrap_or(f64::NAN);
    let slope_err = rel_diff(slope, 2.0 * PI);
    let ratios = leading_term_ratio(&[2.6, 2.55], &DEFAULT_RADII).unwrap();
    let (r26, r255) = (ratios[0].1, ratios[1].1);
    verdict(
        exp_err < 0.2 && limit_err < 1e-3 && slope_err < 0.05 && (r26 - 1.0).abs() < 0.15 && (r255 - 1.0).abs() < 0.10,
        format!(
            "tail_exp={exponent:.5} limit={limit:.6} oracle={oracle:.6} (rel {limit_err:.1e}) \
             slope/2pi={:.5} leading_ratio(2.6)={r26:.4} leading_ratio(2.55)={r255:.4}",
            slope / (2.0 * PI)
        ),
    )
}

fn scan(step: f64) -> Vec<f64> {
    tqg_core::experiment::scan_grid(10.0, step)
}

fn criterion_8() -> Verdict {
    let phis = [0.0, 0.1, 0.5, 1.0];
    let (coarse, fine) = (scan(0.1), scan(0.05));
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [1.0, 2.0, 3.0, 3.5] {
        let a = verify_algebraic(r, &phis, &coarse, &coarse).unwrap();
        let b = verify_algebraic(r, &phis, &fine, &fine).unwrap();
        let diag = a.constants["diagonal_lhs"].max(b.constants["diagonal_lhs"]);
        let change = rel_diff(a.fitted_constant, b.fitted_constant);
        ok &= a.fitted_constant.is_finite() && b.fitted_constant.is_finite() && change < 0.1 && diag == 0.0;
        parts.push(format!("r={r}: C={:.4}/{:.4} ({:.1}%)", a.fitted_constant, b.fitted_constant, 100.0 * change));
    }
    verdict(ok, format!("{} diagonal_lhs=0", parts.join(" ")))
}

fn criterion_9() -> Verdict {
    let g = SpectralGrid::new(16).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for phi in [0.0, 0.2] {
        let (_, records) = split_report(&g, 3.0, phi, 50, 9).unwrap();
        let defect = records.iter().map(|r| r.identity_defect).fold(0.0, f64::max);
        ok &= records.len() == 50 && defect < 1e-11;

        let mut constants: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for batch in 0..5u64 {
            let (report, _) = split_report(&g, 3.0, phi, 200, 9000 + batch).unwrap();
            constants.entry("lemma").or_default().push(report.fitted_constant);
            constants.entry("i2a").or_default().push(report.constants["i2a"]);
            if phi > 0.0 {
                constants.entry("i2b").or_default().push(report.constants["i2b"]);
            }
        }
        let spreads: Vec<String> = constants
            .iter()
            .map(|(k, v)| {
                let s = spread(v);
                ok &= s < 2.0;
                format!("{k}={s:.3}")
            })
            .collect();
        parts.push(format!("phi={phi}: identity={defect:.1e} spread[{}]", spreads.join(" ")));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_10() -> Verdict {
    let mut runs = Vec::new();
    let mut g0_max: f64 = 0.0;
    for seed in 0..5u64 {
        let data = scaled_data(32, 100 + seed, 0.3, 8e-3);
        g0_max = g0_max.max(gevrey_energy(&data.initial_state(), data.phi0).unwrap());
        for theta in [0.0, 0.5] {
            let mut rec = RunRecord::new(format!("s{seed}t{theta}"), theta, &data).unwrap();
            let traj =
                integrate_ray(&data, &RaySpec::new(theta, 0.5, 1e-3).unwrap(), 50, |s, x| rec.observe(s, x)).unwrap();
            assert!(traj.completed());
            runs.push(rec);
        }
    }
    let cal = match calibrate_c(&runs) {
        Ok(cal) => cal,
        Err(e) => return verdict(false, format!("calibration failed: {e}")),
    };
    let c = cal.c;
    let mut region_checked = 0usize;
    let mut breaches = 0usize;
    let mut monitor_violations = 0usize;
    for rec in &runs {
        monitor_violations += rec.monitor(c).unwrap().violations.len();
        let trace = rec.trace(c, false).unwrap();
        let d = trace.d_data;
        let g0 = trace.samples[0].g;
        let tol = 1e-9 * (1.0 + d);
        for x in &trace.samples {
            if region_predicate(x.s, trace.theta, c, d) {
                region_checked += 1;
                breaches += usize::from(x.g > d + tol);
            }
            breaches += usize::from(x.g > g0 + c * x.s * trace.theta.cos() * d.powf(1.5) + tol);
        }
    }
    verdict(
        c.is_finite() && g0_max <= 1e-2 && region_checked > 0 && breaches == 0 && monitor_violations == 0,
        format!(
            "runs={} G(0)max={g0_max:.2e} c=2^{} region_samples={region_checked} breaches={breaches} violations={monitor_violations}",
            runs.len(),
            cal.exponent
        ),
    )
}

fn criterion_11() -> Verdict {
    let g = SpectralGrid::new(64).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for phi_star in [0.3, 0.7] {
        let f = random_gevrey_field(&g, 42, phi_star, 2.0, 1.0, true);
        let fit = estimate_radius(&f, 1.0, 31.0).unwrap();
        let err = rel_diff(fit.phi_est, phi_star);
        ok &= err < 0.02;
        parts.push(format!("phi*={phi_star}: est={:.5} ({:.2}%)", fit.phi_est, 100.0 * err));
    }
    verdict(ok, parts.join(" "))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_12() -> Verdict {
    let configs = [
        (
            "simulate",
            r#"{"mode": "simulate", "N": 16, "ray": {"theta": 0.5, "s_max": 0.1, "ds": 0.001},
                "data": {"kind": "generator", "amplitude": 1e-3, "forcing": 1e-4, "bathymetry": 1e-3},
                "phi0": 0.3, "seed": 12, "stride": 5, "gamma": true}"#,
        ),
        (
            "sweep",
            r#"{"mode": "sweep", "N": 16, "ray": {"theta": 0, "s_max": 0.05, "ds": 0.001},
                "data": {"kind": "generator", "amplitude": 1e-3, "bathymetry": 1e-3},
                "phi0": 0.3, "seed": 12, "thetas": [-0.5, 0.0, 0.5, 1.0]}"#,
        ),
        ("convest", r#"{"mode": "verify", "lemma": "convest", "N": 16, "trials": 60, "phi": 0.2, "seed": 12}"#),
        ("split", r#"{"mode": "verify", "lemma": "split", "N": 16, "trials": 30, "phi": 0.2, "seed": 12}"#),
        ("lattice", r#"{"mode": "verify", "lemma": "lattice", "r": 3, "radii": [50, 100, 200]}"#),
    ];
    let root = tempfile::tempdir().unwrap();
    let mut files = 0usize;
    let mut mismatched = Vec::new();
    for (name, text) in configs {
        let mut outputs = Vec::new();
        for (run, threads) in [(0, 1), (1, 4), (2, 4)] {
            let mut config = parse_config_str(text).unwrap();
            let out = root.path().join(format!("{name}{run}"));
            config.out = Some(out.clone());
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_experiment(&config, None)).unwrap();
            outputs.push(read_dir_bytes(&out));
        }
        files += outputs[0].len();
        if outputs.iter().any(|o| *o != outputs[0]) {
            mismatched.push(name);
        }
    }
    verdict(
        mismatched.is_empty() && files > 0,
        format!("files_compared={files} x3 runs (1 and 4 threads) mismatched={mismatched:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("oracle equivalence", criterion_1),
        ("steady-state exactness", criterion_2),
        ("real-line conservation", criterion_3),
        ("RK4 order", criterion_4),
        ("holomorphy", criterion_5),
        ("velocity-vorticity bound", criterion_6),
        ("lattice sums", criterion_7),
        ("algebraic inequality scan", criterion_8),
        ("convolution estimate and split", criterion_9),
        ("analyticity monitors", criterion_10),
        ("radius estimator", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        passed += usize::from(v.pass);
        println!(
            "criterion {:>2} {:<32} {}  {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
