//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line with its
//! measured value, threshold and runtime; the process exits nonzero if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use coverage_impact::bsts::{
    build_model, ffbs, gibbs_sample, kalman_filter, kalman_smoother, observed, ComponentSpec,
    McmcSettings, Priors, StateSpaceModel, Variances,
};
use coverage_impact::changepoint::{detect_in_values, CptConfig, Statistic, Threshold};
use coverage_impact::imagery::{apply_hsv_mask, coverage_fraction, rgb_to_hsv, segment, HsvRange};
use coverage_impact::impact::{run_impact, ImpactConfig};
use coverage_impact::series::CoverageSeries;
use coverage_impact::synth::{gen_image, gen_image_series, gen_series, SynthImageSpec, SynthSeriesSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::{dense_loglik, dense_smoothed_means, random_model, rel_diff, simulate, simulate_trend};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

// 1. Segmentation exactness.
fn segmentation_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut exact = 0;
    for seed in 0..50 {
        let spec = SynthImageSpec::new(
            rng.random_range(1..=48),
            rng.random_range(1..=48),
            rng.random_range(0.0..=1.0),
            seed,
        );
        let (img, truth) = gen_image(&spec).unwrap();
        let got = coverage_fraction(&apply_hsv_mask(&rgb_to_hsv(&img), &spec.forest_range));
        if got == truth {
            exact += 1;
        }
    }
    outcome(exact == 50, format!("{exact}/50 fixtures exact (need 50)"))
}

/// Exhaustive two-segment MLE from pointwise Normal log densities.
fn brute_force(y: &[f64], stat: Statistic, min_seg: usize) -> (f64, usize) {
    let logpdf = |v: f64, mu: f64, var: f64| -0.5 * (2.0 * PI * var).ln() - (v - mu).powi(2) / (2.0 * var);
    let n = y.len() as f64;
    let gmean = y.iter().sum::<f64>() / n;
    let gvar = y.iter().map(|v| (v - gmean).powi(2)).sum::<f64>() / n;
    let fit = |s: &[f64]| -> f64 {
        let m = s.len() as f64;
        let smean = s.iter().sum::<f64>() / m;
        let (mu, var) = match stat {
            Statistic::Mean => (smean, gvar),
            Statistic::Variance => (gmean, s.iter().map(|v| (v - gmean).powi(2)).sum::<f64>() / m),
            Statistic::MeanAndVariance => (smean, s.iter().map(|v| (v - smean).powi(2)).sum::<f64>() / m),
        };
        s.iter().map(|&v| logpdf(v, mu, var)).sum()
    };
    let null: f64 = y.iter().map(|&v| logpdf(v, gmean, gvar)).sum();
    let mut best = (f64::NEG_INFINITY, 0);
    for tau in min_seg..=y.len() - min_seg {
        let ml = fit(&y[..tau]) + fit(&y[tau..]);
        if ml > best.0 {
            best = (ml, tau);
        }
    }
    (2.0 * (best.0 - null), best.1)
}

// 2. Changepoint oracle equivalence.
fn changepoint_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let stats = [Statistic::Mean, Statistic::Variance, Statistic::MeanAndVariance];
    let mut worst = 0.0f64;
    let mut tau_mismatch = 0;
    for i in 0..100 {
        let n = rng.random_range(4..=20);
        let shift = rng.random_range(-2.0..2.0);
        let cut = rng.random_range(1..n);
        let y: Vec<f64> = (0..n)
            .map(|t| rng.random_range(-1.0..1.0) + if t >= cut { shift } else { 0.0 })
            .collect();
        let stat = stats[i % 3];
        let cfg = CptConfig::new(stat);
        let r = detect_in_values(&y, &cfg).unwrap();
        let (lambda, tau) = brute_force(&y, stat, cfg.effective_min_seg_len());
        worst = worst.max((r.lambda - lambda).abs());
        let expected_tau = (lambda > r.threshold).then_some(tau);
        if r.tau_hat != expected_tau || r.best_tau(n) != tau {
            tau_mismatch += 1;
        }
    }
    outcome(
        worst <= 1e-10 && tau_mismatch == 0,
        format!("max |lambda diff| = {worst:.2e} (tol 1e-10), tau mismatches = {tau_mismatch}"),
    )
}

// 3. Changepoint power and null calibration.
fn changepoint_power() -> Outcome {
    let cfg = CptConfig {
        statistic: Statistic::Mean,
        threshold: Threshold::Sic,
        min_seg_len: 2,
    };
    let sd = 1.0;
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let noise = Normal::new(0.0, sd).unwrap();
        let truth = rng.random_range(8..=32);
        let y: Vec<f64> = (0..40)
            .map(|t| noise.sample(&mut rng) + if t >= truth { 5.0 * sd } else { 0.0 })
            .collect();
        let r = detect_in_values(&y, &cfg).unwrap();
        if r.tau_hat.is_some_and(|t| t.abs_diff(truth) <= 1) {
            hits += 1;
        }
    }
    let mut false_rejections = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(3500 + seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<f64> = (0..50).map(|_| noise.sample(&mut rng)).collect();
        if detect_in_values(&y, &cfg).unwrap().rejected {
            false_rejections += 1;
        }
    }
    outcome(
        hits >= 95 && false_rejections <= 15,
        format!("step located within +/-1 in {hits}/100 (need 95); null rejected {false_rejections}/100 (max 15)"),
    )
}

// 4. Kalman filter and smoother against the dense joint-Gaussian oracle.
fn kalman_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ll = 0.0f64;
    let mut worst_mean = 0.0f64;
    for i in 0..20 {
        let m = random_model(&mut rng);
        let n = if i == 0 { 10 } else { rng.random_range(1..=10) };
        let mut y = observed(&simulate(&m, n, &mut rng));
        if i == 0 {
            y[3] = None;
            y[7] = None;
        }
        let fo = kalman_filter(&m, &y).unwrap();
        worst_ll = worst_ll.max(rel_diff(fo.log_likelihood, dense_loglik(&m, &y)));
        let sm = kalman_smoother(&m, &fo).unwrap();
        for (a, b) in sm.means.iter().zip(dense_smoothed_means(&m, &y)) {
            for (x, z) in a.iter().zip(b.iter()) {
                worst_mean = worst_mean.max(rel_diff(*x, *z));
            }
        }
    }
    outcome(
        worst_ll <= 1e-8 && worst_mean <= 1e-8,
        format!("max rel err loglik {worst_ll:.2e}, smoothed means {worst_mean:.2e} (tol 1e-8)"),
    )
}

fn trend_fixture() -> (StateSpaceModel, Vec<f64>) {
    let y: Vec<f64> = (0..20)
        .map(|t| 0.8 - 0.01 * t as f64 + 0.02 * ((t * 7 % 5) as f64 - 2.0))
        .collect();
    let m = build_model(
        ComponentSpec::LocalLinearTrend,
        &Variances {
            obs: 4e-4,
            state: vec![1e-4, 1e-5],
        },
        Some(&y),
    )
    .unwrap();
    (m, y)
}

// 5. FFBS draws agree with smoother moments.
fn ffbs_consistency() -> Outcome {
    let (m, y) = trend_fixture();
    let y = observed(&y);
    let sm = kalman_smoother(&m, &kalman_filter(&m, &y).unwrap()).unwrap();
    let draws = 5000u64;
    let d = m.state_dim();
    let mut sum = vec![vec![0.0; d]; y.len()];
    for seed in 0..draws {
        for (t, a) in ffbs(&m, &y, seed).unwrap().iter().enumerate() {
            for j in 0..d {
                sum[t][j] += a[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for t in 0..y.len() {
        for j in 0..d {
            let se = (sm.covs[t][(j, j)] / draws as f64).sqrt();
            worst = worst.max((sum[t][j] / draws as f64 - sm.means[t][j]).abs() / se);
        }
    }
    outcome(worst <= 3.0, format!("max |draw mean - smoothed mean| = {worst:.2} MC-SE (max 3)"))
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    coverage_impact::impact::quantile_sorted(&s, 0.5)
}

// 6. Gibbs sampler recovers known variances.
fn gibbs_recovery() -> Outcome {
    let (obs_true, q_true) = (1.0, 0.1);
    let truth = build_model(
        ComponentSpec::LocalLevel,
        &Variances {
            obs: obs_true,
            state: vec![q_true],
        },
        None,
    )
    .unwrap();
    let mut good = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
        let mut sim = truth.clone();
        sim.p1[(0, 0)] = 1.0;
        let y = simulate(&sim, 300, &mut rng);
        let m = build_model(
            ComponentSpec::LocalLevel,
            &Variances {
                obs: 0.5,
                state: vec![0.5],
            },
            Some(&y),
        )
        .unwrap();
        let priors = Priors::weak(1, &y).unwrap();
        let settings = McmcSettings {
            seed,
            ..McmcSettings::default()
        };
        let draws = gibbs_sample(&m, &observed(&y), &priors, &settings).unwrap();
        let obs_med = median(&draws.obs_var);
        let q_med = median(&draws.state_var.iter().map(|v| v[0]).collect::<Vec<_>>());
        let within = |est: f64, truth: f64| est >= truth / 2.0 && est <= truth * 2.0;
        if within(obs_med, obs_true) && within(q_med, q_true) {
            good += 1;
        }
    }
    outcome(good >= 40, format!("{good}/50 runs within a factor of 2 on both variances (need 40)"))
}

// 7. Null-effect coverage of the cumulative interval.
fn null_coverage() -> Outcome {
    let mut covered = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let y = simulate_trend(40, &mut rng);
        let series = CoverageSeries::from_values(0, y).unwrap();
        let cfg = ImpactConfig {
            mcmc: McmcSettings {
                seed,
                ..McmcSettings::default()
            },
            ..ImpactConfig::new(30)
        };
        let report = run_impact(&series, &cfg).unwrap();
        let c = report.summary.cumulative_effect;
        if c.lower <= 0.0 && 0.0 <= c.upper {
            covered += 1;
        }
    }
    outcome(covered >= 170, format!("95% interval covers 0 in {covered}/200 (need 170)"))
}

// 8. Images -> series -> changepoint -> impact on an engineered slope change.
fn end_to_end_recovery() -> Outcome {
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..10u64 {
        let spec = SynthSeriesSpec {
            n: 35,
            level0: 0.62,
            pre_slope: -0.002,
            post_slope: -0.012,
            change_at: Some(11),
            noise_sd: 0.002,
            seed: 800 + seed,
            start_epoch: 1984,
        };
        let truth_series = gen_series(&spec).unwrap();
        let base = SynthImageSpec {
            epoch: 0,
            ..SynthImageSpec::new(64, 64, 0.0, 8000 + 100 * seed)
        };
        let frames = gen_image_series(&truth_series, &base).unwrap();
        let values: Vec<f64> = frames
            .iter()
            .map(|(img, _)| segment(img, &HsvRange::FOREST, None).unwrap().1)
            .collect();
        let series = CoverageSeries::new(truth_series.epochs().to_vec(), values).unwrap();

        let cpt = detect_in_values(series.values(), &CptConfig::new(Statistic::MeanAndVariance)).unwrap();
        let Some(tau) = cpt.tau_hat else {
            notes.push(format!("seed {seed}: no change detected"));
            continue;
        };
        let cfg = ImpactConfig {
            mcmc: McmcSettings {
                seed,
                ..McmcSettings::default()
            },
            ..ImpactConfig::new(tau)
        };
        let report = run_impact(&series, &cfg).unwrap();
        let injected: f64 = (tau..spec.n).map(|t| spec.mean_at(t) - spec.baseline_at(t)).sum();
        let est = report.summary.cumulative_effect.mean;
        let rel = (est - injected).abs() / injected.abs();
        // tau_hat counts pre-change points; the kink at index 11 is the 12th.
        let ok = tau.abs_diff(12) <= 1 && est.signum() == injected.signum() && rel <= 0.25;
        if ok {
            good += 1;
        } else {
            notes.push(format!("seed {seed}: tau {tau}, effect {est:.4} vs {injected:.4}"));
        }
    }
    outcome(good >= 8, format!("{good}/10 seeds recovered (need 8) {}", notes.join("; ")))
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coverage-impact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pipeline_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let d = |p: &str| dir.join(p).display().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--series".into(), "--images".into(), "--n".into(), "20".into(),
             "--change-at".into(), "8".into(), "--noise".into(), "0.01".into(), "--size".into(), "64x64".into(),
             "--seed".into(), "5".into(), "--out".into(), d("fixtures")],
        vec!["segment".into(), "--images".into(), format!("{}/*.png", d("fixtures")),
             "--out".into(), d("seg")],
        vec!["changepoint".into(), "--series".into(), d("seg/series.csv"), "--out".into(), d("cpt")],
        vec!["impact".into(), "--series".into(), d("seg/series.csv"), "--changepoint".into(),
             d("cpt/changepoint.json"), "--n-iter".into(), "300".into(), "--burn-in".into(), "100".into(),
             "--seed".into(), "9".into(), "--out".into(), d("impact")],
        vec!["report".into(), "--impact".into(), d("impact/impact.json"), "--series".into(),
             d("seg/series.csv"), "--out".into(), d("report")],
        vec!["synth".into(), "--fraction".into(), "0.37".into(), "--size".into(), "20x20".into(),
             "--seed".into(), "3".into(), "--out".into(), d("single")],
        vec!["changepoint".into(), "--series".into(), d("seg/series.csv"), "--statistic".into(), "mean".into(),
             "--out".into(), d("cpt-mean")],
        vec!["calibrate".into(), "--image".into(), d("fixtures/frame_1984.png"), "--range".into(),
             "55,75,30:205,255,255".into(), "--range".into(), "0,0,0:255,255,255".into(), "--out".into(), d("cal")],
    ];
    for args in &steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run_cli(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut files: Vec<(String, Vec<u8>)> = walk(dir)
        .into_iter()
        .map(|p| {
            let rel = p.strip_prefix(dir).unwrap().display().to_string();
            (rel, std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

// 9. Seeded commands are byte-for-byte reproducible.
fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = pipeline_outputs(a.path());
    let fb = pipeline_outputs(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let kinds = ["csv", "json", "svg"]
        .iter()
        .all(|ext| names.iter().any(|n| n.ends_with(ext)));
    outcome(
        fa.len() == fb.len() && differing.is_empty() && kinds,
        format!("{} files compared across two runs, {} differ {:?}", fa.len(), differing.len(), differing),
    )
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("1 segmentation exactness", Duration::from_secs(5), segmentation_exactness),
        ("2 changepoint oracle equivalence", Duration::from_secs(5), changepoint_oracle),
        ("3 changepoint power/calibration", Duration::from_secs(10), changepoint_power),
        ("4 kalman correctness", Duration::from_secs(5), kalman_oracle),
        ("5 ffbs consistency", Duration::from_secs(30), ffbs_consistency),
        ("6 gibbs recovery", Duration::from_secs(120), gibbs_recovery),
        ("7 null-effect coverage", Duration::from_secs(300), null_coverage),
        ("8 end-to-end recovery", Duration::from_secs(180), end_to_end_recovery),
        ("9 determinism", Duration::from_secs(120), determinism),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let handles: Vec<_> = criteria
        .into_iter()
        .filter(|(name, _, _)| only.is_empty() || only.iter().any(|o| name.contains(o.as_str())))
        .map(|(name, limit, f)| {
            let h = std::thread::spawn(move || {
                let start = Instant::now();
                let out = f();
                (out, start.elapsed())
            });
            (name, limit, h)
        })
        .collect();
    let mut failed = 0;
    for (name, limit, h) in handles {
        let (out, elapsed) = match h.join() {
            Ok(r) => r,
            Err(_) => (outcome(false, "panicked"), Duration::ZERO),
        };
        let in_time = elapsed <= limit;
        let pass = out.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
