//! Images to report: segment every frame, detect the change, estimate the
//! effect and render the SVG.
//!
//! Usage: cargo run --example full_pipeline [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::bsts::McmcSettings;
use coverage_impact::changepoint::{detect_single, CptConfig};
use coverage_impact::imagery::{segment, HsvRange};
use coverage_impact::impact::{run_impact, ImpactConfig};
use coverage_impact::report::render_svg;
use coverage_impact::series::CoverageSeries;
use coverage_impact::synth::{gen_image_series, gen_series, SynthImageSpec, SynthSeriesSpec};
use coverage_impact::Error;

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let spec = SynthSeriesSpec {
        n: 35,
        level0: 0.62,
        pre_slope: -0.002,
        post_slope: -0.012,
        change_at: Some(11),
        noise_sd: 0.002,
        seed: 800,
        start_epoch: 1984,
    };
    let truth = gen_series(&spec)?;
    let frames = gen_image_series(&truth, &SynthImageSpec::new(64, 64, 0.0, 8000))?;

    let values = frames
        .iter()
        .map(|(img, _)| segment(img, &HsvRange::FOREST, None).map(|(_, f)| f))
        .collect::<Result<Vec<_>, _>>()?;
    let series = CoverageSeries::new(truth.epochs().to_vec(), values)?;
    series.write_csv(&out.join("series.csv"))?;

    let cpt = detect_single(&series, &CptConfig::default())?;
    let tau = cpt
        .tau_hat
        .ok_or_else(|| Error::Diagnostic(format!("no changepoint: lambda {:.3}", cpt.lambda)))?;
    println!("changepoint after epoch {} (lambda {:.2})", series.epochs()[tau - 1], cpt.lambda);

    let cfg = ImpactConfig {
        mcmc: McmcSettings {
            seed: 1,
            ..McmcSettings::default()
        },
        ..ImpactConfig::new(tau)
    };
    let report = run_impact(&series, &cfg)?;
    let injected: f64 = (tau..spec.n).map(|t| spec.mean_at(t) - spec.baseline_at(t)).sum();
    let c = report.summary.cumulative_effect;
    println!("cumulative effect {:+.4} [{:+.4}, {:+.4}], injected {injected:+.4}", c.mean, c.lower, c.upper);

    std::fs::write(out.join("report.svg"), render_svg(&report, &series)?).expect("write svg");
    println!("wrote series.csv and report.svg to {}", out.display());
    Ok(())
}
