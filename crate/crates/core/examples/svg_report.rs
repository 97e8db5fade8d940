//! Renders the three-panel report for an impact analysis.
//!
//! Usage: cargo run --example svg_report [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::bsts::McmcSettings;
use coverage_impact::impact::{run_impact, ImpactConfig};
use coverage_impact::report::render_svg;
use coverage_impact::synth::{gen_series, SynthSeriesSpec};

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let series = gen_series(&SynthSeriesSpec {
        n: 35,
        level0: 0.62,
        pre_slope: -0.002,
        post_slope: -0.012,
        change_at: Some(10),
        noise_sd: 0.003,
        seed: 5,
        start_epoch: 1984,
    })?;
    let cfg = ImpactConfig {
        mcmc: McmcSettings {
            n_iter: 1000,
            burn_in: 250,
            seed: 1,
        },
        ..ImpactConfig::new(11)
    };
    let report = run_impact(&series, &cfg)?;
    let path = out.join("report.svg");
    std::fs::write(&path, render_svg(&report, &series)?).expect("write svg");
    println!("wrote {}", path.display());
    Ok(())
}
