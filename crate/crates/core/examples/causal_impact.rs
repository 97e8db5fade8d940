//! Counterfactual forecast and effect summary for a known step change.
//!
//! Usage: cargo run --example causal_impact [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::impact::{run_impact, ImpactConfig};
use coverage_impact::series::CoverageSeries;
use coverage_impact::synth::{gen_series, SynthSeriesSpec};

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let base = gen_series(&SynthSeriesSpec {
        n: 30,
        level0: 0.6,
        pre_slope: -0.002,
        post_slope: -0.002,
        change_at: None,
        noise_sd: 0.004,
        seed: 12,
        start_epoch: 1990,
    })?;
    // Drop coverage by 0.05 from the 21st epoch on.
    let stepped = base.values().iter().enumerate().map(|(t, v)| if t >= 20 { v - 0.05 } else { *v }).collect();
    let series = CoverageSeries::new(base.epochs().to_vec(), stepped)?;

    let report = run_impact(&series, &ImpactConfig::new(20))?;
    let s = &report.summary;
    println!(
        "average effect {:+.4} [{:+.4}, {:+.4}] (injected -0.05)",
        s.average_effect.mean, s.average_effect.lower, s.average_effect.upper
    );
    println!(
        "cumulative {:+.4} [{:+.4}, {:+.4}], relative {}, tail probability {:.4}",
        s.cumulative_effect.mean,
        s.cumulative_effect.lower,
        s.cumulative_effect.upper,
        s.relative_effect.map_or("n/a".into(), |r| format!("{:+.2}%", 100.0 * r)),
        s.tail_probability
    );
    std::fs::write(out.join("impact.json"), report.to_json()?).expect("write json");
    std::fs::write(out.join("impact.csv"), report.to_csv()).expect("write csv");
    println!("wrote impact.json and impact.csv to {}", out.display());
    Ok(())
}
