//! Runs the single-changepoint test with each statistic on one series.
//!
//! Usage: cargo run --example detect_changepoint

use coverage_impact::changepoint::{detect_single, CptConfig, Statistic, Threshold};
use coverage_impact::synth::{gen_series, SynthSeriesSpec};

fn main() -> coverage_impact::Result<()> {
    let series = gen_series(&SynthSeriesSpec {
        n: 35,
        level0: 0.62,
        pre_slope: -0.002,
        post_slope: -0.012,
        change_at: Some(11),
        noise_sd: 0.003,
        seed: 4,
        start_epoch: 1984,
    })?;
    for statistic in [Statistic::Mean, Statistic::Variance, Statistic::MeanAndVariance] {
        let r = detect_single(&series, &CptConfig::new(statistic))?;
        let at = r.tau_hat.map(|t| series.epochs()[t - 1].to_string());
        println!(
            "{:<18} lambda {:>8.3}  threshold {:>6.3}  last pre-change epoch {}",
            statistic.name(),
            r.lambda,
            r.threshold,
            at.as_deref().unwrap_or("-")
        );
    }
    let strict = CptConfig {
        threshold: Threshold::Value(200.0),
        ..CptConfig::default()
    };
    println!("with threshold 200: rejected = {}", detect_single(&series, &strict)?.rejected);
    Ok(())
}
