//! Filters and smooths a local linear trend with two missing observations.
//!
//! Usage: cargo run --example kalman_smoother

use coverage_impact::bsts::{build_model, kalman_filter, kalman_smoother, ComponentSpec, Variances};

fn main() -> coverage_impact::Result<()> {
    let raw: Vec<f64> = (0..15).map(|t| 0.8 - 0.01 * t as f64 + 0.01 * ((t * 7 % 5) as f64 - 2.0)).collect();
    let mut y: Vec<Option<f64>> = raw.iter().copied().map(Some).collect();
    y[4] = None;
    y[9] = None;

    let m = build_model(
        ComponentSpec::LocalLinearTrend,
        &Variances {
            obs: 1e-4,
            state: vec![1e-5, 1e-6],
        },
        Some(&raw),
    )?;
    let fo = kalman_filter(&m, &y)?;
    let sm = kalman_smoother(&m, &fo)?;
    println!("log-likelihood {:.4}", fo.log_likelihood);
    println!(" t  observed   level     slope   level sd");
    for (t, (obs, a)) in y.iter().zip(&sm.means).enumerate() {
        let shown = obs.map_or("     -   ".to_string(), |v| format!("{v:.5}"));
        println!("{t:>2}  {shown}  {:.5}  {:+.5}  {:.5}", a[0], a[1], sm.covs[t][(0, 0)].sqrt());
    }
    Ok(())
}
