//! Recovers local-level variances by Gibbs sampling and draws a forecast.
//!
//! Usage: cargo run --example gibbs_variances

use coverage_impact::bsts::{
    build_model, gibbs_sample, observed, posterior_predict, ComponentSpec, McmcSettings, Priors, Variances,
};
use coverage_impact::impact::effect_quantiles;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> coverage_impact::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (obs_sd, level_sd) = (1.0, 0.1f64.sqrt());
    let mut level = 0.0;
    let y: Vec<f64> = (0..300)
        .map(|_| {
            level += Normal::new(0.0, level_sd).unwrap().sample(&mut rng);
            level + Normal::new(0.0, obs_sd).unwrap().sample(&mut rng)
        })
        .collect();

    let m = build_model(
        ComponentSpec::LocalLevel,
        &Variances {
            obs: 0.5,
            state: vec![0.5],
        },
        Some(&y),
    )?;
    let draws = gibbs_sample(&m, &observed(&y), &Priors::weak(1, &y)?, &McmcSettings::default())?;
    // One column per draw, one row per quantity.
    let obs: Vec<Vec<f64>> = draws.obs_var.iter().map(|v| vec![*v]).collect();
    let q: Vec<Vec<f64>> = draws.state_var.iter().map(|v| vec![v[0]]).collect();
    let (obs, q) = (effect_quantiles(&obs, 0.9)?, effect_quantiles(&q, 0.9)?);
    println!("obs variance   median {:.3}  90% [{:.3}, {:.3}]  (truth 1.0)", obs[0].median, obs[0].lower, obs[0].upper);
    println!("level variance median {:.3}  90% [{:.3}, {:.3}]  (truth 0.1)", q[0].median, q[0].lower, q[0].upper);

    let paths = posterior_predict(&draws, &m, 5, 9)?;
    for (h, b) in effect_quantiles(&paths, 0.9)?.iter().enumerate() {
        println!("forecast h={}: {:.3} [{:.3}, {:.3}]", h + 1, b.median, b.lower, b.upper);
    }
    Ok(())
}
