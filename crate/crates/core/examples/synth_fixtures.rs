//! Generates a kinked coverage series and renders it as an image sequence.
//!
//! Usage: cargo run --example synth_fixtures [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::synth::{gen_image_series, gen_series, SynthImageSpec, SynthSeriesSpec};

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let spec = SynthSeriesSpec {
        n: 12,
        level0: 0.7,
        pre_slope: -0.002,
        post_slope: -0.02,
        change_at: Some(6),
        noise_sd: 0.003,
        seed: 1,
        start_epoch: 2000,
    };
    let series = gen_series(&spec)?;
    let frames = gen_image_series(&series, &SynthImageSpec::new(48, 48, 0.0, 100))?;
    for ((epoch, y), (img, f)) in series.epochs().iter().zip(series.values()).zip(&frames) {
        println!("{epoch}: series {y:.6}  image {f:.6}  noiseless {:.6}", spec.mean_at((epoch - 2000) as usize));
        std::fs::write(out.join(format!("frame_{epoch}.png")), img.to_png()?).expect("write frame");
    }
    series.write_csv(&out.join("series.csv"))?;
    println!("wrote {} frames and series.csv to {}", frames.len(), out.display());
    Ok(())
}
