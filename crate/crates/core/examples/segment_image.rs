//! Masks a synthetic scene with the forest HSV range, with and without blur.
//!
//! Usage: cargo run --example segment_image [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::imagery::{segment, HsvRange};
use coverage_impact::synth::{gen_image, SynthImageSpec};

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (img, truth) = gen_image(&SynthImageSpec::new(128, 96, 0.42, 7))?;
    let (mask, fraction) = segment(&img, &HsvRange::FOREST, None)?;
    println!("true fraction {truth:.6}, segmented {fraction:.6}");

    let (_, blurred) = segment(&img, &HsvRange::FOREST, Some(1.0))?;
    // Pixel colors are independent, so blurring mixes forest and bare ground.
    println!("after a sigma=1 blur: {blurred:.6}");

    std::fs::write(out.join("scene.png"), img.to_png()?).expect("write scene");
    std::fs::write(out.join("scene.mask.png"), mask.to_png()?).expect("write mask");
    println!("wrote scene.png and scene.mask.png to {}", out.display());
    Ok(())
}
