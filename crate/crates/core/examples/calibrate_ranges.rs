//! Compares candidate HSV ranges on one image.
//!
//! Usage: cargo run --example calibrate_ranges [OUT_DIR]

use std::path::PathBuf;

use coverage_impact::imagery::{calibration_grid, calibration_table, write_calibration, HsvRange};
use coverage_impact::synth::{gen_image, SynthImageSpec};

fn main() -> coverage_impact::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (img, _) = gen_image(&SynthImageSpec::new(64, 64, 0.6, 3))?;
    let candidates: Vec<HsvRange> = ["55,75,30:205,255,255", "80,75,30:205,255,255", "0,0,0:60,255,255"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let entries = calibration_grid(&img, &candidates)?;
    print!("{}", calibration_table(&entries));
    let files = write_calibration(&entries, "scene", &out)?;
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}
