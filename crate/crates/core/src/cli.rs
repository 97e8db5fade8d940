//! Command-line surface: `segment`, `calibrate`, `changepoint`, `impact`,
//! `report` and `synth`.
//!
//! Settings resolve in three layers: built-in defaults, then `--config`, then
//! flags. Failures print one line, `error: <code>: <detail>`, and exit
//! nonzero.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bsts::{McmcSettings, Priors};
use crate::changepoint::{detect_single, Statistic, Threshold};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::imagery::{calibration_grid, read_image, segment, write_calibration, HsvRange};
use crate::impact::{run_impact, ImpactConfig, ImpactReport};
use crate::report::render_svg;
use crate::series::CoverageSeries;
use crate::synth::{gen_image, gen_image_series, gen_series, SynthImageSpec, SynthSeriesSpec};

#[derive(Parser, Debug)]
#[command(name = "coverage-impact", version, about = "Coverage series from imagery, changepoint and causal impact")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mask every matching image and write the coverage series.
    Segment(SegmentArgs),
    /// Compare candidate HSV ranges on one image.
    Calibrate(CalibrateArgs),
    /// Test a coverage series for a single changepoint.
    Changepoint(ChangepointArgs),
    /// Estimate the effect of an intervention.
    Impact(ImpactArgs),
    /// Render the three-panel SVG report.
    Report(ReportArgs),
    /// Generate fixture images and series with known ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// Glob selecting input PNGs.
    #[arg(long)]
    images: Option<String>,
    /// Regex with one capture group extracting the epoch from a file name.
    #[arg(long)]
    epoch_regex: Option<String>,
    /// `h,s,v:h,s,v`, inclusive.
    #[arg(long)]
    range: Option<HsvRange>,
    #[arg(long)]
    blur_sigma: Option<f64>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long)]
    image: PathBuf,
    /// Candidate range, repeatable. Defaults to a grid around the forest range.
    #[arg(long)]
    range: Vec<HsvRange>,
}

#[derive(Args, Debug)]
struct ChangepointArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long, value_parser = parse_statistic)]
    statistic: Option<Statistic>,
    /// `sic` or a positive number.
    #[arg(long)]
    threshold: Option<Threshold>,
    #[arg(long)]
    min_seg_len: Option<usize>,
    /// Skip the test and pass this changepoint downstream.
    #[arg(long)]
    tau: Option<usize>,
}

#[derive(Args, Debug)]
struct ImpactArgs {
    #[arg(long)]
    series: PathBuf,
    /// Number of pre-intervention points.
    #[arg(long, conflicts_with = "changepoint", required_unless_present = "changepoint")]
    intervention: Option<usize>,
    /// `changepoint.json` from the changepoint command.
    #[arg(long)]
    changepoint: Option<PathBuf>,
    #[arg(long)]
    component: Option<crate::bsts::ComponentSpec>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    credible_level: Option<f64>,
    #[arg(long)]
    prior_shape: Option<f64>,
    #[arg(long)]
    prior_scale_factor: Option<f64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    impact: PathBuf,
    #[arg(long)]
    series: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Covered fraction of a single image.
    #[arg(long)]
    fraction: Option<f64>,
    /// Image size `WxH`.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    /// Generate a coverage series.
    #[arg(long)]
    series: bool,
    /// Render one image per series epoch (implies --series).
    #[arg(long)]
    images: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    change_at: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pre_slope: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    post_slope: Option<f64>,
    #[arg(long)]
    level0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    start_epoch: Option<i64>,
}

fn parse_statistic(s: &str) -> std::result::Result<Statistic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("size {s:?} is not WxH"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("size {s:?} is not WxH"));
    Ok((dim(w)?, dim(h)?))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.common.config {
        Some(path) => PipelineConfig::read(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.common.out {
        cfg.out = Some(out);
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    match cli.command {
        Command::Segment(a) => cmd_segment(a, cfg, &out),
        Command::Calibrate(a) => cmd_calibrate(a, &out),
        Command::Changepoint(a) => cmd_changepoint(a, cfg, &out),
        Command::Impact(a) => cmd_impact(a, cfg, &out),
        Command::Report(a) => cmd_report(a, &out),
        Command::Synth(a) => cmd_synth(a, cfg, &out),
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn cmd_segment(a: SegmentArgs, mut cfg: PipelineConfig, out: &Path) -> Result<()> {
    let s = &mut cfg.segment;
    if a.images.is_some() {
        s.images = a.images;
    }
    if let Some(r) = a.epoch_regex {
        s.epoch_regex = r;
    }
    if let Some(r) = a.range {
        s.range = r;
    }
    if a.blur_sigma.is_some() {
        s.blur_sigma = a.blur_sigma;
    }
    let pattern = s
        .images
        .clone()
        .ok_or_else(|| Error::Config("no image glob: pass --images or set segment.images".into()))?;
    let epoch_re = s.epoch_pattern()?;

    let paths: Vec<PathBuf> = glob::glob(&pattern)
        .map_err(|e| Error::Config(format!("image glob {pattern:?}: {e}")))?
        .filter(|entry| entry.as_ref().map_or(true, |p| p.is_file()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::io(e.path().to_path_buf(), e.into()))?;
    if paths.is_empty() {
        return Err(Error::NoMatches(pattern));
    }

    let mut jobs: Vec<(i64, PathBuf)> = Vec::with_capacity(paths.len());
    for p in paths {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let epoch = epoch_re
            .captures(&name)
            .and_then(|c| c.get(1))
            .and_then(|m| m.as_str().parse::<i64>().ok())
            .ok_or_else(|| Error::EpochPattern { path: p.clone() })?;
        jobs.push((epoch, p));
    }
    jobs.sort();
    for w in jobs.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateEpoch {
                epoch: w[0].0,
                first: w[0].1.clone(),
                second: w[1].1.clone(),
            });
        }
    }

    let range = s.range;
    let sigma = s.blur_sigma;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let chunk = jobs.len().div_ceil(threads);
    let results: Vec<Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|(epoch, path)| {
                            let img = read_image(path, *epoch)?;
                            let (mask, fraction) = segment(&img, &range, sigma)?;
                            write(&out.join(format!("{epoch}.mask.png")), mask.to_png()?)?;
                            Ok(fraction)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("segmentation worker panicked"))
            .collect()
    });
    let values = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let series = CoverageSeries::new(jobs.iter().map(|(e, _)| *e).collect(), values)?;
    let csv = out.join("series.csv");
    series.write_csv(&csv)?;
    println!("segmented {} images -> {}", series.len(), csv.display());
    Ok(())
}

fn default_calibration_grid() -> Vec<HsvRange> {
    let [h, s, v] = HsvRange::FOREST.lower();
    let upper = HsvRange::FOREST.upper();
    let mut out = Vec::new();
    for dh in [-10i16, 0, 10] {
        for ds in [-25i16, 0, 25] {
            let lower = [(h as i16 + dh) as u8, (s as i16 + ds) as u8, v];
            out.push(HsvRange::new(lower, upper).expect("grid stays ordered"));
        }
    }
    out
}

fn cmd_calibrate(a: CalibrateArgs, out: &Path) -> Result<()> {
    let img = read_image(&a.image, 0)?;
    let candidates = if a.range.is_empty() { default_calibration_grid() } else { a.range };
    let entries = calibration_grid(&img, &candidates)?;
    let stem = a
        .image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    write_calibration(&entries, &stem, out)?;
    print!("{}", crate::imagery::calibration_table(&entries));
    Ok(())
}

/// Changepoint file written when `--tau` bypasses the test.
#[derive(Serialize, Deserialize)]
struct ManualChangepoint {
    tau_hat: usize,
    manual: bool,
}

#[derive(Deserialize)]
struct ChangepointFile {
    tau_hat: Option<usize>,
}

fn cmd_changepoint(a: ChangepointArgs, mut cfg: PipelineConfig, out: &Path) -> Result<()> {
    let series = CoverageSeries::read_csv(&a.series)?;
    let path = out.join("changepoint.json");
    if let Some(tau) = a.tau {
        if tau == 0 || tau >= series.len() {
            return Err(Error::param(format!(
                "--tau {tau} outside 1..={} for a series of length {}",
                series.len().saturating_sub(1),
                series.len()
            )));
        }
        let json = serde_json::to_string_pretty(&ManualChangepoint { tau_hat: tau, manual: true })?;
        write(&path, json + "\n")?;
        println!(
            "changepoint set manually: tau_hat = {tau} (last pre-change epoch {})",
            series.epochs()[tau - 1]
        );
        return Ok(());
    }
    let c = &mut cfg.changepoint;
    if let Some(s) = a.statistic {
        c.statistic = s;
    }
    if let Some(t) = a.threshold {
        c.threshold = t;
    }
    if let Some(m) = a.min_seg_len {
        c.min_seg_len = m;
    }
    let result = detect_single(&series, c)?;
    write(&path, serde_json::to_string_pretty(&result)? + "\n")?;
    match result.tau_hat {
        Some(tau) => println!(
            "changepoint detected ({}): tau_hat = {tau}, last pre-change epoch {}, lambda = {:.4} > threshold {:.4}",
            c.statistic.name(),
            series.epochs()[tau - 1],
            result.lambda,
            result.threshold
        ),
        None => println!(
            "no changepoint ({}): lambda = {:.4} <= threshold {:.4}",
            c.statistic.name(),
            result.lambda,
            result.threshold
        ),
    }
    Ok(())
}

fn read_tau(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ChangepointFile =
        serde_json::from_str(&text).map_err(|e| Error::from(e).context(format!("changepoint file {}", path.display())))?;
    file.tau_hat.ok_or_else(|| {
        Error::Diagnostic(format!(
            "{} reports no changepoint; pass --intervention or rerun changepoint with --tau",
            path.display()
        ))
    })
}

fn cmd_impact(a: ImpactArgs, mut cfg: PipelineConfig, out: &Path) -> Result<()> {
    let series = CoverageSeries::read_csv(&a.series)?;
    let tau = match (a.intervention, &a.changepoint) {
        (Some(t), _) => t,
        (None, Some(p)) => read_tau(p)?,
        (None, None) => unreachable!("clap requires one of --intervention or --changepoint"),
    };
    let s = &mut cfg.impact;
    if let Some(c) = a.component {
        s.component = c;
    }
    if let Some(v) = a.n_iter {
        s.n_iter = v;
    }
    if let Some(v) = a.burn_in {
        s.burn_in = v;
    }
    if let Some(v) = a.credible_level {
        s.credible_level = v;
    }
    if let Some(v) = a.prior_shape {
        s.prior_shape = v;
    }
    if let Some(v) = a.prior_scale_factor {
        s.prior_scale_factor = v;
    }
    let pre = &series.values()[..tau.min(series.len())];
    let priors = if tau >= crate::impact::MIN_PRE_PERIOD && tau < series.len() {
        Some(Priors::scaled(s.component.state_dim(), pre, s.prior_shape, s.prior_scale_factor)?)
    } else {
        None
    };
    let icfg = ImpactConfig {
        intervention_index: tau,
        component: s.component,
        priors,
        mcmc: McmcSettings {
            n_iter: s.n_iter,
            burn_in: s.burn_in,
            seed: cfg.seed,
        },
        credible_level: s.credible_level,
    };
    let report = run_impact(&series, &icfg)?;
    write(&out.join("impact.json"), report.to_json()?)?;
    write(&out.join("impact.csv"), report.to_csv())?;
    let sum = &report.summary;
    println!(
        "average effect {:.6} [{:.6}, {:.6}], cumulative {:.6} [{:.6}, {:.6}], tail probability {:.4}",
        sum.average_effect.mean,
        sum.average_effect.lower,
        sum.average_effect.upper,
        sum.cumulative_effect.mean,
        sum.cumulative_effect.lower,
        sum.cumulative_effect.upper,
        sum.tail_probability
    );
    Ok(())
}

fn cmd_report(a: ReportArgs, out: &Path) -> Result<()> {
    let report = ImpactReport::read_json(&a.impact)?;
    let series = CoverageSeries::read_csv(&a.series)?;
    let svg = render_svg(&report, &series)?;
    let path = out.join("report.svg");
    write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_synth(a: SynthArgs, mut cfg: PipelineConfig, out: &Path) -> Result<()> {
    let s = &mut cfg.synth;
    if let Some((w, h)) = a.size {
        s.width = w;
        s.height = h;
    }
    macro_rules! take {
        ($($field:ident <- $flag:expr),*) => { $(if let Some(v) = $flag { s.$field = v; })* };
    }
    take!(fraction <- a.fraction, n <- a.n, noise <- a.noise, pre_slope <- a.pre_slope,
          post_slope <- a.post_slope, level0 <- a.level0, start_epoch <- a.start_epoch);
    if a.change_at.is_some() {
        s.change_at = a.change_at;
    }

    if !(a.series || a.images) {
        let spec = SynthImageSpec::new(s.width, s.height, s.fraction, cfg.seed);
        let (img, truth) = gen_image(&spec)?;
        write(&out.join("synth.png"), img.to_png()?)?;
        println!("synth.png: true fraction {truth:.6}");
        return Ok(());
    }
    let spec = SynthSeriesSpec {
        n: s.n,
        level0: s.level0,
        pre_slope: s.pre_slope,
        post_slope: s.post_slope,
        change_at: s.change_at,
        noise_sd: s.noise,
        seed: cfg.seed,
        start_epoch: s.start_epoch,
    };
    let series = gen_series(&spec)?;
    series.write_csv(&out.join("series.csv"))?;
    if a.images {
        let base = SynthImageSpec::new(s.width, s.height, 0.0, cfg.seed.wrapping_mul(1_000_003));
        let frames = gen_image_series(&series, &base)?;
        let truth: Vec<f64> = frames.iter().map(|(_, f)| *f).collect();
        for (img, _) in &frames {
            write(&out.join(format!("frame_{}.png", img.epoch)), img.to_png()?)?;
        }
        CoverageSeries::new(series.epochs().to_vec(), truth)?.write_csv(&out.join("truth.csv"))?;
        println!("wrote {} frames and series.csv", frames.len());
    } else {
        println!("wrote series.csv ({} epochs)", series.len());
    }
    Ok(())
}
