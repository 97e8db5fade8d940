//! Three-panel SVG rendering of an impact report.
//!
//! Panels share one x-axis of epochs: observed vs. counterfactual, pointwise
//! effect, cumulative effect. Output is plain text with fixed two-decimal
//! coordinates, so identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::impact::{Band, ImpactReport};
use crate::series::CoverageSeries;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 220.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 30.0;
const AXIS_LABEL_SPACE: f64 = 30.0;

const OBSERVED_COLOR: &str = "#222222";
const MODEL_COLOR: &str = "#1f5fbf";
const BAND_COLOR: &str = "#8fb3e8";
const RULE_COLOR: &str = "#999999";

/// Coordinates and labels at two decimals, never `-0.00`.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    out_lo: f64,
    out_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        self.out_lo + (v - self.lo) / (self.hi - self.lo) * (self.out_hi - self.out_lo)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-3);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Checks that `report` was computed from `series`: the pre-period ends at
/// `last_pre_epoch` and every post-period epoch and observation matches.
fn check_consistent(report: &ImpactReport, series: &CoverageSeries) -> Result<()> {
    let epochs = series.epochs();
    let tau = report.intervention_index;
    let mismatch = |what: String| Error::Diagnostic(format!("impact report does not match series: {what}"));
    if tau == 0 || tau >= epochs.len() {
        return Err(mismatch(format!(
            "intervention index {tau} outside a series of length {}",
            epochs.len()
        )));
    }
    if epochs[tau - 1] != report.last_pre_epoch {
        return Err(mismatch(format!(
            "last pre-period epoch is {} in the report but {} in the series",
            report.last_pre_epoch,
            epochs[tau - 1]
        )));
    }
    let post = &epochs[tau..];
    if post.len() != report.points.len() {
        return Err(mismatch(format!(
            "report covers {} post-period epochs, series has {}",
            report.points.len(),
            post.len()
        )));
    }
    for ((p, &e), &y) in report.points.iter().zip(post).zip(&series.values()[tau..]) {
        if p.epoch != e {
            return Err(mismatch(format!("epoch {} in the report where the series has {e}", p.epoch)));
        }
        if (p.observed - y).abs() > 5e-7 {
            return Err(mismatch(format!(
                "observed value at epoch {e} is {} in the report but {y} in the series",
                p.observed
            )));
        }
    }
    Ok(())
}

struct Panel<'a> {
    id: &'a str,
    title: &'a str,
    /// Solid line over the whole series (panel 1 only).
    observed: Option<Vec<(i64, f64)>>,
    bands: Vec<(i64, Band)>,
    zero_line: bool,
}

/// Renders `report` against the full `series` it was computed from.
pub fn render_svg(report: &ImpactReport, series: &CoverageSeries) -> Result<String> {
    check_consistent(report, series)?;
    let epochs = series.epochs();
    let x = Scale {
        lo: epochs[0] as f64,
        hi: if epochs.len() > 1 { epochs[epochs.len() - 1] as f64 } else { epochs[0] as f64 + 1.0 },
        out_lo: LEFT,
        out_hi: WIDTH - RIGHT,
    };

    let panels = [
        Panel {
            id: "panel-observed",
            title: "observed (solid) and counterfactual (dashed)",
            observed: Some(epochs.iter().copied().zip(series.values().iter().copied()).collect()),
            bands: report.points.iter().map(|p| (p.epoch, p.counterfactual)).collect(),
            zero_line: false,
        },
        Panel {
            id: "panel-pointwise",
            title: "pointwise effect",
            observed: None,
            bands: report.points.iter().map(|p| (p.epoch, p.pointwise)).collect(),
            zero_line: true,
        },
        Panel {
            id: "panel-cumulative",
            title: "cumulative effect",
            observed: None,
            bands: report.points.iter().map(|p| (p.epoch, p.cumulative)).collect(),
            zero_line: true,
        },
    ];

    let panel_block = PANEL_HEIGHT + TOP + BOTTOM;
    let height = 3.0 * panel_block + AXIS_LABEL_SPACE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = num(WIDTH),
        h = num(height)
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, num(WIDTH), num(height));

    for (i, panel) in panels.iter().enumerate() {
        let top = i as f64 * panel_block + TOP;
        let bottom = top + PANEL_HEIGHT;
        let mut values: Vec<f64> = panel.bands.iter().flat_map(|(_, b)| [b.lower, b.mean, b.upper]).collect();
        if let Some(obs) = &panel.observed {
            values.extend(obs.iter().map(|(_, v)| *v));
        }
        if panel.zero_line {
            values.push(0.0);
        }
        let (lo, hi) = padded_range(values.into_iter());
        let y = Scale {
            lo,
            hi,
            out_lo: bottom,
            out_hi: top,
        };
        write_panel(&mut out, panel, &x, &y, report.last_pre_epoch, top, bottom);
    }

    let axis_y = 3.0 * panel_block;
    for e in x_ticks(epochs) {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{e}</text>"#,
            num(x.map(e as f64)),
            num(axis_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">epoch</text>"#,
        num((LEFT + WIDTH - RIGHT) / 2.0),
        num(axis_y + 18.0)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn x_ticks(epochs: &[i64]) -> Vec<i64> {
    let step = epochs.len().div_ceil(10).max(1);
    epochs.iter().step_by(step).copied().collect()
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    points.map(|(a, b)| format!("{},{}", num(a), num(b))).collect::<Vec<_>>().join(" ")
}

fn write_panel(out: &mut String, panel: &Panel, x: &Scale, y: &Scale, rule_epoch: i64, top: f64, bottom: f64) {
    let _ = writeln!(out, r#"<g class="panel" id="{}">"#, panel.id);
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, num(LEFT), num(top - 8.0), panel.title);
    let _ = writeln!(
        out,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{RULE_COLOR}"/>"#,
        num(LEFT),
        num(top),
        num(WIDTH - RIGHT - LEFT),
        num(PANEL_HEIGHT)
    );
    for v in [y.lo, (y.lo + y.hi) / 2.0, y.hi] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            num(LEFT - 6.0),
            num(y.map(v) + 4.0),
            label(v)
        );
    }

    if !panel.bands.is_empty() {
        let upper = panel.bands.iter().map(|(e, b)| (x.map(*e as f64), y.map(b.upper)));
        let lower = panel.bands.iter().rev().map(|(e, b)| (x.map(*e as f64), y.map(b.lower)));
        let _ = writeln!(
            out,
            r#"<polygon class="band" points="{}" fill="{BAND_COLOR}" fill-opacity="0.4" stroke="none"/>"#,
            polyline(upper.chain(lower))
        );
    }
    if panel.zero_line {
        let _ = writeln!(
            out,
            r#"<line class="zero" x1="{}" y1="{y0}" x2="{}" y2="{y0}" stroke="{OBSERVED_COLOR}" stroke-width="0.8"/>"#,
            num(LEFT),
            num(WIDTH - RIGHT),
            y0 = num(y.map(0.0))
        );
    }
    if let Some(obs) = &panel.observed {
        let _ = writeln!(
            out,
            r#"<polyline class="observed" points="{}" fill="none" stroke="{OBSERVED_COLOR}" stroke-width="1.5"/>"#,
            polyline(obs.iter().map(|(e, v)| (x.map(*e as f64), y.map(*v))))
        );
    }
    let dash = if panel.observed.is_some() { r#" stroke-dasharray="6,4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline class="estimate" points="{}" fill="none" stroke="{MODEL_COLOR}" stroke-width="1.5"{dash}/>"#,
        polyline(panel.bands.iter().map(|(e, b)| (x.map(*e as f64), y.map(b.mean))))
    );
    let rx = num(x.map(rule_epoch as f64));
    let _ = writeln!(
        out,
        r#"<line class="intervention" x1="{rx}" y1="{}" x2="{rx}" y2="{}" stroke="{RULE_COLOR}" stroke-dasharray="2,2"/>"#,
        num(top),
        num(bottom)
    );
    out.push_str("</g>\n");
}
