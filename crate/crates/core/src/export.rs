//! CSV and SVG output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::ComparisonReport;
use crate::metrics::{to_db, AggregateSeries, DB_FLOOR};

pub const CSV_HEADER: &str = "step,ep_avg_db,ep_max_db,eta_avg,eta_max";

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_csv(series: &AggregateSeries) -> String {
    let mut out = String::with_capacity(96 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            series.steps[k],
            num(to_db(series.ep_avg[k])),
            num(to_db(series.ep_max[k])),
            num(series.eta_avg[k]),
            num(series.eta_max[k]),
        );
    }
    out
}

pub fn export_csv(series: &AggregateSeries, path: &Path) -> Result<()> {
    fs::write(path, render_csv(series)).map_err(|e| Error::io(path, e))
}

/// One parsed CSV row; `ep_*` stay in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub step: u64,
    pub ep_avg_db: f64,
    pub ep_max_db: f64,
    pub eta_avg: f64,
    pub eta_max: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Config(format!("CSV row {}: malformed `{line}`", i + 1));
            if f.len() != 5 {
                return Err(bad());
            }
            let p = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(CsvRow {
                step: f[0].parse().map_err(|_| bad())?,
                ep_avg_db: p(f[1])?,
                ep_max_db: p(f[2])?,
                eta_avg: p(f[3])?,
                eta_max: p(f[4])?,
            })
        })
        .collect()
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub steps: &'a [u64],
    pub values_db: Vec<f64>,
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 190.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

/// Vertical range `[min − 3, max + 3]` dB over all plotted values, ignoring
/// floored zeros.
pub fn plot_y_range(curves: &[Curve<'_>]) -> (f64, f64) {
    let vals = curves
        .iter()
        .flat_map(|c| c.values_db.iter().copied())
        .filter(|v| v.is_finite() && *v > DB_FLOOR);
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (-3.0, 3.0)
    } else {
        (lo - 3.0, hi + 3.0)
    }
}

/// Error-power curves against step, one `<polyline>` per curve.
pub fn render_svg(title: &str, curves: &[Curve<'_>], break_step: Option<usize>) -> String {
    let (y_lo, y_hi) = plot_y_range(curves);
    let x_max = curves
        .iter()
        .filter_map(|c| c.steps.last())
        .copied()
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |s: f64| MARGIN_L + pw * s / x_max;
    let sy = |v: f64| MARGIN_T + ph * (y_hi - v.clamp(y_lo, y_hi)) / (y_hi - y_lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-y-min="{y_lo}" data-y-max="{y_hi}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    // ticks
    for i in 0..=5 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.1}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0
        );
        let s = x_max * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{s:.0}</text>"#,
            sx(s),
            HEIGHT - MARGIN_B + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">step</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">projection error power (dB)</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );

    if let Some(b) = break_step {
        let x = sx(b as f64);
        let _ = writeln!(
            svg,
            r#"<line class="break-marker" x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{}" stroke="gray" stroke-dasharray="2,3"/>"#,
            MARGIN_T + ph
        );
    }

    for c in curves {
        let mut pts = String::with_capacity(16 * c.steps.len());
        for (s, v) in c.steps.iter().zip(&c.values_db) {
            let _ = write!(pts, "{:.2},{:.2} ", sx(*s as f64), sy(*v));
        }
        let dash = if c.dashed { r#" stroke-dasharray="6,3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1"{dash} points="{}"/>"#,
            c.color,
            pts.trim_end()
        );
    }

    // legend
    let lx = WIDTH - MARGIN_R + 15.0;
    for (i, c) in curves.iter().enumerate() {
        let y = MARGIN_T + 15.0 + 20.0 * i as f64;
        let dash = if c.dashed { r#" stroke-dasharray="6,3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 25.0,
            c.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            y + 4.0,
            xml_escape(c.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn db_curve(series: &AggregateSeries, max: bool) -> Vec<f64> {
    let src = if max { &series.ep_max } else { &series.ep_avg };
    src.iter().map(|&v| to_db(v)).collect()
}

pub fn comparison_curves(report: &ComparisonReport) -> Vec<Curve<'_>> {
    let (o, a) = (&report.series_original, &report.series_amended);
    vec![
        Curve {
            label: "original avg",
            color: "blue",
            dashed: false,
            steps: &o.steps,
            values_db: db_curve(o, false),
        },
        Curve {
            label: "original max",
            color: "red",
            dashed: false,
            steps: &o.steps,
            values_db: db_curve(o, true),
        },
        Curve {
            label: "limited avg",
            color: "green",
            dashed: true,
            steps: &a.steps,
            values_db: db_curve(a, false),
        },
        Curve {
            label: "limited max",
            color: "black",
            dashed: true,
            steps: &a.steps,
            values_db: db_curve(a, true),
        },
    ]
}

pub fn series_curves(series: &AggregateSeries) -> Vec<Curve<'_>> {
    vec![
        Curve {
            label: "avg",
            color: "blue",
            dashed: false,
            steps: &series.steps,
            values_db: db_curve(series, false),
        },
        Curve {
            label: "max",
            color: "red",
            dashed: false,
            steps: &series.steps,
            values_db: db_curve(series, true),
        },
    ]
}

pub fn export_plot(report: &ComparisonReport, path: &Path) -> Result<()> {
    let svg = render_svg(
        "projection error power: fixed vs limited stepsize",
        &comparison_curves(report),
        report.break_step,
    );
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub fn export_series_plot(series: &AggregateSeries, break_step: Option<usize>, path: &Path) -> Result<()> {
    let svg = render_svg("projection error power", &series_curves(series), break_step);
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
