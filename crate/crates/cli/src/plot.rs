//! Sweep tables and the median-ρ plot.

use std::fmt::Write as _;
use std::path::Path;

use firsyn::firdesign::DesignOutcome;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = ["order", "median_rho", "best_rho", "worst_rho", "runs", "evals"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub order: usize,
    pub median_rho: f64,
    pub best_rho: f64,
    pub worst_rho: f64,
    pub runs: usize,
    pub evals: usize,
}

impl From<&DesignOutcome> for SweepRow {
    fn from(o: &DesignOutcome) -> Self {
        Self {
            order: o.order,
            median_rho: o.median_rho,
            best_rho: o.best_rho,
            worst_rho: o.worst_rho(),
            runs: o.per_run_rhos.len(),
            evals: o.evals_used,
        }
    }
}

pub fn rows(sweep: &[DesignOutcome]) -> Vec<SweepRow> {
    sweep.iter().map(SweepRow::from).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.order.to_string(),
            r.median_rho.to_string(),
            r.best_rho.to_string(),
            r.worst_rho.to_string(),
            r.runs.to_string(),
            r.evals.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of ASCII fields")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    max_order: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, order: f64) -> f64 {
        let w = WIDTH - LEFT - RIGHT;
        if self.max_order == 0.0 {
            LEFT + w / 2.0
        } else {
            LEFT + w * order / self.max_order
        }
    }

    fn y(&self, rho: f64) -> f64 {
        let h = HEIGHT - TOP - BOTTOM;
        TOP + h * (1.0 - rho.clamp(0.0, self.y_max) / self.y_max)
    }

    fn points(&self, rows: &[SweepRow], f: impl Fn(&SweepRow) -> f64) -> String {
        rows.iter().map(|r| format!("{:.2},{:.2}", self.x(r.order as f64), self.y(f(r)))).collect::<Vec<_>>().join(" ")
    }
}

/// Line plot of median ρ against order with a shaded min–max band and the
/// best and worst runs as thin lines. Values are clipped at the axis top.
pub fn sweep_svg(title: &str, rows: &[SweepRow]) -> String {
    let finite_max = rows
        .iter()
        .flat_map(|r| [r.median_rho, r.best_rho, r.worst_rho])
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max);
    let y_max = (finite_max * 1.1).min(10.0).max(1.1);
    let frame = Frame { max_order: rows.iter().map(|r| r.order).max().unwrap_or(0) as f64, y_max };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="15" font-family="sans-serif">{}</text>"#, LEFT, escape(title));

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (yb, yt) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{yb}" x2="{x1}" y2="{yb}"/><line x1="{x0}" y1="{yb}" x2="{x0}" y2="{yt}"/></g>"#);
    let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##, y = frame.y(1.0));
    let _ = writeln!(s, r#"<g font-size="11" font-family="sans-serif">"#);
    for r in rows {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, frame.x(r.order as f64), yb + 16.0, r.order);
    }
    for k in 0..=4 {
        let v = frame.y_max * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{:.2}</text>"#, x0 - 6.0, frame.y(v) + 4.0, v);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">FIR order</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">spectral radius</text>"#, (yb + yt) / 2.0, (yb + yt) / 2.0);
    let _ = writeln!(s, "</g>");

    if !rows.is_empty() {
        let upper = frame.points(rows, |r| r.worst_rho);
        let lower: Vec<String> = rows.iter().rev().map(|r| format!("{:.2},{:.2}", frame.x(r.order as f64), frame.y(r.best_rho))).collect();
        let _ = writeln!(s, r##"<polygon class="band" points="{} {}" fill="#4a7ab5" fill-opacity="0.25" stroke="none"/>"##, upper, lower.join(" "));
        let _ = writeln!(s, r##"<polyline class="worst" points="{}" fill="none" stroke="#4a7ab5" stroke-width="1" stroke-dasharray="3 2"/>"##, frame.points(rows, |r| r.worst_rho));
        let _ = writeln!(s, r##"<polyline class="best" points="{}" fill="none" stroke="#4a7ab5" stroke-width="1"/>"##, frame.points(rows, |r| r.best_rho));
        let _ = writeln!(s, r##"<polyline class="median" points="{}" fill="none" stroke="#1b3f73" stroke-width="2.5"/>"##, frame.points(rows, |r| r.median_rho));
    }

    let lx = WIDTH - RIGHT + 15.0;
    let _ = writeln!(s, r#"<g class="legend" font-size="11" font-family="sans-serif">"#);
    let _ = writeln!(s, r##"<rect x="{lx}" y="{}" width="20" height="10" fill="#4a7ab5" fill-opacity="0.25"/><text x="{}" y="{}">min–max band</text>"##, TOP, lx + 26.0, TOP + 9.0);
    let _ = writeln!(s, r##"<rect x="{lx}" y="{}" width="20" height="3" fill="#1b3f73"/><text x="{}" y="{}">median</text>"##, TOP + 22.0, lx + 26.0, TOP + 27.0);
    let _ = writeln!(s, r##"<rect x="{lx}" y="{}" width="20" height="1" fill="#4a7ab5"/><text x="{}" y="{}">best / worst run</text>"##, TOP + 40.0, lx + 26.0, TOP + 44.0);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}
