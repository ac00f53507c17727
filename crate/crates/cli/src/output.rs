//! CSV, SVG and run-record writers. Data files are byte-deterministic:
//! fixed 12-significant-digit formatting, `,` separators, LF line endings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nmq_core::entanglement::{EntanglementEvent, EventKind};
use nmq_core::simulation::SimulationResult;
use serde::Serialize;

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t,a,b,c,d,Re(f),Im(f),concurrence,precursor,eof";
pub const EVENTS_HEADER: &str = "kind,time,reduced_precision";
pub const SUMMARY_HEADER: &str =
    "omega1,omega2,omega3,omega4,alpha1,alpha2,gamma,nbar,final_death,revivals,integrated_concurrence";

/// Twelve significant digits in scientific notation; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

pub fn trajectory_csv(result: &SimulationResult) -> String {
    let mut out = String::with_capacity(result.states.len() * 200);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    let s = &result.series;
    for (i, (t, x)) in result
        .grid()
        .points()
        .iter()
        .zip(&result.states)
        .enumerate()
    {
        let row = [
            *t,
            x.a,
            x.b,
            x.c,
            x.d,
            x.f.re,
            x.f.im,
            s.concurrence[i],
            s.precursor[i],
            s.eof[i],
        ];
        let fields: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn events_csv(events: &[EntanglementEvent]) -> String {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{}",
            e.kind.name(),
            fmt_num(e.time),
            e.reduced_precision
        );
    }
    out
}

/// One summary row: parameters, final-death time (or `none`), number of
/// revivals and `∫C dt`.
pub fn summary_row(result: &SimulationResult, events: &[EntanglementEvent]) -> String {
    let p = &result.params;
    let mut fields: Vec<String> = p
        .omegas()
        .iter()
        .chain(p.alphas().iter())
        .chain([p.gamma(), p.nbar()].iter())
        .map(|&v| fmt_num(v))
        .collect();
    fields.push(
        events
            .iter()
            .find(|e| e.kind == EventKind::FinalDeath)
            .map_or_else(|| "none".to_string(), |e| fmt_num(e.time)),
    );
    fields.push(
        events
            .iter()
            .filter(|e| e.kind == EventKind::Revival)
            .count()
            .to_string(),
    );
    fields.push(fmt_num(result.series.integrated_concurrence()));
    fields.join(",")
}

pub fn summary_csv<'a>(rows: impl IntoIterator<Item = &'a String>) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

/// Line chart of concurrence and precursor against time.
pub fn concurrence_svg(result: &SimulationResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;
    let t = result.grid().points();
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let series = [
        ("concurrence", &result.series.concurrence, "#1f77b4"),
        ("precursor", &result.series.precursor, "#d62728"),
    ];
    let lo = series
        .iter()
        .flat_map(|s| s.1.iter())
        .fold(0.0f64, |a, &b| a.min(b));
    let hi = series
        .iter()
        .flat_map(|s| s.1.iter())
        .fold(1.0f64, |a, &b| a.max(b));
    let span_t = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |v: f64| M + (v - t0) / span_t * (W - 2.0 * M);
    let y = |v: f64| H - M - (v - lo) / (hi - lo) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{M}" y1="{y0:.2}" x2="{}" y2="{y0:.2}" stroke="gray" stroke-dasharray="4 4"/>"#,
        W - M,
        y0 = y(0.0)
    );
    for (i, (name, vals, color)) in series.iter().enumerate() {
        let pts: Vec<String> = t
            .iter()
            .zip(vals.iter())
            .map(|(&ti, &vi)| format!("{:.2},{:.2}", x(ti), y(vi)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            W - M - 90.0,
            M + 16.0 * (i as f64 + 1.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{M}" y="{}" font-size="12">t = {t0}</text><text x="{}" y="{}" font-size="12" text-anchor="end">t = {t1}</text>"#,
        H - M + 16.0,
        W - M,
        H - M + 16.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Provenance of one run, written next to the data files.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario_hash: String,
    pub tool_version: String,
    pub timestamp: u64,
    pub outputs: Vec<String>,
}

impl RunRecord {
    pub fn new(scenario_hash: String, outputs: &[PathBuf]) -> Self {
        Self {
            scenario_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run record serializes")
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
