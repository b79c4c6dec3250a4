//! Deterministic SVG plots of grid CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{ExpError, Result};
use crate::grid::{reference_curves, CSV_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Cells in the (resource, samples) plane, reliable ones filled, with the
    /// reference trade-off curves dashed.
    Frontier,
    /// Error rate with its Wilson interval against the swept resource.
    ErrorVsResource,
}

impl FromStr for PlotKind {
    type Err = ExpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frontier" => Ok(PlotKind::Frontier),
            "error-vs-resource" => Ok(PlotKind::ErrorVsResource),
            _ => Err(ExpError::Usage(format!("unknown plot kind `{s}`"))),
        }
    }
}

/// The columns of a grid CSV that plots use.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub tester: String,
    pub n: usize,
    pub eps: f64,
    pub ell: Option<f64>,
    pub mem_bits: Option<f64>,
    pub buckets: Option<f64>,
    pub instance: String,
    pub err_rate: f64,
    pub err_lo: f64,
    pub err_hi: f64,
    pub mean_samples: f64,
    pub is_reliable: bool,
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    rec[i]
        .parse()
        .map_err(|_| ExpError::Format(format!("line {line}: bad {} `{}`", CSV_HEADER[i], &rec[i])))
}

fn opt_field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<Option<f64>> {
    if rec[i].is_empty() {
        Ok(None)
    } else {
        field(rec, i, line).map(Some)
    }
}

/// Parses a grid CSV; the header must match exactly.
pub fn parse_grid_csv(text: &str) -> Result<Vec<GridRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(ExpError::Format(format!(
            "header `{}` does not match the grid schema",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        rows.push(GridRow {
            tester: rec[0].to_string(),
            n: field(&rec, 1, line)?,
            eps: field(&rec, 2, line)?,
            ell: opt_field(&rec, 3, line)?,
            mem_bits: opt_field(&rec, 4, line)?,
            buckets: opt_field(&rec, 5, line)?,
            instance: rec[8].to_string(),
            err_rate: field(&rec, 11, line)?,
            err_lo: field(&rec, 12, line)?,
            err_hi: field(&rec, 13, line)?,
            mean_samples: field(&rec, 14, line)?,
            is_reliable: field(&rec, 18, line)?,
        });
    }
    Ok(rows)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const DASH: &str = "6 4";

#[derive(Clone, Copy, Debug)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 1.0, hi: 10.0, log };
        }
        if log {
            Axis {
                lo: lo / 1.5,
                hi: hi * 1.5,
                log,
            }
        } else {
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
            Axis {
                lo: lo - pad,
                hi: hi + pad,
                log,
            }
        }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log2().ceil() as i32, self.hi.log2().floor() as i32);
            let step = ((b - a) / 8 + 1).max(1);
            (a..=b).step_by(step as usize).map(|e| 2f64.powi(e)).collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(raw);
            let start = (self.lo / step).ceil() as i64;
            let end = (self.hi / step).floor() as i64;
            (start..=end).map(|i| i as f64 * step).collect()
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else if (1e-3..1e6).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Canvas {
    out: String,
    x: Axis,
    y: Axis,
}

impl Canvas {
    fn new(x: Axis, y: Axis, title: &str, x_label: &str, y_label: &str) -> Self {
        let mut out = String::new();
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#).unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
        let mut c = Canvas { out, x, y };
        c.axes(x_label, y_label);
        c
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + self.x.frac(v) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.frac(v) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let o = &mut self.out;
        writeln!(o, r#"<g class="axes" stroke="black" fill="none">"#).unwrap();
        writeln!(o, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#).unwrap();
        writeln!(o, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#).unwrap();
        o.push_str("</g>\n");
        let xt: Vec<(f64, String)> = self.x.ticks().into_iter().map(|t| (self.px(t), tick_label(t))).collect();
        let yt: Vec<(f64, String)> = self.y.ticks().into_iter().map(|t| (self.py(t), tick_label(t))).collect();
        let o = &mut self.out;
        o.push_str("<g class=\"ticks\">\n");
        for (p, label) in xt {
            writeln!(o, r#"<line x1="{p:.2}" y1="{y0}" x2="{p:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0).unwrap();
            writeln!(o, r#"<text x="{p:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, y0 + 20.0).unwrap();
        }
        for (p, label) in yt {
            writeln!(o, r#"<line x1="{:.2}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
            writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 8.0, p + 4.0).unwrap();
        }
        o.push_str("</g>\n");
        writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            o,
            r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            escape(y_label)
        )
        .unwrap();
    }

    fn polyline(&mut self, class: &str, points: &[(f64, f64)], color: &str, dashed: bool) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed { format!(r#" stroke-dasharray="{DASH}""#) } else { String::new() };
        writeln!(
            self.out,
            r#"<polyline class="{class}" clip-path="url(#plot-area)" points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    fn marker(&mut self, x: f64, y: f64, color: &str, filled: bool, title: &str) {
        let fill = if filled { color } else { "white" };
        writeln!(
            self.out,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="5" fill="{fill}" stroke="{color}" stroke-width="1.5"><title>{}</title></circle>"#,
            self.px(x),
            self.py(y),
            escape(title)
        )
        .unwrap();
    }

    fn legend(&mut self, entries: &[(String, &str, bool)]) {
        self.out.push_str("<g class=\"legend\">\n");
        for (i, (label, color, dashed)) in entries.iter().enumerate() {
            let y = TOP + 12.0 + 16.0 * i as f64;
            let x = WIDTH - RIGHT - 170.0;
            let dash = if *dashed { format!(r#" stroke-dasharray="{DASH}""#) } else { String::new() };
            writeln!(
                self.out,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 24.0,
                x + 30.0,
                y + 4.0,
                escape(label)
            )
            .unwrap();
        }
        self.out.push_str("</g>\n");
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// The memory-like column the rows sweep: mem_bits, then buckets, then ell.
fn resource(rows: &[GridRow]) -> Option<(&'static str, fn(&GridRow) -> Option<f64>)> {
    let candidates: [(&'static str, fn(&GridRow) -> Option<f64>); 3] = [
        ("memory bits", |r| r.mem_bits),
        ("buckets", |r| r.buckets),
        ("samples per player", |r| r.ell),
    ];
    candidates.into_iter().find(|(_, f)| rows.iter().all(|r| f(r).is_some()))
}

fn frontier(rows: &[GridRow], log: bool) -> Result<String> {
    let (x_name, get_x) = match resource(rows) {
        Some(r) => r,
        None if rows.is_empty() => ("resource", (|_: &GridRow| None) as fn(&GridRow) -> Option<f64>),
        None => {
            return Err(ExpError::Format(
                "frontier plots need a mem_bits, buckets or ell value on every row".into(),
            ))
        }
    };
    // A cell is reliable only if every row for it (one per instance) is.
    let mut cells: BTreeMap<(u64, u64), (f64, f64, bool)> = BTreeMap::new();
    for r in rows {
        let x = get_x(r).expect("checked above");
        let key = (x.to_bits(), r.mean_samples.round() as u64);
        let e = cells.entry(key).or_insert((x, r.mean_samples.round(), true));
        e.2 &= r.is_reliable;
    }
    let x = Axis::fit(cells.values().map(|c| c.0), log);
    let y = Axis::fit(cells.values().map(|c| c.1), log);
    let title = rows.first().map_or_else(
        || "trade-off frontier".to_string(),
        |r| format!("{}: n = {}, eps = {}", r.tester, r.n, r.eps),
    );
    let mut c = Canvas::new(x, y, &title, x_name, "samples");
    let mut legend = Vec::new();
    if let Some(first) = rows.first() {
        for (i, curve) in reference_curves(first.n, first.eps).iter().enumerate() {
            let color = PALETTE[2 + i];
            let pts: Vec<(f64, f64)> = (0..=64)
                .map(|k| {
                    let f = k as f64 / 64.0;
                    let xv = if x.log {
                        (x.lo.ln() + f * (x.hi.ln() - x.lo.ln())).exp()
                    } else {
                        x.lo + f * (x.hi - x.lo)
                    };
                    (xv, curve.product / xv)
                })
                .filter(|(xv, _)| *xv > 0.0)
                .collect();
            c.polyline("reference", &pts, color, true);
            legend.push((format!("k m = {}", curve.name), color, true));
        }
    }
    let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &(xv, yv, ok) in cells.values() {
        if ok {
            let e = best.entry(xv.to_bits()).or_insert((xv, yv));
            e.1 = e.1.min(yv);
        }
    }
    let mut frontier: Vec<(f64, f64)> = best.into_values().collect();
    frontier.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !frontier.is_empty() {
        c.polyline("frontier", &frontier, PALETTE[0], false);
        legend.push(("least reliable sample count".into(), PALETTE[0], false));
    }
    for &(xv, yv, ok) in cells.values() {
        let label = format!("{x_name} {xv}, samples {yv}: {}", if ok { "reliable" } else { "unreliable" });
        c.marker(xv, yv, PALETTE[if ok { 0 } else { 1 }], ok, &label);
    }
    c.legend(&legend);
    Ok(c.finish())
}

fn error_vs_resource(rows: &[GridRow], log: bool) -> Result<String> {
    // Plot against the memory-like column when it varies, else samples.
    let (x_name, get_x): (&str, fn(&GridRow) -> f64) = match resource(rows) {
        Some((name, f)) if rows.iter().any(|r| f(r) != f(&rows[0])) => match name {
            "memory bits" => (name, |r| r.mem_bits.unwrap()),
            "buckets" => (name, |r| r.buckets.unwrap()),
            _ => (name, |r| r.ell.unwrap()),
        },
        _ => ("samples", |r| r.mean_samples),
    };
    let x = Axis::fit(rows.iter().map(get_x), log);
    let y = Axis {
        lo: 0.0,
        hi: 1.0,
        log: false,
    };
    let title = rows.first().map_or_else(
        || "error rate".to_string(),
        |r| format!("{}: n = {}, eps = {}", r.tester, r.n, r.eps),
    );
    let mut c = Canvas::new(x, y, &title, x_name, "error rate");
    c.polyline("reference", &[(x.lo, 1.0 / 3.0), (x.hi, 1.0 / 3.0)], "gray", true);
    let mut legend = vec![("error 1/3".to_string(), "gray", true)];
    let mut series: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).collect();
    series.sort_unstable();
    series.dedup();
    for (i, inst) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        legend.push((inst.to_string(), color, false));
        let mut pts: Vec<&GridRow> = rows.iter().filter(|r| r.instance == *inst).collect();
        pts.sort_by(|a, b| get_x(a).total_cmp(&get_x(b)));
        for r in pts {
            let (px, lo, hi) = (c.px(get_x(r)), c.py(r.err_lo), c.py(r.err_hi));
            writeln!(
                c.out,
                r#"<line class="interval" x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="{color}"/>"#
            )
            .unwrap();
            let label = format!("{inst}, {x_name} {}: error {:.4}", get_x(r), r.err_rate);
            c.marker(get_x(r), r.err_rate, color, r.is_reliable, &label);
        }
    }
    c.legend(&legend);
    Ok(c.finish())
}

/// Renders `rows` with default scales: log-log for frontiers, log x for
/// error plots.
pub fn emit_plot(csv: &str, kind: PlotKind) -> Result<String> {
    render(&parse_grid_csv(csv)?, kind, true)
}

pub fn render(rows: &[GridRow], kind: PlotKind, log: bool) -> Result<String> {
    match kind {
        PlotKind::Frontier => frontier(rows, log),
        PlotKind::ErrorVsResource => error_vs_resource(rows, log),
    }
}
