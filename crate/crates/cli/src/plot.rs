//! Minimal SVG line charts for sweep results.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use crate::sweep::{Column, PlotSpec, SweepResult};

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Svg,
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Curve {
    name: String,
    points: Vec<(f64, f64)>,
}

fn curves(result: &SweepResult) -> Result<Vec<Curve>> {
    let spec = &result.plot;
    let xi = result
        .column_index(&spec.x)
        .ok_or_else(|| anyhow!("missing x column {}", spec.x))?;
    let series_i = match &spec.series {
        Some(s) => Some(result.column_index(s).ok_or_else(|| anyhow!("missing series column {s}"))?),
        None => None,
    };
    let mut keys: Vec<f64> = Vec::new();
    if let Some(si) = series_i {
        for r in &result.rows {
            if !keys.contains(&r[si]) {
                keys.push(r[si]);
            }
        }
    } else {
        keys.push(f64::NAN);
    }
    let mut out = Vec::new();
    for key in &keys {
        for y in &spec.y {
            let yi = result.column_index(y).ok_or_else(|| anyhow!("missing y column {y}"))?;
            let points = result
                .rows
                .iter()
                .filter(|r| series_i.is_none_or(|si| r[si] == *key))
                .map(|r| (r[xi], r[yi]))
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!spec.x_log || *x > 0.0))
                .collect();
            let name = match &spec.series {
                Some(s) => format!("{y}, {s}={}", label(*key)),
                None => y.clone(),
            };
            out.push(Curve { name, points });
        }
    }
    Ok(out)
}

/// Renders every `y` column of the result against `x`.
pub fn render_svg(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        bail!("cannot plot an empty result");
    }
    let spec = &result.plot;
    let curves = curves(result)?;
    let all: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.points.iter().copied()).collect();
    if all.is_empty() {
        bail!("no finite points to plot");
    }
    let tx = |x: f64| if spec.x_log { x.log10() } else { x };
    let (mut x0, mut x1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(tx(p.0)), b.max(tx(p.0))));
    let (mut y0, mut y1) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#)?;
    writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )?;
    let xt: Vec<f64> = if spec.x_log {
        ticks(x0, x1, 6).into_iter().filter(|t| t.fract() == 0.0).map(|t| 10f64.powf(t)).collect()
    } else {
        ticks(x0, x1, 6)
    };
    for t in xt {
        let x = sx(t);
        writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            label(t)
        )?;
    }
    for t in ticks(y0, y1, 6) {
        let y = sy(t);
        writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            label(t)
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(&spec.x_label)
    )?;
    writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    )?;
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = c.points.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )?;
        let ly = TOP + 10.0 + 16.0 * i as f64;
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 35.0,
            ly + 4.0,
            escape(&c.name)
        )?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Deserialize)]
struct Meta {
    sweep: String,
    columns: Vec<Column>,
    plot: PlotSpec,
}

/// Rebuilds a result from `<stem>.csv` and its `<stem>.json` metadata.
pub fn load_result(csv_path: &Path) -> Result<SweepResult> {
    let meta_path = csv_path.with_extension("json");
    let meta: Meta = serde_json::from_str(
        &std::fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?,
    )
    .with_context(|| format!("parsing {}", meta_path.display()))?;
    let sweep = crate::config::SweepVariable::ALL
        .into_iter()
        .find(|v| v.name() == meta.sweep)
        .ok_or_else(|| anyhow!("unknown sweep {}", meta.sweep))?;
    let mut reader = csv::Reader::from_path(csv_path).with_context(|| format!("reading {}", csv_path.display()))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows.push(rec.iter().map(|v| v.parse::<f64>()).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(SweepResult {
        sweep,
        columns: meta.columns,
        rows,
        plot: meta.plot,
        warnings: Vec::new(),
    })
}

pub fn emit_plot(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Svg => {
            std::fs::write(path, render_svg(result)?).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepVariable;

    fn result(rows: Vec<Vec<f64>>) -> SweepResult {
        SweepResult {
            sweep: SweepVariable::Pon,
            columns: vec![
                Column {
                    name: "p_on".into(),
                    unit: "probability".into(),
                },
                Column {
                    name: "ec".into(),
                    unit: "bit/s/Hz".into(),
                },
            ],
            rows,
            plot: PlotSpec {
                x: "p_on".into(),
                y: vec!["ec".into()],
                series: None,
                x_log: false,
                x_label: "P_ON".into(),
                y_label: "EC".into(),
            },
            warnings: vec![],
        }
    }

    #[test]
    fn renders_and_is_deterministic() {
        let r = result((0..5).map(|i| vec![i as f64 / 4.0, i as f64]).collect());
        let a = render_svg(&r).unwrap();
        assert!(a.starts_with("<svg") && a.contains("polyline"));
        assert_eq!(a, render_svg(&r).unwrap());
    }

    #[test]
    fn empty_is_an_error() {
        assert!(render_svg(&result(vec![])).is_err());
    }

    #[test]
    fn tick_spacing() {
        assert_eq!(ticks(0.0, 1.0, 5), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(ticks(-2.0, 1.0, 6).len(), 7);
    }
}
