//! Minimal deterministic SVG line plots and heatmaps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Row-major values, `values[j * nx + i]`, drawn with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    Lines(LinePlot),
    Heat(Heatmap),
}

fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("{what}[{i}] = {}", v[i]))),
        None => Ok(()),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn render_lines(p: &LinePlot) -> Result<String> {
    for s in &p.series {
        if s.x.len() != s.y.len() {
            return Err(Error::InvalidParams(format!(
                "series '{}' has {} x values and {} y values",
                s.label,
                s.x.len(),
                s.y.len()
            )));
        }
        check_finite(&format!("{}.x", s.label), &s.x)?;
        check_finite(&format!("{}.y", s.label), &s.y)?;
    }
    let (x0, x1) = bounds(p.series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = bounds(p.series.iter().flat_map(|s| s.y.iter().copied()));
    let (pw, ph) = (W - 2.0 * MARGIN, H - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, &p.title);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{xv:.4e}</text>"#,
            px(xv),
            H - MARGIN + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{yv:.4e}</text>"#,
            MARGIN - 4.0,
            py(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(&p.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&p.y_label)
    );
    for (n, s) in p.series.iter().enumerate() {
        if s.x.is_empty() {
            continue;
        }
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = s.x.iter().zip(&s.y).map(|(&x, &y)| format!("{:.3},{:.3}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (n + 1) as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Gray level 0..=255 for each cell, darkest at the minimum.
pub fn heatmap_levels(h: &Heatmap) -> Result<Vec<u8>> {
    if h.values.len() != h.nx * h.ny {
        return Err(Error::InvalidParams(format!(
            "heatmap holds {} values, expected {} x {}",
            h.values.len(),
            h.nx,
            h.ny
        )));
    }
    check_finite(&h.title, &h.values)?;
    let (lo, hi) = bounds(h.values.iter().copied());
    Ok(h.values.iter().map(|&v| (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8).collect())
}

fn render_heat(h: &Heatmap) -> Result<String> {
    let levels = heatmap_levels(h)?;
    let mut out = String::new();
    header(&mut out, &h.title);
    if h.nx == 0 || h.ny == 0 {
        out.push_str("</svg>\n");
        return Ok(out);
    }
    let (cw, ch) = ((W - 2.0 * MARGIN) / h.nx as f64, (H - 2.0 * MARGIN) / h.ny as f64);
    for j in 0..h.ny {
        for i in 0..h.nx {
            let g = levels[j * h.nx + i];
            let _ = writeln!(
                out,
                r##"<rect x="{:.4}" y="{:.4}" width="{cw:.4}" height="{ch:.4}" fill="#{g:02x}{g:02x}{g:02x}"/>"##,
                MARGIN + i as f64 * cw,
                MARGIN + j as f64 * ch
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn svg_string(fig: &Figure) -> Result<String> {
    match fig {
        Figure::Lines(p) => render_lines(p),
        Figure::Heat(h) => render_heat(h),
    }
}

/// Writes nothing when the data are rejected.
pub fn render_svg(fig: &Figure, path: &Path) -> Result<()> {
    let s = svg_string(fig)?;
    fs::write(path, s)?;
    Ok(())
}
