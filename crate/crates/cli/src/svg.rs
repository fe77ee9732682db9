//! Minimal SVG 1.1 line plots.

use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(t: f64) -> String {
    format!("{}", (t * 1e9).round() / 1e9)
}

/// Plots the series; the y axis switches to log scale when the data spans
/// more than a factor of 30 and is positive.
pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite())
    };
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let log_y = y0 > 0.0 && y1 / y0 > 30.0;
    let fy = |y: f64| if log_y { y.log10() } else { y };
    let (mut ly0, mut ly1) = (fy(y0), fy(y1));
    if ly1 <= ly0 {
        ly0 -= 0.5;
        ly1 += 0.5;
    }
    let pad = 0.05 * (ly1 - ly0);
    ly0 -= pad;
    ly1 += pad;

    let (ml, mr, mt, mb) = MARGIN;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (WIDTH - ml - mr);
    let py = |y: f64| HEIGHT - mb - (fy(y) - ly0) / (ly1 - ly0) * (HEIGHT - mt - mb);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<title>{title}</title>
<rect width="100%" height="100%" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<path d="M{ml},{mt} V{} H{}" fill="none" stroke="black"/>"#,
        HEIGHT - mb,
        WIDTH - mr
    );
    for t in nice_ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{0}" x2="{x:.2}" y2="{1}" stroke="black"/><text x="{x:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
            HEIGHT - mb,
            HEIGHT - mb + 5.0,
            HEIGHT - mb + 18.0,
            label(t)
        );
    }
    let y_ticks: Vec<(f64, String)> = if log_y {
        (ly0.ceil() as i64..=ly1.floor() as i64)
            .map(|k| (10f64.powi(k as i32), format!("1e{k}")))
            .collect()
    } else {
        nice_ticks(ly0, ly1)
            .into_iter()
            .map(|t| (t, label(t)))
            .collect()
    };
    for (t, label) in y_ticks {
        let y = py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{y:.2}" x2="{ml}" y2="{y:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{label}</text>"#,
            ml - 5.0,
            ml - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (ml + WIDTH - mr) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{0}" text-anchor="middle" transform="rotate(-90 15 {0})">{y_label}</text>"#,
        (mt + HEIGHT - mb) / 2.0
    );

    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let visible: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite() && (!log_y || p.1 > 0.0))
            .collect();
        match s.style {
            Style::Line => {
                let coords: Vec<String> = visible
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
            Style::Markers => {
                for &(x, y) in &visible {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="{colour}"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
        }
        let ly = mt + 14.0 * k as f64 + 10.0;
        let _ = writeln!(
            out,
            r#"<text x="{0}" y="{ly}" fill="{colour}">{1}</text>"#,
            WIDTH - mr - 150.0,
            s.name
        );
    }
    out.push_str("</svg>\n");
    out
}
