//! Minimal SVG step plots. Between nodes the curve runs from the value at
//! `x_i` to the left limit at `x_{i+1}`. At a jump the left limit gets an
//! open dot and the càdlàg value a closed one.

use std::fmt::Write as _;

/// One curve: node abscissae with left limits and values (same lengths).
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

pub fn step_svg(title: &str, series: &[Series]) -> String {
    let values = series.iter().flat_map(|s| s.left.iter().chain(&s.right)).copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let (x0, x1) = series
        .iter()
        .flat_map(|s| s.x.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    for (label, y) in [(fmt(lo), lo), (fmt(hi), hi)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{label}</text>"#,
            MARGIN - 4.0,
            fmt(py(y) + 3.0)
        );
    }
    for (label, x) in [(fmt(x0), x0), (fmt(x1), x1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{label}</text>"#,
            fmt(px(x)),
            HEIGHT - MARGIN + 14.0
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        for i in 0..s.x.len().saturating_sub(1) {
            let _ = write!(
                d,
                "M{} {} L{} {} ",
                fmt(px(s.x[i])),
                fmt(py(s.right[i])),
                fmt(px(s.x[i + 1])),
                fmt(py(s.left[i + 1]))
            );
        }
        let _ = writeln!(svg, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_end());
        for i in 0..s.x.len() {
            if s.left[i] != s.right[i] && i + 1 < s.x.len() {
                let (cx, yl, yr) = (fmt(px(s.x[i])), fmt(py(s.left[i])), fmt(py(s.right[i])));
                let _ = writeln!(
                    svg,
                    r#"<line x1="{cx}" y1="{yl}" x2="{cx}" y2="{yr}" stroke="{color}" stroke-dasharray="2,2"/><circle cx="{cx}" cy="{yl}" r="2.5" fill="white" stroke="{color}"/><circle cx="{cx}" cy="{yr}" r="2.5" fill="{color}"/>"#
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 12.0 * k as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
