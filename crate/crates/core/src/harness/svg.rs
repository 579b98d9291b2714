//! Log–log plots of sweep results as standalone SVG.

use std::fmt::Write as _;

use crate::harness::sweep::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn decades(lo: f64, hi: f64) -> Vec<i32> {
    (lo.floor() as i32..=hi.ceil() as i32).collect()
}

/// `|σ|` against scale on log–log axes, one polyline, decade ticks. Rows
/// with negative `σ` are drawn as hollow markers.
pub fn render_svg(rows: &[SweepRow], title: &str) -> String {
    let pts: Vec<(f64, f64, bool)> = rows
        .iter()
        .filter(|r| r.converged() && r.scale > 0.0 && r.sigma != 0.0)
        .map(|r| (r.scale.log10(), r.sigma.abs().log10(), r.sigma < 0.0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
    if pts.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no nonzero converged rows</text>"#, WIDTH / 2.0, HEIGHT / 2.0);
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (xs, ys) = (decades(x0, x1), decades(y0, y1));
    let (x0, x1) = (xs[0] as f64, *xs.last().unwrap() as f64 + if xs.len() == 1 { 1.0 } else { 0.0 });
    let (y0, y1) = (ys[0] as f64, *ys.last().unwrap() as f64 + if ys.len() == 1 { 1.0 } else { 0.0 });
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for d in xs.iter().filter(|&&d| (d as f64) <= x1) {
        let x = px(*d as f64);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, HEIGHT - MARGIN);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    for d in ys.iter().filter(|&&d| (d as f64) <= y1) {
        let y = py(*d as f64);
        let _ = writeln!(out, r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, WIDTH - MARGIN);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, MARGIN - 6.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">scale</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">|sigma|</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let line: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, line.join(" "));
    for &(x, y, negative) in &pts {
        let fill = if negative { "white" } else { "steelblue" };
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="steelblue"/>"#, px(x), py(y));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Method;

    #[test]
    fn renders_every_point() {
        let rows: Vec<SweepRow> = (0..6)
            .map(|k| {
                let scale = 0.5f64.powi(k);
                SweepRow { scale, sigma: -1.0 / scale, residual: 0.0, method: Method::Fem, wall_ms: 0.0 }
            })
            .collect();
        let svg = render_svg(&rows, "a < b");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("a &lt; b"));
    }
}
