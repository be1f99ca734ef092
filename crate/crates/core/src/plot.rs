//! Static SVG log-log plots of decay series against `1 + t`.

use std::fmt::Write as _;

use crate::analysis::{DecaySeries, RateFit};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Renders every positive sample of `series` with the fitted line of the
/// matching entry of `fits` (if any) drawn dashed over its window.
pub fn loglog_svg(title: &str, series: &[DecaySeries], fits: &[Option<RateFit>]) -> String {
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.samples
                .iter()
                .filter(|&&(t, v)| v > 0.0 && v.is_finite() && t > -1.0)
                .map(|&(t, v)| ((1.0 + t).log10(), v.log10()))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // whole decades on both axes
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for d in x0 as i32..=x1 as i32 {
        let x = sx(d as f64);
        let _ = writeln!(svg, r##"<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{}" stroke="#ddd"/>"##, HEIGHT - MARGIN);
        let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, HEIGHT - MARGIN + 16.0);
    }
    for d in y0 as i32..=y1 as i32 {
        let y = sy(d as f64);
        let _ = writeln!(svg, r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, WIDTH - MARGIN);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, MARGIN - 6.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">1 + t</text>"#, WIDTH / 2.0, HEIGHT - 20.0);

    for (i, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        if p.len() > 1 {
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, path.join(" "));
        }
        for &(x, y) in p {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let mut label = format!("{} p={}", s.label, s.p_label());
        if let Some(Some(f)) = fits.get(i) {
            let q = f.log_power.unwrap_or(0.0);
            let line = |t: f64| (f.intercept + f.exponent * (1.0 + t).ln() + q * (3.0 + t).ln().ln()) / std::f64::consts::LN_10;
            let (a, b) = f.window;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                sx((1.0 + a).log10()),
                sy(line(a)),
                sx((1.0 + b).log10()),
                sy(line(b))
            );
            label.push_str(&format!(" slope {:.3}", f.exponent));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit_decay;

    #[test]
    fn renders_points_and_fit() {
        let mut s = DecaySeries::new("u", f64::INFINITY);
        for t in [1.0, 3.0, 7.0, 15.0] {
            s.push(t, 1.0 / (1.0 + t));
        }
        let fit = fit_decay(&s, (1.0, 15.0), None).unwrap();
        let svg = loglog_svg("a < b", &[s], &[Some(fit)]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("slope -1.000"));
    }

    #[test]
    fn empty_series_still_renders() {
        let svg = loglog_svg("empty", &[DecaySeries::new("e", 2.0)], &[]);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
