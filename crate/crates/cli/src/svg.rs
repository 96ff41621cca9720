//! Static SVG line chart for rewiring sweeps: observed value (red)
//! against the rewired-sample mean with a ±1 std band (blue). No
//! external services or crates involved.

pub struct SweepPoint {
    pub epochs: usize,
    pub observed: f64,
    pub mean: f64,
    pub std: f64,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

pub fn sweep_chart(title: &str, y_label: &str, points: &[SweepPoint]) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.epochs as f64).collect();
    let mut ys: Vec<f64> = Vec::new();
    for p in points {
        ys.push(p.observed);
        ys.push(p.mean - p.std);
        ys.push(p.mean + p.std);
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min).max(1e-12) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y_min) / (y_max - y_min).max(1e-12) * (H - 2.0 * MARGIN);

    let polyline = |get: &dyn Fn(&SweepPoint) -> f64| -> String {
        points
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.epochs as f64), sy(get(p))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let band: String = {
        let upper: Vec<String> = points
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.epochs as f64), sy(p.mean + p.std)))
            .collect();
        let lower: Vec<String> = points
            .iter()
            .rev()
            .map(|p| format!("{:.2},{:.2}", sx(p.epochs as f64), sy(p.mean - p.std)))
            .collect();
        [upper, lower].concat().join(" ")
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    ));
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push_str(&format!(
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    ));
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">rewiring epochs</text>"#,
        W / 2.0,
        H - 16.0
    ));
    svg.push_str(&format!(
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    ));
    for (v, x_axis) in [(x_min, true), (x_max, true), (y_min, false), (y_max, false)] {
        let (x, y, anchor) = if x_axis {
            (sx(v), H - MARGIN + 16.0, "middle")
        } else {
            (MARGIN - 6.0, sy(v) + 4.0, "end")
        };
        svg.push_str(&format!(
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.4}</text>"#
        ));
    }
    // Rewired mean ± std band and line.
    svg.push_str(&format!(
        r##"<polygon points="{band}" fill="#4a7dbf" fill-opacity="0.2" stroke="none"/>"##
    ));
    svg.push_str(&format!(
        r##"<polyline points="{}" fill="none" stroke="#4a7dbf" stroke-width="2"/>"##,
        polyline(&|p| p.mean)
    ));
    // Observed line.
    svg.push_str(&format!(
        r##"<polyline points="{}" fill="none" stroke="#c23b3b" stroke-width="2"/>"##,
        polyline(&|p| p.observed)
    ));
    // Legend.
    svg.push_str(&format!(
        r##"<rect x="{x}" y="36" width="12" height="3" fill="#c23b3b"/><text x="{tx}" y="42" font-family="sans-serif" font-size="11">observed</text>"##,
        x = W - 180.0,
        tx = W - 162.0
    ));
    svg.push_str(&format!(
        r##"<rect x="{x}" y="52" width="12" height="3" fill="#4a7dbf"/><text x="{tx}" y="58" font-family="sans-serif" font-size="11">rewired mean ± std</text>"##,
        x = W - 180.0,
        tx = W - 162.0
    ));
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        (min - 0.5, max + 0.5)
    } else {
        (min, max)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
