//! Minimal SVG line charts for convergence tables — no drawing dependency,
//! byte-deterministic output.

use std::fmt::Write as _;

use crate::error::{LabError, Result};

/// One named polyline.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 5] = ["#1f6fb2", "#c94f2a", "#2a8a4a", "#7b4fc9", "#996a00"];

/// Render series as an SVG line chart. Log axes reject non-positive values.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_x: bool,
    log_y: bool,
) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(LabError::Config("chart needs at least one data point".into()));
    }
    let map = |v: f64, log: bool, axis: &str| -> Result<f64> {
        if !v.is_finite() {
            return Err(LabError::NonFinite { op: "line_chart" });
        }
        if log {
            if v <= 0.0 {
                return Err(LabError::Config(format!(
                    "log-scaled {axis} axis requires positive values, got {v}"
                )));
            }
            Ok(v.log10())
        } else {
            Ok(v)
        }
    };

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(map(x, log_x, "x")?);
            ys.push(map(y, log_y, "y")?);
        }
    }
    let (mut x0, mut x1) = min_max(&xs);
    let (mut y0, mut y1) = min_max(&ys);
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);
    let unmap = |t: f64, log: bool| if log { 10f64.powf(t) } else { t };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    );
    let _ = write!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );

    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{MARGIN_L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B,
        HEIGHT - MARGIN_B
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.4e}</text>\n",
            px(xv),
            HEIGHT - MARGIN_B + 18.0,
            unmap(xv, log_x)
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{:.4e}</text>\n",
            MARGIN_L - 6.0,
            py(yv) + 4.0,
            unmap(yv, log_y)
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            let (mx, my) = (map(x, log_x, "x")?, map(y, log_y, "y")?);
            let _ = write!(path, "{:.2},{:.2} ", px(mx), py(my));
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(mx),
                py(my)
            );
        }
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.trim_end()
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN_R - 150.0,
            MARGIN_T + 16.0 * si as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn min_max(vs: &[f64]) -> (f64, f64) {
    vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
