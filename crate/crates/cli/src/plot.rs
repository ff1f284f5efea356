//! Static vector-graphics figures: coefficient paths across the penalty
//! grid and the cross-validation error curve. Plain hand-assembled SVG
//! text, deterministic for fixed inputs.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 48.0;

const PALETTE: [&str; 10] = [
    "#3366cc", "#dc3912", "#ff9900", "#109618", "#990099", "#0099c6", "#dd4477", "#66aa00",
    "#b82e2e", "#316395",
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn fmt_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (0.01..1000.0).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         fill=\"white\"/>\n<text x=\"{:.1}\" y=\"16\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"13\">{title}</text>\n",
        WIDTH / 2.0
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = LEFT;
    let x1 = WIDTH - RIGHT;
    let y0 = HEIGHT - BOTTOM;
    let y1 = TOP;
    let _ = write!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let px = frame.x(fx);
        let _ = write!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{y0}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            fmt_value(fx)
        );
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let py = frame.y(fy);
        let _ = write!(
            out,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            fmt_value(fy)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\">{x_label}</text>\n\
         <text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" transform=\"rotate(-90 14 {:.1})\">{y_label}</text>\n",
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
    );
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    if points.is_empty() {
        return;
    }
    let mut coords = String::new();
    for (x, y) in points {
        let _ = write!(coords, "{x:.2},{y:.2} ");
    }
    let dash = if dashed { " stroke-dasharray=\"5,4\"" } else { "" };
    let _ = write!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.3\"{dash}/>\n",
        coords.trim_end()
    );
}

/// Coefficient trajectories against log penalty, one line per coefficient,
/// colored by group.
pub fn coefficient_paths_svg(
    lambdas: &[f64],
    coefficients: &[Vec<f64>],
    group_of: &[usize],
) -> String {
    let log_lam: Vec<f64> = lambdas.iter().map(|&l| l.max(1e-300).ln()).collect();
    let x_min = log_lam.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = log_lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = 0.0f64;
    let mut y_max = 0.0f64;
    for row in coefficients {
        for &v in row {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let frame = Frame::new(x_min, x_max, y_min, y_max);
    let mut out = String::new();
    open_svg(&mut out, "Coefficient paths");
    axes(&mut out, &frame, "log lambda", "coefficient");
    let zero_y = frame.y(0.0);
    let _ = write!(
        out,
        "<line x1=\"{LEFT}\" y1=\"{zero_y:.1}\" x2=\"{:.1}\" y2=\"{zero_y:.1}\" \
         stroke=\"#cccccc\"/>\n",
        WIDTH - RIGHT
    );
    let p = group_of.len();
    for c in 0..p {
        let points: Vec<(f64, f64)> = log_lam
            .iter()
            .zip(coefficients.iter())
            .map(|(&x, row)| (frame.x(x), frame.y(row[c])))
            .collect();
        polyline(&mut out, &points, PALETTE[group_of[c] % PALETTE.len()], false);
    }
    out.push_str("</svg>\n");
    out
}

/// Cross-validation error against log penalty with one-standard-error
/// whiskers and a marker at the selected level.
pub fn cv_curve_svg(lambdas: &[f64], cve: &[f64], cvse: &[f64], min_index: usize) -> String {
    let log_lam: Vec<f64> = lambdas.iter().map(|&l| l.max(1e-300).ln()).collect();
    let x_min = log_lam.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = log_lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for i in 0..cve.len() {
        y_min = y_min.min(cve[i] - cvse[i]);
        y_max = y_max.max(cve[i] + cvse[i]);
    }
    let frame = Frame::new(x_min, x_max, y_min, y_max);
    let mut out = String::new();
    open_svg(&mut out, "Cross-validation error");
    axes(&mut out, &frame, "log lambda", "cv error");
    for i in 0..cve.len() {
        let px = frame.x(log_lam[i]);
        let lo = frame.y(cve[i] - cvse[i]);
        let hi = frame.y(cve[i] + cvse[i]);
        let _ = write!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{lo:.2}\" x2=\"{px:.2}\" y2=\"{hi:.2}\" \
             stroke=\"#999999\"/>\n"
        );
    }
    let points: Vec<(f64, f64)> = log_lam
        .iter()
        .zip(cve.iter())
        .map(|(&x, &y)| (frame.x(x), frame.y(y)))
        .collect();
    polyline(&mut out, &points, PALETTE[0], false);
    for (x, y) in &points {
        let _ = write!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.2\" fill=\"{}\"/>\n",
            PALETTE[0]
        );
    }
    let sel_x = frame.x(log_lam[min_index]);
    polyline(
        &mut out,
        &[(sel_x, frame.y(frame.y_min)), (sel_x, frame.y(frame.y_max))],
        PALETTE[1],
        true,
    );
    out.push_str("</svg>\n");
    out
}
