//! Static SVG plots, hand-assembled. Coordinates are rounded to 0.01 px,
//! so a plot is a pure function of its inputs.

use clt_lab_core::montecarlo::{Histogram, HISTOGRAM_BINS, HISTOGRAM_HI, HISTOGRAM_LO};
use clt_lab_core::numeric::normal_pdf;

use crate::reports::SweepRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 56.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct Frame {
    svg: String,
}

impl Frame {
    fn new(title: &str) -> Self {
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
        );
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            px(WIDTH / 2.0),
            title
        ));
        Frame { svg }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        self.svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"{}/>\n",
            px(x1),
            px(y1),
            px(x2),
            px(y2),
            stroke,
            extra
        ));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, body: &str) {
        self.svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{body}</text>\n",
            px(x),
            px(y)
        ));
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// Pixel positions of the plot area.
fn plot_area() -> (f64, f64, f64, f64) {
    (
        MARGIN_L,
        MARGIN_T,
        WIDTH - MARGIN_R - MARGIN_L,
        HEIGHT - MARGIN_T - MARGIN_B,
    )
}

/// Log-log chart of the empirical distance and the certified upper bound
/// against kappa = sigma / ||a||_2.
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    let mut frame = Frame::new("Kolmogorov distance vs kappa (log-log)");
    let (x0, y0, pw, ph) = plot_area();
    if rows.is_empty() {
        frame.text(x0 + pw / 2.0, y0 + ph / 2.0, "middle", "no rows");
        return frame.finish();
    }

    let log10 = |v: f64| v.log10();
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for r in rows {
        xs.push(log10(r.kappa));
        // Distances can be tiny but are never zero (empirical sup is at
        // least 1/2N, the chain carries 24/T); floor defensively anyway.
        ys.push(log10(r.ks_empirical.max(1e-12)));
        ys.push(log10(r.ks_upper.max(1e-12)));
        if let Some(e) = r.ks_exact {
            ys.push(log10(e.max(1e-12)));
        }
    }
    let bounds = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo {
            (lo, hi)
        } else {
            (lo, lo + 1.0)
        }
    };
    let (xlo, xhi) = bounds(&xs);
    let (ylo, yhi) = bounds(&ys);
    let map_x = |v: f64| x0 + (log10(v) - xlo) / (xhi - xlo) * pw;
    let map_y = |v: f64| y0 + (1.0 - (log10(v.max(1e-12)) - ylo) / (yhi - ylo)) * ph;

    let mut d = xlo as i64;
    while d <= xhi as i64 {
        let x = x0 + (d as f64 - xlo) / (xhi - xlo) * pw;
        frame.line(x, y0, x, y0 + ph, "#dddddd", "");
        frame.text(x, y0 + ph + 18.0, "middle", &format!("1e{d}"));
        d += 1;
    }
    let mut d = ylo as i64;
    while d <= yhi as i64 {
        let y = y0 + (1.0 - (d as f64 - ylo) / (yhi - ylo)) * ph;
        frame.line(x0, y, x0 + pw, y, "#dddddd", "");
        frame.text(x0 - 6.0, y + 4.0, "end", &format!("1e{d}"));
        d += 1;
    }
    frame.line(x0, y0 + ph, x0 + pw, y0 + ph, "#333333", "");
    frame.line(x0, y0, x0, y0 + ph, "#333333", "");

    let polyline = |frame: &mut Frame, pts: &[(f64, f64)], color: &str, dash: &str| {
        if pts.len() > 1 {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{},{}", px(x), px(y)))
                .collect();
            frame.svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
                coords.join(" ")
            ));
        }
        for &(x, y) in pts {
            frame.svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                px(x),
                px(y)
            ));
        }
    };

    let empirical: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (map_x(r.kappa), map_y(r.ks_empirical)))
        .collect();
    let upper: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (map_x(r.kappa), map_y(r.ks_upper)))
        .collect();
    let exact: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.ks_exact.map(|e| (map_x(r.kappa), map_y(e))))
        .collect();
    polyline(&mut frame, &upper, "#d62728", " stroke-dasharray=\"6 3\"");
    polyline(&mut frame, &empirical, "#1f77b4", "");
    polyline(&mut frame, &exact, "#2ca02c", " stroke-dasharray=\"2 2\"");

    let legend = [
        ("#1f77b4", "empirical D_N"),
        ("#d62728", "certified upper bound"),
        ("#2ca02c", "exact oracle"),
    ];
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = y0 + 14.0 + 16.0 * i as f64;
        frame.line(x0 + pw - 150.0, y - 4.0, x0 + pw - 130.0, y - 4.0, color, "");
        frame.text(x0 + pw - 124.0, y, "start", label);
    }
    frame.text(
        x0 + pw / 2.0,
        HEIGHT - 14.0,
        "middle",
        "kappa = sigma / ||a||_2",
    );
    frame.svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">Kolmogorov distance</text>\n",
        px(y0 + ph / 2.0),
        px(y0 + ph / 2.0)
    ));
    frame.finish()
}

/// Histogram of S/sigma with the standard normal density overlaid at the
/// same counting scale (N times bin width times the density).
pub fn histogram_svg(hist: &Histogram, law_name: &str) -> String {
    let mut frame = Frame::new(&format!("S/sigma histogram ({law_name} innovations)"));
    let (x0, y0, pw, ph) = plot_area();
    let bin_w = (HISTOGRAM_HI - HISTOGRAM_LO) / HISTOGRAM_BINS as f64;
    let n = hist.total() as f64;

    let expected: Vec<f64> = (0..HISTOGRAM_BINS)
        .map(|i| n * bin_w * normal_pdf(Histogram::bin_center(i)))
        .collect();
    let mut ymax = expected.iter().cloned().fold(0.0, f64::max);
    for &c in hist.bins() {
        ymax = ymax.max(c as f64);
    }
    ymax = (ymax * 1.08).max(1.0);

    let map_x = |z: f64| x0 + (z - HISTOGRAM_LO) / (HISTOGRAM_HI - HISTOGRAM_LO) * pw;
    let map_y = |c: f64| y0 + (1.0 - c / ymax) * ph;

    let mut z = HISTOGRAM_LO as i64;
    while z <= HISTOGRAM_HI as i64 {
        let x = map_x(z as f64);
        frame.line(x, y0, x, y0 + ph, "#dddddd", "");
        frame.text(x, y0 + ph + 18.0, "middle", &z.to_string());
        z += 1;
    }
    for k in 0..=4u32 {
        let c = ymax * k as f64 / 4.0;
        let y = map_y(c);
        frame.line(x0, y, x0 + pw, y, "#dddddd", "");
        frame.text(x0 - 6.0, y + 4.0, "end", &format!("{c:.0}"));
    }
    frame.line(x0, y0 + ph, x0 + pw, y0 + ph, "#333333", "");
    frame.line(x0, y0, x0, y0 + ph, "#333333", "");

    for (i, &c) in hist.bins().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let lo = HISTOGRAM_LO + i as f64 * bin_w;
        let x = map_x(lo);
        let y = map_y(c as f64);
        frame.svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#9ecae1\"/>\n",
            px(x),
            px(y),
            px(pw * bin_w / (HISTOGRAM_HI - HISTOGRAM_LO)),
            px(y0 + ph - y)
        ));
    }
    let coords: Vec<String> = (0..HISTOGRAM_BINS)
        .map(|i| {
            format!(
                "{},{}",
                px(map_x(Histogram::bin_center(i))),
                px(map_y(expected[i]))
            )
        })
        .collect();
    frame.svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    ));
    frame.text(
        x0 + pw / 2.0,
        HEIGHT - 14.0,
        "middle",
        &format!(
            "S/sigma (underflow {}, overflow {})",
            hist.underflow(),
            hist.overflow()
        ),
    );
    frame.svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">count per bin</text>\n",
        px(y0 + ph / 2.0),
        px(y0 + ph / 2.0)
    ));
    frame.finish()
}
