//! Minimal static SVG rendering: line plots and heatmaps with a fixed
//! 800x600 viewport. No interactivity, no external assets.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 600.0;
const ML: f64 = 70.0; // left margin
const MR: f64 = 25.0;
const MT: f64 = 40.0;
const MB: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Scale {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Scale {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }
    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn axes(out: &mut String, s: &Scale, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    );
    for i in 0..=5 {
        let fx = self_frac(i);
        let xv = s.x0 + fx * (s.x1 - s.x0);
        let yv = s.y0 + fx * (s.y1 - s.y0);
        let px = s.px(xv);
        let py = s.py(yv);
        let _ = write!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0,
            tick(xv)
        );
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{ML}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 5.0,
            ML - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 14.0,
        escape(xlabel),
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        escape(ylabel)
    );
}

fn self_frac(i: usize) -> f64 {
    i as f64 / 5.0
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Multi-series line plot. `vlines` draws dashed vertical markers.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(String, Vec<(f64, f64)>)],
    vlines: &[f64],
) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (_, pts) in series {
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    xs.extend_from_slice(vlines);
    let (x0, x1) = span(&xs);
    let (mut y0, mut y1) = span(&ys);
    let pad = 0.05 * (y1 - y0).max(1e-30);
    y0 -= pad;
    y1 += pad;
    let s = Scale { x0, x1, y0, y1 };

    let mut out = header(title);
    axes(&mut out, &s, xlabel, ylabel);
    for &x in vlines {
        let px = s.px(x);
        let _ = write!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{MT}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"gray\" \
             stroke-dasharray=\"4 3\"/>\n",
            H - MB
        );
    }
    for (j, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        let mut path = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, s.px(x), s.py(y));
        }
        let _ = write!(
            out,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        );
        let _ = write!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            ML + 12.0,
            MT + 18.0 + 16.0 * j as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn span(vs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vs {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Heatmap of row-major `values` (len = xs.len() * ys.len()) with optional
/// point markers.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[f64],
    markers: &[(f64, f64)],
) -> String {
    let vmax = values.iter().copied().fold(0.0_f64, f64::max).max(1e-300);
    let s = Scale { x0: xs[0], x1: xs[xs.len() - 1], y0: ys[0], y1: ys[ys.len() - 1] };
    let cw = (W - ML - MR) / xs.len() as f64 + 0.5;
    let ch = (H - MT - MB) / ys.len() as f64 + 0.5;

    let mut out = header(title);
    for (iy, &y) in ys.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            let v = values[iy * xs.len() + ix] / vmax;
            if v < 1e-4 {
                continue; // leave the background white
            }
            // White -> blue -> dark ramp.
            let level = (255.0 * (1.0 - v)).round() as u8;
            let _ = write!(
                out,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cw:.2}\" height=\"{ch:.2}\" \
                 fill=\"rgb({level},{level},255)\"/>\n",
                s.px(x) - cw / 2.0,
                s.py(y) - ch / 2.0
            );
        }
    }
    axes(&mut out, &s, xlabel, ylabel);
    for &(mx, my) in markers {
        let _ = write!(
            out,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"none\" stroke=\"red\" \
             stroke-width=\"1.5\"/>\n",
            s.px(mx),
            s.py(my)
        );
    }
    out.push_str("</svg>\n");
    out
}
