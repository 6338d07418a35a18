//! Minimal SVG line plots and heat maps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: [f64; 4] = [70.0, 20.0, 40.0, 55.0]; // left, right, top, bottom
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: Style,
    /// Index into the built-in palette.
    pub color: usize,
}

impl Series {
    pub fn line(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>, color: usize) -> Self {
        Series { label: label.into(), x, y, style: Style::Line, color }
    }

    pub fn markers(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>, color: usize) -> Self {
        Series { label: label.into(), x, y, style: Style::Markers, color }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = range(self.series.iter().flat_map(|s| s.x.iter().copied()));
        let (y0, y1) = range(self.series.iter().flat_map(|s| s.y.iter().copied()));
        let pw = W - MARGIN[0] - MARGIN[1];
        let ph = H - MARGIN[2] - MARGIN[3];
        let sx = |x: f64| MARGIN[0] + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN[2] + (y1 - y) / (y1 - y0) * ph;
        let mut out = String::new();
        header(&mut out, &self.title);
        let _ = writeln!(out, "<rect x=\"{}\" y=\"{}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>", MARGIN[0], MARGIN[2]);
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{fx:.3}</text>", sx(fx), H - MARGIN[3] + 16.0);
            let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{fy:.3e}</text>", MARGIN[0] - 4.0, sy(fy) + 4.0);
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(out, "<line x1=\"{}\" x2=\"{}\" y1=\"{2:.1}\" y2=\"{2:.1}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>", MARGIN[0], W - MARGIN[1], sy(0.0));
        }
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", MARGIN[0] + pw / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>",
            MARGIN[2] + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let c = PALETTE[s.color % PALETTE.len()];
            let pts: Vec<(f64, f64)> = s.x.iter().zip(&s.y).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (sx(*x), sy(*y))).collect();
            match s.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
                }
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"none\" stroke=\"{c}\"/>");
                    }
                }
            }
            let ly = MARGIN[2] + 14.0 + 15.0 * i as f64;
            let lx = W - MARGIN[1] - 150.0;
            let _ = writeln!(out, "<line x1=\"{lx}\" x2=\"{}\" y1=\"{1}\" y2=\"{1}\" stroke=\"{c}\" stroke-width=\"2\"/>", lx + 18.0, ly - 4.0);
            let _ = writeln!(out, "<text x=\"{}\" y=\"{ly}\">{}</text>", lx + 22.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Heat map of `values[j * nx + i]` over `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone)]
pub struct HeatMap {
    pub title: String,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub extent: [f64; 4],
    pub x_label: String,
    pub y_label: String,
}

/// Diverging blue–white–red colour for `t ∈ [−1, 1]`.
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = -t;
        (1.0 - s, 1.0 - s, 1.0)
    } else {
        (1.0, 1.0 - t, 1.0 - t)
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}

impl HeatMap {
    pub fn to_svg(&self) -> String {
        let vmax = self.values.iter().filter(|v| v.is_finite()).fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = if vmax > 0.0 { 1.0 / vmax } else { 0.0 };
        let side = (H - MARGIN[2] - MARGIN[3]).min(W - MARGIN[0] - MARGIN[1] - 90.0);
        let (cw, ch) = (side / self.nx.max(1) as f64, side / self.ny.max(1) as f64);
        let mut out = String::new();
        header(&mut out, &self.title);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.values.get(j * self.nx + i).copied().unwrap_or(f64::NAN);
                let fill = if v.is_finite() { diverging(v * scale) } else { "#cccccc".into() };
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                    MARGIN[0] + i as f64 * cw,
                    MARGIN[2] + (self.ny - 1 - j) as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
        let [x0, x1, y0, y1] = self.extent;
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} [{x0:.3}, {x1:.3}]</text>", MARGIN[0] + side / 2.0, MARGIN[2] + side + 18.0, escape(&self.x_label));
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{} [{y0:.3}, {y1:.3}]</text>", MARGIN[0] + side + 10.0, MARGIN[2] + side, escape(&self.y_label));
        let bx = MARGIN[0] + side + 30.0;
        for k in 0..=20 {
            let t = 1.0 - k as f64 / 10.0;
            let _ = writeln!(out, "<rect x=\"{bx}\" y=\"{:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>", MARGIN[2] + k as f64 * side / 21.0, side / 21.0 + 0.05, diverging(t));
        }
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{vmax:.3e}</text>", bx + 20.0, MARGIN[2] + 10.0);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{:.3e}</text>", bx + 20.0, MARGIN[2] + side, -vmax);
        out.push_str("</svg>\n");
        out
    }
}
