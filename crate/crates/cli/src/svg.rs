//! Self-contained SVG heatmaps.
//!
//! Colormap: five-stop viridis approximation, linear in RGB between
//! `#440154` (0), `#3b528b` (0.25), `#21918c` (0.5), `#5ec962` (0.75) and
//! `#fde725` (1), applied to intensity divided by its maximum. Large grids
//! are block-averaged to at most [`MAX_CELLS`] cells per axis for drawing;
//! the `data-*` attributes of the root element always give the full grid.
//! Contours are drawn in white.

use std::fmt::Write;

use ndarray::Array2;

pub const MAX_CELLS: usize = 128;
pub const COLORMAP: [(f64, [u8; 3]); 5] = [
    (0.0, [0x44, 0x01, 0x54]),
    (0.25, [0x3b, 0x52, 0x8b]),
    (0.5, [0x21, 0x91, 0x8c]),
    (0.75, [0x5e, 0xc9, 0x62]),
    (1.0, [0xfd, 0xe7, 0x25]),
];

const PLOT: f64 = 480.0;
const MARGIN: f64 = 70.0;

pub fn color(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    for w in COLORMAP.windows(2) {
        let ((t0, c0), (t1, c1)) = (w[0], w[1]);
        if t <= t1 {
            let f = (t - t0) / (t1 - t0);
            return [0, 1, 2].map(|k| (c0[k] as f64 + f * (c1[k] as f64 - c0[k] as f64)).round() as u8);
        }
    }
    COLORMAP[4].1
}

/// A uniform axis: first value, last value, point count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub first: f64,
    pub last: f64,
    pub n: usize,
    pub label: &'static str,
    pub unit: &'static str,
}

pub struct Heatmap<'a> {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    /// Indexed `[x, y]`.
    pub values: &'a Array2<f64>,
    /// Closed curves in data coordinates.
    pub contours: Vec<Vec<(f64, f64)>>,
}

fn blocks(n: usize) -> Vec<(usize, usize)> {
    let cells = n.min(MAX_CELLS);
    (0..cells).map(|c| (c * n / cells, ((c + 1) * n / cells).max(c * n / cells + 1))).collect()
}

impl Heatmap<'_> {
    pub fn render(&self) -> String {
        let (nx, ny) = self.values.dim();
        let max = self.values.iter().cloned().fold(0.0f64, f64::max);
        let (bx, by) = (blocks(nx), blocks(ny));
        let (w, h) = (PLOT + 2.0 * MARGIN, PLOT + 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-x-min="{:e}" data-x-max="{:e}" data-y-min="{:e}" data-y-max="{:e}" data-nx="{nx}" data-ny="{ny}" data-x-unit="{}" data-y-unit="{}" data-colormap="viridis-5">"#,
            self.x.first, self.x.last, self.y.first, self.y.last, self.x.unit, self.y.unit
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, self.title);
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
        let (cw, ch) = (PLOT / bx.len() as f64, PLOT / by.len() as f64);
        for (ci, &(x0, x1)) in bx.iter().enumerate() {
            for (cj, &(y0, y1)) in by.iter().enumerate() {
                let block = self.values.slice(ndarray::s![x0..x1, y0..y1]);
                let mean = block.sum() / block.len() as f64;
                let [r, g, b] = color(if max > 0.0 { mean / max } else { 0.0 });
                let px = MARGIN + ci as f64 * cw;
                let py = MARGIN + PLOT - (cj + 1) as f64 * ch;
                let _ = writeln!(
                    s,
                    r##"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
        let _ = writeln!(s, "</g>");
        for curve in &self.contours {
            let pts: Vec<String> = curve
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
                .collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="white" stroke-width="1.5"/>"#, pts.join(" "));
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
        );
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
            let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{body}</text>"#);
        };
        text(&mut s, w / 2.0, MARGIN / 2.0, "middle", &self.title);
        text(&mut s, MARGIN, MARGIN + PLOT + 18.0, "start", &format!("{:.6e}", self.x.first));
        text(&mut s, MARGIN + PLOT, MARGIN + PLOT + 18.0, "end", &format!("{:.6e}", self.x.last));
        text(&mut s, w / 2.0, MARGIN + PLOT + 40.0, "middle", &format!("{} ({})", self.x.label, self.x.unit));
        text(&mut s, MARGIN - 6.0, MARGIN + PLOT, "end", &format!("{:.4e}", self.y.first));
        text(&mut s, MARGIN - 6.0, MARGIN + 12.0, "end", &format!("{:.4e}", self.y.last));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.1})">{} ({})</text>"#,
            h / 2.0,
            h / 2.0,
            self.y.label,
            self.y.unit
        );
        s.push_str("</svg>\n");
        s
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + PLOT * frac(x, &self.x)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + PLOT * (1.0 - frac(y, &self.y))
    }
}

/// Position within the drawn extent, which covers half a step beyond the
/// first and last grid points.
fn frac(v: f64, a: &Axis) -> f64 {
    let step = if a.n > 1 { (a.last - a.first) / (a.n - 1) as f64 } else { 1.0 };
    ((v - a.first + step / 2.0) / (step * a.n as f64)).clamp(0.0, 1.0)
}

/// Level set `B + A exp(-Q/2) = B + level·A` of a correlated Gaussian,
/// with Q = (u² - 2ρuv + v²)/(1-ρ²) in units of σ.
pub fn gaussian_contour(center: [f64; 2], sigma: [f64; 2], rho: f64, level: f64, points: usize) -> Vec<(f64, f64)> {
    let r = (-2.0 * level.ln()).sqrt();
    let q = (1.0 - rho * rho).sqrt();
    (0..points)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
            let (u, v) = (r * t.cos(), r * (rho * t.cos() + q * t.sin()));
            (center[0] + sigma[0] * u, center[1] + sigma[1] * v)
        })
        .collect()
}
