//! Minimal self-contained SVG output for point clouds and paths in the
//! complex plane.

use num_complex::Complex64;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug, Default)]
pub struct Figure {
    title: String,
    paths: Vec<Vec<Complex64>>,
    points: Vec<Complex64>,
    overlay: Vec<Complex64>,
}

impl Figure {
    pub fn new(title: &str) -> Self {
        Figure {
            title: title.to_string(),
            ..Default::default()
        }
    }

    pub fn path(mut self, p: Vec<Complex64>) -> Self {
        self.paths.push(p);
        self
    }

    pub fn points(mut self, p: &[Complex64]) -> Self {
        self.points.extend_from_slice(p);
        self
    }

    /// Closed curve drawn dashed beneath the data.
    pub fn overlay(mut self, curve: Vec<Complex64>) -> Self {
        self.overlay = curve;
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let all = self
            .paths
            .iter()
            .flatten()
            .chain(&self.points)
            .chain(&self.overlay)
            .filter(|z| z.re.is_finite() && z.im.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in all {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if !x0.is_finite() {
            return (-1.0, 1.0, -1.0, 1.0);
        }
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
        (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        // equal aspect so loops look like loops
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
        let s = sx.min(sy);
        let cx = 0.5 * (x0 + x1);
        let cy = 0.5 * (y0 + y1);
        let map = |z: &Complex64| (0.5 * WIDTH + s * (z.re - cx), 0.5 * HEIGHT - s * (z.im - cy));

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
            escape(&self.title)
        );
        if y0 < 0.0 && y1 > 0.0 {
            let (_, ya) = map(&Complex64::new(0.0, 0.0));
            let _ = writeln!(
                out,
                r##"<line x1="{MARGIN}" y1="{ya:.3}" x2="{:.3}" y2="{ya:.3}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                WIDTH - MARGIN
            );
        }
        if x0 < 0.0 && x1 > 0.0 {
            let (xa, _) = map(&Complex64::new(0.0, 0.0));
            let _ = writeln!(
                out,
                r##"<line x1="{xa:.3}" y1="{MARGIN}" x2="{xa:.3}" y2="{:.3}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
                HEIGHT - MARGIN
            );
        }
        if !self.overlay.is_empty() {
            let _ = writeln!(
                out,
                r##"<polygon points="{}" fill="none" stroke="#555555" stroke-width="1" stroke-dasharray="4 3"/>"##,
                polyline(&self.overlay, &map)
            );
        }
        for (i, p) in self.paths.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
                polyline(p, &map),
                PALETTE[i % PALETTE.len()]
            );
        }
        for z in &self.points {
            let (px, py) = map(z);
            if px.is_finite() && py.is_finite() {
                let _ = writeln!(out, r##"<circle cx="{px:.3}" cy="{py:.3}" r="2" fill="#1f77b4"/>"##);
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn polyline(p: &[Complex64], map: &impl Fn(&Complex64) -> (f64, f64)) -> String {
    p.iter()
        .map(map)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| format!("{x:.3},{y:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_layers() {
        let c = |re, im| Complex64::new(re, im);
        let svg = Figure::new("a < b")
            .path(vec![c(0.0, 0.0), c(1.0, 1.0)])
            .points(&[c(0.5, -0.5)])
            .overlay(vec![c(-1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)])
            .render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<circle"));
        assert!(svg.contains("<polygon"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_figure_is_valid() {
        let svg = Figure::new("").render();
        assert!(svg.contains("</svg>"));
    }
}
