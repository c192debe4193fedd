//! Minimal static SVG charts for sweep reports: a probability line plot and
//! an energy scatter with a reference line.

use std::fmt::Write as _;
use std::path::Path;

use qubotrack_core::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Axis {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            return Axis { min: 0.0, max: 1.0 };
        }
        if (max - min).abs() < 1e-12 {
            return Axis {
                min: min - 0.5,
                max: max + 0.5,
            };
        }
        let pad = (max - min) * 0.05;
        Axis {
            min: min - pad,
            max: max + pad,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.min + (self.max - self.min) * i as f64 / 4.0)
            .collect()
    }
}

struct Chart {
    body: String,
    x: Axis,
    y: Axis,
}

impl Chart {
    fn new(title: &str, x_label: &str, y_label: &str, x: Axis, y: Axis) -> Chart {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(body, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
            WIDTH / 2.0
        );
        let mut chart = Chart { body, x, y };
        chart.axes(x_label, y_label);
        chart
    }

    fn sx(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x.min) / (self.x.max - self.x.min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y.min) / (self.y.max - self.y.min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y0 = HEIGHT - MARGIN_BOTTOM;
        let y1 = MARGIN_TOP;
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}" stroke="black"/>"#
        );
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}" stroke="black"/>"#
        );
        for t in self.x.ticks() {
            let px = self.sx(t);
            let _ = writeln!(
                self.body,
                r#"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/>"#,
                y0 + 5.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{t:.3}</text>"#,
                y0 + 18.0
            );
        }
        for t in self.y.ticks() {
            let py = self.sy(t);
            let _ = writeln!(
                self.body,
                r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{t:.3}</text>"#,
                x0 - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0
        );
        let _ = writeln!(
            self.body,
            r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{y_label}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let mut path = String::new();
        for &(x, y) in points {
            let _ = write!(path, "{:.2},{:.2} ", self.sx(x), self.sy(y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
    }

    fn points(&mut self, points: &[(f64, f64)], color: &str) {
        for &(x, y) in points {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
    }

    fn hline(&mut self, y: f64, color: &str) {
        let py = self.sy(y);
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.1}" y1="{py:.2}" x2="{:.1}" y2="{py:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        );
    }

    fn finish(mut self, path: &Path) -> Result<()> {
        let _ = writeln!(self.body, "</svg>");
        std::fs::write(path, self.body).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Probability-vs-value line chart.
pub fn probability_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    series: &[(f64, f64)],
) -> Result<()> {
    let x = Axis::new(series.iter().map(|&(x, _)| x));
    let y = Axis {
        min: 0.0,
        max: series
            .iter()
            .map(|&(_, y)| y)
            .fold(0.05f64, f64::max)
            .max(0.05)
            * 1.1,
    };
    let mut chart = Chart::new(title, x_label, "solution probability", x, y);
    chart.polyline(series, "#1f77b4");
    chart.points(series, "#1f77b4");
    chart.finish(path)
}

/// Best-energy scatter with the reference energy as a dashed line.
pub fn energy_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    best: &[(f64, f64)],
    reference: Option<f64>,
) -> Result<()> {
    let x = Axis::new(best.iter().map(|&(x, _)| x));
    let y = Axis::new(best.iter().map(|&(_, y)| y).chain(reference));
    let mut chart = Chart::new(title, x_label, "energy", x, y);
    if let Some(r) = reference {
        chart.hline(r, "#d62728");
    }
    chart.points(best, "#1f77b4");
    chart.finish(path)
}
