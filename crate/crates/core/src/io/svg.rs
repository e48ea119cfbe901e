//! Deterministic SVG plots of margins and developed images.

use std::fmt::Write;

use crate::connection::DevelopingMapSample;
use crate::scalar::Real;
use crate::transversality::MarginField;

const SIZE: f64 = 400.0;
const MAX_POINTS: usize = 4096;
const MAX_CURVES: usize = 256;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<title>{title}</title>\n<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    )
}

/// Nodes of the chart colored by the per-node margin, darker is smaller.
pub fn margin_svg<T: Real>(margin: &MarginField<T>) -> String {
    let chart = margin.chart();
    let pts: Vec<(f64, f64)> = chart
        .nodes()
        .iter()
        .map(|z| (z.re.as_f64(), z.im.as_f64()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = 0.9 * SIZE / span;
    let top = margin
        .node_min
        .iter()
        .map(|m| m.as_f64())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let radius = (0.45 * SIZE / (chart.len() as f64).sqrt()).max(0.5);
    let mut s = header("transversality margin");
    for ((x, y), m) in pts.iter().zip(&margin.node_min) {
        let level = (255.0 * (m.as_f64() / top).clamp(0.0, 1.0)).round() as u8;
        let cx = 0.05 * SIZE + (x - x0) * scale;
        let cy = SIZE - (0.05 * SIZE + (y - y0) * scale);
        let _ = writeln!(
            s,
            "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"{radius:.3}\" fill=\"rgb({level},{level},{level})\"/>"
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Developed representatives mapped to the disc of radius 1/2 by
/// `a_0 conj(a_{n-1}) / |a|^2` in unitary coordinates at the base. Point
/// sections give dots; circle families give one closed curve per node.
pub fn developing_svg<T: Real>(sample: &DevelopingMapSample<T>) -> String {
    let n = sample.chart().len();
    let roots: Vec<f64> = sample
        .base_weights
        .iter()
        .map(|w| w.as_f64().sqrt())
        .collect();
    let point = |sample_idx: usize, node: usize| {
        let v = sample.vector(sample_idx, node);
        let a: Vec<(f64, f64)> = v
            .iter()
            .zip(&roots)
            .map(|(x, r)| (x.re.as_f64() * r, x.im.as_f64() * r))
            .collect();
        let norm: f64 = a.iter().map(|(x, y)| x * x + y * y).sum();
        let (p, q) = (a[0], a[a.len() - 1]);
        let re = (p.0 * q.0 + p.1 * q.1) / norm;
        let im = (p.1 * q.0 - p.0 * q.1) / norm;
        (SIZE / 2.0 + re * 0.9 * SIZE, SIZE / 2.0 - im * 0.9 * SIZE)
    };
    let mut s = header("developed image");
    let _ = writeln!(
        s,
        "<circle cx=\"{c}\" cy=\"{c}\" r=\"{r}\" fill=\"none\" stroke=\"gray\"/>",
        c = SIZE / 2.0,
        r = 0.45 * SIZE
    );
    if sample.samples <= 1 {
        let stride = n.div_ceil(MAX_POINTS).max(1);
        for node in (0..n).step_by(stride) {
            let (x, y) = point(0, node);
            let _ = writeln!(
                s,
                "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1\" fill=\"black\"/>"
            );
        }
    } else {
        let stride = n.div_ceil(MAX_CURVES).max(1);
        for node in (0..n).step_by(stride) {
            let pts: Vec<String> = (0..sample.samples)
                .map(|k| {
                    let (x, y) = point(k, node);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                s,
                "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>",
                pts.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
