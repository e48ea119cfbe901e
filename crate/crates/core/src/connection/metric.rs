//! Pullback metrics of SL(2,R) harmonic maps and Gaussian curvature.

use std::sync::Arc;

use crate::domain::{laplacian_real, partials_real, DomainChart};
use crate::error::{Error, Result};
use crate::higgs::HiggsBundleSpec;
use crate::scalar::{Real, C};
use crate::solver::HarmonicMetric;

/// A symmetric 2-tensor `gxx dx^2 + 2 gxy dx dy + gyy dy^2` per node.
#[derive(Clone, Debug)]
pub struct SymmetricTensorField<T: Real> {
    chart: Arc<DomainChart<T>>,
    pub gxx: Vec<T>,
    pub gxy: Vec<T>,
    pub gyy: Vec<T>,
}

impl<T: Real> SymmetricTensorField<T> {
    pub fn from_fn(chart: &Arc<DomainChart<T>>, f: impl Fn(C<T>) -> (T, T, T)) -> Self {
        let vals: Vec<(T, T, T)> = chart.nodes().iter().map(|z| f(*z)).collect();
        Self {
            chart: chart.clone(),
            gxx: vals.iter().map(|v| v.0).collect(),
            gxy: vals.iter().map(|v| v.1).collect(),
            gyy: vals.iter().map(|v| v.2).collect(),
        }
    }

    /// `e^{2v} |dz|^2`.
    pub fn conformal(chart: &Arc<DomainChart<T>>, factor: &[T]) -> Self {
        Self {
            chart: chart.clone(),
            gxx: factor.to_vec(),
            gxy: vec![T::zero(); factor.len()],
            gyy: factor.to_vec(),
        }
    }

    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn len(&self) -> usize {
        self.gxx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gxx.is_empty()
    }

    /// The eigenvalues `(min, max)` at a node.
    pub fn eigenvalues(&self, node: usize) -> (T, T) {
        crate::linalg::sym2_eigenvalues(self.gxx[node], self.gxy[node], self.gyy[node])
    }

    /// Hopf coefficient `q` of the `dz^2` part: `g = q dz^2 + e |dz|^2 + conj(q) dzbar^2`.
    pub fn hopf(&self, node: usize) -> C<T> {
        let four = T::lit(4.0);
        C::new(
            (self.gxx[node] - self.gyy[node]) / four,
            -self.gxy[node] / T::lit(2.0),
        )
    }

    pub fn difference(&self, other: &Self) -> Self {
        let sub = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x - *y).collect();
        Self {
            chart: self.chart.clone(),
            gxx: sub(&self.gxx, &other.gxx),
            gxy: sub(&self.gxy, &other.gxy),
            gyy: sub(&self.gyy, &other.gyy),
        }
    }

    fn is_conformal(&self) -> bool {
        let tol = T::lit(1e-12);
        (0..self.len()).all(|i| {
            let s = self.gxx[i].abs().max(self.gyy[i].abs()).max(T::one());
            (self.gxx[i] - self.gyy[i]).abs() <= tol * s && self.gxy[i].abs() <= tol * s
        })
    }
}

/// `g = q dz^2 + e dz dzbar + conj(q) dzbar^2` with `q = 4ab` and
/// `e = 4(|a|^2 h^{-2} + |b|^2 h^2)`; the Fuchsian case `a = 0, b = 1` is the
/// curvature -1 metric `4 h^2 |dz|^2`.
pub fn pullback_metric<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
) -> Result<SymmetricTensorField<T>> {
    if !metric.converged {
        return Err(Error::NotConverged);
    }
    let (a, b) = spec.sl2r_entries().ok_or_else(|| Error::WrongKind {
        expected: "SL2R",
        found: spec.kind().to_string(),
    })?;
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let chart = spec.chart();
    let mut g = SymmetricTensorField {
        chart: chart.clone(),
        gxx: Vec::with_capacity(chart.len()),
        gxy: Vec::with_capacity(chart.len()),
        gyy: Vec::with_capacity(chart.len()),
    };
    for (node, &h) in metric.h().iter().enumerate() {
        let (av, bv) = (a.values()[node], b.values()[node]);
        let e = four * (av.norm_sqr() / (h * h) + bv.norm_sqr() * h * h);
        let q = av * bv * four;
        g.gxx.push(e + two * q.re);
        g.gyy.push(e - two * q.re);
        g.gxy.push(-two * q.im);
    }
    Ok(g)
}

/// Gaussian curvature on deep interior nodes (`NaN` elsewhere and at
/// degenerate nodes, which are listed).
#[derive(Clone, Debug)]
pub struct CurvatureField<T: Real> {
    pub values: Vec<T>,
    pub degenerate: Vec<usize>,
}

impl<T: Real> CurvatureField<T> {
    pub fn evaluated(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.values
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, k)| !k.is_nan())
    }

    /// `max |K - target|` over evaluated nodes.
    pub fn max_deviation(&self, target: T) -> T {
        self.evaluated()
            .map(|(_, k)| (k - target).abs())
            .fold(T::zero(), T::max)
    }

    pub fn mean(&self) -> T {
        let (s, c) = self
            .evaluated()
            .fold((T::zero(), 0usize), |(s, c), (_, k)| (s + k, c + 1));
        if c == 0 {
            T::nan()
        } else {
            s / T::from_usize_(c)
        }
    }
}

fn xy_partials<T: Real>(chart: &DomainChart<T>, f: &[T]) -> (Vec<T>, Vec<T>) {
    let (dz, dzb) = partials_real(chart, f);
    // f real: d_x = d_z + d_zbar, d_y = i (d_z - d_zbar)
    let fx = dz.iter().zip(&dzb).map(|(a, b)| (a + b).re).collect();
    let fy = dz.iter().zip(&dzb).map(|(a, b)| -(a - b).im).collect();
    (fx, fy)
}

/// `K = -e^{-2v} Delta v` for conformal tensors, Brioschi's formula otherwise.
pub fn gaussian_curvature<T: Real>(g: &SymmetricTensorField<T>) -> CurvatureField<T> {
    let chart = &g.chart;
    let n = chart.len();
    let degenerate: Vec<usize> = (0..n)
        .filter(|&i| {
            g.gxx[i] * g.gyy[i] - g.gxy[i] * g.gxy[i] <= T::zero() || g.gxx[i] <= T::zero()
        })
        .collect();
    let mut values = vec![T::nan(); n];
    if degenerate.is_empty() && g.is_conformal() {
        let v: Vec<T> = g.gxx.iter().map(|x| x.ln() / T::lit(2.0)).collect();
        let lap = laplacian_real(chart, &v);
        for i in 0..n {
            if chart.is_deep_interior(i) {
                values[i] = -lap[i] / g.gxx[i];
            }
        }
    } else {
        let (e, f, gg) = (&g.gxx, &g.gxy, &g.gyy);
        let (eu, ev) = xy_partials(chart, e);
        let (fu, fv) = xy_partials(chart, f);
        let (gu, gv) = xy_partials(chart, gg);
        let (_, evv) = xy_partials(chart, &ev);
        let (fuv, _) = xy_partials(chart, &fv);
        let (guu, _) = xy_partials(chart, &gu);
        let half = T::lit(0.5);
        for i in 0..n {
            if !chart.is_deep_interior(i) || degenerate.contains(&i) {
                continue;
            }
            let det3 = |m: [[T; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let m1 = [
                [
                    -half * evv[i] + fuv[i] - half * guu[i],
                    half * eu[i],
                    fu[i] - half * ev[i],
                ],
                [fv[i] - half * gu[i], e[i], f[i]],
                [half * gv[i], f[i], gg[i]],
            ];
            let m2 = [
                [T::zero(), half * ev[i], half * gu[i]],
                [half * ev[i], e[i], f[i]],
                [half * gu[i], f[i], gg[i]],
            ];
            let w = e[i] * gg[i] - f[i] * f[i];
            values[i] = (det3(m1) - det3(m2)) / (w * w);
        }
    }
    CurvatureField { values, degenerate }
}
