//! Quantitative transversality: smallest singular value of the realified
//! generator matrix of the transversality condition.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::connection::ConnectionField;
use crate::domain::{d_z, d_zbar, ComplexField, DomainChart};
use crate::error::{Error, Result};
use crate::linalg::{norm, orthonormalize, project_out, realify_vec, CMat, RMat};
use crate::scalar::{cplx, Real, C};

use super::section::{Directions, FiberModel, FiberSample, ProjectiveField, SectionFrameField};

/// Sampled margin of a section or subbundle.
#[derive(Clone, Debug)]
pub struct MarginField<T: Real> {
    chart: Arc<DomainChart<T>>,
    /// `values[sample * n + node]`.
    pub values: Vec<T>,
    pub samples: usize,
    /// Per node minimum over the fiber, after refinement along circles.
    pub node_min: Vec<T>,
    pub min: T,
    pub argmin: MarginArgmin<T>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MarginArgmin<T> {
    pub node: usize,
    pub family: usize,
    pub theta: T,
}

impl<T: Real> MarginField<T> {
    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn value(&self, sample: usize, node: usize) -> T {
        self.values[sample * self.chart.len() + node]
    }
}

/// Per-node data in unitary coordinates: `S t` is the section, `G_z t`,
/// `G_zbar t` its covariant derivatives.
struct NodeFrame<T: Real> {
    s: CMat<T>,
    g_x: CMat<T>,
    g_y: CMat<T>,
}

fn node_frames<T: Real>(
    conn: &ConnectionField<T>,
    section: &SectionFrameField<T>,
) -> Vec<NodeFrame<T>> {
    let chart = section.chart();
    let n = chart.len();
    let r = section.rank();
    let comp = |i: usize| {
        ComplexField::new(
            chart.clone(),
            (0..n).map(|node| section.frame[node][i]).collect(),
            0,
        )
    };
    let dframe: Vec<(ComplexField<T>, ComplexField<T>)> =
        (0..r).map(|i| (d_z(&comp(i)), d_zbar(&comp(i)))).collect();
    let i_unit = cplx(T::zero(), T::one());
    (0..n)
        .map(|node| {
            let u = &section.unitary[node];
            let fr = &section.frame[node];
            let build = |a: &CMat<T>, d: usize| {
                CMat::from_fn(r, r, |i, j| {
                    let mut v = a[(i, j)] * fr[j];
                    if i == j {
                        v = v + if d == 0 {
                            dframe[i].0.values()[node]
                        } else {
                            dframe[i].1.values()[node]
                        };
                    }
                    v * u[i]
                })
            };
            let gz = build(&conn.a_z[node], 0);
            let gzb = build(&conn.a_zbar[node], 1);
            NodeFrame {
                s: CMat::from_fn(r, r, |i, j| {
                    if i == j {
                        fr[i] * u[i]
                    } else {
                        C::new(T::zero(), T::zero())
                    }
                }),
                g_x: &gz + &gzb,
                g_y: (&gz - &gzb).scale(i_unit),
            }
        })
        .collect()
}

/// Margin of one evaluation point, or `None` if the section vector vanishes.
fn point_margin<T: Real>(
    frame: &NodeFrame<T>,
    sample: &FiberSample<T>,
    field: ProjectiveField,
    use_fiber: bool,
    fiber_dim: usize,
) -> std::result::Result<T, ()> {
    let s = frame.s.mul_vec(&sample.t);
    let sr = realify_vec(&s);
    if norm(&sr) <= T::tiny() {
        return Err(());
    }
    let mut span = vec![sr];
    if field == ProjectiveField::Complex {
        let is: Vec<C<T>> = s.iter().map(|z| z * cplx(T::zero(), T::one())).collect();
        span.push(realify_vec(&is));
    }
    let span = orthonormalize(&span, &[], T::lit(1e-12));
    let mut cx = realify_vec(&frame.g_x.mul_vec(&sample.t));
    let mut cy = realify_vec(&frame.g_y.mul_vec(&sample.t));
    project_out(&mut cx, &span);
    project_out(&mut cy, &span);
    let scale = ((norm(&cx).powi(2) + norm(&cy).powi(2)) / T::lit(2.0)).sqrt();
    let mut cols = Vec::new();
    if scale <= T::tiny() {
        return Ok(T::zero());
    }
    cols.push(cx.iter().map(|x| *x / scale).collect::<Vec<T>>());
    cols.push(cy.iter().map(|x| *x / scale).collect::<Vec<T>>());
    if use_fiber {
        let tangents: Vec<Vec<T>> = sample
            .tangents
            .iter()
            .map(|v| realify_vec(&frame.s.mul_vec(v)))
            .collect();
        let basis = orthonormalize(&tangents, &span, T::lit(1e-8));
        if basis.len() < fiber_dim {
            return Err(());
        }
        cols.extend(basis);
    }
    let sv = RMat::from_columns(&cols).singular_values();
    Ok(sv.last().copied().unwrap_or(T::zero()).max(T::zero()))
}

/// Golden-section refinement of the fiber minimum along one circle family.
fn refine_circle<T: Real>(
    model: &FiberModel<T>,
    family: usize,
    theta0: T,
    width: T,
    eval: &dyn Fn(&FiberSample<T>) -> T,
) -> (T, T) {
    let g = T::lit(0.5 * (5f64.sqrt() - 1.0));
    let (mut a, mut b) = (theta0 - width, theta0 + width);
    let f = |th: T| eval(&model.sample(family, th));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..48 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (fc, c)
    } else {
        (fd, d)
    }
}

/// Nodes whose sampled fiber minimum is below this are refined in `theta`.
const REFINE_BELOW: f64 = 0.05;

/// Transversality margin at every node and fiber sample.
pub fn transversality_margin<T: Real>(
    conn: &ConnectionField<T>,
    section: &SectionFrameField<T>,
    directions: Directions,
) -> Result<MarginField<T>> {
    let chart = section.chart();
    if **chart != **conn.chart() || conn.rank() != section.rank() {
        return Err(Error::ChartMismatch);
    }
    let use_fiber = directions == Directions::SurfacePlusFiber;
    if use_fiber && !section.model.is_circle_family() {
        return Err(Error::FrameDegenerate(0));
    }
    let n = chart.len();
    let frames = node_frames(conn, section);
    let fiber_dim = section.model.fiber_dim();
    let field = section.field;
    let samples = &section.samples;
    let per_node: Vec<std::result::Result<(Vec<T>, T, usize, T), usize>> = (0..n)
        .into_par_iter()
        .map(|node| {
            let fr = &frames[node];
            let mut vals = Vec::with_capacity(samples.len());
            for s in samples {
                vals.push(point_margin(fr, s, field, use_fiber, fiber_dim).map_err(|_| node)?);
            }
            let (mut best, mut best_k) = (T::infinity(), 0);
            for (k, v) in vals.iter().enumerate() {
                if *v < best {
                    best = *v;
                    best_k = k;
                }
            }
            let mut best_theta = samples[best_k].theta;
            if section.model.is_circle_family() && best < T::lit(REFINE_BELOW) && best > T::zero() {
                let per_family = samples
                    .iter()
                    .filter(|s| s.family == samples[best_k].family)
                    .count();
                let width = T::TAU() / T::from_usize_(per_family);
                let eval = |s: &FiberSample<T>| {
                    point_margin(fr, s, field, use_fiber, fiber_dim).unwrap_or(T::zero())
                };
                let (v, th) = refine_circle(
                    &section.model,
                    samples[best_k].family,
                    best_theta,
                    width,
                    &eval,
                );
                if v < best {
                    best = v;
                    best_theta = th;
                }
            }
            Ok((vals, best, samples[best_k].family, best_theta))
        })
        .collect();
    let mut values = vec![T::zero(); samples.len() * n];
    let mut node_min = vec![T::zero(); n];
    let mut min = T::infinity();
    let mut argmin = MarginArgmin {
        node: 0,
        family: 0,
        theta: T::zero(),
    };
    for (node, res) in per_node.into_iter().enumerate() {
        let (vals, best, family, theta) = res.map_err(Error::FrameDegenerate)?;
        for (k, v) in vals.into_iter().enumerate() {
            values[k * n + node] = v;
        }
        node_min[node] = best;
        if best < min {
            min = best;
            argmin = MarginArgmin {
                node,
                family,
                theta,
            };
        }
    }
    Ok(MarginField {
        chart: chart.clone(),
        values,
        samples: samples.len(),
        node_min,
        min,
        argmin,
    })
}
