//! Developing maps of transverse sections by transport to a base fiber.

use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::linalg::{cnorm, hdot, realify_vec, CMat, RMat};
use crate::scalar::{cplx, Real, C};
use crate::transversality::SectionFrameField;

use super::transport::{transport_segment, unscale};
use super::{ConnectionField, RealStructure};

/// Developed image of a section: representatives in the base fiber.
#[derive(Clone, Debug)]
pub struct DevelopingMapSample<T: Real> {
    chart: Arc<DomainChart<T>>,
    pub base: usize,
    pub samples: usize,
    /// `vectors[sample * n + node]`, in the holomorphic frame at the base.
    pub vectors: Vec<Vec<C<T>>>,
    /// Tree parent of each node (the base is its own parent); the path to a
    /// node is the chain of parents.
    pub parent: Vec<usize>,
    /// Real rank of the affine-chart Jacobian, per sample and node.
    pub jacobian_rank: Vec<usize>,
    /// Fiber tangent directions included in the Jacobian.
    pub fiber_dim: usize,
    /// Hermitian weights `H_i` at the base.
    pub base_weights: Vec<T>,
}

impl<T: Real> DevelopingMapSample<T> {
    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn vector(&self, sample: usize, node: usize) -> &[C<T>] {
        &self.vectors[sample * self.chart.len() + node]
    }

    pub fn rank_at(&self, sample: usize, node: usize) -> usize {
        self.jacobian_rank[sample * self.chart.len() + node]
    }

    /// Node sequence from the base to `node`.
    pub fn path(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut k = node;
        while self.parent[k] != k {
            k = self.parent[k];
            out.push(k);
        }
        out.reverse();
        out
    }

    /// Norm in the base fiber's Hermitian metric.
    pub fn hermitian_norm(&self, v: &[C<T>]) -> T {
        v.iter()
            .zip(&self.base_weights)
            .map(|(x, w)| x.norm_sqr() * *w)
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

/// Comb tree: along the base ring/row first, then along the other index.
fn comb_parents<T: Real>(chart: &DomainChart<T>, base: usize) -> Vec<usize> {
    let n2 = chart.resolution().1;
    let (b1, b2) = chart.coords(base);
    let disc = matches!(chart.kind(), ChartKind::Disc { .. });
    (0..chart.len())
        .map(|idx| {
            let (i1, i2) = chart.coords(idx);
            if i1 != b1 {
                let p1 = if i1 > b1 { i1 - 1 } else { i1 + 1 };
                chart.index(p1, i2)
            } else if i2 != b2 {
                let p2 = if disc {
                    // shortest way around the ring
                    let fwd = (i2 + n2 - b2) % n2;
                    if fwd <= n2 / 2 {
                        (i2 + n2 - 1) % n2
                    } else {
                        (i2 + 1) % n2
                    }
                } else if i2 > b2 {
                    i2 - 1
                } else {
                    i2 + 1
                };
                chart.index(i1, p2)
            } else {
                idx
            }
        })
        .collect()
}

fn depth(parent: &[usize], mut k: usize) -> usize {
    let mut d = 0;
    while parent[k] != k {
        k = parent[k];
        d += 1;
    }
    d
}

/// Transport matrices `P` with `P v` the value at a node of the parallel
/// section equal to `v` at the base.
fn tree_transports<T: Real>(conn: &ConnectionField<T>, parent: &[usize]) -> Result<Vec<CMat<T>>> {
    let chart = conn.chart();
    let n = chart.len();
    if let Some((unitary, scale)) = conn.unitary_gauge() {
        let base = (0..n).find(|&k| parent[k] == k).unwrap_or(0);
        let at = |k: usize| scale.iter().map(|s| s[k]).collect::<Vec<T>>();
        let s0 = at(base);
        return Ok(tree_transports(&unitary, parent)?
            .iter()
            .enumerate()
            .map(|(k, p)| unscale(p, &at(k), &s0))
            .collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    let depths: Vec<usize> = (0..n).map(|k| depth(parent, k)).collect();
    order.sort_by_key(|&k| (depths[k], k));
    let mut out: Vec<Option<CMat<T>>> = vec![None; n];
    let max_depth = depths.iter().copied().max().unwrap_or(0);
    let mut start = 0;
    // nodes at one depth only depend on the previous depth
    for d in 0..=max_depth {
        let end = order[start..]
            .iter()
            .position(|&k| depths[k] != d)
            .map_or(n, |p| start + p);
        let level: Vec<Result<(usize, CMat<T>)>> = order[start..end]
            .par_iter()
            .map(|&k| {
                if parent[k] == k {
                    return Ok((k, CMat::identity(conn.rank())));
                }
                let p = out[parent[k]].clone().expect("parent computed");
                let m = transport_segment(conn, chart.node(parent[k]), chart.node(k), p)?;
                Ok((k, m))
            })
            .collect();
        for r in level {
            let (k, m) = r?;
            out[k] = Some(m);
        }
        start = end;
    }
    Ok(out
        .into_iter()
        .map(|m| m.expect("every node reached"))
        .collect())
}

/// Differential of the affine chart `v -> v / v_c` applied to `dv`, realified
/// and without the constant `c` component.
fn affine_differential<T: Real>(v: &[C<T>], dv: &[C<T>], c: usize) -> Vec<T> {
    let vc = v[c];
    let w: Vec<C<T>> = (0..v.len())
        .filter(|&i| i != c)
        .map(|i| dv[i] / vc - v[i] * dv[c] / (vc * vc))
        .collect();
    realify_vec(&w)
}

fn numeric_rank<T: Real>(cols: &[Vec<T>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let sv = RMat::from_columns(cols).singular_values();
    let top = sv.first().copied().unwrap_or(T::zero());
    if top <= T::tiny() {
        return 0;
    }
    sv.iter().filter(|s| **s > top * T::lit(1e-6)).count()
}

/// Develops `section` from the base node: `D(node) = P_{node<-base}^{-1} s(node)`.
pub fn develop<T: Real>(
    conn: &ConnectionField<T>,
    section: &SectionFrameField<T>,
    base: usize,
) -> Result<DevelopingMapSample<T>> {
    let chart = conn.chart();
    if **chart != **section.chart() || conn.rank() != section.rank() {
        return Err(Error::ChartMismatch);
    }
    let n = chart.len();
    if base >= n {
        return Err(Error::PathOutsideChart(format!("node {base}")));
    }
    let parent = comb_parents(chart, base);
    let transports = tree_transports(conn, &parent)?;
    let inverses: Vec<CMat<T>> = transports
        .iter()
        .map(|p| p.inverse().ok_or(Error::NotConverged))
        .collect::<Result<_>>()?;
    let ns = section.samples.len();
    let mut vectors = Vec::with_capacity(ns * n);
    let mut tangent_images = Vec::with_capacity(ns * n);
    for (k, sample) in section.samples.iter().enumerate() {
        for node in 0..n {
            let s = section.vector(node, k);
            if cnorm(&s) <= T::tiny() {
                return Err(Error::SectionVanishes(node));
            }
            vectors.push(inverses[node].mul_vec(&s));
            let fr = &section.frame[node];
            let tans: Vec<Vec<C<T>>> = sample
                .tangents
                .iter()
                .map(|t| {
                    inverses[node]
                        .mul_vec(&fr.iter().zip(t).map(|(f, x)| *f * *x).collect::<Vec<_>>())
                })
                .collect();
            tangent_images.push(tans);
        }
    }
    let (n1, n2) = chart.resolution();
    let wrap2 = matches!(chart.kind(), ChartKind::Disc { .. });
    let jacobian_rank: Vec<usize> = (0..ns * n)
        .into_par_iter()
        .map(|flat| {
            let (k, node) = (flat / n, flat % n);
            let v = &vectors[flat];
            let c = (0..v.len()).fold(0, |b, i| if v[i].norm() > v[b].norm() { i } else { b });
            let (i1, i2) = chart.coords(node);
            let mut cols = Vec::new();
            let fd = |lo: usize, hi: usize, span: T| {
                let dv: Vec<C<T>> = vectors[k * n + hi]
                    .iter()
                    .zip(&vectors[k * n + lo])
                    .map(|(a, b)| (*a - *b) / span)
                    .collect();
                // rescale the neighbor difference into the node's affine chart
                affine_differential(v, &dv, c)
            };
            let (lo1, hi1) = (i1.saturating_sub(1), (i1 + 1).min(n1 - 1));
            if hi1 > lo1 {
                cols.push(fd(
                    chart.index(lo1, i2),
                    chart.index(hi1, i2),
                    T::from_usize_(hi1 - lo1),
                ));
            }
            let (lo2, hi2) = if wrap2 {
                ((i2 + n2 - 1) % n2, (i2 + 1) % n2)
            } else {
                (i2.saturating_sub(1), (i2 + 1).min(n2 - 1))
            };
            if lo2 != hi2 {
                let span = if wrap2 { 2 } else { hi2 - lo2 };
                cols.push(fd(
                    chart.index(i1, lo2),
                    chart.index(i1, hi2),
                    T::from_usize_(span),
                ));
            }
            for t in &tangent_images[flat] {
                cols.push(affine_differential(v, t, c));
            }
            numeric_rank(&cols)
        })
        .collect();
    let base_weights = section.unitary[base].iter().map(|u| *u * *u).collect();
    Ok(DevelopingMapSample {
        chart: chart.clone(),
        base,
        samples: ns,
        vectors,
        parent,
        jacobian_rank,
        fiber_dim: section.model.fiber_dim(),
        base_weights,
    })
}

/// Sine of the Fubini-Study angle between `[v]` and `[tau v]` in the base
/// fiber, minimized over nodes and samples. Zero exactly on the real locus.
pub fn real_locus_distance<T: Real>(sample: &DevelopingMapSample<T>, tau: &RealStructure<T>) -> T {
    let base = sample.base;
    let weights: Vec<T> = sample.base_weights.iter().map(|w| w.sqrt()).collect();
    sample
        .vectors
        .iter()
        .map(|v| {
            let tv = tau.apply(base, v);
            let to_unitary = |x: &[C<T>]| {
                x.iter()
                    .zip(&weights)
                    .map(|(a, w)| *a * *w)
                    .collect::<Vec<_>>()
            };
            let (a, b) = (to_unitary(v), to_unitary(&tv));
            // |b - <a,b> a / |a|^2| / |b|, stable near the real locus
            let proj = hdot(&a, &b)
                / cplx(
                    a.iter().map(|x| x.norm_sqr()).fold(T::zero(), |s, x| s + x),
                    T::zero(),
                );
            let perp: Vec<C<T>> = b.iter().zip(&a).map(|(y, x)| *y - proj * *x).collect();
            (cnorm(&perp) / cnorm(&b)).min(T::one())
        })
        .fold(T::infinity(), T::min)
}
