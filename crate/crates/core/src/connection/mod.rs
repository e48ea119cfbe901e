//! The flat connection `d + H^{-1} dH + phi + H^{-1} conj(phi)^T H`, its real
//! structure, transport and developing maps.

mod develop;
mod metric;
mod transport;

use std::sync::Arc;

use crate::domain::{d_z, d_zbar, partials_real, ComplexField, DomainChart};
use crate::error::{Error, Result};
use crate::higgs::HiggsBundleSpec;
use crate::linalg::CMat;
use crate::scalar::{Real, C};
use crate::solver::HarmonicMetric;

pub use self::develop::{develop, real_locus_distance, DevelopingMapSample};
pub use self::metric::{gaussian_curvature, pullback_metric, CurvatureField, SymmetricTensorField};
pub use self::transport::{monodromy, parallel_transport, transport_step, Monodromy};

/// `A_z dz + A_zbar dzbar`, one matrix per node.
#[derive(Clone, Debug)]
pub struct ConnectionField<T: Real> {
    chart: Arc<DomainChart<T>>,
    rank: usize,
    pub a_z: Vec<CMat<T>>,
    pub a_zbar: Vec<CMat<T>>,
    /// `H_i^{1/2}` per component and node, when the connection comes from a
    /// harmonic metric. Transport then runs in the unitary frame, where the
    /// real structure has constant coefficients.
    frame: Option<Vec<Vec<T>>>,
}

impl<T: Real> ConnectionField<T> {
    pub fn new(chart: Arc<DomainChart<T>>, a_z: Vec<CMat<T>>, a_zbar: Vec<CMat<T>>) -> Self {
        assert_eq!(a_z.len(), chart.len());
        assert_eq!(a_zbar.len(), chart.len());
        let rank = a_z.first().map_or(0, |m| m.rows());
        Self {
            chart,
            rank,
            a_z,
            a_zbar,
            frame: None,
        }
    }

    /// Attaches the unitary frame scale `s_i` (unitary coordinates `s_i v_i`).
    pub fn with_unitary_frame(mut self, scale: Vec<Vec<T>>) -> Self {
        assert_eq!(scale.len(), self.rank);
        self.frame = Some(scale);
        self
    }

    pub fn unitary_frame(&self) -> Option<&[Vec<T>]> {
        self.frame.as_deref()
    }

    /// The connection in the unitary frame, with the frame scale.
    pub(crate) fn unitary_gauge(&self) -> Option<(Self, &[Vec<T>])> {
        let scale = self.frame.as_ref()?;
        let g: Vec<Vec<T>> = scale
            .iter()
            .map(|s| s.iter().map(|x| T::one() / *x).collect())
            .collect();
        Some((self.diagonal_gauge(&g), scale))
    }

    /// Frame scale interpolated at a chart point, normalized to unit product.
    pub(crate) fn frame_at(&self, z: C<T>) -> Result<Option<Vec<T>>> {
        let Some(scale) = &self.frame else {
            return Ok(None);
        };
        let w = crate::domain::interp_weights(&self.chart, z)?;
        let s: Vec<T> = scale
            .iter()
            .map(|s| {
                w.iter()
                    .fold(T::zero(), |acc, (node, c)| acc + s[*node] * *c)
            })
            .collect();
        // the exact scale has unit product; keep that off the nodes too
        let det = s
            .iter()
            .fold(T::one(), |p, x| p * *x)
            .powf(T::one() / T::from_usize_(s.len()));
        Ok(Some(s.iter().map(|x| *x / det).collect()))
    }

    /// The trivial connection of the given rank.
    pub fn zero(chart: &Arc<DomainChart<T>>, rank: usize) -> Self {
        let z = vec![CMat::zeros(rank, rank); chart.len()];
        Self::new(chart.clone(), z.clone(), z)
    }

    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `max |tr A_z| + |tr A_zbar|` over nodes.
    pub fn trace_defect(&self) -> T {
        self.a_z
            .iter()
            .zip(&self.a_zbar)
            .map(|(a, b)| a.trace().norm() + b.trace().norm())
            .fold(T::zero(), T::max)
    }

    /// Coefficients at an arbitrary chart point, interpolated from the nodes.
    pub fn at_point(&self, z: C<T>) -> Result<(CMat<T>, CMat<T>)> {
        let w = crate::domain::interp_weights(&self.chart, z)?;
        let mut az = CMat::zeros(self.rank, self.rank);
        let mut azb = CMat::zeros(self.rank, self.rank);
        for (node, c) in w {
            az = &az + &self.a_z[node].scale_real(c);
            azb = &azb + &self.a_zbar[node].scale_real(c);
        }
        Ok((az, azb))
    }

    /// Gauge transform by a diagonal field `g` (new frame `e'_i = g_i e_i`):
    /// `A -> g^{-1} A g + g^{-1} dg`.
    pub fn diagonal_gauge(&self, g: &[Vec<T>]) -> Self {
        let n = self.chart.len();
        let logs: Vec<(Vec<C<T>>, Vec<C<T>>)> = g
            .iter()
            .map(|gi| partials_real(&self.chart, &gi.iter().map(|x| x.ln()).collect::<Vec<_>>()))
            .collect();
        let mut a_z = Vec::with_capacity(n);
        let mut a_zbar = Vec::with_capacity(n);
        for node in 0..n {
            let conj = |m: &CMat<T>, d: usize| {
                CMat::from_fn(self.rank, self.rank, |i, j| {
                    let mut v = m[(i, j)] * (g[j][node] / g[i][node]);
                    if i == j {
                        v = v + if d == 0 {
                            logs[i].0[node]
                        } else {
                            logs[i].1[node]
                        };
                    }
                    v
                })
            };
            a_z.push(conj(&self.a_z[node], 0));
            a_zbar.push(conj(&self.a_zbar[node], 1));
        }
        Self::new(self.chart.clone(), a_z, a_zbar)
    }
}

/// Assembles `A_z = H^{-1} d_z H + phi`, `A_zbar = H^{-1} conj(phi)^T H`.
pub fn assemble_connection<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
) -> Result<ConnectionField<T>> {
    if !metric.converged {
        return Err(Error::NotConverged);
    }
    if **spec.chart() != **metric.chart() || spec.rank() != metric.rank() {
        return Err(Error::ChartMismatch);
    }
    let chart = spec.chart();
    let rank = spec.rank();
    let dlog: Vec<Vec<C<T>>> = metric
        .entries()
        .iter()
        .map(|e| partials_real(chart, &e.iter().map(|x| x.ln()).collect::<Vec<_>>()).0)
        .collect();
    let mut a_z = Vec::with_capacity(chart.len());
    let mut a_zbar = Vec::with_capacity(chart.len());
    for node in 0..chart.len() {
        let phi = spec.phi_at(node);
        let h = metric.diag_at(node);
        let mut az = phi.clone();
        for i in 0..rank {
            az[(i, i)] = az[(i, i)] + dlog[i][node];
        }
        a_z.push(az);
        a_zbar.push(CMat::from_fn(rank, rank, |i, j| {
            phi[(j, i)].conj() * (h[j] / h[i])
        }));
    }
    let scale = metric
        .entries()
        .iter()
        .map(|e| e.iter().map(|x| x.sqrt()).collect())
        .collect();
    Ok(ConnectionField::new(chart.clone(), a_z, a_zbar).with_unitary_frame(scale))
}

/// Per-node Frobenius norm of `d_z A_zbar - d_zbar A_z + [A_z, A_zbar]`.
pub fn curvature_residual<T: Real>(conn: &ConnectionField<T>) -> Vec<T> {
    let chart = &conn.chart;
    let n = chart.len();
    let r = conn.rank;
    let mut f: Vec<CMat<T>> = (0..n)
        .map(|node| conn.a_z[node].commutator(&conn.a_zbar[node]))
        .collect();
    for i in 0..r {
        for j in 0..r {
            let entry = |m: &[CMat<T>]| {
                ComplexField::new(chart.clone(), m.iter().map(|a| a[(i, j)]).collect(), 0)
            };
            let dzb = d_z(&entry(&conn.a_zbar));
            let dbz = d_zbar(&entry(&conn.a_z));
            for node in 0..n {
                f[node][(i, j)] = f[node][(i, j)] + dzb.values()[node] - dbz.values()[node];
            }
        }
    }
    f.iter().map(|m| m.frobenius_norm()).collect()
}

/// Antilinear involution `tau(v)_i = H_{n-1-i} conj(v_{n-1-i})`.
#[derive(Clone, Debug)]
pub struct RealStructure<T: Real> {
    chart: Arc<DomainChart<T>>,
    /// `weights[node][i] = H_{n-1-i}`.
    weights: Vec<Vec<T>>,
}

impl<T: Real> RealStructure<T> {
    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// The matrix `T` with `tau(v) = T conj(v)`.
    pub fn matrix(&self, node: usize) -> CMat<T> {
        let w = &self.weights[node];
        let n = w.len();
        CMat::from_fn(n, n, |i, j| {
            if i + j + 1 == n {
                C::new(w[i], T::zero())
            } else {
                C::new(T::zero(), T::zero())
            }
        })
    }

    pub fn apply(&self, node: usize, v: &[C<T>]) -> Vec<C<T>> {
        let w = &self.weights[node];
        let n = w.len();
        (0..n).map(|i| v[n - 1 - i].conj() * w[i]).collect()
    }

    /// `max |T conj(T) - I|` over nodes.
    pub fn involution_defect(&self) -> T {
        (0..self.weights.len())
            .map(|node| {
                let t = self.matrix(node);
                (&t * &t.conj()).max_abs_diff(&CMat::identity(t.rows()))
            })
            .fold(T::zero(), T::max)
    }
}

/// The real structure of a diagonal harmonic metric.
pub fn real_structure<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
) -> Result<RealStructure<T>> {
    if **spec.chart() != **metric.chart() {
        return Err(Error::ChartMismatch);
    }
    let n = metric.rank();
    let tol = T::lit(1e-9);
    let mut weights = Vec::with_capacity(spec.chart().len());
    for node in 0..spec.chart().len() {
        let h = metric.diag_at(node);
        for i in 0..n {
            if (h[i] * h[n - 1 - i] - T::one()).abs() > tol {
                return Err(Error::NoRealForm(format!(
                    "h_{} h_{} = {} at node {node}",
                    i + 1,
                    n - i,
                    h[i] * h[n - 1 - i]
                )));
            }
        }
        weights.push((0..n).map(|i| h[n - 1 - i]).collect());
    }
    Ok(RealStructure {
        chart: spec.chart().clone(),
        weights,
    })
}
