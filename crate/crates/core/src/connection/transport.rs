//! Parallel transport by RK4 along straight segments.

use crate::domain::ChartKind;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{cplx, Real, C};

use super::ConnectionField;

/// Largest RK4 step: half the grid spacing (ring spacing on a disc).
pub fn transport_step<T: Real>(conn: &ConnectionField<T>) -> T {
    let chart = conn.chart();
    let (n1, _) = chart.resolution();
    let h = match chart.kind() {
        ChartKind::Disc { radius } => *radius / T::from_usize_(n1),
        _ => chart.min_spacing(),
    };
    h / T::lit(2.0)
}

/// Bound on `|A| |dz|` per RK4 step.
const MAX_RATE: f64 = 0.05;

/// `-(A_z dz + A_zbar dzbar)` applied to a displacement `dz`.
fn rate<T: Real>(conn: &ConnectionField<T>, z: C<T>, dz: C<T>) -> Result<CMat<T>> {
    let (az, azb) = conn.at_point(z)?;
    Ok(-&(&az.scale(dz) + &azb.scale(dz.conj())))
}

/// Transport along one segment, multiplying onto `p`.
pub(crate) fn transport_segment<T: Real>(
    conn: &ConnectionField<T>,
    z0: C<T>,
    z1: C<T>,
    p: CMat<T>,
) -> Result<CMat<T>> {
    let d = z1 - z0;
    let len = d.norm();
    if len == T::zero() {
        return Ok(p);
    }
    let (a0, b0) = conn.at_point(z0)?;
    let (a1, b1) = conn.at_point(z1)?;
    let size =
        (a0.frobenius_norm() + b0.frobenius_norm()).max(a1.frobenius_norm() + b1.frobenius_norm());
    // half the grid spacing, and small enough that |A dz| stays below MAX_RATE per step
    let by_grid = (len / transport_step(conn)).ceil();
    let by_rate = (len * size / T::lit(MAX_RATE)).ceil();
    let steps = by_grid.max(by_rate).to_usize().unwrap_or(1).max(1);
    let dt = T::one() / T::from_usize_(steps);
    let half = T::lit(0.5);
    let mut p = p;
    // rate(z) depends on position only; d is the full-segment velocity
    for k in 0..steps {
        let t0 = T::from_usize_(k) * dt;
        let za = z0 + d * t0;
        let zm = z0 + d * (t0 + half * dt);
        let zb = z0 + d * (t0 + dt);
        let (ma, mm, mb) = (rate(conn, za, d)?, rate(conn, zm, d)?, rate(conn, zb, d)?);
        let k1 = &ma * &p;
        let k2 = &mm * &(&p + &k1.scale_real(half * dt));
        let k3 = &mm * &(&p + &k2.scale_real(half * dt));
        let k4 = &mb * &(&p + &k3.scale_real(dt));
        let incr = &(&(&k1 + &k2.scale_real(T::lit(2.0))) + &k3.scale_real(T::lit(2.0))) + &k4;
        p = &p + &incr.scale_real(dt / T::lit(6.0));
    }
    Ok(p)
}

/// The transport matrix along a polyline: a parallel section with value `v`
/// at `path[0]` has value `P v` at the last point.
pub fn parallel_transport<T: Real>(conn: &ConnectionField<T>, path: &[C<T>]) -> Result<CMat<T>> {
    let chart = conn.chart();
    let mut p = CMat::identity(conn.rank());
    if path.is_empty() {
        return Ok(p);
    }
    if let Some(z) = path.iter().find(|z| !chart.contains(**z)) {
        return Err(Error::PathOutsideChart(format!("{z}")));
    }
    if !chart.is_periodic() {
        // straight segments must stay inside as well; sample them
        for w in path.windows(2) {
            for k in 1..16 {
                let z = w[0] + (w[1] - w[0]) * T::lit(k as f64 / 16.0);
                if !chart.contains(z) {
                    return Err(Error::PathOutsideChart(format!("{z}")));
                }
            }
        }
    }
    let (Some((unitary, _)), Some(s0), Some(s1)) = (
        conn.unitary_gauge(),
        conn.frame_at(path[0])?,
        conn.frame_at(path[path.len() - 1])?,
    ) else {
        for w in path.windows(2) {
            p = transport_segment(conn, w[0], w[1], p)?;
        }
        return Ok(p);
    };
    for w in path.windows(2) {
        p = transport_segment(&unitary, w[0], w[1], p)?;
    }
    Ok(unscale(&p, &s1, &s0))
}

/// `diag(1 / s1) P diag(s0)`: unitary-frame transport back in the holomorphic frame.
pub(crate) fn unscale<T: Real>(p: &CMat<T>, s1: &[T], s0: &[T]) -> CMat<T> {
    CMat::from_fn(p.rows(), p.cols(), |i, j| p[(i, j)] * (s0[j] / s1[i]))
}

/// Transport around the two period generators of a torus.
#[derive(Clone, Debug)]
pub struct Monodromy<T: Real> {
    pub generators: Vec<CMat<T>>,
    /// `|P_a P_b P_a^{-1} P_b^{-1} - I|`, max entry.
    pub commutator_defect: T,
}

/// Monodromy along `[z0, z0 + 1]` and `[z0, z0 + tau]`.
pub fn monodromy<T: Real>(conn: &ConnectionField<T>, base: C<T>) -> Result<Monodromy<T>> {
    let chart = conn.chart();
    let tau = match chart.kind() {
        ChartKind::Torus { modulus } => *modulus,
        _ => return Err(Error::UnsupportedChart(chart.kind().name())),
    };
    let pa = parallel_transport(conn, &[base, base + cplx(T::one(), T::zero())])?;
    let pb = parallel_transport(conn, &[base, base + tau])?;
    let inv = |m: &CMat<T>| m.inverse().ok_or(Error::NotConverged);
    let comm = &(&(&pa * &pb) * &inv(&pa)?) * &inv(&pb)?;
    let defect = comm.max_abs_diff(&CMat::identity(conn.rank()));
    Ok(Monodromy {
        generators: vec![pa, pb],
        commutator_defect: defect,
    })
}
