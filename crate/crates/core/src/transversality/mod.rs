//! Transversality of candidate subbundles to the parallel foliation, the
//! domination test and anti-de Sitter containment.

mod margin;
mod section;

use serde::Serialize;

use crate::connection::{
    assemble_connection, pullback_metric, ConnectionField, DevelopingMapSample,
};
use crate::error::{Error, Result};
use crate::higgs::{BundleKind, HiggsBundleSpec, PairingData};
use crate::linalg::{cnorm, hdot};
use crate::scalar::{Real, C};
use crate::solver::HarmonicMetric;

pub use self::margin::{transversality_margin, MarginArgmin, MarginField};
pub use self::section::{
    build_section, pairing_constraint, reality_defect, Construction, ConstructionKind, Directions,
    FiberModel, FiberSample, ProjectiveField, SectionFrameField, DEFAULT_FIBER_SAMPLES,
};

/// The connection a construction is checked against. For the almost-Fuchsian
/// deformation this is the uniformizing connection with `beta` added to the
/// `dzbar` part and its adjoint to the `dz` part.
pub fn construction_connection<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
    construction: &Construction<T>,
) -> Result<ConnectionField<T>> {
    let mut conn = assemble_connection(spec, metric)?;
    if let Construction::AlmostFuchsian(beta) = construction {
        if spec.kind() != BundleKind::SL2R {
            return Err(Error::IncompatibleConstruction {
                construction: construction.kind().name().to_string(),
                kind: spec.kind().to_string(),
            });
        }
        let beta = beta.rehome(spec.chart())?;
        for (node, (&h, &b)) in metric.h().iter().zip(beta.values()).enumerate() {
            conn.a_zbar[node][(1, 0)] = conn.a_zbar[node][(1, 0)] + b;
            conn.a_z[node][(0, 1)] = conn.a_z[node][(0, 1)] + b.conj() * (h * h);
        }
    }
    Ok(conn)
}

/// Assembles the connection, builds the section and measures its margin.
pub fn check_construction<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
    construction: &Construction<T>,
    fiber_samples: usize,
) -> Result<MarginField<T>> {
    let kind = construction.kind();
    let section = build_section(spec, metric, kind, fiber_samples)?;
    let conn = construction_connection(spec, metric, construction)?;
    transversality_margin(&conn, &section, kind.directions())
}

/// Margin of the `(1, 0)` section of an SL(2,R) bundle in closed form: with
/// `k = |a| / (|b| h^2)` and `rho = (1 - k^2) / (1 + k^2)` it is
/// `sqrt(1 - sqrt(1 - rho^2))`, vanishing exactly at `k = 1`.
pub fn hyperbolic_margin_closed_form<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
) -> Result<Vec<T>> {
    let (a, b) = spec.sl2r_entries().ok_or_else(|| Error::WrongKind {
        expected: "SL2R",
        found: spec.kind().to_string(),
    })?;
    Ok(metric
        .h()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(&h, (a, b))| {
            if b.norm() <= T::tiny() {
                return T::nan();
            }
            let k = a.norm() / (b.norm() * h * h);
            let rho = (T::one() - k * k) / (T::one() + k * k);
            (T::one() - (T::one() - rho * rho).max(T::zero()).sqrt())
                .max(T::zero())
                .sqrt()
        })
        .collect())
}

/// Agreement of a computed hyperbolic margin with the closed form.
#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicCrossCheck<T> {
    pub max_deviation: T,
    /// Nodes where exactly one of the two margins is below the zero threshold.
    pub zero_set_disagreements: usize,
}

/// Margins below this count as zero when comparing zero sets.
pub const ZERO_SET_THRESHOLD: f64 = 1e-4;

pub fn hyperbolic_cross_check<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
    margin: &MarginField<T>,
) -> Result<HyperbolicCrossCheck<T>> {
    let closed = hyperbolic_margin_closed_form(spec, metric)?;
    let zero = T::lit(ZERO_SET_THRESHOLD);
    let mut max_deviation = T::zero();
    let mut disagreements = 0;
    for (m, c) in margin.node_min.iter().zip(&closed) {
        if c.is_nan() {
            continue;
        }
        max_deviation = max_deviation.max((*m - *c).abs());
        if (*m < zero) != (*c < zero) {
            disagreements += 1;
        }
    }
    Ok(HyperbolicCrossCheck {
        max_deviation,
        zero_set_disagreements: disagreements,
    })
}

/// Smallest eigenvalue of `g1 - g2` per node.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport<T> {
    pub min_eigenvalue: Vec<T>,
    pub dominated: bool,
    pub worst_node: usize,
    pub worst_value: T,
}

pub fn domination<T: Real>(
    spec1: &HiggsBundleSpec<T>,
    metric1: &HarmonicMetric<T>,
    spec2: &HiggsBundleSpec<T>,
    metric2: &HarmonicMetric<T>,
) -> Result<DominationReport<T>> {
    if **spec1.chart() != **spec2.chart() {
        return Err(Error::ChartMismatch);
    }
    let g1 = pullback_metric(spec1, metric1)?;
    let g2 = pullback_metric(spec2, metric2)?;
    let diff = g1.difference(&g2);
    let min_eigenvalue: Vec<T> = (0..diff.len()).map(|i| diff.eigenvalues(i).0).collect();
    let (worst_node, worst_value) =
        min_eigenvalue
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, T::infinity()),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    Ok(DominationReport {
        dominated: worst_value > T::zero(),
        min_eigenvalue,
        worst_node,
        worst_value,
    })
}

/// `pi^2 |deg L1 + deg L2|`.
pub fn ads_volume<T: Real>(deg_l1: i64, deg_l2: i64) -> T {
    T::PI() * T::PI() * T::lit((deg_l1 + deg_l2).unsigned_abs() as f64)
}

/// Tolerance on `|tau(v) - v| / |v|` for a phase-aligned representative.
pub const REALITY_TOLERANCE: f64 = 1e-6;

/// Phase-aligns `v` so that it is as close as possible to its image under
/// the real structure at the base. Returns the aligned vector, its unitary
/// norm and the relative deviation `|tau(v) - v| / |v|`.
fn phase_align<T: Real>(v: &[C<T>], weights: &[T]) -> (Vec<C<T>>, T, T) {
    let n = weights.len();
    let roots: Vec<T> = weights.iter().map(|x| x.sqrt()).collect();
    let unitary = |x: &[C<T>]| {
        x.iter()
            .zip(&roots)
            .map(|(a, r)| *a * *r)
            .collect::<Vec<_>>()
    };
    let tv: Vec<C<T>> = (0..n)
        .map(|i| v[n - 1 - i].conj() * weights[n - 1 - i])
        .collect();
    let lambda = hdot(&unitary(v), &unitary(&tv));
    let phase = if lambda.norm() > T::tiny() {
        C::from_polar(T::one(), lambda.arg() / T::lit(2.0))
    } else {
        C::new(T::one(), T::zero())
    };
    let aligned: Vec<C<T>> = v.iter().map(|x| *x * phase).collect();
    let diff: Vec<C<T>> = aligned
        .iter()
        .zip(&tv)
        .map(|(x, y)| *x - *y * phase.conj())
        .collect();
    let norm = cnorm(&unitary(&aligned));
    let dev = cnorm(&unitary(&diff)) / norm;
    (aligned, norm, dev)
}

/// Largest relative distance of a developed representative from the real
/// points of the base fiber, after phase alignment.
pub fn reality_deviation<T: Real>(sample: &DevelopingMapSample<T>) -> T {
    sample
        .vectors
        .iter()
        .map(|v| phase_align(v, &sample.base_weights).2)
        .fold(T::zero(), T::max)
}

/// `min Q(v, v) / |v|^2` over the developed representatives, after aligning
/// each one's phase so that it is fixed by the real structure at the base.
pub fn ads_containment<T: Real>(
    sample: &DevelopingMapSample<T>,
    pairing: &PairingData<T>,
) -> Result<T> {
    let q = pairing.ads_form();
    let mut best = T::infinity();
    for v in &sample.vectors {
        let (aligned, norm, dev) = phase_align(v, &sample.base_weights);
        if dev > T::lit(REALITY_TOLERANCE) {
            return Err(Error::NonRealRepresentative(dev.as_f64()));
        }
        let qv = q
            .mul_vec(&aligned)
            .iter()
            .zip(&aligned)
            .fold(C::new(T::zero(), T::zero()), |s, (x, y)| s + *x * *y);
        best = best.min(qv.re / (norm * norm));
    }
    Ok(best)
}
