//! Candidate sections and subbundles, written in the unitary frame
//! `t = H^{1/2} v`, where every construction's fiber is node independent.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ComplexField, DomainChart};
use crate::error::{Error, Result};
use crate::higgs::{BundleKind, HiggsBundleSpec};
use crate::linalg::null_space;
use crate::scalar::{cplx, Real, C};
use crate::solver::HarmonicMetric;

/// The geometric constructions that can be certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Hyperbolic,
    AlmostFuchsian,
    ConvexRp2,
    #[serde(rename = "rp3_m")]
    Rp3M,
    #[serde(rename = "rp3_mprime")]
    Rp3Mprime,
    #[serde(rename = "ads_m")]
    AdsM,
    ProjectiveUc,
    ProjectiveUr,
}

impl ConstructionKind {
    pub const ALL: [ConstructionKind; 8] = [
        ConstructionKind::Hyperbolic,
        ConstructionKind::AlmostFuchsian,
        ConstructionKind::ConvexRp2,
        ConstructionKind::Rp3M,
        ConstructionKind::Rp3Mprime,
        ConstructionKind::AdsM,
        ConstructionKind::ProjectiveUc,
        ConstructionKind::ProjectiveUr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstructionKind::Hyperbolic => "hyperbolic",
            ConstructionKind::AlmostFuchsian => "almost_fuchsian",
            ConstructionKind::ConvexRp2 => "convex_rp2",
            ConstructionKind::Rp3M => "rp3_m",
            ConstructionKind::Rp3Mprime => "rp3_mprime",
            ConstructionKind::AdsM => "ads_m",
            ConstructionKind::ProjectiveUc => "projective_uc",
            ConstructionKind::ProjectiveUr => "projective_ur",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the target is a real projective space (quotient by real
    /// scalars) rather than a complex one.
    pub fn field(self) -> ProjectiveField {
        match self {
            ConstructionKind::Hyperbolic
            | ConstructionKind::AlmostFuchsian
            | ConstructionKind::ProjectiveUc => ProjectiveField::Complex,
            _ => ProjectiveField::Real,
        }
    }

    pub fn directions(self) -> Directions {
        match self {
            ConstructionKind::Hyperbolic
            | ConstructionKind::AlmostFuchsian
            | ConstructionKind::ConvexRp2 => Directions::SurfaceZZbar,
            _ => Directions::SurfacePlusFiber,
        }
    }
}

/// A construction together with its extra data.
#[derive(Clone, Debug)]
pub enum Construction<T: Real> {
    Hyperbolic,
    /// Deformation `beta` of the uniformizing bundle's holomorphic structure.
    AlmostFuchsian(ComplexField<T>),
    ConvexRp2,
    Rp3M,
    Rp3Mprime,
    AdsM,
    ProjectiveUc,
    ProjectiveUr,
}

impl<T: Real> Construction<T> {
    pub fn kind(&self) -> ConstructionKind {
        match self {
            Construction::Hyperbolic => ConstructionKind::Hyperbolic,
            Construction::AlmostFuchsian(_) => ConstructionKind::AlmostFuchsian,
            Construction::ConvexRp2 => ConstructionKind::ConvexRp2,
            Construction::Rp3M => ConstructionKind::Rp3M,
            Construction::Rp3Mprime => ConstructionKind::Rp3Mprime,
            Construction::AdsM => ConstructionKind::AdsM,
            Construction::ProjectiveUc => ConstructionKind::ProjectiveUc,
            Construction::ProjectiveUr => ConstructionKind::ProjectiveUr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProjectiveField {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Directions {
    SurfaceZZbar,
    SurfacePlusFiber,
}

/// Fiber of the candidate subbundle in unitary coordinates.
#[derive(Clone, Debug)]
pub enum FiberModel<T: Real> {
    /// A line section.
    Point(Vec<C<T>>),
    /// The circle `t_j(theta) = e^{i c_j theta} t0_j`.
    Circle { t0: Vec<C<T>>, charges: Vec<i32> },
    /// `{t : t_1 conj(t_2) + t_3 conj(t_4) + ... = 0}`, intersected with the
    /// real locus `t_i = conj(t_{n+1-i})` when `real`. Sampled along circles
    /// through seeded random points.
    Pairing {
        real: bool,
        families: Vec<Vec<C<T>>>,
        charges: Vec<i32>,
    },
}

/// One evaluation point of the fiber.
#[derive(Clone, Debug)]
pub struct FiberSample<T: Real> {
    pub family: usize,
    pub theta: T,
    pub t: Vec<C<T>>,
    /// Real tangent directions of the fiber at `t` (unitary coordinates).
    pub tangents: Vec<Vec<C<T>>>,
}

/// `sum_k t_{2k} conj(t_{2k+1})`.
pub fn pairing_constraint<T: Real>(t: &[C<T>]) -> C<T> {
    t.chunks(2).fold(C::new(T::zero(), T::zero()), |acc, p| {
        acc + p[0] * p[1].conj()
    })
}

/// `max_i |t_i - conj(t_{n-1-i})|`.
pub fn reality_defect<T: Real>(t: &[C<T>]) -> T {
    let n = t.len();
    (0..n)
        .map(|i| (t[i] - t[n - 1 - i].conj()).norm())
        .fold(T::zero(), T::max)
}

impl<T: Real> FiberModel<T> {
    pub fn fiber_dim(&self) -> usize {
        match self {
            FiberModel::Point(_) => 0,
            FiberModel::Circle { .. } => 1,
            FiberModel::Pairing { real, families, .. } => {
                let n = families[0].len();
                if *real {
                    n - 3
                } else {
                    2 * n - 4
                }
            }
        }
    }

    pub fn is_circle_family(&self) -> bool {
        !matches!(self, FiberModel::Point(_))
    }

    pub fn families(&self) -> usize {
        match self {
            FiberModel::Pairing { families, .. } => families.len(),
            FiberModel::Circle { .. } => 1,
            FiberModel::Point(_) => 1,
        }
    }

    /// The fiber point and tangents at `(family, theta)`.
    pub fn sample(&self, family: usize, theta: T) -> FiberSample<T> {
        let rotate = |t0: &[C<T>], charges: &[i32]| -> (Vec<C<T>>, Vec<C<T>>) {
            let t: Vec<C<T>> = t0
                .iter()
                .zip(charges)
                .map(|(z, &c)| *z * C::from_polar(T::one(), T::lit(c as f64) * theta))
                .collect();
            let dt = t
                .iter()
                .zip(charges)
                .map(|(z, &c)| *z * cplx(T::zero(), T::lit(c as f64)))
                .collect();
            (t, dt)
        };
        match self {
            FiberModel::Point(t) => FiberSample {
                family,
                theta,
                t: t.clone(),
                tangents: Vec::new(),
            },
            FiberModel::Circle { t0, charges } => {
                let (t, dt) = rotate(t0, charges);
                FiberSample {
                    family,
                    theta,
                    t,
                    tangents: vec![dt],
                }
            }
            FiberModel::Pairing {
                real,
                families,
                charges,
            } => {
                let (t, _) = rotate(&families[family], charges);
                let tangents = pairing_tangents(&t, *real);
                FiberSample {
                    family,
                    theta,
                    t,
                    tangents,
                }
            }
        }
    }
}

/// Real basis of the tangent space of the constraint cone at `t`.
fn pairing_tangents<T: Real>(t: &[C<T>], real: bool) -> Vec<Vec<C<T>>> {
    let n = t.len();
    let dim = 2 * n;
    let unit = |k: usize| -> Vec<C<T>> {
        let mut e = vec![C::new(T::zero(), T::zero()); n];
        e[k / 2] = if k.is_multiple_of(2) {
            cplx(T::one(), T::zero())
        } else {
            cplx(T::zero(), T::one())
        };
        e
    };
    // differential of the constraint, then of the reality condition
    let dg: Vec<C<T>> = (0..dim)
        .map(|k| {
            let e = unit(k);
            t.chunks(2)
                .zip(e.chunks(2))
                .fold(C::new(T::zero(), T::zero()), |acc, (p, d)| {
                    acc + d[0] * p[1].conj() + p[0] * d[1].conj()
                })
        })
        .collect();
    let mut rows = vec![
        dg.iter().map(|z| z.re).collect::<Vec<T>>(),
        dg.iter().map(|z| z.im).collect(),
    ];
    if real {
        for i in 0..n / 2 {
            let d: Vec<C<T>> = (0..dim)
                .map(|k| {
                    let e = unit(k);
                    e[i] - e[n - 1 - i].conj()
                })
                .collect();
            rows.push(d.iter().map(|z| z.re).collect());
            rows.push(d.iter().map(|z| z.im).collect());
        }
    }
    null_space(&rows, dim)
        .into_iter()
        .map(|v| v.chunks(2).map(|p| cplx(p[0], p[1])).collect())
        .collect()
}

/// Seeded points of the pairing variety (exact to rounding).
fn pairing_families<T: Real>(n: usize, real: bool, count: usize, seed: u64) -> Vec<Vec<C<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        cplx(
            T::lit(rng.random_range(-1.0..1.0)),
            T::lit(rng.random_range(-1.0..1.0)),
        )
    };
    (0..count)
        .map(|_| {
            let mut t = vec![C::new(T::zero(), T::zero()); n];
            let half = if real { n / 2 } else { n };
            for z in t.iter_mut().take(half).skip(1) {
                *z = draw(&mut rng);
            }
            // keep t_2 away from zero so t_1 is well conditioned
            if t[1].norm() < T::lit(0.3) {
                t[1] = t[1] + cplx(T::lit(0.5), T::zero());
            }
            if real {
                for i in 1..n / 2 {
                    t[n - 1 - i] = t[i].conj();
                }
                // t_1 enters twice: t_1 conj(t_2) and t_{n-1} conj(t_n) = conj(t_2) t_1
                let rest = pairing_constraint(&t);
                t[0] = -rest / (t[1].conj() * T::lit(2.0));
                t[n - 1] = t[0].conj();
            } else {
                let rest = pairing_constraint(&t);
                t[0] = -rest / t[1].conj();
            }
            t
        })
        .collect()
}

/// Candidate subbundle over a chart: the section vectors are
/// `v = frame * t` in the holomorphic frame, for each fiber sample `t`.
#[derive(Clone, Debug)]
pub struct SectionFrameField<T: Real> {
    chart: Arc<DomainChart<T>>,
    rank: usize,
    pub field: ProjectiveField,
    pub model: FiberModel<T>,
    /// Diagonal frame per node (`H^{-1/2}` for the built constructions).
    pub frame: Vec<Vec<C<T>>>,
    /// `H^{1/2}` per node: maps holomorphic to unitary coordinates.
    pub unitary: Vec<Vec<T>>,
    pub samples: Vec<FiberSample<T>>,
    /// Max over samples of the constraint and reality defects.
    pub constraint_residual: T,
}

impl<T: Real> SectionFrameField<T> {
    pub fn chart(&self) -> &Arc<DomainChart<T>> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// A line section given by per-node vectors in the holomorphic frame
    /// (stored as the diagonal frame `diag(v)` acting on `(1, ..., 1)`);
    /// margins are measured in the standard Hermitian product.
    pub fn from_vectors(
        chart: &Arc<DomainChart<T>>,
        vectors: Vec<Vec<C<T>>>,
        field: ProjectiveField,
    ) -> Self {
        let rank = vectors[0].len();
        let ones = vec![C::new(T::one(), T::zero()); rank];
        Self {
            chart: chart.clone(),
            rank,
            field,
            model: FiberModel::Point(ones.clone()),
            frame: vectors,
            unitary: vec![vec![T::one(); rank]; chart.len()],
            samples: vec![FiberSample {
                family: 0,
                theta: T::zero(),
                t: ones,
                tangents: Vec::new(),
            }],
            constraint_residual: T::zero(),
        }
    }

    /// Section vector at a node in the holomorphic frame.
    pub fn vector(&self, node: usize, sample: usize) -> Vec<C<T>> {
        self.frame[node]
            .iter()
            .zip(&self.samples[sample].t)
            .map(|(f, t)| *f * *t)
            .collect()
    }

    /// Multiplies every section vector by a nowhere-zero scalar field.
    pub fn rescaled(&self, f: &ComplexField<T>) -> Self {
        let mut out = self.clone();
        for (fr, s) in out.frame.iter_mut().zip(f.values()) {
            for x in fr.iter_mut() {
                *x = *x * *s;
            }
        }
        out
    }
}

/// Default number of angle samples on circle fibers.
pub const DEFAULT_FIBER_SAMPLES: usize = 64;

const PAIRING_FAMILIES: usize = 4;
const PAIRING_SEED: u64 = 0x5ee_d0ff_1be5;

fn compatible(construction: ConstructionKind, kind: BundleKind) -> bool {
    use ConstructionKind as K;
    match construction {
        K::Hyperbolic | K::AlmostFuchsian => kind == BundleKind::SL2R,
        K::ConvexRp2 => kind == BundleKind::Cyclic3,
        K::Rp3M | K::Rp3Mprime => kind == BundleKind::Cyclic4,
        K::AdsM => kind == BundleKind::TensorSL2xSL2,
        K::ProjectiveUc => matches!(kind, BundleKind::SymmetricPower(m) if m >= 3 && m % 2 == 1),
        K::ProjectiveUr => matches!(kind, BundleKind::SymmetricPower(m) if m >= 5 && m % 2 == 1),
    }
}

/// Builds the candidate subbundle of a construction, sampled with
/// `fiber_samples` angles on circle fibers.
pub fn build_section<T: Real>(
    spec: &HiggsBundleSpec<T>,
    metric: &HarmonicMetric<T>,
    construction: ConstructionKind,
    fiber_samples: usize,
) -> Result<SectionFrameField<T>> {
    if !compatible(construction, spec.kind()) {
        return Err(Error::IncompatibleConstruction {
            construction: construction.name().to_string(),
            kind: spec.kind().to_string(),
        });
    }
    if **spec.chart() != **metric.chart() {
        return Err(Error::ChartMismatch);
    }
    let n = spec.rank();
    let z = C::new(T::zero(), T::zero());
    let o = C::new(T::one(), T::zero());
    let unit = |k: usize| {
        (0..n)
            .map(|i| if i == k { o } else { z })
            .collect::<Vec<_>>()
    };
    use ConstructionKind as K;
    let model = match construction {
        K::Hyperbolic => FiberModel::Point(unit(0)),
        K::AlmostFuchsian => FiberModel::Point(unit(1)),
        K::ConvexRp2 => FiberModel::Point(unit(1)),
        K::Rp3M => FiberModel::Circle {
            t0: vec![z, o, o, z],
            charges: vec![0, 1, -1, 0],
        },
        K::Rp3Mprime | K::AdsM => FiberModel::Circle {
            t0: vec![o, z, z, o],
            charges: vec![1, 0, 0, -1],
        },
        K::ProjectiveUc | K::ProjectiveUr => {
            let real = construction == K::ProjectiveUr;
            let mut charges = vec![0; n];
            charges[0] = 1;
            charges[1] = 1;
            charges[n - 2] = -1;
            charges[n - 1] = -1;
            FiberModel::Pairing {
                real,
                families: pairing_families(n, real, PAIRING_FAMILIES, PAIRING_SEED),
                charges,
            }
        }
    };
    let per_family = match &model {
        FiberModel::Point(_) => 1,
        FiberModel::Circle { .. } => fiber_samples.max(1),
        FiberModel::Pairing { .. } => (fiber_samples / 8).max(4),
    };
    let mut samples = Vec::new();
    for fam in 0..model.families() {
        for k in 0..per_family {
            let theta = T::TAU() * T::from_usize_(k) / T::from_usize_(per_family);
            samples.push(model.sample(fam, theta));
        }
    }
    let field = construction.field();
    let mut residual = T::zero();
    for s in &samples {
        if let FiberModel::Pairing { .. } = model {
            residual = residual.max(pairing_constraint(&s.t).norm());
        }
        if field == ProjectiveField::Real {
            residual = residual.max(reality_defect(&s.t));
        }
    }
    let chart = spec.chart();
    let frame = (0..chart.len())
        .map(|node| {
            metric
                .diag_at(node)
                .iter()
                .map(|h| C::new(T::one() / h.sqrt(), T::zero()))
                .collect()
        })
        .collect();
    let unitary = (0..chart.len())
        .map(|node| metric.diag_at(node).iter().map(|h| h.sqrt()).collect())
        .collect();
    Ok(SectionFrameField {
        chart: chart.clone(),
        rank: n,
        field,
        model,
        frame,
        unitary,
        samples,
        constraint_residual: residual,
    })
}
