//! End-to-end certification pipelines: build, solve, assemble, check, and a
//! report with every stage's numbers.

mod config;
mod geometry;
mod topology;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::connection::{
    assemble_connection, curvature_residual, develop, gaussian_curvature, pullback_metric,
    real_locus_distance, real_structure, ConnectionField, DevelopingMapSample,
};
use crate::domain::{sample_field, ComplexField, DomainChart, FieldSpec};
use crate::error::{Error, Result};
use crate::higgs::{build_cyclic, build_sl2r, symmetric_power, tensor_product, HiggsBundleSpec};
use crate::scalar::Real;
use crate::solver::{
    hitchin_bound, solve_hitchin, Boundary, BoundaryProfile, HarmonicMetric, InitialGuess,
    SolverConfig,
};
use crate::transversality::{
    ads_containment, ads_volume, build_section, construction_connection, domination,
    hyperbolic_cross_check, reality_deviation, transversality_margin, Construction,
    ConstructionKind, MarginField, SectionFrameField,
};

pub use self::config::{
    ChartConfig, ChartShape, PipelineConfig, PipelineInputs, Sl2rInputs, SolverSettings, Thresholds,
};
pub use self::geometry::developed_hyperbolic_metric;
pub use self::topology::{report_topology, TopologyReport};

/// Outcome of a pipeline: certified, or the first stage that failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Failed(String),
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Certified => f.write_str("Certified"),
            Self::Failed(stage) => write!(f, "Failed({stage})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub residual: f64,
    pub solver_residual: f64,
    pub iterations: usize,
    pub det_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessSummary {
    /// `background` for the almost-Fuchsian deformation, else `connection`.
    pub gated_on: String,
    pub max_residual: f64,
    pub coarse_max_residual: Option<f64>,
    pub observed_order: Option<f64>,
    /// Residual of the deformed connection, reported only.
    pub deformed_max_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    pub global_min: f64,
    pub argmin_node: usize,
    pub argmin_point: (f64, f64),
    pub argmin_family: usize,
    pub argmin_theta: f64,
    pub samples: usize,
    pub coarse_min: Option<f64>,
    pub relative_change: Option<f64>,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationSummary {
    pub dominated: bool,
    pub worst_node: usize,
    pub worst_value: f64,
}

/// A named geometric quantity with its threshold. Checks with `gating`
/// unset are reported only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    pub name: String,
    pub value: Option<f64>,
    /// `"<"` or `">"`.
    pub comparison: String,
    pub threshold: f64,
    pub passed: bool,
    pub gating: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl GeometryCheck {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, Some(value), "<", threshold, value < threshold)
    }

    fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, Some(value), ">", threshold, value > threshold)
    }

    fn new(name: &str, value: Option<f64>, comparison: &str, threshold: f64, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            value,
            comparison: comparison.to_string(),
            threshold,
            passed,
            gating: true,
            note: None,
        }
    }

    fn error(name: &str, err: &Error) -> Self {
        let mut c = Self::new(name, None, "", 0.0, false);
        c.note = Some(err.to_string());
        c
    }

    fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub construction: String,
    pub version: String,
    pub config_digest: String,
    pub timestamp: Option<String>,
    pub chart: ChartConfig,
    pub inputs: PipelineInputs,
    pub resolutions: Vec<(usize, usize)>,
    pub solver: Option<SolverSummary>,
    pub flatness: Option<FlatnessSummary>,
    pub domination: Option<DominationSummary>,
    pub margin: Option<MarginSummary>,
    pub geometry: Vec<GeometryCheck>,
    pub ads_volume: Option<f64>,
    pub topology: Option<TopologyReport>,
    pub stages: Vec<StageRecord>,
    pub verdict: Verdict,
}

impl StructureReport {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Report plus the fields it was computed from.
#[derive(Clone, Debug)]
pub struct PipelineOutcome<T: Real> {
    pub report: StructureReport,
    pub spec: Option<HiggsBundleSpec<T>>,
    pub metric: Option<HarmonicMetric<T>>,
    pub connection: Option<ConnectionField<T>>,
    pub margin: Option<MarginField<T>>,
    pub development: Option<DevelopingMapSample<T>>,
}

/// SHA-256 of the canonical JSON of a run description.
pub fn config_digest(
    construction: ConstructionKind,
    inputs: &PipelineInputs,
    chart: &ChartConfig,
    config: &PipelineConfig,
) -> String {
    let doc = serde_json::json!({
        "construction": construction.name(),
        "inputs": inputs,
        "chart": chart,
        "config": config,
    });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

/// The bundle a construction lives on, with the extra data its checks need.
struct Built<T: Real> {
    spec: HiggsBundleSpec<T>,
    construction: Construction<T>,
    q2: Option<ComplexField<T>>,
    factors: Option<(HiggsBundleSpec<T>, HiggsBundleSpec<T>)>,
    profiles: Vec<BoundaryProfile>,
}

fn poincare(scale: f64, power: f64) -> BoundaryProfile {
    BoundaryProfile::Poincare { scale, power }
}

fn sl2r_factor<T: Real>(
    chart: &Arc<DomainChart<T>>,
    input: &Sl2rInputs,
    genus: u32,
) -> Result<(HiggsBundleSpec<T>, BoundaryProfile)> {
    let a = sample_field(chart, &input.a, 4)?;
    let b = sample_field(chart, &input.b, 0)?;
    let deg = input.deg_l.unwrap_or(i64::from(genus) - 1);
    let spec = build_sl2r(a, b, deg, genus)?;
    Ok((
        spec,
        input.boundary.clone().unwrap_or_else(|| poincare(1.0, 1.0)),
    ))
}

fn missing(path: &str) -> Error {
    Error::SchemaViolation {
        path: path.to_string(),
        message: "required".to_string(),
    }
}

fn build<T: Real>(
    kind: ConstructionKind,
    inputs: &PipelineInputs,
    chart: &Arc<DomainChart<T>>,
) -> Result<Built<T>> {
    use ConstructionKind as K;
    let zero = FieldSpec::zero();
    let genus = inputs.genus;
    let mut built = match kind {
        K::Hyperbolic | K::AlmostFuchsian => {
            let q2 = inputs.q2.clone().unwrap_or(zero);
            let (spec, profile) = sl2r_factor(
                chart,
                &Sl2rInputs {
                    a: q2,
                    ..Sl2rInputs::default()
                },
                genus,
            )?;
            let construction = if kind == K::Hyperbolic {
                Construction::Hyperbolic
            } else {
                let beta = inputs
                    .beta
                    .as_ref()
                    .ok_or_else(|| missing("/inputs/beta"))?;
                Construction::AlmostFuchsian(sample_field(chart, beta, 0)?)
            };
            Built {
                q2: spec.sl2r_entries().map(|(a, _)| a.clone()),
                spec,
                construction,
                factors: None,
                profiles: vec![profile],
            }
        }
        K::ConvexRp2 => {
            let q3 = sample_field(chart, inputs.q3.as_ref().unwrap_or(&zero), 6)?;
            Built {
                spec: build_cyclic(3, vec![q3])?.with_genus(genus),
                construction: Construction::ConvexRp2,
                q2: None,
                factors: None,
                profiles: vec![poincare(2.0, 2.0)],
            }
        }
        K::Rp3M | K::Rp3Mprime => {
            let q3 = sample_field(chart, inputs.q3.as_ref().unwrap_or(&zero), 6)?;
            let q4 = sample_field(chart, inputs.q4.as_ref().unwrap_or(&zero), 8)?;
            Built {
                spec: build_cyclic(4, vec![q3, q4])?.with_genus(genus),
                construction: if kind == K::Rp3M {
                    Construction::Rp3M
                } else {
                    Construction::Rp3Mprime
                },
                q2: None,
                factors: None,
                profiles: vec![poincare(6.0, 3.0), poincare(2.0, 1.0)],
            }
        }
        K::AdsM => {
            let first = inputs.bundle1.clone().unwrap_or_default();
            let second = inputs
                .bundle2
                .as_ref()
                .ok_or_else(|| missing("/inputs/bundle2"))?;
            let (s1, p1) = sl2r_factor(chart, &first, genus)?;
            let (s2, p2) = sl2r_factor(chart, second, genus)?;
            Built {
                spec: tensor_product(&s1, &s2)?,
                construction: Construction::AdsM,
                q2: None,
                factors: Some((s1, s2)),
                profiles: vec![p1, p2],
            }
        }
        K::ProjectiveUc | K::ProjectiveUr => {
            let m = inputs
                .m
                .unwrap_or(if kind == K::ProjectiveUc { 3 } else { 5 });
            let q2 = inputs.q2.clone().unwrap_or(zero);
            let (base, profile) = sl2r_factor(
                chart,
                &Sl2rInputs {
                    a: q2,
                    ..Sl2rInputs::default()
                },
                genus,
            )?;
            Built {
                spec: symmetric_power(&base, m)?,
                construction: if kind == K::ProjectiveUc {
                    Construction::ProjectiveUc
                } else {
                    Construction::ProjectiveUr
                },
                q2: base.sl2r_entries().map(|(a, _)| a.clone()),
                factors: None,
                profiles: vec![profile],
            }
        }
    };
    if let Some(p) = &inputs.boundary {
        built.profiles = p.clone();
    }
    Ok(built)
}

fn solver_config<T: Real>(
    settings: &SolverSettings,
    periodic: bool,
    profiles: &[BoundaryProfile],
) -> SolverConfig<T> {
    SolverConfig {
        max_iterations: settings.max_iterations,
        residual_tolerance: T::lit(settings.tolerance),
        damping: T::lit(settings.damping),
        boundary: if periodic {
            Boundary::Periodic
        } else {
            Boundary::Dirichlet(profiles.to_vec())
        },
        initial_guess: InitialGuess::ConstantBalance,
    }
}

/// A construction's bundle, solver settings and chart, ready to solve.
pub struct Prepared<T: Real> {
    pub chart: Arc<DomainChart<T>>,
    pub spec: HiggsBundleSpec<T>,
    pub construction: Construction<T>,
    pub solver: SolverConfig<T>,
}

pub fn prepare<T: Real>(
    construction: ConstructionKind,
    inputs: &PipelineInputs,
    chart_config: &ChartConfig,
    config: &PipelineConfig,
) -> Result<Prepared<T>> {
    let chart = chart_config.build::<T>()?;
    let built = build(construction, inputs, &chart)?;
    let solver = solver_config(&config.solver, chart_config.is_periodic(), &built.profiles);
    Ok(Prepared {
        chart,
        spec: built.spec,
        construction: built.construction,
        solver,
    })
}

/// Everything computed at one resolution.
struct Pass<T: Real> {
    built: Built<T>,
    metric: HarmonicMetric<T>,
    background: ConnectionField<T>,
    connection: ConnectionField<T>,
    section: Result<SectionFrameField<T>>,
    margin: Result<MarginField<T>>,
}

fn max_of<T: Real>(v: &[T]) -> f64 {
    v.iter().fold(T::zero(), |m, x| m.max(*x)).as_f64()
}

fn run_pass<T: Real>(
    kind: ConstructionKind,
    inputs: &PipelineInputs,
    chart: &Arc<DomainChart<T>>,
    periodic: bool,
    config: &PipelineConfig,
) -> Result<Pass<T>> {
    let built = build(kind, inputs, chart)?;
    let cfg = solver_config(&config.solver, periodic, &built.profiles);
    let metric = solve_hitchin(&built.spec, chart, &cfg)?;
    let background = assemble_connection(&built.spec, &metric)?;
    let connection = construction_connection(&built.spec, &metric, &built.construction)?;
    let section = build_section(&built.spec, &metric, kind, config.fiber_samples);
    let margin = match &section {
        Ok(s) => transversality_margin(&connection, s, kind.directions()),
        Err(e) => Err(e.clone()),
    };
    Ok(Pass {
        built,
        metric,
        background,
        connection,
        section,
        margin,
    })
}

/// Node the developing map starts from: the innermost ring on a disc, the
/// center elsewhere.
pub fn base_node<T: Real>(chart: &DomainChart<T>) -> usize {
    let (n1, n2) = chart.resolution();
    match chart.kind() {
        crate::domain::ChartKind::Disc { .. } => chart.index(0, 0),
        _ => chart.index(n1 / 2, n2 / 2),
    }
}

struct Stages {
    records: Vec<StageRecord>,
}

impl Stages {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.records.push(StageRecord {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn verdict(&self) -> Verdict {
        self.records
            .iter()
            .find(|r| !r.passed)
            .map_or(Verdict::Certified, |r| Verdict::Failed(r.name.clone()))
    }
}

/// Runs a construction end to end. Invalid inputs are errors; numerical
/// failures of a stage are recorded in the verdict.
///
/// Stages: `solve`, `flatness`, `domination` (anti-de Sitter only),
/// `transversality`, `geometry`.
pub fn run_pipeline<T: Real>(
    construction: ConstructionKind,
    inputs: &PipelineInputs,
    chart_config: &ChartConfig,
    config: &PipelineConfig,
) -> Result<PipelineOutcome<T>> {
    let chart = chart_config.build::<T>()?;
    let periodic = chart_config.is_periodic();
    let thr = &config.thresholds;
    let (n1, n2) = chart_config.resolution;
    let mut report = StructureReport {
        construction: construction.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config_digest(construction, inputs, chart_config, config),
        timestamp: None,
        chart: chart_config.clone(),
        inputs: inputs.clone(),
        resolutions: vec![(n1, n2)],
        solver: None,
        flatness: None,
        domination: None,
        margin: None,
        geometry: Vec::new(),
        ads_volume: None,
        topology: None,
        stages: Vec::new(),
        verdict: Verdict::Certified,
    };
    let mut stages = Stages {
        records: Vec::new(),
    };
    let mut outcome = PipelineOutcome {
        report: report.clone(),
        spec: None,
        metric: None,
        connection: None,
        margin: None,
        development: None,
    };
    if matches!(
        construction,
        ConstructionKind::Rp3M
            | ConstructionKind::Rp3Mprime
            | ConstructionKind::ProjectiveUc
            | ConstructionKind::ProjectiveUr
    ) {
        let rank = match construction {
            ConstructionKind::ProjectiveUc | ConstructionKind::ProjectiveUr => {
                inputs
                    .m
                    .unwrap_or(if construction == ConstructionKind::ProjectiveUc {
                        3
                    } else {
                        5
                    })
                    + 1
            }
            _ => 4,
        };
        report.topology = Some(report_topology(construction, inputs.genus, rank)?);
    }

    // solve
    let fine = match run_pass(construction, inputs, &chart, periodic, config) {
        Ok(p) => p,
        Err(e @ Error::NonConvergence { .. }) => {
            stages.push("solve", false, e.to_string());
            report.verdict = stages.verdict();
            report.stages = stages.records;
            outcome.report = report;
            return Ok(outcome);
        }
        Err(e) => return Err(e),
    };
    let metric = &fine.metric;
    report.solver = Some(SolverSummary {
        residual: metric.residual.as_f64(),
        solver_residual: metric.solver_residual.as_f64(),
        iterations: metric.iterations,
        det_defect: metric.det_defect().as_f64(),
    });
    stages.push(
        "solve",
        metric.converged,
        format!(
            "residual {:e} after {} iterations",
            metric.residual.as_f64(),
            metric.iterations
        ),
    );

    let coarse = if config.refinement {
        let res = (n1 / 2, n2 / 2);
        match chart.with_resolution(res) {
            Ok(c) => {
                report.resolutions.push(res);
                run_pass(construction, inputs, &c, periodic, config).ok()
            }
            Err(_) => None,
        }
    } else {
        None
    };

    // flatness
    let is_af = construction == ConstructionKind::AlmostFuchsian;
    let fine_flat = max_of(&curvature_residual(&fine.background));
    let coarse_flat = coarse
        .as_ref()
        .map(|c| max_of(&curvature_residual(&c.background)));
    let order = coarse_flat
        .filter(|c| *c > 0.0 && fine_flat > 0.0)
        .map(|c| (c / fine_flat).log2());
    let flat_ok = fine_flat < thr.flatness || order.is_some_and(|o| o >= thr.flatness_order);
    report.flatness = Some(FlatnessSummary {
        gated_on: if is_af { "background" } else { "connection" }.to_string(),
        max_residual: fine_flat,
        coarse_max_residual: coarse_flat,
        observed_order: order,
        deformed_max_residual: is_af.then(|| max_of(&curvature_residual(&fine.connection))),
    });
    stages.push(
        "flatness",
        flat_ok,
        match order {
            Some(o) => format!("max residual {fine_flat:e}, observed order {o:.3}"),
            None => format!("max residual {fine_flat:e}"),
        },
    );

    // domination
    if let Some((s1, s2)) = &fine.built.factors {
        let factors = metric.factors();
        match domination(s1, &factors[0], s2, &factors[1]) {
            Ok(d) => {
                report.domination = Some(DominationSummary {
                    dominated: d.dominated,
                    worst_node: d.worst_node,
                    worst_value: d.worst_value.as_f64(),
                });
                stages.push(
                    "domination",
                    d.dominated,
                    format!("min eigenvalue of g1 - g2: {:e}", d.worst_value.as_f64()),
                );
            }
            Err(e) => stages.push("domination", false, e.to_string()),
        }
        let deg = |s: &HiggsBundleSpec<T>| s.degrees().first().copied().unwrap_or(0);
        report.ads_volume = Some(ads_volume::<f64>(deg(s1), deg(s2)));
    }

    // transversality
    match &fine.margin {
        Ok(mf) => {
            let min = mf.min.as_f64();
            let coarse_min = coarse
                .as_ref()
                .and_then(|c| c.margin.as_ref().ok())
                .map(|m| m.min.as_f64());
            let change = coarse_min.map(|c| (min - c).abs() / min.max(f64::MIN_POSITIVE));
            let stable = !config.refinement || change.is_some_and(|c| c < thr.refinement_change);
            let z = chart.node(mf.argmin.node);
            report.margin = Some(MarginSummary {
                global_min: min,
                argmin_node: mf.argmin.node,
                argmin_point: (z.re.as_f64(), z.im.as_f64()),
                argmin_family: mf.argmin.family,
                argmin_theta: mf.argmin.theta.as_f64(),
                samples: mf.samples,
                coarse_min,
                relative_change: change,
                stable,
            });
            let passed = min > thr.margin && stable;
            stages.push(
                "transversality",
                passed,
                format!("min margin {min:e}, refinement change {change:?}"),
            );
        }
        Err(e) => stages.push("transversality", false, e.to_string()),
    }

    // geometry
    let mut checks = Vec::new();
    let development = match &fine.section {
        Ok(section) if !is_af => match develop(&fine.connection, section, base_node(&chart)) {
            Ok(d) => Some(d),
            Err(e) => {
                checks.push(GeometryCheck::error("development", &e));
                None
            }
        },
        _ => None,
    };
    geometry_checks(construction, &fine, development.as_ref(), thr, &mut checks);
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.gating && !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    stages.push(
        "geometry",
        failed.is_empty(),
        if failed.is_empty() {
            format!(
                "{} checks passed",
                checks.iter().filter(|c| c.gating).count()
            )
        } else {
            format!("failed: {}", failed.join(", "))
        },
    );
    report.geometry = checks;

    report.verdict = stages.verdict();
    report.stages = stages.records;
    Ok(PipelineOutcome {
        report,
        margin: fine.margin.ok(),
        connection: Some(fine.connection),
        metric: Some(fine.metric),
        spec: Some(fine.built.spec),
        development,
    })
}

fn geometry_checks<T: Real>(
    kind: ConstructionKind,
    pass: &Pass<T>,
    dev: Option<&DevelopingMapSample<T>>,
    thr: &Thresholds,
    checks: &mut Vec<GeometryCheck>,
) {
    use ConstructionKind as K;
    let spec = &pass.built.spec;
    let metric = &pass.metric;
    if let (Some(q2), K::Hyperbolic | K::AlmostFuchsian | K::ProjectiveUc | K::ProjectiveUr) =
        (&pass.built.q2, kind)
    {
        let base = metric.factors().first().unwrap_or(metric);
        checks.push(GeometryCheck::below(
            "hitchin_bound",
            hitchin_bound(base, q2).as_f64(),
            1.0,
        ));
    }
    match kind {
        K::Hyperbolic => {
            if let Ok(mf) = &pass.margin {
                match hyperbolic_cross_check(spec, metric, mf) {
                    Ok(cc) => checks.push(GeometryCheck::below(
                        "zero_set_disagreements",
                        cc.zero_set_disagreements as f64,
                        0.5,
                    )),
                    Err(e) => checks.push(GeometryCheck::error("zero_set_disagreements", &e)),
                }
            }
            if let Some(d) = dev {
                match real_structure(spec, metric) {
                    Ok(tau) => checks.push(GeometryCheck::above(
                        "real_locus_distance",
                        real_locus_distance(d, &tau).as_f64(),
                        thr.real_locus,
                    )),
                    Err(e) => checks.push(GeometryCheck::error("real_locus_distance", &e)),
                }
                let k = gaussian_curvature(&developed_hyperbolic_metric(d));
                checks.push(GeometryCheck::below(
                    "developed_curvature_deviation",
                    k.max_deviation(-T::one()).as_f64(),
                    thr.curvature,
                ));
            }
            if let Ok(g) = pullback_metric(spec, metric) {
                let k = gaussian_curvature(&g);
                let fuchsian = pass.built.q2.as_ref().is_some_and(|q| q.is_zero());
                let mean = GeometryCheck::new(
                    "pullback_curvature_mean",
                    Some(k.mean().as_f64()),
                    "",
                    0.0,
                    true,
                );
                checks.push(mean.informational());
                let dev = GeometryCheck::below(
                    "pullback_curvature_deviation",
                    k.max_deviation(-T::one()).as_f64(),
                    thr.curvature,
                );
                // the harmonic-map pullback has curvature -1 only when q2 = 0
                checks.push(if fuchsian { dev } else { dev.informational() });
            }
        }
        K::ConvexRp2 | K::Rp3M | K::Rp3Mprime | K::ProjectiveUr => {
            if let Some(d) = dev {
                checks.push(GeometryCheck::below(
                    "reality_deviation",
                    reality_deviation(d).as_f64(),
                    thr.reality,
                ));
            }
        }
        K::AdsM => {
            if let (Some(d), Some(p)) = (dev, spec.pairing()) {
                match ads_containment(d, p) {
                    Ok(v) => checks.push(GeometryCheck::above(
                        "ads_containment",
                        v.as_f64(),
                        thr.containment,
                    )),
                    Err(e) => checks.push(GeometryCheck::error("ads_containment", &e)),
                }
            }
        }
        K::AlmostFuchsian | K::ProjectiveUc => {}
    }
    if matches!(kind, K::ProjectiveUc | K::ProjectiveUr) {
        if let Ok(s) = &pass.section {
            checks.push(GeometryCheck::below(
                "constraint_residual",
                s.constraint_residual.as_f64(),
                thr.constraint,
            ));
        }
    }
    if let Some(d) = dev {
        let deficient = d
            .jacobian_rank
            .iter()
            .filter(|r| **r < 2 + d.fiber_dim)
            .count();
        let expected = 2 + d.fiber_dim;
        let c = GeometryCheck::new(
            "rank_deficient_nodes",
            Some(deficient as f64),
            "",
            0.0,
            true,
        );
        let mut c = c.informational();
        c.note = Some(format!("developing map Jacobian rank below {expected}"));
        checks.push(c);
    }
}
