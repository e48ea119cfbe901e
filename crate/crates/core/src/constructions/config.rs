//! Serializable descriptions of a pipeline run: chart, inputs, settings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{make_chart, ChartKind, DomainChart, FieldSpec};
use crate::error::Result;
use crate::scalar::{cplx, Real};
use crate::solver::BoundaryProfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartShape {
    Torus {
        #[serde(default = "default_modulus")]
        modulus: (f64, f64),
    },
    Disc {
        #[serde(default = "default_radius")]
        radius: f64,
    },
    Rectangle {
        width: f64,
        height: f64,
    },
}

fn default_modulus() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_radius() -> f64 {
    0.9
}

fn default_resolution() -> (usize, usize) {
    (64, 64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    #[serde(flatten)]
    pub shape: ChartShape,
    #[serde(default = "default_resolution")]
    pub resolution: (usize, usize),
}

impl ChartConfig {
    pub fn kind<T: Real>(&self) -> ChartKind<T> {
        match self.shape {
            ChartShape::Torus { modulus } => ChartKind::Torus {
                modulus: cplx(T::lit(modulus.0), T::lit(modulus.1)),
            },
            ChartShape::Disc { radius } => ChartKind::Disc {
                radius: T::lit(radius),
            },
            ChartShape::Rectangle { width, height } => ChartKind::Rectangle {
                width: T::lit(width),
                height: T::lit(height),
            },
        }
    }

    pub fn build<T: Real>(&self) -> Result<Arc<DomainChart<T>>> {
        make_chart(self.kind(), self.resolution)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.shape, ChartShape::Torus { .. })
    }
}

/// One SL(2,R) factor: `phi = [[0, a], [b, 0]]` on `L + L^{-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sl2rInputs {
    #[serde(default = "FieldSpec::zero")]
    pub a: FieldSpec,
    #[serde(default = "unit_spec")]
    pub b: FieldSpec,
    /// Defaults to `g - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg_l: Option<i64>,
    /// Dirichlet profile of `h`; defaults to the Poincare profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryProfile>,
}

fn unit_spec() -> FieldSpec {
    FieldSpec::real(1.0)
}

impl Default for Sl2rInputs {
    fn default() -> Self {
        Self {
            a: FieldSpec::zero(),
            b: unit_spec(),
            deg_l: None,
            boundary: None,
        }
    }
}

/// Holomorphic data of a run. Which fields apply depends on the construction:
/// `q2` for hyperbolic, almost-Fuchsian and the projective families, `beta`
/// for almost-Fuchsian, `q3` for convex RP^2, `q3`/`q4` for the RP^3
/// structures, `bundle1`/`bundle2` for anti-de Sitter, `m` for the
/// projective families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q3: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q4: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle1: Option<Sl2rInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle2: Option<Sl2rInputs>,
    #[serde(default = "default_genus")]
    pub genus: u32,
    /// Dirichlet profiles overriding the uniformizing defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<BoundaryProfile>>,
}

fn default_genus() -> u32 {
    2
}

impl Default for PipelineInputs {
    fn default() -> Self {
        Self {
            q2: None,
            q3: None,
            q4: None,
            beta: None,
            m: None,
            bundle1: None,
            bundle2: None,
            genus: default_genus(),
            boundary: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "one")]
    pub damping: f64,
}

fn default_iterations() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-10
}

fn one() -> f64 {
    1.0
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: default_iterations(),
            tolerance: default_tolerance(),
            damping: 1.0,
        }
    }
}

/// Pass/fail thresholds of the staged checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// `max |K + 1|` on interior nodes.
    pub curvature: f64,
    /// Minimum distance of the developed image from the real locus.
    pub real_locus: f64,
    /// Minimum of the anti-de Sitter form on developed representatives.
    pub containment: f64,
    /// Minimum transversality margin.
    pub margin: f64,
    /// Largest relative change of the minimum margin between the run and
    /// the half-resolution rerun.
    pub refinement_change: f64,
    /// Absolute flatness bound; above it the residual must instead decay
    /// under refinement with at least `flatness_order`.
    pub flatness: f64,
    pub flatness_order: f64,
    /// Bound on the pairing-constraint residual of projective frames.
    pub constraint: f64,
    /// Bound on the distance of developed representatives from real points.
    pub reality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            curvature: 0.02,
            real_locus: 1e-3,
            containment: 1e-6,
            margin: 1e-6,
            refinement_change: 0.2,
            flatness: 1e-8,
            flatness_order: 1.0,
            constraint: 1e-10,
            reality: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_fiber_samples")]
    pub fiber_samples: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Rerun at half resolution to test stability of the margin and the
    /// decay of the flatness residual.
    #[serde(default = "yes")]
    pub refinement: bool,
}

fn default_fiber_samples() -> usize {
    crate::transversality::DEFAULT_FIBER_SAMPLES
}

fn yes() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            fiber_samples: default_fiber_samples(),
            thresholds: Thresholds::default(),
            refinement: true,
        }
    }
}
