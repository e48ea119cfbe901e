//! Run configuration, orchestration and artifacts: `report.json`,
//! `fields/h_<i>.csv`, `fields/margin.csv`, `plots/developing.svg`,
//! `plots/margin.svg`.
//!
//! Field CSVs use the columns of [`crate::domain::write_field_csv`];
//! `margin.csv` has `index1,index2,re_z,im_z,margin`.

mod commands;
mod schema;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::connection::DevelopingMapSample;
use crate::constructions::{
    run_pipeline, ChartConfig, PipelineConfig, PipelineInputs, PipelineOutcome, SolverSettings,
    StructureReport, Thresholds, Verdict,
};
use crate::domain::{write_field_csv, ComplexField};
use crate::error::{Error, Result};
use crate::scalar::cplx;
use crate::solver::HarmonicMetric;
use crate::transversality::{ConstructionKind, MarginField};

pub use self::commands::{check_command, develop_command, solve_command, StageOutcome};
pub use self::schema::{Validator, Violation, RUN_CONFIG_SCHEMA};
pub use self::svg::{developing_svg, margin_svg};

/// Exit status of a certified run.
pub const EXIT_CERTIFIED: i32 = 0;
/// Exit status of an error (invalid configuration, numerical breakdown, i/o).
pub const EXIT_ERROR: i32 = 1;
/// Exit status of a run whose verdict is `Failed(stage)`.
pub const EXIT_FAILED: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitFlags {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default = "yes")]
    pub report: bool,
}

fn yes() -> bool {
    true
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self {
            csv: true,
            svg: true,
            report: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub construction: ConstructionKind,
    pub chart: ChartConfig,
    #[serde(default)]
    pub inputs: PipelineInputs,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_fiber_samples")]
    pub fiber_samples: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "yes")]
    pub refinement: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub emit: EmitFlags,
}

fn default_fiber_samples() -> usize {
    crate::transversality::DEFAULT_FIBER_SAMPLES
}

fn default_output_dir() -> String {
    "run".to_string()
}

impl RunConfig {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            solver: self.solver.clone(),
            fiber_samples: self.fiber_samples,
            thresholds: self.thresholds.clone(),
            refinement: self.refinement,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a configuration; defaults are filled in.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedConfig(e.to_string()))?;
    if let Some(name) = value.get("construction") {
        let known = name
            .as_str()
            .and_then(ConstructionKind::from_name)
            .is_some();
        if !known {
            return Err(Error::UnknownConstruction(
                name.as_str()
                    .map_or_else(|| name.to_string(), str::to_string),
            ));
        }
    }
    if let Some(v) = Validator::run_config().validate(&value).into_iter().next() {
        return Err(Error::SchemaViolation {
            path: v.path,
            message: v.message,
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedConfig(e.to_string()))
}

/// Result of [`run`]: the exit status and where the artifacts went.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: StructureReport,
    pub output_dir: PathBuf,
    pub written: Vec<PathBuf>,
}

/// Diagnostic document for runs that end in an error.
pub fn error_json(err: &Error) -> String {
    let mut doc = serde_json::json!({ "error": err.to_string() });
    if let Error::SchemaViolation { path, message } = err {
        doc["path"] = Value::String(path.clone());
        doc["message"] = Value::String(message.clone());
    }
    serde_json::to_string_pretty(&doc).expect("diagnostic serializes")
}

fn write(path: &Path, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    written.push(path.to_path_buf());
    Ok(())
}

fn margin_csv(margin: &MarginField<f64>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["index1", "index2", "re_z", "im_z", "margin"])
        .map_err(io)?;
    let chart = margin.chart();
    for (node, m) in margin.node_min.iter().enumerate() {
        let (i1, i2) = chart.coords(node);
        let z = chart.node(node);
        w.serialize((i1, i2, z.re, z.im, m)).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// The parts of a run that can be written out.
#[derive(Clone, Copy, Default)]
pub struct Artifacts<'a> {
    pub report: Option<&'a StructureReport>,
    pub metric: Option<&'a HarmonicMetric<f64>>,
    pub margin: Option<&'a MarginField<f64>>,
    pub development: Option<&'a DevelopingMapSample<f64>>,
}

impl<'a> Artifacts<'a> {
    pub fn of(outcome: &'a PipelineOutcome<f64>) -> Self {
        Self {
            report: Some(&outcome.report),
            metric: outcome.metric.as_ref(),
            margin: outcome.margin.as_ref(),
            development: outcome.development.as_ref(),
        }
    }
}

/// Writes the emitted artifacts into `dir`.
pub fn write_artifacts(parts: Artifacts<'_>, emit: &EmitFlags, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let (true, Some(r)) = (emit.report, parts.report) {
        write(
            &dir.join("report.json"),
            r.to_json().as_bytes(),
            &mut written,
        )?;
    }
    if emit.csv {
        if let Some(metric) = parts.metric {
            for (i, entry) in metric.entries().iter().enumerate() {
                let field = ComplexField::new(
                    metric.chart().clone(),
                    entry.iter().map(|h| cplx(*h, 0.0)).collect(),
                    0,
                );
                let mut buf = Vec::new();
                write_field_csv(&field, &mut buf)?;
                write(
                    &dir.join("fields").join(format!("h_{}.csv", i + 1)),
                    &buf,
                    &mut written,
                )?;
            }
        }
        if let Some(m) = parts.margin {
            write(
                &dir.join("fields").join("margin.csv"),
                &margin_csv(m)?,
                &mut written,
            )?;
        }
    }
    if emit.svg {
        if let Some(m) = parts.margin {
            write(
                &dir.join("plots").join("margin.svg"),
                margin_svg(m).as_bytes(),
                &mut written,
            )?;
        }
        if let Some(d) = parts.development {
            write(
                &dir.join("plots").join("developing.svg"),
                developing_svg(d).as_bytes(),
                &mut written,
            )?;
        }
    }
    Ok(written)
}

/// Runs a validated configuration and writes its artifacts. The output
/// directory is `out` when given, else the configured one.
pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let mut outcome = run_pipeline::<f64>(
        config.construction,
        &config.inputs,
        &config.chart,
        &config.pipeline_config(),
    )?;
    outcome.report.timestamp =
        Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let dir = out.map_or_else(|| PathBuf::from(&config.output_dir), Path::to_path_buf);
    let written = write_artifacts(Artifacts::of(&outcome), &config.emit, &dir)?;
    Ok(RunOutcome {
        exit_code: match outcome.report.verdict {
            Verdict::Certified => EXIT_CERTIFIED,
            Verdict::Failed(_) => EXIT_FAILED,
        },
        report: outcome.report,
        output_dir: dir,
        written,
    })
}
