//! Single-stage runs behind the `solve`, `check` and `develop` subcommands.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::connection::develop;
use crate::constructions::{base_node, prepare, Prepared};
use crate::error::Result;
use crate::solver::{solve_hitchin, HarmonicMetric};
use crate::transversality::{build_section, construction_connection, transversality_margin};

use super::{write_artifacts, Artifacts, EmitFlags, RunConfig, EXIT_CERTIFIED, EXIT_FAILED};

/// Summary printed by a stage command, its exit status and written files.
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub exit_code: i32,
    pub summary: Value,
    pub written: Vec<PathBuf>,
}

fn solved(config: &RunConfig) -> Result<(Prepared<f64>, HarmonicMetric<f64>)> {
    let p = prepare::<f64>(
        config.construction,
        &config.inputs,
        &config.chart,
        &config.pipeline_config(),
    )?;
    let m = solve_hitchin(&p.spec, &p.chart, &p.solver)?;
    Ok((p, m))
}

fn emit_only(csv: bool, svg: bool) -> EmitFlags {
    EmitFlags {
        csv,
        svg,
        report: false,
    }
}

fn dir(config: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map_or_else(|| PathBuf::from(&config.output_dir), Path::to_path_buf)
}

/// Solves the harmonic-metric equations and writes `fields/h_<i>.csv`.
pub fn solve_command(config: &RunConfig, out: Option<&Path>) -> Result<StageOutcome> {
    let (_, m) = solved(config)?;
    let summary = json!({
        "residual": m.residual,
        "solver_residual": m.solver_residual,
        "iterations": m.iterations,
        "converged": m.converged,
        "det_defect": m.det_defect(),
    });
    let code = if m.converged {
        EXIT_CERTIFIED
    } else {
        EXIT_FAILED
    };
    let emit = emit_only(config.emit.csv, false);
    let parts = Artifacts {
        metric: Some(&m),
        ..Artifacts::default()
    };
    let written = write_artifacts(parts, &emit, &dir(config, out))?;
    Ok(StageOutcome {
        exit_code: code,
        summary,
        written,
    })
}

/// Solves and measures the transversality margin; writes the margin field.
pub fn check_command(config: &RunConfig, out: Option<&Path>) -> Result<StageOutcome> {
    let (p, m) = solved(config)?;
    let kind = config.construction;
    let section = build_section(&p.spec, &m, kind, config.fiber_samples)?;
    let conn = construction_connection(&p.spec, &m, &p.construction)?;
    let mf = transversality_margin(&conn, &section, kind.directions())?;
    let z = p.chart.node(mf.argmin.node);
    let passed = mf.min > config.thresholds.margin;
    let summary = json!({
        "construction": kind.name(),
        "global_min": mf.min,
        "argmin_node": mf.argmin.node,
        "argmin_point": [z.re, z.im],
        "argmin_theta": mf.argmin.theta,
        "transverse": passed,
    });
    let emit = emit_only(config.emit.csv, config.emit.svg);
    let parts = Artifacts {
        margin: Some(&mf),
        ..Artifacts::default()
    };
    let written = write_artifacts(parts, &emit, &dir(config, out))?;
    Ok(StageOutcome {
        exit_code: if passed { EXIT_CERTIFIED } else { EXIT_FAILED },
        summary,
        written,
    })
}

/// Solves, develops the construction's section from the base node and
/// writes `plots/developing.svg`.
pub fn develop_command(config: &RunConfig, out: Option<&Path>) -> Result<StageOutcome> {
    let (p, m) = solved(config)?;
    let kind = config.construction;
    let section = build_section(&p.spec, &m, kind, config.fiber_samples)?;
    let conn = construction_connection(&p.spec, &m, &p.construction)?;
    let base = base_node(&p.chart);
    let d = develop(&conn, &section, base)?;
    let full = 2 + d.fiber_dim;
    let deficient = d.jacobian_rank.iter().filter(|r| **r < full).count();
    let summary = json!({
        "construction": kind.name(),
        "base_node": base,
        "samples": d.samples,
        "rank_deficient": deficient,
    });
    let parts = Artifacts {
        development: Some(&d),
        ..Artifacts::default()
    };
    let written = write_artifacts(parts, &emit_only(false, config.emit.svg), &dir(config, out))?;
    Ok(StageOutcome {
        exit_code: EXIT_CERTIFIED,
        summary,
        written,
    })
}
