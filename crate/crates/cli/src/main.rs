use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use higgs_geom::io::{
    check_command, develop_command, error_json, parse_config, run, solve_command, RunConfig,
    StageOutcome, EXIT_CERTIFIED, EXIT_ERROR, EXIT_FAILED, RUN_CONFIG_SCHEMA,
};
use higgs_geom::Error;

#[derive(Parser)]
#[command(
    name = "higgs-geom",
    version,
    about = "Geometric structures from Higgs bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the harmonic-metric equations and write the metric fields.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and report the minimum transversality margin.
    Check {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and plot the developing map from the base point.
    Develop {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline on one or more configurations.
    Pipeline {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output root; with several configurations each gets a subdirectory
        /// named after its file stem.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the configuration schema.
    Schema,
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn fail(err: &Error) -> i32 {
    eprintln!("{}", error_json(err));
    EXIT_ERROR
}

fn stage(
    path: &Path,
    out: Option<&Path>,
    f: fn(&RunConfig, Option<&Path>) -> higgs_geom::Result<StageOutcome>,
) -> i32 {
    match load(path).and_then(|c| f(&c, out)) {
        Ok(o) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&o.summary).expect("summary serializes")
            );
            o.exit_code
        }
        Err(e) => fail(&e),
    }
}

fn pipeline_one(path: &Path, out: Option<PathBuf>) -> i32 {
    match load(path).and_then(|c| run(&c, out.as_deref())) {
        Ok(o) => {
            println!(
                "{}: {} -> {}",
                path.display(),
                o.report.verdict,
                o.output_dir.display()
            );
            o.exit_code
        }
        Err(e) => {
            eprint!("{}: ", path.display());
            fail(&e)
        }
    }
}

/// Any error wins, then any failure, else certified.
fn aggregate(codes: &[i32]) -> i32 {
    if codes.contains(&EXIT_ERROR) {
        EXIT_ERROR
    } else if codes.contains(&EXIT_FAILED) {
        EXIT_FAILED
    } else {
        EXIT_CERTIFIED
    }
}

fn pipeline(configs: &[PathBuf], out: Option<&Path>, jobs: Option<usize>) -> i32 {
    let target = |p: &PathBuf| match (out, configs.len()) {
        (Some(o), 1) => Some(o.to_path_buf()),
        (Some(o), _) => Some(o.join(p.file_stem().unwrap_or(p.as_os_str()))),
        (None, _) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return fail(&Error::Io(e.to_string())),
    };
    let codes: Vec<i32> = pool.install(|| {
        configs
            .par_iter()
            .map(|p| pipeline_one(p, target(p)))
            .collect()
    });
    aggregate(&codes)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve { config, out } => stage(config, out.as_deref(), solve_command),
        Command::Check { config, out } => stage(config, out.as_deref(), check_command),
        Command::Develop { config, out } => stage(config, out.as_deref(), develop_command),
        Command::Pipeline { configs, out, jobs } => pipeline(configs, out.as_deref(), *jobs),
        Command::Schema => {
            print!("{RUN_CONFIG_SCHEMA}");
            EXIT_CERTIFIED
        }
    };
    ExitCode::from(code as u8)
}
