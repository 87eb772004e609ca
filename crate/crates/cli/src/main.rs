//! `prolong`: verification and simulation subcommands. Exit status is 0 on
//! success, 1 when a check fails or a run cannot complete, 2 on bad input.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AlgebraVerify, CliError, Context, MonodromyArgs, Outcome};
use manifest::{manifest_path, now_unix, versions, RunManifest};
use prolong_core::cnls_sim::NumericK;
use prolong_core::props::{DEFAULT_CASES, DEFAULT_SEED};

/// Environment variable that relocates relative output paths.
const OUTPUT_DIR_VAR: &str = "PROLONG_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "prolong",
    version,
    about = "Loop-algebra, zero-curvature and CNLS verification tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the bracket relation list against a generator mapping.
    AlgebraVerify {
        /// JSON-lines relation file; the bundled list when omitted.
        #[arg(long)]
        relations: Option<PathBuf>,
        /// `default` or a mapping-table JSON file.
        #[arg(long, default_value = "default")]
        map: String,
        #[arg(long, default_value_t = 1)]
        n: i32,
        #[arg(long, default_value_t = 1)]
        l: i32,
        /// Known-discrepancy whitelist; the bundled one when omitted.
        #[arg(long)]
        known: Option<PathBuf>,
        #[arg(long, default_value = "relation_report.json")]
        out: PathBuf,
    },
    /// Derive the CNLS system from a Lax family by zero curvature.
    LaxDerive {
        /// L, M or N.
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "derivation.json")]
        out: PathBuf,
    },
    /// Run the split-step solver from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Outputs are `<prefix>_trajectory.csv` and `<prefix>_diagnostics.csv`.
        #[arg(long, default_value = "run")]
        out_prefix: PathBuf,
    },
    /// Monodromy invariants along a stored trajectory.
    Monodromy {
        #[arg(long)]
        trajectory: PathBuf,
        /// Comma-separated real spectral parameters.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0,0.3,-0.3,1,-1"
        )]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        m1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        m2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        kappa: f64,
        /// Fail when a relative trace drift exceeds this bound.
        #[arg(long)]
        drift_bound: Option<f64>,
        #[arg(long, default_value = "scan.csv")]
        out: PathBuf,
    },
    /// Seeded randomized property suites for the symbolic engines.
    Props {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
        #[arg(long, default_value = "props.json")]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::AlgebraVerify { .. } => "algebra-verify",
            Command::LaxDerive { .. } => "lax-derive",
            Command::Simulate { .. } => "simulate",
            Command::Monodromy { .. } => "monodromy",
            Command::Props { .. } => "props",
        }
    }

    /// Path the manifest is named after.
    fn output_base(&self) -> &Path {
        match self {
            Command::AlgebraVerify { out, .. }
            | Command::LaxDerive { out, .. }
            | Command::Monodromy { out, .. }
            | Command::Props { out, .. } => out,
            Command::Simulate { out_prefix, .. } => out_prefix,
        }
    }

    fn run(&self, ctx: &mut Context) -> Result<Outcome, CliError> {
        match self {
            Command::AlgebraVerify {
                relations,
                map,
                n,
                l,
                known,
                out,
            } => commands::algebra_verify(
                &AlgebraVerify {
                    relations: relations.as_deref(),
                    map,
                    n: *n,
                    l: *l,
                    known: known.as_deref(),
                    out,
                },
                ctx,
            ),
            Command::LaxDerive { family, out } => commands::lax_derive(family, out, ctx),
            Command::Simulate { config, out_prefix } => commands::simulate(config, out_prefix, ctx),
            Command::Monodromy {
                trajectory,
                lambda,
                eps,
                m1,
                m2,
                kappa,
                drift_bound,
                out,
            } => commands::monodromy(
                &MonodromyArgs {
                    trajectory,
                    lambdas: lambda,
                    eps: *eps,
                    kmatrix: NumericK {
                        m1: *m1,
                        m2: *m2,
                        kappa: *kappa,
                    },
                    drift_bound: *drift_bound,
                    out,
                },
                ctx,
            ),
            Command::Props { seed, cases, out } => commands::props(*seed, *cases, out, ctx),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = std::env::var_os(OUTPUT_DIR_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let mut ctx = Context::new(out_dir);
    ctx.digest.feed("subcommand", cli.command.name().as_bytes());

    let result = cli.command.run(&mut ctx);
    let (code, pass, summary) = match &result {
        Ok(o) => (if o.pass { 0 } else { 1 }, o.pass, o.summary.clone()),
        Err(e) => (e.exit_code(), false, vec![format!("error: {e}")]),
    };
    if result.is_ok() {
        for line in &summary {
            println!("{line}");
        }
    }

    let path = ctx.resolve(&manifest_path(cli.command.output_base()));
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        config_digest: std::mem::take(&mut ctx.digest).finish(),
        versions: versions(),
        inputs: ctx.inputs,
        outputs: ctx.outputs,
        exit_code: code,
        pass,
        summary,
        timestamp_unix: now_unix(),
    };
    if let Err(e) = write_manifest(&path, &manifest) {
        eprintln!("manifest {}: {e}", path.display());
        return ExitCode::from(2);
    }
    if let Err(e) = &result {
        eprintln!("prolong {}: {e}", cli.command.name());
    }
    ExitCode::from(code as u8)
}

fn write_manifest(path: &Path, m: &RunManifest) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(m).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")
}
