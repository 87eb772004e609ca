use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use prolong_core::cnls_sim::{
    read_trajectory_csv, run, write_diagnostics_csv, write_trajectory_csv, InitialCondition, NumericK, SimConfig,
    SimError,
};
use prolong_core::diffpoly::Field;
use prolong_core::lax_numeric::{check_uniform, invariant_scan, relative_trace_drift, LaxNumericError};
use prolong_core::loop_algebra::{
    check_relations, load_relations, standard_relations, KnownDiscrepancies, MappingTable,
};
use prolong_core::props::{diffpoly_props, loop_algebra_props, PropReport};
use prolong_core::zero_curvature::{
    derive_pde, symbolic_lax, verify_zero_curvature, CoefficientSolution, Family, ZeroCurvatureError,
};
use prolong_core::Scalar;

use crate::manifest::{display, Digest256};

/// Largest tolerated `|det T − 1|` in a monodromy scan.
pub const DET_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_POWER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable files, parse errors, invalid configs. Exit 2.
    #[error("{0}")]
    Input(String),
    /// The computation ran and could not complete. Exit 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

pub struct Outcome {
    pub pass: bool,
    pub summary: Vec<String>,
}

/// Per-invocation state shared by the subcommands.
pub struct Context {
    pub out_dir: Option<PathBuf>,
    pub digest: Digest256,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Context {
    pub fn new(out_dir: Option<PathBuf>) -> Self {
        Context {
            out_dir,
            digest: Digest256::default(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Relative output paths land under the output directory override.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn read_input(&mut self, p: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        self.digest.feed(&display(p), text.as_bytes());
        self.inputs.push(display(p));
        Ok(text)
    }

    fn create(&mut self, p: &Path) -> Result<File, CliError> {
        let path = self.resolve(p);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
        let f = File::create(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.outputs.push(display(&path));
        Ok(f)
    }

    fn write_json<T: Serialize>(&mut self, p: &Path, v: &T) -> Result<(), CliError> {
        let mut f = self.create(p)?;
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Failure(e.to_string()))?;
        writeln!(f, "{text}").map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::BlowUp { .. } => CliError::Failure(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn lax_error(e: LaxNumericError) -> CliError {
    match e {
        LaxNumericError::Sim(s) => sim_error(s),
        LaxNumericError::Unstable(_) => CliError::Failure(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

pub struct AlgebraVerify<'a> {
    pub relations: Option<&'a Path>,
    pub map: &'a str,
    pub n: i32,
    pub l: i32,
    pub known: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn algebra_verify(a: &AlgebraVerify, ctx: &mut Context) -> Result<Outcome, CliError> {
    ctx.digest
        .feed("args", format!("map={} n={} l={}", a.map, a.n, a.l).as_bytes());
    let rels = match a.relations {
        Some(p) => {
            ctx.read_input(p)?;
            load_relations(p).map_err(|e| CliError::Input(e.to_string()))?
        }
        None => standard_relations(),
    };
    let map = if a.map == "default" {
        MappingTable::standard(a.n, a.l)
    } else {
        let text = ctx.read_input(Path::new(a.map))?;
        MappingTable::from_json_str(&text)
            .map_err(|e| CliError::Input(e.to_string()))?
            .with_modes(a.n, a.l)
    };
    let known = match a.known {
        Some(p) => {
            KnownDiscrepancies::from_json_str(&ctx.read_input(p)?).map_err(|e| CliError::Input(e.to_string()))?
        }
        None => KnownDiscrepancies::bundled(),
    };
    let report = check_relations(&map, &rels).map_err(|e| CliError::Input(e.to_string()))?;
    ctx.write_json(a.out, &report)?;

    let unexpected = known.unexpected_failures(&report);
    let mut summary = vec![format!(
        "{} relations: exact {}, exact_with_parameters {}, holds_after_rhs_swap {}, fails {}",
        report.outcomes.len(),
        report.counts.exact,
        report.counts.exact_with_parameters,
        report.counts.holds_after_rhs_swap,
        report.counts.fails
    )];
    for e in &report.consistency {
        let vals: Vec<String> = e
            .values
            .iter()
            .map(|(v, tags)| format!("{v} at {}", tags.join(",")))
            .collect();
        summary.push(format!("{} inferred {}", e.symbol, vals.join("; ")));
    }
    for c in known.check(&report) {
        summary.push(format!(
            "whitelisted {}: documented {}, measured {}{}",
            c.tag,
            c.documented,
            c.measured,
            if c.flagged { "" } else { " (not flagged)" }
        ));
    }
    if !unexpected.is_empty() {
        summary.push(format!("unexpected failures: {}", unexpected.join(", ")));
    }
    Ok(Outcome {
        pass: unexpected.is_empty(),
        summary,
    })
}

#[derive(Serialize)]
struct LaxDeriveReport {
    family: Family,
    convention: String,
    equivalent_convention: String,
    coefficients: [String; 3],
    unique: bool,
    closing_conventions: Vec<String>,
    residual_terms: usize,
    zero_field_residual_terms: usize,
    negative_control_terms: usize,
    coupling: BTreeMap<String, String>,
    eps: String,
    x_rules: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ansatz_constants_map: Option<BTreeMap<String, String>>,
}

pub fn lax_derive(family: &str, out: &Path, ctx: &mut Context) -> Result<Outcome, CliError> {
    ctx.digest.feed("family", family.as_bytes());
    let fam: Family = family
        .parse()
        .map_err(|e: ZeroCurvatureError| CliError::Input(e.to_string()))?;
    let lax = symbolic_lax(fam);
    let d = derive_pde(&lax).map_err(|e| match e {
        ZeroCurvatureError::NoConvention { .. } => CliError::Failure(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;
    let failure = |e: ZeroCurvatureError| CliError::Failure(e.to_string());
    let residual_terms = verify_zero_curvature(&lax, &d.system, d.convention).map_err(failure)?;
    let zero_field_residual_terms =
        verify_zero_curvature(&lax.without_fields(), &d.system, d.convention).map_err(failure)?;
    let mut doubled = d.system.clone();
    doubled.eps = &doubled.eps * &Scalar::int(2);
    let negative_control_terms = verify_zero_curvature(&lax, &doubled, d.convention).map_err(failure)?;
    let fmt = |c: &prolong_core::Cq| Scalar::from_cq(c.clone()).to_string();
    let report = LaxDeriveReport {
        family: fam,
        convention: d.convention.to_string(),
        equivalent_convention: d.convention.negated().to_string(),
        coefficients: [
            fmt(&d.coefficients[0]),
            fmt(&d.coefficients[1]),
            fmt(&d.coefficients[2]),
        ],
        unique: d.is_unique(),
        closing_conventions: d.closing.iter().map(ToString::to_string).collect(),
        residual_terms,
        zero_field_residual_terms,
        negative_control_terms,
        coupling: BTreeMap::from([
            ("m1".to_string(), lax.k.m1.to_string()),
            ("m2".to_string(), lax.k.m2.to_string()),
            ("kappa".to_string(), lax.k.kappa.to_string()),
        ]),
        eps: lax.eps.to_string(),
        x_rules: [1u8, 2]
            .iter()
            .map(|&k| (format!("b{k}_x"), d.system.x_rule(Field::Beta(k)).to_string()))
            .collect(),
        ansatz_constants_map: (fam == Family::L).then(|| CoefficientSolution::corrected().constants_map()),
    };
    ctx.write_json(out, &report)?;
    let summary = vec![
        format!(
            "family {fam:?}: convention {} (equivalently {})",
            report.convention, report.equivalent_convention
        ),
        format!(
            "(a, b, c) = ({}), unique {}",
            report.coefficients.join(", "),
            report.unique
        ),
        format!("residual terms {residual_terms}, negative control {negative_control_terms}"),
    ];
    Ok(Outcome {
        pass: residual_terms == 0,
        summary,
    })
}

pub fn simulate(config: &Path, out_prefix: &Path, ctx: &mut Context) -> Result<Outcome, CliError> {
    let text = ctx.read_input(config)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    let tolerance = match value.as_object_mut().and_then(|o| o.remove("power_tolerance")) {
        None => DEFAULT_POWER_TOLERANCE,
        Some(v) => v
            .as_f64()
            .ok_or_else(|| CliError::Input("power_tolerance must be a number".into()))?,
    };
    let mut cfg: SimConfig =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    cfg.validate().map_err(sim_error)?;
    if let Some(InitialCondition::Samples { path }) = &mut cfg.initial {
        let p = Path::new(path.as_str());
        if p.is_relative() {
            if let Some(dir) = config.parent() {
                *path = display(&dir.join(p));
            }
        }
        let samples = PathBuf::from(path.as_str());
        ctx.read_input(&samples)?;
    }
    let init = cfg.initial_state().map_err(sim_error)?;
    let out = run(&cfg, &init).map_err(sim_error)?;

    let prefix = display(out_prefix);
    let traj_path = PathBuf::from(format!("{prefix}_trajectory.csv"));
    let diag_path = PathBuf::from(format!("{prefix}_diagnostics.csv"));
    let io_err = |e: SimError| CliError::Input(e.to_string());
    write_trajectory_csv(ctx.create(&traj_path)?, &cfg.grid, &out.trajectory).map_err(io_err)?;
    write_diagnostics_csv(ctx.create(&diag_path)?, &out.diagnostics).map_err(io_err)?;

    let drift = out.diagnostics.power_drift();
    let summary = vec![
        format!("{} steps to x = {}", out.steps, out.final_state().x),
        format!("relative power drift {drift:e} (tolerance {tolerance:e})"),
        format!("relative hamiltonian drift {:e}", out.diagnostics.hamiltonian_drift()),
        format!("momentum drift {:e}", out.diagnostics.momentum_drift()),
    ];
    Ok(Outcome {
        pass: drift <= tolerance,
        summary,
    })
}

pub struct MonodromyArgs<'a> {
    pub trajectory: &'a Path,
    pub lambdas: &'a [f64],
    pub eps: f64,
    pub kmatrix: NumericK,
    pub drift_bound: Option<f64>,
    pub out: &'a Path,
}

pub fn monodromy(a: &MonodromyArgs, ctx: &mut Context) -> Result<Outcome, CliError> {
    ctx.digest.feed(
        "args",
        format!(
            "lambda={:?} eps={} k={:?} bound={:?}",
            a.lambdas, a.eps, a.kmatrix, a.drift_bound
        )
        .as_bytes(),
    );
    ctx.read_input(a.trajectory)?;
    if a.lambdas.is_empty() {
        return Err(CliError::Input("no lambda values given".into()));
    }
    let (grid, traj) =
        read_trajectory_csv(a.trajectory).map_err(|e| CliError::Input(format!("{}: {e}", a.trajectory.display())))?;
    let dx = if traj.len() > 1 {
        check_uniform(&traj).map_err(lax_error)?
    } else {
        1.0
    };
    let cfg = SimConfig::new(grid, a.kmatrix, a.eps, dx, 0.0);
    cfg.validate().map_err(sim_error)?;
    let rows = invariant_scan(&traj, a.lambdas, &cfg).map_err(lax_error)?;

    let mut w = csv::Writer::from_writer(ctx.create(a.out)?);
    let csv_err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(["x", "lambda", "tr_re", "tr_im", "tr2_re", "tr2_im", "det_re", "det_im"])
        .map_err(csv_err)?;
    for r in &rows {
        w.serialize((
            r.x,
            r.lambda,
            r.trace[0],
            r.trace[1],
            r.trace_sq[0],
            r.trace_sq[1],
            r.det[0],
            r.det[1],
        ))
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Input(e.to_string()))?;

    let det_dev = rows
        .iter()
        .map(|r| ((r.det[0] - 1.0).powi(2) + r.det[1].powi(2)).sqrt())
        .fold(0.0, f64::max);
    let mut pass = det_dev <= DET_TOLERANCE;
    let mut summary = vec![format!("{} snapshots, max |det T - 1| = {det_dev:e}", traj.len())];
    for &lam in a.lambdas {
        let d = relative_trace_drift(&rows, lam);
        let within = a.drift_bound.is_none_or(|b| d <= b);
        pass &= within;
        summary.push(format!(
            "lambda {lam}: relative trace drift {d:e}{}",
            if within { "" } else { " (above bound)" }
        ));
    }
    Ok(Outcome { pass, summary })
}

#[derive(Serialize)]
struct PropsReport {
    diffpoly: PropReport,
    loop_algebra: PropReport,
}

pub fn props(seed: u64, cases: usize, out: &Path, ctx: &mut Context) -> Result<Outcome, CliError> {
    ctx.digest.feed("args", format!("seed={seed} cases={cases}").as_bytes());
    let report = PropsReport {
        diffpoly: diffpoly_props(seed, cases),
        loop_algebra: loop_algebra_props(seed, cases),
    };
    ctx.write_json(out, &report)?;
    let summary = report
        .diffpoly
        .outcomes
        .iter()
        .chain(&report.loop_algebra.outcomes)
        .map(|o| format!("{}: {} cases, {} failures", o.name, o.cases, o.failures))
        .collect();
    let failures = report.diffpoly.failures() + report.loop_algebra.failures();
    Ok(Outcome {
        pass: failures == 0,
        summary,
    })
}
