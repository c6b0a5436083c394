mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use loctangle::convexroof::{roof_pair, RoofConfig};
use loctangle::families::{
    self, family_state, parameter_grid, prediction_points, FamilyId, FamilySpec, SweepOptions, SweepRow,
};
use loctangle::measures::{concurrence_assist_2q, concurrence_mixed_2q, mu3_pure, n_tangle_4q, tau3_pure};
use loctangle::qstate::{read_state, DensityMatrix, StateVector};
use loctangle::suites::{run_suite, Suite, SuiteOptions};
use loctangle::tau4::{entanglement_vector_reports, tau4_of_dm};

use output::{emit, render, Format, Run, Table};

#[derive(Parser)]
#[command(
    name = "loctangle",
    version,
    about = "Localized quadripartite entanglement of four-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one measure on a state file
    Measure(MeasureArgs),
    /// Compare family standard states against the zero/nonzero table
    Families(FamiliesArgs),
    /// Run a randomized property suite
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct RoofArgs {
    #[arg(long, default_value_t = RoofConfig::default().seed)]
    seed: u64,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long = "ensemble-length")]
    ensemble_length: Option<usize>,
}

#[derive(Args, Clone)]
struct MeasureRoofArgs {
    #[command(flatten)]
    roof: RoofArgs,
    /// Convergence tolerance of the roof search
    #[arg(long)]
    tol: Option<f64>,
}

impl RoofArgs {
    fn config(&self, base: RoofConfig) -> RoofConfig {
        RoofConfig {
            seed: self.seed,
            restarts: self.restarts.unwrap_or(base.restarts),
            max_iterations: self.iterations.unwrap_or(base.max_iterations),
            ensemble_length: self.ensemble_length.or(base.ensemble_length),
            ..base
        }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    /// mu3, tau3, concurrence, concurrence-assist, n-tangle, tau3-mixed, tau-a, tau4, entanglement-vector
    measure: String,
    #[arg(long)]
    state: PathBuf,
    /// Site traced out of a four-site state (defaults to the last)
    #[arg(long)]
    traced: Option<usize>,
    #[command(flatten)]
    roof: MeasureRoofArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FamiliesArgs {
    /// Family name, e.g. Gabcd or L07plus1bar
    family: Option<String>,
    /// Every family
    #[arg(long)]
    all: bool,
    /// The parameter points at which the table makes a claim
    #[arg(long = "prediction-points")]
    prediction_points: bool,
    /// Comma-separated values; every used parameter ranges over them
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    /// Largest estimate counted as zero
    #[arg(long)]
    tol: Option<f64>,
    /// Smallest certified bound counted as nonzero
    #[arg(long = "min-gap")]
    min_gap: Option<f64>,
    #[command(flatten)]
    roof: RoofArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// covariance, concavity, monotonicity, separable-zero, pure3-identity, monogamy
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    roof: RoofArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Failure kinds map to distinct exit codes.
enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Serialize)]
struct MeasureReport {
    measure: String,
    value: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    traced_site: Option<usize>,
    detail: Value,
}

impl MeasureReport {
    fn exact(measure: &str, value: f64) -> Self {
        Self {
            measure: measure.into(),
            value,
            lower: Some(value),
            upper: Some(value),
            traced_site: None,
            detail: Value::Null,
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn need_sites(state: &StateVector, n: usize, measure: &str) -> Result<()> {
    if state.dims() != vec![2; n].as_slice() {
        return Err(usage(format!(
            "{measure} needs a {n}-qubit state, but the file has dims {:?}",
            state.dims()
        )));
    }
    Ok(())
}

/// Three-qubit density matrix for the roof measures: a three-site state as
/// is, or a four-site state with one site traced.
fn roof_input(state: &StateVector, traced: usize, measure: &str) -> Result<(DensityMatrix, Option<usize>)> {
    match state.dims().len() {
        3 => {
            need_sites(state, 3, measure)?;
            Ok((state.projector(), None))
        }
        4 => {
            let kept = loctangle::tau4::kept_sites(state.dims(), traced).map_err(|e| usage(e.to_string()))?;
            Ok((state.reduced(&kept)?, Some(traced)))
        }
        _ => Err(usage(format!(
            "{measure} needs three qubits or a 2x2x2xn state, got dims {:?}",
            state.dims()
        ))),
    }
}

fn measure(args: &MeasureArgs, run: &Run) -> Result<Outcome> {
    let state = read_state(&args.state)
        .with_context(|| format!("reading {}", args.state.display()))
        .map_err(|e| usage(format!("{e:#}")))?;
    let mut config = args.roof.roof.config(RoofConfig::default());
    if let Some(tol) = args.roof.tol {
        config.tolerance = tol;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    let traced = args.traced.unwrap_or(3);
    let name = args.measure.as_str();
    let report = match name {
        "mu3" | "tau3" => {
            need_sites(&state, 3, name)?;
            let v = if name == "mu3" {
                mu3_pure(&state)?
            } else {
                tau3_pure(&state)?
            };
            MeasureReport::exact(name, v.value)
        }
        "concurrence" | "concurrence-assist" => {
            need_sites(&state, 2, name)?;
            let rho = state.projector();
            let v = if name == "concurrence" {
                concurrence_mixed_2q(&rho)?
            } else {
                concurrence_assist_2q(&rho)?
            };
            MeasureReport::exact(name, v.value)
        }
        "n-tangle" => {
            need_sites(&state, 4, name)?;
            MeasureReport::exact(name, n_tangle_4q(&state)?.value)
        }
        "tau3-mixed" | "tau-a" => {
            let (rho, site) = roof_input(&state, traced, name)?;
            let (lo, hi) = roof_pair(&rho, &config)?;
            // the min search bounds tau3 from above, the max search tau-a from below
            let (res, lower, upper) = if name == "tau3-mixed" {
                let v = lo.value;
                (lo, None, Some(v))
            } else {
                let v = hi.value;
                (hi, Some(v), None)
            };
            MeasureReport {
                measure: name.into(),
                value: res.value,
                lower,
                upper,
                traced_site: site,
                detail: serde_json::to_value(&res)?,
            }
        }
        "tau4" => {
            let (rho, site) = roof_input(&state, traced, name)?;
            let mut r = tau4_of_dm(&rho, &config)?;
            r.traced_site = site;
            MeasureReport {
                measure: name.into(),
                value: r.tau4,
                lower: Some(r.certified_lower),
                upper: None,
                traced_site: site,
                detail: serde_json::to_value(&r)?,
            }
        }
        "entanglement-vector" => {
            need_sites(&state, 4, name)?;
            let reports = entanglement_vector_reports(&state, &config)?;
            let vector: Vec<f64> = reports.iter().map(|r| r.tau4).collect();
            let lower: Vec<f64> = reports.iter().map(|r| r.certified_lower).collect();
            MeasureReport {
                measure: name.into(),
                value: vector.iter().cloned().fold(0.0, f64::max),
                lower: None,
                upper: None,
                traced_site: None,
                detail: json!({ "vector": vector, "certified_lower": lower }),
            }
        }
        other => {
            return Err(usage(format!(
                "unknown measure {other:?}; expected mu3, tau3, concurrence, concurrence-assist, \
                 n-tangle, tau3-mixed, tau-a, tau4 or entanglement-vector"
            )))
        }
    };
    let manifest = run.manifest(
        vec![args.state.clone()],
        Some(config.seed),
        json!({ "measure": name, "traced": args.traced, "roof": config }),
    );
    let table = Table {
        header: vec!["measure", "value", "lower", "upper", "traced_site"],
        rows: vec![vec![
            report.measure.clone(),
            report.value.to_string(),
            fmt_opt(report.lower),
            fmt_opt(report.upper),
            report.traced_site.map(|s| s.to_string()).unwrap_or_default(),
        ]],
    };
    emit(
        &render(&manifest, &report, &table, args.output.format)?,
        args.output.out.as_deref(),
    )?;
    Ok(Outcome::Pass)
}

fn parse_param(flag: &str, raw: &str) -> Result<C64> {
    raw.trim()
        .parse::<C64>()
        .map_err(|_| usage(format!("--{flag} {raw:?} is not a number like 0.5, -1, 2i or 1+0.5i")))
}

fn family_points(args: &FamiliesArgs) -> Result<Vec<FamilySpec>> {
    let families: Vec<FamilyId> = match (&args.family, args.all) {
        (Some(_), true) => return Err(usage("give a family name or --all, not both")),
        (None, false) => return Err(usage("give a family name or --all")),
        (None, true) => FamilyId::ALL.to_vec(),
        (Some(name), false) => vec![name.parse::<FamilyId>().map_err(|e| usage(e.to_string()))?],
    };
    let explicit = [("a", &args.a), ("b", &args.b), ("c", &args.c), ("d", &args.d)];
    let has_explicit = explicit.iter().any(|(_, v)| v.is_some());
    let modes = [args.prediction_points, args.grid.is_some(), has_explicit]
        .iter()
        .filter(|&&m| m)
        .count();
    if modes > 1 {
        return Err(usage(
            "choose one of --prediction-points, --grid or explicit parameters",
        ));
    }
    if args.prediction_points {
        return Ok(prediction_points()
            .into_iter()
            .filter(|s| families.contains(&s.family))
            .collect());
    }
    if let Some(grid) = &args.grid {
        let values = grid
            .iter()
            .map(|v| parse_param("grid", v))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(usage("--grid needs at least one value"));
        }
        return Ok(families.iter().flat_map(|&f| parameter_grid(f, &values)).collect());
    }
    if args.all {
        return Err(usage("--all needs --prediction-points or --grid"));
    }
    let family = families[0];
    let mut params = Vec::new();
    for (k, (flag, raw)) in explicit.iter().enumerate() {
        match raw {
            Some(_) if k >= family.parameter_count() => {
                return Err(usage(format!("{family} takes no parameter --{flag}")))
            }
            Some(r) => params.push(parse_param(flag, r)?),
            None if k < family.parameter_count() => params.push(C64::new(0.0, 0.0)),
            None => {}
        }
    }
    let spec = FamilySpec::new(family, &params)?;
    family_state(&spec).map_err(|e| usage(format!("{family} at these parameters: {e}")))?;
    Ok(vec![spec])
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        z.re.to_string()
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn sweep_table(rows: &[SweepRow]) -> Table {
    Table {
        header: vec![
            "family",
            "a",
            "b",
            "c",
            "d",
            "tau4",
            "certified_lower",
            "prediction",
            "agree",
        ],
        rows: rows
            .iter()
            .map(|r| {
                let used = r.spec.family.parameter_count();
                let mut row = vec![r.spec.family.to_string()];
                row.extend(
                    r.spec
                        .params()
                        .iter()
                        .enumerate()
                        .map(|(k, &z)| if k < used { fmt_c(z) } else { String::new() }),
                );
                row.extend([
                    fmt_opt(r.tau4),
                    fmt_opt(r.certified_lower),
                    r.prediction.expected.to_string(),
                    r.agree.to_string(),
                ]);
                row
            })
            .collect(),
    }
}

fn families_cmd(args: &FamiliesArgs, run: &Run) -> Result<Outcome> {
    let points = family_points(args)?;
    let config = args.roof.config(RoofConfig::default());
    config.validate().map_err(|e| usage(e.to_string()))?;
    let defaults = SweepOptions::default();
    let opts = SweepOptions {
        zero_tol: args.tol.unwrap_or(defaults.zero_tol),
        min_gap: args.min_gap.unwrap_or(defaults.min_gap),
    };
    let rows = families::sweep(&points, &config, &opts)?;
    let agree = rows.iter().all(|r| r.agree);
    let manifest = run.manifest(Vec::new(), Some(config.seed), json!({ "roof": config, "sweep": opts }));
    let result = json!({ "all_agree": agree, "rows": rows });
    emit(
        &render(&manifest, &result, &sweep_table(&rows), args.output.format)?,
        args.output.out.as_deref(),
    )?;
    Ok(if agree { Outcome::Pass } else { Outcome::Fail })
}

fn default_trials(suite: Suite) -> usize {
    match suite {
        Suite::Covariance | Suite::Pure3Identity | Suite::Monogamy => 200,
        Suite::Concavity | Suite::Monotonicity => 100,
        Suite::SeparableZero => 50,
    }
}

fn verify(args: &VerifyArgs, run: &Run) -> Result<Outcome> {
    let suite: Suite = args.suite.parse().map_err(|e: loctangle::Error| usage(e.to_string()))?;
    let trials = args.trials.unwrap_or_else(|| default_trials(suite));
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let roof = args.roof.config(RoofConfig::fast());
    roof.validate().map_err(|e| usage(e.to_string()))?;
    let opts = SuiteOptions {
        trials,
        seed: args.roof.seed,
        roof,
        tolerance: args.tol,
    };
    let report = run_suite(suite, &opts)?;
    let manifest = run.manifest(Vec::new(), Some(opts.seed), serde_json::to_value(opts)?);
    let table = Table {
        header: vec!["trial", "label", "metric", "passed"],
        rows: report
            .records
            .iter()
            .map(|r| {
                vec![
                    r.trial.to_string(),
                    r.label.clone().unwrap_or_default(),
                    r.metric.to_string(),
                    r.passed.to_string(),
                ]
            })
            .collect(),
    };
    emit(
        &render(&manifest, &report, &table, args.output.format)?,
        args.output.out.as_deref(),
    )?;
    eprintln!(
        "{}: {} (worst {} = {:e}, tolerance {:e})",
        suite,
        if report.passed { "PASS" } else { "FAIL" },
        report.metric,
        report.worst,
        report.tolerance
    );
    Ok(if report.passed { Outcome::Pass } else { Outcome::Fail })
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("LOCTANGLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| usage(format!("LOCTANGLE_THREADS={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!("thread pool: {e}"))
}

fn dispatch(cli: &Cli, run: &Run) -> Result<Outcome> {
    init_threads()?;
    match &cli.command {
        Command::Measure(a) => measure(a, run),
        Command::Families(a) => families_cmd(a, run),
        Command::Verify(a) => verify(a, run),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<loctangle::Error>() {
        Some(
            loctangle::Error::WrongDims { .. }
            | loctangle::Error::InvalidDims(_)
            | loctangle::Error::InvalidSubsystems(_)
            | loctangle::Error::InvalidConfig(_)
            | loctangle::Error::ZeroNorm
            | loctangle::Error::Parse(_)
            | loctangle::Error::LengthMismatch { .. }
            | loctangle::Error::EnsembleTooShort { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = Run::start(std::env::args().collect());
    match dispatch(&cli, &run) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
