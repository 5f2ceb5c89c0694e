//! Command-line front end: config resolution, dispatch and record output.

mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::generator::{
    apply_generator, constraint_check, domain_check, generator_measure, martingale_test,
    MartingaleOptions, ResidualForm, CHECK_TOL, DOMAIN_THRESHOLD,
};
use crate::models::{self, ModelInstance};
use crate::pdmp::simulate_paths;
use crate::value::{
    fixed_point_solve, mc_value, Grid1d, Interpolation, OffGrid, SolveOptions, ValueSpec,
    TRUNCATION_LOG,
};

pub use verify::SUITES;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

/// Threshold on `|z|` for martingale checks.
const Z_THRESHOLD: f64 = 4.0;

#[derive(Parser, Debug)]
#[command(
    name = "pdmp",
    version,
    about = "Simulate piecewise-deterministic Markov processes, check generators and compute discounted values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate trajectories and write one record per jump.
    Simulate(Flags),
    /// Tabulate the survival function F(x0, t) on [0, horizon].
    Survival(Flags),
    /// Check domain membership and generator identities of test functions.
    GeneratorCheck(Flags),
    /// Monte Carlo martingale test of the Itô residual.
    ItoCheck(Flags),
    /// Monte Carlo estimate of the discounted value at x0.
    ValueMc(Flags),
    /// Fixed-point solve of the value function on a grid.
    ValueSolve(Flags),
    /// Run the invariant suites over the model zoo.
    Verify(Flags),
}

impl Command {
    fn parts(&self) -> (Operation, &Flags) {
        match self {
            Command::Simulate(f) => (Operation::Simulate, f),
            Command::Survival(f) => (Operation::Survival, f),
            Command::GeneratorCheck(f) => (Operation::GeneratorCheck, f),
            Command::ItoCheck(f) => (Operation::ItoCheck, f),
            Command::ValueMc(f) => (Operation::ValueMc, f),
            Command::ValueSolve(f) => (Operation::ValueSolve, f),
            Command::Verify(f) => (Operation::Verify, f),
        }
    }
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML file with RunConfig keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Discount rate δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Solver grid as lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// nearest or linear-1d.
    #[arg(long)]
    interpolation: Option<String>,
    /// clamp or extrapolate.
    #[arg(long)]
    off_grid: Option<String>,
    /// Restrict checks to one named test function of the model.
    #[arg(long)]
    test_function: Option<String>,
    /// Bias ε added to the generator in ito-check.
    #[arg(long, allow_hyphen_values = true)]
    bias: Option<f64>,
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    /// Suite for verify: all, stieltjes, sds, pdmp, generator or value.
    #[arg(long)]
    suite: Option<String>,
    /// Number of time points for survival.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; does not change any output.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    #[value(alias = "json-lines")]
    #[serde(alias = "json-lines")]
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FormArg {
    Measure,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Simulate,
    Survival,
    GeneratorCheck,
    ItoCheck,
    ValueMc,
    ValueSolve,
    Verify,
}

impl Operation {
    fn stochastic(self) -> bool {
        matches!(
            self,
            Operation::Simulate | Operation::ItoCheck | Operation::ValueMc | Operation::Verify
        )
    }

    fn default_paths(self) -> usize {
        match self {
            Operation::Simulate => 10,
            Operation::ItoCheck => 1000,
            Operation::ValueMc => 10_000,
            _ => 2000,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("operation serializes");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

/// Keys accepted in a config file. Everything is optional; command-line
/// flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub params: Option<BTreeMap<String, f64>>,
    pub x0: Option<f64>,
    pub horizon: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub discount: Option<f64>,
    pub grid: Option<String>,
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub interpolation: Option<String>,
    pub off_grid: Option<String>,
    pub test_function: Option<String>,
    pub bias: Option<f64>,
    pub form: Option<String>,
    pub suite: Option<String>,
    pub points: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Parses a TOML config file body.
pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
}

/// The fully resolved settings of one run. Its JSON form is echoed in the
/// output header and hashed; the output path and thread count are left
/// out because they do not affect any record.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub operation: Operation,
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub x0: Option<f64>,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: Option<u64>,
    pub discount: f64,
    pub grid: Option<Grid1d>,
    pub tolerance: f64,
    pub max_iter: usize,
    pub interpolation: Interpolation,
    pub off_grid: OffGrid,
    pub test_function: Option<String>,
    pub bias: f64,
    pub form: ResidualForm,
    pub suite: String,
    pub points: usize,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn model_name(&self) -> Result<&str, CliError> {
        self.model
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("{} needs --model", self.operation)))
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Config(format!("{} is stochastic and needs --seed", self.operation))
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(Error),
    /// Checks ran but at least one failed.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lib(e) => match e {
                Error::InvalidArgument(_) => EXIT_CONFIG,
                Error::InvalidModel(_)
                | Error::InvalidFunction(_)
                | Error::ZeroSurvival { .. }
                | Error::OutsideDomain { .. }
                | Error::AtomCap { .. } => EXIT_MODEL,
                Error::Integrability { .. }
                | Error::Explosion { .. }
                | Error::NotInDomain(_)
                | Error::KfNonexistent(_)
                | Error::NonContraction { .. }
                | Error::Convergence { .. } => EXIT_FAILURE,
            },
            CliError::Failed(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

fn resolve(op: Operation, flags: &Flags) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => FileConfig::default(),
    };
    let model = flags.model.clone().or(file.model);
    let mut params = file.params.unwrap_or_default();
    for (key, v) in [
        ("lambda", flags.lambda),
        ("c", flags.c),
        ("theta", flags.theta),
        ("p", flags.p),
        ("omega", flags.omega),
    ] {
        if let Some(v) = v {
            params.insert(key.to_string(), v);
        }
    }
    let grid = match flags.grid.clone().or(file.grid) {
        Some(s) => Some(Grid1d::from_str(&s).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    let interpolation = match flags.interpolation.clone().or(file.interpolation) {
        Some(s) => s
            .parse()
            .map_err(|e: Error| CliError::Config(e.to_string()))?,
        None => Interpolation::Linear,
    };
    let off_grid = match flags.off_grid.clone().or(file.off_grid) {
        Some(s) => s
            .parse()
            .map_err(|e: Error| CliError::Config(e.to_string()))?,
        None => OffGrid::Extrapolate,
    };
    let form = match (flags.form, file.form.as_deref()) {
        (Some(FormArg::Extended), _) | (None, Some("extended")) => ResidualForm::Extended,
        (Some(FormArg::Measure), _) | (None, Some("measure") | None) => ResidualForm::Measure,
        (None, Some(other)) => {
            return Err(CliError::Config(format!(
                "form must be measure or extended, got {other:?}"
            )))
        }
    };
    let suite = flags
        .suite
        .clone()
        .or(file.suite)
        .unwrap_or_else(|| "all".into());
    if !SUITES.contains(&suite.as_str()) {
        return Err(CliError::Config(format!(
            "unknown suite {suite:?} (known: {})",
            SUITES.join(", ")
        )));
    }
    let n_paths = flags.n_paths.or(file.n_paths).unwrap_or(op.default_paths());
    if n_paths == 0 {
        return Err(CliError::Config("n_paths must be positive".into()));
    }
    let points = flags.points.or(file.points).unwrap_or(101);
    if points < 2 {
        return Err(CliError::Config("points must be at least 2".into()));
    }
    let bias = flags.bias.or(file.bias).unwrap_or(0.0);
    if !bias.is_finite() {
        return Err(CliError::Config(format!("bias must be finite, got {bias}")));
    }
    let x0 = flags.x0.or(file.x0);
    if let Some(x) = x0 {
        if !x.is_finite() {
            return Err(CliError::Config(format!("x0 must be finite, got {x}")));
        }
    }
    let threads = flags.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Config("threads must be positive".into()));
    }
    let discount = positive("discount", flags.delta.or(file.discount).unwrap_or(0.5))?;
    let default_horizon = match op {
        Operation::ValueMc => TRUNCATION_LOG / discount,
        _ => 10.0,
    };
    let mut config = RunConfig {
        operation: op,
        model,
        params,
        x0,
        horizon: positive(
            "horizon",
            flags.horizon.or(file.horizon).unwrap_or(default_horizon),
        )?,
        n_paths,
        seed: flags.seed.or(file.seed),
        discount,
        grid,
        tolerance: positive("tolerance", flags.tol.or(file.tolerance).unwrap_or(1e-8))?,
        max_iter: flags.max_iter.or(file.max_iter).unwrap_or(10_000),
        interpolation,
        off_grid,
        test_function: flags.test_function.clone().or(file.test_function),
        bias,
        form,
        suite,
        points,
        format: flags.format.or(file.format).unwrap_or(Format::Csv),
        output: flags.output.clone().or(file.output),
        threads,
    };
    if op.stochastic() {
        config.seed()?;
    }
    if op != Operation::Verify {
        config.model_name()?;
    }
    // Echo what actually runs: defaults of the model filled in.
    if let Some(name) = &config.model {
        let model = models::build(name, &config.params)?;
        config.params = model.params.clone();
        if op != Operation::Verify {
            config.x0 = Some(config.x0.unwrap_or(model.default_x0()));
        }
        if op == Operation::ValueSolve {
            config.grid = Some(config.grid.unwrap_or(model.default_grid()));
        }
    }
    Ok(config)
}

const CHECK_COLUMNS: [&str; 4] = ["check_id", "statistic", "threshold", "pass"];

/// A check result in the (check_id, statistic, threshold, pass) schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_id: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `statistic ≤ threshold`.
    pub fn at_most(check_id: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            check_id: check_id.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    /// Passes when `statistic > threshold`.
    pub fn above(check_id: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            check_id: check_id.into(),
            statistic,
            threshold,
            pass: statistic > threshold,
        }
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    record: &'a T,
    config_hash: &'a str,
    seed: Option<u64>,
}

/// Records plus header, rendered into one buffer before anything is written.
struct Report {
    body: Vec<u8>,
    summary: String,
}

fn render<T: Serialize>(
    config: &RunConfig,
    columns: &[&str],
    rows: &[T],
    diagnostics: Option<serde_json::Value>,
    summary: String,
) -> Result<Report, CliError> {
    let hash = config.hash();
    let config_json = serde_json::to_string(config).expect("config serializes");
    let mut body = Vec::new();
    let io = |e: std::io::Error| CliError::Config(format!("write failed: {e}"));
    match config.format {
        Format::Csv => {
            writeln!(body, "# pdmp {}", config.operation).map_err(io)?;
            writeln!(body, "# config: {config_json}").map_err(io)?;
            writeln!(body, "# config_hash: {hash}").map_err(io)?;
            if let Some(d) = &diagnostics {
                writeln!(body, "# diagnostics: {d}").map_err(io)?;
            }
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut body);
            let csv_err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
            w.write_record(columns.iter().chain(&["config_hash", "seed"]))
                .map_err(csv_err)?;
            for row in rows {
                w.serialize((row, &hash, config.seed)).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Format::Jsonl => {
            let header = serde_json::json!({
                "operation": config.operation,
                "config": config,
                "config_hash": hash,
                "diagnostics": diagnostics,
            });
            writeln!(body, "{header}").map_err(io)?;
            for row in rows {
                let line = serde_json::to_string(&Stamped {
                    record: row,
                    config_hash: &hash,
                    seed: config.seed,
                })
                .expect("record serializes");
                writeln!(body, "{line}").map_err(io)?;
            }
        }
    }
    Ok(Report { body, summary })
}

fn build_model(config: &RunConfig) -> Result<ModelInstance, CliError> {
    Ok(models::build(config.model_name()?, &config.params)?)
}

#[derive(Serialize)]
struct JumpRow {
    path_id: usize,
    n: usize,
    tau_n: f64,
    pre_state: f64,
    post_state: f64,
}

#[derive(Serialize)]
struct PathJump {
    n: usize,
    tau_n: f64,
    pre_state: f64,
    post_state: f64,
    forced: bool,
}

#[derive(Serialize)]
struct PathRecord {
    path_id: usize,
    initial_state: f64,
    horizon: f64,
    lifetime: Option<f64>,
    jumps: Vec<PathJump>,
}

fn simulate(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let x = config.x0.unwrap_or(model.default_x0());
    let paths = simulate_paths(
        &model.triple,
        &x,
        config.horizon,
        config.n_paths,
        config.seed()?,
    )?;
    let jumps: usize = paths.iter().map(|p| p.jumps.len()).sum();
    let summary = format!(
        "simulate {}: {} paths, {jumps} jumps on [0, {}]",
        model.name, config.n_paths, config.horizon
    );
    match config.format {
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, path) in paths.iter().enumerate() {
                rows.push(JumpRow {
                    path_id: i,
                    n: 0,
                    tau_n: 0.0,
                    pre_state: x,
                    post_state: x,
                });
                for (k, j) in path.jumps.iter().enumerate() {
                    rows.push(JumpRow {
                        path_id: i,
                        n: k + 1,
                        tau_n: j.time,
                        pre_state: j.pre_state,
                        post_state: j.post_state,
                    });
                }
            }
            render(
                config,
                &["path_id", "n", "tau_n", "pre_state", "post_state"],
                &rows,
                None,
                summary,
            )
        }
        Format::Jsonl => {
            let records: Vec<PathRecord> = paths
                .iter()
                .enumerate()
                .map(|(i, p)| PathRecord {
                    path_id: i,
                    initial_state: p.initial_state,
                    horizon: p.horizon,
                    lifetime: p.lifetime,
                    jumps: p
                        .jumps
                        .iter()
                        .enumerate()
                        .map(|(k, j)| PathJump {
                            n: k + 1,
                            tau_n: j.time,
                            pre_state: j.pre_state,
                            post_state: j.post_state,
                            forced: j.forced,
                        })
                        .collect(),
                })
                .collect();
            render(config, &[], &records, None, summary)
        }
    }
}

#[derive(Serialize)]
struct SurvivalRow {
    t: f64,
    survival: f64,
    oracle: f64,
}

fn survival(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let x = config.x0.unwrap_or(model.default_x0());
    let end = config.horizon.min(model.triple.flow().killing_time(&x));
    let mut rows = Vec::with_capacity(config.points);
    let mut worst: f64 = 0.0;
    for k in 0..config.points {
        let t = end * k as f64 / (config.points - 1) as f64;
        let s = model.triple.survival(&x, t)?;
        let oracle = model.survival_oracle(x, t);
        worst = worst.max((s - oracle).abs());
        rows.push(SurvivalRow {
            t,
            survival: s,
            oracle,
        });
    }
    let summary = format!(
        "survival {} from x0 = {x}: {} points on [0, {end}], max |F - oracle| = {worst:e}",
        model.name, config.points
    );
    render(config, &["t", "survival", "oracle"], &rows, None, summary)
}

fn selected<'a>(
    model: &'a ModelInstance,
    config: &RunConfig,
) -> Result<Vec<&'a (&'static str, crate::generator::TestFunction<f64>)>, CliError> {
    let all: Vec<_> = model.test_functions().iter().collect();
    match &config.test_function {
        None => Ok(all),
        Some(name) => {
            let pick: Vec<_> = all.into_iter().filter(|(n, _)| n == name).collect();
            if pick.is_empty() {
                return Err(CliError::Config(format!(
                    "{} has no test function {name:?} (known: {})",
                    model.name,
                    model
                        .test_functions()
                        .iter()
                        .map(|(n, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            Ok(pick)
        }
    }
}

fn finish_checks(
    config: &RunConfig,
    checks: Vec<Check>,
    what: &str,
    gate: &[bool],
) -> Result<Report, CliError> {
    let failed: Vec<&str> = checks
        .iter()
        .zip(gate)
        .filter(|(c, &g)| g && !c.pass)
        .map(|(c, _)| c.check_id.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("{what}: {} checks, all gating checks passed", checks.len())
    } else {
        format!(
            "{what}: {} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join(", ")
        )
    };
    let report = render(config, &CHECK_COLUMNS, &checks, None, summary)?;
    if failed.is_empty() {
        Ok(report)
    } else {
        write_report(config, &report)?;
        Err(CliError::Failed(report.summary))
    }
}

fn generator_check(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let triple = &model.triple;
    let x = config.x0.unwrap_or(model.default_x0());
    let t = config.horizon.min(triple.flow().killing_time(&x));
    let mut checks = Vec::new();
    let mut gate = Vec::new();
    for (name, f) in selected(&model, config)? {
        let domain = domain_check(triple, f, &x, t, DOMAIN_THRESHOLD);
        checks.push(Check::at_most(
            format!("certify/{name}"),
            domain.certification_residual,
            CHECK_TOL,
        ));
        gate.push(true);
        checks.push(Check {
            pass: domain.pass,
            ..Check::at_most(
                format!("domain/{name}"),
                domain.jump_integral,
                DOMAIN_THRESHOLD,
            )
        });
        gate.push(true);
        if !domain.pass {
            continue;
        }
        let a = apply_generator(triple, f, &x, t)?;
        let m = generator_measure(triple, f).evaluate(triple.flow(), &x, t)?;
        checks.push(Check::at_most(
            format!("measure-form/{name}"),
            (a - m).abs(),
            CHECK_TOL * a.abs().max(1.0),
        ));
        gate.push(true);
        if *name == "identity" {
            if let Some(oracle) = model.generator_identity_oracle(x, t) {
                checks.push(Check::at_most(
                    format!("oracle/{name}"),
                    (a - oracle).abs(),
                    CHECK_TOL * oracle.abs().max(1.0),
                ));
                gate.push(true);
            }
        }
        // Membership in the extended domain is reported, not required.
        let constraint = constraint_check(triple, f, &x, t)?;
        let tol = constraint
            .atoms
            .iter()
            .map(|a| a.tolerance)
            .fold(CHECK_TOL, f64::max);
        checks.push(Check {
            pass: constraint.pass,
            ..Check::at_most(
                format!("atom-constraint/{name}"),
                constraint.max_residual,
                tol,
            )
        });
        gate.push(false);
    }
    finish_checks(
        config,
        checks,
        &format!("generator-check {}", model.name),
        &gate,
    )
}

fn ito_check(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let x = config.x0.unwrap_or(model.default_x0());
    let mut opts = MartingaleOptions::new(config.horizon, config.n_paths, config.seed()?)
        .with_bias(config.bias);
    opts.form = config.form;
    let form = match config.form {
        ResidualForm::Measure => "measure",
        ResidualForm::Extended => "extended",
    };
    let mut checks = Vec::new();
    for (name, f) in selected(&model, config)? {
        let stats = martingale_test(&model.triple, f, &x, opts)?;
        log::info!(
            "{name}: mean {} se {} z {}",
            stats.mean,
            stats.standard_error,
            stats.z_score
        );
        checks.push(Check::at_most(
            format!("martingale/{form}/{name}"),
            stats.z_score.abs(),
            Z_THRESHOLD,
        ));
    }
    let gate = vec![true; checks.len()];
    finish_checks(config, checks, &format!("ito-check {}", model.name), &gate)
}

#[derive(Serialize)]
struct ValueRow {
    state: f64,
    estimate: f64,
    standard_error: f64,
    truncation_bound: f64,
    n_paths: usize,
    horizon: f64,
}

fn value_mc(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let x = config.x0.unwrap_or(model.default_x0());
    let spec = ValueSpec::new(model.reward().clone(), config.discount)?;
    let horizon = config.horizon;
    let mc = mc_value(
        &model.triple,
        &spec,
        &x,
        horizon,
        config.n_paths,
        config.seed()?,
        model.growth_bound(x),
    )?;
    let summary = format!(
        "value-mc {} at x0 = {x}: {} ± {} (truncation {:e}, {} paths, T = {horizon})",
        model.name, mc.estimate, mc.standard_error, mc.truncation_bound, mc.n_paths
    );
    let row = ValueRow {
        state: x,
        estimate: mc.estimate,
        standard_error: mc.standard_error,
        truncation_bound: mc.truncation_bound,
        n_paths: mc.n_paths,
        horizon,
    };
    render(
        config,
        &[
            "state",
            "estimate",
            "standard_error",
            "truncation_bound",
            "n_paths",
            "horizon",
        ],
        &[row],
        None,
        summary,
    )
}

#[derive(Serialize)]
struct GridRow {
    state: f64,
    value: f64,
}

fn value_solve(config: &RunConfig) -> Result<Report, CliError> {
    let model = build_model(config)?;
    let spec = ValueSpec::new(model.reward().clone(), config.discount)?;
    let grid = config.grid.unwrap_or(model.default_grid());
    let opts = SolveOptions {
        tolerance: config.tolerance,
        max_iter: config.max_iter,
        interpolation: config.interpolation,
        off_grid: config.off_grid,
        t_max: None,
    };
    let sol = fixed_point_solve(&model.triple, &spec, grid, opts)?;
    let rows: Vec<GridRow> = grid
        .nodes()
        .into_iter()
        .zip(&sol.values)
        .map(|(state, &value)| GridRow { state, value })
        .collect();
    let diagnostics = serde_json::json!({
        "iterations": sol.iterations,
        "final_sup_change": sol.final_sup_change,
        "contraction_estimate": sol.contraction_estimate,
        "truncation_bound": sol.truncation_bound,
        "off_grid_evaluations": sol.off_grid_evaluations,
    });
    let summary = format!(
        "value-solve {} on {grid}: {} iterations, sup-change {:e}, contraction {}, off-grid evaluations {}",
        model.name, sol.iterations, sol.final_sup_change, sol.contraction_estimate, sol.off_grid_evaluations
    );
    render(
        config,
        &["state", "value"],
        &rows,
        Some(diagnostics),
        summary,
    )
}

fn run_verify(config: &RunConfig) -> Result<Report, CliError> {
    let checks = verify::run(config)?;
    let gate = vec![true; checks.len()];
    finish_checks(config, checks, &format!("verify {}", config.suite), &gate)
}

fn write_report(config: &RunConfig, report: &Report) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, &report.body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&report.body)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
        }
    }
}

fn print_summary(config: &RunConfig, summary: &str) {
    if config.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
}

fn execute(op: Operation, flags: &Flags) -> Result<(), CliError> {
    let config = resolve(op, flags)?;
    log::debug!(
        "effective config: {}",
        serde_json::to_string(&config).unwrap_or_default()
    );
    let work = || -> Result<Report, CliError> {
        match op {
            Operation::Simulate => simulate(&config),
            Operation::Survival => survival(&config),
            Operation::GeneratorCheck => generator_check(&config),
            Operation::ItoCheck => ito_check(&config),
            Operation::ValueMc => value_mc(&config),
            Operation::ValueSolve => value_solve(&config),
            Operation::Verify => run_verify(&config),
        }
    };
    let result = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    match result {
        Ok(report) => {
            write_report(&config, &report)?;
            print_summary(&config, &report.summary);
            Ok(())
        }
        Err(CliError::Failed(summary)) => {
            print_summary(&config, &summary);
            Err(CliError::Failed(summary))
        }
        Err(e) => Err(e),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (op, flags) = cli.command.parts();
    match execute(op, flags) {
        Ok(()) => EXIT_OK,
        Err(CliError::Failed(_)) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
