//! Command-line front end. All output is JSON; complex numbers are `[re, im]`.
//!
//! Exit codes: 0 success, 1 residual failure, 2 bad input or degenerate
//! lifting, 3 parameter degeneracy, 4 internal numeric failure.

use crate::config::{aomoto_gelfand_config, build_cayley, confluent_config, registry, ConfigError, ConfigMatrix, ProblemDocument};
use crate::intersection::{
    exact_coefficient_identity, verify_case, CaseSpec, IntersectionError, RelationReport,
};
use crate::jsonfmt;
use crate::series::{evaluate_series, EvaluationPoint, SeriesError, SeriesKind};
use crate::specfun::SpecfunError;
use crate::triangulation::{
    enumerate_ladders, enumerate_regular_triangulations, ladder_columns, ladder_exponents, sample_interior_lifting,
    triangulate, Simplex, Triangulation, TriangulationError,
};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use std::ops::Add;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "GKZ_EULER_THREADS";

/// Default number of random liftings for `fan-scan`.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Cases run by `verify` without an input file.
pub const BUILTIN_CASES: [&str; 6] = ["gauss", "kummer", "f1", "phi1", "e36", "e36c"];

#[derive(Debug, Parser)]
#[command(name = "gkz-euler", version, about = "GKZ hypergeometric toolkit: triangulations, Gamma-series, quadratic relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Registry name (gauss, kummer, f1, phi1, g1, gamma2, h4, e36, e36c) or path to a JSON block document.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Comma-separated integer lifting.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Truncation order M.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Depth of sampled evaluation points.
    #[arg(long, global = true)]
    pub scale: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular triangulation for a given or sampled lifting.
    Triangulate,
    /// Regular triangulations found by random lifting, with flags.
    FanScan,
    /// Staircase triangulation of E(k+1, n+1) with its exponent vectors.
    Ladders {
        k: usize,
        n: usize,
        #[arg(long)]
        confluent: bool,
    },
    /// One Γ-series value from a JSON request (path or inline).
    Series { input: String },
    /// Quadratic relations from a batch file (path or inline); built-in cases if omitted.
    Verify { input: Option<String> },
    /// Exact coefficient identities for `gauss` or `kummer`.
    Identities {
        case: String,
        /// Comma-separated rationals, e.g. `1/3,2/7,5/11`.
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Built-in verification, exact identities, fan scans and ladder counts.
    Report,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) | CliError::Io(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::BadInput(_) => "BadInput",
            CliError::Io(_) => "Io",
            CliError::Degenerate(_) => "Degenerate",
            CliError::Numeric(_) => "Numeric",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

fn specfun_class(e: &SpecfunError) -> i32 {
    match e {
        SpecfunError::NonFinite => 4,
        _ => 3,
    }
}

fn series_class(e: &SeriesError) -> i32 {
    match e {
        SeriesError::DivergentTail { .. } => 1,
        SeriesError::NonGenericParameter { .. } | SeriesError::IntegralGamma { .. } => 3,
        SeriesError::Specfun(s) => specfun_class(s),
        SeriesError::ZeroCoordinate(_) | SeriesError::Length { .. } | SeriesError::ScaleTooSmall { .. } => 2,
        SeriesError::Triangulation(_) => 2,
        _ => 4,
    }
}

/// Exit code class of a library error: 1 divergent tail, 2 bad input,
/// 3 parameter degeneracy, 4 numeric failure.
pub fn intersection_class(e: &IntersectionError) -> i32 {
    use IntersectionError as E;
    match e {
        E::Series(s) => series_class(s),
        E::Specfun(s) => specfun_class(s),
        E::DegenerateParameter(_) | E::ZeroDenominator(_) => 3,
        E::NotUnimodular(_)
        | E::NotConvergent
        | E::TriangulationNotUnimodular
        | E::BadSubsets(_)
        | E::UnknownCase(_)
        | E::Length { .. }
        | E::Config(_)
        | E::Triangulation(_) => 2,
    }
}

/// Error variant name for structured reports, e.g. `SineZero`.
pub fn error_name(e: &IntersectionError) -> String {
    let dbg = match e {
        IntersectionError::Series(SeriesError::Specfun(s)) | IntersectionError::Specfun(s) => format!("{s:?}"),
        IntersectionError::Series(s) => format!("{s:?}"),
        other => format!("{other:?}"),
    };
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

fn from_class(code: i32, msg: String) -> CliError {
    match code {
        2 => CliError::BadInput(msg),
        3 => CliError::Degenerate(msg),
        _ => CliError::Numeric(msg),
    }
}

impl From<IntersectionError> for CliError {
    fn from(e: IntersectionError) -> Self {
        from_class(intersection_class(&e), e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        from_class(series_class(&e), e.to_string())
    }
}

impl From<TriangulationError> for CliError {
    fn from(e: TriangulationError) -> Self {
        match e {
            TriangulationError::ExhaustedRetries(_) => CliError::Numeric(e.to_string()),
            TriangulationError::DegenerateLifting { .. } => CliError::BadInput(format!("DegenerateLifting: {e}")),
            _ => CliError::BadInput(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::BadInput(format!("invalid JSON: {e}"))
    }
}

/// Result of a command: JSON document plus exit code.
pub struct Outcome {
    pub value: Value,
    pub code: i32,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Self { value, code: 0 }
    }
}

/// Registry name or a path to a [`ProblemDocument`].
pub fn resolve_config(spec: &str) -> Result<ConfigMatrix, CliError> {
    match registry::by_name(spec) {
        Ok(a) => Ok(a),
        Err(ConfigError::UnknownName(_)) => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| CliError::BadInput(format!("`{spec}` is neither a registry name nor a readable file: {e}")))?;
            let doc = ProblemDocument::from_json(&text)?;
            Ok(build_cayley(&doc.block_config()?)?)
        }
        Err(e) => Err(e.into()),
    }
}

/// Inline JSON if the argument starts with `{` or `[`, otherwise a file path.
pub fn read_input(arg: &str) -> Result<String, CliError> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        Ok(std::fs::read_to_string(arg)?)
    }
}

fn parse_omega(csv: &str) -> Result<Vec<i64>, CliError> {
    csv.split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|e| CliError::BadInput(format!("bad lifting entry `{s}`: {e}"))))
        .collect()
}

fn require_config(cli: &Cli) -> Result<(String, ConfigMatrix), CliError> {
    let name = cli.config.clone().ok_or_else(|| CliError::BadInput("--config is required".into()))?;
    let a = resolve_config(&name)?;
    Ok((name, a))
}

fn triangulation_json(a: &ConfigMatrix, t: &Triangulation) -> Value {
    let mut v = t.to_json_value();
    v["volume"] = json!(t.volume().to_string());
    v["dets"] = json!(t.simplices().iter().map(|s| s.det().to_string()).collect::<Vec<_>>());
    v["columns"] = json!(a.num_cols());
    v
}

fn cmd_triangulate(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, a) = require_config(cli)?;
    let omega = match &cli.omega {
        Some(csv) => parse_omega(csv)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
            sample_interior_lifting(&a, None, &mut rng)?
        }
    };
    let t = triangulate(&a, &omega)?;
    Ok(Outcome::ok(json!({ "config": name, "triangulation": triangulation_json(&a, &t) })))
}

fn cmd_fan_scan(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, a) = require_config(cli)?;
    let samples = cli.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = cli.seed.unwrap_or(0);
    let ts = enumerate_regular_triangulations(&a, samples, seed);
    Ok(Outcome::ok(json!({
        "config": name,
        "samples": samples,
        "seed": seed,
        "count": ts.len(),
        "triangulations": ts.iter().map(|t| triangulation_json(&a, t)).collect::<Vec<_>>(),
    })))
}

/// Formal sum of `c̃_l` used to print ladder exponents symbolically.
#[derive(Clone, Debug, PartialEq)]
struct Formal(Vec<i64>);

impl Add for Formal {
    type Output = Formal;
    fn add(self, o: Formal) -> Formal {
        let n = self.0.len().max(o.0.len());
        Formal((0..n).map(|i| self.0.get(i).unwrap_or(&0) + o.0.get(i).unwrap_or(&0)).collect())
    }
}

impl Zero for Formal {
    fn zero() -> Self {
        Formal(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

impl Formal {
    fn render(&self) -> String {
        let terms: Vec<String> = self.0.iter().enumerate().filter(|(_, &c)| c != 0).map(|(l, _)| format!("c{l}")).collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

pub fn ladders_json(k: usize, n: usize, confluent: bool) -> Result<Value, CliError> {
    if k == 0 || k >= n {
        return Err(CliError::BadInput(format!("ladders need 1 ≤ k < n, got ({k}, {n})")));
    }
    let a = if confluent { confluent_config(k, n)? } else { aomoto_gelfand_config(k, n)? };
    let ct: Vec<Formal> = (0..=n).map(|l| Formal((0..=l).map(|i| i64::from(i == l)).collect())).collect();
    let mut rows = Vec::new();
    for l in enumerate_ladders(k, n) {
        let cols = ladder_columns(&a, &l).ok_or_else(|| CliError::Numeric("ladder outside the configuration".into()))?;
        let s = Simplex::from_columns(&a, &cols)?;
        let ex: Vec<Value> = ladder_exponents(&l, &ct, confluent)
            .into_iter()
            .map(|((i, j), v)| json!({ "cell": [i, j], "exponent": v.render() }))
            .collect();
        rows.push(json!({ "cells": l.cells, "columns": s.labels(), "det": s.det().to_string(), "exponents": ex }));
    }
    Ok(json!({ "k": k, "n": n, "confluent": confluent, "count": rows.len(), "ladders": rows }))
}

#[derive(Debug, Deserialize)]
struct SeriesRequest {
    #[serde(default)]
    config: Option<String>,
    sigma: Vec<usize>,
    #[serde(default)]
    k: Option<Vec<i64>>,
    #[serde(with = "jsonfmt::complex_vec")]
    z: Vec<Complex64>,
    #[serde(with = "jsonfmt::complex_vec")]
    delta: Vec<Complex64>,
    order: usize,
    #[serde(default)]
    dual: bool,
}

fn cmd_series(cli: &Cli, input: &str) -> Result<Outcome, CliError> {
    let req: SeriesRequest = serde_json::from_str(&read_input(input)?)?;
    let name = req.config.clone().or_else(|| cli.config.clone()).ok_or_else(|| CliError::BadInput("no configuration given".into()))?;
    let a = resolve_config(&name)?;
    let s = Simplex::new(&a, &req.sigma)?;
    let kvec = req.k.clone().unwrap_or_else(|| vec![0; s.complement().len()]);
    let point = EvaluationPoint::new(req.z.clone(), "request")?;
    let order = cli.order.unwrap_or(req.order);
    let kind = if req.dual { SeriesKind::Dual } else { SeriesKind::Primal };
    let v = evaluate_series(&s, &kvec, &point.log_z(), &req.delta, order, kind)?;
    Ok(Outcome::ok(json!({
        "value": jsonfmt::to_pair(v.value),
        "last_shell_max": v.last_shell_max,
        "terms": v.terms_summed,
        "order": v.order,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Batch {
    List(Vec<CaseSpec>),
    Wrapped { cases: Vec<CaseSpec> },
}

fn apply_overrides(cli: &Cli, mut spec: CaseSpec) -> CaseSpec {
    if let Some(m) = cli.order {
        spec.order = Some(m);
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(t) = cli.scale {
        spec.scale = t;
    }
    spec
}

/// Runs cases in the worker pool; output order follows input order.
pub fn run_batch(specs: &[CaseSpec]) -> (Vec<Value>, i32) {
    let results: Vec<Result<RelationReport, IntersectionError>> = specs.par_iter().map(verify_case).collect();
    let mut code = 0;
    let items = specs
        .iter()
        .zip(results)
        .map(|(spec, r)| match r {
            Ok(rep) => {
                if !rep.passed {
                    code = code.max(1);
                }
                json!({ "case": spec.case, "status": if rep.passed { "pass" } else { "fail" }, "report": rep })
            }
            Err(e) => {
                let c = intersection_class(&e);
                code = code.max(c);
                json!({
                    "case": spec.case,
                    "status": "error",
                    "error": { "kind": error_name(&e), "message": e.to_string(), "exit_class": c },
                })
            }
        })
        .collect();
    (items, code)
}

fn cmd_verify(cli: &Cli, input: Option<&str>) -> Result<Outcome, CliError> {
    let specs: Vec<CaseSpec> = match input {
        Some(arg) => match serde_json::from_str::<Batch>(&read_input(arg)?)? {
            Batch::List(v) | Batch::Wrapped { cases: v } => v,
        },
        None => BUILTIN_CASES.iter().map(|c| CaseSpec::named(c)).collect(),
    };
    let specs: Vec<CaseSpec> = specs.into_iter().map(|s| apply_overrides(cli, s)).collect();
    let (items, code) = run_batch(&specs);
    Ok(Outcome { value: json!({ "passed": code == 0, "items": items }), code })
}

fn parse_rationals(csv: &str) -> Result<Vec<BigRational>, CliError> {
    csv.split(',')
        .map(|s| s.trim().parse::<BigRational>().map_err(|e| CliError::BadInput(format!("bad rational `{s}`: {e}"))))
        .collect()
}

/// Rows `{n, holds}` or `{n, error}` for degrees `0..=n_max`.
pub fn identity_table(case: &str, n_max: usize, params: &[BigRational]) -> (Vec<Value>, i32) {
    let mut code = 0;
    let rows = (0..=n_max)
        .map(|n| match exact_coefficient_identity(case, n, params) {
            Ok(h) => {
                if !h {
                    code = code.max(1);
                }
                json!({ "n": n, "holds": h })
            }
            Err(e) => {
                code = code.max(intersection_class(&e));
                json!({ "n": n, "error": { "kind": error_name(&e), "message": e.to_string() } })
            }
        })
        .collect();
    (rows, code)
}

fn cmd_identities(case: &str, params: &str, n_max: usize) -> Result<Outcome, CliError> {
    let p = parse_rationals(params)?;
    let (rows, code) = identity_table(case, n_max, &p);
    Ok(Outcome {
        value: json!({ "case": case, "params": params, "n_max": n_max, "rows": rows }),
        code,
    })
}

fn cmd_report(cli: &Cli) -> Result<Outcome, CliError> {
    let specs: Vec<CaseSpec> = BUILTIN_CASES.iter().map(|c| apply_overrides(cli, CaseSpec::named(c))).collect();
    let (items, mut code) = run_batch(&specs);
    let mut identities = Vec::new();
    for (case, params) in [("gauss", "1/3,2/7,5/11"), ("kummer", "3/5,4/9")] {
        let (rows, c) = identity_table(case, 12, &parse_rationals(params)?);
        code = code.max(c);
        identities.push(json!({ "case": case, "params": params, "rows": rows }));
    }
    let samples = cli.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = cli.seed.unwrap_or(0);
    let fans: Vec<Value> = ["g1", "gamma2", "h4"]
        .iter()
        .map(|name| {
            let a = registry::by_name(name).expect("registry");
            let ts = enumerate_regular_triangulations(&a, samples, seed);
            json!({
                "config": name,
                "count": ts.len(),
                "triangulations": ts.iter().map(|t| triangulation_json(&a, t)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut ladders = Vec::new();
    for n in 2..=9usize {
        for k in 1..n {
            ladders.push(json!({ "k": k, "n": n, "count": enumerate_ladders(k, n).len() }));
        }
    }
    Ok(Outcome {
        value: json!({ "passed": code == 0, "verify": items, "identities": identities, "fans": fans, "ladder_counts": ladders }),
        code,
    })
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Triangulate => cmd_triangulate(cli),
        Command::FanScan => cmd_fan_scan(cli),
        Command::Ladders { k, n, confluent } => Ok(Outcome::ok(ladders_json(*k, *n, *confluent)?)),
        Command::Series { input } => cmd_series(cli, input),
        Command::Verify { input } => cmd_verify(cli, input.as_deref()),
        Command::Identities { case, params, n_max } => cmd_identities(case, params, *n_max),
        Command::Report => cmd_report(cli),
    }
}

/// Caps the global rayon pool from [`THREADS_ENV`]; ignores unparsable values.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // a second initialisation attempt is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the command and writes its JSON; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.value).expect("serializable") + "\n";
            let written = match &cli.out {
                Some(p) => std::fs::write(p, text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("{}", CliError::Io(e).to_json());
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
