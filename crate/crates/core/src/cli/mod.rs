//! Command implementations behind the `cvn` binary.
//!
//! Each command takes already-read text and returns its output, so the
//! binary only handles argument parsing, file I/O and exit codes.

pub mod format;

use std::fmt::{self, Write as _};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algebra::{EngineKind, Valuation};
use crate::error::Error;
use crate::eval::{compare, ComparisonTable, MarginalReport};
use crate::interval::{check_bounds, tighten_bounds, IntervalValuation};
use crate::network::{default_order, fuse, EliminationOrder};
use crate::optim::{SolverConfig, SolverKind};
use crate::pmf::PmfValuation;
use crate::rules::RuleKind;

pub use format::{parse_network, print_network, NetworkSpec, ParseError, Span, ValDecl, VarDecl};

/// The arrival-delay network.
pub const ARRIVAL_DELAY: &str = include_str!("../../fixtures/arrival_delay.cvn");
/// Evidential-network marginal of arrival delay, kept for comparison.
pub const ARRIVAL_DELAY_EN: &str = include_str!("../../fixtures/arrival_delay_en.intervals");

pub const DEMOS: &[&str] = &["arrival-delay"];

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_COHERENCE: i32 = 3;
pub const EXIT_CONFLICT: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

/// Process exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Incoherent(_) | Error::EmptyCredalSet(_) | Error::InvalidPmf(_) => EXIT_COHERENCE,
        Error::TotalConflict(_) => EXIT_CONFLICT,
        Error::Solver(_) | Error::Infeasible | Error::ThresholdExceeded { .. } => EXIT_SOLVER,
        _ => EXIT_PARSE,
    }
}

/// An error together with the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        Self::usage(format!("parse error at {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Seed from the flag, else from `CVN_SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("CVN_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("CVN_SEED must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn sig12_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(sig12).collect()
}

/// Machine-readable outcome of one inference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub engine: EngineKind,
    pub query: Vec<String>,
    pub order: Vec<String>,
    /// Configuration labels such as `A=3`, in canonical order.
    pub states: Vec<String>,
    /// Point probabilities for the precise engine, lower bounds otherwise.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("bad result document: {e}")))
    }

    /// Human-readable listing.
    pub fn render(&self) -> String {
        let mut out = format!("engine: {}\n", self.engine);
        let _ = writeln!(out, "order: {}", if self.order.is_empty() { "-".into() } else { self.order.join(",") });
        let w = self.states.iter().map(String::len).max().unwrap_or(0);
        for (i, s) in self.states.iter().enumerate() {
            if self.engine == EngineKind::Precise {
                let _ = writeln!(out, "{s:<w$}  {:.6}", self.lower[i]);
            } else {
                let _ = writeln!(out, "{s:<w$}  [{:.6}, {:.6}]", self.lower[i], self.upper[i]);
            }
        }
        if let Some(d) = self.distance {
            let _ = writeln!(out, "D = {d:.4}");
        }
        if let Some(t) = self.wall_clock_seconds {
            let _ = writeln!(out, "time: {t:.3} s");
        }
        out
    }

    /// The result as an interval valuation on the query domain.
    pub fn interval(&self, spec: &NetworkSpec) -> CliResult<IntervalValuation> {
        let vars = self
            .query
            .iter()
            .map(|q| spec.variable(q).ok_or_else(|| CliError::usage(format!("unknown variable `{q}`"))))
            .collect::<CliResult<Vec<_>>>()?;
        let domain = crate::domain::Domain::new(vars)?;
        Ok(IntervalValuation::new(domain, self.lower.clone(), self.upper.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferOptions {
    pub engine: EngineKind,
    pub order: Option<Vec<String>>,
    pub solver: SolverKind,
    pub seed: u64,
    pub timing: bool,
}

impl Default for InferOptions {
    fn default() -> Self {
        Self {
            engine: EngineKind::Credal,
            order: None,
            solver: SolverKind::Auto,
            seed: 0,
            timing: false,
        }
    }
}

/// Runs one engine on a parsed network.
pub fn infer(spec: &NetworkSpec, opts: &InferOptions) -> CliResult<(ResultDocument, Valuation)> {
    let net = spec.compile(opts.engine)?;
    let order = match &opts.order {
        Some(names) => EliminationOrder::new(&net, names.clone())?,
        None => default_order(&net),
    };
    let cfg = SolverConfig {
        rng_seed: opts.seed,
        solver: opts.solver,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let start = Instant::now();
    let value = fuse(&net, &order, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (lower, upper) = value.bounds();
    let domain = value.label();
    let doc = ResultDocument {
        engine: opts.engine,
        query: domain.names().map(String::from).collect(),
        order: order.names().to_vec(),
        states: (0..domain.cardinality()).map(|i| domain.describe(i)).collect(),
        lower: sig12_all(lower),
        upper: sig12_all(upper),
        truth: None,
        distance: None,
        solver: cfg,
        wall_clock_seconds: opts.timing.then(|| sig12(elapsed)),
    };
    Ok((doc, value))
}

/// `cvn infer`: parse, run and report.
pub fn cmd_infer(text: &str, opts: &InferOptions) -> CliResult<ResultDocument> {
    let spec = parse_network(text)?;
    Ok(infer(&spec, opts)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Exit code this diagnostic maps to when it is an error.
    pub code: i32,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    /// Row layout of every table valuation, when requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub explain: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.iter().all(|d| d.severity != Severity::Error)
    }

    /// Exit code of the first error, or 0.
    pub fn exit_code(&self) -> i32 {
        self.diagnostics
            .iter()
            .find(|d| d.severity == Severity::Error)
            .map_or(0, |d| d.code)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            let _ = writeln!(out, "{d}");
        }
        for e in &self.explain {
            out += e;
        }
        if self.is_clean() {
            out += "ok\n";
        }
        out
    }
}

/// `cvn validate`: parse, coherence and rule satisfiability checks.
pub fn cmd_validate(text: &str, explain: bool) -> ValidationReport {
    let mut report = ValidationReport {
        diagnostics: Vec::new(),
        explain: Vec::new(),
    };
    let spec = match parse_network(text) {
        Ok(s) => s,
        Err(e) => {
            report.diagnostics.push(Diagnostic {
                severity: Severity::Error,
                line: e.span.line,
                column: e.span.column,
                message: e.message,
                code: EXIT_PARSE,
            });
            return report;
        }
    };
    for decl in &spec.valuations {
        let at = |severity, message: String, code| Diagnostic {
            severity,
            line: decl.span.line,
            column: decl.span.column,
            message,
            code,
        };
        if let RuleKind::Table { rows } = &decl.rule.kind {
            let lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let c = check_bounds(&lower, &upper);
            if !c.cond1_ok {
                let msg = format!(
                    "table `{}` is empty: lower bounds sum to {}, upper bounds to {}",
                    decl.name,
                    sig12(lower.iter().sum()),
                    sig12(upper.iter().sum())
                );
                report.diagnostics.push(at(Severity::Error, msg, EXIT_COHERENCE));
                continue;
            }
            if !c.is_coherent() {
                let suggestion = tighten_bounds(&lower, &upper)
                    .map(|(l, u)| {
                        let rows: Vec<String> = l.iter().zip(&u).map(|(a, b)| format!("{},{}", sig12(*a), sig12(*b))).collect();
                        format!("; reachable bounds would be `table {}`", rows.join("; "))
                    })
                    .unwrap_or_default();
                let msg = format!(
                    "table `{}` has unreachable bounds at rows {:?}{suggestion}",
                    decl.name, c.violating_indices
                );
                report.diagnostics.push(at(Severity::Error, msg, EXIT_COHERENCE));
                continue;
            }
            if explain {
                if let Ok(d) = spec.domain_of(decl) {
                    let mut s = format!("table `{}` rows (last variable varies fastest):\n", decl.name);
                    for i in 0..d.cardinality() {
                        let _ = writeln!(s, "  row {i}: {}", d.describe(i));
                    }
                    report.explain.push(s);
                }
            }
        }
        if let Err(e) = spec.compile_valuation(decl, EngineKind::Credal) {
            report.diagnostics.push(at(Severity::Error, e.to_string(), exit_code(&e)));
            continue;
        }
        let precise_ok = match &decl.rule.kind {
            RuleKind::Table { rows } => rows.iter().all(|(l, u)| l == u),
            _ => decl.rule.reliability.point_value().is_ok(),
        };
        if precise_ok {
            if let Err(e) = spec.compile_valuation(decl, EngineKind::Precise) {
                report.diagnostics.push(at(Severity::Error, e.to_string(), exit_code(&e)));
            }
        } else {
            let msg = format!("valuation `{}` has no point value, so only the credal engine can use it", decl.name);
            report.diagnostics.push(at(Severity::Warning, msg, 0));
        }
    }
    if report.is_clean() {
        if let Err(e) = spec.compile(EngineKind::Credal) {
            report.diagnostics.push(Diagnostic {
                severity: Severity::Error,
                line: spec.query_span.line,
                column: spec.query_span.column,
                message: e.to_string(),
                code: exit_code(&e),
            });
        }
    }
    report
}

/// Where the reference distribution for `compare` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthSource {
    None,
    /// Probabilities listed in a file, separated by commas or whitespace.
    File(String),
    Inline(Vec<f64>),
    /// The precise engine's answer on the same network.
    Precise,
}

/// Parses a list of probabilities; `#` starts a comment.
pub fn parse_numbers(text: &str) -> CliResult<Vec<f64>> {
    text.lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::usage(format!("`{t}` is not a number"))))
        .collect()
}

/// Loads a one-table interval file as a marginal on a single variable.
///
/// The bounds are taken as written; they must already be reachable.
pub fn load_intervals(text: &str) -> CliResult<IntervalValuation> {
    let spec = parse_network(text)?;
    let [decl] = spec.valuations.as_slice() else {
        return Err(CliError::usage(format!(
            "an interval file holds exactly one table, found {} valuations",
            spec.valuations.len()
        )));
    };
    let RuleKind::Table { rows } = &decl.rule.kind else {
        return Err(CliError::usage(format!("valuation `{}` is not a table", decl.name)));
    };
    let domain = spec.domain_of(decl)?;
    Ok(IntervalValuation::new_strict(
        domain,
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareOutput {
    pub credal: ResultDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precise: Option<ResultDocument>,
    pub table: ComparisonTable,
}

impl CompareOutput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison output always serializes")
    }
}

fn single_query(spec: &NetworkSpec) -> CliResult<()> {
    if spec.query.len() != 1 {
        return Err(CliError::usage("comparison needs a query on exactly one variable"));
    }
    Ok(())
}

/// `cvn compare`: the credal marginal next to a reference and extra interval sets.
pub fn cmd_compare(
    text: &str,
    truth: &TruthSource,
    extras: &[(String, String)],
    opts: &InferOptions,
) -> CliResult<CompareOutput> {
    let spec = parse_network(text)?;
    single_query(&spec)?;
    let credal_opts = InferOptions {
        engine: EngineKind::Credal,
        ..opts.clone()
    };
    let (mut credal, value) = infer(&spec, &credal_opts)?;
    let domain = value.label().clone();
    let mut precise = None;
    let truth_probs = match truth {
        TruthSource::None => None,
        TruthSource::File(t) => Some(parse_numbers(t)?),
        TruthSource::Inline(v) => Some(v.clone()),
        TruthSource::Precise => {
            let popts = InferOptions {
                engine: EngineKind::Precise,
                ..opts.clone()
            };
            let (doc, v) = infer(&spec, &popts)?;
            precise = Some(doc);
            Some(v.bounds().0.to_vec())
        }
    };
    let truth_pmf = match truth_probs {
        Some(p) => {
            if p.len() != domain.cardinality() {
                return Err(CliError::usage(format!(
                    "truth has {} entries but {} has {} states",
                    p.len(),
                    domain,
                    domain.cardinality()
                )));
            }
            Some(PmfValuation::from_weights(domain.clone(), p)?)
        }
        None => None,
    };
    let mut reports = Vec::new();
    if let Some(t) = &truth_pmf {
        let name = if precise.is_some() { "VN-PMF" } else { "truth" };
        reports.push(MarginalReport::new(name, &IntervalValuation::from_pmf(t), None)?);
    }
    let credal_iv = value
        .as_interval()
        .ok_or_else(|| CliError::usage("credal engine returned a precise valuation"))?;
    let cvn = MarginalReport::new("CVN", credal_iv, truth_pmf.as_ref())?;
    credal.truth = truth_pmf.as_ref().map(|t| sig12_all(t.probs()));
    credal.distance = cvn.distance.map(sig12);
    reports.push(cvn);
    for (name, body) in extras {
        let iv = load_intervals(body).map_err(|e| CliError {
            code: e.code,
            message: format!("extra `{name}`: {}", e.message),
        })?;
        if iv.domain() != &domain {
            return Err(CliError::usage(format!(
                "extra `{name}` is on {} but the query is on {}",
                iv.domain(),
                domain
            )));
        }
        reports.push(MarginalReport::new(name.clone(), &iv, truth_pmf.as_ref())?);
    }
    let table = compare(reports)?;
    Ok(CompareOutput { credal, precise, table })
}

/// `cvn demo NAME`.
pub fn cmd_demo(name: &str, opts: &InferOptions) -> CliResult<CompareOutput> {
    match name {
        "arrival-delay" => cmd_compare(
            ARRIVAL_DELAY,
            &TruthSource::Precise,
            &[("EN".to_string(), ARRIVAL_DELAY_EN.to_string())],
            opts,
        ),
        other => Err(CliError::usage(format!(
            "unknown demo `{other}`; available: {}",
            DEMOS.join(", ")
        ))),
    }
}
