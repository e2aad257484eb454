//! The `mob` command line: `eval`, `catalog`, `crosscheck` and `sweep`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::brackets::SkippedCandidate;
use crate::catalog::{parse_param, Catalog, CheckOptions, CrossCheckReport, Params, Verdict};
use crate::engine::{run_engine, EngineOptions, SeriesSummary, SolutionRecord};
use crate::integrand::parse_integrand;
use crate::oracle::{integrate_halfline, DEFAULT_ORACLE_TOL};
use crate::report::{fmt_complex, fmt_real, relative_gap, to_json_line, to_json_pretty, Cplx, SCHEMA_VERSION};
use crate::series::{CombinedValue, SeriesError, DEFAULT_MAX_TERMS, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mob", version, about = "Method of brackets for integrals over (0, inf)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter binding `name=value`; repeatable.
    #[arg(long = "param", short = 'p', value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Relative tolerance (series truncation for eval, verdict otherwise).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
    max_terms: usize,
    /// Run the quadrature oracle.
    #[arg(long, overrides_with = "no_oracle")]
    oracle: bool,
    /// Skip the quadrature oracle.
    #[arg(long, overrides_with = "oracle")]
    no_oracle: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn oracle_or(&self, default: bool) -> bool {
        if self.oracle {
            true
        } else if self.no_oracle {
            false
        } else {
            default
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an integrand with the bracket engine.
    Eval {
        #[arg(long)]
        integrand: String,
        /// Also evaluate these catalog entries (`id` or `id/branch`) at the
        /// same parameters.
        #[arg(long = "compare", value_name = "ID")]
        compare: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List or show catalog entries.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Engine against closed form against oracle for one catalog entry.
    Crosscheck {
        /// `id` or `id/branch`.
        id: String,
        /// Force this closed-form branch instead of the active one.
        #[arg(long)]
        branch: Option<String>,
        /// Compare the entry's closed form with the entry it reduces to.
        #[arg(long)]
        reduction: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check over a Cartesian parameter grid, one JSON line per point.
    Sweep {
        /// `id` or `id/branch`; each `--param` value may be `v1,v2,...` or
        /// `lo:hi:count`.
        id: String,
        /// Force this closed-form branch instead of the active one.
        #[arg(long)]
        branch: Option<String>,
        /// Run the reduction check at every grid point.
        #[arg(long)]
        reduction: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// One line per entry: id and title.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Full manifest record of one entry.
    Show {
        id: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub est_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub entry: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub schema: u32,
    pub kind: &'static str,
    pub integrand: String,
    pub params: Params,
    pub series: SeriesSummary,
    pub solutions: Vec<SolutionRecord>,
    pub skipped: Vec<SkippedCandidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<SeriesError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl EvalReport {
    pub fn exit_code(&self) -> i32 {
        match &self.combined {
            Some(c) if c.converged && !c.inconclusive => EXIT_OK,
            Some(_) => EXIT_INDETERMINATE,
            None => match self.error {
                Some(SeriesError::EmptyContribution) => EXIT_INDETERMINATE,
                _ => EXIT_ERROR,
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub error: usize,
}

impl SweepSummary {
    fn add(&mut self, v: Verdict) {
        self.points += 1;
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Indeterminate => self.indeterminate += 1,
            Verdict::Error => self.error += 1,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.fail + self.error > 0 {
            EXIT_ERROR
        } else if self.indeterminate > 0 {
            EXIT_INDETERMINATE
        } else {
            EXIT_OK
        }
    }
}

/// Failure that ends a command with a message on standard error.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn parse_params(items: &[String]) -> Result<Params, Failure> {
    let mut out = Params::new();
    for item in items {
        let (k, v) = parse_param(item).map_err(Failure)?;
        if out.insert(k.clone(), v).is_some() {
            return Err(Failure(format!("parameter {k} given twice")));
        }
    }
    Ok(out)
}

/// One grid axis: `v`, `v1,v2,...` or `lo:hi:count` (inclusive).
pub fn parse_axis(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{}' is not a number", s.trim()))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, count] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("'{}' is not a point count", count.trim()))?;
            match count {
                0 => Err("a range needs at least one point".into()),
                1 => Ok(vec![lo]),
                _ => Ok((0..count)
                    .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                    .collect()),
            }
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(format!("bad grid '{text}'; use v1,v2,... or lo:hi:count")),
    }
}

/// Cartesian product in the order the axes were given, last axis fastest.
pub fn parse_grid(items: &[String]) -> Result<Vec<Params>, String> {
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected name=values, got '{item}'"))?;
        let k = k.trim().to_string();
        if axes.iter().any(|(n, _)| *n == k) {
            return Err(format!("parameter {k} given twice"));
        }
        let values = parse_axis(v).map_err(|e| format!("parameter {k}: {e}"))?;
        axes.push((k, values));
    }
    let mut points = vec![Params::new()];
    for (name, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.clone(), *v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => writeln!(out, "{text}").map_err(Failure::from),
    }
}

fn load_catalog() -> Result<Catalog, Failure> {
    Catalog::load().map_err(|e| Failure(format!("cannot load catalog: {e}")))
}

/// Runs the engine (and optionally the oracle and catalog entries) on an
/// integrand text.
pub fn eval_report(
    text: &str,
    params: &Params,
    engine: &EngineOptions,
    oracle: bool,
    compare: &[String],
    catalog: Option<&Catalog>,
) -> Result<EvalReport, String> {
    let start = Instant::now();
    let bindings = params.iter().map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0))).collect();
    let integrand = parse_integrand(text)
        .and_then(|i| i.bind(&bindings))
        .map_err(|e| e.to_string())?;
    let run = run_engine(&integrand, engine).map_err(|e| e.to_string())?;
    let value = run.value();
    let oracle = oracle.then(|| {
        let part = |im: bool| {
            integrate_halfline(
                |x| integrand.eval_at(x).map_or(f64::NAN, |z| if im { z.im } else { z.re }),
                DEFAULT_ORACLE_TOL,
            )
        };
        let res = part(false).and_then(|re| if integrand.is_real() { Ok((re, None)) } else { part(true).map(|im| (re, Some(im))) });
        match res {
            Ok((re, im)) => {
                let v = Complex64::new(re.value, im.as_ref().map_or(0.0, |r| r.value));
                OracleSummary {
                    value: Some(v.into()),
                    est_error: Some(re.est_error.max(im.as_ref().map_or(0.0, |r| r.est_error))),
                    evaluations: Some(re.evaluations + im.as_ref().map_or(0, |r| r.evaluations)),
                    gap: value.map(|e| relative_gap(e, v)),
                    error: None,
                }
            }
            Err(e) => OracleSummary {
                value: None,
                est_error: None,
                evaluations: None,
                gap: None,
                error: Some(e.to_string()),
            },
        }
    });
    let comparisons = compare
        .iter()
        .map(|name| {
            let res = catalog
                .ok_or_else(|| "no catalog loaded".to_string())
                .and_then(|c| c.resolve(name).map_err(|e| e.to_string()))
                .and_then(|(entry, branch)| entry.eval(params, branch).map_err(|e| e.to_string()));
            match res {
                Ok((branch, v)) => Comparison {
                    entry: name.clone(),
                    branch: Some(branch.into()),
                    value: Some(v.into()),
                    gap: value.map(|e| relative_gap(e, v)),
                    error: None,
                },
                Err(e) => Comparison {
                    entry: name.clone(),
                    branch: None,
                    value: None,
                    gap: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    Ok(EvalReport {
        schema: SCHEMA_VERSION,
        kind: "eval",
        integrand: text.into(),
        params: params.clone(),
        series: run.series,
        solutions: run.solutions,
        skipped: run.skipped,
        combined: run.combined,
        error: run.error,
        oracle,
        comparisons,
        wall_time_ms: None,
    }
    .with_time(start, false))
}

impl EvalReport {
    fn with_time(mut self, start: Instant, on: bool) -> Self {
        self.wall_time_ms = on.then(|| start.elapsed().as_secs_f64() * 1e3);
        self
    }
}

fn g(x: f64) -> String {
    fmt_real(x)
}

fn c(z: Cplx) -> String {
    fmt_complex(z.into())
}

pub fn render_eval_text(r: &EvalReport) -> String {
    let mut s = format!("integrand: {}\n", r.integrand);
    if !r.params.is_empty() {
        let p: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", g(*v))).collect();
        s += &format!("params: {}\n", p.join(" "));
    }
    s += &format!("indices: {}\n", r.series.index_count);
    for b in &r.series.brackets {
        s += &format!("bracket: {b}\n");
    }
    for sol in &r.solutions {
        let ratio = sol.classification.ratio_limit().map(|x| format!(" ratio {}", g(x))).unwrap_or_default();
        s += &format!(
            "solution {:<8} {}{}{}",
            sol.label,
            sol.classification.name(),
            ratio,
            if sol.contributing { " [contributing]" } else { "" }
        );
        if let Some(v) = sol.value {
            s += &format!(" value {} terms {}", c(v), sol.terms_used.unwrap_or(0));
        }
        if let Some(e) = &sol.error {
            s += &format!(" error: {e}");
        }
        s += "\n";
        if let Some(sig) = &sol.signature {
            for p in &sig.pieces {
                s += &format!("    {} * {}\n", c(p.leading_term.into()), p.notation());
            }
        }
    }
    for sk in &r.skipped {
        s += &format!("skipped [{}]: {}\n", sk.free_ids.join(","), sk.reason);
    }
    match (&r.combined, &r.error) {
        (Some(cv), _) => {
            s += &format!(
                "combined: {} (est. error {}{}{})\n",
                fmt_complex(cv.value),
                g(cv.est_error),
                if cv.converged { "" } else { ", not converged" },
                if cv.inconclusive { ", inconclusive solutions excluded" } else { "" }
            )
        }
        (None, Some(e)) => s += &format!("combined: none ({e})\n"),
        (None, None) => {}
    }
    if let Some(o) = &r.oracle {
        match (o.value, &o.error) {
            (Some(v), _) => s += &format!("oracle: {} gap {}\n", c(v), o.gap.map_or("-".into(), g)),
            (None, Some(e)) => s += &format!("oracle: {e}\n"),
            _ => {}
        }
    }
    for cmp in &r.comparisons {
        match (cmp.value, &cmp.error) {
            (Some(v), _) => {
                s += &format!(
                    "{}/{}: {} gap {}\n",
                    cmp.entry,
                    cmp.branch.as_deref().unwrap_or("-"),
                    c(v),
                    cmp.gap.map_or("-".into(), g)
                )
            }
            (None, Some(e)) => s += &format!("{}: {e}\n", cmp.entry),
            _ => {}
        }
    }
    if let Some(t) = r.wall_time_ms {
        s += &format!("wall time: {} ms\n", g(t));
    }
    s.trim_end().to_string()
}

pub fn render_check_text(r: &CrossCheckReport) -> String {
    let p: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={}", g(*v))).collect();
    let mut s = format!("{} {} {}\n", r.kind, r.entry, p.join(" "));
    for src in &r.sources {
        s += &format!("  {:<12}", src.name);
        if let Some(b) = &src.branch {
            s += &format!(" [{b}]");
        }
        if let Some(v) = src.value {
            s += &format!(" {}", c(v));
        }
        if let Some(e) = &src.error {
            s += &format!(" error: {e}");
        }
        if let Some(k) = &src.skipped {
            s += &format!(" skipped: {k}");
        }
        s += "\n";
    }
    for gap in &r.gaps {
        s += &format!(
            "  gap {} vs {}: {}{}\n",
            gap.between[0],
            gap.between[1],
            g(gap.gap),
            if gap.counted { "" } else { " (informational)" }
        );
    }
    for n in &r.notes {
        s += &format!("  note: {n}\n");
    }
    if let Some(t) = r.wall_time_ms {
        s += &format!("  wall time: {} ms\n", g(t));
    }
    s += &format!(
        "verdict: {} (max gap {}, tolerance {})",
        r.verdict.name(),
        r.max_gap.map_or("-".into(), g),
        g(r.tolerance)
    );
    s
}

fn check_options(common: &Common, branch: Option<String>) -> CheckOptions {
    CheckOptions {
        engine: EngineOptions {
            max_terms: common.max_terms,
            ..EngineOptions::default()
        },
        tol: common.tol,
        oracle: common.oracle_or(true),
        branch,
        timing: common.timing,
        ..CheckOptions::default()
    }
}

fn run_command(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Eval {
            integrand,
            compare,
            common,
        } => {
            let start = Instant::now();
            let params = parse_params(&common.params)?;
            let catalog = if compare.is_empty() { None } else { Some(load_catalog()?) };
            let engine = EngineOptions {
                tol: common.tol.unwrap_or(DEFAULT_TOL),
                max_terms: common.max_terms,
                ..EngineOptions::default()
            };
            let report = eval_report(&integrand, &params, &engine, common.oracle_or(false), &compare, catalog.as_ref())
                .map_err(Failure)?
                .with_time(start, common.timing);
            let text = match common.format {
                Format::Json => to_json_pretty(&report),
                Format::Text => render_eval_text(&report),
            };
            emit(out, &common.out, &text)?;
            Ok(report.exit_code())
        }
        Command::Catalog { action } => {
            let catalog = load_catalog()?;
            match action {
                CatalogAction::List { format } => {
                    let text = match format {
                        Format::Json => {
                            let specs: Vec<_> = catalog.entries().iter().map(|e| &e.spec).collect();
                            to_json_pretty(&specs)
                        }
                        Format::Text => catalog
                            .entries()
                            .iter()
                            .map(|e| format!("{:<16} {}", e.id(), e.spec.citation))
                            .collect::<Vec<_>>()
                            .join("\n"),
                    };
                    writeln!(out, "{text}")?;
                }
                CatalogAction::Show { id, format } => {
                    let e = catalog.get(&id)?;
                    let text = match format {
                        Format::Json => to_json_pretty(&e.spec),
                        Format::Text => render_entry(&e.spec),
                    };
                    writeln!(out, "{text}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Crosscheck {
            id,
            branch,
            reduction,
            common,
        } => {
            let catalog = load_catalog()?;
            let params = parse_params(&common.params)?;
            let opts = check_options(&common, branch);
            let report = if reduction {
                catalog.reduction_check(&id, &params, &opts)
            } else {
                catalog.crosscheck(&id, &params, &opts)
            };
            let text = match common.format {
                Format::Json => to_json_pretty(&report),
                Format::Text => render_check_text(&report),
            };
            emit(out, &common.out, &text)?;
            Ok(report.verdict.exit_code())
        }
        Command::Sweep {
            id,
            branch,
            reduction,
            common,
        } => {
            let catalog = load_catalog()?;
            let points = parse_grid(&common.params).map_err(Failure)?;
            let opts = check_options(&common, branch);
            let reports: Vec<CrossCheckReport> = points
                .par_iter()
                .map(|p| {
                    if reduction {
                        catalog.reduction_check(&id, p, &opts)
                    } else {
                        catalog.crosscheck(&id, p, &opts)
                    }
                })
                .collect();
            let mut summary = SweepSummary::default();
            let mut lines = String::new();
            for r in &reports {
                summary.add(r.verdict);
                lines += &match common.format {
                    Format::Json => to_json_line(r),
                    Format::Text => render_check_text(r),
                };
                lines.push('\n');
            }
            let line = format!(
                "{} points: {} pass, {} fail, {} indeterminate, {} error",
                summary.points, summary.pass, summary.fail, summary.indeterminate, summary.error
            );
            match &common.out {
                Some(p) => {
                    std::fs::write(p, lines).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
                    writeln!(out, "{line}")?;
                }
                None => {
                    write!(out, "{lines}")?;
                    writeln!(err, "{line}")?;
                }
            }
            Ok(summary.exit_code())
        }
    }
}

fn render_entry(e: &crate::catalog::EntrySpec) -> String {
    let mut s = format!("{}: {}\n", e.id, e.title);
    if !e.aliases.is_empty() {
        s += &format!("aliases: {}\n", e.aliases.join(", "));
    }
    s += &format!("citation: {}\n", e.citation);
    s += &format!("template: {}\n", e.template);
    s += &format!("parameters: {}\n", e.parameters.join(", "));
    s += &format!("domain: {}\n", e.domain);
    for b in &e.branches {
        s += &format!("branch {}: region {}; valid for {}\n", b.id, b.region, b.validity);
    }
    s += &format!(
        "oracle: {}\n",
        if e.oracle.applicable {
            "applicable".to_string()
        } else {
            format!("skipped ({})", e.oracle.note.as_deref().unwrap_or("not applicable"))
        }
    );
    s += &format!("tolerance: {}\n", e.tolerance);
    if let Some(r) = &e.reference_form {
        s += &format!("reference form: {r}\n");
    }
    if let Some(r) = &e.reduces_to {
        s += &format!("reduces to: {} at {:?}\n", r.entry, r.at);
    }
    for n in &e.notes {
        s += &format!("note: {n}\n");
    }
    s.trim_end().to_string()
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match run_command(cli, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mob").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn axes() {
        assert_eq!(parse_axis("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("2").unwrap(), vec![2.0]);
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("0:1").is_err());
        assert!(parse_axis("a,b").is_err());
    }

    #[test]
    fn grid_order() {
        let g = parse_grid(&["n=1,2".into(), "b=0.5,3".into(), "a=1".into()]).unwrap();
        let pts: Vec<(f64, f64)> = g.iter().map(|p| (p["n"], p["b"])).collect();
        assert_eq!(pts, vec![(1.0, 0.5), (1.0, 3.0), (2.0, 0.5), (2.0, 3.0)]);
        assert!(parse_grid(&["n=1".into(), "n=2".into()]).is_err());
    }

    #[test]
    fn eval_examples() {
        let (code, out, _) = run_args(&[
            "eval",
            "--integrand",
            "(a*x^2+2*b*x+c)^(-n)",
            "--param",
            "a=1",
            "--param",
            "b=0.5",
            "--param",
            "c=1",
            "--param",
            "n=1",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], 1);
        assert!((v["combined"]["value"]["re"].as_f64().unwrap() - 1.20919957616).abs() < 1e-9);

        let (code, out, _) = run_args(&["eval", "--integrand", "x^-0.5 * exp(-x)", "--format", "text"]);
        assert_eq!(code, 0);
        assert!(out.contains("combined: 1.77245385091"), "{out}");
    }

    #[test]
    fn eval_with_oracle_and_compare() {
        let (code, out, _) = run_args(&[
            "eval",
            "--integrand",
            "exp(-x^p)",
            "-p",
            "p=2",
            "--oracle",
            "--compare",
            "gaussian",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["oracle"]["gap"].as_f64().unwrap() < 1e-10);
        assert!(v["comparisons"][0]["gap"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn usage_errors() {
        let (code, _, err) = run_args(&["eval", "--integrand", "(x+"]);
        assert_eq!(code, 1);
        assert!(err.contains("syntax error"));
        let (code, _, err) = run_args(&["eval", "--integrand", "exp(-a*x)"]);
        assert_eq!(code, 1);
        assert!(err.contains("unbound"));
        let (code, _, _) = run_args(&["frobnicate"]);
        assert_eq!(code, 1);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("crosscheck"));
    }

    #[test]
    fn catalog_commands() {
        let (code, out, _) = run_args(&["catalog", "list"]);
        assert_eq!(code, 0);
        for id in [
            "gaussian",
            "feynman-hibbs",
            "3.252-1",
            "3.252-3",
            "3.252-4",
            "quad-general",
            "quartic",
            "quartic-general",
        ] {
            assert!(out.contains(id), "{id}");
        }
        let (code, out, _) = run_args(&["catalog", "show", "3.252-3"]);
        assert_eq!(code, 0);
        assert!(out.contains("n+3/2 exponent"));
        let (code, _, err) = run_args(&["catalog", "show", "bogus"]);
        assert_eq!(code, 1);
        assert!(err.contains("unknown catalog entry"));
    }

    #[test]
    fn crosscheck_exit_codes() {
        let (code, out, _) =
            run_args(&["crosscheck", "quartic", "-p", "a=1", "-p", "b=0.5", "-p", "c=1", "-p", "m=1"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, _) =
            run_args(&["crosscheck", "3.252-1", "-p", "a=1", "-p", "b=1", "-p", "c=1", "-p", "n=1.5"]);
        assert_eq!(code, 2);
        let (code, out, _) = run_args(&["crosscheck", "feynman-hibbs", "-p", "a=1", "-p", "b=1", "--format", "text"]);
        assert_eq!(code, 0);
        assert!(out.contains("verdict: pass"));
    }
}
