//! Three-way cross-checks: engine, closed form and quadrature oracle.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::{Catalog, CatalogEntry, CatalogError, Params};
use crate::engine::{run_engine, EngineOptions};
use crate::oracle::{integrate_halfline, OracleError, DEFAULT_ORACLE_TOL};
use crate::report::{relative_gap, Cplx, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub engine: EngineOptions,
    /// Overrides the entry's tolerance.
    pub tol: Option<f64>,
    pub oracle: bool,
    pub oracle_tol: f64,
    /// Forces a closed-form branch instead of the active one.
    pub branch: Option<String>,
    pub timing: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            engine: EngineOptions::default(),
            tol: None,
            oracle: true,
            oracle_tol: DEFAULT_ORACLE_TOL,
            branch: None,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail | Verdict::Error => 1,
            Verdict::Indeterminate => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Error => "error",
        }
    }
}

/// One way of obtaining the integral's value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Source {
    pub name: String,
    /// Whether this source takes part in the verdict.
    pub counted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub est_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub contributing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl Source {
    fn new(name: &str, counted: bool) -> Self {
        Source {
            name: name.into(),
            counted,
            value: None,
            branch: None,
            est_error: None,
            converged: None,
            contributing: Vec::new(),
            error: None,
            skipped: None,
        }
    }

    fn complex(&self) -> Option<Complex64> {
        self.value.map(Complex64::from)
    }

    fn missing(&self) -> bool {
        self.counted && self.value.is_none() && self.skipped.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    pub between: [String; 2],
    pub gap: f64,
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub schema: u32,
    pub kind: &'static str,
    pub entry: String,
    pub params: Params,
    pub sources: Vec<Source>,
    pub gaps: Vec<Gap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl CrossCheckReport {
    pub fn source(&self, name: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.name == name)
    }

    pub fn value(&self, name: &str) -> Option<Complex64> {
        self.source(name).and_then(Source::complex)
    }

    fn errored(kind: &'static str, entry: &str, params: &Params, tol: f64, err: &CatalogError) -> Self {
        CrossCheckReport {
            schema: SCHEMA_VERSION,
            kind,
            entry: entry.into(),
            params: params.clone(),
            sources: Vec::new(),
            gaps: Vec::new(),
            max_gap: None,
            tolerance: tol,
            verdict: Verdict::Error,
            notes: vec![err.to_string()],
            wall_time_ms: None,
        }
    }

    /// Pairwise gaps, maximum over counted pairs, and the verdict.
    fn finish(&mut self) {
        for (i, a) in self.sources.iter().enumerate() {
            for b in &self.sources[i + 1..] {
                if let (Some(u), Some(v)) = (a.complex(), b.complex()) {
                    self.gaps.push(Gap {
                        between: [a.name.clone(), b.name.clone()],
                        gap: relative_gap(u, v),
                        counted: a.counted && b.counted,
                    });
                }
            }
        }
        self.max_gap = self
            .gaps
            .iter()
            .filter(|g| g.counted)
            .map(|g| g.gap)
            .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
        let any_counted_gap = self.gaps.iter().any(|g| g.counted);
        self.verdict = match self.max_gap {
            Some(g) if !(g < self.tolerance) => Verdict::Fail,
            _ if self.sources.iter().any(Source::missing) || !any_counted_gap => Verdict::Indeterminate,
            _ => Verdict::Pass,
        };
    }
}

fn elapsed_ms(start: Instant, on: bool) -> Option<f64> {
    on.then(|| start.elapsed().as_secs_f64() * 1e3)
}

fn closed_form_source(entry: &CatalogEntry, params: &Params, branch: Option<&str>, name: &str) -> Source {
    let mut s = Source::new(name, true);
    match entry.eval(params, branch) {
        Ok((b, v)) => {
            s.branch = Some(b.into());
            s.value = Some(v.into());
        }
        Err(e) => {
            s.branch = branch.map(str::to_string).or_else(|| entry.active_branch(params).ok().map(Into::into));
            s.error = Some(e.to_string());
        }
    }
    s
}

fn oracle_source(entry: &CatalogEntry, integrand: &crate::integrand::Integrand, opts: &CheckOptions) -> Source {
    let mut s = Source::new("oracle", true);
    if !entry.spec.oracle.applicable {
        s.skipped = Some(
            entry
                .spec
                .oracle
                .note
                .clone()
                .unwrap_or_else(|| "oracle not applicable to this entry".into()),
        );
        return s;
    }
    if !opts.oracle {
        s.skipped = Some("disabled by option".into());
        return s;
    }
    let part = |im: bool| {
        integrate_halfline(
            |x| match integrand.eval_at(x) {
                Ok(z) if im => z.im,
                Ok(z) => z.re,
                Err(_) => f64::NAN,
            },
            opts.oracle_tol,
        )
    };
    let result = part(false).and_then(|re| {
        if integrand.is_real() {
            Ok((re, None))
        } else {
            part(true).map(|im| (re, Some(im)))
        }
    });
    match result {
        Ok((re, im)) => {
            s.value = Some(Cplx {
                re: re.value,
                im: im.as_ref().map_or(0.0, |r| r.value),
            });
            s.est_error = Some(re.est_error.max(im.as_ref().map_or(0.0, |r| r.est_error)));
            s.converged = Some(true);
        }
        Err(e) => {
            if let OracleError::NotConverged { result } = &e {
                s.est_error = Some(result.est_error);
                s.converged = Some(false);
            }
            s.error = Some(e.to_string());
        }
    }
    s
}

pub(super) fn crosscheck(catalog: &Catalog, name: &str, params: &Params, opts: &CheckOptions) -> CrossCheckReport {
    let start = Instant::now();
    let tol_of = |e: &CatalogEntry| opts.tol.unwrap_or(e.spec.tolerance);
    let (entry, branch) = match catalog.resolve(name) {
        Ok(r) => r,
        Err(e) => return CrossCheckReport::errored("crosscheck", name, params, opts.tol.unwrap_or(0.0), &e),
    };
    let branch = branch.or(opts.branch.as_deref());
    let integrand = match entry.bind(params) {
        Ok(i) => i,
        Err(e) => return CrossCheckReport::errored("crosscheck", entry.id(), params, tol_of(entry), &e),
    };
    let mut notes = entry.spec.notes.clone();

    let mut engine = Source::new("engine", true);
    match run_engine(&integrand, &opts.engine) {
        Ok(run) => {
            if let Some(c) = &run.combined {
                engine.value = Some(c.value.into());
                engine.est_error = Some(c.est_error);
                engine.converged = Some(c.converged);
                engine.contributing = c.contributing.clone();
                if c.inconclusive {
                    notes.push("engine: a solution could not be classified".into());
                }
                if !c.converged {
                    notes.push("engine: series budget exhausted before convergence".into());
                }
            }
            if let Some(e) = run.error {
                engine.error = Some(e.to_string());
            }
        }
        Err(e) => engine.error = Some(e.to_string()),
    }

    let closed = closed_form_source(entry, params, branch, "closed_form");
    let oracle = oracle_source(entry, &integrand, opts);
    let mut sources = vec![engine, closed, oracle];

    if entry.has_reference_form() {
        let mut r = Source::new("reference", false);
        match entry.eval_reference(params) {
            Ok(v) => r.value = Some(v.into()),
            Err(e @ CatalogError::UnsupportedOrder { .. }) => r.skipped = Some(e.to_string()),
            Err(e) => r.error = Some(e.to_string()),
        }
        sources.push(r);
    }

    let mut report = CrossCheckReport {
        schema: SCHEMA_VERSION,
        kind: "crosscheck",
        entry: entry.id().into(),
        params: params.clone(),
        sources,
        gaps: Vec::new(),
        max_gap: None,
        tolerance: tol_of(entry),
        verdict: Verdict::Indeterminate,
        notes,
        wall_time_ms: None,
    };
    report.finish();
    if let Some(r) = report.value("reference") {
        let truth = report.value("oracle").or(report.value("closed_form"));
        if let Some(t) = truth {
            if relative_gap(r, t) >= report.tolerance && t.norm() > 0.0 {
                report.notes.push(format!(
                    "reference form differs by a constant factor {} from the {} value",
                    crate::report::round_sig((r / t).re),
                    if report.value("oracle").is_some() { "oracle" } else { "closed-form" }
                ));
            }
        }
    }
    report.wall_time_ms = elapsed_ms(start, opts.timing);
    report
}

pub(super) fn reduction_check(catalog: &Catalog, name: &str, params: &Params, opts: &CheckOptions) -> CrossCheckReport {
    let start = Instant::now();
    let general = match catalog.get(name) {
        Ok(e) => e,
        Err(e) => return CrossCheckReport::errored("reduction", name, params, opts.tol.unwrap_or(0.0), &e),
    };
    let tol = opts.tol.unwrap_or(general.spec.tolerance);
    let Some(spec) = &general.spec.reduces_to else {
        return CrossCheckReport::errored("reduction", general.id(), params, tol, &CatalogError::NoReduction(name.into()));
    };
    let special = catalog.get(&spec.entry).expect("validated at load");
    let mut full = params.clone();
    full.extend(spec.at.iter().map(|(k, v)| (k.clone(), *v)));
    let reduced: Params = params
        .iter()
        .filter(|(k, _)| !spec.at.contains_key(*k))
        .map(|(k, v)| (spec.rename.get(k).cloned().unwrap_or_else(|| k.clone()), *v))
        .collect();
    let branch = opts.branch.as_deref();
    let mut report = CrossCheckReport {
        schema: SCHEMA_VERSION,
        kind: "reduction",
        entry: general.id().into(),
        params: full.clone(),
        sources: vec![
            closed_form_source(general, &full, branch, general.id()),
            closed_form_source(special, &reduced, branch, special.id()),
        ],
        gaps: Vec::new(),
        max_gap: None,
        tolerance: tol,
        verdict: Verdict::Indeterminate,
        notes: vec![format!(
            "{} at {:?} against {} at {:?}",
            general.id(),
            full,
            special.id(),
            reduced
        )],
        wall_time_ms: None,
    };
    report.finish();
    report.wall_time_ms = elapsed_ms(start, opts.timing);
    report
}
