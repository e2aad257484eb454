//! The full method-of-brackets pipeline on a bound integrand.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::brackets::{build_bracket_series, enumerate_solutions, BracketError, SkippedCandidate};
use crate::integrand::Integrand;
use crate::report::Cplx;
use crate::series::{
    combine, evaluate_solution, hypergeometric_signature, Classification, CombinedValue, HypergeometricSignature,
    SeriesError, DEFAULT_MAX_TERMS, DEFAULT_PROBE_DEPTH, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub tol: f64,
    pub max_terms: usize,
    pub probe_depth: usize,
    pub signatures: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
            probe_depth: DEFAULT_PROBE_DEPTH,
            signatures: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSummary {
    pub id: String,
    pub base: Cplx,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub index_count: usize,
    pub indices: Vec<IndexSummary>,
    pub gamma_normalizers: Vec<f64>,
    pub brackets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub label: String,
    pub free_ids: Vec<String>,
    pub solved: BTreeMap<String, String>,
    pub det_factor: String,
    pub classification: Classification,
    pub contributing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub est_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<SeriesError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<HypergeometricSignature>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineRun {
    pub series: SeriesSummary,
    pub solutions: Vec<SolutionRecord>,
    pub skipped: Vec<SkippedCandidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<SeriesError>,
}

impl EngineRun {
    pub fn value(&self) -> Option<num_complex::Complex64> {
        self.combined.as_ref().map(|c| c.value)
    }
}

/// Builds, solves, classifies, sums and combines.
pub fn run_engine(integrand: &Integrand, opts: &EngineOptions) -> Result<EngineRun, BracketError> {
    let series = build_bracket_series(integrand)?;
    let enumeration = enumerate_solutions(&series)?;
    let summary = SeriesSummary {
        index_count: series.indices.len(),
        indices: series
            .indices
            .iter()
            .map(|i| IndexSummary {
                id: i.id.to_string(),
                base: i.base.into(),
                origin: i.origin.clone(),
            })
            .collect(),
        gamma_normalizers: series.gamma_normalizers.clone(),
        brackets: series.brackets.iter().map(|b| b.to_string()).collect(),
    };
    let outcomes: Vec<_> = enumeration
        .solutions
        .iter()
        .map(|s| evaluate_solution(s, opts.tol, opts.max_terms, opts.probe_depth))
        .collect();
    let (combined, error) = match combine(&outcomes) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e)),
    };
    let contributing: Vec<String> = combined.as_ref().map(|c| c.contributing.clone()).unwrap_or_default();
    let solutions = enumeration
        .solutions
        .iter()
        .zip(outcomes)
        .map(|(sol, o)| {
            let mut rec = SolutionRecord {
                label: o.label.clone(),
                free_ids: sol.free_ids.iter().map(|i| i.to_string()).collect(),
                solved: sol.solved_maps.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
                det_factor: sol.det_factor.to_string(),
                contributing: contributing.contains(&o.label),
                classification: o.classification,
                value: None,
                terms_used: None,
                est_error: None,
                converged: None,
                error: None,
                signature: if opts.signatures { hypergeometric_signature(sol) } else { None },
            };
            match o.evaluation {
                Some(Ok(v)) | Some(Err(SeriesError::MaxTermsExceeded { partial: v })) => {
                    rec.value = Some(v.value.into());
                    rec.terms_used = Some(v.terms_used);
                    rec.est_error = Some(v.est_error);
                    rec.converged = Some(v.converged);
                }
                Some(Err(e)) => rec.error = Some(e),
                None => {}
            }
            rec
        })
        .collect();
    Ok(EngineRun {
        series: summary,
        solutions,
        skipped: enumeration.skipped,
        combined,
        error,
    })
}
