//! Named integrals with region-guarded closed forms, loaded from a JSON
//! manifest, and the three-way cross-checks built on them.

mod check;
mod forms;
mod reference;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrand::{parse_integrand, Integrand, IntegrandError};

pub use check::{CheckOptions, CrossCheckReport, Gap, Source, Verdict};
pub use forms::EQUAL_CASE_TOL;

pub type Params = BTreeMap<String, f64>;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const CATALOG_ENV: &str = "MOB_CATALOG";

const BUILTIN_MANIFEST: &str = include_str!("../../catalog/manifest.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry '{0}'")]
    UnknownId(String),
    #[error("entry {id} has no branch '{branch}'")]
    UnknownBranch { id: String, branch: String },
    #[error("missing parameter '{0}'")]
    MissingParameter(String),
    #[error("entry {id} takes no parameter '{name}'")]
    UnknownParameter { id: String, name: String },
    #[error("{id}: parameters violate the domain condition {condition}")]
    Domain { id: String, condition: String },
    #[error("{id}: no branch region holds ({detail})")]
    Region { id: String, detail: String },
    #[error("{id}/{branch}: closed form not valid here ({detail})")]
    Validity { id: String, branch: String, detail: String },
    #[error("{id}: reference form supports {supported}, got n = {n}")]
    UnsupportedOrder { id: String, n: f64, supported: String },
    #[error("entry {0} has no reference form")]
    NoReferenceForm(String),
    #[error("entry {0} declares no reduction")]
    NoReduction(String),
    #[error("unsupported manifest schema {found}, expected {MANIFEST_SCHEMA}")]
    UnsupportedSchema { found: u32 },
    #[error("manifest entry '{0}' has no built-in evaluator")]
    UnknownEvaluator(String),
    #[error("manifest entry '{id}': {detail}")]
    Template { id: String, detail: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub id: String,
    pub region: String,
    pub validity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Parameter map sending a general entry onto a special one: fix `at`,
/// then rename the remaining parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSpec {
    pub entry: String,
    pub at: BTreeMap<String, f64>,
    #[serde(default)]
    pub rename: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub id: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub title: String,
    pub citation: String,
    pub template: String,
    pub parameters: Vec<String>,
    pub domain: String,
    pub branches: Vec<BranchSpec>,
    pub oracle: OracleSpec,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduces_to: Option<ReductionSpec>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    schema: u32,
    entries: Vec<EntrySpec>,
}

pub struct CatalogEntry {
    pub spec: EntrySpec,
    pub template: Integrand,
    evaluator: &'static forms::Evaluator,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry").field("id", &self.spec.id).finish()
    }
}

impl CatalogEntry {
    pub fn id(&self) -> &str {
        &self.spec.id
    }

    fn check_params(&self, params: &Params) -> Result<(), CatalogError> {
        if let Some(name) = params.keys().find(|k| !self.spec.parameters.contains(k)) {
            return Err(CatalogError::UnknownParameter {
                id: self.spec.id.clone(),
                name: name.clone(),
            });
        }
        if let Some(name) = self.spec.parameters.iter().find(|p| !params.contains_key(*p)) {
            return Err(CatalogError::MissingParameter(name.clone()));
        }
        Ok(())
    }

    /// The template with every parameter substituted.
    pub fn bind(&self, params: &Params) -> Result<Integrand, CatalogError> {
        self.check_params(params)?;
        let bindings = params.iter().map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0))).collect();
        Ok(self.template.bind(&bindings)?)
    }

    /// Branch whose region guard holds at `params`.
    pub fn active_branch(&self, params: &Params) -> Result<&'static str, CatalogError> {
        self.check_params(params)?;
        self.evaluator.select_branch(params)
    }

    /// Closed form on `branch`, or on the active branch when `None`.
    pub fn eval(&self, params: &Params, branch: Option<&str>) -> Result<(&'static str, Complex64), CatalogError> {
        self.check_params(params)?;
        self.evaluator.eval(params, branch)
    }

    pub fn has_reference_form(&self) -> bool {
        reference::has_reference_form(&self.spec.id)
    }

    /// The table's derivative form, for small integer orders.
    pub fn eval_reference(&self, params: &Params) -> Result<Complex64, CatalogError> {
        self.check_params(params)?;
        reference::eval(&self.spec.id, params)
    }
}

#[derive(Debug)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// The manifest compiled into the library.
    pub fn builtin() -> Self {
        Catalog::from_json(BUILTIN_MANIFEST).expect("built-in manifest is valid")
    }

    /// The manifest named by `MOB_CATALOG`, or the built-in one.
    pub fn load() -> Result<Self, CatalogError> {
        match std::env::var_os(CATALOG_ENV) {
            Some(path) => Catalog::from_path(Path::new(&path)),
            None => Ok(Catalog::builtin()),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CatalogError::Manifest(format!("cannot read {}: {e}", path.display())))?;
        Catalog::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let schema: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CatalogError::Manifest(e.to_string()))?;
        match schema.get("schema").and_then(|s| s.as_u64()) {
            Some(s) if s == MANIFEST_SCHEMA as u64 => {}
            Some(s) => return Err(CatalogError::UnsupportedSchema { found: s as u32 }),
            None => return Err(CatalogError::Manifest("missing integer field 'schema'".into())),
        }
        let manifest: Manifest = serde_json::from_value(schema).map_err(|e| CatalogError::Manifest(e.to_string()))?;
        debug_assert_eq!(manifest.schema, MANIFEST_SCHEMA);
        let mut names = BTreeSet::new();
        let mut entries = Vec::new();
        for spec in manifest.entries {
            for name in std::iter::once(&spec.id).chain(&spec.aliases) {
                if !names.insert(name.clone()) {
                    return Err(CatalogError::Manifest(format!("name '{name}' is declared twice")));
                }
            }
            entries.push(Self::entry(spec)?);
        }
        let catalog = Catalog { entries };
        for e in &catalog.entries {
            if let Some(r) = &e.spec.reduces_to {
                catalog.get(&r.entry).map_err(|_| CatalogError::Template {
                    id: e.spec.id.clone(),
                    detail: format!("reduces to unknown entry '{}'", r.entry),
                })?;
            }
        }
        Ok(catalog)
    }

    fn entry(spec: EntrySpec) -> Result<CatalogEntry, CatalogError> {
        let template_err = |detail: String| CatalogError::Template {
            id: spec.id.clone(),
            detail,
        };
        let evaluator = forms::evaluator(&spec.id).ok_or_else(|| CatalogError::UnknownEvaluator(spec.id.clone()))?;
        let template = parse_integrand(&spec.template).map_err(|e| template_err(e.to_string()))?;
        let declared: BTreeSet<&str> = spec.parameters.iter().map(String::as_str).collect();
        let free = template.free_parameters();
        let used: BTreeSet<&str> = free.iter().map(String::as_str).collect();
        let wanted: BTreeSet<&str> = evaluator.parameters.iter().copied().collect();
        if declared != used || declared != wanted {
            return Err(template_err(format!(
                "parameters {declared:?} do not match template {used:?} and evaluator {wanted:?}"
            )));
        }
        let branches: Vec<&str> = spec.branches.iter().map(|b| b.id.as_str()).collect();
        if branches != evaluator.branch_ids() {
            return Err(template_err(format!(
                "branches {branches:?} differ from evaluator branches {:?}",
                evaluator.branch_ids()
            )));
        }
        if !(spec.tolerance > 0.0) {
            return Err(template_err("tolerance must be positive".into()));
        }
        Ok(CatalogEntry {
            spec,
            template,
            evaluator,
        })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    /// Looks up an id or alias.
    pub fn get(&self, name: &str) -> Result<&CatalogEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.spec.id == name || e.spec.aliases.iter().any(|a| a == name))
            .ok_or_else(|| CatalogError::UnknownId(name.into()))
    }

    /// Resolves `id` or `id/branch`.
    pub fn resolve<'a>(&self, name: &'a str) -> Result<(&CatalogEntry, Option<&'a str>), CatalogError> {
        let (id, branch) = match name.split_once('/') {
            Some((id, b)) => (id, Some(b)),
            None => (name, None),
        };
        let entry = self.get(id)?;
        if let Some(b) = branch {
            if !entry.spec.branches.iter().any(|x| x.id == b) {
                return Err(CatalogError::UnknownBranch {
                    id: entry.spec.id.clone(),
                    branch: b.into(),
                });
            }
        }
        Ok((entry, branch))
    }

    /// Closed form of `name` (`id` or `id/branch`) at `params`.
    pub fn eval_entry(&self, name: &str, params: &Params) -> Result<Complex64, CatalogError> {
        let (entry, branch) = self.resolve(name)?;
        entry.eval(params, branch).map(|(_, v)| v)
    }

    pub fn eval_reference_form(&self, name: &str, params: &Params) -> Result<Complex64, CatalogError> {
        self.get(name)?.eval_reference(params)
    }

    /// Engine, closed form, oracle and (where defined) reference form at one
    /// parameter point.
    pub fn crosscheck(&self, name: &str, params: &Params, opts: &CheckOptions) -> CrossCheckReport {
        check::crosscheck(self, name, params, opts)
    }

    /// Closed form of a general entry against the special entry it reduces to.
    pub fn reduction_check(&self, name: &str, params: &Params, opts: &CheckOptions) -> CrossCheckReport {
        check::reduction_check(self, name, params, opts)
    }
}

/// Parses `name=value`.
pub fn parse_param(text: &str) -> Result<(String, f64), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{text}'"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty parameter name in '{text}'"));
    }
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("parameter {k}: '{}' is not a number", v.trim()))?;
    Ok((k.to_string(), v))
}
