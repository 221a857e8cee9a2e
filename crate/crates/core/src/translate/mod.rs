//! Semantics-preserving translations between rule dialects.

mod ded;
mod script;
mod suite;
mod tgd;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::syntax::{Dependency, RuleSet, SyntaxError};

pub use ded::ded_to_dtgd;
pub use script::{
    guided_chase_verify, replay_with_chase, FiringScript, ScriptBuilder, ScriptError,
    ScriptOutcome, ScriptStep, StepFailure,
};
pub use suite::{
    enumerate_databases, enumerate_queries, translation_equivalence_suite, ChaseDecider, Decider,
    DedOracleDecider, Disagreement, SuiteBounds, SuiteReport,
};
pub use tgd::{dtgd_to_tgd, TgdSymbols};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// What a generated relation symbol is for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolInfo {
    pub role: String,
    pub group: String,
}

/// Where a generated rule came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub group: String,
    /// Index of the source rule it simulates, if any.
    pub source: Option<usize>,
}

/// A translated program with its fresh-symbol manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationOutput {
    pub rules: RuleSet,
    pub manifest: BTreeMap<String, SymbolInfo>,
    pub provenance: Vec<Provenance>,
}

impl TranslationOutput {
    /// Number of generated rules per group.
    pub fn group_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for p in &self.provenance {
            *out.entry(p.group.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Indices of the rules of one group.
    pub fn group(&self, name: &str) -> Vec<usize> {
        self.provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| p.group == name)
            .map(|(i, _)| i)
            .collect()
    }

    /// The rules of the given groups as a stand-alone set, in output order.
    pub fn subset(&self, groups: &[&str]) -> RuleSet {
        RuleSet {
            rules: self
                .provenance
                .iter()
                .zip(&self.rules.rules)
                .filter(|(p, _)| groups.contains(&p.group.as_str()))
                .map(|(_, r)| r.clone())
                .collect(),
            data: self.rules.data.clone(),
            query: self.rules.query.clone(),
        }
    }

    pub fn manifest_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": crate::FORMAT_TAG,
            "symbols": self.manifest,
            "rules": self.provenance,
            "groups": self.group_counts(),
        })
    }
}

/// Collects generated rules and symbols.
pub(crate) struct Emitter {
    used: BTreeSet<String>,
    rules: Vec<Dependency>,
    provenance: Vec<Provenance>,
    manifest: BTreeMap<String, SymbolInfo>,
}

impl Emitter {
    pub(crate) fn new(used: BTreeSet<String>) -> Self {
        Emitter {
            used,
            rules: Vec::new(),
            provenance: Vec::new(),
            manifest: BTreeMap::new(),
        }
    }

    /// A symbol not clashing with the source schema or earlier fresh symbols.
    pub(crate) fn fresh(&mut self, base: &str, role: &str, group: &str) -> String {
        let mut name = base.to_string();
        let mut n = 2;
        while self.used.contains(&name) {
            name = format!("{base}{n}");
            n += 1;
        }
        self.used.insert(name.clone());
        self.manifest.insert(
            name.clone(),
            SymbolInfo {
                role: role.to_string(),
                group: group.to_string(),
            },
        );
        name
    }

    pub(crate) fn emit(&mut self, group: &str, source: Option<usize>, rule: Dependency) {
        self.provenance.push(Provenance {
            group: group.to_string(),
            source,
        });
        self.rules.push(rule);
    }

    pub(crate) fn finish(self, src: &RuleSet) -> Result<TranslationOutput, TranslateError> {
        let rules = RuleSet::new(self.rules, src.data.clone(), src.query.clone())?;
        Ok(TranslationOutput {
            rules,
            manifest: self.manifest,
            provenance: self.provenance,
        })
    }
}
