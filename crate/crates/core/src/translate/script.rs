//! Firing scripts: explicit derivations inside a TGD program whose chase is
//! too large to run breadth-first.
//!
//! A script is a JSON array of steps `{"rule": id, "bind": {var: term}}`
//! followed by `{"target": atom}`. A bound term is a constant, a named null
//! `_x`, or `@i.V` for the null that step `i` invented for existential `V`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chase::{extend_with_nulls, fire_tgd, ChaseError};
use crate::model::{hom_search_from, Atom, Instance, Mapping, Term};
use crate::syntax::{parse_database, RuleSet, SyntaxError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("malformed script: {0}")]
    Format(String),
    #[error("step {step}: no rule {rule}")]
    UnknownRule { step: usize, rule: String },
    #[error("step {step}: rule {rule} has no universal variable {var}")]
    UnknownVar {
        step: usize,
        rule: String,
        var: String,
    },
    #[error("step {step}: bad term {term}")]
    BadTerm { step: usize, term: String },
    #[error("rule {0} is not a TGD")]
    NotTgd(usize),
    #[error("rule {rule}: no match for the given bindings")]
    NoMatch { rule: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub rule: String,
    pub bind: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiringScript {
    pub steps: Vec<ScriptStep>,
    pub target: Option<Atom>,
}

impl FiringScript {
    pub fn to_json(&self) -> Value {
        let mut out: Vec<Value> = self
            .steps
            .iter()
            .map(|s| serde_json::to_value(s).expect("plain strings"))
            .collect();
        if let Some(t) = &self.target {
            out.push(serde_json::json!({ "target": t.to_string() }));
        }
        Value::Array(out)
    }

    pub fn from_json(text: &str) -> Result<Self, ScriptError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| ScriptError::Format(e.to_string()))?;
        let Value::Array(items) = v else {
            return Err(ScriptError::Format("expected an array".into()));
        };
        let mut script = FiringScript::default();
        for item in items {
            if let Some(t) = item.get("target") {
                let t = t
                    .as_str()
                    .ok_or_else(|| ScriptError::Format("target must be a string".into()))?;
                let inst = parse_database(&format!("{}.", t.trim().trim_end_matches('.')))?;
                let mut atoms = inst.iter();
                match (atoms.next(), atoms.next()) {
                    (Some(a), None) => script.target = Some(a.clone()),
                    _ => return Err(ScriptError::Format(format!("target {t} is not one atom"))),
                }
            } else {
                let step: ScriptStep =
                    serde_json::from_value(item).map_err(|e| ScriptError::Format(e.to_string()))?;
                script.steps.push(step);
            }
        }
        Ok(script)
    }
}

/// Why a script was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepFailure {
    Unbound {
        step: usize,
        rule: String,
        var: String,
    },
    Unmatched {
        step: usize,
        rule: String,
        atom: String,
    },
    TargetMissing {
        target: String,
    },
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::Unbound { step, rule, var } => {
                write!(f, "step {step} ({rule}): variable {var} is unbound")
            }
            StepFailure::Unmatched { step, rule, atom } => {
                write!(f, "step {step} ({rule}): body atom {atom} is not derived")
            }
            StepFailure::TargetMissing { target } => write!(f, "target {target} was not derived"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptOutcome {
    pub accepted: bool,
    pub failure: Option<StepFailure>,
    pub derived: Instance,
    pub steps_applied: usize,
}

impl ScriptOutcome {
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "format": crate::FORMAT_TAG,
            "accepted": self.accepted,
            "steps_applied": self.steps_applied,
            "failure": self.failure,
            "failure_text": self.failure.as_ref().map(ToString::to_string),
            "derived": self.derived.len(),
        })
    }
}

fn require_tgds(rules: &RuleSet) -> Result<(), ScriptError> {
    for (i, r) in rules.rules.iter().enumerate() {
        if r.head.len() != 1 || r.has_equality() {
            return Err(ScriptError::NotTgd(i));
        }
    }
    Ok(())
}

fn resolve(
    step: usize,
    token: &str,
    nulls: &[BTreeMap<String, Term>],
) -> Result<Term, ScriptError> {
    let bad = || ScriptError::BadTerm {
        step,
        term: token.to_string(),
    };
    if let Some(rest) = token.strip_prefix('@') {
        let (i, v) = rest.split_once('.').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        return nulls.get(i).and_then(|m| m.get(v)).cloned().ok_or_else(bad);
    }
    let t = Term::from_token(token);
    if token.is_empty() || t.is_var() {
        return Err(bad());
    }
    Ok(t)
}

/// The rule index and the binding of one step. Unbound universal variables
/// are reported as a failure rather than an error.
fn prepare(
    i: usize,
    step: &ScriptStep,
    rules: &RuleSet,
    nulls: &[BTreeMap<String, Term>],
) -> Result<Result<(usize, Mapping), StepFailure>, ScriptError> {
    let idx = rules
        .find(&step.rule)
        .ok_or_else(|| ScriptError::UnknownRule {
            step: i,
            rule: step.rule.clone(),
        })?;
    let rule = &rules.rules[idx];
    let universal = rule.universal();
    let mut h = Mapping::new();
    for (v, tok) in &step.bind {
        let var = Term::var(v);
        if !universal.contains(&var) {
            return Err(ScriptError::UnknownVar {
                step: i,
                rule: step.rule.clone(),
                var: v.clone(),
            });
        }
        h.insert(var, resolve(i, tok, nulls)?);
    }
    if let Some(v) = universal.iter().find(|v| !h.contains_key(v)) {
        return Ok(Err(StepFailure::Unbound {
            step: i,
            rule: step.rule.clone(),
            var: v.name(),
        }));
    }
    Ok(Ok((idx, h)))
}

fn finish(
    facts: Instance,
    failure: Option<StepFailure>,
    steps_applied: usize,
    target: &Option<Atom>,
) -> ScriptOutcome {
    let failure = failure.or_else(|| {
        target
            .as_ref()
            .filter(|t| !facts.contains(t))
            .map(|t| StepFailure::TargetMissing {
                target: t.to_string(),
            })
    });
    ScriptOutcome {
        accepted: failure.is_none(),
        failure,
        derived: facts,
        steps_applied,
    }
}

/// Replays `script` as skolem-chase applications over `d`, in order. Every
/// step must bind all universal variables of its rule and every bound body
/// atom must already be derived.
pub fn guided_chase_verify(
    d: &Instance,
    rules: &RuleSet,
    script: &FiringScript,
) -> Result<ScriptOutcome, ScriptError> {
    require_tgds(rules)?;
    let mut facts = d.clone();
    let mut nulls: Vec<BTreeMap<String, Term>> = Vec::new();
    for (i, step) in script.steps.iter().enumerate() {
        let (idx, h) = match prepare(i, step, rules, &nulls)? {
            Ok(x) => x,
            Err(f) => return Ok(finish(facts, Some(f), i, &script.target)),
        };
        let rule = &rules.rules[idx];
        if let Some(a) = rule
            .body
            .iter()
            .map(|a| a.apply(&h))
            .find(|a| !facts.contains(a))
        {
            let f = StepFailure::Unmatched {
                step: i,
                rule: step.rule.clone(),
                atom: a.to_string(),
            };
            return Ok(finish(facts, Some(f), i, &script.target));
        }
        let h2 = extend_with_nulls(idx, rule, &h);
        for a in rule.head_atoms().filter_map(|x| x.as_rel()) {
            facts.insert(a.apply(&h2));
        }
        nulls.push(
            rule.existentials()
                .into_iter()
                .map(|z| (z.name(), h2[&z].clone()))
                .collect(),
        );
    }
    Ok(finish(facts, None, script.steps.len(), &script.target))
}

/// The same check through the chase engine's own single-step join. Used to
/// cross-validate [`guided_chase_verify`].
pub fn replay_with_chase(
    d: &Instance,
    rules: &RuleSet,
    script: &FiringScript,
) -> Result<ScriptOutcome, ScriptError> {
    require_tgds(rules)?;
    let mut facts = d.clone();
    let mut nulls: Vec<BTreeMap<String, Term>> = Vec::new();
    for (i, step) in script.steps.iter().enumerate() {
        let (idx, h) = match prepare(i, step, rules, &nulls)? {
            Ok(x) => x,
            Err(f) => return Ok(finish(facts, Some(f), i, &script.target)),
        };
        let rule = &rules.rules[idx];
        let Some(head) = fire_tgd(&facts, rules, idx, &h)? else {
            let missing = rule
                .body
                .iter()
                .map(|a| a.apply(&h))
                .find(|a| !facts.contains(a))
                .map(|a| a.to_string())
                .unwrap_or_default();
            let f = StepFailure::Unmatched {
                step: i,
                rule: step.rule.clone(),
                atom: missing,
            };
            return Ok(finish(facts, Some(f), i, &script.target));
        };
        // read each invented null back off the head atoms
        let mut invented = BTreeMap::new();
        let patterns: Vec<&Atom> = rule.head_atoms().filter_map(|x| x.as_rel()).collect();
        for (p, g) in patterns.iter().zip(&head) {
            for (pt, gt) in p.args.iter().zip(&g.args) {
                if pt.is_var() && !h.contains_key(pt) {
                    invented.insert(pt.name(), gt.clone());
                }
            }
        }
        for a in head {
            facts.insert(a);
        }
        nulls.push(invented);
    }
    Ok(finish(facts, None, script.steps.len(), &script.target))
}

/// Builds scripts by firing rules against the facts derived so far. Bindings
/// left open are completed by homomorphism search.
pub struct ScriptBuilder<'r> {
    rules: &'r RuleSet,
    facts: Instance,
    names: BTreeMap<Term, String>,
    nulls: Vec<BTreeMap<String, Term>>,
    steps: Vec<ScriptStep>,
}

impl<'r> ScriptBuilder<'r> {
    pub fn new(d: &Instance, rules: &'r RuleSet) -> Result<Self, ScriptError> {
        require_tgds(rules)?;
        Ok(ScriptBuilder {
            rules,
            facts: d.clone(),
            names: BTreeMap::new(),
            nulls: Vec::new(),
            steps: Vec::new(),
        })
    }

    pub fn facts(&self) -> &Instance {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The null invented by step `step` for existential `var`.
    pub fn null(&self, step: usize, var: &str) -> Term {
        self.nulls[step][var].clone()
    }

    fn token(&self, t: &Term) -> String {
        self.names.get(t).cloned().unwrap_or_else(|| t.name())
    }

    /// Fires rule `rule` with the given partial binding; returns the step index.
    pub fn fire(&mut self, rule: &str, bind: &[(&str, &Term)]) -> Result<usize, ScriptError> {
        let idx = self
            .rules
            .find(rule)
            .ok_or_else(|| ScriptError::UnknownRule {
                step: self.steps.len(),
                rule: rule.to_string(),
            })?;
        let r = &self.rules.rules[idx];
        let seed: Mapping = bind
            .iter()
            .map(|(v, t)| (Term::var(v), (*t).clone()))
            .collect();
        let fixed: BTreeSet<Term> = r.consts();
        let h = hom_search_from(r.body.iter(), &self.facts, &fixed, seed.clone())
            .map_err(ChaseError::from)?
            .ok_or_else(|| ScriptError::NoMatch {
                rule: rule.to_string(),
            })?;
        let mut h: Mapping = h.into_iter().filter(|(k, _)| k.is_var()).collect();
        h.extend(seed);
        let step = self.steps.len();
        let bind = r
            .universal()
            .iter()
            .map(|v| (v.name(), self.token(&h[v])))
            .collect();
        let h2 = extend_with_nulls(idx, r, &h);
        for a in r.head_atoms().filter_map(|x| x.as_rel()) {
            self.facts.insert(a.apply(&h2));
        }
        let mut invented = BTreeMap::new();
        for z in r.existentials() {
            let t = h2[&z].clone();
            self.names
                .entry(t.clone())
                .or_insert_with(|| format!("@{step}.{}", z.name()));
            invented.insert(z.name(), t);
        }
        self.nulls.push(invented);
        self.steps.push(ScriptStep {
            rule: rule.to_string(),
            bind,
        });
        Ok(step)
    }

    pub fn finish(self, target: Option<Atom>) -> FiringScript {
        FiringScript {
            steps: self.steps,
            target,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn setup() -> (Instance, RuleSet) {
        let rules = parse_program("[r1] P(X) -> E(X,Y).\n[r2] E(X,Y) -> F(Y).").unwrap();
        (parse_database("P(a).").unwrap(), rules)
    }

    #[test]
    fn empty_script_target_in_database() {
        let (d, rules) = setup();
        let s = FiringScript {
            steps: vec![],
            target: Some(Atom::parse_args("P", &["a"])),
        };
        assert!(guided_chase_verify(&d, &rules, &s).unwrap().accepted);
    }

    #[test]
    fn null_references_resolve() {
        let (d, rules) = setup();
        let text = r#"[{"rule":"r1","bind":{"X":"a"}},{"rule":"r2","bind":{"X":"a","Y":"@0.Y"}}]"#;
        let s = FiringScript::from_json(text).unwrap();
        let out = guided_chase_verify(&d, &rules, &s).unwrap();
        assert!(out.accepted);
        assert_eq!(out.derived.len(), 3);
        assert_eq!(replay_with_chase(&d, &rules, &s).unwrap(), out);
    }

    #[test]
    fn underivable_body_fails_at_that_step() {
        let (d, rules) = setup();
        let text = r#"[{"rule":"r1","bind":{"X":"a"}},{"rule":"r2","bind":{"X":"b","Y":"@0.Y"}}]"#;
        let s = FiringScript::from_json(text).unwrap();
        let out = guided_chase_verify(&d, &rules, &s).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.steps_applied, 1);
        match out.failure.as_ref().unwrap() {
            StepFailure::Unmatched { step, atom, .. } => {
                assert_eq!(*step, 1);
                assert!(atom.starts_with("E(b,"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(replay_with_chase(&d, &rules, &s).unwrap(), out);
    }

    #[test]
    fn unbound_and_unknown_are_reported() {
        let (d, rules) = setup();
        let s = FiringScript::from_json(r#"[{"rule":"r1","bind":{}}]"#).unwrap();
        assert!(matches!(
            guided_chase_verify(&d, &rules, &s).unwrap().failure,
            Some(StepFailure::Unbound { .. })
        ));
        let s = FiringScript::from_json(r#"[{"rule":"nope","bind":{}}]"#).unwrap();
        assert!(matches!(
            guided_chase_verify(&d, &rules, &s),
            Err(ScriptError::UnknownRule { .. })
        ));
        let s = FiringScript::from_json(r#"[{"rule":"r1","bind":{"X":"@7.Y"}}]"#).unwrap();
        assert!(matches!(
            guided_chase_verify(&d, &rules, &s),
            Err(ScriptError::BadTerm { .. })
        ));
    }

    #[test]
    fn missing_target_is_a_failure() {
        let (d, rules) = setup();
        let s = FiringScript::from_json(r#"[{"target":"F(a)"}]"#).unwrap();
        let out = guided_chase_verify(&d, &rules, &s).unwrap();
        assert_eq!(
            out.failure,
            Some(StepFailure::TargetMissing {
                target: "F(a)".into()
            })
        );
    }

    #[test]
    fn builder_output_verifies_and_round_trips() {
        let (d, rules) = setup();
        let mut b = ScriptBuilder::new(&d, &rules).unwrap();
        let s0 = b.fire("r1", &[]).unwrap();
        let y = b.null(s0, "Y");
        b.fire("r2", &[("Y", &y)]).unwrap();
        assert!(b.facts().contains(&Atom::new("F", vec![y])));
        let script = b.finish(None);
        let back = FiringScript::from_json(&script.to_json().to_string()).unwrap();
        assert_eq!(back, script);
        assert!(guided_chase_verify(&d, &rules, &back).unwrap().accepted);
    }
}
