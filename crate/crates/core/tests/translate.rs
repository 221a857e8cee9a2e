mod common;

use common::*;
use exrule_core::translate::{guided_chase_verify, replay_with_chase, FiringScript, StepFailure};

#[test]
fn s_of_a_script_matches_fixture() {
    let (out, s) = s_of_a_translation();
    let (_, d) = s_of_a_source();
    let script = build_s_of_a_script(&out, &s, &d);
    let text = serde_json::to_string_pretty(&script.to_json()).unwrap() + "\n";
    if std::env::var_os("EXRULE_BLESS").is_some() {
        std::fs::write(fixture("s_of_a.script.json"), &text).unwrap();
        std::fs::write(fixture("s_of_a.tgd.rules"), out.rules.to_string()).unwrap();
    }
    assert_eq!(text, read_fixture("s_of_a.script.json"));
    assert_eq!(out.rules.to_string(), read_fixture("s_of_a.tgd.rules"));
}

#[test]
fn s_of_a_script_is_accepted_by_both_checkers() {
    let (out, _) = s_of_a_translation();
    let (_, d) = s_of_a_source();
    let script = FiringScript::from_json(&read_fixture("s_of_a.script.json")).unwrap();
    let a = guided_chase_verify(&d, &out.rules, &script).unwrap();
    assert!(a.accepted, "{:?}", a.failure);
    let b = replay_with_chase(&d, &out.rules, &script).unwrap();
    assert_eq!(a, b);
}

#[test]
fn truncated_script_misses_target() {
    let (out, _) = s_of_a_translation();
    let (_, d) = s_of_a_source();
    let mut script = FiringScript::from_json(&read_fixture("s_of_a.script.json")).unwrap();
    script.steps.pop();
    let a = guided_chase_verify(&d, &out.rules, &script).unwrap();
    assert!(matches!(a.failure, Some(StepFailure::TargetMissing { .. })));
}

#[test]
fn dropping_a_step_breaks_a_later_one() {
    let (out, _) = s_of_a_translation();
    let (_, d) = s_of_a_source();
    let mut script = FiringScript::from_json(&read_fixture("s_of_a.script.json")).unwrap();
    let i = script
        .steps
        .iter()
        .position(|s| s.rule == "init_truth_P")
        .unwrap();
    script.steps.remove(i);
    let a = guided_chase_verify(&d, &out.rules, &script).unwrap();
    let b = replay_with_chase(&d, &out.rules, &script).unwrap();
    assert!(!a.accepted);
    assert_eq!(a, b);
    match a.failure.unwrap() {
        StepFailure::Unmatched { atom, .. } => assert!(atom.starts_with("True(")),
        other => panic!("{other:?}"),
    }
}
