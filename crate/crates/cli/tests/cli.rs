//! End-to-end runs of the `exrule` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn exrule(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exrule"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn entail(query: &str) -> Output {
    let q = write(
        &format!("{}.query", query.replace([';', '(', ')', ','], "_")),
        &format!("{query}."),
    );
    exrule(&[
        "entail",
        "--rules",
        &fixture("example1.rules"),
        "--db",
        &fixture("example1.db"),
        "--query",
        &q,
        "--depth",
        "5",
    ])
}

#[test]
fn example_one_exit_codes() {
    let both = entail("Q(a);R(a)");
    assert_eq!(code(&both), 0);
    assert_eq!(stdout(&both), "ENTAILED round 1\n");
    let one = entail("Q(a)");
    assert_eq!(code(&one), 1);
    assert_eq!(stdout(&one), "NOT_ENTAILED round 1\n");
}

#[test]
fn non_terminating_chase_is_unknown() {
    let rules = write("loop.rules", "E(X,Y) -> E(Y,Z).");
    let db = write("loop.db", "E(a,b).");
    let q = write("loop.query", "E(b,a).");
    let o = exrule(&[
        "entail", "--rules", &rules, "--db", &db, "--query", &q, "--depth", "3",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout(&o), "UNKNOWN depth 3\n");
}

#[test]
fn depth_zero_echoes_the_database() {
    let o = exrule(&[
        "chase",
        "--rules",
        &fixture("example1.rules"),
        "--db",
        &fixture("example1.db"),
        "--depth",
        "0",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["facts"], serde_json::json!([["P(a)"]]));
    assert_eq!(v["round"], 0);
    assert_eq!(v["format"], "exrule/1");
}

#[test]
fn fact_cap_is_an_explicit_error() {
    let rules = write("cap.rules", "E(X,Y) -> E(Y,Z).");
    let db = write("cap.db", "E(a,b).");
    let o = exrule(&[
        "chase",
        "--rules",
        &rules,
        "--db",
        &db,
        "--depth",
        "10",
        "--max-facts",
        "4",
    ]);
    assert_eq!(code(&o), 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fact limit 4"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(code(&exrule(&["chase", "--bogus"])), 10);
    assert_eq!(code(&exrule(&["nonsense"])), 10);
    let bad = write("bad.rules", "P(X) -> .");
    assert_eq!(code(&exrule(&["parse", "--rules", &bad])), 11);
    assert_eq!(code(&exrule(&["parse", "--rules", "/no/such/file"])), 11);
    let o = exrule(&[
        "translate",
        "--from",
        "ded",
        "--to",
        "tgd",
        "-i",
        &fixture("example1.rules"),
        "-o",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 10);
}

#[test]
fn translation_and_script_round_trip() {
    let out = scratch("s_of_a.tgd.rules").display().to_string();
    let manifest = scratch("s_of_a.manifest.json").display().to_string();
    let o = exrule(&[
        "translate",
        "--from",
        "dtgd",
        "--to",
        "tgd",
        "-i",
        &fixture("s_of_a.rules"),
        "-o",
        &out,
        "--manifest",
        &manifest,
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(fixture("s_of_a.tgd.rules")).unwrap()
    );
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["format"], "exrule/1");
    let o = exrule(&[
        "verify-script",
        "--rules",
        &out,
        "--db",
        &fixture("s_of_a.db"),
        "--script",
        &fixture("s_of_a.script.json"),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let empty = write("empty.script.json", r#"[{"target": "S(a)"}]"#);
    let o = exrule(&[
        "verify-script",
        "--rules",
        &out,
        "--db",
        &fixture("s_of_a.db"),
        "--script",
        &empty,
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn automaton_pipeline() {
    let nta = scratch("successor.nta.json").display().to_string();
    let o = exrule(&[
        "nta",
        "compile",
        "--rules",
        &fixture("successor.rules"),
        "--db",
        &fixture("successor.db"),
        "-o",
        &nta,
    ]);
    assert_eq!(code(&o), 0);
    let yes = write("succ_yes.query", "E(a,X).");
    let no = write("succ_no.query", "E(X,a).");
    assert_eq!(
        code(&exrule(&["nta", "accept", "--nta", &nta, "--query", &yes])),
        0
    );
    assert_eq!(
        code(&exrule(&[
            "nta", "accept", "--nta", &nta, "--query", &no, "--bound", "2"
        ])),
        1
    );
    let inv = scratch("successor.inverse.rules").display().to_string();
    assert_eq!(
        code(&exrule(&[
            "nta",
            "invert",
            "--nta",
            &nta,
            "--db",
            &fixture("successor.db"),
            "-o",
            &inv
        ])),
        0
    );
    let o = exrule(&["classify", "--rules", &inv]);
    assert!(stdout(&o).starts_with("linear-TGD\n"));
    let b = write("succ_b.db", "B(a).");
    let combined = scratch("combined.rules").display().to_string();
    let parts = [
        format!("{inv}:{}", fixture("successor.db")),
        format!("{inv}:{b}"),
    ];
    let o = exrule(&[
        "nta", "combine", "--part", &parts[0], "--part", &parts[1], "-o", &combined,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn property_checks() {
    let report = scratch("qc.json").display().to_string();
    let o = exrule(&[
        "check",
        "--property",
        "query-constructivity",
        "--rules",
        &fixture("example1.rules"),
        "--report",
        &report,
    ]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["status"], "COUNTEREXAMPLE");
    let o = exrule(&[
        "check",
        "--property",
        "universal-model",
        "--rules",
        &fixture("successor.rules"),
        "--db",
        &fixture("successor.db"),
        "--bounds",
        "qatoms=2,depth=6",
    ]);
    assert_eq!(code(&o), 0);
    let o = exrule(&[
        "check",
        "--property",
        "universal-model",
        "--rules",
        &fixture("successor.rules"),
    ]);
    assert_eq!(code(&o), 10);
    let o = exrule(&[
        "check",
        "--property",
        "db-hom-closure",
        "--rules",
        &fixture("example1.rules"),
        "--bounds",
        "consts=x",
    ]);
    assert_eq!(code(&o), 10);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = |n: usize| {
        let chase = scratch(&format!("det{n}.chase.json")).display().to_string();
        let rules = scratch(&format!("det{n}.tgd.rules")).display().to_string();
        let manifest = scratch(&format!("det{n}.manifest.json"))
            .display()
            .to_string();
        let nta = scratch(&format!("det{n}.nta.json")).display().to_string();
        let c = exrule(&[
            "chase",
            "--rules",
            &fixture("s_of_a.rules"),
            "--db",
            &fixture("s_of_a.db"),
            "--depth",
            "3",
            "--out",
            &chase,
            "--threads",
            "3",
        ]);
        assert_eq!(code(&c), 0);
        exrule(&[
            "translate",
            "--from",
            "dtgd",
            "--to",
            "tgd",
            "-i",
            &fixture("s_of_a.rules"),
            "-o",
            &rules,
            "--manifest",
            &manifest,
        ]);
        exrule(&[
            "nta",
            "compile",
            "--rules",
            &fixture("successor.rules"),
            "--db",
            &fixture("successor.db"),
            "-o",
            &nta,
        ]);
        [chase, rules, manifest, nta].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run(0), run(1));
}

#[test]
fn json_report_records_inputs_and_seed() {
    let args = [
        "chase",
        "--rules",
        &fixture("example1.rules"),
        "--db",
        &fixture("example1.db"),
        "--depth",
        "2",
        "--json",
        "--seed",
        "7",
    ];
    let a: serde_json::Value = serde_json::from_slice(&exrule(&args).stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&exrule(&args).stdout).unwrap();
    assert_eq!(a["seed"], 7);
    assert_eq!(a["outcome"], "chased");
    assert_eq!(a["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(a["counters"]["rounds"], 1);
    assert_eq!(a["digest"], b["digest"]);
}

const SUBCOMMANDS: &[&[&str]] = &[
    &[],
    &["parse"],
    &["classify"],
    &["canonicalize"],
    &["chase"],
    &["entail"],
    &["translate"],
    &["verify-script"],
    &["nta"],
    &["nta", "compile"],
    &["nta", "accept"],
    &["nta", "invert"],
    &["nta", "combine"],
    &["check"],
];

/// Flags each subcommand reads, besides the global ones.
fn consumed(cmd: &[&str]) -> &'static [&'static str] {
    match cmd {
        ["parse"] | ["classify"] => &["--rules"],
        ["canonicalize"] => &["--rules", "--out"],
        ["chase"] => &["--rules", "--db", "--depth", "--mode", "--out"],
        ["entail"] => &["--rules", "--db", "--query", "--depth"],
        ["translate"] => &["--from", "--to", "--input", "--out", "--manifest"],
        ["verify-script"] => &["--rules", "--db", "--script"],
        ["nta", "compile"] => &["--rules", "--db", "--out"],
        ["nta", "accept"] => &["--nta", "--tree", "--query", "--bound"],
        ["nta", "invert"] => &["--nta", "--db", "--out"],
        ["nta", "combine"] => &["--part", "--out"],
        ["check"] => &["--property", "--rules", "--bounds", "--db", "--report"],
        _ => &[],
    }
}

#[test]
fn help_lists_every_flag() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/help");
    let bless = std::env::var_os("EXRULE_BLESS").is_some();
    for cmd in SUBCOMMANDS {
        let mut args: Vec<&str> = cmd.to_vec();
        args.push("--help");
        let o = exrule(&args);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        let globals = [
            "--json",
            "--max-facts",
            "--max-models",
            "--threads",
            "--seed",
        ];
        for flag in consumed(cmd).iter().chain(&globals) {
            assert!(
                text.contains(flag),
                "`exrule {}` help misses {flag}",
                cmd.join(" ")
            );
        }
        let name = if cmd.is_empty() {
            "exrule".to_string()
        } else {
            cmd.join("_")
        };
        let path = dir.join(format!("{name}.txt"));
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_default();
        assert_eq!(
            text,
            expected,
            "help snapshot {} differs; rerun with EXRULE_BLESS=1",
            path.display()
        );
    }
}
