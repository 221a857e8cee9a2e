//! `exrule`: parse, chase, translate, compile and check existential rule programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exrule_core::automata::{
    combine_single_fact, compile_linear_tgds, nta_accepts_query, nta_accepts_tree,
    nta_to_linear_tgds, AutomataError, Nta, RankedTree,
};
use exrule_core::chase::{
    certain_answer_limited, chase_limited, skolem_chase_full, ChaseError, ChaseLimits,
};
use exrule_core::lab::{
    check_const_subst_closure, check_data_constructivity, check_db_hom_closure,
    check_query_constructivity, lemma8_check, LabBounds, LabError, Status,
};
use exrule_core::model::Instance;
use exrule_core::syntax::{parse_database, parse_program, parse_query, Dialect, RuleSet, Schema};
use exrule_core::translate::{
    ded_to_dtgd, dtgd_to_tgd, guided_chase_verify, FiringScript, TranslationOutput,
};
use exrule_core::FORMAT_TAG;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(
    name = "exrule",
    version,
    about = "Workbench for ontology-mediated queries over existential rules"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Print a JSON run report instead of text
    #[arg(long, global = true, help_heading = "Global options")]
    json: bool,
    /// Fact cap for chase runs
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value_t = 1_000_000
    )]
    max_facts: usize,
    /// Model cap for entailment over disjunctive instances
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value_t = 100_000
    )]
    max_models: usize,
    /// Worker threads (defaults to the number of cores)
    #[arg(long, global = true, help_heading = "Global options")]
    threads: Option<usize>,
    /// Seed recorded in the run report
    #[arg(
        long,
        global = true,
        help_heading = "Global options",
        default_value_t = 0
    )]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and print it back
    Parse {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
    },
    /// Report the dialect of a program and of each rule
    Classify {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
    },
    /// Replace multi-atom head disjuncts by auxiliary atoms
    Canonicalize {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Output file
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the chase for a number of rounds
    Chase {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Database (.db)
        #[arg(long)]
        db: PathBuf,
        /// Chase rounds
        #[arg(long)]
        depth: usize,
        /// Chase variant
        #[arg(long, value_enum, default_value_t = Mode::Nondet)]
        mode: Mode,
        /// Output file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a certain answer within a depth bound (exit 0/1/2)
    Entail {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Database (.db)
        #[arg(long)]
        db: PathBuf,
        /// Query (.query), a union of conjunctive queries
        #[arg(long)]
        query: PathBuf,
        /// Chase rounds
        #[arg(long)]
        depth: usize,
    },
    /// Translate between rule dialects
    Translate {
        /// Source dialect
        #[arg(long, value_enum)]
        from: SourceDialect,
        /// Target dialect
        #[arg(long, value_enum)]
        to: TargetDialect,
        /// Input program
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// Output file
        #[arg(short, long)]
        out: PathBuf,
        /// Write the fresh-symbol manifest here
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Replay a firing script against a TGD program (exit 0 accepted, 1 rejected)
    VerifyScript {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Database (.db)
        #[arg(long)]
        db: PathBuf,
        /// Firing script (.json)
        #[arg(long)]
        script: PathBuf,
    },
    /// Tree automata for linear TGDs
    #[command(subcommand)]
    Nta(NtaCmd),
    /// Check a semantic property on a bounded universe (exit 0/1/2)
    Check {
        /// Property to check
        #[arg(long, value_enum)]
        property: Property,
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Universe bounds
        #[arg(long, default_value = "consts=2,facts=3,qatoms=2,depth=4")]
        bounds: String,
        /// Database, needed by universal-model
        #[arg(long)]
        db: Option<PathBuf>,
        /// Write the verdict as JSON here
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NtaCmd {
    /// Compile linear TGDs and a single-fact database into an automaton
    Compile {
        /// Rule program (.rules)
        #[arg(long)]
        rules: PathBuf,
        /// Database (.db)
        #[arg(long)]
        db: PathBuf,
        /// Output file
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decide acceptance of a tree, or of some tree for a query (exit 0/1)
    Accept {
        /// Automaton (.nta.json)
        #[arg(long)]
        nta: PathBuf,
        /// Ranked tree (.tree.json)
        #[arg(long, conflicts_with = "query", required_unless_present = "query")]
        tree: Option<PathBuf>,
        /// Query (.query); accepted when some disjunct is
        #[arg(long)]
        query: Option<PathBuf>,
        /// Atom-free nodes allowed in the searched trees
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Build linear TGDs whose certain answers are the accepted queries
    Invert {
        /// Automaton (.nta.json)
        #[arg(long)]
        nta: PathBuf,
        /// Database (.db)
        #[arg(long)]
        db: PathBuf,
        /// Output file
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Join programs built for single-fact databases
    Combine {
        /// RULES:DB pair, repeatable
        #[arg(long = "part", required = true, value_parser = parse_part)]
        parts: Vec<(PathBuf, PathBuf)>,
        /// Output file
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Nondet,
    Skolem,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceDialect {
    Ded,
    Dtgd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetDialect {
    Dtgd,
    Tgd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    QueryConstructivity,
    DbHomClosure,
    ConstSubstClosure,
    DataConstructivity,
    UniversalModel,
}

fn parse_part(s: &str) -> Result<(PathBuf, PathBuf), String> {
    let (r, d) = s.split_once(':').ok_or("expected RULES:DB")?;
    Ok((r.into(), d.into()))
}

/// Failures, with their exit codes.
enum Fail {
    Usage(String),
    Input(String),
    Limit(String),
    Engine(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Usage(_) => 10,
            Fail::Input(_) => 11,
            Fail::Limit(_) => 12,
            Fail::Engine(_) => 13,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Usage(m) | Fail::Input(m) | Fail::Limit(m) | Fail::Engine(m) => m,
        }
    }
}

impl From<ChaseError> for Fail {
    fn from(e: ChaseError) -> Self {
        match e {
            ChaseError::FactLimit { .. } | ChaseError::ModelLimit(_) | ChaseError::TooLarge(_) => {
                Fail::Limit(e.to_string())
            }
            _ => Fail::Engine(e.to_string()),
        }
    }
}

impl From<AutomataError> for Fail {
    fn from(e: AutomataError) -> Self {
        match e {
            AutomataError::Format(_) | AutomataError::Syntax(_) => Fail::Input(e.to_string()),
            _ => Fail::Engine(e.to_string()),
        }
    }
}

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Bounds(_) | LabError::Syntax(_) => Fail::Input(e.to_string()),
            LabError::Chase(c) => c.into(),
            _ => Fail::Engine(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Default, Serialize)]
struct Counters {
    facts: Option<usize>,
    rounds: Option<usize>,
    models: Option<usize>,
}

/// What a command produced: an outcome name, its exit code, text for the
/// terminal and structured details for the report.
struct Outcome {
    name: String,
    code: u8,
    text: String,
    details: Value,
    counters: Counters,
}

impl Outcome {
    fn ok(name: &str, text: String, details: Value) -> Self {
        Outcome {
            name: name.to_string(),
            code: 0,
            text,
            details,
            counters: Counters::default(),
        }
    }

    fn with_code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }

    fn with_counters(mut self, counters: Counters) -> Self {
        self.counters = counters;
        self
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    format: &'static str,
    command: &'a [String],
    seed: u64,
    inputs: &'a [InputDigest],
    /// Hash of the command line and input digests.
    digest: String,
    outcome: &'a str,
    exit_code: u8,
    elapsed_ms: u128,
    counters: &'a Counters,
    details: &'a Value,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads inputs and writes artifacts, recording a digest of every input.
struct Io {
    inputs: Vec<InputDigest>,
}

impl Io {
    fn read(&mut self, path: &Path) -> Result<String, Fail> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    fn rules(&mut self, path: &Path) -> Result<RuleSet, Fail> {
        let text = self.read(path)?;
        parse_program(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
    }

    fn db(&mut self, path: &Path) -> Result<Instance, Fail> {
        let text = self.read(path)?;
        parse_database(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
    }

    fn nta(&mut self, path: &Path) -> Result<Nta, Fail> {
        let text = self.read(path)?;
        Nta::from_json(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
    }

    fn write(&self, path: &Path, text: &str) -> Result<(), Fail> {
        std::fs::write(path, text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
    }
}

fn canonical(rules: RuleSet) -> RuleSet {
    if rules.is_canonical() {
        rules
    } else {
        rules.canonicalize()
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn rule_dialects(rules: &RuleSet) -> Vec<Value> {
    rules
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| json!({ "index": i, "label": r.label, "dialect": r.classify().to_string() }))
        .collect()
}

fn translation(out: &TranslationOutput) -> Value {
    json!({ "rules": out.rules.rules.len(), "groups": out.group_counts() })
}

fn run(cmd: &Cmd, g: &Global, io: &mut Io) -> Result<Outcome, Fail> {
    let limits = ChaseLimits {
        max_facts: g.max_facts,
        max_models: g.max_models,
    };
    match cmd {
        Cmd::Parse { rules } => {
            let r = io.rules(rules)?;
            Ok(Outcome::ok(
                "parsed",
                r.to_string(),
                json!({ "rules": r.rules.len(), "dialect": r.dialect().to_string() }),
            ))
        }
        Cmd::Classify { rules } => {
            let r = io.rules(rules)?;
            let per = rule_dialects(&r);
            let mut text = format!("{}\n", r.dialect());
            for (i, d) in r.rules.iter().enumerate() {
                text.push_str(&format!(
                    "  {i} {}: {}\n",
                    d.label.as_deref().unwrap_or("-"),
                    d.classify()
                ));
            }
            Ok(Outcome::ok(
                "classified",
                text,
                json!({ "dialect": r.dialect().to_string(), "rules": per }),
            ))
        }
        Cmd::Canonicalize { rules, out } => {
            let r = io.rules(rules)?.canonicalize();
            let text = r.to_string();
            if let Some(p) = out {
                io.write(p, &text)?;
            }
            Ok(Outcome::ok(
                "canonicalized",
                text,
                json!({ "rules": r.rules.len() }),
            ))
        }
        Cmd::Chase {
            rules,
            db,
            depth,
            mode,
            out,
        } => {
            let r = canonical(io.rules(rules)?);
            let d = io.db(db)?;
            let (artifact, counters) = match mode {
                Mode::Nondet => {
                    let c = chase_limited(&d, &r, *depth, limits)?;
                    let counters = Counters {
                        facts: Some(c.len()),
                        rounds: Some(c.round),
                        models: None,
                    };
                    (c.to_json(), counters)
                }
                Mode::Skolem => {
                    let c = skolem_chase_full(&d, &r, *depth, limits)?;
                    let facts: Vec<Vec<String>> =
                        c.instance.iter().map(|a| vec![a.to_string()]).collect();
                    let counters = Counters {
                        facts: Some(c.instance.len()),
                        rounds: Some(c.round),
                        models: None,
                    };
                    let v = json!({ "format": FORMAT_TAG, "round": c.round, "saturated": c.saturated, "facts": facts });
                    (v, counters)
                }
            };
            let text = pretty(&artifact);
            if let Some(p) = out {
                io.write(p, &text)?;
            }
            let details = json!({ "round": artifact["round"], "saturated": artifact["saturated"] });
            Ok(Outcome::ok("chased", text, details).with_counters(counters))
        }
        Cmd::Entail {
            rules,
            db,
            query,
            depth,
        } => {
            let r = canonical(io.rules(rules)?);
            let d = io.db(db)?;
            let text = io.read(query)?;
            let q =
                parse_query(&text).map_err(|e| Fail::Input(format!("{}: {e}", query.display())))?;
            let v = certain_answer_limited(&d, &r, &q, *depth, limits)?;
            let (code, rounds) = match v.decided() {
                Some(true) => (0, v_round(&v)),
                Some(false) => (1, v_round(&v)),
                None => (2, *depth),
            };
            let line = match v.decided() {
                Some(_) => format!("{} round {rounds}\n", v.name()),
                None => format!("{} depth {depth}\n", v.name()),
            };
            let counters = Counters {
                rounds: Some(rounds),
                ..Counters::default()
            };
            Ok(Outcome::ok(v.name(), line, json!(v))
                .with_code(code)
                .with_counters(counters))
        }
        Cmd::Translate {
            from,
            to,
            input,
            out,
            manifest,
        } => {
            let src = canonical(io.rules(input)?);
            let result = match (from, to) {
                (SourceDialect::Ded, TargetDialect::Dtgd) => {
                    ded_to_dtgd(&src).map_err(|e| Fail::Engine(e.to_string()))?
                }
                (SourceDialect::Dtgd, TargetDialect::Tgd) => {
                    if src.dialect() > Dialect::Dtgd {
                        return Err(Fail::Input(format!(
                            "input is {}, expected DTGD",
                            src.dialect()
                        )));
                    }
                    dtgd_to_tgd(&src)
                        .map_err(|e| Fail::Engine(e.to_string()))?
                        .0
                }
                _ => {
                    return Err(Fail::Usage(
                        "supported translations: ded to dtgd, dtgd to tgd".into(),
                    ))
                }
            };
            io.write(out, &result.rules.to_string())?;
            if let Some(m) = manifest {
                io.write(m, &pretty(&result.manifest_json()))?;
            }
            let details = translation(&result);
            let text = format!(
                "{} rules written to {}\n",
                result.rules.rules.len(),
                out.display()
            );
            Ok(Outcome::ok("translated", text, details))
        }
        Cmd::VerifyScript { rules, db, script } => {
            let r = io.rules(rules)?;
            let d = io.db(db)?;
            let s = FiringScript::from_json(&io.read(script)?)
                .map_err(|e| Fail::Input(e.to_string()))?;
            let o = guided_chase_verify(&d, &r, &s).map_err(|e| Fail::Input(e.to_string()))?;
            let text = match &o.failure {
                None => format!("ACCEPTED after {} steps\n", o.steps_applied),
                Some(f) => format!("REJECTED: {f}\n"),
            };
            let name = if o.accepted { "ACCEPTED" } else { "REJECTED" };
            let counters = Counters {
                facts: Some(o.derived.len()),
                ..Counters::default()
            };
            Ok(Outcome::ok(name, text, o.to_json())
                .with_code(u8::from(!o.accepted))
                .with_counters(counters))
        }
        Cmd::Nta(n) => run_nta(n, io),
        Cmd::Check {
            property,
            rules,
            bounds,
            db,
            report,
        } => {
            let r = io.rules(rules)?;
            let b: LabBounds = bounds
                .parse()
                .map_err(|e: LabError| Fail::Usage(e.to_string()))?;
            let (status, details) = match property {
                Property::UniversalModel => {
                    let Some(db) = db else {
                        return Err(Fail::Usage("universal-model needs --db".into()));
                    };
                    let d = io.db(db)?;
                    match lemma8_check(&d, &r, b.qatoms, b.depth) {
                        Ok(rep) => {
                            let s = if rep.mismatches.is_empty() {
                                Status::NoCounterexample
                            } else {
                                Status::Counterexample
                            };
                            (
                                s,
                                json!({ "property": "universal-model", "status": s, "bounds": b, "report": rep }),
                            )
                        }
                        Err(LabError::Inconclusive(why)) => (
                            Status::Inconclusive,
                            json!({ "property": "universal-model", "status": Status::Inconclusive, "bounds": b, "note": why }),
                        ),
                        Err(e) => return Err(e.into()),
                    }
                }
                p => {
                    let v = match p {
                        Property::QueryConstructivity => check_query_constructivity(&r, &b)?,
                        Property::DbHomClosure => check_db_hom_closure(&r, &b)?,
                        Property::ConstSubstClosure => check_const_subst_closure(&r, &b)?,
                        _ => check_data_constructivity(&r, &b)?,
                    };
                    (
                        v.status,
                        serde_json::to_value(&v).expect("verdict serializes"),
                    )
                }
            };
            let mut details = details;
            details["format"] = json!(FORMAT_TAG);
            if let Some(p) = report {
                io.write(p, &pretty(&details))?;
            }
            let code = match status {
                Status::NoCounterexample => 0,
                Status::Counterexample => 1,
                Status::Inconclusive => 2,
            };
            Ok(Outcome::ok(&status.to_string(), format!("{status}\n"), details).with_code(code))
        }
    }
}

fn v_round(v: &exrule_core::AnswerVerdict) -> usize {
    match v {
        exrule_core::AnswerVerdict::Entailed { round }
        | exrule_core::AnswerVerdict::NotEntailed { round } => *round,
        exrule_core::AnswerVerdict::Unknown { depth } => *depth,
    }
}

fn run_nta(cmd: &NtaCmd, io: &mut Io) -> Result<Outcome, Fail> {
    match cmd {
        NtaCmd::Compile { rules, db, out } => {
            let r = io.rules(rules)?;
            let d = io.db(db)?;
            let query = if r.query.is_empty() {
                r.schema().map_err(|e| Fail::Input(e.to_string()))?
            } else {
                r.query.clone()
            };
            let nta = compile_linear_tgds(&r, &d, &query)?;
            io.write(out, &nta.to_json())?;
            let details = json!({
                "states": nta.states.len(),
                "letters": nta.letters.len(),
                "transitions": nta.transitions.len(),
                "oblivious": nta.is_oblivious(),
            });
            let text = format!(
                "{} states, {} transitions written to {}\n",
                nta.states.len(),
                nta.transitions.len(),
                out.display()
            );
            Ok(Outcome::ok("compiled", text, details))
        }
        NtaCmd::Accept {
            nta,
            tree,
            query,
            bound,
        } => {
            let a = io.nta(nta)?;
            let (accepted, details) = match (tree, query) {
                (Some(t), _) => {
                    let t = RankedTree::from_json(&io.read(t)?)?;
                    let r = nta_accepts_tree(&a, &t)?;
                    (
                        r.accepted,
                        json!({ "root_states": r.root_states, "run": r.run.map(|r| r.len()) }),
                    )
                }
                (None, Some(q)) => {
                    let text = io.read(q)?;
                    let q = parse_query(&text)
                        .map_err(|e| Fail::Input(format!("{}: {e}", q.display())))?;
                    let mut found = None;
                    for b in q.disjuncts() {
                        let r = nta_accepts_query(&a, b, *bound)?;
                        if r.accepted {
                            found = r.witness;
                            break;
                        }
                    }
                    (found.is_some(), json!({ "bound": bound, "witness": found }))
                }
                (None, None) => return Err(Fail::Usage("give --tree or --query".into())),
            };
            let name = if accepted { "ACCEPTED" } else { "REJECTED" };
            Ok(Outcome::ok(name, format!("{name}\n"), details).with_code(u8::from(!accepted)))
        }
        NtaCmd::Invert { nta, db, out } => {
            let a = io.nta(nta)?;
            let d = io.db(db)?;
            let r = nta_to_linear_tgds(&a, &d)?;
            io.write(out, &r.to_string())?;
            let text = format!("{} rules written to {}\n", r.rules.len(), out.display());
            Ok(Outcome::ok(
                "inverted",
                text,
                json!({ "rules": r.rules.len() }),
            ))
        }
        NtaCmd::Combine { parts, out } => {
            let mut loaded = Vec::new();
            let mut data = Schema::new();
            let mut query = Schema::new();
            for (rp, dp) in parts {
                let r = io.rules(rp)?;
                let d = io.db(dp)?;
                for (rel, k) in r.data.iter() {
                    data = data.with(rel, k);
                }
                for a in d.iter() {
                    data = data.with(&a.rel, a.arity());
                }
                for (rel, k) in r.query.iter() {
                    query = query.with(rel, k);
                }
                loaded.push((d, r));
            }
            let r = combine_single_fact(&loaded, &data, &query)?;
            io.write(out, &r.to_string())?;
            let text = format!("{} rules written to {}\n", r.rules.len(), out.display());
            Ok(Outcome::ok(
                "combined",
                text,
                json!({ "rules": r.rules.len(), "parts": parts.len() }),
            ))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(10),
            };
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(10);
        }
    }
    let start = Instant::now();
    let mut io = Io { inputs: Vec::new() };
    let result = run(&cli.cmd, &cli.global, &mut io);
    let elapsed_ms = start.elapsed().as_millis();
    let outcome = match result {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message());
            Outcome {
                name: "ERROR".into(),
                code: f.code(),
                text: String::new(),
                details: json!({ "error": f.message() }),
                counters: Counters::default(),
            }
        }
    };
    if cli.global.json {
        let mut h = Sha256::new();
        for a in argv.iter().skip(1) {
            h.update(a.as_bytes());
            h.update([0]);
        }
        for i in &io.inputs {
            h.update(i.sha256.as_bytes());
        }
        let report = RunReport {
            format: FORMAT_TAG,
            command: &argv[1..],
            seed: cli.global.seed,
            inputs: &io.inputs,
            digest: hex(&h.finalize()),
            outcome: &outcome.name,
            exit_code: outcome.code,
            elapsed_ms,
            counters: &outcome.counters,
            details: &outcome.details,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        print!("{}", outcome.text);
    }
    ExitCode::from(outcome.code)
}
