//! Command-line front end: satisfiability, emptiness, membership, Boolean
//! operations, partitioning, periodic path queries, MSO emission, DOT
//! export, and the high-voltage station demo.
//!
//! Exit codes: 0 = the queried property holds, 1 = it fails, 2 = usage or
//! input error, 3 = a resource cap was exceeded.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use granulog::buchi::{
    buchi_boolean_capped, buchi_empty, buchi_member, buchi_project, BoolKind, DEFAULT_STATE_CAP,
};
use granulog::ftree::{fta_boolean_capped, fta_empty, fta_member, fta_project, AnyTree};
use granulog::json::{
    certificate_value, dot_automaton, model_value, parse_automaton, parse_graph, parse_model,
    serialize_automaton, AnyAutomaton,
};
use granulog::logic::{compile, eval_formula, parse_tl, sat_check, SatWitness, Semantics};
use granulog::model::{Alphabet, Model};
use granulog::mso::emit_mso;
use granulog::periodic::ppp;
use granulog::rabin::{rabin_empty, rabin_member, rabin_union};
use granulog::temporalized::{
    its_empty, partition_alphabet_capped, t_boolean_capped, t_empty, t_member, t_project,
};
use granulog::{Error, Result};

#[derive(Parser)]
#[command(name = "granulog", version, about = "Temporalized automata and time-granularity logics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Machine-readable JSON report on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on constructed automaton states (also GRANULOG_MAX_STATES).
    #[arg(long, global = true)]
    max_states: Option<usize>,
}

#[derive(Args)]
struct WitnessOut {
    /// Write the witness or certificate to this file as JSON.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Satisfiability of a .tl formula file.
    Sat {
        file: PathBuf,
        /// Override the file's semantics: seq-of-seq | layered:k=K,depth=D | uuls:k=K
        #[arg(long)]
        semantics: Option<String>,
        /// Also write the compiled temporalized automaton to this file.
        #[arg(long)]
        automaton: Option<PathBuf>,
        #[command(flatten)]
        witness: WitnessOut,
    },
    /// Language emptiness of an automaton file (exit 0 = nonempty).
    Empty {
        file: PathBuf,
        #[command(flatten)]
        witness: WitnessOut,
    },
    /// Emptiness over increasing tree sequences (exit 0 = nonempty).
    ItsEmpty {
        file: PathBuf,
        #[command(flatten)]
        witness: WitnessOut,
    },
    /// Membership of a model in an automaton's language.
    Member { automaton: PathBuf, model: PathBuf },
    /// Boolean operation on automata; result JSON on stdout or --out.
    Bool {
        /// union | intersect | complement
        op: String,
        a: PathBuf,
        b: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project propositions away from an automaton.
    Project {
        a: PathBuf,
        /// Comma-separated proposition names to drop.
        #[arg(long)]
        drop: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repartition a temporalized automaton's label alphabet.
    Partition {
        a: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Periodic path problem: paths of length a + y*l for every y?
    Ppp {
        graph: PathBuf,
        #[arg(short)]
        a: u64,
        #[arg(short)]
        l: u64,
    },
    /// Emit the MSO sentence of a temporalized automaton.
    EmitMso { a: PathBuf },
    /// DOT rendering of an automaton file.
    Dot { a: PathBuf },
    /// Built-in demonstrations (hv-station).
    Demo { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceCap(..) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn cap(cli: &Cli) -> usize {
    cli.max_states
        .or_else(|| {
            std::env::var("GRANULOG_MAX_STATES")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_STATE_CAP)
}

fn report(cli: &Cli, human: &str, machine: Value) {
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&machine).expect("serializable")
        );
    } else {
        println!("{human}");
    }
}

fn verdict_code(holds: bool) -> u8 {
    if holds {
        0
    } else {
        1
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_semantics(s: &str) -> Result<Semantics> {
    let bad = || Error::Invalid(format!("unknown semantics {s:?}"));
    let (head, rest) = match s.split_once(':') {
        Some((h, r)) => (h, r),
        None => (s, ""),
    };
    let mut kv = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (key, val) = part.split_once('=').ok_or_else(bad)?;
        kv.insert(key, val.parse::<usize>().map_err(|_| bad())?);
    }
    let need = |key: &str| kv.get(key).copied().ok_or_else(bad);
    match head {
        "seq" | "seq-of-seq" => Ok(Semantics::SeqOfSeq),
        "layered" => Ok(Semantics::Layered {
            k: need("k")?,
            depth: need("depth")?,
        }),
        "uuls" => Ok(Semantics::Uuls { k: need("k")? }),
        _ => Err(bad()),
    }
}

fn semantics_name(sem: &Semantics) -> String {
    match sem {
        Semantics::SeqOfSeq => "seq-of-seq".into(),
        Semantics::Layered { k, depth } => format!("layered k={k} depth={depth}"),
        Semantics::Uuls { k } => format!("uuls k={k}"),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.cmd {
        Cmd::Sat {
            file,
            semantics,
            automaton,
            witness,
        } => {
            let (file_sem, props, phi) = parse_tl(&read(file)?)?;
            let sem = match semantics {
                Some(s) => parse_semantics(s)?,
                None => file_sem,
            };
            if automaton.is_some() {
                let compiled = compile(&phi, &sem, &props)?;
                emit(
                    &automaton.clone(),
                    &serialize_automaton(&AnyAutomaton::Temporalized(compiled)),
                )?;
            }
            let (sat, w) = sat_check(&phi, &sem, &props)?;
            let witness_value = w.as_ref().map(|w| match w {
                SatWitness::Sequence(m) => {
                    model_value(&Model::TreeSeq(Alphabet::Props(props.clone()), m.clone()))
                }
                SatWitness::Certificate(c) => certificate_value(c),
            });
            if let (Some(path), Some(v)) = (&witness.witness, &witness_value) {
                emit(
                    &Some(path.clone()),
                    &format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")),
                )?;
            }
            let human = format!(
                "{} over {}{}",
                if sat { "SAT" } else { "UNSAT" },
                semantics_name(&sem),
                if witness_value.is_some() {
                    " (witness available)"
                } else {
                    ""
                }
            );
            report(
                cli,
                &human,
                json!({
                    "semantics": semantics_name(&sem),
                    "verb": "sat",
                    "verdict": sat,
                    "witness": witness_value,
                }),
            );
            Ok(verdict_code(sat))
        }
        Cmd::Empty { file, witness } => {
            let a = parse_automaton(&read(file)?)?;
            let (empty, witness_value) = match &a {
                AnyAutomaton::Buchi(b) => {
                    let (e, w) = buchi_empty(b);
                    (
                        e,
                        w.map(|w| model_value(&Model::Word(b.alphabet.clone(), w))),
                    )
                }
                AnyAutomaton::Tree(t) => {
                    let (e, w) = fta_empty(t);
                    (
                        e,
                        w.map(|w| match w {
                            AnyTree::Complete(t2) => {
                                model_value(&Model::Tree(t.alphabet.clone(), t2))
                            }
                            AnyTree::Almost(t2) => {
                                model_value(&Model::Almost(t.alphabet.clone(), t2))
                            }
                        }),
                    )
                }
                AnyAutomaton::Rabin(r) => {
                    let (e, w) = rabin_empty(r)?;
                    (
                        e,
                        w.map(|w| model_value(&Model::Regular(r.alphabet.clone(), w))),
                    )
                }
                AnyAutomaton::Temporalized(t) => {
                    let (e, w) = t_empty(t)?;
                    let alpha = t
                        .inner
                        .values()
                        .next()
                        .map(|i| i.alphabet().clone())
                        .unwrap_or_else(|| Alphabet::Symbols(Vec::new()));
                    (e, w.map(|w| model_value(&Model::TreeSeq(alpha, w))))
                }
            };
            if let (Some(path), Some(v)) = (&witness.witness, &witness_value) {
                emit(
                    &Some(path.clone()),
                    &format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")),
                )?;
            }
            let human = if empty { "EMPTY" } else { "NONEMPTY" };
            report(
                cli,
                human,
                json!({ "verb": "empty", "verdict": !empty, "witness": witness_value }),
            );
            Ok(verdict_code(!empty))
        }
        Cmd::ItsEmpty { file, witness } => {
            let a = match parse_automaton(&read(file)?)? {
                AnyAutomaton::Temporalized(t) => t,
                _ => {
                    return Err(Error::Invalid(
                        "its-empty needs a temporalized automaton".into(),
                    ))
                }
            };
            let (empty, cert) = its_empty(&a)?;
            let cert_value = cert.as_ref().map(certificate_value);
            if let (Some(path), Some(v)) = (&witness.witness, &cert_value) {
                emit(
                    &Some(path.clone()),
                    &format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")),
                )?;
            }
            let human = if empty {
                "EMPTY over increasing tree sequences"
            } else {
                "NONEMPTY over increasing tree sequences"
            };
            report(
                cli,
                human,
                json!({ "verb": "its-empty", "verdict": !empty, "certificate": cert_value }),
            );
            Ok(verdict_code(!empty))
        }
        Cmd::Member { automaton, model } => {
            let a = parse_automaton(&read(automaton)?)?;
            let m = parse_model(&read(model)?)?;
            let holds = match (&a, &m) {
                (AnyAutomaton::Buchi(b), Model::Word(_, w)) => buchi_member(b, w)?,
                (AnyAutomaton::Tree(t), Model::Tree(_, t2)) => {
                    fta_member(t, &AnyTree::Complete(t2.clone()))?
                }
                (AnyAutomaton::Tree(t), Model::Almost(_, t2)) => {
                    fta_member(t, &AnyTree::Almost(t2.clone()))?
                }
                (AnyAutomaton::Rabin(r), Model::Regular(_, t)) => rabin_member(r, t)?,
                (AnyAutomaton::Temporalized(t), Model::TreeSeq(_, s)) => t_member(t, s)?,
                _ => {
                    return Err(Error::KindMismatch(
                        "model kind does not fit the automaton kind".into(),
                    ))
                }
            };
            report(
                cli,
                if holds { "MEMBER" } else { "NOT A MEMBER" },
                json!({ "verb": "member", "verdict": holds }),
            );
            Ok(verdict_code(holds))
        }
        Cmd::Bool { op, a, b, out } => {
            let kind = match op.as_str() {
                "union" => BoolKind::Union,
                "intersect" => BoolKind::Intersect,
                "complement" => BoolKind::Complement,
                other => return Err(Error::Invalid(format!("unknown operation {other:?}"))),
            };
            let a = parse_automaton(&read(a)?)?;
            let b = match b {
                Some(p) => Some(parse_automaton(&read(p)?)?),
                None => None,
            };
            if (kind == BoolKind::Complement) != b.is_none() {
                return Err(Error::Invalid(
                    "complement takes one automaton; union/intersect take two".into(),
                ));
            }
            let limit = cap(cli);
            let result = match (&a, &b) {
                (AnyAutomaton::Buchi(x), Some(AnyAutomaton::Buchi(y))) => {
                    AnyAutomaton::Buchi(buchi_boolean_capped(kind, x, Some(y), limit)?)
                }
                (AnyAutomaton::Buchi(x), None) => {
                    AnyAutomaton::Buchi(buchi_boolean_capped(kind, x, None, limit)?)
                }
                (AnyAutomaton::Tree(x), Some(AnyAutomaton::Tree(y))) => {
                    AnyAutomaton::Tree(fta_boolean_capped(kind, x, Some(y), limit)?)
                }
                (AnyAutomaton::Tree(x), None) => {
                    AnyAutomaton::Tree(fta_boolean_capped(kind, x, None, limit)?)
                }
                (AnyAutomaton::Rabin(x), Some(AnyAutomaton::Rabin(y))) => match kind {
                    BoolKind::Union => AnyAutomaton::Rabin(rabin_union(x, y)?),
                    _ => {
                        return Err(Error::Capability(
                            "intersection of Rabin tree automata".into(),
                        ))
                    }
                },
                (AnyAutomaton::Rabin(_), None) => {
                    return Err(Error::Capability(
                        "complementation of Rabin tree automata".into(),
                    ))
                }
                (AnyAutomaton::Temporalized(x), Some(AnyAutomaton::Temporalized(y))) => {
                    AnyAutomaton::Temporalized(t_boolean_capped(kind, x, Some(y), limit)?)
                }
                (AnyAutomaton::Temporalized(x), None) => {
                    AnyAutomaton::Temporalized(t_boolean_capped(kind, x, None, limit)?)
                }
                _ => {
                    return Err(Error::Mismatch(
                        "operands must be automata of the same kind".into(),
                    ))
                }
            };
            emit(out, &serialize_automaton(&result))?;
            Ok(0)
        }
        Cmd::Project { a, drop, out } => {
            let drop: BTreeSet<String> = drop
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().to_string())
                .collect();
            let result = match parse_automaton(&read(a)?)? {
                AnyAutomaton::Buchi(x) => AnyAutomaton::Buchi(buchi_project(&x, &drop)?),
                AnyAutomaton::Tree(x) => AnyAutomaton::Tree(fta_project(&x, &drop)?),
                AnyAutomaton::Rabin(x) => AnyAutomaton::Rabin(granulog::rabin::rabin_project(
                    &x, &drop,
                )?),
                AnyAutomaton::Temporalized(x) => {
                    AnyAutomaton::Temporalized(t_project(&x, &drop)?)
                }
            };
            emit(out, &serialize_automaton(&result))?;
            Ok(0)
        }
        Cmd::Partition { a, out } => {
            let a = match parse_automaton(&read(a)?)? {
                AnyAutomaton::Temporalized(t) => t,
                _ => {
                    return Err(Error::Invalid(
                        "partition needs a temporalized automaton".into(),
                    ))
                }
            };
            let p = partition_alphabet_capped(&a, cap(cli))?;
            emit(out, &serialize_automaton(&AnyAutomaton::Temporalized(p)))?;
            Ok(0)
        }
        Cmd::Ppp { graph, a, l } => {
            let g = parse_graph(&read(graph)?)?;
            let (holds, schedule) = ppp(&g, *a, *l)?;
            let schedule_value = schedule.map(|w| {
                json!({ "class_loop": w.cycle, "class_stem": w.stem })
            });
            let human = if holds {
                format!("COVERED: paths of length {a} + y*{l} exist for every y")
            } else {
                format!("NOT COVERED: some length {a} + y*{l} has no path")
            };
            report(
                cli,
                &human,
                json!({ "schedule": schedule_value, "verb": "ppp", "verdict": holds }),
            );
            Ok(verdict_code(holds))
        }
        Cmd::EmitMso { a } => {
            let a = match parse_automaton(&read(a)?)? {
                AnyAutomaton::Temporalized(t) => t,
                _ => {
                    return Err(Error::Invalid(
                        "emit-mso needs a temporalized automaton".into(),
                    ))
                }
            };
            let text = emit_mso(&a)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "mso": text, "verb": "emit-mso" }))
                        .expect("serializable")
                );
            } else {
                println!("{text}");
            }
            Ok(0)
        }
        Cmd::Dot { a } => {
            let a = parse_automaton(&read(a)?)?;
            print!("{}", dot_automaton(&a));
            Ok(0)
        }
        Cmd::Demo { name } => match name.as_str() {
            "hv-station" => demo_hv(cli),
            other => Err(Error::Invalid(format!("unknown demo {other:?}"))),
        },
    }
}

/// Runs the high-voltage station corpus: checks each specification formula
/// satisfiable over 3-ary depth-3 layered structures and evaluates the
/// bundled switch-over day model against the bar-change formula.
fn demo_hv(cli: &Cli) -> Result<u8> {
    let entries: [(&str, &str); 2] = [
        (
            "change-bar",
            include_str!("../../../corpus/hv-station/change-bar.tl"),
        ),
        (
            "close-pb",
            include_str!("../../../corpus/hv-station/close-pb.tl"),
        ),
    ];
    let mut results = Vec::new();
    let mut all = true;
    for (name, text) in entries {
        let (sem, props, phi) = parse_tl(text)?;
        let (sat, _) = sat_check(&phi, &sem, &props)?;
        all &= sat;
        results.push((name.to_string(), sat));
    }
    let (model_text, formula_text) = hv_model_and_formula();
    let model = parse_model(&model_text)?;
    let (sem, props, phi) = parse_tl(formula_text)?;
    let holds = match &model {
        Model::TreeSeq(_, s) => eval_formula(&phi, &props, s, 0)?,
        _ => unreachable!("bundled model is a tree sequence"),
    };
    let _ = sem;
    all &= holds;
    if cli.json {
        let checks: Vec<Value> = results
            .iter()
            .map(|(n, s)| json!({ "name": n, "sat": s }))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "model_check": holds,
                "sat_checks": checks,
                "verb": "demo",
                "verdict": all,
            }))
            .expect("serializable")
        );
    } else {
        for (n, s) in &results {
            println!("{n}: {}", if *s { "SAT" } else { "UNSAT" });
        }
        println!(
            "switch-over day model satisfies change-bar: {}",
            if holds { "yes" } else { "no" }
        );
    }
    Ok(verdict_code(all))
}

/// A depth-3 ternary day on which the station switches bars, labeled so the
/// bar-change formula holds, plus that formula restated for evaluation.
fn hv_model_and_formula() -> (String, &'static str) {
    let leaf = |props: &[&str]| {
        json!({ "children": [], "letter": props })
    };
    let node = |props: &[&str], cs: Vec<Value>| {
        json!({ "children": cs, "letter": props })
    };
    let blank3 = |mk: &dyn Fn() -> Value| vec![mk(), mk(), mk()];
    let blank_leafs = || blank3(&|| leaf(&[]));
    let blank_mid = || node(&[], blank_leafs());
    // first third closes the bypass, final third opens it again
    let first = node(&["close_pb"], blank_leafs());
    let last = node(&["open_pb"], blank_leafs());
    let change_day = node(&["change_b1_b2"], vec![first, blank_mid(), last]);
    let quiet_day = node(&[], blank3(&blank_mid));
    let model = json!({
        "alphabet": { "props": ["change_b1_b2", "close_pb", "open_pb"] },
        "k": 3,
        "kind": "lasso-treeseq",
        "loop": [ { "kind": "tree", "root": quiet_day } ],
        "stem": [ { "kind": "tree", "root": change_day } ],
    });
    (
        format!("{}\n", serde_json::to_string_pretty(&model).expect("serializable")),
        include_str!("../../../corpus/hv-station/change-bar.tl"),
    )
}
