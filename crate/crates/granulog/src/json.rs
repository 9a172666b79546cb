//! JSON serialization for models, automata and graphs, plus DOT export.
//!
//! Output is canonical: keys are emitted in sorted order (serde_json's
//! default map), letters over propositional alphabets are arrays of the
//! propositions that hold, letters over symbol alphabets are plain strings.
//! `parse ∘ serialize` is the identity, and `serialize ∘ parse` is the
//! identity on canonical text.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::buchi::BuchiAutomaton;
use crate::error::{Error, Result};
use crate::ftree::{RootMode, TreeAutomaton};
use crate::model::{
    Alphabet, AlmostKTree, FiniteKTree, InnerModel, LassoTreeSeq, LassoWord, Letter, Model,
    RegVertex, RegularTree,
};
use crate::periodic::LengthGraph;
use crate::rabin::RabinTreeAutomaton;
use crate::temporalized::{
    HeightFact, InnerAutomaton, ItsCertificate, TemporalizedAutomaton,
};

/// Any serializable automaton kind.
#[derive(Debug, Clone)]
pub enum AnyAutomaton {
    Buchi(BuchiAutomaton),
    Tree(TreeAutomaton),
    Rabin(RabinTreeAutomaton),
    Temporalized(TemporalizedAutomaton),
}

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key)
        .ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn nat(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(path, "expected a nonnegative integer"))
}

fn string(v: &Value, path: &str) -> Result<String> {
    v.as_str()
        .map(|s| s.to_string())
        .ok_or_else(|| schema(path, "expected a string"))
}

// ---------------------------------------------------------------------------
// Alphabets and letters
// ---------------------------------------------------------------------------

fn alphabet_value(a: &Alphabet) -> Value {
    match a {
        Alphabet::Props(p) => json!({ "props": p.names() }),
        Alphabet::Symbols(s) => json!({ "symbols": s }),
    }
}

fn alphabet_from(v: &Value, path: &str) -> Result<Alphabet> {
    let m = obj(v, path)?;
    if let Some(p) = m.get("props") {
        let names: Vec<String> = arr(p, path)?
            .iter()
            .map(|x| string(x, path))
            .collect::<Result<_>>()?;
        return Alphabet::props(names);
    }
    if let Some(s) = m.get("symbols") {
        let names: Vec<String> = arr(s, path)?
            .iter()
            .map(|x| string(x, path))
            .collect::<Result<_>>()?;
        return Alphabet::symbols(names);
    }
    Err(schema(path, "alphabet needs a \"props\" or \"symbols\" list"))
}

fn letter_value(a: &Alphabet, x: Letter) -> Value {
    match a {
        Alphabet::Props(p) => Value::Array(
            p.props_of(x)
                .into_iter()
                .map(|s| Value::String(s.to_string()))
                .collect(),
        ),
        Alphabet::Symbols(s) => Value::String(
            s.get(x).cloned().unwrap_or_else(|| format!("?{x}")),
        ),
    }
}

fn letter_from(a: &Alphabet, v: &Value, path: &str) -> Result<Letter> {
    match a {
        Alphabet::Props(p) => {
            let names: Vec<String> = arr(v, path)?
                .iter()
                .map(|x| string(x, path))
                .collect::<Result<_>>()?;
            p.letter_of(names.iter().map(|s| s.as_str()))
                .map_err(|e| schema(path, e.to_string()))
        }
        Alphabet::Symbols(s) => {
            let name = string(v, path)?;
            s.iter()
                .position(|n| *n == name)
                .ok_or_else(|| schema(path, format!("unknown symbol {name:?}")))
        }
    }
}

/// Infer a symbol alphabet from the plain-string letters of a value, used
/// when a model file omits the alphabet.
fn collect_symbols(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| collect_symbols(x, out)),
        Value::Object(m) => {
            for key in ["letter", "stem", "loop", "root", "children", "vertices"] {
                if let Some(x) = m.get(key) {
                    collect_symbols(x, out);
                }
            }
        }
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

fn tree_value(a: &Alphabet, t: &FiniteKTree) -> Value {
    json!({
        "children": t.children.iter().map(|c| tree_value(a, c)).collect::<Vec<_>>(),
        "letter": letter_value(a, t.letter),
    })
}

fn tree_from(a: &Alphabet, k: usize, v: &Value, path: &str) -> Result<FiniteKTree> {
    let m = obj(v, path)?;
    let letter = letter_from(a, field(m, "letter", path)?, &format!("{path}.letter"))?;
    let children = arr(field(m, "children", path)?, path)?;
    if children.is_empty() {
        return Ok(FiniteKTree::leaf(k, letter));
    }
    if children.len() != k {
        return Err(Error::Arity {
            path: path.to_string(),
            expected: k,
            found: children.len(),
        });
    }
    let cs: Vec<FiniteKTree> = children
        .iter()
        .enumerate()
        .map(|(i, c)| tree_from(a, k, c, &format!("{path}.children[{i}]")))
        .collect::<Result<_>>()?;
    FiniteKTree::node(k, letter, cs).map_err(|e| schema(path, e.to_string()))
}

fn almost_value(a: &Alphabet, t: &AlmostKTree) -> Value {
    json!({
        "children": t.children.iter().map(|c| tree_value(a, c)).collect::<Vec<_>>(),
        "letter": letter_value(a, t.letter),
    })
}

fn almost_from(a: &Alphabet, k: usize, v: &Value, path: &str) -> Result<AlmostKTree> {
    let m = obj(v, path)?;
    let letter = letter_from(a, field(m, "letter", path)?, &format!("{path}.letter"))?;
    let children = arr(field(m, "children", path)?, path)?;
    if children.is_empty() {
        return Ok(AlmostKTree::root(k, letter));
    }
    if children.len() != k - 1 {
        return Err(Error::Arity {
            path: path.to_string(),
            expected: k - 1,
            found: children.len(),
        });
    }
    let cs: Vec<FiniteKTree> = children
        .iter()
        .enumerate()
        .map(|(i, c)| tree_from(a, k, c, &format!("{path}.children[{i}]")))
        .collect::<Result<_>>()?;
    AlmostKTree::node(k, letter, cs).map_err(|e| schema(path, e.to_string()))
}

fn word_parts_value(a: &Alphabet, w: &LassoWord) -> (Value, Value) {
    let enc = |xs: &[Letter]| Value::Array(xs.iter().map(|&x| letter_value(a, x)).collect());
    (enc(&w.stem), enc(&w.cycle))
}

fn word_from(a: &Alphabet, m: &Map<String, Value>, path: &str) -> Result<LassoWord> {
    let dec = |key: &str| -> Result<Vec<Letter>> {
        arr(field(m, key, path)?, path)?
            .iter()
            .enumerate()
            .map(|(i, v)| letter_from(a, v, &format!("{path}.{key}[{i}]")))
            .collect()
    };
    let stem = dec("stem")?;
    let cycle = dec("loop")?;
    LassoWord::new(stem, cycle).map_err(|e| schema(path, e.to_string()))
}

fn element_value(a: &Alphabet, e: &InnerModel) -> Value {
    match e {
        InnerModel::Tree(t) => json!({ "kind": "tree", "root": tree_value(a, t) }),
        InnerModel::Almost(t) => json!({ "kind": "almost-tree", "root": almost_value(a, t) }),
        InnerModel::Word(w) => {
            let (stem, cycle) = word_parts_value(a, w);
            json!({ "kind": "lasso-word", "loop": cycle, "stem": stem })
        }
    }
}

fn element_from(a: &Alphabet, k: usize, v: &Value, path: &str) -> Result<InnerModel> {
    let m = obj(v, path)?;
    let kind = string(field(m, "kind", path)?, path)?;
    match kind.as_str() {
        "tree" => Ok(InnerModel::Tree(tree_from(
            a,
            k,
            field(m, "root", path)?,
            &format!("{path}.root"),
        )?)),
        "almost-tree" => Ok(InnerModel::Almost(almost_from(
            a,
            k,
            field(m, "root", path)?,
            &format!("{path}.root"),
        )?)),
        "lasso-word" => Ok(InnerModel::Word(word_from(a, m, path)?)),
        other => Err(schema(path, format!("unknown element kind {other:?}"))),
    }
}

/// Serialize a model to canonical JSON.
pub fn serialize_model(m: &Model) -> String {
    let v = model_value(m);
    format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
}

/// The JSON value form of a model (used by serialization and CLI reports).
pub fn model_value(m: &Model) -> Value {
    match m {
        Model::Tree(a, t) => json!({
            "alphabet": alphabet_value(a),
            "k": t.k,
            "kind": "tree",
            "root": tree_value(a, t),
        }),
        Model::Almost(a, t) => json!({
            "alphabet": alphabet_value(a),
            "k": t.k,
            "kind": "almost-tree",
            "root": almost_value(a, t),
        }),
        Model::Word(a, w) => {
            let (stem, cycle) = word_parts_value(a, w);
            json!({
                "alphabet": alphabet_value(a),
                "kind": "lasso-word",
                "loop": cycle,
                "stem": stem,
            })
        }
        Model::TreeSeq(a, s) => {
            let k = seq_k(s);
            json!({
                "alphabet": alphabet_value(a),
                "k": k,
                "kind": "lasso-treeseq",
                "loop": s.cycle.iter().map(|e| element_value(a, e)).collect::<Vec<_>>(),
                "stem": s.stem.iter().map(|e| element_value(a, e)).collect::<Vec<_>>(),
            })
        }
        Model::Regular(a, r) => json!({
            "alphabet": alphabet_value(a),
            "k": r.k,
            "kind": "regular-tree",
            "start": r.start,
            "vertices": r
                .vertices
                .iter()
                .map(|v| json!({ "letter": letter_value(a, v.letter), "succ": v.succ }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn seq_k(s: &LassoTreeSeq) -> usize {
    s.stem
        .iter()
        .chain(&s.cycle)
        .find_map(|e| match e {
            InnerModel::Tree(t) => Some(t.k),
            InnerModel::Almost(t) => Some(t.k),
            InnerModel::Word(_) => None,
        })
        .unwrap_or(2)
}

/// Parse a model from JSON text.
pub fn parse_model(text: &str) -> Result<Model> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    model_from(&v, "$")
}

/// Parse a model from an already-decoded JSON value.
pub fn model_from(v: &Value, path: &str) -> Result<Model> {
    let m = obj(v, path)?;
    let kind = string(field(m, "kind", path)?, path)?;
    let alphabet = match m.get("alphabet") {
        Some(a) => alphabet_from(a, &format!("{path}.alphabet"))?,
        None => {
            // legacy short form: plain-string letters name their own symbols
            let mut names = Vec::new();
            collect_symbols(v, &mut names);
            if names.is_empty() {
                return Err(schema(path, "missing field \"alphabet\""));
            }
            Alphabet::symbols(names)?
        }
    };
    let k = || -> Result<usize> { nat(field(m, "k", path)?, &format!("{path}.k")) };
    match kind.as_str() {
        "tree" => {
            let k = k()?;
            if k < 2 {
                return Err(schema(path, "k must be at least 2"));
            }
            let t = tree_from(&alphabet, k, field(m, "root", path)?, &format!("{path}.root"))?;
            Ok(Model::Tree(alphabet, t))
        }
        "almost-tree" => {
            let k = k()?;
            if k < 2 {
                return Err(schema(path, "k must be at least 2"));
            }
            let t = almost_from(&alphabet, k, field(m, "root", path)?, &format!("{path}.root"))?;
            Ok(Model::Almost(alphabet, t))
        }
        "lasso-word" => Ok(Model::Word(alphabet.clone(), word_from(&alphabet, m, path)?)),
        "lasso-treeseq" => {
            let k = k()?;
            if k < 2 {
                return Err(schema(path, "k must be at least 2"));
            }
            let dec = |key: &str| -> Result<Vec<InnerModel>> {
                arr(field(m, key, path)?, path)?
                    .iter()
                    .enumerate()
                    .map(|(i, e)| element_from(&alphabet, k, e, &format!("{path}.{key}[{i}]")))
                    .collect()
            };
            let stem = dec("stem")?;
            let cycle = dec("loop")?;
            let s = LassoTreeSeq::new(stem, cycle).map_err(|e| schema(path, e.to_string()))?;
            Ok(Model::TreeSeq(alphabet, s))
        }
        "regular-tree" => {
            let k = k()?;
            let start = nat(field(m, "start", path)?, &format!("{path}.start"))?;
            let vs = arr(field(m, "vertices", path)?, path)?;
            let vertices: Vec<RegVertex> = vs
                .iter()
                .enumerate()
                .map(|(i, v)| -> Result<RegVertex> {
                    let p = format!("{path}.vertices[{i}]");
                    let vm = obj(v, &p)?;
                    let letter =
                        letter_from(&alphabet, field(vm, "letter", &p)?, &format!("{p}.letter"))?;
                    let succ: Vec<usize> = arr(field(vm, "succ", &p)?, &p)?
                        .iter()
                        .map(|x| nat(x, &p))
                        .collect::<Result<_>>()?;
                    Ok(RegVertex { letter, succ })
                })
                .collect::<Result<_>>()?;
            let r =
                RegularTree::new(k, start, vertices).map_err(|e| schema(path, e.to_string()))?;
            Ok(Model::Regular(alphabet, r))
        }
        other => Err(schema(path, format!("unknown model kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Automata
// ---------------------------------------------------------------------------

fn buchi_value(a: &BuchiAutomaton) -> Value {
    json!({
        "alphabet": alphabet_value(&a.alphabet),
        "final": a.finals.iter().collect::<Vec<_>>(),
        "initial": a.initial,
        "kind": "buchi",
        "states": a.states,
        "transitions": a
            .transitions
            .iter()
            .map(|&(q, x, q2)| json!([q, letter_value(&a.alphabet, x), q2]))
            .collect::<Vec<_>>(),
    })
}

fn buchi_from(m: &Map<String, Value>, path: &str) -> Result<BuchiAutomaton> {
    let alphabet = alphabet_from(field(m, "alphabet", path)?, &format!("{path}.alphabet"))?;
    let states = nat(field(m, "states", path)?, path)?;
    let initial = nat(field(m, "initial", path)?, path)?;
    let finals: Vec<usize> = arr(field(m, "final", path)?, path)?
        .iter()
        .map(|x| nat(x, path))
        .collect::<Result<_>>()?;
    let transitions: Vec<(usize, Letter, usize)> = arr(field(m, "transitions", path)?, path)?
        .iter()
        .enumerate()
        .map(|(i, t)| -> Result<(usize, Letter, usize)> {
            let p = format!("{path}.transitions[{i}]");
            let xs = arr(t, &p)?;
            if xs.len() != 3 {
                return Err(schema(&p, "expected [state, letter, state]"));
            }
            Ok((
                nat(&xs[0], &p)?,
                letter_from(&alphabet, &xs[1], &p)?,
                nat(&xs[2], &p)?,
            ))
        })
        .collect::<Result<_>>()?;
    BuchiAutomaton::new(states, initial, finals, alphabet, transitions)
        .map_err(|e| schema(path, e.to_string()))
}

fn ftree_value(a: &TreeAutomaton) -> Value {
    let al = &a.alphabet;
    json!({
        "accepting": a.accepting.iter().collect::<Vec<_>>(),
        "almost": a
            .almost_root
            .iter()
            .map(|(q, x, cs)| json!([q, letter_value(al, *x), cs]))
            .collect::<Vec<_>>(),
        "alphabet": alphabet_value(al),
        "inner": a
            .inner
            .iter()
            .map(|(q, x, cs)| json!([q, letter_value(al, *x), cs]))
            .collect::<Vec<_>>(),
        "k": a.k,
        "kind": "ftree",
        "leaf": a
            .leaf
            .iter()
            .map(|&(q, x)| json!([q, letter_value(al, x)]))
            .collect::<Vec<_>>(),
        "mode": match a.mode {
            RootMode::Complete => "complete",
            RootMode::Almost => "almost",
        },
        "states": a.states,
    })
}

fn branching_from(
    alphabet: &Alphabet,
    m: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Vec<(usize, Letter, Vec<usize>)>> {
    arr(field(m, key, path)?, path)?
        .iter()
        .enumerate()
        .map(|(i, t)| -> Result<(usize, Letter, Vec<usize>)> {
            let p = format!("{path}.{key}[{i}]");
            let xs = arr(t, &p)?;
            if xs.len() != 3 {
                return Err(schema(&p, "expected [state, letter, [children]]"));
            }
            let cs: Vec<usize> = arr(&xs[2], &p)?
                .iter()
                .map(|x| nat(x, &p))
                .collect::<Result<_>>()?;
            Ok((nat(&xs[0], &p)?, letter_from(alphabet, &xs[1], &p)?, cs))
        })
        .collect()
}

fn ftree_from(m: &Map<String, Value>, path: &str) -> Result<TreeAutomaton> {
    let alphabet = alphabet_from(field(m, "alphabet", path)?, &format!("{path}.alphabet"))?;
    let k = nat(field(m, "k", path)?, path)?;
    let states = nat(field(m, "states", path)?, path)?;
    let mode = match string(field(m, "mode", path)?, path)?.as_str() {
        "complete" => RootMode::Complete,
        "almost" => RootMode::Almost,
        other => return Err(schema(path, format!("unknown mode {other:?}"))),
    };
    let leaf: Vec<(usize, Letter)> = arr(field(m, "leaf", path)?, path)?
        .iter()
        .enumerate()
        .map(|(i, t)| -> Result<(usize, Letter)> {
            let p = format!("{path}.leaf[{i}]");
            let xs = arr(t, &p)?;
            if xs.len() != 2 {
                return Err(schema(&p, "expected [state, letter]"));
            }
            Ok((nat(&xs[0], &p)?, letter_from(&alphabet, &xs[1], &p)?))
        })
        .collect::<Result<_>>()?;
    let inner = branching_from(&alphabet, m, "inner", path)?;
    let almost = branching_from(&alphabet, m, "almost", path)?;
    let accepting: Vec<usize> = arr(field(m, "accepting", path)?, path)?
        .iter()
        .map(|x| nat(x, path))
        .collect::<Result<_>>()?;
    TreeAutomaton::new(k, states, alphabet, mode, leaf, inner, almost, accepting)
        .map_err(|e| schema(path, e.to_string()))
}

fn rabin_value(a: &RabinTreeAutomaton) -> Value {
    json!({
        "alphabet": alphabet_value(&a.alphabet),
        "initial": a.initial,
        "k": a.k,
        "kind": "rabin",
        "pairs": a
            .pairs
            .iter()
            .map(|(l, u)| json!([l.iter().collect::<Vec<_>>(), u.iter().collect::<Vec<_>>()]))
            .collect::<Vec<_>>(),
        "states": a.states,
        "transitions": a
            .transitions
            .iter()
            .map(|(q, x, cs)| json!([q, letter_value(&a.alphabet, *x), cs]))
            .collect::<Vec<_>>(),
    })
}

fn rabin_from(m: &Map<String, Value>, path: &str) -> Result<RabinTreeAutomaton> {
    let alphabet = alphabet_from(field(m, "alphabet", path)?, &format!("{path}.alphabet"))?;
    let k = nat(field(m, "k", path)?, path)?;
    let states = nat(field(m, "states", path)?, path)?;
    let initial = nat(field(m, "initial", path)?, path)?;
    let transitions = branching_from(&alphabet, m, "transitions", path)?;
    let pairs: Vec<(std::collections::BTreeSet<usize>, std::collections::BTreeSet<usize>)> =
        arr(field(m, "pairs", path)?, path)?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = format!("{path}.pairs[{i}]");
                let xs = arr(v, &p)?;
                if xs.len() != 2 {
                    return Err(schema(&p, "expected [L, U]"));
                }
                let dec = |v: &Value| -> Result<std::collections::BTreeSet<usize>> {
                    arr(v, &p)?.iter().map(|x| nat(x, &p)).collect()
                };
                Ok((dec(&xs[0])?, dec(&xs[1])?))
            })
            .collect::<Result<_>>()?;
    RabinTreeAutomaton::new(k, states, initial, alphabet, transitions, pairs)
        .map_err(|e| schema(path, e.to_string()))
}

fn inner_automaton_value(a: &InnerAutomaton) -> Value {
    match a {
        InnerAutomaton::Word(b) => buchi_value(b),
        InnerAutomaton::Tree(t) => ftree_value(t),
        InnerAutomaton::Rabin(r) => rabin_value(r),
    }
}

fn temporalized_value(a: &TemporalizedAutomaton) -> Value {
    let inner: Map<String, Value> = a
        .inner
        .iter()
        .map(|(n, aut)| (n.clone(), inner_automaton_value(aut)))
        .collect();
    json!({
        "inner": Value::Object(inner),
        "kind": "temporalized",
        "outer": buchi_value(&a.outer),
    })
}

fn temporalized_from(m: &Map<String, Value>, path: &str) -> Result<TemporalizedAutomaton> {
    let outer_path = format!("{path}.outer");
    let outer = buchi_from(obj(field(m, "outer", path)?, &outer_path)?, &outer_path)?;
    let inner_obj = obj(field(m, "inner", path)?, path)?;
    let mut inner = BTreeMap::new();
    for (name, v) in inner_obj {
        let p = format!("{path}.inner.{name}");
        match automaton_from(v, &p)? {
            AnyAutomaton::Buchi(b) => inner.insert(name.clone(), InnerAutomaton::Word(b)),
            AnyAutomaton::Tree(t) => inner.insert(name.clone(), InnerAutomaton::Tree(t)),
            AnyAutomaton::Rabin(r) => inner.insert(name.clone(), InnerAutomaton::Rabin(r)),
            AnyAutomaton::Temporalized(_) => {
                return Err(schema(&p, "temporalized automata cannot nest"))
            }
        };
    }
    TemporalizedAutomaton::new(outer, inner).map_err(|e| schema(path, e.to_string()))
}

/// Serialize any automaton to canonical JSON.
pub fn serialize_automaton(a: &AnyAutomaton) -> String {
    let v = automaton_value(a);
    format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
}

/// The JSON value form of an automaton.
pub fn automaton_value(a: &AnyAutomaton) -> Value {
    match a {
        AnyAutomaton::Buchi(b) => buchi_value(b),
        AnyAutomaton::Tree(t) => ftree_value(t),
        AnyAutomaton::Rabin(r) => rabin_value(r),
        AnyAutomaton::Temporalized(t) => temporalized_value(t),
    }
}

/// Parse any automaton from JSON text, dispatching on its "kind".
pub fn parse_automaton(text: &str) -> Result<AnyAutomaton> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    automaton_from(&v, "$")
}

fn automaton_from(v: &Value, path: &str) -> Result<AnyAutomaton> {
    let m = obj(v, path)?;
    let kind = string(field(m, "kind", path)?, path)?;
    match kind.as_str() {
        "buchi" => Ok(AnyAutomaton::Buchi(buchi_from(m, path)?)),
        "ftree" => Ok(AnyAutomaton::Tree(ftree_from(m, path)?)),
        "rabin" => Ok(AnyAutomaton::Rabin(rabin_from(m, path)?)),
        "temporalized" => Ok(AnyAutomaton::Temporalized(temporalized_from(m, path)?)),
        other => Err(schema(path, format!("unknown automaton kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Graphs and certificates
// ---------------------------------------------------------------------------

/// Serialize a length graph to canonical JSON.
pub fn serialize_graph(g: &LengthGraph) -> String {
    let v = json!({
        "edges": g.edges.iter().map(|&(u, w)| json!([u, w])).collect::<Vec<_>>(),
        "nodes": g.nodes,
        "q1": g.source,
        "q2": g.target,
    });
    format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
}

/// Parse a length graph from JSON text.
pub fn parse_graph(text: &str) -> Result<LengthGraph> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| schema("$", format!("invalid JSON: {e}")))?;
    let m = obj(&v, "$")?;
    let nodes = nat(field(m, "nodes", "$")?, "$.nodes")?;
    let q1 = nat(field(m, "q1", "$")?, "$.q1")?;
    let q2 = nat(field(m, "q2", "$")?, "$.q2")?;
    let edges: Vec<(usize, usize)> = arr(field(m, "edges", "$")?, "$.edges")?
        .iter()
        .enumerate()
        .map(|(i, e)| -> Result<(usize, usize)> {
            let p = format!("$.edges[{i}]");
            let xs = arr(e, &p)?;
            if xs.len() != 2 {
                return Err(schema(&p, "expected [from, to]"));
            }
            Ok((nat(&xs[0], &p)?, nat(&xs[1], &p)?))
        })
        .collect::<Result<_>>()?;
    LengthGraph::new(nodes, edges, q1, q2).map_err(|e| schema("$", e.to_string()))
}

/// JSON value of an increasing-tree-sequence nonemptiness certificate.
pub fn certificate_value(c: &ItsCertificate) -> Value {
    let fact = |f: &HeightFact| {
        json!({
            "height_set": f.height_set.to_string(),
            "label": f.label,
            "position": f.position,
            "step": f.step,
        })
    };
    json!({
        "facts": c.facts.iter().map(fact).collect::<Vec<_>>(),
        "kind": "its-certificate",
        "labels": c.labels,
        "loop_index": c.loop_index,
        "states": c.states,
    })
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_buchi(a: &BuchiAutomaton, name: &str) -> String {
    let mut out = format!("digraph {name} {{\n  rankdir=LR;\n  init [shape=point];\n");
    for q in 0..a.states {
        let shape = if a.finals.contains(&q) {
            "doublecircle"
        } else {
            "circle"
        };
        out += &format!("  q{q} [shape={shape}, label=\"{q}\"];\n");
    }
    out += &format!("  init -> q{};\n", a.initial);
    for &(q, x, q2) in &a.transitions {
        out += &format!(
            "  q{q} -> q{q2} [label=\"{}\"];\n",
            dot_escape(&a.alphabet.letter_name(x))
        );
    }
    out += "}\n";
    out
}

fn dot_ftree(a: &TreeAutomaton) -> String {
    let mut out = String::from("digraph ftree {\n");
    for q in 0..a.states {
        let shape = if a.accepting.contains(&q) {
            "doublecircle"
        } else {
            "circle"
        };
        out += &format!("  q{q} [shape={shape}, label=\"{q}\"];\n");
    }
    for (i, &(q, x)) in a.leaf.iter().enumerate() {
        out += &format!(
            "  l{i} [shape=none, label=\"{}\"];\n  l{i} -> q{q};\n",
            dot_escape(&a.alphabet.letter_name(x))
        );
    }
    let hyper = |prefix: &str, set: &std::collections::BTreeSet<(usize, Letter, Vec<usize>)>,
                     out: &mut String| {
        for (i, (q, x, cs)) in set.iter().enumerate() {
            out.push_str(&format!(
                "  {prefix}{i} [shape=box, label=\"{}\"];\n  {prefix}{i} -> q{q};\n",
                dot_escape(&a.alphabet.letter_name(*x))
            ));
            for (d, c) in cs.iter().enumerate() {
                out.push_str(&format!("  q{c} -> {prefix}{i} [label=\"{d}\"];\n"));
            }
        }
    };
    hyper("t", &a.inner, &mut out);
    hyper("r", &a.almost_root, &mut out);
    out += "}\n";
    out
}

fn dot_rabin(a: &RabinTreeAutomaton) -> String {
    let mut out = String::from("digraph rabin {\n  init [shape=point];\n");
    for q in 0..a.states {
        out += &format!("  q{q} [shape=circle, label=\"{q}\"];\n");
    }
    out += &format!("  init -> q{};\n", a.initial);
    for (i, (q, x, cs)) in a.transitions.iter().enumerate() {
        out += &format!(
            "  t{i} [shape=box, label=\"{}\"];\n  q{q} -> t{i};\n",
            dot_escape(&a.alphabet.letter_name(*x))
        );
        for (d, c) in cs.iter().enumerate() {
            out += &format!("  t{i} -> q{c} [label=\"{d}\"];\n");
        }
    }
    for (i, (l, u)) in a.pairs.iter().enumerate() {
        out += &format!(
            "  // pair {i}: L={{{}}} U={{{}}}\n",
            l.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
            u.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        );
    }
    out += "}\n";
    out
}

/// DOT rendering of any automaton. Temporalized automata render their outer
/// graph with inner-automaton label names.
pub fn dot_automaton(a: &AnyAutomaton) -> String {
    match a {
        AnyAutomaton::Buchi(b) => dot_buchi(b, "buchi"),
        AnyAutomaton::Tree(t) => dot_ftree(t),
        AnyAutomaton::Rabin(r) => dot_rabin(r),
        AnyAutomaton::Temporalized(t) => dot_buchi(&t.outer, "temporalized"),
    }
}
