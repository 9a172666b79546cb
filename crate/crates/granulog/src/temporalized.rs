//! Temporalized automata: an outer Büchi automaton whose letters name inner
//! automata (Büchi, finite-tree, or Rabin-tree). Provides abstraction and
//! concretization, membership of lasso sequences, alphabet partitioning,
//! Boolean operations, combined emptiness, layered emptiness over increasing
//! tree sequences, and the atomic automata used by the monadic translation.

use std::collections::{BTreeMap, BTreeSet};

use crate::buchi::{
    buchi_boolean_capped, buchi_empty, buchi_member, buchi_reduce, constrained_lasso_run, BoolKind,
    BuchiAutomaton, DEFAULT_STATE_CAP,
};
use crate::error::{Error, Result};
use crate::ftree::{
    fta_boolean_capped, fta_empty, fta_height_set, fta_member, fta_project, AnyTree, RootMode,
    TreeAutomaton,
};
use crate::model::{Alphabet, InnerModel, LassoTreeSeq, Letter};
use crate::periodic::Eps;
use crate::rabin::{rabin_empty, rabin_project, RabinTreeAutomaton};

/// Capability descriptor for an inner automaton class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerClass {
    pub has_boolean: bool,
    pub has_emptiness: bool,
    pub has_membership: bool,
    pub has_height_set: bool,
}

/// An automaton usable as a transition label of the outer automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InnerAutomaton {
    Word(BuchiAutomaton),
    Tree(TreeAutomaton),
    Rabin(RabinTreeAutomaton),
}

impl InnerAutomaton {
    pub fn class(&self) -> InnerClass {
        match self {
            InnerAutomaton::Word(_) | InnerAutomaton::Tree(_) => InnerClass {
                has_boolean: true,
                has_emptiness: true,
                has_membership: true,
                has_height_set: true,
            },
            InnerAutomaton::Rabin(_) => InnerClass {
                has_boolean: false,
                has_emptiness: true,
                has_membership: true,
                has_height_set: false,
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            InnerAutomaton::Word(_) => "buchi",
            InnerAutomaton::Tree(_) => "ftree",
            InnerAutomaton::Rabin(_) => "rabin",
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            InnerAutomaton::Word(a) => &a.alphabet,
            InnerAutomaton::Tree(a) => &a.alphabet,
            InnerAutomaton::Rabin(a) => &a.alphabet,
        }
    }

    /// Class, arity and alphabet descriptor; all labels of a temporalized
    /// automaton must share it.
    fn shape(&self) -> (u8, usize, &Alphabet, Option<RootMode>) {
        match self {
            InnerAutomaton::Word(a) => (0, 0, &a.alphabet, None),
            InnerAutomaton::Tree(a) => (1, a.k, &a.alphabet, Some(a.mode)),
            InnerAutomaton::Rabin(a) => (2, a.k, &a.alphabet, None),
        }
    }

    /// Emptiness with a sequence-element witness where one is representable.
    /// Rabin labels report emptiness but yield no witness: their models are
    /// infinite trees, which are not sequence elements.
    pub fn is_empty(&self) -> Result<(bool, Option<InnerModel>)> {
        match self {
            InnerAutomaton::Word(a) => {
                let (e, w) = buchi_empty(a);
                Ok((e, w.map(InnerModel::Word)))
            }
            InnerAutomaton::Tree(a) => {
                let (e, w) = fta_empty(a);
                Ok((
                    e,
                    w.map(|t| match t {
                        AnyTree::Complete(t) => InnerModel::Tree(t),
                        AnyTree::Almost(t) => InnerModel::Almost(t),
                    }),
                ))
            }
            InnerAutomaton::Rabin(a) => Ok((rabin_empty(a)?.0, None)),
        }
    }

    /// Does this automaton accept the given sequence element?
    pub fn accepts(&self, m: &InnerModel) -> Result<bool> {
        match (self, m) {
            (InnerAutomaton::Word(a), InnerModel::Word(w)) => buchi_member(a, w),
            (InnerAutomaton::Tree(a), InnerModel::Tree(t)) => {
                fta_member(a, &AnyTree::Complete(t.clone()))
            }
            (InnerAutomaton::Tree(a), InnerModel::Almost(t)) => {
                fta_member(a, &AnyTree::Almost(t.clone()))
            }
            _ => Err(Error::KindMismatch(format!(
                "{} element against {} label",
                m.kind_name(),
                self.kind_name()
            ))),
        }
    }

    fn complement(&self, cap: usize) -> Result<InnerAutomaton> {
        match self {
            InnerAutomaton::Word(a) => Ok(InnerAutomaton::Word(buchi_boolean_capped(
                BoolKind::Complement,
                a,
                None,
                cap,
            )?)),
            InnerAutomaton::Tree(a) => Ok(InnerAutomaton::Tree(fta_boolean_capped(
                BoolKind::Complement,
                a,
                None,
                cap,
            )?)),
            InnerAutomaton::Rabin(_) => Err(Error::Capability("complement".into())),
        }
    }

    fn intersect(&self, other: &InnerAutomaton, cap: usize) -> Result<InnerAutomaton> {
        match (self, other) {
            (InnerAutomaton::Word(a), InnerAutomaton::Word(b)) => Ok(InnerAutomaton::Word(
                buchi_reduce(&buchi_boolean_capped(BoolKind::Intersect, a, Some(b), cap)?),
            )),
            (InnerAutomaton::Tree(a), InnerAutomaton::Tree(b)) => Ok(InnerAutomaton::Tree(
                fta_boolean_capped(BoolKind::Intersect, a, Some(b), cap)?,
            )),
            _ => Err(Error::Capability("intersection".into())),
        }
    }

    /// Existentially project away propositions (all classes support it).
    pub fn project(&self, drop: &BTreeSet<String>) -> Result<InnerAutomaton> {
        match self {
            InnerAutomaton::Word(a) => Ok(InnerAutomaton::Word(crate::buchi::buchi_project(
                a, drop,
            )?)),
            InnerAutomaton::Tree(a) => Ok(InnerAutomaton::Tree(fta_project(a, drop)?)),
            InnerAutomaton::Rabin(a) => Ok(InnerAutomaton::Rabin(rabin_project(a, drop)?)),
        }
    }
}

/// An outer Büchi automaton over a symbol alphabet whose symbols name the
/// entries of an inner automaton table.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalizedAutomaton {
    pub outer: BuchiAutomaton,
    pub inner: BTreeMap<String, InnerAutomaton>,
}

impl TemporalizedAutomaton {
    pub fn new(outer: BuchiAutomaton, inner: BTreeMap<String, InnerAutomaton>) -> Result<Self> {
        let names = match &outer.alphabet {
            Alphabet::Symbols(names) => names.clone(),
            Alphabet::Props(_) => {
                return Err(Error::Invalid(
                    "outer alphabet must be a table of inner automaton names".into(),
                ))
            }
        };
        for n in &names {
            if !inner.contains_key(n) {
                return Err(Error::Invalid(format!("no inner automaton named {n:?}")));
            }
        }
        for n in inner.keys() {
            if !names.contains(n) {
                return Err(Error::Invalid(format!(
                    "inner automaton {n:?} is not an outer symbol"
                )));
            }
        }
        let mut shapes = inner.values().map(InnerAutomaton::shape);
        if let Some(first) = shapes.next() {
            for s in shapes {
                if s != first {
                    return Err(Error::Mismatch(
                        "inner automata must share class, arity and alphabet".into(),
                    ));
                }
            }
        }
        Ok(TemporalizedAutomaton { outer, inner })
    }

    /// The common capability descriptor of the label class.
    pub fn inner_class(&self) -> Option<InnerClass> {
        self.inner.values().next().map(InnerAutomaton::class)
    }

    fn label(&self, x: Letter) -> &InnerAutomaton {
        let name = self.outer.alphabet.letter_name(x);
        &self.inner[&name]
    }
}

/// Forget the inner automata: the outer automaton over label names.
pub fn abstraction(a: &TemporalizedAutomaton) -> BuchiAutomaton {
    a.outer.clone()
}

/// Attach an inner table to a Büchi automaton over label names.
pub fn concretization(
    outer: BuchiAutomaton,
    inner: BTreeMap<String, InnerAutomaton>,
) -> Result<TemporalizedAutomaton> {
    TemporalizedAutomaton::new(outer, inner)
}

/// Does the automaton accept the given ultimately periodic sequence?
///
/// Position classes of `m` are relabeled by the bit vector of inner
/// memberships, then the outer automaton is searched for an accepting run
/// over any label word compatible with that relabeling.
pub fn t_member(a: &TemporalizedAutomaton, m: &LassoTreeSeq) -> Result<bool> {
    let classes = m.period_len();
    let letters = a.outer.alphabet.len();
    let mut accepted = vec![vec![false; letters]; classes];
    for (i, row) in accepted.iter_mut().enumerate() {
        for (x, cell) in row.iter_mut().enumerate() {
            *cell = a.label(x).accepts(m.at(i))?;
        }
    }
    Ok(constrained_lasso_run(
        &a.outer,
        m.stem.len(),
        classes,
        &|i, x| accepted[i][x],
    ))
}

/// The distinct inner automata among the labels, with a representative name
/// each, and the map from outer letters to indices in that list.
fn distinct_labels(a: &TemporalizedAutomaton) -> (Vec<(String, InnerAutomaton)>, Vec<usize>) {
    let mut entries: Vec<(String, InnerAutomaton)> = Vec::new();
    let mut index_of = Vec::new();
    for x in a.outer.alphabet.letters() {
        let label = a.label(x);
        let idx = match entries.iter().position(|(_, e)| e == label) {
            Some(i) => i,
            None => {
                entries.push((a.outer.alphabet.letter_name(x), label.clone()));
                entries.len() - 1
            }
        };
        index_of.push(idx);
    }
    (entries, index_of)
}

struct Refinement {
    /// Cell names in letter order of the refined alphabet.
    names: Vec<String>,
    table: BTreeMap<String, InnerAutomaton>,
    /// For each entry of the input list, the refined letters positive on it.
    positive: Vec<Vec<Letter>>,
}

/// All nonempty sign-pattern intersections of the given automata. The cells
/// are pairwise disjoint and cover the whole inner model space; each input
/// language is the union of its positive cells.
fn refine(entries: &[(String, InnerAutomaton)], cap: usize) -> Result<Refinement> {
    let d = entries.len();
    if d > 16 {
        return Err(Error::ResourceCap("distinct inner automata".into(), 16));
    }
    let mut complements = Vec::with_capacity(d);
    for (_, e) in entries {
        complements.push(e.complement(cap)?);
    }
    let mut names = Vec::new();
    let mut table = BTreeMap::new();
    let mut positive = vec![Vec::new(); d];
    for pattern in 0..(1usize << d) {
        let mut cell: Option<InnerAutomaton> = None;
        for i in 0..d {
            let factor = if pattern & (1 << i) != 0 {
                &entries[i].1
            } else {
                &complements[i]
            };
            cell = Some(match cell {
                None => factor.clone(),
                Some(c) => c.intersect(factor, cap)?,
            });
        }
        let cell = match cell {
            Some(c) => c,
            None => continue,
        };
        if cell.is_empty()?.0 {
            continue;
        }
        let name: String = entries
            .iter()
            .enumerate()
            .map(|(i, (n, _))| {
                let sign = if pattern & (1 << i) != 0 { '+' } else { '-' };
                format!("{sign}{n}")
            })
            .collect();
        let letter = names.len();
        for (i, pos) in positive.iter_mut().enumerate() {
            if pattern & (1 << i) != 0 {
                pos.push(letter);
            }
        }
        names.push(name.clone());
        table.insert(name, cell);
    }
    Ok(Refinement {
        names,
        table,
        positive,
    })
}

/// Rebuild an outer automaton over the refined alphabet: each transition is
/// replaced by one per refined letter positive on its original label.
fn reletter_outer(
    outer: &BuchiAutomaton,
    alphabet: &Alphabet,
    index_of: &[usize],
    positive: &[Vec<Letter>],
) -> Result<BuchiAutomaton> {
    let mut transitions = BTreeSet::new();
    for &(q, x, q2) in &outer.transitions {
        for &cell in &positive[index_of[x]] {
            transitions.insert((q, cell, q2));
        }
    }
    BuchiAutomaton::new(
        outer.states,
        outer.initial,
        outer.finals.clone(),
        alphabet.clone(),
        transitions,
    )
}

/// Replace the label table by a partition of the inner model space: the new
/// labels are the nonempty sign-pattern intersections of the old ones, and
/// each transition carries every cell contained in its original label. The
/// recognized language is unchanged; the new labels are pairwise disjoint
/// and jointly exhaustive.
pub fn partition_alphabet(a: &TemporalizedAutomaton) -> Result<TemporalizedAutomaton> {
    partition_alphabet_capped(a, DEFAULT_STATE_CAP)
}

pub fn partition_alphabet_capped(
    a: &TemporalizedAutomaton,
    cap: usize,
) -> Result<TemporalizedAutomaton> {
    if let Some(c) = a.inner_class() {
        if !c.has_boolean || !c.has_emptiness {
            return Err(Error::Capability("alphabet partitioning".into()));
        }
    }
    let (entries, index_of) = distinct_labels(a);
    let refinement = refine(&entries, cap)?;
    let alphabet = Alphabet::symbols(refinement.names.clone())?;
    let outer = reletter_outer(&a.outer, &alphabet, &index_of, &refinement.positive)?;
    TemporalizedAutomaton::new(outer, refinement.table)
}

/// Boolean operations on temporalized languages.
///
/// Union merges the two tables under distinct names and takes the outer
/// union. Complement first partitions the alphabet, then complements the
/// outer automaton: over a partitioned alphabet, label words and models
/// correspond one-to-one. Intersection refines both automata to a common
/// partitioned alphabet and intersects the outers there.
pub fn t_boolean(
    kind: BoolKind,
    a: &TemporalizedAutomaton,
    b: Option<&TemporalizedAutomaton>,
) -> Result<TemporalizedAutomaton> {
    t_boolean_capped(kind, a, b, DEFAULT_STATE_CAP)
}

pub fn t_boolean_capped(
    kind: BoolKind,
    a: &TemporalizedAutomaton,
    b: Option<&TemporalizedAutomaton>,
    cap: usize,
) -> Result<TemporalizedAutomaton> {
    match kind {
        BoolKind::Union => {
            let b = b.ok_or_else(|| Error::Invalid("union needs two operands".into()))?;
            t_union(a, b)
        }
        BoolKind::Complement => {
            if b.is_some() {
                return Err(Error::Invalid("complement takes one operand".into()));
            }
            let p = partition_alphabet_capped(a, cap)?;
            let outer = buchi_boolean_capped(BoolKind::Complement, &p.outer, None, cap)?;
            TemporalizedAutomaton::new(outer, p.inner)
        }
        BoolKind::Intersect => {
            let b = b.ok_or_else(|| Error::Invalid("intersect needs two operands".into()))?;
            t_intersect(a, b, cap)
        }
    }
}

fn t_union(
    a: &TemporalizedAutomaton,
    b: &TemporalizedAutomaton,
) -> Result<TemporalizedAutomaton> {
    let names = |t: &TemporalizedAutomaton, prefix: &str| -> Vec<String> {
        t.outer
            .alphabet
            .letters()
            .map(|x| format!("{prefix}{}", t.outer.alphabet.letter_name(x)))
            .collect()
    };
    let names_a = names(a, "0:");
    let names_b = names(b, "1:");
    let off_letter = names_a.len();
    let alphabet = Alphabet::symbols(names_a.iter().chain(names_b.iter()).cloned())?;
    // fresh initial 0, copies of the A outer at 1.. and the B outer after it
    let oa = 1;
    let ob = 1 + a.outer.states;
    let mut transitions = BTreeSet::new();
    for &(q, x, q2) in &a.outer.transitions {
        transitions.insert((q + oa, x, q2 + oa));
        if q == a.outer.initial {
            transitions.insert((0, x, q2 + oa));
        }
    }
    for &(q, x, q2) in &b.outer.transitions {
        transitions.insert((q + ob, x + off_letter, q2 + ob));
        if q == b.outer.initial {
            transitions.insert((0, x + off_letter, q2 + ob));
        }
    }
    let finals: BTreeSet<usize> = a
        .outer
        .finals
        .iter()
        .map(|f| f + oa)
        .chain(b.outer.finals.iter().map(|f| f + ob))
        .collect();
    let outer = BuchiAutomaton::new(
        1 + a.outer.states + b.outer.states,
        0,
        finals,
        alphabet,
        transitions,
    )?;
    let mut table = BTreeMap::new();
    for (name, label) in a.inner.iter() {
        table.insert(format!("0:{name}"), label.clone());
    }
    for (name, label) in b.inner.iter() {
        table.insert(format!("1:{name}"), label.clone());
    }
    TemporalizedAutomaton::new(outer, table)
}

fn t_intersect(
    a: &TemporalizedAutomaton,
    b: &TemporalizedAutomaton,
    cap: usize,
) -> Result<TemporalizedAutomaton> {
    for t in [a, b] {
        if let Some(c) = t.inner_class() {
            if !c.has_boolean || !c.has_emptiness {
                return Err(Error::Capability("intersection".into()));
            }
        }
    }
    // common refinement over the distinct labels of both automata; each
    // outer is rebuilt over the shared partitioned alphabet, where label
    // words and models correspond one-to-one, so the outer product decides
    // the model intersection
    let (entries_a, index_a) = distinct_labels(a);
    let (entries_b, index_b) = distinct_labels(b);
    let mut entries = entries_a;
    let index_b: Vec<usize> = index_b
        .into_iter()
        .map(|i| {
            let (name, label) = &entries_b[i];
            match entries.iter().position(|(_, e)| e == label) {
                Some(p) => p,
                None => {
                    entries.push((name.clone(), label.clone()));
                    entries.len() - 1
                }
            }
        })
        .collect();
    let refinement = refine(&entries, cap)?;
    let alphabet = Alphabet::symbols(refinement.names.clone())?;
    let outer_a = reletter_outer(&a.outer, &alphabet, &index_a, &refinement.positive)?;
    let outer_b = reletter_outer(&b.outer, &alphabet, &index_b, &refinement.positive)?;
    let outer = buchi_reduce(&buchi_boolean_capped(
        BoolKind::Intersect,
        &outer_a,
        Some(&outer_b),
        cap,
    )?);
    // reduction may drop letters from use but the alphabet is unchanged
    TemporalizedAutomaton::new(outer, refinement.table)
}

/// Combined emptiness: check the abstraction, prune transitions whose label
/// has an empty inner language, and recheck. When the language is nonempty
/// and every label on the witness lasso has a representable inner witness,
/// a sequence witness is assembled from them.
pub fn t_empty(a: &TemporalizedAutomaton) -> Result<(bool, Option<LassoTreeSeq>)> {
    if buchi_empty(&a.outer).0 {
        return Ok((true, None));
    }
    let mut witness_of: BTreeMap<Letter, Option<InnerModel>> = BTreeMap::new();
    let mut dead: BTreeSet<Letter> = BTreeSet::new();
    for x in a.outer.alphabet.letters() {
        let (e, w) = a.label(x).is_empty()?;
        if e {
            dead.insert(x);
        } else {
            witness_of.insert(x, w);
        }
    }
    let pruned = BuchiAutomaton::new(
        a.outer.states,
        a.outer.initial,
        a.outer.finals.clone(),
        a.outer.alphabet.clone(),
        a.outer
            .transitions
            .iter()
            .filter(|(_, x, _)| !dead.contains(x))
            .copied(),
    )?;
    let (empty, lasso) = buchi_empty(&pruned);
    if empty {
        return Ok((true, None));
    }
    let lasso = lasso.expect("nonempty automaton yields a lasso");
    let element = |x: &Letter| witness_of[x].clone();
    let stem: Option<Vec<InnerModel>> = lasso.stem.iter().map(element).collect();
    let cycle: Option<Vec<InnerModel>> = lasso.cycle.iter().map(element).collect();
    let witness = match (stem, cycle) {
        (Some(stem), Some(cycle)) => Some(LassoTreeSeq::new(stem, cycle)?),
        _ => None,
    };
    Ok((false, witness))
}

/// Project every inner automaton; the outer automaton is unchanged.
pub fn t_project(
    a: &TemporalizedAutomaton,
    drop: &BTreeSet<String>,
) -> Result<TemporalizedAutomaton> {
    let mut table = BTreeMap::new();
    for (name, label) in &a.inner {
        table.insert(name.clone(), label.project(drop)?);
    }
    TemporalizedAutomaton::new(a.outer.clone(), table)
}

/// One height-set fact supporting a nonemptiness certificate: position
/// `position` of the lasso carries label `label`, whose height set contains
/// `position + y·step` for all `y ≥ 0` (`step = 0` means the single height).
#[derive(Debug, Clone)]
pub struct HeightFact {
    pub position: usize,
    pub label: String,
    pub height_set: Eps,
    pub step: u64,
}

/// A lasso of outer states whose labels accept trees at every height the
/// increasing sequence demands.
#[derive(Debug, Clone)]
pub struct ItsCertificate {
    /// The distinct stem states q_0 … q_m.
    pub states: Vec<usize>,
    /// Label names of the transitions q_0→q_1, …, q_{m-1}→q_m, q_m→q_j.
    pub labels: Vec<String>,
    /// The loop-back index j (the target state q_j is accepting).
    pub loop_index: usize,
    pub facts: Vec<HeightFact>,
}

/// Emptiness of the language restricted to increasing k-ary tree sequences
/// (the i-th element is an almost k-ary tree of height i).
///
/// Searches for a lasso q_0 … q_m with distinct states, a loop-back
/// transition to an accepting q_j, and labels whose height sets contain the
/// exact height at every stem position and the whole arithmetic progression
/// {i + y·(m−j+1)} at every loop position.
pub fn its_empty(a: &TemporalizedAutomaton) -> Result<(bool, Option<ItsCertificate>)> {
    its_empty_search(a, false)
}

/// Like [`its_empty`] but also tries lassos that revisit states, up to twice
/// the state count — a safety net around the distinct-state search.
pub fn its_empty_exhaustive(a: &TemporalizedAutomaton) -> Result<(bool, Option<ItsCertificate>)> {
    its_empty_search(a, true)
}

fn its_empty_search(
    a: &TemporalizedAutomaton,
    allow_repeats: bool,
) -> Result<(bool, Option<ItsCertificate>)> {
    let mut heights = Vec::new();
    for x in a.outer.alphabet.letters() {
        match a.label(x) {
            InnerAutomaton::Tree(t) if t.mode == RootMode::Almost => {
                heights.push(fta_height_set(t));
            }
            label => {
                return Err(Error::KindMismatch(format!(
                    "layered emptiness needs almost-k-ary tree labels, got {}",
                    label.kind_name()
                )))
            }
        }
    }
    let outer = &a.outer;
    let max_states = if allow_repeats {
        2 * outer.states
    } else {
        outer.states
    };
    let mut states = vec![outer.initial];
    let mut letters: Vec<Letter> = Vec::new();
    let mut on_path = vec![false; outer.states];
    on_path[outer.initial] = true;
    let found = search_lasso(
        outer,
        &heights,
        allow_repeats,
        max_states,
        &mut states,
        &mut letters,
        &mut on_path,
    );
    match found {
        None => Ok((true, None)),
        Some((states, letters, j)) => {
            let l = (letters.len() - j) as u64;
            let facts = letters
                .iter()
                .enumerate()
                .map(|(i, &x)| HeightFact {
                    position: i,
                    label: outer.alphabet.letter_name(x),
                    height_set: heights[x].clone(),
                    step: if i < j { 0 } else { l },
                })
                .collect();
            let labels = letters
                .iter()
                .map(|&x| outer.alphabet.letter_name(x))
                .collect();
            Ok((
                false,
                Some(ItsCertificate {
                    states,
                    labels,
                    loop_index: j,
                    facts,
                }),
            ))
        }
    }
}

/// Do the labels x_0 … x_m with loop-back index j satisfy the height
/// conditions of an increasing tree sequence?
fn heights_admit(heights: &[Eps], letters: &[Letter], j: usize) -> bool {
    let m = letters.len() - 1;
    let l = (m - j + 1) as u64;
    letters.iter().enumerate().all(|(i, &x)| {
        if i < j {
            heights[x].contains(i as u64)
        } else {
            heights[x].contains_progression(i as u64, l)
        }
    })
}

fn search_lasso(
    outer: &BuchiAutomaton,
    heights: &[Eps],
    allow_repeats: bool,
    max_states: usize,
    states: &mut Vec<usize>,
    letters: &mut Vec<Letter>,
    on_path: &mut Vec<bool>,
) -> Option<(Vec<usize>, Vec<Letter>, usize)> {
    let cur = *states.last().unwrap();
    let from: Vec<(Letter, usize)> = outer
        .transitions
        .iter()
        .filter(|&&(q, _, _)| q == cur)
        .map(|&(_, x, q2)| (x, q2))
        .collect();
    for &(x, q2) in &from {
        if !outer.finals.contains(&q2) {
            continue;
        }
        for (j, &qj) in states.iter().enumerate() {
            if qj != q2 {
                continue;
            }
            letters.push(x);
            let ok = heights_admit(heights, letters, j);
            if ok {
                let found = (states.clone(), letters.clone(), j);
                letters.pop();
                return Some(found);
            }
            letters.pop();
        }
    }
    for &(x, q2) in &from {
        if states.len() >= max_states || (!allow_repeats && on_path[q2]) {
            continue;
        }
        let was_on = on_path[q2];
        states.push(q2);
        letters.push(x);
        on_path[q2] = true;
        let found = search_lasso(
            outer,
            heights,
            allow_repeats,
            max_states,
            states,
            letters,
            on_path,
        );
        on_path[q2] = was_on;
        letters.pop();
        states.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Which atomic relation an automaton should encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicKind {
    /// X_i ⊆ X_j over the whole sequence.
    Subset,
    /// x ∈ X_i with its m-th child in X_j, inside a single tree.
    Proj,
    /// The root of some tree in X_i and the root of the next tree in X_j.
    Succ,
}

/// Which inner automaton class the atomic automata should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicInner {
    Rabin,
    Tree(RootMode),
}

/// The temporalized automaton for an atomic relation over {0,1}^n-labeled
/// k-ary tree sequences; set variables are propositions `x1 … xn`.
pub fn mso_atomic(
    kind: AtomicKind,
    i: usize,
    j: usize,
    m: Option<usize>,
    k: usize,
    n: usize,
    inner: AtomicInner,
) -> Result<TemporalizedAutomaton> {
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::Invalid(format!(
            "variable indices {i},{j} out of range 1..={n}"
        )));
    }
    if k < 2 {
        return Err(Error::Invalid("tree arity must be at least 2".into()));
    }
    match (kind, m) {
        (AtomicKind::Proj, None) => {
            return Err(Error::Invalid("projection needs a child direction".into()))
        }
        (AtomicKind::Proj, Some(d)) if d >= k => {
            return Err(Error::Invalid(format!(
                "child direction {d} out of range 0..{k}"
            )))
        }
        (AtomicKind::Subset | AtomicKind::Succ, Some(_)) => {
            return Err(Error::Invalid(
                "child direction only applies to projection".into(),
            ))
        }
        _ => {}
    }
    let alpha = Alphabet::props((1..=n).map(|v| format!("x{v}")))?;
    let ei = 1usize << (i - 1);
    let ej = 1usize << (j - 1);
    match kind {
        AtomicKind::Subset => {
            let sub = atomic_filter(k, &alpha, inner, &|a| a & ei == 0 || a & ej != 0)?;
            let outer = BuchiAutomaton::new(
                1,
                0,
                [0],
                Alphabet::symbols(["sub"])?,
                [(0, 0, 0)],
            )?;
            TemporalizedAutomaton::new(outer, BTreeMap::from([("sub".into(), sub)]))
        }
        AtomicKind::Proj => {
            let m = m.unwrap();
            let pair = atomic_child_pair(k, &alpha, inner, ei, ej, m)?;
            let zeta = atomic_filter(k, &alpha, inner, &|a| a == 0)?;
            // ζ* pair ζ^ω
            let outer = BuchiAutomaton::new(
                2,
                0,
                [1],
                Alphabet::symbols(["pair", "zeta"])?,
                [(0, 1, 0), (0, 0, 1), (1, 1, 1)],
            )?;
            TemporalizedAutomaton::new(
                outer,
                BTreeMap::from([("pair".into(), pair), ("zeta".into(), zeta)]),
            )
        }
        AtomicKind::Succ => {
            let first = atomic_mark(k, &alpha, inner, ei)?;
            let second = atomic_mark(k, &alpha, inner, ej)?;
            let zeta = atomic_filter(k, &alpha, inner, &|a| a == 0)?;
            // ζ* first second ζ^ω
            let outer = BuchiAutomaton::new(
                3,
                0,
                [2],
                Alphabet::symbols(["first", "second", "zeta"])?,
                [(0, 2, 0), (0, 0, 1), (1, 1, 2), (2, 2, 2)],
            )?;
            TemporalizedAutomaton::new(
                outer,
                BTreeMap::from([
                    ("first".into(), first),
                    ("second".into(), second),
                    ("zeta".into(), zeta),
                ]),
            )
        }
    }
}

/// Inner automaton accepting exactly the trees all of whose labels satisfy
/// the predicate.
fn atomic_filter(
    k: usize,
    alpha: &Alphabet,
    inner: AtomicInner,
    good: &dyn Fn(Letter) -> bool,
) -> Result<InnerAutomaton> {
    let letters: Vec<Letter> = alpha.letters().filter(|&a| good(a)).collect();
    match inner {
        AtomicInner::Rabin => {
            let transitions = letters.iter().map(|&a| (0, a, vec![0; k]));
            Ok(InnerAutomaton::Rabin(RabinTreeAutomaton::new(
                k,
                1,
                0,
                alpha.clone(),
                transitions,
                vec![(BTreeSet::new(), BTreeSet::from([0]))],
            )?))
        }
        AtomicInner::Tree(mode) => {
            let leaf = letters.iter().map(|&a| (0, a));
            let node = letters.iter().map(|&a| (0, a, vec![0; k]));
            let almost: Vec<_> = if mode == RootMode::Almost {
                letters.iter().map(|&a| (0, a, vec![0; k - 1])).collect()
            } else {
                Vec::new()
            };
            Ok(InnerAutomaton::Tree(TreeAutomaton::new(
                k,
                1,
                alpha.clone(),
                mode,
                leaf,
                node,
                almost,
                [0],
            )?))
        }
    }
}

/// Inner automaton accepting trees whose root carries exactly `mark` and
/// every other node 0.
fn atomic_mark(
    k: usize,
    alpha: &Alphabet,
    inner: AtomicInner,
    mark: Letter,
) -> Result<InnerAutomaton> {
    match inner {
        AtomicInner::Rabin => {
            // state 0 = root, state 1 = zero region
            let transitions = vec![(0, mark, vec![1; k]), (1, 0, vec![1; k])];
            Ok(InnerAutomaton::Rabin(RabinTreeAutomaton::new(
                k,
                2,
                0,
                alpha.clone(),
                transitions,
                vec![(BTreeSet::new(), BTreeSet::from([1]))],
            )?))
        }
        AtomicInner::Tree(mode) => {
            // bottom-up: state 0 = all-zero subtree, state 1 = marked root
            let leaf = [(0, 0), (1, mark)];
            let node = [(0, 0, vec![0; k]), (1, mark, vec![0; k])];
            let almost: Vec<_> = if mode == RootMode::Almost {
                vec![(1, mark, vec![0; k - 1])]
            } else {
                Vec::new()
            };
            Ok(InnerAutomaton::Tree(TreeAutomaton::new(
                k,
                2,
                alpha.clone(),
                mode,
                leaf,
                node,
                almost,
                [1],
            )?))
        }
    }
}

/// Inner automaton accepting trees with exactly one node marked `mark_x`
/// whose child in direction `m` is marked `mark_y`, all other nodes 0.
fn atomic_child_pair(
    k: usize,
    alpha: &Alphabet,
    inner: AtomicInner,
    mark_x: Letter,
    mark_y: Letter,
    m: usize,
) -> Result<InnerAutomaton> {
    match inner {
        AtomicInner::Rabin => {
            // R=0 searches downward for x, Y=1 holds y, Z=2 is the zero region
            let mut transitions = Vec::new();
            let mut place = vec![2; k];
            place[m] = 1;
            transitions.push((0, mark_x, place));
            for d in 0..k {
                let mut cs = vec![2; k];
                cs[d] = 0;
                transitions.push((0, 0, cs));
            }
            transitions.push((1, mark_y, vec![2; k]));
            transitions.push((2, 0, vec![2; k]));
            Ok(InnerAutomaton::Rabin(RabinTreeAutomaton::new(
                k,
                3,
                0,
                alpha.clone(),
                transitions,
                vec![(BTreeSet::from([0, 1]), BTreeSet::from([2]))],
            )?))
        }
        AtomicInner::Tree(mode) => {
            // bottom-up: Z=0 all-zero, Y=1 marked y over zeros, R=2 the
            // subtree containing the x node
            let leaf = [(0, 0), (1, mark_y)];
            let mut node = vec![(0, 0, vec![0; k]), (1, mark_y, vec![0; k])];
            let mut place = vec![0; k];
            place[m] = 1;
            node.push((2, mark_x, place));
            for d in 0..k {
                let mut cs = vec![0; k];
                cs[d] = 2;
                node.push((2, 0, cs));
            }
            let mut almost = Vec::new();
            if mode == RootMode::Almost {
                // an almost root keeps directions 1..k only
                if m >= 1 {
                    let mut place = vec![0; k - 1];
                    place[m - 1] = 1;
                    almost.push((2, mark_x, place));
                }
                for d in 0..k - 1 {
                    let mut cs = vec![0; k - 1];
                    cs[d] = 2;
                    almost.push((2, 0, cs));
                }
            }
            Ok(InnerAutomaton::Tree(TreeAutomaton::new(
                k,
                3,
                alpha.clone(),
                mode,
                leaf,
                node,
                almost,
                [2],
            )?))
        }
    }
}
