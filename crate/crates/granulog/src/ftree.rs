//! Bottom-up automata on finite complete k-ary trees, optionally with an
//! almost-root combination step (root of degree k-1). Supports membership,
//! emptiness, Boolean closure via determinization, projection, and the
//! accepted-height-set computation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{Alphabet, AlmostKTree, FiniteKTree, Letter};
use crate::periodic::Eps;

/// Default cap on states generated by determinization.
pub const DEFAULT_DET_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMode {
    Complete,
    Almost,
}

pub use crate::buchi::BoolKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAutomaton {
    pub k: usize,
    pub states: usize,
    pub alphabet: Alphabet,
    pub mode: RootMode,
    /// (state, letter) assignable to leaves.
    pub leaf: BTreeSet<(usize, Letter)>,
    /// (state, letter, k child states), children listed left to right.
    pub inner: BTreeSet<(usize, Letter, Vec<usize>)>,
    /// (state, letter, k-1 child states); only used at an almost root.
    pub almost_root: BTreeSet<(usize, Letter, Vec<usize>)>,
    pub accepting: BTreeSet<usize>,
}

impl TreeAutomaton {
    pub fn new(
        k: usize,
        states: usize,
        alphabet: Alphabet,
        mode: RootMode,
        leaf: impl IntoIterator<Item = (usize, Letter)>,
        inner: impl IntoIterator<Item = (usize, Letter, Vec<usize>)>,
        almost_root: impl IntoIterator<Item = (usize, Letter, Vec<usize>)>,
        accepting: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Invalid("tree arity must be at least 2".into()));
        }
        let leaf: BTreeSet<_> = leaf.into_iter().collect();
        let inner: BTreeSet<_> = inner.into_iter().collect();
        let almost_root: BTreeSet<_> = almost_root.into_iter().collect();
        let accepting: BTreeSet<usize> = accepting.into_iter().collect();
        for &(q, a) in &leaf {
            if q >= states || a >= alphabet.len() {
                return Err(Error::Invalid("leaf transition out of range".into()));
            }
        }
        for (set, arity, what) in [(&inner, k, "inner"), (&almost_root, k - 1, "almost-root")] {
            for (q, a, cs) in set.iter() {
                if cs.len() != arity {
                    return Err(Error::Invalid(format!(
                        "{what} transition has arity {} (expected {arity})",
                        cs.len()
                    )));
                }
                if *q >= states || *a >= alphabet.len() || cs.iter().any(|&c| c >= states) {
                    return Err(Error::Invalid(format!("{what} transition out of range")));
                }
            }
        }
        if accepting.iter().any(|&q| q >= states) {
            return Err(Error::Invalid("accepting state out of range".into()));
        }
        if mode == RootMode::Complete && !almost_root.is_empty() {
            return Err(Error::Invalid(
                "almost-root transitions require almost mode".into(),
            ));
        }
        Ok(TreeAutomaton {
            k,
            states,
            alphabet,
            mode,
            leaf,
            inner,
            almost_root,
            accepting,
        })
    }

    /// Universal automaton: one accepting state, every transition present.
    pub fn universal(k: usize, alphabet: Alphabet, mode: RootMode) -> Self {
        let leaf: Vec<(usize, Letter)> = alphabet.letters().map(|a| (0, a)).collect();
        let inner: Vec<_> = alphabet.letters().map(|a| (0, a, vec![0; k])).collect();
        let almost: Vec<_> = if mode == RootMode::Almost {
            alphabet.letters().map(|a| (0, a, vec![0; k - 1])).collect()
        } else {
            Vec::new()
        };
        TreeAutomaton::new(k, 1, alphabet, mode, leaf, inner, almost, [0]).unwrap()
    }

    /// States assignable to a complete subtree, bottom-up.
    fn subtree_states(&self, t: &FiniteKTree) -> BTreeSet<usize> {
        if t.children.is_empty() {
            return self
                .leaf
                .iter()
                .filter(|&&(_, a)| a == t.letter)
                .map(|&(q, _)| q)
                .collect();
        }
        let child_sets: Vec<BTreeSet<usize>> =
            t.children.iter().map(|c| self.subtree_states(c)).collect();
        self.inner
            .iter()
            .filter(|(_, a, cs)| {
                *a == t.letter && cs.iter().zip(&child_sets).all(|(c, s)| s.contains(c))
            })
            .map(|(q, _, _)| *q)
            .collect()
    }

    fn almost_root_states(&self, t: &AlmostKTree) -> BTreeSet<usize> {
        if t.children.is_empty() {
            return self
                .leaf
                .iter()
                .filter(|&&(_, a)| a == t.letter)
                .map(|&(q, _)| q)
                .collect();
        }
        let child_sets: Vec<BTreeSet<usize>> =
            t.children.iter().map(|c| self.subtree_states(c)).collect();
        self.almost_root
            .iter()
            .filter(|(_, a, cs)| {
                *a == t.letter && cs.iter().zip(&child_sets).all(|(c, s)| s.contains(c))
            })
            .map(|(q, _, _)| *q)
            .collect()
    }
}

/// Either flavor of input tree.
#[derive(Debug, Clone)]
pub enum AnyTree {
    Complete(FiniteKTree),
    Almost(AlmostKTree),
}

impl AnyTree {
    pub fn k(&self) -> usize {
        match self {
            AnyTree::Complete(t) => t.k,
            AnyTree::Almost(t) => t.k,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            AnyTree::Complete(t) => t.height(),
            AnyTree::Almost(t) => t.height(),
        }
    }
}

pub fn fta_member(a: &TreeAutomaton, t: &AnyTree) -> Result<bool> {
    if t.k() != a.k {
        return Err(Error::Mismatch(format!(
            "tree arity {} vs automaton arity {}",
            t.k(),
            a.k
        )));
    }
    let root_states = match (a.mode, t) {
        (RootMode::Complete, AnyTree::Complete(t)) => a.subtree_states(t),
        (RootMode::Almost, AnyTree::Almost(t)) => a.almost_root_states(t),
        _ => {
            return Err(Error::KindMismatch(
                "tree shape does not match the automaton's root mode".into(),
            ))
        }
    };
    Ok(root_states.iter().any(|q| a.accepting.contains(q)))
}

/// The height-indexed reachable-state sequence S_0, S_1, …: preperiod,
/// period, and the sequence over one preperiod+period window.
fn level_sequence(a: &TreeAutomaton) -> (usize, usize, Vec<BTreeSet<usize>>) {
    let mut seen: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut seq: Vec<BTreeSet<usize>> = Vec::new();
    let mut cur: BTreeSet<usize> = a.leaf.iter().map(|&(q, _)| q).collect();
    loop {
        if let Some(&first) = seen.get(&cur) {
            return (first, seq.len() - first, seq);
        }
        seen.insert(cur.clone(), seq.len());
        seq.push(cur.clone());
        cur = a
            .inner
            .iter()
            .filter(|(_, _, cs)| cs.iter().all(|c| cur.contains(c)))
            .map(|(q, _, _)| *q)
            .collect();
    }
}

/// Root states reachable at height h, respecting the root mode.
fn root_states_at(a: &TreeAutomaton, seq: &[BTreeSet<usize>], pre: usize, per: usize, h: usize) -> BTreeSet<usize> {
    let level = |i: usize| -> &BTreeSet<usize> {
        let idx = if i < pre + per { i } else { pre + (i - pre) % per };
        &seq[idx]
    };
    match a.mode {
        RootMode::Complete => level(h).clone(),
        RootMode::Almost => {
            if h == 0 {
                a.leaf.iter().map(|&(q, _)| q).collect()
            } else {
                let below = level(h - 1);
                a.almost_root
                    .iter()
                    .filter(|(_, _, cs)| cs.iter().all(|c| below.contains(c)))
                    .map(|(q, _, _)| *q)
                    .collect()
            }
        }
    }
}

/// H(A) = { h : A accepts some tree of height h }.
pub fn fta_height_set(a: &TreeAutomaton) -> Eps {
    let (pre, per, seq) = level_sequence(a);
    // almost-root acceptance at height h is a function of S_{h-1}, so the
    // verdicts share the level periodicity, shifted by one in almost mode
    let threshold = match a.mode {
        RootMode::Complete => pre,
        RootMode::Almost => pre + 1,
    };
    Eps::from_predicate(threshold as u64, per as u64, |h| {
        root_states_at(a, &seq, pre, per, h as usize)
            .iter()
            .any(|q| a.accepting.contains(q))
    })
}

pub fn fta_empty(a: &TreeAutomaton) -> (bool, Option<AnyTree>) {
    let hs = fta_height_set(a);
    let bound = hs.horizon() + hs.period().max(1);
    let h = match (0..bound).find(|&h| hs.contains(h)) {
        Some(h) => h as usize,
        None => return (true, None),
    };
    (false, Some(build_witness(a, h)))
}

/// Reconstruct an accepted tree of height h (which must be accepted).
fn build_witness(a: &TreeAutomaton, h: usize) -> AnyTree {
    let (pre, per, seq) = level_sequence(a);
    let level = |i: usize| -> BTreeSet<usize> {
        let idx = if i < pre + per { i } else { pre + (i - pre) % per };
        seq[idx].clone()
    };
    // memoized complete subtree of height i in state q
    fn complete(
        a: &TreeAutomaton,
        level: &dyn Fn(usize) -> BTreeSet<usize>,
        memo: &mut HashMap<(usize, usize), FiniteKTree>,
        q: usize,
        i: usize,
    ) -> FiniteKTree {
        if let Some(t) = memo.get(&(q, i)) {
            return t.clone();
        }
        let t = if i == 0 {
            let &(_, aletter) = a.leaf.iter().find(|&&(p, _)| p == q).unwrap();
            FiniteKTree::leaf(a.k, aletter)
        } else {
            let below = level(i - 1);
            let (_, aletter, cs) = a
                .inner
                .iter()
                .find(|(p, _, cs)| *p == q && cs.iter().all(|c| below.contains(c)))
                .unwrap();
            let children: Vec<FiniteKTree> = cs
                .iter()
                .map(|&c| complete(a, level, memo, c, i - 1))
                .collect();
            FiniteKTree::node(a.k, *aletter, children).unwrap()
        };
        memo.insert((q, i), t.clone());
        t
    }
    let mut memo = HashMap::new();
    match a.mode {
        RootMode::Complete => {
            let q = *level(h).iter().find(|q| a.accepting.contains(q)).unwrap();
            AnyTree::Complete(complete(a, &level, &mut memo, q, h))
        }
        RootMode::Almost => {
            if h == 0 {
                let &(_, aletter) = a
                    .leaf
                    .iter()
                    .find(|&&(q, _)| a.accepting.contains(&q))
                    .unwrap();
                AnyTree::Almost(AlmostKTree::root(a.k, aletter))
            } else {
                let below = level(h - 1);
                let (_, aletter, cs) = a
                    .almost_root
                    .iter()
                    .find(|(q, _, cs)| {
                        a.accepting.contains(q) && cs.iter().all(|c| below.contains(c))
                    })
                    .unwrap();
                let children: Vec<FiniteKTree> = cs
                    .iter()
                    .map(|&c| complete(a, &level, &mut memo, c, h - 1))
                    .collect();
                AnyTree::Almost(AlmostKTree::node(a.k, *aletter, children).unwrap())
            }
        }
    }
}

fn check_compatible(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<()> {
    if a.k != b.k || a.mode != b.mode {
        return Err(Error::Mismatch("tree automata differ in arity or root mode".into()));
    }
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch("operands have different alphabets".into()));
    }
    Ok(())
}

fn fta_union(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton> {
    check_compatible(a, b)?;
    let off = a.states;
    let leaf = a
        .leaf
        .iter()
        .copied()
        .chain(b.leaf.iter().map(|&(q, x)| (q + off, x)));
    let shift = |cs: &Vec<usize>| cs.iter().map(|c| c + off).collect::<Vec<_>>();
    let inner = a.inner.iter().cloned().chain(
        b.inner
            .iter()
            .map(|(q, x, cs)| (q + off, *x, shift(cs))),
    );
    let almost = a.almost_root.iter().cloned().chain(
        b.almost_root
            .iter()
            .map(|(q, x, cs)| (q + off, *x, shift(cs))),
    );
    let accepting = a
        .accepting
        .iter()
        .copied()
        .chain(b.accepting.iter().map(|&q| q + off));
    TreeAutomaton::new(
        a.k,
        a.states + b.states,
        a.alphabet.clone(),
        a.mode,
        leaf,
        inner,
        almost,
        accepting,
    )
}

fn fta_intersect(a: &TreeAutomaton, b: &TreeAutomaton, cap: usize) -> Result<TreeAutomaton> {
    check_compatible(a, b)?;
    if a.states.saturating_mul(b.states) > cap {
        return Err(Error::ResourceCap("product states".into(), cap));
    }
    let key = |qa: usize, qb: usize| qa * b.states + qb;
    let leaf = a.leaf.iter().flat_map(|&(qa, x)| {
        b.leaf
            .iter()
            .filter(move |&&(_, y)| y == x)
            .map(move |&(qb, _)| (key(qa, qb), x))
    });
    let pair_trans = |sa: &BTreeSet<(usize, Letter, Vec<usize>)>,
                      sb: &BTreeSet<(usize, Letter, Vec<usize>)>| {
        let mut by_letter: BTreeMap<Letter, Vec<(usize, &Vec<usize>)>> = BTreeMap::new();
        for (qb, y, cb) in sb {
            by_letter.entry(*y).or_default().push((*qb, cb));
        }
        let mut out = Vec::new();
        for (qa, x, ca) in sa {
            for (qb, cb) in by_letter.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                let cs: Vec<usize> = ca.iter().zip(*cb).map(|(&u, &v)| key(u, v)).collect();
                out.push((key(*qa, *qb), *x, cs));
            }
        }
        out
    };
    let inner = pair_trans(&a.inner, &b.inner);
    let almost = pair_trans(&a.almost_root, &b.almost_root);
    let accepting = a
        .accepting
        .iter()
        .flat_map(|&qa| b.accepting.iter().map(move |&qb| key(qa, qb)));
    let raw = TreeAutomaton::new(
        a.k,
        a.states * b.states,
        a.alphabet.clone(),
        a.mode,
        leaf,
        inner,
        almost,
        accepting,
    )?;
    // iterated products stay manageable only when dead pairs are dropped
    Ok(fta_trim(&raw))
}

/// Bottom-up subset construction; deterministic and complete.
pub fn fta_determinize(a: &TreeAutomaton, cap: usize) -> Result<TreeAutomaton> {
    let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut order: Vec<BTreeSet<usize>> = Vec::new();
    let mut intern = |s: BTreeSet<usize>, order: &mut Vec<BTreeSet<usize>>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            order.push(s);
            order.len() - 1
        })
    };
    let mut leaf = Vec::new();
    for x in a.alphabet.letters() {
        let s: BTreeSet<usize> = a
            .leaf
            .iter()
            .filter(|&&(_, y)| y == x)
            .map(|&(q, _)| q)
            .collect();
        leaf.push((intern(s, &mut order), x));
    }
    // close under inner transitions over all k-tuples of known det states
    let mut inner: BTreeSet<(usize, Letter, Vec<usize>)> = BTreeSet::new();
    let mut frontier_start = 0;
    loop {
        let n = order.len();
        if n > cap {
            return Err(Error::ResourceCap("determinization states".into(), cap));
        }
        let mut added = false;
        // only tuples touching a state added since the last pass are new
        let tuples = k_tuples(n, a.k);
        for cs in tuples {
            if cs.iter().all(|&c| c < frontier_start) {
                continue;
            }
            for x in a.alphabet.letters() {
                let s: BTreeSet<usize> = a
                    .inner
                    .iter()
                    .filter(|(_, y, qs)| {
                        *y == x && qs.iter().zip(&cs).all(|(q, &c)| order[c].contains(q))
                    })
                    .map(|(q, _, _)| *q)
                    .collect();
                let before = order.len();
                let d = intern(s, &mut order);
                if order.len() > before {
                    added = true;
                }
                inner.insert((d, x, cs.clone()));
            }
        }
        if !added {
            break;
        }
        frontier_start = n;
    }
    let mut almost = Vec::new();
    if a.mode == RootMode::Almost {
        for cs in k_tuples(order.len(), a.k - 1) {
            for x in a.alphabet.letters() {
                let s: BTreeSet<usize> = a
                    .almost_root
                    .iter()
                    .filter(|(_, y, qs)| {
                        *y == x && qs.iter().zip(&cs).all(|(q, &c)| order[c].contains(q))
                    })
                    .map(|(q, _, _)| *q)
                    .collect();
                // almost-root result sets live at the root only; intern them
                let d = intern(s, &mut order);
                almost.push((d, x, cs.clone()));
            }
        }
    }
    let accepting: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|q| a.accepting.contains(q)))
        .map(|(i, _)| i)
        .collect();
    TreeAutomaton::new(
        a.k,
        order.len(),
        a.alphabet.clone(),
        a.mode,
        leaf,
        inner,
        almost,
        accepting,
    )
}

fn k_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |c| {
                    let mut t2 = t.clone();
                    t2.push(c);
                    t2
                })
            })
            .collect();
    }
    out
}

pub fn fta_complement(a: &TreeAutomaton, cap: usize) -> Result<TreeAutomaton> {
    let mut d = fta_determinize(a, cap)?;
    d.accepting = (0..d.states).filter(|q| !d.accepting.contains(q)).collect();
    Ok(d)
}

/// Complement of `a` relative to the complete k-ary trees of height exactly
/// `depth`: accepts such a tree iff `a` rejects it. The subset construction
/// is stratified by height, so only same-height state tuples are explored;
/// this stays small where a full determinization would blow up.
pub fn fta_complement_within(
    a: &TreeAutomaton,
    depth: usize,
    cap: usize,
) -> Result<TreeAutomaton> {
    if a.mode != RootMode::Complete {
        return Err(Error::Invalid(
            "height-bounded complement needs complete root mode".into(),
        ));
    }
    let letters: Vec<Letter> = a.alphabet.letters().collect();
    let mut by_letter: Vec<Vec<(usize, &Vec<usize>)>> = vec![Vec::new(); a.alphabet.len()];
    for (q, x, cs) in &a.inner {
        by_letter[*x].push((*q, cs));
    }
    // det states are (height level, subset); levels never share ids
    let mut order: Vec<BTreeSet<usize>> = Vec::new();
    let mut leaf = Vec::new();
    let mut inner = Vec::new();
    let mut level: Vec<usize> = Vec::new();
    {
        let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        for &x in &letters {
            let s: BTreeSet<usize> = a
                .leaf
                .iter()
                .filter(|&&(_, y)| y == x)
                .map(|&(q, _)| q)
                .collect();
            let d = *index.entry(s.clone()).or_insert_with(|| {
                order.push(s);
                level.push(order.len() - 1);
                order.len() - 1
            });
            leaf.push((d, x));
        }
    }
    for _ in 0..depth {
        let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut next: Vec<usize> = Vec::new();
        for cs in k_tuples(level.len(), a.k) {
            let tuple: Vec<usize> = cs.iter().map(|&i| level[i]).collect();
            for &x in &letters {
                let s: BTreeSet<usize> = by_letter[x]
                    .iter()
                    .filter(|(_, qs)| {
                        qs.iter().zip(&tuple).all(|(q, &c)| order[c].contains(q))
                    })
                    .map(|(q, _)| *q)
                    .collect();
                let d = *index.entry(s.clone()).or_insert_with(|| {
                    order.push(s);
                    next.push(order.len() - 1);
                    order.len() - 1
                });
                inner.push((d, x, tuple.clone()));
            }
            if order.len() > cap {
                return Err(Error::ResourceCap("determinization states".into(), cap));
            }
        }
        level = next;
    }
    let accepting: Vec<usize> = level
        .iter()
        .copied()
        .filter(|&d| order[d].iter().all(|q| !a.accepting.contains(q)))
        .collect();
    TreeAutomaton::new(
        a.k,
        order.len().max(1),
        a.alphabet.clone(),
        RootMode::Complete,
        leaf,
        inner,
        [],
        accepting,
    )
}

pub fn fta_boolean(
    kind: BoolKind,
    a: &TreeAutomaton,
    b: Option<&TreeAutomaton>,
) -> Result<TreeAutomaton> {
    fta_boolean_capped(kind, a, b, DEFAULT_DET_CAP)
}

pub fn fta_boolean_capped(
    kind: BoolKind,
    a: &TreeAutomaton,
    b: Option<&TreeAutomaton>,
    cap: usize,
) -> Result<TreeAutomaton> {
    match kind {
        BoolKind::Union => fta_union(a, b.ok_or(Error::Invalid("union needs two operands".into()))?),
        BoolKind::Intersect => fta_intersect(
            a,
            b.ok_or(Error::Invalid("intersect needs two operands".into()))?,
            cap,
        ),
        BoolKind::Complement => {
            if b.is_some() {
                return Err(Error::Invalid("complement takes one operand".into()));
            }
            fta_complement(a, cap)
        }
    }
}

/// Drop states that no subtree derives bottom-up or that no accepted tree
/// uses. Keeps languages intact while shrinking iterated products.
pub(crate) fn fta_trim(a: &TreeAutomaton) -> TreeAutomaton {
    // states derivable as the root of some complete subtree
    let mut reach = vec![false; a.states];
    for &(q, _) in &a.leaf {
        reach[q] = true;
    }
    loop {
        let mut changed = false;
        for (q, _, cs) in &a.inner {
            if !reach[*q] && cs.iter().all(|&c| reach[c]) {
                reach[*q] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // states usable inside some accepted tree
    let mut useful = vec![false; a.states];
    let mut queue: Vec<usize> = Vec::new();
    let mark = |q: usize, useful: &mut Vec<bool>, queue: &mut Vec<usize>| {
        if !useful[q] {
            useful[q] = true;
            queue.push(q);
        }
    };
    match a.mode {
        RootMode::Complete => {
            for &q in &a.accepting {
                if reach[q] {
                    mark(q, &mut useful, &mut queue);
                }
            }
        }
        RootMode::Almost => {
            for (q, _, cs) in &a.almost_root {
                if a.accepting.contains(q) && cs.iter().all(|&c| reach[c]) {
                    for &c in cs {
                        mark(c, &mut useful, &mut queue);
                    }
                }
            }
        }
    }
    while let Some(q) = queue.pop() {
        for (p, _, cs) in &a.inner {
            if *p == q && cs.iter().all(|&c| reach[c]) {
                for &c in cs {
                    if !useful[c] {
                        useful[c] = true;
                        queue.push(c);
                    }
                }
            }
        }
    }
    // almost-mode root states count as kept when they can accept a root
    let root_ok = |q: usize| -> bool {
        if !a.accepting.contains(&q) {
            return false;
        }
        match a.mode {
            RootMode::Complete => reach[q],
            RootMode::Almost => {
                a.leaf.iter().any(|&(p, _)| p == q)
                    || a
                        .almost_root
                        .iter()
                        .any(|(p, _, cs)| *p == q && cs.iter().all(|&c| reach[c]))
            }
        }
    };
    let kept: Vec<usize> = (0..a.states)
        .filter(|&q| (reach[q] && useful[q]) || root_ok(q))
        .collect();
    if kept.is_empty() {
        return TreeAutomaton::new(a.k, 1, a.alphabet.clone(), a.mode, [], [], [], []).unwrap();
    }
    let renum: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let sub_ok = |q: usize| reach[q] && useful[q];
    let leaf = a
        .leaf
        .iter()
        .filter(|&&(q, _)| renum.contains_key(&q))
        .map(|&(q, x)| (renum[&q], x));
    let inner = a
        .inner
        .iter()
        .filter(|(q, _, cs)| {
            (sub_ok(*q) || (a.mode == RootMode::Complete && root_ok(*q)))
                && cs.iter().all(|&c| sub_ok(c))
        })
        .map(|(q, x, cs)| (renum[&q], *x, cs.iter().map(|c| renum[&c]).collect::<Vec<_>>()));
    let almost = a
        .almost_root
        .iter()
        .filter(|(q, _, cs)| root_ok(*q) && cs.iter().all(|&c| sub_ok(c)))
        .map(|(q, x, cs)| (renum[&q], *x, cs.iter().map(|c| renum[&c]).collect::<Vec<_>>()));
    let accepting = a
        .accepting
        .iter()
        .filter(|q| renum.contains_key(q))
        .map(|q| renum[q]);
    TreeAutomaton::new(
        a.k,
        kept.len(),
        a.alphabet.clone(),
        a.mode,
        leaf,
        inner,
        almost,
        accepting,
    )
    .unwrap()
}

pub fn fta_project(a: &TreeAutomaton, drop: &BTreeSet<String>) -> Result<TreeAutomaton> {
    let props = a.alphabet.prop_set()?;
    for d in drop {
        if props.index_of(d).is_none() {
            return Err(Error::Invalid(format!("unknown proposition {d}")));
        }
    }
    let kept: Vec<String> = props
        .names()
        .iter()
        .filter(|n| !drop.contains(*n))
        .cloned()
        .collect();
    let new_alpha = Alphabet::props(kept)?;
    let new_props = new_alpha.prop_set()?.clone();
    let old_props = props.clone();
    let map = move |letter: Letter| -> Letter {
        let names: Vec<&str> = old_props
            .props_of(letter)
            .into_iter()
            .filter(|n| !drop.contains(*n))
            .collect();
        new_props.letter_of(names).unwrap()
    };
    TreeAutomaton::new(
        a.k,
        a.states,
        new_alpha,
        a.mode,
        a.leaf.iter().map(|&(q, x)| (q, map(x))),
        a.inner.iter().map(|(q, x, cs)| (*q, map(*x), cs.clone())),
        a.almost_root
            .iter()
            .map(|(q, x, cs)| (*q, map(*x), cs.clone())),
        a.accepting.iter().copied(),
    )
}

/// Automaton accepting exactly the trees of height h (any labels).
pub fn fta_shape(k: usize, h: usize, alphabet: Alphabet, mode: RootMode) -> TreeAutomaton {
    // state i = "root of a subtree of height i"
    let states = h + 1;
    let leaf: Vec<(usize, Letter)> = alphabet.letters().map(|a| (0, a)).collect();
    let mut inner = Vec::new();
    let mut almost = Vec::new();
    for i in 1..states {
        for a in alphabet.letters() {
            inner.push((i, a, vec![i - 1; k]));
            if mode == RootMode::Almost {
                almost.push((i, a, vec![i - 1; k - 1]));
            }
        }
    }
    TreeAutomaton::new(k, states, alphabet, mode, leaf, inner, almost, [h]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::symbols(["a", "b"]).unwrap()
    }

    /// State = height parity; accepting on even heights. Complete mode.
    fn parity_automaton(k: usize) -> TreeAutomaton {
        let mut inner = Vec::new();
        for a in 0..2 {
            inner.push((1, a, vec![0; k]));
            inner.push((0, a, vec![1; k]));
        }
        TreeAutomaton::new(
            k,
            2,
            ab(),
            RootMode::Complete,
            [(0, 0), (0, 1)],
            inner,
            [],
            [0],
        )
        .unwrap()
    }

    /// Automaton requiring letter `a` at the root, anything below.
    fn root_letter_a(k: usize) -> TreeAutomaton {
        TreeAutomaton::new(
            k,
            2,
            ab(),
            RootMode::Complete,
            [(0, 0), (0, 1), (1, 0)],
            [
                (0, 0, vec![0; k]),
                (0, 1, vec![0; k]),
                (1, 0, vec![0; k]),
            ],
            [],
            [1],
        )
        .unwrap()
    }

    fn uniform(k: usize, h: usize, letter: Letter) -> AnyTree {
        AnyTree::Complete(FiniteKTree::uniform(k, h, letter))
    }

    #[test]
    fn member_basics() {
        let u = TreeAutomaton::universal(2, ab(), RootMode::Complete);
        assert!(fta_member(&u, &uniform(2, 0, 0)).unwrap());
        assert!(fta_member(&u, &uniform(2, 3, 1)).unwrap());
        let r = root_letter_a(2);
        assert!(fta_member(&r, &uniform(2, 1, 0)).unwrap());
        assert!(!fta_member(&r, &uniform(2, 1, 1)).unwrap());
        let p = parity_automaton(2);
        assert!(fta_member(&p, &uniform(2, 2, 0)).unwrap());
        assert!(!fta_member(&p, &uniform(2, 3, 0)).unwrap());
    }

    #[test]
    fn empty_basics() {
        let mut dead = TreeAutomaton::universal(2, ab(), RootMode::Complete);
        dead.accepting.clear();
        assert!(fta_empty(&dead).0);
        let u = TreeAutomaton::universal(2, ab(), RootMode::Complete);
        let (e, w) = fta_empty(&u);
        assert!(!e);
        let w = w.unwrap();
        assert_eq!(w.height(), 0);
        assert!(fta_member(&u, &w).unwrap());
        let p = parity_automaton(2);
        let (e, w) = fta_empty(&p);
        assert!(!e);
        assert_eq!(w.unwrap().height(), 0);
    }

    #[test]
    fn height_set_examples() {
        let u = TreeAutomaton::universal(2, ab(), RootMode::Complete);
        assert!(fta_height_set(&u).is_naturals());
        // leaf-only automaton
        let l = TreeAutomaton::new(
            2,
            1,
            ab(),
            RootMode::Complete,
            [(0, 0), (0, 1)],
            [],
            [],
            [0],
        )
        .unwrap();
        assert_eq!(fta_height_set(&l), Eps::finite([0]));
        let p = parity_automaton(2);
        let hs = fta_height_set(&p);
        for h in 0..13u64 {
            assert_eq!(hs.contains(h), h % 2 == 0, "h={h}");
        }
        assert_eq!(hs, Eps::progression(0, 2));
    }

    #[test]
    fn shape_examples() {
        let s0 = fta_shape(2, 0, ab(), RootMode::Complete);
        assert!(fta_member(&s0, &uniform(2, 0, 0)).unwrap());
        assert!(!fta_member(&s0, &uniform(2, 1, 0)).unwrap());
        let s2 = fta_shape(2, 2, ab(), RootMode::Complete);
        assert!(!fta_member(&s2, &uniform(2, 1, 1)).unwrap());
        assert!(fta_member(&s2, &uniform(2, 2, 1)).unwrap());
    }

    #[test]
    fn height_set_agrees_with_shape_intersection() {
        let corpus = [
            parity_automaton(2),
            root_letter_a(2),
            TreeAutomaton::universal(2, ab(), RootMode::Complete),
        ];
        for a in &corpus {
            let hs = fta_height_set(a);
            for h in 0..=10usize {
                let shape = fta_shape(a.k, h, a.alphabet.clone(), a.mode);
                let nonempty = !fta_empty(&fta_intersect(a, &shape, DEFAULT_DET_CAP).unwrap()).0;
                assert_eq!(hs.contains(h as u64), nonempty, "h={h}");
            }
        }
    }

    /// All complete binary trees of height ≤ 2 over two letters.
    fn sample_trees() -> Vec<FiniteKTree> {
        let mut by_height: Vec<Vec<FiniteKTree>> = Vec::new();
        by_height.push((0..2).map(|a| FiniteKTree::leaf(2, a)).collect());
        for h in 1..=2usize {
            let prev = &by_height[h - 1];
            let mut cur = Vec::new();
            for a in 0..2 {
                for l in prev {
                    for r in prev {
                        cur.push(FiniteKTree::node(2, a, vec![l.clone(), r.clone()]).unwrap());
                    }
                }
            }
            by_height.push(cur);
        }
        by_height.concat()
    }

    #[test]
    fn boolean_ops_respect_membership_on_samples() {
        let cases = [
            parity_automaton(2),
            root_letter_a(2),
            TreeAutomaton::universal(2, ab(), RootMode::Complete),
        ];
        let sample = sample_trees();
        for a in &cases {
            let c = fta_complement(a, DEFAULT_DET_CAP).unwrap();
            for t in &sample {
                let t = AnyTree::Complete(t.clone());
                assert_eq!(fta_member(&c, &t).unwrap(), !fta_member(a, &t).unwrap());
            }
            for b in &cases {
                let i = fta_intersect(a, b, DEFAULT_DET_CAP).unwrap();
                let u = fta_union(a, b).unwrap();
                // De Morgan cross-check
                let dm = fta_complement(&fta_union(a, b).unwrap(), DEFAULT_DET_CAP).unwrap();
                let dm2 = fta_intersect(
                    &fta_complement(a, DEFAULT_DET_CAP).unwrap(),
                    &fta_complement(b, DEFAULT_DET_CAP).unwrap(),
                    DEFAULT_DET_CAP,
                )
                .unwrap();
                for t in &sample {
                    let t = AnyTree::Complete(t.clone());
                    let (ma, mb) = (fta_member(a, &t).unwrap(), fta_member(b, &t).unwrap());
                    assert_eq!(fta_member(&i, &t).unwrap(), ma && mb);
                    assert_eq!(fta_member(&u, &t).unwrap(), ma || mb);
                    assert_eq!(
                        fta_member(&dm, &t).unwrap(),
                        fta_member(&dm2, &t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn complement_of_even_height_is_odd_height() {
        let p = parity_automaton(2);
        let c = fta_complement(&p, DEFAULT_DET_CAP).unwrap();
        for h in 0..=6usize {
            assert_eq!(
                fta_member(&c, &uniform(2, h, 0)).unwrap(),
                h % 2 == 1,
                "h={h}"
            );
        }
    }

    #[test]
    fn height_bounded_complement_matches_plain_complement() {
        let cases = [
            parity_automaton(2),
            root_letter_a(2),
            TreeAutomaton::universal(2, ab(), RootMode::Complete),
        ];
        for a in &cases {
            for h in 0..=3usize {
                let within = fta_complement_within(a, h, DEFAULT_DET_CAP).unwrap();
                let plain = fta_intersect(
                    &fta_complement(a, DEFAULT_DET_CAP).unwrap(),
                    &fta_shape(2, h, ab(), RootMode::Complete),
                    DEFAULT_DET_CAP,
                )
                .unwrap();
                for t in sample_trees() {
                    let t = AnyTree::Complete(t);
                    assert_eq!(
                        fta_member(&within, &t).unwrap(),
                        fta_member(&plain, &t).unwrap(),
                        "h={h}"
                    );
                }
            }
        }
    }

    #[test]
    fn determinize_preserves_membership() {
        for a in [parity_automaton(2), root_letter_a(2)] {
            let d = fta_determinize(&a, DEFAULT_DET_CAP).unwrap();
            for t in sample_trees() {
                let t = AnyTree::Complete(t);
                assert_eq!(fta_member(&d, &t).unwrap(), fta_member(&a, &t).unwrap());
            }
        }
    }

    #[test]
    fn almost_mode_roundtrip() {
        // k=3 almost trees: root with 2 complete ternary children; accept
        // only roots labeled a with children of any height
        let alpha = ab();
        let mut inner = Vec::new();
        let mut almost = Vec::new();
        for x in 0..2 {
            inner.push((0, x, vec![0; 3]));
        }
        almost.push((1, 0, vec![0; 2]));
        let a = TreeAutomaton::new(
            3,
            2,
            alpha,
            RootMode::Almost,
            [(0, 0), (0, 1), (1, 0)],
            inner,
            almost,
            [1],
        )
        .unwrap();
        let t = AlmostKTree::node(
            3,
            0,
            vec![FiniteKTree::uniform(3, 1, 1), FiniteKTree::uniform(3, 1, 0)],
        )
        .unwrap();
        assert!(fta_member(&a, &AnyTree::Almost(t)).unwrap());
        let bad = AlmostKTree::node(
            3,
            1,
            vec![FiniteKTree::leaf(3, 0), FiniteKTree::leaf(3, 0)],
        )
        .unwrap();
        assert!(!fta_member(&a, &AnyTree::Almost(bad)).unwrap());
        // height set: 0 via leaf (state 1 at a leaf root? leaf (1,0) ∈ leaf set)
        let hs = fta_height_set(&a);
        assert!(hs.contains(0));
        assert!(hs.contains(1));
        let (e, w) = fta_empty(&a);
        assert!(!e);
        assert!(fta_member(&a, &w.unwrap()).unwrap());
        // complement in almost mode flips membership
        let c = fta_complement(&a, DEFAULT_DET_CAP).unwrap();
        let t2 = AlmostKTree::node(
            3,
            1,
            vec![FiniteKTree::leaf(3, 0), FiniteKTree::leaf(3, 1)],
        )
        .unwrap();
        for t in [AnyTree::Almost(t2), AnyTree::Almost(AlmostKTree::root(3, 0))] {
            assert_eq!(fta_member(&c, &t).unwrap(), !fta_member(&a, &t).unwrap());
        }
    }
}
