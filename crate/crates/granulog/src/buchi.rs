//! Büchi automata on infinite words: emptiness with lasso witnesses, lasso
//! membership, Boolean operations (rank-based complementation), projection.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::{Alphabet, LassoWord, Letter};

/// Default cap on states generated by complementation.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub states: usize,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub alphabet: Alphabet,
    pub transitions: BTreeSet<(usize, Letter, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolKind {
    Union,
    Intersect,
    Complement,
}

impl BuchiAutomaton {
    pub fn new(
        states: usize,
        initial: usize,
        finals: impl IntoIterator<Item = usize>,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (usize, Letter, usize)>,
    ) -> Result<Self> {
        let finals: BTreeSet<usize> = finals.into_iter().collect();
        let transitions: BTreeSet<(usize, Letter, usize)> = transitions.into_iter().collect();
        if states == 0 || initial >= states {
            return Err(Error::Invalid("initial state out of range".into()));
        }
        if finals.iter().any(|&f| f >= states) {
            return Err(Error::Invalid("final state out of range".into()));
        }
        for &(q, a, q2) in &transitions {
            if q >= states || q2 >= states || a >= alphabet.len() {
                return Err(Error::Invalid(format!(
                    "transition ({q},{a},{q2}) out of range"
                )));
            }
        }
        Ok(BuchiAutomaton {
            states,
            initial,
            finals,
            alphabet,
            transitions,
        })
    }

    fn succ(&self, q: usize, a: Letter) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .range((q, a, 0)..=(q, a, usize::MAX))
            .map(|&(_, _, q2)| q2)
    }

    fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for &(p, _, q2) in &self.transitions {
                if p == q && seen.insert(q2) {
                    queue.push_back(q2);
                }
            }
        }
        seen
    }

    /// BFS path of letters from `from` to `to`; `nonempty` forces ≥ 1 step.
    fn letter_path(&self, from: usize, to: usize, nonempty: bool) -> Option<Vec<Letter>> {
        if from == to && !nonempty {
            return Some(Vec::new());
        }
        let mut parent: HashMap<usize, (usize, Letter)> = HashMap::new();
        let mut queue = VecDeque::new();
        // seed with the one-step successors so a nonempty cycle is found
        for &(p, a, q2) in &self.transitions {
            if p == from && !parent.contains_key(&q2) {
                parent.insert(q2, (from, a));
                queue.push_back(q2);
            }
        }
        while let Some(q) = queue.pop_front() {
            if q == to {
                let mut word = Vec::new();
                let mut cur = to;
                loop {
                    let (p, a) = parent[&cur];
                    word.push(a);
                    cur = p;
                    if cur == from && word.len() > 0 {
                        break;
                    }
                }
                word.reverse();
                return Some(word);
            }
            for &(p, a, q2) in &self.transitions {
                if p == q && !parent.contains_key(&q2) {
                    parent.insert(q2, (q, a));
                    queue.push_back(q2);
                }
            }
        }
        None
    }
}

/// Emptiness check with an accepting-lasso witness when nonempty.
pub fn buchi_empty(a: &BuchiAutomaton) -> (bool, Option<LassoWord>) {
    let reach = a.reachable();
    for &f in &a.finals {
        if !reach.contains(&f) {
            continue;
        }
        if let Some(cycle) = a.letter_path(f, f, true) {
            let stem = a.letter_path(a.initial, f, false).unwrap();
            let w = LassoWord::new(stem, cycle).expect("cycle is nonempty");
            return (false, Some(w));
        }
    }
    (true, None)
}

/// Does the automaton accept stem·cycle^ω?
pub fn buchi_member(a: &BuchiAutomaton, w: &LassoWord) -> Result<bool> {
    let positions = w.period_len();
    for i in 0..positions {
        if w.at(i) >= a.alphabet.len() {
            return Err(Error::AlphabetMismatch(format!(
                "letter {} out of range",
                w.at(i)
            )));
        }
    }
    Ok(constrained_lasso_run(
        a,
        w.stem.len(),
        positions,
        &|i, x| x == w.at(i),
    ))
}

/// Is there an accepting run of `a` over some ultimately periodic word whose
/// letter at every position of class `i` satisfies `allowed(i, letter)`?
///
/// Position classes are `0..period_len` with the stem occupying
/// `0..stem_len`; class `period_len - 1` wraps back to `stem_len`. The
/// search works on the product of `a` with the class graph: a run exists
/// iff some final product vertex on the cyclic classes lies in a
/// nontrivial strongly connected component (or carries a self-loop).
pub(crate) fn constrained_lasso_run(
    a: &BuchiAutomaton,
    stem_len: usize,
    period_len: usize,
    allowed: &dyn Fn(usize, Letter) -> bool,
) -> bool {
    let next = |i: usize| if i + 1 < period_len { i + 1 } else { stem_len };
    let key = |q: usize, i: usize| q * period_len + i;
    let mut by_state: Vec<Vec<(Letter, usize)>> = vec![Vec::new(); a.states];
    for &(q, x, q2) in &a.transitions {
        by_state[q].push((x, q2));
    }
    let n = a.states * period_len;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([(a.initial, 0usize)]);
    seen[key(a.initial, 0)] = true;
    while let Some((q, i)) = queue.pop_front() {
        let j = next(i);
        for &(x, q2) in &by_state[q] {
            if !allowed(i, x) {
                continue;
            }
            adj[key(q, i)].push(key(q2, j));
            if !seen[key(q2, j)] {
                seen[key(q2, j)] = true;
                queue.push_back((q2, j));
            }
        }
    }
    let scc = scc_ids(n, &adj);
    let mut scc_size = vec![0usize; n];
    for v in 0..n {
        if seen[v] {
            scc_size[scc[v]] += 1;
        }
    }
    for &q in &a.finals {
        for i in stem_len..period_len {
            let v = key(q, i);
            if seen[v] && (scc_size[scc[v]] > 1 || adj[v].contains(&v)) {
                return true;
            }
        }
    }
    false
}

fn same_alphabet(a: &BuchiAutomaton, b: &BuchiAutomaton) -> Result<()> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch(
            "operands have different alphabets".into(),
        ));
    }
    Ok(())
}

fn buchi_union(a: &BuchiAutomaton, b: &BuchiAutomaton) -> Result<BuchiAutomaton> {
    same_alphabet(a, b)?;
    // fresh initial 0, copies of A at 1.. and B at 1+|A|..
    let oa = 1;
    let ob = 1 + a.states;
    let states = 1 + a.states + b.states;
    let mut transitions = BTreeSet::new();
    for &(q, x, q2) in &a.transitions {
        transitions.insert((q + oa, x, q2 + oa));
        if q == a.initial {
            transitions.insert((0, x, q2 + oa));
        }
    }
    for &(q, x, q2) in &b.transitions {
        transitions.insert((q + ob, x, q2 + ob));
        if q == b.initial {
            transitions.insert((0, x, q2 + ob));
        }
    }
    let finals: BTreeSet<usize> = a
        .finals
        .iter()
        .map(|f| f + oa)
        .chain(b.finals.iter().map(|f| f + ob))
        .collect();
    BuchiAutomaton::new(states, 0, finals, a.alphabet.clone(), transitions)
}

fn buchi_intersect(a: &BuchiAutomaton, b: &BuchiAutomaton, cap: usize) -> Result<BuchiAutomaton> {
    same_alphabet(a, b)?;
    // two-copy product: copy 0 waits for an A-final, copy 1 for a B-final;
    // built over the reachable part only, since the full product is
    // quadratic and mostly dead
    let mut succ_a: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); a.alphabet.len()]; a.states];
    for &(q, x, q2) in &a.transitions {
        succ_a[q][x].push(q2);
    }
    let mut succ_b: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); b.alphabet.len()]; b.states];
    for &(q, x, q2) in &b.transitions {
        succ_b[q][x].push(q2);
    }
    let start = (a.initial, b.initial, 0usize);
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    index.insert(start, 0);
    let mut order = vec![start];
    let mut transitions = BTreeSet::new();
    let mut head = 0;
    while head < order.len() {
        let (qa, qb, c) = order[head];
        let from = head;
        head += 1;
        let c2 = match c {
            0 if a.finals.contains(&qa) => 1,
            1 if b.finals.contains(&qb) => 0,
            _ => c,
        };
        for x in a.alphabet.letters() {
            for &qa2 in &succ_a[qa][x] {
                for &qb2 in &succ_b[qb][x] {
                    let t = (qa2, qb2, c2);
                    let to = *index.entry(t).or_insert_with(|| {
                        order.push(t);
                        order.len() - 1
                    });
                    if order.len() > cap {
                        return Err(Error::ResourceCap("product states".into(), cap));
                    }
                    transitions.insert((from, x, to));
                }
            }
        }
    }
    let finals: BTreeSet<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, &(qa, _, c))| c == 0 && a.finals.contains(&qa))
        .map(|(i, _)| i)
        .collect();
    let raw = BuchiAutomaton::new(order.len(), 0, finals, a.alphabet.clone(), transitions)?;
    Ok(buchi_reduce(&raw))
}

/// Level ranking: rank per tracked state, even on final states.
type Ranking = BTreeMap<usize, u32>;

/// States of the complement: a subset-tracking phase followed by a
/// tight-ranking phase with an obligation set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CompState {
    Subset(BTreeSet<usize>),
    Ranked(Ranking, BTreeSet<usize>),
}

/// All tight rankings over `dom` obeying per-state upper bounds: maximal
/// rank odd, every odd rank below it attained, final states even.
fn tight_rankings(
    finals: &BTreeSet<usize>,
    bounds: &BTreeMap<usize, u32>,
    budget: usize,
) -> Result<Vec<Ranking>> {
    let keys: Vec<usize> = bounds.keys().copied().collect();
    if keys.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut cur: Ranking = BTreeMap::new();
    // counts[r] = number of states currently assigned rank r
    let mut counts: Vec<usize> = Vec::new();
    // bound the search itself: sparse valid rankings in a huge assignment
    // space must not stall enumeration before the output budget triggers
    let mut steps: u64 = 0;
    let max_steps = (budget as u64).saturating_mul(64);
    fn rec(
        keys: &[usize],
        i: usize,
        finals: &BTreeSet<usize>,
        bounds: &BTreeMap<usize, u32>,
        cur: &mut Ranking,
        counts: &mut Vec<usize>,
        out: &mut Vec<Ranking>,
        budget: usize,
        steps: &mut u64,
        max_steps: u64,
    ) -> Result<()> {
        *steps += 1;
        if *steps > max_steps {
            return Err(Error::ResourceCap(
                "complementation ranking search".into(),
                budget,
            ));
        }
        // odd ranks below the current maximum that no state attains yet can
        // only be covered by the remaining states, one each
        let max = counts.len().saturating_sub(1);
        let missing = (1..=max).step_by(2).filter(|&r| counts[r] == 0).count();
        if missing > keys.len() - i {
            return Ok(());
        }
        if i == keys.len() {
            if max % 2 == 1 && missing == 0 {
                if out.len() >= budget {
                    return Err(Error::ResourceCap(
                        "complementation rankings".into(),
                        budget,
                    ));
                }
                out.push(cur.clone());
            }
            return Ok(());
        }
        let q = keys[i];
        for r in 0..=bounds[&q] {
            if finals.contains(&q) && r % 2 == 1 {
                continue;
            }
            cur.insert(q, r);
            while counts.len() <= r as usize {
                counts.push(0);
            }
            counts[r as usize] += 1;
            let res = rec(
                keys, i + 1, finals, bounds, cur, counts, out, budget, steps, max_steps,
            );
            counts[r as usize] -= 1;
            while counts.last() == Some(&0) {
                counts.pop();
            }
            res?;
        }
        cur.remove(&q);
        Ok(())
    }
    rec(
        &keys,
        0,
        finals,
        bounds,
        &mut cur,
        &mut counts,
        &mut out,
        budget,
        &mut steps,
        max_steps,
    )?;
    Ok(out)
}

fn ranking_successors(
    a: &BuchiAutomaton,
    g: &Ranking,
    x: Letter,
    budget: usize,
) -> Result<Vec<Ranking>> {
    // per-successor upper bound: min rank over predecessors
    let mut bound: BTreeMap<usize, u32> = BTreeMap::new();
    for (&q, &r) in g {
        for q2 in a.succ(q, x) {
            let e = bound.entry(q2).or_insert(r);
            *e = (*e).min(r);
        }
    }
    tight_rankings(&a.finals, &bound, budget)
}

fn obligation_successor(
    a: &BuchiAutomaton,
    o: &BTreeSet<usize>,
    g2: &Ranking,
    x: Letter,
) -> BTreeSet<usize> {
    let even: BTreeSet<usize> = g2
        .iter()
        .filter(|(_, &r)| r % 2 == 0)
        .map(|(&q, _)| q)
        .collect();
    if o.is_empty() {
        even
    } else {
        let succ_o: BTreeSet<usize> = o
            .iter()
            .flat_map(|&q| a.succ(q, x).collect::<Vec<_>>())
            .collect();
        even.intersection(&succ_o).copied().collect()
    }
}

/// Complementation via the tight-ranking construction, capped at `cap`
/// generated states. The word is rejected by the input iff its run DAG has a
/// bounded odd ranking that is eventually tight, so the complement tracks
/// the reachable subset and nondeterministically switches to rankings.
pub fn buchi_complement(a: &BuchiAutomaton, cap: usize) -> Result<BuchiAutomaton> {
    // degenerate shortcut: empty language complements to the universal one
    if buchi_empty(a).0 {
        let transitions: BTreeSet<_> = a.alphabet.letters().map(|x| (0, x, 0)).collect();
        return BuchiAutomaton::new(1, 0, [0], a.alphabet.clone(), transitions);
    }
    // dead states inflate the ranking construction; drop them first
    let a = &buchi_reduce(a);
    // ranks of a rejecting run DAG are bounded by 2(n - |F|)
    let max_rank = 2 * (a.states - a.finals.len()) as u32;
    let start = CompState::Subset(BTreeSet::from([a.initial]));
    let mut index: HashMap<CompState, usize> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut order = vec![start];
    let mut transitions = BTreeSet::new();
    let mut head = 0;
    while head < order.len() {
        let from = head;
        let st = order[head].clone();
        head += 1;
        for x in a.alphabet.letters() {
            let mut targets: Vec<CompState> = Vec::new();
            match &st {
                CompState::Subset(s) => {
                    let s2: BTreeSet<usize> =
                        s.iter().flat_map(|&q| a.succ(q, x).collect::<Vec<_>>()).collect();
                    let bounds: BTreeMap<usize, u32> =
                        s2.iter().map(|&q| (q, max_rank)).collect();
                    for g2 in tight_rankings(&a.finals, &bounds, cap)? {
                        targets.push(CompState::Ranked(g2, BTreeSet::new()));
                    }
                    targets.push(CompState::Subset(s2));
                }
                CompState::Ranked(g, o) => {
                    for g2 in ranking_successors(a, g, x, cap)? {
                        let o2 = obligation_successor(a, o, &g2, x);
                        targets.push(CompState::Ranked(g2, o2));
                    }
                }
            }
            for t in targets {
                let to = *index.entry(t.clone()).or_insert_with(|| {
                    order.push(t.clone());
                    order.len() - 1
                });
                if order.len() > cap {
                    return Err(Error::ResourceCap("complementation states".into(), cap));
                }
                transitions.insert((from, x, to));
                // transitions can outgrow the state count by a large factor
                if transitions.len() > cap.saturating_mul(16) {
                    return Err(Error::ResourceCap(
                        "complementation transitions".into(),
                        cap,
                    ));
                }
            }
        }
    }
    // accepting: empty obligation set, or the all-runs-died subset
    let finals: BTreeSet<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, st)| match st {
            CompState::Subset(s) => s.is_empty(),
            CompState::Ranked(_, o) => o.is_empty(),
        })
        .map(|(i, _)| i)
        .collect();
    let raw = BuchiAutomaton::new(order.len(), 0, finals, a.alphabet.clone(), transitions)?;
    Ok(buchi_reduce(&raw))
}

/// Remove dead states (unreachable or unable to reach an accepting cycle)
/// and quotient by direct-simulation equivalence. Language-preserving.
pub fn buchi_reduce(a: &BuchiAutomaton) -> BuchiAutomaton {
    let trimmed = match trim(a) {
        Some(t) => t,
        None => {
            // empty language
            return BuchiAutomaton::new(1, 0, [], a.alphabet.clone(), []).unwrap();
        }
    };
    if trimmed.states > 2000 {
        // the quadratic simulation computation stops paying for itself here
        return trimmed;
    }
    let quotiented = quotient_by_simulation(&trimmed);
    trim(&quotiented).unwrap_or(quotiented)
}

/// Strongly connected component id per node (Kosaraju, iterative).
fn scc_ids(n: usize, fwd: &[Vec<usize>]) -> Vec<usize> {
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (q, outs) in fwd.iter().enumerate() {
        for &q2 in outs {
            back[q2].push(q);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (q, ref mut i)) = stack.last_mut() {
            if *i < fwd[q].len() {
                let q2 = fwd[q][*i];
                *i += 1;
                if !seen[q2] {
                    seen[q2] = true;
                    stack.push((q2, 0));
                }
            } else {
                order.push(q);
                stack.pop();
            }
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut next = 0;
    for &start in order.iter().rev() {
        if id[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        id[start] = next;
        while let Some(q) = stack.pop() {
            for &p in &back[q] {
                if id[p] == usize::MAX {
                    id[p] = next;
                    stack.push(p);
                }
            }
        }
        next += 1;
    }
    id
}

fn trim(a: &BuchiAutomaton) -> Option<BuchiAutomaton> {
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); a.states];
    let mut has_self_loop = vec![false; a.states];
    for &(q, _, q2) in &a.transitions {
        fwd[q].push(q2);
        back[q2].push(q);
        if q == q2 {
            has_self_loop[q] = true;
        }
    }
    let mut reach = vec![false; a.states];
    reach[a.initial] = true;
    let mut queue = VecDeque::from([a.initial]);
    while let Some(q) = queue.pop_front() {
        for &q2 in &fwd[q] {
            if !reach[q2] {
                reach[q2] = true;
                queue.push_back(q2);
            }
        }
    }
    // live: can reach a final state that lies on a cycle; a final is cyclic
    // if its strongly connected component is nontrivial or it self-loops
    let scc = scc_ids(a.states, &fwd);
    let mut scc_size = vec![0usize; a.states];
    for q in 0..a.states {
        scc_size[scc[q]] += 1;
    }
    let mut live = vec![false; a.states];
    let mut queue = VecDeque::new();
    for &f in &a.finals {
        if scc_size[scc[f]] > 1 || has_self_loop[f] {
            live[f] = true;
            queue.push_back(f);
        }
    }
    while let Some(q) = queue.pop_front() {
        for &p in &back[q] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }
    let reach = (0..a.states).filter(|&q| reach[q]).collect::<BTreeSet<_>>();
    let live = (0..a.states).filter(|&q| live[q]).collect::<BTreeSet<_>>();
    let keep: Vec<usize> = (0..a.states)
        .filter(|q| reach.contains(q) && live.contains(q))
        .collect();
    if !keep.contains(&a.initial) {
        return None;
    }
    let remap: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let transitions: BTreeSet<_> = a
        .transitions
        .iter()
        .filter(|(q, _, q2)| remap.contains_key(q) && remap.contains_key(q2))
        .map(|&(q, x, q2)| (remap[&q], x, remap[&q2]))
        .collect();
    let finals: BTreeSet<usize> = a
        .finals
        .iter()
        .filter_map(|f| remap.get(f).copied())
        .collect();
    Some(
        BuchiAutomaton::new(keep.len(), remap[&a.initial], finals, a.alphabet.clone(), transitions)
            .unwrap(),
    )
}

/// Largest direct simulation preorder, then merge mutually similar states.
fn quotient_by_simulation(a: &BuchiAutomaton) -> BuchiAutomaton {
    let n = a.states;
    let mut sim = vec![true; n * n];
    for q in 0..n {
        for r in 0..n {
            if a.finals.contains(&q) && !a.finals.contains(&r) {
                sim[q * n + r] = false;
            }
        }
    }
    loop {
        let mut changed = false;
        for q in 0..n {
            for r in 0..n {
                if !sim[q * n + r] {
                    continue;
                }
                let ok = a.alphabet.letters().all(|x| {
                    a.succ(q, x)
                        .all(|q2| a.succ(r, x).any(|r2| sim[q2 * n + r2]))
                });
                if !ok {
                    sim[q * n + r] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    // representative: least mutually-similar state
    let rep: Vec<usize> = (0..n)
        .map(|q| (0..n).find(|&r| sim[q * n + r] && sim[r * n + q]).unwrap())
        .collect();
    let classes: Vec<usize> = {
        let mut cs: Vec<usize> = rep.clone();
        cs.sort_unstable();
        cs.dedup();
        cs
    };
    let remap: HashMap<usize, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let transitions: BTreeSet<_> = a
        .transitions
        .iter()
        .map(|&(q, x, q2)| (remap[&rep[q]], x, remap[&rep[q2]]))
        .collect();
    let finals: BTreeSet<usize> = a.finals.iter().map(|&f| remap[&rep[f]]).collect();
    BuchiAutomaton::new(
        classes.len(),
        remap[&rep[a.initial]],
        finals,
        a.alphabet.clone(),
        transitions,
    )
    .unwrap()
}

pub fn buchi_boolean(
    kind: BoolKind,
    a: &BuchiAutomaton,
    b: Option<&BuchiAutomaton>,
) -> Result<BuchiAutomaton> {
    buchi_boolean_capped(kind, a, b, DEFAULT_STATE_CAP)
}

pub fn buchi_boolean_capped(
    kind: BoolKind,
    a: &BuchiAutomaton,
    b: Option<&BuchiAutomaton>,
    cap: usize,
) -> Result<BuchiAutomaton> {
    match kind {
        BoolKind::Union => buchi_union(a, b.ok_or(Error::Invalid("union needs two operands".into()))?),
        BoolKind::Intersect => buchi_intersect(
            a,
            b.ok_or(Error::Invalid("intersect needs two operands".into()))?,
            cap,
        ),
        BoolKind::Complement => {
            if b.is_some() {
                return Err(Error::Invalid("complement takes one operand".into()));
            }
            buchi_complement(a, cap)
        }
    }
}

/// Existentially project away the given propositions.
pub fn buchi_project(a: &BuchiAutomaton, drop: &BTreeSet<String>) -> Result<BuchiAutomaton> {
    let props = a.alphabet.prop_set()?;
    for d in drop {
        if props.index_of(d).is_none() {
            return Err(Error::Invalid(format!("unknown proposition {d}")));
        }
    }
    let kept: Vec<&str> = props
        .names()
        .iter()
        .filter(|n| !drop.contains(*n))
        .map(|s| s.as_str())
        .collect();
    let new_alpha = Alphabet::props(kept.iter().map(|s| s.to_string()))?;
    let new_props = new_alpha.prop_set()?.clone();
    let map = |letter: Letter| -> Letter {
        let names: Vec<&str> = props
            .props_of(letter)
            .into_iter()
            .filter(|n| !drop.contains(*n))
            .collect();
        new_props.letter_of(names).unwrap()
    };
    let transitions: BTreeSet<(usize, Letter, usize)> = a
        .transitions
        .iter()
        .map(|&(q, x, q2)| (q, map(x), q2))
        .collect();
    BuchiAutomaton::new(a.states, a.initial, a.finals.clone(), new_alpha, transitions)
}

/// All lasso words with bounded stem and cycle lengths over an alphabet of
/// the given size (cycles nonempty).
pub fn all_lassos(letters: usize, max_stem: usize, max_cycle: usize) -> Vec<LassoWord> {
    fn words(letters: usize, len: usize) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..letters).map(move |a| {
                        let mut w2 = w.clone();
                        w2.push(a);
                        w2
                    })
                })
                .collect();
        }
        out
    }
    let mut out = Vec::new();
    for s in 0..=max_stem {
        for c in 1..=max_cycle {
            for stem in words(letters, s) {
                for cycle in words(letters, c) {
                    out.push(LassoWord::new(stem.clone(), cycle).unwrap());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::symbols(["a", "b"]).unwrap()
    }

    /// One state, final iff `fin`, self-loop on letter 0.
    fn loop_a(fin: bool) -> BuchiAutomaton {
        BuchiAutomaton::new(1, 0, if fin { vec![0] } else { vec![] }, ab(), [(0, 0, 0)]).unwrap()
    }

    /// "Infinitely many a" over {a,b}: final sink re-entered on every a.
    fn inf_a() -> BuchiAutomaton {
        BuchiAutomaton::new(2, 0, [1], ab(), [(0, 0, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0)])
            .unwrap()
    }

    fn inf_b() -> BuchiAutomaton {
        BuchiAutomaton::new(2, 0, [1], ab(), [(0, 1, 1), (0, 0, 0), (1, 1, 1), (1, 0, 0)])
            .unwrap()
    }

    /// "Finitely many a": guess the switch point, then b-only.
    fn fin_a() -> BuchiAutomaton {
        BuchiAutomaton::new(
            2,
            0,
            [1],
            ab(),
            [(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn emptiness_basics() {
        let (e, w) = buchi_empty(&loop_a(false));
        assert!(e && w.is_none());
        let (e, w) = buchi_empty(&loop_a(true));
        assert!(!e);
        let w = w.unwrap();
        assert!(buchi_member(&loop_a(true), &w).unwrap());
        let (e, w) = buchi_empty(&fin_a());
        assert!(!e);
        let w = w.unwrap();
        assert!(buchi_member(&fin_a(), &w).unwrap());
        assert!(w.cycle.iter().all(|&x| x == 1), "tail must be b-only");
    }

    #[test]
    fn membership_basics() {
        // (b)(ab)^ω has infinitely many a
        let w = LassoWord::new(vec![1], vec![0, 1]).unwrap();
        assert!(buchi_member(&inf_a(), &w).unwrap());
        // (aaaaa)(b)^ω does not
        let w = LassoWord::new(vec![0; 5], vec![1]).unwrap();
        assert!(!buchi_member(&inf_a(), &w).unwrap());
        assert!(buchi_member(&fin_a(), &w).unwrap());
    }

    #[test]
    fn union_with_empty_is_identity() {
        let empty = loop_a(false);
        let u = buchi_boolean(BoolKind::Union, &inf_a(), Some(&empty)).unwrap();
        for w in all_lassos(2, 3, 3) {
            assert_eq!(
                buchi_member(&u, &w).unwrap(),
                buchi_member(&inf_a(), &w).unwrap()
            );
        }
    }

    #[test]
    fn intersect_inf_a_inf_b() {
        let i = buchi_boolean(BoolKind::Intersect, &inf_a(), Some(&inf_b())).unwrap();
        let abw = LassoWord::new(vec![], vec![0, 1]).unwrap();
        let aw = LassoWord::new(vec![], vec![0]).unwrap();
        assert!(buchi_member(&i, &abw).unwrap());
        assert!(!buchi_member(&i, &aw).unwrap());
    }

    #[test]
    fn complement_accepts_rejected_word() {
        let c = buchi_boolean(BoolKind::Complement, &inf_a(), None).unwrap();
        let w = LassoWord::new(vec![0; 5], vec![1]).unwrap();
        assert!(buchi_member(&c, &w).unwrap());
    }

    #[test]
    fn boolean_ops_respect_membership_on_samples() {
        let cases = [inf_a(), inf_b(), fin_a(), loop_a(true)];
        let sample = all_lassos(2, 3, 3);
        for a in &cases {
            let c = buchi_boolean(BoolKind::Complement, a, None).unwrap();
            for w in &sample {
                assert_eq!(
                    buchi_member(&c, w).unwrap(),
                    !buchi_member(a, w).unwrap(),
                    "complement mismatch on {w:?}"
                );
            }
            for b in &cases {
                let i = buchi_boolean(BoolKind::Intersect, a, Some(b)).unwrap();
                let u = buchi_boolean(BoolKind::Union, a, Some(b)).unwrap();
                for w in &sample {
                    let (ma, mb) = (buchi_member(a, w).unwrap(), buchi_member(b, w).unwrap());
                    assert_eq!(buchi_member(&i, w).unwrap(), ma && mb);
                    assert_eq!(buchi_member(&u, w).unwrap(), ma || mb);
                }
            }
        }
    }

    #[test]
    fn double_complement_is_membership_equivalent() {
        for a in [inf_a(), fin_a()] {
            let cc = buchi_complement(&buchi_complement(&a, DEFAULT_STATE_CAP).unwrap(), 10_000_000)
                .unwrap();
            for w in all_lassos(2, 2, 2) {
                assert_eq!(buchi_member(&cc, &w).unwrap(), buchi_member(&a, &w).unwrap());
            }
        }
    }

    #[test]
    fn double_complement_on_random_automata() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let sample = all_lassos(2, 3, 3);
        for round in 0..20 {
            let n = rng.gen_range(1..=4usize);
            let mut trans = Vec::new();
            for q in 0..n {
                for x in 0..2usize {
                    for q2 in 0..n {
                        if rng.gen_bool(0.4) {
                            trans.push((q, x, q2));
                        }
                    }
                }
            }
            let finals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let a = BuchiAutomaton::new(n, 0, finals, ab(), trans).unwrap();
            let c = buchi_complement(&a, DEFAULT_STATE_CAP).unwrap();
            let cc = buchi_complement(&c, DEFAULT_STATE_CAP).unwrap();
            for w in &sample {
                assert_eq!(
                    buchi_member(&c, w).unwrap(),
                    !buchi_member(&a, w).unwrap(),
                    "round {round} complement mismatch on {w:?}"
                );
                assert_eq!(
                    buchi_member(&cc, w).unwrap(),
                    buchi_member(&a, w).unwrap(),
                    "round {round} double complement mismatch on {w:?}"
                );
            }
        }
    }

    #[test]
    fn complement_respects_cap() {
        match buchi_complement(&inf_a(), 2) {
            Err(Error::ResourceCap(_, 2)) => {}
            other => panic!("expected resource cap error, got {other:?}"),
        }
    }

    #[test]
    fn projection_examples() {
        let alpha = Alphabet::props(["p", "q"]).unwrap();
        let props = alpha.prop_set().unwrap().clone();
        let pq = props.letter_of(["p", "q"]).unwrap();
        // "p∧q at position 0, anything after"
        let mut trans = vec![(0usize, pq, 1usize)];
        for x in 0..4 {
            trans.push((1, x, 1));
        }
        let a = BuchiAutomaton::new(2, 0, [1], alpha, trans).unwrap();
        // drop ∅ keeps membership
        let same = buchi_project(&a, &BTreeSet::new()).unwrap();
        for w in all_lassos(4, 2, 1) {
            assert_eq!(
                buchi_member(&same, &w).unwrap(),
                buchi_member(&a, &w).unwrap()
            );
        }
        // drop {q}: (p)(∅)^ω is now accepted
        let proj = buchi_project(&a, &BTreeSet::from(["q".to_string()])).unwrap();
        let p = proj.alphabet.prop_set().unwrap().letter_of(["p"]).unwrap();
        let none = proj.alphabet.prop_set().unwrap().letter_of([]).unwrap();
        let w = LassoWord::new(vec![p], vec![none]).unwrap();
        assert!(buchi_member(&proj, &w).unwrap());
    }

    #[test]
    fn projection_does_not_commute_with_complement() {
        // "p at position 0" over {p}; dropping p first loses the constraint,
        // so complement-then-project and project-then-complement differ
        let alpha = Alphabet::props(["p"]).unwrap();
        let mut trans = vec![(0usize, 1usize, 1usize)];
        for x in 0..2 {
            trans.push((1, x, 1));
        }
        let a = BuchiAutomaton::new(2, 0, [1], alpha, trans).unwrap();
        let drop = BTreeSet::from(["p".to_string()]);
        let pc = buchi_complement(&buchi_project(&a, &drop).unwrap(), DEFAULT_STATE_CAP).unwrap();
        let cp = buchi_project(&buchi_complement(&a, DEFAULT_STATE_CAP).unwrap(), &drop).unwrap();
        let w = LassoWord::new(vec![], vec![0]).unwrap();
        let diff = buchi_member(&pc, &w).unwrap() != buchi_member(&cp, &w).unwrap();
        assert!(diff, "expected disagreement on the empty-letter word");
    }
}
