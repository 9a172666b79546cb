//! Rabin automata on infinite k-ary trees: emptiness with a regular witness,
//! membership of regular trees, union, projection. Emptiness and membership
//! reduce to parity games via index appearance records.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::game::ParityGame;
use crate::model::{Alphabet, Letter, RegVertex, RegularTree};

/// Default cap on game arena vertices.
pub const DEFAULT_ARENA_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RabinTreeAutomaton {
    pub k: usize,
    pub states: usize,
    pub initial: usize,
    pub alphabet: Alphabet,
    pub transitions: BTreeSet<(usize, Letter, Vec<usize>)>,
    /// A path is accepted iff for some pair (L, U) it visits L finitely and
    /// U infinitely often.
    pub pairs: Vec<(BTreeSet<usize>, BTreeSet<usize>)>,
}

impl RabinTreeAutomaton {
    pub fn new(
        k: usize,
        states: usize,
        initial: usize,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (usize, Letter, Vec<usize>)>,
        pairs: Vec<(BTreeSet<usize>, BTreeSet<usize>)>,
    ) -> Result<Self> {
        if k < 1 {
            return Err(Error::Invalid("tree arity must be positive".into()));
        }
        if states == 0 || initial >= states {
            return Err(Error::Invalid("initial state out of range".into()));
        }
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        for (q, a, cs) in &transitions {
            if cs.len() != k {
                return Err(Error::Arity {
                    path: "transitions".into(),
                    expected: k,
                    found: cs.len(),
                });
            }
            if *q >= states || *a >= alphabet.len() || cs.iter().any(|&c| c >= states) {
                return Err(Error::Invalid("transition out of range".into()));
            }
        }
        for (l, u) in &pairs {
            if l.iter().chain(u).any(|&q| q >= states) {
                return Err(Error::Invalid("acceptance pair out of range".into()));
            }
        }
        Ok(RabinTreeAutomaton {
            k,
            states,
            initial,
            alphabet,
            transitions,
            pairs,
        })
    }

    fn trans_from(&self, q: usize) -> impl Iterator<Item = &(usize, Letter, Vec<usize>)> {
        self.transitions.range((q, 0, Vec::new())..).take_while(move |(p, _, _)| *p == q)
    }
}

/// Index appearance record: a permutation of pair indices; visited states
/// move their L-hit indices to the front.
type Record = Vec<u8>;

fn record_update(pi: &Record, l_hit: &[bool]) -> Record {
    let mut front: Record = pi.iter().copied().filter(|&i| l_hit[i as usize]).collect();
    front.extend(pi.iter().copied().filter(|&i| !l_hit[i as usize]));
    front
}

/// Priority of visiting state q with record pi (positions are 1-based; the
/// record is inspected before the update). Max-parity, even favors
/// acceptance.
fn visit_priority(a: &RabinTreeAutomaton, q: usize, pi: &Record) -> (u32, Record) {
    let mut l_hit = vec![false; a.pairs.len()];
    let mut e = 0u32;
    let mut u = 0u32;
    for (pos, &i) in pi.iter().enumerate() {
        let (l, uu) = &a.pairs[i as usize];
        let pos1 = pos as u32 + 1;
        if l.contains(&q) {
            l_hit[i as usize] = true;
            e = e.max(pos1);
        }
        if uu.contains(&q) {
            u = u.max(pos1);
        }
    }
    let p = if e == 0 && u == 0 {
        1
    } else if e >= u {
        2 * e + 1
    } else {
        2 * u
    };
    (p, record_update(pi, &l_hit))
}

/// Arena vertex. `tv` is a generator vertex for membership games and 0 for
/// the emptiness game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum V {
    /// Automaton to move: pick a transition.
    State { tv: usize, q: usize, pi: Record },
    /// Pathfinder to move: pick a direction of the chosen transition.
    Choice { tv: usize, letter: Letter, children: Vec<usize>, pi: Record },
    /// Automaton is stuck; Pathfinder wins.
    Reject,
}

struct Arena {
    game: ParityGame,
    verts: Vec<V>,
}

/// Build the acceptance game. `tree` is Some for membership (the automaton
/// must follow the generator's letters and directions), None for emptiness.
fn build_arena(
    a: &RabinTreeAutomaton,
    tree: Option<&RegularTree>,
    cap: usize,
) -> Result<Arena> {
    let id: Record = (0..a.pairs.len() as u8).collect();
    let start = V::State {
        tv: tree.map_or(0, |t| t.start),
        q: a.initial,
        pi: id,
    };
    let mut verts = vec![start.clone()];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut owner = Vec::new();
    let mut priority = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut head = 0;
    while head < verts.len() {
        let v = verts[head].clone();
        head += 1;
        let (own, pri, outs): (u8, u32, Vec<V>) = match &v {
            V::Reject => (0, 1, vec![V::Reject]),
            V::State { tv, q, pi } => {
                let (pri, pi2) = visit_priority(a, *q, pi);
                let mut outs = Vec::new();
                for (_, letter, cs) in a.trans_from(*q) {
                    if let Some(t) = tree {
                        if t.vertices[*tv].letter != *letter {
                            continue;
                        }
                    }
                    outs.push(V::Choice {
                        tv: *tv,
                        letter: *letter,
                        children: cs.clone(),
                        pi: pi2.clone(),
                    });
                }
                if outs.is_empty() {
                    outs.push(V::Reject);
                }
                (0, pri, outs)
            }
            V::Choice { tv, children, pi, .. } => {
                let outs = (0..a.k)
                    .map(|d| V::State {
                        tv: tree.map_or(0, |t| t.vertices[*tv].succ[d]),
                        q: children[d],
                        pi: pi.clone(),
                    })
                    .collect();
                (1, 0, outs)
            }
        };
        owner.push(own);
        priority.push(pri);
        let mut row = Vec::with_capacity(outs.len());
        for o in outs {
            let next = verts.len();
            let i = *index.entry(o.clone()).or_insert_with(|| {
                verts.push(o);
                next
            });
            row.push(i);
        }
        succ.push(row);
        if verts.len() > cap {
            return Err(Error::ResourceCap("game arena vertices".into(), cap));
        }
    }
    Ok(Arena {
        game: ParityGame { owner, priority, succ },
        verts,
    })
}

pub fn rabin_empty(a: &RabinTreeAutomaton) -> Result<(bool, Option<RegularTree>)> {
    rabin_empty_capped(a, DEFAULT_ARENA_CAP)
}

pub fn rabin_empty_capped(
    a: &RabinTreeAutomaton,
    cap: usize,
) -> Result<(bool, Option<RegularTree>)> {
    let arena = build_arena(a, None, cap)?;
    let sol = arena.game.solve();
    if sol.winner[0] != 0 {
        return Ok((true, None));
    }
    // unfold the memoryless strategy into a tree generator over the
    // automaton's winning region
    let mut verts: Vec<RegVertex> = Vec::new();
    let mut map: HashMap<usize, usize> = HashMap::new(); // arena state vertex -> generator index
    let mut queue = vec![0usize];
    map.insert(0, 0);
    verts.push(RegVertex { letter: 0, succ: vec![0; a.k] });
    while let Some(v) = queue.pop() {
        let choice = sol.strategy[v].expect("winner owns state vertices");
        let (letter, row) = match &arena.verts[choice] {
            V::Choice { letter, .. } => (*letter, &arena.game.succ[choice]),
            _ => unreachable!("strategy at a state vertex picks a transition"),
        };
        let mut succ_idx = Vec::with_capacity(a.k);
        for &child in row {
            let gi = match map.get(&child) {
                Some(&gi) => gi,
                None => {
                    let gi = verts.len();
                    map.insert(child, gi);
                    verts.push(RegVertex { letter: 0, succ: vec![0; a.k] });
                    queue.push(child);
                    gi
                }
            };
            succ_idx.push(gi);
        }
        let gi = map[&v];
        verts[gi] = RegVertex { letter, succ: succ_idx };
    }
    let witness = RegularTree::new(a.k, 0, verts)?;
    Ok((false, Some(witness)))
}

pub fn rabin_member(a: &RabinTreeAutomaton, t: &RegularTree) -> Result<bool> {
    rabin_member_capped(a, t, DEFAULT_ARENA_CAP)
}

pub fn rabin_member_capped(a: &RabinTreeAutomaton, t: &RegularTree, cap: usize) -> Result<bool> {
    if t.k != a.k {
        return Err(Error::Mismatch(format!(
            "tree arity {} vs automaton arity {}",
            t.k, a.k
        )));
    }
    if t.vertices.iter().any(|v| v.letter >= a.alphabet.len()) {
        return Err(Error::AlphabetMismatch("generator letter out of range".into()));
    }
    let arena = build_arena(a, Some(t), cap)?;
    let sol = arena.game.solve();
    Ok(sol.winner[0] == 0)
}

pub fn rabin_union(a: &RabinTreeAutomaton, b: &RabinTreeAutomaton) -> Result<RabinTreeAutomaton> {
    if a.k != b.k {
        return Err(Error::Mismatch("tree arities differ".into()));
    }
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch("operands have different alphabets".into()));
    }
    // fresh initial state copies the initial transitions of both operands
    let oa = 1;
    let ob = 1 + a.states;
    let states = 1 + a.states + b.states;
    let mut transitions = BTreeSet::new();
    for (q, x, cs) in &a.transitions {
        let cs2: Vec<usize> = cs.iter().map(|c| c + oa).collect();
        if *q == a.initial {
            transitions.insert((0, *x, cs2.clone()));
        }
        transitions.insert((q + oa, *x, cs2));
    }
    for (q, x, cs) in &b.transitions {
        let cs2: Vec<usize> = cs.iter().map(|c| c + ob).collect();
        if *q == b.initial {
            transitions.insert((0, *x, cs2.clone()));
        }
        transitions.insert((q + ob, *x, cs2));
    }
    // a run commits to one component after the root, so component-local
    // pairs decide every path; the fresh root is in no pair
    let mut pairs = Vec::new();
    for (l, u) in &a.pairs {
        pairs.push((
            l.iter().map(|q| q + oa).collect(),
            u.iter().map(|q| q + oa).collect(),
        ));
    }
    for (l, u) in &b.pairs {
        pairs.push((
            l.iter().map(|q| q + ob).collect(),
            u.iter().map(|q| q + ob).collect(),
        ));
    }
    RabinTreeAutomaton::new(a.k, states, 0, a.alphabet.clone(), transitions, pairs)
}

pub fn rabin_project(a: &RabinTreeAutomaton, drop: &BTreeSet<String>) -> Result<RabinTreeAutomaton> {
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
    RabinTreeAutomaton::new(
        a.k,
        a.states,
        a.initial,
        new_alpha,
        a.transitions
            .iter()
            .map(|(q, x, cs)| (*q, map(*x), cs.clone())),
        a.pairs.clone(),
    )
}
