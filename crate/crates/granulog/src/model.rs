//! Shared model types: alphabets, finite trees, lasso words and tree
//! sequences, and regular infinite trees, together with their JSON forms.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A letter is an index into an [`Alphabet`].
///
/// For a propositional alphabet over n propositions the index is the bit
/// vector of the subset, so there are `2^n` letters.
pub type Letter = usize;

/// An ordered finite set of proposition names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropSet {
    names: Vec<String>,
}

impl PropSet {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::Invalid(format!("duplicate proposition {n:?}")));
            }
        }
        if names.len() > 16 {
            return Err(Error::ResourceCap("proposition count".into(), 16));
        }
        Ok(PropSet { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Letter encoding the given subset of propositions.
    pub fn letter_of<'a, I: IntoIterator<Item = &'a str>>(&self, props: I) -> Result<Letter> {
        let mut mask = 0usize;
        for p in props {
            let i = self
                .index_of(p)
                .ok_or_else(|| Error::Invalid(format!("unknown proposition {p:?}")))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn props_of(&self, letter: Letter) -> Vec<&str> {
        (0..self.names.len())
            .filter(|i| letter & (1 << i) != 0)
            .map(|i| self.names[i].as_str())
            .collect()
    }
}

/// The alphabet of an automaton or model: either subsets of a proposition
/// set or a plain table of named symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Alphabet {
    Props(PropSet),
    Symbols(Vec<String>),
}

impl Alphabet {
    pub fn symbols<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::Invalid(format!("duplicate symbol {n:?}")));
            }
        }
        Ok(Alphabet::Symbols(names))
    }

    pub fn props<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Result<Self> {
        Ok(Alphabet::Props(PropSet::new(names)?))
    }

    pub fn len(&self) -> usize {
        match self {
            Alphabet::Props(p) => 1usize << p.len(),
            Alphabet::Symbols(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.len()
    }

    pub fn prop_set(&self) -> Result<&PropSet> {
        match self {
            Alphabet::Props(p) => Ok(p),
            Alphabet::Symbols(_) => Err(Error::NotPropositional),
        }
    }

    pub fn letter_name(&self, letter: Letter) -> String {
        match self {
            Alphabet::Props(p) => {
                let props = p.props_of(letter);
                if props.is_empty() {
                    "{}".into()
                } else {
                    format!("{{{}}}", props.join(","))
                }
            }
            Alphabet::Symbols(s) => s
                .get(letter)
                .cloned()
                .unwrap_or_else(|| format!("?{letter}")),
        }
    }

    pub fn symbol_letter(&self, name: &str) -> Result<Letter> {
        match self {
            Alphabet::Symbols(s) => s
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Invalid(format!("unknown symbol {name:?}"))),
            Alphabet::Props(_) => Err(Error::Invalid(
                "symbol lookup on propositional alphabet".into(),
            )),
        }
    }
}

/// A complete k-ary finite tree: every internal node has exactly k children
/// and all leaves sit at the same depth.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteKTree {
    pub k: usize,
    pub letter: Letter,
    pub children: Vec<FiniteKTree>,
}

impl FiniteKTree {
    pub fn leaf(k: usize, letter: Letter) -> Self {
        FiniteKTree {
            k,
            letter,
            children: Vec::new(),
        }
    }

    pub fn node(k: usize, letter: Letter, children: Vec<FiniteKTree>) -> Result<Self> {
        if children.len() != k {
            return Err(Error::Arity {
                path: "node".into(),
                expected: k,
                found: children.len(),
            });
        }
        let h = children[0].height();
        for c in &children {
            if c.k != k {
                return Err(Error::Mismatch("child branching factor".into()));
            }
            if c.height() != h {
                return Err(Error::Invalid("children of unequal height".into()));
            }
        }
        Ok(FiniteKTree {
            k,
            letter,
            children,
        })
    }

    pub fn height(&self) -> usize {
        match self.children.first() {
            None => 0,
            Some(c) => 1 + c.height(),
        }
    }

    /// Uniform tree of the given height, every node carrying `letter`.
    pub fn uniform(k: usize, height: usize, letter: Letter) -> Self {
        if height == 0 {
            FiniteKTree::leaf(k, letter)
        } else {
            let child = FiniteKTree::uniform(k, height - 1, letter);
            FiniteKTree {
                k,
                letter,
                children: vec![child; k],
            }
        }
    }
}

/// An almost k-ary tree: a root with exactly k-1 complete k-ary subtrees of
/// equal height, or a bare root at height 0.
///
/// When the tree arises from an increasing tree sequence, the k-1 subtrees
/// sit in directions `1..k` of the root (direction 0 is the deleted
/// leftmost subtree), and the path operators treat them that way.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlmostKTree {
    pub k: usize,
    pub letter: Letter,
    pub children: Vec<FiniteKTree>,
}

impl AlmostKTree {
    pub fn root(k: usize, letter: Letter) -> Self {
        AlmostKTree {
            k,
            letter,
            children: Vec::new(),
        }
    }

    pub fn node(k: usize, letter: Letter, children: Vec<FiniteKTree>) -> Result<Self> {
        if children.len() != k - 1 {
            return Err(Error::Arity {
                path: "almost root".into(),
                expected: k - 1,
                found: children.len(),
            });
        }
        let h = children[0].height();
        for c in &children {
            if c.k != k {
                return Err(Error::Mismatch("child branching factor".into()));
            }
            if c.height() != h {
                return Err(Error::Invalid("children of unequal height".into()));
            }
        }
        Ok(AlmostKTree {
            k,
            letter,
            children,
        })
    }

    pub fn height(&self) -> usize {
        match self.children.first() {
            None => 0,
            Some(c) => 1 + c.height(),
        }
    }

    pub fn uniform(k: usize, height: usize, letter: Letter) -> Self {
        if height == 0 {
            AlmostKTree::root(k, letter)
        } else {
            let child = FiniteKTree::uniform(k, height - 1, letter);
            AlmostKTree {
                k,
                letter,
                children: vec![child; k - 1],
            }
        }
    }
}

/// An ultimately periodic word stem·loop^ω.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("lasso loop must be nonempty".into()));
        }
        Ok(LassoWord { stem, cycle })
    }

    /// Letter at position `i` of the denoted infinite word.
    pub fn at(&self, i: usize) -> Letter {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Number of distinct position classes (stem plus one loop copy).
    pub fn period_len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Canonical index of the position following class `i`.
    pub fn next(&self, i: usize) -> usize {
        if i + 1 < self.period_len() {
            i + 1
        } else {
            self.stem.len()
        }
    }
}

/// One element of a lasso tree sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InnerModel {
    Tree(FiniteKTree),
    Almost(AlmostKTree),
    Word(LassoWord),
}

impl InnerModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InnerModel::Tree(_) => "tree",
            InnerModel::Almost(_) => "almost-tree",
            InnerModel::Word(_) => "lasso-word",
        }
    }
}

/// An ultimately periodic sequence of inner objects: a finitely
/// representable element of S(S(Σ)) or S(H_k(Σ)).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoTreeSeq {
    pub stem: Vec<InnerModel>,
    pub cycle: Vec<InnerModel>,
}

impl LassoTreeSeq {
    pub fn new(stem: Vec<InnerModel>, cycle: Vec<InnerModel>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("lasso loop must be nonempty".into()));
        }
        let kind = cycle[0].kind_name();
        for m in stem.iter().chain(cycle.iter()) {
            if m.kind_name() != kind {
                return Err(Error::KindMismatch(format!(
                    "mixed element kinds {} and {}",
                    kind,
                    m.kind_name()
                )));
            }
        }
        Ok(LassoTreeSeq { stem, cycle })
    }

    pub fn at(&self, i: usize) -> &InnerModel {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn period_len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn next(&self, i: usize) -> usize {
        if i + 1 < self.period_len() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    pub fn element_kind(&self) -> &'static str {
        self.cycle[0].kind_name()
    }
}

/// A finite generator for a regular infinite k-ary tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularTree {
    pub k: usize,
    pub start: usize,
    pub vertices: Vec<RegVertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegVertex {
    pub letter: Letter,
    pub succ: Vec<usize>,
}

impl RegularTree {
    pub fn new(k: usize, start: usize, vertices: Vec<RegVertex>) -> Result<Self> {
        if vertices.is_empty() || start >= vertices.len() {
            return Err(Error::Invalid("regular tree start out of range".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.succ.len() != k {
                return Err(Error::Arity {
                    path: format!("vertex {i}"),
                    expected: k,
                    found: v.succ.len(),
                });
            }
            if v.succ.iter().any(|&s| s >= vertices.len()) {
                return Err(Error::Invalid(format!("vertex {i} successor out of range")));
            }
        }
        Ok(RegularTree { k, start, vertices })
    }
}

/// A parsed model value of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tree(Alphabet, FiniteKTree),
    Almost(Alphabet, AlmostKTree),
    Word(Alphabet, LassoWord),
    TreeSeq(Alphabet, LassoTreeSeq),
    Regular(Alphabet, RegularTree),
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Model::Tree(..) => "tree",
            Model::Almost(..) => "almost-tree",
            Model::Word(..) => "lasso-word",
            Model::TreeSeq(..) => "lasso-treeseq",
            Model::Regular(..) => "regular-tree",
        };
        write!(f, "{kind}")
    }
}
