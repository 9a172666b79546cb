//! Two-layer temporal logic front end: linear-time operators over infinite
//! sequences whose positions carry inner word or tree formulas. Provides
//! parsing, direct evaluation on lasso models, translation of the outer
//! layer to Büchi automata and of the inner layer to finite tree automata,
//! alphabet partitioning, compilation to temporalized automata, and
//! satisfiability checking over the three supported model classes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::buchi::{buchi_boolean_capped, buchi_reduce, BoolKind, BuchiAutomaton, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::ftree::{
    fta_boolean_capped, fta_complement_within, fta_determinize, fta_project, fta_shape, fta_trim,
    RootMode, TreeAutomaton,
    DEFAULT_DET_CAP,
};
use crate::model::{Alphabet, FiniteKTree, InnerModel, LassoTreeSeq, LassoWord, Letter, PropSet};
use crate::temporalized::{its_empty, t_empty, InnerAutomaton, ItsCertificate, TemporalizedAutomaton};

/// Model class for satisfiability checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    /// Infinite sequences of infinite words.
    SeqOfSeq,
    /// Infinite sequences of complete k-ary trees of a fixed height.
    Layered { k: usize, depth: usize },
    /// Increasing sequences of almost k-ary trees (upward unbounded layers).
    Uuls { k: usize },
}

/// Outer-layer formula. Atoms are bracketed inner formulas or propositions
/// bound by an outer existential quantifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(Inner),
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Finally(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
}

/// Inner-layer formula. State and path constructors share one type; their
/// placement is validated per use: on tree elements, temporal operators must
/// sit under a path quantifier, while on word elements the path quantifiers
/// and directed next are rejected.
///
/// Path semantics: a path is a maximal node-to-leaf sequence. `Next` is
/// strong (false at the last node); `DirNext(d, φ)` is weak at the last node
/// and otherwise requires the next node to be child `d` and satisfy φ.
/// At the root of an almost k-ary tree the children sit in directions
/// `1..k`; direction 0 is the deleted subtree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Inner {
    True,
    False,
    Prop(String),
    Not(Box<Inner>),
    And(Box<Inner>, Box<Inner>),
    Or(Box<Inner>, Box<Inner>),
    Imp(Box<Inner>, Box<Inner>),
    E(Box<Inner>),
    A(Box<Inner>),
    Exists(String, Box<Inner>),
    Next(Box<Inner>),
    DirNext(usize, Box<Inner>),
    Finally(Box<Inner>),
    Globally(Box<Inner>),
    Until(Box<Inner>, Box<Inner>),
}

/// Cap on position classes / tree nodes when enumerating quantifier
/// labelings during direct evaluation.
const LABEL_CAP: usize = 20;

// ---------------------------------------------------------------------------
// Lexer and parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrack,
    RBrack,
    LParen,
    RParen,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Ident(String),
}

#[derive(Debug, Clone)]
struct Located {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Located>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let (l, co) = (line, col);
        let simple = |t: Tok| Some((t, 1));
        let step = match c {
            '[' => simple(Tok::LBrack),
            ']' => simple(Tok::RBrack),
            '(' => simple(Tok::LParen),
            ')' => simple(Tok::RParen),
            '.' => simple(Tok::Dot),
            '!' => simple(Tok::Bang),
            '&' => simple(Tok::Amp),
            '|' => simple(Tok::Pipe),
            '-' if chars.get(i + 1) == Some(&'>') => Some((Tok::Arrow, 2)),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                Some((Tok::DArrow, 3))
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                Some((Tok::Ident(chars[i..j].iter().collect()), j - i))
            }
            _ => None,
        };
        match step {
            Some((tok, w)) => {
                out.push(Located { tok, line: l, col: co });
                i += w;
                col += w;
            }
            None => {
                return Err(Error::Syntax {
                    line: l,
                    col: co,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// One prefix operator recovered from an identifier such as `EX1G`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum OpTok {
    E,
    A,
    X,
    Xd(usize),
    F,
    G,
}

/// Split an identifier into a chain of prefix operators, if the whole
/// identifier consists of them (`EX0` → E, X₀). Otherwise `None`.
fn decompose_ops(s: &str) -> Option<Vec<OpTok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        match cs[i] {
            'E' => {
                out.push(OpTok::E);
                i += 1;
            }
            'A' => {
                out.push(OpTok::A);
                i += 1;
            }
            'F' => {
                out.push(OpTok::F);
                i += 1;
            }
            'G' => {
                out.push(OpTok::G);
                i += 1;
            }
            'X' => {
                i += 1;
                let start = i;
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    out.push(OpTok::X);
                } else {
                    let d: usize = cs[start..i].iter().collect::<String>().parse().ok()?;
                    out.push(OpTok::Xd(d));
                }
            }
            _ => return None,
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

struct Parser<'a> {
    toks: &'a [Located],
    pos: usize,
    k: usize,
    bound: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn loc(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.loc();
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn layering(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.loc();
        Error::Layering {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// Name bound by an `E<name>.` quantifier token pair, if present here.
    fn exists_name(&self) -> Option<String> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s.len() > 1
                && s.starts_with('E')
                && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Dot))
            {
                return Some(s[1..].to_string());
            }
        }
        None
    }

    // ---- outer layer ----

    fn outer(&mut self) -> Result<Formula> {
        if let Some(q) = self.exists_name() {
            self.pos += 2;
            self.bound.push(q.clone());
            let body = self.outer()?;
            self.bound.pop();
            return Ok(Formula::Exists(q, Box::new(body)));
        }
        self.outer_iff()
    }

    fn outer_iff(&mut self) -> Result<Formula> {
        let mut l = self.outer_imp()?;
        while self.peek() == Some(&Tok::DArrow) {
            self.pos += 1;
            let r = self.outer_imp()?;
            l = Formula::Iff(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn outer_imp(&mut self) -> Result<Formula> {
        let l = self.outer_or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let r = self.outer_imp()?;
            return Ok(Formula::Imp(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn outer_or(&mut self) -> Result<Formula> {
        let mut l = self.outer_and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let r = self.outer_and()?;
            l = Formula::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn outer_and(&mut self) -> Result<Formula> {
        let mut l = self.outer_until()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let r = self.outer_until()?;
            l = Formula::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn outer_until(&mut self) -> Result<Formula> {
        let l = self.outer_unary()?;
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "U") {
            self.pos += 1;
            let r = self.outer_until()?;
            return Ok(Formula::Until(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn outer_unary(&mut self) -> Result<Formula> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            return Ok(Formula::Not(Box::new(self.outer_unary()?)));
        }
        if self.exists_name().is_none() {
            if let Some(Tok::Ident(s)) = self.peek() {
                if s != "U" && s != "true" && s != "false" {
                    if let Some(ops) = decompose_ops(s) {
                        for op in &ops {
                            if matches!(op, OpTok::E | OpTok::A | OpTok::Xd(_)) {
                                return Err(self.layering(format!(
                                    "path operator in {s:?} outside an inner formula"
                                )));
                            }
                        }
                        self.pos += 1;
                        let mut f = self.outer_unary()?;
                        for op in ops.into_iter().rev() {
                            f = match op {
                                OpTok::X => Formula::Next(Box::new(f)),
                                OpTok::F => Formula::Finally(Box::new(f)),
                                OpTok::G => Formula::Globally(Box::new(f)),
                                _ => unreachable!(),
                            };
                        }
                        return Ok(f);
                    }
                }
            }
        }
        self.outer_primary()
    }

    fn outer_primary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::LBrack) => {
                self.pos += 1;
                let f = self.inner()?;
                match self.peek() {
                    Some(Tok::RBrack) => {
                        self.pos += 1;
                        Ok(Formula::Atom(f))
                    }
                    Some(Tok::DArrow) => {
                        Err(self.layering("<-> is an outer operator; not allowed inside [ ]"))
                    }
                    _ => Err(self.syntax("expected ]")),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.outer()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.syntax("expected )"));
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(s)) => {
                if self.bound.contains(s) {
                    let v = s.clone();
                    self.pos += 1;
                    Ok(Formula::Var(v))
                } else {
                    Err(self.layering(format!(
                        "identifier {s:?} used outside an inner formula; outer names must be quantified"
                    )))
                }
            }
            _ => Err(self.syntax("expected a formula")),
        }
    }

    // ---- inner layer ----

    fn inner(&mut self) -> Result<Inner> {
        if let Some(q) = self.exists_name() {
            self.pos += 2;
            let body = self.inner()?;
            return Ok(Inner::Exists(q, Box::new(body)));
        }
        self.inner_imp()
    }

    fn inner_imp(&mut self) -> Result<Inner> {
        let l = self.inner_or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let r = self.inner_imp()?;
            return Ok(Inner::Imp(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn inner_or(&mut self) -> Result<Inner> {
        let mut l = self.inner_and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let r = self.inner_and()?;
            l = Inner::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn inner_and(&mut self) -> Result<Inner> {
        let mut l = self.inner_until()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let r = self.inner_until()?;
            l = Inner::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn inner_until(&mut self) -> Result<Inner> {
        let l = self.inner_unary()?;
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "U") {
            self.pos += 1;
            let r = self.inner_until()?;
            return Ok(Inner::Until(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn inner_unary(&mut self) -> Result<Inner> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            return Ok(Inner::Not(Box::new(self.inner_unary()?)));
        }
        if self.exists_name().is_none() {
            if let Some(Tok::Ident(s)) = self.peek() {
                if s != "U" && s != "true" && s != "false" {
                    if let Some(ops) = decompose_ops(s) {
                        for op in &ops {
                            if let OpTok::Xd(d) = op {
                                if *d >= self.k {
                                    return Err(self.syntax(format!(
                                        "direction {d} out of range for arity {}",
                                        self.k
                                    )));
                                }
                            }
                        }
                        self.pos += 1;
                        let mut f = self.inner_unary()?;
                        for op in ops.into_iter().rev() {
                            f = match op {
                                OpTok::E => Inner::E(Box::new(f)),
                                OpTok::A => Inner::A(Box::new(f)),
                                OpTok::X => Inner::Next(Box::new(f)),
                                OpTok::Xd(d) => Inner::DirNext(d, Box::new(f)),
                                OpTok::F => Inner::Finally(Box::new(f)),
                                OpTok::G => Inner::Globally(Box::new(f)),
                            };
                        }
                        return Ok(f);
                    }
                }
            }
        }
        self.inner_primary()
    }

    fn inner_primary(&mut self) -> Result<Inner> {
        match self.peek() {
            Some(Tok::LBrack) => Err(self.layering("inner formulas cannot nest")),
            Some(Tok::DArrow) => Err(self.layering("<-> is an outer operator")),
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.inner()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.syntax("expected )"));
                }
                self.pos += 1;
                Ok(f)
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Inner::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Inner::False)
            }
            Some(Tok::Ident(s)) => {
                let p = s.clone();
                self.pos += 1;
                Ok(Inner::Prop(p))
            }
            _ => Err(self.syntax("expected an inner formula")),
        }
    }
}

/// Parse a formula in the published grammar; directed next indices must be
/// below the arity `k`.
pub fn parse_formula(text: &str, k: usize) -> Result<Formula> {
    if k < 2 {
        return Err(Error::Invalid("arity must be at least 2".into()));
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        k,
        bound: Vec::new(),
    };
    let f = p.outer()?;
    if p.pos < toks.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Formula files
// ---------------------------------------------------------------------------

/// Parse a `.tl` formula file. Lines starting with `#` are comments. The
/// file declares `semantics:` (one of `seq-of-seq`, `layered k=K depth=D`,
/// `uuls k=K`), `props:` (space-separated names), and `formula:`; the
/// formula may continue over the remaining lines.
pub fn parse_tl(text: &str) -> Result<(Semantics, PropSet, Formula)> {
    let mut sem: Option<Semantics> = None;
    let mut props: Option<PropSet> = None;
    let mut formula_text = String::new();
    let mut in_formula = false;
    for (lineno, line) in text.lines().enumerate() {
        let bad = |msg: String| Error::Syntax {
            line: lineno + 1,
            col: 1,
            msg,
        };
        if in_formula {
            formula_text.push_str(line);
            formula_text.push('\n');
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("semantics:") {
            let mut words = rest.split_whitespace();
            let head = words.next().unwrap_or("");
            let mut kv = BTreeMap::new();
            for w in words {
                match w.split_once('=') {
                    Some((key, val)) => {
                        let n: usize = val
                            .parse()
                            .map_err(|_| bad(format!("bad value in {w:?}")))?;
                        kv.insert(key.to_string(), n);
                    }
                    None => return Err(bad(format!("expected key=value, got {w:?}"))),
                }
            }
            let need = |key: &str| {
                kv.get(key)
                    .copied()
                    .ok_or_else(|| bad(format!("semantics {head:?} needs {key}=")))
            };
            sem = Some(match head {
                "seq-of-seq" => Semantics::SeqOfSeq,
                "layered" => Semantics::Layered {
                    k: need("k")?,
                    depth: need("depth")?,
                },
                "uuls" => Semantics::Uuls { k: need("k")? },
                other => return Err(bad(format!("unknown semantics {other:?}"))),
            });
        } else if let Some(rest) = trimmed.strip_prefix("props:") {
            props = Some(PropSet::new(rest.split_whitespace())?);
        } else if let Some(rest) = trimmed.strip_prefix("formula:") {
            formula_text.push_str(rest);
            formula_text.push('\n');
            in_formula = true;
        } else {
            return Err(bad(format!("unexpected line {trimmed:?}")));
        }
    }
    let sem = sem.ok_or_else(|| Error::Invalid("missing semantics: line".into()))?;
    let props = props.ok_or_else(|| Error::Invalid("missing props: line".into()))?;
    if !in_formula {
        return Err(Error::Invalid("missing formula: line".into()));
    }
    let k = match sem {
        Semantics::SeqOfSeq => 2,
        Semantics::Layered { k, .. } => k,
        Semantics::Uuls { k } => k,
    };
    let phi = parse_formula(&formula_text, k)?;
    Ok((sem, props, phi))
}

// ---------------------------------------------------------------------------
// Direct evaluation on lasso models
// ---------------------------------------------------------------------------

/// Evaluate the formula on an ultimately periodic sequence at a position.
/// Proposition names are resolved against `props`. Used as the independent
/// oracle for the compiler.
///
/// Existential set quantifiers over sequence positions range over labelings
/// that are constant on the position classes of the given lasso
/// representation; callers wanting finer labelings can unroll the lasso
/// first. Quantifiers inside finite tree elements are exact.
pub fn eval_formula(
    phi: &Formula,
    props: &PropSet,
    m: &LassoTreeSeq,
    position: usize,
) -> Result<bool> {
    let v = outer_truths(phi, props, m, &BTreeMap::new())?;
    let class = if position < m.stem.len() {
        position
    } else {
        m.stem.len() + (position - m.stem.len()) % m.cycle.len()
    };
    Ok(v[class])
}

/// Truth of the formula at every position class of the lasso.
fn outer_truths(
    phi: &Formula,
    props: &PropSet,
    m: &LassoTreeSeq,
    env: &BTreeMap<String, Vec<bool>>,
) -> Result<Vec<bool>> {
    let n = m.period_len();
    let zip2 = |a: Vec<bool>, b: Vec<bool>, f: fn(bool, bool) -> bool| -> Vec<bool> {
        a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
    };
    Ok(match phi {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Var(q) => env
            .get(q)
            .ok_or_else(|| Error::Invalid(format!("unquantified outer name {q:?}")))?
            .clone(),
        Formula::Atom(a) => {
            let mut v = Vec::with_capacity(n);
            for i in 0..n {
                v.push(eval_inner(a, props, m.at(i))?);
            }
            v
        }
        Formula::Not(s) => outer_truths(s, props, m, env)?
            .into_iter()
            .map(|x| !x)
            .collect(),
        Formula::And(a, b) => zip2(
            outer_truths(a, props, m, env)?,
            outer_truths(b, props, m, env)?,
            |x, y| x && y,
        ),
        Formula::Or(a, b) => zip2(
            outer_truths(a, props, m, env)?,
            outer_truths(b, props, m, env)?,
            |x, y| x || y,
        ),
        Formula::Imp(a, b) => zip2(
            outer_truths(a, props, m, env)?,
            outer_truths(b, props, m, env)?,
            |x, y| !x || y,
        ),
        Formula::Iff(a, b) => zip2(
            outer_truths(a, props, m, env)?,
            outer_truths(b, props, m, env)?,
            |x, y| x == y,
        ),
        Formula::Next(s) => {
            let v = outer_truths(s, props, m, env)?;
            (0..n).map(|i| v[m.next(i)]).collect()
        }
        Formula::Finally(s) => {
            let vs = outer_truths(s, props, m, env)?;
            let mut v = vec![false; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vs[i] || v[m.next(i)];
                }
            }
            v
        }
        Formula::Globally(s) => {
            let vs = outer_truths(s, props, m, env)?;
            let mut v = vec![true; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vs[i] && v[m.next(i)];
                }
            }
            v
        }
        Formula::Until(a, b) => {
            let va = outer_truths(a, props, m, env)?;
            let vb = outer_truths(b, props, m, env)?;
            let mut v = vec![false; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vb[i] || (va[i] && v[m.next(i)]);
                }
            }
            v
        }
        Formula::Exists(q, body) => {
            if n > LABEL_CAP {
                return Err(Error::ResourceCap("quantifier labeling classes".into(), LABEL_CAP));
            }
            let mut acc = vec![false; n];
            for mask in 0..(1usize << n) {
                let labeling: Vec<bool> = (0..n).map(|i| mask >> i & 1 != 0).collect();
                let mut env2 = env.clone();
                env2.insert(q.clone(), labeling);
                for (i, x) in outer_truths(body, props, m, &env2)?.into_iter().enumerate() {
                    acc[i] = acc[i] || x;
                }
            }
            acc
        }
    })
}

/// Evaluate an inner formula on one sequence element.
fn eval_inner(a: &Inner, props: &PropSet, m: &InnerModel) -> Result<bool> {
    match m {
        InnerModel::Word(w) => Ok(word_truths(a, props, w, &BTreeMap::new())?[0]),
        InnerModel::Tree(_) | InnerModel::Almost(_) => {
            let (nodes, root) = flatten(m);
            eval_state(a, props, &nodes, &BTreeMap::new(), root)
        }
    }
}

/// Truth of a word-layer formula at every position class of a lasso word.
fn word_truths(
    a: &Inner,
    props: &PropSet,
    w: &LassoWord,
    env: &BTreeMap<String, Vec<bool>>,
) -> Result<Vec<bool>> {
    let n = w.period_len();
    let zip2 = |x: Vec<bool>, y: Vec<bool>, f: fn(bool, bool) -> bool| -> Vec<bool> {
        x.into_iter().zip(y).map(|(p, q)| f(p, q)).collect()
    };
    Ok(match a {
        Inner::True => vec![true; n],
        Inner::False => vec![false; n],
        Inner::Prop(p) => {
            if let Some(v) = env.get(p) {
                v.clone()
            } else {
                let idx = props
                    .index_of(p)
                    .ok_or_else(|| Error::Invalid(format!("unknown proposition {p:?}")))?;
                (0..n).map(|i| w.at(i) & (1 << idx) != 0).collect()
            }
        }
        Inner::Not(s) => word_truths(s, props, w, env)?
            .into_iter()
            .map(|x| !x)
            .collect(),
        Inner::And(x, y) => zip2(
            word_truths(x, props, w, env)?,
            word_truths(y, props, w, env)?,
            |p, q| p && q,
        ),
        Inner::Or(x, y) => zip2(
            word_truths(x, props, w, env)?,
            word_truths(y, props, w, env)?,
            |p, q| p || q,
        ),
        Inner::Imp(x, y) => zip2(
            word_truths(x, props, w, env)?,
            word_truths(y, props, w, env)?,
            |p, q| !p || q,
        ),
        Inner::Next(s) => {
            let v = word_truths(s, props, w, env)?;
            (0..n).map(|i| v[w.next(i)]).collect()
        }
        Inner::Finally(s) => {
            let vs = word_truths(s, props, w, env)?;
            let mut v = vec![false; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vs[i] || v[w.next(i)];
                }
            }
            v
        }
        Inner::Globally(s) => {
            let vs = word_truths(s, props, w, env)?;
            let mut v = vec![true; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vs[i] && v[w.next(i)];
                }
            }
            v
        }
        Inner::Until(x, y) => {
            let vx = word_truths(x, props, w, env)?;
            let vy = word_truths(y, props, w, env)?;
            let mut v = vec![false; n];
            for _ in 0..=n {
                for i in 0..n {
                    v[i] = vy[i] || (vx[i] && v[w.next(i)]);
                }
            }
            v
        }
        Inner::Exists(q, body) => {
            if n > LABEL_CAP {
                return Err(Error::ResourceCap("quantifier labeling classes".into(), LABEL_CAP));
            }
            let mut acc = vec![false; n];
            for mask in 0..(1usize << n) {
                let labeling: Vec<bool> = (0..n).map(|i| mask >> i & 1 != 0).collect();
                let mut env2 = env.clone();
                env2.insert(q.clone(), labeling);
                for (i, x) in word_truths(body, props, w, &env2)?.into_iter().enumerate() {
                    acc[i] = acc[i] || x;
                }
            }
            acc
        }
        Inner::E(_) | Inner::A(_) | Inner::DirNext(..) => {
            return Err(Error::KindMismatch(
                "path operator on a word element".into(),
            ))
        }
    })
}

/// Flat node of a tree element; children carry the direction they occupy.
struct TNode {
    letter: Letter,
    children: Vec<(usize, usize)>,
}

fn flatten(m: &InnerModel) -> (Vec<TNode>, usize) {
    fn go(t: &FiniteKTree, nodes: &mut Vec<TNode>) -> usize {
        let children: Vec<(usize, usize)> = t
            .children
            .iter()
            .enumerate()
            .map(|(d, c)| (d, go(c, nodes)))
            .collect();
        nodes.push(TNode {
            letter: t.letter,
            children,
        });
        nodes.len() - 1
    }
    let mut nodes = Vec::new();
    let root = match m {
        InnerModel::Tree(t) => go(t, &mut nodes),
        InnerModel::Almost(t) => {
            let children: Vec<(usize, usize)> = t
                .children
                .iter()
                .enumerate()
                .map(|(s, c)| (s + 1, go(c, &mut nodes)))
                .collect();
            nodes.push(TNode {
                letter: t.letter,
                children,
            });
            nodes.len() - 1
        }
        InnerModel::Word(_) => unreachable!("word elements are evaluated separately"),
    };
    (nodes, root)
}

/// Maximal node-to-leaf paths starting at `u`; each entry records the node
/// and the direction taken to enter it (unused for the first entry).
fn paths_from(nodes: &[TNode], u: usize) -> Vec<Vec<(usize, usize)>> {
    if nodes[u].children.is_empty() {
        return vec![vec![(u, 0)]];
    }
    let mut out = Vec::new();
    for &(d, c) in &nodes[u].children {
        for mut tail in paths_from(nodes, c) {
            tail[0].1 = d;
            let mut p = Vec::with_capacity(tail.len() + 1);
            p.push((u, 0));
            p.extend(tail);
            out.push(p);
        }
    }
    out
}

fn eval_state(
    a: &Inner,
    props: &PropSet,
    nodes: &[TNode],
    env: &BTreeMap<String, Vec<bool>>,
    u: usize,
) -> Result<bool> {
    Ok(match a {
        Inner::True => true,
        Inner::False => false,
        Inner::Prop(p) => {
            if let Some(v) = env.get(p) {
                v[u]
            } else {
                let idx = props
                    .index_of(p)
                    .ok_or_else(|| Error::Invalid(format!("unknown proposition {p:?}")))?;
                nodes[u].letter & (1 << idx) != 0
            }
        }
        Inner::Not(s) => !eval_state(s, props, nodes, env, u)?,
        Inner::And(x, y) => {
            eval_state(x, props, nodes, env, u)? && eval_state(y, props, nodes, env, u)?
        }
        Inner::Or(x, y) => {
            eval_state(x, props, nodes, env, u)? || eval_state(y, props, nodes, env, u)?
        }
        Inner::Imp(x, y) => {
            !eval_state(x, props, nodes, env, u)? || eval_state(y, props, nodes, env, u)?
        }
        Inner::E(psi) => {
            let mut any = false;
            for path in paths_from(nodes, u) {
                if eval_path(psi, props, nodes, env, &path, 0)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Inner::A(psi) => {
            let mut all = true;
            for path in paths_from(nodes, u) {
                if !eval_path(psi, props, nodes, env, &path, 0)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Inner::Exists(q, body) => {
            if nodes.len() > LABEL_CAP {
                return Err(Error::ResourceCap("quantifier labeling nodes".into(), LABEL_CAP));
            }
            let mut any = false;
            for mask in 0..(1usize << nodes.len()) {
                let labeling: Vec<bool> = (0..nodes.len()).map(|i| mask >> i & 1 != 0).collect();
                let mut env2 = env.clone();
                env2.insert(q.clone(), labeling);
                if eval_state(body, props, nodes, &env2, u)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Inner::Next(_) | Inner::DirNext(..) | Inner::Finally(_) | Inner::Globally(_)
        | Inner::Until(..) => {
            return Err(Error::KindMismatch(
                "temporal operator outside a path quantifier".into(),
            ))
        }
    })
}

fn eval_path(
    a: &Inner,
    props: &PropSet,
    nodes: &[TNode],
    env: &BTreeMap<String, Vec<bool>>,
    path: &[(usize, usize)],
    i: usize,
) -> Result<bool> {
    Ok(match a {
        Inner::Prop(_) | Inner::True | Inner::False | Inner::E(_) | Inner::A(_)
        | Inner::Exists(..) => eval_state(a, props, nodes, env, path[i].0)?,
        Inner::Not(s) => !eval_path(s, props, nodes, env, path, i)?,
        Inner::And(x, y) => {
            eval_path(x, props, nodes, env, path, i)? && eval_path(y, props, nodes, env, path, i)?
        }
        Inner::Or(x, y) => {
            eval_path(x, props, nodes, env, path, i)? || eval_path(y, props, nodes, env, path, i)?
        }
        Inner::Imp(x, y) => {
            !eval_path(x, props, nodes, env, path, i)? || eval_path(y, props, nodes, env, path, i)?
        }
        Inner::Next(s) => i + 1 < path.len() && eval_path(s, props, nodes, env, path, i + 1)?,
        Inner::DirNext(d, s) => {
            // weak at the path end; otherwise the step must take direction d
            if i + 1 >= path.len() {
                true
            } else {
                path[i + 1].1 == *d && eval_path(s, props, nodes, env, path, i + 1)?
            }
        }
        Inner::Finally(s) => {
            let mut any = false;
            for j in i..path.len() {
                if eval_path(s, props, nodes, env, path, j)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Inner::Globally(s) => {
            let mut all = true;
            for j in i..path.len() {
                if !eval_path(s, props, nodes, env, path, j)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Inner::Until(x, y) => {
            let mut res = false;
            for j in i..path.len() {
                if eval_path(y, props, nodes, env, path, j)? {
                    res = true;
                    break;
                }
                if !eval_path(x, props, nodes, env, path, j)? {
                    break;
                }
            }
            res
        }
    })
}

// ---------------------------------------------------------------------------
// Outer layer → Büchi automata
// ---------------------------------------------------------------------------

/// Desugared core of the outer layer.
#[derive(Debug, Clone, PartialEq)]
enum Core {
    Tru,
    Atom(usize),
    Not(Box<Core>),
    And(Box<Core>, Box<Core>),
    Or(Box<Core>, Box<Core>),
    Next(Box<Core>),
    Until(Box<Core>, Box<Core>),
}

fn desugar(phi: &Formula, atoms: &[String]) -> Result<Core> {
    let bin = |f: fn(Box<Core>, Box<Core>) -> Core, a: Core, b: Core| f(Box::new(a), Box::new(b));
    Ok(match phi {
        Formula::True => Core::Tru,
        Formula::False => Core::Not(Box::new(Core::Tru)),
        Formula::Var(q) => Core::Atom(
            atoms
                .iter()
                .position(|n| n == q)
                .ok_or_else(|| Error::Invalid(format!("unquantified outer name {q:?}")))?,
        ),
        Formula::Atom(_) => {
            return Err(Error::Invalid(
                "inner formula atom in an outer-only translation".into(),
            ))
        }
        Formula::Not(s) => Core::Not(Box::new(desugar(s, atoms)?)),
        Formula::And(a, b) => bin(Core::And, desugar(a, atoms)?, desugar(b, atoms)?),
        Formula::Or(a, b) => bin(Core::Or, desugar(a, atoms)?, desugar(b, atoms)?),
        Formula::Imp(a, b) => bin(
            Core::Or,
            Core::Not(Box::new(desugar(a, atoms)?)),
            desugar(b, atoms)?,
        ),
        Formula::Iff(a, b) => {
            let (x, y) = (desugar(a, atoms)?, desugar(b, atoms)?);
            bin(
                Core::Or,
                bin(Core::And, x.clone(), y.clone()),
                bin(Core::And, Core::Not(Box::new(x)), Core::Not(Box::new(y))),
            )
        }
        Formula::Next(s) => Core::Next(Box::new(desugar(s, atoms)?)),
        Formula::Finally(s) => bin(Core::Until, Core::Tru, desugar(s, atoms)?),
        Formula::Globally(s) => Core::Not(Box::new(bin(
            Core::Until,
            Core::Tru,
            Core::Not(Box::new(desugar(s, atoms)?)),
        ))),
        Formula::Until(a, b) => bin(Core::Until, desugar(a, atoms)?, desugar(b, atoms)?),
        Formula::Exists(..) => {
            return Err(Error::Fragment(
                "existential quantifiers must form a prefix".into(),
            ))
        }
    })
}

fn ensure_quantifier_free(phi: &Formula) -> Result<()> {
    match phi {
        Formula::Exists(..) => Err(Error::Fragment(
            "existential quantifiers must form a prefix".into(),
        )),
        Formula::True | Formula::False | Formula::Var(_) | Formula::Atom(_) => Ok(()),
        Formula::Not(s) | Formula::Next(s) | Formula::Finally(s) | Formula::Globally(s) => {
            ensure_quantifier_free(s)
        }
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Imp(a, b)
        | Formula::Iff(a, b)
        | Formula::Until(a, b) => {
            ensure_quantifier_free(a)?;
            ensure_quantifier_free(b)
        }
    }
}

fn collect_temporal(f: &Core, out: &mut Vec<Core>) {
    match f {
        Core::Tru | Core::Atom(_) => {}
        Core::Not(s) => collect_temporal(s, out),
        Core::And(a, b) | Core::Or(a, b) => {
            collect_temporal(a, out);
            collect_temporal(b, out);
        }
        Core::Next(s) => {
            collect_temporal(s, out);
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        Core::Until(a, b) => {
            collect_temporal(a, out);
            collect_temporal(b, out);
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
    }
}

fn holds(f: &Core, letter: u64, tbasis: &[Core], tbits: u32) -> bool {
    match f {
        Core::Tru => true,
        Core::Atom(i) => letter >> i & 1 != 0,
        Core::Not(s) => !holds(s, letter, tbasis, tbits),
        Core::And(a, b) => holds(a, letter, tbasis, tbits) && holds(b, letter, tbasis, tbits),
        Core::Or(a, b) => holds(a, letter, tbasis, tbits) || holds(b, letter, tbasis, tbits),
        Core::Next(_) | Core::Until(..) => {
            let i = tbasis.iter().position(|g| g == f).expect("basis member");
            tbits >> i & 1 != 0
        }
    }
}

/// Tableau translation over an explicit letter domain; each letter is the
/// bit vector of atom truths it realizes. Returns the automaton pieces with
/// transitions labeled by letter-domain indexes.
#[allow(clippy::type_complexity)]
fn tableau_buchi(
    f: &Core,
    letters: &[u64],
) -> Result<(usize, usize, BTreeSet<usize>, BTreeSet<(usize, usize, usize)>)> {
    let mut tb = Vec::new();
    collect_temporal(f, &mut tb);
    let t = tb.len();
    if t > 16 {
        return Err(Error::ResourceCap("temporal closure".into(), 16));
    }
    let untils: Vec<usize> = tb
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g, Core::Until(..)))
        .map(|(i, _)| i)
        .collect();
    let until_parts = |ui: usize| -> (&Core, &Core) {
        match &tb[ui] {
            Core::Until(a, b) => (a, b),
            _ => unreachable!(),
        }
    };
    // locally consistent states (letter-index, temporal bits)
    let mut sts: Vec<(usize, u32)> = Vec::new();
    for (li, &l) in letters.iter().enumerate() {
        'cand: for tbits in 0..(1u32 << t) {
            for &ui in &untils {
                let ut = tbits >> ui & 1 != 0;
                let (a, b) = until_parts(ui);
                let bt = holds(b, l, &tb, tbits);
                if bt && !ut {
                    continue 'cand;
                }
                if ut && !bt && !holds(a, l, &tb, tbits) {
                    continue 'cand;
                }
            }
            sts.push((li, tbits));
        }
    }
    if sts.len() > 6000 {
        return Err(Error::ResourceCap("translation states".into(), 6000));
    }
    let n = untils.len().max(1);
    let ok_step = |s: &(usize, u32), s2: &(usize, u32)| -> bool {
        for (i, g) in tb.iter().enumerate() {
            let bit = s.1 >> i & 1 != 0;
            let want = match g {
                Core::Next(x) => holds(x, letters[s2.0], &tb, s2.1),
                Core::Until(a, b) => {
                    holds(b, letters[s.0], &tb, s.1)
                        || (holds(a, letters[s.0], &tb, s.1) && (s2.1 >> i & 1 != 0))
                }
                _ => unreachable!(),
            };
            if want != bit {
                return false;
            }
        }
        true
    };
    let fair = |s: &(usize, u32), j: usize| -> bool {
        let ui = untils[j];
        let (_, b) = until_parts(ui);
        (s.1 >> ui & 1 == 0) || holds(b, letters[s.0], &tb, s.1)
    };
    let bump = |s: &(usize, u32), c: usize| -> usize {
        if untils.is_empty() {
            0
        } else if fair(s, c) {
            (c + 1) % n
        } else {
            c
        }
    };
    let id = |i: usize, c: usize| 1 + i * n + c;
    let mut trans: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    for (i, s) in sts.iter().enumerate() {
        let init_here = holds(f, letters[s.0], &tb, s.1);
        for (i2, s2) in sts.iter().enumerate() {
            if !ok_step(s, s2) {
                continue;
            }
            for c in 0..n {
                trans.insert((id(i, c), s.0, id(i2, bump(s, c))));
            }
            if init_here {
                trans.insert((0, s.0, id(i2, bump(s, 0))));
            }
        }
        let _ = i;
    }
    let finals: BTreeSet<usize> = sts
        .iter()
        .enumerate()
        .filter(|(_, s)| untils.is_empty() || fair(s, 0))
        .map(|(i, _)| id(i, 0))
        .collect();
    Ok((1 + sts.len() * n, 0, finals, trans))
}

/// Translate an outer-only formula over placeholder atoms to a Büchi
/// automaton over the propositional alphabet of those atoms. Existential
/// quantifiers must form a prefix; they become extra letter bits that are
/// projected away.
pub fn pltl_to_buchi(phi: &Formula, atoms: &[String]) -> Result<BuchiAutomaton> {
    let mut names: Vec<String> = atoms.to_vec();
    let mut body = phi;
    while let Formula::Exists(q, b) = body {
        if names.contains(q) {
            return Err(Error::Invalid(format!("duplicate quantified name {q:?}")));
        }
        names.push(q.clone());
        body = b;
    }
    ensure_quantifier_free(body)?;
    if names.len() > 16 {
        return Err(Error::ResourceCap("atoms and quantifiers".into(), 16));
    }
    let core = desugar(body, &names)?;
    let letters: Vec<u64> = (0..1u64 << names.len()).collect();
    let (states, initial, finals, trans) = tableau_buchi(&core, &letters)?;
    let mask = (1usize << atoms.len()) - 1;
    let alpha = Alphabet::props(atoms.to_vec())?;
    let mapped = trans
        .iter()
        .map(|&(q, li, q2)| (q, (letters[li] as usize) & mask, q2));
    Ok(buchi_reduce(&BuchiAutomaton::new(
        states, initial, finals, alpha, mapped,
    )?))
}

// ---------------------------------------------------------------------------
// Inner layer → finite tree automata
// ---------------------------------------------------------------------------

/// Compile an inner state formula to a tree automaton accepting exactly the
/// finite trees that satisfy it at the root. An optional exact height can be
/// imposed by intersection.
pub fn pathctl_to_fta(
    phi: &Inner,
    props: &PropSet,
    k: usize,
    mode: RootMode,
    depth: Option<usize>,
) -> Result<TreeAutomaton> {
    let ctx = PathCtx {
        props: props.clone(),
        k,
        mode,
    };
    let a = ctx.state_automaton(phi)?;
    match depth {
        None => Ok(a),
        Some(h) => Ok(fta_trim(&fta_boolean_capped(
            BoolKind::Intersect,
            &a,
            Some(&fta_shape(k, h, a.alphabet.clone(), mode)),
            DEFAULT_DET_CAP,
        )?)),
    }
}

struct PathCtx {
    props: PropSet,
    k: usize,
    mode: RootMode,
}

impl PathCtx {
    fn alphabet(&self) -> Alphabet {
        Alphabet::Props(self.props.clone())
    }

    fn state_automaton(&self, f: &Inner) -> Result<TreeAutomaton> {
        match f {
            Inner::True => Ok(TreeAutomaton::universal(self.k, self.alphabet(), self.mode)),
            Inner::False => {
                TreeAutomaton::new(self.k, 1, self.alphabet(), self.mode, [], [], [], [])
            }
            Inner::Prop(p) => self.root_letter(p),
            Inner::Not(s) => Ok(fta_trim(&fta_boolean_capped(
                BoolKind::Complement,
                &self.state_automaton(s)?,
                None,
                DEFAULT_DET_CAP,
            )?)),
            Inner::And(a, b) => Ok(fta_trim(&fta_boolean_capped(
                BoolKind::Intersect,
                &self.state_automaton(a)?,
                Some(&self.state_automaton(b)?),
                DEFAULT_DET_CAP,
            )?)),
            Inner::Or(a, b) => Ok(fta_trim(&fta_boolean_capped(
                BoolKind::Union,
                &self.state_automaton(a)?,
                Some(&self.state_automaton(b)?),
                DEFAULT_DET_CAP,
            )?)),
            Inner::Imp(a, b) => self.state_automaton(&Inner::Or(
                Box::new(Inner::Not(a.clone())),
                b.clone(),
            )),
            Inner::Exists(q, s) => {
                if self.props.index_of(q).is_some() {
                    return Err(Error::Invalid(format!("quantified name {q:?} shadows a proposition")));
                }
                let mut names: Vec<String> = self.props.names().to_vec();
                names.push(q.clone());
                let sub = PathCtx {
                    props: PropSet::new(names)?,
                    k: self.k,
                    mode: self.mode,
                };
                let a = sub.state_automaton(s)?;
                Ok(fta_trim(&fta_project(&a, &BTreeSet::from([q.clone()]))?))
            }
            Inner::E(psi) => self.exists_path(psi),
            Inner::A(psi) => Ok(fta_trim(&fta_boolean_capped(
                BoolKind::Complement,
                &self.exists_path(&Inner::Not(psi.clone()))?,
                None,
                DEFAULT_DET_CAP,
            )?)),
            Inner::Next(_) | Inner::DirNext(..) | Inner::Finally(_) | Inner::Globally(_)
            | Inner::Until(..) => Err(Error::KindMismatch(
                "temporal operator outside a path quantifier".into(),
            )),
        }
    }

    /// Automaton for "the root letter contains p".
    fn root_letter(&self, p: &str) -> Result<TreeAutomaton> {
        let idx = self
            .props
            .index_of(p)
            .ok_or_else(|| Error::Invalid(format!("unknown proposition {p:?}")))?;
        let alpha = self.alphabet();
        let has = |x: Letter| x & (1 << idx) != 0;
        let mut leaf = Vec::new();
        let mut inner = Vec::new();
        let mut almost = Vec::new();
        for x in alpha.letters() {
            leaf.push((0, x));
            inner.push((0, x, vec![0; self.k]));
            if has(x) {
                leaf.push((1, x));
                inner.push((1, x, vec![0; self.k]));
            }
            if self.mode == RootMode::Almost {
                almost.push((0, x, vec![0; self.k - 1]));
                if has(x) {
                    almost.push((1, x, vec![0; self.k - 1]));
                }
            }
        }
        TreeAutomaton::new(self.k, 2, alpha, self.mode, leaf, inner, almost, [1])
    }

    /// Automaton for E ψ: some maximal node-to-leaf path from the root
    /// satisfies the path formula. Maximal state subformulas of ψ become
    /// atoms tracked by deterministic automata; the path formula itself is
    /// unrolled into obligation sets threaded down a guessed path.
    fn exists_path(&self, psi: &Inner) -> Result<TreeAutomaton> {
        let mut atoms = Vec::new();
        self.path_atoms(psi, &mut atoms)?;
        let r = atoms.len();
        if r > 12 {
            return Err(Error::ResourceCap("path state atoms".into(), 12));
        }
        let dets: Vec<TreeAutomaton> = atoms
            .iter()
            .map(|a| fta_determinize(&self.state_automaton(a)?, DEFAULT_DET_CAP))
            .collect::<Result<Vec<_>>>()?;
        let tabs: Vec<DetTables> = dets.iter().map(DetTables::build).collect::<Result<_>>()?;
        let alpha = self.alphabet();
        let n_letters = alpha.len();

        // obligation sets reachable from the root obligation
        let root_ob: BTreeSet<P> = BTreeSet::from([nnf_path(psi, true, &atoms)]);
        let mut obs: Vec<BTreeSet<P>> = vec![root_ob.clone()];
        let mut ob_index: BTreeMap<BTreeSet<P>, usize> = BTreeMap::new();
        ob_index.insert(root_ob, 0);
        let all_bits: Vec<Vec<bool>> = (0..1usize << r)
            .map(|m| (0..r).map(|i| m >> i & 1 != 0).collect())
            .collect();
        let mut head = 0;
        while head < obs.len() {
            let cur = obs[head].clone();
            head += 1;
            for bits in &all_bits {
                for mv in expand_set(&cur, bits) {
                    let succ: BTreeSet<P> = mv.strong.union(&mv.weak).cloned().collect();
                    if !ob_index.contains_key(&succ) {
                        ob_index.insert(succ.clone(), obs.len());
                        obs.push(succ);
                    }
                }
            }
            if obs.len() > 2000 {
                return Err(Error::ResourceCap("path obligation sets".into(), 2000));
            }
        }
        let n_ob = obs.len();

        // joint closure over tuples of deterministic atom-automaton states
        let mut jstates: Vec<Vec<usize>> = Vec::new();
        let mut jindex: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut intern = |t: Vec<usize>, jstates: &mut Vec<Vec<usize>>| -> usize {
            *jindex.entry(t.clone()).or_insert_with(|| {
                jstates.push(t);
                jstates.len() - 1
            })
        };
        let mut leaf_joint = Vec::with_capacity(n_letters);
        for x in 0..n_letters {
            let t: Vec<usize> = tabs.iter().map(|d| d.leaf[x]).collect();
            leaf_joint.push(intern(t, &mut jstates));
        }
        let mut jtrans: HashMap<(Letter, Vec<usize>), usize> = HashMap::new();
        let mut frontier = 0;
        loop {
            let n_now = jstates.len();
            if n_now > 3000 {
                return Err(Error::ResourceCap("path product states".into(), 3000));
            }
            let mut added = false;
            for cs in tuples(n_now, self.k) {
                if cs.iter().all(|&c| c < frontier) {
                    continue;
                }
                for x in 0..n_letters {
                    let mut target = Vec::with_capacity(tabs.len());
                    let mut ok = true;
                    for (i, tab) in tabs.iter().enumerate() {
                        let key: Vec<usize> = cs.iter().map(|&j| jstates[j][i]).collect();
                        match tab.inner.get(&(x, key)) {
                            Some(&q) => target.push(q),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let before = jstates.len();
                    let j = intern(target, &mut jstates);
                    if jstates.len() > before {
                        added = true;
                    }
                    jtrans.insert((x, cs.clone()), j);
                }
            }
            if !added {
                break;
            }
            frontier = n_now;
        }
        let n_core = jstates.len();
        let mut jalmost: HashMap<(Letter, Vec<usize>), usize> = HashMap::new();
        if self.mode == RootMode::Almost {
            for cs in tuples(n_core, self.k - 1) {
                for x in 0..n_letters {
                    let mut target = Vec::with_capacity(tabs.len());
                    let mut ok = true;
                    for (i, tab) in tabs.iter().enumerate() {
                        let key: Vec<usize> = cs.iter().map(|&j| jstates[j][i]).collect();
                        match tab.almost.get(&(x, key)) {
                            Some(&q) => target.push(q),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let j = intern(target, &mut jstates);
                    jalmost.insert((x, cs.clone()), j);
                }
            }
        }
        let n_joint = jstates.len();
        let bits_of = |j: usize| -> Vec<bool> {
            tabs.iter()
                .enumerate()
                .map(|(i, tab)| tab.accepting.contains(&jstates[j][i]))
                .collect()
        };

        // assemble: state = joint state × (off-path | obligation set)
        let off = |j: usize| j * (1 + n_ob);
        let on = |j: usize, s: usize| j * (1 + n_ob) + 1 + s;
        let mut leaf = Vec::new();
        for x in 0..n_letters {
            let j = leaf_joint[x];
            leaf.push((off(j), x));
            let bits = bits_of(j);
            for (s, ob) in obs.iter().enumerate() {
                let ok = expand_set(ob, &bits)
                    .iter()
                    .any(|m| m.strong.is_empty() && m.req.is_none());
                if ok {
                    leaf.push((on(j, s), x));
                }
            }
        }
        let mut inner = Vec::new();
        for ((x, cs), &j) in &jtrans {
            inner.push((off(j), *x, cs.iter().map(|&c| off(c)).collect::<Vec<_>>()));
            let bits = bits_of(j);
            for (s, ob) in obs.iter().enumerate() {
                for mv in expand_set(ob, &bits) {
                    let succ: BTreeSet<P> = mv.strong.union(&mv.weak).cloned().collect();
                    let si = ob_index[&succ];
                    for d in 0..self.k {
                        if mv.req.map_or(false, |rq| rq != d) || mv.forb.contains(&d) {
                            continue;
                        }
                        let children: Vec<usize> = cs
                            .iter()
                            .enumerate()
                            .map(|(c, &jc)| if c == d { on(jc, si) } else { off(jc) })
                            .collect();
                        inner.push((on(j, s), *x, children));
                    }
                }
            }
        }
        let mut almost = Vec::new();
        for ((x, cs), &j) in &jalmost {
            almost.push((off(j), *x, cs.iter().map(|&c| off(c)).collect::<Vec<_>>()));
            let bits = bits_of(j);
            for (s, ob) in obs.iter().enumerate() {
                for mv in expand_set(ob, &bits) {
                    let succ: BTreeSet<P> = mv.strong.union(&mv.weak).cloned().collect();
                    let si = ob_index[&succ];
                    // slot c of an almost root sits in direction c + 1
                    for slot in 0..self.k - 1 {
                        let d = slot + 1;
                        if mv.req.map_or(false, |rq| rq != d) || mv.forb.contains(&d) {
                            continue;
                        }
                        let children: Vec<usize> = cs
                            .iter()
                            .enumerate()
                            .map(|(c, &jc)| if c == slot { on(jc, si) } else { off(jc) })
                            .collect();
                        almost.push((on(j, s), *x, children));
                    }
                }
            }
        }
        let accepting: Vec<usize> = (0..n_joint).map(|j| on(j, 0)).collect();
        Ok(fta_trim(&TreeAutomaton::new(
            self.k,
            n_joint * (1 + n_ob),
            alpha,
            self.mode,
            leaf,
            inner,
            almost,
            accepting,
        )?))
    }

    /// Collect the maximal state subformulas occurring in a path formula.
    fn path_atoms(&self, f: &Inner, out: &mut Vec<Inner>) -> Result<()> {
        match f {
            Inner::True | Inner::False => Ok(()),
            Inner::Prop(_) | Inner::E(_) | Inner::A(_) | Inner::Exists(..) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
                Ok(())
            }
            Inner::Not(s) | Inner::Next(s) | Inner::Finally(s) | Inner::Globally(s) => {
                self.path_atoms(s, out)
            }
            Inner::DirNext(d, s) => {
                if *d >= self.k {
                    return Err(Error::Invalid(format!(
                        "direction {d} out of range for arity {}",
                        self.k
                    )));
                }
                self.path_atoms(s, out)
            }
            Inner::And(a, b) | Inner::Or(a, b) | Inner::Imp(a, b) | Inner::Until(a, b) => {
                self.path_atoms(a, out)?;
                self.path_atoms(b, out)
            }
        }
    }
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
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

/// Lookup tables of a deterministic (complete) tree automaton.
struct DetTables {
    leaf: Vec<usize>,
    inner: HashMap<(Letter, Vec<usize>), usize>,
    almost: HashMap<(Letter, Vec<usize>), usize>,
    accepting: BTreeSet<usize>,
}

impl DetTables {
    fn build(d: &TreeAutomaton) -> Result<DetTables> {
        let mut leaf = vec![usize::MAX; d.alphabet.len()];
        for &(q, x) in &d.leaf {
            leaf[x] = q;
        }
        if leaf.contains(&usize::MAX) {
            return Err(Error::Invalid("determinization left a letter unassigned".into()));
        }
        let inner = d
            .inner
            .iter()
            .map(|(q, x, cs)| ((*x, cs.clone()), *q))
            .collect();
        let almost = d
            .almost_root
            .iter()
            .map(|(q, x, cs)| ((*x, cs.clone()), *q))
            .collect();
        Ok(DetTables {
            leaf,
            inner,
            almost,
            accepting: d.accepting.clone(),
        })
    }
}

/// Path formula in negation normal form. `Lit` indexes a state atom with a
/// polarity; `X` is strong next, `W` weak next; `Dir(d, true)` asserts that
/// a next node exists in direction d, `Dir(d, false)` its negation; `U` and
/// `R` are until and release over the finite path suffix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum P {
    Tru,
    Fls,
    Lit(usize, bool),
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
    X(Box<P>),
    W(Box<P>),
    Dir(usize, bool),
    U(Box<P>, Box<P>),
    R(Box<P>, Box<P>),
}

fn nnf_path(f: &Inner, pos: bool, atoms: &[Inner]) -> P {
    let lit = |f: &Inner, pos: bool| {
        P::Lit(atoms.iter().position(|a| a == f).expect("collected atom"), pos)
    };
    let b = |p: P| Box::new(p);
    match f {
        Inner::True => {
            if pos {
                P::Tru
            } else {
                P::Fls
            }
        }
        Inner::False => {
            if pos {
                P::Fls
            } else {
                P::Tru
            }
        }
        Inner::Prop(_) | Inner::E(_) | Inner::A(_) | Inner::Exists(..) => lit(f, pos),
        Inner::Not(s) => nnf_path(s, !pos, atoms),
        Inner::And(x, y) => {
            let (px, py) = (nnf_path(x, pos, atoms), nnf_path(y, pos, atoms));
            if pos {
                P::And(b(px), b(py))
            } else {
                P::Or(b(px), b(py))
            }
        }
        Inner::Or(x, y) => {
            let (px, py) = (nnf_path(x, pos, atoms), nnf_path(y, pos, atoms));
            if pos {
                P::Or(b(px), b(py))
            } else {
                P::And(b(px), b(py))
            }
        }
        Inner::Imp(x, y) => {
            let (px, py) = (nnf_path(x, !pos, atoms), nnf_path(y, pos, atoms));
            if pos {
                P::Or(b(px), b(py))
            } else {
                P::And(b(px), b(py))
            }
        }
        Inner::Next(s) => {
            if pos {
                P::X(b(nnf_path(s, true, atoms)))
            } else {
                P::W(b(nnf_path(s, false, atoms)))
            }
        }
        Inner::DirNext(d, s) => {
            if pos {
                // weak at the path end: end-of-path ∨ (step in direction d ∧ φ)
                P::Or(
                    b(P::W(b(P::Fls))),
                    b(P::And(b(P::Dir(*d, true)), b(P::X(b(nnf_path(s, true, atoms)))))),
                )
            } else {
                // a next exists and it either leaves direction d or refutes φ
                P::And(
                    b(P::X(b(P::Tru))),
                    b(P::Or(b(P::Dir(*d, false)), b(P::X(b(nnf_path(s, false, atoms)))))),
                )
            }
        }
        Inner::Finally(s) => {
            if pos {
                P::U(b(P::Tru), b(nnf_path(s, true, atoms)))
            } else {
                P::R(b(P::Fls), b(nnf_path(s, false, atoms)))
            }
        }
        Inner::Globally(s) => {
            if pos {
                P::R(b(P::Fls), b(nnf_path(s, true, atoms)))
            } else {
                P::U(b(P::Tru), b(nnf_path(s, false, atoms)))
            }
        }
        Inner::Until(x, y) => {
            let (px, py) = (nnf_path(x, pos, atoms), nnf_path(y, pos, atoms));
            if pos {
                P::U(b(px), b(py))
            } else {
                P::R(b(px), b(py))
            }
        }
    }
}

/// One way to discharge an obligation set at a node: obligations passed to
/// the next path node (strong must have a next, weak may end), plus
/// direction constraints on the step taken.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Move {
    strong: BTreeSet<P>,
    weak: BTreeSet<P>,
    req: Option<usize>,
    forb: BTreeSet<usize>,
}

fn merge_moves(a: &Move, b: &Move) -> Option<Move> {
    let req = match (a.req, b.req) {
        (None, r) | (r, None) => r,
        (Some(x), Some(y)) if x == y => Some(x),
        _ => return None,
    };
    let m = Move {
        strong: a.strong.union(&b.strong).cloned().collect(),
        weak: a.weak.union(&b.weak).cloned().collect(),
        req,
        forb: a.forb.union(&b.forb).cloned().collect(),
    };
    if let Some(d) = m.req {
        if m.forb.contains(&d) {
            return None;
        }
    }
    Some(m)
}

fn expand(f: &P, bits: &[bool]) -> Vec<Move> {
    let b = |p: &P| Box::new(p.clone());
    match f {
        P::Tru => vec![Move::default()],
        P::Fls => vec![],
        P::Lit(i, pos) => {
            if bits[*i] == *pos {
                vec![Move::default()]
            } else {
                vec![]
            }
        }
        P::And(x, y) => {
            let (mx, my) = (expand(x, bits), expand(y, bits));
            let mut out = BTreeSet::new();
            for a in &mx {
                for c in &my {
                    if let Some(m) = merge_moves(a, c) {
                        out.insert(m);
                    }
                }
            }
            out.into_iter().collect()
        }
        P::Or(x, y) => {
            let mut out: BTreeSet<Move> = expand(x, bits).into_iter().collect();
            out.extend(expand(y, bits));
            out.into_iter().collect()
        }
        P::X(s) => vec![Move {
            strong: BTreeSet::from([(**s).clone()]),
            ..Default::default()
        }],
        P::W(s) => vec![Move {
            weak: BTreeSet::from([(**s).clone()]),
            ..Default::default()
        }],
        P::Dir(d, true) => vec![Move {
            req: Some(*d),
            ..Default::default()
        }],
        P::Dir(d, false) => vec![Move {
            forb: BTreeSet::from([*d]),
            ..Default::default()
        }],
        P::U(x, y) => {
            let unfold = P::Or(b(y), Box::new(P::And(b(x), Box::new(P::X(Box::new(f.clone()))))));
            expand(&unfold, bits)
        }
        P::R(x, y) => {
            let unfold = P::And(b(y), Box::new(P::Or(b(x), Box::new(P::W(Box::new(f.clone()))))));
            expand(&unfold, bits)
        }
    }
}

fn expand_set(s: &BTreeSet<P>, bits: &[bool]) -> Vec<Move> {
    let mut acc = vec![Move::default()];
    for f in s {
        let parts = expand(f, bits);
        let mut next = BTreeSet::new();
        for a in &acc {
            for p in &parts {
                if let Some(m) = merge_moves(a, p) {
                    next.insert(m);
                }
            }
        }
        acc = next.into_iter().collect();
        if acc.is_empty() {
            break;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Alphabet partitioning, compilation, satisfiability
// ---------------------------------------------------------------------------

fn collect_atoms(phi: &Formula, out: &mut Vec<Inner>) {
    match phi {
        Formula::Atom(a) => {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        Formula::True | Formula::False | Formula::Var(_) => {}
        Formula::Not(s) | Formula::Next(s) | Formula::Finally(s) | Formula::Globally(s) => {
            collect_atoms(s, out)
        }
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Imp(a, b)
        | Formula::Iff(a, b)
        | Formula::Until(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        Formula::Exists(_, b) => collect_atoms(b, out),
    }
}

/// Convert a word-layer inner formula to the outer AST over its proposition
/// names, so that the same tableau translation serves both layers.
fn inner_as_outer(a: &Inner) -> Result<Formula> {
    let b = |f: Formula| Box::new(f);
    Ok(match a {
        Inner::True => Formula::True,
        Inner::False => Formula::False,
        Inner::Prop(p) => Formula::Var(p.clone()),
        Inner::Not(s) => Formula::Not(b(inner_as_outer(s)?)),
        Inner::And(x, y) => Formula::And(b(inner_as_outer(x)?), b(inner_as_outer(y)?)),
        Inner::Or(x, y) => Formula::Or(b(inner_as_outer(x)?), b(inner_as_outer(y)?)),
        Inner::Imp(x, y) => Formula::Imp(b(inner_as_outer(x)?), b(inner_as_outer(y)?)),
        Inner::Next(s) => Formula::Next(b(inner_as_outer(s)?)),
        Inner::Finally(s) => Formula::Finally(b(inner_as_outer(s)?)),
        Inner::Globally(s) => Formula::Globally(b(inner_as_outer(s)?)),
        Inner::Until(x, y) => Formula::Until(b(inner_as_outer(x)?), b(inner_as_outer(y)?)),
        Inner::Exists(q, s) => Formula::Exists(q.clone(), b(inner_as_outer(s)?)),
        Inner::E(_) | Inner::A(_) | Inner::DirNext(..) => Err(Error::KindMismatch(
            "path operator on a word-layer formula".into(),
        ))?,
    })
}

fn atom_automaton(a: &Inner, sem: &Semantics, props: &PropSet) -> Result<InnerAutomaton> {
    match sem {
        Semantics::SeqOfSeq => Ok(InnerAutomaton::Word(pltl_to_buchi(
            &inner_as_outer(a)?,
            props.names(),
        )?)),
        Semantics::Layered { k, .. } => Ok(InnerAutomaton::Tree(pathctl_to_fta(
            a,
            props,
            *k,
            RootMode::Complete,
            None,
        )?)),
        Semantics::Uuls { k } => Ok(InnerAutomaton::Tree(pathctl_to_fta(
            a,
            props,
            *k,
            RootMode::Almost,
            None,
        )?)),
    }
}

fn universal_inner(sem: &Semantics, props: &PropSet) -> Result<InnerAutomaton> {
    let alpha = Alphabet::Props(props.clone());
    match sem {
        Semantics::SeqOfSeq => Ok(InnerAutomaton::Word(BuchiAutomaton::new(
            1,
            0,
            [0],
            alpha.clone(),
            alpha.letters().map(|x| (0, x, 0)),
        )?)),
        Semantics::Layered { k, .. } => Ok(InnerAutomaton::Tree(TreeAutomaton::universal(
            *k,
            alpha,
            RootMode::Complete,
        ))),
        Semantics::Uuls { k } => Ok(InnerAutomaton::Tree(TreeAutomaton::universal(
            *k,
            alpha,
            RootMode::Almost,
        ))),
    }
}

/// Cap on rank-based complementation of inner cell automata. Deliberately
/// far below the global default: pathological cells must fail fast rather
/// than grind toward the generic cap, and well-behaved cells stay tiny.
const CELL_COMPLEMENT_CAP: usize = 50_000;

fn raw_complement(a: &InnerAutomaton) -> Result<InnerAutomaton> {
    match a {
        InnerAutomaton::Word(b) => Ok(InnerAutomaton::Word(buchi_reduce(&buchi_boolean_capped(
            BoolKind::Complement,
            b,
            None,
            CELL_COMPLEMENT_CAP,
        )?))),
        InnerAutomaton::Tree(t) => Ok(InnerAutomaton::Tree(fta_trim(&fta_boolean_capped(
            BoolKind::Complement,
            t,
            None,
            DEFAULT_DET_CAP,
        )?))),
        InnerAutomaton::Rabin(_) => Err(Error::Capability("complement".into())),
    }
}

fn raw_intersect(a: &InnerAutomaton, b: &InnerAutomaton) -> Result<InnerAutomaton> {
    match (a, b) {
        (InnerAutomaton::Word(x), InnerAutomaton::Word(y)) => {
            Ok(InnerAutomaton::Word(buchi_reduce(&buchi_boolean_capped(
                BoolKind::Intersect,
                x,
                Some(y),
                DEFAULT_STATE_CAP,
            )?)))
        }
        (InnerAutomaton::Tree(x), InnerAutomaton::Tree(y)) => {
            Ok(InnerAutomaton::Tree(fta_trim(&fta_boolean_capped(
                BoolKind::Intersect,
                x,
                Some(y),
                DEFAULT_DET_CAP,
            )?)))
        }
        _ => Err(Error::Capability("intersection".into())),
    }
}

/// One satisfiable sign-pattern cell over the inner atoms of a formula.
struct Cell {
    name: String,
    positive: Vec<bool>,
    formula: Inner,
    aut: InnerAutomaton,
}

fn build_cells(atoms: &[Inner], sem: &Semantics, props: &PropSet) -> Result<Vec<Cell>> {
    let r = atoms.len();
    if r > 8 {
        return Err(Error::ResourceCap("inner formula atoms".into(), 8));
    }
    let shape = |a: InnerAutomaton| -> Result<InnerAutomaton> {
        if let (Semantics::Layered { k, depth }, InnerAutomaton::Tree(t)) = (sem, &a) {
            return Ok(InnerAutomaton::Tree(fta_trim(&fta_boolean_capped(
                BoolKind::Intersect,
                t,
                Some(&fta_shape(*k, *depth, t.alphabet.clone(), RootMode::Complete)),
                DEFAULT_DET_CAP,
            )?)));
        }
        Ok(a)
    };
    if r == 0 {
        let aut = shape(universal_inner(sem, props)?)?;
        return Ok(vec![Cell {
            name: "all".into(),
            positive: Vec::new(),
            formula: Inner::True,
            aut,
        }]);
    }
    // Restricting each atom automaton to the bounded shape first keeps
    // complementation over the depth-stratified construction small; every
    // cell is intersected with the shape anyway, so languages are unchanged.
    let base: Vec<InnerAutomaton> = atoms
        .iter()
        .map(|a| atom_automaton(a, sem, props).and_then(&shape))
        .collect::<Result<_>>()?;
    let comp: Vec<InnerAutomaton> = base
        .iter()
        .map(|b| match (sem, b) {
            (Semantics::Layered { depth, .. }, InnerAutomaton::Tree(t)) => Ok(
                InnerAutomaton::Tree(fta_trim(&fta_complement_within(t, *depth, DEFAULT_DET_CAP)?)),
            ),
            _ => raw_complement(b),
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for mask in 0..(1u32 << r) {
        let positive: Vec<bool> = (0..r).map(|i| mask >> i & 1 != 0).collect();
        let mut aut: Option<InnerAutomaton> = None;
        for i in 0..r {
            let part = if positive[i] { &base[i] } else { &comp[i] };
            aut = Some(match aut {
                None => part.clone(),
                Some(cur) => raw_intersect(&cur, part)?,
            });
        }
        let aut = shape(aut.expect("r > 0"))?;
        if aut.is_empty()?.0 {
            continue;
        }
        let name: String = (0..r)
            .map(|i| format!("{}{}", if positive[i] { '+' } else { '-' }, i))
            .collect();
        let formula = (0..r)
            .map(|i| {
                if positive[i] {
                    atoms[i].clone()
                } else {
                    Inner::Not(Box::new(atoms[i].clone()))
                }
            })
            .reduce(|a, c| Inner::And(Box::new(a), Box::new(c)))
            .expect("r > 0");
        out.push(Cell {
            name,
            positive,
            formula,
            aut,
        });
    }
    Ok(out)
}

fn substitute(phi: &Formula, atoms: &[Inner], rep: &dyn Fn(usize) -> Formula) -> Formula {
    let b = |f: Formula| Box::new(f);
    match phi {
        Formula::Atom(a) => rep(atoms.iter().position(|x| x == a).expect("collected atom")),
        Formula::True | Formula::False | Formula::Var(_) => phi.clone(),
        Formula::Not(s) => Formula::Not(b(substitute(s, atoms, rep))),
        Formula::Next(s) => Formula::Next(b(substitute(s, atoms, rep))),
        Formula::Finally(s) => Formula::Finally(b(substitute(s, atoms, rep))),
        Formula::Globally(s) => Formula::Globally(b(substitute(s, atoms, rep))),
        Formula::And(x, y) => Formula::And(b(substitute(x, atoms, rep)), b(substitute(y, atoms, rep))),
        Formula::Or(x, y) => Formula::Or(b(substitute(x, atoms, rep)), b(substitute(y, atoms, rep))),
        Formula::Imp(x, y) => Formula::Imp(b(substitute(x, atoms, rep)), b(substitute(y, atoms, rep))),
        Formula::Iff(x, y) => Formula::Iff(b(substitute(x, atoms, rep)), b(substitute(y, atoms, rep))),
        Formula::Until(x, y) => {
            Formula::Until(b(substitute(x, atoms, rep)), b(substitute(y, atoms, rep)))
        }
        Formula::Exists(q, s) => Formula::Exists(q.clone(), b(substitute(s, atoms, rep))),
    }
}

fn disjunction(fs: Vec<Formula>) -> Formula {
    fs.into_iter()
        .reduce(|a, f| Formula::Or(Box::new(a), Box::new(f)))
        .unwrap_or(Formula::False)
}

/// Partition the inner-model space along the maximal inner formulas of φ.
/// Returns the satisfiable sign-pattern conjunctions that assert at least
/// one atom positively, the formula with each atom replaced by the
/// disjunction of its compatible cells, and the residue cell β = ¬⋁αᵢ.
pub fn partition_formulas(
    phi: &Formula,
    sem: &Semantics,
    props: &PropSet,
) -> Result<(Vec<Inner>, Formula, Inner)> {
    let mut atoms = Vec::new();
    collect_atoms(phi, &mut atoms);
    let cells = build_cells(&atoms, sem, props)?;
    let lambda: Vec<Inner> = cells
        .iter()
        .filter(|c| c.positive.iter().any(|&b| b))
        .map(|c| c.formula.clone())
        .collect();
    let phi2 = substitute(phi, &atoms, &|i| {
        disjunction(
            cells
                .iter()
                .filter(|c| c.positive.get(i) == Some(&true))
                .map(|c| Formula::Atom(c.formula.clone()))
                .collect(),
        )
    });
    let beta = match atoms
        .iter()
        .cloned()
        .reduce(|a, c| Inner::Or(Box::new(a), Box::new(c)))
    {
        Some(u) => Inner::Not(Box::new(u)),
        None => Inner::True,
    };
    Ok((lambda, phi2, beta))
}

/// Compile a formula to a temporalized automaton whose language, restricted
/// to the models of the semantics, is the set of models of the formula.
pub fn compile(phi: &Formula, sem: &Semantics, props: &PropSet) -> Result<TemporalizedAutomaton> {
    let mut atoms = Vec::new();
    collect_atoms(phi, &mut atoms);
    let cells = build_cells(&atoms, sem, props)?;
    if cells.is_empty() {
        return Err(Error::Invalid("no satisfiable alphabet cell".into()));
    }
    let names: Vec<String> = cells.iter().map(|c| c.name.clone()).collect();
    let replaced = substitute(phi, &atoms, &|i| {
        disjunction(
            cells
                .iter()
                .filter(|c| c.positive.get(i) == Some(&true))
                .map(|c| Formula::Var(c.name.clone()))
                .collect(),
        )
    });
    let mut qs: Vec<String> = Vec::new();
    let mut body = &replaced;
    while let Formula::Exists(q, b) = body {
        qs.push(q.clone());
        body = b;
    }
    ensure_quantifier_free(body)?;
    let c = names.len();
    if c + qs.len() > 32 {
        return Err(Error::ResourceCap("cells and quantifiers".into(), 32));
    }
    let mut all_names = names.clone();
    for q in &qs {
        if all_names.contains(q) {
            return Err(Error::Invalid(format!("duplicate quantified name {q:?}")));
        }
        all_names.push(q.clone());
    }
    let core = desugar(body, &all_names)?;
    // letter domain: exactly one cell bit set, any quantifier bits
    let letters: Vec<u64> = (0..1u64 << qs.len())
        .flat_map(|qm| (0..c).map(move |i| (qm << c) | (1u64 << i)))
        .collect();
    let (states, initial, finals, trans) = tableau_buchi(&core, &letters)?;
    let sym = Alphabet::symbols(names.clone())?;
    let mapped = trans.iter().map(|&(q, li, q2)| {
        let cell = (letters[li] & ((1u64 << c) - 1)).trailing_zeros() as usize;
        (q, cell, q2)
    });
    let outer = buchi_reduce(&BuchiAutomaton::new(states, initial, finals, sym, mapped)?);
    let inner: BTreeMap<String, InnerAutomaton> =
        cells.into_iter().map(|cl| (cl.name, cl.aut)).collect();
    TemporalizedAutomaton::new(outer, inner)
}

/// A satisfiability witness: a lasso model, or a layered-emptiness
/// certificate when checking over increasing tree sequences.
#[derive(Debug, Clone)]
pub enum SatWitness {
    Sequence(LassoTreeSeq),
    Certificate(ItsCertificate),
}

/// Satisfiability of the formula over the given semantics. Returns the
/// verdict together with a witness when satisfiable and one is
/// representable.
pub fn sat_check(
    phi: &Formula,
    sem: &Semantics,
    props: &PropSet,
) -> Result<(bool, Option<SatWitness>)> {
    let t = compile(phi, sem, props)?;
    match sem {
        Semantics::SeqOfSeq | Semantics::Layered { .. } => {
            let (empty, w) = t_empty(&t)?;
            Ok((!empty, w.map(SatWitness::Sequence)))
        }
        Semantics::Uuls { .. } => {
            let (empty, cert) = its_empty(&t)?;
            Ok((!empty, cert.map(SatWitness::Certificate)))
        }
    }
}
