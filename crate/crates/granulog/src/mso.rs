//! Emission of a monadic second-order sentence equivalent to a temporalized
//! automaton with Rabin-tree labels, plus a syntax checker for the emitted
//! language.
//!
//! The sentence asserts the existence of an accepting outer run over the
//! coarsest layer (one set variable per outer state, one per label) and, for
//! every position carrying a label, the existence of an accepting run of
//! that Rabin automaton over the tree rooted there (the `RAC` block: one set
//! variable per inner state, a transition constraint, and the pair
//! condition quantified over all paths).
//!
//! # Concrete syntax
//!
//! ```text
//! formula := ("exists1"|"forall1"|"exists2"|"forall2") ident "." formula
//!          | imp
//! imp     := disj [ "->" imp ]
//! disj    := conj { "|" conj }
//! conj    := neg  { "&" neg }
//! neg     := "!" neg | "(" formula ")" | "true" | "false" | atom
//! atom    := "T0" "(" term ")"            (coarsest-layer test)
//!          | "Path" "(" ident "," term ")" (set is a path rooted at term)
//!          | term "in" ident               (set membership)
//!          | term "<1" term                (coarsest-layer order)
//!          | term "<2" term | term "<=2" term  (tree order)
//! term    := "origin"                      (first coarsest position)
//!          | "next" "(" term ")"           (coarsest successor)
//!          | "down" INT "(" term ")"       (i-th child)
//!          | ident
//! ```
//!
//! Identifiers match `[A-Za-z_][A-Za-z0-9_]*`; whitespace is free. Emitted
//! names: `X<i>` outer run states, `Q_<label>` label positions, `Y<i>`
//! inner run states, `W` paths, `P_<letter>` alphabet predicates.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::temporalized::{InnerAutomaton, TemporalizedAutomaton};

/// Turn an alphabet or label name into an identifier fragment.
fn sanitize(name: &str, fallback: usize) -> String {
    let cleaned: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if cleaned.is_empty() {
        format!("l{fallback}")
    } else {
        cleaned
    }
}

fn disjunction(items: Vec<String>) -> String {
    if items.is_empty() {
        "false".into()
    } else {
        format!("({})", items.join(" | "))
    }
}

fn conjunction(items: Vec<String>) -> String {
    if items.is_empty() {
        "true".into()
    } else {
        format!("({})", items.join(" & "))
    }
}

/// The sentence over the coarsest-layer run of one Rabin tree automaton:
/// an accepting run over the tree rooted at `x`.
fn rac_block(x: &str, z: &crate::rabin::RabinTreeAutomaton, p_name: &dyn Fn(usize) -> String) -> String {
    let m = z.states;
    let mut out = String::new();
    for i in 0..m {
        let _ = write!(out, "exists2 Y{i} . ");
    }
    let mut parts = Vec::new();
    for i in 0..m {
        parts.push(format!("forall1 y . (y in Y{i} -> {x} <=2 y)"));
    }
    parts.push(format!("{x} in Y{}", z.initial));
    for i in 0..m {
        for j in (i + 1)..m {
            parts.push(format!("!exists1 y . (y in Y{i} & y in Y{j})"));
        }
    }
    let steps: Vec<String> = z
        .transitions
        .iter()
        .map(|(i, a, children)| {
            let mut lits = vec![format!("y in Y{i}"), format!("y in {}", p_name(*a))];
            for (d, c) in children.iter().enumerate() {
                lits.push(format!("down{d}(y) in Y{c}"));
            }
            conjunction(lits)
        })
        .collect();
    parts.push(format!(
        "forall1 y . ({x} <=2 y -> {})",
        disjunction(steps)
    ));
    let pair_cases: Vec<String> = z
        .pairs
        .iter()
        .map(|(l, u)| {
            let mut lits: Vec<String> = l
                .iter()
                .map(|j| {
                    format!(
                        "exists1 u . (u in W & forall1 v . ((v in W & u <2 v) -> !(v in Y{j})))"
                    )
                })
                .collect();
            let inf: Vec<String> = u
                .iter()
                .map(|j| {
                    format!("forall1 u . (u in W -> exists1 v . (v in W & u <2 v & v in Y{j}))")
                })
                .collect();
            lits.push(disjunction(inf));
            conjunction(lits)
        })
        .collect();
    parts.push(format!(
        "forall2 W . (Path(W, {x}) -> {})",
        disjunction(pair_cases)
    ));
    let _ = write!(out, "{}", conjunction(parts));
    out
}

/// Emit the sentence equivalent to a temporalized automaton whose labels
/// are Rabin tree automata: the outer run encoding followed by one RAC
/// block per label.
pub fn emit_mso(a: &TemporalizedAutomaton) -> Result<String> {
    let labels: Vec<(String, &crate::rabin::RabinTreeAutomaton)> = a
        .outer
        .alphabet
        .letters()
        .map(|x| {
            let name = a.outer.alphabet.letter_name(x);
            match &a.inner[&name] {
                InnerAutomaton::Rabin(z) => Ok((sanitize(&name, x), z)),
                other => Err(Error::Capability(format!(
                    "sentence emission (labels must be Rabin tree automata, got {})",
                    other.kind_name()
                ))),
            }
        })
        .collect::<Result<_>>()?;
    let inner_alpha = labels
        .first()
        .map(|(_, z)| z.alphabet.clone())
        .ok_or_else(|| Error::Invalid("automaton has no labels".into()))?;
    let p_name = |letter: usize| -> String {
        format!("P_{}", sanitize(&inner_alpha.letter_name(letter), letter))
    };
    let m = a.outer.states;
    let mut out = String::new();
    for (name, _) in &labels {
        let _ = writeln!(out, "exists2 Q_{name} .");
    }
    for i in 0..m {
        let _ = writeln!(out, "exists2 X{i} .");
    }
    let mut parts = Vec::new();
    for i in 0..m {
        parts.push(format!("forall1 x . (x in X{i} -> T0(x))"));
    }
    for (name, _) in &labels {
        parts.push(format!("forall1 x . (x in Q_{name} -> T0(x))"));
    }
    parts.push(format!("origin in X{}", a.outer.initial));
    for i in 0..m {
        for j in (i + 1)..m {
            parts.push(format!("!exists1 y . (y in X{i} & y in X{j})"));
        }
    }
    let steps: Vec<String> = a
        .outer
        .transitions
        .iter()
        .map(|&(i, x, j)| {
            format!(
                "(x in X{i} & x in Q_{} & next(x) in X{j})",
                labels[x].0
            )
        })
        .collect();
    parts.push(format!("forall1 x . (T0(x) -> {})", disjunction(steps)));
    let recur: Vec<String> = a
        .outer
        .finals
        .iter()
        .map(|i| {
            format!(
                "forall1 x . (T0(x) -> exists1 y . (T0(y) & x <1 y & y in X{i}))"
            )
        })
        .collect();
    parts.push(disjunction(recur));
    for (name, z) in &labels {
        parts.push(format!(
            "forall1 x . (x in Q_{name} -> ({}))",
            rac_block("x", z, &p_name)
        ));
    }
    let _ = writeln!(out, "{}", conjunction(parts));
    Ok(out)
}

// --- syntax checker -------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Dot,
    Comma,
    And,
    Or,
    Not,
    Imp,
    Lt1,
    Lt2,
    Le2,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let bytes: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '&' => {
                toks.push(Tok::And);
                i += 1;
            }
            '|' => {
                toks.push(Tok::Or);
                i += 1;
            }
            '!' => {
                toks.push(Tok::Not);
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&'>') {
                    toks.push(Tok::Imp);
                    i += 2;
                } else {
                    return Err(syntax_err(i, "expected '->'"));
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&'=') && bytes.get(i + 2) == Some(&'2') {
                    toks.push(Tok::Le2);
                    i += 3;
                } else if bytes.get(i + 1) == Some(&'1') {
                    toks.push(Tok::Lt1);
                    i += 2;
                } else if bytes.get(i + 1) == Some(&'2') {
                    toks.push(Tok::Lt2);
                    i += 2;
                } else {
                    return Err(syntax_err(i, "expected '<1', '<2' or '<=2'"));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                toks.push(Tok::Int(s.parse().unwrap()));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            _ => return Err(syntax_err(i, "unexpected character")),
        }
    }
    Ok(toks)
}

fn syntax_err(pos: usize, msg: &str) -> Error {
    Error::Syntax {
        line: 1,
        col: pos + 1,
        msg: msg.into(),
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(found) if found == t => Ok(()),
            found => Err(syntax_err(self.pos, &format!("expected {t:?}, got {found:?}"))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            found => Err(syntax_err(self.pos, &format!("expected identifier, got {found:?}"))),
        }
    }

    fn formula(&mut self) -> Result<()> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            if matches!(kw.as_str(), "exists1" | "forall1" | "exists2" | "forall2") {
                self.next();
                self.ident()?;
                self.expect(Tok::Dot)?;
                return self.formula();
            }
        }
        self.imp()
    }

    fn imp(&mut self) -> Result<()> {
        self.disj()?;
        if self.peek() == Some(&Tok::Imp) {
            self.next();
            self.imp()?;
        }
        Ok(())
    }

    fn disj(&mut self) -> Result<()> {
        self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            self.conj()?;
        }
        Ok(())
    }

    fn conj(&mut self) -> Result<()> {
        self.neg()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            self.neg()?;
        }
        Ok(())
    }

    fn neg(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                self.neg()
            }
            Some(Tok::LParen) => {
                self.next();
                self.formula()?;
                self.expect(Tok::RParen)
            }
            Some(Tok::Ident(kw)) if kw == "true" || kw == "false" => {
                self.next();
                Ok(())
            }
            Some(Tok::Ident(kw))
                if matches!(kw.as_str(), "exists1" | "forall1" | "exists2" | "forall2") =>
            {
                self.formula()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<()> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            match kw.as_str() {
                "T0" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    self.term()?;
                    return self.expect(Tok::RParen);
                }
                "Path" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    self.ident()?;
                    self.expect(Tok::Comma)?;
                    self.term()?;
                    return self.expect(Tok::RParen);
                }
                _ => {}
            }
        }
        self.term()?;
        match self.next() {
            Some(Tok::Ident(kw)) if kw == "in" => {
                self.ident()?;
                Ok(())
            }
            Some(Tok::Lt1) | Some(Tok::Lt2) | Some(Tok::Le2) => self.term(),
            found => Err(syntax_err(
                self.pos,
                &format!("expected 'in' or an order relation, got {found:?}"),
            )),
        }
    }

    fn term(&mut self) -> Result<()> {
        match self.next() {
            Some(Tok::Ident(name)) => {
                if name == "next" || name.starts_with("down") {
                    let is_fn = if name == "next" {
                        true
                    } else {
                        name[4..].chars().all(|c| c.is_ascii_digit()) && name.len() > 4
                    };
                    if is_fn && self.peek() == Some(&Tok::LParen) {
                        self.next();
                        self.term()?;
                        return self.expect(Tok::RParen);
                    }
                }
                Ok(())
            }
            found => Err(syntax_err(self.pos, &format!("expected a term, got {found:?}"))),
        }
    }
}

/// Check that a sentence conforms to the emitted grammar (syntax only).
pub fn check_mso_syntax(text: &str) -> Result<()> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    p.formula()?;
    if p.pos != p.toks.len() {
        return Err(syntax_err(p.pos, "trailing input after formula"));
    }
    Ok(())
}
