//! Circular pre-proofs in linear logic with least and greatest fixed points.
//!
//! Formulas are occurrences: a logical shape plus an address, which is an
//! atomic identifier with a polarity bit followed by a path over
//! {left, right, inside}. Sequents are two-sided (`Sigma |- G` stands for the
//! one-sided `|- Sigma^, G`), with the context split into an active zone
//! `upsilon` and a variable-tagged zone `theta` during translation; flooring
//! removes the exchange rule and merges the zones.

pub mod cutelim;
pub mod json;
pub mod translate;
pub mod validity;

use crate::ast::{BaseType, Name};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dir {
    L,
    R,
    I,
}

impl Dir {
    pub fn letter(self) -> char {
        match self {
            Dir::L => 'l',
            Dir::R => 'r',
            Dir::I => 'i',
        }
    }
}

/// An occurrence address: atomic id, polarity, and a path word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Address {
    pub atom: u32,
    pub negated: bool,
    pub path: Vec<Dir>,
}

impl Address {
    pub fn root(atom: u32) -> Address {
        Address {
            atom,
            negated: false,
            path: Vec::new(),
        }
    }

    pub fn child(&self, d: Dir) -> Address {
        let mut path = self.path.clone();
        path.push(d);
        Address {
            atom: self.atom,
            negated: self.negated,
            path,
        }
    }

    /// Negation flips the polarity bit and keeps the path.
    pub fn negate(&self) -> Address {
        Address {
            atom: self.atom,
            negated: !self.negated,
            path: self.path.clone(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("a{}", self.atom);
        if self.negated {
            s.push('^');
        }
        if !self.path.is_empty() {
            s.push(':');
            for d in &self.path {
                s.push(d.letter());
            }
        }
        s
    }
}

/// Formula shapes without addresses. Fixed-point binders use named
/// variables; equality is alpha.
#[derive(Debug, Clone, Eq)]
pub enum Form {
    One,
    Zero,
    Top,
    Bot,
    Atom(Name),
    Tensor(Box<Form>, Box<Form>),
    Par(Box<Form>, Box<Form>),
    Plus(Box<Form>, Box<Form>),
    With(Box<Form>, Box<Form>),
    Mu(Name, Box<Form>),
    Nu(Name, Box<Form>),
}

impl Form {
    pub fn tensor(a: Form, b: Form) -> Form {
        Form::Tensor(Box::new(a), Box::new(b))
    }

    pub fn par(a: Form, b: Form) -> Form {
        Form::Par(Box::new(a), Box::new(b))
    }

    pub fn plus(a: Form, b: Form) -> Form {
        Form::Plus(Box::new(a), Box::new(b))
    }

    pub fn with(a: Form, b: Form) -> Form {
        Form::With(Box::new(a), Box::new(b))
    }

    /// The positive embedding of a base type.
    pub fn of_type(t: &BaseType) -> Form {
        match t {
            BaseType::Unit => Form::One,
            BaseType::Sum(a, b) => Form::plus(Form::of_type(a), Form::of_type(b)),
            BaseType::Prod(a, b) => Form::tensor(Form::of_type(a), Form::of_type(b)),
            BaseType::Mu(x, body) => Form::Mu(x.clone(), Box::new(Form::of_type(body))),
            BaseType::Var(x) => Form::Atom(x.clone()),
        }
    }

    /// Reads a positive formula back as a base type.
    pub fn to_type(&self) -> Option<BaseType> {
        match self {
            Form::One => Some(BaseType::Unit),
            Form::Plus(a, b) => Some(BaseType::sum(a.to_type()?, b.to_type()?)),
            Form::Tensor(a, b) => Some(BaseType::prod(a.to_type()?, b.to_type()?)),
            Form::Mu(x, body) => Some(BaseType::Mu(x.clone(), Box::new(body.to_type()?))),
            Form::Atom(x) => Some(BaseType::Var(x.clone())),
            _ => None,
        }
    }

    /// De Morgan dual: `1^=bot`, `(A x B)^ = A^ par B^`, `(mu X. A)^ = nu X. A^`.
    pub fn dual(&self) -> Form {
        match self {
            Form::One => Form::Bot,
            Form::Bot => Form::One,
            Form::Zero => Form::Top,
            Form::Top => Form::Zero,
            Form::Atom(x) => Form::Atom(x.clone()),
            Form::Tensor(a, b) => Form::par(a.dual(), b.dual()),
            Form::Par(a, b) => Form::tensor(a.dual(), b.dual()),
            Form::Plus(a, b) => Form::with(a.dual(), b.dual()),
            Form::With(a, b) => Form::plus(a.dual(), b.dual()),
            Form::Mu(x, body) => Form::Nu(x.clone(), Box::new(body.dual())),
            Form::Nu(x, body) => Form::Mu(x.clone(), Box::new(body.dual())),
        }
    }

    fn subst_atom(&self, name: &str, replacement: &Form) -> Form {
        match self {
            Form::One | Form::Zero | Form::Top | Form::Bot => self.clone(),
            Form::Atom(x) => {
                if x == name {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Form::Tensor(a, b) => Form::tensor(
                a.subst_atom(name, replacement),
                b.subst_atom(name, replacement),
            ),
            Form::Par(a, b) => Form::par(
                a.subst_atom(name, replacement),
                b.subst_atom(name, replacement),
            ),
            Form::Plus(a, b) => Form::plus(
                a.subst_atom(name, replacement),
                b.subst_atom(name, replacement),
            ),
            Form::With(a, b) => Form::with(
                a.subst_atom(name, replacement),
                b.subst_atom(name, replacement),
            ),
            Form::Mu(x, body) => {
                if x == name {
                    self.clone()
                } else {
                    Form::Mu(x.clone(), Box::new(body.subst_atom(name, replacement)))
                }
            }
            Form::Nu(x, body) => {
                if x == name {
                    self.clone()
                } else {
                    Form::Nu(x.clone(), Box::new(body.subst_atom(name, replacement)))
                }
            }
        }
    }

    /// One-step unfolding of a fixed point: `mu X. F` to `F[X <- mu X. F]`.
    pub fn unfold_fix(&self) -> Option<Form> {
        match self {
            Form::Mu(x, body) | Form::Nu(x, body) => Some(body.subst_atom(x, self)),
            _ => None,
        }
    }
}

fn form_alpha_eq(a: &Form, b: &Form, env: &mut Vec<(Name, Name)>) -> bool {
    use Form::*;
    match (a, b) {
        (One, One) | (Zero, Zero) | (Top, Top) | (Bot, Bot) => true,
        (Atom(x), Atom(y)) => {
            for (bx, by) in env.iter().rev() {
                if bx == x || by == y {
                    return bx == x && by == y;
                }
            }
            x == y
        }
        (Tensor(a1, a2), Tensor(b1, b2))
        | (Par(a1, a2), Par(b1, b2))
        | (Plus(a1, a2), Plus(b1, b2))
        | (With(a1, a2), With(b1, b2)) => form_alpha_eq(a1, b1, env) && form_alpha_eq(a2, b2, env),
        (Mu(x, a1), Mu(y, b1)) | (Nu(x, a1), Nu(y, b1)) => {
            env.push((x.clone(), y.clone()));
            let r = form_alpha_eq(a1, b1, env);
            env.pop();
            r
        }
        _ => false,
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        form_alpha_eq(self, other, &mut Vec::new())
    }
}

/// A formula occurrence: shape plus root address. Children derive their
/// addresses through the lifting laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    pub form: Form,
    pub addr: Address,
}

impl Formula {
    pub fn new(form: Form, addr: Address) -> Formula {
        Formula { form, addr }
    }

    pub fn of_type(t: &BaseType, addr: Address) -> Formula {
        Formula {
            form: Form::of_type(t),
            addr,
        }
    }

    pub fn dual(&self) -> Formula {
        Formula {
            form: self.form.dual(),
            addr: self.addr.negate(),
        }
    }

    /// The immediate subformula in direction `d`, with the derived address.
    pub fn child(&self, d: Dir) -> Option<Formula> {
        let sub = match (&self.form, d) {
            (Form::Tensor(a, _), Dir::L)
            | (Form::Par(a, _), Dir::L)
            | (Form::Plus(a, _), Dir::L)
            | (Form::With(a, _), Dir::L) => a.as_ref().clone(),
            (Form::Tensor(_, b), Dir::R)
            | (Form::Par(_, b), Dir::R)
            | (Form::Plus(_, b), Dir::R)
            | (Form::With(_, b), Dir::R) => b.as_ref().clone(),
            _ => return None,
        };
        Some(Formula {
            form: sub,
            addr: self.addr.child(d),
        })
    }

    /// Unfolds a fixed point, placing the body at the `inside` address.
    pub fn unfold_fix(&self) -> Option<Formula> {
        let body = self.form.unfold_fix()?;
        Some(Formula {
            form: body,
            addr: self.addr.child(Dir::I),
        })
    }

    /// Same logical formula, forgetting addresses.
    pub fn same_form(&self, other: &Formula) -> bool {
        self.form == other.form
    }
}

/// Rules of the circular system. Left rules act on the first context
/// formula; right rules act on the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Id,
    Cut,
    One,
    Bot,
    Tensor,
    Par,
    Plus1,
    Plus2,
    With,
    Mu,
    Nu,
    Ex(Name),
    Be(Name),
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Id => "id",
            Rule::Cut => "cut",
            Rule::One => "one",
            Rule::Bot => "bot",
            Rule::Tensor => "tensor",
            Rule::Par => "par",
            Rule::Plus1 => "plus1",
            Rule::Plus2 => "plus2",
            Rule::With => "with",
            Rule::Mu => "mu",
            Rule::Nu => "nu",
            Rule::Ex(_) => "ex",
            Rule::Be(_) => "be",
        }
    }

    /// Rules whose principal formula sits in the context.
    pub fn is_left(&self) -> bool {
        matches!(self, Rule::Bot | Rule::Par | Rule::With | Rule::Nu)
    }

    /// Rules whose principal formula is the goal.
    pub fn is_right(&self) -> bool {
        matches!(
            self,
            Rule::One | Rule::Tensor | Rule::Plus1 | Rule::Plus2 | Rule::Mu | Rule::Id
        )
    }
}

/// A two-sided sequent `upsilon ; theta |- goal`, optionally carrying a
/// back-edge label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequent {
    pub upsilon: Vec<Formula>,
    pub theta: Vec<(Name, Formula)>,
    pub goal: Formula,
    pub label: Option<Name>,
}

impl Sequent {
    pub fn new(upsilon: Vec<Formula>, theta: Vec<(Name, Formula)>, goal: Formula) -> Sequent {
        Sequent {
            upsilon,
            theta,
            goal,
            label: None,
        }
    }

    /// The merged context: upsilon then the theta formulas.
    pub fn context(&self) -> Vec<&Formula> {
        self.upsilon
            .iter()
            .chain(self.theta.iter().map(|(_, f)| f))
            .collect()
    }

    /// Context entries with their zone tags (a name for theta entries).
    pub fn entries(&self) -> Vec<(Option<&Name>, &Formula)> {
        self.upsilon
            .iter()
            .map(|f| (None, f))
            .chain(self.theta.iter().map(|(x, f)| (Some(x), f)))
            .collect()
    }

    /// Rebuilds a sequent from tagged entries, preserving each zone's order.
    pub fn from_entries(entries: Vec<(Option<Name>, Formula)>, goal: Formula) -> Sequent {
        let mut upsilon = Vec::new();
        let mut theta = Vec::new();
        for (name, f) in entries {
            match name {
                None => upsilon.push(f),
                Some(x) => theta.push((x, f)),
            }
        }
        Sequent {
            upsilon,
            theta,
            goal,
            label: None,
        }
    }

    pub fn render(&self) -> String {
        let ups: Vec<String> = self
            .upsilon
            .iter()
            .map(|f| json::render_form(&f.form))
            .collect();
        let ths: Vec<String> = self
            .theta
            .iter()
            .map(|(x, f)| format!("{x}: {}", json::render_form(&f.form)))
            .collect();
        let label = self
            .label
            .as_deref()
            .map(|l| format!("^{l}"))
            .unwrap_or_default();
        format!(
            "[{}] ; {} |-{} {}",
            ups.join(", "),
            if ths.is_empty() {
                "{}".to_string()
            } else {
                format!("{{{}}}", ths.join(", "))
            },
            label,
            json::render_form(&self.goal.form)
        )
    }
}

/// A finite derivation tree with back-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: Rule, conclusion: Sequent) -> Derivation {
        Derivation {
            rule,
            conclusion,
            premises: Vec::new(),
        }
    }

    pub fn node(rule: Rule, conclusion: Sequent, premises: Vec<Derivation>) -> Derivation {
        Derivation {
            rule,
            conclusion,
            premises,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn contains_be(&self) -> bool {
        matches!(self.rule, Rule::Be(_)) || self.premises.iter().any(|p| p.contains_be())
    }

    pub fn rules(&self) -> Vec<&Rule> {
        let mut out = vec![&self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    /// A purely positive proof: finite, cut-free, back-edge-free, built from
    /// the right rules only.
    pub fn is_purely_positive(&self) -> bool {
        self.rule.is_right() && self.premises.iter().all(|p| p.is_purely_positive())
    }

    /// The rule-tag skeleton, for shape assertions in tests.
    pub fn skeleton(&self) -> String {
        if self.premises.is_empty() {
            self.rule.name().to_string()
        } else {
            let inner: Vec<String> = self.premises.iter().map(|p| p.skeleton()).collect();
            format!("{}({})", self.rule.name(), inner.join(","))
        }
    }
}

/// Fresh atomic-address generator; one per translation run, so output is
/// deterministic.
#[derive(Debug, Default)]
pub struct AddrGen {
    next: u32,
}

impl AddrGen {
    pub fn new() -> AddrGen {
        AddrGen::default()
    }

    pub fn fresh(&mut self) -> Address {
        let a = Address::root(self.next);
        self.next += 1;
        a
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProofError {
    #[error("ill-formed derivation at a {rule} node: {reason}")]
    IllFormed { rule: &'static str, reason: String },
    #[error("dangling back-edge label `{0}`")]
    DanglingBackEdge(Name),
    #[error("negative phase cannot decompose clause heads {0:?} (mixed shapes)")]
    MixedHeads(Vec<String>),
    #[error("translation requires a type annotation on an applied iso")]
    AnnotationRequired,
    #[error("type error during translation: {0}")]
    Type(String),
    #[error("cut elimination: {0}")]
    CutElim(String),
    #[error("validity: {0}")]
    Validity(String),
}

fn multiset_remove(haystack: &mut Vec<Formula>, needle: &Formula) -> bool {
    if let Some(i) = haystack.iter().position(|f| f == needle) {
        haystack.remove(i);
        true
    } else {
        false
    }
}

fn multiset_eq(a: &[&Formula], b: &[&Formula]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut rest: Vec<Formula> = b.iter().map(|f| (*f).clone()).collect();
    a.iter().all(|f| multiset_remove(&mut rest, f))
}

/// Well-formedness: every rule application's premises follow the address
/// lifting laws, back-edges resolve to an enclosing label of the same name,
/// and (for floored trees) every back-edge is the right premise of a cut.
pub fn check_well_formed(d: &Derivation) -> Result<(), ProofError> {
    check_node(d, &mut Vec::new())
}

fn ill(rule: &'static str, reason: impl Into<String>) -> ProofError {
    ProofError::IllFormed {
        rule,
        reason: reason.into(),
    }
}

fn check_node(d: &Derivation, labels: &mut Vec<Name>) -> Result<(), ProofError> {
    let pushed = if let Some(l) = &d.conclusion.label {
        labels.push(l.clone());
        true
    } else {
        false
    };
    check_rule(d, labels)?;
    for p in &d.premises {
        check_node(p, labels)?;
    }
    if pushed {
        labels.pop();
    }
    Ok(())
}

fn check_rule(d: &Derivation, labels: &[Name]) -> Result<(), ProofError> {
    let c = &d.conclusion;
    let ctx = c.context();
    match &d.rule {
        Rule::Id => {
            if !d.premises.is_empty() {
                return Err(ill("id", "id has premises"));
            }
            if ctx.len() != 1 || !ctx[0].same_form(&c.goal) {
                return Err(ill(
                    "id",
                    format!("context/goal mismatch in {}", c.render()),
                ));
            }
            Ok(())
        }
        Rule::One => {
            if !d.premises.is_empty() || !ctx.is_empty() || c.goal.form != Form::One {
                return Err(ill("one", format!("bad conclusion {}", c.render())));
            }
            Ok(())
        }
        Rule::Be(f) => {
            if !d.premises.is_empty() {
                return Err(ill("be", "back-edge has premises"));
            }
            if !labels.contains(f) {
                return Err(ProofError::DanglingBackEdge(f.clone()));
            }
            Ok(())
        }
        Rule::Bot => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("bot", "expected one premise"));
            };
            if ctx.first().map(|f| &f.form) != Some(&Form::One) {
                return Err(ill(
                    "bot",
                    format!("principal is not one in {}", c.render()),
                ));
            }
            if p.conclusion.goal != c.goal {
                return Err(ill("bot", "goal changed"));
            }
            if !multiset_eq(&p.conclusion.context(), &ctx[1..]) {
                return Err(ill("bot", "context mismatch"));
            }
            Ok(())
        }
        Rule::Nu => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("nu", "expected one premise"));
            };
            let head = ctx.first().ok_or_else(|| ill("nu", "empty context"))?;
            let unfolded = head
                .unfold_fix()
                .ok_or_else(|| ill("nu", "principal not a fixpoint"))?;
            if p.conclusion.goal != c.goal {
                return Err(ill("nu", "goal changed"));
            }
            let mut expected: Vec<&Formula> = vec![&unfolded];
            expected.extend(&ctx[1..]);
            if !multiset_eq(&p.conclusion.context(), &expected) {
                return Err(ill("nu", "context mismatch"));
            }
            Ok(())
        }
        Rule::Par => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("par", "expected one premise"));
            };
            let head = ctx.first().ok_or_else(|| ill("par", "empty context"))?;
            let (l, r) = match (&head.form, head.child(Dir::L), head.child(Dir::R)) {
                (Form::Tensor(..), Some(l), Some(r)) => (l, r),
                _ => return Err(ill("par", "principal is not a tensor")),
            };
            if p.conclusion.goal != c.goal {
                return Err(ill("par", "goal changed"));
            }
            let mut expected: Vec<&Formula> = vec![&l, &r];
            expected.extend(&ctx[1..]);
            if !multiset_eq(&p.conclusion.context(), &expected) {
                return Err(ill("par", "context mismatch"));
            }
            Ok(())
        }
        Rule::With => {
            let [p1, p2] = d.premises.as_slice() else {
                return Err(ill("with", "expected two premises"));
            };
            let head = ctx.first().ok_or_else(|| ill("with", "empty context"))?;
            let (l, r) = match (&head.form, head.child(Dir::L), head.child(Dir::R)) {
                (Form::Plus(..), Some(l), Some(r)) => (l, r),
                _ => return Err(ill("with", "principal is not a plus")),
            };
            for (p, side) in [(p1, &l), (p2, &r)] {
                if p.conclusion.goal != c.goal {
                    return Err(ill("with", "goal changed"));
                }
                let mut expected: Vec<&Formula> = vec![side];
                expected.extend(&ctx[1..]);
                if !multiset_eq(&p.conclusion.context(), &expected) {
                    return Err(ill("with", "context mismatch"));
                }
            }
            Ok(())
        }
        Rule::Tensor => {
            let [p1, p2] = d.premises.as_slice() else {
                return Err(ill("tensor", "expected two premises"));
            };
            let (l, r) = match (&c.goal.form, c.goal.child(Dir::L), c.goal.child(Dir::R)) {
                (Form::Tensor(..), Some(l), Some(r)) => (l, r),
                _ => return Err(ill("tensor", "goal is not a tensor")),
            };
            if p1.conclusion.goal != l || p2.conclusion.goal != r {
                return Err(ill("tensor", "premise goals are not the components"));
            }
            let mut combined: Vec<&Formula> = p1.conclusion.context();
            combined.extend(p2.conclusion.context());
            if !multiset_eq(&combined, &ctx) {
                return Err(ill("tensor", "contexts do not split"));
            }
            Ok(())
        }
        Rule::Plus1 | Rule::Plus2 => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("plus", "expected one premise"));
            };
            let dir = if d.rule == Rule::Plus1 {
                Dir::L
            } else {
                Dir::R
            };
            let child = match (&c.goal.form, c.goal.child(dir)) {
                (Form::Plus(..), Some(ch)) => ch,
                _ => return Err(ill("plus", "goal is not a plus")),
            };
            if p.conclusion.goal != child {
                return Err(ill("plus", "premise goal mismatch"));
            }
            if !multiset_eq(&p.conclusion.context(), &ctx) {
                return Err(ill("plus", "context changed"));
            }
            Ok(())
        }
        Rule::Mu => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("mu", "expected one premise"));
            };
            let unfolded = c
                .goal
                .unfold_fix()
                .ok_or_else(|| ill("mu", "goal is not a fixpoint"))?;
            if p.conclusion.goal != unfolded {
                return Err(ill("mu", "premise goal is not the unfolding"));
            }
            if !multiset_eq(&p.conclusion.context(), &ctx) {
                return Err(ill("mu", "context changed"));
            }
            Ok(())
        }
        Rule::Cut => {
            let [p1, p2] = d.premises.as_slice() else {
                return Err(ill("cut", "expected two premises"));
            };
            let cut_formula = &p1.conclusion.goal;
            if p2.conclusion.goal != c.goal {
                return Err(ill("cut", "right premise goal mismatch"));
            }
            let mut right_ctx: Vec<Formula> =
                p2.conclusion.context().into_iter().cloned().collect();
            if !multiset_remove(&mut right_ctx, cut_formula) {
                return Err(ill("cut", "cut formula missing from right premise"));
            }
            let mut combined: Vec<&Formula> = p1.conclusion.context();
            combined.extend(right_ctx.iter());
            if !multiset_eq(&combined, &ctx) {
                return Err(ill("cut", "contexts do not recombine"));
            }
            Ok(())
        }
        Rule::Ex(x) => {
            let [p] = d.premises.as_slice() else {
                return Err(ill("ex", "expected one premise"));
            };
            let head = c
                .upsilon
                .first()
                .ok_or_else(|| ill("ex", "empty upsilon"))?;
            if p.conclusion.upsilon.as_slice() != &c.upsilon[1..] {
                return Err(ill("ex", "upsilon tail mismatch"));
            }
            let mut expected_theta = c.theta.clone();
            expected_theta.push((x.clone(), head.clone()));
            if p.conclusion.theta != expected_theta {
                return Err(ill("ex", "theta mismatch"));
            }
            if p.conclusion.goal != c.goal {
                return Err(ill("ex", "goal changed"));
            }
            Ok(())
        }
    }
}

/// Checks that every back-edge node is the right premise of a cut.
pub fn check_bouncing_cuts(d: &Derivation) -> Result<(), ProofError> {
    fn go(d: &Derivation) -> Result<(), ProofError> {
        for (i, p) in d.premises.iter().enumerate() {
            if matches!(p.rule, Rule::Be(_)) && !(d.rule == Rule::Cut && i == 1) {
                return Err(ill(
                    "be",
                    "back-edge is not the right premise of a cut".to_string(),
                ));
            }
            go(p)?;
        }
        Ok(())
    }
    if matches!(d.rule, Rule::Be(_)) {
        return Err(ill("be", "derivation is a bare back-edge"));
    }
    go(d)
}

/// Checks that from the root to every back-edge there is exactly one
/// matching label.
pub fn check_unique_labels(d: &Derivation) -> Result<(), ProofError> {
    fn go(d: &Derivation, counts: &mut BTreeMap<Name, usize>) -> Result<(), ProofError> {
        if let Some(l) = &d.conclusion.label {
            *counts.entry(l.clone()).or_insert(0) += 1;
        }
        if let Rule::Be(f) = &d.rule {
            match counts.get(f) {
                Some(1) => {}
                Some(n) => return Err(ill("be", format!("{n} labels named `{f}` on the path"))),
                None => return Err(ProofError::DanglingBackEdge(f.clone())),
            }
        }
        for p in &d.premises {
            go(p, counts)?;
        }
        if let Some(l) = &d.conclusion.label {
            *counts.get_mut(l).unwrap() -= 1;
        }
        Ok(())
    }
    go(d, &mut BTreeMap::new())
}

/// Structural equality modulo a bijection on occurrence addresses and
/// context exchange.
///
/// Cut formulas are re-rooted at fresh atoms when a term is re-translated,
/// while a rewritten proof may carry them as derived children of older
/// occurrences; a consistent renaming of full addresses equates exactly
/// those. Contexts are compared as multisets: the floored system treats them
/// as sets, and rewriting permutes bindings relative to a fresh translation.
pub fn eq_mod_addresses(a: &Derivation, b: &Derivation) -> bool {
    let mut bij = AddrBijection::default();
    eq_node(a, b, &mut bij)
}

type AddrKey = (u32, bool, Vec<Dir>);

fn addr_key(a: &Address) -> AddrKey {
    (a.atom, a.negated, a.path.clone())
}

#[derive(Default)]
struct AddrBijection {
    fwd: BTreeMap<AddrKey, AddrKey>,
    bwd: BTreeMap<AddrKey, AddrKey>,
    log: Vec<(AddrKey, AddrKey)>,
}

impl AddrBijection {
    fn mark(&self) -> usize {
        self.log.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.log.len() > mark {
            let (ka, kb) = self.log.pop().unwrap();
            self.fwd.remove(&ka);
            self.bwd.remove(&kb);
        }
    }

    fn relate(&mut self, a: &Address, b: &Address) -> bool {
        let ka = addr_key(a);
        let kb = addr_key(b);
        match (self.fwd.get(&ka), self.bwd.get(&kb)) {
            (Some(fa), Some(fb)) => fa == &kb && fb == &ka,
            (None, None) => {
                self.fwd.insert(ka.clone(), kb.clone());
                self.bwd.insert(kb.clone(), ka.clone());
                self.log.push((ka, kb));
                true
            }
            _ => false,
        }
    }
}

fn eq_node(a: &Derivation, b: &Derivation, bij: &mut AddrBijection) -> bool {
    if a.rule != b.rule || a.premises.len() != b.premises.len() {
        return false;
    }
    if !eq_sequent(&a.conclusion, &b.conclusion, bij) {
        return false;
    }
    a.premises
        .iter()
        .zip(&b.premises)
        .all(|(x, y)| eq_node(x, y, bij))
}

fn eq_sequent(a: &Sequent, b: &Sequent, bij: &mut AddrBijection) -> bool {
    if a.label != b.label || a.upsilon.len() != b.upsilon.len() || a.theta.len() != b.theta.len() {
        return false;
    }
    if !eq_formula(&a.goal, &b.goal, bij) {
        return false;
    }
    // The active zone is ordered.
    for (x, y) in a.upsilon.iter().zip(&b.upsilon) {
        if !eq_formula(x, y, bij) {
            return false;
        }
    }
    // Tagged-zone entries are binders compared up to renaming: they pair by
    // formula under the address bijection, with backtracking among
    // same-shaped candidates.
    let av: Vec<&Formula> = a.theta.iter().map(|(_, f)| f).collect();
    let bv: Vec<&Formula> = b.theta.iter().map(|(_, f)| f).collect();
    match_theta(&av, &bv, &mut vec![false; bv.len()], 0, bij)
}

fn match_theta(
    a: &[&Formula],
    b: &[&Formula],
    used: &mut Vec<bool>,
    i: usize,
    bij: &mut AddrBijection,
) -> bool {
    if i == a.len() {
        return true;
    }
    for j in 0..b.len() {
        if used[j] || a[i].form != b[j].form {
            continue;
        }
        let mark = bij.mark();
        if eq_formula(a[i], b[j], bij) {
            used[j] = true;
            if match_theta(a, b, used, i + 1, bij) {
                return true;
            }
            used[j] = false;
        }
        bij.rollback(mark);
    }
    false
}

fn eq_formula(a: &Formula, b: &Formula, bij: &mut AddrBijection) -> bool {
    a.form == b.form && bij.relate(&a.addr, &b.addr)
}

/// Replaces back-edges by copies of their labelled targets, `depth` times.
/// Copies keep their labels so inner back-edges re-resolve; the unfolded
/// node's own label is dropped.
pub fn unfold(d: &Derivation, depth: usize) -> Derivation {
    let mut cur = d.clone();
    for _ in 0..depth {
        cur = unfold_once(&cur);
    }
    cur
}

fn unfold_once(d: &Derivation) -> Derivation {
    fn go(d: &Derivation, env: &mut Vec<(Name, Derivation)>) -> Derivation {
        if let Rule::Be(f) = &d.rule {
            if let Some((_, target)) = env.iter().rev().find(|(n, _)| n == f) {
                return target.clone();
            }
            return d.clone();
        }
        let pushed = if let Some(l) = &d.conclusion.label {
            env.push((l.clone(), d.clone()));
            true
        } else {
            false
        };
        let premises = d.premises.iter().map(|p| go(p, env)).collect();
        if pushed {
            env.pop();
        }
        let mut conclusion = d.conclusion.clone();
        if pushed {
            conclusion.label = None;
        }
        Derivation {
            rule: d.rule.clone(),
            conclusion,
            premises,
        }
    }
    go(d, &mut Vec::new())
}

/// Rule-skeleton prefix comparison up to `depth`, ignoring labels; used to
/// compare different circular representations of the same infinite tree.
pub fn prefix_skeleton(d: &Derivation, depth: usize) -> String {
    if depth == 0 {
        return "?".into();
    }
    if matches!(d.rule, Rule::Be(_)) {
        return "?".into();
    }
    if d.premises.is_empty() {
        d.rule.name().to_string()
    } else {
        let inner: Vec<String> = d
            .premises
            .iter()
            .map(|p| prefix_skeleton(p, depth - 1))
            .collect();
        format!("{}({})", d.rule.name(), inner.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu_x_x() -> Formula {
        Formula::new(
            Form::Mu("X".into(), Box::new(Form::Atom("X".into()))),
            Address::root(0),
        )
    }

    /// The one-rule circular proof of `|- mu X. X` with the label at the root.
    fn loop_proof() -> Derivation {
        let goal = mu_x_x();
        let unfolded = goal.unfold_fix().unwrap();
        let mut top = Sequent::new(vec![], vec![], unfolded);
        top.label = None;
        let be = Derivation::leaf(Rule::Be("f".into()), top);
        let mut root_seq = Sequent::new(vec![], vec![], goal);
        root_seq.label = Some("f".into());
        Derivation::node(Rule::Mu, root_seq, vec![be])
    }

    #[test]
    fn dualization_follows_de_morgan() {
        let t = crate::parser::parse_type("(1 + 1) * 1").unwrap();
        let f = Formula::of_type(&t, Address::root(3));
        let d = f.dual();
        assert_eq!(
            d.form,
            Form::par(Form::with(Form::Bot, Form::Bot), Form::Bot)
        );
        assert!(d.addr.negated);
        assert_eq!(d.addr.atom, 3);
    }

    #[test]
    fn addresses_lift_through_children() {
        let t = crate::parser::parse_type("1 * (1 + 1)").unwrap();
        let f = Formula::of_type(&t, Address::root(0));
        let r = f.child(Dir::R).unwrap();
        assert_eq!(r.addr.path, vec![Dir::R]);
        let rl = r.child(Dir::L).unwrap();
        assert_eq!(rl.addr.path, vec![Dir::R, Dir::L]);
    }

    #[test]
    fn unfolding_mu_formula_substitutes_whole_fixpoint() {
        let f = Formula::of_type(&crate::ast::nat_type(), Address::root(0));
        let u = f.unfold_fix().unwrap();
        assert_eq!(u.addr.path, vec![Dir::I]);
        match u.form {
            Form::Plus(l, r) => {
                assert_eq!(*l, Form::One);
                assert!(matches!(*r, Form::Mu(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unfold_zero_is_identity() {
        let d = loop_proof();
        assert_eq!(unfold(&d, 0), d);
    }

    #[test]
    fn unfolding_loop_grows_mu_prefix() {
        let d = loop_proof();
        let u2 = unfold(&d, 2);
        // Three mu rules then a truncation back-edge.
        assert_eq!(prefix_skeleton(&u2, 10), "mu(mu(mu(?)))");
    }

    #[test]
    fn both_backedge_placements_unfold_alike() {
        // Variant with the label one rule higher: mu over mu over be.
        let goal = mu_x_x();
        let u1 = goal.unfold_fix().unwrap();
        let u2 = u1.unfold_fix().unwrap();
        let be = Derivation::leaf(Rule::Be("f".into()), Sequent::new(vec![], vec![], u2));
        let mid = Derivation::node(Rule::Mu, Sequent::new(vec![], vec![], u1), vec![be]);
        let mut root_seq = Sequent::new(vec![], vec![], goal);
        root_seq.label = Some("f".into());
        let two_rule = Derivation::node(Rule::Mu, root_seq, vec![mid]);

        let one_rule = loop_proof();
        for depth in 0..4 {
            let a = prefix_skeleton(&unfold(&one_rule, depth), depth + 1);
            let b = prefix_skeleton(&unfold(&two_rule, depth), depth + 1);
            assert_eq!(a, b, "prefixes diverge at depth {depth}");
        }
    }

    #[test]
    fn label_uniqueness_is_checked() {
        let d = loop_proof();
        assert!(check_unique_labels(&d).is_ok());
        let u = unfold(&d, 1);
        // After one unfolding the inner copy keeps the label and the outer
        // one is dropped, so uniqueness still holds.
        assert!(check_unique_labels(&u).is_ok());
    }

    #[test]
    fn eq_mod_addresses_accepts_renamed_atoms() {
        let f1 = Formula::of_type(&crate::ast::nat_type(), Address::root(0));
        let f2 = Formula::of_type(&crate::ast::nat_type(), Address::root(7));
        let d1 = Derivation::leaf(Rule::One, Sequent::new(vec![], vec![], f1.clone()));
        let d2 = Derivation::leaf(Rule::One, Sequent::new(vec![], vec![], f2));
        assert!(eq_mod_addresses(&d1, &d2));
        let d3 = Derivation::leaf(
            Rule::One,
            Sequent::new(vec![], vec![], f1.unfold_fix().unwrap()),
        );
        assert!(!eq_mod_addresses(&d1, &d3));
    }
}
