//! Abstract syntax shared by every stage: base types, values, patterns,
//! expressions, isos and terms, plus substitutions and free-variable
//! machinery.
//!
//! All nodes are immutable; every transformation builds new trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Name = String;

/// First-order base types: `1`, sums, tensors, and inductive `mu` types.
///
/// Equality is structural up to alpha-renaming of `mu` binders.
#[derive(Debug, Clone, Eq)]
pub enum BaseType {
    Unit,
    Sum(Box<BaseType>, Box<BaseType>),
    Prod(Box<BaseType>, Box<BaseType>),
    Mu(Name, Box<BaseType>),
    Var(Name),
}

impl BaseType {
    pub fn sum(a: BaseType, b: BaseType) -> BaseType {
        BaseType::Sum(Box::new(a), Box::new(b))
    }

    pub fn prod(a: BaseType, b: BaseType) -> BaseType {
        BaseType::Prod(Box::new(a), Box::new(b))
    }

    pub fn mu(x: impl Into<Name>, body: BaseType) -> BaseType {
        BaseType::Mu(x.into(), Box::new(body))
    }

    /// Right-nested tensor of `parts`; a single part is the part itself.
    pub fn tensor_of(parts: Vec<BaseType>) -> BaseType {
        let mut it = parts.into_iter().rev();
        let last = it.next().expect("tensor_of on empty list");
        it.fold(last, |acc, t| BaseType::prod(t, acc))
    }

    /// The right-nested tensor spine: `A1 * (A2 * A3)` yields `[A1, A2, A3]`.
    pub fn tensor_spine(&self) -> Vec<&BaseType> {
        let mut parts = Vec::new();
        let mut cur = self;
        while let BaseType::Prod(l, r) = cur {
            parts.push(l.as_ref());
            cur = r;
        }
        parts.push(cur);
        parts
    }

    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        fn go(t: &BaseType, bound: &mut Vec<Name>, acc: &mut BTreeSet<Name>) {
            match t {
                BaseType::Unit => {}
                BaseType::Sum(a, b) | BaseType::Prod(a, b) => {
                    go(a, bound, acc);
                    go(b, bound, acc);
                }
                BaseType::Mu(x, body) => {
                    bound.push(x.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
                BaseType::Var(x) => {
                    if !bound.contains(x) {
                        acc.insert(x.clone());
                    }
                }
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    pub fn is_closed(&self) -> bool {
        self.free_type_vars().is_empty()
    }

    /// Substitutes `replacement` for free occurrences of `Var(name)`.
    /// `replacement` is closed in every use, so no capture can occur.
    pub fn subst_var(&self, name: &str, replacement: &BaseType) -> BaseType {
        match self {
            BaseType::Unit => BaseType::Unit,
            BaseType::Sum(a, b) => BaseType::sum(
                a.subst_var(name, replacement),
                b.subst_var(name, replacement),
            ),
            BaseType::Prod(a, b) => BaseType::prod(
                a.subst_var(name, replacement),
                b.subst_var(name, replacement),
            ),
            BaseType::Mu(x, body) => {
                if x == name {
                    self.clone()
                } else {
                    BaseType::Mu(x.clone(), Box::new(body.subst_var(name, replacement)))
                }
            }
            BaseType::Var(x) => {
                if x == name {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
        }
    }

    /// One-step unfolding of a `mu` type: `mu X. A` becomes `A[X <- mu X. A]`.
    pub fn unfold(&self) -> Result<BaseType, TypeUnfoldError> {
        match self {
            BaseType::Mu(x, body) => Ok(body.subst_var(x, self)),
            _ => Err(TypeUnfoldError(self.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot unfold non-mu type `{0}`")]
pub struct TypeUnfoldError(pub BaseType);

fn alpha_eq(a: &BaseType, b: &BaseType, env: &mut Vec<(Name, Name)>) -> bool {
    match (a, b) {
        (BaseType::Unit, BaseType::Unit) => true,
        (BaseType::Sum(a1, a2), BaseType::Sum(b1, b2))
        | (BaseType::Prod(a1, a2), BaseType::Prod(b1, b2)) => {
            alpha_eq(a1, b1, env) && alpha_eq(a2, b2, env)
        }
        (BaseType::Mu(x, a1), BaseType::Mu(y, b1)) => {
            env.push((x.clone(), y.clone()));
            let r = alpha_eq(a1, b1, env);
            env.pop();
            r
        }
        (BaseType::Var(x), BaseType::Var(y)) => {
            for (bx, by) in env.iter().rev() {
                if bx == x || by == y {
                    return bx == x && by == y;
                }
            }
            x == y
        }
        _ => false,
    }
}

impl PartialEq for BaseType {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other, &mut Vec::new())
    }
}

/// An iso type `A <-> B`; both sides are closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoType {
    pub lhs: BaseType,
    pub rhs: BaseType,
}

impl IsoType {
    pub fn new(lhs: BaseType, rhs: BaseType) -> IsoType {
        IsoType { lhs, rhs }
    }

    pub fn flip(&self) -> IsoType {
        IsoType {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
        }
    }
}

/// Values double as results and as clause patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Var(Name),
    InjL(Box<Value>),
    InjR(Box<Value>),
    Pair(Box<Value>, Box<Value>),
    Fold(Box<Value>),
}

impl Value {
    pub fn var(x: impl Into<Name>) -> Value {
        Value::Var(x.into())
    }

    pub fn injl(v: Value) -> Value {
        Value::InjL(Box::new(v))
    }

    pub fn injr(v: Value) -> Value {
        Value::InjR(Box::new(v))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn fold(v: Value) -> Value {
        Value::Fold(Box::new(v))
    }

    /// Right-nested tuple; a single element is the element itself.
    pub fn tuple(parts: Vec<Value>) -> Value {
        let mut it = parts.into_iter().rev();
        let last = it.next().expect("tuple of zero values");
        it.fold(last, |acc, v| Value::pair(v, acc))
    }

    /// Splits a right-nested tuple into exactly `n` components.
    pub fn tuple_components(&self, n: usize) -> Option<Vec<&Value>> {
        let mut parts = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n.saturating_sub(1) {
            match cur {
                Value::Pair(l, r) => {
                    parts.push(l.as_ref());
                    cur = r;
                }
                _ => return None,
            }
        }
        parts.push(cur);
        if parts.len() == n {
            Some(parts)
        } else {
            None
        }
    }

    /// Free term variables, in left-to-right occurrence order.
    pub fn var_occurrences(&self) -> Vec<&Name> {
        let mut acc = Vec::new();
        fn go<'a>(v: &'a Value, acc: &mut Vec<&'a Name>) {
            match v {
                Value::Unit => {}
                Value::Var(x) => acc.push(x),
                Value::InjL(v) | Value::InjR(v) | Value::Fold(v) => go(v, acc),
                Value::Pair(a, b) => {
                    go(a, acc);
                    go(b, acc);
                }
            }
        }
        go(self, &mut acc);
        acc
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        self.var_occurrences().into_iter().cloned().collect()
    }

    pub fn is_closed(&self) -> bool {
        self.var_occurrences().is_empty()
    }

    /// Whether `x` occurs at depth >= 1 (strictly inside) this value.
    pub fn has_strict_subterm_var(&self, x: &str) -> bool {
        fn occurs(v: &Value, x: &str) -> bool {
            match v {
                Value::Unit => false,
                Value::Var(y) => y == x,
                Value::InjL(v) | Value::InjR(v) | Value::Fold(v) => occurs(v, x),
                Value::Pair(a, b) => occurs(a, x) || occurs(b, x),
            }
        }
        match self {
            Value::Unit | Value::Var(_) => false,
            Value::InjL(v) | Value::InjR(v) | Value::Fold(v) => occurs(v, x),
            Value::Pair(a, b) => occurs(a, x) || occurs(b, x),
        }
    }

    pub fn subst(&self, s: &Subst) -> Value {
        match self {
            Value::Unit => Value::Unit,
            Value::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            Value::InjL(v) => Value::injl(v.subst(s)),
            Value::InjR(v) => Value::injr(v.subst(s)),
            Value::Pair(a, b) => Value::pair(a.subst(s), b.subst(s)),
            Value::Fold(v) => Value::fold(v.subst(s)),
        }
    }
}

/// Let-binder patterns: variables and pairs only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(Name),
    Pair(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn var(x: impl Into<Name>) -> Pattern {
        Pattern::Var(x.into())
    }

    pub fn pair(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    pub fn tuple(parts: Vec<Pattern>) -> Pattern {
        let mut it = parts.into_iter().rev();
        let last = it.next().expect("tuple of zero patterns");
        it.fold(last, |acc, p| Pattern::pair(p, acc))
    }

    /// Bound variables in left-to-right order.
    pub fn vars(&self) -> Vec<&Name> {
        let mut acc = Vec::new();
        fn go<'a>(p: &'a Pattern, acc: &mut Vec<&'a Name>) {
            match p {
                Pattern::Var(x) => acc.push(x),
                Pattern::Pair(a, b) => {
                    go(a, acc);
                    go(b, acc);
                }
            }
        }
        go(self, &mut acc);
        acc
    }

    pub fn is_linear(&self) -> bool {
        let vars = self.vars();
        let set: BTreeSet<_> = vars.iter().collect();
        set.len() == vars.len()
    }

    /// The right-nested spine of variables, if this pattern is a plain
    /// variable tuple `(x1, ..., xm)`.
    pub fn var_tuple(&self) -> Option<Vec<&Name>> {
        let mut parts = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Pattern::Var(x) => {
                    parts.push(x);
                    return Some(parts);
                }
                Pattern::Pair(l, r) => match l.as_ref() {
                    Pattern::Var(x) => {
                        parts.push(x);
                        cur = r;
                    }
                    _ => return None,
                },
            }
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Pattern::Var(x) => Value::var(x.clone()),
            Pattern::Pair(a, b) => Value::pair(a.to_value(), b.to_value()),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Pattern::Var(x) => Term::Var(x.clone()),
            Pattern::Pair(a, b) => Term::pair(a.to_term(), b.to_term()),
        }
    }
}

/// Clause right-hand sides: a value under a (possibly empty) chain of lets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Value(Value),
    Let {
        pattern: Pattern,
        iso: Iso,
        arg: Pattern,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn let_in(pattern: Pattern, iso: Iso, arg: Pattern, body: Expr) -> Expr {
        Expr::Let {
            pattern,
            iso,
            arg,
            body: Box::new(body),
        }
    }

    /// `Val(e)`: strips every let layer and returns the terminal value.
    pub fn terminal_value(&self) -> &Value {
        let mut cur = self;
        loop {
            match cur {
                Expr::Value(v) => return v,
                Expr::Let { body, .. } => cur = body,
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Expr::Value(v) => v.free_vars(),
            Expr::Let {
                pattern, arg, body, ..
            } => {
                let mut acc: BTreeSet<Name> = arg.vars().into_iter().cloned().collect();
                let bound: BTreeSet<&Name> = pattern.vars().into_iter().collect();
                for x in body.free_vars() {
                    if !bound.contains(&x) {
                        acc.insert(x);
                    }
                }
                acc
            }
        }
    }

    pub fn subst(&self, s: &Subst) -> Expr {
        match self {
            Expr::Value(v) => Expr::Value(v.subst(s)),
            Expr::Let {
                pattern,
                iso,
                arg,
                body,
            } => {
                // Bound variables are assumed distinct from the support.
                Expr::Let {
                    pattern: pattern.clone(),
                    iso: iso.clone(),
                    arg: arg.clone(),
                    body: Box::new(body.subst(s)),
                }
            }
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Expr::Value(v) => Term::from_value(v),
            Expr::Let {
                pattern,
                iso,
                arg,
                body,
            } => Term::Let(
                pattern.clone(),
                Box::new(Term::App(iso.clone(), Box::new(arg.to_term()))),
                Box::new(body.to_term()),
            ),
        }
    }
}

/// Isos: clause sets, recursive definitions, iso variables, and type
/// annotations (`omega :: A <-> B`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Iso {
    Clauses(Vec<(Value, Expr)>),
    Fix(Name, Box<Iso>),
    Var(Name),
    Annot(Box<Iso>, IsoType),
}

impl Iso {
    pub fn fix(f: impl Into<Name>, body: Iso) -> Iso {
        Iso::Fix(f.into(), Box::new(body))
    }

    pub fn annot(iso: Iso, ty: IsoType) -> Iso {
        Iso::Annot(Box::new(iso), ty)
    }

    /// Strips annotation wrappers.
    pub fn skeleton(&self) -> &Iso {
        let mut cur = self;
        while let Iso::Annot(inner, _) = cur {
            cur = inner;
        }
        cur
    }

    /// The outermost annotation, if any.
    pub fn annotation(&self) -> Option<&IsoType> {
        match self {
            Iso::Annot(_, ty) => Some(ty),
            _ => None,
        }
    }

    pub fn free_iso_vars(&self) -> BTreeSet<Name> {
        fn go(iso: &Iso, bound: &mut Vec<Name>, acc: &mut BTreeSet<Name>) {
            match iso {
                Iso::Var(f) => {
                    if !bound.contains(f) {
                        acc.insert(f.clone());
                    }
                }
                Iso::Fix(f, body) => {
                    bound.push(f.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
                Iso::Annot(inner, _) => go(inner, bound, acc),
                Iso::Clauses(clauses) => {
                    for (_, e) in clauses {
                        go_expr(e, bound, acc);
                    }
                }
            }
        }
        fn go_expr(e: &Expr, bound: &mut Vec<Name>, acc: &mut BTreeSet<Name>) {
            if let Expr::Let { iso, body, .. } = e {
                go(iso, bound, acc);
                go_expr(body, bound, acc);
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// Substitutes `replacement` for the free iso-variable `f`.
    pub fn subst_iso_var(&self, f: &str, replacement: &Iso) -> Iso {
        match self {
            Iso::Var(g) => {
                if g == f {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Iso::Fix(g, body) => {
                if g == f {
                    self.clone()
                } else {
                    Iso::Fix(g.clone(), Box::new(body.subst_iso_var(f, replacement)))
                }
            }
            Iso::Annot(inner, ty) => Iso::annot(inner.subst_iso_var(f, replacement), ty.clone()),
            Iso::Clauses(clauses) => Iso::Clauses(
                clauses
                    .iter()
                    .map(|(v, e)| (v.clone(), subst_iso_var_expr(e, f, replacement)))
                    .collect(),
            ),
        }
    }
}

fn subst_iso_var_expr(e: &Expr, f: &str, replacement: &Iso) -> Expr {
    match e {
        Expr::Value(_) => e.clone(),
        Expr::Let {
            pattern,
            iso,
            arg,
            body,
        } => Expr::Let {
            pattern: pattern.clone(),
            iso: iso.subst_iso_var(f, replacement),
            arg: arg.clone(),
            body: Box::new(subst_iso_var_expr(body, f, replacement)),
        },
    }
}

/// Terms: values with iso application and let.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Unit,
    Var(Name),
    InjL(Box<Term>),
    InjR(Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fold(Box<Term>),
    App(Iso, Box<Term>),
    Let(Pattern, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(x: impl Into<Name>) -> Term {
        Term::Var(x.into())
    }

    pub fn injl(t: Term) -> Term {
        Term::InjL(Box::new(t))
    }

    pub fn injr(t: Term) -> Term {
        Term::InjR(Box::new(t))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn fold(t: Term) -> Term {
        Term::Fold(Box::new(t))
    }

    pub fn app(iso: Iso, t: Term) -> Term {
        Term::App(iso, Box::new(t))
    }

    pub fn let_in(p: Pattern, rhs: Term, body: Term) -> Term {
        Term::Let(p, Box::new(rhs), Box::new(body))
    }

    pub fn from_value(v: &Value) -> Term {
        match v {
            Value::Unit => Term::Unit,
            Value::Var(x) => Term::Var(x.clone()),
            Value::InjL(v) => Term::injl(Term::from_value(v)),
            Value::InjR(v) => Term::injr(Term::from_value(v)),
            Value::Pair(a, b) => Term::pair(Term::from_value(a), Term::from_value(b)),
            Value::Fold(v) => Term::fold(Term::from_value(v)),
        }
    }

    /// The value this term denotes, if it is one syntactically.
    pub fn as_value(&self) -> Option<Value> {
        match self {
            Term::Unit => Some(Value::Unit),
            Term::Var(x) => Some(Value::var(x.clone())),
            Term::InjL(t) => t.as_value().map(Value::injl),
            Term::InjR(t) => t.as_value().map(Value::injr),
            Term::Pair(a, b) => Some(Value::pair(a.as_value()?, b.as_value()?)),
            Term::Fold(t) => t.as_value().map(Value::fold),
            Term::App(..) | Term::Let(..) => None,
        }
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Unit | Term::Var(_) => true,
            Term::InjL(t) | Term::InjR(t) | Term::Fold(t) => t.is_value(),
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            Term::App(..) | Term::Let(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Term::Unit => BTreeSet::new(),
            Term::Var(x) => [x.clone()].into(),
            Term::InjL(t) | Term::InjR(t) | Term::Fold(t) => t.free_vars(),
            Term::Pair(a, b) => {
                let mut acc = a.free_vars();
                acc.extend(b.free_vars());
                acc
            }
            Term::App(_, t) => t.free_vars(),
            Term::Let(p, t1, t2) => {
                let mut acc = t1.free_vars();
                let bound: BTreeSet<&Name> = p.vars().into_iter().collect();
                for x in t2.free_vars() {
                    if !bound.contains(&x) {
                        acc.insert(x);
                    }
                }
                acc
            }
        }
    }

    /// Applies a substitution; does not enter isos.
    pub fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Unit => Term::Unit,
            Term::Var(x) => match s.get(x) {
                Some(v) => Term::from_value(v),
                None => self.clone(),
            },
            Term::InjL(t) => Term::injl(t.subst(s)),
            Term::InjR(t) => Term::injr(t.subst(s)),
            Term::Pair(a, b) => Term::pair(a.subst(s), b.subst(s)),
            Term::Fold(t) => Term::fold(t.subst(s)),
            Term::App(iso, t) => Term::App(iso.clone(), Box::new(t.subst(s))),
            Term::Let(p, t1, t2) => {
                // Bound variables are assumed distinct from the support.
                Term::Let(p.clone(), Box::new(t1.subst(s)), Box::new(t2.subst(s)))
            }
        }
    }

    pub fn subst_iso_var(&self, f: &str, replacement: &Iso) -> Term {
        match self {
            Term::Unit | Term::Var(_) => self.clone(),
            Term::InjL(t) => Term::injl(t.subst_iso_var(f, replacement)),
            Term::InjR(t) => Term::injr(t.subst_iso_var(f, replacement)),
            Term::Pair(a, b) => Term::pair(
                a.subst_iso_var(f, replacement),
                b.subst_iso_var(f, replacement),
            ),
            Term::Fold(t) => Term::fold(t.subst_iso_var(f, replacement)),
            Term::App(iso, t) => Term::App(
                iso.subst_iso_var(f, replacement),
                Box::new(t.subst_iso_var(f, replacement)),
            ),
            Term::Let(p, t1, t2) => Term::Let(
                p.clone(),
                Box::new(t1.subst_iso_var(f, replacement)),
                Box::new(t2.subst_iso_var(f, replacement)),
            ),
        }
    }
}

/// A finite map from term variables to values, the output of
/// pattern-matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    bindings: BTreeMap<Name, Value>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn singleton(x: impl Into<Name>, v: Value) -> Subst {
        let mut s = Subst::new();
        s.bindings.insert(x.into(), v);
        s
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.bindings.get(x)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn support(&self) -> BTreeSet<&Name> {
        self.bindings.keys().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.bindings.iter()
    }

    /// Union of two substitutions with disjoint supports.
    pub fn union_disjoint(mut self, other: Subst) -> Result<Subst, SubstOverlap> {
        for (x, v) in other.bindings {
            if self.bindings.contains_key(&x) {
                return Err(SubstOverlap(x));
            }
            self.bindings.insert(x, v);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("substitution supports overlap on `{0}`")]
pub struct SubstOverlap(pub Name);

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::pretty_type(self))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::pretty_value(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::pretty_term(self))
    }
}

impl fmt::Display for Iso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::pretty_iso(self))
    }
}

impl fmt::Display for IsoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-> {}", self.lhs, self.rhs)
    }
}

/// The natural numbers type `mu X. 1 + X`.
pub fn nat_type() -> BaseType {
    BaseType::mu(
        "X",
        BaseType::sum(BaseType::Unit, BaseType::Var("X".into())),
    )
}

/// Lists over `a`: `mu X. 1 + (a * X)`.
pub fn list_type(a: BaseType) -> BaseType {
    BaseType::mu(
        "X",
        BaseType::sum(BaseType::Unit, BaseType::prod(a, BaseType::Var("X".into()))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> BaseType {
        nat_type()
    }

    #[test]
    fn unfold_nat() {
        let unfolded = nat().unfold().unwrap();
        assert_eq!(unfolded, BaseType::sum(BaseType::Unit, nat()));
    }

    #[test]
    fn unfold_without_occurrence() {
        let t = BaseType::mu("X", BaseType::Unit);
        assert_eq!(t.unfold().unwrap(), BaseType::Unit);
    }

    #[test]
    fn unfold_list() {
        let l = list_type(BaseType::Unit);
        let unfolded = l.unfold().unwrap();
        assert_eq!(
            unfolded,
            BaseType::sum(
                BaseType::Unit,
                BaseType::prod(BaseType::Unit, list_type(BaseType::Unit))
            )
        );
    }

    #[test]
    fn unfold_rejects_non_mu() {
        assert!(BaseType::Unit.unfold().is_err());
    }

    #[test]
    fn unfold_closed_stays_closed() {
        let t = BaseType::mu(
            "X",
            BaseType::sum(
                BaseType::Unit,
                BaseType::prod(nat(), BaseType::Var("X".into())),
            ),
        );
        assert!(t.unfold().unwrap().is_closed());
    }

    #[test]
    fn alpha_equality_on_mu() {
        let a = BaseType::mu(
            "X",
            BaseType::sum(BaseType::Unit, BaseType::Var("X".into())),
        );
        let b = BaseType::mu(
            "Y",
            BaseType::sum(BaseType::Unit, BaseType::Var("Y".into())),
        );
        assert_eq!(a, b);
        let c = BaseType::mu(
            "X",
            BaseType::sum(BaseType::Var("X".into()), BaseType::Unit),
        );
        assert_ne!(a, c);
    }

    #[test]
    fn free_vars_of_value() {
        assert_eq!(Value::var("x").free_vars(), ["x".to_string()].into());
        let v = Value::pair(Value::var("x"), Value::var("y"));
        assert_eq!(v.free_vars(), ["x".to_string(), "y".to_string()].into());
    }

    #[test]
    fn let_binds_pattern_vars_in_body() {
        // let y = f x in y  has exactly {x} free
        let e = Expr::let_in(
            Pattern::var("y"),
            Iso::Var("f".into()),
            Pattern::var("x"),
            Expr::Value(Value::var("y")),
        );
        assert_eq!(e.free_vars(), ["x".to_string()].into());
    }

    #[test]
    fn subst_enters_terms_not_isos() {
        let s = Subst::singleton("x", Value::Unit);
        let t = Term::injl(Term::var("x"));
        assert_eq!(t.subst(&s), Term::injl(Term::Unit));

        let iso = Iso::Clauses(vec![(Value::var("x"), Expr::Value(Value::var("x")))]);
        let t = Term::app(iso.clone(), Term::var("x"));
        let expected = Term::app(iso, Term::Unit);
        assert_eq!(t.subst(&s), expected);
    }

    #[test]
    fn empty_subst_is_identity() {
        let t = Term::let_in(
            Pattern::var("y"),
            Term::app(Iso::Var("f".into()), Term::var("x")),
            Term::var("y"),
        );
        assert_eq!(t.subst(&Subst::new()), t);
    }

    #[test]
    fn subst_commutation_on_disjoint_supports() {
        let s1 = Subst::singleton("x", Value::injl(Value::Unit));
        let s2 = Subst::singleton("y", Value::Unit);
        let v = Value::pair(Value::var("x"), Value::fold(Value::var("y")));
        assert_eq!(v.subst(&s1).subst(&s2), v.subst(&s2).subst(&s1));
    }

    #[test]
    fn terminal_value_strips_lets() {
        let v = Value::pair(Value::var("x"), Value::var("y"));
        let e = Expr::let_in(
            Pattern::var("a"),
            Iso::Var("f".into()),
            Pattern::var("b"),
            Expr::let_in(
                Pattern::var("c"),
                Iso::Var("g".into()),
                Pattern::var("d"),
                Expr::Value(v.clone()),
            ),
        );
        assert_eq!(e.terminal_value(), &v);
    }

    #[test]
    fn tuple_round_trip() {
        let v = Value::tuple(vec![Value::var("a"), Value::var("b"), Value::var("c")]);
        assert_eq!(
            v,
            Value::pair(
                Value::var("a"),
                Value::pair(Value::var("b"), Value::var("c"))
            )
        );
        let parts = v.tuple_components(3).unwrap();
        assert_eq!(
            parts,
            vec![&Value::var("a"), &Value::var("b"), &Value::var("c")]
        );
    }

    #[test]
    fn free_vars_interaction_with_subst() {
        // FV(sigma(t)) = (FV(t) \ supp) + FV of payloads actually used
        let s = Subst::singleton("x", Value::var("z"));
        let t = Term::pair(Term::var("x"), Term::var("y"));
        let got = t.subst(&s).free_vars();
        assert_eq!(got, ["y".to_string(), "z".to_string()].into());
    }
}
