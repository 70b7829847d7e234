//! Linear typing of terms and isos, the OD exhaustivity/non-overlap
//! predicate on clause sets, and the structural-recursion check for `fix`.
//!
//! Typing is bidirectional: values and clause sets are checked against the
//! annotated iso type, while term inference is supported where the syntax
//! determines the type (variables, pairs, applications of annotated isos).

use crate::ast::*;
use crate::eval::match_value;
use std::collections::{BTreeMap, BTreeSet};

/// The linear term-variable context.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermCtx {
    bindings: BTreeMap<Name, BaseType>,
}

impl TermCtx {
    pub fn new() -> TermCtx {
        TermCtx::default()
    }

    pub fn bind(&mut self, x: Name, ty: BaseType) -> Result<(), TypeError> {
        if self.bindings.insert(x.clone(), ty).is_some() {
            return Err(TypeError::DuplicateVar(x));
        }
        Ok(())
    }

    pub fn consume(&mut self, x: &str) -> Result<BaseType, TypeError> {
        self.bindings
            .remove(x)
            .ok_or_else(|| TypeError::UnboundVar(x.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn names(&self) -> Vec<&Name> {
        self.bindings.keys().collect()
    }

    pub fn get(&self, x: &str) -> Option<&BaseType> {
        self.bindings.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &BaseType)> {
        self.bindings.iter()
    }
}

/// The iso-variable context: at most one binding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IsoCtx(pub Option<(Name, IsoType)>);

impl IsoCtx {
    pub fn empty() -> IsoCtx {
        IsoCtx(None)
    }

    pub fn single(f: Name, ty: IsoType) -> IsoCtx {
        IsoCtx(Some((f, ty)))
    }

    pub fn lookup(&self, f: &str) -> Option<&IsoType> {
        match &self.0 {
            Some((g, ty)) if g == f => Some(ty),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TypeError {
    #[error("type mismatch: expected `{expected}`, found `{found}`")]
    Mismatch { expected: BaseType, found: BaseType },
    #[error("value `{value}` does not inhabit type `{ty}`")]
    ValueShape { value: Value, ty: BaseType },
    #[error("unbound or already-consumed variable `{0}`")]
    UnboundVar(Name),
    #[error("variable `{0}` bound twice")]
    DuplicateVar(Name),
    #[error("unused variable(s) {0:?} (linearity)")]
    UnusedVars(Vec<Name>),
    #[error("unknown iso variable `{0}`")]
    UnknownIsoVar(Name),
    #[error("iso type annotation required here (cannot infer)")]
    AnnotationRequired,
    #[error("cannot infer the type of `{0}`; apply an iso or add an annotation")]
    CannotInfer(Term),
    #[error("iso has no clauses")]
    EmptyClauses,
    #[error("nested `fix` is not allowed (one iso variable at a time)")]
    NestedFix,
    #[error("annotated type `{annotated}` conflicts with expected `{expected}`")]
    AnnotationConflict {
        annotated: IsoType,
        expected: IsoType,
    },
    #[error("pattern `{pattern:?}` cannot split type `{ty}`")]
    PatternShape { pattern: Pattern, ty: BaseType },
    #[error("clause {clause}: {inner}")]
    InClause {
        clause: usize,
        inner: Box<TypeError>,
    },
    #[error("patterns are not exhaustive and non-overlapping at `{ty}`: stuck on {values:?}")]
    OdFailed { ty: BaseType, values: Vec<Value> },
    #[error("not structurally recursive: {0}")]
    NotStructurallyRecursive(String),
    #[error("type is not closed: `{0}`")]
    OpenType(BaseType),
}

/// A witness that a clause set satisfies the OD predicate at a type.
#[derive(Debug, Clone, PartialEq)]
pub enum OdTree {
    /// A lone variable covers everything.
    Var,
    /// The singleton unit set at type 1.
    Unit,
    /// Sum split: left subset under `injl`, right subset under `injr`.
    Sum(Box<OdTree>, Box<OdTree>),
    /// All values are folds; recurse at the unfolded type.
    Mu(Box<OdTree>),
    /// Product via first components: OD of the firsts, then OD of each
    /// residual group keyed by first component.
    ProdLeft(Box<OdTree>, Vec<(Value, OdTree)>),
    /// Product via second components.
    ProdRight(Box<OdTree>, Vec<(Value, OdTree)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdFailure {
    pub ty: BaseType,
    pub values: Vec<Value>,
}

/// Checks the OD predicate for a clause-pattern set at type `ty`.
///
/// Variables from different clauses are distinct binders even when they
/// share a spelling, so they are tagged apart before any grouping.
pub fn check_od(ty: &BaseType, values: &[Value]) -> Result<OdTree, OdFailure> {
    let tagged: Vec<Value> = values
        .iter()
        .enumerate()
        .map(|(i, v)| tag_vars(v, i))
        .collect();
    od(ty, &tagged)
}

fn tag_vars(v: &Value, clause: usize) -> Value {
    match v {
        Value::Unit => Value::Unit,
        Value::Var(x) => Value::var(format!("{x}#{clause}")),
        Value::InjL(v) => Value::injl(tag_vars(v, clause)),
        Value::InjR(v) => Value::injr(tag_vars(v, clause)),
        Value::Pair(a, b) => Value::pair(tag_vars(a, clause), tag_vars(b, clause)),
        Value::Fold(v) => Value::fold(tag_vars(v, clause)),
    }
}

fn dedup(values: &[Value]) -> Vec<Value> {
    let mut out = Vec::new();
    for v in values {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

fn od(ty: &BaseType, values: &[Value]) -> Result<OdTree, OdFailure> {
    let set = dedup(values);
    let fail = || OdFailure {
        ty: ty.clone(),
        values: set.clone(),
    };

    if let [Value::Var(_)] = set.as_slice() {
        return Ok(OdTree::Var);
    }
    match ty {
        BaseType::Unit => {
            if set.as_slice() == [Value::Unit] {
                Ok(OdTree::Unit)
            } else {
                Err(fail())
            }
        }
        BaseType::Sum(a, b) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for v in &set {
                match v {
                    Value::InjL(w) => left.push(w.as_ref().clone()),
                    Value::InjR(w) => right.push(w.as_ref().clone()),
                    _ => return Err(fail()),
                }
            }
            if left.is_empty() || right.is_empty() {
                return Err(fail());
            }
            let l = od(a, &left)?;
            let r = od(b, &right)?;
            Ok(OdTree::Sum(Box::new(l), Box::new(r)))
        }
        BaseType::Mu(..) => {
            let mut inner = Vec::new();
            for v in &set {
                match v {
                    Value::Fold(w) => inner.push(w.as_ref().clone()),
                    _ => return Err(fail()),
                }
            }
            let unfolded = ty.unfold().expect("mu unfolds");
            Ok(OdTree::Mu(Box::new(od(&unfolded, &inner)?)))
        }
        BaseType::Prod(a, b) => {
            let mut pairs = Vec::new();
            for v in &set {
                match v {
                    Value::Pair(l, r) => pairs.push((l.as_ref().clone(), r.as_ref().clone())),
                    _ => return Err(fail()),
                }
            }
            // First try distinguishing on first components, then on second.
            if let Ok(tree) = od_prod(a, b, &pairs, true) {
                return Ok(tree);
            }
            od_prod(
                b,
                a,
                &pairs
                    .iter()
                    .map(|(l, r)| (r.clone(), l.clone()))
                    .collect::<Vec<_>>(),
                false,
            )
            .map_err(|_| fail())
        }
        BaseType::Var(_) => Err(fail()),
    }
}

fn od_prod(
    key_ty: &BaseType,
    rest_ty: &BaseType,
    pairs: &[(Value, Value)],
    left: bool,
) -> Result<OdTree, OdFailure> {
    let keys: Vec<Value> = dedup(&pairs.iter().map(|(k, _)| k.clone()).collect::<Vec<_>>());
    let key_tree = od(key_ty, &keys)?;
    let mut groups = Vec::new();
    for key in &keys {
        let residual: Vec<Value> = pairs
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, r)| r.clone())
            .collect();
        let tree = od(rest_ty, &residual)?;
        groups.push((key.clone(), tree));
    }
    Ok(if left {
        OdTree::ProdLeft(Box::new(key_tree), groups)
    } else {
        OdTree::ProdRight(Box::new(key_tree), groups)
    })
}

/// Given an OD-passing set, finds the unique pattern matching a closed value.
pub fn match_unique(values: &[Value], v: &Value) -> Result<(usize, Subst), TypeError> {
    let mut found = None;
    for (i, pat) in values.iter().enumerate() {
        if let Ok(Some(s)) = match_value(pat, v) {
            if found.is_some() {
                return Err(TypeError::OdFailed {
                    ty: BaseType::Unit,
                    values: vec![v.clone()],
                });
            }
            found = Some((i, s));
        }
    }
    found.ok_or_else(|| TypeError::OdFailed {
        ty: BaseType::Unit,
        values: vec![v.clone()],
    })
}

/// Computes the unique context under which an open value has type `ty`.
pub fn type_value(v: &Value, ty: &BaseType) -> Result<TermCtx, TypeError> {
    let mut ctx = TermCtx::new();
    type_value_into(v, ty, &mut ctx)?;
    Ok(ctx)
}

fn type_value_into(v: &Value, ty: &BaseType, ctx: &mut TermCtx) -> Result<(), TypeError> {
    match (v, ty) {
        (Value::Var(x), _) => ctx.bind(x.clone(), ty.clone()),
        (Value::Unit, BaseType::Unit) => Ok(()),
        (Value::InjL(w), BaseType::Sum(a, _)) => type_value_into(w, a, ctx),
        (Value::InjR(w), BaseType::Sum(_, b)) => type_value_into(w, b, ctx),
        (Value::Pair(l, r), BaseType::Prod(a, b)) => {
            type_value_into(l, a, ctx)?;
            type_value_into(r, b, ctx)
        }
        (Value::Fold(w), BaseType::Mu(..)) => {
            let unfolded = ty.unfold().expect("mu unfolds");
            type_value_into(w, &unfolded, ctx)
        }
        _ => Err(TypeError::ValueShape {
            value: v.clone(),
            ty: ty.clone(),
        }),
    }
}

fn bind_pattern(p: &Pattern, ty: &BaseType, ctx: &mut TermCtx) -> Result<(), TypeError> {
    match (p, ty) {
        (Pattern::Var(x), _) => ctx.bind(x.clone(), ty.clone()),
        (Pattern::Pair(a, b), BaseType::Prod(ta, tb)) => {
            bind_pattern(a, ta, ctx)?;
            bind_pattern(b, tb, ctx)
        }
        _ => Err(TypeError::PatternShape {
            pattern: p.clone(),
            ty: ty.clone(),
        }),
    }
}

/// Consumes a pattern used as an argument, returning its type.
fn consume_pattern(p: &Pattern, ctx: &mut TermCtx) -> Result<BaseType, TypeError> {
    match p {
        Pattern::Var(x) => ctx.consume(x),
        Pattern::Pair(a, b) => {
            let ta = consume_pattern(a, ctx)?;
            let tb = consume_pattern(b, ctx)?;
            Ok(BaseType::prod(ta, tb))
        }
    }
}

/// Resolves the full type of an iso in application position.
fn iso_app_type(iso: &Iso, isoctx: &IsoCtx) -> Result<IsoType, TypeError> {
    match iso {
        Iso::Var(f) => isoctx
            .lookup(f)
            .cloned()
            .ok_or_else(|| TypeError::UnknownIsoVar(f.clone())),
        Iso::Annot(inner, ty) => {
            type_iso(isoctx, inner, Some(ty))?;
            Ok(ty.clone())
        }
        Iso::Clauses(_) | Iso::Fix(..) => Err(TypeError::AnnotationRequired),
    }
}

/// Infers a term's type, consuming context bindings linearly.
pub fn infer_term(ctx: &mut TermCtx, isoctx: &IsoCtx, t: &Term) -> Result<BaseType, TypeError> {
    match t {
        Term::Unit => Ok(BaseType::Unit),
        Term::Var(x) => ctx.consume(x),
        Term::Pair(a, b) => {
            let ta = infer_term(ctx, isoctx, a)?;
            let tb = infer_term(ctx, isoctx, b)?;
            Ok(BaseType::prod(ta, tb))
        }
        Term::InjL(_) | Term::InjR(_) | Term::Fold(_) => Err(TypeError::CannotInfer(t.clone())),
        Term::App(iso, arg) => {
            let ty = iso_app_type(iso, isoctx)?;
            check_term(ctx, isoctx, arg, &ty.lhs)?;
            Ok(ty.rhs)
        }
        Term::Let(p, t1, t2) => {
            let t1ty = infer_term(ctx, isoctx, t1)?;
            bind_pattern(p, &t1ty, ctx)?;
            let out = infer_term(ctx, isoctx, t2)?;
            ensure_consumed(ctx, p)?;
            Ok(out)
        }
    }
}

fn ensure_consumed(ctx: &TermCtx, p: &Pattern) -> Result<(), TypeError> {
    let leftover: Vec<Name> = p
        .vars()
        .into_iter()
        .filter(|x| ctx.get(x).is_some())
        .cloned()
        .collect();
    if leftover.is_empty() {
        Ok(())
    } else {
        Err(TypeError::UnusedVars(leftover))
    }
}

/// The type of a let right-hand side: inferable for applications; for a
/// bound value it is read off the unique use sites of the pattern variables
/// in the body, which linearity pins down.
pub fn let_rhs_type(
    isoctx: &IsoCtx,
    p: &Pattern,
    t2: &Term,
    expected: &BaseType,
) -> Result<BaseType, TypeError> {
    match p {
        Pattern::Var(x) => use_type(isoctx, x, t2, expected)?
            .ok_or_else(|| TypeError::CannotInfer(Term::var(x.clone()))),
        Pattern::Pair(a, b) => {
            let ta = let_rhs_type(isoctx, a, t2, expected)?;
            let tb = let_rhs_type(isoctx, b, t2, expected)?;
            Ok(BaseType::prod(ta, tb))
        }
    }
}

/// The type forced on `x` by its free occurrence in a term of type
/// `expected`; `None` when `x` does not occur.
pub fn use_type(
    isoctx: &IsoCtx,
    x: &str,
    t: &Term,
    expected: &BaseType,
) -> Result<Option<BaseType>, TypeError> {
    let mismatch = || TypeError::Mismatch {
        expected: expected.clone(),
        found: BaseType::Unit,
    };
    match t {
        Term::Var(y) => Ok((y == x).then(|| expected.clone())),
        Term::Unit => Ok(None),
        Term::InjL(u) => match expected {
            BaseType::Sum(a, _) => use_type(isoctx, x, u, a),
            _ => Err(mismatch()),
        },
        Term::InjR(u) => match expected {
            BaseType::Sum(_, b) => use_type(isoctx, x, u, b),
            _ => Err(mismatch()),
        },
        Term::Fold(u) => match expected {
            BaseType::Mu(..) => {
                let unfolded = expected.unfold().expect("mu unfolds");
                use_type(isoctx, x, u, &unfolded)
            }
            _ => Err(mismatch()),
        },
        Term::Pair(a, b) => match expected {
            BaseType::Prod(ta, tb) => {
                if let Some(ty) = use_type(isoctx, x, a, ta)? {
                    Ok(Some(ty))
                } else {
                    use_type(isoctx, x, b, tb)
                }
            }
            _ => Err(mismatch()),
        },
        Term::App(iso, arg) => {
            let ty = iso_app_type(iso, isoctx)?;
            use_type(isoctx, x, arg, &ty.lhs)
        }
        Term::Let(p, t1, t2) => {
            if t1.free_vars().contains(x) {
                let rhs_ty = match infer_shape_only(isoctx, t1) {
                    Some(ty) => ty,
                    None => let_rhs_type(isoctx, p, t2, expected)?,
                };
                use_type(isoctx, x, t1, &rhs_ty)
            } else if p.vars().iter().any(|v| *v == x) {
                Ok(None)
            } else {
                use_type(isoctx, x, t2, expected)
            }
        }
    }
}

/// Shape-level inference that never consumes a context: applications yield
/// their annotated output type.
fn infer_shape_only(isoctx: &IsoCtx, t: &Term) -> Option<BaseType> {
    match t {
        Term::App(iso, _) => iso_app_type(iso, isoctx).ok().map(|ty| ty.rhs),
        _ => None,
    }
}

/// Checks a term against an expected type, consuming bindings linearly.
pub fn check_term(
    ctx: &mut TermCtx,
    isoctx: &IsoCtx,
    t: &Term,
    expected: &BaseType,
) -> Result<(), TypeError> {
    match (t, expected) {
        (Term::Unit, BaseType::Unit) => Ok(()),
        (Term::Unit, _) => Err(TypeError::Mismatch {
            expected: expected.clone(),
            found: BaseType::Unit,
        }),
        (Term::Var(x), _) => {
            let found = ctx.consume(x)?;
            if &found == expected {
                Ok(())
            } else {
                Err(TypeError::Mismatch {
                    expected: expected.clone(),
                    found,
                })
            }
        }
        (Term::InjL(u), BaseType::Sum(a, _)) => check_term(ctx, isoctx, u, a),
        (Term::InjR(u), BaseType::Sum(_, b)) => check_term(ctx, isoctx, u, b),
        (Term::Pair(a, b), BaseType::Prod(ta, tb)) => {
            check_term(ctx, isoctx, a, ta)?;
            check_term(ctx, isoctx, b, tb)
        }
        (Term::Fold(u), BaseType::Mu(..)) => {
            let unfolded = expected.unfold().expect("mu unfolds");
            check_term(ctx, isoctx, u, &unfolded)
        }
        (Term::App(iso, arg), _) => {
            let ty = iso_app_type(iso, isoctx)?;
            if &ty.rhs != expected {
                return Err(TypeError::Mismatch {
                    expected: expected.clone(),
                    found: ty.rhs,
                });
            }
            check_term(ctx, isoctx, arg, &ty.lhs)
        }
        (Term::Let(p, t1, t2), _) => {
            let saved = ctx.clone();
            let t1ty = match infer_term(ctx, isoctx, t1) {
                Ok(ty) => ty,
                Err(TypeError::CannotInfer(_)) => {
                    *ctx = saved;
                    let ty = let_rhs_type(isoctx, p, t2, expected)?;
                    check_term(ctx, isoctx, t1, &ty)?;
                    ty
                }
                Err(e) => return Err(e),
            };
            bind_pattern(p, &t1ty, ctx)?;
            check_term(ctx, isoctx, t2, expected)?;
            ensure_consumed(ctx, p)
        }
        (Term::InjL(_) | Term::InjR(_) | Term::Fold(_) | Term::Pair(..), _) => match t.as_value() {
            Some(value) => Err(TypeError::ValueShape {
                value,
                ty: expected.clone(),
            }),
            None => {
                let found = infer_term(ctx, isoctx, t)?;
                Err(TypeError::Mismatch {
                    expected: expected.clone(),
                    found,
                })
            }
        },
    }
}

/// Checks a clause expression against the output type.
fn check_expr(
    ctx: &mut TermCtx,
    isoctx: &IsoCtx,
    e: &Expr,
    expected: &BaseType,
) -> Result<(), TypeError> {
    match e {
        Expr::Value(v) => check_term(ctx, isoctx, &Term::from_value(v), expected),
        Expr::Let {
            pattern,
            iso,
            arg,
            body,
        } => {
            let arg_ty = consume_pattern(arg, ctx)?;
            let iso_ty = iso_app_type(iso, isoctx)?;
            if iso_ty.lhs != arg_ty {
                return Err(TypeError::Mismatch {
                    expected: iso_ty.lhs,
                    found: arg_ty,
                });
            }
            bind_pattern(pattern, &iso_ty.rhs, ctx)?;
            check_expr(ctx, isoctx, body, expected)?;
            ensure_consumed(ctx, pattern)
        }
    }
}

/// Per-clause focus of the structural-recursion criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseFocus {
    /// The decreasing component is closed; the body makes no recursive call.
    Closed,
    /// The focus variable inside the decreasing component.
    Var(Name),
}

/// The structural-recursion witness: the 1-based decreasing argument index
/// plus each clause's focus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecInfo {
    pub index: usize,
    pub foci: Vec<ClauseFocus>,
}

/// Result of the structural-recursion check for a `fix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recursion {
    /// The body never calls the bound iso variable.
    NotRecursive,
    Recursive(RecInfo),
}

/// Collects every application `f p` of the iso variable inside an expression,
/// descending through nested isos.
fn collect_calls<'a>(e: &'a Expr, f: &str, acc: &mut Vec<&'a Pattern>) {
    if let Expr::Let { iso, arg, body, .. } = e {
        match iso.skeleton() {
            Iso::Var(g) if g == f => acc.push(arg),
            Iso::Clauses(clauses) => {
                for (_, e2) in clauses {
                    collect_calls(e2, f, acc);
                }
            }
            Iso::Fix(g, inner) if g != f => {
                collect_calls_iso(inner, f, acc);
            }
            _ => {}
        }
        collect_calls(body, f, acc);
    }
}

fn collect_calls_iso<'a>(iso: &'a Iso, f: &str, acc: &mut Vec<&'a Pattern>) {
    match iso {
        Iso::Clauses(clauses) => {
            for (_, e) in clauses {
                collect_calls(e, f, acc);
            }
        }
        Iso::Fix(g, inner) if g != f => collect_calls_iso(inner, f, acc),
        Iso::Annot(inner, _) => collect_calls_iso(inner, f, acc),
        _ => {}
    }
}

/// Checks the structural-recursion criterion for `fix f. clauses : ty`.
///
/// Scans candidate decreasing indices in ascending order and returns the
/// first that works.
pub fn check_structural_recursion(
    f: &str,
    clauses: &[(Value, Expr)],
    ty: &IsoType,
) -> Result<Recursion, TypeError> {
    let any_call = clauses.iter().any(|(_, e)| {
        let mut calls = Vec::new();
        collect_calls(e, f, &mut calls);
        !calls.is_empty()
    });
    if !any_call {
        return Ok(Recursion::NotRecursive);
    }

    let spine = ty.lhs.tensor_spine();
    let m = spine.len();
    let mut last_reason = "input type has no mu component".to_string();
    'candidates: for (j0, component) in spine.iter().enumerate() {
        if !matches!(component, BaseType::Mu(..)) {
            continue;
        }
        let mut foci = Vec::with_capacity(clauses.len());
        for (ci, (v, e)) in clauses.iter().enumerate() {
            let parts = match v.tuple_components(m) {
                Some(p) => p,
                None => {
                    last_reason = format!("clause {} pattern is not a {m}-tuple", ci + 1);
                    continue 'candidates;
                }
            };
            let vj = parts[j0];
            let mut calls = Vec::new();
            collect_calls(e, f, &mut calls);
            if vj.is_closed() {
                if !calls.is_empty() {
                    last_reason = format!(
                        "clause {}: closed decreasing argument but the body calls `{f}`",
                        ci + 1
                    );
                    continue 'candidates;
                }
                foci.push(ClauseFocus::Closed);
            } else {
                let mut focus = None;
                for p in &calls {
                    let vars = match p.var_tuple() {
                        Some(vs) if vs.len() == m => vs,
                        _ => {
                            last_reason = format!(
                                "clause {}: recursive call argument is not a {m}-variable tuple",
                                ci + 1
                            );
                            continue 'candidates;
                        }
                    };
                    let xj = vars[j0];
                    if !vj.has_strict_subterm_var(xj) {
                        last_reason = format!(
                            "clause {}: `{xj}` is not a strict subterm of the decreasing argument",
                            ci + 1
                        );
                        continue 'candidates;
                    }
                    if focus.is_none() {
                        focus = Some(xj.clone());
                    }
                }
                match focus {
                    Some(x) => foci.push(ClauseFocus::Var(x)),
                    // Open decreasing argument but no call in this clause.
                    None => foci.push(ClauseFocus::Closed),
                }
            }
        }
        return Ok(Recursion::Recursive(RecInfo {
            index: j0 + 1,
            foci,
        }));
    }
    Err(TypeError::NotStructurallyRecursive(last_reason))
}

/// The outcome of checking one iso.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedIso {
    pub ty: IsoType,
    pub recursion: Option<Recursion>,
}

/// Checks an iso against an expected type (required for bare clause sets and
/// `fix`), verifying clause typing, both OD conditions, and structural
/// recursion. Returns the resolved type.
pub fn type_iso(
    isoctx: &IsoCtx,
    iso: &Iso,
    expected: Option<&IsoType>,
) -> Result<CheckedIso, TypeError> {
    match iso {
        Iso::Var(f) => {
            let ty = isoctx
                .lookup(f)
                .cloned()
                .ok_or_else(|| TypeError::UnknownIsoVar(f.clone()))?;
            if let Some(exp) = expected {
                if exp != &ty {
                    return Err(TypeError::AnnotationConflict {
                        annotated: ty,
                        expected: exp.clone(),
                    });
                }
            }
            Ok(CheckedIso {
                ty,
                recursion: None,
            })
        }
        Iso::Annot(inner, ty) => {
            if let Some(exp) = expected {
                if exp != ty {
                    return Err(TypeError::AnnotationConflict {
                        annotated: ty.clone(),
                        expected: exp.clone(),
                    });
                }
            }
            type_iso(isoctx, inner, Some(ty))
        }
        Iso::Fix(f, body) => {
            let ty = expected.ok_or(TypeError::AnnotationRequired)?.clone();
            if !ty.lhs.is_closed() {
                return Err(TypeError::OpenType(ty.lhs.clone()));
            }
            if !ty.rhs.is_closed() {
                return Err(TypeError::OpenType(ty.rhs.clone()));
            }
            let clauses = match body.skeleton() {
                Iso::Clauses(cs) => cs,
                Iso::Fix(..) => return Err(TypeError::NestedFix),
                Iso::Var(_) => return Err(TypeError::AnnotationRequired),
                Iso::Annot(..) => unreachable!(),
            };
            if let Some(annot) = body.annotation() {
                if annot != &ty {
                    return Err(TypeError::AnnotationConflict {
                        annotated: annot.clone(),
                        expected: ty,
                    });
                }
            }
            // The structural-recursion check runs before clause typing so a
            // non-recursive fix is reported as such, not as an unbound iso.
            let recursion = check_structural_recursion(f, clauses, &ty)?;
            let inner_ctx = IsoCtx::single(f.clone(), ty.clone());
            check_clauses(&inner_ctx, clauses, &ty)?;
            Ok(CheckedIso {
                ty,
                recursion: Some(recursion),
            })
        }
        Iso::Clauses(clauses) => {
            let ty = expected.ok_or(TypeError::AnnotationRequired)?.clone();
            if !ty.lhs.is_closed() {
                return Err(TypeError::OpenType(ty.lhs.clone()));
            }
            if !ty.rhs.is_closed() {
                return Err(TypeError::OpenType(ty.rhs.clone()));
            }
            check_clauses(isoctx, clauses, &ty)?;
            Ok(CheckedIso {
                ty,
                recursion: None,
            })
        }
    }
}

fn check_clauses(
    isoctx: &IsoCtx,
    clauses: &[(Value, Expr)],
    ty: &IsoType,
) -> Result<(), TypeError> {
    if clauses.is_empty() {
        return Err(TypeError::EmptyClauses);
    }
    for (i, (v, e)) in clauses.iter().enumerate() {
        let mut ctx = type_value(v, &ty.lhs).map_err(|inner| TypeError::InClause {
            clause: i + 1,
            inner: Box::new(inner),
        })?;
        check_expr(&mut ctx, isoctx, e, &ty.rhs).map_err(|inner| TypeError::InClause {
            clause: i + 1,
            inner: Box::new(inner),
        })?;
        if !ctx.is_empty() {
            let leftover = ctx.names().into_iter().cloned().collect();
            return Err(TypeError::InClause {
                clause: i + 1,
                inner: Box::new(TypeError::UnusedVars(leftover)),
            });
        }
    }
    let lhs_values: Vec<Value> = clauses.iter().map(|(v, _)| v.clone()).collect();
    check_od(&ty.lhs, &lhs_values).map_err(|f| TypeError::OdFailed {
        ty: f.ty,
        values: f.values,
    })?;
    let rhs_values: Vec<Value> = clauses
        .iter()
        .map(|(_, e)| e.terminal_value().clone())
        .collect();
    check_od(&ty.rhs, &rhs_values).map_err(|f| TypeError::OdFailed {
        ty: f.ty,
        values: f.values,
    })?;
    Ok(())
}

/// Types a closed term from scratch (e.g. a `main` expression).
pub fn type_closed_term(t: &Term) -> Result<BaseType, TypeError> {
    let free = t.free_vars();
    if let Some(x) = free.into_iter().next() {
        return Err(TypeError::UnboundVar(x));
    }
    let mut ctx = TermCtx::new();
    infer_term(&mut ctx, &IsoCtx::empty(), t)
}

/// Enumerates the closed values of a type, bounded by fold depth and count.
pub fn enumerate_values(ty: &BaseType, depth: usize, limit: usize) -> Vec<Value> {
    let mut out = Vec::new();
    enumerate_into(ty, depth, limit, &mut out);
    out
}

fn enumerate_into(ty: &BaseType, depth: usize, limit: usize, out: &mut Vec<Value>) {
    fn go(ty: &BaseType, depth: usize, limit: usize) -> Vec<Value> {
        if limit == 0 {
            return Vec::new();
        }
        match ty {
            BaseType::Unit => vec![Value::Unit],
            BaseType::Sum(a, b) => {
                let mut vs: Vec<Value> = go(a, depth, limit).into_iter().map(Value::injl).collect();
                vs.extend(go(b, depth, limit).into_iter().map(Value::injr));
                vs.truncate(limit);
                vs
            }
            BaseType::Prod(a, b) => {
                let left = go(a, depth, limit);
                let right = go(b, depth, limit);
                let mut vs = Vec::new();
                'outer: for l in &left {
                    for r in &right {
                        if vs.len() >= limit {
                            break 'outer;
                        }
                        vs.push(Value::pair(l.clone(), r.clone()));
                    }
                }
                vs
            }
            BaseType::Mu(..) => {
                if depth == 0 {
                    return Vec::new();
                }
                let unfolded = ty.unfold().expect("mu unfolds");
                go(&unfolded, depth - 1, limit)
                    .into_iter()
                    .map(Value::fold)
                    .collect()
            }
            BaseType::Var(_) => Vec::new(),
        }
    }
    out.extend(go(ty, depth, limit));
}

/// A loaded and fully checked definition.
#[derive(Debug, Clone)]
pub struct CheckedDef {
    pub name: Name,
    pub ty: IsoType,
    pub iso: Iso,
    pub recursion: Option<Recursion>,
    pub pos: crate::parser::Pos,
}

/// Checks every definition of a source file.
#[allow(clippy::type_complexity)]
pub fn check_file(
    file: &crate::parser::SourceFile,
) -> Result<Vec<CheckedDef>, (Name, crate::parser::Pos, TypeError)> {
    let mut out = Vec::new();
    for d in &file.defs {
        let checked = type_iso(&IsoCtx::empty(), &d.iso, Some(&d.ty))
            .map_err(|e| (d.name.clone(), d.pos, e))?;
        out.push(CheckedDef {
            name: d.name.clone(),
            ty: checked.ty,
            iso: d.iso.clone(),
            recursion: checked.recursion,
            pos: d.pos,
        });
    }
    Ok(out)
}

/// Counts closed values up to a depth bound, for acceptance sweeps.
pub fn count_inhabitants(ty: &BaseType, depth: usize, cap: usize) -> usize {
    enumerate_values(ty, depth, cap).len()
}

/// Collects the distinct variables of a value; useful for test assertions.
pub fn value_vars(v: &Value) -> BTreeSet<Name> {
    v.free_vars()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_iso, parse_type, parse_value};

    fn iso1() -> (Iso, IsoType) {
        // A + (B + C) <-> C + (A + B) with A = 1, B = 1 + 1, C = 1
        let iso = parse_iso(
            "{ injl a <-> injr (injl a) | injr (injl b) <-> injr (injr b) | injr (injr c) <-> injl c }",
        )
        .unwrap();
        let ty = IsoType::new(
            parse_type("1 + ((1 + 1) + 1)").unwrap(),
            parse_type("1 + (1 + (1 + 1))").unwrap(),
        );
        (iso, ty)
    }

    #[test]
    fn od_accepts_two_sided_unit_sum() {
        let ty = parse_type("1 + 1").unwrap();
        let vs = vec![
            parse_value("injl ()").unwrap(),
            parse_value("injr ()").unwrap(),
        ];
        assert!(check_od(&ty, &vs).is_ok());
    }

    #[test]
    fn od_accepts_single_variable() {
        let ty = parse_type("mu X. 1 + X").unwrap();
        assert_eq!(check_od(&ty, &[Value::var("x")]).unwrap(), OdTree::Var);
    }

    #[test]
    fn od_rejects_remark_counterexample() {
        // ((A + B) + C) * (D + E) with the five clauses that a conventional
        // coverage checker accepts.
        let ty = parse_type("((1 + 1) + 1) * (1 + 1)").unwrap();
        let vs = vec![
            parse_value("(injr x, injl y)").unwrap(),
            parse_value("(injr x, injr y)").unwrap(),
            parse_value("(injl x, injr y)").unwrap(),
            parse_value("(injl (injl x), injl y)").unwrap(),
            parse_value("(injl (injr x), injl y)").unwrap(),
        ];
        assert!(check_od(&ty, &vs).is_err());
    }

    #[test]
    fn od_rejects_missing_branch() {
        let ty = parse_type("1 + 1").unwrap();
        let vs = vec![parse_value("injl ()").unwrap()];
        assert!(check_od(&ty, &vs).is_err());
    }

    #[test]
    fn od_groups_equal_first_components() {
        // {((), injl y), ((), injr y)} is exhaustive at 1 * (1 + 1)
        let ty = parse_type("1 * (1 + 1)").unwrap();
        let vs = vec![
            parse_value("((), injl y)").unwrap(),
            parse_value("((), injr y)").unwrap(),
        ];
        assert!(check_od(&ty, &vs).is_ok());
    }

    #[test]
    fn match_unique_on_iso1_patterns() {
        let (iso, _) = iso1();
        let patterns: Vec<Value> = match iso.skeleton() {
            Iso::Clauses(cs) => cs.iter().map(|(v, _)| v.clone()).collect(),
            _ => unreachable!(),
        };
        let v = parse_value("injr (injl (injl ()))").unwrap();
        let (idx, s) = match_unique(&patterns, &v).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(s.get("b"), Some(&parse_value("injl ()").unwrap()));
    }

    #[test]
    fn exhaustive_matching_over_small_type() {
        let (iso, ty) = iso1();
        let patterns: Vec<Value> = match iso.skeleton() {
            Iso::Clauses(cs) => cs.iter().map(|(v, _)| v.clone()).collect(),
            _ => unreachable!(),
        };
        for v in enumerate_values(&ty.lhs, 4, 100) {
            let mut count = 0;
            for p in &patterns {
                if match_value(p, &v).unwrap().is_some() {
                    count += 1;
                }
            }
            assert_eq!(count, 1, "value {v} matched {count} patterns");
        }
    }

    #[test]
    fn type_value_builds_context() {
        // (x, fold y) against 1 * nat gives {x : 1, y : 1 + nat}
        let ty = parse_type("1 * (mu X. 1 + X)").unwrap();
        let v = parse_value("(x, fold y)").unwrap();
        let ctx = type_value(&v, &ty).unwrap();
        assert_eq!(ctx.get("x"), Some(&BaseType::Unit));
        assert_eq!(
            ctx.get("y"),
            Some(&parse_type("1 + (mu X. 1 + X)").unwrap())
        );
    }

    #[test]
    fn type_value_rejects_shape_clash() {
        let ty = parse_type("1 * 1").unwrap();
        assert!(type_value(&parse_value("injl ()").unwrap(), &ty).is_err());
    }

    #[test]
    fn unit_value_types_with_empty_context() {
        let ctx = type_value(&Value::Unit, &BaseType::Unit).unwrap();
        assert!(ctx.is_empty());
    }

    #[test]
    fn pair_typing_splits_context() {
        let mut ctx = TermCtx::new();
        ctx.bind("x".into(), BaseType::Unit).unwrap();
        ctx.bind("y".into(), parse_type("1 + 1").unwrap()).unwrap();
        let t = Term::pair(Term::var("x"), Term::var("y"));
        let ty = infer_term(&mut ctx, &IsoCtx::empty(), &t).unwrap();
        assert_eq!(ty, parse_type("1 * (1 + 1)").unwrap());
        assert!(ctx.is_empty());
    }

    #[test]
    fn linearity_rejects_double_use() {
        let mut ctx = TermCtx::new();
        ctx.bind("x".into(), BaseType::Unit).unwrap();
        let t = Term::pair(Term::var("x"), Term::var("x"));
        assert!(matches!(
            infer_term(&mut ctx, &IsoCtx::empty(), &t),
            Err(TypeError::UnboundVar(_))
        ));
    }

    #[test]
    fn iso1_types_at_declared_type() {
        let (iso, ty) = iso1();
        let checked = type_iso(&IsoCtx::empty(), &iso, Some(&ty)).unwrap();
        assert_eq!(checked.ty, ty);
    }

    #[test]
    fn swap_application_types() {
        let swap_ty = IsoType::new(
            parse_type("1 * (1 + 1)").unwrap(),
            parse_type("(1 + 1) * 1").unwrap(),
        );
        let swap = Iso::annot(parse_iso("{ (x, y) <-> (y, x) }").unwrap(), swap_ty.clone());
        let t = Term::app(swap, Term::pair(Term::Unit, Term::injl(Term::Unit)));
        assert_eq!(type_closed_term(&t).unwrap(), swap_ty.rhs);
    }

    #[test]
    fn map_is_structurally_recursive_on_first_argument() {
        let src = "fix f. { fold (injl ()) <-> fold (injl ())
                          | fold (injr (h, t)) <->
                              let h' = ({ (x, y) <-> (y, x) } :: 1 * 1 <-> 1 * 1) h in
                              let t' = f t in
                              fold (injr (h', t')) }";
        let iso = parse_iso(src).unwrap();
        let elem = parse_type("1 * 1").unwrap();
        let ty = IsoType::new(list_type(elem.clone()), list_type(elem));
        let checked = type_iso(&IsoCtx::empty(), &iso, Some(&ty)).unwrap();
        match checked.recursion {
            Some(Recursion::Recursive(info)) => {
                assert_eq!(info.index, 1);
                assert_eq!(info.foci[0], ClauseFocus::Closed);
                assert_eq!(info.foci[1], ClauseFocus::Var("t".into()));
            }
            other => panic!("expected recursive witness, got {other:?}"),
        }
    }

    #[test]
    fn identity_loop_is_not_structurally_recursive() {
        let iso = parse_iso("fix f. { x <-> let y = f x in y }").unwrap();
        let ty = IsoType::new(nat_type(), nat_type());
        match type_iso(&IsoCtx::empty(), &iso, Some(&ty)) {
            Err(TypeError::NotStructurallyRecursive(_)) => {}
            other => panic!("expected structural-recursion failure, got {other:?}"),
        }
    }

    #[test]
    fn cantor_pairing_fails_structural_recursion() {
        let nat = pretty_nat();
        let src = format!(
            "fix g. {{ x <-> let y = ({{ (fold (injr i), j) <-> injl ((i, fold (injr j)))
                                     | (fold (injl ()), fold (injr (fold (injr j)))) <-> injl ((fold (injr j), fold (injl ())))
                                     | (fold (injl ()), fold (injr (fold (injl ())))) <-> injl ((fold (injl ()), fold (injl ())))
                                     | (fold (injl ()), fold (injl ())) <-> injr () }}
                                     :: ({nat}) * ({nat}) <-> (({nat}) * ({nat})) + 1) x in
                              let z = {{ injl w <-> let y' = g w in fold (injr y')
                                      | injr u <-> fold (injl u) }} y in
                              z }}"
        );
        let iso = parse_iso(&src).unwrap();
        let ty = IsoType::new(BaseType::prod(nat_type(), nat_type()), nat_type());
        match type_iso(&IsoCtx::empty(), &iso, Some(&ty)) {
            Err(TypeError::NotStructurallyRecursive(msg)) => {
                assert!(msg.contains("tuple"), "reason: {msg}");
            }
            other => panic!("expected structural-recursion failure, got {other:?}"),
        }
    }

    fn pretty_nat() -> String {
        crate::parser::pretty_type(&nat_type())
    }

    #[test]
    fn unused_variable_is_rejected() {
        // { (x, y) <-> x } drops y
        let iso = parse_iso("{ (x, y) <-> x }").unwrap();
        let ty = IsoType::new(parse_type("1 * 1").unwrap(), parse_type("1").unwrap());
        assert!(type_iso(&IsoCtx::empty(), &iso, Some(&ty)).is_err());
    }

    #[test]
    fn enumerate_counts_nat_values() {
        // nat values of fold-depth <= 3: 1, 2, 3 in unary
        let vs = enumerate_values(&nat_type(), 3, 100);
        assert_eq!(vs.len(), 3);
        assert!(vs.iter().all(|v| v.is_closed()));
    }
}
