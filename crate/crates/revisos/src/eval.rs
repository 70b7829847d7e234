//! Operational semantics.
//!
//! Two small-step systems over closed, well-typed terms:
//!
//! * the main system, where `let` and iso application fire a full
//!   substitution at once;
//! * the explicit-substitution system, where pattern-matching produces a
//!   chain of single-variable lets that percolate through the term one
//!   constructor at a time.
//!
//! Both are deterministic: the redex is found by descending the leftmost
//! non-value child, and in the explicit system additionally by descending
//! into the body of a `let x = v in ...` whose own rules do not apply yet
//! (the binding is parked until the body exposes a constructor).

use crate::ast::*;

/// Which rewrite system drives `eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum System {
    #[default]
    Main,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub fuel: u64,
    pub trace: bool,
    pub system: System,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            fuel: 100_000,
            trace: false,
            system: System::Main,
        }
    }
}

/// Names of individual rewrite rules, as reported in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleName {
    LetE,
    IsoRec,
    IsoApp,
    EletVar,
    EletPairSplit,
    EletPairLeft,
    EletPairRight,
    EletInjL,
    EletInjR,
    EletFold,
    EletApp,
    /// Pushes a parked binding into the right-hand side of an inner let.
    EletPushArg,
    /// Pushes a parked binding into the body of an inner let.
    EletPushBody,
}

impl RuleName {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleName::LetE => "LetE",
            RuleName::IsoRec => "IsoRec",
            RuleName::IsoApp => "IsoApp",
            RuleName::EletVar => "EletVar",
            RuleName::EletPairSplit => "EletPairSplit",
            RuleName::EletPairLeft => "EletPairLeft",
            RuleName::EletPairRight => "EletPairRight",
            RuleName::EletInjL => "EletInjL",
            RuleName::EletInjR => "EletInjR",
            RuleName::EletFold => "EletFold",
            RuleName::EletApp => "EletApp",
            RuleName::EletPushArg => "EletPushArg",
            RuleName::EletPushBody => "EletPushBody",
        }
    }

    /// Whether this is one of the structural let-percolation rules.
    pub fn is_elet(&self) -> bool {
        matches!(
            self,
            RuleName::EletVar
                | RuleName::EletPairSplit
                | RuleName::EletPairLeft
                | RuleName::EletPairRight
                | RuleName::EletInjL
                | RuleName::EletInjR
                | RuleName::EletFold
                | RuleName::EletApp
                | RuleName::EletPushArg
                | RuleName::EletPushBody
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("non-linear pattern: variable `{0}` bound twice")]
    NonLinearPattern(Name),
    #[error("no clause matches value `{0}`")]
    NoClauseMatches(Value),
    #[error("stuck term (ill-typed input): {0}")]
    Stuck(Term),
    #[error("free iso variable `{0}` at evaluation time")]
    FreeIsoVar(Name),
}

/// One trace entry; `path` addresses the redex by child indices.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub step: u64,
    pub rule: RuleName,
    pub path: Vec<usize>,
    pub before: Term,
    pub after: Term,
}

#[derive(Debug, Clone, Default)]
pub struct Trace(pub Vec<TraceEntry>);

impl Trace {
    /// JSON-lines rendering: one object per step.
    pub fn to_json_lines(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for e in &self.0 {
            let path: Vec<serde_json::Value> = e
                .path
                .iter()
                .map(|i| serde_json::Value::from(*i as u64))
                .collect();
            let obj = serde_json::json!({
                "step": e.step,
                "rule": e.rule.as_str(),
                "path": path,
                "term": crate::parser::pretty_term(&e.after),
            });
            writeln!(out, "{obj}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Value),
    FuelExhausted(Term),
}

/// Matches a closed value `v` against an open value used as a pattern.
/// Returns `None` on a constructor clash; errors only on non-linear patterns.
pub fn match_value(pattern: &Value, v: &Value) -> Result<Option<Subst>, EvalError> {
    match (pattern, v) {
        (Value::Var(x), _) => Ok(Some(Subst::singleton(x.clone(), v.clone()))),
        (Value::Unit, Value::Unit) => Ok(Some(Subst::new())),
        (Value::InjL(p), Value::InjL(w)) => match_value(p, w),
        (Value::InjR(p), Value::InjR(w)) => match_value(p, w),
        (Value::Fold(p), Value::Fold(w)) => match_value(p, w),
        (Value::Pair(p1, p2), Value::Pair(w1, w2)) => {
            let s1 = match match_value(p1, w1)? {
                Some(s) => s,
                None => return Ok(None),
            };
            let s2 = match match_value(p2, w2)? {
                Some(s) => s,
                None => return Ok(None),
            };
            match s1.union_disjoint(s2) {
                Ok(s) => Ok(Some(s)),
                Err(SubstOverlap(x)) => Err(EvalError::NonLinearPattern(x)),
            }
        }
        _ => Ok(None),
    }
}

/// Matches a let pattern against a value.
pub fn match_pattern(p: &Pattern, v: &Value) -> Result<Subst, EvalError> {
    match_value(&p.to_value(), v)?.ok_or_else(|| EvalError::NoClauseMatches(v.clone()))
}

/// Selects the unique matching clause of an iso for a closed value.
pub fn select_clause<'a>(
    clauses: &'a [(Value, Expr)],
    v: &Value,
) -> Result<(usize, Subst, &'a Expr), EvalError> {
    for (i, (pat, e)) in clauses.iter().enumerate() {
        if let Some(s) = match_value(pat, v)? {
            return Ok((i, s, e));
        }
    }
    Err(EvalError::NoClauseMatches(v.clone()))
}

/// Builds the explicit binding chain `let x1 = v1 in ... in body` for a
/// substitution, bindings ordered by the left-to-right variable occurrences
/// of `pattern_value`.
pub fn let_chain(pattern_value: &Value, subst: &Subst, body: Term) -> Term {
    let order: Vec<&Name> = pattern_value.var_occurrences();
    let mut t = body;
    for x in order.into_iter().rev() {
        let v = subst.get(x).expect("binding for pattern variable").clone();
        t = Term::let_in(Pattern::var(x.clone()), Term::from_value(&v), t);
    }
    t
}

fn unfold_fix(f: &Name, body: &Iso, annot: Option<&IsoType>) -> Iso {
    let whole = match annot {
        Some(ty) => Iso::annot(Iso::Fix(f.clone(), Box::new(body.clone())), ty.clone()),
        None => Iso::Fix(f.clone(), Box::new(body.clone())),
    };
    let unfolded = body.subst_iso_var(f, &whole);
    match annot {
        Some(ty) => Iso::annot(unfolded, ty.clone()),
        None => unfolded,
    }
}

struct Step {
    term: Term,
    rule: RuleName,
    path: Vec<usize>,
}

/// One step of the main system; `None` means the term is a value.
pub fn step(t: &Term) -> Result<Option<(Term, RuleName, Vec<usize>)>, EvalError> {
    let mut path = Vec::new();
    match step_main_at(t, &mut path)? {
        Some(s) => Ok(Some((s.term, s.rule, s.path))),
        None => {
            if t.is_value() {
                Ok(None)
            } else {
                Err(EvalError::Stuck(t.clone()))
            }
        }
    }
}

fn step_main_at(t: &Term, path: &mut Vec<usize>) -> Result<Option<Step>, EvalError> {
    match t {
        Term::Unit | Term::Var(_) => Ok(None),
        Term::InjL(u) | Term::InjR(u) | Term::Fold(u) => {
            path.push(0);
            let inner = step_main_at(u, path)?;
            path.pop();
            Ok(inner.map(|s| Step {
                term: rebuild_unary(t, s.term),
                ..s
            }))
        }
        Term::Pair(a, b) => {
            if !a.is_value() {
                path.push(0);
                let inner = step_main_at(a, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::pair(s.term, b.as_ref().clone()),
                    ..s
                }));
            }
            if !b.is_value() {
                path.push(1);
                let inner = step_main_at(b, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::pair(a.as_ref().clone(), s.term),
                    ..s
                }));
            }
            Ok(None)
        }
        Term::App(iso, arg) => {
            if !arg.is_value() {
                path.push(0);
                let inner = step_main_at(arg, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::App(iso.clone(), Box::new(s.term)),
                    ..s
                }));
            }
            let v = arg.as_value().expect("value argument");
            apply_iso(iso, &v, arg, path, false)
        }
        Term::Let(p, t1, t2) => {
            if !t1.is_value() {
                path.push(0);
                let inner = step_main_at(t1, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::Let(p.clone(), Box::new(s.term), t2.clone()),
                    ..s
                }));
            }
            let v = t1.as_value().expect("value rhs");
            let s = match_pattern(p, &v)?;
            Ok(Some(Step {
                term: t2.subst(&s),
                rule: RuleName::LetE,
                path: path.clone(),
            }))
        }
    }
}

fn rebuild_unary(original: &Term, inner: Term) -> Term {
    match original {
        Term::InjL(_) => Term::injl(inner),
        Term::InjR(_) => Term::injr(inner),
        Term::Fold(_) => Term::fold(inner),
        _ => unreachable!(),
    }
}

/// Fires IsoRec or IsoApp at an application node. An open argument is not a
/// redex yet: the bindings above it still have to percolate in. In the
/// explicit system the clause body is wrapped in a let chain instead of
/// substituted.
fn apply_iso(
    iso: &Iso,
    v: &Value,
    arg: &Term,
    path: &[usize],
    explicit: bool,
) -> Result<Option<Step>, EvalError> {
    if !v.is_closed() {
        return Ok(None);
    }
    let annot = iso.annotation();
    match iso.skeleton() {
        Iso::Fix(f, body) => {
            let unfolded = unfold_fix(f, body, annot);
            Ok(Some(Step {
                term: Term::App(unfolded, Box::new(arg.clone())),
                rule: RuleName::IsoRec,
                path: path.to_vec(),
            }))
        }
        Iso::Clauses(clauses) => {
            let (i, s, e) = select_clause(clauses, v)?;
            let term = if explicit {
                let_chain(&clauses[i].0, &s, e.to_term())
            } else {
                e.to_term().subst(&s)
            };
            Ok(Some(Step {
                term,
                rule: RuleName::IsoApp,
                path: path.to_vec(),
            }))
        }
        Iso::Var(f) => Err(EvalError::FreeIsoVar(f.clone())),
        Iso::Annot(..) => unreachable!("skeleton strips annotations"),
    }
}

/// One step of the explicit-substitution system; `None` means value.
pub fn step_explicit(t: &Term) -> Result<Option<(Term, RuleName, Vec<usize>)>, EvalError> {
    let mut path = Vec::new();
    match step_explicit_at(t, &mut path)? {
        Some(s) => Ok(Some((s.term, s.rule, s.path))),
        None => {
            if t.is_value() {
                Ok(None)
            } else {
                Err(EvalError::Stuck(t.clone()))
            }
        }
    }
}

fn step_explicit_at(t: &Term, path: &mut Vec<usize>) -> Result<Option<Step>, EvalError> {
    match t {
        Term::Unit | Term::Var(_) => Ok(None),
        Term::InjL(u) | Term::InjR(u) | Term::Fold(u) => {
            path.push(0);
            let inner = step_explicit_at(u, path)?;
            path.pop();
            Ok(inner.map(|s| Step {
                term: rebuild_unary(t, s.term),
                ..s
            }))
        }
        Term::Pair(a, b) => {
            if !a.is_value() {
                path.push(0);
                let inner = step_explicit_at(a, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::pair(s.term, b.as_ref().clone()),
                    ..s
                }));
            }
            if !b.is_value() {
                path.push(1);
                let inner = step_explicit_at(b, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::pair(a.as_ref().clone(), s.term),
                    ..s
                }));
            }
            Ok(None)
        }
        Term::App(iso, arg) => {
            if !arg.is_value() {
                path.push(0);
                let inner = step_explicit_at(arg, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::App(iso.clone(), Box::new(s.term)),
                    ..s
                }));
            }
            let v = arg.as_value().expect("value argument");
            apply_iso(iso, &v, arg, path, true)
        }
        Term::Let(p, t1, t2) => {
            if !t1.is_value() {
                path.push(0);
                let inner = step_explicit_at(t1, path)?;
                path.pop();
                return Ok(inner.map(|s| Step {
                    term: Term::Let(p.clone(), Box::new(s.term), t2.clone()),
                    ..s
                }));
            }
            match p {
                Pattern::Pair(x1, rest) => {
                    // let (x1, p) = (t1, t2) in t  splits into two lets.
                    // An open scrutinee waits for the outer bindings.
                    if !t1.free_vars().is_empty() {
                        return Ok(None);
                    }
                    match t1.as_ref() {
                        Term::Pair(v1, v2) => {
                            let term = Term::Let(
                                x1.as_ref().clone(),
                                v1.clone(),
                                Box::new(Term::Let(rest.as_ref().clone(), v2.clone(), t2.clone())),
                            );
                            Ok(Some(Step {
                                term,
                                rule: RuleName::EletPairSplit,
                                path: path.clone(),
                            }))
                        }
                        _ => Err(EvalError::Stuck(t.clone())),
                    }
                }
                Pattern::Var(x) => elet_var_rules(x, t1, t2, t, path),
            }
        }
    }
}

/// The structural rules for `let x = v in body`, keyed on the body's head
/// constructor. Bodies headed by a let or an application park the binding:
/// inner redexes run first, and only once the body is inert does the binding
/// push one level in (into an application argument, or into the component of
/// an inner let that uses it).
fn elet_var_rules(
    x: &Name,
    v: &Term,
    body: &Term,
    whole: &Term,
    path: &mut Vec<usize>,
) -> Result<Option<Step>, EvalError> {
    let relet = |inner: Term| {
        Term::Let(
            Pattern::var(x.clone()),
            Box::new(v.clone()),
            Box::new(inner),
        )
    };
    // An open binding waits: the bindings above it percolate down first.
    let closed = v.free_vars().is_empty();
    match body {
        Term::Var(y) if y == x => {
            if !closed {
                return Ok(None);
            }
            Ok(Some(Step {
                term: v.clone(),
                rule: RuleName::EletVar,
                path: path.clone(),
            }))
        }
        Term::Var(_) | Term::Unit => Err(EvalError::Stuck(whole.clone())),
        Term::Pair(a, b) => {
            if !closed {
                return Ok(None);
            }
            let term = if a.free_vars().contains(x) {
                Term::pair(relet(a.as_ref().clone()), b.as_ref().clone())
            } else if b.free_vars().contains(x) {
                Term::pair(a.as_ref().clone(), relet(b.as_ref().clone()))
            } else {
                return Err(EvalError::Stuck(whole.clone()));
            };
            let rule = if a.free_vars().contains(x) {
                RuleName::EletPairLeft
            } else {
                RuleName::EletPairRight
            };
            Ok(Some(Step {
                term,
                rule,
                path: path.clone(),
            }))
        }
        Term::InjL(u) => {
            if !closed {
                return Ok(None);
            }
            Ok(Some(Step {
                term: Term::injl(relet(u.as_ref().clone())),
                rule: RuleName::EletInjL,
                path: path.clone(),
            }))
        }
        Term::InjR(u) => {
            if !closed {
                return Ok(None);
            }
            Ok(Some(Step {
                term: Term::injr(relet(u.as_ref().clone())),
                rule: RuleName::EletInjR,
                path: path.clone(),
            }))
        }
        Term::Fold(u) => {
            if !closed {
                return Ok(None);
            }
            Ok(Some(Step {
                term: Term::fold(relet(u.as_ref().clone())),
                rule: RuleName::EletFold,
                path: path.clone(),
            }))
        }
        Term::App(iso, u) => {
            path.push(1);
            let inner = step_explicit_at(body, path)?;
            path.pop();
            if let Some(s) = inner {
                return Ok(Some(Step {
                    term: relet(s.term),
                    ..s
                }));
            }
            if !closed {
                return Ok(None);
            }
            Ok(Some(Step {
                term: Term::App(iso.clone(), Box::new(relet(u.as_ref().clone()))),
                rule: RuleName::EletApp,
                path: path.clone(),
            }))
        }
        Term::Let(p, t1, t2) => {
            path.push(1);
            let inner = step_explicit_at(body, path)?;
            path.pop();
            if let Some(s) = inner {
                return Ok(Some(Step {
                    term: relet(s.term),
                    ..s
                }));
            }
            if !closed {
                return Ok(None);
            }
            if t1.free_vars().contains(x) {
                let term = Term::Let(p.clone(), Box::new(relet(t1.as_ref().clone())), t2.clone());
                Ok(Some(Step {
                    term,
                    rule: RuleName::EletPushArg,
                    path: path.clone(),
                }))
            } else if t2.free_vars().contains(x) {
                let term = Term::Let(p.clone(), t1.clone(), Box::new(relet(t2.as_ref().clone())));
                Ok(Some(Step {
                    term,
                    rule: RuleName::EletPushBody,
                    path: path.clone(),
                }))
            } else {
                Err(EvalError::Stuck(whole.clone()))
            }
        }
    }
}

/// The shortcut rule `let p = v in t -> let-chain(sigma, t)` where
/// `sigma[p] = v`; superfluous for evaluation but exposed for the agreement
/// check with the stepwise decomposition.
pub fn beta_let_e(p: &Pattern, v: &Value, body: &Term) -> Result<Term, EvalError> {
    let s = match_pattern(p, v)?;
    Ok(let_chain(&p.to_value(), &s, body.clone()))
}

/// Reduces with the structural let rules only (no beta rules); used to check
/// that a let chain reaches the substituted term.
pub fn elet_normal_form(t: &Term, fuel: u64) -> Result<Term, EvalError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        let mut path = Vec::new();
        match step_explicit_at(&cur, &mut path)? {
            Some(s) if s.rule.is_elet() => cur = s.term,
            _ => return Ok(cur),
        }
    }
    Ok(cur)
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub outcome: Outcome,
    pub steps: u64,
    pub trace: Option<Trace>,
}

/// Iterates the chosen step function until a value or fuel runs out.
pub fn eval(t: &Term, cfg: &EvalConfig) -> Result<EvalResult, EvalError> {
    let mut cur = t.clone();
    let mut trace = if cfg.trace {
        Some(Trace::default())
    } else {
        None
    };
    let mut steps = 0u64;
    while steps < cfg.fuel {
        let next = match cfg.system {
            System::Main => step(&cur)?,
            System::Explicit => step_explicit(&cur)?,
        };
        match next {
            None => {
                let v = cur.as_value().expect("normal form is a value");
                return Ok(EvalResult {
                    outcome: Outcome::Value(v),
                    steps,
                    trace,
                });
            }
            Some((t2, rule, path)) => {
                steps += 1;
                if let Some(tr) = trace.as_mut() {
                    tr.0.push(TraceEntry {
                        step: steps,
                        rule,
                        path,
                        before: cur.clone(),
                        after: t2.clone(),
                    });
                }
                cur = t2;
            }
        }
    }
    Ok(EvalResult {
        outcome: Outcome::FuelExhausted(cur),
        steps,
        trace,
    })
}

/// Convenience: evaluate and expect a value under the main system.
pub fn eval_to_value(t: &Term, fuel: u64) -> Result<Value, EvalError> {
    let cfg = EvalConfig {
        fuel,
        ..EvalConfig::default()
    };
    match eval(t, &cfg)?.outcome {
        Outcome::Value(v) => Ok(v),
        Outcome::FuelExhausted(t) => Err(EvalError::Stuck(t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_iso, parse_value};

    fn swap() -> Iso {
        parse_iso("{ (x, y) <-> (y, x) }").unwrap()
    }

    #[test]
    fn match_binds_variable() {
        let s = match_value(&Value::var("x"), &Value::injl(Value::Unit))
            .unwrap()
            .unwrap();
        assert_eq!(s.get("x"), Some(&Value::injl(Value::Unit)));
    }

    #[test]
    fn match_splits_pairs() {
        let p = Value::pair(Value::var("x"), Value::var("y"));
        let v = Value::pair(Value::Unit, Value::Unit);
        let s = match_value(&p, &v).unwrap().unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn match_clash_is_no_match() {
        assert_eq!(
            match_value(&Value::injl(Value::var("x")), &Value::injr(Value::Unit)).unwrap(),
            None
        );
    }

    #[test]
    fn match_rejects_nonlinear_pattern() {
        let p = Value::pair(Value::var("x"), Value::var("x"));
        let v = Value::pair(Value::Unit, Value::Unit);
        assert!(matches!(
            match_value(&p, &v),
            Err(EvalError::NonLinearPattern(_))
        ));
    }

    #[test]
    fn swap_steps_to_value() {
        let t = Term::app(swap(), Term::pair(Term::Unit, Term::injl(Term::Unit)));
        let (t2, rule, _) = step(&t).unwrap().unwrap();
        assert_eq!(rule, RuleName::IsoApp);
        assert_eq!(
            t2.as_value().unwrap(),
            parse_value("(injl (), ())").unwrap()
        );
    }

    #[test]
    fn value_evaluates_in_zero_steps() {
        let t = Term::pair(Term::Unit, Term::Unit);
        let r = eval(&t, &EvalConfig::default()).unwrap();
        assert_eq!(r.steps, 0);
        assert!(matches!(r.outcome, Outcome::Value(_)));
    }

    #[test]
    fn diverging_iso_exhausts_fuel() {
        // fix f. { x <-> let y = f x in y } applied to ()
        let iso = parse_iso("fix f. { x <-> let y = f x in y }").unwrap();
        let t = Term::app(iso, Term::Unit);
        let cfg = EvalConfig {
            fuel: 1000,
            ..Default::default()
        };
        let r = eval(&t, &cfg).unwrap();
        assert!(matches!(r.outcome, Outcome::FuelExhausted(_)));
    }

    #[test]
    fn explicit_let_var_rule() {
        // let x = v in x  ->  v
        let t = Term::let_in(Pattern::var("x"), Term::Unit, Term::var("x"));
        let (t2, rule, _) = step_explicit(&t).unwrap().unwrap();
        assert_eq!(rule, RuleName::EletVar);
        assert_eq!(t2, Term::Unit);
    }

    #[test]
    fn explicit_pair_split_rule() {
        // let (x, y) = (v1, v2) in t  ->  let x = v1 in let y = v2 in t
        let t = Term::let_in(
            Pattern::pair(Pattern::var("x"), Pattern::var("y")),
            Term::pair(Term::Unit, Term::injl(Term::Unit)),
            Term::pair(Term::var("y"), Term::var("x")),
        );
        let (t2, rule, _) = step_explicit(&t).unwrap().unwrap();
        assert_eq!(rule, RuleName::EletPairSplit);
        match t2 {
            Term::Let(Pattern::Var(x), _, body) => {
                assert_eq!(x, "x");
                assert!(matches!(*body, Term::Let(Pattern::Var(_), _, _)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_reaches_same_value_as_main() {
        let t = Term::app(swap(), Term::pair(Term::Unit, Term::injr(Term::Unit)));
        let main = eval_to_value(&t, 1000).unwrap();
        let cfg = EvalConfig {
            fuel: 1000,
            system: System::Explicit,
            ..Default::default()
        };
        match eval(&t, &cfg).unwrap().outcome {
            Outcome::Value(v) => assert_eq!(v, main),
            other => panic!("explicit system diverged: {other:?}"),
        }
    }

    #[test]
    fn let_chain_reaches_substitution() {
        // let-chain for sigma = {x -> (), y -> injl ()} over (y, x)
        let pattern = Value::pair(Value::var("x"), Value::var("y"));
        let sigma = match_value(&pattern, &parse_value("((), injl ())").unwrap())
            .unwrap()
            .unwrap();
        let body = Term::pair(Term::var("y"), Term::var("x"));
        let chained = let_chain(&pattern, &sigma, body.clone());
        let nf = elet_normal_form(&chained, 100).unwrap();
        assert_eq!(nf, body.subst(&sigma));
    }

    #[test]
    fn beta_let_e_agrees_with_decomposition() {
        let p = Pattern::pair(Pattern::var("a"), Pattern::var("b"));
        let v = parse_value("(injl (), fold (injr ()))").unwrap();
        let body = Term::pair(Term::var("b"), Term::var("a"));
        let via_shortcut = beta_let_e(&p, &v, &body).unwrap();
        let via_rules = {
            let t = Term::Let(
                p.clone(),
                Box::new(Term::from_value(&v)),
                Box::new(body.clone()),
            );
            elet_normal_form(&t, 100).unwrap()
        };
        assert_eq!(elet_normal_form(&via_shortcut, 100).unwrap(), via_rules);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let iso = parse_iso(
            "fix f. { fold (injl ()) <-> fold (injl ())
                    | fold (injr (h, t)) <-> let t' = f t in fold (injr (h, t')) }",
        )
        .unwrap();
        let annotated = crate::ast::Iso::annot(
            iso,
            IsoType::new(
                crate::ast::list_type(crate::ast::BaseType::Unit),
                crate::ast::list_type(crate::ast::BaseType::Unit),
            ),
        );
        let arg = parse_value("fold (injr ((), fold (injr ((), fold (injl ())))))").unwrap();
        let t = Term::app(annotated, Term::from_value(&arg));
        let cfg = EvalConfig {
            trace: true,
            system: System::Explicit,
            ..Default::default()
        };
        let a = eval(&t, &cfg).unwrap();
        let b = eval(&t, &cfg).unwrap();
        assert_eq!(a.steps, b.steps);
        let (ta, tb) = (a.trace.unwrap(), b.trace.unwrap());
        assert_eq!(ta.0.len(), tb.0.len());
        for (x, y) in ta.0.iter().zip(tb.0.iter()) {
            assert_eq!(x.rule, y.rule);
            assert_eq!(x.path, y.path);
            assert_eq!(x.after, y.after);
        }
    }

    #[test]
    fn trace_chains_terms() {
        let t = Term::app(swap(), Term::pair(Term::Unit, Term::injl(Term::Unit)));
        let cfg = EvalConfig {
            trace: true,
            ..Default::default()
        };
        let r = eval(&t, &cfg).unwrap();
        let tr = r.trace.unwrap();
        assert!(!tr.0.is_empty());
        for w in tr.0.windows(2) {
            assert_eq!(w[0].after, w[1].before);
        }
    }
}
