//! Translation of well-typed isos and terms into circular derivations.
//!
//! An iso of type `A <-> B` translates in three phases. The iso phase walks
//! through `fix` binders remembering the last iso variable and labels the
//! clause root; an iso variable emits a back-edge. The negative phase
//! decomposes the input formula following the clause patterns (left rules
//! plus the exchange rule that moves a pattern variable into the
//! variable-tagged zone). The positive phase rebuilds each clause body with
//! the right rules, using one cut per `let` and per iso application.

use super::*;
use crate::ast::{BaseType, Iso, IsoType, Name, Pattern, Subst, Term, Value};
use crate::typecheck::{infer_term, IsoCtx, TermCtx};

/// The enclosing `fix` binder, for back-edges and recursive-call typing.
#[derive(Debug, Clone)]
struct LastFix {
    name: Name,
    ty: IsoType,
}

/// One clause being decomposed: the values still to split, aligned with the
/// upsilon zone, and the body to translate once the zone empties.
#[derive(Debug, Clone)]
struct NegElem {
    vals: Vec<Value>,
    body: Term,
}

pub struct Translator<'g> {
    gen: &'g mut AddrGen,
    rename_counter: usize,
}

impl<'g> Translator<'g> {
    pub fn new(gen: &'g mut AddrGen) -> Translator<'g> {
        Translator {
            gen,
            rename_counter: 0,
        }
    }

    fn fresh_common_name(&mut self) -> Name {
        self.rename_counter += 1;
        format!("v%{}", self.rename_counter)
    }

    /// Translates a checked iso into a circular derivation of
    /// `[A_alpha] ; {} |- B_beta`.
    pub fn circ(&mut self, iso: &Iso, ty: &IsoType) -> Result<Derivation, ProofError> {
        let lhs = Formula::of_type(&ty.lhs, self.gen.fresh());
        let rhs = Formula::of_type(&ty.rhs, self.gen.fresh());
        self.iso_phase(iso, None, true, lhs, rhs)
    }

    fn iso_phase(
        &mut self,
        iso: &Iso,
        last: Option<&LastFix>,
        label_here: bool,
        lhs: Formula,
        rhs: Formula,
    ) -> Result<Derivation, ProofError> {
        match iso {
            Iso::Annot(inner, _) => self.iso_phase(inner, last, label_here, lhs, rhs),
            Iso::Fix(f, body) => {
                let ty = IsoType::new(
                    lhs.form
                        .to_type()
                        .ok_or_else(|| ProofError::Type("non-positive lhs".into()))?,
                    rhs.form
                        .to_type()
                        .ok_or_else(|| ProofError::Type("non-positive rhs".into()))?,
                );
                let fixed = LastFix {
                    name: f.clone(),
                    ty,
                };
                self.iso_phase(body, Some(&fixed), true, lhs, rhs)
            }
            Iso::Var(f) => {
                match last {
                    Some(l) if &l.name == f => {}
                    _ => return Err(ProofError::DanglingBackEdge(f.clone())),
                }
                let seq = Sequent::new(vec![lhs], vec![], rhs);
                Ok(Derivation::leaf(Rule::Be(f.clone()), seq))
            }
            Iso::Clauses(clauses) => {
                let elems = clauses
                    .iter()
                    .map(|(v, e)| NegElem {
                        vals: vec![v.clone()],
                        body: e.to_term(),
                    })
                    .collect();
                let mut d = self.neg(vec![lhs], vec![], rhs, elems, last)?;
                if label_here {
                    if let Some(l) = last {
                        d.conclusion.label = Some(l.name.clone());
                    }
                }
                Ok(d)
            }
        }
    }

    /// The negative phase: decompose `upsilon` head-first, mirroring the
    /// clause patterns, which by the OD discipline all expose the same
    /// constructor at each position.
    fn neg(
        &mut self,
        upsilon: Vec<Formula>,
        theta: Vec<(Name, Formula)>,
        goal: Formula,
        mut elems: Vec<NegElem>,
        last: Option<&LastFix>,
    ) -> Result<Derivation, ProofError> {
        if upsilon.is_empty() {
            let [elem] = elems.as_slice() else {
                return Err(ProofError::Type(format!(
                    "negative phase ended with {} clauses alive",
                    elems.len()
                )));
            };
            if !elem.vals.is_empty() {
                return Err(ProofError::Type(
                    "values left over after the zone emptied".into(),
                ));
            }
            return self.pos(theta, goal, &elem.body, last);
        }
        let head = upsilon[0].clone();
        let seq = Sequent::new(upsilon.clone(), theta.clone(), goal.clone());
        let heads: Vec<&Value> = elems
            .iter()
            .map(|e| e.vals.first().expect("clause value for each zone formula"))
            .collect();

        if heads.iter().all(|v| matches!(v, Value::Unit)) {
            let rest_upsilon = upsilon[1..].to_vec();
            for e in &mut elems {
                e.vals.remove(0);
            }
            let premise = self.neg(rest_upsilon, theta, goal, elems, last)?;
            return Ok(Derivation::node(Rule::Bot, seq, vec![premise]));
        }

        if heads.iter().all(|v| matches!(v, Value::Var(_))) {
            // All clauses bind this position; unify the binder name, renaming
            // clause-locally when spellings differ.
            let names: Vec<Name> = heads
                .iter()
                .map(|v| match v {
                    Value::Var(x) => x.clone(),
                    _ => unreachable!(),
                })
                .collect();
            let common = if names.windows(2).all(|w| w[0] == w[1]) {
                names[0].clone()
            } else {
                let fresh = self.fresh_common_name();
                for (e, old) in elems.iter_mut().zip(&names) {
                    rename_elem(e, old, &fresh);
                }
                fresh
            };
            let rest_upsilon = upsilon[1..].to_vec();
            let mut new_theta = theta;
            new_theta.push((common.clone(), head));
            for e in &mut elems {
                e.vals.remove(0);
            }
            let premise = self.neg(rest_upsilon, new_theta, goal, elems, last)?;
            return Ok(Derivation::node(Rule::Ex(common), seq, vec![premise]));
        }

        if heads.iter().all(|v| matches!(v, Value::Fold(_))) {
            let unfolded = head
                .unfold_fix()
                .ok_or_else(|| ProofError::Type("fold pattern at a non-mu formula".into()))?;
            let mut rest_upsilon = vec![unfolded];
            rest_upsilon.extend_from_slice(&upsilon[1..]);
            for e in &mut elems {
                let v = e.vals.remove(0);
                let Value::Fold(inner) = v else {
                    unreachable!()
                };
                e.vals.insert(0, *inner);
            }
            let premise = self.neg(rest_upsilon, theta, goal, elems, last)?;
            return Ok(Derivation::node(Rule::Nu, seq, vec![premise]));
        }

        if heads.iter().all(|v| matches!(v, Value::Pair(..))) {
            let (l, r) = match (&head.form, head.child(Dir::L), head.child(Dir::R)) {
                (Form::Tensor(..), Some(l), Some(r)) => (l, r),
                _ => {
                    return Err(ProofError::Type(
                        "pair pattern at a non-tensor formula".into(),
                    ))
                }
            };
            let mut rest_upsilon = vec![l, r];
            rest_upsilon.extend_from_slice(&upsilon[1..]);
            for e in &mut elems {
                let v = e.vals.remove(0);
                let Value::Pair(a, b) = v else { unreachable!() };
                e.vals.insert(0, *b);
                e.vals.insert(0, *a);
            }
            let premise = self.neg(rest_upsilon, theta, goal, elems, last)?;
            return Ok(Derivation::node(Rule::Par, seq, vec![premise]));
        }

        if heads
            .iter()
            .all(|v| matches!(v, Value::InjL(_) | Value::InjR(_)))
        {
            let (l, r) = match (&head.form, head.child(Dir::L), head.child(Dir::R)) {
                (Form::Plus(..), Some(l), Some(r)) => (l, r),
                _ => {
                    return Err(ProofError::Type(
                        "injection pattern at a non-plus formula".into(),
                    ))
                }
            };
            let mut left_elems = Vec::new();
            let mut right_elems = Vec::new();
            for e in elems {
                let mut e = e;
                let v = e.vals.remove(0);
                match v {
                    Value::InjL(inner) => {
                        e.vals.insert(0, *inner);
                        left_elems.push(e);
                    }
                    Value::InjR(inner) => {
                        e.vals.insert(0, *inner);
                        right_elems.push(e);
                    }
                    _ => unreachable!(),
                }
            }
            if left_elems.is_empty() || right_elems.is_empty() {
                return Err(ProofError::Type(
                    "sum split with an empty side (non-exhaustive clauses)".into(),
                ));
            }
            let mut left_upsilon = vec![l];
            left_upsilon.extend_from_slice(&upsilon[1..]);
            let mut right_upsilon = vec![r];
            right_upsilon.extend_from_slice(&upsilon[1..]);
            let p1 = self.neg(left_upsilon, theta.clone(), goal.clone(), left_elems, last)?;
            let p2 = self.neg(right_upsilon, theta, goal, right_elems, last)?;
            return Ok(Derivation::node(Rule::With, seq, vec![p1, p2]));
        }

        Err(ProofError::MixedHeads(
            heads
                .iter()
                .map(|v| crate::parser::pretty_value(v))
                .collect(),
        ))
    }

    /// The positive phase: translate a term under a variable-tagged context.
    fn pos(
        &mut self,
        theta: Vec<(Name, Formula)>,
        goal: Formula,
        term: &Term,
        last: Option<&LastFix>,
    ) -> Result<Derivation, ProofError> {
        let seq = Sequent::new(vec![], theta.clone(), goal.clone());
        match term {
            Term::Unit => {
                if !theta.is_empty() {
                    return Err(ProofError::Type("unit under a nonempty context".into()));
                }
                if goal.form != Form::One {
                    return Err(ProofError::Type("unit against a non-one goal".into()));
                }
                Ok(Derivation::leaf(Rule::One, seq))
            }
            Term::Var(x) => match theta.as_slice() {
                [(y, f)] if y == x => {
                    if !f.same_form(&goal) {
                        return Err(ProofError::Type(format!(
                            "axiom on `{x}` between different formulas"
                        )));
                    }
                    Ok(Derivation::leaf(Rule::Id, seq))
                }
                _ => Err(ProofError::Type(format!(
                    "variable `{x}` does not own its context exactly"
                ))),
            },
            Term::InjL(t) => {
                let child = goal
                    .child(Dir::L)
                    .filter(|_| matches!(goal.form, Form::Plus(..)))
                    .ok_or_else(|| ProofError::Type("injl against a non-plus goal".into()))?;
                let premise = self.pos(theta, child, t, last)?;
                Ok(Derivation::node(Rule::Plus1, seq, vec![premise]))
            }
            Term::InjR(t) => {
                let child = goal
                    .child(Dir::R)
                    .filter(|_| matches!(goal.form, Form::Plus(..)))
                    .ok_or_else(|| ProofError::Type("injr against a non-plus goal".into()))?;
                let premise = self.pos(theta, child, t, last)?;
                Ok(Derivation::node(Rule::Plus2, seq, vec![premise]))
            }
            Term::Fold(t) => {
                let unfolded = goal
                    .unfold_fix()
                    .ok_or_else(|| ProofError::Type("fold against a non-mu goal".into()))?;
                let premise = self.pos(theta, unfolded, t, last)?;
                Ok(Derivation::node(Rule::Mu, seq, vec![premise]))
            }
            Term::Pair(t1, t2) => {
                let (l, r) = match (&goal.form, goal.child(Dir::L), goal.child(Dir::R)) {
                    (Form::Tensor(..), Some(l), Some(r)) => (l, r),
                    _ => return Err(ProofError::Type("pair against a non-tensor goal".into())),
                };
                let (theta1, theta2) = split_theta(theta, t1);
                let p1 = self.pos(theta1, l, t1, last)?;
                let p2 = self.pos(theta2, r, t2, last)?;
                Ok(Derivation::node(Rule::Tensor, seq, vec![p1, p2]))
            }
            Term::App(iso, arg) => {
                let ty = self.iso_type_of(iso, last)?;
                let cut_formula = Formula::of_type(&ty.lhs, self.gen.fresh());
                let p1 = self.pos(theta, cut_formula.clone(), arg, last)?;
                let p2 = self.iso_phase(iso, last, false, cut_formula, goal)?;
                Ok(Derivation::node(Rule::Cut, seq, vec![p1, p2]))
            }
            Term::Let(p, t1, t2) => {
                let goal_ty = goal
                    .form
                    .to_type()
                    .ok_or_else(|| ProofError::Type("goal is not a type image".into()))?;
                let rhs_ty = self.let_rhs_type(&theta, p, t1, t2, &goal_ty, last)?;
                let cut_formula = Formula::of_type(&rhs_ty, self.gen.fresh());
                let (theta1, theta2) = split_theta(theta, t1);
                let p1 = self.pos(theta1, cut_formula.clone(), t1, last)?;
                let elem = NegElem {
                    vals: vec![p.to_value()],
                    body: t2.as_ref().clone(),
                };
                let p2 = self.neg(vec![cut_formula], theta2, goal.clone(), vec![elem], last)?;
                Ok(Derivation::node(Rule::Cut, seq, vec![p1, p2]))
            }
        }
    }

    fn iso_type_of(&self, iso: &Iso, last: Option<&LastFix>) -> Result<IsoType, ProofError> {
        match iso {
            Iso::Annot(_, ty) => Ok(ty.clone()),
            Iso::Var(f) => match last {
                Some(l) if &l.name == f => Ok(l.ty.clone()),
                _ => Err(ProofError::DanglingBackEdge(f.clone())),
            },
            Iso::Clauses(_) | Iso::Fix(..) => Err(ProofError::AnnotationRequired),
        }
    }

    fn infer(
        &self,
        theta: &[(Name, Formula)],
        t: &Term,
        last: Option<&LastFix>,
    ) -> Result<BaseType, ProofError> {
        let mut ctx = TermCtx::new();
        for (x, f) in theta {
            let ty = f
                .form
                .to_type()
                .ok_or_else(|| ProofError::Type("context formula is not a type image".into()))?;
            ctx.bind(x.clone(), ty)
                .map_err(|e| ProofError::Type(e.to_string()))?;
        }
        let isoctx = match last {
            Some(l) => IsoCtx::single(l.name.clone(), l.ty.clone()),
            None => IsoCtx::empty(),
        };
        infer_term(&mut ctx, &isoctx, t).map_err(|e| ProofError::Type(e.to_string()))
    }

    /// The type of a let right-hand side. Applications carry annotations;
    /// a bound value's type is read off the unique use sites of the pattern
    /// variables in the body, which linearity pins down.
    fn let_rhs_type(
        &self,
        theta: &[(Name, Formula)],
        p: &Pattern,
        t1: &Term,
        t2: &Term,
        goal_ty: &BaseType,
        last: Option<&LastFix>,
    ) -> Result<BaseType, ProofError> {
        if let Ok(ty) = self.infer(theta, t1, last) {
            return Ok(ty);
        }
        let isoctx = match last {
            Some(l) => IsoCtx::single(l.name.clone(), l.ty.clone()),
            None => IsoCtx::empty(),
        };
        crate::typecheck::let_rhs_type(&isoctx, p, t2, goal_ty)
            .map_err(|e| ProofError::Type(e.to_string()))
    }
}

type Theta = Vec<(Name, Formula)>;

/// Splits the tagged context by membership in the free variables of `t`.
fn split_theta(theta: Theta, t: &Term) -> (Theta, Theta) {
    let free = t.free_vars();
    theta.into_iter().partition(|(x, _)| free.contains(x))
}

/// Rebuilds the per-branch value of a (pre-floor) negative phase from the
/// rules applied: every branch determines exactly one clause pattern, up to
/// the renaming the translation performs on shared binder positions.
pub fn branch_values(d: &Derivation) -> Vec<Value> {
    enum Ctx {
        InjL,
        InjR,
        Fold,
        PairOpen,
        Done(Value),
    }
    fn build(spine: &[Ctx], i: &mut usize) -> Value {
        let ctx = &spine[*i];
        *i += 1;
        match ctx {
            Ctx::Done(v) => v.clone(),
            Ctx::InjL => Value::injl(build(spine, i)),
            Ctx::InjR => Value::injr(build(spine, i)),
            Ctx::Fold => Value::fold(build(spine, i)),
            Ctx::PairOpen => {
                let a = build(spine, i);
                let b = build(spine, i);
                Value::pair(a, b)
            }
        }
    }
    fn walk(d: &Derivation, spine: &mut Vec<Ctx>, out: &mut Vec<Value>) {
        match &d.rule {
            Rule::With => {
                spine.push(Ctx::InjL);
                walk(&d.premises[0], spine, out);
                spine.pop();
                spine.push(Ctx::InjR);
                walk(&d.premises[1], spine, out);
                spine.pop();
            }
            Rule::Nu => {
                spine.push(Ctx::Fold);
                walk(&d.premises[0], spine, out);
                spine.pop();
            }
            Rule::Par => {
                spine.push(Ctx::PairOpen);
                walk(&d.premises[0], spine, out);
                spine.pop();
            }
            Rule::Bot => {
                spine.push(Ctx::Done(Value::Unit));
                walk(&d.premises[0], spine, out);
                spine.pop();
            }
            Rule::Ex(x) => {
                spine.push(Ctx::Done(Value::var(x.clone())));
                walk(&d.premises[0], spine, out);
                spine.pop();
            }
            _ => {
                let mut i = 0;
                out.push(build(spine, &mut i));
                assert_eq!(i, spine.len(), "branch spine not fully consumed");
            }
        }
    }
    let mut out = Vec::new();
    walk(d, &mut Vec::new(), &mut out);
    out
}

/// Renames the clause-local binder `old` to `fresh` in the remaining values
/// and the body, respecting shadowing let binders in the body.
fn rename_elem(e: &mut NegElem, old: &Name, fresh: &Name) {
    let s = Subst::singleton(old.clone(), Value::var(fresh.clone()));
    for v in &mut e.vals {
        *v = v.subst(&s);
    }
    e.body = rename_term(&e.body, old, fresh);
}

fn rename_term(t: &Term, old: &Name, fresh: &Name) -> Term {
    match t {
        Term::Unit => Term::Unit,
        Term::Var(x) => {
            if x == old {
                Term::var(fresh.clone())
            } else {
                t.clone()
            }
        }
        Term::InjL(u) => Term::injl(rename_term(u, old, fresh)),
        Term::InjR(u) => Term::injr(rename_term(u, old, fresh)),
        Term::Fold(u) => Term::fold(rename_term(u, old, fresh)),
        Term::Pair(a, b) => Term::pair(rename_term(a, old, fresh), rename_term(b, old, fresh)),
        Term::App(iso, u) => Term::App(iso.clone(), Box::new(rename_term(u, old, fresh))),
        Term::Let(p, t1, t2) => {
            let t1 = rename_term(t1, old, fresh);
            if p.vars().contains(&old) {
                Term::Let(p.clone(), Box::new(t1), t2.clone())
            } else {
                Term::Let(
                    p.clone(),
                    Box::new(t1),
                    Box::new(rename_term(t2, old, fresh)),
                )
            }
        }
    }
}

/// Removes exchange rules. The zone split is kept internally (the variable
/// names identify context formulas across rewrites); exports flatten the
/// zones into one context.
pub fn floor(d: &Derivation) -> Derivation {
    if let Rule::Ex(_) = &d.rule {
        let mut inner = floor(&d.premises[0]);
        if d.conclusion.label.is_some() {
            inner.conclusion.label = d.conclusion.label.clone();
        }
        return inner;
    }
    Derivation {
        rule: d.rule.clone(),
        conclusion: d.conclusion.clone(),
        premises: d.premises.iter().map(floor).collect(),
    }
}

/// Translates a closed iso and floors the result.
pub fn circ_floored(gen: &mut AddrGen, iso: &Iso, ty: &IsoType) -> Result<Derivation, ProofError> {
    let raw = Translator::new(gen).circ(iso, ty)?;
    Ok(floor(&raw))
}

/// The floored positive-phase image of a closed term against a fresh goal.
pub fn term_image(gen: &mut AddrGen, t: &Term) -> Result<Derivation, ProofError> {
    let ty = crate::typecheck::type_closed_term(t).map_err(|e| ProofError::Type(e.to_string()))?;
    term_image_at(gen, t, &ty)
}

/// As `term_image` with the goal type supplied.
pub fn term_image_at(gen: &mut AddrGen, t: &Term, ty: &BaseType) -> Result<Derivation, ProofError> {
    let goal = Formula::of_type(ty, gen.fresh());
    let mut tr = Translator::new(gen);
    let raw = tr.pos(Vec::new(), goal, t, None)?;
    Ok(floor(&raw))
}

/// The translation of a value under the empty context is purely positive.
pub fn value_image(gen: &mut AddrGen, v: &Value, ty: &BaseType) -> Result<Derivation, ProofError> {
    term_image_at(gen, &Term::from_value(v), ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_iso, parse_type};

    fn swap_ty() -> IsoType {
        IsoType::new(
            parse_type("1 * (1 + 1)").unwrap(),
            parse_type("(1 + 1) * 1").unwrap(),
        )
    }

    fn swap_iso() -> Iso {
        parse_iso("{ (x, y) <-> (y, x) }").unwrap()
    }

    #[test]
    fn swap_translation_matches_printed_proof() {
        // par over tensor over two axioms, plus the two exchange rules that
        // flooring removes.
        let mut gen = AddrGen::new();
        let raw = Translator::new(&mut gen)
            .circ(&swap_iso(), &swap_ty())
            .unwrap();
        assert_eq!(raw.skeleton(), "par(ex(ex(tensor(id,id))))");
        check_well_formed(&raw).unwrap();
        let floored = floor(&raw);
        assert_eq!(floored.skeleton(), "par(tensor(id,id))");
        check_well_formed(&floored).unwrap();
        assert_eq!(floor(&floored), floored, "flooring is idempotent");
    }

    #[test]
    fn iso1_translation_matches_printed_proof() {
        let iso = parse_iso(
            "{ injl a <-> injr (injl a) | injr (injl b) <-> injr (injr b) | injr (injr c) <-> injl c }",
        )
        .unwrap();
        let ty = IsoType::new(
            parse_type("1 + ((1 + 1) + 1)").unwrap(),
            parse_type("1 + (1 + (1 + 1))").unwrap(),
        );
        let mut gen = AddrGen::new();
        let floored = circ_floored(&mut gen, &iso, &ty).unwrap();
        assert_eq!(
            floored.skeleton(),
            "with(plus2(plus1(id)),with(plus2(plus2(id)),plus1(id)))"
        );
        check_well_formed(&floored).unwrap();
    }

    #[test]
    fn map_translation_has_backedged_cut() {
        let map = parse_iso(
            "fix f. { fold (injl ()) <-> fold (injl ())
                    | fold (injr (h, t)) <->
                        let h' = ({ (x, y) <-> (y, x) } :: 1 * (1 + 1) <-> (1 + 1) * 1) h in
                        let t' = f t in
                        fold (injr (h', t')) }",
        )
        .unwrap();
        let elem_in = parse_type("1 * (1 + 1)").unwrap();
        let elem_out = parse_type("(1 + 1) * 1").unwrap();
        let ty = IsoType::new(
            crate::ast::list_type(elem_in),
            crate::ast::list_type(elem_out),
        );
        let mut gen = AddrGen::new();
        let raw = Translator::new(&mut gen).circ(&map, &ty).unwrap();
        check_well_formed(&raw).unwrap();
        check_unique_labels(&raw).unwrap();
        let floored = floor(&raw);
        check_well_formed(&floored).unwrap();
        check_unique_labels(&floored).unwrap();
        check_bouncing_cuts(&floored).unwrap();
        assert!(floored.conclusion.label.is_some());
        assert!(floored.contains_be());
        // The whole derivation: nu unfolds the list, with splits nil/cons;
        // the nil branch closes with the empty-list proof, the cons branch
        // cuts the element through the inner proof and the tail through the
        // back-edge before rebuilding the cell.
        assert_eq!(
            floored.skeleton(),
            "nu(with(bot(mu(plus1(one))),\
             par(cut(cut(id,par(tensor(id,id))),\
             cut(cut(id,be),mu(plus2(tensor(id,id))))))))"
                .replace(['\\', ' '], "")
        );
    }

    #[test]
    fn cantor_pairing_translates_despite_failing_the_checker() {
        // The pairing is not structurally recursive, so the checker rejects
        // it; its derivation still exists and is well-formed, with the
        // back-edge buried inside the second nested iso. Validity cannot be
        // established without a recursion witness.
        let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/cantor.iso");
        let text = std::fs::read_to_string(path).unwrap();
        let file = crate::parser::parse(&text).unwrap();
        let d = file.def("cantor").unwrap();
        let mut gen = AddrGen::new();
        let floored =
            circ_floored(&mut gen, &Iso::annot(d.iso.clone(), d.ty.clone()), &d.ty).unwrap();
        check_well_formed(&floored).unwrap();
        check_unique_labels(&floored).unwrap();
        check_bouncing_cuts(&floored).unwrap();
        assert!(floored.contains_be());
        let serialized = super::super::json::derivation_to_json(&floored);
        assert!(serialized.contains("\"target\": \"g\""));
        match super::super::validity::check_validity(&floored, &[]) {
            super::super::validity::Validity::Invalid(reason) => {
                assert!(reason.contains("witness"), "{reason}");
            }
            other => panic!("expected no-witness invalidity, got {other:?}"),
        }
    }

    #[test]
    fn value_images_are_purely_positive() {
        let mut gen = AddrGen::new();
        let ty = crate::ast::nat_type();
        for v in crate::typecheck::enumerate_values(&ty, 4, 50) {
            let d = value_image(&mut gen, &v, &ty).unwrap();
            assert!(d.is_purely_positive(), "value {v} gave impure image");
            check_well_formed(&d).unwrap();
        }
    }

    #[test]
    fn swap_image_contains_no_with() {
        let mut gen = AddrGen::new();
        let d = circ_floored(&mut gen, &swap_iso(), &swap_ty()).unwrap();
        assert!(!d.is_purely_positive(), "par rule is negative");
    }

    #[test]
    fn negative_phase_branch_values_reconstruct_clauses() {
        // Walking each branch of the negative phase reconstructs exactly one
        // clause pattern, with the branch's tagged formulas aligned to the
        // pattern variables.
        let iso = parse_iso(
            "{ injl a <-> injr (injl a) | injr (injl b) <-> injr (injr b) | injr (injr c) <-> injl c }",
        )
        .unwrap();
        let ty = IsoType::new(
            parse_type("1 + ((1 + 1) + 1)").unwrap(),
            parse_type("1 + (1 + (1 + 1))").unwrap(),
        );
        let mut gen = AddrGen::new();
        let raw = Translator::new(&mut gen).circ(&iso, &ty).unwrap();
        let patterns: Vec<Value> = match iso.skeleton() {
            Iso::Clauses(cs) => cs.iter().map(|(v, _)| v.clone()).collect(),
            _ => unreachable!(),
        };
        assert_eq!(branch_values(&raw), patterns);
    }
}
