//! Single-step cut elimination mirroring the explicit-substitution system.
//!
//! A step fires at the cut matching the term redex: principal pairs
//! (one/bot, plus/with, mu/nu, tensor/par), the axiom case, commutation of a
//! parked binding under a right rule, cut re-association for applications,
//! cut permutation inside pattern-matching blocks, and back-edge unfolding
//! where the term side unfolds a `fix`. Every step preserves the conclusion
//! sequent, so rewriting is local.

use super::*;
use crate::ast::{Name, Term};
use crate::eval::{step_explicit, RuleName};
use std::collections::BTreeMap;

/// Address prefix substitution: occurrences under a remapped root are
/// re-rooted at the target address; every other atom is renamed fresh.
struct Remap<'g> {
    prefix: Vec<(Address, Address)>,
    fresh: BTreeMap<u32, u32>,
    gen: &'g mut AddrGen,
}

impl<'g> Remap<'g> {
    fn new(gen: &'g mut AddrGen) -> Remap<'g> {
        Remap {
            prefix: Vec::new(),
            fresh: BTreeMap::new(),
            gen,
        }
    }

    fn map_prefix(&mut self, from: Address, target: Address) {
        self.prefix.push((from, target));
    }

    fn addr(&mut self, a: &Address) -> Address {
        for (from, target) in &self.prefix {
            if a.atom == from.atom && a.negated == from.negated && a.path.starts_with(&from.path) {
                let mut path = target.path.clone();
                path.extend_from_slice(&a.path[from.path.len()..]);
                return Address {
                    atom: target.atom,
                    negated: target.negated,
                    path,
                };
            }
        }
        let atom = *self
            .fresh
            .entry(a.atom)
            .or_insert_with(|| self.gen.fresh().atom);
        Address {
            atom,
            negated: a.negated,
            path: a.path.clone(),
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        Formula {
            form: f.form.clone(),
            addr: self.addr(&f.addr),
        }
    }

    fn sequent(&mut self, s: &Sequent) -> Sequent {
        Sequent {
            upsilon: s.upsilon.iter().map(|f| self.formula(f)).collect(),
            theta: s
                .theta
                .iter()
                .map(|(x, f)| (x.clone(), self.formula(f)))
                .collect(),
            goal: self.formula(&s.goal),
            label: s.label.clone(),
        }
    }

    fn derivation(&mut self, d: &Derivation) -> Derivation {
        Derivation {
            rule: d.rule.clone(),
            conclusion: self.sequent(&d.conclusion),
            premises: d.premises.iter().map(|p| self.derivation(p)).collect(),
        }
    }
}

/// Re-roots a proof so its conclusion matches a back-edge conclusion;
/// internal cut atoms are freshened.
fn retarget(
    gen: &mut AddrGen,
    subtree: &Derivation,
    to: &Sequent,
) -> Result<Derivation, ProofError> {
    let from = &subtree.conclusion;
    if from.context().len() != to.context().len() {
        return Err(ProofError::CutElim(
            "back-edge context arity mismatch".into(),
        ));
    }
    let mut remap = Remap::new(gen);
    for (f, t) in from.context().iter().zip(to.context().iter()) {
        remap.map_prefix(f.addr.clone(), t.addr.clone());
    }
    remap.map_prefix(from.goal.addr.clone(), to.goal.addr.clone());
    let mut out = remap.derivation(subtree);
    out.conclusion.label = subtree.conclusion.label.clone();
    Ok(out)
}

/// Re-addresses the goal side of a proof (the axiom case `cut(pi, id)`).
fn readdress_goal(gen: &mut AddrGen, d: &Derivation, to: &Address) -> Derivation {
    let mut remap = Remap::new(gen);
    remap.map_prefix(d.conclusion.goal.addr.clone(), to.clone());
    // Context atoms stay as they are.
    fn keep_context_atoms(remap: &mut Remap, d: &Derivation) {
        for f in d.conclusion.context() {
            remap.fresh.entry(f.addr.atom).or_insert(f.addr.atom);
        }
        for p in &d.premises {
            keep_context_atoms(remap, p);
        }
    }
    keep_context_atoms(&mut remap, d);
    remap.derivation(d)
}

/// Replaces every back-edge named `label` with a retargeted copy of
/// `target`, stopping at shadowing labels.
fn splice_backedges(
    gen: &mut AddrGen,
    d: &Derivation,
    label: &str,
    target: &Derivation,
) -> Result<Derivation, ProofError> {
    if let Rule::Be(f) = &d.rule {
        if f == label {
            return retarget(gen, target, &d.conclusion);
        }
    }
    if d.conclusion.label.as_deref() == Some(label) {
        // A nested loop with the same name shadows the outer one.
        return Ok(d.clone());
    }
    let premises = d
        .premises
        .iter()
        .map(|p| splice_backedges(gen, p, label, target))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation {
        rule: d.rule.clone(),
        conclusion: d.conclusion.clone(),
        premises,
    })
}

/// One cut-elimination step; `None` when no redex exists.
///
/// The search mirrors the explicit evaluator's redex search exactly: reduce
/// the left premise first, then the rules keyed on the right premise's head,
/// then descend into a parked continuation, and only once that is inert push
/// the parked binding one cut inward.
pub fn cut_step(gen: &mut AddrGen, d: &Derivation) -> Result<Option<Derivation>, ProofError> {
    step_rec(gen, d)
}

fn step_rec(gen: &mut AddrGen, d: &Derivation) -> Result<Option<Derivation>, ProofError> {
    match &d.rule {
        Rule::Cut => {
            if let Some(p0) = step_rec(gen, &d.premises[0])? {
                let mut out = d.clone();
                out.premises[0] = p0;
                return Ok(Some(out));
            }
            if let Some(stepped) = immediate_case(gen, d)? {
                return Ok(Some(stepped));
            }
            // A parked binding (value image on the left): the action is
            // inside the continuation.
            if is_value_image(&d.premises[0]) && matches!(d.premises[1].rule, Rule::Cut) {
                if let Some(p1) = step_rec(gen, &d.premises[1])? {
                    let mut out = d.clone();
                    out.premises[1] = p1;
                    return Ok(Some(out));
                }
            }
            push_case(d)
        }
        Rule::Tensor | Rule::Plus1 | Rule::Plus2 | Rule::Mu => {
            for (i, p) in d.premises.iter().enumerate() {
                if let Some(stepped) = step_rec(gen, p)? {
                    let mut out = d.clone();
                    out.premises[i] = stepped;
                    return Ok(Some(out));
                }
            }
            Ok(None)
        }
        // Negative subtrees wait for a cut to select them.
        _ => Ok(None),
    }
}

/// The image of a value: right rules only, axioms included (they are the
/// images of variables).
fn is_value_image(d: &Derivation) -> bool {
    d.rule.is_right() && d.premises.iter().all(is_value_image)
}

/// The image of a closed value: as `is_value_image`, with no axioms.
fn is_closed_value_image(d: &Derivation) -> bool {
    matches!(
        d.rule,
        Rule::One | Rule::Tensor | Rule::Plus1 | Rule::Plus2 | Rule::Mu
    ) && d.premises.iter().all(is_closed_value_image)
}

fn immediate_case(gen: &mut AddrGen, d: &Derivation) -> Result<Option<Derivation>, ProofError> {
    let left = &d.premises[0];
    let right = &d.premises[1];
    let cut_formula = left.conclusion.goal.clone();
    // Every immediate rule needs a closed argument: an argument with axioms
    // in it still waits for its own bindings to percolate in.
    if !is_closed_value_image(left) {
        return Ok(None);
    }

    // Unfold a labelled loop root: the image of unfolding `fix`.
    if right.conclusion.label.is_some() {
        let label = right.conclusion.label.clone().unwrap();
        let target = right.clone();
        let premises = right
            .premises
            .iter()
            .map(|p| splice_backedges(gen, p, &label, &target))
            .collect::<Result<Vec<_>, _>>()?;
        let mut conclusion = right.conclusion.clone();
        conclusion.label = None;
        let unfolded = Derivation {
            rule: right.rule.clone(),
            conclusion,
            premises,
        };
        let mut out = d.clone();
        out.premises[1] = unfolded;
        return Ok(Some(out));
    }

    match &right.rule {
        Rule::Be(_) => Err(ProofError::CutElim(
            "cut against an unresolved back-edge outside its loop".into(),
        )),

        Rule::Id => {
            let ctx = right.conclusion.context();
            if ctx.len() == 1 && ctx[0].addr == cut_formula.addr {
                let target = right.conclusion.goal.addr.clone();
                Ok(Some(readdress_goal(gen, left, &target)))
            } else {
                Ok(None)
            }
        }

        rule if rule.is_left() => {
            let principal = right
                .conclusion
                .context()
                .first()
                .cloned()
                .cloned()
                .ok_or_else(|| ProofError::CutElim("left rule with empty context".into()))?;
            if principal.addr != cut_formula.addr {
                return Ok(None);
            }
            match (rule, &left.rule) {
                (Rule::Bot, Rule::One) => Ok(Some(right.premises[0].clone())),
                (Rule::Nu, Rule::Mu) => Ok(Some(Derivation::node(
                    Rule::Cut,
                    d.conclusion.clone(),
                    vec![left.premises[0].clone(), right.premises[0].clone()],
                ))),
                (Rule::With, Rule::Plus1) | (Rule::With, Rule::Plus2) => {
                    let branch = if left.rule == Rule::Plus1 { 0 } else { 1 };
                    Ok(Some(Derivation::node(
                        Rule::Cut,
                        d.conclusion.clone(),
                        vec![left.premises[0].clone(), right.premises[branch].clone()],
                    )))
                }
                (Rule::Par, Rule::Tensor) => {
                    // Split into two cuts; the first component's binding ends
                    // up outermost.
                    let pi1 = left.premises[0].clone();
                    let pi2 = left.premises[1].clone();
                    let cont = right.premises[0].clone();
                    let inner = Derivation::node(
                        Rule::Cut,
                        inner_cut_sequent(&pi2, &cont, &pi2.conclusion.goal.clone(), {
                            d.conclusion.goal.clone()
                        }),
                        vec![pi2, cont],
                    );
                    Ok(Some(Derivation::node(
                        Rule::Cut,
                        d.conclusion.clone(),
                        vec![pi1, inner],
                    )))
                }
                (other, l) => Err(ProofError::CutElim(format!(
                    "principal cut of {} against {} has no rule",
                    l.name(),
                    other.name()
                ))),
            }
        }

        // Commutation under the right rules: the parked binding enters the
        // premise that owns the cut formula.
        Rule::Plus1 | Rule::Plus2 | Rule::Mu => {
            let premise = &right.premises[0];
            if !context_has(premise, &cut_formula.addr) {
                return Ok(None);
            }
            let inner = Derivation::node(
                Rule::Cut,
                inner_cut_sequent(left, premise, &cut_formula, premise.conclusion.goal.clone()),
                vec![left.clone(), premise.clone()],
            );
            Ok(Some(Derivation::node(
                right.rule.clone(),
                d.conclusion.clone(),
                vec![inner],
            )))
        }
        Rule::Tensor => {
            let Some(idx) = right
                .premises
                .iter()
                .position(|p| context_has(p, &cut_formula.addr))
            else {
                return Ok(None);
            };
            let premise = &right.premises[idx];
            let inner = Derivation::node(
                Rule::Cut,
                inner_cut_sequent(left, premise, &cut_formula, premise.conclusion.goal.clone()),
                vec![left.clone(), premise.clone()],
            );
            let mut premises = right.premises.clone();
            premises[idx] = inner;
            Ok(Some(Derivation::node(
                Rule::Tensor,
                d.conclusion.clone(),
                premises,
            )))
        }
        _ => Ok(None),
    }
}

/// A parked binding pushes one cut inward once everything inside is inert:
/// into the argument of the inner cut when it owns the variable, or past it
/// into the continuation.
fn push_case(d: &Derivation) -> Result<Option<Derivation>, ProofError> {
    let left = &d.premises[0];
    let right = &d.premises[1];
    if !is_closed_value_image(left) || right.rule != Rule::Cut {
        return Ok(None);
    }
    let cut_formula = left.conclusion.goal.clone();
    let p0 = &right.premises[0];
    let p1 = &right.premises[1];
    if context_has(p0, &cut_formula.addr) {
        let inner = Derivation::node(
            Rule::Cut,
            inner_cut_sequent(left, p0, &cut_formula, p0.conclusion.goal.clone()),
            vec![left.clone(), p0.clone()],
        );
        Ok(Some(Derivation::node(
            Rule::Cut,
            d.conclusion.clone(),
            vec![inner, p1.clone()],
        )))
    } else if context_has(p1, &cut_formula.addr) {
        let inner = Derivation::node(
            Rule::Cut,
            inner_cut_sequent(left, p1, &cut_formula, p1.conclusion.goal.clone()),
            vec![left.clone(), p1.clone()],
        );
        Ok(Some(Derivation::node(
            Rule::Cut,
            d.conclusion.clone(),
            vec![right.premises[0].clone(), inner],
        )))
    } else {
        Ok(None)
    }
}

fn context_has(d: &Derivation, addr: &Address) -> bool {
    d.conclusion.context().iter().any(|f| &f.addr == addr)
}

/// The conclusion of a cut pushed onto `premise`: its context minus the cut
/// formula, plus the left context. Zone tags travel with the formulas.
fn inner_cut_sequent(
    left: &Derivation,
    premise: &Derivation,
    cut_formula: &Formula,
    goal: Formula,
) -> Sequent {
    let mut entries: Vec<(Option<Name>, Formula)> = left
        .conclusion
        .entries()
        .into_iter()
        .map(|(n, f)| (n.cloned(), f.clone()))
        .collect();
    for (n, f) in premise.conclusion.entries() {
        if f.addr != cut_formula.addr {
            entries.push((n.cloned(), f.clone()));
        }
    }
    Sequent::from_entries(entries, goal)
}

/// Runs cut elimination to a normal form, with a step bound.
pub fn normalize(
    gen: &mut AddrGen,
    d: &Derivation,
    max_steps: u64,
) -> Result<(Derivation, u64), ProofError> {
    let mut cur = d.clone();
    let mut steps = 0;
    while steps < max_steps {
        match cut_step(gen, &cur)? {
            Some(next) => {
                cur = next;
                steps += 1;
            }
            None => return Ok((cur, steps)),
        }
    }
    Ok((cur, steps))
}

/// A lockstep run of the explicit-substitution system against cut
/// elimination on the floored term image.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub term_steps: u64,
    pub proof_steps: u64,
    pub checkpoints: u64,
    pub final_term: Term,
    pub value_reached: bool,
}

/// Steps the term with the explicit system; after every term step, advances
/// cut elimination until the proof equals the image of the new term (modulo
/// address renaming). Structural let steps must take exactly one
/// cut-elimination step; unfolding a `fix` exactly one as well.
pub fn simulate(t: &Term, max_term_steps: u64) -> Result<SimulationReport, ProofError> {
    let ty = crate::typecheck::type_closed_term(t).map_err(|e| ProofError::Type(e.to_string()))?;
    simulate_at(t, &ty, max_term_steps)
}

/// As `simulate`, with the term's type supplied.
pub fn simulate_at(
    t: &Term,
    ty: &crate::ast::BaseType,
    max_term_steps: u64,
) -> Result<SimulationReport, ProofError> {
    let ty = ty.clone();
    let mut gen = AddrGen::new();
    let mut proof = super::translate::term_image_at(&mut gen, t, &ty)?;
    let mut term = t.clone();
    let mut term_steps = 0;
    let mut proof_steps = 0;
    let mut checkpoints = 0;

    while term_steps < max_term_steps {
        let next = step_explicit(&term).map_err(|e| ProofError::CutElim(e.to_string()))?;
        let Some((term2, rule, _)) = next else {
            break;
        };
        term = term2;
        term_steps += 1;
        let expected = super::translate::term_image_at(&mut AddrGen::new(), &term, &ty)?;
        let budget_per_checkpoint = 10_000u64;
        let mut used = 0;
        while !eq_mod_addresses(&proof, &expected) {
            if used >= budget_per_checkpoint {
                return Err(ProofError::CutElim(format!(
                    "proof diverged from the image of `{term}` after {used} steps"
                )));
            }
            match cut_step(&mut gen, &proof)? {
                Some(next) => {
                    proof = next;
                    used += 1;
                    proof_steps += 1;
                }
                None => {
                    return Err(ProofError::CutElim(format!(
                        "proof normalized before reaching the image of `{term}`"
                    )))
                }
            }
        }
        checkpoints += 1;
        // Structural let steps and fix unfolding map to exactly one cut
        // step. Clause selection is a block of steps (or none at all: a
        // single-variable clause has the same image applied and unapplied).
        let single_step_rules = rule.is_elet() || rule == RuleName::IsoRec;
        if single_step_rules && used != 1 {
            return Err(ProofError::CutElim(format!(
                "{} took {used} cut steps instead of one",
                rule.as_str()
            )));
        }
    }

    let value_reached = term.is_value();
    Ok(SimulationReport {
        term_steps,
        proof_steps,
        checkpoints,
        final_term: term,
        value_reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Iso, IsoType, Pattern, Term};
    use crate::parser::{parse_iso, parse_type, parse_value};

    fn swap_annotated() -> Iso {
        Iso::annot(
            parse_iso("{ (x, y) <-> (y, x) }").unwrap(),
            IsoType::new(
                parse_type("1 * (1 + 1)").unwrap(),
                parse_type("(1 + 1) * 1").unwrap(),
            ),
        )
    }

    #[test]
    fn axiom_cut_readdresses_the_value_proof() {
        // let x = v in x: one term step, one cut step.
        let t = Term::let_in(
            Pattern::var("x"),
            Term::from_value(&parse_value("injl ()").unwrap()),
            Term::var("x"),
        );
        let report = simulate_at(&t, &parse_type("1 + 1").unwrap(), 100).unwrap();
        assert!(report.value_reached);
        assert_eq!(report.term_steps, 1);
        assert_eq!(report.proof_steps, 1);
    }

    #[test]
    fn pattern_split_simulates_stepwise() {
        // let (a, b) = (v1, v2) in (b, a)
        let t = Term::let_in(
            Pattern::pair(Pattern::var("a"), Pattern::var("b")),
            Term::from_value(&parse_value("((), injr ())").unwrap()),
            Term::pair(Term::var("b"), Term::var("a")),
        );
        let report = simulate_at(&t, &parse_type("(1 + 1) * 1").unwrap(), 100).unwrap();
        assert!(report.value_reached);
        assert_eq!(
            report.final_term.as_value().unwrap(),
            parse_value("(injr (), ())").unwrap()
        );
    }

    #[test]
    fn swap_application_simulates_to_the_value_image() {
        let t = Term::app(
            swap_annotated(),
            Term::from_value(&parse_value("((), injl ())").unwrap()),
        );
        let report = simulate(&t, 100).unwrap();
        assert!(report.value_reached);
        assert_eq!(
            report.final_term.as_value().unwrap(),
            parse_value("(injl (), ())").unwrap()
        );
        assert!(report.proof_steps >= report.term_steps);
    }

    #[test]
    fn value_simulates_in_zero_steps() {
        let t = Term::from_value(&parse_value("(injl (), fold (injl ()))").unwrap());
        let ty = parse_type("(1 + 1) * (mu X. 1 + X)").unwrap();
        let report = simulate_at(&t, &ty, 100).unwrap();
        assert_eq!(report.term_steps, 0);
        assert_eq!(report.proof_steps, 0);
    }

    #[test]
    fn recursive_map_simulates_through_backedge_unfolding() {
        let map = Iso::annot(
            parse_iso(
                "fix f. { fold (injl ()) <-> fold (injl ())
                        | fold (injr (h, t)) <->
                            let h' = ({ (x, y) <-> (y, x) } :: 1 * (1 + 1) <-> (1 + 1) * 1) h in
                            let t' = f t in
                            fold (injr (h', t')) }",
            )
            .unwrap(),
            IsoType::new(
                crate::ast::list_type(parse_type("1 * (1 + 1)").unwrap()),
                crate::ast::list_type(parse_type("(1 + 1) * 1").unwrap()),
            ),
        );
        // One-element list [((), injl ())]
        let arg = parse_value("fold (injr (((), injl ()), fold (injl ())))").unwrap();
        let t = Term::app(map, Term::from_value(&arg));
        let report = simulate(&t, 1000).unwrap();
        assert!(report.value_reached);
        assert_eq!(
            report.final_term.as_value().unwrap(),
            parse_value("fold (injr ((injl (), ()), fold (injl ())))").unwrap()
        );
    }

    #[test]
    fn composed_inverse_reduces_to_the_identity_image() {
        // cut(cut(value, iso), inverse-iso) reduces to the value's own proof.
        let swap = swap_annotated();
        let inv = crate::invert::invert(&swap);
        let v = parse_value("((), injr ())").unwrap();
        let t = Term::app(inv, Term::app(swap, Term::from_value(&v)));
        let report = simulate(&t, 1000).unwrap();
        assert!(report.value_reached);
        assert_eq!(report.final_term.as_value().unwrap(), v);
    }
}
