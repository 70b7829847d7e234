//! Proof serialization: a fixed JSON schema with deterministic field order,
//! suitable for golden-file comparison.
//!
//! ```text
//! derivation: {"rule": "...", ("var"|"target": ...)?, "sequent": ..., "premises": [...]}
//! sequent:    {"upsilon": [...], "theta": [{"var": ..., "formula": ...}], "goal": ..., ("label": ...)?}
//! formula:    {"shape": "...", "addr": "a3:lir", ...children}
//! ```

use super::{Derivation, Form, Formula, Rule, Sequent};
use serde::Serialize;

#[derive(Serialize)]
struct FormulaDto {
    shape: &'static str,
    addr: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<Box<FormulaDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<Box<FormulaDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<Box<FormulaDto>>,
}

#[derive(Serialize)]
struct ThetaEntryDto {
    var: String,
    formula: FormulaDto,
}

#[derive(Serialize)]
struct SequentDto {
    upsilon: Vec<FormulaDto>,
    theta: Vec<ThetaEntryDto>,
    goal: FormulaDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize)]
struct DerivationDto {
    rule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    sequent: SequentDto,
    premises: Vec<DerivationDto>,
}

fn formula_dto(f: &Formula) -> FormulaDto {
    fn go(form: &Form, f: &Formula) -> FormulaDto {
        let addr = f.addr.render();
        let mut dto = FormulaDto {
            shape: "",
            addr,
            name: None,
            var: None,
            left: None,
            right: None,
            body: None,
        };
        match form {
            Form::One => dto.shape = "one",
            Form::Zero => dto.shape = "zero",
            Form::Top => dto.shape = "top",
            Form::Bot => dto.shape = "bot",
            Form::Atom(x) => {
                dto.shape = "atom";
                dto.name = Some(x.clone());
            }
            Form::Tensor(..) | Form::Par(..) | Form::Plus(..) | Form::With(..) => {
                dto.shape = match form {
                    Form::Tensor(..) => "tensor",
                    Form::Par(..) => "par",
                    Form::Plus(..) => "plus",
                    _ => "with",
                };
                let l = f.child(super::Dir::L).expect("binary child");
                let r = f.child(super::Dir::R).expect("binary child");
                dto.left = Some(Box::new(formula_dto(&l)));
                dto.right = Some(Box::new(formula_dto(&r)));
            }
            Form::Mu(x, body) | Form::Nu(x, body) => {
                dto.shape = if matches!(form, Form::Mu(..)) {
                    "mu"
                } else {
                    "nu"
                };
                dto.var = Some(x.clone());
                let inner = Formula {
                    form: body.as_ref().clone(),
                    addr: f.addr.child(super::Dir::I),
                };
                dto.body = Some(Box::new(formula_dto(&inner)));
            }
        }
        dto
    }
    go(&f.form, f)
}

fn sequent_dto(s: &Sequent) -> SequentDto {
    SequentDto {
        upsilon: s.upsilon.iter().map(formula_dto).collect(),
        theta: s
            .theta
            .iter()
            .map(|(x, f)| ThetaEntryDto {
                var: x.clone(),
                formula: formula_dto(f),
            })
            .collect(),
        goal: formula_dto(&s.goal),
        label: s.label.clone(),
    }
}

fn derivation_dto(d: &Derivation) -> DerivationDto {
    let (var, target) = match &d.rule {
        Rule::Ex(x) => (Some(x.clone()), None),
        Rule::Be(f) => (None, Some(f.clone())),
        _ => (None, None),
    };
    DerivationDto {
        rule: d.rule.name(),
        var,
        target,
        sequent: sequent_dto(&d.conclusion),
        premises: d.premises.iter().map(derivation_dto).collect(),
    }
}

/// Pretty JSON for a derivation, with stable field order.
pub fn derivation_to_json(d: &Derivation) -> String {
    serde_json::to_string_pretty(&derivation_dto(d)).expect("serialization cannot fail")
}

/// Plain text rendering of a formula shape.
pub fn render_form(f: &Form) -> String {
    match f {
        Form::One => "1".into(),
        Form::Zero => "0".into(),
        Form::Top => "T".into(),
        Form::Bot => "_|_".into(),
        Form::Atom(x) => x.clone(),
        Form::Tensor(a, b) => format!("({} * {})", render_form(a), render_form(b)),
        Form::Par(a, b) => format!("({} par {})", render_form(a), render_form(b)),
        Form::Plus(a, b) => format!("({} + {})", render_form(a), render_form(b)),
        Form::With(a, b) => format!("({} & {})", render_form(a), render_form(b)),
        Form::Mu(x, body) => format!("mu {x}. {}", render_form(body)),
        Form::Nu(x, body) => format!("nu {x}. {}", render_form(body)),
    }
}
