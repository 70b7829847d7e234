//! Shared fixtures: the iso corpus and seeded value generation.

use rand::Rng;
use revisos::ast::*;
use revisos::parser::{parse, SourceFile};
use revisos::rpp::{self, RppFun};
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> SourceFile {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse(&text).expect("fixture parses")
}

/// A named, annotated, well-typed iso.
pub struct CorpusIso {
    pub name: String,
    pub iso: Iso,
    pub ty: IsoType,
}

fn def_to_corpus(file: &SourceFile, def: &str) -> CorpusIso {
    let d = file.def(def).expect("definition present");
    CorpusIso {
        name: d.name.clone(),
        iso: Iso::annot(d.iso.clone(), d.ty.clone()),
        ty: d.ty.clone(),
    }
}

fn compiled(name: &str, f: RppFun) -> CorpusIso {
    let iso = rpp::compile(&f).expect("compiles");
    let ty = iso.annotation().expect("annotated").clone();
    CorpusIso {
        name: name.to_string(),
        iso,
        ty,
    }
}

/// The fixture corpus: the file-based isos plus compiled RPP primitives and
/// iterator/selection composites.
pub fn corpus() -> Vec<CorpusIso> {
    let mut out = Vec::new();
    out.push(def_to_corpus(&load_fixture("iso1.iso"), "rotate"));
    out.push(def_to_corpus(&load_fixture("swap.iso"), "swap"));
    out.push(def_to_corpus(&load_fixture("map_swap.iso"), "map_swap"));
    out.push(compiled("rpp_s", RppFun::S));
    out.push(compiled("rpp_p", RppFun::P));
    out.push(compiled("rpp_id", RppFun::Id));
    out.push(compiled("rpp_sign", RppFun::Sign));
    out.push(compiled("rpp_swap", RppFun::Swap));
    out.push(compiled("rpp_it_s", RppFun::it(RppFun::S)));
    out.push(compiled(
        "rpp_if",
        RppFun::select(RppFun::S, RppFun::Id, RppFun::P),
    ));
    out.push(compiled(
        "rpp_it_seq",
        RppFun::it(RppFun::seq(RppFun::S, RppFun::Sign)),
    ));
    out
}

/// A random closed value of a type; recursion depth shrinks toward the left
/// branch so generation terminates on the corpus types.
pub fn random_value<R: Rng>(rng: &mut R, ty: &BaseType, depth: usize) -> Value {
    match ty {
        BaseType::Unit => Value::Unit,
        BaseType::Sum(a, b) => {
            if depth == 0 || rng.gen_bool(0.5) {
                Value::injl(random_value(rng, a, depth))
            } else {
                Value::injr(random_value(rng, b, depth.saturating_sub(1)))
            }
        }
        BaseType::Prod(a, b) => {
            Value::pair(random_value(rng, a, depth), random_value(rng, b, depth))
        }
        BaseType::Mu(..) => {
            let unfolded = ty.unfold().expect("mu unfolds");
            Value::fold(random_value(rng, &unfolded, depth.saturating_sub(1)))
        }
        BaseType::Var(_) => panic!("open type in corpus"),
    }
}
