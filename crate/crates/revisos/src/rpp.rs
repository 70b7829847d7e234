//! Recursive Primitive Permutations: the reference semantics over integer
//! tuples (the oracle), structural inversion, and the compiler into the iso
//! language over `Z = 1 + (npos + npos)`.

use crate::ast::*;
use crate::invert::invert;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

/// RPP expression trees. `Perm` carries a permutation `gamma` of `1..=k`
/// acting as `y_i = x_{gamma(i)}`; `Weaken` runs the inner function on the
/// first wires and passes the remaining `extra` wires through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RppFun {
    S,
    P,
    Id,
    Sign,
    Swap,
    Seq(Box<RppFun>, Box<RppFun>),
    Par(Box<RppFun>, Box<RppFun>),
    It(Box<RppFun>),
    If(Box<RppFun>, Box<RppFun>, Box<RppFun>),
    Perm(Vec<usize>),
    Weaken(Box<RppFun>, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RppError {
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("`{0}` is not a permutation of 1..={1}")]
    BadPermutation(String, usize),
    #[error("iteration count {0} exceeds the evaluator bound")]
    IterationTooLarge(BigInt),
    #[error("malformed integer encoding: {0}")]
    BadEncoding(Value),
    #[error("parse error: {0}")]
    Parse(String),
}

impl RppFun {
    pub fn seq(f: RppFun, g: RppFun) -> RppFun {
        RppFun::Seq(Box::new(f), Box::new(g))
    }

    pub fn par(f: RppFun, g: RppFun) -> RppFun {
        RppFun::Par(Box::new(f), Box::new(g))
    }

    pub fn it(f: RppFun) -> RppFun {
        RppFun::It(Box::new(f))
    }

    pub fn select(f: RppFun, g: RppFun, h: RppFun) -> RppFun {
        RppFun::If(Box::new(f), Box::new(g), Box::new(h))
    }

    pub fn weaken(f: RppFun, extra: usize) -> RppFun {
        RppFun::Weaken(Box::new(f), extra)
    }

    /// Wire count, validating the arity side conditions.
    pub fn arity(&self) -> Result<usize, RppError> {
        match self {
            RppFun::S | RppFun::P | RppFun::Id | RppFun::Sign => Ok(1),
            RppFun::Swap => Ok(2),
            RppFun::Seq(f, g) => {
                let (a, b) = (f.arity()?, g.arity()?);
                if a != b {
                    return Err(RppError::Arity(format!(
                        "sequential composition of arities {a} and {b}"
                    )));
                }
                Ok(a)
            }
            RppFun::Par(f, g) => Ok(f.arity()? + g.arity()?),
            RppFun::It(f) => Ok(f.arity()? + 1),
            RppFun::If(f, g, h) => {
                let (a, b, c) = (f.arity()?, g.arity()?, h.arity()?);
                if a != b || b != c {
                    return Err(RppError::Arity(format!(
                        "selection branches of arities {a}, {b}, {c}"
                    )));
                }
                Ok(a + 1)
            }
            RppFun::Perm(gamma) => {
                let k = gamma.len();
                let mut seen = vec![false; k];
                for &i in gamma {
                    if i == 0 || i > k || seen[i - 1] {
                        return Err(RppError::BadPermutation(format!("{gamma:?}"), k));
                    }
                    seen[i - 1] = true;
                }
                Ok(k)
            }
            RppFun::Weaken(f, extra) => {
                if *extra == 0 {
                    return Err(RppError::Arity(
                        "weakening must add at least one wire".into(),
                    ));
                }
                Ok(f.arity()? + extra)
            }
        }
    }
}

const MAX_ITERATIONS: u64 = 10_000_000;

/// The reference semantics on integer tuples.
pub fn rpp_eval(f: &RppFun, xs: &[BigInt]) -> Result<Vec<BigInt>, RppError> {
    let k = f.arity()?;
    if xs.len() != k {
        return Err(RppError::Arity(format!(
            "expected {k} arguments, got {}",
            xs.len()
        )));
    }
    match f {
        RppFun::S => Ok(vec![&xs[0] + 1]),
        RppFun::P => Ok(vec![&xs[0] - 1]),
        RppFun::Sign => Ok(vec![-&xs[0]]),
        RppFun::Id => Ok(xs.to_vec()),
        RppFun::Swap => Ok(vec![xs[1].clone(), xs[0].clone()]),
        RppFun::Seq(f, g) => rpp_eval(g, &rpp_eval(f, xs)?),
        RppFun::Par(f, g) => {
            let j = f.arity()?;
            let mut out = rpp_eval(f, &xs[..j])?;
            out.extend(rpp_eval(g, &xs[j..])?);
            Ok(out)
        }
        RppFun::It(f) => {
            let last = xs[k - 1].clone();
            let n: u64 = last
                .abs()
                .try_into()
                .map_err(|_| RppError::IterationTooLarge(last.clone()))?;
            if n > MAX_ITERATIONS {
                return Err(RppError::IterationTooLarge(last));
            }
            let mut front = xs[..k - 1].to_vec();
            for _ in 0..n {
                front = rpp_eval(f, &front)?;
            }
            front.push(last);
            Ok(front)
        }
        RppFun::If(f, g, h) => {
            let last = xs[k - 1].clone();
            let branch = if last.is_positive() {
                f
            } else if last.is_zero() {
                g
            } else {
                h
            };
            let mut out = rpp_eval(branch, &xs[..k - 1])?;
            out.push(last);
            Ok(out)
        }
        RppFun::Perm(gamma) => Ok(gamma.iter().map(|&i| xs[i - 1].clone()).collect()),
        RppFun::Weaken(f, extra) => {
            let j = k - extra;
            let mut out = rpp_eval(f, &xs[..j])?;
            out.extend_from_slice(&xs[j..]);
            Ok(out)
        }
    }
}

/// Structural inversion.
pub fn rpp_invert(f: &RppFun) -> RppFun {
    match f {
        RppFun::S => RppFun::P,
        RppFun::P => RppFun::S,
        RppFun::Id => RppFun::Id,
        RppFun::Sign => RppFun::Sign,
        RppFun::Swap => RppFun::Swap,
        RppFun::Seq(f, g) => RppFun::seq(rpp_invert(g), rpp_invert(f)),
        RppFun::Par(f, g) => RppFun::par(rpp_invert(f), rpp_invert(g)),
        RppFun::It(f) => RppFun::it(rpp_invert(f)),
        RppFun::If(f, g, h) => RppFun::select(rpp_invert(f), rpp_invert(g), rpp_invert(h)),
        RppFun::Perm(gamma) => {
            let mut inv = vec![0usize; gamma.len()];
            for (i, &gi) in gamma.iter().enumerate() {
                inv[gi - 1] = i + 1;
            }
            RppFun::Perm(inv)
        }
        RppFun::Weaken(f, extra) => RppFun::weaken(rpp_invert(f), *extra),
    }
}

// ---- integer encodings ----

/// Strictly positive naturals: `mu X. 1 + X`.
pub fn npos_type() -> BaseType {
    BaseType::mu(
        "X",
        BaseType::sum(BaseType::Unit, BaseType::Var("X".into())),
    )
}

/// Integers: `1 + (npos + npos)` (zero, positive, negative).
pub fn z_type() -> BaseType {
    BaseType::sum(BaseType::Unit, BaseType::sum(npos_type(), npos_type()))
}

/// The k-fold tensor `Z^k`.
pub fn z_tuple_type(k: usize) -> BaseType {
    BaseType::tensor_of(vec![z_type(); k])
}

/// Encodes a strictly positive natural as a fold chain.
pub fn encode_npos(n: u64) -> Value {
    assert!(n >= 1, "npos encodes n >= 1");
    let mut v = Value::fold(Value::injl(Value::Unit));
    for _ in 1..n {
        v = Value::fold(Value::injr(v));
    }
    v
}

/// Encodes an integer into a closed value of type `Z`.
pub fn encode_int(z: &BigInt) -> Value {
    if z.is_zero() {
        Value::injl(Value::Unit)
    } else {
        let mag: u64 = z.abs().try_into().expect("encoding magnitude fits u64");
        if z.is_positive() {
            Value::injr(Value::injl(encode_npos(mag)))
        } else {
            Value::injr(Value::injr(encode_npos(mag)))
        }
    }
}

fn decode_npos(v: &Value) -> Result<u64, RppError> {
    let mut n = 0u64;
    let mut cur = v;
    loop {
        match cur {
            Value::Fold(inner) => match inner.as_ref() {
                Value::InjL(u) if matches!(u.as_ref(), Value::Unit) => return Ok(n + 1),
                Value::InjR(rest) => {
                    n += 1;
                    cur = rest;
                }
                _ => return Err(RppError::BadEncoding(v.clone())),
            },
            _ => return Err(RppError::BadEncoding(v.clone())),
        }
    }
}

/// Decodes a closed value of type `Z`.
pub fn decode_int(v: &Value) -> Result<BigInt, RppError> {
    match v {
        Value::InjL(u) if matches!(u.as_ref(), Value::Unit) => Ok(BigInt::zero()),
        Value::InjR(inner) => match inner.as_ref() {
            Value::InjL(n) => Ok(BigInt::from(decode_npos(n)?)),
            Value::InjR(n) => Ok(-BigInt::from(decode_npos(n)?)),
            _ => Err(RppError::BadEncoding(v.clone())),
        },
        _ => Err(RppError::BadEncoding(v.clone())),
    }
}

/// Encodes an integer tuple as a right-nested pair value.
pub fn encode_tuple(xs: &[BigInt]) -> Value {
    Value::tuple(xs.iter().map(encode_int).collect())
}

/// Decodes a right-nested pair value into `k` integers.
pub fn decode_tuple(v: &Value, k: usize) -> Result<Vec<BigInt>, RppError> {
    let parts = v
        .tuple_components(k)
        .ok_or_else(|| RppError::BadEncoding(v.clone()))?;
    parts.into_iter().map(decode_int).collect()
}

// ---- the compiler ----

fn names(prefix: &str, k: usize) -> Vec<Name> {
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn var_tuple_value(ns: &[Name]) -> Value {
    Value::tuple(ns.iter().map(|n| Value::var(n.clone())).collect())
}

fn var_tuple_pattern(ns: &[Name]) -> Pattern {
    Pattern::tuple(ns.iter().map(|n| Pattern::var(n.clone())).collect())
}

/// The compiler keeps a counter so every generated `fix` binder is distinct;
/// nested iterators would otherwise shadow each other's back-edge labels in
/// the proof translation.
pub struct Compiler {
    fix_counter: usize,
}

impl Default for Compiler {
    fn default() -> Self {
        Compiler::new()
    }
}

impl Compiler {
    pub fn new() -> Compiler {
        Compiler { fix_counter: 0 }
    }

    fn fresh_fix_var(&mut self) -> Name {
        self.fix_counter += 1;
        format!("g{}", self.fix_counter)
    }

    /// Compiles an RPP function to an annotated iso of type `Z^k <-> Z^k`.
    pub fn compile(&mut self, f: &RppFun) -> Result<Iso, RppError> {
        let k = f.arity()?;
        let ty = IsoType::new(z_tuple_type(k), z_tuple_type(k));
        let iso = match f {
            RppFun::Id => Iso::Clauses(vec![(Value::var("x"), Expr::Value(Value::var("x")))]),
            RppFun::Swap => Iso::Clauses(vec![(
                Value::pair(Value::var("x"), Value::var("y")),
                Expr::Value(Value::pair(Value::var("y"), Value::var("x"))),
            )]),
            RppFun::Sign => Iso::Clauses(vec![
                (
                    Value::injr(Value::injl(Value::var("x"))),
                    Expr::Value(Value::injr(Value::injr(Value::var("x")))),
                ),
                (
                    Value::injr(Value::injr(Value::var("x"))),
                    Expr::Value(Value::injr(Value::injl(Value::var("x")))),
                ),
                (
                    Value::injl(Value::Unit),
                    Expr::Value(Value::injl(Value::Unit)),
                ),
            ]),
            RppFun::S => successor_iso(),
            RppFun::P => invert(&successor_iso()),
            RppFun::Seq(f, g) => {
                let omega_f = self.compile(f)?;
                let omega_g = self.compile(g)?;
                let xs = names("x", k);
                let ys = names("y", k);
                let zs = names("z", k);
                let body = Expr::let_in(
                    var_tuple_pattern(&ys),
                    omega_f,
                    var_tuple_pattern(&xs),
                    Expr::let_in(
                        var_tuple_pattern(&zs),
                        omega_g,
                        var_tuple_pattern(&ys),
                        Expr::Value(var_tuple_value(&zs)),
                    ),
                );
                Iso::Clauses(vec![(var_tuple_value(&xs), body)])
            }
            RppFun::Par(f, g) => {
                let j = f.arity()?;
                let l = g.arity()?;
                let omega_f = self.compile(f)?;
                let omega_g = self.compile(g)?;
                let xs = names("x", j);
                let ys = names("y", l);
                let xps: Vec<Name> = (1..=j).map(|i| format!("x{i}'")).collect();
                let yps: Vec<Name> = (1..=l).map(|i| format!("y{i}'")).collect();
                let mut all = xs.clone();
                all.extend(ys.clone());
                let mut all_out = xps.clone();
                all_out.extend(yps.clone());
                let body = Expr::let_in(
                    var_tuple_pattern(&xps),
                    omega_f,
                    var_tuple_pattern(&xs),
                    Expr::let_in(
                        var_tuple_pattern(&yps),
                        omega_g,
                        var_tuple_pattern(&ys),
                        Expr::Value(var_tuple_value(&all_out)),
                    ),
                );
                Iso::Clauses(vec![(var_tuple_value(&all), body)])
            }
            RppFun::It(f) => {
                let inner_k = f.arity()?;
                let omega_f = self.compile(f)?;
                let aux = self.iterator_aux(omega_f, inner_k);
                iterator_dispatch(aux, inner_k)
            }
            RppFun::If(f, g, h) => {
                let inner_k = f.arity()?;
                let omega_f = self.compile(f)?;
                let omega_g = self.compile(g)?;
                let omega_h = self.compile(h)?;
                let xs = names("x", inner_k);
                let xps: Vec<Name> = (1..=inner_k).map(|i| format!("x{i}'")).collect();
                let clause = |tail_pat: Value, tail_out: Value, omega: Iso| {
                    let mut lhs_parts: Vec<Value> =
                        xs.iter().map(|n| Value::var(n.clone())).collect();
                    lhs_parts.push(tail_pat);
                    let mut out_parts: Vec<Value> =
                        xps.iter().map(|n| Value::var(n.clone())).collect();
                    out_parts.push(tail_out);
                    (
                        Value::tuple(lhs_parts),
                        Expr::let_in(
                            var_tuple_pattern(&xps),
                            omega,
                            var_tuple_pattern(&xs),
                            Expr::Value(Value::tuple(out_parts)),
                        ),
                    )
                };
                Iso::Clauses(vec![
                    clause(
                        Value::injr(Value::injl(Value::var("z"))),
                        Value::injr(Value::injl(Value::var("z"))),
                        omega_f,
                    ),
                    clause(Value::injl(Value::Unit), Value::injl(Value::Unit), omega_g),
                    clause(
                        Value::injr(Value::injr(Value::var("z"))),
                        Value::injr(Value::injr(Value::var("z"))),
                        omega_h,
                    ),
                ])
            }
            RppFun::Perm(gamma) => {
                let xs = names("x", k);
                let outs: Vec<Value> = gamma
                    .iter()
                    .map(|&i| Value::var(xs[i - 1].clone()))
                    .collect();
                Iso::Clauses(vec![(
                    var_tuple_value(&xs),
                    Expr::Value(Value::tuple(outs)),
                )])
            }
            RppFun::Weaken(f, extra) => {
                let j = f.arity()?;
                let omega_f = self.compile(f)?;
                let xs = names("x", j + extra);
                let xps: Vec<Name> = (1..=j).map(|i| format!("x{i}'")).collect();
                let mut outs: Vec<Value> = xps.iter().map(|n| Value::var(n.clone())).collect();
                outs.extend(xs[j..].iter().map(|n| Value::var(n.clone())));
                let body = Expr::let_in(
                    var_tuple_pattern(&xps),
                    omega_f,
                    var_tuple_pattern(&xs[..j]),
                    Expr::Value(Value::tuple(outs)),
                );
                Iso::Clauses(vec![(var_tuple_value(&xs), body)])
            }
        };
        Ok(Iso::annot(iso, ty))
    }

    /// The auxiliary iterator over strictly positive counts:
    /// `Z^k * npos <-> Z^k * npos`, as a flat right-nested spine.
    fn iterator_aux(&mut self, omega_f: Iso, k: usize) -> Iso {
        let g = self.fresh_fix_var();
        let mut parts = vec![z_type(); k];
        parts.push(npos_type());
        let aux_side = BaseType::tensor_of(parts);
        let aux_ty = IsoType::new(aux_side.clone(), aux_side);
        let xs = names("x", k);
        let ys = names("y", k);
        let zs = names("z", k);

        // (x..., fold (injl ())) <-> let y... = wf x... in (y..., fold (injl ()))
        let base_lhs = {
            let mut parts: Vec<Value> = xs.iter().map(|n| Value::var(n.clone())).collect();
            parts.push(Value::fold(Value::injl(Value::Unit)));
            Value::tuple(parts)
        };
        let base_rhs = {
            let mut parts: Vec<Value> = ys.iter().map(|n| Value::var(n.clone())).collect();
            parts.push(Value::fold(Value::injl(Value::Unit)));
            Expr::let_in(
                var_tuple_pattern(&ys),
                omega_f.clone(),
                var_tuple_pattern(&xs),
                Expr::Value(Value::tuple(parts)),
            )
        };

        // (x..., fold (injr n)) <->
        //   let y... = wf x... in let (z..., n') = g (y..., n) in (z..., fold (injr n'))
        let step_lhs = {
            let mut parts: Vec<Value> = xs.iter().map(|n| Value::var(n.clone())).collect();
            parts.push(Value::fold(Value::injr(Value::var("n"))));
            Value::tuple(parts)
        };
        let step_rhs = {
            let mut call_arg: Vec<Pattern> = ys.iter().map(|n| Pattern::var(n.clone())).collect();
            call_arg.push(Pattern::var("n"));
            let mut call_out: Vec<Pattern> = zs.iter().map(|n| Pattern::var(n.clone())).collect();
            call_out.push(Pattern::var("n'"));
            let mut result: Vec<Value> = zs.iter().map(|n| Value::var(n.clone())).collect();
            result.push(Value::fold(Value::injr(Value::var("n'"))));
            Expr::let_in(
                var_tuple_pattern(&ys),
                omega_f,
                var_tuple_pattern(&xs),
                Expr::let_in(
                    Pattern::tuple(call_out),
                    Iso::Var(g.clone()),
                    Pattern::tuple(call_arg),
                    Expr::Value(Value::tuple(result)),
                ),
            )
        };

        Iso::annot(
            Iso::fix(
                g,
                Iso::Clauses(vec![(base_lhs, base_rhs), (step_lhs, step_rhs)]),
            ),
            aux_ty,
        )
    }
}

/// The three-clause sign dispatcher around the auxiliary iterator.
fn iterator_dispatch(aux: Iso, k: usize) -> Iso {
    let xs = names("x", k);
    let ys = names("y", k);

    let zero_lhs = {
        let mut parts: Vec<Value> = xs.iter().map(|n| Value::var(n.clone())).collect();
        parts.push(Value::injl(Value::Unit));
        Value::tuple(parts)
    };
    let zero = (zero_lhs.clone(), Expr::Value(zero_lhs));

    let signed_clause = |wrap: fn(Value) -> Value, aux: Iso| {
        let mut lhs: Vec<Value> = xs.iter().map(|n| Value::var(n.clone())).collect();
        lhs.push(Value::injr(wrap(Value::var("z"))));
        let mut call_arg: Vec<Pattern> = xs.iter().map(|n| Pattern::var(n.clone())).collect();
        call_arg.push(Pattern::var("z"));
        let mut call_out: Vec<Pattern> = ys.iter().map(|n| Pattern::var(n.clone())).collect();
        call_out.push(Pattern::var("z'"));
        let mut result: Vec<Value> = ys.iter().map(|n| Value::var(n.clone())).collect();
        result.push(Value::injr(wrap(Value::var("z'"))));
        (
            Value::tuple(lhs),
            Expr::let_in(
                Pattern::tuple(call_out),
                aux,
                Pattern::tuple(call_arg),
                Expr::Value(Value::tuple(result)),
            ),
        )
    };

    Iso::Clauses(vec![
        zero,
        signed_clause(Value::injl, aux.clone()),
        signed_clause(Value::injr, aux),
    ])
}

/// The successor on `Z`, exactly the four published clauses.
fn successor_iso() -> Iso {
    Iso::Clauses(vec![
        (
            Value::injl(Value::Unit),
            Expr::Value(Value::injr(Value::injl(Value::fold(Value::injl(
                Value::Unit,
            ))))),
        ),
        (
            Value::injr(Value::injl(Value::var("x"))),
            Expr::Value(Value::injr(Value::injl(Value::fold(Value::injr(
                Value::var("x"),
            ))))),
        ),
        (
            Value::injr(Value::injr(Value::fold(Value::injl(Value::Unit)))),
            Expr::Value(Value::injl(Value::Unit)),
        ),
        (
            Value::injr(Value::injr(Value::fold(Value::injr(Value::var("x"))))),
            Expr::Value(Value::injr(Value::injr(Value::var("x")))),
        ),
    ])
}

/// Convenience wrapper: compile with a fresh compiler instance.
pub fn compile(f: &RppFun) -> Result<Iso, RppError> {
    Compiler::new().compile(f)
}

// ---- textual syntax ----

/// Parses the RPP surface syntax: `S`, `P`, `Id`, `Sign`, `Swap`, `f ; g`,
/// `f || g`, `It[f]`, `If[f,g,h]`, `Perm[2,1]`, `Weaken[f,n]`.
/// `;` binds looser than `||`.
pub fn parse_rpp(text: &str) -> Result<RppFun, RppError> {
    let mut p = RppParser {
        text: text.as_bytes(),
        pos: 0,
    };
    let f = p.seq()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(RppError::Parse(format!("trailing input at byte {}", p.pos)));
    }
    f.arity()?;
    Ok(f)
}

struct RppParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> RppParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), RppError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(RppError::Parse(format!(
                "expected `{s}` at byte {}",
                self.pos
            )))
        }
    }

    fn seq(&mut self) -> Result<RppFun, RppError> {
        let lhs = self.par()?;
        if self.eat(";") {
            let rhs = self.seq()?;
            Ok(RppFun::seq(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn par(&mut self) -> Result<RppFun, RppError> {
        let lhs = self.atom()?;
        if self.eat("||") {
            let rhs = self.par()?;
            Ok(RppFun::par(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn number(&mut self) -> Result<usize, RppError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(RppError::Parse(format!(
                "expected a number at byte {start}"
            )));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|e| RppError::Parse(format!("bad number: {e}")))
    }

    fn atom(&mut self) -> Result<RppFun, RppError> {
        self.skip_ws();
        if self.eat("(") {
            let f = self.seq()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat("It") {
            self.expect("[")?;
            let f = self.seq()?;
            self.expect("]")?;
            return Ok(RppFun::it(f));
        }
        if self.eat("If") {
            self.expect("[")?;
            let f = self.seq()?;
            self.expect(",")?;
            let g = self.seq()?;
            self.expect(",")?;
            let h = self.seq()?;
            self.expect("]")?;
            return Ok(RppFun::select(f, g, h));
        }
        if self.eat("Perm") {
            self.expect("[")?;
            let mut gamma = vec![self.number()?];
            while self.eat(",") {
                gamma.push(self.number()?);
            }
            self.expect("]")?;
            return Ok(RppFun::Perm(gamma));
        }
        if self.eat("Weaken") {
            self.expect("[")?;
            let f = self.seq()?;
            self.expect(",")?;
            let n = self.number()?;
            self.expect("]")?;
            return Ok(RppFun::weaken(f, n));
        }
        if self.eat("Sign") {
            return Ok(RppFun::Sign);
        }
        if self.eat("Swap") {
            return Ok(RppFun::Swap);
        }
        if self.eat("Id") {
            return Ok(RppFun::Id);
        }
        if self.eat("S") {
            return Ok(RppFun::S);
        }
        if self.eat("P") {
            return Ok(RppFun::P);
        }
        Err(RppError::Parse(format!(
            "expected an RPP expression at byte {}",
            self.pos
        )))
    }
}

pub fn pretty_rpp(f: &RppFun) -> String {
    fn atom(f: &RppFun) -> String {
        match f {
            RppFun::Seq(..) | RppFun::Par(..) => format!("({})", pretty_rpp(f)),
            _ => pretty_rpp(f),
        }
    }
    match f {
        RppFun::S => "S".into(),
        RppFun::P => "P".into(),
        RppFun::Id => "Id".into(),
        RppFun::Sign => "Sign".into(),
        RppFun::Swap => "Swap".into(),
        RppFun::Seq(a, b) => format!("{} ; {}", atom(a), pretty_rpp(b)),
        RppFun::Par(a, b) => format!("{} || {}", atom(a), atom(b)),
        RppFun::It(f) => format!("It[{}]", pretty_rpp(f)),
        RppFun::If(f, g, h) => {
            format!(
                "If[{}, {}, {}]",
                pretty_rpp(f),
                pretty_rpp(g),
                pretty_rpp(h)
            )
        }
        RppFun::Perm(gamma) => {
            let items: Vec<String> = gamma.iter().map(|i| i.to_string()).collect();
            format!("Perm[{}]", items.join(","))
        }
        RppFun::Weaken(f, n) => format!("Weaken[{}, {n}]", pretty_rpp(f)),
    }
}

// ---- random generation for property tests ----

/// Generates a random RPP tree of the given arity. Leaves are drawn 60% of
/// the time; iterator nesting is capped so compiled evaluation stays within
/// step budgets.
pub fn random_rpp<R: Rng>(rng: &mut R, arity: usize, depth: usize, it_depth: usize) -> RppFun {
    assert!(arity >= 1);
    if depth == 0 || rng.gen_bool(0.6) {
        return random_leaf(rng, arity);
    }
    let mut choices: Vec<u8> = vec![0, 1];
    if arity >= 2 {
        choices.push(2);
        choices.push(5);
        if it_depth < 2 {
            choices.push(3);
        }
        choices.push(4);
    }
    match choices[rng.gen_range(0..choices.len())] {
        0 => RppFun::seq(
            random_rpp(rng, arity, depth - 1, it_depth),
            random_rpp(rng, arity, depth - 1, it_depth),
        ),
        1 => {
            if arity == 1 {
                random_leaf(rng, 1)
            } else {
                let j = rng.gen_range(1..arity);
                RppFun::par(
                    random_rpp(rng, j, depth - 1, it_depth),
                    random_rpp(rng, arity - j, depth - 1, it_depth),
                )
            }
        }
        2 => RppFun::select(
            random_rpp(rng, arity - 1, depth - 1, it_depth),
            random_rpp(rng, arity - 1, depth - 1, it_depth),
            random_rpp(rng, arity - 1, depth - 1, it_depth),
        ),
        3 => RppFun::it(random_rpp(rng, arity - 1, depth - 1, it_depth + 1)),
        4 => {
            let extra = rng.gen_range(1..arity);
            RppFun::weaken(random_rpp(rng, arity - extra, depth - 1, it_depth), extra)
        }
        _ => random_perm(rng, arity),
    }
}

fn random_leaf<R: Rng>(rng: &mut R, arity: usize) -> RppFun {
    if arity == 1 {
        match rng.gen_range(0..4) {
            0 => RppFun::S,
            1 => RppFun::P,
            2 => RppFun::Sign,
            _ => RppFun::Id,
        }
    } else if arity == 2 && rng.gen_bool(0.3) {
        RppFun::Swap
    } else if rng.gen_bool(0.5) {
        random_perm(rng, arity)
    } else {
        RppFun::par(random_leaf(rng, 1), random_leaf(rng, arity - 1))
    }
}

fn random_perm<R: Rng>(rng: &mut R, k: usize) -> RppFun {
    let mut gamma: Vec<usize> = (1..=k).collect();
    for i in (1..k).rev() {
        let j = rng.gen_range(0..=i);
        gamma.swap(i, j);
    }
    RppFun::Perm(gamma)
}
