//! Concrete syntax: a lexer and recursive-descent parser for types, values,
//! isos and terms, plus the pretty-printer that round-trips through `parse`.
//!
//! Grammar (`--` starts a line comment):
//!
//! ```text
//! type   ::= sum ;  sum ::= prod ("+" sum)? ;  prod ::= atom ("*" prod)?
//! atom   ::= "1" | ident | "mu" ident "." type | "(" type ")"
//! value  ::= "()" | ident | "injl" value | "injr" value | "fold" value
//!          | "(" value ("," value)+ ")" | "(" value ")"
//! expr   ::= value | "let" pat "=" iso pat "in" expr
//! pat    ::= ident | "(" pat ("," pat)+ ")"
//! iso    ::= "{" clause ("|" clause)* "}" | "fix" ident "." iso | ident
//!          | "(" iso "::" type "<->" type ")" | iso "::" type "<-> type
//! clause ::= value "<->" expr
//! term   ::= like value, plus `iso term` and "let" pat "=" term "in" term
//! file   ::= ("def" ident "::" type "<->" type "=" iso)* ("main" "=" term)?
//! ```

use crate::ast::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Pipe,
    Plus,
    Star,
    Iso, // <->
    Eq,
    Cons, // ::
    One,
    KwMu,
    KwInjl,
    KwInjr,
    KwFold,
    KwLet,
    KwIn,
    KwFix,
    KwDef,
    KwMain,
    Ident(String),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Pipe => "|",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Iso => "<->",
            Tok::Eq => "=",
            Tok::Cons => "::",
            Tok::One => "1",
            Tok::KwMu => "mu",
            Tok::KwInjl => "injl",
            Tok::KwInjr => "injr",
            Tok::KwFold => "fold",
            Tok::KwLet => "let",
            Tok::KwIn => "in",
            Tok::KwFix => "fix",
            Tok::KwDef => "def",
            Tok::KwMain => "main",
            Tok::Ident(s) => return write!(f, "{s}"),
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: error: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '-' => {
                bump(&mut chars);
                match chars.peek() {
                    Some('-') => {
                        while let Some(&c2) = chars.peek() {
                            if c2 == '\n' {
                                break;
                            }
                            bump(&mut chars);
                        }
                    }
                    _ => return err(pos, "stray `-` (comments are `--`)"),
                }
            }
            '{' => {
                bump(&mut chars);
                toks.push((Tok::LBrace, pos));
            }
            '}' => {
                bump(&mut chars);
                toks.push((Tok::RBrace, pos));
            }
            '(' => {
                bump(&mut chars);
                toks.push((Tok::LParen, pos));
            }
            ')' => {
                bump(&mut chars);
                toks.push((Tok::RParen, pos));
            }
            ',' => {
                bump(&mut chars);
                toks.push((Tok::Comma, pos));
            }
            '.' => {
                bump(&mut chars);
                toks.push((Tok::Dot, pos));
            }
            '|' => {
                bump(&mut chars);
                toks.push((Tok::Pipe, pos));
            }
            '+' => {
                bump(&mut chars);
                toks.push((Tok::Plus, pos));
            }
            '*' => {
                bump(&mut chars);
                toks.push((Tok::Star, pos));
            }
            '=' => {
                bump(&mut chars);
                toks.push((Tok::Eq, pos));
            }
            ':' => {
                bump(&mut chars);
                match chars.peek() {
                    Some(':') => {
                        bump(&mut chars);
                        toks.push((Tok::Cons, pos));
                    }
                    _ => return err(pos, "stray `:` (did you mean `::`?)"),
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        toks.push((Tok::Iso, pos));
                        continue;
                    }
                }
                return err(pos, "expected `<->`");
            }
            '1' => {
                bump(&mut chars);
                toks.push((Tok::One, pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' || c2 == '\'' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "mu" => Tok::KwMu,
                    "injl" => Tok::KwInjl,
                    "injr" => Tok::KwInjr,
                    "fold" => Tok::KwFold,
                    "let" => Tok::KwLet,
                    "in" => Tok::KwIn,
                    "fix" => Tok::KwFix,
                    "def" => Tok::KwDef,
                    "main" => Tok::KwMain,
                    _ => Tok::Ident(s),
                };
                toks.push((tok, pos));
            }
            other => return err(pos, format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    end: Pos,
}

impl Parser {
    pub fn new(text: &str) -> Result<Parser, ParseError> {
        let toks = lex(text)?;
        let end = toks
            .last()
            .map(|(_, p)| Pos {
                line: p.line,
                col: p.col + 1,
            })
            .unwrap_or(Pos { line: 1, col: 1 });
        Ok(Parser { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Pos {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| format!("`{t}`"))
                .unwrap_or_else(|| "end of input".into());
            err(self.here(), format!("expected `{tok}`, found {found}"))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                if let Some(Tok::Ident(s)) = self.next() {
                    Ok(s)
                } else {
                    unreachable!()
                }
            }
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected identifier, found {found}"))
            }
        }
    }

    // ---- types ----

    pub fn ty(&mut self) -> Result<BaseType, ParseError> {
        let lhs = self.ty_prod()?;
        if self.eat(&Tok::Plus) {
            let rhs = self.ty()?;
            Ok(BaseType::sum(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<BaseType, ParseError> {
        let lhs = self.ty_atom()?;
        if self.eat(&Tok::Star) {
            let rhs = self.ty_prod()?;
            Ok(BaseType::prod(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<BaseType, ParseError> {
        match self.peek() {
            Some(Tok::One) => {
                self.next();
                Ok(BaseType::Unit)
            }
            Some(Tok::KwMu) => {
                self.next();
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.ty()?;
                Ok(BaseType::Mu(x, Box::new(body)))
            }
            Some(Tok::LParen) => {
                self.next();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(_)) => Ok(BaseType::Var(self.ident()?)),
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected a type, found {found}"))
            }
        }
    }

    pub fn iso_type(&mut self) -> Result<IsoType, ParseError> {
        let lhs = self.ty()?;
        self.expect(Tok::Iso)?;
        let rhs = self.ty()?;
        Ok(IsoType::new(lhs, rhs))
    }

    // ---- values and patterns ----

    pub fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                if self.eat(&Tok::RParen) {
                    return Ok(Value::Unit);
                }
                let first = self.value()?;
                let mut parts = vec![first];
                while self.eat(&Tok::Comma) {
                    parts.push(self.value()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Value::tuple(parts))
            }
            Some(Tok::KwInjl) => {
                self.next();
                Ok(Value::injl(self.value()?))
            }
            Some(Tok::KwInjr) => {
                self.next();
                Ok(Value::injr(self.value()?))
            }
            Some(Tok::KwFold) => {
                self.next();
                Ok(Value::fold(self.value()?))
            }
            Some(Tok::Ident(_)) => Ok(Value::var(self.ident()?)),
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected a value, found {found}"))
            }
        }
    }

    pub fn pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                let first = self.pattern()?;
                let mut parts = vec![first];
                while self.eat(&Tok::Comma) {
                    parts.push(self.pattern()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Pattern::tuple(parts))
            }
            Some(Tok::Ident(_)) => Ok(Pattern::var(self.ident()?)),
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected a pattern, found {found}"))
            }
        }
    }

    // ---- isos and expressions ----

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::KwLet) {
            let pattern = self.pattern()?;
            self.expect(Tok::Eq)?;
            let iso = self.iso()?;
            let arg = self.pattern()?;
            self.expect(Tok::KwIn)?;
            let body = self.expr()?;
            Ok(Expr::Let {
                pattern,
                iso,
                arg,
                body: Box::new(body),
            })
        } else {
            Ok(Expr::Value(self.value()?))
        }
    }

    pub fn iso(&mut self) -> Result<Iso, ParseError> {
        let inner = self.iso_atom()?;
        if self.eat(&Tok::Cons) {
            let ty = self.iso_type()?;
            Ok(Iso::annot(inner, ty))
        } else {
            Ok(inner)
        }
    }

    fn iso_atom(&mut self) -> Result<Iso, ParseError> {
        match self.peek() {
            Some(Tok::LBrace) => {
                self.next();
                let mut clauses = vec![self.clause()?];
                while self.eat(&Tok::Pipe) {
                    clauses.push(self.clause()?);
                }
                self.expect(Tok::RBrace)?;
                Ok(Iso::Clauses(clauses))
            }
            Some(Tok::KwFix) => {
                self.next();
                let f = self.ident()?;
                self.expect(Tok::Dot)?;
                let body = self.iso()?;
                Ok(Iso::Fix(f, Box::new(body)))
            }
            Some(Tok::LParen) => {
                self.next();
                let iso = self.iso()?;
                self.expect(Tok::RParen)?;
                Ok(iso)
            }
            Some(Tok::Ident(_)) => Ok(Iso::Var(self.ident()?)),
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected an iso, found {found}"))
            }
        }
    }

    fn clause(&mut self) -> Result<(Value, Expr), ParseError> {
        let lhs = self.value()?;
        self.expect(Tok::Iso)?;
        let rhs = self.expr()?;
        Ok((lhs, rhs))
    }

    // ---- terms ----

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if self.eat(&Tok::KwLet) {
            let pattern = self.pattern()?;
            self.expect(Tok::Eq)?;
            let rhs = self.term()?;
            self.expect(Tok::KwIn)?;
            let body = self.term()?;
            return Ok(Term::let_in(pattern, rhs, body));
        }
        // Isos that cannot be mistaken for terms: `{..}`, `fix ..` and a
        // parenthesized annotation. A bare identifier becomes an application
        // only when a term atom follows.
        match self.peek() {
            Some(Tok::LBrace) | Some(Tok::KwFix) => {
                let iso = self.iso()?;
                let arg = self.term_atom()?;
                return Ok(Term::app(iso, arg));
            }
            Some(Tok::LParen) => {
                // Could be `(iso :: T) arg`, a tuple, or a parenthesized term.
                let save = self.pos;
                if let Ok(iso) = self.iso_annot_parens() {
                    let arg = self.term_atom()?;
                    return Ok(Term::app(iso, arg));
                }
                self.pos = save;
            }
            Some(Tok::Ident(_)) => {
                let save = self.pos;
                let name = self.ident()?;
                if self.starts_term_atom() {
                    let arg = self.term_atom()?;
                    return Ok(Term::app(Iso::Var(name), arg));
                }
                self.pos = save;
            }
            _ => {}
        }
        self.term_atom()
    }

    fn iso_annot_parens(&mut self) -> Result<Iso, ParseError> {
        self.expect(Tok::LParen)?;
        let inner = self.iso_atom()?;
        self.expect(Tok::Cons)?;
        let ty = self.iso_type()?;
        self.expect(Tok::RParen)?;
        Ok(Iso::annot(inner, ty))
    }

    fn starts_term_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::LParen)
                | Some(Tok::Ident(_))
                | Some(Tok::KwInjl)
                | Some(Tok::KwInjr)
                | Some(Tok::KwFold)
        )
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                if self.eat(&Tok::RParen) {
                    return Ok(Term::Unit);
                }
                let first = self.term()?;
                let mut parts = vec![first];
                while self.eat(&Tok::Comma) {
                    parts.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                let mut it = parts.into_iter().rev();
                let last = it.next().unwrap();
                Ok(it.fold(last, |acc, t| Term::pair(t, acc)))
            }
            Some(Tok::KwInjl) => {
                self.next();
                Ok(Term::injl(self.term_atom()?))
            }
            Some(Tok::KwInjr) => {
                self.next();
                Ok(Term::injr(self.term_atom()?))
            }
            Some(Tok::KwFold) => {
                self.next();
                Ok(Term::fold(self.term_atom()?))
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident()?;
                if self.starts_term_atom() {
                    let arg = self.term_atom()?;
                    Ok(Term::app(Iso::Var(name), arg))
                } else {
                    Ok(Term::var(name))
                }
            }
            other => {
                let found = other
                    .map(|t| format!("`{t}`"))
                    .unwrap_or_else(|| "end of input".into());
                err(self.here(), format!("expected a term, found {found}"))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// One parsed definition, before name expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Def {
    pub name: Name,
    pub ty: IsoType,
    pub iso: Iso,
    pub pos: Pos,
}

/// A parsed `.iso` file: definitions plus an optional `main` term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub defs: Vec<Def>,
    pub main: Option<Term>,
}

impl SourceFile {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }
}

/// Parses a whole source file and expands definition references: each later
/// definition sees earlier ones substituted in as annotated isos.
pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = SourceFile::default();
    while !p.at_end() {
        if p.eat(&Tok::KwDef) {
            let pos = p.here();
            let name = p.ident()?;
            p.expect(Tok::Cons)?;
            let ty = p.iso_type()?;
            p.expect(Tok::Eq)?;
            let mut iso = p.iso()?;
            if out.def(&name).is_some() {
                return err(pos, format!("duplicate definition `{name}`"));
            }
            for prev in &out.defs {
                let expanded = Iso::annot(prev.iso.clone(), prev.ty.clone());
                iso = iso.subst_iso_var(&prev.name, &expanded);
            }
            out.defs.push(Def { name, ty, iso, pos });
        } else if p.eat(&Tok::KwMain) {
            p.expect(Tok::Eq)?;
            let mut t = p.term()?;
            for prev in &out.defs {
                let expanded = Iso::annot(prev.iso.clone(), prev.ty.clone());
                t = t.subst_iso_var(&prev.name, &expanded);
            }
            out.main = Some(t);
            if !p.at_end() {
                return err(p.here(), "trailing input after `main`");
            }
        } else {
            return err(p.here(), "expected `def` or `main`");
        }
    }
    Ok(out)
}

/// Parses a standalone term, expanding definition names from `file`.
pub fn parse_term_with_defs(text: &str, file: &SourceFile) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let mut t = p.term()?;
    if !p.at_end() {
        return err(p.here(), "trailing input after term");
    }
    for d in &file.defs {
        let expanded = Iso::annot(d.iso.clone(), d.ty.clone());
        t = t.subst_iso_var(&d.name, &expanded);
    }
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<BaseType, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.ty()?;
    if !p.at_end() {
        return err(p.here(), "trailing input after type");
    }
    Ok(t)
}

pub fn parse_iso(text: &str) -> Result<Iso, ParseError> {
    let mut p = Parser::new(text)?;
    let iso = p.iso()?;
    if !p.at_end() {
        return err(p.here(), "trailing input after iso");
    }
    Ok(iso)
}

pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    let mut p = Parser::new(text)?;
    let v = p.value()?;
    if !p.at_end() {
        return err(p.here(), "trailing input after value");
    }
    Ok(v)
}

// ---- pretty-printing ----

pub fn pretty_type(t: &BaseType) -> String {
    fn sum(t: &BaseType, out: &mut String) {
        match t {
            BaseType::Sum(a, b) => {
                prod(a, out);
                out.push_str(" + ");
                sum(b, out);
            }
            _ => prod(t, out),
        }
    }
    fn prod(t: &BaseType, out: &mut String) {
        match t {
            BaseType::Prod(a, b) => {
                atom(a, out);
                out.push_str(" * ");
                prod(b, out);
            }
            BaseType::Sum(..) | BaseType::Mu(..) => atom(t, out),
            _ => atom(t, out),
        }
    }
    fn atom(t: &BaseType, out: &mut String) {
        match t {
            BaseType::Unit => out.push('1'),
            BaseType::Var(x) => out.push_str(x),
            BaseType::Mu(x, body) => {
                out.push('(');
                out.push_str("mu ");
                out.push_str(x);
                out.push_str(". ");
                sum(body, out);
                out.push(')');
            }
            _ => {
                out.push('(');
                sum(t, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    // A top-level mu needs no parentheses.
    if let BaseType::Mu(x, body) = t {
        write!(out, "mu {x}. ").unwrap();
        sum(body, &mut out);
    } else {
        sum(t, &mut out);
    }
    out
}

pub fn pretty_value(v: &Value) -> String {
    fn atom(v: &Value, out: &mut String) {
        match v {
            Value::Unit => out.push_str("()"),
            Value::Var(x) => out.push_str(x),
            Value::Pair(..) => {
                out.push('(');
                let mut cur = v;
                loop {
                    match cur {
                        Value::Pair(a, b) => {
                            top(a, out);
                            out.push_str(", ");
                            cur = b;
                        }
                        _ => {
                            top(cur, out);
                            break;
                        }
                    }
                }
                out.push(')');
            }
            _ => {
                out.push('(');
                top(v, out);
                out.push(')');
            }
        }
    }
    fn top(v: &Value, out: &mut String) {
        match v {
            Value::InjL(w) => {
                out.push_str("injl ");
                atom(w, out);
            }
            Value::InjR(w) => {
                out.push_str("injr ");
                atom(w, out);
            }
            Value::Fold(w) => {
                out.push_str("fold ");
                atom(w, out);
            }
            _ => atom(v, out),
        }
    }
    let mut out = String::new();
    top(v, &mut out);
    out
}

pub fn pretty_pattern(p: &Pattern) -> String {
    match p {
        Pattern::Var(x) => x.clone(),
        Pattern::Pair(..) => {
            let mut out = String::from("(");
            let mut cur = p;
            loop {
                match cur {
                    Pattern::Pair(a, b) => {
                        out.push_str(&pretty_pattern(a));
                        out.push_str(", ");
                        cur = b;
                    }
                    _ => {
                        out.push_str(&pretty_pattern(cur));
                        break;
                    }
                }
            }
            out.push(')');
            out
        }
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::Value(v) => pretty_value(v),
        Expr::Let {
            pattern,
            iso,
            arg,
            body,
        } => {
            format!(
                "let {} = {} {} in {}",
                pretty_pattern(pattern),
                pretty_iso_app_position(iso),
                pretty_pattern(arg),
                pretty_expr(body)
            )
        }
    }
}

/// Renders an iso in application position, parenthesizing where required.
fn pretty_iso_app_position(iso: &Iso) -> String {
    match iso {
        Iso::Var(f) => f.clone(),
        Iso::Clauses(_) => pretty_iso(iso),
        Iso::Fix(..) | Iso::Annot(..) => format!("({})", pretty_iso(iso)),
    }
}

pub fn pretty_iso(iso: &Iso) -> String {
    match iso {
        Iso::Var(f) => f.clone(),
        Iso::Fix(f, body) => format!("fix {f}. {}", pretty_iso(body)),
        Iso::Annot(inner, ty) => format!("{} :: {}", pretty_iso_annot_lhs(inner), ty),
        Iso::Clauses(clauses) => {
            let mut out = String::from("{ ");
            for (i, (v, e)) in clauses.iter().enumerate() {
                if i > 0 {
                    out.push_str("\n  | ");
                }
                out.push_str(&pretty_value(v));
                out.push_str(" <-> ");
                out.push_str(&pretty_expr(e));
            }
            out.push_str(" }");
            out
        }
    }
}

fn pretty_iso_annot_lhs(iso: &Iso) -> String {
    match iso {
        // `fix f. omega :: T` would annotate the body; keep fix parenthesized.
        Iso::Fix(..) | Iso::Annot(..) => format!("({})", pretty_iso(iso)),
        _ => pretty_iso(iso),
    }
}

pub fn pretty_term(t: &Term) -> String {
    fn atom(t: &Term, out: &mut String) {
        match t {
            Term::Unit => out.push_str("()"),
            Term::Var(x) => out.push_str(x),
            Term::Pair(..) => {
                out.push('(');
                let mut cur = t;
                loop {
                    match cur {
                        Term::Pair(a, b) => {
                            top(a, out);
                            out.push_str(", ");
                            cur = b;
                        }
                        _ => {
                            top(cur, out);
                            break;
                        }
                    }
                }
                out.push(')');
            }
            _ => {
                out.push('(');
                top(t, out);
                out.push(')');
            }
        }
    }
    fn top(t: &Term, out: &mut String) {
        match t {
            Term::InjL(u) => {
                out.push_str("injl ");
                atom(u, out);
            }
            Term::InjR(u) => {
                out.push_str("injr ");
                atom(u, out);
            }
            Term::Fold(u) => {
                out.push_str("fold ");
                atom(u, out);
            }
            Term::App(iso, arg) => {
                out.push_str(&pretty_iso_app_position(iso));
                out.push(' ');
                atom(arg, out);
            }
            Term::Let(p, rhs, body) => {
                out.push_str("let ");
                out.push_str(&pretty_pattern(p));
                out.push_str(" = ");
                top(rhs, out);
                out.push_str(" in ");
                top(body, out);
            }
            _ => atom(t, out),
        }
    }
    let mut out = String::new();
    top(t, &mut out);
    out
}

pub fn pretty_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for d in &file.defs {
        writeln!(out, "def {} :: {} =", d.name, d.ty).unwrap();
        writeln!(out, "  {}", pretty_iso(&d.iso)).unwrap();
        out.push('\n');
    }
    if let Some(main) = &file.main {
        writeln!(out, "main = {}", pretty_term(main)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_swap_with_annotation() {
        let iso = parse_iso("{ (x, y) <-> (y, x) } :: 1 * (1 + 1) <-> (1 + 1) * 1").unwrap();
        let expected_body = Iso::Clauses(vec![(
            Value::pair(Value::var("x"), Value::var("y")),
            Expr::Value(Value::pair(Value::var("y"), Value::var("x"))),
        )]);
        assert_eq!(iso.skeleton(), &expected_body);
        assert_eq!(
            iso.annotation().unwrap(),
            &IsoType::new(
                BaseType::prod(
                    BaseType::Unit,
                    BaseType::sum(BaseType::Unit, BaseType::Unit)
                ),
                BaseType::prod(
                    BaseType::sum(BaseType::Unit, BaseType::Unit),
                    BaseType::Unit
                ),
            )
        );
    }

    #[test]
    fn parses_unit_term() {
        let mut p = Parser::new("()").unwrap();
        assert_eq!(p.term().unwrap(), Term::Unit);
    }

    #[test]
    fn parses_map_shape() {
        let src = "fix f. { fold (injl ()) <-> fold (injl ())
                          | fold (injr (h, t)) <->
                              let h' = w h in let t' = f t in fold (injr (h', t')) }";
        let iso = parse_iso(src).unwrap();
        match iso {
            Iso::Fix(f, body) => {
                assert_eq!(f, "f");
                match *body {
                    Iso::Clauses(cs) => {
                        assert_eq!(cs.len(), 2);
                        match &cs[1].1 {
                            Expr::Let { iso, body, .. } => {
                                assert_eq!(iso, &Iso::Var("w".into()));
                                assert!(matches!(body.as_ref(), Expr::Let { .. }));
                            }
                            other => panic!("expected let chain, got {other:?}"),
                        }
                    }
                    other => panic!("expected clauses, got {other:?}"),
                }
            }
            other => panic!("expected fix, got {other:?}"),
        }
    }

    #[test]
    fn mu_extends_right_and_star_binds_tighter() {
        let t = parse_type("mu X. 1 + 1 * X").unwrap();
        assert_eq!(t, list_type(BaseType::Unit));
        let u = parse_type("1 * 1 + 1").unwrap();
        assert_eq!(
            u,
            BaseType::sum(
                BaseType::prod(BaseType::Unit, BaseType::Unit),
                BaseType::Unit
            )
        );
    }

    #[test]
    fn pretty_mu_renders_plainly() {
        assert_eq!(pretty_type(&nat_type()), "mu X. 1 + X");
    }

    #[test]
    fn tuples_right_associate() {
        let v = parse_value("(a, b, c)").unwrap();
        assert_eq!(
            v,
            Value::pair(
                Value::var("a"),
                Value::pair(Value::var("b"), Value::var("c"))
            )
        );
    }

    #[test]
    fn application_of_named_iso() {
        let mut p = Parser::new("f (x, ())").unwrap();
        let t = p.term().unwrap();
        assert_eq!(
            t,
            Term::app(Iso::Var("f".into()), Term::pair(Term::var("x"), Term::Unit))
        );
    }

    #[test]
    fn file_with_def_and_main_expands_names() {
        let src = "def id1 :: 1 <-> 1 = { x <-> x }\nmain = id1 ()";
        let file = parse(src).unwrap();
        assert_eq!(file.defs.len(), 1);
        let main = file.main.unwrap();
        match main {
            Term::App(Iso::Annot(inner, ty), _) => {
                assert_eq!(ty, IsoType::new(BaseType::Unit, BaseType::Unit));
                assert!(matches!(*inner, Iso::Clauses(_)));
            }
            other => panic!("expansion failed: {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        let e = parse("def x ::").unwrap_err();
        assert_eq!(e.pos.line, 1);
        assert!(e.to_string().contains("error"));
    }

    #[test]
    fn round_trips_examples() {
        for src in [
            "{ (x, y) <-> (y, x) }",
            "fix f. { fold (injl ()) <-> fold (injl ()) | fold (injr (h, t)) <-> let h' = w h in let t' = f t in fold (injr (h', t')) }",
            "{ injl a <-> injr (injl a) | injr (injl b) <-> injr (injr b) | injr (injr c) <-> injl c }",
        ] {
            let iso = parse_iso(src).unwrap();
            let printed = pretty_iso(&iso);
            let reparsed = parse_iso(&printed).unwrap();
            assert_eq!(iso, reparsed, "round-trip failed for {src}");
        }
    }
}
