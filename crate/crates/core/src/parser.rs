//! Recursive-descent parser producing desugared [`Expr`] trees.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::lexer::{tokenize, Tok, Token};
use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

/// A top-level `def` or `defrec`.
#[derive(Debug, Clone)]
pub struct TopDef {
    pub pattern: Pattern,
    pub value: Expr,
    pub rec: bool,
    pub span: Span,
}

/// A source file: definitions followed by an optional main expression.
#[derive(Debug, Clone)]
pub struct Module {
    pub defs: Vec<TopDef>,
    pub main: Option<Expr>,
}

impl Module {
    /// Wraps `body` in the module's definitions, innermost last.
    pub fn wrap(&self, body: Expr) -> Expr {
        self.defs.iter().rev().fold(body, |acc, d| {
            let span = d.span.to(acc.span);
            let kind = if d.rec {
                ExprKind::LetRec(d.pattern.clone(), Box::new(d.value.clone()), Box::new(acc))
            } else {
                ExprKind::Let(d.pattern.clone(), Box::new(d.value.clone()), Box::new(acc))
            };
            Expr::new(kind, span)
        })
    }

    /// The module as one expression: its definitions around its main expression.
    pub fn to_expr(&self) -> Option<Expr> {
        self.main.clone().map(|m| self.wrap(m))
    }
}

/// Mutable state threaded through the parse of the prelude and the program,
/// so that location ids continue across the two texts.
#[derive(Debug, Default)]
pub struct ParseState {
    pub next_loc: u32,
    pub aliases: Vec<(Loc, Name)>,
    names: BTreeMap<String, Name>,
}

impl ParseState {
    pub fn new() -> Self {
        ParseState {
            next_loc: 1,
            ..Default::default()
        }
    }

    fn intern(&mut self, s: &str) -> Name {
        if let Some(n) = self.names.get(s) {
            return n.clone();
        }
        let n = Name::new(s);
        self.names.insert(s.to_owned(), n.clone());
        n
    }
}

const RESERVED: &[&str] = &[
    "let", "letrec", "def", "defrec", "case", "if", "true", "false",
];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: Span,
    st: &'a mut ParseState,
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(span: Span, message: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        message: message.into(),
        span,
    })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + off)
    }

    fn bump(&mut self) -> PResult<&'a Token> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => err(self.eof, "unexpected end of input"),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<Span> {
        let t = self.bump()?;
        if t.tok == want {
            Ok(t.span)
        } else {
            err(t.span, format!("expected {what}"))
        }
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == tok)
    }

    fn head_ident(&self) -> Option<&'a str> {
        match (self.peek(), self.peek_at(1)) {
            (
                Some(Token {
                    tok: Tok::LParen, ..
                }),
                Some(Token {
                    tok: Tok::Ident(s), ..
                }),
            ) => Some(s.as_str()),
            _ => None,
        }
    }

    fn fresh_loc(&mut self) -> Loc {
        let l = Loc(self.st.next_loc);
        self.st.next_loc += 1;
        l
    }

    fn module(&mut self) -> PResult<Module> {
        let mut defs = Vec::new();
        let mut main = None;
        while let Some(t) = self.peek() {
            if main.is_some() {
                return err(t.span, "unexpected form after the main expression");
            }
            let save = self.pos;
            if let Some(head @ ("def" | "defrec")) = self.head_ident() {
                let open = self.bump()?.span;
                self.bump()?;
                let pattern = self.pattern()?;
                let value = self.expr()?;
                if self.at(&Tok::RParen) {
                    let close = self.bump()?.span;
                    self.record_aliases(&pattern, &value);
                    defs.push(TopDef {
                        pattern,
                        value,
                        rec: head == "defrec",
                        span: open.to(close),
                    });
                    continue;
                }
                // Three-argument form: an ordinary expression.
                self.pos = save;
            }
            main = Some(self.expr()?);
        }
        Ok(Module { defs, main })
    }

    fn record_aliases(&mut self, p: &Pattern, e: &Expr) {
        match (p, &e.kind) {
            (Pattern::Var(name), ExprKind::Num(n)) => self.st.aliases.push((n.loc, name.clone())),
            (Pattern::Cons(ph, pt), ExprKind::Cons(eh, et)) => {
                self.record_aliases(ph, eh);
                self.record_aliases(pt, et);
            }
            _ => {}
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let t = self.bump()?;
        let span = t.span;
        match &t.tok {
            Tok::Num {
                value,
                freeze,
                range,
                digits,
            } => {
                let loc = self.fresh_loc();
                Ok(Expr::new(
                    ExprKind::Num(NumLit {
                        value: *value,
                        loc,
                        freeze: *freeze,
                        range: *range,
                        span: *digits,
                    }),
                    span,
                ))
            }
            Tok::Str(s) => Ok(Expr::new(ExprKind::Str(s.clone()), span)),
            Tok::Ident(s) => self.ident_expr(s, span),
            Tok::LBracket => self.list_expr(span),
            Tok::LParen => self.form(span),
            Tok::RParen | Tok::RBracket | Tok::Bar => err(span, "unexpected delimiter"),
            Tok::Lambda => err(span, "lambda must be enclosed in parentheses"),
        }
    }

    fn ident_expr(&mut self, s: &str, span: Span) -> PResult<Expr> {
        match s {
            "true" => return Ok(Expr::new(ExprKind::Bool(true), span)),
            "false" => return Ok(Expr::new(ExprKind::Bool(false), span)),
            _ => {}
        }
        if RESERVED.contains(&s) {
            return err(span, format!("'{s}' cannot be used as a variable"));
        }
        if let Some(op) = Op::from_name(s) {
            return Ok(self.eta_expand(op, span));
        }
        let name = self.st.intern(s);
        Ok(Expr::new(ExprKind::Var(name), span))
    }

    /// A bare operator used as a value becomes a curried function.
    fn eta_expand(&mut self, op: Op, span: Span) -> Expr {
        let params: Vec<Name> = ["x", "y"][..op.arity()]
            .iter()
            .map(|p| self.st.intern(p))
            .collect();
        let args = params
            .iter()
            .map(|p| Expr::new(ExprKind::Var(p.clone()), span))
            .collect();
        let body = Expr::new(ExprKind::Prim(op, args), span);
        params.into_iter().rev().fold(body, |body, p| {
            Expr::new(
                ExprKind::Fun(Arc::new(FunDef {
                    param: Pattern::Var(p),
                    body,
                })),
                span,
            )
        })
    }

    fn list_expr(&mut self, open: Span) -> PResult<Expr> {
        let mut items = Vec::new();
        let mut tail = None;
        loop {
            let Some(t) = self.peek() else {
                return err(open, "unclosed '['");
            };
            match t.tok {
                Tok::RBracket => break,
                Tok::Bar => {
                    self.bump()?;
                    if items.is_empty() {
                        return err(t.span, "'|' needs at least one element before it");
                    }
                    tail = Some(self.expr()?);
                    if !self.at(&Tok::RBracket) {
                        return err(self.peek().map_or(self.eof, |t| t.span), "expected ']'");
                    }
                    break;
                }
                _ => items.push(self.expr()?),
            }
        }
        let close = self.bump()?.span;
        let span = open.to(close);
        let mut acc = tail.unwrap_or_else(|| Expr::new(ExprKind::Nil, close));
        for item in items.into_iter().rev() {
            let s = item.span.to(acc.span);
            acc = Expr::new(ExprKind::Cons(Box::new(item), Box::new(acc)), s);
        }
        acc.span = span;
        Ok(acc)
    }

    fn close(&mut self, open: Span) -> PResult<Span> {
        match self.peek() {
            Some(Token {
                tok: Tok::RParen,
                span,
            }) => {
                self.pos += 1;
                Ok(open.to(*span))
            }
            Some(t) => err(t.span, "expected ')'"),
            None => err(open, "unclosed '('"),
        }
    }

    fn form(&mut self, open: Span) -> PResult<Expr> {
        let Some(head) = self.peek() else {
            return err(open, "unclosed '('");
        };
        if head.tok == Tok::Lambda {
            self.bump()?;
            return self.lambda(open);
        }
        if let Tok::Ident(s) = &head.tok {
            match s.as_str() {
                "let" | "letrec" | "def" | "defrec" => {
                    self.bump()?;
                    let rec = s.ends_with("rec");
                    let p = self.pattern()?;
                    let e1 = self.expr()?;
                    let e2 = self.expr()?;
                    let span = self.close(open)?;
                    self.record_aliases(&p, &e1);
                    let (b1, b2) = (Box::new(e1), Box::new(e2));
                    let kind = if rec {
                        ExprKind::LetRec(p, b1, b2)
                    } else {
                        ExprKind::Let(p, b1, b2)
                    };
                    return Ok(Expr::new(kind, span));
                }
                "if" => {
                    self.bump()?;
                    let c = self.expr()?;
                    let a = self.expr()?;
                    let b = self.expr()?;
                    let span = self.close(open)?;
                    return Ok(Expr::new(
                        ExprKind::Case(
                            Box::new(c),
                            vec![(Pattern::Bool(true), a), (Pattern::Bool(false), b)],
                        ),
                        span,
                    ));
                }
                "case" => {
                    self.bump()?;
                    let scrut = self.expr()?;
                    let mut branches = Vec::new();
                    while self.at(&Tok::LParen) {
                        let bopen = self.bump()?.span;
                        let p = self.pattern()?;
                        let e = self.expr()?;
                        self.close(bopen)?;
                        branches.push((p, e));
                    }
                    let span = self.close(open)?;
                    if branches.is_empty() {
                        return err(span, "case needs at least one branch");
                    }
                    return Ok(Expr::new(ExprKind::Case(Box::new(scrut), branches), span));
                }
                name => {
                    if let Some(op) = Op::from_name(name) {
                        let hspan = head.span;
                        self.bump()?;
                        let mut args = Vec::new();
                        while !self.at(&Tok::RParen) && self.peek().is_some() {
                            args.push(self.expr()?);
                        }
                        let span = self.close(open)?;
                        if args.len() != op.arity() {
                            return err(
                                hspan,
                                format!(
                                    "'{}' expects {} argument(s), got {}",
                                    op.name(),
                                    op.arity(),
                                    args.len()
                                ),
                            );
                        }
                        return Ok(Expr::new(ExprKind::Prim(op, args), span));
                    }
                    if is_operator_symbol(name) {
                        return err(head.span, format!("unknown primitive '{name}'"));
                    }
                }
            }
        }
        let f = self.expr()?;
        let mut args = Vec::new();
        while !self.at(&Tok::RParen) && self.peek().is_some() {
            args.push(self.expr()?);
        }
        let span = self.close(open)?;
        if args.is_empty() {
            return err(span, "application needs at least one argument");
        }
        Ok(args.into_iter().fold(f, |acc, a| {
            Expr::new(ExprKind::App(Box::new(acc), Box::new(a)), span)
        }))
    }

    fn lambda(&mut self, open: Span) -> PResult<Expr> {
        let params = if self.at(&Tok::LParen) {
            let popen = self.bump()?.span;
            let mut ps = Vec::new();
            while !self.at(&Tok::RParen) && self.peek().is_some() {
                ps.push(self.pattern_unchecked()?);
            }
            self.close(popen)?;
            if ps.is_empty() {
                return err(popen, "lambda needs at least one parameter");
            }
            ps
        } else {
            vec![self.pattern_unchecked()?]
        };
        let mut seen = Vec::new();
        for p in &params {
            p.binders(&mut seen);
        }
        check_distinct(&seen, open)?;
        let body = self.expr()?;
        let span = self.close(open)?;
        Ok(params.into_iter().rev().fold(body, |body, param| {
            Expr::new(ExprKind::Fun(Arc::new(FunDef { param, body })), span)
        }))
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let start = self.peek().map_or(self.eof, |t| t.span);
        let p = self.pattern_unchecked()?;
        let mut seen = Vec::new();
        p.binders(&mut seen);
        check_distinct(&seen, start)?;
        Ok(p)
    }

    fn pattern_unchecked(&mut self) -> PResult<Pattern> {
        let t = self.bump()?;
        match &t.tok {
            Tok::Num {
                value,
                freeze,
                range,
                ..
            } => {
                if *freeze != Freeze::Plain || range.is_some() {
                    return err(t.span, "annotations are not allowed in patterns");
                }
                Ok(Pattern::Num(*value))
            }
            Tok::Str(s) => Ok(Pattern::Str(s.clone())),
            Tok::Ident(s) => match s.as_str() {
                "true" => Ok(Pattern::Bool(true)),
                "false" => Ok(Pattern::Bool(false)),
                "_" => Ok(Pattern::Wildcard),
                s if RESERVED.contains(&s) || Op::from_name(s).is_some() => {
                    err(t.span, format!("'{s}' cannot be bound"))
                }
                s if is_operator_symbol(s) => err(t.span, format!("'{s}' cannot be bound")),
                s => Ok(Pattern::Var(self.st.intern(s))),
            },
            Tok::LBracket => {
                let mut items = Vec::new();
                let mut tail = Pattern::Nil;
                loop {
                    match self.peek().map(|t| &t.tok) {
                        None => return err(t.span, "unclosed '['"),
                        Some(Tok::RBracket) => break,
                        Some(Tok::Bar) => {
                            let bar = self.bump()?.span;
                            if items.is_empty() {
                                return err(bar, "'|' needs at least one element before it");
                            }
                            tail = self.pattern_unchecked()?;
                            break;
                        }
                        Some(_) => items.push(self.pattern_unchecked()?),
                    }
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |acc, p| Pattern::Cons(Box::new(p), Box::new(acc))))
            }
            _ => err(t.span, "expected a pattern"),
        }
    }
}

fn is_operator_symbol(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| "+-*/<>=!?%^&~".contains(c))
}

fn check_distinct(names: &[Name], span: Span) -> PResult<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return err(span, format!("duplicate pattern variable '{n}'"));
        }
    }
    Ok(())
}

/// Parses one source text. Fresh locations continue from `st.next_loc`.
pub fn parse_module(src: &str, origin: Origin, st: &mut ParseState) -> Result<Module, ParseError> {
    let toks = tokenize(src, origin).map_err(|e| ParseError {
        message: e.message,
        span: e.span,
    })?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        eof: Span::new(origin, src.len(), src.len()),
        st,
    };
    p.module()
}

/// Parses a standalone expression with locations starting at 1.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut st = ParseState::new();
    let m = parse_module(src, Origin::User, &mut st)?;
    match m.to_expr() {
        Some(e) => Ok(e),
        None => err(
            Span::new(Origin::User, 0, src.len()),
            "program has no main expression",
        ),
    }
}

/// Formats a number as the shortest decimal that reads back to the same value.
pub fn format_number(n: f64) -> String {
    n.to_string()
}

fn write_literal(out: &mut String, n: &NumLit) {
    out.push_str(&format_number(n.value));
    match n.freeze {
        Freeze::Plain => {}
        Freeze::Frozen => out.push('!'),
        Freeze::Thawed => out.push('?'),
    }
    if let Some((lo, hi)) = n.range {
        let _ = write!(out, "{{{}-{}}}", format_number(lo), format_number(hi));
    }
}

fn write_pattern(out: &mut String, p: &Pattern) {
    match p {
        Pattern::Var(n) => out.push_str(n.as_str()),
        Pattern::Wildcard => out.push('_'),
        Pattern::Num(n) => out.push_str(&format_number(*n)),
        Pattern::Str(s) => {
            let _ = write!(out, "'{s}'");
        }
        Pattern::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Pattern::Nil => out.push_str("[]"),
        Pattern::Cons(_, _) => {
            out.push('[');
            let mut cur = p;
            let mut first = true;
            while let Pattern::Cons(h, t) = cur {
                if !first {
                    out.push(' ');
                }
                first = false;
                write_pattern(out, h);
                cur = t;
            }
            if *cur != Pattern::Nil {
                out.push_str(" | ");
                write_pattern(out, cur);
            }
            out.push(']');
        }
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Num(n) => write_literal(out, n),
        ExprKind::Str(s) => {
            let _ = write!(out, "'{s}'");
        }
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Nil => out.push_str("[]"),
        ExprKind::Cons(_, _) => {
            out.push('[');
            let mut cur = e;
            let mut first = true;
            while let ExprKind::Cons(h, t) = &cur.kind {
                if !first {
                    out.push(' ');
                }
                first = false;
                write_expr(out, h);
                cur = t;
            }
            if cur.kind != ExprKind::Nil {
                out.push_str(" | ");
                write_expr(out, cur);
            }
            out.push(']');
        }
        ExprKind::Var(n) => out.push_str(n.as_str()),
        ExprKind::Fun(def) => {
            out.push_str("(\\");
            write_pattern(out, &def.param);
            out.push(' ');
            write_expr(out, &def.body);
            out.push(')');
        }
        ExprKind::App(_, _) => {
            let mut args = Vec::new();
            let mut cur = e;
            while let ExprKind::App(f, a) = &cur.kind {
                args.push(&**a);
                cur = f;
            }
            out.push('(');
            write_expr(out, cur);
            for a in args.iter().rev() {
                out.push(' ');
                write_expr(out, a);
            }
            out.push(')');
        }
        ExprKind::Prim(op, args) => {
            out.push('(');
            out.push_str(op.name());
            for a in args {
                out.push(' ');
                write_expr(out, a);
            }
            out.push(')');
        }
        ExprKind::Let(p, a, b) | ExprKind::LetRec(p, a, b) => {
            out.push_str(if matches!(e.kind, ExprKind::Let(..)) {
                "(let "
            } else {
                "(letrec "
            });
            write_pattern(out, p);
            out.push(' ');
            write_expr(out, a);
            out.push('\n');
            write_expr(out, b);
            out.push(')');
        }
        ExprKind::Case(scrut, branches) => {
            out.push_str("(case ");
            write_expr(out, scrut);
            for (p, b) in branches {
                out.push_str(" (");
                write_pattern(out, p);
                out.push(' ');
                write_expr(out, b);
                out.push(')');
            }
            out.push(')');
        }
    }
}

/// Prints an expression in concrete syntax. Sugar is not restored, but the
/// output parses back to the same tree with the same location order.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}
