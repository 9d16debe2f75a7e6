//! Abstract syntax of the language.
//!
//! Every numeric literal carries a [`Loc`] assigned by the parser in source
//! order (prelude first), an optional freeze/thaw annotation and an optional
//! slider range. Sugar (`def`, `if`, multi-argument functions, list literals)
//! is expanded by the parser, so the evaluator only sees the core forms below.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Identifier of a numeric literal in the parsed program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(pub u32);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Which source text a location or span belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Prelude,
    User,
}

/// Byte range in one of the two source texts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub origin: Origin,
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub const fn new(origin: Origin, start: usize, end: usize) -> Self {
        Span {
            origin,
            start: start as u32,
            end: end as u32,
        }
    }

    pub fn to(self, other: Span) -> Span {
        Span {
            origin: self.origin,
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// Location annotation written after a literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Freeze {
    #[default]
    Plain,
    /// `!`: synthesis never changes the literal.
    Frozen,
    /// `?`: the literal stays changeable when constants are frozen by default.
    Thawed,
}

#[derive(Debug, Clone, Copy)]
pub struct NumLit {
    pub value: f64,
    pub loc: Loc,
    pub freeze: Freeze,
    pub range: Option<(f64, f64)>,
    /// Span of the digits only, excluding annotations.
    pub span: Span,
}

/// Like expressions, literals compare without their spans.
impl PartialEq for NumLit {
    fn eq(&self, other: &Self) -> bool {
        self.value.to_bits() == other.value.to_bits()
            && self.loc == other.loc
            && self.freeze == other.freeze
            && self.range == other.range
    }
}

/// Interned identifier. Equal names produced by one parse share storage, so
/// comparison usually succeeds on the pointer check.
#[derive(Clone, Eq)]
pub struct Name(pub Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Name {
    #[inline]
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Var(Name),
    Wildcard,
    Num(f64),
    Str(String),
    Bool(bool),
    Nil,
    Cons(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    /// Variables bound by the pattern, left to right.
    pub fn binders(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(n) => out.push(n.clone()),
            Pattern::Cons(h, t) => {
                h.binders(out);
                t.binders(out);
            }
            _ => {}
        }
    }
}

/// Primitive operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Pi,
    Not,
    Cos,
    Sin,
    ArcCos,
    ArcSin,
    Round,
    Floor,
    Ceiling,
    Sqrt,
    ToString,
    Error,
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Mod,
    Pow,
    ArcTan2,
}

impl Op {
    pub const ALL: [Op; 24] = [
        Op::Pi,
        Op::Not,
        Op::Cos,
        Op::Sin,
        Op::ArcCos,
        Op::ArcSin,
        Op::Round,
        Op::Floor,
        Op::Ceiling,
        Op::Sqrt,
        Op::ToString,
        Op::Error,
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Lt,
        Op::Gt,
        Op::Le,
        Op::Ge,
        Op::Eq,
        Op::Mod,
        Op::Pow,
        Op::ArcTan2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::Pi => "pi",
            Op::Not => "not",
            Op::Cos => "cos",
            Op::Sin => "sin",
            Op::ArcCos => "arccos",
            Op::ArcSin => "arcsin",
            Op::Round => "round",
            Op::Floor => "floor",
            Op::Ceiling => "ceiling",
            Op::Sqrt => "sqrt",
            Op::ToString => "toString",
            Op::Error => "error",
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Lt => "<",
            Op::Gt => ">",
            Op::Le => "<=",
            Op::Ge => ">=",
            Op::Eq => "=",
            Op::Mod => "mod",
            Op::Pow => "pow",
            Op::ArcTan2 => "arctan2",
        }
    }

    pub fn from_name(s: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Op::Pi => 0,
            Op::Not
            | Op::Cos
            | Op::Sin
            | Op::ArcCos
            | Op::ArcSin
            | Op::Round
            | Op::Floor
            | Op::Ceiling
            | Op::Sqrt
            | Op::ToString
            | Op::Error => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Function literal shared between the AST and the closures built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct FunDef {
    pub param: Pattern,
    pub body: Expr,
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Spans are ignored: two expressions are equal when their trees are.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(NumLit),
    Str(String),
    Bool(bool),
    Nil,
    Cons(Box<Expr>, Box<Expr>),
    Var(Name),
    Fun(Arc<FunDef>),
    App(Box<Expr>, Box<Expr>),
    Prim(Op, Vec<Expr>),
    Let(Pattern, Box<Expr>, Box<Expr>),
    LetRec(Pattern, Box<Expr>, Box<Expr>),
    Case(Box<Expr>, Vec<(Pattern, Expr)>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Visits every numeric literal in pre-order.
    pub fn for_each_literal<'a>(&'a self, f: &mut impl FnMut(&'a NumLit)) {
        match &self.kind {
            ExprKind::Num(n) => f(n),
            ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Nil | ExprKind::Var(_) => {}
            ExprKind::Cons(a, b)
            | ExprKind::App(a, b)
            | ExprKind::Let(_, a, b)
            | ExprKind::LetRec(_, a, b) => {
                a.for_each_literal(f);
                b.for_each_literal(f);
            }
            ExprKind::Fun(def) => def.body.for_each_literal(f),
            ExprKind::Prim(_, args) => args.iter().for_each(|a| a.for_each_literal(f)),
            ExprKind::Case(scrut, branches) => {
                scrut.for_each_literal(f);
                for (_, e) in branches {
                    e.for_each_literal(f);
                }
            }
        }
    }

    /// Rebuilds the tree with every literal passed through `f`.
    pub fn map_literals(&self, f: &mut impl FnMut(&NumLit) -> NumLit) -> Expr {
        let kind = match &self.kind {
            ExprKind::Num(n) => ExprKind::Num(f(n)),
            ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Nil | ExprKind::Var(_) => {
                self.kind.clone()
            }
            ExprKind::Cons(a, b) => {
                ExprKind::Cons(Box::new(a.map_literals(f)), Box::new(b.map_literals(f)))
            }
            ExprKind::App(a, b) => {
                ExprKind::App(Box::new(a.map_literals(f)), Box::new(b.map_literals(f)))
            }
            ExprKind::Let(p, a, b) => ExprKind::Let(
                p.clone(),
                Box::new(a.map_literals(f)),
                Box::new(b.map_literals(f)),
            ),
            ExprKind::LetRec(p, a, b) => ExprKind::LetRec(
                p.clone(),
                Box::new(a.map_literals(f)),
                Box::new(b.map_literals(f)),
            ),
            ExprKind::Fun(def) => ExprKind::Fun(Arc::new(FunDef {
                param: def.param.clone(),
                body: def.body.map_literals(f),
            })),
            ExprKind::Prim(op, args) => {
                ExprKind::Prim(*op, args.iter().map(|a| a.map_literals(f)).collect())
            }
            ExprKind::Case(scrut, branches) => ExprKind::Case(
                Box::new(scrut.map_literals(f)),
                branches
                    .iter()
                    .map(|(p, e)| (p.clone(), e.map_literals(f)))
                    .collect(),
            ),
        };
        Expr::new(kind, self.span)
    }
}
