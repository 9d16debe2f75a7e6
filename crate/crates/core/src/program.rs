//! A parsed program together with the prelude it runs against.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::eval::{eval_with, EvalError, EvalOptions};
use crate::lexer::line_col;
use crate::parser::{format_number, parse_module, print_expr, Module, ParseError, ParseState};
use crate::subst::Substitution;
use crate::syntax::{Expr, Freeze, Loc, Name, NumLit, Origin, Span};
use crate::value::Value;

/// The bundled prelude.
pub const PRELUDE: &str = include_str!("prelude.little");

/// Which literals synthesis may not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreezeOptions {
    /// Freeze every prelude literal.
    pub freeze_prelude: bool,
    /// Freeze every user literal that is not thawed with `?`.
    pub freeze_default: bool,
}

impl Default for FreezeOptions {
    fn default() -> Self {
        FreezeOptions {
            freeze_prelude: true,
            freeze_default: false,
        }
    }
}

/// Error positioned in one of the two source texts.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}:{line}:{col}: {message}", origin_name(*origin))]
pub struct SourceError {
    pub origin: Origin,
    pub line: usize,
    pub col: usize,
    pub span: Span,
    pub message: String,
}

fn origin_name(o: Origin) -> &'static str {
    match o {
        Origin::Prelude => "prelude",
        Origin::User => "program",
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    prelude_src: Arc<str>,
    source: Arc<str>,
    user: Module,
    expr: Expr,
    literals: BTreeMap<Loc, NumLit>,
    aliases: BTreeMap<Loc, Name>,
    first_user_loc: u32,
}

impl Program {
    pub fn parse(source: &str) -> Result<Program, SourceError> {
        Self::parse_with_prelude(source, PRELUDE)
    }

    pub fn parse_with_prelude(source: &str, prelude: &str) -> Result<Program, SourceError> {
        let mut st = ParseState::new();
        let pre = parse_module(prelude, Origin::Prelude, &mut st)
            .map_err(|e| position(prelude, source, e))?;
        if let Some(main) = &pre.main {
            return Err(position(
                prelude,
                source,
                ParseError {
                    message: "the prelude may only contain definitions".into(),
                    span: main.span,
                },
            ));
        }
        let first_user_loc = st.next_loc;
        let user = parse_module(source, Origin::User, &mut st)
            .map_err(|e| position(prelude, source, e))?;
        let Some(main) = user.to_expr() else {
            return Err(position(
                prelude,
                source,
                ParseError {
                    message: "program has no main expression".into(),
                    span: Span::new(Origin::User, source.len(), source.len()),
                },
            ));
        };
        let expr = pre.wrap(main);
        let mut literals = BTreeMap::new();
        expr.for_each_literal(&mut |n| {
            literals.insert(n.loc, *n);
        });
        let mut aliases = BTreeMap::new();
        for (l, n) in st.aliases {
            aliases.entry(l).or_insert(n);
        }
        Ok(Program {
            prelude_src: Arc::from(prelude),
            source: Arc::from(source),
            user,
            expr,
            literals,
            aliases,
            first_user_loc,
        })
    }

    /// Program text, excluding the prelude.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn prelude_source(&self) -> &str {
        &self.prelude_src
    }

    /// Same as [`Program::source`]: literal edits are spliced into the text,
    /// so layout and comments survive.
    pub fn unparse(&self) -> String {
        String::from(&*self.source)
    }

    /// Canonical rendering of the user program without the original layout.
    pub fn unparse_canonical(&self) -> String {
        self.user
            .to_expr()
            .map(|e| print_expr(&e))
            .unwrap_or_default()
    }

    /// Whole program with prelude definitions wrapped around it.
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// User module (definitions and main expression).
    pub fn user_module(&self) -> &Module {
        &self.user
    }

    pub fn literals(&self) -> impl Iterator<Item = &NumLit> {
        self.literals.values()
    }

    pub fn literal(&self, l: Loc) -> Option<&NumLit> {
        self.literals.get(&l)
    }

    pub fn is_prelude(&self, l: Loc) -> bool {
        l.0 < self.first_user_loc
    }

    /// Variable name a literal was bound to, if any.
    pub fn alias(&self, l: Loc) -> Option<&Name> {
        self.aliases.get(&l)
    }

    /// Human-readable name: the alias when there is one, otherwise `l<id>`.
    pub fn loc_name(&self, l: Loc) -> String {
        match self.alias(l) {
            Some(n) => String::from(n.as_str()),
            None => alloc::format!("{l}"),
        }
    }

    /// Locations bound to `name`, user program first.
    pub fn locs_named(&self, name: &str) -> Vec<Loc> {
        let mut v: Vec<Loc> = self
            .aliases
            .iter()
            .filter(|(_, n)| n.as_str() == name)
            .map(|(l, _)| *l)
            .collect();
        v.sort_by_key(|l| (self.is_prelude(*l), *l));
        v
    }

    /// Initial substitution: every literal mapped to its value.
    pub fn rho0(&self) -> Substitution {
        self.literals.values().map(|n| (n.loc, n.value)).collect()
    }

    pub fn frozen_set(&self, opts: FreezeOptions) -> BTreeSet<Loc> {
        self.literals
            .values()
            .filter(|n| match n.freeze {
                Freeze::Frozen => true,
                Freeze::Thawed => false,
                Freeze::Plain => {
                    if self.is_prelude(n.loc) {
                        opts.freeze_prelude
                    } else {
                        opts.freeze_default
                    }
                }
            })
            .map(|n| n.loc)
            .collect()
    }

    pub fn eval(&self) -> Result<Value, EvalError> {
        self.eval_with(EvalOptions::default())
    }

    pub fn eval_with(&self, opts: EvalOptions) -> Result<Value, EvalError> {
        eval_with(&self.expr, opts)
    }

    /// Positions an evaluation error in the source it came from.
    pub fn locate(&self, span: Span, message: String) -> SourceError {
        position(
            &self.prelude_src,
            &self.source,
            ParseError { message, span },
        )
    }

    /// Applies `rho` by rewriting the changed literals in the source text and
    /// parsing the result. Annotations and layout are kept, and locations keep
    /// their ids.
    pub fn apply(&self, rho: &Substitution) -> Result<Program, SourceError> {
        let mut user_edits = Vec::new();
        let mut prelude_edits = Vec::new();
        for (l, v) in rho.resolved() {
            let Some(lit) = self.literals.get(l) else {
                continue;
            };
            if lit.value.to_bits() == v.to_bits() {
                continue;
            }
            let edit = (
                lit.span.start as usize,
                lit.span.end as usize,
                format_number(*v),
            );
            match lit.span.origin {
                Origin::User => user_edits.push(edit),
                Origin::Prelude => prelude_edits.push(edit),
            }
        }
        if user_edits.is_empty() && prelude_edits.is_empty() {
            return Ok(self.clone());
        }
        let source = splice(&self.source, user_edits);
        let prelude = splice(&self.prelude_src, prelude_edits);
        Program::parse_with_prelude(&source, &prelude)
    }
}

fn splice(src: &str, mut edits: Vec<(usize, usize, String)>) -> String {
    edits.sort_by_key(|e| core::cmp::Reverse(e.0));
    let mut out = String::from(src);
    for (start, end, text) in edits {
        out.replace_range(start..end, &text);
    }
    out
}

fn position(prelude: &str, source: &str, e: ParseError) -> SourceError {
    let text = match e.span.origin {
        Origin::Prelude => prelude,
        Origin::User => source,
    };
    let (line, col) = line_col(text, e.span.start as usize);
    SourceError {
        origin: e.span.origin,
        line,
        col,
        span: e.span,
        message: e.message,
    }
}

/// Replaces every bound literal of `e` with its rightmost binding in `rho`.
pub fn apply_substitution(rho: &Substitution, e: &Expr) -> Expr {
    e.map_literals(&mut |n| match rho.get(n.loc) {
        Some(v) => NumLit { value: v, ..*n },
        None => *n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prelude_parses_and_is_frozen() {
        let p = Program::parse("(svg [])").unwrap();
        let frozen = p.frozen_set(FreezeOptions::default());
        assert!(p
            .literals()
            .filter(|n| p.is_prelude(n.loc))
            .all(|n| frozen.contains(&n.loc)));
        assert!(p.eval().is_ok());
    }

    #[test]
    fn thaw_and_freeze_default() {
        let p = Program::parse("[1 2? 3!]").unwrap();
        let user: Vec<Loc> = p
            .literals()
            .filter(|n| !p.is_prelude(n.loc))
            .map(|n| n.loc)
            .collect();
        let opts = FreezeOptions {
            freeze_prelude: true,
            freeze_default: true,
        };
        let frozen = p.frozen_set(opts);
        assert!(frozen.contains(&user[0]));
        assert!(!frozen.contains(&user[1]));
        assert!(frozen.contains(&user[2]));
        let loose = p.frozen_set(FreezeOptions::default());
        assert!(!loose.contains(&user[0]) && loose.contains(&user[2]));
    }

    #[test]
    fn apply_splices_literal_text() {
        let p = Program::parse("; c\n(def x 12!{3-30})  [x 4]").unwrap();
        let l = p.locs_named("x")[0];
        let q = p.apply(&p.rho0().with(l, 7.5)).unwrap();
        assert_eq!(q.source(), "; c\n(def x 7.5!{3-30})  [x 4]");
        assert_eq!(q.literal(l).unwrap().value, 7.5);
        assert_eq!(p.apply(&p.rho0()).unwrap().source(), p.source());
    }

    #[test]
    fn errors_are_positioned() {
        let e = Program::parse("(svg\n  (foo").unwrap_err();
        assert_eq!(e.origin, Origin::User);
        assert_eq!(e.line, 2);
        let e = Program::parse("(def x 1)").unwrap_err();
        assert!(e.message.contains("main"));
    }
}
