//! Big-step tracing evaluator.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::syntax::{Expr, ExprKind, Name, Op, Pattern, Span};
use crate::trace::{apply_num, Trace, TraceError};
use crate::value::{Closure, Env, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalErrorKind {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("no case branch matches {0}")]
    MatchFailure(String),
    #[error("cannot apply a {0}")]
    NotAFunction(&'static str),
    #[error("'{op}' cannot be applied to {args}")]
    Type { op: &'static str, args: String },
    #[error("'{0}' is undefined for its arguments")]
    Domain(&'static str),
    #[error("{0}")]
    User(String),
    #[error("evaluation exceeded the maximum depth")]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// Nearest enclosing source span.
    pub span: Span,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub max_depth: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_depth: 2000 }
    }
}

pub fn eval(e: &Expr) -> Result<Value, EvalError> {
    eval_with(e, EvalOptions::default())
}

pub fn eval_with(e: &Expr, opts: EvalOptions) -> Result<Value, EvalError> {
    let mut ev = Evaluator { depth: 0, opts };
    ev.eval(&Env::empty(), e)
}

struct Evaluator {
    depth: usize,
    opts: EvalOptions,
}

fn fail<T>(kind: EvalErrorKind, span: Span) -> Result<T, EvalError> {
    Err(EvalError { kind, span })
}

/// Binds the variables of `p` to the matching parts of `v`.
pub fn match_pattern(p: &Pattern, v: &Value, out: &mut Vec<(Name, Value)>) -> bool {
    match (p, v) {
        (Pattern::Var(n), _) => {
            out.push((n.clone(), v.clone()));
            true
        }
        (Pattern::Wildcard, _) => true,
        (Pattern::Num(a), Value::Num(b, _)) => a == b,
        (Pattern::Str(a), Value::Str(b)) => **a == **b,
        (Pattern::Bool(a), Value::Bool(b)) => a == b,
        (Pattern::Nil, Value::Nil) => true,
        (Pattern::Cons(ph, pt), Value::Cons(c)) => {
            match_pattern(ph, &c.0, out) && match_pattern(pt, &c.1, out)
        }
        _ => false,
    }
}

fn describe(args: &[Value]) -> String {
    let names: Vec<&str> = args.iter().map(Value::type_name).collect();
    if names.is_empty() {
        String::from("no arguments")
    } else {
        names.join(" and ")
    }
}

impl Evaluator {
    fn eval(&mut self, env: &Env, e: &Expr) -> Result<Value, EvalError> {
        self.depth += 1;
        if self.depth > self.opts.max_depth {
            self.depth -= 1;
            return fail(EvalErrorKind::TooDeep, e.span);
        }
        let r = self.eval_inner(env, e);
        self.depth -= 1;
        r
    }

    fn eval_inner(&mut self, env: &Env, e: &Expr) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Num(n) => Ok(Value::Num(n.value, Trace::loc(n.loc))),
            ExprKind::Str(s) => Ok(Value::Str(Arc::from(s.as_str()))),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Nil => Ok(Value::Nil),
            ExprKind::Cons(h, t) => {
                let hv = self.eval(env, h)?;
                let tv = self.eval(env, t)?;
                Ok(Value::cons(hv, tv))
            }
            ExprKind::Var(x) => match env.lookup(x) {
                Some(v) => Ok(v),
                None => fail(EvalErrorKind::Unbound(String::from(x.as_str())), e.span),
            },
            ExprKind::Fun(def) => Ok(Value::Closure(Arc::new(Closure {
                fun: def.clone(),
                env: env.clone(),
            }))),
            ExprKind::App(f, a) => {
                let fv = self.eval(env, f)?;
                let av = self.eval(env, a)?;
                self.apply(fv, av, e.span)
            }
            ExprKind::Prim(op, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(env, a)?);
                }
                prim(*op, &vals).map_err(|kind| EvalError { kind, span: e.span })
            }
            ExprKind::Let(p, e1, e2) => {
                let v = self.eval(env, e1)?;
                let mut binds = Vec::new();
                if !match_pattern(p, &v, &mut binds) {
                    return fail(EvalErrorKind::MatchFailure(format!("{v:?}")), e1.span);
                }
                let env2 = binds
                    .into_iter()
                    .fold(env.clone(), |acc, (n, v)| acc.bind(n, v));
                self.eval(&env2, e2)
            }
            ExprKind::LetRec(p, e1, e2) => {
                let v = self.eval(env, e1)?;
                let mut binds = Vec::new();
                if !match_pattern(p, &v, &mut binds) {
                    return fail(EvalErrorKind::MatchFailure(format!("{v:?}")), e1.span);
                }
                let env2 = env.bind_rec(binds);
                self.eval(&env2, e2)
            }
            ExprKind::Case(scrut, branches) => {
                let v = self.eval(env, scrut)?;
                for (p, body) in branches {
                    let mut binds = Vec::new();
                    if match_pattern(p, &v, &mut binds) {
                        let env2 = binds
                            .into_iter()
                            .fold(env.clone(), |acc, (n, v)| acc.bind(n, v));
                        return self.eval(&env2, body);
                    }
                }
                fail(EvalErrorKind::MatchFailure(format!("{v:?}")), e.span)
            }
        }
    }

    fn apply(&mut self, f: Value, arg: Value, span: Span) -> Result<Value, EvalError> {
        let Value::Closure(c) = f else {
            return fail(EvalErrorKind::NotAFunction(f.type_name()), span);
        };
        let mut binds = Vec::new();
        if !match_pattern(&c.fun.param, &arg, &mut binds) {
            return fail(EvalErrorKind::MatchFailure(format!("{arg:?}")), span);
        }
        let env = binds
            .into_iter()
            .fold(c.env.clone(), |acc, (n, v)| acc.bind(n, v));
        self.eval(&env, &c.fun.body)
    }
}

fn prim(op: Op, args: &[Value]) -> Result<Value, EvalErrorKind> {
    let type_err = || EvalErrorKind::Type {
        op: op.name(),
        args: describe(args),
    };
    match op {
        Op::Not => match args {
            [Value::Bool(b)] => Ok(Value::Bool(!b)),
            _ => Err(type_err()),
        },
        Op::ToString => Ok(Value::Str(Arc::from(args[0].display_string().as_str()))),
        Op::Error => Err(EvalErrorKind::User(args[0].display_string())),
        Op::Eq => args[0]
            .prim_eq(&args[1])
            .map(Value::Bool)
            .ok_or_else(type_err),
        Op::Lt | Op::Gt | Op::Le | Op::Ge => match args {
            [Value::Num(a, _), Value::Num(b, _)] => Ok(Value::Bool(match op {
                Op::Lt => a < b,
                Op::Gt => a > b,
                Op::Le => a <= b,
                _ => a >= b,
            })),
            [Value::Str(a), Value::Str(b)] => Ok(Value::Bool(match op {
                Op::Lt => a < b,
                Op::Gt => a > b,
                Op::Le => a <= b,
                _ => a >= b,
            })),
            _ => Err(type_err()),
        },
        Op::Add => match args {
            [Value::Str(a), Value::Str(b)] => {
                let mut s = String::from(&**a);
                s.push_str(b);
                Ok(Value::Str(Arc::from(s.as_str())))
            }
            _ => numeric(op, args).ok_or_else(type_err)?,
        },
        _ => numeric(op, args).ok_or_else(type_err)?,
    }
}

/// `None` when an argument is not a number.
fn numeric(op: Op, args: &[Value]) -> Option<Result<Value, EvalErrorKind>> {
    let mut nums = [0.0; 2];
    let mut traces = Vec::with_capacity(args.len());
    for (slot, a) in nums.iter_mut().zip(args) {
        let (n, t) = a.as_num()?;
        *slot = n;
        traces.push(t.clone());
    }
    Some(match apply_num(op, &nums[..args.len()]) {
        Ok(n) => Ok(Value::Num(n, Trace::op(op, traces))),
        Err(TraceError::Domain(op)) => Err(EvalErrorKind::Domain(op.name())),
        Err(TraceError::Unbound(_)) => unreachable!("primitive application has no locations"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;
    use crate::syntax::Loc;
    use crate::trace::TraceNode;

    fn run(s: &str) -> Result<Value, EvalError> {
        eval(&parse_expr(s).unwrap())
    }

    #[test]
    fn literal_has_location_trace() {
        let v = run("5").unwrap();
        assert_eq!(v, Value::Num(5.0, Trace::loc(Loc(1))));
    }

    #[test]
    fn op_builds_trace() {
        let v = run("(+ 1 (* 2 3))").unwrap();
        assert_eq!(format!("{v:?}"), "7|(+ l1 (* l2 l3))");
    }

    #[test]
    fn recursion_through_letrec() {
        let v = run("(letrec f (\\n (if (< n 1) 0 (+ 1 (f (- n 1))))) (f 3))").unwrap();
        assert_eq!(v.as_num().unwrap().0, 3.0);
        match v.as_num().unwrap().1.node() {
            TraceNode::Op(Op::Add, _) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strings_concatenate_and_compare_without_trace() {
        assert_eq!(run("(+ 'a' 'b')").unwrap(), Value::Str(Arc::from("ab")));
        assert_eq!(run("(< 1 2)").unwrap(), Value::Bool(true));
        assert_eq!(run("(= [1 'x'] [1 'x'])").unwrap(), Value::Bool(true));
        assert_eq!(run("(toString 2.5)").unwrap(), Value::Str(Arc::from("2.5")));
    }

    #[test]
    fn errors_carry_spans() {
        let e = run("(let x 1\n  (+ x y))").unwrap_err();
        assert_eq!(e.kind, EvalErrorKind::Unbound("y".into()));
        assert_eq!((e.span.start, e.span.end), (16, 17));
        assert!(matches!(
            run("(1 2)").unwrap_err().kind,
            EvalErrorKind::NotAFunction("number")
        ));
        assert!(matches!(
            run("(/ 1 0)").unwrap_err().kind,
            EvalErrorKind::Domain("/")
        ));
        assert!(matches!(
            run("(case 3 (4 0))").unwrap_err().kind,
            EvalErrorKind::MatchFailure(_)
        ));
        assert!(matches!(
            run("(+ 1 'a')").unwrap_err().kind,
            EvalErrorKind::Type { .. }
        ));
        assert_eq!(
            run("(error 'bad')").unwrap_err().kind,
            EvalErrorKind::User("bad".into())
        );
    }

    #[test]
    fn depth_guard() {
        let e = parse_expr("(letrec f (\\n (f n)) (f 1))").unwrap();
        let err = eval_with(&e, EvalOptions { max_depth: 200 }).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::TooDeep);
    }
}
