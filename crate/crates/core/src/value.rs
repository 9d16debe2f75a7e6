use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::parser::format_number;
use crate::syntax::{FunDef, Name};
use crate::trace::Trace;

/// Run-time values. Every number carries its trace.
#[derive(Clone)]
pub enum Value {
    Num(f64, Trace),
    Str(Arc<str>),
    Bool(bool),
    Nil,
    Cons(Arc<(Value, Value)>),
    Closure(Arc<Closure>),
}

pub struct Closure {
    pub fun: Arc<FunDef>,
    pub env: Env,
}

impl Value {
    pub fn cons(h: Value, t: Value) -> Value {
        Value::Cons(Arc::new((h, t)))
    }

    pub fn list(items: impl IntoIterator<Item = Value, IntoIter: DoubleEndedIterator>) -> Value {
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |acc, v| Value::cons(v, acc))
    }

    pub fn as_num(&self) -> Option<(f64, &Trace)> {
        match self {
            Value::Num(n, t) => Some((*n, t)),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Elements of a proper list, or `None` for anything else.
    pub fn as_list(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Nil => return Some(out),
                Value::Cons(c) => {
                    out.push(&c.0);
                    cur = &c.1;
                }
                _ => return None,
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Num(..) => "number",
            Value::Str(_) => "string",
            Value::Bool(_) => "boolean",
            Value::Nil | Value::Cons(_) => "list",
            Value::Closure(_) => "function",
        }
    }

    /// Equality used by the `=` primitive: numbers by value, data structurally.
    /// Functions are never equal.
    pub fn prim_eq(&self, other: &Value) -> Option<bool> {
        Some(match (self, other) {
            (Value::Num(a, _), Value::Num(b, _)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Nil, Value::Nil) => true,
            (Value::Cons(a), Value::Cons(b)) => a.0.prim_eq(&b.0)? && a.1.prim_eq(&b.1)?,
            (Value::Closure(_), _) | (_, Value::Closure(_)) => return None,
            _ => false,
        })
    }

    /// Text produced by `toString`.
    pub fn display_string(&self) -> String {
        let mut s = String::new();
        self.write_plain(&mut s);
        s
    }

    fn write_plain(&self, out: &mut String) {
        match self {
            Value::Num(n, _) => out.push_str(&format_number(*n)),
            Value::Str(s) => out.push_str(s),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::Nil | Value::Cons(_) => {
                out.push('[');
                let mut cur = self;
                let mut first = true;
                while let Value::Cons(c) = cur {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    c.0.write_plain(out);
                    cur = &c.1;
                }
                if !matches!(cur, Value::Nil) {
                    out.push_str(" | ");
                    cur.write_plain(out);
                }
                out.push(']');
            }
            Value::Closure(_) => out.push_str("<fun>"),
        }
    }
}

/// Structural equality: numbers compare value and trace, closures compare
/// their function definitions.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Num(a, ta), Value::Num(b, tb)) => a.to_bits() == b.to_bits() && ta == tb,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Nil, Value::Nil) => true,
            (Value::Cons(a), Value::Cons(b)) => Arc::ptr_eq(a, b) || (a.0 == b.0 && a.1 == b.1),
            (Value::Closure(a), Value::Closure(b)) => Arc::ptr_eq(&a.fun, &b.fun) || a.fun == b.fun,
            _ => false,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n, t) => write!(f, "{}|{}", format_number(*n), t),
            Value::Str(s) => write!(f, "'{s}'"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nil | Value::Cons(_) => {
                f.write_str("[")?;
                let mut cur = self;
                let mut first = true;
                while let Value::Cons(c) = cur {
                    if !first {
                        f.write_str(" ")?;
                    }
                    first = false;
                    write!(f, "{:?}", c.0)?;
                    cur = &c.1;
                }
                if !matches!(cur, Value::Nil) {
                    write!(f, " | {cur:?}")?;
                }
                f.write_str("]")
            }
            Value::Closure(_) => f.write_str("<fun>"),
        }
    }
}

pub(crate) enum Frame {
    Bind(Name, Value, Env),
    /// Bindings of a `letrec`. Closures created directly in `next` are
    /// re-closed over this frame when looked up, which ties the knot.
    Rec(Vec<(Name, Value)>, Env),
}

/// Persistent environment.
#[derive(Clone, Default)]
pub struct Env(pub(crate) Option<Arc<Frame>>);

impl Env {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Value) -> Env {
        Env(Some(Arc::new(Frame::Bind(name, value, self.clone()))))
    }

    pub fn bind_rec(&self, binds: Vec<(Name, Value)>) -> Env {
        Env(Some(Arc::new(Frame::Rec(binds, self.clone()))))
    }

    fn ptr_eq(&self, other: &Env) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    pub fn lookup(&self, name: &Name) -> Option<Value> {
        let mut cur = self;
        while let Some(frame) = &cur.0 {
            match &**frame {
                Frame::Bind(n, v, next) => {
                    if n == name {
                        return Some(v.clone());
                    }
                    cur = next;
                }
                Frame::Rec(binds, next) => {
                    if let Some((_, v)) = binds.iter().find(|(n, _)| n == name) {
                        return Some(match v {
                            Value::Closure(c) if c.env.ptr_eq(next) => {
                                Value::Closure(Arc::new(Closure {
                                    fun: c.fun.clone(),
                                    env: cur.clone(),
                                }))
                            }
                            other => other.clone(),
                        });
                    }
                    cur = next;
                }
            }
        }
        None
    }
}
