//! Expression traces and the numeric primitive interpreter they share with
//! the evaluator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::subst::Substitution;
use crate::syntax::{Loc, Op};

#[derive(Debug, Clone, PartialEq)]
pub enum TraceNode {
    Loc(Loc),
    Op(Op, Vec<Trace>),
}

/// Data-flow record of how a number was computed.
#[derive(Clone)]
pub struct Trace(Arc<TraceNode>);

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Trace {
    pub fn loc(l: Loc) -> Self {
        Trace(Arc::new(TraceNode::Loc(l)))
    }

    pub fn op(op: Op, args: Vec<Trace>) -> Self {
        debug_assert_eq!(op.arity(), args.len());
        Trace(Arc::new(TraceNode::Op(op, args)))
    }

    pub fn node(&self) -> &TraceNode {
        &self.0
    }

    /// Number of times `l` appears as a leaf.
    pub fn occurrences(&self, l: Loc) -> usize {
        match self.node() {
            TraceNode::Loc(x) => usize::from(*x == l),
            TraceNode::Op(_, args) => args.iter().map(|a| a.occurrences(l)).sum(),
        }
    }

    pub fn contains(&self, l: Loc) -> bool {
        match self.node() {
            TraceNode::Loc(x) => *x == l,
            TraceNode::Op(_, args) => args.iter().any(|a| a.contains(l)),
        }
    }

    /// Adds the leaf counts of this trace into `counts`.
    pub fn count_leaves(&self, counts: &mut BTreeMap<Loc, u64>) {
        match self.node() {
            TraceNode::Loc(x) => *counts.entry(*x).or_default() += 1,
            TraceNode::Op(_, args) => args.iter().for_each(|a| a.count_leaves(counts)),
        }
    }

    /// All leaf locations.
    pub fn leaves(&self, out: &mut BTreeSet<Loc>) {
        match self.node() {
            TraceNode::Loc(x) => {
                out.insert(*x);
            }
            TraceNode::Op(_, args) => args.iter().for_each(|a| a.leaves(out)),
        }
    }

    /// Canonical s-expression, e.g. `(+ l5 (* l2 l9))`.
    pub fn to_sexp(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            TraceNode::Loc(l) => write!(f, "{l}"),
            TraceNode::Op(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Non-frozen leaf locations of `t`.
pub fn locs_of(t: &Trace, frozen: &BTreeSet<Loc>) -> BTreeSet<Loc> {
    let mut all = BTreeSet::new();
    t.leaves(&mut all);
    all.retain(|l| !frozen.contains(l));
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("location {0} is unbound")]
    Unbound(Loc),
    #[error("'{0}' is undefined for its arguments")]
    Domain(Op),
}

/// Applies a numeric primitive. Division by zero and results that are not
/// finite are domain errors.
pub fn apply_num(op: Op, args: &[f64]) -> Result<f64, TraceError> {
    let a = || args[0];
    let b = || args[1];
    let r = match op {
        Op::Pi => core::f64::consts::PI,
        Op::Cos => libm::cos(a()),
        Op::Sin => libm::sin(a()),
        Op::ArcCos => libm::acos(a()),
        Op::ArcSin => libm::asin(a()),
        Op::Round => libm::round(a()),
        Op::Floor => libm::floor(a()),
        Op::Ceiling => libm::ceil(a()),
        Op::Sqrt => libm::sqrt(a()),
        Op::Add => a() + b(),
        Op::Sub => a() - b(),
        Op::Mul => a() * b(),
        Op::Div => {
            if b() == 0.0 {
                return Err(TraceError::Domain(op));
            }
            a() / b()
        }
        Op::Mod => {
            if b() == 0.0 {
                return Err(TraceError::Domain(op));
            }
            a() - b() * libm::floor(a() / b())
        }
        Op::Pow => libm::pow(a(), b()),
        Op::ArcTan2 => libm::atan2(a(), b()),
        Op::Not | Op::ToString | Op::Error | Op::Lt | Op::Gt | Op::Le | Op::Ge | Op::Eq => {
            return Err(TraceError::Domain(op))
        }
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(TraceError::Domain(op))
    }
}

/// Whether `op` maps numbers to a number and so extends traces.
pub fn is_numeric_op(op: Op) -> bool {
    !matches!(
        op,
        Op::Not | Op::ToString | Op::Error | Op::Lt | Op::Gt | Op::Le | Op::Ge | Op::Eq
    )
}

/// Interprets a trace with leaf values taken from `rho`.
pub fn eval_trace(rho: &Substitution, t: &Trace) -> Result<f64, TraceError> {
    match t.node() {
        TraceNode::Loc(l) => rho.get(*l).ok_or(TraceError::Unbound(*l)),
        TraceNode::Op(op, args) => {
            let mut vals = [0.0; 2];
            for (slot, a) in vals.iter_mut().zip(args) {
                *slot = eval_trace(rho, a)?;
            }
            apply_num(*op, &vals[..args.len()])
        }
    }
}
