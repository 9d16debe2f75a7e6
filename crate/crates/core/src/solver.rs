//! Univariate value-trace equation solving: given `n = t` and a location
//! `ℓ` in `t`, find a value for `ℓ` that makes the trace evaluate to `n`.
//!
//! Two strategies are combined. The addition-only strategy counts how often
//! `ℓ` occurs in a trace built from `+` alone. The inversion strategy peels
//! one operator at a time while `ℓ` lies on exactly one side of it.

use crate::subst::Substitution;
use crate::syntax::{Loc, Op};
use crate::trace::{eval_trace, Trace, TraceError, TraceNode};

/// Divisors smaller than this are treated as zero.
pub const DIVISOR_EPS: f64 = 1e-12;

/// Relative tolerance a solution must meet when checked against its trace.
pub const CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FailReason {
    #[error("trace is not addition-only")]
    NotInFragment,
    #[error("location {0} is unbound")]
    Unbound(Loc),
    #[error("location occurs more than once")]
    MultipleOccurrences,
    #[error("'{0}' cannot be inverted")]
    NonInvertibleOp(Op),
    #[error("no solution in the operator's domain")]
    DomainError,
    #[error("location does not occur in the trace")]
    LocAbsent,
}

impl FailReason {
    /// Short code used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            FailReason::NotInFragment => "NotInFragment",
            FailReason::Unbound(_) => "Unbound",
            FailReason::MultipleOccurrences => "MultipleOccurrences",
            FailReason::NonInvertibleOp(_) => "NonInvertibleOp",
            FailReason::DomainError => "DomainError",
            FailReason::LocAbsent => "LocAbsent",
        }
    }
}

/// Failure of the combined solver, with the reason from each strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("addition-only: {addition}; inversion: {inversion}")]
pub struct SolveError {
    pub addition: FailReason,
    pub inversion: FailReason,
}

impl SolveError {
    /// The more informative of the two reasons.
    pub fn reason(&self) -> FailReason {
        match self.inversion {
            FailReason::LocAbsent => self.addition,
            r => r,
        }
    }
}

fn from_trace(e: TraceError) -> FailReason {
    match e {
        TraceError::Unbound(l) => FailReason::Unbound(l),
        TraceError::Domain(_) => FailReason::DomainError,
    }
}

fn finite(x: f64) -> Result<f64, FailReason> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FailReason::DomainError)
    }
}

fn divide(a: f64, d: f64) -> Result<f64, FailReason> {
    if libm::fabs(d) < DIVISOR_EPS {
        Err(FailReason::DomainError)
    } else {
        finite(a / d)
    }
}

/// For a trace of `+` and leaves: how many times `l` occurs, and the sum of
/// the other leaves under `rho`.
pub fn count_plus(rho: &Substitution, l: Loc, t: &Trace) -> Result<(f64, f64), FailReason> {
    match t.node() {
        TraceNode::Loc(x) if *x == l => Ok((1.0, 0.0)),
        TraceNode::Loc(x) => rho.get(*x).map(|v| (0.0, v)).ok_or(FailReason::Unbound(*x)),
        TraceNode::Op(Op::Add, args) => {
            let (c1, s1) = count_plus(rho, l, &args[0])?;
            let (c2, s2) = count_plus(rho, l, &args[1])?;
            Ok((c1 + c2, s1 + s2))
        }
        TraceNode::Op(..) => Err(FailReason::NotInFragment),
    }
}

/// Addition-only strategy: `(n - s) / c`.
pub fn solve_a(rho: &Substitution, l: Loc, n: f64, t: &Trace) -> Result<f64, FailReason> {
    let (c, s) = count_plus(rho, l, t)?;
    if c == 0.0 {
        return Err(FailReason::LocAbsent);
    }
    finite((n - s) / c)
}

/// Solves `op(x) = n` for `x`.
pub fn invert_unary(op: Op, n: f64) -> Result<f64, FailReason> {
    match op {
        Op::Cos | Op::Sin if !(-1.0..=1.0).contains(&n) => Err(FailReason::DomainError),
        Op::Cos => Ok(libm::acos(n)),
        Op::Sin => Ok(libm::asin(n)),
        Op::ArcCos if !(0.0..=core::f64::consts::PI).contains(&n) => Err(FailReason::DomainError),
        Op::ArcCos => Ok(libm::cos(n)),
        Op::ArcSin if libm::fabs(n) > core::f64::consts::FRAC_PI_2 => Err(FailReason::DomainError),
        Op::ArcSin => Ok(libm::sin(n)),
        Op::Sqrt if n < 0.0 => Err(FailReason::DomainError),
        Op::Sqrt => finite(n * n),
        _ => Err(FailReason::NonInvertibleOp(op)),
    }
}

/// Solves `op(known, x) = n` for `x`.
pub fn invert_left(op: Op, known: f64, n: f64) -> Result<f64, FailReason> {
    match op {
        Op::Add => finite(n - known),
        Op::Sub => finite(known - n),
        Op::Mul => divide(n, known),
        Op::Div => divide(known, n),
        Op::Pow => {
            if known <= 0.0 || known == 1.0 || n <= 0.0 {
                return Err(FailReason::DomainError);
            }
            divide(libm::log(n), libm::log(known))
        }
        _ => Err(FailReason::NonInvertibleOp(op)),
    }
}

/// Solves `op(x, known) = n` for `x`.
pub fn invert_right(op: Op, known: f64, n: f64) -> Result<f64, FailReason> {
    match op {
        Op::Add => finite(n - known),
        Op::Sub => finite(n + known),
        Op::Mul => divide(n, known),
        Op::Div => finite(n * known),
        Op::Pow => {
            let inv = divide(1.0, known)?;
            let odd_int = libm::fmod(libm::fabs(known), 2.0) == 1.0;
            let base = if n < 0.0 && odd_int {
                -libm::pow(-n, inv)
            } else {
                libm::pow(n, inv)
            };
            let base = finite(base)?;
            let back = libm::pow(base, known);
            if libm::fabs(back - n) <= 1e-9 * libm::fabs(n).max(1.0) {
                Ok(base)
            } else {
                Err(FailReason::DomainError)
            }
        }
        _ => Err(FailReason::NonInvertibleOp(op)),
    }
}

/// Inversion strategy alone: succeeds only when `l` occurs exactly once.
pub fn solve_b(rho: &Substitution, l: Loc, n: f64, t: &Trace) -> Result<f64, FailReason> {
    match t.occurrences(l) {
        0 => Err(FailReason::LocAbsent),
        1 => peel(rho, l, n, t, false),
        _ => Err(FailReason::MultipleOccurrences),
    }
}

/// Walks down to `l`, inverting one operator per step. With `mixed`, any
/// subtree that is addition-only is finished by [`solve_a`].
fn peel(rho: &Substitution, l: Loc, n: f64, t: &Trace, mixed: bool) -> Result<f64, FailReason> {
    if mixed {
        if let Ok(k) = solve_a(rho, l, n, t) {
            return Ok(k);
        }
    }
    match t.node() {
        TraceNode::Loc(x) if *x == l => Ok(n),
        TraceNode::Loc(_) => Err(FailReason::LocAbsent),
        TraceNode::Op(op, args) if args.len() == 1 => {
            let inner = invert_unary(*op, n)?;
            peel(rho, l, inner, &args[0], mixed)
        }
        TraceNode::Op(op, args) if args.len() == 2 => {
            match (args[0].contains(l), args[1].contains(l)) {
                (true, true) => Err(FailReason::MultipleOccurrences),
                (false, false) => Err(FailReason::LocAbsent),
                (true, false) => {
                    let known = eval_trace(rho, &args[1]).map_err(from_trace)?;
                    let inner = invert_right(*op, known, n)?;
                    peel(rho, l, inner, &args[0], mixed)
                }
                (false, true) => {
                    let known = eval_trace(rho, &args[0]).map_err(from_trace)?;
                    let inner = invert_left(*op, known, n)?;
                    peel(rho, l, inner, &args[1], mixed)
                }
            }
        }
        TraceNode::Op(..) => Err(FailReason::LocAbsent),
    }
}

/// Combined solver. Operators are peeled while `l` sits on one side, and any
/// addition-only subtree reached on the way is solved by counting. The result
/// is checked by re-evaluating the trace.
pub fn solve(rho: &Substitution, l: Loc, n: f64, t: &Trace) -> Result<f64, SolveError> {
    let addition = match solve_a(rho, l, n, t) {
        Ok(k) => return Ok(k),
        Err(e) => e,
    };
    let fail = |inversion| SolveError {
        addition,
        inversion,
    };
    let k = peel(rho, l, n, t, true).map_err(fail)?;
    let mut check = rho.clone();
    check.push(l, k);
    match eval_trace(&check, t) {
        Ok(v) if libm::fabs(v - n) <= CHECK_TOLERANCE * libm::fabs(n).max(1.0) => Ok(k),
        Ok(_) => Err(fail(FailReason::DomainError)),
        Err(e) => Err(fail(from_trace(e))),
    }
}

/// Whether `t` contains only `+` and leaves.
pub fn is_addition_only(t: &Trace) -> bool {
    match t.node() {
        TraceNode::Loc(_) => true,
        TraceNode::Op(Op::Add, args) => args.iter().all(is_addition_only),
        TraceNode::Op(..) => false,
    }
}

/// Operators the inversion strategy can see through.
pub fn is_invertible(op: Op) -> bool {
    matches!(
        op,
        Op::Add
            | Op::Sub
            | Op::Mul
            | Op::Div
            | Op::Pow
            | Op::Cos
            | Op::Sin
            | Op::ArcCos
            | Op::ArcSin
            | Op::Sqrt
    )
}

/// Whether the equation's shape is one [`solve`] handles, ignoring values:
/// a chain of invertible operators with `l` on one side, ending at `l` or at
/// an addition-only subtree containing `l`.
pub fn in_fragment(l: Loc, t: &Trace) -> bool {
    if is_addition_only(t) {
        return t.contains(l);
    }
    match t.node() {
        TraceNode::Loc(x) => *x == l,
        TraceNode::Op(op, args) => {
            if !is_invertible(*op) {
                return false;
            }
            let holders: alloc::vec::Vec<&Trace> = args.iter().filter(|a| a.contains(l)).collect();
            holders.len() == 1 && in_fragment(l, holders[0])
        }
    }
}
