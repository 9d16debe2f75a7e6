//! Local updates from changed output numbers.
//!
//! A user update names some output numbers (the hard constraints) and new
//! values for them. Each one gives an equation `target = trace`; solving one
//! equation per hard constraint, each for one unfrozen location, yields a
//! candidate substitution.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::program::Program;
use crate::solver::solve;
use crate::subst::Substitution;
use crate::svg::{value_at, ValuePath};
use crate::syntax::Loc;
use crate::trace::{locs_of, Trace};
use crate::value::Value;

/// Default bound on the number of location tuples tried per request.
pub const DEFAULT_CAP: usize = 10_000;

/// Tolerance used when checking an output number against its target.
pub fn close(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-9 * libm::fabs(b).max(1.0)
}

/// A value tree in which some numbers have been replaced by numbered holes.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueContext {
    Hole(usize),
    Leaf(Value),
    Cons(alloc::boxed::Box<(ValueContext, ValueContext)>),
}

impl ValueContext {
    /// Punches holes at `paths`; hole `i` sits at `paths[i]`. `None` when a
    /// path does not lead to a number.
    pub fn new(root: &Value, paths: &[ValuePath]) -> Option<ValueContext> {
        for p in paths {
            if !matches!(value_at(root, p), Some(Value::Num(..))) {
                return None;
            }
        }
        let holes: BTreeMap<&[u32], usize> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i))
            .collect();
        let mut path = Vec::new();
        Some(build(root, &mut path, &holes))
    }

    /// Fills the holes in order.
    pub fn fill(&self, values: &[Value]) -> Value {
        match self {
            ValueContext::Hole(i) => values[*i].clone(),
            ValueContext::Leaf(v) => v.clone(),
            ValueContext::Cons(c) => Value::cons(c.0.fill(values), c.1.fill(values)),
        }
    }

    /// Structural similarity: equal shapes, holes in the same places, and
    /// numbers with equal traces, whatever their values.
    pub fn similar(&self, other: &ValueContext) -> bool {
        match (self, other) {
            (ValueContext::Hole(a), ValueContext::Hole(b)) => a == b,
            (ValueContext::Leaf(Value::Num(_, ta)), ValueContext::Leaf(Value::Num(_, tb))) => {
                ta == tb
            }
            (ValueContext::Leaf(a), ValueContext::Leaf(b)) => a == b,
            (ValueContext::Cons(a), ValueContext::Cons(b)) => {
                a.0.similar(&b.0) && a.1.similar(&b.1)
            }
            _ => false,
        }
    }
}

/// Walks a cons spine. `path` addresses the list; list elements get the next
/// index appended.
fn build(v: &Value, path: &mut Vec<u32>, holes: &BTreeMap<&[u32], usize>) -> ValueContext {
    if let Some(i) = holes.get(path.as_slice()) {
        return ValueContext::Hole(*i);
    }
    match v {
        Value::Cons(_) => build_spine(v, 0, path, holes),
        _ => ValueContext::Leaf(v.clone()),
    }
}

fn build_spine(
    v: &Value,
    index: u32,
    path: &mut Vec<u32>,
    holes: &BTreeMap<&[u32], usize>,
) -> ValueContext {
    match v {
        Value::Cons(c) => {
            path.push(index);
            let head = build(&c.0, path, holes);
            path.pop();
            let tail = build_spine(&c.1, index + 1, path, holes);
            ValueContext::Cons(alloc::boxed::Box::new((head, tail)))
        }
        _ => ValueContext::Leaf(v.clone()),
    }
}

/// Every number inside a value with its path, in document order.
pub fn numbers_with_paths(root: &Value) -> Vec<(ValuePath, f64, Trace)> {
    fn go(v: &Value, path: &mut Vec<u32>, out: &mut Vec<(ValuePath, f64, Trace)>) {
        match v {
            Value::Num(n, t) => out.push((path.clone(), *n, t.clone())),
            Value::Cons(_) => {
                let mut cur = v;
                let mut i = 0;
                while let Value::Cons(c) = cur {
                    path.push(i);
                    go(&c.0, path, out);
                    path.pop();
                    cur = &c.1;
                    i += 1;
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(root, &mut Vec::new(), &mut out);
    out
}

/// An output number and the value it should have (hard) or had (soft).
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub path: ValuePath,
    pub value: f64,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateRequest {
    pub hard: Vec<Constraint>,
    pub soft: Vec<Constraint>,
}

impl UpdateRequest {
    /// Request in which the numbers at the given paths take new values and
    /// every other number of `root` is soft. `None` if a path does not lead
    /// to a number.
    pub fn from_edits(root: &Value, edits: &[(ValuePath, f64)]) -> Option<UpdateRequest> {
        let mut hard = Vec::new();
        for (p, target) in edits {
            let Some(Value::Num(_, t)) = value_at(root, p) else {
                return None;
            };
            hard.push(Constraint {
                path: p.clone(),
                value: *target,
                trace: t.clone(),
            });
        }
        let edited: BTreeSet<&ValuePath> = edits.iter().map(|(p, _)| p).collect();
        let soft = numbers_with_paths(root)
            .into_iter()
            .filter(|(p, ..)| !edited.contains(p))
            .map(|(path, value, trace)| Constraint { path, value, trace })
            .collect();
        Some(UpdateRequest { hard, soft })
    }

    /// Paths of all constrained numbers, hard first.
    pub fn paths(&self) -> Vec<ValuePath> {
        self.hard
            .iter()
            .chain(&self.soft)
            .map(|c| c.path.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferOptions {
    /// Only consider locations that no other hard equation depends on.
    pub disjoint: bool,
    /// Most location tuples to try.
    pub cap: usize,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            disjoint: false,
            cap: DEFAULT_CAP,
        }
    }
}

/// One inferred local update.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// The solved bindings, one per hard constraint, in order.
    pub bindings: Vec<(Loc, f64)>,
    /// The initial substitution extended with `bindings`.
    pub rho: Substitution,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Inference {
    pub candidates: Vec<Candidate>,
    /// Set when the location tuples were cut off at the cap.
    pub truncated: bool,
}

/// Candidate location sets, one per hard constraint.
pub fn location_choices(
    req: &UpdateRequest,
    frozen: &BTreeSet<Loc>,
    disjoint: bool,
) -> Vec<Vec<Loc>> {
    let sets: Vec<BTreeSet<Loc>> = req.hard.iter().map(|c| locs_of(&c.trace, frozen)).collect();
    sets.iter()
        .enumerate()
        .map(|(i, s)| {
            s.iter()
                .copied()
                .filter(|l| {
                    !disjoint
                        || sets
                            .iter()
                            .enumerate()
                            .all(|(j, o)| j == i || !o.contains(l))
                })
                .collect()
        })
        .collect()
}

/// Calls `f` on each tuple of the cartesian product in lexicographic order,
/// stopping after `cap` tuples. Returns whether tuples were left over.
pub fn for_each_tuple<T: Copy>(factors: &[Vec<T>], cap: usize, mut f: impl FnMut(&[T])) -> bool {
    if factors.iter().any(Vec::is_empty) {
        return false;
    }
    let mut idx = alloc::vec![0usize; factors.len()];
    let mut tuple: Vec<T> = factors.iter().map(|f| f[0]).collect();
    let mut seen = 0;
    loop {
        if seen == cap {
            return true;
        }
        f(&tuple);
        seen += 1;
        let mut k = factors.len();
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < factors[k].len() {
                tuple[k] = factors[k][idx[k]];
                break;
            }
            idx[k] = 0;
            tuple[k] = factors[k][0];
        }
    }
}

/// Solves each hard equation for one location per tuple of candidate
/// locations and keeps the tuples where every equation is solvable.
pub fn infer_local_updates(
    rho0: &Substitution,
    req: &UpdateRequest,
    frozen: &BTreeSet<Loc>,
    opts: InferOptions,
) -> Inference {
    let choices = location_choices(req, frozen, opts.disjoint);
    let mut out = Inference::default();
    if req.hard.is_empty() {
        return out;
    }
    let mut seen: BTreeSet<Vec<(Loc, u64)>> = BTreeSet::new();
    out.truncated = for_each_tuple(&choices, opts.cap, |tuple| {
        let mut bindings = Vec::with_capacity(tuple.len());
        for (c, l) in req.hard.iter().zip(tuple) {
            match solve(rho0, *l, c.value, &c.trace) {
                Ok(k) => bindings.push((*l, k)),
                Err(_) => return,
            }
        }
        let effect: BTreeMap<Loc, u64> = bindings.iter().map(|(l, k)| (*l, k.to_bits())).collect();
        if !seen.insert(effect.into_iter().collect()) {
            return;
        }
        let mut rho = rho0.clone();
        for (l, k) in &bindings {
            rho.push(*l, *k);
        }
        out.candidates.push(Candidate { bindings, rho });
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Every manipulated number reaches its target.
    Faithful,
    /// The new output is not structurally similar to the old one, so the
    /// targets cannot be compared.
    FaithfulVacuous,
    /// At least one manipulated number reaches its target.
    Plausible,
    Neither,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Faithful => "Faithful",
            Classification::FaithfulVacuous => "FaithfulVacuous",
            Classification::Plausible => "Plausible",
            Classification::Neither => "Neither",
        }
    }
}

/// Outcome of classifying an update, with a note when re-running failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub class: Classification,
    pub note: Option<String>,
}

/// Re-runs `program` under `rho` and compares the output against `req`.
pub fn classify_update(program: &Program, req: &UpdateRequest, rho: &Substitution) -> Verdict {
    let neither = |note: String| Verdict {
        class: Classification::Neither,
        note: Some(note),
    };
    let before = match program.eval() {
        Ok(v) => v,
        Err(e) => return neither(alloc::format!("original program fails: {e}")),
    };
    let updated = match program.apply(rho) {
        Ok(p) => p,
        Err(e) => return neither(alloc::format!("updated program does not parse: {e}")),
    };
    let after = match updated.eval() {
        Ok(v) => v,
        Err(e) => return neither(alloc::format!("updated program fails: {e}")),
    };
    classify_values(&before, &after, req)
}

/// Compares two outputs of the same program before and after an update.
pub fn classify_values(before: &Value, after: &Value, req: &UpdateRequest) -> Verdict {
    let paths = req.paths();
    let vacuous = Verdict {
        class: Classification::FaithfulVacuous,
        note: Some("the updated output has a different structure".into()),
    };
    let (Some(old), Some(new)) = (
        ValueContext::new(before, &paths),
        ValueContext::new(after, &paths),
    ) else {
        return vacuous;
    };
    if !old.similar(&new) {
        return vacuous;
    }
    let hits = req
        .hard
        .iter()
        .filter(
            |c| matches!(value_at(after, &c.path), Some(Value::Num(n, _)) if close(*n, c.value)),
        )
        .count();
    let class = if hits == req.hard.len() {
        Classification::Faithful
    } else if hits > 0 {
        Classification::Plausible
    } else {
        Classification::Neither
    };
    Verdict { class, note: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::FreezeOptions;
    use crate::svg::index_canvas;

    fn num(n: f64, l: u32) -> Value {
        Value::Num(n, Trace::loc(Loc(l)))
    }

    #[test]
    fn similarity_rules() {
        let a = Value::list([num(1.0, 1), Value::Str("s".into())]);
        let b = Value::list([num(9.0, 1), Value::Str("s".into())]);
        let c = Value::list([num(1.0, 2), Value::Str("s".into())]);
        let d = Value::list([num(1.0, 1)]);
        let ctx = |v: &Value| ValueContext::new(v, &[]).unwrap();
        assert!(ctx(&a).similar(&ctx(&a)));
        assert!(ctx(&a).similar(&ctx(&b)));
        assert!(!ctx(&a).similar(&ctx(&c)));
        assert!(!ctx(&a).similar(&ctx(&d)));
    }

    #[test]
    fn holes_round_trip() {
        let v = Value::list([num(1.0, 1), Value::list([num(2.0, 2), num(3.0, 3)])]);
        let ctx = ValueContext::new(&v, &[alloc::vec![1, 0], alloc::vec![0]]).unwrap();
        let back = ctx.fill(&[num(2.0, 2), num(1.0, 1)]);
        assert_eq!(back, v);
        assert!(ValueContext::new(&v, &[alloc::vec![5]]).is_none());
    }

    #[test]
    fn tuples_in_lex_order_with_cap() {
        let mut seen = Vec::new();
        let left = for_each_tuple(&[alloc::vec![1, 2], alloc::vec![3, 4, 5]], 4, |t| {
            seen.push(t.to_vec())
        });
        assert!(left);
        assert_eq!(seen, [[1, 3], [1, 4], [1, 5], [2, 3]]);
        assert!(!for_each_tuple(&[alloc::vec![1]], 4, |_| {}));
        assert!(!for_each_tuple::<u8>(&[alloc::vec![]], 4, |_| panic!()));
    }

    fn third_box_request(p: &Program) -> (Value, UpdateRequest) {
        let v = p.eval().unwrap();
        let canvas = index_canvas(&v).unwrap();
        let x = canvas.shapes[2].attr("x").unwrap();
        assert_eq!(x.value, 110.0);
        let req = UpdateRequest::from_edits(&v, &[(x.path.clone(), 155.0)]).unwrap();
        (v, req)
    }

    #[test]
    fn third_box_candidates() {
        let p = Program::parse(crate::corpus::example("sineWaveOfBoxes").unwrap()).unwrap();
        let (_, req) = third_box_request(&p);
        let frozen = p.frozen_set(FreezeOptions::default());
        let inf = infer_local_updates(&p.rho0(), &req, &frozen, InferOptions::default());
        let vals: Vec<f64> = inf.candidates.iter().map(|c| c.bindings[0].1).collect();
        assert_eq!(vals, [95.0, 52.5]);
        for c in &inf.candidates {
            assert_eq!(
                classify_update(&p, &req, &c.rho).class,
                Classification::Faithful
            );
        }
        let all = p.frozen_set(FreezeOptions {
            freeze_prelude: false,
            freeze_default: false,
        });
        let inf = infer_local_updates(&p.rho0(), &req, &all, InferOptions::default());
        let mut vals: Vec<f64> = inf.candidates.iter().map(|c| c.bindings[0].1).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, [1.5, 1.75, 52.5, 95.0]);
    }

    #[test]
    fn identity_is_faithful_and_frozen_trace_has_no_candidates() {
        let p = Program::parse("(svg [(rect 'red' 10! 20 30 40)])").unwrap();
        let v = p.eval().unwrap();
        let x = index_canvas(&v).unwrap().shapes[0]
            .attr("x")
            .unwrap()
            .clone();
        let same = UpdateRequest::from_edits(&v, &[(x.path.clone(), 10.0)]).unwrap();
        assert_eq!(
            classify_update(&p, &same, &p.rho0()).class,
            Classification::Faithful
        );
        let moved = UpdateRequest::from_edits(&v, &[(x.path, 15.0)]).unwrap();
        let frozen = p.frozen_set(FreezeOptions::default());
        let inf = infer_local_updates(&p.rho0(), &moved, &frozen, InferOptions::default());
        assert!(inf.candidates.is_empty());
        assert_eq!(
            classify_update(&p, &moved, &p.rho0()).class,
            Classification::Neither
        );
    }

    #[test]
    fn disjoint_choices_drop_shared_locations() {
        let p = Program::parse("(svg [(let xy 100 (rect 'red' xy (+ xy 1) 60 40))])").unwrap();
        let v = p.eval().unwrap();
        let s = &index_canvas(&v).unwrap().shapes[0];
        let edits = [
            (s.attr("x").unwrap().path.clone(), 130.0),
            (s.attr("y").unwrap().path.clone(), 111.0),
        ];
        let req = UpdateRequest::from_edits(&v, &edits).unwrap();
        let frozen = p.frozen_set(FreezeOptions::default());
        let shared = location_choices(&req, &frozen, false);
        assert_eq!(shared[0].len(), 1);
        assert_eq!(shared[1].len(), 2);
        let only = location_choices(&req, &frozen, true);
        assert!(only[0].is_empty());
        assert_eq!(only[1].len(), 1);
    }

    #[test]
    fn changed_structure_is_vacuous() {
        let p =
            Program::parse("(let n 2 (svg (map (\\i (rect 'red' i 0 5 5)) (range 1 n))))").unwrap();
        let v = p.eval().unwrap();
        let x = index_canvas(&v).unwrap().shapes[1]
            .attr("x")
            .unwrap()
            .clone();
        let req = UpdateRequest::from_edits(&v, &[(x.path, 2.0)]).unwrap();
        let n = p.locs_named("n")[0];
        let verdict = classify_update(&p, &req, &p.rho0().with(n, 3.0));
        assert_eq!(verdict.class, Classification::FaithfulVacuous);
    }
}
