//! Choosing, for every zone of every shape, which location each moved
//! attribute will update.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::solver::solve;
use crate::subst::Substitution;
use crate::svg::{Canvas, IndexedShape};
use crate::syntax::Loc;
use crate::synthesis::{for_each_tuple, DEFAULT_CAP};
use crate::trace::locs_of;
use crate::zones::{zones_of, Zone};

/// One location per zone attribute, aligned with [`Zone::attrs`]. `None`
/// marks an attribute with no changeable location, which the zone leaves
/// alone.
pub type Assignment = Vec<Option<Loc>>;

/// The distinct locations an assignment updates.
pub fn location_set(a: &Assignment) -> BTreeSet<Loc> {
    a.iter().flatten().copied().collect()
}

/// Changeable locations of each attribute of a zone.
pub fn zone_factors(shape: &IndexedShape, zone: &Zone, frozen: &BTreeSet<Loc>) -> Vec<Vec<Loc>> {
    zone.attrs
        .iter()
        .map(|a| {
            locs_of(&shape.slots[a.slot].trace, frozen)
                .into_iter()
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Candidates {
    pub assignments: Vec<Assignment>,
    pub truncated: bool,
}

/// Cartesian product of the attributes' location sets in lexicographic
/// order. Attributes without locations are skipped; the zone is inactive
/// only when no attribute has any.
pub fn candidate_assignments(
    shape: &IndexedShape,
    zone: &Zone,
    frozen: &BTreeSet<Loc>,
) -> Candidates {
    let factors = zone_factors(shape, zone, frozen);
    let live: Vec<usize> = (0..factors.len())
        .filter(|&i| !factors[i].is_empty())
        .collect();
    let mut out = Candidates::default();
    if live.is_empty() {
        return out;
    }
    let picked: Vec<Vec<Loc>> = live.iter().map(|&i| factors[i].clone()).collect();
    out.truncated = for_each_tuple(&picked, DEFAULT_CAP, |tuple| {
        let mut a: Assignment = alloc::vec![None; factors.len()];
        for (&i, l) in live.iter().zip(tuple) {
            a[i] = Some(*l);
        }
        out.assignments.push(a);
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Rotate through location sets so each is used equally often.
    #[default]
    Fair,
    /// Prefer locations that occur in few output traces.
    Biased,
    /// Always the first candidate.
    None,
}

impl Heuristic {
    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::Fair => "fair",
            Heuristic::Biased => "biased",
            Heuristic::None => "none",
        }
    }

    pub fn from_name(s: &str) -> Option<Heuristic> {
        match s {
            "fair" => Some(Heuristic::Fair),
            "biased" => Some(Heuristic::Biased),
            "none" => Some(Heuristic::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssignOptions {
    pub heuristic: Heuristic,
    /// Skip candidates with an attribute that cannot be solved for a one
    /// pixel move, unless that leaves nothing.
    pub avoid_unsolvable: bool,
}

/// Assignment chosen for one zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneChoice {
    pub zone: Zone,
    /// Empty when the zone is inactive.
    pub candidates: Candidates,
    pub chosen: Option<Assignment>,
}

impl ZoneChoice {
    pub fn active(&self) -> bool {
        self.chosen.is_some()
    }
}

/// Assignments for every zone of every shape, in assignment order: shapes
/// ascending, then table order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShapeAssignment {
    pub zones: Vec<(usize, ZoneChoice)>,
    index: BTreeMap<(usize, String), usize>,
}

impl ShapeAssignment {
    pub fn get(&self, shape: usize, zone: &str) -> Option<&ZoneChoice> {
        let i = self.index.get(&(shape, String::from(zone)))?;
        Some(&self.zones[*i].1)
    }

    fn push(&mut self, shape: usize, choice: ZoneChoice) {
        self.index
            .insert((shape, choice.zone.name.clone()), self.zones.len());
        self.zones.push((shape, choice));
    }
}

/// Occurrences of each location across every number of the canvas.
pub fn canvas_counts(canvas: &Canvas) -> BTreeMap<Loc, u64> {
    let mut counts = BTreeMap::new();
    for s in &canvas.shapes {
        for slot in &s.slots {
            slot.trace.count_leaves(&mut counts);
        }
    }
    counts
}

fn solvable(shape: &IndexedShape, zone: &Zone, a: &Assignment, rho: &Substitution) -> bool {
    zone.attrs.iter().zip(a).all(|(attr, l)| match l {
        None => true,
        Some(l) => {
            let slot = &shape.slots[attr.slot];
            solve(rho, *l, slot.value + attr.offset(1.0, 1.0), &slot.trace).is_ok()
        }
    })
}

/// Runs a heuristic over all zones in order.
pub fn assign(
    canvas: &Canvas,
    rho: &Substitution,
    frozen: &BTreeSet<Loc>,
    opts: AssignOptions,
) -> ShapeAssignment {
    let counts = match opts.heuristic {
        Heuristic::Biased => canvas_counts(canvas),
        _ => BTreeMap::new(),
    };
    let mut usage: BTreeMap<BTreeSet<Loc>, u64> = BTreeMap::new();
    let mut out = ShapeAssignment::default();
    for shape in &canvas.shapes {
        for zone in zones_of(shape) {
            let candidates = candidate_assignments(shape, &zone, frozen);
            let mut pool: Vec<&Assignment> = candidates.assignments.iter().collect();
            if opts.avoid_unsolvable {
                let ok: Vec<&Assignment> = pool
                    .iter()
                    .copied()
                    .filter(|a| solvable(shape, &zone, a, rho))
                    .collect();
                if !ok.is_empty() {
                    pool = ok;
                }
            }
            let used = |a: &Assignment| usage.get(&location_set(a)).copied().unwrap_or(0);
            let score = |a: &Assignment| {
                location_set(a)
                    .iter()
                    .map(|l| counts.get(l).copied().unwrap_or(0) as u128)
                    .product::<u128>()
            };
            // Candidates are in lexicographic order, so `min_by_key` keeps the
            // smallest tuple on ties.
            let chosen = match opts.heuristic {
                Heuristic::None => pool.first().copied(),
                Heuristic::Fair => pool.iter().copied().min_by_key(|a| used(a)),
                Heuristic::Biased => pool.iter().copied().min_by_key(|a| (score(a), used(a))),
            }
            .cloned();
            if let Some(a) = &chosen {
                *usage.entry(location_set(a)).or_insert(0) += 1;
            }
            out.push(
                shape.index,
                ZoneChoice {
                    zone,
                    candidates,
                    chosen,
                },
            );
        }
    }
    out
}

/// Locations to highlight for a zone.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Highlight {
    pub active: bool,
    /// Locations the zone's assignment updates.
    pub chosen: BTreeSet<Loc>,
    /// Other changeable locations the zone's attributes depend on.
    pub contributing: BTreeSet<Loc>,
}

pub fn highlight_info(
    canvas: &Canvas,
    gamma: &ShapeAssignment,
    frozen: &BTreeSet<Loc>,
    shape: usize,
    zone: &str,
) -> Highlight {
    let (Some(s), Some(c)) = (canvas.shape(shape), gamma.get(shape, zone)) else {
        return Highlight::default();
    };
    let Some(a) = &c.chosen else {
        return Highlight::default();
    };
    let chosen = location_set(a);
    let contributing = zone_factors(s, &c.zone, frozen)
        .into_iter()
        .flatten()
        .filter(|l| !chosen.contains(l))
        .collect();
    Highlight {
        active: true,
        chosen,
        contributing,
    }
}
