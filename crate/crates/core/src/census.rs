//! Zone and equation statistics for a program.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::AddAssign;

use crate::action::Prepared;
use crate::assign::zone_factors;
use crate::solver::{in_fragment, solve};
use crate::syntax::Loc;
use crate::trace::Trace;

/// Displacements used to test solvability.
pub const DISPLACEMENTS: [f64; 2] = [1.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CensusRow {
    pub shapes: usize,
    pub zones: usize,
    pub inactive: usize,
    /// Active zones with exactly one candidate assignment.
    pub unambiguous: usize,
    pub ambiguous: usize,
    /// Total candidates over the ambiguous zones.
    pub ambiguous_candidates: usize,
    /// Distinct (location, trace) pairs over all active zones.
    pub pre_equations: usize,
    pub in_fragment: usize,
    pub out_of_fragment: usize,
    pub solvable_d1: usize,
    pub solvable_d100: usize,
}

impl CensusRow {
    /// Mean number of candidates per ambiguous zone.
    pub fn mean_ambiguity(&self) -> f64 {
        if self.ambiguous == 0 {
            0.0
        } else {
            self.ambiguous_candidates as f64 / self.ambiguous as f64
        }
    }
}

impl AddAssign for CensusRow {
    fn add_assign(&mut self, o: CensusRow) {
        self.shapes += o.shapes;
        self.zones += o.zones;
        self.inactive += o.inactive;
        self.unambiguous += o.unambiguous;
        self.ambiguous += o.ambiguous;
        self.ambiguous_candidates += o.ambiguous_candidates;
        self.pre_equations += o.pre_equations;
        self.in_fragment += o.in_fragment;
        self.out_of_fragment += o.out_of_fragment;
        self.solvable_d1 += o.solvable_d1;
        self.solvable_d100 += o.solvable_d100;
    }
}

/// An equation `value = trace` to be solved for `loc`, before any target is
/// chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct PreEquation {
    pub loc: Loc,
    pub value: f64,
    pub trace: Trace,
}

/// One equation per changeable location of each attribute moved by an
/// active zone, keeping the first of any with the same location and trace.
pub fn pre_equations(prep: &Prepared) -> Vec<PreEquation> {
    let mut seen: BTreeSet<(Loc, String)> = BTreeSet::new();
    let mut out = Vec::new();
    for (shape_index, choice) in &prep.gamma.zones {
        if !choice.active() {
            continue;
        }
        let shape = &prep.canvas.shapes[*shape_index];
        let factors = zone_factors(shape, &choice.zone, &prep.frozen);
        for (attr, locs) in choice.zone.attrs.iter().zip(factors) {
            let slot = &shape.slots[attr.slot];
            for l in locs {
                if seen.insert((l, slot.trace.to_sexp())) {
                    out.push(PreEquation {
                        loc: l,
                        value: slot.value,
                        trace: slot.trace.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Zone counts by number of candidate assignments, plus how many
/// pre-equations can be solved after moving the output by each displacement.
pub fn census(prep: &Prepared) -> CensusRow {
    let mut row = CensusRow {
        shapes: prep.canvas.shapes.len(),
        ..CensusRow::default()
    };
    for (_, choice) in &prep.gamma.zones {
        row.zones += 1;
        match choice.candidates.assignments.len() {
            0 => row.inactive += 1,
            1 => row.unambiguous += 1,
            n => {
                row.ambiguous += 1;
                row.ambiguous_candidates += n;
            }
        }
    }
    let equations = pre_equations(prep);
    row.pre_equations = equations.len();
    for e in &equations {
        if in_fragment(e.loc, &e.trace) {
            row.in_fragment += 1;
        } else {
            row.out_of_fragment += 1;
        }
        let ok = |d: f64| solve(&prep.rho, e.loc, e.value + d, &e.trace).is_ok();
        row.solvable_d1 += ok(DISPLACEMENTS[0]) as usize;
        row.solvable_d100 += ok(DISPLACEMENTS[1]) as usize;
    }
    row
}
