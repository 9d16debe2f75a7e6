//! Triggers and the end-to-end drag pipeline: evaluate, assign, solve,
//! rewrite the program.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::assign::{assign, location_set, AssignOptions, Assignment, Heuristic, ShapeAssignment};
use crate::program::{FreezeOptions, Program, SourceError};
use crate::solver::{solve, SolveError};
use crate::subst::Substitution;
use crate::svg::{index_canvas, Canvas, IndexedShape, SlotKey};
use crate::syntax::Loc;
use crate::synthesis::{classify_values, Classification, Constraint, UpdateRequest, Verdict};
use crate::trace::locs_of;
use crate::zones::Zone;

/// Solve outcome for one attribute moved by a zone.
#[derive(Debug, Clone, PartialEq)]
pub struct AttrOutcome {
    pub key: SlotKey,
    pub original: f64,
    pub target: f64,
    /// `None` when the attribute has no changeable location.
    pub loc: Option<Loc>,
    /// `None` when nothing was solved: no location, or no movement.
    pub result: Option<Result<f64, SolveError>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerResult {
    pub rho: Substitution,
    pub outcomes: Vec<AttrOutcome>,
}

impl TriggerResult {
    /// Bindings added on top of the starting substitution.
    pub fn bindings(&self, base: &Substitution) -> Vec<(Loc, f64)> {
        self.rho.bindings()[base.len()..].to_vec()
    }

    pub fn failures(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o.result, Some(Err(_))))
            .count()
    }

    pub fn successes(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o.result, Some(Ok(_))))
            .count()
    }
}

/// Solves each moved attribute for its assigned location against `rho` and
/// appends the solutions to `rho` in zone order, so later attributes win
/// when two share a location.
pub fn run_trigger(
    shape: &IndexedShape,
    zone: &Zone,
    assignment: &Assignment,
    rho: &Substitution,
    dx: f64,
    dy: f64,
) -> TriggerResult {
    let mut out = rho.clone();
    let mut outcomes = Vec::with_capacity(zone.attrs.len());
    let still = dx == 0.0 && dy == 0.0;
    for (attr, loc) in zone.attrs.iter().zip(assignment) {
        let slot = &shape.slots[attr.slot];
        let offset = attr.offset(dx, dy);
        let target = slot.value + offset;
        let result = match loc {
            Some(l) if !still => {
                let r = if offset == 0.0 {
                    rho.get(*l).ok_or(SolveError {
                        addition: crate::solver::FailReason::Unbound(*l),
                        inversion: crate::solver::FailReason::Unbound(*l),
                    })
                } else {
                    solve(rho, *l, target, &slot.trace)
                };
                if let Ok(k) = r {
                    out.push(*l, k);
                }
                Some(r)
            }
            _ => None,
        };
        outcomes.push(AttrOutcome {
            key: slot.key.clone(),
            original: slot.value,
            target,
            loc: *loc,
            result,
        });
    }
    TriggerResult { rho: out, outcomes }
}

/// A drag of one zone by a mouse offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub shape: usize,
    pub zone: String,
    pub dx: f64,
    pub dy: f64,
    pub heuristic: Heuristic,
    /// Location names that the zone's assignment must use, overriding the
    /// heuristic.
    pub choose: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActionOptions {
    pub freeze: FreezeOptions,
    pub avoid_unsolvable: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActionError {
    #[error("{0}")]
    Source(#[from] SourceError),
    #[error("output is not a canvas: {0}")]
    Canvas(String),
    #[error("no shape {0}")]
    UnknownShape(usize),
    #[error("shape {shape} has no zone '{zone}'")]
    UnknownZone { shape: usize, zone: String },
    #[error("zone '{zone}' of shape {shape} is inactive")]
    Inactive { shape: usize, zone: String },
    #[error("no candidate for zone '{zone}' uses {names}")]
    NoSuchChoice { zone: String, names: String },
}

/// Highlight classes for locations shown in the code pane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HighlightClass {
    /// Chosen, before any movement.
    Yellow,
    /// Chosen and solved.
    Green,
    /// Chosen and the solve failed.
    Red,
    /// Contributes to the zone but was not chosen.
    Gray,
}

impl HighlightClass {
    pub fn name(&self) -> &'static str {
        match self {
            HighlightClass::Yellow => "yellow",
            HighlightClass::Green => "green",
            HighlightClass::Red => "red",
            HighlightClass::Gray => "gray",
        }
    }
}

/// Colours for a zone's locations given the trigger outcomes.
pub fn highlights(
    shape: &IndexedShape,
    zone: &Zone,
    assignment: &Assignment,
    frozen: &BTreeSet<Loc>,
    outcomes: &[AttrOutcome],
) -> Vec<(Loc, HighlightClass)> {
    let chosen = location_set(assignment);
    let mut out: Vec<(Loc, HighlightClass)> = Vec::new();
    for l in &chosen {
        let mut class = HighlightClass::Yellow;
        for o in outcomes.iter().filter(|o| o.loc == Some(*l)) {
            class = match (&o.result, class) {
                (Some(Err(_)), _) | (_, HighlightClass::Red) => HighlightClass::Red,
                (Some(Ok(_)), _) => HighlightClass::Green,
                (None, c) => c,
            };
        }
        out.push((*l, class));
    }
    let gray: BTreeSet<Loc> = zone
        .attrs
        .iter()
        .flat_map(|a| locs_of(&shape.slots[a.slot].trace, frozen))
        .filter(|l| !chosen.contains(l))
        .collect();
    out.extend(gray.into_iter().map(|l| (l, HighlightClass::Gray)));
    out
}

/// Everything known about a program ready for direct manipulation.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub program: Program,
    pub output: crate::value::Value,
    pub canvas: Canvas,
    pub frozen: BTreeSet<Loc>,
    pub rho: Substitution,
    pub gamma: ShapeAssignment,
}

impl Prepared {
    pub fn new(
        program: Program,
        heuristic: Heuristic,
        opts: ActionOptions,
    ) -> Result<Prepared, ActionError> {
        let output = program
            .eval()
            .map_err(|e| ActionError::Source(program.locate(e.span, alloc::format!("{e}"))))?;
        Self::from_output(program, output, heuristic, opts)
    }

    /// Indexes and assigns an output that has already been computed.
    pub fn from_output(
        program: Program,
        output: crate::value::Value,
        heuristic: Heuristic,
        opts: ActionOptions,
    ) -> Result<Prepared, ActionError> {
        let canvas =
            index_canvas(&output).map_err(|e| ActionError::Canvas(alloc::format!("{e}")))?;
        let frozen = program.frozen_set(opts.freeze);
        let rho = program.rho0();
        let gamma = assign(
            &canvas,
            &rho,
            &frozen,
            AssignOptions {
                heuristic,
                avoid_unsolvable: opts.avoid_unsolvable,
            },
        );
        Ok(Prepared {
            program,
            output,
            canvas,
            frozen,
            rho,
            gamma,
        })
    }

    fn names_match(&self, a: &Assignment, names: &[String]) -> bool {
        let set = location_set(a);
        names.iter().all(|n| {
            set.iter()
                .any(|l| self.program.loc_name(*l) == *n || alloc::format!("{l}") == *n)
        })
    }

    /// The zone and the assignment an action will use.
    pub fn resolve(
        &self,
        action: &Action,
    ) -> Result<(&IndexedShape, &Zone, Assignment), ActionError> {
        let shape = self
            .canvas
            .shape(action.shape)
            .ok_or(ActionError::UnknownShape(action.shape))?;
        let choice =
            self.gamma
                .get(action.shape, &action.zone)
                .ok_or_else(|| ActionError::UnknownZone {
                    shape: action.shape,
                    zone: action.zone.clone(),
                })?;
        let Some(chosen) = &choice.chosen else {
            return Err(ActionError::Inactive {
                shape: action.shape,
                zone: action.zone.clone(),
            });
        };
        if action.choose.is_empty() {
            return Ok((shape, &choice.zone, chosen.clone()));
        }
        let picked = choice
            .candidates
            .assignments
            .iter()
            .find(|a| self.names_match(a, &action.choose))
            .ok_or_else(|| ActionError::NoSuchChoice {
                zone: action.zone.clone(),
                names: action.choose.join(", "),
            })?;
        Ok((shape, &choice.zone, picked.clone()))
    }

    /// Runs an action's trigger without touching the program.
    pub fn trigger(
        &self,
        action: &Action,
    ) -> Result<(TriggerResult, Vec<(Loc, HighlightClass)>), ActionError> {
        let (shape, zone, a) = self.resolve(action)?;
        let t = run_trigger(shape, zone, &a, &self.rho, action.dx, action.dy);
        let h = highlights(shape, zone, &a, &self.frozen, &t.outcomes);
        Ok((t, h))
    }
}

#[derive(Debug, Clone)]
pub struct ActionOutcome {
    /// The updated program, or the original one when the update failed to
    /// run.
    pub program: Program,
    pub trigger: TriggerResult,
    pub bindings: Vec<(Loc, f64)>,
    pub highlights: Vec<(Loc, HighlightClass)>,
    pub verdict: Verdict,
    /// Set when the updated program does not parse or evaluate.
    pub error: Option<String>,
}

impl ActionOutcome {
    /// True when something moved but no attribute could be solved.
    pub fn unsolvable(&self) -> bool {
        self.trigger.failures() > 0 && self.trigger.successes() == 0
    }
}

/// Applies a drag to a prepared program.
pub fn apply_prepared(prep: &Prepared, action: &Action) -> Result<ActionOutcome, ActionError> {
    let (shape, zone, a) = prep.resolve(action)?;
    let trigger = run_trigger(shape, zone, &a, &prep.rho, action.dx, action.dy);
    let highlights = highlights(shape, zone, &a, &prep.frozen, &trigger.outcomes);
    let bindings = trigger.rho.delta(&prep.rho);
    let req = UpdateRequest {
        hard: zone
            .attrs
            .iter()
            .zip(&trigger.outcomes)
            .map(|(attr, o)| {
                let slot = &shape.slots[attr.slot];
                Constraint {
                    path: slot.path.clone(),
                    value: o.target,
                    trace: slot.trace.clone(),
                }
            })
            .collect(),
        soft: Vec::new(),
    };
    let rerun = prep
        .program
        .apply(&trigger.rho)
        .map_err(|e| alloc::format!("{e}"))
        .and_then(|p| match p.eval() {
            Ok(v) => Ok((p, v)),
            Err(e) => Err(alloc::format!(
                "{}",
                p.locate(e.span, alloc::format!("{e}"))
            )),
        });
    Ok(match rerun {
        Ok((program, after)) => ActionOutcome {
            verdict: classify_values(&prep.output, &after, &req),
            program,
            trigger,
            bindings,
            highlights,
            error: None,
        },
        Err(msg) => ActionOutcome {
            program: prep.program.clone(),
            trigger,
            bindings,
            highlights,
            verdict: Verdict {
                class: Classification::Neither,
                note: Some(msg.clone()),
            },
            error: Some(msg),
        },
    })
}

/// Parse-to-unparse pipeline for one action.
pub fn apply_action(
    program: &Program,
    action: &Action,
    opts: ActionOptions,
) -> Result<ActionOutcome, ActionError> {
    let prep = Prepared::new(program.clone(), action.heuristic, opts)?;
    apply_prepared(&prep, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example;

    fn drag(shape: usize, zone: &str, dx: f64, dy: f64) -> Action {
        Action {
            shape,
            zone: zone.into(),
            dx,
            dy,
            heuristic: Heuristic::Fair,
            choose: Vec::new(),
        }
    }

    fn wave() -> Program {
        Program::parse(example("sineWaveOfBoxes").unwrap()).unwrap()
    }

    #[test]
    fn choosing_x0_moves_every_box() {
        let p = wave();
        let mut a = drag(2, "Interior", 45.0, 0.0);
        a.heuristic = Heuristic::None;
        a.choose = alloc::vec!["x0".into()];
        let out = apply_action(&p, &a, ActionOptions::default()).unwrap();
        let x0 = p.locs_named("x0")[0];
        assert_eq!(out.bindings, [(x0, 95.0)]);
        assert_eq!(out.program.literal(x0).unwrap().value, 95.0);
        let c = index_canvas(&out.program.eval().unwrap()).unwrap();
        assert_eq!(c.shapes[2].attr("x").unwrap().value, 155.0);
        assert_eq!(c.shapes[0].attr("x").unwrap().value, 95.0);
        assert_eq!(out.verdict.class, Classification::Faithful);
        assert!(out.highlights.contains(&(x0, HighlightClass::Green)));
    }

    #[test]
    fn zero_drag_changes_nothing() {
        let p = wave();
        let out = apply_action(
            &p,
            &drag(3, "TopLeftCorner", 0.0, 0.0),
            ActionOptions::default(),
        )
        .unwrap();
        assert!(out.bindings.is_empty());
        assert_eq!(out.program.source(), p.source());
        assert!(out
            .highlights
            .iter()
            .all(|(_, c)| matches!(c, HighlightClass::Yellow | HighlightClass::Gray)));
    }

    #[test]
    fn shared_location_is_plausible() {
        let p = Program::parse(example("xyBox").unwrap()).unwrap();
        let out = apply_action(
            &p,
            &drag(0, "Interior", 30.0, 10.0),
            ActionOptions::default(),
        )
        .unwrap();
        assert_eq!(out.verdict.class, Classification::Plausible);
        let c = index_canvas(&out.program.eval().unwrap()).unwrap();
        assert_eq!(c.shapes[0].attr("y").unwrap().value, 110.0);
    }

    #[test]
    fn failures_are_red_and_leave_program() {
        let p = Program::parse("(def [k s] [0 5]) (svg [(circle 'red' (* k s) 1! 2!)])").unwrap();
        let mut a = drag(0, "Interior", 4.0, 0.0);
        a.choose = alloc::vec!["s".into()];
        let out = apply_action(&p, &a, ActionOptions::default()).unwrap();
        assert!(out.unsolvable());
        assert_eq!(out.program.source(), p.source());
        let s = p.locs_named("s")[0];
        assert!(out.highlights.contains(&(s, HighlightClass::Red)));
    }

    #[test]
    fn errors() {
        let p = Program::parse(example("frozenBoxes").unwrap()).unwrap();
        let e =
            apply_action(&p, &drag(0, "Interior", 1.0, 1.0), ActionOptions::default()).unwrap_err();
        assert!(matches!(e, ActionError::Inactive { .. }));
        let p = wave();
        let e = apply_action(
            &p,
            &drag(99, "Interior", 1.0, 1.0),
            ActionOptions::default(),
        )
        .unwrap_err();
        assert_eq!(e, ActionError::UnknownShape(99));
        let e =
            apply_action(&p, &drag(0, "Middle", 1.0, 1.0), ActionOptions::default()).unwrap_err();
        assert!(matches!(e, ActionError::UnknownZone { .. }));
    }
}
