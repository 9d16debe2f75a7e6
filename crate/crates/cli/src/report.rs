//! JSON shapes exchanged with callers.

use serde::Deserialize;
use serde_json::{json, Value as Json};

use little_core::action::{Action, ActionOutcome, AttrOutcome, HighlightClass, Prepared};
use little_core::assign::{highlight_info, Heuristic};
use little_core::program::{Program, SourceError};
use little_core::svg::{Canvas, ValuePath};
use little_core::syntax::{Freeze, Loc, Origin};
use little_core::synthesis::{Inference, Verdict};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// Action descriptor: `{shapeIndex, zone, dx, dy, heuristic, choose}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ActionDescriptor {
    #[serde(alias = "shape")]
    pub shape_index: usize,
    pub zone: String,
    #[serde(default)]
    pub dx: f64,
    #[serde(default)]
    pub dy: f64,
    pub heuristic: Option<String>,
    pub choose: Option<OneOrMany>,
}

impl ActionDescriptor {
    pub fn to_action(&self, default: Heuristic) -> Result<Action, CliError> {
        let heuristic = match &self.heuristic {
            None => default,
            Some(h) => Heuristic::from_name(h)
                .ok_or_else(|| CliError::Usage(format!("unknown heuristic '{h}'")))?,
        };
        let choose = match &self.choose {
            None => Vec::new(),
            Some(OneOrMany::One(s)) => vec![s.clone()],
            Some(OneOrMany::Many(v)) => v.clone(),
        };
        if !self.dx.is_finite() || !self.dy.is_finite() {
            return Err(CliError::Usage("dx and dy must be finite".into()));
        }
        Ok(Action {
            shape: self.shape_index,
            zone: self.zone.clone(),
            dx: self.dx,
            dy: self.dy,
            heuristic,
            choose,
        })
    }
}

pub fn parse_action(text: &str, default: Heuristic) -> Result<Action, CliError> {
    let d: ActionDescriptor =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad action: {e}")))?;
    d.to_action(default)
}

/// A requested change to one output number: `{shapeIndex, attr, target}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HardEdit {
    #[serde(alias = "shape")]
    pub shape_index: usize,
    /// Slot name such as `x`, `points[1].y` or `d[3]`.
    pub attr: String,
    pub target: f64,
}

/// Resolves edits against a canvas to value paths.
pub fn edit_paths(canvas: &Canvas, edits: &[HardEdit]) -> Result<Vec<(ValuePath, f64)>, CliError> {
    edits
        .iter()
        .map(|e| {
            let shape = canvas
                .shape(e.shape_index)
                .ok_or_else(|| CliError::Usage(format!("no shape {}", e.shape_index)))?;
            let slot = shape
                .slots
                .iter()
                .find(|s| s.key.to_string() == e.attr)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "shape {} has no number '{}'",
                        e.shape_index, e.attr
                    ))
                })?;
            Ok((slot.path.clone(), e.target))
        })
        .collect()
}

pub fn source_error(e: &SourceError) -> Json {
    json!({
        "message": e.message,
        "origin": match e.origin { Origin::Prelude => "prelude", Origin::User => "program" },
        "line": e.line,
        "col": e.col,
    })
}

pub fn loc(program: &Program, l: Loc) -> Json {
    json!({ "loc": l.0, "name": program.loc_name(l) })
}

pub fn literals(program: &Program) -> Json {
    Json::Array(
        program
            .literals()
            .filter(|n| !program.is_prelude(n.loc))
            .map(|n| {
                json!({
                    "loc": n.loc.0,
                    "name": program.loc_name(n.loc),
                    "value": n.value,
                    "frozen": n.freeze == Freeze::Frozen,
                    "thawed": n.freeze == Freeze::Thawed,
                    "range": n.range.map(|(lo, hi)| json!([lo, hi])),
                })
            })
            .collect(),
    )
}

pub fn canvas(canvas: &Canvas) -> Json {
    Json::Array(
        canvas
            .shapes
            .iter()
            .map(|s| {
                json!({
                    "shapeIndex": s.index,
                    "kind": s.kind,
                    "hidden": s.hidden,
                    "attrs": s.slots.iter().map(|slot| json!({
                        "name": slot.key.to_string(),
                        "value": slot.value,
                        "trace": slot.trace.to_sexp(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

/// Zones with their state and chosen locations.
pub fn zones(prep: &Prepared) -> Json {
    Json::Array(
        prep.gamma
            .zones
            .iter()
            .map(|(shape, c)| {
                let h = highlight_info(&prep.canvas, &prep.gamma, &prep.frozen, *shape, &c.zone.name);
                json!({
                    "shapeIndex": shape,
                    "zone": c.zone.name,
                    "state": if c.active() { "Active" } else { "Inactive" },
                    "candidates": c.candidates.assignments.len(),
                    "truncated": c.candidates.truncated,
                    "chosen": h.chosen.iter().map(|l| loc(&prep.program, *l)).collect::<Vec<_>>(),
                    "contributing": h.contributing.iter().map(|l| loc(&prep.program, *l)).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn attr_outcome(program: &Program, o: &AttrOutcome) -> Json {
    let (status, value, reason) = match &o.result {
        None if o.loc.is_none() => ("skipped", None, None),
        None => ("unchanged", None, None),
        Some(Ok(k)) if o.target == o.original => ("unchanged", Some(*k), None),
        Some(Ok(k)) => ("solved", Some(*k), None),
        Some(Err(e)) => ("failed", None, Some(e.reason().code())),
    };
    json!({
        "attr": o.key.to_string(),
        "original": o.original,
        "target": o.target,
        "loc": o.loc.map(|l| loc(program, l)),
        "status": status,
        "value": value,
        "reason": reason,
    })
}

pub fn highlights(program: &Program, hs: &[(Loc, HighlightClass)]) -> Json {
    Json::Array(
        hs.iter()
            .map(|(l, c)| json!({ "loc": l.0, "name": program.loc_name(*l), "class": c.name() }))
            .collect(),
    )
}

pub fn bindings(program: &Program, bs: &[(Loc, f64)]) -> Json {
    Json::Array(
        bs.iter()
            .map(|(l, v)| json!({ "loc": l.0, "name": program.loc_name(*l), "value": v }))
            .collect(),
    )
}

fn verdict(v: &Verdict) -> (Json, Json) {
    (json!(v.class.name()), json!(v.note))
}

/// Diagnostics for a completed action.
pub fn diagnostics(before: &Program, out: &ActionOutcome) -> Json {
    let (class, note) = verdict(&out.verdict);
    json!({
        "bindings": bindings(before, &out.bindings),
        "attributes": out.trigger.outcomes.iter().map(|o| attr_outcome(before, o)).collect::<Vec<_>>(),
        "highlights": highlights(before, &out.highlights),
        "classification": class,
        "note": note,
        "error": out.error,
    })
}

/// Diagnostics for a trigger run during a drag.
pub fn trigger(
    program: &Program,
    t: &little_core::action::TriggerResult,
    hs: &[(Loc, HighlightClass)],
    base: &little_core::subst::Substitution,
) -> Json {
    json!({
        "bindings": bindings(program, &t.rho.delta(base)),
        "attributes": t.outcomes.iter().map(|o| attr_outcome(program, o)).collect::<Vec<_>>(),
        "highlights": highlights(program, hs),
    })
}

pub fn candidates(program: &Program, inf: &Inference, verdicts: &[Verdict]) -> Json {
    json!({
        "truncated": inf.truncated,
        "candidates": inf.candidates.iter().zip(verdicts).map(|(c, v)| json!({
            "bindings": c.bindings.iter().map(|(l, k)| json!([l.0, k])).collect::<Vec<_>>(),
            "names": c.bindings.iter().map(|(l, _)| program.loc_name(*l)).collect::<Vec<_>>(),
            "classification": v.class.name(),
        })).collect::<Vec<_>>(),
    })
}
