//! Editing session: the current program, its prepared zones, and undo
//! history. One writer at a time.

use alloc::string::String;
use alloc::vec::Vec;

use crate::action::{
    apply_prepared, Action, ActionError, ActionOptions, ActionOutcome, HighlightClass, Prepared,
    TriggerResult,
};
use crate::assign::Heuristic;
use crate::program::Program;
use crate::syntax::Loc;
use crate::value::Value;

/// Result of a trigger during a drag, before anything is committed.
#[derive(Debug, Clone)]
pub struct Preview {
    pub trigger: TriggerResult,
    pub highlights: Vec<(Loc, HighlightClass)>,
    /// Output of the updated program, when it runs.
    pub output: Result<Value, String>,
}

#[derive(Debug, Clone)]
pub struct Session {
    heuristic: Heuristic,
    options: ActionOptions,
    current: Option<Prepared>,
    history: Vec<Program>,
}

impl Session {
    pub fn new(heuristic: Heuristic, options: ActionOptions) -> Session {
        Session {
            heuristic,
            options,
            current: None,
            history: Vec::new(),
        }
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }

    /// Switches heuristic and recomputes assignments.
    pub fn set_heuristic(&mut self, h: Heuristic) -> Result<(), ActionError> {
        self.heuristic = h;
        if let Some(p) = self.current.take() {
            self.current = Some(Prepared::new(p.program, h, self.options)?);
        }
        Ok(())
    }

    pub fn current(&self) -> Option<&Prepared> {
        self.current.as_ref()
    }

    /// Replaces the program. The previous one goes on the undo history. On
    /// error the session is unchanged.
    pub fn load(&mut self, program: Program) -> Result<&Prepared, ActionError> {
        let prepared = Prepared::new(program, self.heuristic, self.options)?;
        if let Some(old) = self.current.replace(prepared) {
            self.history.push(old.program);
        }
        Ok(self.current.as_ref().expect("just set"))
    }

    fn prepared_for(&self, h: Heuristic) -> Result<Option<Prepared>, ActionError> {
        let Some(cur) = &self.current else {
            return Ok(None);
        };
        if h == self.heuristic {
            Ok(None)
        } else {
            Prepared::new(cur.program.clone(), h, self.options).map(Some)
        }
    }

    fn no_program() -> ActionError {
        ActionError::Canvas("no program loaded".into())
    }

    /// Runs the trigger for a drag in progress and renders the result.
    pub fn trigger(&self, action: &Action) -> Result<Preview, ActionError> {
        let other = self.prepared_for(action.heuristic)?;
        let prep = other
            .as_ref()
            .or(self.current.as_ref())
            .ok_or_else(Self::no_program)?;
        let (trigger, highlights) = prep.trigger(action)?;
        let output = prep
            .program
            .apply(&trigger.rho)
            .map_err(|e| alloc::format!("{e}"))
            .and_then(|p| {
                p.eval()
                    .map_err(|e| alloc::format!("{}", p.locate(e.span, alloc::format!("{e}"))))
            });
        Ok(Preview {
            trigger,
            highlights,
            output,
        })
    }

    /// Applies a completed drag and recomputes assignments for the new
    /// program. Nothing is recorded when the program does not change.
    pub fn commit(&mut self, action: &Action) -> Result<ActionOutcome, ActionError> {
        let other = self.prepared_for(action.heuristic)?;
        let prep = other
            .as_ref()
            .or(self.current.as_ref())
            .ok_or_else(Self::no_program)?;
        let outcome = apply_prepared(prep, action)?;
        if outcome.error.is_none() && outcome.program.source() != prep.program.source() {
            let next = Prepared::new(outcome.program.clone(), self.heuristic, self.options)?;
            let old = self.current.replace(next).expect("program loaded");
            self.history.push(old.program);
        }
        Ok(outcome)
    }

    /// Restores the previous program. Returns false when there is none.
    pub fn undo(&mut self) -> Result<bool, ActionError> {
        let Some(prev) = self.history.pop() else {
            return Ok(false);
        };
        self.current = Some(Prepared::new(prev, self.heuristic, self.options)?);
        Ok(true)
    }

    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }
}
