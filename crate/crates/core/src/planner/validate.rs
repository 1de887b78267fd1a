use std::fmt;

use super::ground::GroundTask;
use super::state::{EvalError, State};
use super::Step;
use crate::numeric::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    UnknownAction,
    /// Index into the schema's precondition conjuncts.
    Unmet(usize),
    Eval(EvalError),
    /// Index into the goal conjuncts; reported at step `plan.len()`.
    GoalUnmet(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanFailure {
    pub step: usize,
    pub kind: FailureKind,
}

impl fmt::Display for PlanFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FailureKind::UnknownAction => write!(f, "step {}: no such ground action", self.step),
            FailureKind::Unmet(i) => write!(f, "step {}: precondition conjunct {i} unmet", self.step),
            FailureKind::Eval(e) => write!(f, "step {}: {e}", self.step),
            FailureKind::GoalUnmet(i) => write!(f, "goal conjunct {i} unmet after plan"),
        }
    }
}

impl std::error::Error for PlanFailure {}

/// Simulates `steps` from the initial state. Returns the final state, or the
/// first failing step (0-based) with the first unmet conjunct.
pub fn validate_steps<N: Scalar>(task: &GroundTask<N>, steps: &[Step]) -> Result<State<N>, PlanFailure> {
    let mut s = task.init.clone();
    for (i, step) in steps.iter().enumerate() {
        let fail = |kind| PlanFailure { step: i, kind };
        let a = task.action(&step.schema, &step.args).ok_or_else(|| fail(FailureKind::UnknownAction))?;
        match a.pre.first_unmet(&s) {
            Ok(Some(c)) => return Err(fail(FailureKind::Unmet(c))),
            Ok(None) => {}
            Err(e) => return Err(fail(FailureKind::Eval(e))),
        }
        s = a.apply_effects(&s).map_err(|e| fail(FailureKind::Eval(e)))?;
    }
    let fail = |kind| PlanFailure { step: steps.len(), kind };
    match task.goal.first_unmet(&s) {
        Ok(Some(c)) => Err(fail(FailureKind::GoalUnmet(c))),
        Ok(None) => Ok(s),
        Err(e) => Err(fail(FailureKind::Eval(e))),
    }
}
