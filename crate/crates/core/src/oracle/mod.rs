//! Ground-truth engines: an instrumented interpreter, exact evaluation of
//! pointwise maxima, and a bounded validity checker.

mod exact;
mod interp;
mod validity;

pub use exact::{bounded_max, eval_bool_exact, eval_perm_exact, max_window, MAX_WINDOW};
pub use interp::{interpret, interpret_observed, Access, Event, ProgramState, RunOutcome, DEFAULT_FUEL};
pub use validity::{bounded_validity, Validity, ValidityConfig};

use crate::expr::EvalError;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unsupported maximum: {0}")]
    Unsupported(String),
    #[error("evaluation window [{lo}, {hi}] too large")]
    WindowTooLarge { lo: i64, hi: i64 },
    #[error("search space of {required} states exceeds the budget of {budget}")]
    Budget { required: u64, budget: u64 },
}
