//! Set-valued expression evaluation, the small-step statement semantics,
//! exhaustive outcome collection and projection of families onto variants.

mod eval;
mod explore;
mod outcome;
mod project;
mod step;
mod store;

pub use eval::{apply, eval_expr, eval_paths, eval_replay, ErrorKind, EvalResult};
pub use explore::{collect_outcomes, semantics_over, DEFAULT_FUEL};
pub use outcome::{Outcome, OutcomeSet};
pub use project::{family_outcomes, project, variant_outcomes};
pub use step::{step, MachineConfig, RuntimeError, Transition};
pub use store::Store;

pub(crate) use explore::explore;
pub(crate) use step::{head_positions, step_traced};
