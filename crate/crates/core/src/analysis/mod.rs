//! Analyses of single programs: exact division-by-zero witnesses and
//! reachability by exhaustive execution, plus worklist dataflow analyses
//! (live variables, available expressions, possibly-uninitialized reads).

mod cfg;
mod dataflow;
mod divzero;

pub use cfg::{build_cfg, Cfg, EdgeKind, Node, NodeId, NodeKind};
pub use dataflow::{
    available_expressions, is_avail_fixpoint, is_live_fixpoint, is_uninit_fixpoint,
    live_variables, may_uninitialized, render_facts, uninitialized, DataflowResult, Direction,
    Meet, Warning,
};
pub use divzero::{div_zero_check, reachable_statements, replay, DivZeroReport, ErrorWitness};
