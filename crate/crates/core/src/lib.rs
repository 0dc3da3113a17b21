//! An executable AbC calculus: components exchange messages by
//! attribute-based broadcast. The crate parses system specifications,
//! computes their broadcast transitions, explores the full state space,
//! checks reachability, invariant and leads-to properties, and runs seeded
//! random simulations.

pub mod eval;
pub mod explorer;
pub mod model;
pub mod parser;
pub mod program;
pub mod semantics;
pub mod sim;
pub mod term;
pub mod value;

pub use eval::{EvalError, Extern, Externs};
pub use model::SystemSpec;
pub use parser::{parse_spec, pretty_print, Diagnostic};
pub use program::{ComponentState, Program, SystemState};
pub use semantics::{system_steps, BroadcastEvent, RuntimeError, Step};
pub use term::{AttrKey, AttributeEnv, Expr, Pred, Proc, Substitution};
pub use value::Value;
