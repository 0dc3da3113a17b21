//! Seeded random simulation and trace serialization.

use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::EvalError;
use crate::parser::pretty_print;
use crate::program::{Program, SystemState};
use crate::semantics::{system_steps, BroadcastEvent, RuntimeError};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Deadlock,
    StepLimit,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub component: String,
    pub attr: String,
    pub index: Vec<Value>,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub event: BroadcastEvent,
    pub updates: Vec<UpdateRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Hash of the canonical rendering of the specification.
    pub spec: String,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub termination: Termination,
    /// Set when the trace stopped on an evaluation error.
    pub error: Option<RuntimeError>,
}

/// Hex digest identifying a specification by content.
pub fn spec_hash(program: &Program) -> String {
    let mut h = DefaultHasher::new();
    pretty_print(&program.spec).hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Attribute entries that differ between two states, component by component.
pub fn state_updates(program: &Program, before: &SystemState, after: &SystemState) -> Vec<UpdateRecord> {
    let mut out = Vec::new();
    for (i, (a, b)) in before.0.iter().zip(&after.0).enumerate() {
        if std::sync::Arc::ptr_eq(a, b) || a.env == b.env {
            continue;
        }
        for (key, value) in b.env.iter() {
            if a.env.get(key) != Some(value) {
                out.push(UpdateRecord {
                    component: program.components[i].name.clone(),
                    attr: key.name.clone(),
                    index: key.index.clone(),
                    value: value.clone(),
                });
            }
        }
    }
    out
}

/// Runs the system from its initial state, choosing uniformly among all
/// successors at every step. The result depends only on the specification
/// and the seed.
pub fn simulate(program: &Program, seed: u64, max_steps: usize) -> Result<Trace, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = program.initial_state()?;
    let mut trace = Trace {
        spec: spec_hash(program),
        seed,
        steps: Vec::new(),
        termination: Termination::StepLimit,
        error: None,
    };
    while trace.steps.len() < max_steps {
        let mut steps = match system_steps(program, &state) {
            Ok(steps) => steps,
            Err(e) => {
                trace.termination = Termination::Error;
                trace.error = Some(e);
                return Ok(trace);
            }
        };
        if steps.is_empty() {
            trace.termination = Termination::Deadlock;
            return Ok(trace);
        }
        let pick = rng.gen_range(0..steps.len());
        let next = steps.swap_remove(pick);
        trace.steps.push(TraceStep {
            step: trace.steps.len() + 1,
            updates: state_updates(program, &state, &next.state),
            event: next.event,
        });
        state = next.state;
    }
    if system_steps(program, &state).is_ok_and(|s| s.is_empty()) {
        trace.termination = Termination::Deadlock;
    }
    Ok(trace)
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error(transparent)]
    Init(#[from] EvalError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("step {0} is not a transition of the system")]
    NotEnabled(usize),
}

/// Re-executes a trace against the semantics, checking that every step is
/// one of the enabled transitions. Returns the visited states.
pub fn replay(program: &Program, trace: &Trace) -> Result<Vec<SystemState>, ReplayError> {
    let mut state = program.initial_state()?;
    let mut visited = vec![state.clone()];
    for s in &trace.steps {
        let next = system_steps(program, &state)?
            .into_iter()
            .find(|c| c.event == s.event && state_updates(program, &state, &c.state) == s.updates)
            .ok_or(ReplayError::NotEnabled(s.step))?;
        state = next.state;
        visited.push(state.clone());
    }
    Ok(visited)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub spec: String,
    pub seed: u64,
    pub components: Vec<String>,
    pub steps: usize,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub component: String,
    pub branch: usize,
}

/// One serialized step; fields appear in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub sender: String,
    pub message: Vec<Value>,
    pub predicate: String,
    pub receivers: Vec<Receiver>,
    pub discarded: Vec<String>,
    pub updates: Vec<UpdateRecord>,
}

pub fn header(program: &Program, trace: &Trace) -> Header {
    Header {
        spec: trace.spec.clone(),
        seed: trace.seed,
        components: program.components.iter().map(|c| c.name.clone()).collect(),
        steps: trace.steps.len(),
        termination: trace.termination.clone(),
        error: trace
            .error
            .as_ref()
            .map(|e| format!("{}:{}: {e}", e.span.line, e.span.col)),
    }
}

pub fn step_record(program: &Program, s: &TraceStep) -> StepRecord {
    let name = |i: usize| program.components[i].name.clone();
    StepRecord {
        step: s.step,
        sender: name(s.event.sender),
        message: s.event.message.clone(),
        predicate: s.event.predicate.to_string(),
        receivers: s
            .event
            .receivers
            .iter()
            .map(|&(j, branch)| Receiver {
                component: name(j),
                branch,
            })
            .collect(),
        discarded: s.event.discarded.iter().map(|&j| name(j)).collect(),
        updates: s.updates.clone(),
    }
}

/// JSON lines: a header object followed by one object per step.
pub fn trace_to_json(program: &Program, trace: &Trace) -> String {
    let mut out = serde_json::to_string(&header(program, trace)).expect("header serializes");
    out.push('\n');
    for s in &trace.steps {
        out.push_str(&serde_json::to_string(&step_record(program, s)).expect("step serializes"));
        out.push('\n');
    }
    out
}

fn index_suffix(index: &[Value]) -> String {
    if index.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = index.iter().map(Value::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// Plain-text rendering for terminals.
pub fn trace_to_text(program: &Program, trace: &Trace) -> String {
    let mut out = String::new();
    for s in &trace.steps {
        let r = step_record(program, s);
        let msg: Vec<String> = r.message.iter().map(Value::to_string).collect();
        let recv: Vec<String> = r
            .receivers
            .iter()
            .map(|x| format!("{}#{}", x.component, x.branch))
            .collect();
        let _ = writeln!(
            out,
            "{:>4}  {} sends ({}) @ ({})  -> [{}]",
            r.step,
            r.sender,
            msg.join(", "),
            r.predicate,
            recv.join(", ")
        );
        for u in &r.updates {
            let _ = writeln!(
                out,
                "        {}.{}{} := {}",
                u.component,
                u.attr,
                index_suffix(&u.index),
                u.value
            );
        }
    }
    let reason = match trace.termination {
        Termination::Deadlock => "deadlock",
        Termination::StepLimit => "step limit",
        Termination::Error => "error",
    };
    let _ = writeln!(out, "end: {reason} after {} step(s)", trace.steps.len());
    if let Some(e) = &trace.error {
        let _ = writeln!(out, "error at {}:{}: {e}", e.span.line, e.span.col);
    }
    out
}
