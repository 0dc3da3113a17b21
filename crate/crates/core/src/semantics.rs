//! Broadcast operational semantics: the actions a component can perform,
//! how it reacts to a message, and the successors of a whole system.

use std::sync::Arc;

use thiserror::Error;

use crate::eval::{
    apply_updates, close, evaluate, for_each_draw, holds_locally, restrict, satisfies, substitute, substitute_proc,
    Chooser, EvalCtx, EvalError,
};
use crate::program::{ComponentState, Program, SystemState};
use crate::term::{AttributeEnv, Input, Output, Pred, Proc, Span, Substitution};
use crate::value::Value;

/// An evaluation failure while computing a transition.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("component `{component}`: {error}")]
pub struct RuntimeError {
    pub component: String,
    pub span: Span,
    #[source]
    pub error: EvalError,
}

#[derive(Debug, Clone)]
enum Frame {
    /// The focus is the left operand; the right one is kept.
    ParLeft(Arc<Proc>),
    ParRight(Arc<Proc>),
}

/// An enabled action prefix together with the parallel context around it.
#[derive(Debug, Clone)]
pub struct Enabled<T> {
    pub prefix: T,
    frames: Vec<Frame>,
}

impl<T> Enabled<T> {
    /// Rebuilds the process with `cont` in place of the fired prefix.
    /// Choices, awareness and calls on the way to the prefix are consumed.
    pub fn plug(&self, cont: Proc) -> Proc {
        self.frames.iter().rev().fold(cont, |acc, f| match f {
            Frame::ParLeft(r) => Proc::Par(Arc::new(acc), r.clone()),
            Frame::ParRight(l) => Proc::Par(l.clone(), Arc::new(acc)),
        })
    }
}

/// Enabled outputs and inputs of one process.
pub type Prefixes = (Vec<Enabled<Output>>, Vec<Enabled<Input>>);

/// Collects the input and output prefixes `p` can fire in `env`, in a
/// fixed left-to-right order. Awareness guards are evaluated now.
pub fn enabled_prefixes(program: &Program, p: &Proc, env: &AttributeEnv) -> Result<Prefixes, (Span, EvalError)> {
    let mut outs = Vec::new();
    let mut ins = Vec::new();
    collect(program, p, env, &mut Vec::new(), &mut outs, &mut ins)?;
    Ok((outs, ins))
}

fn collect(
    program: &Program,
    p: &Proc,
    env: &AttributeEnv,
    frames: &mut Vec<Frame>,
    outs: &mut Vec<Enabled<Output>>,
    ins: &mut Vec<Enabled<Input>>,
) -> Result<(), (Span, EvalError)> {
    match p {
        Proc::Inact => {}
        Proc::Output(o) => outs.push(Enabled {
            prefix: o.clone(),
            frames: frames.clone(),
        }),
        Proc::Input(i) => ins.push(Enabled {
            prefix: i.clone(),
            frames: frames.clone(),
        }),
        Proc::Call(c) => collect(program, &program.unfold(c), env, frames, outs, ins)?,
        Proc::Aware(g, body, span) => {
            if holds_locally(g, env, &Substitution::new(), &program.externs).map_err(|e| (*span, e))? {
                collect(program, body, env, frames, outs, ins)?;
            }
        }
        Proc::Choice(a, b) => {
            collect(program, a, env, frames, outs, ins)?;
            collect(program, b, env, frames, outs, ins)?;
        }
        Proc::Par(a, b) => {
            frames.push(Frame::ParLeft(b.clone()));
            collect(program, a, env, frames, outs, ins)?;
            frames.pop();
            frames.push(Frame::ParRight(a.clone()));
            collect(program, b, env, frames, outs, ins)?;
            frames.pop();
        }
    }
    Ok(())
}

/// A possible broadcast by one component.
#[derive(Debug, Clone)]
pub struct OutCandidate {
    pub message: Vec<Value>,
    /// The target predicate closed under the sender's environment.
    pub predicate: Pred,
    /// The sender's environment restricted to its interface, before updates.
    pub exposed: AttributeEnv,
    pub successor: ComponentState,
    /// Position of the fired output among the component's enabled outputs.
    pub branch: usize,
    pub span: Span,
}

fn runtime(program: &Program, component: usize) -> impl Fn((Span, EvalError)) -> RuntimeError + '_ {
    move |(span, error)| RuntimeError {
        component: program.components[component].name.clone(),
        span,
        error,
    }
}

/// All outputs component `index` of `state` can perform. Draws from
/// domain externs are enumerated exhaustively.
pub fn out_steps(program: &Program, state: &SystemState, index: usize) -> Result<Vec<OutCandidate>, RuntimeError> {
    let comp = state.component(index);
    let (outs, _) = enabled_prefixes(program, &comp.proc, &comp.env).map_err(runtime(program, index))?;
    let exposed = restrict(&comp.env, &program.components[index].interface);
    let mut result = Vec::new();
    for (branch, out) in outs.iter().enumerate() {
        let o = &out.prefix;
        let candidates = for_each_draw(|draws| fire_output(program, comp, out, draws))
            .map_err(|e| runtime(program, index)((o.span, e)))?;
        for (message, predicate, successor) in candidates {
            result.push(OutCandidate {
                message,
                predicate,
                exposed: exposed.clone(),
                successor,
                branch,
                span: o.span,
            });
        }
    }
    Ok(result)
}

/// Computes one output under a fixed sequence of draws.
pub fn fire_output(
    program: &Program,
    comp: &ComponentState,
    out: &Enabled<Output>,
    draws: &mut dyn Chooser,
) -> Result<(Vec<Value>, Pred, ComponentState), EvalError> {
    let o = &out.prefix;
    let no_vars = Substitution::new();
    let ctx = EvalCtx::new(&comp.env, &no_vars, &program.externs);
    let message = o
        .payload
        .iter()
        .map(|e| evaluate(e, &ctx, draws))
        .collect::<Result<Vec<_>, _>>()?;
    let predicate = close(&o.target, &comp.env, &no_vars)?;
    let env = apply_updates(&comp.env, &o.updates, &no_vars, &program.externs, draws)?;
    let proc = program.normalize(&out.plug((*o.cont).clone()));
    Ok((message, predicate, ComponentState { env, proc }))
}

#[derive(Debug, Clone)]
pub struct ReceiveBranch {
    /// Position of the matching input among the component's enabled inputs.
    pub ordinal: usize,
    pub bindings: Substitution,
    pub successor: ComponentState,
}

#[derive(Debug, Clone)]
pub enum InResult {
    Receive(Vec<ReceiveBranch>),
    Discard,
}

impl InResult {
    pub fn is_receive(&self) -> bool {
        matches!(self, InResult::Receive(_))
    }
}

/// How component `index` reacts to a broadcast. It receives when its
/// exposed attributes satisfy the sender's predicate and some enabled input
/// of matching arity accepts the sender's exposed environment; otherwise it
/// discards.
pub fn in_step(
    program: &Program,
    state: &SystemState,
    index: usize,
    exposed: &AttributeEnv,
    predicate: &Pred,
    message: &[Value],
) -> Result<InResult, RuntimeError> {
    let comp = state.component(index);
    let visible = restrict(&comp.env, &program.components[index].interface);
    if !satisfies(&visible, predicate, &program.externs) {
        return Ok(InResult::Discard);
    }
    let (_, ins) = enabled_prefixes(program, &comp.proc, &comp.env).map_err(runtime(program, index))?;
    let mut branches = Vec::new();
    for (ordinal, input) in ins.iter().enumerate() {
        let i = &input.prefix;
        if i.binders.len() != message.len() {
            continue;
        }
        let bindings: Substitution = i.binders.iter().cloned().zip(message.iter().cloned()).collect();
        let guard = close(&substitute(&i.guard, &bindings), &comp.env, &Substitution::new())
            .map_err(|e| runtime(program, index)((i.span, e)))?;
        if !satisfies(exposed, &guard, &program.externs) {
            continue;
        }
        let outcomes = for_each_draw(|draws| {
            let env = apply_updates(&comp.env, &i.updates, &bindings, &program.externs, draws)?;
            let proc = program.normalize(&input.plug(substitute_proc(&i.cont, &bindings)));
            Ok(ComponentState { env, proc })
        })
        .map_err(|e| runtime(program, index)((i.span, e)))?;
        for successor in outcomes {
            branches.push(ReceiveBranch {
                ordinal,
                bindings: bindings.clone(),
                successor,
            });
        }
    }
    Ok(if branches.is_empty() {
        InResult::Discard
    } else {
        InResult::Receive(branches)
    })
}

/// One system transition.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastEvent {
    pub sender: usize,
    /// Position of the fired output among the sender's enabled outputs.
    pub sender_branch: usize,
    pub message: Vec<Value>,
    pub predicate: Pred,
    pub exposed: AttributeEnv,
    /// `(component, branch ordinal)` for every receiver, by component.
    pub receivers: Vec<(usize, usize)>,
    pub discarded: Vec<usize>,
}

impl BroadcastEvent {
    /// The first payload element when it is text.
    pub fn tag(&self) -> Option<&str> {
        self.message.first().and_then(Value::as_text)
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub event: BroadcastEvent,
    pub state: SystemState,
}

/// Every successor of `state`: each output of each component, delivered
/// atomically to all components able to receive it, with one successor per
/// combination of the receivers' branch choices.
pub fn system_steps(program: &Program, state: &SystemState) -> Result<Vec<Step>, RuntimeError> {
    let mut steps = Vec::new();
    for sender in 0..state.len() {
        for cand in out_steps(program, state, sender)? {
            let mut receivers: Vec<(usize, Vec<ReceiveBranch>)> = Vec::new();
            let mut discarded = Vec::new();
            for j in (0..state.len()).filter(|&j| j != sender) {
                match in_step(program, state, j, &cand.exposed, &cand.predicate, &cand.message)? {
                    InResult::Receive(bs) => receivers.push((j, bs)),
                    InResult::Discard => discarded.push(j),
                }
            }
            let mut base = state.0.clone();
            base[sender] = Arc::new(cand.successor.clone());
            // odometer over the receivers' branch choices
            let mut choice = vec![0usize; receivers.len()];
            loop {
                let mut comps = base.clone();
                let mut chosen = Vec::with_capacity(receivers.len());
                for ((j, bs), &k) in receivers.iter().zip(&choice) {
                    comps[*j] = Arc::new(bs[k].successor.clone());
                    chosen.push((*j, bs[k].ordinal));
                }
                steps.push(Step {
                    event: BroadcastEvent {
                        sender,
                        sender_branch: cand.branch,
                        message: cand.message.clone(),
                        predicate: cand.predicate.clone(),
                        exposed: cand.exposed.clone(),
                        receivers: chosen,
                        discarded: discarded.clone(),
                    },
                    state: SystemState(comps),
                });
                let mut pos = receivers.len();
                let advanced = loop {
                    if pos == 0 {
                        break false;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    if choice[pos] < receivers[pos].1.len() {
                        break true;
                    }
                    choice[pos] = 0;
                };
                if !advanced {
                    break;
                }
            }
        }
    }
    Ok(steps)
}
