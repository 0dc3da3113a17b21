//! A validated specification prepared for execution: definitions indexed by
//! name, externs in evaluation form, and the initial system state.

use std::collections::{BTreeSet, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use crate::eval::{evaluate, EvalCtx, EvalError, Extern, Externs, NoDraws};
use crate::model::{ExternKind, SystemSpec};
use crate::parser::validate::free_vars;
use crate::term::{canonicalize, AttrKey, AttributeEnv, Call, Input, Output, Proc, Substitution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentInfo {
    pub name: String,
    pub interface: BTreeSet<String>,
}

/// The mutable part of a component: its environment and behaviour.
/// Bound variables are substituted into the process as soon as they are
/// received, so no separate substitution is carried.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentState {
    pub env: AttributeEnv,
    pub proc: Proc,
}

/// One state per component, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState(pub Vec<Arc<ComponentState>>);

impl SystemState {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn component(&self, i: usize) -> &ComponentState {
        &self.0[i]
    }

    /// Hash that is stable across runs of the same build.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub spec: SystemSpec,
    pub components: Vec<ComponentInfo>,
    pub defs: HashMap<String, Arc<Proc>>,
    pub externs: Externs,
    free_vars: HashMap<String, BTreeSet<String>>,
}

impl Program {
    /// Prepares a spec that has passed validation.
    pub fn new(spec: SystemSpec) -> Self {
        let defs: HashMap<String, Arc<Proc>> = spec
            .procs
            .iter()
            .map(|d| (d.name.clone(), Arc::new(d.body.clone())))
            .collect();
        let free_vars = free_vars(&defs);
        let externs = spec
            .externs
            .iter()
            .map(|e| {
                let ext = match &e.kind {
                    ExternKind::Domain(vals) => Extern::Domain(vals.clone()),
                    ExternKind::Table(entries) => Extern::Table(entries.iter().cloned().collect()),
                };
                (e.name.clone(), ext)
            })
            .collect();
        let components = spec
            .components
            .iter()
            .map(|c| ComponentInfo {
                name: c.name.clone(),
                interface: c.interface.iter().cloned().collect(),
            })
            .collect();
        Program {
            spec,
            components,
            defs,
            externs,
            free_vars,
        }
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn initial_state(&self) -> Result<SystemState, EvalError> {
        let mut comps = Vec::with_capacity(self.spec.components.len());
        for c in &self.spec.components {
            let mut env = AttributeEnv::new();
            let no_vars = Substitution::new();
            for a in &c.attrs {
                let empty = AttributeEnv::new();
                let ctx = EvalCtx::new(&empty, &no_vars, &self.externs);
                let index = a
                    .index
                    .iter()
                    .map(|i| evaluate(i, &ctx, &mut NoDraws))
                    .collect::<Result<Vec<_>, _>>()?;
                env.set(
                    AttrKey {
                        name: a.name.clone(),
                        index,
                    },
                    a.value.clone(),
                );
            }
            comps.push(Arc::new(ComponentState {
                env,
                proc: self.normalize(&c.run),
            }));
        }
        Ok(SystemState(comps))
    }

    /// The body of `K` with the call's captured bindings substituted.
    pub fn unfold(&self, call: &Call) -> Proc {
        let body = &self.defs[&call.name];
        crate::eval::substitute_proc(body, &call.bindings)
    }

    /// Canonical form used for state identity: terminated parallel
    /// branches are dropped, calls keep only the bindings their definition
    /// reads, and `|`/`+` operands are sorted.
    pub fn normalize(&self, p: &Proc) -> Proc {
        canonicalize(&self.trim_bindings(&drop_inact(p)))
    }

    fn trim_bindings(&self, p: &Proc) -> Proc {
        match p {
            Proc::Inact => Proc::Inact,
            Proc::Call(c) => {
                let bindings = match self.free_vars.get(&c.name) {
                    Some(fv) => c.bindings.restrict_to(fv),
                    None => c.bindings.clone(),
                };
                Proc::Call(Call {
                    name: c.name.clone(),
                    bindings,
                    span: c.span,
                })
            }
            Proc::Input(i) => Proc::Input(Input {
                cont: Arc::new(self.trim_bindings(&i.cont)),
                ..i.clone()
            }),
            Proc::Output(o) => Proc::Output(Output {
                cont: Arc::new(self.trim_bindings(&o.cont)),
                ..o.clone()
            }),
            Proc::Aware(g, body, span) => Proc::Aware(g.clone(), Arc::new(self.trim_bindings(body)), *span),
            Proc::Choice(a, b) => Proc::choice(self.trim_bindings(a), self.trim_bindings(b)),
            Proc::Par(a, b) => Proc::par(self.trim_bindings(a), self.trim_bindings(b)),
        }
    }
}

/// Removes `0` operands of parallel composition outside action prefixes.
fn drop_inact(p: &Proc) -> Proc {
    match p {
        Proc::Par(a, b) => match (drop_inact(a), drop_inact(b)) {
            (Proc::Inact, q) | (q, Proc::Inact) => q,
            (a, b) => Proc::par(a, b),
        },
        Proc::Choice(a, b) => Proc::choice(drop_inact(a), drop_inact(b)),
        Proc::Aware(g, body, span) => Proc::Aware(g.clone(), Arc::new(drop_inact(body)), *span),
        _ => p.clone(),
    }
}
