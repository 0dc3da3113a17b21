//! Seeded random generators shared by the integration tests.
//!
//! Names follow a fixed scheme so that generated specifications are well
//! formed: attributes `a0..a2`, variables `x0..x3` (only used where an
//! enclosing input binds them), process definitions `P0..`, components
//! `C0..`, a domain extern `pick` and a table extern `tab`.

#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use abc_core::model::{
    AttrInit, ComponentDecl, Event, ExternDecl, ExternKind, ProcDef, Property, PropertyDecl, StateExpr, StateTerm,
    SystemSpec,
};
use abc_core::term::{CmpOp, Input, Output, Span, Update};
use abc_core::{AttrKey, AttributeEnv, Expr, Pred, Proc, Substitution, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATTRS: [&str; 3] = ["a0", "a1", "a2"];
pub const VARS: [&str; 4] = ["x0", "x1", "x2", "x3"];
const TEXTS: [&str; 5] = ["a", "b", "ping", "", "q\"t"];
const FLOATS: [f64; 5] = [0.5, 1.5, -2.25, 10.0, 0.125];
const CMPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture exists")
}

/// What a generated expression may mention.
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    pub vars: &'a [String],
    /// `this.a` references.
    pub this: bool,
    /// Bare attribute references.
    pub attrs: bool,
    /// Calls to the `pick` domain extern.
    pub draws: bool,
}

impl<'a> Scope<'a> {
    pub fn pred(vars: &'a [String]) -> Self {
        Scope {
            vars,
            this: true,
            attrs: true,
            draws: false,
        }
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn scalar(&mut self) -> Value {
        match self.below(8) {
            0..=2 => Value::Int(self.rng.gen_range(-3..6)),
            3 => Value::Float(FLOATS[self.below(FLOATS.len())]),
            4 => Value::Bool(self.chance(0.5)),
            5 | 6 => Value::text(TEXTS[self.below(TEXTS.len())]),
            _ => Value::Undef,
        }
    }

    pub fn value(&mut self, depth: u32) -> Value {
        if depth == 0 || self.chance(0.75) {
            return self.scalar();
        }
        let n = self.rng.gen_range(0..4);
        let items: Vec<Value> = (0..n).map(|_| self.value(depth - 1)).collect();
        if self.chance(0.5) {
            Value::Tuple(items)
        } else {
            Value::set(items)
        }
    }

    pub fn attr_name(&mut self) -> String {
        ATTRS[self.below(ATTRS.len())].to_string()
    }

    fn small_index(&mut self) -> Vec<Expr> {
        if self.chance(0.8) {
            Vec::new()
        } else {
            vec![Expr::lit(self.rng.gen_range(0..2i64))]
        }
    }

    pub fn expr(&mut self, depth: u32, scope: Scope<'_>) -> Expr {
        let leaf = depth == 0 || self.chance(0.4);
        if leaf {
            return match self.below(4) {
                0 if !scope.vars.is_empty() => Expr::Var(scope.vars.choose(&mut self.rng).unwrap().clone()),
                1 if scope.this => Expr::This(self.attr_name(), self.small_index()),
                2 if scope.attrs => Expr::Attr(self.attr_name(), self.small_index()),
                _ => Expr::Lit(self.value(1)),
            };
        }
        match self.below(7) {
            0..=2 => {
                let op = ["+", "-", "*", "/"][self.below(4)];
                Expr::binary(op, self.expr(depth - 1, scope), self.expr(depth - 1, scope))
            }
            3 => Expr::apply("tuple", vec![self.expr(depth - 1, scope), self.expr(depth - 1, scope)]),
            4 => Expr::apply(
                "proj",
                vec![self.expr(depth - 1, scope), Expr::lit(self.rng.gen_range(0..2i64))],
            ),
            5 if scope.draws => Expr::apply("pick", Vec::new()),
            _ => Expr::apply("tab", vec![self.expr(depth - 1, scope)]),
        }
    }

    pub fn pred(&mut self, depth: u32, scope: Scope<'_>) -> Pred {
        let scope = Scope { draws: false, ..scope };
        let leaf = depth == 0 || self.chance(0.35);
        if leaf {
            return match self.below(10) {
                0 => Pred::True,
                1 => Pred::False,
                2 => Pred::Member(self.expr(1, scope), self.expr(1, scope)),
                3 => Pred::Atom("tab".into(), vec![self.expr(1, scope)]),
                _ => {
                    let op = CMPS[self.below(CMPS.len())];
                    Pred::cmp(op, self.expr(2, scope), self.expr(2, scope))
                }
            };
        }
        match self.below(3) {
            0 => self.pred(depth - 1, scope).and(self.pred(depth - 1, scope)),
            1 => self.pred(depth - 1, scope).or(self.pred(depth - 1, scope)),
            _ => self.pred(depth - 1, scope).negate(),
        }
    }

    /// An environment over `a0..a2`, sometimes with indexed entries.
    pub fn env(&mut self) -> AttributeEnv {
        let mut env = AttributeEnv::new();
        for a in ATTRS {
            if self.chance(0.8) {
                env.set(AttrKey::plain(a), self.value(1));
            }
            if self.chance(0.3) {
                env.set(
                    AttrKey::indexed(a, vec![Value::Int(self.rng.gen_range(0..2))]),
                    self.value(1),
                );
            }
        }
        env
    }

    /// An environment defining every plain and indexed key a generated
    /// `this.a` reference can name.
    pub fn full_env(&mut self) -> AttributeEnv {
        let mut env = AttributeEnv::new();
        for a in ATTRS {
            env.set(AttrKey::plain(a), self.value(1));
            for i in 0..2 {
                env.set(AttrKey::indexed(a, vec![Value::Int(i)]), self.value(1));
            }
        }
        env
    }

    pub fn subst(&mut self, names: &[&str]) -> Substitution {
        names.iter().map(|n| (n.to_string(), self.value(1))).collect()
    }

    pub fn interface(&mut self) -> BTreeSet<String> {
        ATTRS
            .iter()
            .filter(|_| self.chance(0.5))
            .map(|a| a.to_string())
            .collect()
    }

    /// An update whose evaluation cannot fail: plain targets and values
    /// that are literals, bound variables, plain attributes or draws.
    fn safe_update(&mut self, vars: &[String], draws: bool) -> Update {
        let value = match self.below(5) {
            0 if !vars.is_empty() => Expr::Var(vars.choose(&mut self.rng).unwrap().clone()),
            1 => Expr::this(&self.attr_name()),
            2 => Expr::attr(&self.attr_name()),
            3 if draws => Expr::apply("pick", Vec::new()),
            _ => Expr::Lit(self.value(1)),
        };
        Update {
            attr: self.attr_name(),
            index: Vec::new(),
            value,
        }
    }

    fn updates(&mut self, vars: &[String], draws: bool) -> Vec<Update> {
        let n = [0, 0, 1, 2][self.below(4)];
        (0..n).map(|_| self.safe_update(vars, draws)).collect()
    }

    /// A guard for inputs and awareness: plain `this` references only, so
    /// closing it never fails.
    fn guard(&mut self, vars: &[String]) -> Pred {
        if self.chance(0.4) {
            return Pred::True;
        }
        let g = self.pred(
            1,
            Scope {
                vars,
                this: true,
                attrs: true,
                draws: false,
            },
        );
        strip_this_index(&g)
    }

    /// A process term. `procs` are the callable definitions; calls only
    /// appear under a prefix unless `top` allows them.
    pub fn proc(&mut self, depth: u32, vars: &[String], procs: &[String], top: bool) -> Proc {
        let leaf = depth == 0 || self.chance(0.2);
        if leaf {
            if !procs.is_empty() && (top || self.chance(0.5)) && self.chance(0.6) {
                return Proc::call(procs.choose(&mut self.rng).unwrap());
            }
            return Proc::Inact;
        }
        match self.below(10) {
            0..=2 => {
                let free: Vec<&str> = VARS.iter().copied().filter(|v| !vars.iter().any(|b| b == v)).collect();
                if free.is_empty() {
                    return self.output(depth, vars, procs);
                }
                let n = self.rng.gen_range(1..=free.len().min(2));
                let binders: Vec<String> = free.choose_multiple(&mut self.rng, n).map(|s| s.to_string()).collect();
                let mut inner = vars.to_vec();
                inner.extend(binders.iter().cloned());
                let guard = self.guard(&inner);
                let updates = self.updates(&inner, true);
                let cont = self.proc(depth - 1, &inner, procs, true);
                Proc::Input(Input {
                    guard,
                    binders,
                    updates,
                    cont: Arc::new(cont),
                    span: Span::default(),
                })
            }
            3..=5 => self.output(depth, vars, procs),
            6 => Proc::Aware(
                self.guard(vars),
                Arc::new(self.proc(depth - 1, vars, procs, top)),
                Span::default(),
            ),
            7 | 8 => Proc::choice(
                self.proc(depth - 1, vars, procs, top),
                self.proc(depth - 1, vars, procs, top),
            ),
            _ => Proc::par(
                self.proc(depth - 1, vars, procs, top),
                self.proc(depth - 1, vars, procs, top),
            ),
        }
    }

    fn output(&mut self, depth: u32, vars: &[String], procs: &[String]) -> Proc {
        let n = self.rng.gen_range(1..3);
        let scope = Scope {
            vars,
            this: true,
            attrs: false,
            draws: true,
        };
        let payload: Vec<Expr> = (0..n)
            .map(|_| {
                if self.chance(0.6) {
                    Expr::Lit(self.scalar())
                } else {
                    strip_this_index_expr(&self.expr(1, scope))
                }
            })
            .collect();
        let target = if self.chance(0.3) {
            Pred::True
        } else {
            strip_this_index(&self.pred(1, Scope::pred(vars)))
        };
        let updates = self.updates(vars, true);
        let cont = self.proc(depth.saturating_sub(1), vars, procs, true);
        Proc::Output(Output {
            payload,
            target,
            updates,
            cont: Arc::new(cont),
            span: Span::default(),
        })
    }

    fn event(&mut self, comps: &[String]) -> Event {
        let comp = if self.chance(0.3) {
            None
        } else {
            Some(comps.choose(&mut self.rng).unwrap().as_str())
        };
        let tag = TEXTS[self.below(TEXTS.len())];
        if self.chance(0.5) {
            Event::sent(comp, tag)
        } else {
            Event::received(comp, tag)
        }
    }

    fn state_expr(&mut self, depth: u32, comps: &[String]) -> StateExpr {
        if depth == 0 || self.chance(0.4) {
            let attr = StateTerm::Attr {
                component: comps.choose(&mut self.rng).unwrap().clone(),
                attr: self.attr_name(),
                index: Vec::new(),
            };
            return StateExpr::Cmp(CMPS[self.below(CMPS.len())], attr, StateTerm::Lit(self.scalar()));
        }
        match self.below(3) {
            0 => self.state_expr(depth - 1, comps).and(self.state_expr(depth - 1, comps)),
            1 => self.state_expr(depth - 1, comps).or(self.state_expr(depth - 1, comps)),
            _ => StateExpr::Not(Box::new(self.state_expr(depth - 1, comps))),
        }
    }

    /// A specification that passes validation.
    pub fn spec(&mut self, max_procs: usize, max_comps: usize, depth: u32) -> SystemSpec {
        let n_procs = self.rng.gen_range(0..=max_procs);
        let n_comps = self.rng.gen_range(1..=max_comps);
        let names: Vec<String> = (0..n_procs).map(|i| format!("P{i}")).collect();
        let comps: Vec<String> = (0..n_comps).map(|i| format!("C{i}")).collect();

        let domain: Vec<Value> = (0..self.rng.gen_range(1..4)).map(|_| self.scalar()).collect();
        let mut keys = BTreeSet::new();
        let mut table: Vec<(Vec<Value>, Value)> = Vec::new();
        for _ in 0..self.rng.gen_range(0..4) {
            let key = self.scalar();
            if keys.insert(key.clone()) {
                table.push((vec![key], self.scalar()));
            }
        }
        let externs = vec![
            ExternDecl {
                name: "pick".into(),
                kind: ExternKind::Domain(domain),
                span: Span::default(),
            },
            ExternDecl {
                name: "tab".into(),
                kind: ExternKind::Table(table),
                span: Span::default(),
            },
        ];

        let procs = names
            .iter()
            .map(|name| {
                // a prefix first, so recursion is always guarded
                let body = self.output(depth, &[], &names);
                let body = if self.chance(0.5) {
                    Proc::choice(body, self.proc(depth, &[], &names, false))
                } else {
                    body
                };
                ProcDef {
                    name: name.clone(),
                    body: guard_calls(body),
                    span: Span::default(),
                }
            })
            .collect();

        let components = comps
            .iter()
            .map(|name| {
                let mut attrs: Vec<AttrInit> = ATTRS
                    .iter()
                    .map(|a| AttrInit {
                        name: a.to_string(),
                        index: Vec::new(),
                        value: self.value(1),
                        span: Span::default(),
                    })
                    .collect();
                if self.chance(0.3) {
                    attrs.push(AttrInit {
                        name: "a0".into(),
                        index: vec![Expr::lit(1i64)],
                        value: self.scalar(),
                        span: Span::default(),
                    });
                }
                ComponentDecl {
                    name: name.clone(),
                    attrs,
                    interface: self.interface().into_iter().collect(),
                    run: self.proc(depth, &[], &names, true),
                    span: Span::default(),
                }
            })
            .collect();

        let properties = (0..self.rng.gen_range(0..4))
            .map(|i| {
                let property = match self.below(4) {
                    0 => Property::ReachableEvent(self.event(&comps)),
                    1 => Property::ReachableState(self.state_expr(2, &comps)),
                    2 => Property::Invariant(self.state_expr(2, &comps)),
                    _ => Property::LeadsTo {
                        trigger: self.event(&comps),
                        goals: (0..self.rng.gen_range(1..3)).map(|_| self.event(&comps)).collect(),
                    },
                };
                PropertyDecl {
                    name: format!("prop{i}"),
                    property,
                    span: Span::default(),
                }
            })
            .collect();

        SystemSpec {
            externs,
            procs,
            components,
            properties,
        }
    }
}

/// Replaces unguarded calls at the top of a definition body by `0`.
fn guard_calls(p: Proc) -> Proc {
    match p {
        Proc::Call(_) => Proc::Inact,
        Proc::Choice(a, b) => Proc::choice(guard_calls((*a).clone()), guard_calls((*b).clone())),
        Proc::Par(a, b) => Proc::par(guard_calls((*a).clone()), guard_calls((*b).clone())),
        Proc::Aware(g, b, s) => Proc::Aware(g, Arc::new(guard_calls((*b).clone())), s),
        other => other,
    }
}

fn strip_this_index_expr(e: &Expr) -> Expr {
    match e {
        Expr::This(n, _) => Expr::This(n.clone(), Vec::new()),
        Expr::Attr(n, idx) | Expr::Apply(n, idx) => {
            let idx = idx.iter().map(strip_this_index_expr).collect();
            if matches!(e, Expr::Attr(..)) {
                Expr::Attr(n.clone(), idx)
            } else {
                Expr::Apply(n.clone(), idx)
            }
        }
        _ => e.clone(),
    }
}

fn strip_this_index(p: &Pred) -> Pred {
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, strip_this_index_expr(a), strip_this_index_expr(b)),
        Pred::Member(a, b) => Pred::Member(strip_this_index_expr(a), strip_this_index_expr(b)),
        Pred::Atom(n, args) => Pred::Atom(n.clone(), args.iter().map(strip_this_index_expr).collect()),
        Pred::And(a, b) => strip_this_index(a).and(strip_this_index(b)),
        Pred::Or(a, b) => strip_this_index(a).or(strip_this_index(b)),
        Pred::Not(a) => strip_this_index(a).negate(),
    }
}

/// A random labelled transition system in which every state is reachable
/// from state 0. Returns the successor lists as `(target, trigger, goal)`.
pub fn random_graph(g: &mut Gen, n: usize) -> Vec<Vec<(usize, bool, bool)>> {
    let trigger_p = g.rng.gen_range(0.02..0.3);
    let goal_p = g.rng.gen_range(0.05..0.6);
    let extra = g.rng.gen_range(0.0..2.0);
    let mut edges = vec![Vec::new(); n];
    let label = |g: &mut Gen| (g.chance(trigger_p), g.chance(goal_p));
    for s in 1..n {
        // spanning tree towards recent states keeps some paths long
        let lo = s.saturating_sub(g.rng.gen_range(1..=8));
        let parent = g.rng.gen_range(lo..s);
        let (t, goal) = label(g);
        edges[parent].push((s, t, goal));
    }
    let n_extra = (n as f64 * extra) as usize;
    for _ in 0..n_extra {
        let a = g.below(n);
        let b = g.below(n);
        let (t, goal) = label(g);
        edges[a].push((b, t, goal));
    }
    if g.chance(0.5) {
        // make every path to a deadlock and every cycle pass through a goal,
        // then re-open a few edges so that some graphs fail narrowly
        let dead: Vec<bool> = edges.iter().map(Vec::is_empty).collect();
        for (from, out) in edges.iter_mut().enumerate() {
            for e in out.iter_mut() {
                if dead[e.0] || e.0 <= from {
                    e.2 = true;
                }
                if dead[e.0] {
                    e.1 = false;
                }
            }
        }
        for _ in 0..g.below(3) {
            let s = g.below(n);
            if !edges[s].is_empty() {
                let k = g.below(edges[s].len());
                edges[s][k].2 = false;
            }
        }
    }
    edges
}
