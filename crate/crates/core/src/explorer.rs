//! Breadth-first state-space construction and property checking.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::{compare, EvalError};
use crate::model::{Event, EventKind, Property, PropertyDecl, StateExpr, StateTerm};
use crate::program::{Program, SystemState};
use crate::semantics::{system_steps, BroadcastEvent, RuntimeError, Step};
use crate::term::AttrKey;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_depth: usize,
    /// Worker threads used to expand each frontier; results do not depend on it.
    pub workers: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 1_000_000,
            max_depth: usize::MAX,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub event: BroadcastEvent,
}

/// The explored labelled transition system. State 0 is the initial state
/// and states are numbered in breadth-first discovery order.
#[derive(Debug, Clone, Default)]
pub struct Lts {
    pub states: Vec<SystemState>,
    pub transitions: Vec<Transition>,
    pub truncated: bool,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("cannot build the initial state: {0}")]
    Init(#[from] EvalError),
    #[error("in state {state}: {error}")]
    Runtime { state: usize, error: RuntimeError },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl Lts {
    pub const INITIAL: usize = 0;

    /// Outgoing transition indices per state.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (t, tr) in self.transitions.iter().enumerate() {
            out[tr.from].push(t);
        }
        out
    }

    /// Line-oriented export: one `STATE <id> <hash>` line per state, then
    /// one `TRANS <from> <to> <sender> <tag>` line per transition.
    pub fn export(&self, program: &Program) -> String {
        let mut out = String::new();
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "STATE {i} {:016x}", s.fingerprint());
        }
        for t in &self.transitions {
            let tag = t.event.tag().map_or_else(|| "-".to_string(), crate::value::escape_text);
            let _ = writeln!(
                out,
                "TRANS {} {} {} {tag}",
                t.from, t.to, program.components[t.event.sender].name
            );
        }
        out
    }
}

/// Builds the reachable state space breadth-first. Each frontier is
/// expanded in parallel and merged in frontier order, so numbering is the
/// same for any number of workers.
pub fn explore(program: &Program, limits: Limits) -> Result<Lts, ExploreError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(limits.workers.max(1))
        .build()?;
    let init = program.initial_state()?;
    let mut lts = Lts::default();
    let mut index: HashMap<SystemState, usize> = HashMap::new();
    index.insert(init.clone(), 0);
    lts.states.push(init);

    let mut frontier = vec![0usize];
    let mut depth = 0usize;
    while !frontier.is_empty() {
        let expanded: Vec<Result<Vec<Step>, RuntimeError>> = pool.install(|| {
            frontier
                .par_iter()
                .map(|&s| system_steps(program, &lts.states[s]))
                .collect()
        });
        if depth >= limits.max_depth {
            for (&s, steps) in frontier.iter().zip(expanded) {
                let steps = steps.map_err(|error| ExploreError::Runtime { state: s, error })?;
                lts.truncated |= !steps.is_empty();
            }
            break;
        }
        let mut next = Vec::new();
        for (&from, steps) in frontier.iter().zip(expanded) {
            let steps = steps.map_err(|error| ExploreError::Runtime { state: from, error })?;
            for step in steps {
                let to = match index.get(&step.state) {
                    Some(&to) => to,
                    None if lts.states.len() >= limits.max_states => {
                        lts.truncated = true;
                        continue;
                    }
                    None => {
                        let to = lts.states.len();
                        index.insert(step.state.clone(), to);
                        lts.states.push(step.state);
                        next.push(to);
                        to
                    }
                };
                lts.transitions.push(Transition {
                    from,
                    to,
                    event: step.event,
                });
            }
        }
        frontier = next;
        depth += 1;
    }
    Ok(lts)
}

/// Whether a transition is an occurrence of `event`. A component of
/// `None` matches any sender (or any receiver).
pub fn matches_event(program: &Program, e: &BroadcastEvent, pattern: &Event) -> bool {
    if e.tag() != Some(pattern.tag.as_str()) {
        return false;
    }
    let named = |i: usize| {
        pattern
            .component
            .as_deref()
            .is_none_or(|c| program.components[i].name == c)
    };
    match pattern.kind {
        EventKind::Sent => named(e.sender),
        EventKind::Received => e.receivers.iter().any(|&(j, _)| named(j)),
    }
}

fn term_value<'a>(program: &Program, state: &'a SystemState, t: &'a StateTerm) -> Option<&'a Value> {
    match t {
        StateTerm::Lit(v) => Some(v),
        StateTerm::Attr { component, attr, index } => {
            let i = program.component_index(component)?;
            state.component(i).env.get(&AttrKey::indexed(attr, index.clone()))
        }
    }
}

/// Evaluates a state expression; comparisons over absent attributes or
/// incomparable values are false.
pub fn holds_in(program: &Program, state: &SystemState, e: &StateExpr) -> bool {
    match e {
        StateExpr::True => true,
        StateExpr::False => false,
        StateExpr::Cmp(op, a, b) => match (term_value(program, state, a), term_value(program, state, b)) {
            (Some(x), Some(y)) => compare(*op, x, y).unwrap_or(false),
            _ => false,
        },
        StateExpr::And(a, b) => holds_in(program, state, a) && holds_in(program, state, b),
        StateExpr::Or(a, b) => holds_in(program, state, a) || holds_in(program, state, b),
        StateExpr::Not(a) => !holds_in(program, state, a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails,
    /// The state space was truncated and no conclusive evidence was found.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub name: String,
    pub outcome: Outcome,
    /// Transitions from the initial state: a witness for reachability, a
    /// counterexample otherwise.
    pub path: Vec<usize>,
    /// For leads-to failures that loop: transitions of a cycle starting and
    /// ending at the end of `path`.
    pub lasso: Vec<usize>,
}

impl Verdict {
    fn new(name: &str, outcome: Outcome) -> Self {
        Verdict {
            name: name.to_string(),
            outcome,
            path: Vec::new(),
            lasso: Vec::new(),
        }
    }
}

/// Breadth-first tree from the initial state: for every reached state, the
/// transition it was first reached through.
struct Tree {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

fn bfs_tree(lts: &Lts, succ: &[Vec<usize>]) -> Tree {
    let mut parent = vec![None; lts.states.len()];
    let mut depth = vec![usize::MAX; lts.states.len()];
    let mut queue = VecDeque::new();
    if !lts.states.is_empty() {
        depth[Lts::INITIAL] = 0;
        queue.push_back(Lts::INITIAL);
    }
    while let Some(s) = queue.pop_front() {
        for &t in &succ[s] {
            let to = lts.transitions[t].to;
            if depth[to] == usize::MAX {
                depth[to] = depth[s] + 1;
                parent[to] = Some(t);
                queue.push_back(to);
            }
        }
    }
    Tree { parent, depth }
}

fn path_to(lts: &Lts, tree: &Tree, mut s: usize) -> Vec<usize> {
    let mut path = Vec::new();
    while let Some(t) = tree.parent[s] {
        path.push(t);
        s = lts.transitions[t].from;
    }
    path.reverse();
    path
}

pub fn check_reachable_event(program: &Program, lts: &Lts, name: &str, event: &Event) -> Verdict {
    let succ = lts.successors();
    let tree = bfs_tree(lts, &succ);
    let best = lts
        .transitions
        .iter()
        .enumerate()
        .filter(|(_, t)| matches_event(program, &t.event, event))
        .min_by_key(|(i, t)| (tree.depth[t.from], *i));
    match best {
        Some((t, tr)) => {
            let mut v = Verdict::new(name, Outcome::Holds);
            v.path = path_to(lts, &tree, tr.from);
            v.path.push(t);
            v
        }
        None if lts.truncated => Verdict::new(name, Outcome::Unknown),
        None => Verdict::new(name, Outcome::Fails),
    }
}

/// First state in breadth-first order satisfying `pred`.
fn first_state(lts: &Lts, pred: impl Fn(&SystemState) -> bool) -> Option<Vec<usize>> {
    let succ = lts.successors();
    let tree = bfs_tree(lts, &succ);
    let mut order: Vec<usize> = (0..lts.states.len()).collect();
    order.sort_by_key(|&s| tree.depth[s]);
    order
        .into_iter()
        .find(|&s| pred(&lts.states[s]))
        .map(|s| path_to(lts, &tree, s))
}

pub fn check_reachable_state(program: &Program, lts: &Lts, name: &str, expr: &StateExpr) -> Verdict {
    match first_state(lts, |s| holds_in(program, s, expr)) {
        Some(path) => Verdict {
            path,
            ..Verdict::new(name, Outcome::Holds)
        },
        None if lts.truncated => Verdict::new(name, Outcome::Unknown),
        None => Verdict::new(name, Outcome::Fails),
    }
}

pub fn check_invariant(program: &Program, lts: &Lts, name: &str, expr: &StateExpr) -> Verdict {
    match first_state(lts, |s| !holds_in(program, s, expr)) {
        Some(path) => Verdict {
            path,
            ..Verdict::new(name, Outcome::Fails)
        },
        None if lts.truncated => Verdict::new(name, Outcome::Unknown),
        None => Verdict::new(name, Outcome::Holds),
    }
}

/// Every trigger occurrence is followed, on every maximal path from its
/// target, by some goal occurrence. With goal transitions removed, the
/// property fails exactly when a trigger target can reach a state without
/// successors or a cycle. No fairness is assumed.
pub fn check_leads_to(program: &Program, lts: &Lts, name: &str, trigger: &Event, goals: &[Event]) -> Verdict {
    if lts.truncated {
        return Verdict::new(name, Outcome::Unknown);
    }
    let is_trigger: Vec<bool> = lts
        .transitions
        .iter()
        .map(|t| matches_event(program, &t.event, trigger))
        .collect();
    let is_goal: Vec<bool> = lts
        .transitions
        .iter()
        .map(|t| goals.iter().any(|g| matches_event(program, &t.event, g)))
        .collect();
    leads_to(lts, name, &is_trigger, &is_goal)
}

/// The leads-to check over precomputed trigger and goal marks per transition.
pub fn leads_to(lts: &Lts, name: &str, is_trigger: &[bool], is_goal: &[bool]) -> Verdict {
    let n = lts.states.len();
    let succ = lts.successors();

    let mut graph: DiGraph<(), usize> = DiGraph::with_capacity(n, lts.transitions.len());
    for _ in 0..n {
        graph.add_node(());
    }
    for (t, tr) in lts.transitions.iter().enumerate() {
        if !is_goal[t] {
            graph.add_edge(NodeIndex::new(tr.from), NodeIndex::new(tr.to), t);
        }
    }

    // seeds: deadlocks of the full system, and states on a goal-free cycle
    let mut cyclic = vec![false; n];
    for scc in tarjan_scc(&graph) {
        let looping = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if looping {
            for s in scc {
                cyclic[s.index()] = true;
            }
        }
    }
    let seed: Vec<bool> = (0..n).map(|s| succ[s].is_empty() || cyclic[s]).collect();

    // states that can reach a seed without a goal transition
    let mut bad = seed.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| seed[s]).collect();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edge_indices() {
        let (a, b) = graph.edge_endpoints(e).expect("edge");
        pred[b.index()].push(a.index());
    }
    while let Some(s) = queue.pop_front() {
        for &p in &pred[s] {
            if !bad[p] {
                bad[p] = true;
                queue.push_back(p);
            }
        }
    }

    let tree = bfs_tree(lts, &succ);
    let culprit = lts
        .transitions
        .iter()
        .enumerate()
        .filter(|&(t, tr)| is_trigger[t] && bad[tr.to])
        .min_by_key(|&(t, tr)| (tree.depth[tr.from], t));
    let Some((t, tr)) = culprit else {
        return Verdict::new(name, Outcome::Holds);
    };

    let mut path = path_to(lts, &tree, tr.from);
    path.push(t);

    // shortest goal-free continuation from the trigger target to a seed
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([tr.to]);
    seen[tr.to] = true;
    let mut end = tr.to;
    while let Some(s) = queue.pop_front() {
        if seed[s] {
            end = s;
            break;
        }
        for e in graph.edges(NodeIndex::new(s)) {
            let to = petgraph::visit::EdgeRef::target(&e).index();
            if !seen[to] {
                seen[to] = true;
                via[to] = Some(*e.weight());
                queue.push_back(to);
            }
        }
    }
    let mut tail = Vec::new();
    let mut s = end;
    while s != tr.to {
        let t = via[s].expect("bfs tree");
        tail.push(t);
        s = lts.transitions[t].from;
    }
    tail.reverse();
    path.extend(tail);

    let mut lasso = Vec::new();
    if !succ[end].is_empty() {
        lasso = goal_free_cycle(lts, &graph, &cyclic, end);
    }
    Verdict {
        name: name.to_string(),
        outcome: Outcome::Fails,
        path,
        lasso,
    }
}

/// A cycle through `start` using only edges of `graph` inside cyclic states.
fn goal_free_cycle(lts: &Lts, graph: &DiGraph<(), usize>, cyclic: &[bool], start: usize) -> Vec<usize> {
    let n = lts.states.len();
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::from([start]);
    let mut seen = vec![false; n];
    while let Some(s) = queue.pop_front() {
        for e in graph.edges(NodeIndex::new(s)) {
            let t = *e.weight();
            let to = lts.transitions[t].to;
            if to == start {
                let mut cycle = vec![t];
                let mut cur = s;
                while cur != start {
                    let t = via[cur].expect("bfs tree");
                    cycle.push(t);
                    cur = lts.transitions[t].from;
                }
                cycle.reverse();
                return cycle;
            }
            if cyclic[to] && !seen[to] {
                seen[to] = true;
                via[to] = Some(t);
                queue.push_back(to);
            }
        }
    }
    Vec::new()
}

pub fn check_property(program: &Program, lts: &Lts, decl: &PropertyDecl) -> Verdict {
    match &decl.property {
        Property::ReachableEvent(e) => check_reachable_event(program, lts, &decl.name, e),
        Property::ReachableState(s) => check_reachable_state(program, lts, &decl.name, s),
        Property::Invariant(s) => check_invariant(program, lts, &decl.name, s),
        Property::LeadsTo { trigger, goals } => check_leads_to(program, lts, &decl.name, trigger, goals),
    }
}

/// Human-readable rendering of a transition.
pub fn describe_transition(program: &Program, lts: &Lts, t: usize) -> String {
    let tr = &lts.transitions[t];
    let e = &tr.event;
    let msg: Vec<String> = e.message.iter().map(Value::to_string).collect();
    let recv: Vec<&str> = e
        .receivers
        .iter()
        .map(|&(j, _)| program.components[j].name.as_str())
        .collect();
    format!(
        "{} -> {}: {} sends ({}) @ ({}) to [{}]",
        tr.from,
        tr.to,
        program.components[e.sender].name,
        msg.join(", "),
        e.predicate,
        recv.join(", ")
    )
}

/// Renders a verdict's path and lasso, one transition per line.
pub fn render_trace(program: &Program, lts: &Lts, v: &Verdict) -> String {
    let mut out = String::new();
    for &t in &v.path {
        let _ = writeln!(out, "  {}", describe_transition(program, lts, t));
    }
    if !v.lasso.is_empty() {
        out.push_str("  loop:\n");
        for &t in &v.lasso {
            let _ = writeln!(out, "    {}", describe_transition(program, lts, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;
    use crate::term::Pred;

    fn program(src: &str) -> Program {
        Program::new(parse_spec(src).unwrap_or_else(|d| panic!("{d:?}")))
    }

    fn synthetic(n: usize, edges: &[(usize, usize)]) -> Lts {
        Lts {
            states: vec![SystemState(Vec::new()); n],
            transitions: edges
                .iter()
                .map(|&(from, to)| Transition {
                    from,
                    to,
                    event: BroadcastEvent {
                        sender: 0,
                        sender_branch: 0,
                        message: Vec::new(),
                        predicate: Pred::True,
                        exposed: Default::default(),
                        receivers: Vec::new(),
                        discarded: Vec::new(),
                    },
                })
                .collect(),
            truncated: false,
        }
    }

    #[test]
    fn ping_lts() {
        let p = program(
            r#"component A { attrs { } interface { } run ("ping")@(tt).0 }
               component B { attrs { } interface { } run (tt)(x).0 }"#,
        );
        let lts = explore(&p, Limits::default()).unwrap();
        assert_eq!((lts.states.len(), lts.transitions.len()), (2, 1));
        assert!(lts.export(&p).contains("TRANS 0 1 A \"ping\""));
    }

    #[test]
    fn limits_truncate() {
        let p = program(
            r#"proc K = ("n")@(tt).[n := n + 1] K
               component A { attrs { n = 0; } interface { } run K }"#,
        );
        let lts = explore(
            &p,
            Limits {
                max_states: 10,
                ..Limits::default()
            },
        )
        .unwrap();
        assert!(lts.truncated);
        assert_eq!(lts.states.len(), 10);
        let lts = explore(
            &p,
            Limits {
                max_depth: 3,
                ..Limits::default()
            },
        )
        .unwrap();
        assert!(lts.truncated);
        assert_eq!(lts.states.len(), 4);
    }

    #[test]
    fn leads_to_on_small_graphs() {
        // 0 -t-> 1 -g-> 2
        let lts = synthetic(3, &[(0, 1), (1, 2)]);
        assert_eq!(
            leads_to(&lts, "p", &[true, false], &[false, true]).outcome,
            Outcome::Holds
        );
        // the goal is optional: 1 may also deadlock via 3
        let lts = synthetic(4, &[(0, 1), (1, 2), (1, 3)]);
        let v = leads_to(&lts, "p", &[true, false, false], &[false, true, false]);
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(v.path, vec![0, 2]);
        // a goal-free loop
        let lts = synthetic(3, &[(0, 1), (1, 1), (1, 2)]);
        let v = leads_to(&lts, "p", &[true, false, false], &[false, false, true]);
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(v.lasso, vec![1]);
        // no trigger at all
        let lts = synthetic(2, &[(0, 1)]);
        assert_eq!(leads_to(&lts, "p", &[false], &[false]).outcome, Outcome::Holds);
    }

    #[test]
    fn invariants_and_reachability() {
        let p = program(
            r#"component A { attrs { n = 0; } interface { } run ("go")@(tt).[n := 1] 0 }
               property r = reachable sent(A, "go")
               property z = reachable sent(*, "zzz")
               property i = invariant A.n >= 0
               property f = invariant ff
               property s = reachable A.n = 1"#,
        );
        let lts = explore(&p, Limits::default()).unwrap();
        let outcome = |n: &str| check_property(&p, &lts, p.spec.property(n).unwrap()).outcome;
        assert_eq!(outcome("r"), Outcome::Holds);
        assert_eq!(outcome("z"), Outcome::Fails);
        assert_eq!(outcome("i"), Outcome::Holds);
        assert_eq!(outcome("f"), Outcome::Fails);
        assert_eq!(outcome("s"), Outcome::Holds);
    }
}
