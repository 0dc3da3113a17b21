//! Independent reference implementations used to cross-check the engine.

use abc_core::eval::{close, holds_locally, restrict, satisfies, substitute};
use abc_core::explorer::{Lts, Outcome, Transition, Verdict};
use abc_core::term::Input;
use abc_core::{AttributeEnv, BroadcastEvent, Expr, Extern, Pred, Proc, Program, Substitution, SystemState, Value};

/// Inputs a process can currently perform, found by a direct walk over
/// the term.
fn enabled_inputs(program: &Program, p: &Proc, env: &AttributeEnv, out: &mut Vec<Input>) {
    match p {
        Proc::Inact | Proc::Output(_) => {}
        Proc::Input(i) => out.push(i.clone()),
        Proc::Call(c) => enabled_inputs(program, &program.unfold(c), env, out),
        Proc::Choice(a, b) | Proc::Par(a, b) => {
            enabled_inputs(program, a, env, out);
            enabled_inputs(program, b, env, out);
        }
        Proc::Aware(g, body, _) => {
            if holds_locally(g, env, &Substitution::new(), &program.externs).expect("guard closes") {
                enabled_inputs(program, body, env, out);
            }
        }
    }
}

fn draws_in(e: &Expr, program: &Program) -> usize {
    match e {
        Expr::Apply(f, args) => {
            let own = match program.externs.get(f) {
                Some(Extern::Domain(vals)) => vals.len(),
                _ => 1,
            };
            args.iter().fold(own, |n, a| n * draws_in(a, program))
        }
        Expr::Attr(_, idx) | Expr::This(_, idx) => idx.iter().fold(1, |n, a| n * draws_in(a, program)),
        _ => 1,
    }
}

/// The number of receive branches component `index` should offer for the
/// broadcast; zero means it must discard.
pub fn expected_branches(
    program: &Program,
    state: &SystemState,
    index: usize,
    exposed: &AttributeEnv,
    predicate: &Pred,
    message: &[Value],
) -> usize {
    let comp = state.component(index);
    if !satisfies(
        &restrict(&comp.env, &program.components[index].interface),
        predicate,
        &program.externs,
    ) {
        return 0;
    }
    let mut inputs = Vec::new();
    enabled_inputs(program, &comp.proc, &comp.env, &mut inputs);
    inputs
        .iter()
        .filter(|i| i.binders.len() == message.len())
        .filter(|i| {
            let bind: Substitution = i.binders.iter().cloned().zip(message.iter().cloned()).collect();
            let guard = close(&substitute(&i.guard, &bind), &comp.env, &Substitution::new()).expect("guard closes");
            satisfies(exposed, &guard, &program.externs)
        })
        .map(|i| i.updates.iter().fold(1, |n, u| n * draws_in(&u.value, program)))
        .sum()
}

pub type Graph = Vec<Vec<(usize, bool, bool)>>;

fn dummy_event() -> BroadcastEvent {
    BroadcastEvent {
        sender: 0,
        sender_branch: 0,
        message: Vec::new(),
        predicate: Pred::True,
        exposed: AttributeEnv::new(),
        receivers: Vec::new(),
        discarded: Vec::new(),
    }
}

/// An LTS with placeholder states and events plus trigger and goal marks
/// per transition.
pub fn build_lts(graph: &Graph) -> (Lts, Vec<bool>, Vec<bool>) {
    let mut lts = Lts {
        states: vec![SystemState(Vec::new()); graph.len()],
        ..Lts::default()
    };
    let (mut trig, mut goal) = (Vec::new(), Vec::new());
    for (from, edges) in graph.iter().enumerate() {
        for &(to, t, g) in edges {
            lts.transitions.push(Transition {
                from,
                to,
                event: dummy_event(),
            });
            trig.push(t);
            goal.push(g);
        }
    }
    (lts, trig, goal)
}

/// Memoized depth-first search: a state is bad when a goal-free path from
/// it reaches a deadlock or closes a cycle.
pub fn leads_to_fails_dfs(graph: &Graph) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Good,
        Bad,
    }
    fn visit(s: usize, graph: &Graph, marks: &mut [Mark]) -> bool {
        match marks[s] {
            Mark::Open | Mark::Bad => return true,
            Mark::Good => return false,
            Mark::New => {}
        }
        if graph[s].is_empty() {
            marks[s] = Mark::Bad;
            return true;
        }
        marks[s] = Mark::Open;
        let mut bad = false;
        for &(to, _, goal) in &graph[s] {
            if !goal && visit(to, graph, marks) {
                bad = true;
                break;
            }
        }
        marks[s] = if bad { Mark::Bad } else { Mark::Good };
        bad
    }
    let mut marks = vec![Mark::New; graph.len()];
    graph
        .iter()
        .flatten()
        .filter(|&&(_, trigger, _)| trigger)
        .any(|&(to, _, _)| visit(to, graph, &mut marks))
}

/// Exhaustive enumeration of the simple goal-free paths leaving every
/// trigger target. Exponential; only for small graphs.
pub fn leads_to_fails_brute(graph: &Graph) -> bool {
    fn walk(s: usize, graph: &Graph, on_path: &mut Vec<bool>) -> bool {
        if graph[s].is_empty() {
            return true;
        }
        on_path[s] = true;
        let mut found = false;
        for &(to, _, goal) in &graph[s] {
            if goal {
                continue;
            }
            if on_path[to] || walk(to, graph, on_path) {
                found = true;
                break;
            }
        }
        on_path[s] = false;
        found
    }
    graph
        .iter()
        .flatten()
        .filter(|&&(_, trigger, _)| trigger)
        .any(|&(to, _, _)| walk(to, graph, &mut vec![false; graph.len()]))
}

/// Checks that a failing verdict is a genuine counterexample: a path from
/// the initial state through a trigger, goal-free afterwards, ending in a
/// deadlock or in a goal-free cycle.
pub fn validate_counterexample(lts: &Lts, v: &Verdict, trig: &[bool], goal: &[bool]) -> Result<(), String> {
    if v.outcome != Outcome::Fails {
        return Err("not a failure".into());
    }
    let mut at = Lts::INITIAL;
    for &t in &v.path {
        let tr = &lts.transitions[t];
        if tr.from != at {
            return Err(format!("path breaks at transition {t}"));
        }
        at = tr.to;
    }
    let k = v.path.iter().rposition(|&t| trig[t]).ok_or("path has no trigger")?;
    if v.path[k + 1..].iter().any(|&t| goal[t]) {
        return Err("goal after the trigger".into());
    }
    let outgoing = lts.transitions.iter().any(|t| t.from == at);
    if v.lasso.is_empty() {
        return if outgoing {
            Err("path ends in a live state without a cycle".into())
        } else {
            Ok(())
        };
    }
    let start = at;
    for &t in &v.lasso {
        let tr = &lts.transitions[t];
        if tr.from != at || goal[t] {
            return Err(format!("lasso breaks at transition {t}"));
        }
        at = tr.to;
    }
    if at != start {
        return Err("lasso does not close".into());
    }
    Ok(())
}
