//! Name resolution and load-time well-formedness checks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::eval::{evaluate, is_arith_op, EvalCtx, Externs, NoDraws, BUILTIN_FUNCTIONS};
use crate::model::{ExternKind, Property, StateTerm, SystemSpec};
use crate::parser::diag::{codes, Diagnostic};
use crate::term::{visit_expr, AttributeEnv, Call, Expr, Input, Output, Pred, Proc, Span, Substitution, Update};

/// Visits every process node reachable without following calls.
pub(crate) fn walk_proc<'a>(p: &'a Proc, f: &mut dyn FnMut(&'a Proc)) {
    f(p);
    match p {
        Proc::Inact | Proc::Call(_) => {}
        Proc::Input(i) => walk_proc(&i.cont, f),
        Proc::Output(o) => walk_proc(&o.cont, f),
        Proc::Aware(_, body, _) => walk_proc(body, f),
        Proc::Choice(a, b) | Proc::Par(a, b) => {
            walk_proc(a, f);
            walk_proc(b, f);
        }
    }
}

fn calls_in(p: &Proc) -> Vec<&str> {
    let mut out = Vec::new();
    walk_proc(p, &mut |n| {
        if let Proc::Call(c) = n {
            out.push(c.name.as_str());
        }
    });
    out
}

fn bare_names_in_pred(p: &Pred, out: &mut BTreeSet<String>) {
    p.visit_exprs(&mut |e| {
        if let Expr::Attr(n, idx) = e {
            if idx.is_empty() {
                out.insert(n.clone());
            }
        }
    });
}

fn bare_names_in_expr(e: &Expr, out: &mut BTreeSet<String>) {
    visit_expr(e, &mut |e| {
        if let Expr::Attr(n, idx) = e {
            if idx.is_empty() {
                out.insert(n.clone());
            }
        }
    });
}

fn bare_names_in_updates(us: &[Update], out: &mut BTreeSet<String>) {
    for u in us {
        u.index.iter().for_each(|i| bare_names_in_expr(i, out));
        bare_names_in_expr(&u.value, out);
    }
}

fn bare_names(p: &Proc) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk_proc(p, &mut |n| match n {
        Proc::Input(i) => {
            bare_names_in_pred(&i.guard, &mut out);
            bare_names_in_updates(&i.updates, &mut out);
        }
        Proc::Output(o) => {
            o.payload.iter().for_each(|e| bare_names_in_expr(e, &mut out));
            bare_names_in_pred(&o.target, &mut out);
            bare_names_in_updates(&o.updates, &mut out);
        }
        Proc::Aware(g, _, _) => bare_names_in_pred(g, &mut out),
        _ => {}
    });
    out
}

/// Decides, for every bare identifier in an expression, whether it denotes
/// a variable or an attribute, and rewrites variables to `Expr::Var`.
///
/// A bare name is a variable when an enclosing input binds it, or when the
/// enclosing process definition is called from a scope that binds it
/// (a spawned handler may read what its parent received). The set of
/// variables a definition captures is computed as a fixpoint over calls.
pub fn resolve(spec: &mut SystemSpec) {
    let defs: HashMap<String, &Proc> = spec.procs.iter().map(|d| (d.name.clone(), &d.body)).collect();

    // transitive bare names: the names a definition may read, including via calls
    let mut tnames: HashMap<String, BTreeSet<String>> =
        defs.iter().map(|(k, body)| (k.clone(), bare_names(body))).collect();
    loop {
        let mut changed = false;
        for (k, body) in &defs {
            let mut acc = tnames[k].clone();
            for c in calls_in(body) {
                if let Some(ns) = tnames.get(c) {
                    acc.extend(ns.iter().cloned());
                }
            }
            if acc.len() != tnames[k].len() {
                tnames.insert(k.clone(), acc);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut captured: HashMap<String, BTreeSet<String>> = defs.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    loop {
        let mut found: Vec<(String, BTreeSet<String>)> = Vec::new();
        let mut record = |p: &Proc, scope: &BTreeSet<String>| {
            collect_call_scopes(p, scope, &mut |name, scope| {
                if let Some(names) = tnames.get(name) {
                    found.push((name.to_string(), names.intersection(scope).cloned().collect()));
                }
            })
        };
        for c in &spec.components {
            record(&c.run, &BTreeSet::new());
        }
        for (k, body) in &defs {
            record(body, &captured[k]);
        }
        let mut changed = false;
        for (name, vars) in found {
            let entry = captured.get_mut(&name).expect("known definition");
            let before = entry.len();
            entry.extend(vars);
            changed |= entry.len() != before;
        }
        if !changed {
            break;
        }
    }

    for d in &mut spec.procs {
        let scope = captured[&d.name].clone();
        d.body = rewrite_proc(&d.body, &scope);
    }
    for c in &mut spec.components {
        c.run = rewrite_proc(&c.run, &BTreeSet::new());
    }
}

fn collect_call_scopes(p: &Proc, scope: &BTreeSet<String>, f: &mut dyn FnMut(&str, &BTreeSet<String>)) {
    match p {
        Proc::Inact => {}
        Proc::Call(c) => f(&c.name, scope),
        Proc::Input(i) => {
            let mut inner = scope.clone();
            inner.extend(i.binders.iter().cloned());
            collect_call_scopes(&i.cont, &inner, f);
        }
        Proc::Output(o) => collect_call_scopes(&o.cont, scope, f),
        Proc::Aware(_, body, _) => collect_call_scopes(body, scope, f),
        Proc::Choice(a, b) | Proc::Par(a, b) => {
            collect_call_scopes(a, scope, f);
            collect_call_scopes(b, scope, f);
        }
    }
}

fn rewrite_expr(e: &Expr, scope: &BTreeSet<String>) -> Expr {
    match e {
        Expr::Attr(n, idx) if idx.is_empty() && scope.contains(n) => Expr::Var(n.clone()),
        Expr::Lit(_) | Expr::Var(_) => e.clone(),
        Expr::Attr(n, idx) => Expr::Attr(n.clone(), idx.iter().map(|i| rewrite_expr(i, scope)).collect()),
        Expr::This(n, idx) => Expr::This(n.clone(), idx.iter().map(|i| rewrite_expr(i, scope)).collect()),
        Expr::Apply(f, args) => Expr::Apply(f.clone(), args.iter().map(|a| rewrite_expr(a, scope)).collect()),
    }
}

fn rewrite_pred(p: &Pred, scope: &BTreeSet<String>) -> Pred {
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, rewrite_expr(a, scope), rewrite_expr(b, scope)),
        Pred::Member(a, b) => Pred::Member(rewrite_expr(a, scope), rewrite_expr(b, scope)),
        Pred::Atom(n, args) => Pred::Atom(n.clone(), args.iter().map(|a| rewrite_expr(a, scope)).collect()),
        Pred::And(a, b) => rewrite_pred(a, scope).and(rewrite_pred(b, scope)),
        Pred::Or(a, b) => rewrite_pred(a, scope).or(rewrite_pred(b, scope)),
        Pred::Not(a) => rewrite_pred(a, scope).negate(),
    }
}

fn rewrite_updates(us: &[Update], scope: &BTreeSet<String>) -> Vec<Update> {
    us.iter()
        .map(|u| Update {
            attr: u.attr.clone(),
            index: u.index.iter().map(|i| rewrite_expr(i, scope)).collect(),
            value: rewrite_expr(&u.value, scope),
        })
        .collect()
}

fn rewrite_proc(p: &Proc, scope: &BTreeSet<String>) -> Proc {
    match p {
        Proc::Inact | Proc::Call(_) => p.clone(),
        Proc::Input(i) => {
            let mut inner = scope.clone();
            inner.extend(i.binders.iter().cloned());
            Proc::Input(Input {
                guard: rewrite_pred(&i.guard, &inner),
                binders: i.binders.clone(),
                updates: rewrite_updates(&i.updates, &inner),
                cont: Arc::new(rewrite_proc(&i.cont, &inner)),
                span: i.span,
            })
        }
        Proc::Output(o) => Proc::Output(Output {
            payload: o.payload.iter().map(|e| rewrite_expr(e, scope)).collect(),
            target: rewrite_pred(&o.target, scope),
            updates: rewrite_updates(&o.updates, scope),
            cont: Arc::new(rewrite_proc(&o.cont, scope)),
            span: o.span,
        }),
        Proc::Aware(g, body, span) => Proc::Aware(rewrite_pred(g, scope), Arc::new(rewrite_proc(body, scope)), *span),
        Proc::Choice(a, b) => Proc::choice(rewrite_proc(a, scope), rewrite_proc(b, scope)),
        Proc::Par(a, b) => Proc::par(rewrite_proc(a, scope), rewrite_proc(b, scope)),
    }
}

/// Free variables of every definition, taking calls into account:
/// `fv(K)` is what a call to `K` must capture.
pub fn free_vars(defs: &HashMap<String, Arc<Proc>>) -> HashMap<String, BTreeSet<String>> {
    let mut fv: HashMap<String, BTreeSet<String>> = defs.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for (k, body) in defs {
            let now = proc_free_vars(body, &fv);
            if now != fv[k] {
                fv.insert(k.clone(), now);
                changed = true;
            }
        }
        if !changed {
            return fv;
        }
    }
}

fn vars_of_expr(e: &Expr, out: &mut BTreeSet<String>) {
    visit_expr(e, &mut |e| {
        if let Expr::Var(x) = e {
            out.insert(x.clone());
        }
    });
}

fn vars_of_pred(p: &Pred, out: &mut BTreeSet<String>) {
    p.visit_exprs(&mut |e| {
        if let Expr::Var(x) = e {
            out.insert(x.clone());
        }
    });
}

fn vars_of_updates(us: &[Update], out: &mut BTreeSet<String>) {
    for u in us {
        u.index.iter().for_each(|i| vars_of_expr(i, out));
        vars_of_expr(&u.value, out);
    }
}

/// Free variables of a process term; calls contribute the free variables
/// of their definition not already captured in their bindings.
pub fn proc_free_vars(p: &Proc, fv: &HashMap<String, BTreeSet<String>>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    match p {
        Proc::Inact => {}
        Proc::Call(Call { name, bindings, .. }) => {
            if let Some(vs) = fv.get(name) {
                out.extend(vs.iter().filter(|v| !bindings.contains(v)).cloned());
            }
        }
        Proc::Input(i) => {
            let mut inner = BTreeSet::new();
            vars_of_pred(&i.guard, &mut inner);
            vars_of_updates(&i.updates, &mut inner);
            inner.extend(proc_free_vars(&i.cont, fv));
            for b in &i.binders {
                inner.remove(b);
            }
            out.extend(inner);
        }
        Proc::Output(o) => {
            o.payload.iter().for_each(|e| vars_of_expr(e, &mut out));
            vars_of_pred(&o.target, &mut out);
            vars_of_updates(&o.updates, &mut out);
            out.extend(proc_free_vars(&o.cont, fv));
        }
        Proc::Aware(g, body, _) => {
            vars_of_pred(g, &mut out);
            out.extend(proc_free_vars(body, fv));
        }
        Proc::Choice(a, b) | Proc::Par(a, b) => {
            out.extend(proc_free_vars(a, fv));
            out.extend(proc_free_vars(b, fv));
        }
    }
    out
}

/// Calls reachable from `p` without passing an action prefix.
fn unguarded_calls(p: &Proc, out: &mut Vec<String>) {
    match p {
        Proc::Call(c) => out.push(c.name.clone()),
        Proc::Aware(_, body, _) => unguarded_calls(body, out),
        Proc::Choice(a, b) | Proc::Par(a, b) => {
            unguarded_calls(a, out);
            unguarded_calls(b, out);
        }
        Proc::Inact | Proc::Input(_) | Proc::Output(_) => {}
    }
}

struct Checker<'a> {
    spec: &'a SystemSpec,
    diags: Vec<Diagnostic>,
    externs: HashMap<&'a str, &'a ExternKind>,
}

impl Checker<'_> {
    fn err(&mut self, code: &'static str, span: Span, msg: String) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn check_expr(&mut self, e: &Expr, span: Span, in_pred: bool) {
        let mut problems = Vec::new();
        visit_expr(e, &mut |e| {
            if let Expr::Apply(f, args) = e {
                problems.extend(self.check_apply(f, args.len(), span, in_pred));
            }
        });
        self.diags.extend(problems);
    }

    fn check_apply(&self, f: &str, argc: usize, span: Span, in_pred: bool) -> Option<Diagnostic> {
        match self.externs.get(f) {
            Some(ExternKind::Domain(_)) if in_pred => Some(Diagnostic::error(
                codes::DRAW_IN_PRED,
                span,
                format!("extern `{f}` draws a nondeterministic value and cannot appear in a predicate"),
            )),
            Some(ExternKind::Domain(_)) if argc != 0 => Some(Diagnostic::error(
                codes::ARITY,
                span,
                format!("extern `{f}` takes no arguments, got {argc}"),
            )),
            Some(ExternKind::Table(entries)) => match entries.first() {
                Some((args, _)) if args.len() != argc => Some(Diagnostic::error(
                    codes::ARITY,
                    span,
                    format!("extern `{f}` takes {} argument(s), got {argc}", args.len()),
                )),
                _ => None,
            },
            Some(_) => None,
            None if is_arith_op(f) || BUILTIN_FUNCTIONS.contains(&f) => None,
            None => Some(Diagnostic::error(
                codes::UNDEF_EXTERN,
                span,
                format!("undefined function `{f}`"),
            )),
        }
    }

    fn check_pred(&mut self, p: &Pred, span: Span) {
        let mut exprs = Vec::new();
        p.visit_exprs(&mut |e| exprs.push(e.clone()));
        // visit_exprs already recurses; only top-level Apply nodes need checking once
        let mut problems = Vec::new();
        for e in &exprs {
            if let Expr::Apply(f, args) = e {
                problems.extend(self.check_apply(f, args.len(), span, true));
            }
        }
        check_atoms(p, &mut |name, argc| {
            problems.extend(self.check_apply(name, argc, span, true));
        });
        self.diags.extend(problems);
    }

    fn check_updates(&mut self, us: &[Update], span: Span) {
        for u in us {
            for i in &u.index {
                self.check_expr(i, span, false);
            }
            self.check_expr(&u.value, span, false);
        }
    }

    fn check_proc(&mut self, p: &Proc) {
        let mut nodes = Vec::new();
        walk_proc(p, &mut |n| nodes.push(n));
        for n in nodes {
            match n {
                Proc::Call(c) => {
                    if self.spec.proc(&c.name).is_none() {
                        self.err(codes::UNDEF_PROC, c.span, format!("undefined process `{}`", c.name));
                    }
                }
                Proc::Input(i) => {
                    let mut seen = HashSet::new();
                    for b in &i.binders {
                        if !seen.insert(b) {
                            self.err(
                                codes::DUP_BINDER,
                                i.span,
                                format!("binder `{b}` appears more than once"),
                            );
                        }
                    }
                    self.check_pred(&i.guard, i.span);
                    self.check_updates(&i.updates, i.span);
                }
                Proc::Output(o) => {
                    for e in &o.payload {
                        self.check_expr(e, o.span, false);
                    }
                    self.check_pred(&o.target, o.span);
                    self.check_updates(&o.updates, o.span);
                }
                Proc::Aware(g, _, span) => self.check_pred(g, *span),
                _ => {}
            }
        }
    }
}

fn check_atoms(p: &Pred, f: &mut dyn FnMut(&str, usize)) {
    match p {
        Pred::Atom(n, args) => f(n, args.len()),
        Pred::And(a, b) | Pred::Or(a, b) => {
            check_atoms(a, f);
            check_atoms(b, f);
        }
        Pred::Not(a) => check_atoms(a, f),
        _ => {}
    }
}

/// Reports every well-formedness problem of a resolved specification.
pub fn validate(spec: &SystemSpec) -> Vec<Diagnostic> {
    let mut ck = Checker {
        spec,
        diags: Vec::new(),
        externs: HashMap::new(),
    };

    for e in &spec.externs {
        if ck.externs.insert(&e.name, &e.kind).is_some() {
            ck.err(
                codes::DUP_EXTERN,
                e.span,
                format!("extern `{}` is declared more than once", e.name),
            );
        }
        match &e.kind {
            ExternKind::Domain(vals) if vals.is_empty() => ck.err(
                codes::EMPTY_DOMAIN,
                e.span,
                format!("extern `{}` has an empty domain", e.name),
            ),
            ExternKind::Table(entries) => {
                if let Some((first, _)) = entries.first() {
                    if entries.iter().any(|(args, _)| args.len() != first.len()) {
                        ck.err(
                            codes::ARITY,
                            e.span,
                            format!("entries of extern `{}` differ in arity", e.name),
                        );
                    }
                }
            }
            _ => {}
        }
    }

    let mut seen = HashSet::new();
    for d in &spec.procs {
        if !seen.insert(d.name.as_str()) {
            ck.err(
                codes::DUP_PROC,
                d.span,
                format!("process `{}` is defined more than once", d.name),
            );
        }
        ck.check_proc(&d.body);
    }

    let mut seen = HashSet::new();
    for c in &spec.components {
        if !seen.insert(c.name.as_str()) {
            ck.err(
                codes::DUP_COMPONENT,
                c.span,
                format!("component `{}` is declared more than once", c.name),
            );
        }
        let attr_names: HashSet<&str> = c.attrs.iter().map(|a| a.name.as_str()).collect();
        for i in &c.interface {
            if !attr_names.contains(i.as_str()) {
                ck.err(
                    codes::INTERFACE,
                    c.span,
                    format!(
                        "interface attribute `{i}` of component `{}` is not declared in its attrs",
                        c.name
                    ),
                );
            }
        }
        let empty_env = AttributeEnv::new();
        let empty_subst = Substitution::new();
        let no_externs = Externs::new();
        for a in &c.attrs {
            for i in &a.index {
                if evaluate(i, &EvalCtx::new(&empty_env, &empty_subst, &no_externs), &mut NoDraws).is_err() {
                    ck.err(
                        codes::ATTR_INIT,
                        a.span,
                        format!("index of attribute `{}` is not a constant", a.name),
                    );
                }
            }
        }
        ck.check_proc(&c.run);
    }

    // unguarded recursion: a cycle through calls not under any prefix
    let graph: BTreeMap<&str, Vec<String>> = spec
        .procs
        .iter()
        .map(|d| {
            let mut out = Vec::new();
            unguarded_calls(&d.body, &mut out);
            (d.name.as_str(), out)
        })
        .collect();
    let mut reported = HashSet::new();
    for d in &spec.procs {
        let mut stack = vec![d.name.clone()];
        let mut visited = HashSet::new();
        while let Some(n) = stack.pop() {
            for next in graph.get(n.as_str()).into_iter().flatten() {
                if next == &d.name && reported.insert(d.name.clone()) {
                    ck.err(
                        codes::UNGUARDED,
                        d.span,
                        format!("process `{}` calls itself without an intervening action", d.name),
                    );
                }
                if visited.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
    }

    check_unbound(spec, &mut ck.diags);

    let mut seen = HashSet::new();
    for p in &spec.properties {
        if !seen.insert(p.name.as_str()) {
            ck.err(
                codes::DUP_PROPERTY,
                p.span,
                format!("property `{}` is declared more than once", p.name),
            );
        }
        let mut comps: Vec<String> = Vec::new();
        match &p.property {
            Property::ReachableEvent(e) => comps.extend(e.component.clone()),
            Property::LeadsTo { trigger, goals } => {
                comps.extend(trigger.component.clone());
                comps.extend(goals.iter().filter_map(|g| g.component.clone()));
            }
            Property::ReachableState(s) | Property::Invariant(s) => s.visit_terms(&mut |t| {
                if let StateTerm::Attr { component, .. } = t {
                    comps.push(component.clone());
                }
            }),
        }
        for c in comps {
            if spec.component(&c).is_none() {
                ck.err(
                    codes::PROP_COMPONENT,
                    p.span,
                    format!("property `{}` refers to unknown component `{c}`", p.name),
                );
            }
        }
    }

    ck.diags.sort_by_key(|d| (d.span.start, d.code));
    ck.diags
}

/// Names read in a local context (payload, update, awareness, `this.a`)
/// must be attributes the component declares or assigns somewhere.
fn check_unbound(spec: &SystemSpec, diags: &mut Vec<Diagnostic>) {
    for c in &spec.components {
        let mut bodies: Vec<&Proc> = vec![&c.run];
        let mut seen: HashSet<&str> = HashSet::new();
        let mut i = 0;
        while i < bodies.len() {
            for name in calls_in(bodies[i]) {
                if seen.insert(name) {
                    if let Some(d) = spec.proc(name) {
                        bodies.push(&d.body);
                    }
                }
            }
            i += 1;
        }

        let mut known: HashSet<&str> = c.attrs.iter().map(|a| a.name.as_str()).collect();
        for b in &bodies {
            walk_proc(b, &mut |n| {
                let ups: &[Update] = match n {
                    Proc::Input(i) => &i.updates,
                    Proc::Output(o) => &o.updates,
                    _ => &[],
                };
                known.extend(ups.iter().map(|u| u.attr.as_str()));
            });
        }

        let mut reported: HashSet<(String, usize)> = HashSet::new();
        for b in &bodies {
            walk_proc(b, &mut |n| {
                let mut local: Vec<(&Expr, Span)> = Vec::new();
                let mut this_refs: Vec<(String, Span)> = Vec::new();
                let mut note_this = |p: &Pred, span: Span| {
                    p.visit_exprs(&mut |e| {
                        if let Expr::This(name, _) = e {
                            this_refs.push((name.clone(), span));
                        }
                    })
                };
                match n {
                    Proc::Output(o) => {
                        local.extend(o.payload.iter().map(|e| (e, o.span)));
                        local.extend(
                            o.updates
                                .iter()
                                .flat_map(|u| u.index.iter().chain([&u.value]))
                                .map(|e| (e, o.span)),
                        );
                        note_this(&o.target, o.span);
                    }
                    Proc::Input(i) => {
                        local.extend(
                            i.updates
                                .iter()
                                .flat_map(|u| u.index.iter().chain([&u.value]))
                                .map(|e| (e, i.span)),
                        );
                        note_this(&i.guard, i.span);
                    }
                    Proc::Aware(g, _, span) => {
                        g.visit_exprs(&mut |e| {
                            if let Expr::Attr(name, _) | Expr::This(name, _) = e {
                                this_refs.push((name.clone(), *span));
                            }
                        });
                    }
                    _ => {}
                }
                for (e, span) in local {
                    visit_expr(e, &mut |e| {
                        if let Expr::Attr(name, _) | Expr::This(name, _) = e {
                            this_refs.push((name.clone(), span));
                        }
                    });
                }
                for (name, span) in this_refs {
                    if !known.contains(name.as_str()) && reported.insert((name.clone(), span.start)) {
                        diags.push(Diagnostic::error(
                            codes::UNBOUND,
                            span,
                            format!(
                                "`{name}` is neither a bound variable nor an attribute of component `{}`",
                                c.name
                            ),
                        ));
                    }
                }
            });
        }
    }
}
