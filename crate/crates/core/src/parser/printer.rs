//! Canonical text rendering of terms and specifications. Output re-parses
//! to an equal AST; parentheses are only emitted where precedence needs them.

use std::fmt::{self, Write};

use crate::eval::is_arith_op;
use crate::model::{Event, EventKind, ExternKind, Property, StateExpr, StateTerm, SystemSpec};
use crate::term::{CmpOp, Expr, Pred, Proc, Update};

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Apply(op, args) if args.len() == 2 && (op == "+" || op == "-") => 1,
        Expr::Apply(op, args) if args.len() == 2 && (op == "*" || op == "/") => 2,
        _ => 3,
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Var(x) => out.push_str(x),
        Expr::Attr(n, idx) => {
            out.push_str(n);
            write_index(out, idx);
        }
        Expr::This(n, idx) => {
            out.push_str("this.");
            out.push_str(n);
            write_index(out, idx);
        }
        Expr::Apply(op, args) if is_arith_op(op) && args.len() == 2 => {
            let prec = expr_prec(e);
            write_expr_at(out, &args[0], prec);
            let _ = write!(out, " {op} ");
            // left-associative: an equal-precedence right operand needs parens
            write_expr_at(out, &args[1], prec + 1);
        }
        Expr::Apply(f, args) => {
            out.push_str(f);
            out.push('(');
            write_exprs(out, args);
            out.push(')');
        }
    }
}

fn write_expr_at(out: &mut String, e: &Expr, min_prec: u8) {
    if expr_prec(e) < min_prec {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_exprs(out: &mut String, es: &[Expr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e);
    }
}

fn write_index(out: &mut String, idx: &[Expr]) {
    if !idx.is_empty() {
        out.push('[');
        write_exprs(out, idx);
        out.push(']');
    }
}

fn pred_prec(p: &Pred) -> u8 {
    match p {
        Pred::Or(..) => 1,
        Pred::And(..) => 2,
        Pred::Not(_) => 3,
        _ => 4,
    }
}

fn write_pred(out: &mut String, p: &Pred) {
    write_pred_in(out, p, false);
}

/// Inside `<...>` a `>` comparison followed by more predicate text is
/// ambiguous with the closing bracket, so `wrap_gt` parenthesizes those.
fn write_pred_in(out: &mut String, p: &Pred, wrap_gt: bool) {
    match p {
        Pred::True => out.push_str("tt"),
        Pred::False => out.push_str("ff"),
        Pred::Cmp(CmpOp::Gt, ..) if wrap_gt => {
            out.push('(');
            write_pred_in(out, p, false);
            out.push(')');
        }
        Pred::Cmp(op, a, b) => {
            write_expr(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b);
        }
        Pred::Member(a, b) => {
            write_expr(out, a);
            out.push_str(" in ");
            write_expr(out, b);
        }
        Pred::Atom(f, args) => {
            out.push_str(f);
            out.push('(');
            write_exprs(out, args);
            out.push(')');
        }
        Pred::Or(a, b) => {
            write_pred_at(out, a, 1, wrap_gt);
            out.push_str(" || ");
            write_pred_at(out, b, 2, wrap_gt);
        }
        Pred::And(a, b) => {
            write_pred_at(out, a, 2, wrap_gt);
            out.push_str(" && ");
            write_pred_at(out, b, 3, wrap_gt);
        }
        Pred::Not(a) => {
            out.push('!');
            write_pred_at(out, a, 3, wrap_gt);
        }
    }
}

fn write_pred_at(out: &mut String, p: &Pred, min_prec: u8, wrap_gt: bool) {
    if pred_prec(p) < min_prec {
        out.push('(');
        write_pred_in(out, p, false);
        out.push(')');
    } else {
        write_pred_in(out, p, wrap_gt);
    }
}

fn write_guard(out: &mut String, g: &Pred) {
    write_pred_in(out, g, !matches!(g, Pred::Cmp(..)));
}

fn proc_prec(p: &Proc) -> u8 {
    match p {
        Proc::Par(..) => 1,
        Proc::Choice(..) => 2,
        _ => 3,
    }
}

fn write_updates(out: &mut String, updates: &[Update]) {
    if updates.is_empty() {
        return;
    }
    out.push('[');
    for (i, u) in updates.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&u.attr);
        write_index(out, &u.index);
        out.push_str(" := ");
        write_expr(out, &u.value);
    }
    out.push_str("] ");
}

fn write_proc(out: &mut String, p: &Proc) {
    match p {
        Proc::Inact => out.push('0'),
        Proc::Call(c) => {
            out.push_str(&c.name);
            // runtime-only annotation: values captured for the body's free variables
            if !c.bindings.is_empty() {
                out.push('{');
                for (i, (k, v)) in c.bindings.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{k} = {v}");
                }
                out.push('}');
            }
        }
        Proc::Output(o) => {
            out.push('(');
            write_exprs(out, &o.payload);
            out.push_str(")@(");
            write_pred(out, &o.target);
            out.push_str(").");
            write_updates(out, &o.updates);
            write_proc_at(out, &o.cont, 3);
        }
        Proc::Input(i) => {
            out.push('(');
            write_pred(out, &i.guard);
            out.push_str(")(");
            out.push_str(&i.binders.join(", "));
            out.push_str(").");
            write_updates(out, &i.updates);
            write_proc_at(out, &i.cont, 3);
        }
        Proc::Aware(g, body, _) => {
            out.push('<');
            write_guard(out, g);
            out.push_str("> ");
            write_proc_at(out, body, 3);
        }
        Proc::Choice(a, b) => {
            write_proc_at(out, a, 3);
            out.push_str(" + ");
            write_proc_at(out, b, 2);
        }
        Proc::Par(a, b) => {
            write_proc_at(out, a, 2);
            out.push_str(" | ");
            write_proc_at(out, b, 1);
        }
    }
}

fn write_proc_at(out: &mut String, p: &Proc, min_prec: u8) {
    if proc_prec(p) < min_prec {
        out.push('(');
        write_proc(out, p);
        out.push(')');
    } else {
        write_proc(out, p);
    }
}

fn write_event(out: &mut String, e: &Event) {
    let kind = match e.kind {
        EventKind::Sent => "sent",
        EventKind::Received => "received",
    };
    let comp = e.component.as_deref().unwrap_or("*");
    let _ = write!(out, "{kind}({comp}, {})", crate::value::escape_text(&e.tag));
}

fn state_prec(s: &StateExpr) -> u8 {
    match s {
        StateExpr::Or(..) => 1,
        StateExpr::And(..) => 2,
        StateExpr::Not(_) => 3,
        _ => 4,
    }
}

fn write_state_term(out: &mut String, t: &StateTerm) {
    match t {
        StateTerm::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        StateTerm::Attr { component, attr, index } => {
            let _ = write!(out, "{component}.{attr}");
            if !index.is_empty() {
                out.push('[');
                for (i, v) in index.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{v}");
                }
                out.push(']');
            }
        }
    }
}

fn write_state(out: &mut String, s: &StateExpr) {
    let at = |out: &mut String, s: &StateExpr, min: u8| {
        if state_prec(s) < min {
            out.push('(');
            write_state(out, s);
            out.push(')');
        } else {
            write_state(out, s);
        }
    };
    match s {
        StateExpr::True => out.push_str("tt"),
        StateExpr::False => out.push_str("ff"),
        StateExpr::Cmp(op, a, b) => {
            write_state_term(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_state_term(out, b);
        }
        StateExpr::Or(a, b) => {
            at(out, a, 1);
            out.push_str(" || ");
            at(out, b, 2);
        }
        StateExpr::And(a, b) => {
            at(out, a, 2);
            out.push_str(" && ");
            at(out, b, 3);
        }
        StateExpr::Not(a) => {
            out.push('!');
            at(out, a, 3);
        }
    }
}

pub fn property_to_string(p: &Property) -> String {
    let mut out = String::new();
    match p {
        Property::ReachableEvent(e) => {
            out.push_str("reachable ");
            write_event(&mut out, e);
        }
        Property::ReachableState(s) => {
            out.push_str("reachable ");
            write_state(&mut out, s);
        }
        Property::Invariant(s) => {
            out.push_str("invariant ");
            write_state(&mut out, s);
        }
        Property::LeadsTo { trigger, goals } => {
            write_event(&mut out, trigger);
            out.push_str(" leadsto ");
            for (i, g) in goals.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                write_event(&mut out, g);
            }
        }
    }
    out
}

/// Renders a whole specification: externs, then process definitions,
/// components and properties, each group separated by a blank line.
pub fn pretty_print(spec: &SystemSpec) -> String {
    let mut groups: Vec<String> = Vec::new();
    let mut out = String::new();
    for e in &spec.externs {
        let _ = write!(out, "extern {} : ", e.name);
        match &e.kind {
            ExternKind::Domain(vals) => {
                out.push('{');
                out.push_str(&vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
                out.push('}');
            }
            ExternKind::Table(entries) => {
                out.push_str("map {");
                for (i, (args, res)) in entries.iter().enumerate() {
                    out.push_str(if i > 0 { ",\n    " } else { "\n    " });
                    let args = args.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
                    let _ = write!(out, "({args}) -> {res}");
                }
                out.push_str(if entries.is_empty() { "}" } else { "\n}" });
            }
        }
        out.push('\n');
    }
    groups.push(std::mem::take(&mut out));
    for p in &spec.procs {
        let _ = writeln!(out, "proc {} = {}", p.name, p.body);
    }
    groups.push(std::mem::take(&mut out));
    for c in &spec.components {
        let _ = writeln!(out, "component {} {{", c.name);
        out.push_str("    attrs {");
        for a in &c.attrs {
            let _ = write!(out, " {}", a.name);
            write_index(&mut out, &a.index);
            let _ = write!(out, " = {};", a.value);
        }
        out.push_str(if c.attrs.is_empty() { "}\n" } else { " }\n" });
        let _ = writeln!(out, "    interface {{ {} }}", c.interface.join(", "));
        let _ = writeln!(out, "    run {}", c.run);
        out.push_str("}\n");
    }
    groups.push(std::mem::take(&mut out));
    for p in &spec.properties {
        let _ = writeln!(out, "property {} = {}", p.name, property_to_string(&p.property));
    }
    groups.push(out);
    groups.retain(|g| !g.is_empty());
    groups.join("\n")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_pred(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_proc(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_event(&mut s, self);
        f.write_str(&s)
    }
}

impl fmt::Display for StateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_state(&mut s, self);
        f.write_str(&s)
    }
}
