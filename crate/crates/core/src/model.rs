//! Parsed system specifications: externs, process definitions, components
//! and properties.

use crate::term::{CmpOp, Expr, Proc, Span};
use crate::value::Value;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemSpec {
    pub externs: Vec<ExternDecl>,
    pub procs: Vec<ProcDef>,
    pub components: Vec<ComponentDecl>,
    pub properties: Vec<PropertyDecl>,
}

impl SystemSpec {
    pub fn proc(&self, name: &str) -> Option<&ProcDef> {
        self.procs.iter().find(|p| p.name == name)
    }

    pub fn component(&self, name: &str) -> Option<&ComponentDecl> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyDecl> {
        self.properties.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExternKind {
    /// `extern f : {v1, v2}`: each call draws one of the values.
    Domain(Vec<Value>),
    /// `extern f : map { (a) -> r, ... }`
    Table(Vec<(Vec<Value>, Value)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternDecl {
    pub name: String,
    pub kind: ExternKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcDef {
    pub name: String,
    pub body: Proc,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrInit {
    pub name: String,
    pub index: Vec<Expr>,
    pub value: Value,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub name: String,
    pub attrs: Vec<AttrInit>,
    pub interface: Vec<String>,
    pub run: Proc,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDecl {
    pub name: String,
    pub property: Property,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    /// Some transition matches the event.
    ReachableEvent(Event),
    /// Some state satisfies the expression.
    ReachableState(StateExpr),
    /// Every reachable state satisfies the expression.
    Invariant(StateExpr),
    /// After every transition matching `trigger`, every maximal path
    /// contains a transition matching one of `goals`.
    LeadsTo { trigger: Event, goals: Vec<Event> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Sent,
    Received,
}

/// `sent(Comp, "tag")` / `received(*, "tag")`. The tag matches the first
/// element of the message payload by text equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub kind: EventKind,
    /// `None` is the `*` wildcard.
    pub component: Option<String>,
    pub tag: String,
}

impl Event {
    pub fn sent(component: Option<&str>, tag: &str) -> Self {
        Event {
            kind: EventKind::Sent,
            component: component.map(String::from),
            tag: tag.to_string(),
        }
    }

    pub fn received(component: Option<&str>, tag: &str) -> Self {
        Event {
            kind: EventKind::Received,
            component: component.map(String::from),
            tag: tag.to_string(),
        }
    }
}

/// Boolean combination of comparisons over component attributes, e.g.
/// `Hotel1.room[5] >= 0 && Cust1.favh != undef`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateExpr {
    True,
    False,
    Cmp(CmpOp, StateTerm, StateTerm),
    And(Box<StateExpr>, Box<StateExpr>),
    Or(Box<StateExpr>, Box<StateExpr>),
    Not(Box<StateExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateTerm {
    Lit(Value),
    Attr {
        component: String,
        attr: String,
        index: Vec<Value>,
    },
}

impl StateExpr {
    pub fn and(self, other: StateExpr) -> Self {
        StateExpr::And(Box::new(self), Box::new(other))
    }
    pub fn or(self, other: StateExpr) -> Self {
        StateExpr::Or(Box::new(self), Box::new(other))
    }

    pub(crate) fn visit_terms(&self, f: &mut dyn FnMut(&StateTerm)) {
        match self {
            StateExpr::True | StateExpr::False => {}
            StateExpr::Cmp(_, a, b) => {
                f(a);
                f(b);
            }
            StateExpr::And(a, b) | StateExpr::Or(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            StateExpr::Not(a) => a.visit_terms(f),
        }
    }
}
