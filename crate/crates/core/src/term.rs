//! Abstract syntax of AbC expressions, predicates and processes, plus the
//! attribute environments and substitutions they are interpreted against.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::value::Value;

/// Source location of a syntax node. Spans never take part in equality,
/// ordering or hashing, so two terms that differ only in layout are equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.start),
            line: self.line,
            col: self.col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }

    pub fn contains(&self, inner: &Span) -> bool {
        self.start <= inner.start && inner.end <= self.end
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Span {}
impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Span {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}
impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(String),
    /// Attribute reference. Inside a communication predicate it is resolved
    /// in the environment of the party judging the predicate.
    Attr(String, Vec<Expr>),
    /// `this.a`: always the local component's attribute.
    This(String, Vec<Expr>),
    /// Built-in operator (`+ - * /`, `diff`, `tuple`, `proj`) or extern.
    Apply(String, Vec<Expr>),
}

impl Expr {
    pub fn lit(v: impl Into<Value>) -> Self {
        Expr::Lit(v.into())
    }
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }
    pub fn attr(name: &str) -> Self {
        Expr::Attr(name.to_string(), Vec::new())
    }
    pub fn this(name: &str) -> Self {
        Expr::This(name.to_string(), Vec::new())
    }
    pub fn apply(f: &str, args: Vec<Expr>) -> Self {
        Expr::Apply(f.to_string(), args)
    }
    pub fn binary(op: &str, lhs: Expr, rhs: Expr) -> Self {
        Expr::Apply(op.to_string(), vec![lhs, rhs])
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}
impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Member(Expr, Expr),
    Atom(String, Vec<Expr>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

impl Pred {
    pub fn cmp(op: CmpOp, lhs: Expr, rhs: Expr) -> Self {
        Pred::Cmp(op, lhs, rhs)
    }
    pub fn eq(lhs: Expr, rhs: Expr) -> Self {
        Pred::Cmp(CmpOp::Eq, lhs, rhs)
    }
    pub fn and(self, other: Pred) -> Self {
        Pred::And(Box::new(self), Box::new(other))
    }
    pub fn or(self, other: Pred) -> Self {
        Pred::Or(Box::new(self), Box::new(other))
    }
    pub fn negate(self) -> Self {
        Pred::Not(Box::new(self))
    }

    /// A predicate is closed when it mentions neither `this.a` nor a variable.
    pub fn is_closed(&self) -> bool {
        let mut closed = true;
        self.visit_exprs(&mut |e| {
            if matches!(e, Expr::This(..) | Expr::Var(_)) {
                closed = false;
            }
        });
        closed
    }

    /// Calls `f` on every expression node, recursively.
    pub fn visit_exprs(&self, f: &mut dyn FnMut(&Expr)) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Cmp(_, a, b) | Pred::Member(a, b) => {
                visit_expr(a, f);
                visit_expr(b, f);
            }
            Pred::Atom(_, args) => args.iter().for_each(|a| visit_expr(a, f)),
            Pred::And(a, b) | Pred::Or(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
            Pred::Not(p) => p.visit_exprs(f),
        }
    }
}

pub fn visit_expr(e: &Expr, f: &mut dyn FnMut(&Expr)) {
    f(e);
    match e {
        Expr::Lit(_) | Expr::Var(_) => {}
        Expr::Attr(_, idx) | Expr::This(_, idx) | Expr::Apply(_, idx) => idx.iter().for_each(|i| visit_expr(i, f)),
    }
}

/// `[a[idx] := value]`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub attr: String,
    pub index: Vec<Expr>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input {
    pub guard: Pred,
    pub binders: Vec<String>,
    pub updates: Vec<Update>,
    pub cont: Arc<Proc>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Output {
    pub payload: Vec<Expr>,
    pub target: Pred,
    pub updates: Vec<Update>,
    pub cont: Arc<Proc>,
    pub span: Span,
}

/// A process call. `bindings` holds the values of the definition's free
/// variables captured at the call site; it is empty in parsed source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Call {
    pub name: String,
    pub bindings: Substitution,
    pub span: Span,
}

/// Process terms. Variant order is the term order used by
/// [`canonicalize`]: calls sort first and `Inact` last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proc {
    Call(Call),
    Input(Input),
    Output(Output),
    Aware(Pred, Arc<Proc>, Span),
    Choice(Arc<Proc>, Arc<Proc>),
    Par(Arc<Proc>, Arc<Proc>),
    Inact,
}

impl Proc {
    pub fn call(name: &str) -> Self {
        Proc::Call(Call {
            name: name.to_string(),
            bindings: Substitution::new(),
            span: Span::default(),
        })
    }

    pub fn input(guard: Pred, binders: &[&str], updates: Vec<Update>, cont: Proc) -> Self {
        Proc::Input(Input {
            guard,
            binders: binders.iter().map(|b| b.to_string()).collect(),
            updates,
            cont: Arc::new(cont),
            span: Span::default(),
        })
    }

    pub fn output(payload: Vec<Expr>, target: Pred, updates: Vec<Update>, cont: Proc) -> Self {
        Proc::Output(Output {
            payload,
            target,
            updates,
            cont: Arc::new(cont),
            span: Span::default(),
        })
    }

    pub fn aware(guard: Pred, body: Proc) -> Self {
        Proc::Aware(guard, Arc::new(body), Span::default())
    }

    pub fn choice(a: Proc, b: Proc) -> Self {
        Proc::Choice(Arc::new(a), Arc::new(b))
    }

    pub fn par(a: Proc, b: Proc) -> Self {
        Proc::Par(Arc::new(a), Arc::new(b))
    }

    /// Number of syntax nodes; used to bound random term generation.
    pub fn size(&self) -> usize {
        match self {
            Proc::Inact | Proc::Call(_) => 1,
            Proc::Input(i) => 1 + i.cont.size(),
            Proc::Output(o) => 1 + o.cont.size(),
            Proc::Aware(_, p, _) => 1 + p.size(),
            Proc::Choice(a, b) | Proc::Par(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Flattens nested `|` and `+` and sorts their operands under the derived
/// term order, rebuilding right-nested chains. Only commutative and
/// associative reordering is performed.
pub fn canonicalize(p: &Proc) -> Proc {
    match p {
        Proc::Inact | Proc::Call(_) => p.clone(),
        Proc::Input(i) => Proc::Input(Input {
            cont: Arc::new(canonicalize(&i.cont)),
            ..i.clone()
        }),
        Proc::Output(o) => Proc::Output(Output {
            cont: Arc::new(canonicalize(&o.cont)),
            ..o.clone()
        }),
        Proc::Aware(g, body, span) => Proc::Aware(g.clone(), Arc::new(canonicalize(body)), *span),
        Proc::Par(..) => {
            let mut ops = Vec::new();
            flatten(p, true, &mut ops);
            rebuild(ops.iter().map(|p| canonicalize(p)).collect(), true)
        }
        Proc::Choice(..) => {
            let mut ops = Vec::new();
            flatten(p, false, &mut ops);
            rebuild(ops.iter().map(|p| canonicalize(p)).collect(), false)
        }
    }
}

pub(crate) fn flatten<'a>(p: &'a Proc, par: bool, out: &mut Vec<&'a Proc>) {
    match (p, par) {
        (Proc::Par(a, b), true) | (Proc::Choice(a, b), false) => {
            flatten(a, par, out);
            flatten(b, par, out);
        }
        _ => out.push(p),
    }
}

/// Sorts `ops` and rebuilds a right-nested `|` (or `+`) chain. Operands
/// that are themselves chains of the same operator are spliced in first.
pub(crate) fn rebuild(ops: Vec<Proc>, par: bool) -> Proc {
    let mut flat = Vec::with_capacity(ops.len());
    for op in ops {
        let mut inner = Vec::new();
        flatten(&op, par, &mut inner);
        if inner.len() == 1 {
            flat.push(op);
        } else {
            flat.extend(inner.into_iter().cloned());
        }
    }
    flat.sort();
    let mut iter = flat.into_iter().rev();
    let mut acc = iter.next().unwrap_or(Proc::Inact);
    for op in iter {
        acc = if par {
            Proc::Par(Arc::new(op), Arc::new(acc))
        } else {
            Proc::Choice(Arc::new(op), Arc::new(acc))
        };
    }
    acc
}

/// Key of an attribute environment entry: the attribute name plus its index
/// tuple (empty for plain attributes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrKey {
    pub name: String,
    pub index: Vec<Value>,
}

impl AttrKey {
    pub fn plain(name: &str) -> Self {
        AttrKey {
            name: name.to_string(),
            index: Vec::new(),
        }
    }
    pub fn indexed(name: &str, index: Vec<Value>) -> Self {
        AttrKey {
            name: name.to_string(),
            index,
        }
    }
}

impl fmt::Display for AttrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.index.is_empty() {
            f.write_str("[")?;
            for (i, v) in self.index.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// A component's attribute environment: a partial map from (possibly
/// indexed) attribute identifiers to values. Entries are kept sorted, so
/// equal environments hash identically.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeEnv {
    entries: BTreeMap<AttrKey, Value>,
}

impl AttributeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &AttrKey) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn get_plain(&self, name: &str) -> Option<&Value> {
        self.entries.get(&AttrKey::plain(name))
    }

    pub fn set(&mut self, key: AttrKey, value: Value) {
        self.entries.insert(key, value);
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.set(AttrKey::plain(name), value.into());
        self
    }

    pub fn with_indexed(mut self, name: &str, index: Vec<Value>, value: impl Into<Value>) -> Self {
        self.set(AttrKey::indexed(name, index), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttrKey, &Value)> {
        self.entries.iter()
    }

    pub fn names(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|k| k.name.as_str()).collect()
    }

    /// True when every entry of `self` is present with the same value in `other`.
    pub fn is_submap_of(&self, other: &AttributeEnv) -> bool {
        self.entries.iter().all(|(k, v)| other.get(k) == Some(v))
    }

    pub(crate) fn retain(&mut self, mut keep: impl FnMut(&AttrKey) -> bool) {
        self.entries.retain(|k, _| keep(k));
    }
}

impl FromIterator<(AttrKey, Value)> for AttributeEnv {
    fn from_iter<T: IntoIterator<Item = (AttrKey, Value)>>(iter: T) -> Self {
        AttributeEnv {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Bindings of variable names to values.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<String, Value>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.map.get(name)
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.map.insert(name.into(), value);
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.bind(name, value.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.map.iter()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    /// The substitution with the given names removed (binders shadowing it).
    pub fn without<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> Substitution {
        let mut out = self.clone();
        for n in names {
            out.map.remove(n);
        }
        out
    }

    pub fn restrict_to(&self, names: &BTreeSet<String>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| names.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub(crate) fn extend_missing(&mut self, other: &Substitution) {
        for (k, v) in &other.map {
            self.map.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
}

impl FromIterator<(String, Value)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (String, Value)>>(iter: T) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}
