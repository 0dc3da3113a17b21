//! Expression evaluation, predicate closure and satisfaction, substitution,
//! environment restriction and attribute updates.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::term::{AttrKey, AttributeEnv, Call, CmpOp, Expr, Input, Output, Pred, Proc, Substitution, Update};
use crate::value::Value;

/// Names of the built-in functions. Arithmetic operators are stored as
/// `Apply("+", ..)` and friends.
pub const ARITH_OPS: [&str; 4] = ["+", "-", "*", "/"];
pub const BUILTIN_FUNCTIONS: [&str; 3] = ["diff", "tuple", "proj"];

pub fn is_arith_op(name: &str) -> bool {
    ARITH_OPS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("attribute `{0}` is not defined")]
    AbsentAttr(AttrKey),
    #[error("extern `{name}` has no entry for arguments ({args})")]
    MissingEntry { name: String, args: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{op}` expects {expected} argument(s), got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("type error in `{op}`: {detail}")]
    Type { op: String, detail: String },
    #[error("ordered comparison `{0}` involves undef")]
    UndefOrdering(&'static str),
    #[error("integer overflow in `{0}`")]
    Overflow(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("extern `{0}` draws a nondeterministic value where none is allowed")]
    DrawNotAllowed(String),
}

/// A declared external function.
#[derive(Debug, Clone, PartialEq)]
pub enum Extern {
    /// Nondeterministic choice among a finite, non-empty set of values.
    Domain(Vec<Value>),
    /// Deterministic lookup table from argument tuples to results.
    Table(BTreeMap<Vec<Value>, Value>),
}

pub type Externs = HashMap<String, Extern>;

/// Source of values for [`Extern::Domain`] draws.
pub trait Chooser {
    /// Picks an index in `0..domain_len` for a draw from extern `name`.
    fn choose(&mut self, name: &str, domain_len: usize) -> Result<usize, EvalError>;
}

/// Rejects every draw; used where evaluation must be deterministic.
pub struct NoDraws;

impl Chooser for NoDraws {
    fn choose(&mut self, name: &str, _: usize) -> Result<usize, EvalError> {
        Err(EvalError::DrawNotAllowed(name.to_string()))
    }
}

/// Draws uniformly using a seeded generator.
pub struct RngChooser<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> Chooser for RngChooser<'_, R> {
    fn choose(&mut self, _: &str, domain_len: usize) -> Result<usize, EvalError> {
        Ok(self.0.gen_range(0..domain_len))
    }
}

/// Replays a fixed prefix of choices and takes index 0 past it, recording
/// the domain size seen at every draw point.
#[derive(Debug, Default)]
struct Replay {
    prefix: Vec<usize>,
    taken: Vec<(usize, usize)>,
}

impl Chooser for Replay {
    fn choose(&mut self, _: &str, domain_len: usize) -> Result<usize, EvalError> {
        let pos = self.taken.len();
        let pick = self.prefix.get(pos).copied().unwrap_or(0);
        self.taken.push((pick, domain_len));
        Ok(pick)
    }
}

/// Runs `f` once for every combination of extern draws it performs and
/// collects the results in lexicographic order of the draw sequence.
/// `f` must perform the same draws given the same answers.
pub fn for_each_draw<T>(mut f: impl FnMut(&mut dyn Chooser) -> Result<T, EvalError>) -> Result<Vec<T>, EvalError> {
    let mut out = Vec::new();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut replay = Replay {
            prefix: prefix.clone(),
            taken: Vec::new(),
        };
        out.push(f(&mut replay)?);
        let mut taken = replay.taken;
        // advance the last draw that still has untried alternatives
        loop {
            match taken.pop() {
                None => return Ok(out),
                Some((pick, len)) if pick + 1 < len => {
                    prefix = taken.iter().map(|(p, _)| *p).collect();
                    prefix.push(pick + 1);
                    break;
                }
                Some(_) => {}
            }
        }
    }
}

/// Everything needed to evaluate an expression other than the term itself.
pub struct EvalCtx<'a> {
    pub env: &'a AttributeEnv,
    pub subst: &'a Substitution,
    pub externs: &'a Externs,
}

impl<'a> EvalCtx<'a> {
    pub fn new(env: &'a AttributeEnv, subst: &'a Substitution, externs: &'a Externs) -> Self {
        EvalCtx { env, subst, externs }
    }
}

pub fn evaluate(e: &Expr, ctx: &EvalCtx<'_>, draws: &mut dyn Chooser) -> Result<Value, EvalError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => ctx
            .subst
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVar(x.clone())),
        Expr::Attr(name, idx) | Expr::This(name, idx) => {
            let key = AttrKey {
                name: name.clone(),
                index: idx.iter().map(|i| evaluate(i, ctx, draws)).collect::<Result<_, _>>()?,
            };
            ctx.env.get(&key).cloned().ok_or(EvalError::AbsentAttr(key))
        }
        Expr::Apply(f, args) => {
            if let Some(ext) = ctx.externs.get(f) {
                return match ext {
                    Extern::Domain(values) => {
                        if !args.is_empty() {
                            return Err(EvalError::Arity {
                                op: f.clone(),
                                expected: 0,
                                got: args.len(),
                            });
                        }
                        let pick = draws.choose(f, values.len())?;
                        Ok(values[pick].clone())
                    }
                    Extern::Table(table) => {
                        let vals = args
                            .iter()
                            .map(|a| evaluate(a, ctx, draws))
                            .collect::<Result<Vec<_>, _>>()?;
                        table.get(&vals).cloned().ok_or_else(|| EvalError::MissingEntry {
                            name: f.clone(),
                            args: vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
                        })
                    }
                };
            }
            let vals = args
                .iter()
                .map(|a| evaluate(a, ctx, draws))
                .collect::<Result<Vec<_>, _>>()?;
            apply_builtin(f, vals)
        }
    }
}

fn arity(op: &str, vals: &[Value], expected: usize) -> Result<(), EvalError> {
    if vals.len() != expected {
        return Err(EvalError::Arity {
            op: op.to_string(),
            expected,
            got: vals.len(),
        });
    }
    Ok(())
}

fn apply_builtin(f: &str, mut vals: Vec<Value>) -> Result<Value, EvalError> {
    let type_err = |detail: String| EvalError::Type {
        op: f.to_string(),
        detail,
    };
    match f {
        "+" | "-" | "*" | "/" => {
            arity(f, &vals, 2)?;
            let (a, b) = (&vals[0], &vals[1]);
            match (a, b) {
                (Value::Int(x), Value::Int(y)) => {
                    let r = match f {
                        "+" => x.checked_add(*y),
                        "-" => x.checked_sub(*y),
                        "*" => x.checked_mul(*y),
                        _ => {
                            if *y == 0 {
                                return Err(EvalError::DivisionByZero);
                            }
                            x.checked_div(*y)
                        }
                    };
                    r.map(Value::Int).ok_or_else(|| EvalError::Overflow(f.to_string()))
                }
                _ => {
                    let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) else {
                        return Err(type_err(format!("{} and {}", a.kind(), b.kind())));
                    };
                    Ok(Value::Float(match f {
                        "+" => x + y,
                        "-" => x - y,
                        "*" => x * y,
                        _ => {
                            if y == 0.0 {
                                return Err(EvalError::DivisionByZero);
                            }
                            x / y
                        }
                    }))
                }
            }
        }
        "diff" => {
            arity(f, &vals, 2)?;
            match (&vals[0], &vals[1]) {
                (Value::Int(x), Value::Int(y)) => x
                    .checked_sub(*y)
                    .and_then(i64::checked_abs)
                    .map(Value::Int)
                    .ok_or_else(|| EvalError::Overflow(f.to_string())),
                (a, b) => match (a.as_f64(), b.as_f64()) {
                    (Some(x), Some(y)) => Ok(Value::Float((x - y).abs())),
                    _ => Err(type_err(format!("{} and {}", a.kind(), b.kind()))),
                },
            }
        }
        "tuple" => Ok(Value::Tuple(vals)),
        "proj" => {
            arity(f, &vals, 2)?;
            let idx = vals.pop();
            let tuple = vals.pop();
            match (tuple, idx) {
                (Some(Value::Tuple(items)), Some(Value::Int(i))) => usize::try_from(i)
                    .ok()
                    .and_then(|i| items.get(i).cloned())
                    .ok_or_else(|| type_err(format!("index {i} out of range"))),
                (t, i) => Err(type_err(format!(
                    "{} and {}",
                    t.map_or("nothing", |v| v.kind()),
                    i.map_or("nothing", |v| v.kind())
                ))),
            }
        }
        other => Err(EvalError::UnknownFunction(other.to_string())),
    }
}

/// Applies a comparison operator with the numeric coercion rules of the
/// calculus. Ordered comparisons with `undef` are errors.
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, EvalError> {
    match op {
        CmpOp::Eq => Ok(a.loose_eq(b)),
        CmpOp::Ne => Ok(!a.loose_eq(b)),
        _ => {
            if matches!(a, Value::Undef) || matches!(b, Value::Undef) {
                return Err(EvalError::UndefOrdering(op.symbol()));
            }
            let ord = a.try_cmp(b).ok_or_else(|| EvalError::Type {
                op: op.symbol().to_string(),
                detail: format!("cannot order {} and {}", a.kind(), b.kind()),
            })?;
            Ok(match op {
                CmpOp::Lt => ord.is_lt(),
                CmpOp::Le => ord.is_le(),
                CmpOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
    }
}

pub fn member(elem: &Value, set: &Value) -> Result<bool, EvalError> {
    match set {
        Value::Set(items) => Ok(items.contains(elem) || items.iter().any(|v| v.loose_eq(elem))),
        Value::Tuple(items) => Ok(items.iter().any(|v| v.loose_eq(elem))),
        other => Err(EvalError::Type {
            op: "in".to_string(),
            detail: format!("{} is not a collection", other.kind()),
        }),
    }
}

/// Evaluates an atomic predicate; absent attributes and other evaluation
/// errors surface as `Err` and are mapped by the caller.
fn eval_atom(p: &Pred, ctx: &EvalCtx<'_>) -> Result<bool, EvalError> {
    let draws = &mut NoDraws;
    match p {
        Pred::Cmp(op, a, b) => compare(*op, &evaluate(a, ctx, draws)?, &evaluate(b, ctx, draws)?),
        Pred::Member(e, s) => member(&evaluate(e, ctx, draws)?, &evaluate(s, ctx, draws)?),
        Pred::Atom(name, args) => match evaluate(&Expr::Apply(name.clone(), args.clone()), ctx, draws)? {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::Type {
                op: name.clone(),
                detail: format!("atomic predicate returned {}", other.kind()),
            }),
        },
        _ => unreachable!("not an atomic predicate"),
    }
}

/// `env ⊨ pred`. Bare attributes are looked up in `env`; an atomic
/// predicate that cannot be evaluated there (absent attribute, type
/// mismatch, missing table entry) is false.
pub fn satisfies(env: &AttributeEnv, pred: &Pred, externs: &Externs) -> bool {
    let empty = Substitution::new();
    let ctx = EvalCtx::new(env, &empty, externs);
    sat(pred, &ctx)
}

fn sat(pred: &Pred, ctx: &EvalCtx<'_>) -> bool {
    match pred {
        Pred::True => true,
        Pred::False => false,
        Pred::And(a, b) => sat(a, ctx) && sat(b, ctx),
        Pred::Or(a, b) => sat(a, ctx) || sat(b, ctx),
        Pred::Not(p) => !sat(p, ctx),
        atom => eval_atom(atom, ctx).unwrap_or(false),
    }
}

/// Local evaluation of an awareness guard: closure under the component's
/// own environment followed by satisfaction in the same environment.
pub fn holds_locally(
    guard: &Pred,
    env: &AttributeEnv,
    subst: &Substitution,
    externs: &Externs,
) -> Result<bool, EvalError> {
    Ok(satisfies(env, &close(guard, env, subst)?, externs))
}

/// `{pred}_env`: replaces `this.a` by its value in `env` and variables by
/// their values in `subst`. Bare attributes stay symbolic.
pub fn close(pred: &Pred, env: &AttributeEnv, subst: &Substitution) -> Result<Pred, EvalError> {
    Ok(match pred {
        Pred::True => Pred::True,
        Pred::False => Pred::False,
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, close_expr(a, env, subst)?, close_expr(b, env, subst)?),
        Pred::Member(a, b) => Pred::Member(close_expr(a, env, subst)?, close_expr(b, env, subst)?),
        Pred::Atom(n, args) => Pred::Atom(
            n.clone(),
            args.iter()
                .map(|a| close_expr(a, env, subst))
                .collect::<Result<_, _>>()?,
        ),
        Pred::And(a, b) => close(a, env, subst)?.and(close(b, env, subst)?),
        Pred::Or(a, b) => close(a, env, subst)?.or(close(b, env, subst)?),
        Pred::Not(p) => close(p, env, subst)?.negate(),
    })
}

fn close_expr(e: &Expr, env: &AttributeEnv, subst: &Substitution) -> Result<Expr, EvalError> {
    Ok(match e {
        Expr::Lit(_) => e.clone(),
        Expr::Var(x) => Expr::Lit(subst.get(x).cloned().ok_or_else(|| EvalError::UnboundVar(x.clone()))?),
        Expr::This(..) => {
            let externs = Externs::new();
            Expr::Lit(evaluate(e, &EvalCtx::new(env, subst, &externs), &mut NoDraws)?)
        }
        Expr::Attr(n, idx) => Expr::Attr(
            n.clone(),
            idx.iter()
                .map(|i| close_expr(i, env, subst))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Apply(f, args) => Expr::Apply(
            f.clone(),
            args.iter()
                .map(|a| close_expr(a, env, subst))
                .collect::<Result<_, _>>()?,
        ),
    })
}

pub fn substitute_expr(e: &Expr, subst: &Substitution) -> Expr {
    match e {
        Expr::Lit(_) => e.clone(),
        Expr::Var(x) => subst.get(x).map_or_else(|| e.clone(), |v| Expr::Lit(v.clone())),
        Expr::Attr(n, idx) => Expr::Attr(n.clone(), idx.iter().map(|i| substitute_expr(i, subst)).collect()),
        Expr::This(n, idx) => Expr::This(n.clone(), idx.iter().map(|i| substitute_expr(i, subst)).collect()),
        Expr::Apply(f, args) => Expr::Apply(f.clone(), args.iter().map(|a| substitute_expr(a, subst)).collect()),
    }
}

/// `pred[subst]`; variables not in `subst` are left in place.
pub fn substitute(pred: &Pred, subst: &Substitution) -> Pred {
    if subst.is_empty() {
        return pred.clone();
    }
    match pred {
        Pred::True | Pred::False => pred.clone(),
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, substitute_expr(a, subst), substitute_expr(b, subst)),
        Pred::Member(a, b) => Pred::Member(substitute_expr(a, subst), substitute_expr(b, subst)),
        Pred::Atom(n, args) => Pred::Atom(n.clone(), args.iter().map(|a| substitute_expr(a, subst)).collect()),
        Pred::And(a, b) => substitute(a, subst).and(substitute(b, subst)),
        Pred::Or(a, b) => substitute(a, subst).or(substitute(b, subst)),
        Pred::Not(p) => substitute(p, subst).negate(),
    }
}

fn substitute_updates(updates: &[Update], subst: &Substitution) -> Vec<Update> {
    updates
        .iter()
        .map(|u| Update {
            attr: u.attr.clone(),
            index: u.index.iter().map(|i| substitute_expr(i, subst)).collect(),
            value: substitute_expr(&u.value, subst),
        })
        .collect()
}

/// Capture-free substitution into a process: input binders shadow, and
/// calls record the bindings for the free variables of their definition.
pub fn substitute_proc(p: &Proc, subst: &Substitution) -> Proc {
    if subst.is_empty() {
        return p.clone();
    }
    match p {
        Proc::Inact => Proc::Inact,
        Proc::Call(c) => {
            let mut bindings = c.bindings.clone();
            bindings.extend_missing(subst);
            Proc::Call(Call {
                name: c.name.clone(),
                bindings,
                span: c.span,
            })
        }
        Proc::Input(i) => {
            let inner = subst.without(&i.binders);
            Proc::Input(Input {
                guard: substitute(&i.guard, &inner),
                binders: i.binders.clone(),
                updates: substitute_updates(&i.updates, &inner),
                cont: Arc::new(substitute_proc(&i.cont, &inner)),
                span: i.span,
            })
        }
        Proc::Output(o) => Proc::Output(Output {
            payload: o.payload.iter().map(|e| substitute_expr(e, subst)).collect(),
            target: substitute(&o.target, subst),
            updates: substitute_updates(&o.updates, subst),
            cont: Arc::new(substitute_proc(&o.cont, subst)),
            span: o.span,
        }),
        Proc::Aware(g, body, span) => Proc::Aware(substitute(g, subst), Arc::new(substitute_proc(body, subst)), *span),
        Proc::Choice(a, b) => Proc::choice(substitute_proc(a, subst), substitute_proc(b, subst)),
        Proc::Par(a, b) => Proc::par(substitute_proc(a, subst), substitute_proc(b, subst)),
    }
}

/// `env↓interface`: the entries whose attribute name is in the interface.
pub fn restrict(env: &AttributeEnv, interface: &BTreeSet<String>) -> AttributeEnv {
    let mut out = env.clone();
    out.retain(|k| interface.contains(&k.name));
    out
}

/// Applies updates left to right; each index and right-hand side is
/// evaluated in the environment produced by the preceding updates.
pub fn apply_updates(
    env: &AttributeEnv,
    updates: &[Update],
    subst: &Substitution,
    externs: &Externs,
    draws: &mut dyn Chooser,
) -> Result<AttributeEnv, EvalError> {
    let mut env = env.clone();
    for u in updates {
        let ctx = EvalCtx::new(&env, subst, externs);
        let index = u
            .index
            .iter()
            .map(|i| evaluate(i, &ctx, draws))
            .collect::<Result<Vec<_>, _>>()?;
        let value = evaluate(&u.value, &ctx, draws)?;
        env.set(
            AttrKey {
                name: u.attr.clone(),
                index,
            },
            value,
        );
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_externs() -> Externs {
        Externs::new()
    }

    fn eval(e: &Expr, env: &AttributeEnv, subst: &Substitution, ext: &Externs) -> Result<Value, EvalError> {
        evaluate(e, &EvalCtx::new(env, subst, ext), &mut NoDraws)
    }

    #[test]
    fn attribute_lookup() {
        let env = AttributeEnv::new().with("price", 100);
        let v = eval(&Expr::attr("price"), &env, &Substitution::new(), &no_externs()).unwrap();
        assert_eq!(v, Value::Int(100));
    }

    #[test]
    fn commission_is_ten_percent_as_float() {
        let e = Expr::binary("*", Expr::var("p"), Expr::lit(0.10));
        let s = Substitution::new().with("p", 200);
        let v = eval(&e, &AttributeEnv::new(), &s, &no_externs()).unwrap();
        assert_eq!(v, Value::Float(20.0));
    }

    #[test]
    fn indexed_decrement() {
        let env = AttributeEnv::new().with_indexed("room", vec![Value::Int(3)], 2);
        let e = Expr::binary("-", Expr::Attr("room".into(), vec![Expr::lit(3)]), Expr::lit(1));
        assert_eq!(
            eval(&e, &env, &Substitution::new(), &no_externs()).unwrap(),
            Value::Int(1)
        );
    }

    #[test]
    fn table_extern_lookup() {
        let mut ext = Externs::new();
        ext.insert(
            "get_hotels".into(),
            Extern::Table([(vec![Value::text("rome")], Value::Int(2))].into_iter().collect()),
        );
        let e = Expr::apply("get_hotels", vec![Expr::lit("rome")]);
        assert_eq!(
            eval(&e, &AttributeEnv::new(), &Substitution::new(), &ext).unwrap(),
            Value::Int(2)
        );
        let missing = Expr::apply("get_hotels", vec![Expr::lit("oslo")]);
        assert!(matches!(
            eval(&missing, &AttributeEnv::new(), &Substitution::new(), &ext),
            Err(EvalError::MissingEntry { .. })
        ));
    }

    #[test]
    fn evaluation_errors() {
        let env = AttributeEnv::new().with("favh", Value::Undef);
        let s = Substitution::new();
        let ext = no_externs();
        assert!(matches!(
            eval(&Expr::var("x"), &env, &s, &ext),
            Err(EvalError::UnboundVar(_))
        ));
        assert!(matches!(
            eval(&Expr::attr("nope"), &env, &s, &ext),
            Err(EvalError::AbsentAttr(_))
        ));
        let bad = Expr::binary("+", Expr::lit("a"), Expr::lit(1));
        assert!(matches!(eval(&bad, &env, &s, &ext), Err(EvalError::Type { .. })));
        assert!(matches!(
            compare(CmpOp::Lt, &Value::Undef, &Value::Int(1)),
            Err(EvalError::UndefOrdering(_))
        ));
        assert!(compare(CmpOp::Eq, env.get_plain("favh").unwrap(), &Value::Undef).unwrap());
    }

    #[test]
    fn domain_draws_are_enumerated() {
        let mut ext = Externs::new();
        ext.insert(
            "pick".into(),
            Extern::Domain(vec![Value::Int(1), Value::Int(2), Value::Int(3)]),
        );
        let env = AttributeEnv::new();
        let s = Substitution::new();
        let e = Expr::binary("+", Expr::apply("pick", vec![]), Expr::apply("pick", vec![]));
        let all = for_each_draw(|d| evaluate(&e, &EvalCtx::new(&env, &s, &ext), d)).unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], Value::Int(2));
        assert_eq!(all[8], Value::Int(6));
        assert!(eval(&Expr::apply("pick", vec![]), &env, &s, &ext).is_err());
    }

    #[test]
    fn closure_freezes_this_references() {
        let env = AttributeEnv::new().with("favh", "h1");
        let p = Pred::eq(Expr::attr("id"), Expr::this("favh"));
        let closed = close(&p, &env, &Substitution::new()).unwrap();
        assert_eq!(closed, Pred::eq(Expr::attr("id"), Expr::lit("h1")));
        let broker = Pred::eq(Expr::attr("type"), Expr::lit("Broker"));
        assert_eq!(close(&broker, &env, &Substitution::new()).unwrap(), broker);
        assert_eq!(close(&Pred::False, &env, &Substitution::new()).unwrap(), Pred::False);
        let missing = Pred::eq(Expr::attr("id"), Expr::this("ref"));
        assert!(close(&missing, &env, &Substitution::new()).is_err());
    }

    #[test]
    fn satisfaction() {
        let ext = no_externs();
        let broker = AttributeEnv::new().with("type", "Broker");
        assert!(satisfies(
            &broker,
            &Pred::eq(Expr::attr("type"), Expr::lit("Broker")),
            &ext
        ));
        let hotel = AttributeEnv::new().with("type", "Hotel").with("locality", "rome");
        let p =
            Pred::eq(Expr::attr("type"), Expr::lit("Hotel")).and(Pred::eq(Expr::attr("locality"), Expr::lit("paris")));
        assert!(!satisfies(&hotel, &p, &ext));
        let cheap = Pred::cmp(CmpOp::Le, Expr::attr("price"), Expr::lit(100));
        assert!(!satisfies(&AttributeEnv::new(), &cheap, &ext));
    }

    #[test]
    fn substitution_into_receiving_predicate() {
        let p = Pred::eq(Expr::var("x"), Expr::lit("offer")).and(Pred::cmp(CmpOp::Le, Expr::var("op"), Expr::var("p")));
        let s = Substitution::new().with("x", "offer").with("op", 90).with("p", 100);
        let expected =
            Pred::eq(Expr::lit("offer"), Expr::lit("offer")).and(Pred::cmp(CmpOp::Le, Expr::lit(90), Expr::lit(100)));
        assert_eq!(substitute(&p, &s), expected);
        assert_eq!(substitute(&p, &Substitution::new()), p);
    }

    #[test]
    fn binders_shadow_during_substitution() {
        let inner = Proc::output(vec![Expr::var("x")], Pred::True, vec![], Proc::Inact);
        let p = Proc::input(Pred::True, &["x"], vec![], inner.clone());
        let s = Substitution::new().with("x", 1);
        assert_eq!(substitute_proc(&p, &s), p);
    }

    #[test]
    fn restriction() {
        let env = AttributeEnv::new()
            .with("id", "h1")
            .with("roomPrice", 80)
            .with("secret", 1);
        let iface: BTreeSet<String> = ["id", "roomPrice"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            restrict(&env, &iface),
            AttributeEnv::new().with("id", "h1").with("roomPrice", 80)
        );
        assert!(restrict(&env, &BTreeSet::new()).is_empty());
        let all: BTreeSet<String> = env.names().into_iter().map(String::from).collect();
        assert_eq!(restrict(&env, &all), env);
    }

    #[test]
    fn updates_are_sequential() {
        let ext = no_externs();
        let s = Substitution::new();
        let key = vec![Value::text("c1")];
        let env = AttributeEnv::new().with_indexed("cnt", key.clone(), 0);
        let cnt = Expr::Attr("cnt".into(), vec![Expr::lit("c1")]);
        let upd = Update {
            attr: "cnt".into(),
            index: vec![Expr::lit("c1")],
            value: Expr::binary("+", cnt, Expr::lit(1)),
        };
        let out = apply_updates(&env, &[upd], &s, &ext, &mut NoDraws).unwrap();
        assert_eq!(out, AttributeEnv::new().with_indexed("cnt", key, 1));

        let env = AttributeEnv::new().with("send", true);
        let upd = Update {
            attr: "send".into(),
            index: vec![],
            value: Expr::lit(false),
        };
        let out = apply_updates(&env, &[upd], &s, &ext, &mut NoDraws).unwrap();
        assert_eq!(out, AttributeEnv::new().with("send", false));

        let env = AttributeEnv::new().with("a", 1);
        let ups = [
            Update {
                attr: "a".into(),
                index: vec![],
                value: Expr::lit(2),
            },
            Update {
                attr: "b".into(),
                index: vec![],
                value: Expr::attr("a"),
            },
        ];
        let out = apply_updates(&env, &ups, &s, &ext, &mut NoDraws).unwrap();
        assert_eq!(out, AttributeEnv::new().with("a", 2).with("b", 2));
    }
}
