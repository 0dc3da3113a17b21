//! Recursive-descent parser for `.abc` system specifications.
//!
//! Two places need lookahead beyond one token:
//! - At `(` in process position the parser scans to the matching `)` and
//!   looks at what follows: `@` means an output, `(` an input, anything
//!   else a parenthesised process.
//! - Inside `<...>` a `>` is first read as a comparison; if that leads to
//!   a parse failure the guard is re-read with `>` closing the awareness.

use std::sync::Arc;

use crate::model::{
    AttrInit, ComponentDecl, Event, EventKind, ExternDecl, ExternKind, ProcDef, Property, PropertyDecl, StateExpr,
    StateTerm, SystemSpec,
};
use crate::parser::diag::{codes, Diagnostic};
use crate::parser::lexer::{tokenize, Tok, Token};
use crate::term::{Call, CmpOp, Expr, Input, Output, Pred, Proc, Span, Substitution, Update};
use crate::value::Value;

/// Words that can never be attribute, variable or process names.
pub const RESERVED: [&str; 7] = ["tt", "ff", "true", "false", "undef", "this", "in"];

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// Parses source text into an unresolved, unvalidated specification.
pub fn parse_syntax(src: &str) -> PResult<SystemSpec> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    p.spec()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, what: &str) -> PResult<T> {
        Err(Diagnostic::error(
            codes::SYNTAX,
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.peek() == &t {
            Ok(self.advance().span)
        } else {
            self.error(&t.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.is_keyword(kw) {
            Ok(self.advance().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn spec(&mut self) -> PResult<SystemSpec> {
        let mut spec = SystemSpec::default();
        loop {
            let start = self.span();
            match self.peek() {
                Tok::Eof => return Ok(spec),
                Tok::Ident(kw) => match kw.as_str() {
                    "extern" => spec.externs.push(self.extern_decl(start)?),
                    "proc" => spec.procs.push(self.proc_decl(start)?),
                    "component" => spec.components.push(self.component_decl(start)?),
                    "property" => spec.properties.push(self.property_decl(start)?),
                    _ => return self.error("`extern`, `proc`, `component` or `property`"),
                },
                _ => return self.error("a declaration"),
            }
        }
    }

    fn extern_decl(&mut self, start: Span) -> PResult<ExternDecl> {
        self.advance();
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let kind = if self.is_keyword("map") {
            self.advance();
            self.expect(Tok::LBrace)?;
            let mut entries = Vec::new();
            if self.peek() != &Tok::RBrace {
                loop {
                    self.expect(Tok::LParen)?;
                    let args = self.value_list(Tok::RParen)?;
                    self.expect(Tok::Arrow)?;
                    let result = self.value()?;
                    entries.push((args, result));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
            ExternKind::Table(entries)
        } else {
            self.expect(Tok::LBrace)?;
            ExternKind::Domain(self.value_list(Tok::RBrace)?)
        };
        Ok(ExternDecl {
            name,
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn proc_decl(&mut self, start: Span) -> PResult<ProcDef> {
        self.advance();
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let body = self.process()?;
        Ok(ProcDef {
            name,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn component_decl(&mut self, start: Span) -> PResult<ComponentDecl> {
        self.advance();
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.expect_keyword("attrs")?;
        self.expect(Tok::LBrace)?;
        let mut attrs = Vec::new();
        while self.peek() != &Tok::RBrace {
            let a_start = self.span();
            let attr = self.ident()?;
            let index = if self.peek() == &Tok::LBracket {
                self.index()?
            } else {
                Vec::new()
            };
            self.expect(Tok::Eq)?;
            let value = self.value()?;
            self.expect(Tok::Semi)?;
            attrs.push(AttrInit {
                name: attr,
                index,
                value,
                span: a_start.to(self.prev_span()),
            });
        }
        self.expect(Tok::RBrace)?;
        self.expect_keyword("interface")?;
        self.expect(Tok::LBrace)?;
        let mut interface = Vec::new();
        if self.peek() != &Tok::RBrace {
            loop {
                interface.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect_keyword("run")?;
        let run = self.process()?;
        self.expect(Tok::RBrace)?;
        Ok(ComponentDecl {
            name,
            attrs,
            interface,
            run,
            span: start.to(self.prev_span()),
        })
    }

    fn property_decl(&mut self, start: Span) -> PResult<PropertyDecl> {
        self.advance();
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        let property = if self.is_keyword("reachable") {
            self.advance();
            if self.is_keyword("sent") || self.is_keyword("received") {
                Property::ReachableEvent(self.event()?)
            } else {
                Property::ReachableState(self.state_or()?)
            }
        } else if self.is_keyword("invariant") {
            self.advance();
            Property::Invariant(self.state_or()?)
        } else {
            let trigger = self.event()?;
            self.expect_keyword("leadsto")?;
            let mut goals = vec![self.event()?];
            while self.eat(&Tok::OrOr) {
                goals.push(self.event()?);
            }
            Property::LeadsTo { trigger, goals }
        };
        Ok(PropertyDecl {
            name,
            property,
            span: start.to(self.prev_span()),
        })
    }

    fn event(&mut self) -> PResult<Event> {
        let kind = if self.is_keyword("sent") {
            EventKind::Sent
        } else if self.is_keyword("received") {
            EventKind::Received
        } else {
            return self.error("`sent` or `received`");
        };
        self.advance();
        self.expect(Tok::LParen)?;
        let component = if self.eat(&Tok::Star) {
            None
        } else {
            Some(self.ident()?)
        };
        self.expect(Tok::Comma)?;
        let tag = match self.peek() {
            Tok::Str(s) => s.clone(),
            _ => return self.error("a message tag string"),
        };
        self.advance();
        self.expect(Tok::RParen)?;
        Ok(Event { kind, component, tag })
    }

    fn state_or(&mut self) -> PResult<StateExpr> {
        let mut lhs = self.state_and()?;
        while self.eat(&Tok::OrOr) {
            lhs = lhs.or(self.state_and()?);
        }
        Ok(lhs)
    }

    fn state_and(&mut self) -> PResult<StateExpr> {
        let mut lhs = self.state_not()?;
        while self.eat(&Tok::AndAnd) {
            lhs = lhs.and(self.state_not()?);
        }
        Ok(lhs)
    }

    fn state_not(&mut self) -> PResult<StateExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(StateExpr::Not(Box::new(self.state_not()?)));
        }
        if self.is_keyword("tt") {
            self.advance();
            return Ok(StateExpr::True);
        }
        if self.is_keyword("ff") {
            self.advance();
            return Ok(StateExpr::False);
        }
        if self.peek() == &Tok::LParen {
            let save = self.pos;
            self.advance();
            if let Ok(inner) = self.state_or() {
                if self.eat(&Tok::RParen) && cmp_op(self.peek()).is_none() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.state_term()?;
        let Some(op) = cmp_op(self.peek()) else {
            return self.error("a comparison operator");
        };
        self.advance();
        let rhs = self.state_term()?;
        Ok(StateExpr::Cmp(op, lhs, rhs))
    }

    fn state_term(&mut self) -> PResult<StateTerm> {
        if let Tok::Ident(s) = self.peek() {
            if !RESERVED.contains(&s.as_str()) {
                let component = self.ident()?;
                self.expect(Tok::Dot)?;
                let attr = self.ident()?;
                let index = if self.eat(&Tok::LBracket) {
                    self.value_list(Tok::RBracket)?
                } else {
                    Vec::new()
                };
                return Ok(StateTerm::Attr { component, attr, index });
            }
        }
        Ok(StateTerm::Lit(self.value()?))
    }

    /// Comma-separated values up to and including `close`.
    fn value_list(&mut self, close: Tok) -> PResult<Vec<Value>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(self.value()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(close)?;
        Ok(out)
    }

    fn value(&mut self) -> PResult<Value> {
        let v = match self.peek().clone() {
            Tok::Int(i) => Value::Int(i),
            Tok::Float(f) => Value::Float(f),
            Tok::Str(s) => Value::Text(s),
            Tok::Minus => {
                self.advance();
                return self.negative_number().map(|e| match e {
                    Expr::Lit(v) => v,
                    _ => unreachable!(),
                });
            }
            Tok::Ident(s) if s == "true" => Value::Bool(true),
            Tok::Ident(s) if s == "false" => Value::Bool(false),
            Tok::Ident(s) if s == "undef" => Value::Undef,
            Tok::LBrace => {
                self.advance();
                return Ok(Value::Set(self.value_list(Tok::RBrace)?.into_iter().collect()));
            }
            Tok::LParen => {
                self.advance();
                let mut items = Vec::new();
                if self.eat(&Tok::RParen) {
                    return Ok(Value::Tuple(items));
                }
                items.push(self.value()?);
                self.expect(Tok::Comma)?;
                while self.peek() != &Tok::RParen {
                    items.push(self.value()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                return Ok(Value::Tuple(items));
            }
            _ => return self.error("a value"),
        };
        self.advance();
        Ok(v)
    }

    fn negative_number(&mut self) -> PResult<Expr> {
        let v = match self.peek() {
            Tok::Int(i) => Value::Int(-i),
            Tok::IntMinMagnitude => Value::Int(i64::MIN),
            Tok::Float(f) => Value::Float(-f),
            _ => return self.error("a number after unary `-`"),
        };
        self.advance();
        Ok(Expr::Lit(v))
    }

    // ---- processes ----

    pub(crate) fn process(&mut self) -> PResult<Proc> {
        let mut ops = vec![self.choice()?];
        while self.eat(&Tok::Bar) {
            ops.push(self.choice()?);
        }
        Ok(right_nest(ops, true))
    }

    fn choice(&mut self) -> PResult<Proc> {
        let mut ops = vec![self.prefixed()?];
        while self.eat(&Tok::Plus) {
            ops.push(self.prefixed()?);
        }
        Ok(right_nest(ops, false))
    }

    fn prefixed(&mut self) -> PResult<Proc> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(0) => {
                self.advance();
                Ok(Proc::Inact)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                Ok(Proc::Call(Call {
                    name,
                    bindings: Substitution::new(),
                    span: start,
                }))
            }
            Tok::Lt => {
                self.advance();
                let save = self.pos;
                let guard = match self.pred(false).and_then(|g| self.expect(Tok::Gt).map(|_| g)) {
                    Ok(g) => g,
                    Err(first) => {
                        self.pos = save;
                        match self.pred(true).and_then(|g| self.expect(Tok::Gt).map(|_| g)) {
                            Ok(g) => g,
                            Err(_) => return Err(first),
                        }
                    }
                };
                let body = self.prefixed()?;
                Ok(Proc::Aware(guard, Arc::new(body), start.to(self.prev_span())))
            }
            Tok::LParen => {
                let close = self.matching_paren()?;
                match &self.toks[close + 1].tok {
                    Tok::At => self.output(start),
                    Tok::LParen => self.input(start),
                    _ => {
                        self.advance();
                        let p = self.process()?;
                        self.expect(Tok::RParen)?;
                        Ok(p)
                    }
                }
            }
            _ => self.error("a process"),
        }
    }

    fn matching_paren(&self) -> PResult<usize> {
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(self.pos) {
            match t.tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(i);
                    }
                }
                Tok::Eof => break,
                _ => {}
            }
        }
        Err(Diagnostic::error(codes::SYNTAX, self.span(), "unbalanced `(`"))
    }

    fn output(&mut self, start: Span) -> PResult<Proc> {
        self.expect(Tok::LParen)?;
        let mut payload = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                payload.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::At)?;
        self.expect(Tok::LParen)?;
        let target = self.pred(false)?;
        self.expect(Tok::RParen)?;
        let head = start.to(self.prev_span());
        self.expect(Tok::Dot)?;
        let (updates, cont) = self.update_proc()?;
        Ok(Proc::Output(Output {
            payload,
            target,
            updates,
            cont: Arc::new(cont),
            span: head,
        }))
    }

    fn input(&mut self, start: Span) -> PResult<Proc> {
        self.expect(Tok::LParen)?;
        let guard = self.pred(false)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LParen)?;
        let mut binders = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                binders.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        let head = start.to(self.prev_span());
        self.expect(Tok::Dot)?;
        let (updates, cont) = self.update_proc()?;
        Ok(Proc::Input(Input {
            guard,
            binders,
            updates,
            cont: Arc::new(cont),
            span: head,
        }))
    }

    fn update_proc(&mut self) -> PResult<(Vec<Update>, Proc)> {
        let mut updates = Vec::new();
        while self.eat(&Tok::LBracket) {
            loop {
                let attr = self.ident()?;
                let index = if self.peek() == &Tok::LBracket {
                    self.index()?
                } else {
                    Vec::new()
                };
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                updates.push(Update { attr, index, value });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok((updates, self.prefixed()?))
    }

    // ---- predicates ----

    /// `no_gt` makes a top-level `>` end the predicate (awareness guards).
    pub(crate) fn pred(&mut self, no_gt: bool) -> PResult<Pred> {
        let mut lhs = self.pred_and(no_gt)?;
        while self.eat(&Tok::OrOr) {
            lhs = lhs.or(self.pred_and(no_gt)?);
        }
        Ok(lhs)
    }

    fn pred_and(&mut self, no_gt: bool) -> PResult<Pred> {
        let mut lhs = self.pred_not(no_gt)?;
        while self.eat(&Tok::AndAnd) {
            lhs = lhs.and(self.pred_not(no_gt)?);
        }
        Ok(lhs)
    }

    fn pred_not(&mut self, no_gt: bool) -> PResult<Pred> {
        if self.eat(&Tok::Bang) {
            return Ok(self.pred_not(no_gt)?.negate());
        }
        self.pred_atom(no_gt)
    }

    fn pred_atom(&mut self, no_gt: bool) -> PResult<Pred> {
        if self.is_keyword("tt") {
            self.advance();
            return Ok(Pred::True);
        }
        if self.is_keyword("ff") {
            self.advance();
            return Ok(Pred::False);
        }
        if self.peek() == &Tok::LParen {
            let save = self.pos;
            self.advance();
            if let Ok(inner) = self.pred(false) {
                if self.eat(&Tok::RParen) {
                    // in a guard, `>` after the parenthesis closes the guard
                    let closes_guard = no_gt && self.peek() == &Tok::Gt;
                    if closes_guard || !continues_expr(self.peek()) {
                        return Ok(inner);
                    }
                }
            }
            self.pos = save;
        }
        let lhs = self.expr()?;
        if self.is_keyword("in") {
            self.advance();
            return Ok(Pred::Member(lhs, self.expr()?));
        }
        match cmp_op(self.peek()) {
            Some(CmpOp::Gt) if no_gt => {}
            Some(op) => {
                self.advance();
                return Ok(Pred::Cmp(op, lhs, self.expr()?));
            }
            None => {}
        }
        // A bare expression: an atomic predicate when it is a named
        // application, otherwise shorthand for `e = true`.
        Ok(match lhs {
            Expr::Apply(name, args) if !crate::eval::is_arith_op(&name) => Pred::Atom(name, args),
            e => Pred::Cmp(CmpOp::Eq, e, Expr::Lit(Value::Bool(true))),
        })
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => "+",
                Tok::Minus => "-",
                _ => return Ok(lhs),
            };
            self.advance();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => "*",
                Tok::Slash => "/",
                _ => return Ok(lhs),
            };
            self.advance();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return self.negative_number();
        }
        self.primary()
    }

    fn index(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LBracket)?;
        let mut idx = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            idx.push(self.expr()?);
        }
        self.expect(Tok::RBracket)?;
        Ok(idx)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Float(_) | Tok::Str(_) | Tok::LBrace => Ok(Expr::Lit(self.value()?)),
            Tok::Ident(s) if matches!(s.as_str(), "true" | "false" | "undef") => Ok(Expr::Lit(self.value()?)),
            Tok::Ident(s) if s == "this" => {
                self.advance();
                self.expect(Tok::Dot)?;
                let name = self.ident()?;
                let idx = if self.peek() == &Tok::LBracket {
                    self.index()?
                } else {
                    Vec::new()
                };
                Ok(Expr::This(name, idx))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                match self.peek() {
                    Tok::LParen => {
                        self.advance();
                        let mut args = Vec::new();
                        if !self.eat(&Tok::RParen) {
                            loop {
                                args.push(self.expr()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                            self.expect(Tok::RParen)?;
                        }
                        Ok(Expr::Apply(name, args))
                    }
                    Tok::LBracket => {
                        let idx = self.index()?;
                        Ok(Expr::Attr(name, idx))
                    }
                    _ => Ok(Expr::Attr(name, Vec::new())),
                }
            }
            Tok::LParen => {
                self.advance();
                if self.eat(&Tok::RParen) {
                    return Ok(Expr::Lit(Value::Tuple(Vec::new())));
                }
                let first = self.expr()?;
                if self.eat(&Tok::RParen) {
                    return Ok(first);
                }
                self.expect(Tok::Comma)?;
                let mut items = vec![first];
                while self.peek() != &Tok::RParen {
                    items.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                if items.iter().all(|e| matches!(e, Expr::Lit(_))) {
                    let vals = items
                        .into_iter()
                        .map(|e| match e {
                            Expr::Lit(v) => v,
                            _ => unreachable!(),
                        })
                        .collect();
                    Ok(Expr::Lit(Value::Tuple(vals)))
                } else {
                    Ok(Expr::Apply("tuple".to_string(), items))
                }
            }
            _ => self.error("an expression"),
        }
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        _ => return None,
    })
}

/// Tokens that can follow a parenthesised expression but not a
/// parenthesised predicate.
fn continues_expr(t: &Tok) -> bool {
    cmp_op(t).is_some()
        || matches!(t, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)
        || matches!(t, Tok::Ident(s) if s == "in")
}

fn right_nest(mut ops: Vec<Proc>, par: bool) -> Proc {
    let mut acc = ops.pop().expect("at least one operand");
    while let Some(op) = ops.pop() {
        acc = if par {
            Proc::Par(Arc::new(op), Arc::new(acc))
        } else {
            Proc::Choice(Arc::new(op), Arc::new(acc))
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proc_of(src: &str) -> Proc {
        let spec = parse_syntax(&format!("proc P = {src}")).unwrap();
        spec.procs[0].body.clone()
    }

    #[test]
    fn inaction() {
        assert_eq!(proc_of("0"), Proc::Inact);
    }

    #[test]
    fn output_input_and_parenthesised_process() {
        let out = proc_of("(\"a\", 1)@(tt).0");
        assert!(matches!(out, Proc::Output(ref o) if o.payload.len() == 2));
        let inp = proc_of("(x = \"a\")(x, y).0");
        assert!(matches!(inp, Proc::Input(ref i) if i.binders == ["x", "y"]));
        let grouped = proc_of("(A | B)");
        assert!(matches!(grouped, Proc::Par(..)));
        let empty = proc_of("()@(ff).0");
        assert!(matches!(empty, Proc::Output(ref o) if o.payload.is_empty() && o.target == Pred::False));
    }

    #[test]
    fn prefix_binds_tighter_than_choice_and_par() {
        let p = proc_of("()@(tt).A + B | C");
        let Proc::Par(l, r) = p else { panic!("expected par") };
        assert!(matches!(&*r, Proc::Call(c) if c.name == "C"));
        let Proc::Choice(a, b) = &*l else {
            panic!("expected choice")
        };
        assert!(matches!(&**a, Proc::Output(o) if matches!(&*o.cont, Proc::Call(_))));
        assert!(matches!(&**b, Proc::Call(c) if c.name == "B"));
    }

    #[test]
    fn awareness_with_comparisons_inside_angles() {
        let p = proc_of("<room[d] > 0>(\"offer\")@(id = b).0");
        let Proc::Aware(g, _, _) = p else { panic!() };
        assert!(matches!(g, Pred::Cmp(CmpOp::Gt, ..)));
        let p = proc_of("<cnt[c] < nh[l]>(x = \"offer\")(x).0");
        assert!(matches!(p, Proc::Aware(Pred::Cmp(CmpOp::Lt, ..), ..)));
        let p = proc_of("<send> ()@(ff).0");
        let Proc::Aware(g, _, _) = p else { panic!() };
        assert_eq!(g, Pred::eq(Expr::attr("send"), Expr::lit(true)));
    }

    #[test]
    fn updates_and_percent() {
        let p = proc_of("(\"c\", p * 10%)@(id = b).[a := 1][b[x, 2] := a + 1] 0");
        let Proc::Output(o) = p else { panic!() };
        assert_eq!(o.payload[1], Expr::binary("*", Expr::attr("p"), Expr::lit(0.1)));
        assert_eq!(o.updates.len(), 2);
        assert_eq!(o.updates[1].index.len(), 2);
    }

    #[test]
    fn predicate_parentheses_disambiguate() {
        let spec = parse_syntax("proc P = ((a + b) * c = d && (e || f = 1))(x).0").unwrap();
        let Proc::Input(i) = &spec.procs[0].body else { panic!() };
        let Pred::And(l, r) = &i.guard else {
            panic!("{:?}", i.guard)
        };
        assert!(matches!(&**l, Pred::Cmp(CmpOp::Eq, Expr::Apply(op, _), _) if op == "*"));
        assert!(matches!(&**r, Pred::Or(..)));
    }

    #[test]
    fn membership_and_atoms() {
        let p = proc_of("(b in this.blist && ok(x))(b).0");
        let Proc::Input(i) = p else { panic!() };
        let Pred::And(l, r) = i.guard else { panic!() };
        assert!(matches!(*l, Pred::Member(_, Expr::This(..))));
        assert!(matches!(*r, Pred::Atom(ref n, _) if n == "ok"));
    }

    #[test]
    fn declarations() {
        let src = r#"
            extern get_day : {5, 6}
            extern get_hotels : map { ("rome") -> 2, ("paris") -> 1 }
            component C {
                attrs { id = "c1"; room[5] = 1; blist = {"br1"}; pos = (1, 2); }
                interface { id }
                run 0
            }
            property p1 = sent(C, "acms") leadsto received(C, "finish") || received(*, "x")
            property p2 = invariant C.room[5] >= 0 && !(C.id = "x")
            property p3 = reachable received(C, "confirm")
            property p4 = reachable tt
        "#;
        let spec = parse_syntax(src).unwrap();
        assert_eq!(spec.externs.len(), 2);
        assert_eq!(spec.components[0].attrs.len(), 4);
        assert!(matches!(&spec.properties[0].property, Property::LeadsTo { goals, .. } if goals.len() == 2));
        assert!(matches!(
            &spec.properties[1].property,
            Property::Invariant(StateExpr::And(..))
        ));
        assert!(matches!(&spec.properties[2].property, Property::ReachableEvent(_)));
        assert!(matches!(
            &spec.properties[3].property,
            Property::ReachableState(StateExpr::True)
        ));
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let err = parse_syntax("proc P = (x)@(tt)\n 0").unwrap_err();
        assert_eq!(err.code, codes::SYNTAX);
        assert_eq!(err.span.line, 2);
        assert!(parse_syntax("proc = 0").is_err());
        assert!(parse_syntax("component C { attrs { } run 0 }").is_err());
    }
}
