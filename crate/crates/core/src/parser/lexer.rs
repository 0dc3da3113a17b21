use crate::parser::diag::{codes, Diagnostic};
use crate::term::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Integer literal too large for i64 without its sign; only valid
    /// after a unary minus (`-9223372036854775808`).
    IntMinMagnitude,
    Float(f64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    At,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    Slash,
    Bar,
    OrOr,
    AndAnd,
    Bang,
    Arrow,
    Assign,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::IntMinMagnitude => "`9223372036854775808`".to_string(),
            Tok::Float(f) => format!("`{f}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::At => "@",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Bar => "|",
            Tok::OrOr => "||",
            Tok::AndAnd => "&&",
            Tok::Bang => "!",
            Tok::Arrow => "->",
            Tok::Assign => ":=",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
            end_line: self.line,
            end_col: self.col,
        }
    }

    fn finish(&self, start: Span) -> Span {
        Span {
            end: self.pos,
            end_line: self.line,
            end_col: self.col,
            ..start
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.mark();
        let Some(c) = cur.bump() else {
            out.push(Token {
                tok: Tok::Eof,
                span: start,
            });
            return Ok(out);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '=' => Tok::Eq,
            ':' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Assign
                } else {
                    Tok::Colon
                }
            }
            '-' => {
                if cur.peek() == Some('>') {
                    cur.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '!' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            '|' => {
                if cur.peek() == Some('|') {
                    cur.bump();
                    Tok::OrOr
                } else {
                    Tok::Bar
                }
            }
            '&' => {
                if cur.peek() == Some('&') {
                    cur.bump();
                    Tok::AndAnd
                } else {
                    return Err(Diagnostic::error(codes::LEX, cur.finish(start), "expected `&&`"));
                }
            }
            '"' => lex_string(&mut cur, start)?,
            c if c.is_ascii_digit() => lex_number(&mut cur, start)?,
            c if c.is_alphabetic() || c == '_' => {
                let begin = start.start;
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        cur.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(src[begin..cur.pos].to_string())
            }
            other => {
                return Err(Diagnostic::error(
                    codes::LEX,
                    cur.finish(start),
                    format!("unexpected character {other:?}"),
                ))
            }
        };
        out.push(Token {
            tok,
            span: cur.finish(start),
        });
    }
}

fn lex_string(cur: &mut Cursor<'_>, start: Span) -> Result<Tok, Diagnostic> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            None => return Err(Diagnostic::error(codes::LEX, cur.finish(start), "unterminated string")),
            Some('"') => return Ok(Tok::Str(s)),
            Some('\\') => match cur.bump() {
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                Some('"') => s.push('"'),
                Some('\\') => s.push('\\'),
                other => {
                    return Err(Diagnostic::error(
                        codes::LEX,
                        cur.finish(start),
                        format!("unknown escape {other:?}"),
                    ))
                }
            },
            Some(c) => s.push(c),
        }
    }
}

/// Integers, floats with optional exponent, and percentages (`10%` is the
/// float 0.1).
fn lex_number(cur: &mut Cursor<'_>, start: Span) -> Result<Tok, Diagnostic> {
    let begin = start.start;
    let digits = |cur: &mut Cursor<'_>| {
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
    };
    digits(cur);
    let mut is_float = false;
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        cur.bump();
        digits(cur);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let after = cur.peek2();
        let signed = matches!(after, Some('+' | '-'));
        let mut probe = cur.src[cur.pos..].chars().skip(if signed { 2 } else { 1 });
        if probe.next().is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            cur.bump();
            if signed {
                cur.bump();
            }
            digits(cur);
        }
    }
    let text = &cur.src[begin..cur.pos];
    let bad = |cur: &Cursor<'_>| Diagnostic::error(codes::LEX, cur.finish(start), format!("malformed number `{text}`"));
    if cur.peek() == Some('%') {
        cur.bump();
        let v: f64 = text.parse().map_err(|_| bad(cur))?;
        return Ok(Tok::Float(v / 100.0));
    }
    if is_float {
        return text.parse().map(Tok::Float).map_err(|_| bad(cur));
    }
    match text.parse::<i64>() {
        Ok(i) => Ok(Tok::Int(i)),
        Err(_) if text == "9223372036854775808" => Ok(Tok::IntMinMagnitude),
        Err(_) => Err(bad(cur)),
    }
}
