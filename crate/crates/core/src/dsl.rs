//! Textual pipeline expressions.
//!
//! ```text
//! expr   := term   ( '+' term )*
//! term   := factor ( '/' factor )*
//! factor := IDENT [ '(' [ arg ( ',' arg )* ] ')' ] | '(' expr ')'
//! arg    := NUMBER | IDENT '=' NUMBER
//! ```
//!
//! `/` (parallel) binds tighter than `+` (sequential); both are
//! left-associative. `zmuv + pca(2) + map` is a three-stage sequential flow,
//! and `a + b / c + d` is `a + (b / c) + d`.

use std::fmt;

use thiserror::Error;

use crate::action::{ActionSpec, SpecError, LEAVES};

/// Byte range plus the 1-based line/column of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArgValue {
    Positional(f64),
    Named(String, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub value: ArgValue,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Leaf { name: String, args: Vec<Arg>, span: Span },
    Plus { terms: Vec<Expr>, span: Span },
    Slash { factors: Vec<Expr>, span: Span },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Leaf { span, .. } | Expr::Plus { span, .. } | Expr::Slash { span, .. } => *span,
        }
    }

    /// Span-free s-expression, e.g. `(+ a (/ b c))`.
    pub fn sexpr(&self) -> String {
        match self {
            Expr::Leaf { name, args, .. } if args.is_empty() => name.clone(),
            Expr::Leaf { name, args, .. } => {
                let args: Vec<String> = args
                    .iter()
                    .map(|a| match &a.value {
                        ArgValue::Positional(v) => format!("{v:?}"),
                        ArgValue::Named(k, v) => format!("{k}={v:?}"),
                    })
                    .collect();
                format!("{name}({})", args.join(","))
            }
            Expr::Plus { terms, .. } => {
                format!("(+ {})", terms.iter().map(Expr::sexpr).collect::<Vec<_>>().join(" "))
            }
            Expr::Slash { factors, .. } => {
                format!("(/ {})", factors.iter().map(Expr::sexpr).collect::<Vec<_>>().join(" "))
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DslError {
    #[error("syntax error at line {}, column {}: expected {}, found {found}", span.line, span.column, expected.join(" or "))]
    Syntax { span: Span, expected: Vec<String>, found: String },
    #[error("at line {}, column {}: {source}", span.line, span.column)]
    Spec {
        span: Span,
        #[source]
        source: SpecError,
    },
}

impl DslError {
    pub fn span(&self) -> Span {
        match self {
            DslError::Syntax { span, .. } | DslError::Spec { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Plus,
    Slash,
    LParen,
    RParen,
    Comma,
    Equals,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(v) => write!(f, "number {v}"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Equals => f.write_str("'='"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, DslError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0, 1, 0);
    let span = |start: usize, end: usize, line: usize, line_start: usize| Span {
        start,
        end,
        line,
        column: text[line_start..start].chars().count() + 1,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'/' => Some(Tok::Slash),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push((tok, span(start, i, line, line_start)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_owned()), span(start, i, line, line_start)));
        } else if c.is_ascii_digit() || c == b'.' || c == b'-' {
            i += 1;
            while i < bytes.len() {
                let b = bytes[i];
                let exp_sign = (b == b'-' || b == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let sp = span(start, i, line, line_start);
            let lexeme = &text[start..i];
            match lexeme.parse::<f64>() {
                Ok(v) => out.push((Tok::Number(v), sp)),
                Err(_) => {
                    return Err(DslError::Syntax {
                        span: sp,
                        expected: vec!["number".into()],
                        found: format!("`{lexeme}`"),
                    })
                }
            }
        } else {
            let ch = text[start..].chars().next().expect("in bounds");
            return Err(DslError::Syntax {
                span: span(start, start + ch.len_utf8(), line, line_start),
                expected: vec!["identifier".into(), "'('".into()],
                found: format!("character {ch:?}"),
            });
        }
    }
    out.push((Tok::Eof, span(text.len(), text.len(), line, line_start)));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

fn join(a: Span, b: Span) -> Span {
    Span { end: b.end, ..a }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        Err(DslError::Syntax {
            span: self.span(),
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Plus {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            let span = join(terms[0].span(), terms[terms.len() - 1].span());
            Expr::Plus { terms, span }
        })
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Slash {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            let span = join(factors[0].span(), factors[factors.len() - 1].span());
            Expr::Slash { factors, span }
        })
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.error(&["'+'", "'/'", "')'"]);
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let (_, mut span) = self.bump();
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.arg()?);
                            match self.peek() {
                                Tok::Comma => {
                                    self.bump();
                                }
                                Tok::RParen => break,
                                _ => return self.error(&["','", "')'"]),
                            }
                        }
                    }
                    let (_, close) = self.bump();
                    span = join(span, close);
                }
                Ok(Expr::Leaf { name, args, span })
            }
            _ => self.error(&["identifier", "'('"]),
        }
    }

    fn arg(&mut self) -> Result<Arg, DslError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                let (_, span) = self.bump();
                Ok(Arg { value: ArgValue::Positional(v), span })
            }
            Tok::Ident(key) => {
                let (_, start) = self.bump();
                if *self.peek() != Tok::Equals {
                    return self.error(&["'='"]);
                }
                self.bump();
                let Tok::Number(v) = self.peek().clone() else {
                    return self.error(&["number"]);
                };
                let (_, end) = self.bump();
                Ok(Arg { value: ArgValue::Named(key, v), span: join(start, end) })
            }
            _ => self.error(&["number", "parameter name"]),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error(&["'+'", "'/'", "end of input"]);
    }
    Ok(e)
}

/// Lowers a parsed expression to a validated [`ActionSpec`]. Single-child
/// `+`/`/` nodes collapse to the child.
pub fn lower(expr: &Expr) -> Result<ActionSpec, DslError> {
    match expr {
        Expr::Leaf { name, args, span } => {
            let mut positional = Vec::new();
            let mut named = Vec::new();
            for a in args {
                match &a.value {
                    ArgValue::Positional(v) => positional.push(*v),
                    ArgValue::Named(k, v) => named.push((k.as_str(), *v)),
                }
            }
            ActionSpec::leaf(name, &positional, &named).map_err(|source| DslError::Spec { span: *span, source })
        }
        Expr::Plus { terms, .. } => collapse(terms, ActionSpec::Sequential),
        Expr::Slash { factors, .. } => collapse(factors, ActionSpec::Parallel),
    }
}

fn collapse(children: &[Expr], build: fn(Vec<ActionSpec>) -> ActionSpec) -> Result<ActionSpec, DslError> {
    let mut lowered = children.iter().map(lower).collect::<Result<Vec<_>, _>>()?;
    Ok(if lowered.len() == 1 { lowered.pop().expect("one child") } else { build(lowered) })
}

/// Parses and lowers in one step.
pub fn compile(text: &str) -> Result<ActionSpec, DslError> {
    lower(&parse(text)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Context {
    Top,
    InSequential,
    InParallel,
}

/// Minimal-parenthesis text form. `parse` then `lower` of the result gives
/// back a structurally equal spec; nested composites of the same kind keep
/// their grouping through parentheses.
pub fn print_canonical(spec: &ActionSpec) -> String {
    let mut out = String::new();
    print_into(spec, Context::Top, &mut out);
    out
}

fn print_into(spec: &ActionSpec, ctx: Context, out: &mut String) {
    match spec {
        ActionSpec::Sequential(children) => {
            let wrap = ctx != Context::Top;
            print_list(children, " + ", Context::InSequential, wrap, out);
        }
        ActionSpec::Parallel(children) => {
            let wrap = ctx == Context::InParallel;
            print_list(children, " / ", Context::InParallel, wrap, out);
        }
        leaf => print_leaf(leaf, out),
    }
}

fn print_list(children: &[ActionSpec], sep: &str, ctx: Context, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
    }
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        print_into(c, ctx, out);
    }
    if wrap {
        out.push(')');
    }
}

fn print_leaf(leaf: &ActionSpec, out: &mut String) {
    let name = leaf.leaf_name().expect("leaf");
    let def = LEAVES.iter().find(|l| l.name == name).expect("registered leaf");
    let args: Vec<String> = leaf
        .leaf_params()
        .into_iter()
        .zip(def.params)
        .filter(|((_, _, is_default), p)| p.required || !is_default)
        .map(|((pname, v, _), p)| {
            let value = if v.fract() == 0.0 && p.ty == crate::action::ParamType::Count {
                format!("{}", v as u64)
            } else {
                format!("{v:?}")
            };
            if p.required {
                value
            } else {
                format!("{pname}={value}")
            }
        })
        .collect();
    out.push_str(name);
    if !args.is_empty() {
        out.push('(');
        out.push_str(&args.join(", "));
        out.push(')');
    }
}
