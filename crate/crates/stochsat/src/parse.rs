//! Text format for stochastic constraint problems (`.ssc` files) — a
//! recursive-descent parser and the matching printer.
//!
//! ```text
//! exists x in [-1, 1];
//! exists a in [-inf, inf] sample [-5, 5];
//! rand y ~ uniform(-1, 1);
//! constraint x^2 + y^2 <= 1 and (y >= 1/2 or y >= 1/2*x + 1/2);
//! ```
//!
//! Statements end with `;`. Operator precedence, tightest first:
//! `^`, unary `-`, `*`, binary `+ -`, comparisons, `not`, `and`, `or`.
//! Comparisons are `<= < >= >`; equality atoms are rejected (they carry no
//! probability mass under continuous distributions and cannot be certified
//! from below). `a/b` is a fraction literal, legal only between two numeric
//! literals. `inf` appears only as a domain bound; an unbounded `exists`
//! domain must carry a finite `sample [a, b]` override. `#` starts a
//! comment.

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::formula::{DetVar, Formula, Problem, RandVar};
use crate::interval::Interval;
use crate::poly::Polynomial;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    /// Raw lexeme kept so integer exponents can be told apart from floats.
    Num(String),
    Exists,
    Rand,
    In,
    Sample,
    Constraint,
    And,
    Or,
    Not,
    Inf,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Tilde,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Num(s) => format!("number '{s}'"),
            Tok::Exists => "'exists'".into(),
            Tok::Rand => "'rand'".into(),
            Tok::In => "'in'".into(),
            Tok::Sample => "'sample'".into(),
            Tok::Constraint => "'constraint'".into(),
            Tok::And => "'and'".into(),
            Tok::Or => "'or'".into(),
            Tok::Not => "'not'".into(),
            Tok::Inf => "'inf'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Le => "'<='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Ge => "'>='".into(),
            Tok::Gt => "'>'".into(),
            Tok::Eq => "'='".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            tokens.push(Token {
                tok: $tok,
                line,
                col,
            });
            i += $len;
            col += $len;
        }};
    }
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                let tok = match word.as_str() {
                    "exists" => Tok::Exists,
                    "rand" => Tok::Rand,
                    "in" => Tok::In,
                    "sample" => Tok::Sample,
                    "constraint" => Tok::Constraint,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "inf" => Tok::Inf,
                    _ => Tok::Ident(word),
                };
                let len = i - start;
                i = start; // push! advances
                push!(tok, len);
            }
            c if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let raw: String = bytes[start..i].iter().collect();
                if raw.parse::<f64>().is_err() {
                    return Err(err_at(line, col, format!("malformed number '{raw}'")));
                }
                let len = i - start;
                i = start;
                push!(Tok::Num(raw), len);
            }
            '<' => {
                if bytes.get(i + 1) == Some(&'=') {
                    push!(Tok::Le, 2);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&'=') {
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '=' => {
                if bytes.get(i + 1) == Some(&'=') {
                    push!(Tok::Eq, 2);
                } else {
                    push!(Tok::Eq, 1);
                }
            }
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '~' => push!(Tok::Tilde, 1),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            '^' => push!(Tok::Caret, 1),
            '/' => push!(Tok::Slash, 1),
            other => {
                return Err(err_at(line, col, format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    /// name -> polynomial variable index, filled before expression parsing
    vars: HashMap<String, usize>,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        err_at(line, col, msg)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Token> {
        match self.peek() {
            Some(t) if *t == want => Ok(self.next().unwrap()),
            Some(t) => Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                t.describe()
            ))),
            None => Err(self.error(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.next().unwrap();
                match t.tok {
                    Tok::Ident(s) => Ok((s, t.line, t.col)),
                    _ => unreachable!(),
                }
            }
            Some(t) => Err(self.error(format!("expected identifier, found {}", t.describe()))),
            None => Err(self.error("expected identifier, found end of input")),
        }
    }

    /// A signed numeric literal (finite).
    fn finite_number(&mut self) -> Result<f64> {
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.next();
        }
        match self.peek().cloned() {
            Some(Tok::Num(raw)) => {
                self.next();
                let v: f64 = raw.parse().expect("validated by lexer");
                Ok(if neg { -v } else { v })
            }
            Some(t) => Err(self.error(format!("expected number, found {}", t.describe()))),
            None => Err(self.error("expected number, found end of input")),
        }
    }

    /// A signed numeric literal or +-inf (for domain brackets).
    fn number_or_inf(&mut self) -> Result<f64> {
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if matches!(self.peek(), Some(Tok::Inf)) || matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Inf) if neg)
        {
            if neg {
                self.next();
            }
            self.next();
            return Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY });
        }
        self.finite_number()
    }

    fn bracket_interval(&mut self) -> Result<Interval> {
        self.expect(Tok::LBracket)?;
        let (line, col) = self.here();
        let lo = self.number_or_inf()?;
        self.expect(Tok::Comma)?;
        let hi = self.number_or_inf()?;
        self.expect(Tok::RBracket)?;
        Interval::new(lo, hi).map_err(|e| err_at(line, col, e.to_string()))
    }
}

// ---- statement layer --------------------------------------------------

struct RawConstraint {
    start: usize,
    line: usize,
    col: usize,
}

/// Parses a problem from DSL text, using `name` as the problem name.
pub fn parse_problem_named(text: &str, name: &str) -> Result<Problem> {
    let tokens = lex(text)?;
    let eof = tokens
        .last()
        .map(|t| (t.line, t.col + 1))
        .unwrap_or((1, 1));
    let mut p = Parser {
        tokens,
        pos: 0,
        eof,
        vars: HashMap::new(),
        nvars: 0,
    };

    let mut det_vars: Vec<DetVar> = Vec::new();
    let mut rand_vars: Vec<RandVar> = Vec::new();
    let mut constraint: Option<RawConstraint> = None;

    while let Some(tok) = p.peek().cloned() {
        match tok {
            Tok::Exists => {
                p.next();
                let (name, line, col) = p.expect_ident()?;
                p.expect(Tok::In)?;
                let domain = p.bracket_interval()?;
                let sample = if matches!(p.peek(), Some(Tok::Sample)) {
                    p.next();
                    Some(p.bracket_interval()?)
                } else {
                    None
                };
                p.expect(Tok::Semi)?;
                if det_vars.iter().any(|v| v.name == name)
                    || rand_vars.iter().any(|v| v.name == name)
                {
                    return Err(err_at(line, col, format!("duplicate variable '{name}'")));
                }
                det_vars.push(DetVar {
                    name,
                    domain,
                    sample,
                });
            }
            Tok::Rand => {
                p.next();
                let (name, line, col) = p.expect_ident()?;
                p.expect(Tok::Tilde)?;
                let (dist_name, dline, dcol) = p.expect_ident()?;
                p.expect(Tok::LParen)?;
                let dist = match dist_name.as_str() {
                    "uniform" => {
                        let a = p.finite_number()?;
                        p.expect(Tok::Comma)?;
                        let b = p.finite_number()?;
                        DistributionSpec::uniform(a, b)
                    }
                    "normal" => {
                        let mu = p.finite_number()?;
                        p.expect(Tok::Comma)?;
                        let sigma = p.finite_number()?;
                        DistributionSpec::normal(mu, sigma)
                    }
                    "exponential" => {
                        let lambda = p.finite_number()?;
                        DistributionSpec::exponential(lambda)
                    }
                    other => {
                        return Err(err_at(
                            dline,
                            dcol,
                            format!(
                                "unknown distribution '{other}' (expected uniform, normal, or exponential)"
                            ),
                        ));
                    }
                }
                .map_err(|e| err_at(dline, dcol, e.to_string()))?;
                p.expect(Tok::RParen)?;
                p.expect(Tok::Semi)?;
                if det_vars.iter().any(|v| v.name == name)
                    || rand_vars.iter().any(|v| v.name == name)
                {
                    return Err(err_at(line, col, format!("duplicate variable '{name}'")));
                }
                rand_vars.push(RandVar { name, dist });
            }
            Tok::Constraint => {
                let (line, col) = p.here();
                if constraint.is_some() {
                    return Err(err_at(line, col, "multiple constraint statements"));
                }
                p.next();
                let start = p.pos;
                // skip to the terminating ';' — the expression is parsed in
                // a second pass once every declaration is known
                loop {
                    match p.peek() {
                        Some(Tok::Semi) => {
                            p.next();
                            break;
                        }
                        Some(_) => {
                            p.next();
                        }
                        None => {
                            return Err(p.error("unterminated constraint (missing ';')"));
                        }
                    }
                }
                constraint = Some(RawConstraint { start, line, col });
            }
            _ => {
                return Err(p.error(format!(
                    "expected 'exists', 'rand', or 'constraint', found {}",
                    tok.describe()
                )));
            }
        }
    }

    let raw = constraint
        .ok_or_else(|| err_at(eof.0, eof.1, "missing constraint statement"))?;

    // index variables: deterministic first, then random
    p.nvars = det_vars.len() + rand_vars.len();
    for (i, v) in det_vars.iter().enumerate() {
        p.vars.insert(v.name.clone(), i);
    }
    for (i, v) in rand_vars.iter().enumerate() {
        p.vars.insert(v.name.clone(), det_vars.len() + i);
    }

    p.pos = raw.start;
    let formula = p.bool_or()?;
    match p.peek() {
        Some(Tok::Semi) => {
            p.next();
        }
        _ => {
            return Err(p.error("unexpected trailing input in constraint"));
        }
    }

    if det_vars.is_empty() {
        return Err(err_at(raw.line, raw.col, "no 'exists' variables declared"));
    }
    if rand_vars.is_empty() {
        return Err(err_at(raw.line, raw.col, "no 'rand' variables declared"));
    }
    Problem::new(name, det_vars, rand_vars, formula).map_err(|e| match e {
        Error::Config(msg) => err_at(raw.line, raw.col, msg),
        other => other,
    })
}

/// Parses a problem with the default name `"problem"`.
pub fn parse_problem(text: &str) -> Result<Problem> {
    parse_problem_named(text, "problem")
}

// ---- expression layer --------------------------------------------------

impl Parser {
    fn bool_or(&mut self) -> Result<Formula> {
        let mut children = vec![self.bool_and()?];
        while matches!(self.peek(), Some(Tok::Or)) {
            self.next();
            children.push(self.bool_and()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::or(children)
        })
    }

    fn bool_and(&mut self) -> Result<Formula> {
        let mut children = vec![self.bool_not()?];
        while matches!(self.peek(), Some(Tok::And)) {
            self.next();
            children.push(self.bool_not()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Formula::and(children)
        })
    }

    fn bool_not(&mut self) -> Result<Formula> {
        if matches!(self.peek(), Some(Tok::Not)) {
            self.next();
            // negation is pushed down immediately; no Not node survives
            Ok(self.bool_not()?.negate())
        } else {
            self.bool_atom()
        }
    }

    fn bool_atom(&mut self) -> Result<Formula> {
        let save = self.pos;
        match self.comparison() {
            Ok(f) => Ok(f),
            Err(cmp_err) => {
                // a '(' may have opened a boolean group rather than an
                // arithmetic one; re-parse it as such
                self.pos = save;
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.next();
                    let f = self.bool_or()?;
                    self.expect(Tok::RParen)?;
                    Ok(f)
                } else {
                    Err(cmp_err)
                }
            }
        }
    }

    fn comparison(&mut self) -> Result<Formula> {
        let lhs = self.arith_expr()?;
        let op = match self.peek() {
            Some(Tok::Le) => Tok::Le,
            Some(Tok::Lt) => Tok::Lt,
            Some(Tok::Ge) => Tok::Ge,
            Some(Tok::Gt) => Tok::Gt,
            Some(Tok::Eq) => {
                return Err(self.error(
                    "equality atoms are not supported (a polynomial equality has probability \
                     zero under continuous distributions); use inequalities",
                ));
            }
            Some(t) => {
                let t = t.describe();
                return Err(self.error(format!("expected comparison operator, found {t}")));
            }
            None => return Err(self.error("expected comparison operator, found end of input")),
        };
        self.next();
        let rhs = self.arith_expr()?;
        // normalize to poly >= 0 (strict flag records < / >)
        let (poly, strict) = match op {
            Tok::Le => (rhs.sub(&lhs), false),
            Tok::Lt => (rhs.sub(&lhs), true),
            Tok::Ge => (lhs.sub(&rhs), false),
            Tok::Gt => (lhs.sub(&rhs), true),
            _ => unreachable!(),
        };
        Ok(Formula::atom(poly, strict))
    }

    fn arith_expr(&mut self) -> Result<Polynomial> {
        let mut p = self.arith_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    p = p.add(&self.arith_term()?);
                }
                Some(Tok::Minus) => {
                    self.next();
                    p = p.sub(&self.arith_term()?);
                }
                _ => break,
            }
        }
        Ok(p)
    }

    fn arith_term(&mut self) -> Result<Polynomial> {
        let mut p = self.arith_factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    p = p.mul(&self.arith_factor()?);
                }
                Some(Tok::Slash) => {
                    return Err(self.error(
                        "'/' is only allowed between numeric literals (fraction constants)",
                    ));
                }
                _ => break,
            }
        }
        Ok(p)
    }

    fn arith_factor(&mut self) -> Result<Polynomial> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            Ok(self.arith_factor()?.neg())
        } else {
            self.arith_power()
        }
    }

    fn arith_power(&mut self) -> Result<Polynomial> {
        let base = self.arith_primary()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.next();
            match self.peek().cloned() {
                Some(Tok::Num(raw)) => match raw.parse::<u32>() {
                    Ok(e) => {
                        self.next();
                        Ok(base.pow(e))
                    }
                    Err(_) => Err(self.error(format!(
                        "exponent must be a nonnegative integer literal, found '{raw}'"
                    ))),
                },
                Some(t) => Err(self.error(format!(
                    "exponent must be a nonnegative integer literal, found {}",
                    t.describe()
                ))),
                None => Err(self.error("exponent must be a nonnegative integer literal")),
            }
        } else {
            Ok(base)
        }
    }

    fn arith_primary(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Tok::Num(raw)) => {
                self.next();
                let mut v: f64 = raw.parse().expect("validated by lexer");
                // fraction literal: NUM '/' NUM
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.next();
                    match self.peek().cloned() {
                        Some(Tok::Num(raw2)) => {
                            self.next();
                            let d: f64 = raw2.parse().expect("validated by lexer");
                            if d == 0.0 {
                                return Err(self.error("fraction with zero denominator"));
                            }
                            v /= d;
                        }
                        _ => {
                            return Err(self.error(
                                "'/' is only allowed between numeric literals (fraction constants)",
                            ));
                        }
                    }
                }
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some(Tok::Ident(name)) => {
                let (line, col) = self.here();
                self.next();
                match self.vars.get(&name) {
                    Some(&i) => Ok(Polynomial::var(self.nvars, i)),
                    None => Err(err_at(line, col, format!("undeclared variable '{name}'"))),
                }
            }
            Some(Tok::LParen) => {
                self.next();
                let p = self.arith_expr()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Some(Tok::Inf) => {
                Err(self.error("'inf' is only allowed as a domain bound, not in expressions"))
            }
            Some(t) => Err(self.error(format!(
                "expected number, variable, or '(', found {}",
                t.describe()
            ))),
            None => Err(self.error("expected expression, found end of input")),
        }
    }
}

// ---- printer -------------------------------------------------------------

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn fmt_formula(f: &Formula, names: &[String], out: &mut String) {
    match f {
        Formula::True => out.push_str("0 >= 0"),
        Formula::False => out.push_str("0 > 0"),
        Formula::Atom(a) => {
            out.push_str(&a.poly.format_with(names));
            out.push_str(if a.strict_origin { " > 0" } else { " >= 0" });
        }
        Formula::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" and ");
                }
                if matches!(c, Formula::Or(_)) {
                    out.push('(');
                    fmt_formula(c, names, out);
                    out.push(')');
                } else {
                    fmt_formula(c, names, out);
                }
            }
        }
        Formula::Or(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" or ");
                }
                fmt_formula(c, names, out);
            }
        }
    }
}

/// Renders a problem in the DSL; `parse_problem_named(to_dsl(p), p.name)`
/// reproduces `p` structurally for normalized formulas.
pub fn to_dsl(p: &Problem) -> String {
    let names = p.var_names();
    let mut s = String::new();
    for v in &p.det_vars {
        s.push_str(&format!(
            "exists {} in [{}, {}]",
            v.name,
            fmt_bound(v.domain.lo()),
            fmt_bound(v.domain.hi())
        ));
        if let Some(sb) = v.sample {
            s.push_str(&format!(" sample [{}, {}]", fmt_bound(sb.lo()), fmt_bound(sb.hi())));
        }
        s.push_str(";\n");
    }
    for v in &p.rand_vars {
        s.push_str(&format!("rand {} ~ {};\n", v.name, v.dist));
    }
    s.push_str("constraint ");
    fmt_formula(&p.formula, &names, &mut s);
    s.push_str(";\n");
    s
}
