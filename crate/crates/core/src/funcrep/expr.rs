//! Expression trees over a small scientific grammar.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | constant | variable | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Constants are `pi` (also `π`) and `e`. Functions are `sin`, `cos`, `tan`,
//! `exp`, `ln` (alias `log`), `sqrt`, `abs` and `sign`.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    /// 1-based character column of the offending token.
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number '{0}'")]
    InvalidNumber(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("'{0}' is a function and needs parentheses")]
    MissingCall(String),
    #[error("expression mixes variables '{0}' and '{1}'")]
    MixedVariables(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
}

impl Builtin {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "tan" => Builtin::Tan,
            "exp" => Builtin::Exp,
            "ln" | "log" => Builtin::Ln,
            "sqrt" => Builtin::Sqrt,
            "abs" => Builtin::Abs,
            "sign" => Builtin::Sign,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Tan => "tan",
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Sign => "sign",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Builtin::Sin => x.sin(),
            Builtin::Cos => x.cos(),
            Builtin::Tan => x.tan(),
            Builtin::Exp => x.exp(),
            Builtin::Ln => x.ln(),
            Builtin::Sqrt => x.sqrt(),
            Builtin::Abs => x.abs(),
            Builtin::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Expression tree. Variables are referenced by index into the variable
/// list the expression was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => {
                let base = a.eval(vars);
                match **b {
                    Expr::Const(n) if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 => {
                        base.powi(n as i32)
                    }
                    _ => base.powf(b.eval(vars)),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// True when the expression does not mention variable `var`.
    pub fn is_constant_in(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(i) => *i != var,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant_in(var),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant_in(var) && b.is_constant_in(var),
        }
    }

    /// Indices of all variables that occur in the tree.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => out.push(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace every variable index `i` by `map[i]`.
    pub fn remap_vars(&self, map: &[usize]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(map[*i]),
            Expr::Neg(a) => Expr::Neg(Box::new(a.remap_vars(map))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.remap_vars(map))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.remap_vars(map)), Box::new(b.remap_vars(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.remap_vars(map)), Box::new(b.remap_vars(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.remap_vars(map)), Box::new(b.remap_vars(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.remap_vars(map)), Box::new(b.remap_vars(map))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.remap_vars(map)), Box::new(b.remap_vars(map))),
        }
    }

    /// Symbolic derivative with respect to variable `var`.
    ///
    /// Only trivial constant folding is done (`0 * a`, `1 * a`, `a + 0`,
    /// constant-constant arithmetic) so repeated differentiation does not
    /// blow up the tree.
    pub fn derivative(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(var)),
            Add(a, b) => add(a.derivative(var), b.derivative(var)),
            Sub(a, b) => sub(a.derivative(var), b.derivative(var)),
            Mul(a, b) => add(
                mul(a.derivative(var), (**b).clone()),
                mul((**a).clone(), b.derivative(var)),
            ),
            Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(
                    mul(a.derivative(var), (**b).clone()),
                    mul((**a).clone(), b.derivative(var)),
                );
                div(num, pow((**b).clone(), Const(2.0)))
            }
            Pow(a, b) => {
                if b.is_constant_in(var) {
                    let da = a.derivative(var);
                    if da == Const(0.0) {
                        return Const(0.0);
                    }
                    let reduced = match **b {
                        Const(n) => Const(n - 1.0),
                        _ => sub((**b).clone(), Const(1.0)),
                    };
                    mul(mul((**b).clone(), pow((**a).clone(), reduced)), da)
                } else {
                    // a^b (b' ln a + b a'/a)
                    let inner = add(
                        mul(b.derivative(var), call(Builtin::Ln, (**a).clone())),
                        div(mul((**b).clone(), a.derivative(var)), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Call(f, a) => {
                let da = a.derivative(var);
                if da == Const(0.0) {
                    return Const(0.0);
                }
                let u = (**a).clone();
                let outer = match f {
                    Builtin::Sin => call(Builtin::Cos, u),
                    Builtin::Cos => neg(call(Builtin::Sin, u)),
                    Builtin::Tan => add(Const(1.0), pow(call(Builtin::Tan, u), Const(2.0))),
                    Builtin::Exp => call(Builtin::Exp, u),
                    Builtin::Ln => div(Const(1.0), u),
                    Builtin::Sqrt => div(Const(0.5), call(Builtin::Sqrt, u)),
                    Builtin::Abs => call(Builtin::Sign, u),
                    Builtin::Sign => Const(0.0),
                };
                mul(outer, da)
            }
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(z), other) | (other, Expr::Const(z)) if z == 0.0 => other,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (other, Expr::Const(z)) if z == 0.0 => other,
        (Expr::Const(z), other) if z == 0.0 => neg(other),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), other) | (other, Expr::Const(o)) if o == 1.0 => other,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(z), _) if z == 0.0 => Expr::Const(0.0),
        (other, Expr::Const(o)) if o == 1.0 => other,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (_, Expr::Const(z)) if z == 0.0 => Expr::Const(1.0),
        (other, Expr::Const(o)) if o == 1.0 => other,
        (a, b) => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Builtin, a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(f.apply(c)),
        other => Expr::Call(f, Box::new(other)),
    }
}

/// Context for printing: variable names by index.
pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [&'a str],
}

impl Expr {
    pub fn display<'a>(&'a self, names: &'a [&'a str]) -> Display<'a> {
        Display { expr: self, names }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, f)
    }
}

fn write_expr(e: &Expr, names: &[&str], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) => {
            if *c < 0.0 {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        }
        Expr::Var(i) => write!(f, "{}", names.get(*i).copied().unwrap_or("?")),
        Expr::Neg(a) => {
            f.write_str("(-")?;
            write_expr(a, names, f)?;
            f.write_str(")")
        }
        Expr::Call(b, a) => {
            write!(f, "{}(", b.name())?;
            write_expr(a, names, f)?;
            f.write_str(")")
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            let op = match e {
                Expr::Add(..) => "+",
                Expr::Sub(..) => "-",
                Expr::Mul(..) => "*",
                Expr::Div(..) => "/",
                _ => "^",
            };
            f.write_str("(")?;
            write_expr(a, names, f)?;
            write!(f, " {op} ")?;
            write_expr(b, names, f)?;
            f.write_str(")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Op(c) => write!(f, "operator '{c}'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: e, E followed by optional sign and digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError {
                column,
                kind: ParseErrorKind::InvalidNumber(text.clone()),
            })?;
            out.push((Tok::Num(value), column));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), column));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => {
                    return Err(ParseError {
                        column,
                        kind: ParseErrorKind::UnexpectedChar(other),
                    })
                }
            };
            out.push((tok, column));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_column: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |(_, c)| *c)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            column: self.column(),
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => self.error(ParseErrorKind::UnexpectedToken(t.to_string())),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, column)) = self.toks.get(self.pos).cloned() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        match tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(f) = Builtin::lookup(&name) {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(ParseError {
                            column,
                            kind: ParseErrorKind::MissingCall(name),
                        });
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" | "π" => Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => Ok(Expr::Const(std::f64::consts::E)),
                    _ => Err(ParseError {
                        column,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            Tok::Op(_) | Tok::RParen => Err(self.unexpected()),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }
}

/// Parse `src` against the variable names `vars` (index = position).
pub fn parse_with_vars(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_column: src.chars().count() + 1,
        vars,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.unexpected());
    }
    Ok(expr)
}

/// Names accepted for the single independent variable of a scalar function.
pub const SCALAR_VARIABLES: [&str; 5] = ["x", "t", "s", "theta", "θ"];

/// Parse a function of one variable. Any one of [`SCALAR_VARIABLES`] may be
/// used, but not two different ones in the same expression.
pub fn parse_scalar(src: &str) -> Result<Expr, ParseError> {
    let expr = parse_with_vars(src, &SCALAR_VARIABLES)?;
    let used = expr.variables();
    if used.len() > 1 {
        return Err(ParseError {
            column: 1,
            kind: ParseErrorKind::MixedVariables(
                SCALAR_VARIABLES[used[0]].to_string(),
                SCALAR_VARIABLES[used[1]].to_string(),
            ),
        });
    }
    Ok(expr.remap_vars(&[0; SCALAR_VARIABLES.len()]))
}
