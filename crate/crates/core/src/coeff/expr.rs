//! A tiny arithmetic language for coefficient fields given as text.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | 'x' | 'y' | 'z' | 'pi' | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp sqrt abs` (one argument) and `min max` (two).
//! Vector literals are `(e1, e2[, e3])` or `[e1, ...]`; matrix literals are
//! `[[...], [...]]`.

use std::fmt;

use crate::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{name}` takes {expected} argument(s), got {got} (offset {offset})")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        offset: usize,
    },
    #[error("variable `{name}` is not available in {dim}D")]
    Dimension { name: String, dim: usize },
    #[error("expected {expected}, found {found}")]
    Shape { expected: String, found: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Parsed expression. Variables are coordinate indices (`x` = 0).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(x)),
                    Func::Max => a.max(args[1].eval(x)),
                }
            }
        }
    }

    /// Highest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) => a.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }

    /// Fails when the expression uses a coordinate beyond `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<(), ExprError> {
        match self.max_var() {
            Some(i) if i >= dim => Err(ExprError::Dimension {
                name: ["x", "y", "z"][i].to_string(),
                dim,
            }),
            _ => Ok(()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "{}", ["x", "y", "z"][*i]),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut p = Parser {
            src,
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
        };
        p.advance()?;
        Ok(p)
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut look = self.pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    self.pos = look;
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = &self.src[start..self.pos];
            match text.parse::<f64>() {
                Ok(v) => self.tok = Tok::Num(v),
                Err(_) => return self.syntax(start, format!("malformed number `{text}`")),
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^(),[]".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap();
            return self.syntax(self.pos, format!("unexpected character `{ch}`"));
        }
        Ok(())
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.tok == Tok::Sym(c) {
            self.advance()
        } else {
            self.syntax(self.tok_start, format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Sym('-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.tok == Tok::Sym('^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let start = self.tok_start;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "x" => return Ok(Expr::Var(0)),
                    "y" => return Ok(Expr::Var(1)),
                    "z" => return Ok(Expr::Var(2)),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    _ => {}
                }
                let func = Func::lookup(&name).ok_or(ExprError::UnknownIdentifier {
                    name: name.clone(),
                    offset: start,
                })?;
                self.expect('(')?;
                let mut args = vec![self.expr()?];
                while self.tok == Tok::Sym(',') {
                    self.advance()?;
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                if args.len() != func.arity() {
                    return Err(ExprError::Arity {
                        name,
                        expected: func.arity(),
                        got: args.len(),
                        offset: start,
                    });
                }
                Ok(Expr::Call(func, args))
            }
            Tok::End => self.syntax(start, "unexpected end of input"),
            Tok::Sym(c) => self.syntax(start, format!("unexpected `{c}`")),
        }
    }

    /// `(e, e, ...)` or `[e, e, ...]` with at least two entries.
    fn list(&mut self) -> Result<Vec<Expr>, ExprError> {
        let close = match self.tok {
            Tok::Sym('(') => ')',
            Tok::Sym('[') => ']',
            _ => return self.syntax(self.tok_start, "expected `(` or `[`"),
        };
        self.advance()?;
        let mut items = vec![self.expr()?];
        while self.tok == Tok::Sym(',') {
            self.advance()?;
            items.push(self.expr()?);
        }
        self.expect(close)?;
        Ok(items)
    }

    fn finish(&self) -> Result<(), ExprError> {
        if self.tok == Tok::End {
            Ok(())
        } else {
            self.syntax(self.tok_start, "unexpected trailing input")
        }
    }
}

/// Parses a scalar expression.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a vector literal such as `(y, -x)`.
pub fn parse_vector(text: &str) -> Result<Vec<Expr>, ExprError> {
    let mut p = Parser::new(text)?;
    let v = p.list()?;
    p.finish()?;
    Ok(v)
}

/// Parses a square matrix literal such as `[[1, 0], [0, 1]]`.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Expr>>, ExprError> {
    let mut p = Parser::new(text)?;
    p.expect('[')?;
    let mut rows = vec![p.list()?];
    while p.tok == Tok::Sym(',') {
        p.advance()?;
        rows.push(p.list()?);
    }
    p.expect(']')?;
    p.finish()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ExprError::Shape {
            expected: format!("{n}x{n} matrix"),
            found: format!("rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str) -> f64 {
        parse_expr(s).unwrap().eval(&Point::new(0.5, 2.0, -1.0))
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("1+2*3"), 7.0);
        assert_eq!(ev("exp(0)+abs(-2)"), 3.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev(" 8 / 4 / 2 "), 1.0);
        assert_eq!(ev("1 - 2 - 3"), -4.0);
        assert_eq!(ev("max(x, y) + min(x, z)"), 1.0);
        assert_eq!(ev("x*y"), 1.0);
        assert_eq!(ev("1.5e1"), 15.0);
        assert!((ev("sin(pi/2)") - 1.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        assert_eq!(
            parse_expr("2*(x"),
            Err(ExprError::Syntax {
                offset: 4,
                message: "expected `)`".into()
            })
        );
        assert!(matches!(parse_expr("1 +"), Err(ExprError::Syntax { offset: 3, .. })));
        assert!(matches!(parse_expr("1 $ 2"), Err(ExprError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn unknown_identifier_and_arity() {
        assert_eq!(
            parse_expr("1 + foo(2)"),
            Err(ExprError::UnknownIdentifier {
                name: "foo".into(),
                offset: 4
            })
        );
        assert!(matches!(
            parse_expr("min(1)"),
            Err(ExprError::Arity { expected: 2, got: 1, .. })
        ));
        assert!(matches!(parse_expr("sin(1, 2)"), Err(ExprError::Arity { .. })));
    }

    #[test]
    fn dimension_check() {
        assert!(parse_expr("x + z").unwrap().check_dim(2).is_err());
        assert!(parse_expr("x + z").unwrap().check_dim(3).is_ok());
        assert!(parse_expr("2*pi").unwrap().is_constant());
    }

    #[test]
    fn vectors_and_matrices() {
        let v = parse_vector("(y, -x)").unwrap();
        let p = Point::new(1.0, 2.0, 0.0);
        assert_eq!((v[0].eval(&p), v[1].eval(&p)), (2.0, -1.0));
        let m = parse_matrix("[[1,0],[0, 1+x]]").unwrap();
        assert_eq!(m[1][1].eval(&p), 2.0);
        assert!(matches!(parse_matrix("[[1,0],[0]]"), Err(ExprError::Shape { .. })));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Max, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_expr(&printed).unwrap(), e);
        }
    }
}
