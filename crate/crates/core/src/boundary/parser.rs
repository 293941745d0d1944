//! Recursive-descent parser and evaluator for boundary-data expressions.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | primary ;
//! primary = number | variable | blade | call | "(" expr ")" ;
//! ```
//!
//! Variables are `x0 … x{n-1}`; blades are `e0` (identity), `e12` or
//! `e(1,2)` with ascending indices.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::clifford::{Multivector, Signature};
use crate::error::{BoundaryError, ParseError};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Number(f64),
    Var(usize),
    /// Basis blade by bitmask.
    Blade(u32),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Pow(Box<Node>, i32),
    /// `Σ x_j²`.
    Abs2,
    /// `exp(-Σ x_j²)`.
    Gauss,
}

/// A parsed boundary expression bound to a signature.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    sig: Signature,
    root: Node,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Boundary data: variables allowed, `e_n` forbidden.
    Datum,
    /// Constant literal: any blade, no variables.
    Literal,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    position: start,
                    expected: "a number".into(),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        position: start,
                        expected: "a finite number".into(),
                    });
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    position: start,
                    expected: "an operator, number, name or parenthesis".into(),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: Signature,
    mode: Mode,
}

fn syntax(position: usize, expected: &str) -> ParseError {
    ParseError::Syntax {
        position,
        expected: expected.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), what))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Number(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(&name, at),
            _ => Err(syntax(at, "a number, variable, blade, function or '('")),
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Node, ParseError> {
        let n = self.sig.n();
        match name {
            "exp" => return self.call(Func::Exp),
            "sin" => return self.call(Func::Sin),
            "cos" => return self.call(Func::Cos),
            "sqrt" => return self.call(Func::Sqrt),
            "pow" => return self.pow(),
            "abs2" => return self.point_helper(Node::Abs2, at),
            "gauss" => return self.point_helper(Node::Gauss, at),
            "e" if *self.peek() == Tok::LParen => return self.blade_list(at),
            _ => {}
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                if self.mode == Mode::Literal {
                    return Err(ParseError::NotConstant { position: at });
                }
                let index: usize = digits
                    .parse()
                    .map_err(|_| ParseError::UnknownVariable { position: at, index: usize::MAX, n })?;
                if index >= n {
                    return Err(ParseError::UnknownVariable {
                        position: at,
                        index,
                        n,
                    });
                }
                return Ok(Node::Var(index));
            }
        }
        if let Some(digits) = name.strip_prefix('e') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let indices: Vec<usize> = digits.bytes().map(|b| (b - b'0') as usize).collect();
                return self.blade(&indices, at);
            }
        }
        Err(syntax(at, "a number, variable, blade, function or '('"))
    }

    fn call(&mut self, func: Func) -> Result<Node, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(Node::Call(func, Box::new(arg)))
    }

    fn pow(&mut self) -> Result<Node, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let base = self.expr()?;
        self.expect(Tok::Comma, "','")?;
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let at = self.offset();
        let k = match self.bump().0 {
            Tok::Num(v) if math::is_integer(v) && v <= i32::MAX as f64 => v as i32,
            _ => return Err(syntax(at, "an integer exponent")),
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(Node::Pow(Box::new(base), if negative { -k } else { k }))
    }

    fn point_helper(&mut self, node: Node, at: usize) -> Result<Node, ParseError> {
        if self.mode == Mode::Literal {
            return Err(ParseError::NotConstant { position: at });
        }
        self.expect(Tok::LParen, "'('")?;
        let arg_at = self.offset();
        match self.bump().0 {
            Tok::Ident(ref s) if s == "x" => {}
            _ => return Err(syntax(arg_at, "the point argument 'x'")),
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(node)
    }

    fn blade_list(&mut self, at: usize) -> Result<Node, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let mut indices = Vec::new();
        loop {
            let num_at = self.offset();
            match self.bump().0 {
                Tok::Num(v) if math::is_integer(v) && (0.0..1e6).contains(&v) => indices.push(v as usize),
                _ => return Err(syntax(num_at, "a generator index")),
            }
            match self.bump().0 {
                Tok::Comma => continue,
                Tok::RParen => break,
                _ => return Err(syntax(self.toks[self.pos - 1].1, "',' or ')'")),
            }
        }
        self.blade(&indices, at)
    }

    fn blade(&self, indices: &[usize], at: usize) -> Result<Node, ParseError> {
        let n = self.sig.n();
        if indices == [0] {
            return Ok(Node::Blade(0));
        }
        let mut mask = 0u32;
        let mut last = 0;
        for &j in indices {
            if j == 0 || j > n {
                return Err(ParseError::BladeIndex {
                    position: at,
                    index: j,
                    n,
                });
            }
            if j <= last {
                return Err(syntax(at, "strictly ascending blade indices"));
            }
            if j == n && self.mode == Mode::Datum {
                return Err(ParseError::ParaRealViolation {
                    position: at,
                    generator: n,
                });
            }
            last = j;
            mask |= 1 << (j - 1);
        }
        Ok(Node::Blade(mask))
    }
}

fn parse_with(text: &str, sig: Signature, mode: Mode) -> Result<Node, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sig,
        mode,
    };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "an operator or end of input"));
    }
    Ok(node)
}

/// Parses a constant multivector such as `1.5 - 2.0*e1 + 0.25*e12`.
///
/// Every blade of the algebra is allowed, including those containing `e_n`;
/// variables are rejected.
pub fn parse_multivector(text: &str, sig: Signature) -> Result<Multivector, ParseError> {
    let node = parse_with(text, sig, Mode::Literal)?;
    let expr = Expr { sig, root: node };
    expr.eval(&[]).map_err(|e| ParseError::Syntax {
        position: 0,
        expected: format!("a constant that evaluates ({e})"),
    })
}

enum Val {
    S(f64),
    M(Multivector),
}

impl Val {
    fn into_mv(self, sig: Signature) -> Multivector {
        match self {
            Val::S(v) => Multivector::scalar(sig, v),
            Val::M(m) => m,
        }
    }
}

impl Expr {
    /// Parses boundary data for `C(V_n)`; blades containing `e_n` are rejected.
    pub fn parse(text: &str, sig: Signature) -> Result<Self, ParseError> {
        Ok(Self {
            sig,
            root: parse_with(text, sig, Mode::Datum)?,
        })
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True when the expression is a literal zero.
    pub fn is_literal_zero(&self) -> bool {
        fn zero(node: &Node) -> bool {
            match node {
                Node::Number(v) => *v == 0.0,
                Node::Neg(a) => zero(a),
                Node::Mul(a, b) => zero(a) || zero(b),
                _ => false,
            }
        }
        zero(&self.root)
    }

    /// Evaluates at hyperplane coordinates `x = (x_0, …, x_{n-1})`.
    pub fn eval(&self, x: &[f64]) -> Result<Multivector, BoundaryError> {
        let v = self.eval_node(&self.root, x)?.into_mv(self.sig);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(BoundaryError::NonFinite)
        }
    }

    fn eval_node(&self, node: &Node, x: &[f64]) -> Result<Val, BoundaryError> {
        let sig = self.sig;
        Ok(match node {
            Node::Number(v) => Val::S(*v),
            Node::Var(i) => Val::S(x[*i]),
            Node::Blade(0) => Val::S(1.0),
            Node::Blade(mask) => Val::M(Multivector::basis(sig, *mask).expect("validated mask")),
            Node::Abs2 => Val::S(x.iter().map(|v| v * v).sum()),
            Node::Gauss => Val::S(math::exp(-x.iter().map(|v| v * v).sum::<f64>())),
            Node::Neg(a) => match self.eval_node(a, x)? {
                Val::S(v) => Val::S(-v),
                Val::M(m) => Val::M(-m),
            },
            Node::Add(a, b) => match (self.eval_node(a, x)?, self.eval_node(b, x)?) {
                (Val::S(p), Val::S(q)) => Val::S(p + q),
                (p, q) => Val::M(p.into_mv(sig) + q.into_mv(sig)),
            },
            Node::Sub(a, b) => match (self.eval_node(a, x)?, self.eval_node(b, x)?) {
                (Val::S(p), Val::S(q)) => Val::S(p - q),
                (p, q) => Val::M(p.into_mv(sig) - q.into_mv(sig)),
            },
            Node::Mul(a, b) => match (self.eval_node(a, x)?, self.eval_node(b, x)?) {
                (Val::S(p), Val::S(q)) => Val::S(p * q),
                (Val::S(p), Val::M(m)) | (Val::M(m), Val::S(p)) => Val::M(m.scale(p)),
                (Val::M(p), Val::M(q)) => Val::M(p * q),
            },
            Node::Div(a, b) => {
                let num = self.eval_node(a, x)?;
                match self.eval_node(b, x)? {
                    Val::S(0.0) => return Err(BoundaryError::DivisionByZero),
                    Val::S(q) => match num {
                        Val::S(p) => Val::S(p / q),
                        Val::M(m) => Val::M(m.scale(1.0 / q)),
                    },
                    Val::M(q) => {
                        let inv = q.invert().map_err(|_| BoundaryError::DivisionByZero)?;
                        Val::M(num.into_mv(sig) * inv)
                    }
                }
            }
            Node::Call(func, a) => {
                let v = match self.eval_node(a, x)? {
                    Val::S(v) => v,
                    Val::M(m) if m.is_scalar() => m.scalar_part(),
                    Val::M(_) => return Err(BoundaryError::NonScalarArgument { func: func.name() }),
                };
                Val::S(match func {
                    Func::Exp => math::exp(v),
                    Func::Sin => math::sin(v),
                    Func::Cos => math::cos(v),
                    Func::Sqrt if v < 0.0 => return Err(BoundaryError::NegativeSqrt),
                    Func::Sqrt => math::sqrt(v),
                })
            }
            Node::Pow(a, k) => match self.eval_node(a, x)? {
                Val::S(0.0) if *k < 0 => return Err(BoundaryError::DivisionByZero),
                Val::S(v) => Val::S(math::powi(v, *k)),
                Val::M(m) => {
                    let base = if *k < 0 {
                        m.invert().map_err(|_| BoundaryError::DivisionByZero)?
                    } else {
                        m
                    };
                    let mut acc = Multivector::one(sig);
                    for _ in 0..k.unsigned_abs() {
                        acc = acc * &base;
                    }
                    Val::M(acc)
                }
            },
        })
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, n: usize) -> fmt::Result {
    match node {
        Node::Number(v) => write!(f, "{v:?}"),
        Node::Var(i) => write!(f, "x{i}"),
        Node::Blade(0) => f.write_str("e0"),
        Node::Blade(mask) => {
            f.write_str("e(")?;
            let mut first = true;
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    if !first {
                        f.write_str(",")?;
                    }
                    first = false;
                    write!(f, "{}", j + 1)?;
                }
            }
            f.write_str(")")
        }
        Node::Neg(a) => {
            f.write_str("-")?;
            write_node(f, a, n)
        }
        Node::Add(a, b) => write_binary(f, a, " + ", b, n),
        Node::Sub(a, b) => write_binary(f, a, " - ", b, n),
        Node::Mul(a, b) => write_binary(f, a, " * ", b, n),
        Node::Div(a, b) => write_binary(f, a, " / ", b, n),
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, n)?;
            f.write_str(")")
        }
        Node::Pow(a, k) => {
            f.write_str("pow(")?;
            write_node(f, a, n)?;
            write!(f, ", {k})")
        }
        Node::Abs2 => f.write_str("abs2(x)"),
        Node::Gauss => f.write_str("gauss(x)"),
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node, n: usize) -> fmt::Result {
    f.write_str("(")?;
    write_node(f, a, n)?;
    f.write_str(op)?;
    write_node(f, b, n)?;
    f.write_str(")")
}

impl fmt::Display for Expr {
    /// Fully parenthesized form that reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, self.sig.n())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    #[test]
    fn rational_at_origin() {
        let e = Expr::parse("1/(1+abs2(x))", sig(2)).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), Multivector::one(sig(2)));
        let e1 = Expr::parse("1/(1+abs2(x))", sig(1)).unwrap();
        assert_eq!(e1.eval(&[1.0]).unwrap(), Multivector::scalar(sig(1), 0.5));
    }

    #[test]
    fn blade_times_gauss() {
        let s = sig(3);
        let e = Expr::parse("x0*e(1)*gauss(x)", s).unwrap();
        let v = e.eval(&[1.0, 0.0, 0.0]).unwrap();
        let want = Multivector::generator(s, 1).unwrap().scale((-1.0f64).exp());
        assert!(v.approx_eq(&want, 1e-15));
    }

    #[test]
    fn para_real_violation() {
        assert!(matches!(
            Expr::parse("e(3)", sig(3)),
            Err(ParseError::ParaRealViolation { position: 0, generator: 3 })
        ));
        assert!(matches!(
            Expr::parse("1 + e13", sig(3)),
            Err(ParseError::ParaRealViolation { position: 4, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(
            Expr::parse("1 + * 2", sig(1)),
            Err(ParseError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("sin(x0", sig(1)),
            Err(ParseError::Syntax { position: 6, .. })
        ));
        assert!(matches!(
            Expr::parse("x3", sig(2)),
            Err(ParseError::UnknownVariable { index: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("e21", sig(3)),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(Expr::parse("1 $", sig(1)), Err(ParseError::Syntax { position: 2, .. })));
    }

    #[test]
    fn precedence() {
        let s = sig(2);
        let e = Expr::parse("-2*3 + 4/2 - 1", s).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), Multivector::scalar(s, -5.0));
        let p = Expr::parse("pow(x0 + 1, -2)", s).unwrap();
        assert_eq!(p.eval(&[1.0, 0.0]).unwrap(), Multivector::scalar(s, 0.25));
    }

    #[test]
    fn evaluation_errors() {
        let s = sig(2);
        assert_eq!(
            Expr::parse("1/x0", s).unwrap().eval(&[0.0, 1.0]),
            Err(BoundaryError::DivisionByZero)
        );
        assert_eq!(
            Expr::parse("sqrt(x0)", s).unwrap().eval(&[-1.0, 1.0]),
            Err(BoundaryError::NegativeSqrt)
        );
        assert_eq!(
            Expr::parse("exp(e1)", s).unwrap().eval(&[0.0, 0.0]),
            Err(BoundaryError::NonScalarArgument { func: "exp" })
        );
    }

    #[test]
    fn multivector_literals() {
        let s = sig(3);
        let m = parse_multivector("1.5 - 2.0*e1 + 0.25*e12 + 3*e(1,3)", s).unwrap();
        assert_eq!(m.coeffs(), &[1.5, -2.0, 0.0, 0.25, 0.0, 3.0, 0.0, 0.0]);
        assert!(matches!(
            parse_multivector("x0", s),
            Err(ParseError::NotConstant { position: 0 })
        ));
        assert_eq!(parse_multivector(&m.to_string(), s).unwrap(), m);
    }

    #[test]
    fn display_reparses() {
        let s = sig(3);
        for text in ["-x0*e(1)/(1+abs2(x))", "pow(sin(x1), 3) - -e12", "gauss(x)*(e0 + e2)"] {
            let e = Expr::parse(text, s).unwrap();
            let again = Expr::parse(&e.to_string(), s).unwrap();
            assert_eq!(e, again, "{text}");
        }
    }
}
