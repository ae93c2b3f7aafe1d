//! Recursive-descent parser for the field DSL.
//!
//! ```text
//! field   := [sign] term (sign term)*
//! term    := basis | coef '*' basis
//! basis   := DX ('^' DX)*
//! coef    := product            (a top-level sum needs parentheses)
//! expr    := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ['**' ['-'] INT]
//! primary := NUM | VAR | ('sin' | 'cos' | 'sqrt') '(' expr ')' | '(' expr ')'
//! ```
//!
//! `DX` is `dx1` … `dx6`, `VAR` is `x1` … `x6`, `NUM` is an integer or a
//! decimal literal (read exactly). `#` starts a comment running to the end
//! of the line.

use num_traits::ToPrimitive;

use super::expr::{self, Expr};
use super::form_field::FormField;
use super::FormlangError;
use crate::exterior::MultiIndex;
use crate::scalar::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Var(usize),
    Dx(usize),
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    StarStar,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FormlangError {
    FormlangError::Syntax { line, col, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, FormlangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: start_line, col: start_col });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[begin..i].iter().collect();
            let value = parse_rational(&lit).map_err(|_| syntax(line, col, format!("bad number {lit:?}")))?;
            col += i - begin;
            push(&mut out, Tok::Num(value));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            col += i - begin;
            let tok = match word.as_str() {
                "sin" => Tok::Func(Func::Sin),
                "cos" => Tok::Func(Func::Cos),
                "sqrt" => Tok::Func(Func::Sqrt),
                w => {
                    let (is_dx, digits) = if let Some(d) = w.strip_prefix("dx") {
                        (true, d)
                    } else if let Some(d) = w.strip_prefix('x') {
                        (false, d)
                    } else {
                        return Err(syntax(start_line, start_col, format!("unknown identifier {w:?}")));
                    };
                    if digits.is_empty() || !digits.chars().all(|d| d.is_ascii_digit()) {
                        return Err(syntax(start_line, start_col, format!("unknown identifier {w:?}")));
                    }
                    let index: usize = digits.parse().unwrap_or(usize::MAX);
                    if !(1..=6).contains(&index) {
                        return Err(FormlangError::UnknownCoordinate {
                            name: w.to_string(),
                            line: start_line,
                            col: start_col,
                        });
                    }
                    if is_dx {
                        Tok::Dx(index)
                    } else {
                        Tok::Var(index)
                    }
                }
            };
            push(&mut out, tok);
            continue;
        }
        let (tok, width) = match c {
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            '*' if chars.get(i + 1) == Some(&'*') => (Tok::StarStar, 2),
            '*' => (Tok::Star, 1),
            '/' => (Tok::Slash, 1),
            '^' => (Tok::Caret, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            other => return Err(syntax(line, col, format!("unexpected character {other:?}"))),
        };
        push(&mut out, tok);
        i += width;
        col += width;
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let k = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[k].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn error(&self, message: impl Into<String>) -> FormlangError {
        let (line, col) = self.here();
        syntax(line, col, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), FormlangError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn field(&mut self) -> Result<FormField, FormlangError> {
        let mut field: Option<FormField> = None;
        let mut first = true;
        loop {
            let negative = match self.peek() {
                Tok::Plus => {
                    self.bump();
                    false
                }
                Tok::Minus => {
                    self.bump();
                    true
                }
                Tok::End if !first => break,
                _ if first => false,
                _ => return Err(self.error("expected '+', '-' or end of input")),
            };
            first = false;
            let (line, col) = self.here();
            let (coef, indices) = self.term()?;
            let coef = if negative { expr::neg(coef) } else { coef };
            let f = field.get_or_insert_with(|| FormField::zero(indices.len()));
            if f.degree() != indices.len() {
                return Err(FormlangError::DegreeMismatch { expected: f.degree(), found: indices.len(), line, col });
            }
            if let Some((mi, sign)) = MultiIndex::from_indices(&indices) {
                let coef = if sign < 0 { expr::neg(coef) } else { coef };
                f.add_term(mi, coef);
            }
        }
        field.ok_or_else(|| self.error("empty field"))
    }

    fn term(&mut self) -> Result<(Expr, Vec<usize>), FormlangError> {
        if matches!(self.peek(), Tok::Dx(_)) {
            return Ok((Expr::one(), self.basis()?));
        }
        let coef = self.product(true)?;
        if *self.peek() != Tok::Star || !matches!(self.peek_at(1), Tok::Dx(_)) {
            return Err(self.error("expected '*' followed by a basis element dx<i>^..."));
        }
        self.bump();
        Ok((coef, self.basis()?))
    }

    fn basis(&mut self) -> Result<Vec<usize>, FormlangError> {
        let mut indices = Vec::new();
        loop {
            match *self.peek() {
                Tok::Dx(i) => {
                    self.bump();
                    indices.push(i);
                }
                _ => return Err(self.error("expected dx<i>")),
            }
            if *self.peek() != Tok::Caret {
                return Ok(indices);
            }
            self.bump();
        }
    }

    fn expr(&mut self) -> Result<Expr, FormlangError> {
        let mut terms = vec![self.product(false)?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.product(false)?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(expr::neg(self.product(false)?));
                }
                _ => return Ok(expr::add(terms)),
            }
        }
    }

    /// In coefficient position a `*` followed by `dx` ends the product.
    fn product(&mut self, coefficient: bool) -> Result<Expr, FormlangError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    if coefficient && matches!(self.peek_at(1), Tok::Dx(_)) {
                        return Ok(acc);
                    }
                    self.bump();
                    let rhs = self.unary()?;
                    acc = expr::mul(vec![acc, rhs]);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FormlangError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(expr::neg(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, FormlangError> {
        let base = self.primary()?;
        if *self.peek() != Tok::StarStar {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let n = match self.peek() {
            Tok::Num(q) if q.is_integer() => q.to_integer().to_i32(),
            _ => None,
        };
        let n = n.ok_or_else(|| self.error("expected an integer exponent"))?;
        self.bump();
        Ok(expr::pow(base, if negative { -n } else { n }))
    }

    fn primary(&mut self) -> Result<Expr, FormlangError> {
        match self.peek() {
            Tok::Dx(_) => return Err(self.error("basis element inside a coefficient expression")),
            Tok::Num(_) | Tok::Var(_) | Tok::Func(_) | Tok::LParen => {}
            _ => return Err(self.error("expected a number, coordinate, function or '('")),
        }
        match self.bump() {
            Tok::Num(q) => Ok(Expr::Const(q)),
            Tok::Var(i) => Ok(expr::var(i)),
            Tok::Func(f) => {
                self.expect(Tok::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(match f {
                    Func::Sin => expr::sin(arg),
                    Func::Cos => expr::cos(arg),
                    Func::Sqrt => expr::sqrt(arg),
                })
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            _ => unreachable!("checked above"),
        }
    }
}

pub fn parse_field(text: &str) -> Result<FormField, FormlangError> {
    let mut p = Parser { tokens: lex(text)?, pos: 0 };
    p.field()
}

/// Parse a standalone coefficient expression.
pub fn parse_expr(text: &str) -> Result<Expr, FormlangError> {
    let mut p = Parser { tokens: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}
