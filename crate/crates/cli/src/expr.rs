//! Arithmetic formulas for vector fields.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'x' index | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | tanh
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-x1^2` is `-(x1^2)` and `2^-1` is `0.5`. The Unicode minus sign is
//! accepted. Formulas compile to a postfix program.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("formula {formula}, column {column}: {message}")]
pub struct ExprError {
    pub formula: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Time,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Exp,
    Tanh,
}

/// One compiled formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    ops: Vec<Op>,
    depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var(usize),
    Time,
    Func(Op),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

fn tokenize(src: &str, dim: usize, formula: usize) -> Result<Vec<(Token, usize)>, ExprError> {
    let err = |column: usize, message: String| ExprError {
        formula,
        column,
        message,
    };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' | '\u{2212}' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::Open),
            ')' => Some(Token::Close),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, col));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let v: f64 = text.parse().map_err(|_| err(col, format!("malformed number '{text}'")))?;
            out.push((Token::Num(v), col));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "t" => Token::Time,
                "sin" => Token::Func(Op::Sin),
                "cos" => Token::Func(Op::Cos),
                "exp" => Token::Func(Op::Exp),
                "tanh" => Token::Func(Op::Tanh),
                w if w.starts_with('x') && w.len() > 1 && w[1..].bytes().all(|b| b.is_ascii_digit()) => {
                    let k: usize = w[1..].parse().map_err(|_| err(col, format!("bad variable '{w}'")))?;
                    if k == 0 || k > dim {
                        return Err(err(col, format!("variable '{w}' out of range x1..x{dim}")));
                    }
                    Token::Var(k - 1)
                }
                w => return Err(err(col, format!("unknown name '{w}'"))),
            };
            out.push((tok, col));
            continue;
        }
        return Err(err(col, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    formula: usize,
    ops: Vec<Op>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, c)| *c)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            formula: self.formula,
            column: self.column(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<(), ExprError> {
        self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => Op::Add,
                Some(Token::Minus) => Op::Sub,
                _ => return Ok(()),
            };
            self.pos += 1;
            self.term()?;
            self.ops.push(op);
        }
    }

    fn term(&mut self) -> Result<(), ExprError> {
        self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => Op::Mul,
                Some(Token::Slash) => Op::Div,
                _ => return Ok(()),
            };
            self.pos += 1;
            self.unary()?;
            self.ops.push(op);
        }
    }

    fn unary(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                self.unary()?;
                self.ops.push(Op::Neg);
                Ok(())
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<(), ExprError> {
        self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            self.unary()?;
            self.ops.push(Op::Pow);
        }
        Ok(())
    }

    fn primary(&mut self) -> Result<(), ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return self.fail("unexpected end of formula");
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => self.ops.push(Op::Const(v)),
            Token::Var(k) => self.ops.push(Op::Var(k)),
            Token::Time => self.ops.push(Op::Time),
            Token::Func(f) => {
                if self.peek() != Some(&Token::Open) {
                    return self.fail("expected '(' after function name");
                }
                self.pos += 1;
                self.expr()?;
                self.close()?;
                self.ops.push(f);
            }
            Token::Open => {
                self.expr()?;
                self.close()?;
            }
            _ => {
                self.pos -= 1;
                return self.fail("expected a number, variable, function or '('");
            }
        }
        Ok(())
    }

    fn close(&mut self) -> Result<(), ExprError> {
        if self.peek() != Some(&Token::Close) {
            return self.fail("expected ')'");
        }
        self.pos += 1;
        Ok(())
    }
}

impl Formula {
    /// Parses `src` with variables `x1..x{dim}` and `t`. `index` only
    /// labels errors.
    pub fn parse(src: &str, dim: usize, index: usize) -> Result<Self, ExprError> {
        let tokens = tokenize(src, dim, index)?;
        let mut p = Parser {
            end: src.chars().count() + 1,
            tokens,
            pos: 0,
            formula: index,
            ops: Vec::new(),
        };
        p.expr()?;
        if p.pos != p.tokens.len() {
            return p.fail("unexpected trailing input");
        }
        let mut depth: usize = 0;
        let mut max_depth = 0;
        for op in &p.ops {
            match op {
                Op::Const(_) | Op::Var(_) | Op::Time => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => depth -= 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(Self {
            ops: p.ops,
            depth: max_depth,
        })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Var(k) => stack.push(x[k]),
                Op::Time => stack.push(t),
                Op::Neg | Op::Sin | Op::Cos | Op::Exp | Op::Tanh => {
                    let a = stack.pop().expect("operand");
                    stack.push(match op {
                        Op::Neg => -a,
                        Op::Sin => a.sin(),
                        Op::Cos => a.cos(),
                        Op::Exp => a.exp(),
                        _ => a.tanh(),
                    });
                }
                _ => {
                    let b = stack.pop().expect("operand");
                    let a = stack.pop().expect("operand");
                    stack.push(match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => a / b,
                        _ => a.powf(b),
                    });
                }
            }
        }
        stack.pop().expect("result")
    }
}

/// Vector field given by one formula per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionField {
    formulas: Vec<Formula>,
}

impl ExpressionField {
    pub fn parse<S: AsRef<str>>(sources: &[S]) -> Result<Self, ExprError> {
        let dim = sources.len();
        let formulas = sources
            .iter()
            .enumerate()
            .map(|(i, s)| Formula::parse(s.as_ref(), dim, i))
            .collect::<Result<_, _>>()?;
        Ok(Self { formulas })
    }

    pub fn dim(&self) -> usize {
        self.formulas.len()
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.formulas.iter().map(|f| f.eval(t, x)).collect()
    }
}
