use super::{BinOp, DslError, Expr, Func, Program, Reduce, Var, MAX_DEPTH};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Word(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
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
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| DslError::Syntax {
                line: tl,
                col: tc,
                msg: format!("malformed number `{text}`"),
            })?;
            if !v.is_finite() {
                return Err(DslError::Syntax { line: tl, col: tc, msg: format!("number `{text}` is not finite") });
            }
            col += i - start;
            out.push(Token { tok: Tok::Num(v), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if "+-*/^(),=".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: tl, col: tc });
            continue;
        }
        return Err(DslError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["let", "in", "argmax", "argmin"];

/// Whether `name` can be bound by `let`.
pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !KEYWORDS.contains(&name)
        && Func::from_name(name).is_none()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    bound: Vec<String>,
    nesting: usize,
}

/// Parses program text into a checked [`Program`].
pub fn parse(src: &str) -> Result<Program, DslError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, bound: Vec::new(), nesting: 0 };
    let prog = p.program()?;
    prog.check()?;
    Ok(prog)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        let t = self.peek();
        Err(DslError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Num(v) => format!("number {v}"),
            Tok::Word(w) => format!("`{w}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), DslError> {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            let found = Self::describe(&self.peek().tok);
            self.error(format!("expected `{c}`, found {found}"))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn program(&mut self) -> Result<Program, DslError> {
        let mut lets = Vec::new();
        while self.is_word("let") {
            self.bump();
            let t = self.bump();
            let name = match t.tok {
                Tok::Word(w) if is_identifier(&w) => w,
                other => {
                    return Err(DslError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("expected a lowercase binding name, found {}", Self::describe(&other)),
                    })
                }
            };
            if self.bound.contains(&name) {
                return Err(DslError::Rebound { line: t.line, col: t.col, name });
            }
            self.expect_sym('=')?;
            let e = self.expr()?;
            if !self.is_word("in") {
                let found = Self::describe(&self.peek().tok);
                return self.error(format!("expected `in`, found {found}"));
            }
            self.bump();
            self.bound.push(name.clone());
            lets.push((name, e));
        }
        let reduce = if self.is_word("argmax") {
            Reduce::Argmax
        } else if self.is_word("argmin") {
            Reduce::Argmin
        } else {
            let found = Self::describe(&self.peek().tok);
            return self.error(format!("expected `argmax` or `argmin`, found {found}"));
        };
        self.bump();
        self.expect_sym('(')?;
        let body = self.expr()?;
        self.expect_sym(')')?;
        if self.peek().tok != Tok::Eof {
            let found = Self::describe(&self.peek().tok);
            return self.error(format!("unexpected {found} after the reduction"));
        }
        Ok(Program { lets, reduce, body })
    }

    fn enter(&mut self) -> Result<(), DslError> {
        self.nesting += 1;
        if self.nesting > 4 * MAX_DEPTH {
            return Err(DslError::TooLarge(format!("nesting deeper than {}", 4 * MAX_DEPTH)));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => break,
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
        self.nesting -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => break,
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            self.enter()?;
            let e = Expr::neg(self.unary()?);
            self.nesting -= 1;
            return Ok(e);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.bump();
            self.enter()?;
            let exp = self.unary()?;
            self.nesting -= 1;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Lit(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Word(w) => {
                if let Some(v) = Var::ALL.into_iter().find(|v| v.name() == w) {
                    return Ok(Expr::Var(v));
                }
                if let Some(f) = Func::from_name(&w) {
                    return self.call(f, t.line, t.col);
                }
                if self.peek().tok == Tok::Sym('(') {
                    return Err(DslError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("unknown function `{w}`"),
                    });
                }
                if self.bound.contains(&w) {
                    Ok(Expr::Ident(w))
                } else {
                    Err(DslError::Unbound { line: t.line, col: t.col, name: w })
                }
            }
            other => Err(DslError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("expected an expression, found {}", Self::describe(&other)),
            }),
        }
    }

    fn call(&mut self, f: Func, line: usize, col: usize) -> Result<Expr, DslError> {
        self.expect_sym('(')?;
        let mut args = vec![self.expr()?];
        while self.peek().tok == Tok::Sym(',') {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect_sym(')')?;
        if args.len() != f.arity() {
            return Err(DslError::Arity {
                line,
                col,
                func: f.name().into(),
                expected: f.arity(),
                got: args.len(),
            });
        }
        Ok(Expr::Call(f, args))
    }
}
