use crate::ast::{Field, Statement, Target};
use crate::error::{DslError, Pos, Result};
use crate::expr::{BinOp, Expr, Func};
use crate::lexer::{lex, Tok, Token};

/// Deepest expression nesting accepted; keeps recursion bounded on hostile input.
pub const MAX_DEPTH: usize = 64;
/// Largest declarable dimension.
pub const MAX_DIM: usize = 32;

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    pub(crate) dim: Option<usize>,
}

fn syntax(pos: Pos, expected: impl Into<String>) -> DslError {
    DslError::Syntax {
        pos,
        expected: expected.into(),
    }
}

impl Parser {
    pub(crate) fn new(src: &str, dim: Option<usize>) -> Result<Self> {
        Ok(Self {
            toks: lex(src)?,
            at: 0,
            depth: 0,
            dim,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<Pos> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(t.pos)
        } else {
            Err(syntax(t.pos, format!("`{c}`, found {}", t.tok.describe())))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            other => Err(syntax(t.pos, format!("`{kw}`, found {}", other.describe()))),
        }
    }

    fn integer(&mut self) -> Result<(usize, Pos)> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) if v.fract() == 0.0 && (0.0..1e6).contains(&v) => Ok((v as usize, t.pos)),
            other => Err(syntax(t.pos, format!("an integer, found {}", other.describe()))),
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        let t = self.next();
        match t.tok {
            Tok::Newline | Tok::Eof => Ok(()),
            other => Err(syntax(t.pos, format!("end of line, found {}", other.describe()))),
        }
    }

    fn symbol_index(&self, name: &str, pos: Pos) -> Result<usize> {
        let unknown = || DslError::UnknownSymbol {
            pos,
            symbol: name.to_string(),
        };
        let k: usize = name
            .strip_prefix('x')
            .filter(|d| !d.starts_with('0'))
            .and_then(|d| d.parse().ok())
            .ok_or_else(unknown)?;
        match self.dim {
            Some(d) if (1..=d).contains(&k) => Ok(k - 1),
            _ => Err(unknown()),
        }
    }

    // expr := term (('+' | '-') term)*
    pub(crate) fn expr(&mut self) -> Result<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.peek().pos, format!("expression nesting at most {MAX_DEPTH} deep")));
        }
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Punct('+') => BinOp::Add,
                Tok::Punct('-') => BinOp::Sub,
                _ => break,
            };
            self.next();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Punct('*') => BinOp::Mul,
                Tok::Punct('/') => BinOp::Div,
                _ => break,
            };
            self.next();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return Err(syntax(self.peek().pos, format!("expression nesting at most {MAX_DEPTH} deep")));
            }
            let e = Expr::negate(self.unary()?);
            self.depth -= 1;
            return Ok(e);
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right-associative through unary)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return Err(syntax(self.peek().pos, format!("expression nesting at most {MAX_DEPTH} deep")));
            }
            let e = Expr::bin(BinOp::Pow, base, self.unary()?);
            self.depth -= 1;
            return Ok(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    let close = self.expect(')')?;
                    if args.len() != f.arity() {
                        return Err(syntax(
                            close,
                            format!("{} argument(s) to {}, found {}", f.arity(), f.name(), args.len()),
                        ));
                    }
                    Ok(Expr::Call(f, args))
                } else {
                    Ok(Expr::Var(self.symbol_index(&name, t.pos)?))
                }
            }
            other => Err(syntax(t.pos, format!("an expression, found {}", other.describe()))),
        }
    }

    fn expr_list(&mut self) -> Result<(Vec<Expr>, Pos)> {
        let open = self.expect('[')?;
        let mut items = vec![self.expr()?];
        while self.eat(',') {
            items.push(self.expr()?);
        }
        self.expect(']')?;
        Ok((items, open))
    }

    fn matrix(&mut self, d: usize) -> Result<Vec<Vec<Expr>>> {
        let open = self.expect('[')?;
        let mut rows = Vec::new();
        loop {
            let (row, pos) = self.expr_list()?;
            if row.len() != d {
                return Err(DslError::DimensionMismatch {
                    pos,
                    expected: d,
                    found: row.len(),
                });
            }
            rows.push(row);
            if !self.eat(',') {
                break;
            }
        }
        self.expect(']')?;
        if rows.len() != d {
            return Err(DslError::DimensionMismatch {
                pos: open,
                expected: d,
                found: rows.len(),
            });
        }
        Ok(rows)
    }

    fn index(&mut self, d: usize) -> Result<usize> {
        self.expect('[')?;
        let (k, pos) = self.integer()?;
        if !(1..=d).contains(&k) {
            return Err(DslError::DimensionMismatch {
                pos,
                expected: d,
                found: k,
            });
        }
        self.expect(']')?;
        Ok(k - 1)
    }

    fn target(&mut self) -> Result<(Target, Pos)> {
        let t = self.next();
        let bad = |pos| syntax(pos, "a target `self`, `R<n>` or `CP<n>`");
        let Tok::Ident(name) = &t.tok else {
            return Err(bad(t.pos));
        };
        let parse_n = |s: &str| s.parse::<usize>().ok().filter(|n| (1..=MAX_DIM).contains(n));
        let target = if name == "self" {
            Target::SelfChart
        } else if let Some(n) = name.strip_prefix("CP").and_then(parse_n) {
            Target::Projective(n)
        } else if let Some(n) = name.strip_prefix('R').and_then(parse_n) {
            Target::Euclidean(n)
        } else {
            return Err(bad(t.pos));
        };
        Ok((target, t.pos))
    }

    /// Next statement with its position, or `None` at end of input.
    pub(crate) fn statement(&mut self) -> Result<Option<(Statement, Pos)>> {
        while self.peek().tok == Tok::Newline {
            self.next();
        }
        let t = self.next();
        let pos = t.pos;
        let kw = match t.tok {
            Tok::Eof => return Ok(None),
            Tok::Ident(s) => s,
            other => return Err(syntax(pos, format!("a statement, found {}", other.describe()))),
        };
        if kw != "dim" && self.dim.is_none() {
            return Err(DslError::Invalid {
                pos,
                message: "`dim` must be declared before anything else".into(),
            });
        }
        let stmt = match kw.as_str() {
            "dim" => {
                self.expect('=')?;
                let (d, dpos) = self.integer()?;
                if self.dim.is_some() {
                    return Err(DslError::Invalid {
                        pos,
                        message: "`dim` declared twice".into(),
                    });
                }
                if !(1..=MAX_DIM).contains(&d) {
                    return Err(DslError::Invalid {
                        pos: dpos,
                        message: format!("dimension must be in 1..={MAX_DIM}, got {d}"),
                    });
                }
                self.dim = Some(d);
                Statement::Dim(d)
            }
            "domain" => {
                let t = self.next();
                let Tok::Ident(sym) = &t.tok else {
                    return Err(syntax(t.pos, format!("a coordinate, found {}", t.tok.describe())));
                };
                let axis = self.symbol_index(sym, t.pos)?;
                self.expect_keyword("in")?;
                self.expect('[')?;
                let lo = self.expr()?;
                self.expect(',')?;
                let hi = self.expr()?;
                self.expect(']')?;
                Statement::Domain { axis, lo, hi }
            }
            "g" | "J" => {
                let field = if kw == "g" { Field::Metric } else { Field::Structure };
                let d = self.dim.expect("checked above");
                if self.peek().tok == Tok::Punct('[') {
                    let i = self.index(d)?;
                    let j = self.index(d)?;
                    self.expect('=')?;
                    Statement::Entry {
                        field,
                        i,
                        j,
                        expr: self.expr()?,
                    }
                } else {
                    self.expect('=')?;
                    Statement::Matrix {
                        field,
                        rows: self.matrix(d)?,
                    }
                }
            }
            "map" => {
                let t = self.next();
                let Tok::Ident(name) = t.tok else {
                    return Err(syntax(t.pos, format!("a map name, found {}", t.tok.describe())));
                };
                self.expect(':')?;
                let (target, tpos) = self.target()?;
                self.expect('=')?;
                let (components, _) = self.expr_list()?;
                let want = target.dim(self.dim.expect("checked above"));
                if components.len() != want {
                    return Err(DslError::DimensionMismatch {
                        pos: tpos,
                        expected: want,
                        found: components.len(),
                    });
                }
                Statement::Map {
                    name,
                    target,
                    components,
                }
            }
            other => {
                return Err(syntax(pos, format!("`dim`, `domain`, `g`, `J` or `map`, found `{other}`")));
            }
        };
        self.end_of_statement()?;
        Ok(Some((stmt, pos)))
    }
}

/// Parses a single expression over `x1..x{dim}`.
pub fn parse_expr(src: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser::new(src, Some(dim))?;
    let e = p.expr()?;
    let t = p.next();
    if t.tok != Tok::Eof {
        return Err(syntax(t.pos, format!("end of expression, found {}", t.tok.describe())));
    }
    Ok(e)
}
