use super::lexer::{tokenize, FPart, Tok, Token};
use super::DialectError;

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    Is,
    IsNot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FStrPart {
    Lit(String),
    Expr(Expr, Option<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    Name(String),
    FString(Vec<FStrPart>),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    Dict(Vec<(Expr, Expr)>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare(Box<Expr>, Vec<(CmpOp, Expr)>),
    IfExp {
        cond: Box<Expr>,
        then: Box<Expr>,
        orelse: Box<Expr>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    Attr(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Slice {
        target: Box<Expr>,
        lo: Option<Box<Expr>>,
        hi: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    ListComp {
        elt: Box<Expr>,
        target: Target,
        iter: Box<Expr>,
        cond: Option<Box<Expr>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Name(String),
    Tuple(Vec<String>),
    Index(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign(Target, Expr),
    AugAssign(String, BinOp, Expr),
    Expr(Expr),
    If(Vec<(Expr, Vec<Stmt>)>, Vec<Stmt>),
    For(Target, Expr, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    Break,
    Continue,
    Pass,
    Import,
}

type Kwargs = Vec<(String, Expr)>;

/// Modules a program may import; the imports themselves are no-ops.
const IMPORTS: [(&str, &[&str]); 1] = [("bs4", &["BeautifulSoup"])];

pub fn parse_program(src: &str) -> Result<Vec<Stmt>, DialectError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let mut body = Vec::new();
    while !p.at(&Tok::Eof) {
        if p.eat_tok(&Tok::Newline) {
            continue;
        }
        p.statement(&mut body)?;
    }
    Ok(body)
}

fn parse_fstring_expr(src: &str, line: usize, col: usize) -> Result<Expr, DialectError> {
    let shift = |e: DialectError| match e {
        DialectError::Parse { line: l, column, message } => DialectError::Parse {
            line: line + l - 1,
            column: if l == 1 { col + column - 1 } else { column },
            message,
        },
        other => other,
    };
    let tokens = tokenize(&format!("({src})")).map_err(shift)?;
    let mut p = Parser { toks: tokens, pos: 0 };
    let e = p.expr().map_err(shift)?;
    p.eat_tok(&Tok::Newline);
    if !p.at(&Tok::Eof) {
        let t = p.cur();
        return Err(shift(DialectError::Parse {
            line: t.line,
            column: t.col,
            message: "unexpected token in f-string expression".into(),
        }));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn cur(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn at(&self, t: &Tok) -> bool {
        self.cur().tok == *t
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.cur().tok, Tok::Op(o) if o == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.cur().tok, Tok::Name(n) if n == kw)
    }

    fn advance(&mut self) -> Token {
        let t = self.cur().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat_tok(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, DialectError> {
        let t = self.cur();
        Err(DialectError::Parse {
            line: t.line,
            column: t.col,
            message: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match &self.cur().tok {
            Tok::Name(n) => format!("name {n:?}"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Float(f) => format!("number {f}"),
            Tok::Str(_) | Tok::FStr(_) => "string".into(),
            Tok::Op(o) => format!("{o:?}"),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), DialectError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.error(format!("expected {op:?}, found {}", self.describe()))
        }
    }

    fn name(&mut self) -> Result<String, DialectError> {
        match &self.cur().tok {
            Tok::Name(n) if !is_keyword(n) => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => self.error(format!("expected a name, found {}", self.describe())),
        }
    }

    fn end_of_statement(&mut self) -> Result<(), DialectError> {
        if self.eat_tok(&Tok::Newline) || self.at(&Tok::Eof) || self.at(&Tok::Dedent) {
            Ok(())
        } else {
            self.error(format!("expected end of line, found {}", self.describe()))
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, DialectError> {
        self.expect_op(":")?;
        let mut body = Vec::new();
        if !self.eat_tok(&Tok::Newline) {
            self.simple_statements(&mut body)?;
            return Ok(body);
        }
        if !self.eat_tok(&Tok::Indent) {
            return self.error("expected an indented block");
        }
        while !self.eat_tok(&Tok::Dedent) {
            if self.at(&Tok::Eof) {
                break;
            }
            self.statement(&mut body)?;
        }
        Ok(body)
    }

    fn statement(&mut self, out: &mut Vec<Stmt>) -> Result<(), DialectError> {
        let line = self.cur().line;
        if self.at(&Tok::Indent) {
            return self.error("unexpected indent");
        }
        if self.eat_kw("if") {
            let mut branches = vec![(self.expr()?, self.block()?)];
            let mut orelse = Vec::new();
            loop {
                if self.eat_kw("elif") {
                    branches.push((self.expr()?, self.block()?));
                } else if self.eat_kw("else") {
                    orelse = self.block()?;
                    break;
                } else {
                    break;
                }
            }
            out.push(Stmt {
                kind: StmtKind::If(branches, orelse),
                line,
            });
            return Ok(());
        }
        if self.eat_kw("for") {
            let target = self.for_target()?;
            if !self.eat_kw("in") {
                return self.error("expected 'in'");
            }
            let iter = self.expr_list()?;
            let body = self.block()?;
            out.push(Stmt {
                kind: StmtKind::For(target, iter, body),
                line,
            });
            return Ok(());
        }
        if self.eat_kw("while") {
            let cond = self.expr()?;
            let body = self.block()?;
            out.push(Stmt {
                kind: StmtKind::While(cond, body),
                line,
            });
            return Ok(());
        }
        for kw in ["def", "class", "try", "with", "lambda", "return", "yield", "global", "del", "raise", "assert"] {
            if self.at_kw(kw) {
                return self.error(format!("'{kw}' is not supported in abstraction programs"));
            }
        }
        self.simple_statements(out)
    }

    fn simple_statements(&mut self, out: &mut Vec<Stmt>) -> Result<(), DialectError> {
        loop {
            out.push(self.simple_statement()?);
            if !self.eat_op(";") {
                break;
            }
            if self.at(&Tok::Newline) || self.at(&Tok::Eof) {
                break;
            }
        }
        self.end_of_statement()
    }

    fn simple_statement(&mut self) -> Result<Stmt, DialectError> {
        let line = self.cur().line;
        let stmt = |kind| Ok(Stmt { kind, line });
        if self.eat_kw("pass") {
            return stmt(StmtKind::Pass);
        }
        if self.eat_kw("break") {
            return stmt(StmtKind::Break);
        }
        if self.eat_kw("continue") {
            return stmt(StmtKind::Continue);
        }
        if self.at_kw("import") || self.at_kw("from") {
            self.import()?;
            return stmt(StmtKind::Import);
        }
        let first = self.expr_list()?;
        if self.eat_op("=") {
            let mut targets = vec![first];
            let mut value = self.expr_list()?;
            while self.eat_op("=") {
                targets.push(value);
                value = self.expr_list()?;
            }
            if targets.len() > 1 {
                return Err(DialectError::Parse {
                    line,
                    column: 1,
                    message: "chained assignment is not supported".into(),
                });
            }
            let target = to_target(targets.pop().expect("one target"))?;
            return stmt(StmtKind::Assign(target, value));
        }
        for (tok, op) in [
            ("+=", BinOp::Add),
            ("-=", BinOp::Sub),
            ("*=", BinOp::Mul),
            ("/=", BinOp::Div),
            ("//=", BinOp::FloorDiv),
            ("%=", BinOp::Mod),
        ] {
            if self.eat_op(tok) {
                let ExprKind::Name(name) = first.kind else {
                    return Err(DialectError::Parse {
                        line: first.line,
                        column: first.col,
                        message: "augmented assignment needs a plain name".into(),
                    });
                };
                let value = self.expr()?;
                return stmt(StmtKind::AugAssign(name, op, value));
            }
        }
        stmt(StmtKind::Expr(first))
    }

    fn import(&mut self) -> Result<(), DialectError> {
        let (line, col) = (self.cur().line, self.cur().col);
        let unsupported = |what: String| DialectError::Parse {
            line,
            column: col,
            message: format!("unsupported import {what}"),
        };
        if self.eat_kw("from") {
            let module = self.dotted()?;
            if !self.eat_kw("import") {
                return self.error("expected 'import'");
            }
            let allowed = IMPORTS
                .iter()
                .find(|(m, _)| *m == module)
                .ok_or_else(|| unsupported(module.clone()))?;
            loop {
                let n = self.name()?;
                if !allowed.1.contains(&n.as_str()) {
                    return Err(unsupported(format!("{module}.{n}")));
                }
                if !self.eat_op(",") {
                    break;
                }
            }
        } else {
            self.advance();
            let module = self.dotted()?;
            if !IMPORTS.iter().any(|(m, _)| *m == module) {
                return Err(unsupported(module));
            }
        }
        Ok(())
    }

    fn dotted(&mut self) -> Result<String, DialectError> {
        let mut s = self.name()?;
        while self.eat_op(".") {
            s.push('.');
            s.push_str(&self.name()?);
        }
        Ok(s)
    }

    fn for_target(&mut self) -> Result<Target, DialectError> {
        let paren = self.eat_op("(");
        let mut names = vec![self.name()?];
        while self.eat_op(",") {
            if self.at_kw("in") || self.at_op(")") {
                break;
            }
            names.push(self.name()?);
        }
        if paren {
            self.expect_op(")")?;
        }
        Ok(if names.len() == 1 && !paren {
            Target::Name(names.pop().expect("one name"))
        } else {
            Target::Tuple(names)
        })
    }

    /// Comma-separated expressions; more than one becomes a tuple.
    fn expr_list(&mut self) -> Result<Expr, DialectError> {
        let first = self.expr()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let (line, col) = (first.line, first.col);
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at(&Tok::Newline) || self.at_op("=") || self.at_op(":") || self.at(&Tok::Eof) {
                break;
            }
            items.push(self.expr()?);
        }
        Ok(Expr {
            kind: ExprKind::Tuple(items),
            line,
            col,
        })
    }

    fn expr(&mut self) -> Result<Expr, DialectError> {
        if self.at_kw("lambda") {
            return self.error("'lambda' is not supported in abstraction programs");
        }
        let e = self.or_expr()?;
        if self.eat_kw("if") {
            let cond = self.or_expr()?;
            if !self.eat_kw("else") {
                return self.error("expected 'else' in conditional expression");
            }
            let orelse = self.expr()?;
            let (line, col) = (e.line, e.col);
            return Ok(Expr {
                kind: ExprKind::IfExp {
                    cond: Box::new(cond),
                    then: Box::new(e),
                    orelse: Box::new(orelse),
                },
                line,
                col,
            });
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<Expr, DialectError> {
        let mut l = self.and_expr()?;
        while self.eat_kw("or") {
            let r = self.and_expr()?;
            let (line, col) = (l.line, l.col);
            l = Expr { kind: ExprKind::Or(Box::new(l), Box::new(r)), line, col };
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Expr, DialectError> {
        let mut l = self.not_expr()?;
        while self.eat_kw("and") {
            let r = self.not_expr()?;
            let (line, col) = (l.line, l.col);
            l = Expr { kind: ExprKind::And(Box::new(l), Box::new(r)), line, col };
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Result<Expr, DialectError> {
        let (line, col) = (self.cur().line, self.cur().col);
        if self.eat_kw("not") {
            let e = self.not_expr()?;
            return Ok(Expr { kind: ExprKind::Not(Box::new(e)), line, col });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, DialectError> {
        let first = self.arith()?;
        let mut rest = Vec::new();
        loop {
            let op = if self.eat_op("==") {
                CmpOp::Eq
            } else if self.eat_op("!=") {
                CmpOp::Ne
            } else if self.eat_op("<=") {
                CmpOp::Le
            } else if self.eat_op(">=") {
                CmpOp::Ge
            } else if self.eat_op("<") {
                CmpOp::Lt
            } else if self.eat_op(">") {
                CmpOp::Gt
            } else if self.eat_kw("in") {
                CmpOp::In
            } else if self.at_kw("not") && matches!(&self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Name(n)) if n == "in") {
                self.advance();
                self.advance();
                CmpOp::NotIn
            } else if self.eat_kw("is") {
                if self.eat_kw("not") {
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            } else {
                break;
            };
            rest.push((op, self.arith()?));
        }
        if rest.is_empty() {
            return Ok(first);
        }
        let (line, col) = (first.line, first.col);
        Ok(Expr { kind: ExprKind::Compare(Box::new(first), rest), line, col })
    }

    fn arith(&mut self) -> Result<Expr, DialectError> {
        let mut l = self.term()?;
        loop {
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            let r = self.term()?;
            let (line, col) = (l.line, l.col);
            l = Expr { kind: ExprKind::Bin(op, Box::new(l), Box::new(r)), line, col };
        }
        Ok(l)
    }

    fn term(&mut self) -> Result<Expr, DialectError> {
        let mut l = self.factor()?;
        loop {
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("//") {
                BinOp::FloorDiv
            } else if self.eat_op("/") {
                BinOp::Div
            } else if self.eat_op("%") {
                BinOp::Mod
            } else {
                break;
            };
            let r = self.factor()?;
            let (line, col) = (l.line, l.col);
            l = Expr { kind: ExprKind::Bin(op, Box::new(l), Box::new(r)), line, col };
        }
        Ok(l)
    }

    fn factor(&mut self) -> Result<Expr, DialectError> {
        let (line, col) = (self.cur().line, self.cur().col);
        if self.eat_op("-") {
            let e = self.factor()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(e)), line, col });
        }
        if self.eat_op("+") {
            return self.factor();
        }
        let base = self.postfix()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr { kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), line, col });
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr, DialectError> {
        let mut e = self.atom()?;
        loop {
            let (line, col) = (e.line, e.col);
            if self.eat_op(".") {
                let name = match &self.cur().tok {
                    Tok::Name(n) => n.clone(),
                    _ => return self.error("expected an attribute name"),
                };
                self.advance();
                e = Expr { kind: ExprKind::Attr(Box::new(e), name), line, col };
            } else if self.eat_op("(") {
                let (args, kwargs) = self.call_args()?;
                e = Expr { kind: ExprKind::Call { func: Box::new(e), args, kwargs }, line, col };
            } else if self.eat_op("[") {
                e = self.subscript(e)?;
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> Result<(Vec<Expr>, Kwargs), DialectError> {
        let mut args = Vec::new();
        let mut kwargs = Vec::new();
        while !self.eat_op(")") {
            if self.at_op("*") || self.at_op("**") {
                return self.error("argument unpacking is not supported");
            }
            let is_kw = matches!(&self.cur().tok, Tok::Name(_))
                && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("=")));
            if is_kw {
                let name = self.name()?;
                self.advance();
                kwargs.push((name, self.expr()?));
            } else {
                if !kwargs.is_empty() {
                    return self.error("positional argument follows keyword argument");
                }
                args.push(self.expr()?);
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                break;
            }
        }
        Ok((args, kwargs))
    }

    fn subscript(&mut self, target: Expr) -> Result<Expr, DialectError> {
        let (line, col) = (target.line, target.col);
        let mut parts: [Option<Box<Expr>>; 3] = [None, None, None];
        let mut colons = 0;
        loop {
            if self.eat_op("]") {
                break;
            }
            if self.eat_op(":") {
                colons += 1;
                if colons > 2 {
                    return self.error("too many ':' in slice");
                }
                continue;
            }
            if parts[colons].is_some() {
                return self.error("expected ':' or ']'");
            }
            parts[colons] = Some(Box::new(self.expr_list()?));
        }
        let [lo, hi, step] = parts;
        if colons == 0 {
            let Some(index) = lo else {
                return self.error("empty subscript");
            };
            return Ok(Expr { kind: ExprKind::Index(Box::new(target), index), line, col });
        }
        Ok(Expr {
            kind: ExprKind::Slice { target: Box::new(target), lo, hi, step },
            line,
            col,
        })
    }

    fn atom(&mut self) -> Result<Expr, DialectError> {
        let t = self.cur().clone();
        let (line, col) = (t.line, t.col);
        let mk = |kind| Ok(Expr { kind, line, col });
        match t.tok {
            Tok::Int(i) => {
                self.advance();
                mk(ExprKind::Lit(Literal::Int(i)))
            }
            Tok::Float(f) => {
                self.advance();
                mk(ExprKind::Lit(Literal::Float(f)))
            }
            Tok::Str(_) | Tok::FStr(_) => {
                // Adjacent literals concatenate.
                let mut parts: Vec<FStrPart> = Vec::new();
                let mut any_f = false;
                while let Tok::Str(_) | Tok::FStr(_) = &self.cur().tok {
                    match self.advance().tok {
                        Tok::Str(s) => parts.push(FStrPart::Lit(s)),
                        Tok::FStr(fp) => {
                            any_f = true;
                            for p in fp {
                                parts.push(match p {
                                    FPart::Lit(s) => FStrPart::Lit(s),
                                    FPart::Expr { src, line, col, spec } => {
                                        FStrPart::Expr(parse_fstring_expr(&src, line, col)?, spec)
                                    }
                                });
                            }
                        }
                        _ => unreachable!(),
                    }
                }
                if !any_f {
                    let s = parts
                        .into_iter()
                        .map(|p| match p {
                            FStrPart::Lit(s) => s,
                            FStrPart::Expr(..) => unreachable!(),
                        })
                        .collect();
                    return mk(ExprKind::Lit(Literal::Str(s)));
                }
                mk(ExprKind::FString(parts))
            }
            Tok::Name(n) => {
                let lit = match n.as_str() {
                    "None" => Some(Literal::None),
                    "True" => Some(Literal::Bool(true)),
                    "False" => Some(Literal::Bool(false)),
                    _ => None,
                };
                if let Some(l) = lit {
                    self.advance();
                    return mk(ExprKind::Lit(l));
                }
                let n = self.name()?;
                mk(ExprKind::Name(n))
            }
            Tok::Op("(") => {
                self.advance();
                if self.eat_op(")") {
                    return mk(ExprKind::Tuple(vec![]));
                }
                let first = self.expr()?;
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.at_op(")") {
                        break;
                    }
                    items.push(self.expr()?);
                }
                self.expect_op(")")?;
                mk(ExprKind::Tuple(items))
            }
            Tok::Op("[") => {
                self.advance();
                if self.eat_op("]") {
                    return mk(ExprKind::List(vec![]));
                }
                let first = self.expr()?;
                if self.eat_kw("for") {
                    let target = self.for_target()?;
                    if !self.eat_kw("in") {
                        return self.error("expected 'in'");
                    }
                    let iter = self.or_expr()?;
                    let cond = if self.eat_kw("if") { Some(Box::new(self.or_expr()?)) } else { None };
                    if self.at_kw("for") {
                        return self.error("nested comprehensions are not supported");
                    }
                    self.expect_op("]")?;
                    return mk(ExprKind::ListComp {
                        elt: Box::new(first),
                        target,
                        iter: Box::new(iter),
                        cond,
                    });
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.at_op("]") {
                        break;
                    }
                    items.push(self.expr()?);
                }
                self.expect_op("]")?;
                mk(ExprKind::List(items))
            }
            Tok::Op("{") => {
                self.advance();
                let mut items = Vec::new();
                while !self.eat_op("}") {
                    let k = self.expr()?;
                    self.expect_op(":")?;
                    let v = self.expr()?;
                    items.push((k, v));
                    if !self.eat_op(",") {
                        self.expect_op("}")?;
                        break;
                    }
                }
                mk(ExprKind::Dict(items))
            }
            _ => self.error(format!("expected an expression, found {}", self.describe())),
        }
    }
}

fn is_keyword(n: &str) -> bool {
    matches!(
        n,
        "if" | "elif" | "else" | "for" | "while" | "in" | "not" | "and" | "or" | "is" | "def" | "class" | "return"
            | "import" | "from" | "pass" | "break" | "continue" | "lambda" | "try" | "except" | "finally" | "with"
            | "yield" | "global" | "del" | "raise" | "assert" | "None" | "True" | "False"
    )
}

fn to_target(e: Expr) -> Result<Target, DialectError> {
    let bad = |e: &Expr| DialectError::Parse {
        line: e.line,
        column: e.col,
        message: "cannot assign to this expression".into(),
    };
    match e.kind {
        ExprKind::Name(n) => Ok(Target::Name(n)),
        ExprKind::Tuple(ref items) => items
            .iter()
            .map(|i| match &i.kind {
                ExprKind::Name(n) => Ok(n.clone()),
                _ => Err(bad(i)),
            })
            .collect::<Result<_, _>>()
            .map(Target::Tuple),
        ExprKind::Index(t, i) => Ok(Target::Index(t, i)),
        _ => Err(bad(&e)),
    }
}
