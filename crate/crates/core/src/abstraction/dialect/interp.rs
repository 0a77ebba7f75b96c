use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use ego_tree::{NodeId, NodeRef};
use scraper::{ElementRef, Html, Node, Selector};

use super::parser::{BinOp, CmpOp, Expr, ExprKind, FStrPart, Literal, Stmt, StmtKind, Target};
use super::DialectError;

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Tuple(Rc<Vec<Value>>),
    Dict(Rc<RefCell<Vec<(Value, Value)>>>),
    Node { doc: usize, id: NodeId },
    Builtin(&'static str),
    Method(Box<Value>, Rc<str>),
}

impl Value {
    fn str(s: impl Into<Rc<str>>) -> Self {
        Value::Str(s.into())
    }

    fn list(items: Vec<Value>) -> Self {
        Value::List(Rc::new(RefCell::new(items)))
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::None => "NoneType",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "str",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
            Value::Dict(_) => "dict",
            Value::Node { .. } => "Tag",
            Value::Builtin(_) | Value::Method(..) => "function",
        }
    }

    fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Float(f) => *f != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            Value::Tuple(t) => !t.is_empty(),
            Value::Dict(d) => !d.borrow().is_empty(),
            _ => true,
        }
    }
}

const BUILTINS: [&str; 18] = [
    "int", "float", "str", "len", "min", "max", "range", "abs", "round", "sorted", "sum", "enumerate", "list", "bool",
    "BeautifulSoup", "print", "any", "all",
];

const DEFAULT_STEP_LIMIT: u64 = 100_000;

/// Execution budget for one program run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Statements, loop iterations and comprehension items combined.
    pub max_steps: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_STEP_LIMIT,
        }
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
}

pub struct Interpreter {
    docs: Vec<Html>,
    vars: HashMap<String, Value>,
    steps: u64,
    limits: Limits,
    line: usize,
}

type R<T> = Result<T, DialectError>;

impl Interpreter {
    pub fn new(limits: Limits) -> Self {
        Self {
            docs: Vec::new(),
            vars: HashMap::new(),
            steps: 0,
            limits,
            line: 0,
        }
    }

    pub fn set_str(&mut self, name: &str, value: &str) {
        self.vars.insert(name.to_string(), Value::str(value));
    }

    /// Runs `body` and returns the string form of the variable `output`.
    pub fn run(&mut self, body: &[Stmt], output: &str) -> R<String> {
        match self.block(body)? {
            Flow::Normal => {}
            _ => return self.fail("'break' or 'continue' outside a loop"),
        }
        match self.vars.get(output).cloned() {
            None => Err(DialectError::Runtime {
                line: self.line,
                message: format!("program did not assign `{output}`"),
            }),
            Some(Value::None) => Err(DialectError::Runtime {
                line: self.line,
                message: format!("`{output}` is None"),
            }),
            Some(v) => self.to_str(&v),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> R<T> {
        Err(DialectError::Runtime {
            line: self.line,
            message: message.into(),
        })
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return self.fail(format!("step limit of {} exceeded", self.limits.max_steps));
        }
        Ok(())
    }

    fn block(&mut self, body: &[Stmt]) -> R<Flow> {
        for s in body {
            match self.stmt(s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> R<Flow> {
        self.line = s.line;
        self.tick()?;
        match &s.kind {
            StmtKind::Assign(target, value) => {
                let v = self.eval(value)?;
                self.assign(target, v)?;
            }
            StmtKind::AugAssign(name, op, value) => {
                let cur = match self.vars.get(name) {
                    Some(v) => v.clone(),
                    None => return self.fail(format!("name '{name}' is not defined")),
                };
                let rhs = self.eval(value)?;
                let v = self.binop(*op, cur, rhs)?;
                self.vars.insert(name.clone(), v);
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
            StmtKind::If(branches, orelse) => {
                for (cond, body) in branches {
                    if self.eval(cond)?.truthy() {
                        return self.block(body);
                    }
                }
                return self.block(orelse);
            }
            StmtKind::For(target, iter, body) => {
                let seq = self.eval(iter)?;
                let items = self.iterate(&seq)?;
                for item in items {
                    self.line = s.line;
                    self.tick()?;
                    self.assign(target, item)?;
                    match self.block(body)? {
                        Flow::Break => break,
                        Flow::Continue | Flow::Normal => {}
                    }
                }
            }
            StmtKind::While(cond, body) => loop {
                self.line = s.line;
                self.tick()?;
                if !self.eval(cond)?.truthy() {
                    break;
                }
                match self.block(body)? {
                    Flow::Break => break,
                    Flow::Continue | Flow::Normal => {}
                }
            },
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
            StmtKind::Pass | StmtKind::Import => {}
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, target: &Target, v: Value) -> R<()> {
        match target {
            Target::Name(n) => {
                self.vars.insert(n.clone(), v);
            }
            Target::Tuple(names) => {
                let items = self.iterate(&v)?;
                if items.len() != names.len() {
                    return self.fail(format!("cannot unpack {} values into {} names", items.len(), names.len()));
                }
                for (n, item) in names.iter().zip(items) {
                    self.vars.insert(n.clone(), item);
                }
            }
            Target::Index(t, i) => {
                let container = self.eval(t)?;
                let index = self.eval(i)?;
                match container {
                    Value::List(l) => {
                        let len = l.borrow().len();
                        let k = self.index_of(&index, len)?;
                        l.borrow_mut()[k] = v;
                    }
                    Value::Dict(d) => {
                        let mut d = d.borrow_mut();
                        match d.iter_mut().find(|(k, _)| eq(k, &index)) {
                            Some(slot) => slot.1 = v,
                            None => d.push((index, v)),
                        }
                    }
                    other => return self.fail(format!("'{}' does not support item assignment", other.type_name())),
                }
            }
        }
        Ok(())
    }

    fn iterate(&self, v: &Value) -> R<Vec<Value>> {
        Ok(match v {
            Value::List(l) => l.borrow().clone(),
            Value::Tuple(t) => t.as_ref().clone(),
            Value::Str(s) => s.chars().map(|c| Value::str(c.to_string())).collect(),
            Value::Dict(d) => d.borrow().iter().map(|(k, _)| k.clone()).collect(),
            other => return self.fail(format!("'{}' object is not iterable", other.type_name())),
        })
    }

    fn index_of(&self, index: &Value, len: usize) -> R<usize> {
        let i = match index {
            Value::Int(i) => *i,
            Value::Bool(b) => i64::from(*b),
            other => return self.fail(format!("indices must be integers, not {}", other.type_name())),
        };
        let k = if i < 0 { i + len as i64 } else { i };
        if k < 0 || k >= len as i64 {
            return self.fail("index out of range");
        }
        Ok(k as usize)
    }

    fn eval(&mut self, e: &Expr) -> R<Value> {
        match &e.kind {
            ExprKind::Lit(l) => Ok(match l {
                Literal::None => Value::None,
                Literal::Bool(b) => Value::Bool(*b),
                Literal::Int(i) => Value::Int(*i),
                Literal::Float(f) => Value::Float(*f),
                Literal::Str(s) => Value::str(s.as_str()),
            }),
            ExprKind::Name(n) => match self.vars.get(n) {
                Some(v) => Ok(v.clone()),
                None => match BUILTINS.iter().find(|b| **b == n.as_str()) {
                    Some(b) => Ok(Value::Builtin(b)),
                    None => self.fail(format!("name '{n}' is not defined")),
                },
            },
            ExprKind::FString(parts) => {
                let mut out = String::new();
                for p in parts {
                    match p {
                        FStrPart::Lit(s) => out.push_str(s),
                        FStrPart::Expr(e, spec) => {
                            let v = self.eval(e)?;
                            out.push_str(&self.format_spec(&v, spec.as_deref())?);
                        }
                    }
                }
                Ok(Value::str(out))
            }
            ExprKind::List(items) => {
                let vs = items.iter().map(|i| self.eval(i)).collect::<R<Vec<_>>>()?;
                Ok(Value::list(vs))
            }
            ExprKind::Tuple(items) => {
                let vs = items.iter().map(|i| self.eval(i)).collect::<R<Vec<_>>>()?;
                Ok(Value::Tuple(Rc::new(vs)))
            }
            ExprKind::Dict(items) => {
                let mut vs = Vec::new();
                for (k, v) in items {
                    vs.push((self.eval(k)?, self.eval(v)?));
                }
                Ok(Value::Dict(Rc::new(RefCell::new(vs))))
            }
            ExprKind::Neg(x) => match self.eval(x)? {
                Value::Int(i) => i.checked_neg().map(Value::Int).map_or_else(|| self.fail("integer overflow"), Ok),
                Value::Float(f) => Ok(Value::Float(-f)),
                Value::Bool(b) => Ok(Value::Int(-i64::from(b))),
                other => self.fail(format!("bad operand type for unary -: '{}'", other.type_name())),
            },
            ExprKind::Not(x) => Ok(Value::Bool(!self.eval(x)?.truthy())),
            ExprKind::And(l, r) => {
                let lv = self.eval(l)?;
                if !lv.truthy() {
                    return Ok(lv);
                }
                self.eval(r)
            }
            ExprKind::Or(l, r) => {
                let lv = self.eval(l)?;
                if lv.truthy() {
                    return Ok(lv);
                }
                self.eval(r)
            }
            ExprKind::Bin(op, l, r) => {
                let lv = self.eval(l)?;
                let rv = self.eval(r)?;
                self.binop(*op, lv, rv)
            }
            ExprKind::Compare(first, rest) => {
                let mut left = self.eval(first)?;
                for (op, r) in rest {
                    let right = self.eval(r)?;
                    if !self.compare(*op, &left, &right)? {
                        return Ok(Value::Bool(false));
                    }
                    left = right;
                }
                Ok(Value::Bool(true))
            }
            ExprKind::IfExp { cond, then, orelse } => {
                if self.eval(cond)?.truthy() {
                    self.eval(then)
                } else {
                    self.eval(orelse)
                }
            }
            ExprKind::Call { func, args, kwargs } => {
                let f = self.eval(func)?;
                let args = args.iter().map(|a| self.eval(a)).collect::<R<Vec<_>>>()?;
                let mut kw = Vec::new();
                for (k, v) in kwargs {
                    kw.push((k.as_str(), self.eval(v)?));
                }
                self.call(f, args, kw)
            }
            ExprKind::Attr(obj, name) => {
                let o = self.eval(obj)?;
                self.attr(o, name)
            }
            ExprKind::Index(t, i) => {
                let tv = self.eval(t)?;
                let iv = self.eval(i)?;
                self.index(tv, iv)
            }
            ExprKind::Slice { target, lo, hi, step } => {
                let tv = self.eval(target)?;
                let mut bound = |b: &Option<Box<Expr>>| -> R<Option<i64>> {
                    match b {
                        None => Ok(None),
                        Some(e) => match self.eval(e)? {
                            Value::Int(i) => Ok(Some(i)),
                            Value::None => Ok(None),
                            other => self.fail(format!("slice indices must be integers, not {}", other.type_name())),
                        },
                    }
                };
                let (lo, hi, step) = (bound(lo)?, bound(hi)?, bound(step)?);
                self.slice(tv, lo, hi, step.unwrap_or(1))
            }
            ExprKind::ListComp { elt, target, iter, cond } => {
                let seq = self.eval(iter)?;
                let items = self.iterate(&seq)?;
                let saved: Vec<(String, Option<Value>)> = match target {
                    Target::Name(n) => vec![(n.clone(), self.vars.get(n).cloned())],
                    Target::Tuple(ns) => ns.iter().map(|n| (n.clone(), self.vars.get(n).cloned())).collect(),
                    Target::Index(..) => return self.fail("invalid comprehension target"),
                };
                let mut out = Vec::new();
                let mut result = Ok(());
                for item in items {
                    if let Err(e) = self.tick().and_then(|_| self.assign(target, item)) {
                        result = Err(e);
                        break;
                    }
                    match cond.as_ref().map(|c| self.eval(c)).transpose() {
                        Ok(Some(c)) if !c.truthy() => continue,
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                        _ => {}
                    }
                    match self.eval(elt) {
                        Ok(v) => out.push(v),
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                }
                for (n, old) in saved {
                    match old {
                        Some(v) => self.vars.insert(n, v),
                        None => self.vars.remove(&n),
                    };
                }
                result.map(|_| Value::list(out))
            }
        }
    }

    fn binop(&self, op: BinOp, l: Value, r: Value) -> R<Value> {
        use Value::*;
        let type_err = |l: &Value, r: &Value| {
            self.fail::<Value>(format!(
                "unsupported operand types for {op:?}: '{}' and '{}'",
                l.type_name(),
                r.type_name()
            ))
        };
        match (op, &l, &r) {
            (BinOp::Add, Str(a), Str(b)) => return Ok(Value::str(format!("{a}{b}"))),
            (BinOp::Add, List(a), List(b)) => {
                let mut v = a.borrow().clone();
                v.extend(b.borrow().iter().cloned());
                return Ok(Value::list(v));
            }
            (BinOp::Mul, Str(s), Int(n)) | (BinOp::Mul, Int(n), Str(s)) => {
                let n = usize::try_from(*n).unwrap_or(0);
                if s.len().saturating_mul(n) > 10_000_000 {
                    return self.fail("string repetition too large");
                }
                return Ok(Value::str(s.repeat(n)));
            }
            (BinOp::Mod, Str(_), _) => return self.fail("%-formatting is not supported; use f-strings"),
            _ => {}
        }
        let (Some(a), Some(b)) = (num(&l), num(&r)) else {
            return type_err(&l, &r);
        };
        match (a, b) {
            (Num::I(x), Num::I(y)) => {
                let v = match op {
                    BinOp::Add => x.checked_add(y),
                    BinOp::Sub => x.checked_sub(y),
                    BinOp::Mul => x.checked_mul(y),
                    BinOp::Div => {
                        if y == 0 {
                            return self.fail("division by zero");
                        }
                        return Ok(Float(x as f64 / y as f64));
                    }
                    BinOp::FloorDiv | BinOp::Mod => {
                        if y == 0 {
                            return self.fail("integer division or modulo by zero");
                        }
                        let (Some(mut q), Some(mut m)) = (x.checked_div(y), x.checked_rem(y)) else {
                            return self.fail("integer overflow");
                        };
                        if m != 0 && (m < 0) != (y < 0) {
                            q -= 1;
                            m += y;
                        }
                        Some(if op == BinOp::FloorDiv { q } else { m })
                    }
                    BinOp::Pow => {
                        if y < 0 {
                            return Ok(Float((x as f64).powf(y as f64)));
                        }
                        u32::try_from(y).ok().and_then(|y| x.checked_pow(y))
                    }
                };
                v.map(Int).map_or_else(|| self.fail("integer overflow"), Ok)
            }
            (a, b) => {
                let (x, y) = (a.f(), b.f());
                let v = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return self.fail("float division by zero");
                        }
                        x / y
                    }
                    BinOp::FloorDiv => {
                        if y == 0.0 {
                            return self.fail("float floor division by zero");
                        }
                        (x / y).floor()
                    }
                    BinOp::Mod => {
                        if y == 0.0 {
                            return self.fail("float modulo by zero");
                        }
                        x - y * (x / y).floor()
                    }
                    BinOp::Pow => x.powf(y),
                };
                Ok(Float(v))
            }
        }
    }

    fn compare(&self, op: CmpOp, l: &Value, r: &Value) -> R<bool> {
        match op {
            CmpOp::Eq => Ok(eq(l, r)),
            CmpOp::Ne => Ok(!eq(l, r)),
            CmpOp::Is => Ok(identical(l, r)),
            CmpOp::IsNot => Ok(!identical(l, r)),
            CmpOp::In | CmpOp::NotIn => {
                let found = match r {
                    Value::Str(hay) => match l {
                        Value::Str(needle) => hay.contains(needle.as_ref()),
                        other => return self.fail(format!("'in <string>' requires string as left operand, not {}", other.type_name())),
                    },
                    Value::List(items) => items.borrow().iter().any(|i| eq(i, l)),
                    Value::Tuple(items) => items.iter().any(|i| eq(i, l)),
                    Value::Dict(d) => d.borrow().iter().any(|(k, _)| eq(k, l)),
                    other => return self.fail(format!("argument of type '{}' is not iterable", other.type_name())),
                };
                Ok(found == (op == CmpOp::In))
            }
            CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                let ord = match (l, r) {
                    (Value::Str(a), Value::Str(b)) => a.cmp(b),
                    _ => match (num(l), num(r)) {
                        (Some(a), Some(b)) => match a.f().partial_cmp(&b.f()) {
                            Some(o) => o,
                            None => return Ok(false),
                        },
                        _ => {
                            return self.fail(format!(
                                "'<' not supported between instances of '{}' and '{}'",
                                l.type_name(),
                                r.type_name()
                            ))
                        }
                    },
                };
                Ok(match op {
                    CmpOp::Lt => ord.is_lt(),
                    CmpOp::Le => ord.is_le(),
                    CmpOp::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                })
            }
        }
    }

    fn index(&self, t: Value, i: Value) -> R<Value> {
        match &t {
            Value::List(l) => {
                let l = l.borrow();
                let k = self.index_of(&i, l.len())?;
                Ok(l[k].clone())
            }
            Value::Tuple(items) => {
                let k = self.index_of(&i, items.len())?;
                Ok(items[k].clone())
            }
            Value::Str(s) => {
                let chars: Vec<char> = s.chars().collect();
                let k = self.index_of(&i, chars.len())?;
                Ok(Value::str(chars[k].to_string()))
            }
            Value::Dict(d) => match d.borrow().iter().find(|(k, _)| eq(k, &i)) {
                Some((_, v)) => Ok(v.clone()),
                None => self.fail(format!("KeyError: {}", self.repr(&i))),
            },
            Value::Node { .. } => {
                let Value::Str(name) = &i else {
                    return self.fail("tag attributes are indexed by string");
                };
                match self.node_attr(&t, name) {
                    Some(v) => Ok(v),
                    None => self.fail(format!("KeyError: attribute '{name}' not present")),
                }
            }
            other => self.fail(format!("'{}' object is not subscriptable", other.type_name())),
        }
    }

    fn slice(&self, t: Value, lo: Option<i64>, hi: Option<i64>, step: i64) -> R<Value> {
        if step == 0 {
            return self.fail("slice step cannot be zero");
        }
        let pick = |len: usize| -> Vec<usize> {
            let len = len as i64;
            let norm = |b: i64, lo_clamp: i64, hi_clamp: i64| {
                let b = if b < 0 { b + len } else { b };
                b.clamp(lo_clamp, hi_clamp)
            };
            let mut out = Vec::new();
            if step > 0 {
                let start = lo.map_or(0, |b| norm(b, 0, len));
                let stop = hi.map_or(len, |b| norm(b, 0, len));
                let mut k = start;
                while k < stop {
                    out.push(k as usize);
                    k += step;
                }
            } else {
                let start = lo.map_or(len - 1, |b| norm(b, -1, len - 1));
                let stop = hi.map_or(-1, |b| norm(b, -1, len - 1));
                let mut k = start;
                while k > stop {
                    out.push(k as usize);
                    k += step;
                }
            }
            out
        };
        match &t {
            Value::Str(s) => {
                let chars: Vec<char> = s.chars().collect();
                Ok(Value::str(pick(chars.len()).into_iter().map(|k| chars[k]).collect::<String>()))
            }
            Value::List(l) => {
                let l = l.borrow();
                Ok(Value::list(pick(l.len()).into_iter().map(|k| l[k].clone()).collect()))
            }
            Value::Tuple(items) => Ok(Value::Tuple(Rc::new(pick(items.len()).into_iter().map(|k| items[k].clone()).collect()))),
            other => self.fail(format!("'{}' object is not sliceable", other.type_name())),
        }
    }

    fn attr(&self, o: Value, name: &str) -> R<Value> {
        if let Value::Node { doc, id } = &o {
            let node = self.node(*doc, *id);
            match name {
                "text" => return Ok(Value::str(node_text(node, "", false))),
                "name" => {
                    return Ok(match node.value() {
                        Node::Element(e) => Value::str(e.name()),
                        _ => Value::str("[document]"),
                    })
                }
                "string" => {
                    let texts: Vec<_> = node.children().collect();
                    return Ok(match texts.as_slice() {
                        [only] => match only.value() {
                            Node::Text(t) => Value::str(&**t),
                            _ => Value::None,
                        },
                        _ => Value::None,
                    });
                }
                "attrs" => {
                    let items = match node.value() {
                        Node::Element(e) => e
                            .attrs()
                            .map(|(k, _)| (Value::str(k), self.node_attr(&o, k).unwrap_or(Value::None)))
                            .collect(),
                        _ => Vec::new(),
                    };
                    return Ok(Value::Dict(Rc::new(RefCell::new(items))));
                }
                "parent" => {
                    return Ok(node
                        .parent()
                        .map_or(Value::None, |p| Value::Node { doc: *doc, id: p.id() }))
                }
                _ => {}
            }
        }
        let methods: &[&str] = match &o {
            Value::Str(_) => &[
                "split", "strip", "lstrip", "rstrip", "lower", "upper", "replace", "startswith", "endswith", "find",
                "count", "join", "isdigit", "isalpha", "title", "removesuffix", "removeprefix",
            ],
            Value::List(_) => &["append", "extend", "pop", "index", "count"],
            Value::Dict(_) => &["get", "keys", "values", "items"],
            Value::Node { .. } => &["find_all", "find", "select", "select_one", "get", "get_text", "findAll", "has_attr"],
            _ => &[],
        };
        if methods.contains(&name) {
            return Ok(Value::Method(Box::new(o), name.into()));
        }
        self.fail(format!("'{}' object has no attribute '{name}'", o.type_name()))
    }

    fn node(&self, doc: usize, id: NodeId) -> NodeRef<'_, Node> {
        self.docs[doc].tree.get(id).expect("node ids come from the owning document")
    }

    fn node_attr(&self, v: &Value, name: &str) -> Option<Value> {
        let Value::Node { doc, id } = v else { return None };
        let el = ElementRef::wrap(self.node(*doc, *id))?;
        let a = el.value().attr(name)?;
        if name == "class" {
            return Some(Value::list(a.split_whitespace().map(Value::str).collect()));
        }
        Some(Value::str(a))
    }

    fn call(&mut self, f: Value, args: Vec<Value>, kwargs: Vec<(&str, Value)>) -> R<Value> {
        match f {
            Value::Builtin(name) => self.builtin(name, args, kwargs),
            Value::Method(recv, name) => self.method(*recv, &name, args, kwargs),
            other => self.fail(format!("'{}' object is not callable", other.type_name())),
        }
    }

    fn no_kwargs(&self, what: &str, kwargs: &[(&str, Value)]) -> R<()> {
        match kwargs.first() {
            Some((k, _)) => self.fail(format!("{what}() got an unexpected keyword argument '{k}'")),
            None => Ok(()),
        }
    }

    fn arity(&self, what: &str, args: &[Value], min: usize, max: usize) -> R<()> {
        if args.len() < min || args.len() > max {
            return self.fail(format!("{what}() takes {min} to {max} arguments ({} given)", args.len()));
        }
        Ok(())
    }

    fn builtin(&mut self, name: &str, args: Vec<Value>, kwargs: Vec<(&str, Value)>) -> R<Value> {
        match name {
            "print" => Ok(Value::None),
            "BeautifulSoup" => {
                self.arity(name, &args, 1, 2)?;
                let Value::Str(markup) = &args[0] else {
                    return self.fail("BeautifulSoup() expects markup text");
                };
                self.docs.push(Html::parse_document(markup));
                let doc = self.docs.len() - 1;
                Ok(Value::Node {
                    doc,
                    id: self.docs[doc].tree.root().id(),
                })
            }
            "sorted" => {
                self.arity(name, &args, 1, 1)?;
                let mut reverse = false;
                for (k, v) in &kwargs {
                    match *k {
                        "reverse" => reverse = v.truthy(),
                        other => return self.fail(format!("sorted() got an unexpected keyword argument '{other}'")),
                    }
                }
                let mut items = self.iterate(&args[0])?;
                let mut err = None;
                items.sort_by(|a, b| match self.compare(CmpOp::Lt, a, b) {
                    Ok(true) => std::cmp::Ordering::Less,
                    Ok(false) => match self.compare(CmpOp::Lt, b, a) {
                        Ok(true) => std::cmp::Ordering::Greater,
                        Ok(false) => std::cmp::Ordering::Equal,
                        Err(e) => {
                            err.get_or_insert(e);
                            std::cmp::Ordering::Equal
                        }
                    },
                    Err(e) => {
                        err.get_or_insert(e);
                        std::cmp::Ordering::Equal
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if reverse {
                    items.reverse();
                }
                Ok(Value::list(items))
            }
            _ => {
                self.no_kwargs(name, &kwargs)?;
                self.simple_builtin(name, args)
            }
        }
    }

    fn simple_builtin(&mut self, name: &str, args: Vec<Value>) -> R<Value> {
        match name {
            "int" => {
                self.arity(name, &args, 0, 1)?;
                match args.first() {
                    None => Ok(Value::Int(0)),
                    Some(Value::Int(i)) => Ok(Value::Int(*i)),
                    Some(Value::Bool(b)) => Ok(Value::Int(i64::from(*b))),
                    Some(Value::Float(f)) if f.is_finite() && f.abs() < 9.2e18 => Ok(Value::Int(f.trunc() as i64)),
                    Some(Value::Float(_)) => self.fail("cannot convert float infinity or NaN to integer"),
                    Some(Value::Str(s)) => s
                        .trim()
                        .replace('_', "")
                        .parse::<i64>()
                        .map(Value::Int)
                        .or_else(|_| self.fail(format!("invalid literal for int() with base 10: {}", self.repr(&args[0])))),
                    Some(other) => self.fail(format!("int() argument must be a string or a number, not '{}'", other.type_name())),
                }
            }
            "float" => {
                self.arity(name, &args, 0, 1)?;
                match args.first() {
                    None => Ok(Value::Float(0.0)),
                    Some(v) if num(v).is_some() => Ok(Value::Float(num(v).expect("checked").f())),
                    Some(Value::Str(s)) => {
                        let t = s.trim().to_ascii_lowercase();
                        let parsed = match t.as_str() {
                            "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
                            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
                            "nan" | "+nan" | "-nan" => Some(f64::NAN),
                            _ if t.chars().any(|c| c.is_ascii_digit()) => t.replace('_', "").parse().ok(),
                            _ => None,
                        };
                        parsed
                            .map(Value::Float)
                            .map_or_else(|| self.fail(format!("could not convert string to float: {}", self.repr(&args[0]))), Ok)
                    }
                    Some(other) => self.fail(format!("float() argument must be a string or a number, not '{}'", other.type_name())),
                }
            }
            "str" => {
                self.arity(name, &args, 0, 1)?;
                match args.first() {
                    None => Ok(Value::str("")),
                    Some(v) => Ok(Value::str(self.to_str(v)?)),
                }
            }
            "bool" => {
                self.arity(name, &args, 0, 1)?;
                Ok(Value::Bool(args.first().is_some_and(Value::truthy)))
            }
            "len" => {
                self.arity(name, &args, 1, 1)?;
                let n = match &args[0] {
                    Value::Str(s) => s.chars().count(),
                    Value::List(l) => l.borrow().len(),
                    Value::Tuple(t) => t.len(),
                    Value::Dict(d) => d.borrow().len(),
                    other => return self.fail(format!("object of type '{}' has no len()", other.type_name())),
                };
                Ok(Value::Int(n as i64))
            }
            "abs" => {
                self.arity(name, &args, 1, 1)?;
                match num(&args[0]) {
                    Some(Num::I(i)) => Ok(Value::Int(i.abs())),
                    Some(Num::F(f)) => Ok(Value::Float(f.abs())),
                    None => self.fail(format!("bad operand type for abs(): '{}'", args[0].type_name())),
                }
            }
            "round" => {
                self.arity(name, &args, 1, 2)?;
                let x = num(&args[0]).map(Num::f);
                let digits = match args.get(1) {
                    None | Some(Value::None) => None,
                    Some(Value::Int(d)) => Some(*d),
                    Some(_) => return self.fail("round() digits must be an integer"),
                };
                match (x, digits) {
                    (Some(x), None) => {
                        let r = x.round_ties_even();
                        if !r.is_finite() {
                            return self.fail("cannot round a non-finite float to an integer");
                        }
                        Ok(Value::Int(r as i64))
                    }
                    (Some(x), Some(d)) => {
                        let p = 10f64.powi(d.clamp(-300, 300) as i32);
                        Ok(Value::Float((x * p).round_ties_even() / p))
                    }
                    _ => self.fail("round() expects a number"),
                }
            }
            "min" | "max" => {
                let items = match args.as_slice() {
                    [single] => self.iterate(single)?,
                    _ => args,
                };
                let mut it = items.into_iter();
                let Some(mut best) = it.next() else {
                    return self.fail(format!("{name}() arg is an empty sequence"));
                };
                for v in it {
                    let better = if name == "min" {
                        self.compare(CmpOp::Lt, &v, &best)?
                    } else {
                        self.compare(CmpOp::Gt, &v, &best)?
                    };
                    if better {
                        best = v;
                    }
                }
                Ok(best)
            }
            "sum" => {
                self.arity(name, &args, 1, 2)?;
                let mut total = args.get(1).cloned().unwrap_or(Value::Int(0));
                for v in self.iterate(&args[0])? {
                    total = self.binop(BinOp::Add, total, v)?;
                }
                Ok(total)
            }
            "any" | "all" => {
                self.arity(name, &args, 1, 1)?;
                let items = self.iterate(&args[0])?;
                Ok(Value::Bool(if name == "any" {
                    items.iter().any(Value::truthy)
                } else {
                    items.iter().all(Value::truthy)
                }))
            }
            "range" => {
                self.arity(name, &args, 1, 3)?;
                let ints = args
                    .iter()
                    .map(|a| match a {
                        Value::Int(i) => Ok(*i),
                        other => self.fail(format!("'{}' object cannot be interpreted as an integer", other.type_name())),
                    })
                    .collect::<R<Vec<i64>>>()?;
                let (start, stop, step) = match ints.as_slice() {
                    [n] => (0, *n, 1),
                    [a, b] => (*a, *b, 1),
                    [a, b, c] => (*a, *b, *c),
                    _ => unreachable!(),
                };
                if step == 0 {
                    return self.fail("range() arg 3 must not be zero");
                }
                let len = if step > 0 {
                    (stop - start).max(0).saturating_add(step - 1) / step
                } else {
                    (start - stop).max(0).saturating_add(-step - 1) / -step
                };
                if len as u64 > self.limits.max_steps {
                    return self.fail(format!("step limit of {} exceeded", self.limits.max_steps));
                }
                Ok(Value::list((0..len).map(|k| Value::Int(start + k * step)).collect()))
            }
            "enumerate" => {
                self.arity(name, &args, 1, 2)?;
                let start = match args.get(1) {
                    Some(Value::Int(s)) => *s,
                    None => 0,
                    Some(_) => return self.fail("enumerate() start must be an integer"),
                };
                let items = self.iterate(&args[0])?;
                Ok(Value::list(
                    items
                        .into_iter()
                        .enumerate()
                        .map(|(i, v)| Value::Tuple(Rc::new(vec![Value::Int(start + i as i64), v])))
                        .collect(),
                ))
            }
            "list" => {
                self.arity(name, &args, 0, 1)?;
                match args.first() {
                    None => Ok(Value::list(vec![])),
                    Some(v) => Ok(Value::list(self.iterate(v)?)),
                }
            }
            other => self.fail(format!("unknown builtin {other}")),
        }
    }

    fn method(&mut self, recv: Value, name: &str, args: Vec<Value>, kwargs: Vec<(&str, Value)>) -> R<Value> {
        if let Value::Node { doc, id } = recv {
            return self.node_method(doc, id, name, args, kwargs);
        }
        self.no_kwargs(name, &kwargs)?;
        let str_arg = |i: usize| -> R<Option<Rc<str>>> {
            match args.get(i) {
                None | Some(Value::None) => Ok(None),
                Some(Value::Str(s)) => Ok(Some(s.clone())),
                Some(other) => self.fail(format!("{name}() argument must be str, not {}", other.type_name())),
            }
        };
        match recv {
            Value::Str(s) => match name {
                "split" => {
                    self.arity(name, &args, 0, 2)?;
                    let max = match args.get(1) {
                        Some(Value::Int(m)) if *m >= 0 => Some(*m as usize),
                        _ => None,
                    };
                    let parts: Vec<Value> = match str_arg(0)? {
                        None => match max {
                            None => s.split_whitespace().map(Value::str).collect(),
                            Some(m) => {
                                let mut out = Vec::new();
                                let mut rest = s.trim_start();
                                while !rest.is_empty() && out.len() < m {
                                    let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
                                    out.push(Value::str(&rest[..end]));
                                    rest = rest[end..].trim_start();
                                }
                                if !rest.is_empty() {
                                    out.push(Value::str(rest.trim_end()));
                                }
                                out
                            }
                        },
                        Some(sep) if sep.is_empty() => return self.fail("empty separator"),
                        Some(sep) => match max {
                            None => s.split(sep.as_ref()).map(Value::str).collect(),
                            Some(m) => s.splitn(m + 1, sep.as_ref()).map(Value::str).collect(),
                        },
                    };
                    Ok(Value::list(parts))
                }
                "strip" | "lstrip" | "rstrip" => {
                    self.arity(name, &args, 0, 1)?;
                    let chars = str_arg(0)?;
                    let pred = |c: char| match &chars {
                        Some(set) => set.contains(c),
                        None => c.is_whitespace(),
                    };
                    let out = match name {
                        "strip" => s.trim_matches(pred),
                        "lstrip" => s.trim_start_matches(pred),
                        _ => s.trim_end_matches(pred),
                    };
                    Ok(Value::str(out))
                }
                "lower" => Ok(Value::str(s.to_lowercase())),
                "upper" => Ok(Value::str(s.to_uppercase())),
                "title" => Ok(Value::str(
                    s.split(' ')
                        .map(|w| {
                            let mut c = w.chars();
                            c.next()
                                .map(|f| f.to_uppercase().chain(c.flat_map(char::to_lowercase)).collect::<String>())
                                .unwrap_or_default()
                        })
                        .collect::<Vec<_>>()
                        .join(" "),
                )),
                "isdigit" => Ok(Value::Bool(!s.is_empty() && s.chars().all(|c| c.is_ascii_digit()))),
                "isalpha" => Ok(Value::Bool(!s.is_empty() && s.chars().all(char::is_alphabetic))),
                "replace" => {
                    self.arity(name, &args, 2, 2)?;
                    match (str_arg(0)?, str_arg(1)?) {
                        (Some(a), Some(b)) => Ok(Value::str(s.replace(a.as_ref(), &b))),
                        _ => self.fail("replace() expects two strings"),
                    }
                }
                "startswith" | "endswith" | "find" | "count" | "removesuffix" | "removeprefix" => {
                    self.arity(name, &args, 1, 1)?;
                    let Some(a) = str_arg(0)? else {
                        return self.fail(format!("{name}() expects a string"));
                    };
                    Ok(match name {
                        "startswith" => Value::Bool(s.starts_with(a.as_ref())),
                        "endswith" => Value::Bool(s.ends_with(a.as_ref())),
                        "find" => Value::Int(s.find(a.as_ref()).map_or(-1, |b| s[..b].chars().count() as i64)),
                        "count" => Value::Int(s.matches(a.as_ref()).count() as i64),
                        "removesuffix" => Value::str(s.strip_suffix(a.as_ref()).unwrap_or(&s)),
                        _ => Value::str(s.strip_prefix(a.as_ref()).unwrap_or(&s)),
                    })
                }
                "join" => {
                    self.arity(name, &args, 1, 1)?;
                    let parts = self
                        .iterate(&args[0])?
                        .into_iter()
                        .map(|v| match v {
                            Value::Str(p) => Ok(p.to_string()),
                            other => self.fail(format!("sequence item: expected str instance, {} found", other.type_name())),
                        })
                        .collect::<R<Vec<_>>>()?;
                    Ok(Value::str(parts.join(&s)))
                }
                _ => unreachable!("attr() only hands out known methods"),
            },
            Value::List(l) => match name {
                "append" => {
                    self.arity(name, &args, 1, 1)?;
                    if l.borrow().len() as u64 >= self.limits.max_steps {
                        return self.fail("list grew beyond the step limit");
                    }
                    l.borrow_mut().push(args.into_iter().next().expect("arity checked"));
                    Ok(Value::None)
                }
                "extend" => {
                    self.arity(name, &args, 1, 1)?;
                    let items = self.iterate(&args[0])?;
                    l.borrow_mut().extend(items);
                    Ok(Value::None)
                }
                "pop" => {
                    self.arity(name, &args, 0, 1)?;
                    let len = l.borrow().len();
                    if len == 0 {
                        return self.fail("pop from empty list");
                    }
                    let k = self.index_of(args.first().unwrap_or(&Value::Int(-1)), len)?;
                    Ok(l.borrow_mut().remove(k))
                }
                "index" => {
                    self.arity(name, &args, 1, 1)?;
                    match l.borrow().iter().position(|v| eq(v, &args[0])) {
                        Some(k) => Ok(Value::Int(k as i64)),
                        None => self.fail("value is not in list"),
                    }
                }
                "count" => {
                    self.arity(name, &args, 1, 1)?;
                    Ok(Value::Int(l.borrow().iter().filter(|v| eq(v, &args[0])).count() as i64))
                }
                _ => unreachable!("attr() only hands out known methods"),
            },
            Value::Dict(d) => match name {
                "get" => {
                    self.arity(name, &args, 1, 2)?;
                    let found = d.borrow().iter().find(|(k, _)| eq(k, &args[0])).map(|(_, v)| v.clone());
                    Ok(found.unwrap_or_else(|| args.get(1).cloned().unwrap_or(Value::None)))
                }
                "keys" => Ok(Value::list(d.borrow().iter().map(|(k, _)| k.clone()).collect())),
                "values" => Ok(Value::list(d.borrow().iter().map(|(_, v)| v.clone()).collect())),
                "items" => Ok(Value::list(
                    d.borrow()
                        .iter()
                        .map(|(k, v)| Value::Tuple(Rc::new(vec![k.clone(), v.clone()])))
                        .collect(),
                )),
                _ => unreachable!("attr() only hands out known methods"),
            },
            other => self.fail(format!("'{}' object has no method '{name}'", other.type_name())),
        }
    }

    fn node_method(&mut self, doc: usize, id: NodeId, name: &str, args: Vec<Value>, kwargs: Vec<(&str, Value)>) -> R<Value> {
        let this = Value::Node { doc, id };
        match name {
            "find_all" | "findAll" | "find" => {
                let mut filter = TagFilter::default();
                let mut recursive = true;
                let mut limit = None;
                if let Some(n) = args.first() {
                    filter.name = Some(n.clone());
                }
                match args.get(1) {
                    Some(Value::Dict(d)) => {
                        for (k, v) in d.borrow().iter() {
                            let Value::Str(k) = k else { return self.fail("attrs keys must be strings") };
                            filter.attrs.push((k.to_string(), v.clone()));
                        }
                    }
                    Some(v @ Value::Str(_)) => filter.attrs.push(("class".into(), v.clone())),
                    Some(Value::None) | None => {}
                    Some(other) => return self.fail(format!("unsupported filter of type '{}'", other.type_name())),
                }
                if args.len() > 2 {
                    return self.fail(format!("{name}() takes at most 2 positional arguments"));
                }
                for (k, v) in kwargs {
                    match k {
                        "name" => filter.name = Some(v),
                        "class_" => filter.attrs.push(("class".into(), v)),
                        "recursive" => recursive = v.truthy(),
                        "limit" => {
                            limit = match v {
                                Value::Int(n) if n > 0 => Some(n as usize),
                                Value::None | Value::Int(_) => None,
                                _ => return self.fail("limit must be an integer"),
                            }
                        }
                        "string" | "text" => filter.text = Some(v),
                        "attrs" => {
                            let Value::Dict(d) = v else { return self.fail("attrs must be a dict") };
                            for (k, v) in d.borrow().iter() {
                                let Value::Str(k) = k else { return self.fail("attrs keys must be strings") };
                                filter.attrs.push((k.to_string(), v.clone()));
                            }
                        }
                        other => filter.attrs.push((other.to_string(), v)),
                    }
                }
                if name == "find" {
                    limit = Some(1);
                }
                let node = self.node(doc, id);
                let candidates: Vec<NodeRef<'_, Node>> = if recursive {
                    node.descendants().skip(1).collect()
                } else {
                    node.children().collect()
                };
                let mut out = Vec::new();
                for c in candidates {
                    if let Some(el) = ElementRef::wrap(c) {
                        if filter.matches(self, el)? {
                            out.push(Value::Node { doc, id: c.id() });
                            if limit.is_some_and(|l| out.len() >= l) {
                                break;
                            }
                        }
                    }
                }
                if name == "find" {
                    return Ok(out.into_iter().next().unwrap_or(Value::None));
                }
                Ok(Value::list(out))
            }
            "select" | "select_one" => {
                self.no_kwargs(name, &kwargs)?;
                self.arity(name, &args, 1, 1)?;
                let Value::Str(css) = &args[0] else {
                    return self.fail(format!("{name}() expects a CSS selector string"));
                };
                let sel = match Selector::parse(css) {
                    Ok(s) => s,
                    Err(e) => return self.fail(format!("invalid CSS selector {css:?}: {e}")),
                };
                let node = self.node(doc, id);
                let hits: Vec<Value> = node
                    .descendants()
                    .skip(1)
                    .filter_map(ElementRef::wrap)
                    .filter(|el| sel.matches(el))
                    .map(|el| Value::Node { doc, id: el.id() })
                    .collect();
                if name == "select_one" {
                    return Ok(hits.into_iter().next().unwrap_or(Value::None));
                }
                Ok(Value::list(hits))
            }
            "get" => {
                self.no_kwargs(name, &kwargs)?;
                self.arity(name, &args, 1, 2)?;
                let Value::Str(a) = &args[0] else {
                    return self.fail("get() expects an attribute name");
                };
                Ok(self
                    .node_attr(&this, a)
                    .unwrap_or_else(|| args.get(1).cloned().unwrap_or(Value::None)))
            }
            "has_attr" => {
                self.arity(name, &args, 1, 1)?;
                let Value::Str(a) = &args[0] else {
                    return self.fail("has_attr() expects an attribute name");
                };
                Ok(Value::Bool(self.node_attr(&this, a).is_some()))
            }
            "get_text" => {
                let mut sep = args.first().cloned();
                let mut strip = args.get(1).is_some_and(Value::truthy);
                for (k, v) in kwargs {
                    match k {
                        "separator" => sep = Some(v),
                        "strip" => strip = v.truthy(),
                        other => return self.fail(format!("get_text() got an unexpected keyword argument '{other}'")),
                    }
                }
                let sep = match sep {
                    None | Some(Value::None) => String::new(),
                    Some(Value::Str(s)) => s.to_string(),
                    Some(_) => return self.fail("separator must be a string"),
                };
                Ok(Value::str(node_text(self.node(doc, id), &sep, strip)))
            }
            _ => self.fail(format!("'Tag' object has no attribute '{name}'")),
        }
    }

    fn format_spec(&self, v: &Value, spec: Option<&str>) -> R<String> {
        let Some(spec) = spec.filter(|s| !s.is_empty()) else {
            return self.to_str(v);
        };
        let (comma, rest) = match spec.strip_prefix(',') {
            Some(r) => (true, r),
            None => (false, spec),
        };
        let body = if let Some(p) = rest.strip_prefix('.').and_then(|r| r.strip_suffix('f')) {
            let digits: usize = p.parse().map_err(|_| DialectError::Runtime {
                line: self.line,
                message: format!("unsupported format spec {spec:?}"),
            })?;
            match num(v) {
                Some(n) => format!("{:.*}", digits, n.f()),
                None => return self.fail(format!("format spec {spec:?} needs a number")),
            }
        } else if rest == "d" || rest.is_empty() {
            match v {
                Value::Int(i) => i.to_string(),
                _ => return self.fail(format!("format spec {spec:?} needs an integer")),
            }
        } else {
            return self.fail(format!("unsupported format spec {spec:?}"));
        };
        Ok(if comma { group_thousands(&body) } else { body })
    }

    fn to_str(&self, v: &Value) -> R<String> {
        Ok(match v {
            Value::Str(s) => s.to_string(),
            Value::Node { doc, id } => {
                let node = self.node(*doc, *id);
                match ElementRef::wrap(node) {
                    Some(el) => el.html(),
                    None => self.docs[*doc].root_element().html(),
                }
            }
            other => self.repr(other),
        })
    }

    fn repr(&self, v: &Value) -> String {
        match v {
            Value::None => "None".into(),
            Value::Bool(b) => if *b { "True" } else { "False" }.into(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) => py_float(*f),
            Value::Str(s) => {
                if s.contains('\'') && !s.contains('"') {
                    format!("\"{s}\"")
                } else {
                    format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
                }
            }
            Value::List(l) => format!("[{}]", l.borrow().iter().map(|x| self.repr(x)).collect::<Vec<_>>().join(", ")),
            Value::Tuple(t) if t.len() == 1 => format!("({},)", self.repr(&t[0])),
            Value::Tuple(t) => format!("({})", t.iter().map(|x| self.repr(x)).collect::<Vec<_>>().join(", ")),
            Value::Dict(d) => format!(
                "{{{}}}",
                d.borrow()
                    .iter()
                    .map(|(k, v)| format!("{}: {}", self.repr(k), self.repr(v)))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Value::Node { .. } => self.to_str(v).unwrap_or_default(),
            Value::Builtin(n) => format!("<built-in function {n}>"),
            Value::Method(_, n) => format!("<method {n}>"),
        }
    }
}

#[derive(Default)]
struct TagFilter {
    name: Option<Value>,
    attrs: Vec<(String, Value)>,
    text: Option<Value>,
}

impl TagFilter {
    fn matches(&self, it: &Interpreter, el: ElementRef<'_>) -> R<bool> {
        let value_matches = |want: &Value, have: Option<&str>, is_class: bool| -> R<bool> {
            Ok(match want {
                Value::Bool(true) => have.is_some(),
                Value::Bool(false) | Value::None => have.is_none(),
                Value::Str(w) => match have {
                    None => false,
                    Some(h) if is_class => h == w.as_ref() || h.split_whitespace().any(|c| c == w.as_ref()),
                    Some(h) => h == w.as_ref(),
                },
                Value::List(options) => {
                    let opts = options.borrow().clone();
                    let mut any = false;
                    for o in &opts {
                        if let Value::Str(w) = o {
                            any |= match have {
                                None => false,
                                Some(h) if is_class => h.split_whitespace().any(|c| c == w.as_ref()),
                                Some(h) => h == w.as_ref(),
                            };
                        }
                    }
                    any
                }
                other => return it.fail(format!("unsupported filter value of type '{}'", other.type_name())),
            })
        };
        if let Some(n) = &self.name {
            if !matches!(n, Value::Bool(true) | Value::None) && !value_matches(n, Some(el.value().name()), false)? {
                return Ok(false);
            }
        }
        for (k, want) in &self.attrs {
            if !value_matches(want, el.value().attr(k), k == "class")? {
                return Ok(false);
            }
        }
        if let Some(want) = &self.text {
            let text: String = el.text().collect();
            if !value_matches(want, Some(&text), false)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn node_text(node: NodeRef<'_, Node>, sep: &str, strip: bool) -> String {
    let texts = node.descendants().filter_map(|n| match n.value() {
        Node::Text(t) => Some(&**t),
        _ => None,
    });
    if strip {
        texts.map(str::trim).filter(|t| !t.is_empty()).collect::<Vec<_>>().join(sep)
    } else {
        texts.collect::<Vec<_>>().join(sep)
    }
}

#[derive(Clone, Copy)]
enum Num {
    I(i64),
    F(f64),
}

impl Num {
    fn f(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        }
    }
}

fn num(v: &Value) -> Option<Num> {
    match v {
        Value::Int(i) => Some(Num::I(*i)),
        Value::Bool(b) => Some(Num::I(i64::from(*b))),
        Value::Float(f) => Some(Num::F(*f)),
        _ => None,
    }
}

fn eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::List(x), Value::List(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| eq(p, q))
        }
        (Value::Tuple(x), Value::Tuple(y)) => x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| eq(p, q)),
        (Value::Node { doc: d1, id: i1 }, Value::Node { doc: d2, id: i2 }) => d1 == d2 && i1 == i2,
        _ => match (num(a), num(b)) {
            (Some(Num::I(x)), Some(Num::I(y))) => x == y,
            (Some(x), Some(y)) => x.f() == y.f(),
            _ => false,
        },
    }
}

fn identical(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::List(x), Value::List(y)) => Rc::ptr_eq(x, y),
        (Value::Dict(x), Value::Dict(y)) => Rc::ptr_eq(x, y),
        (Value::Node { .. }, Value::Node { .. }) => eq(a, b),
        _ => false,
    }
}

/// Python's `repr(float)`.
pub fn py_float(f: f64) -> String {
    if f.is_nan() {
        return "nan".into();
    }
    if f.is_infinite() {
        return if f > 0.0 { "inf" } else { "-inf" }.into();
    }
    let a = f.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        let s = format!("{f:e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let exp: i32 = exp.parse().expect("integer exponent");
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    if f == f.trunc() {
        return format!("{f:.1}");
    }
    format!("{f}")
}

fn group_thousands(s: &str) -> String {
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => ("-", r),
        None => ("", s),
    };
    let (int, frac) = match rest.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (rest, None),
    };
    let mut out = String::new();
    for (i, c) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    let mut res = format!("{sign}{out}");
    if let Some(f) = frac {
        res.push('.');
        res.push_str(f);
    }
    res
}
