//! Lenient HTML documents and the XPath subset used by click-style actions.
//!
//! Supported XPath:
//!
//! ```text
//! path      = step { step } ;
//! step      = ( "//" | "/" ) ( "*" | NAME ) { "[" predicate "]" } ;
//! predicate = "@" NAME "=" STRING | "@" NAME | "text()" "=" STRING
//!           | "contains(" ( "@" NAME | "text()" ) "," STRING ")" | INTEGER ;
//! ```
//!
//! Results are returned in document order.

use std::collections::HashSet;

use ego_tree::NodeId;
use scraper::{ElementRef, Html, Node};
use thiserror::Error;

pub use scraper::Html as Document;

/// Parses with html5ever's error-recovering tree builder.
pub fn parse(html: &str) -> Html {
    Html::parse_document(html)
}

/// All text under `el`, in document order.
pub fn text_content(el: ElementRef<'_>) -> String {
    el.text().collect()
}

/// Text content with runs of whitespace collapsed to single spaces.
pub fn normalized_text(el: ElementRef<'_>) -> String {
    el.text()
        .flat_map(|t| t.split_whitespace())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Elements of `doc` in document (pre-)order.
pub fn elements(doc: &Html) -> impl Iterator<Item = ElementRef<'_>> {
    doc.root_element()
        .descendants()
        .filter_map(ElementRef::wrap)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid xpath at column {column}: {message}")]
pub struct XPathError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Axis {
    Child,
    Descendant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Predicate {
    AttrEq(String, String),
    AttrExists(String),
    TextEq(String),
    AttrContains(String, String),
    TextContains(String),
    Position(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct XStep {
    axis: Axis,
    tag: Option<String>,
    predicates: Vec<Predicate>,
}

/// A compiled XPath expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPath {
    steps: Vec<XStep>,
}

impl XPath {
    pub fn parse(expr: &str) -> Result<Self, XPathError> {
        XPathParser { src: expr, pos: 0 }.parse()
    }

    /// Matching elements in document order.
    pub fn select<'a>(&self, doc: &'a Html) -> Vec<ElementRef<'a>> {
        let mut context: Vec<NodeId> = vec![doc.tree.root().id()];
        for step in &self.steps {
            let mut next: Vec<NodeId> = Vec::new();
            let mut seen = HashSet::new();
            for &ctx in &context {
                let node = doc.tree.get(ctx).expect("node id from this tree");
                let candidates: Vec<ElementRef<'a>> = match step.axis {
                    Axis::Child => node.children().filter_map(ElementRef::wrap).collect(),
                    Axis::Descendant => node
                        .descendants()
                        .skip(1)
                        .filter_map(ElementRef::wrap)
                        .collect(),
                };
                let mut matched: Vec<ElementRef<'a>> = candidates
                    .into_iter()
                    .filter(|el| match &step.tag {
                        Some(tag) => el.value().name().eq_ignore_ascii_case(tag),
                        None => true,
                    })
                    .collect();
                for pred in &step.predicates {
                    matched = match pred {
                        Predicate::Position(n) => matched.into_iter().nth(n - 1).into_iter().collect(),
                        other => matched.into_iter().filter(|el| holds(other, *el)).collect(),
                    };
                }
                for el in matched {
                    if seen.insert(el.id()) {
                        next.push(el.id());
                    }
                }
            }
            context = next;
        }
        let wanted: HashSet<NodeId> = context.into_iter().collect();
        elements(doc).filter(|el| wanted.contains(&el.id())).collect()
    }
}

fn direct_texts<'a>(el: ElementRef<'a>) -> impl Iterator<Item = &'a str> {
    el.children().filter_map(|c| match c.value() {
        Node::Text(t) => Some(&**t),
        _ => None,
    })
}

fn holds(pred: &Predicate, el: ElementRef<'_>) -> bool {
    match pred {
        Predicate::AttrEq(name, value) => el.value().attr(name) == Some(value.as_str()),
        Predicate::AttrExists(name) => el.value().attr(name).is_some(),
        Predicate::TextEq(value) => direct_texts(el).any(|t| t == value),
        Predicate::AttrContains(name, value) => el
            .value()
            .attr(name)
            .is_some_and(|a| a.contains(value.as_str())),
        Predicate::TextContains(value) => direct_texts(el).any(|t| t.contains(value.as_str())),
        Predicate::Position(_) => true,
    }
}

struct XPathParser<'s> {
    src: &'s str,
    pos: usize,
}

impl XPathParser<'_> {
    fn err(&self, message: impl Into<String>) -> XPathError {
        XPathError {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn name(&mut self) -> Result<String, XPathError> {
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        Ok(name)
    }

    fn string(&mut self) -> Result<String, XPathError> {
        let quote = self.rest().chars().next().ok_or_else(|| self.err("expected a string"))?;
        if quote != '\'' && quote != '"' {
            return Err(self.err("expected a quoted string"));
        }
        self.pos += 1;
        let end = self
            .rest()
            .find(quote)
            .ok_or_else(|| self.err("unterminated string"))?;
        let s = self.rest()[..end].to_string();
        self.pos += end + 1;
        Ok(s)
    }

    fn parse(mut self) -> Result<XPath, XPathError> {
        let mut steps = Vec::new();
        self.skip_ws();
        while !self.rest().is_empty() {
            let axis = if self.eat("//") {
                Axis::Descendant
            } else if self.eat("/") {
                Axis::Child
            } else {
                return Err(self.err("expected '/' or '//'"));
            };
            let tag = if self.eat("*") { None } else { Some(self.name()?) };
            let mut predicates = Vec::new();
            while self.eat("[") {
                self.skip_ws();
                predicates.push(self.predicate()?);
                self.skip_ws();
                if !self.eat("]") {
                    return Err(self.err("expected ']'"));
                }
            }
            steps.push(XStep { axis, tag, predicates });
            self.skip_ws();
        }
        if steps.is_empty() {
            return Err(self.err("empty expression"));
        }
        Ok(XPath { steps })
    }

    fn predicate(&mut self) -> Result<Predicate, XPathError> {
        if self.eat("@") {
            let name = self.name()?;
            self.skip_ws();
            if self.eat("=") {
                self.skip_ws();
                return Ok(Predicate::AttrEq(name, self.string()?));
            }
            return Ok(Predicate::AttrExists(name));
        }
        if self.eat("text()") {
            self.skip_ws();
            if !self.eat("=") {
                return Err(self.err("expected '=' after text()"));
            }
            self.skip_ws();
            return Ok(Predicate::TextEq(self.string()?));
        }
        if self.eat("contains(") {
            self.skip_ws();
            let target = if self.eat("@") {
                Some(self.name()?)
            } else if self.eat("text()") {
                None
            } else {
                return Err(self.err("contains() expects @attr or text()"));
            };
            self.skip_ws();
            if !self.eat(",") {
                return Err(self.err("expected ','"));
            }
            self.skip_ws();
            let value = self.string()?;
            self.skip_ws();
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(match target {
                Some(attr) => Predicate::AttrContains(attr, value),
                None => Predicate::TextContains(value),
            });
        }
        let digits = self.rest().chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 {
            let n: usize = self.rest()[..digits].parse().map_err(|_| self.err("bad index"))?;
            self.pos += digits;
            if n == 0 {
                return Err(self.err("positions start at 1"));
            }
            return Ok(Predicate::Position(n));
        }
        Err(self.err("unsupported predicate"))
    }
}
