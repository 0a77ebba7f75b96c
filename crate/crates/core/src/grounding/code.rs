use serde::{Deserialize, Serialize};

use super::{first_fence, GroundingError};
use crate::model::{Action, ActionBlock};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stmt", rename_all = "snake_case")]
pub enum Statement {
    Call { action: Action },
    Loop { count: u32, body: Vec<Action> },
    Comment { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ActionScript {
    pub statements: Vec<Statement>,
}

/// Loops unrolled and comments collected, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expansion {
    pub actions: Vec<Action>,
    pub comments: Vec<String>,
}

const METHODS: [&str; 5] = ["click_xpath", "type", "press", "click_option", "movemouse"];

fn make_action(method: &str, arg: String) -> Action {
    match method {
        "click_xpath" => Action::ClickXpath { xpath: arg },
        "type" => Action::Type { characters: arg },
        "press" => Action::Press { key: arg },
        "click_option" => Action::ClickOption { xpath: arg },
        "movemouse" => Action::MoveMouse { xpath: arg },
        _ => unreachable!("method checked against METHODS"),
    }
}

fn method_and_arg(a: &Action) -> (&'static str, &str) {
    match a {
        Action::ClickXpath { xpath } => ("click_xpath", xpath),
        Action::Type { characters } => ("type", characters),
        Action::Press { key } => ("press", key),
        Action::ClickOption { xpath } => ("click_option", xpath),
        Action::MoveMouse { xpath } => ("movemouse", xpath),
        other => panic!("{} is not a code-dialect action", other.kind_name()),
    }
}

struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

/// Splits `text` at an inline `#` that sits outside string literals.
fn split_comment(text: &str) -> (&str, Option<&str>) {
    let mut quote = None;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        match quote {
            Some(q) => {
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
            }
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == '#' => return (text[..i].trim_end(), Some(text[i + 1..].trim())),
            None => {}
        }
    }
    (text, None)
}

fn parse_literal(src: &str, line: usize, column: usize) -> Result<(String, usize), GroundingError> {
    let malformed = |col: usize, message: &str| GroundingError::MalformedLiteral {
        line,
        column: col,
        message: message.into(),
    };
    let mut chars = src.char_indices();
    let quote = match chars.next() {
        Some((_, q @ ('\'' | '"'))) => q,
        _ => return Err(malformed(column, "expected a quoted string")),
    };
    let mut out = String::new();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, e @ ('\\' | '\'' | '"'))) => out.push(e),
                Some((j, e)) => return Err(malformed(column + j, &format!("unknown escape \\{e}"))),
                None => break,
            },
            c if c == quote => return Ok((out, i + 1)),
            c => out.push(c),
        }
    }
    Err(malformed(column, "unterminated string"))
}

fn parse_call(line: &Line<'_>, code: &str) -> Result<Action, GroundingError> {
    let col = line.indent + 1;
    let unsupported = |column: usize, message: String| GroundingError::Unsupported {
        line: line.number,
        column,
        message,
    };
    let Some(rest) = code.strip_prefix("agent.") else {
        return Err(unsupported(col, format!("expected an `agent.<method>(...)` call, found {code:?}")));
    };
    let name_len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
    let name = &rest[..name_len];
    if !METHODS.contains(&name) {
        return Err(GroundingError::UnknownMethod {
            line: line.number,
            column: col + 6,
            name: name.into(),
        });
    }
    let after = &rest[name_len..];
    let Some(args) = after.strip_prefix('(') else {
        return Err(unsupported(col + 6 + name_len, "expected `(` after the method name".into()));
    };
    let lit_col = col + 6 + name_len + 1;
    let trimmed = args.trim_start();
    let lit_col = lit_col + (args.len() - trimmed.len());
    let (value, used) = parse_literal(trimmed, line.number, lit_col)?;
    let tail = trimmed[used..].trim();
    if tail != ")" {
        return Err(unsupported(lit_col + used, format!("expected `)` after the argument, found {tail:?}")));
    }
    let action = make_action(name, value);
    action.check().map_err(|(argument, message)| GroundingError::InvalidArgument {
        line: line.number,
        argument,
        message,
    })?;
    Ok(action)
}

fn parse_loop_header(line: &Line<'_>, code: &str) -> Result<Option<u32>, GroundingError> {
    if !code.starts_with("for ") && code != "for" {
        return Ok(None);
    }
    let unsupported = |message: String| GroundingError::Unsupported {
        line: line.number,
        column: line.indent + 1,
        message,
    };
    let Some(n) = code
        .strip_prefix("for _ in range(")
        .and_then(|r| r.strip_suffix("):"))
    else {
        return Err(unsupported(format!("only `for _ in range(N):` loops are supported, found {code:?}")));
    };
    match n.trim().parse::<u32>() {
        Ok(count) if count >= 1 => Ok(Some(count)),
        _ => Err(unsupported(format!("loop count must be a positive integer literal, found {n:?}"))),
    }
}

fn parse_lines(body: &str, first_line: usize) -> Result<ActionScript, GroundingError> {
    let lines: Vec<Line<'_>> = body
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let trimmed = l.trim_start();
            Line {
                number: first_line + i,
                indent: l.len() - trimmed.len(),
                text: trimmed.trim_end(),
            }
        })
        .collect();
    let mut statements = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        i += 1;
        if line.indent != 0 {
            return Err(GroundingError::Unsupported {
                line: line.number,
                column: 1,
                message: "unexpected indentation".into(),
            });
        }
        let (code, comment) = split_comment(line.text);
        if code.is_empty() {
            statements.push(Statement::Comment {
                text: comment.unwrap_or_default().into(),
            });
            continue;
        }
        match parse_loop_header(line, code)? {
            None => {
                statements.push(Statement::Call {
                    action: parse_call(line, code)?,
                });
                if let Some(c) = comment {
                    statements.push(Statement::Comment { text: c.into() });
                }
            }
            Some(count) => {
                let mut actions = Vec::new();
                let mut comments: Vec<String> = comment.map(String::from).into_iter().collect();
                let body_indent = lines.get(i).map_or(0, |l| l.indent);
                while i < lines.len() && lines[i].indent > 0 {
                    let inner = &lines[i];
                    i += 1;
                    if inner.indent != body_indent {
                        return Err(GroundingError::Unsupported {
                            line: inner.number,
                            column: 1,
                            message: "inconsistent indentation in loop body".into(),
                        });
                    }
                    let (code, c) = split_comment(inner.text);
                    if !code.is_empty() {
                        if parse_loop_header(inner, code)?.is_some() {
                            return Err(GroundingError::Unsupported {
                                line: inner.number,
                                column: inner.indent + 1,
                                message: "nested loops are not supported".into(),
                            });
                        }
                        actions.push(parse_call(inner, code)?);
                    }
                    comments.extend(c.map(String::from));
                }
                if actions.is_empty() {
                    return Err(GroundingError::Unsupported {
                        line: line.number,
                        column: 1,
                        message: "loop body has no calls".into(),
                    });
                }
                statements.push(Statement::Loop { count, body: actions });
                statements.extend(comments.into_iter().map(|text| Statement::Comment { text }));
            }
        }
    }
    Ok(ActionScript { statements })
}

/// Parses the first fenced block of `response` in the code dialect.
pub fn parse_code_actions(response: &str) -> Result<ActionScript, GroundingError> {
    let (body, first_line) = first_fence(response).ok_or(GroundingError::NoFence)?;
    parse_lines(body, first_line)
}

pub fn expand(script: &ActionScript) -> Expansion {
    let mut out = Expansion::default();
    for s in &script.statements {
        match s {
            Statement::Call { action } => out.actions.push(action.clone()),
            Statement::Loop { count, body } => {
                for _ in 0..*count {
                    out.actions.extend(body.iter().cloned());
                }
            }
            Statement::Comment { text } => out.comments.push(text.clone()),
        }
    }
    out
}

/// Parse, unroll and wrap into an [`ActionBlock`] whose raw text is the fence body.
pub fn parse_code_block(response: &str) -> Result<ActionBlock, GroundingError> {
    let (body, first_line) = first_fence(response).ok_or(GroundingError::NoFence)?;
    let e = expand(&parse_lines(body, first_line)?);
    ActionBlock::new(e.actions, body, e.comments).ok_or(GroundingError::EmptyBlock)
}

fn quote(s: &str) -> String {
    let q = if s.contains('"') && !s.contains('\'') { '\'' } else { '"' };
    let mut out = String::from(q);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == q => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(q);
    out
}

fn render_call(a: &Action) -> String {
    let (method, arg) = method_and_arg(a);
    format!("agent.{method}({})", quote(arg))
}

/// Renders a script as code-dialect text (without the fence).
///
/// # Panics
///
/// Panics if the script holds an id-dialect action.
pub fn render(script: &ActionScript) -> String {
    let mut lines = Vec::new();
    for s in &script.statements {
        match s {
            Statement::Call { action } => lines.push(render_call(action)),
            Statement::Loop { count, body } => {
                lines.push(format!("for _ in range({count}):"));
                lines.extend(body.iter().map(|a| format!("    {}", render_call(a))));
            }
            Statement::Comment { text } if text.is_empty() => lines.push("#".into()),
            Statement::Comment { text } => lines.push(format!("# {text}")),
        }
    }
    lines.join("\n")
}
