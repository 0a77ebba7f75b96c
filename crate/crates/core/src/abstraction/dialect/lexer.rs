use super::DialectError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    FStr(Vec<FPart>),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FPart {
    Lit(String),
    Expr {
        src: String,
        line: usize,
        col: usize,
        spec: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const OPS: [&str; 36] = [
    "**=", "//=", "...", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "//", "**", "->", "(", ")", "[", "]",
    "{", "}", ",", ":", ".", "+", "-", "*", "/", "%", "<", ">", "=", ";", "@", "&", "|",
];

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    depth: usize,
    indents: Vec<usize>,
    out: Vec<Token>,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, DialectError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        depth: 0,
        indents: vec![0],
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl Lexer {
    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> DialectError {
        DialectError::Parse {
            line,
            column: col,
            message: msg.into(),
        }
    }

    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, line: usize, col: usize) {
        self.out.push(Token { tok, line, col });
    }

    fn run(&mut self) -> Result<(), DialectError> {
        let mut at_line_start = true;
        loop {
            if at_line_start && self.depth == 0 {
                at_line_start = false;
                if !self.indentation()? {
                    break;
                }
            }
            let Some(c) = self.peek(0) else { break };
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' | '\r' | '\x0c' => {
                    self.bump();
                }
                '#' => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '\\' if self.peek(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    if self.depth == 0 {
                        if !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
                            self.push(Tok::Newline, line, col);
                        }
                        at_line_start = true;
                    }
                }
                '0'..='9' => self.number()?,
                '.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number()?,
                '\'' | '"' => {
                    let s = self.string(false, false)?;
                    self.push(s, line, col);
                }
                c if c.is_alphabetic() || c == '_' => {
                    if let Some((raw, fmt, len)) = self.string_prefix() {
                        for _ in 0..len {
                            self.bump();
                        }
                        let s = self.string(raw, fmt)?;
                        self.push(s, line, col);
                    } else {
                        let mut name = String::new();
                        while let Some(c) = self.peek(0).filter(|c| c.is_alphanumeric() || *c == '_') {
                            name.push(c);
                            self.bump();
                        }
                        self.push(Tok::Name(name), line, col);
                    }
                }
                _ => {
                    let rest: String = self.chars[self.pos..].iter().take(3).collect();
                    let Some(op) = OPS.iter().find(|op| rest.starts_with(**op)) else {
                        return Err(self.err(line, col, format!("unexpected character {c:?}")));
                    };
                    for _ in 0..op.len() {
                        self.bump();
                    }
                    match *op {
                        "(" | "[" | "{" => self.depth += 1,
                        ")" | "]" | "}" => {
                            if self.depth == 0 {
                                return Err(self.err(line, col, format!("unmatched {op:?}")));
                            }
                            self.depth -= 1;
                        }
                        _ => {}
                    }
                    self.push(Tok::Op(op), line, col);
                }
            }
        }
        if self.depth > 0 {
            return Err(self.err(self.line, self.col, "unexpected end of input inside brackets"));
        }
        if !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
            self.push(Tok::Newline, self.line, self.col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, self.line, self.col);
        }
        self.push(Tok::Eof, self.line, self.col);
        Ok(())
    }

    /// Measures the indentation of the next non-blank line and emits
    /// INDENT/DEDENT tokens. Returns false at end of input.
    fn indentation(&mut self) -> Result<bool, DialectError> {
        loop {
            let mut width = 0;
            while let Some(c) = self.peek(0) {
                match c {
                    ' ' => width += 1,
                    '\t' => width = (width / 8 + 1) * 8,
                    '\x0c' | '\r' => {}
                    _ => break,
                }
                self.bump();
            }
            match self.peek(0) {
                None => return Ok(false),
                Some('\n') => {
                    self.bump();
                    continue;
                }
                Some('#') => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                _ => {}
            }
            let (line, col) = (self.line, self.col);
            let current = *self.indents.last().expect("indent stack is never empty");
            if width > current {
                self.indents.push(width);
                self.push(Tok::Indent, line, col);
            } else {
                while width < *self.indents.last().expect("indent stack is never empty") {
                    self.indents.pop();
                    self.push(Tok::Dedent, line, col);
                }
                if width != *self.indents.last().expect("indent stack is never empty") {
                    return Err(self.err(line, col, "unindent does not match any outer indentation level"));
                }
            }
            return Ok(true);
        }
    }

    fn string_prefix(&self) -> Option<(bool, bool, usize)> {
        let mut raw = false;
        let mut fmt = false;
        for len in 0..=2 {
            match self.peek(len) {
                Some('\'') | Some('"') if len > 0 => return Some((raw, fmt, len)),
                Some('r') | Some('R') if !raw => raw = true,
                Some('f') | Some('F') if !fmt => fmt = true,
                _ => return None,
            }
        }
        None
    }

    fn number(&mut self) -> Result<(), DialectError> {
        let (line, col) = (self.line, self.col);
        let mut text = String::new();
        let mut is_float = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() || c == '_' {
                text.push(c);
            } else if c == '.' && !is_float {
                is_float = true;
                text.push(c);
            } else if (c == 'e' || c == 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('+') | Some('-')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                is_float = true;
                text.push(c);
                self.bump();
                if let Some(sign) = self.peek(0).filter(|s| *s == '+' || *s == '-') {
                    text.push(sign);
                    self.bump();
                }
                continue;
            } else {
                break;
            }
            self.bump();
        }
        let clean = text.replace('_', "");
        let tok = if is_float {
            Tok::Float(clean.parse().map_err(|_| self.err(line, col, format!("invalid number {text:?}")))?)
        } else {
            Tok::Int(clean.parse().map_err(|_| self.err(line, col, format!("integer literal {text:?} out of range")))?)
        };
        if self.peek(0).is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Err(self.err(self.line, self.col, "invalid character in number literal"));
        }
        self.push(tok, line, col);
        Ok(())
    }

    /// Reads a string body. Escapes are decoded unless `raw`; for
    /// f-strings the body is split into literal and expression parts.
    fn string(&mut self, raw: bool, fmt: bool) -> Result<Tok, DialectError> {
        let (line, col) = (self.line, self.col);
        let quote = self.bump().expect("caller checked for a quote");
        let triple = self.peek(0) == Some(quote) && self.peek(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        // (char, line, col, escaped-by-backslash)
        let mut body: Vec<(char, usize, usize)> = Vec::new();
        loop {
            let (cl, cc) = (self.line, self.col);
            let Some(c) = self.bump() else {
                return Err(self.err(line, col, "unterminated string literal"));
            };
            if c == quote {
                if !triple {
                    break;
                }
                if self.peek(0) == Some(quote) && self.peek(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    break;
                }
            }
            if c == '\n' && !triple {
                return Err(self.err(line, col, "unterminated string literal"));
            }
            body.push((c, cl, cc));
            if c == '\\' {
                if let Some(next) = self.peek(0) {
                    let (nl, nc) = (self.line, self.col);
                    self.bump();
                    body.push((next, nl, nc));
                }
            }
        }
        if fmt {
            self.fstring_parts(&body, raw).map(Tok::FStr)
        } else {
            let text: String = body.iter().map(|b| b.0).collect();
            if raw {
                Ok(Tok::Str(text))
            } else {
                unescape(&text).map(Tok::Str).map_err(|m| self.err(line, col, m))
            }
        }
    }

    fn fstring_parts(&self, body: &[(char, usize, usize)], raw: bool) -> Result<Vec<FPart>, DialectError> {
        let mut parts = Vec::new();
        let mut lit = String::new();
        let mut i = 0;
        let flush = |lit: &mut String, parts: &mut Vec<FPart>| -> Result<(), String> {
            if !lit.is_empty() {
                let text = if raw { std::mem::take(lit) } else { unescape(&std::mem::take(lit))? };
                parts.push(FPart::Lit(text));
            }
            Ok(())
        };
        while i < body.len() {
            let (c, l, cc) = body[i];
            match c {
                '{' if body.get(i + 1).map(|b| b.0) == Some('{') => {
                    lit.push('{');
                    i += 2;
                }
                '}' if body.get(i + 1).map(|b| b.0) == Some('}') => {
                    lit.push('}');
                    i += 2;
                }
                '}' => return Err(self.err(l, cc, "single '}' is not allowed in f-string")),
                '{' => {
                    flush(&mut lit, &mut parts).map_err(|m| self.err(l, cc, m))?;
                    let start = i + 1;
                    let mut depth = 0usize;
                    let mut quote: Option<char> = None;
                    let mut j = start;
                    let mut colon = None;
                    loop {
                        let Some(&(d, _, _)) = body.get(j) else {
                            return Err(self.err(l, cc, "expecting '}' in f-string"));
                        };
                        match (quote, d) {
                            (Some(q), d) if d == q => quote = None,
                            (Some(_), _) => {}
                            (None, '\'' | '"') => quote = Some(d),
                            (None, '(' | '[' | '{') => depth += 1,
                            (None, ')' | ']') => depth = depth.saturating_sub(1),
                            (None, '}') if depth == 0 => break,
                            (None, '}') => depth -= 1,
                            (None, ':') if depth == 0 && colon.is_none() => colon = Some(j),
                            (None, '!') if depth == 0 && body.get(j + 1).map(|b| b.0) != Some('=') => {
                                return Err(self.err(l, cc, "conversions (!r, !s) are not supported in f-strings"))
                            }
                            _ => {}
                        }
                        j += 1;
                    }
                    let expr_end = colon.unwrap_or(j);
                    let src: String = body[start..expr_end].iter().map(|b| b.0).collect();
                    if src.trim().is_empty() {
                        return Err(self.err(l, cc, "empty expression in f-string"));
                    }
                    let spec = colon.map(|k| body[k + 1..j].iter().map(|b| b.0).collect());
                    let (el, ec) = body.get(start).map_or((l, cc), |b| (b.1, b.2));
                    parts.push(FPart::Expr {
                        src,
                        line: el,
                        col: ec,
                        spec,
                    });
                    i = j + 1;
                }
                _ => {
                    lit.push(c);
                    i += 1;
                }
            }
        }
        flush(&mut lit, &mut parts).map_err(|m| self.err(self.line, self.col, m))?;
        Ok(parts)
    }
}

/// Decodes Python escape sequences. Unknown escapes keep their backslash.
pub fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let Some(e) = chars.next() else {
            out.push('\\');
            break;
        };
        match e {
            '\n' => {}
            '\\' => out.push('\\'),
            '\'' => out.push('\''),
            '"' => out.push('"'),
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            '0' => out.push('\0'),
            'a' => out.push('\x07'),
            'b' => out.push('\x08'),
            'f' => out.push('\x0c'),
            'v' => out.push('\x0b'),
            'x' | 'u' | 'U' => {
                let n = match e {
                    'x' => 2,
                    'u' => 4,
                    _ => 8,
                };
                let hex: String = (0..n).filter_map(|_| chars.next()).collect();
                let code = u32::from_str_radix(&hex, 16)
                    .ok()
                    .filter(|_| hex.len() == n)
                    .and_then(char::from_u32)
                    .ok_or_else(|| format!("invalid \\{e} escape"))?;
                out.push(code);
            }
            other => {
                out.push('\\');
                out.push(other);
            }
        }
    }
    Ok(out)
}
