//! A Turtle reader covering what the exporter writes plus the common
//! hand-written forms: `@prefix`/`PREFIX`, `@base`-free absolute IRIs,
//! prefixed names, `a`, blank node labels and `[ ]` property lists,
//! predicate (`;`) and object (`,`) lists, short and long strings with
//! escapes, language tags, datatypes, integers and booleans.
//! Collections are not supported.

use std::collections::HashMap;

use thiserror::Error;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal {
        value: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
}

impl Term {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    prefixes: HashMap<String, String>,
    triples: Vec<Triple>,
    anon: usize,
}

pub fn parse(src: &str) -> Result<Vec<Triple>, SyntaxError> {
    let mut p = Parser {
        src,
        pos: 0,
        prefixes: HashMap::new(),
        triples: Vec::new(),
        anon: 0,
    };
    p.document()?;
    Ok(p.triples)
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{B7}')
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            line: self.src[..self.pos].matches('\n').count() + 1,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            let Some(c) = self.peek() else { return };
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                return;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    /// Case-insensitive keyword followed by whitespace.
    fn eat_keyword(&mut self, kw: &str) -> bool {
        let rest = self.rest();
        if rest.get(..kw.len()).is_some_and(|head| head.eq_ignore_ascii_case(kw))
            && rest[kw.len()..].starts_with(char::is_whitespace)
        {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn document(&mut self) -> Result<(), SyntaxError> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            if self.eat("@prefix") {
                self.prefix_decl()?;
                self.expect('.')?;
            } else if self.eat_keyword("PREFIX") {
                self.prefix_decl()?;
            } else if self.rest().starts_with("@base") || self.eat_keyword("BASE") {
                return self.err("base IRIs are not supported; use absolute IRIs");
            } else {
                self.triples_stmt()?;
                self.expect('.')?;
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.bump();
        }
        let name = self.src[start..self.pos].to_string();
        if !self.eat(":") {
            return self.err("expected ':' in prefix declaration");
        }
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn iri_ref(&mut self) -> Result<String, SyntaxError> {
        if !self.eat("<") {
            return self.err("expected '<'");
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(out),
                Some('\\') => out.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return self.err(format!("illegal character {c:?} in IRI"))
                }
                Some(c) => out.push(c),
                None => return self.err("unterminated IRI"),
            }
        }
    }

    fn unicode_escape(&mut self) -> Result<char, SyntaxError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.err("bad escape"),
        };
        let end = self.pos + width;
        let hex = self.src.get(self.pos..end).unwrap_or("");
        let cp = u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
        match cp {
            Some(c) if hex.len() == width => {
                self.pos = end;
                Ok(c)
            }
            _ => self.err("bad unicode escape"),
        }
    }

    fn prefixed_name(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| is_name_char(c) && c != '.') {
            self.bump();
        }
        let prefix = self.src[start..self.pos].to_string();
        if !self.eat(":") {
            let found: String = self.src[start..].chars().take(12).collect();
            return self.err(format!("expected a term, found {found:?}"));
        }
        let mut local = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return self.err("bad escape in local name"),
                    }
                }
                Some(c) if is_name_char(c) || c == ':' => {
                    // a trailing '.' ends the statement
                    if c == '.' && !self.rest()[1..].starts_with(|n: char| is_name_char(n) || n == ':') {
                        break;
                    }
                    self.bump();
                    local.push(c);
                }
                _ => break,
            }
        }
        match self.prefixes.get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => self.err(format!("undeclared prefix {prefix:?}")),
        }
    }

    fn iri(&mut self) -> Result<String, SyntaxError> {
        self.skip_ws();
        if self.peek() == Some('<') {
            self.iri_ref()
        } else {
            self.prefixed_name()
        }
    }

    fn fresh_blank(&mut self) -> Term {
        self.anon += 1;
        Term::Blank(format!("anon{}", self.anon))
    }

    fn triples_stmt(&mut self) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, SyntaxError> {
        self.skip_ws();
        if self.eat("_:") {
            Ok(Term::Blank(self.blank_label()?))
        } else if self.peek() == Some('(') {
            self.err("collections are not supported")
        } else {
            Ok(Term::Iri(self.iri()?))
        }
    }

    fn blank_label(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| is_name_char(c) && c != '.') {
            self.bump();
        }
        if self.pos == start {
            return self.err("empty blank node label");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn blank_property_list(&mut self) -> Result<Term, SyntaxError> {
        self.expect('[')?;
        let node = self.fresh_blank();
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), SyntaxError> {
        loop {
            self.skip_ws();
            let predicate = if self.rest().starts_with('a')
                && self.rest()[1..].starts_with(|c: char| c.is_whitespace() || c == '<' || c == '[' || c == '"')
            {
                self.pos += 1;
                format!("{RDF_NS}type")
            } else {
                self.iri()?
            };
            loop {
                let object = self.object()?;
                self.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                self.skip_ws();
                if !self.eat(",") {
                    break;
                }
            }
            self.skip_ws();
            if !self.eat(";") {
                return Ok(());
            }
            // repeated or trailing ';'
            loop {
                self.skip_ws();
                if !self.eat(";") {
                    break;
                }
            }
            self.skip_ws();
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some('"') | Some('\'') => self.literal(),
            Some('[') => self.blank_property_list(),
            Some('(') => self.err("collections are not supported"),
            Some('_') if self.rest().starts_with("_:") => {
                self.pos += 2;
                Ok(Term::Blank(self.blank_label()?))
            }
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.integer(),
            _ if self.eat_word("true") => Ok(Term::Literal {
                value: "true".into(),
                datatype: Some(XSD_BOOLEAN.into()),
                lang: None,
            }),
            _ if self.eat_word("false") => Ok(Term::Literal {
                value: "false".into(),
                datatype: Some(XSD_BOOLEAN.into()),
                lang: None,
            }),
            Some(_) => Ok(Term::Iri(self.iri()?)),
            None => self.err("unexpected end of input"),
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let rest = self.rest();
        if rest.starts_with(w) && !rest[w.len()..].starts_with(|c: char| is_name_char(c) || c == ':') {
            self.pos += w.len();
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.bump();
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && self.rest()[1..].starts_with(|c: char| c.is_ascii_digit()) {
            return self.err("decimal literals are not supported");
        }
        let text = &self.src[start..self.pos];
        if text.parse::<i64>().is_err() {
            return self.err(format!("bad integer {text:?}"));
        }
        Ok(Term::Literal {
            value: text.to_string(),
            datatype: Some(XSD_INTEGER.into()),
            lang: None,
        })
    }

    fn literal(&mut self) -> Result<Term, SyntaxError> {
        let quote = self.bump().unwrap_or('"');
        let long: String = std::iter::repeat_n(quote, 3).collect();
        let is_long = self.rest().starts_with(&long[1..]);
        if is_long {
            self.pos += 2;
        }
        let mut value = String::new();
        loop {
            if is_long && self.rest().starts_with(long.as_str()) {
                self.pos += 3;
                break;
            }
            match self.bump() {
                None => return self.err("unterminated string"),
                Some(c) if c == quote && !is_long => break,
                Some('\n') | Some('\r') if !is_long => {
                    self.pos -= 1;
                    return self.err("newline in short string");
                }
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') | Some('U') => {
                            value.push(self.unicode_escape()?);
                            continue;
                        }
                        _ => return self.err("bad string escape"),
                    };
                    self.bump();
                    value.push(c);
                }
                Some(c) => value.push(c),
            }
        }
        let mut datatype = None;
        let mut lang = None;
        if self.eat("^^") {
            datatype = Some(self.iri()?);
        } else if self.eat("@") {
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                self.bump();
            }
            lang = Some(self.src[start..self.pos].to_string());
        }
        Ok(Term::Literal { value, datatype, lang })
    }
}
