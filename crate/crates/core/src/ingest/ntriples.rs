//! Line parser for Wikidata truthy N-Triples.
//!
//! Subjects must be entity IRIs and predicates truthy-property IRIs; anything
//! else is well-formed but dropped. `wd:X rdf:type wdno:P` encodes "no value"
//! for `P`. Blank nodes and `.well-known/genid` IRIs encode "some value".

use super::Parsed;
use crate::model::{parse_entity_id, parse_property_id, Claim, Value};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const GENID_MARKER: &str = "/.well-known/genid/";

/// IRI prefixes that identify entities and properties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NTriplesPrefixes {
    pub entity: String,
    pub truthy_property: String,
    pub novalue: String,
}

impl Default for NTriplesPrefixes {
    fn default() -> Self {
        Self {
            entity: "http://www.wikidata.org/entity/".into(),
            truthy_property: "http://www.wikidata.org/prop/direct/".into(),
            novalue: "http://www.wikidata.org/prop/novalue/".into(),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Term {
    Iri(String),
    Blank,
    Literal(String),
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn eat(&mut self, c: char) -> bool {
        if let Some(rest) = self.rest.strip_prefix(c) {
            self.rest = rest;
            true
        } else {
            false
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        let end = self.rest.find('>').ok_or("unterminated IRI")?;
        let raw = &self.rest[..end];
        self.rest = &self.rest[end + 1..];
        if raw.contains([' ', '<', '"', '{', '}', '|', '^', '`']) {
            return Err(format!("invalid character in IRI <{raw}>"));
        }
        unescape(raw, false)
    }

    fn blank_label(&mut self) -> Result<(), String> {
        let end = self.rest.find(char::is_whitespace).unwrap_or(self.rest.len());
        let label = &self.rest[..end];
        // A trailing '.' belongs to the statement terminator.
        let label = label.strip_suffix('.').unwrap_or(label);
        if label.is_empty() {
            return Err("empty blank node label".into());
        }
        self.rest = &self.rest[label.len()..];
        Ok(())
    }

    fn literal(&mut self) -> Result<String, String> {
        let bytes = self.rest.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => i += 2,
                b'"' => break,
                _ => i += 1,
            }
        }
        if i >= bytes.len() {
            return Err("unterminated literal".into());
        }
        let lexical = unescape(&self.rest[..i], true)?;
        self.rest = &self.rest[i + 1..];
        if self.eat('@') {
            let end = self
                .rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(self.rest.len());
            if end == 0 {
                return Err("empty language tag".into());
            }
            self.rest = &self.rest[end..];
        } else if let Some(rest) = self.rest.strip_prefix("^^") {
            self.rest = rest;
            if !self.eat('<') {
                return Err("datatype must be an IRI".into());
            }
            self.iri()?;
        }
        Ok(lexical)
    }

    fn term(&mut self) -> Result<Term, String> {
        self.skip_ws();
        if self.eat('<') {
            self.iri().map(Term::Iri)
        } else if let Some(rest) = self.rest.strip_prefix("_:") {
            self.rest = rest;
            self.blank_label().map(|_| Term::Blank)
        } else if self.eat('"') {
            self.literal().map(Term::Literal)
        } else {
            Err(format!("unexpected input `{}`", self.rest.chars().take(16).collect::<String>()))
        }
    }
}

fn unescape(raw: &str, allow_echar: bool) -> Result<String, String> {
    if !raw.contains('\\') {
        return Ok(raw.to_owned());
    }
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let esc = chars.next().ok_or("dangling escape")?;
        let simple = match esc {
            't' => Some('\t'),
            'b' => Some('\u{8}'),
            'n' => Some('\n'),
            'r' => Some('\r'),
            'f' => Some('\u{c}'),
            '"' => Some('"'),
            '\'' => Some('\''),
            '\\' => Some('\\'),
            _ => None,
        };
        if let Some(s) = simple {
            if !allow_echar {
                return Err(format!("escape \\{esc} not allowed in IRI"));
            }
            out.push(s);
            continue;
        }
        let width = match esc {
            'u' => 4,
            'U' => 8,
            other => return Err(format!("unknown escape \\{other}")),
        };
        let hex: String = chars.by_ref().take(width).collect();
        let code = (hex.len() == width)
            .then(|| u32::from_str_radix(&hex, 16).ok())
            .flatten()
            .and_then(char::from_u32)
            .ok_or_else(|| format!("bad unicode escape \\{esc}{hex}"))?;
        out.push(code);
    }
    Ok(out)
}

fn split_triple(line: &str) -> Result<Option<(Term, Term, Term)>, String> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor { rest: trimmed };
    let s = cur.term()?;
    let p = cur.term()?;
    let o = cur.term()?;
    cur.skip_ws();
    if !cur.eat('.') {
        return Err("missing terminating `.`".into());
    }
    cur.skip_ws();
    if !(cur.rest.is_empty() || cur.rest.starts_with('#')) {
        return Err("trailing content after `.`".into());
    }
    if matches!(s, Term::Literal(_)) {
        return Err("literal in subject position".into());
    }
    if !matches!(p, Term::Iri(_)) {
        return Err("predicate must be an IRI".into());
    }
    Ok(Some((s, p, o)))
}

pub(super) fn parse_line(line: &str, prefixes: &NTriplesPrefixes) -> Result<Parsed, String> {
    let Some((s, p, o)) = split_triple(line)? else {
        return Ok(Parsed::Blank);
    };
    let subject = match &s {
        Term::Iri(iri) => iri
            .strip_prefix(&prefixes.entity)
            .and_then(|local| parse_entity_id(local).ok()),
        _ => None,
    };
    let Some(subject) = subject else {
        return Ok(Parsed::Drop);
    };
    let Term::Iri(predicate) = p else { unreachable!() };

    if predicate == RDF_TYPE {
        let novalue_of = match &o {
            Term::Iri(iri) => iri
                .strip_prefix(&prefixes.novalue)
                .and_then(|local| parse_property_id(local).ok()),
            _ => None,
        };
        return Ok(match novalue_of {
            Some(property) => Parsed::Keep(Claim::new(subject, property, Value::NoValue)),
            None => Parsed::Drop,
        });
    }

    let Some(property) = predicate
        .strip_prefix(&prefixes.truthy_property)
        .and_then(|local| parse_property_id(local).ok())
    else {
        return Ok(Parsed::Drop);
    };

    let value = match o {
        Term::Iri(iri) => match iri
            .strip_prefix(&prefixes.entity)
            .and_then(|local| parse_entity_id(local).ok())
        {
            Some(id) => Value::Entity(id),
            None if iri.contains(GENID_MARKER) => Value::SomeValue,
            None => Value::Text(iri),
        },
        Term::Blank => Value::SomeValue,
        Term::Literal(text) => Value::Text(text),
    };
    Ok(Parsed::Keep(Claim::new(subject, property, value)))
}
