//! Statement-JSONL:
//! `{"s":"Q5","p":"P279","o":"Q8205328","rank":"normal","q":[["P1013","Q23766486"]]}`.
//!
//! `"o"` is an entity id string, `null` (no value), `"~somevalue"`, or
//! `{"text":"…"}`. Qualifier values use the same encoding. `"rank"` defaults
//! to normal and `"q"` to empty; `"refs"` is an optional array of opaque
//! reference objects. Other fields are ignored.

use std::borrow::Cow;
use std::io::{self, Write};

use serde::{Deserialize, Deserializer, Serialize};

use super::Parsed;
use crate::model::{parse_entity_id, parse_property_id, Claim, KnowledgeBase, Rank, Statement, Value};

const SOMEVALUE: &str = "~somevalue";

#[derive(Deserialize)]
struct Record<'a> {
    #[serde(borrow)]
    s: Cow<'a, str>,
    #[serde(borrow)]
    p: Cow<'a, str>,
    #[serde(default, deserialize_with = "present")]
    o: Option<Option<ValueRepr>>,
    #[serde(default, borrow)]
    rank: Option<Cow<'a, str>>,
    #[serde(default)]
    q: Vec<(String, Option<ValueRepr>)>,
    #[serde(default)]
    refs: Vec<serde_json::Value>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum ValueRepr {
    Id(String),
    Text { text: String },
}

// Distinguishes an absent field (outer `None`) from an explicit `null`.
fn present<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    T::deserialize(d).map(Some)
}

fn decode_value(repr: Option<ValueRepr>) -> Result<Value, String> {
    match repr {
        None => Ok(Value::NoValue),
        Some(ValueRepr::Text { text }) => Ok(Value::Text(text)),
        Some(ValueRepr::Id(id)) if id == SOMEVALUE => Ok(Value::SomeValue),
        Some(ValueRepr::Id(id)) => parse_entity_id(&id)
            .map(Value::Entity)
            .map_err(|e| format!("{e} (text values are written as {{\"text\":…}})")),
    }
}

fn encode_value(value: &Value) -> Option<ValueRepr> {
    match value {
        Value::Entity(id) => Some(ValueRepr::Id(id.to_string())),
        Value::Text(text) => Some(ValueRepr::Text { text: text.clone() }),
        Value::NoValue => None,
        Value::SomeValue => Some(ValueRepr::Id(SOMEVALUE.to_owned())),
    }
}

/// Decodes one record. Errors are human-readable messages.
pub fn parse_record(line: &str) -> Result<Claim, String> {
    if !line.trim_start().starts_with('{') {
        return Err("record is not a JSON object".into());
    }
    let record: Record<'_> = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let subject = parse_entity_id(&record.s).map_err(|e| format!("subject: {e}"))?;
    let property = parse_property_id(&record.p).map_err(|e| format!("property: {e}"))?;
    let value = match record.o {
        Some(repr) => decode_value(repr).map_err(|e| format!("object: {e}"))?,
        None => return Err("missing field `o`".into()),
    };
    let rank = match record.rank {
        Some(rank) => rank.parse::<Rank>()?,
        None => Rank::Normal,
    };
    let qualifiers = record
        .q
        .into_iter()
        .map(|(p, v)| {
            let p = parse_property_id(&p).map_err(|e| format!("qualifier: {e}"))?;
            let v = decode_value(v).map_err(|e| format!("qualifier {p}: {e}"))?;
            Ok((p, v))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(Claim {
        subject,
        property,
        value,
        rank,
        qualifiers,
        references: record.refs.iter().map(|r| r.to_string()).collect(),
    })
}

pub(super) fn parse_line(line: &str) -> Result<Parsed, String> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(Parsed::Blank);
    }
    parse_record(line).map(Parsed::Keep)
}

#[derive(Serialize)]
struct RecordOut<'a> {
    s: String,
    p: String,
    o: Option<ValueRepr>,
    rank: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    q: Vec<(String, Option<ValueRepr>)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    refs: Vec<&'a serde_json::value::RawValue>,
}

/// Writes one statement as a newline-terminated record.
pub fn write_record(statement: &Statement, mut out: impl Write) -> io::Result<()> {
    let refs = statement
        .references
        .iter()
        .map(|r| serde_json::from_str::<&serde_json::value::RawValue>(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io::Error::other)?;
    let record = RecordOut {
        s: statement.subject.to_string(),
        p: statement.property.to_string(),
        o: encode_value(&statement.value),
        rank: statement.rank.as_str(),
        q: statement
            .qualifiers
            .iter()
            .map(|(p, v)| (p.to_string(), encode_value(v)))
            .collect(),
        refs,
    };
    serde_json::to_writer(&mut out, &record)?;
    out.write_all(b"\n")
}

/// Debug dump of every statement in key order; re-ingesting it yields the same statements.
pub fn write_jsonl(kb: &KnowledgeBase, mut out: impl Write) -> io::Result<()> {
    for statement in kb.statements() {
        write_record(statement, &mut out)?;
    }
    Ok(())
}
