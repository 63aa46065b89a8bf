//! Identifiers, values, ranked statements and the frozen statement store.
//!
//! Identifiers are kept as integers; the `Q…`/`P…` spelling only exists at
//! the parse/render boundary.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("malformed id `{0}`: expected `{1}` followed by digits without a leading zero")]
    Malformed(String, char),
    #[error("id `{0}` does not fit in 64 bits")]
    Overflow(String),
}

fn parse_prefixed(text: &str, prefix: char) -> Result<u64, IdError> {
    let malformed = || IdError::Malformed(text.to_owned(), prefix);
    let digits = text.strip_prefix(prefix).ok_or_else(malformed)?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    digits.parse::<u64>().map_err(|_| IdError::Overflow(text.to_owned()))
}

/// An item identifier, rendered as `Q` followed by its number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(u64);

impl EntityId {
    /// Returns `None` for zero.
    pub const fn new(id: u64) -> Option<Self> {
        if id == 0 {
            None
        } else {
            Some(Self(id))
        }
    }

    /// Panics on zero; meant for constants.
    pub const fn from_u64(id: u64) -> Self {
        match Self::new(id) {
            Some(id) => id,
            None => panic!("entity ids start at 1"),
        }
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

/// Parses `Q` followed by digits with no leading zero.
pub fn parse_entity_id(text: &str) -> Result<EntityId, IdError> {
    parse_prefixed(text, 'Q').map(EntityId)
}

impl FromStr for EntityId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_entity_id(s)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl Serialize for EntityId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = std::borrow::Cow::<str>::deserialize(d)?;
        parse_entity_id(&text).map_err(serde::de::Error::custom)
    }
}

/// A property identifier, rendered as `P` followed by its number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertyId(u32);

impl PropertyId {
    pub const fn new(id: u32) -> Option<Self> {
        if id == 0 {
            None
        } else {
            Some(Self(id))
        }
    }

    pub const fn from_u32(id: u32) -> Self {
        match Self::new(id) {
            Some(id) => id,
            None => panic!("property ids start at 1"),
        }
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

pub fn parse_property_id(text: &str) -> Result<PropertyId, IdError> {
    let raw = parse_prefixed(text, 'P')?;
    u32::try_from(raw)
        .map(PropertyId)
        .map_err(|_| IdError::Overflow(text.to_owned()))
}

impl FromStr for PropertyId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_property_id(s)
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl Serialize for PropertyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PropertyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = std::borrow::Cow::<str>::deserialize(d)?;
        parse_property_id(&text).map_err(serde::de::Error::custom)
    }
}

/// Well-known identifiers.
pub mod vocab {
    use super::{EntityId, PropertyId};

    pub const INSTANCE_OF: PropertyId = PropertyId::from_u32(31);
    pub const SUBCLASS_OF: PropertyId = PropertyId::from_u32(279);
    pub const UNION_OF: PropertyId = PropertyId::from_u32(2737);
    pub const DISJOINT_UNION_OF: PropertyId = PropertyId::from_u32(2738);

    /// `entity`, the root of the class hierarchy.
    pub const ENTITY: EntityId = EntityId::from_u64(35120);
    /// `list of values as qualifiers`, the main value of a qualified union statement.
    pub const LIST_OF_VALUES_AS_QUALIFIERS: EntityId = EntityId::from_u64(23766486);
}

/// A statement's main value or a qualifier value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Entity(EntityId),
    /// Strings, literals, and every datatype that is not an item reference.
    Text(String),
    NoValue,
    SomeValue,
}

impl Value {
    pub fn as_entity(&self) -> Option<EntityId> {
        match self {
            Value::Entity(id) => Some(*id),
            _ => None,
        }
    }
}

/// Ordered so that `Preferred > Normal > Deprecated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Deprecated,
    #[default]
    Normal,
    Preferred,
}

impl Rank {
    pub fn as_str(self) -> &'static str {
        match self {
            Rank::Deprecated => "deprecated",
            Rank::Normal => "normal",
            Rank::Preferred => "preferred",
        }
    }
}

impl FromStr for Rank {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preferred" => Ok(Rank::Preferred),
            "normal" => Ok(Rank::Normal),
            "deprecated" => Ok(Rank::Deprecated),
            other => Err(format!("unknown rank `{other}`")),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unique within one knowledge base; assigned in ingestion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StatementKey(u64);

impl StatementKey {
    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub subject: EntityId,
    pub property: PropertyId,
    pub value: Value,
    pub rank: Rank,
    /// In input order.
    pub qualifiers: Vec<(PropertyId, Value)>,
    /// Raw reference blobs, carried through untouched.
    pub references: Vec<String>,
    pub key: StatementKey,
}

/// A statement before it has been given a key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Claim {
    pub subject: EntityId,
    pub property: PropertyId,
    pub value: Value,
    pub rank: Rank,
    pub qualifiers: Vec<(PropertyId, Value)>,
    pub references: Vec<String>,
}

impl Claim {
    pub fn new(subject: EntityId, property: PropertyId, value: Value) -> Self {
        Self {
            subject,
            property,
            value,
            rank: Rank::Normal,
            qualifiers: Vec::new(),
            references: Vec::new(),
        }
    }

    pub fn with_rank(mut self, rank: Rank) -> Self {
        self.rank = rank;
        self
    }

    pub fn with_qualifier(mut self, property: PropertyId, value: Value) -> Self {
        self.qualifiers.push((property, value));
        self
    }
}

impl Statement {
    /// Drops the key, e.g. for multiset comparisons across ingestions.
    pub fn to_claim(&self) -> Claim {
        Claim {
            subject: self.subject,
            property: self.property,
            value: self.value.clone(),
            rank: self.rank,
            qualifiers: self.qualifiers.clone(),
            references: self.references.clone(),
        }
    }
}

/// Single-writer accumulator; `freeze` produces the immutable store.
#[derive(Debug, Default)]
pub struct KnowledgeBaseBuilder {
    statements: Vec<Statement>,
}

impl KnowledgeBaseBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, claim: Claim) -> StatementKey {
        let key = StatementKey(self.statements.len() as u64);
        self.statements.push(Statement {
            subject: claim.subject,
            property: claim.property,
            value: claim.value,
            rank: claim.rank,
            qualifiers: claim.qualifiers,
            references: claim.references,
            key,
        });
        key
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn freeze(self) -> KnowledgeBase {
        KnowledgeBase::index(self.statements)
    }
}

/// Immutable statement store with a subject index, a (subject, property)
/// index and a (property, entity value) index.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    statements: Vec<Statement>,
    // Statement positions sorted by (subject, property, key).
    by_subject: Vec<u32>,
    // (subject, first position in `by_subject`), sorted by subject.
    subject_starts: Vec<(EntityId, u32)>,
    // Entity-valued statement positions sorted by (property, value, key).
    by_value: Vec<u32>,
    items: Vec<EntityId>,
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        KnowledgeBaseBuilder::new().freeze()
    }

    pub fn from_claims(claims: impl IntoIterator<Item = Claim>) -> Self {
        let mut builder = KnowledgeBaseBuilder::new();
        for claim in claims {
            builder.push(claim);
        }
        builder.freeze()
    }

    fn index(statements: Vec<Statement>) -> Self {
        assert!(
            statements.len() <= u32::MAX as usize,
            "knowledge base holds at most 2^32 statements"
        );
        let mut by_subject: Vec<u32> = (0..statements.len() as u32).collect();
        by_subject.sort_unstable_by_key(|&i| {
            let s = &statements[i as usize];
            (s.subject, s.property, i)
        });

        let mut subject_starts = Vec::new();
        for (pos, &i) in by_subject.iter().enumerate() {
            let subject = statements[i as usize].subject;
            if subject_starts.last().map(|&(s, _)| s) != Some(subject) {
                subject_starts.push((subject, pos as u32));
            }
        }

        let mut by_value: Vec<u32> = statements
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.value, Value::Entity(_)))
            .map(|(i, _)| i as u32)
            .collect();
        by_value.sort_unstable_by_key(|&i| {
            let s = &statements[i as usize];
            (s.property, s.value.as_entity(), i)
        });

        let mut items: Vec<EntityId> = subject_starts.iter().map(|&(s, _)| s).collect();
        items.extend(statements.iter().filter_map(|s| s.value.as_entity()));
        items.sort_unstable();
        items.dedup();

        Self {
            statements,
            by_subject,
            subject_starts,
            by_value,
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// All statements in key order.
    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn get(&self, key: StatementKey) -> Option<&Statement> {
        self.statements.get(key.0 as usize)
    }

    /// Every id used as a subject or as an entity main value, ascending.
    pub fn items(&self) -> &[EntityId] {
        &self.items
    }

    /// Subjects carrying at least one statement, ascending.
    pub fn subjects(&self) -> impl ExactSizeIterator<Item = EntityId> + '_ {
        self.subject_starts.iter().map(|&(s, _)| s)
    }

    fn subject_slice(&self, subject: EntityId) -> &[u32] {
        let Ok(at) = self.subject_starts.binary_search_by_key(&subject, |&(s, _)| s) else {
            return &[];
        };
        let start = self.subject_starts[at].1 as usize;
        let end = self
            .subject_starts
            .get(at + 1)
            .map_or(self.by_subject.len(), |&(_, e)| e as usize);
        &self.by_subject[start..end]
    }

    /// Statements about `subject`, grouped by property, key order within a property.
    pub fn statements_about(&self, subject: EntityId) -> impl Iterator<Item = &Statement> + '_ {
        self.subject_slice(subject)
            .iter()
            .map(move |&i| &self.statements[i as usize])
    }

    /// All ranks, key order.
    pub fn statements_for(
        &self,
        subject: EntityId,
        property: PropertyId,
    ) -> impl Iterator<Item = &Statement> + '_ {
        let slice = self.subject_slice(subject);
        let lo = slice.partition_point(|&i| self.statements[i as usize].property < property);
        let hi = slice.partition_point(|&i| self.statements[i as usize].property <= property);
        slice[lo..hi].iter().map(move |&i| &self.statements[i as usize])
    }

    /// Preferred statements if any exist, otherwise the normal ones; never deprecated.
    pub fn truthy_statements(&self, subject: EntityId, property: PropertyId) -> Vec<&Statement> {
        truthy(self.statements_for(subject, property))
    }

    /// Statements with `property` whose main value is the entity `value`, all ranks, key order.
    pub fn statements_with_value(
        &self,
        property: PropertyId,
        value: EntityId,
    ) -> impl Iterator<Item = &Statement> + '_ {
        let key = |i: u32| {
            let s = &self.statements[i as usize];
            (s.property, s.value.as_entity())
        };
        let target = (property, Some(value));
        let lo = self.by_value.partition_point(|&i| key(i) < target);
        let hi = self.by_value.partition_point(|&i| key(i) <= target);
        self.by_value[lo..hi]
            .iter()
            .map(move |&i| &self.statements[i as usize])
    }

    /// Statements with `property`, any subject, key order.
    pub fn statements_with_property(
        &self,
        property: PropertyId,
    ) -> impl Iterator<Item = &Statement> + '_ {
        self.statements.iter().filter(move |s| s.property == property)
    }
}

/// Truthy selection over the statements of one (subject, property) pair.
pub fn truthy<'a>(statements: impl IntoIterator<Item = &'a Statement>) -> Vec<&'a Statement> {
    let mut preferred = Vec::new();
    let mut normal = Vec::new();
    for s in statements {
        match s.rank {
            Rank::Preferred => preferred.push(s),
            Rank::Normal => normal.push(s),
            Rank::Deprecated => {}
        }
    }
    if preferred.is_empty() {
        normal
    } else {
        preferred
    }
}

/// Display labels keyed by entity, loaded from `QID<TAB>label` lines.
#[derive(Debug, Clone, Default)]
pub struct Labels(HashMap<EntityId, String>);

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: EntityId, label: impl Into<String>) {
        self.0.insert(id, label.into());
    }

    pub fn get(&self, id: EntityId) -> Option<&str> {
        self.0.get(&id).map(String::as_str)
    }

    /// `label (Q…)` when a label is known, else `Q…`.
    pub fn display(&self, id: EntityId) -> String {
        match self.get(id) {
            Some(label) => format!("{label} ({id})"),
            None => id.to_string(),
        }
    }

    pub fn read_tsv(reader: impl BufRead) -> std::io::Result<Self> {
        let mut labels = Self::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, label) = line.split_once('\t').ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("label line {}: expected `QID<TAB>label`", n + 1),
                )
            })?;
            let id = parse_entity_id(id.trim()).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("label line {}: {e}", n + 1))
            })?;
            labels.insert(id, label.trim());
        }
        Ok(labels)
    }
}
