//! Classification axes declared by qualified union statements.
//!
//! An axis is a `disjoint union of` (P2738) or `union of` (P2737) statement
//! whose main value is `list of values as qualifiers` (Q23766486). Its
//! branches are the entity-valued qualifiers, in qualifier order. The
//! qualifier property that carries branches is not fixed: every
//! entity-valued qualifier counts unless an allowlist narrows it down.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::RankPolicy;
use crate::model::{parse_entity_id, vocab, EntityId, KnowledgeBase, PropertyId, Rank, Statement, StatementKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisMode {
    /// P2738
    Disjoint,
    /// P2737
    Overlapping,
}

impl AxisMode {
    pub fn from_property(p: PropertyId) -> Option<Self> {
        match p {
            vocab::DISJOINT_UNION_OF => Some(AxisMode::Disjoint),
            vocab::UNION_OF => Some(AxisMode::Overlapping),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AxisMode::Disjoint => "disjoint",
            AxisMode::Overlapping => "overlapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Axis {
    pub subject: EntityId,
    pub mode: AxisMode,
    /// At least two, deduplicated, first occurrence kept.
    pub branches: Vec<EntityId>,
    pub rank: Rank,
    pub statement_key: StatementKey,
    #[serde(skip)]
    pub references: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AxisExtractionOptions {
    pub rank_policy: RankPolicy,
    pub qualifier_allowlist: Option<HashSet<PropertyId>>,
}

impl Default for AxisExtractionOptions {
    fn default() -> Self {
        Self {
            rank_policy: RankPolicy::IncludeDeprecated,
            qualifier_allowlist: None,
        }
    }
}

impl AxisExtractionOptions {
    pub fn with_policy(rank_policy: RankPolicy) -> Self {
        Self {
            rank_policy,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AxisExtraction {
    /// In statement-key order.
    pub axes: Vec<Axis>,
    /// Qualified union statements with fewer than two distinct branches.
    pub skipped_too_few_branches: u64,
    /// Repeated branch values dropped inside single statements.
    pub duplicate_branches_collapsed: u64,
}

fn branches_of(statement: &Statement, allow: Option<&HashSet<PropertyId>>) -> (Vec<EntityId>, u64) {
    let mut branches = Vec::new();
    let mut duplicates = 0;
    for (p, v) in &statement.qualifiers {
        if allow.is_some_and(|a| !a.contains(p)) {
            continue;
        }
        let Some(id) = v.as_entity() else { continue };
        if branches.contains(&id) {
            duplicates += 1;
        } else {
            branches.push(id);
        }
    }
    (branches, duplicates)
}

/// Extraction with side counts for skipped statements and collapsed duplicates.
pub fn extract_axes_with_report(kb: &KnowledgeBase, opts: &AxisExtractionOptions) -> AxisExtraction {
    let mut subjects: Vec<EntityId> = [vocab::DISJOINT_UNION_OF, vocab::UNION_OF]
        .into_iter()
        .flat_map(|p| kb.statements_with_value(p, vocab::LIST_OF_VALUES_AS_QUALIFIERS))
        .map(|s| s.subject)
        .collect();
    subjects.sort_unstable();
    subjects.dedup();

    let mut out = AxisExtraction::default();
    for subject in subjects {
        for property in [vocab::DISJOINT_UNION_OF, vocab::UNION_OF] {
            let mode = AxisMode::from_property(property).expect("union property");
            for s in opts.rank_policy.select(kb.statements_for(subject, property)) {
                if s.value.as_entity() != Some(vocab::LIST_OF_VALUES_AS_QUALIFIERS) {
                    continue;
                }
                let (branches, duplicates) = branches_of(s, opts.qualifier_allowlist.as_ref());
                out.duplicate_branches_collapsed += duplicates;
                if branches.len() < 2 {
                    out.skipped_too_few_branches += 1;
                    continue;
                }
                out.axes.push(Axis {
                    subject,
                    mode,
                    branches,
                    rank: s.rank,
                    statement_key: s.key,
                    references: s.references.clone(),
                });
            }
        }
    }
    out.axes.sort_by_key(|a| a.statement_key);
    out
}

pub fn extract_axes(kb: &KnowledgeBase, opts: &AxisExtractionOptions) -> Vec<Axis> {
    extract_axes_with_report(kb, opts).axes
}

/// Subjects carrying more than one axis, by count descending then id ascending.
pub fn multi_union_counts(axes: &[Axis]) -> Vec<(EntityId, usize)> {
    let mut counts: BTreeMap<EntityId, usize> = BTreeMap::new();
    for axis in axes {
        *counts.entry(axis.subject).or_default() += 1;
    }
    let mut rows: Vec<(EntityId, usize)> = counts.into_iter().filter(|&(_, n)| n > 1).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    rows
}

pub fn multi_union_items(kb: &KnowledgeBase, opts: &AxisExtractionOptions) -> Vec<(EntityId, usize)> {
    multi_union_counts(&extract_axes(kb, opts))
}

/// Names an axis by its subject and 1-based position among that subject's
/// axes, e.g. `Q35120/3`. A bare `Q…` works when the subject has one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisRef {
    pub subject: EntityId,
    pub ordinal: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxisRefError {
    #[error("malformed axis reference `{0}`: expected QID or QID/N")]
    Malformed(String),
    #[error("unknown axis {0}: no axis has that subject")]
    UnknownSubject(EntityId),
    #[error("unknown axis {subject}/{ordinal}: {subject} has {available} axes")]
    OrdinalOutOfRange {
        subject: EntityId,
        ordinal: usize,
        available: usize,
    },
    #[error("axis {subject} is ambiguous: it has {available} axes, pick one as {subject}/N")]
    Ambiguous { subject: EntityId, available: usize },
}

impl FromStr for AxisRef {
    type Err = AxisRefError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AxisRefError::Malformed(s.to_owned());
        let (id, ordinal) = match s.split_once('/') {
            Some((id, n)) => {
                let n: usize = n.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                (id, Some(n))
            }
            None => (s, None),
        };
        let subject = parse_entity_id(id.trim()).map_err(|_| bad())?;
        Ok(AxisRef { subject, ordinal })
    }
}

impl fmt::Display for AxisRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ordinal {
            Some(n) => write!(f, "{}/{n}", self.subject),
            None => write!(f, "{}", self.subject),
        }
    }
}

impl AxisRef {
    pub fn resolve<'a>(&self, axes: &'a [Axis]) -> Result<&'a Axis, AxisRefError> {
        let mine: Vec<&Axis> = axes.iter().filter(|a| a.subject == self.subject).collect();
        match (self.ordinal, mine.len()) {
            (_, 0) => Err(AxisRefError::UnknownSubject(self.subject)),
            (None, 1) => Ok(mine[0]),
            (None, n) => Err(AxisRefError::Ambiguous {
                subject: self.subject,
                available: n,
            }),
            (Some(k), n) if k > n => Err(AxisRefError::OrdinalOutOfRange {
                subject: self.subject,
                ordinal: k,
                available: n,
            }),
            (Some(k), _) => Ok(mine[k - 1]),
        }
    }
}

/// Canonical `QID/N` address of every axis, aligned with `axes`.
pub fn axis_addresses(axes: &[Axis]) -> Vec<String> {
    let mut seen: BTreeMap<EntityId, usize> = BTreeMap::new();
    axes.iter()
        .map(|a| {
            let n = seen.entry(a.subject).or_default();
            *n += 1;
            format!("{}/{}", a.subject, n)
        })
        .collect()
}

#[derive(Serialize)]
struct AxisRecord<'a> {
    subject: EntityId,
    mode: AxisMode,
    branches: &'a [EntityId],
    rank: Rank,
}

/// One `{"subject","mode","branches","rank"}` object per line.
pub fn write_axes_jsonl(axes: &[Axis], mut out: impl Write) -> io::Result<()> {
    for axis in axes {
        let record = AxisRecord {
            subject: axis.subject,
            mode: axis.mode,
            branches: &axis.branches,
            rank: axis.rank,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
