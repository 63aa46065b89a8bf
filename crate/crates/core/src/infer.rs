//! Query-time class inference from property values.
//!
//! A rule `(condition?, property, value) → class` fires for an item when the
//! item has a truthy `property = value` statement and, if a condition is
//! given, a truthy `instance of` value that is a subclass of it. Nothing is
//! written back into the knowledge base and inferred classes never trigger
//! further rules.

use std::collections::BTreeSet;
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ClassGraph;
use crate::model::{vocab, EntityId, KnowledgeBase, PropertyId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceRule {
    #[serde(rename = "if_class", default, skip_serializing_if = "Option::is_none")]
    pub condition_class: Option<EntityId>,
    #[serde(rename = "p")]
    pub property: PropertyId,
    #[serde(rename = "v")]
    pub value: EntityId,
    #[serde(rename = "then")]
    pub inferred_class: EntityId,
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("malformed rule on line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One JSON object per line; blank lines are skipped.
pub fn load_rules(reader: impl BufRead) -> Result<Vec<InferenceRule>, RuleError> {
    let mut rules = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rule = serde_json::from_str(&line).map_err(|e| RuleError::Malformed {
            line: n as u64 + 1,
            message: e.to_string(),
        })?;
        rules.push(rule);
    }
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InferenceResult {
    pub item: EntityId,
    /// Sorted and deduplicated.
    pub inferred: Vec<EntityId>,
    /// Indices into the rule list, ascending.
    pub fired_rules: Vec<usize>,
}

fn has_truthy_value(kb: &KnowledgeBase, item: EntityId, property: PropertyId, value: EntityId) -> bool {
    kb.truthy_statements(item, property)
        .iter()
        .any(|s| s.value == Value::Entity(value))
}

fn meets_condition(kb: &KnowledgeBase, item: EntityId, under: impl Fn(EntityId) -> bool) -> bool {
    kb.truthy_statements(item, vocab::INSTANCE_OF)
        .iter()
        .filter_map(|s| s.value.as_entity())
        .any(under)
}

pub fn infer_classes(kb: &KnowledgeBase, g: &ClassGraph, item: EntityId, rules: &[InferenceRule]) -> InferenceResult {
    let mut inferred = BTreeSet::new();
    let mut fired = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        let fires = has_truthy_value(kb, item, rule.property, rule.value)
            && rule
                .condition_class
                .is_none_or(|c| meets_condition(kb, item, |t| g.is_subclass_of(t, c)));
        if fires {
            fired.push(i);
            inferred.insert(rule.inferred_class);
        }
    }
    InferenceResult {
        item,
        inferred: inferred.into_iter().collect(),
        fired_rules: fired,
    }
}

/// Every item the rule fires for, ascending. Scans the value index only.
pub fn infer_instances(kb: &KnowledgeBase, g: &ClassGraph, rule: &InferenceRule) -> Vec<EntityId> {
    let condition = rule.condition_class.map(|c| g.subclasses_of(c));
    let mut items: Vec<EntityId> = kb
        .statements_with_value(rule.property, rule.value)
        .map(|s| s.subject)
        .collect();
    items.dedup();
    items.retain(|&item| {
        has_truthy_value(kb, item, rule.property, rule.value)
            && condition
                .as_ref()
                .is_none_or(|set| meets_condition(kb, item, |t| set.contains(t)))
    });
    items.sort_unstable();
    items.dedup();
    items
}
