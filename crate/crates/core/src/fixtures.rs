//! Small canonical ontologies shipped with the crate.
//!
//! Each fixture is an ordinary statement file under `fixtures/` with a
//! label table, optional inference rules, and a manifest of expected
//! metric values written by the brute-force oracle in the test suite.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::infer::{load_rules, InferenceRule};
use crate::ingest::{ingest_jsonl, IngestOptions};
use crate::model::{KnowledgeBase, Labels};

/// One expected value and where it came from (`oracle` or `construction`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub value: serde_json::Value,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fixture: String,
    pub metrics: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub fn get(&self, metric: &str) -> Option<&serde_json::Value> {
        self.metrics.get(metric).map(|e| &e.value)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    statements: &'static str,
    labels: &'static str,
    rules: Option<&'static str>,
    manifest: &'static str,
}

macro_rules! fixture {
    ($name:literal, rules) => {
        Fixture {
            rules: Some(include_str!(concat!("../fixtures/", $name, ".rules.jsonl"))),
            ..fixture!($name)
        }
    };
    ($name:literal) => {
        Fixture {
            name: $name,
            statements: include_str!(concat!("../fixtures/", $name, ".jsonl")),
            labels: include_str!(concat!("../fixtures/", $name, ".labels.tsv")),
            rules: None,
            manifest: include_str!(concat!("../fixtures/", $name, ".manifest.json")),
        }
    };
}

/// Axes under `entity`: three live splits, a live filler and three deprecated fillers.
pub fn fixture_ent() -> Fixture {
    fixture!("ent", rules)
}

/// Triangle with its two substantive axes and three redundant ones.
pub fn fixture_triangle() -> Fixture {
    fixture!("triangle")
}

/// One cycle, one disjointness violation and one orphan chain.
pub fn fixture_faults() -> Fixture {
    fixture!("faults")
}

/// Axes on classes below the root: object, vehicle, dictionary, animal.
pub fn fixture_beyond_root() -> Fixture {
    fixture!("beyond_root")
}

pub fn all() -> [Fixture; 4] {
    [fixture_ent(), fixture_triangle(), fixture_faults(), fixture_beyond_root()]
}

impl Fixture {
    pub fn statements_text(&self) -> &'static str {
        self.statements
    }

    pub fn knowledge_base(&self) -> KnowledgeBase {
        let (kb, _) = ingest_jsonl(self.statements.as_bytes(), &IngestOptions::jsonl())
            .unwrap_or_else(|e| panic!("fixture {} does not parse: {e}", self.name));
        kb
    }

    pub fn labels(&self) -> Labels {
        Labels::read_tsv(self.labels.as_bytes()).expect("fixture labels parse")
    }

    pub fn rules(&self) -> Vec<InferenceRule> {
        self.rules
            .map(|r| load_rules(r.as_bytes()).expect("fixture rules parse"))
            .unwrap_or_default()
    }

    pub fn manifest(&self) -> Manifest {
        serde_json::from_str(self.manifest).expect("fixture manifest parses")
    }

    pub fn manifest_text(&self) -> &'static str {
        self.manifest
    }

    fn dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
    }

    /// On-disk statement file, for handing to the CLI.
    pub fn path(&self) -> PathBuf {
        Self::dir().join(format!("{}.jsonl", self.name))
    }

    pub fn labels_path(&self) -> PathBuf {
        Self::dir().join(format!("{}.labels.tsv", self.name))
    }

    pub fn rules_path(&self) -> Option<PathBuf> {
        self.rules.map(|_| Self::dir().join(format!("{}.rules.jsonl", self.name)))
    }

    pub fn manifest_path(&self) -> PathBuf {
        Self::dir().join(format!("{}.manifest.json", self.name))
    }
}
