#![allow(dead_code)]

pub mod library;
pub mod oracle;

use axiscope::fixtures::Fixture;
use axiscope::model::vocab;

/// Root used for every fixture manifest.
pub const ROOT: u64 = vocab::ENTITY.get();

pub fn oracle_manifest_text(f: &Fixture) -> String {
    let rules = f.rules_path().map(|p| std::fs::read_to_string(p).unwrap());
    let m = oracle::manifest(f.name, f.statements_text(), rules.as_deref(), ROOT);
    serde_json::to_string_pretty(&m).unwrap() + "\n"
}
