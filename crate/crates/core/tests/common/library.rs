//! The manifest metrics computed through the library API.

use std::collections::BTreeMap;

use axiscope::axes::{axis_addresses, extract_axes, multi_union_counts, Axis, AxisMode};
use axiscope::graph::{ClassGraph, RankPolicy};
use axiscope::infer::{infer_instances, InferenceRule};
use axiscope::metrics::{axis_coverage, disjointness_violations, multiaxial_histogram, root_connectivity};
use axiscope::model::{EntityId, KnowledgeBase, Rank};
use axiscope::ortho::{joint_table, mutual_information};
use serde_json::{json, Value as Json};

fn qids(ids: impl IntoIterator<Item = EntityId>) -> Json {
    Json::Array(ids.into_iter().map(|i| json!(i.to_string())).collect())
}

fn hist_json(g: &ClassGraph, axes: &[Axis]) -> Json {
    let h = multiaxial_histogram(g, axes).unwrap();
    let m: BTreeMap<String, u64> = h.counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    json!(m)
}

pub fn metrics(kb: &KnowledgeBase, rules: &[InferenceRule], root: EntityId) -> BTreeMap<String, Json> {
    let g = ClassGraph::build(kb, RankPolicy::Truthy);
    let axes = extract_axes(kb, &Default::default());
    let addresses = axis_addresses(&axes);
    let mut m = BTreeMap::new();

    m.insert("graph.classes".into(), json!(g.class_count()));
    m.insert("graph.edges".into(), json!(g.edge_count()));
    m.insert(
        "graph.cycles".into(),
        Json::Array(g.find_cycles().cycles.into_iter().map(qids).collect()),
    );
    let conn = root_connectivity(&g, root);
    m.insert(format!("root.{root}.connected"), json!(conn.connected_count));
    m.insert(format!("root.{root}.unconnected"), qids(g.unconnected_classes(root).iter()));

    m.insert("axes.count".into(), json!(axes.len()));
    m.insert(
        "axes.deprecated".into(),
        json!(axes.iter().filter(|a| a.rank == Rank::Deprecated).count()),
    );
    m.insert(
        "multi_union".into(),
        Json::Array(
            multi_union_counts(&axes)
                .into_iter()
                .map(|(s, n)| json!([s.to_string(), n]))
                .collect(),
        ),
    );

    for (a, addr) in axes.iter().zip(&addresses) {
        let c = axis_coverage(&g, a);
        let mut entry = json!({
            "mode": a.mode.as_str(),
            "deprecated": a.rank == Rank::Deprecated,
            "branches": qids(a.branches.iter().copied()),
            "eligible": c.eligible_count,
            "covered": c.covered_count,
            "per_branch": c.per_branch.iter().map(|&(_, n)| n).collect::<Vec<_>>(),
            "violations": qids(c.violations.iter().copied()),
        });
        if a.mode == AxisMode::Disjoint {
            entry["graph_violations"] = qids(disjointness_violations(&g, a).unwrap());
        }
        m.insert(format!("axis.{addr}"), entry);
    }

    let mut subjects: Vec<EntityId> = axes.iter().map(|a| a.subject).collect();
    subjects.sort_unstable();
    subjects.dedup();
    for s in subjects {
        let mine: Vec<(Axis, &String)> = axes
            .iter()
            .zip(&addresses)
            .filter(|(a, _)| a.subject == s)
            .map(|(a, addr)| (a.clone(), addr))
            .collect();
        let only: Vec<Axis> = mine.iter().map(|(a, _)| a.clone()).collect();
        m.insert(format!("histogram.{s}"), hist_json(&g, &only));
        if mine.len() >= 2 {
            let t = joint_table(&g, &mine[0].0, &mine[1].0);
            let r = mutual_information(&t);
            m.insert(
                format!("joint.{}.{}", mine[0].1, mine[1].1),
                json!({
                    "counts": t.counts,
                    "n": t.n,
                    "excluded_ambiguous": t.excluded_ambiguous,
                    "excluded_uncovered": t.excluded_uncovered,
                    "h_a": r.h_a,
                    "h_b": r.h_b,
                    "mi_bits": r.mi_bits,
                }),
            );
        }
    }
    let live: Vec<(Axis, &String)> = axes
        .iter()
        .zip(&addresses)
        .filter(|(a, _)| a.subject == root && a.rank != Rank::Deprecated)
        .take(2)
        .map(|(a, addr)| (a.clone(), addr))
        .collect();
    if live.len() == 2 {
        let pair = [live[0].0.clone(), live[1].0.clone()];
        m.insert(format!("histogram.{},{}", live[0].1, live[1].1), hist_json(&g, &pair));
    }

    for (i, rule) in rules.iter().enumerate() {
        m.insert(format!("infer.rule.{i}"), qids(infer_instances(kb, &g, rule)));
    }
    m
}

/// Structural equality with floats compared to `tol`.
pub fn close(a: &Json, b: &Json, tol: f64) -> bool {
    match (a, b) {
        (Json::Number(x), Json::Number(y)) if x.is_f64() || y.is_f64() => {
            (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= tol
        }
        (Json::Array(x), Json::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q, tol)),
        (Json::Object(x), Json::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w, tol)))
        }
        _ => a == b,
    }
}
