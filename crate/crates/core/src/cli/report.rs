//! Command reports. Each report is built once as JSON and once as text from
//! the same computed values.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context as _, Result};
use serde_json::{json, Value as Json};

use super::Context;
use crate::axes::{axis_addresses, multi_union_counts, Axis, AxisMode};
use crate::graph::RankPolicy;
use crate::infer::{infer_classes, infer_instances, InferenceRule};
use crate::ingest::IngestReport;
use crate::lattice::{build_lattice_with_cap, emit_dot, missing_combinations};
use crate::metrics::{coverage_all, disjointness_violations, multiaxial_histogram, root_connectivity};
use crate::model::{EntityId, Rank};
use crate::ortho::{joint_table, mutual_information};

/// Longest id list printed in text mode; JSON always carries the full list.
const TEXT_LIST_LIMIT: usize = 50;

pub(crate) struct Report {
    pub json: Json,
    pub text: String,
    /// Set by `validate` when something is wrong with the data.
    pub findings: bool,
}

impl Report {
    fn new(json: Json, text: String) -> Self {
        Report {
            json,
            text,
            findings: false,
        }
    }
}

pub(crate) struct Envelope<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub graph_ranks: RankPolicy,
    pub axis_ranks: RankPolicy,
    pub root: EntityId,
    pub ingest: &'a IngestReport,
}

impl Envelope<'_> {
    pub fn json(&self, report: &Report) -> Json {
        json!({
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "ranks": {"graph": self.graph_ranks.as_str(), "axes": self.axis_ranks.as_str()},
            "root": self.root,
            "ingest": {
                "lines_read": self.ingest.lines_read,
                "statements_kept": self.ingest.statements_kept,
                "statements_dropped": self.ingest.statements_dropped,
                "malformed_lines": self.ingest.malformed_lines,
            },
            "report": report.json,
        })
    }

    pub fn text(&self, report: &Report) -> String {
        let i = self.ingest;
        format!(
            "{} {} {}\nranks: graph {}, axes {}; root {}\ninput: {} lines, {} statements kept, {} dropped, {} malformed\n\n{}",
            self.tool,
            self.version,
            self.command,
            self.graph_ranks,
            self.axis_ranks,
            self.root,
            i.lines_read,
            i.statements_kept,
            i.statements_dropped,
            i.malformed_lines,
            report.text
        )
    }
}

fn ids(list: &[EntityId]) -> Json {
    Json::Array(list.iter().map(|i| json!(i)).collect())
}

impl Context {
    fn name(&self, id: EntityId) -> String {
        self.labels.display(id)
    }

    fn names(&self, list: &[EntityId], sep: &str) -> String {
        let mut parts: Vec<String> = list.iter().take(TEXT_LIST_LIMIT).map(|&i| self.name(i)).collect();
        if list.len() > TEXT_LIST_LIMIT {
            parts.push(format!("… {} more", list.len() - TEXT_LIST_LIMIT));
        }
        parts.join(sep)
    }

    fn axis_json(&self, address: &str, a: &Axis) -> Json {
        json!({
            "address": address,
            "subject": a.subject,
            "mode": a.mode.as_str(),
            "rank": a.rank.as_str(),
            "branches": ids(&a.branches),
        })
    }

    fn axis_line(&self, address: &str, a: &Axis) -> String {
        format!(
            "{address}  {} {}  [{}]",
            a.mode.as_str(),
            a.rank,
            self.names(&a.branches, " | ")
        )
    }
}

pub(crate) fn validate(ctx: &Context) -> Report {
    let g = &ctx.graph;
    let cycles = g.find_cycles().cycles;
    let conn = root_connectivity(g, ctx.root);
    let unconnected = g.unconnected_classes(ctx.root).to_vec();
    let addresses = axis_addresses(&ctx.extraction.axes);

    let mut text = String::new();
    let _ = writeln!(text, "classes: {}, subclass edges: {}", g.class_count(), g.edge_count());
    let _ = writeln!(text, "cycles: {}", cycles.len());
    for c in &cycles {
        let _ = writeln!(text, "  {}", ctx.names(c, " -> "));
    }
    let _ = writeln!(
        text,
        "root {}: {} connected, {} unconnected",
        ctx.name(ctx.root),
        conn.connected_count,
        conn.unconnected_count
    );
    if !unconnected.is_empty() {
        let _ = writeln!(text, "  unconnected: {}", ctx.names(&unconnected, ", "));
    }

    let mut axes_json = Vec::new();
    let mut axes_text = String::new();
    let mut total = 0usize;
    for (a, addr) in ctx.extraction.axes.iter().zip(&addresses) {
        if a.mode != AxisMode::Disjoint {
            continue;
        }
        let v = disjointness_violations(g, a).expect("axis is disjoint");
        total += v.len();
        axes_json.push(json!({
            "address": addr,
            "subject": a.subject,
            "rank": a.rank.as_str(),
            "violation_count": v.len(),
            "violations": ids(&v),
        }));
        let _ = write!(axes_text, "  {addr} ({}): {}", a.rank, v.len());
        if !v.is_empty() {
            let _ = write!(axes_text, "  [{}]", ctx.names(&v, ", "));
        }
        axes_text.push('\n');
    }
    let _ = writeln!(text, "disjointness violations: {total}");
    text.push_str(&axes_text);
    let clean = cycles.is_empty() && unconnected.is_empty() && total == 0;
    let _ = writeln!(text, "status: {}", if clean { "clean" } else { "findings" });

    let json = json!({
        "class_count": g.class_count(),
        "edge_count": g.edge_count(),
        "cycle_count": cycles.len(),
        "cycles": cycles.iter().map(|c| ids(c)).collect::<Vec<_>>(),
        "connected_count": conn.connected_count,
        "unconnected_count": conn.unconnected_count,
        "unconnected": ids(&unconnected),
        "violation_count": total,
        "axes": axes_json,
        "clean": clean,
    });
    Report {
        findings: !clean,
        ..Report::new(json, text)
    }
}

pub(crate) fn axes(ctx: &Context) -> Report {
    let ex = &ctx.extraction;
    let addresses = axis_addresses(&ex.axes);
    let deprecated = ex.axes.iter().filter(|a| a.rank == Rank::Deprecated).count();
    let mut text = format!("axes: {} ({deprecated} deprecated)\n", ex.axes.len());
    for (a, addr) in ex.axes.iter().zip(&addresses) {
        let _ = writeln!(text, "  {}", ctx.axis_line(addr, a));
    }
    let _ = writeln!(
        text,
        "skipped (fewer than 2 branches): {}, duplicate branches collapsed: {}",
        ex.skipped_too_few_branches, ex.duplicate_branches_collapsed
    );
    let json = json!({
        "count": ex.axes.len(),
        "deprecated_count": deprecated,
        "skipped_too_few_branches": ex.skipped_too_few_branches,
        "duplicate_branches_collapsed": ex.duplicate_branches_collapsed,
        "axes": ex.axes.iter().zip(&addresses).map(|(a, addr)| ctx.axis_json(addr, a)).collect::<Vec<_>>(),
    });
    Report::new(json, text)
}

pub(crate) fn multiunion(ctx: &Context) -> Report {
    let rows = multi_union_counts(&ctx.extraction.axes);
    let mut text = format!("items with more than one axis: {}\n", rows.len());
    for (item, n) in &rows {
        let _ = writeln!(text, "  {}  {n}", ctx.name(*item));
    }
    let json = json!({
        "item_count": rows.len(),
        "items": rows.iter().map(|(item, n)| json!({"item": item, "axes": n})).collect::<Vec<_>>(),
    });
    Report::new(json, text)
}

pub(crate) fn coverage(ctx: &Context, picked: &[usize]) -> Report {
    let addresses = axis_addresses(&ctx.extraction.axes);
    let conn = root_connectivity(&ctx.graph, ctx.root);
    let axes: Vec<Axis> = picked.iter().map(|&i| ctx.extraction.axes[i].clone()).collect();
    let reports = coverage_all(&ctx.graph, &axes);

    let mut text = format!(
        "root {}: {} classes, {} connected, {} unconnected\n",
        ctx.name(ctx.root),
        conn.class_count,
        conn.connected_count,
        conn.unconnected_count
    );
    let mut rows = Vec::new();
    for (&i, r) in picked.iter().zip(&reports) {
        let addr = &addresses[i];
        let a = &r.axis;
        let _ = writeln!(text, "\n{}", ctx.axis_line(addr, a));
        let _ = writeln!(
            text,
            "  eligible {}, covered {}, uncovered {}, ratio {}",
            r.eligible_count,
            r.covered_count,
            r.eligible_count - r.covered_count,
            r.coverage_ratio
        );
        for (b, n) in &r.per_branch {
            let _ = writeln!(text, "  {}: {n}", ctx.name(*b));
        }
        let _ = writeln!(text, "  violations: {}", r.violations.len());
        if !r.violations.is_empty() {
            let _ = writeln!(text, "    {}", ctx.names(&r.violations, ", "));
        }
        let mut row = ctx.axis_json(addr, a);
        let extra = json!({
            "eligible_count": r.eligible_count,
            "covered_count": r.covered_count,
            "uncovered_count": r.eligible_count - r.covered_count,
            "coverage_ratio": r.coverage_ratio,
            "per_branch": r.per_branch.iter().map(|(b, n)| json!({"branch": b, "count": n})).collect::<Vec<_>>(),
            "violation_count": r.violations.len(),
            "violations": ids(&r.violations),
        });
        row.as_object_mut()
            .expect("object")
            .extend(extra.as_object().expect("object").clone());
        rows.push(row);
    }
    let json = json!({
        "root_connectivity": {
            "root": conn.root,
            "class_count": conn.class_count,
            "connected_count": conn.connected_count,
            "unconnected_count": conn.unconnected_count,
        },
        "axes": rows,
    });
    Report::new(json, text)
}

pub(crate) fn histogram(ctx: &Context, picked: &[usize]) -> Result<Report> {
    let addresses = axis_addresses(&ctx.extraction.axes);
    let axes: Vec<Axis> = picked.iter().map(|&i| ctx.extraction.axes[i].clone()).collect();
    let h = multiaxial_histogram(&ctx.graph, &axes)?;
    let chosen: Vec<&String> = picked.iter().map(|&i| &addresses[i]).collect();
    let mut text = format!(
        "axes: {}\n",
        chosen.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
    );
    for (k, n) in &h.counts {
        let _ = writeln!(text, "  typed by {k}: {n} classes");
    }
    let _ = writeln!(text, "typed classes: {}", h.typed_classes());
    let json = json!({
        "axes": chosen,
        "counts": h.counts.iter().map(|(k, n)| json!({"axes": k, "classes": n})).collect::<Vec<_>>(),
        "typed_classes": h.typed_classes(),
    });
    Ok(Report::new(json, text))
}

pub(crate) fn mi(ctx: &Context, a: usize, b: usize) -> Report {
    let addresses = axis_addresses(&ctx.extraction.axes);
    let (axis_a, axis_b) = (&ctx.extraction.axes[a], &ctx.extraction.axes[b]);
    let t = joint_table(&ctx.graph, axis_a, axis_b);
    let r = mutual_information(&t);

    let mut text = format!(
        "A: {}\nB: {}\n\njoint counts (rows A, columns B):\n",
        ctx.axis_line(&addresses[a], axis_a),
        ctx.axis_line(&addresses[b], axis_b)
    );
    let _ = writeln!(text, "  {}", ctx.names(&axis_b.branches, "\t"));
    for (branch, row) in axis_a.branches.iter().zip(&t.counts) {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        let _ = writeln!(text, "  {}\t{}", cells.join("\t"), ctx.name(*branch));
    }
    let _ = writeln!(
        text,
        "\nn {}, excluded ambiguous {}, excluded uncovered {}",
        t.n, t.excluded_ambiguous, t.excluded_uncovered
    );
    let _ = writeln!(text, "H(A) {} bits, H(B) {} bits", r.h_a, r.h_b);
    let _ = writeln!(text, "MI {} bits", r.mi_bits);
    match r.nmi {
        Some(v) => {
            let _ = writeln!(text, "normalized MI {v}");
        }
        None => text.push_str("normalized MI undefined\n"),
    }
    let json = json!({
        "axis_a": ctx.axis_json(&addresses[a], axis_a),
        "axis_b": ctx.axis_json(&addresses[b], axis_b),
        "counts": t.counts,
        "n": t.n,
        "excluded_ambiguous": t.excluded_ambiguous,
        "excluded_uncovered": t.excluded_uncovered,
        "h_a": r.h_a,
        "h_b": r.h_b,
        "mi_bits": r.mi_bits,
        "nmi": r.nmi,
    });
    Report::new(json, text)
}

pub(crate) fn lattice(ctx: &Context, picked: &[usize], dot: Option<&Path>, cap: u64) -> Result<Report> {
    let addresses = axis_addresses(&ctx.extraction.axes);
    let axes: Vec<Axis> = picked.iter().map(|&i| ctx.extraction.axes[i].clone()).collect();
    let l = build_lattice_with_cap(&ctx.graph, &axes, cap)?;
    if let Some(path) = dot {
        std::fs::write(path, emit_dot(&l, Some(&ctx.labels)))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let edges = l.edges();
    let missing = missing_combinations(&l);

    let mut text = String::new();
    for &i in picked {
        let _ = writeln!(text, "{}", ctx.axis_line(&addresses[i], &ctx.extraction.axes[i]));
    }
    let _ = writeln!(
        text,
        "\nnodes {}, edges {}, occupied {}, missing {}",
        l.nodes.len(),
        edges.len(),
        l.nodes.len() - missing.len(),
        missing.len()
    );
    let _ = writeln!(
        text,
        "classes tabulated {}, ambiguous {}, uncovered {}",
        l.tabulated(),
        l.ambiguous_count,
        l.uncovered_count
    );
    for node in &l.nodes {
        let _ = writeln!(text, "  {}\t{}", node.occupancy, ctx.names(&node.branches, " / "));
    }
    if let Some(path) = dot {
        let _ = writeln!(text, "DOT written to {}", path.display());
    }
    let json = json!({
        "axes": picked.iter().map(|&i| ctx.axis_json(&addresses[i], &ctx.extraction.axes[i])).collect::<Vec<_>>(),
        "node_count": l.nodes.len(),
        "edge_count": edges.len(),
        "occupied_count": l.nodes.len() - missing.len(),
        "missing_count": missing.len(),
        "tabulated": l.tabulated(),
        "ambiguous_count": l.ambiguous_count,
        "uncovered_count": l.uncovered_count,
        "nodes": l.nodes.iter().map(|n| json!({"branches": ids(&n.branches), "occupancy": n.occupancy})).collect::<Vec<_>>(),
        "missing": missing.iter().map(|n| ids(&n.branches)).collect::<Vec<_>>(),
        "dot": dot.map(|p| p.display().to_string()),
    });
    Ok(Report::new(json, text))
}

fn rule_text(ctx: &Context, r: &InferenceRule) -> String {
    let cond = r
        .condition_class
        .map(|c| format!("instance of {} and ", ctx.name(c)))
        .unwrap_or_default();
    format!(
        "if {cond}{} = {} then {}",
        r.property,
        ctx.name(r.value),
        ctx.name(r.inferred_class)
    )
}

pub(crate) fn infer(
    ctx: &Context,
    rules: &[InferenceRule],
    item: Option<EntityId>,
    rule_index: Option<usize>,
) -> Report {
    let mut text = format!("rules: {}\n", rules.len());
    if let Some(item) = item {
        let res = infer_classes(&ctx.kb, &ctx.graph, item, rules);
        let _ = writeln!(text, "item {}", ctx.name(item));
        for &i in &res.fired_rules {
            let _ = writeln!(text, "  rule {i}: {}", rule_text(ctx, &rules[i]));
        }
        let _ = writeln!(text, "inferred classes: {}", res.inferred.len());
        for &c in &res.inferred {
            let _ = writeln!(text, "  {}", ctx.name(c));
        }
        let json = json!({
            "rule_count": rules.len(),
            "item": {
                "item": res.item,
                "inferred": ids(&res.inferred),
                "fired_rules": res.fired_rules,
            },
        });
        return Report::new(json, text);
    }
    let selected: Vec<usize> = match rule_index {
        Some(i) => vec![i],
        None => (0..rules.len()).collect(),
    };
    let mut rows = Vec::new();
    for i in selected {
        let items = infer_instances(&ctx.kb, &ctx.graph, &rules[i]);
        let _ = writeln!(text, "rule {i}: {}", rule_text(ctx, &rules[i]));
        let _ = writeln!(text, "  instances: {}", items.len());
        if !items.is_empty() {
            let _ = writeln!(text, "  {}", ctx.names(&items, ", "));
        }
        rows.push(json!({
            "rule_index": i,
            "rule": rules[i],
            "count": items.len(),
            "items": ids(&items),
        }));
    }
    Report::new(json!({"rule_count": rules.len(), "instances": rows}), text)
}
