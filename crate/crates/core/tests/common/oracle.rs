//! Naive reference implementation used to check the library.
//!
//! Everything here works on plain integers parsed straight from the
//! statement JSON with `serde_json::Value`; reachability is a plain DFS per
//! start node. Nothing from the library is reused except in the final
//! conversion to manifest JSON.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use serde_json::{json, Value as Json};

const P31: u32 = 31;
const P279: u32 = 279;
const P2737: u32 = 2737;
const P2738: u32 = 2738;
const MARK: u64 = 23766486;

#[derive(Debug, Clone, PartialEq)]
pub enum OVal {
    Ent(u64),
    NoValue,
    SomeValue,
    Text,
}

#[derive(Debug, Clone)]
pub struct OStmt {
    pub s: u64,
    pub p: u32,
    pub o: OVal,
    /// 0 deprecated, 1 normal, 2 preferred
    pub rank: u8,
    pub q: Vec<(u32, OVal)>,
}

fn num(text: &str, prefix: char) -> u64 {
    assert!(text.starts_with(prefix), "bad id {text}");
    text[1..].parse().unwrap()
}

fn val(v: &Json) -> OVal {
    match v {
        Json::Null => OVal::NoValue,
        Json::String(s) if s == "~somevalue" => OVal::SomeValue,
        Json::String(s) => OVal::Ent(num(s, 'Q')),
        Json::Object(_) => OVal::Text,
        other => panic!("bad value {other}"),
    }
}

pub fn parse_jsonl(text: &str) -> Vec<OStmt> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Json = serde_json::from_str(l).unwrap();
            let rank = match v.get("rank").and_then(Json::as_str).unwrap_or("normal") {
                "deprecated" => 0,
                "normal" => 1,
                "preferred" => 2,
                r => panic!("rank {r}"),
            };
            let q = v
                .get("q")
                .and_then(Json::as_array)
                .map(|qs| {
                    qs.iter()
                        .map(|pair| (num(pair[0].as_str().unwrap(), 'P') as u32, val(&pair[1])))
                        .collect()
                })
                .unwrap_or_default();
            OStmt {
                s: num(v["s"].as_str().unwrap(), 'Q'),
                p: num(v["p"].as_str().unwrap(), 'P') as u32,
                o: val(&v["o"]),
                rank,
                q,
            }
        })
        .collect()
}

/// Truthy statements for (s, p), in file order.
fn truthy(stmts: &[OStmt], s: u64, p: u32) -> Vec<&OStmt> {
    let group: Vec<&OStmt> = stmts.iter().filter(|x| x.s == s && x.p == p).collect();
    let best = if group.iter().any(|x| x.rank == 2) { 2 } else { 1 };
    group.into_iter().filter(|x| x.rank == best).collect()
}

/// Truthy plus deprecated.
fn truthy_or_deprecated(stmts: &[OStmt], s: u64, p: u32) -> Vec<&OStmt> {
    let keep: Vec<*const OStmt> = truthy(stmts, s, p).into_iter().map(|x| x as *const _).collect();
    stmts
        .iter()
        .filter(|x| x.s == s && x.p == p && (x.rank == 0 || keep.contains(&(*x as *const _))))
        .collect()
}

pub struct OGraph {
    pub classes: BTreeSet<u64>,
    pub parents: BTreeMap<u64, BTreeSet<u64>>,
    ancestors: RefCell<BTreeMap<u64, Rc<BTreeSet<u64>>>>,
}

impl OGraph {
    pub fn build(stmts: &[OStmt]) -> Self {
        let subjects: BTreeSet<u64> = stmts.iter().filter(|x| x.p == P279).map(|x| x.s).collect();
        let mut classes = BTreeSet::new();
        let mut parents: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for s in subjects {
            let kept = truthy(stmts, s, P279);
            if kept.is_empty() {
                continue;
            }
            classes.insert(s);
            for x in kept {
                if let OVal::Ent(p) = x.o {
                    parents.entry(s).or_default().insert(p);
                }
            }
        }
        OGraph {
            classes,
            parents,
            ancestors: RefCell::default(),
        }
    }

    pub fn nodes(&self) -> BTreeSet<u64> {
        let mut n = self.classes.clone();
        for ps in self.parents.values() {
            n.extend(ps);
        }
        n
    }

    pub fn edge_count(&self) -> usize {
        self.parents.values().map(BTreeSet::len).sum()
    }

    /// Reflexive-transitive ancestors by depth-first search, memoized per node.
    pub fn ancestors(&self, a: u64) -> Rc<BTreeSet<u64>> {
        if let Some(found) = self.ancestors.borrow().get(&a) {
            return Rc::clone(found);
        }
        let mut seen = BTreeSet::from([a]);
        let mut stack = vec![a];
        while let Some(n) = stack.pop() {
            for &p in self.parents.get(&n).into_iter().flatten() {
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        let seen = Rc::new(seen);
        self.ancestors.borrow_mut().insert(a, Rc::clone(&seen));
        seen
    }

    pub fn reaches(&self, a: u64, b: u64) -> bool {
        self.ancestors(a).contains(&b)
    }

    /// Path of length ≥ 1 from a to b.
    fn reaches_strictly(&self, a: u64, b: u64) -> bool {
        self.parents.get(&a).into_iter().flatten().any(|&p| self.reaches(p, b))
    }

    pub fn subclasses_of(&self, root: u64) -> BTreeSet<u64> {
        let mut out: BTreeSet<u64> = self.nodes().into_iter().filter(|&n| self.reaches(n, root)).collect();
        out.insert(root);
        out
    }

    pub fn unconnected(&self, root: u64) -> BTreeSet<u64> {
        self.classes.iter().copied().filter(|&c| !self.reaches(c, root)).collect()
    }

    pub fn cycles(&self) -> Vec<Vec<u64>> {
        let on_cycle: Vec<u64> = self.nodes().into_iter().filter(|&n| self.reaches_strictly(n, n)).collect();
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for &n in &on_cycle {
            if done.contains(&n) {
                continue;
            }
            let comp: Vec<u64> = on_cycle
                .iter()
                .copied()
                .filter(|&m| self.reaches(n, m) && self.reaches(m, n))
                .collect();
            done.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct OAxis {
    pub subject: u64,
    pub disjoint: bool,
    pub branches: Vec<u64>,
    pub deprecated: bool,
    pub ordinal: usize,
}

impl OAxis {
    pub fn address(&self) -> String {
        format!("Q{}/{}", self.subject, self.ordinal)
    }
}

/// Axes in file order, deprecated ones included.
pub fn axes(stmts: &[OStmt]) -> Vec<OAxis> {
    let mut out: Vec<OAxis> = Vec::new();
    for (i, x) in stmts.iter().enumerate() {
        if (x.p != P2737 && x.p != P2738) || x.o != OVal::Ent(MARK) {
            continue;
        }
        let kept = truthy_or_deprecated(stmts, x.s, x.p);
        if !kept.iter().any(|k| std::ptr::eq(*k, &stmts[i])) {
            continue;
        }
        let mut branches = Vec::new();
        for (_, v) in &x.q {
            if let OVal::Ent(b) = v {
                if !branches.contains(b) {
                    branches.push(*b);
                }
            }
        }
        if branches.len() < 2 {
            continue;
        }
        let ordinal = out.iter().filter(|a| a.subject == x.s).count() + 1;
        out.push(OAxis {
            subject: x.s,
            disjoint: x.p == P2738,
            branches,
            deprecated: x.rank == 0,
            ordinal,
        });
    }
    out
}

pub fn membership(g: &OGraph, axis: &OAxis, c: u64) -> Vec<u64> {
    axis.branches.iter().copied().filter(|&b| g.reaches(c, b)).collect()
}

pub struct OCoverage {
    pub eligible: usize,
    pub covered: usize,
    pub per_branch: Vec<usize>,
    pub violations: Vec<u64>,
}

pub fn coverage(g: &OGraph, axis: &OAxis) -> OCoverage {
    let eligible = g.subclasses_of(axis.subject);
    let mut covered = 0;
    let mut per_branch = vec![0; axis.branches.len()];
    let mut violations = Vec::new();
    for &c in &eligible {
        let m = membership(g, axis, c);
        if !m.is_empty() {
            covered += 1;
        }
        for (k, b) in axis.branches.iter().enumerate() {
            if m.contains(b) {
                per_branch[k] += 1;
            }
        }
        if axis.disjoint && m.len() >= 2 {
            violations.push(c);
        }
    }
    OCoverage {
        eligible: eligible.len(),
        covered,
        per_branch,
        violations,
    }
}

pub fn all_violations(g: &OGraph, axis: &OAxis) -> Vec<u64> {
    g.classes.iter().copied().filter(|&c| membership(g, axis, c).len() >= 2).collect()
}

pub fn histogram(g: &OGraph, axes: &[&OAxis]) -> BTreeMap<usize, u64> {
    let mut h = BTreeMap::new();
    for &c in &g.classes {
        let k = axes.iter().filter(|a| !membership(g, a, c).is_empty()).count();
        if k > 0 {
            *h.entry(k).or_default() += 1;
        }
    }
    h
}

pub struct OJoint {
    pub counts: Vec<Vec<u64>>,
    pub ambiguous: u64,
    pub uncovered: u64,
}

pub fn joint(g: &OGraph, a: &OAxis, b: &OAxis) -> OJoint {
    let mut counts = vec![vec![0; b.branches.len()]; a.branches.len()];
    let (mut ambiguous, mut uncovered) = (0, 0);
    let sa = g.subclasses_of(a.subject);
    let sb = g.subclasses_of(b.subject);
    for c in sa.intersection(&sb) {
        let ma = membership(g, a, *c);
        let mb = membership(g, b, *c);
        if ma.len() >= 2 || mb.len() >= 2 {
            ambiguous += 1;
        } else if ma.is_empty() || mb.is_empty() {
            uncovered += 1;
        } else {
            let i = a.branches.iter().position(|&x| x == ma[0]).unwrap();
            let j = b.branches.iter().position(|&x| x == mb[0]).unwrap();
            counts[i][j] += 1;
        }
    }
    OJoint {
        counts,
        ambiguous,
        uncovered,
    }
}

fn h(ps: impl Iterator<Item = f64>) -> f64 {
    ps.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>() + 0.0
}

/// (h_a, h_b, mi) via the entropy identity MI = H(A) + H(B) − H(A,B).
pub fn entropies(counts: &[Vec<u64>]) -> (f64, f64, f64) {
    let n: u64 = counts.iter().flatten().sum();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let n = n as f64;
    let ha = h(counts.iter().map(|r| r.iter().sum::<u64>() as f64 / n));
    let width = counts.first().map_or(0, Vec::len);
    let hb = h((0..width).map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64 / n));
    let hab = h(counts.iter().flatten().map(|&c| c as f64 / n));
    (ha, hb, ha + hb - hab)
}

/// Full scan over every item with statements.
pub fn infer_instances(stmts: &[OStmt], g: &OGraph, rule: &Json) -> Vec<u64> {
    let p = num(rule["p"].as_str().unwrap(), 'P') as u32;
    let v = num(rule["v"].as_str().unwrap(), 'Q');
    let cond = rule.get("if_class").and_then(Json::as_str).map(|c| num(c, 'Q'));
    let items: BTreeSet<u64> = stmts.iter().map(|x| x.s).collect();
    items
        .into_iter()
        .filter(|&i| {
            truthy(stmts, i, p).iter().any(|x| x.o == OVal::Ent(v))
                && cond.is_none_or(|c| {
                    truthy(stmts, i, P31)
                        .iter()
                        .any(|x| matches!(x.o, OVal::Ent(t) if g.reaches(t, c)))
                })
        })
        .collect()
}

fn qids(ids: impl IntoIterator<Item = u64>) -> Json {
    Json::Array(ids.into_iter().map(|i| json!(format!("Q{i}"))).collect())
}

/// Expected metrics for one fixture, rendered as manifest JSON.
pub fn manifest(name: &str, text: &str, rules: Option<&str>, root: u64) -> Json {
    let stmts = parse_jsonl(text);
    let g = OGraph::build(&stmts);
    let axes = axes(&stmts);
    let mut m: BTreeMap<String, Json> = BTreeMap::new();

    m.insert("graph.classes".into(), json!(g.classes.len()));
    m.insert("graph.edges".into(), json!(g.edge_count()));
    m.insert(
        "graph.cycles".into(),
        Json::Array(g.cycles().into_iter().map(qids).collect()),
    );
    let unconnected = g.unconnected(root);
    let connected = g.classes.len() - unconnected.len();
    m.insert(format!("root.Q{root}.connected"), json!(connected));
    m.insert(format!("root.Q{root}.unconnected"), qids(unconnected));

    m.insert("axes.count".into(), json!(axes.len()));
    m.insert("axes.deprecated".into(), json!(axes.iter().filter(|a| a.deprecated).count()));
    let mut per_subject: BTreeMap<u64, usize> = BTreeMap::new();
    for a in &axes {
        *per_subject.entry(a.subject).or_default() += 1;
    }
    let mut multi: Vec<(u64, usize)> = per_subject.iter().filter(|(_, &n)| n > 1).map(|(&s, &n)| (s, n)).collect();
    multi.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    m.insert(
        "multi_union".into(),
        Json::Array(multi.iter().map(|(s, n)| json!([format!("Q{s}"), n])).collect()),
    );

    for a in &axes {
        let c = coverage(&g, a);
        let mut entry = json!({
            "mode": if a.disjoint { "disjoint" } else { "overlapping" },
            "deprecated": a.deprecated,
            "branches": qids(a.branches.iter().copied()),
            "eligible": c.eligible,
            "covered": c.covered,
            "per_branch": c.per_branch,
            "violations": qids(c.violations),
        });
        if a.disjoint {
            entry["graph_violations"] = qids(all_violations(&g, a));
        }
        m.insert(format!("axis.{}", a.address()), entry);
    }

    for &subject in per_subject.keys() {
        let mine: Vec<&OAxis> = axes.iter().filter(|a| a.subject == subject).collect();
        let hist: BTreeMap<String, u64> =
            histogram(&g, &mine).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        m.insert(format!("histogram.Q{subject}"), json!(hist));
        if mine.len() >= 2 {
            let t = joint(&g, mine[0], mine[1]);
            let (ha, hb, mi) = entropies(&t.counts);
            let n: u64 = t.counts.iter().flatten().sum();
            m.insert(
                format!("joint.{}.{}", mine[0].address(), mine[1].address()),
                json!({
                    "counts": t.counts,
                    "n": n,
                    "excluded_ambiguous": t.ambiguous,
                    "excluded_uncovered": t.uncovered,
                    "h_a": ha,
                    "h_b": hb,
                    "mi_bits": mi,
                }),
            );
        }
    }
    // Live axes only on the root, first two.
    let live: Vec<&OAxis> = axes.iter().filter(|a| a.subject == root && !a.deprecated).take(2).collect();
    if live.len() == 2 {
        let hist: BTreeMap<String, u64> =
            histogram(&g, &live).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        m.insert(format!("histogram.{},{}", live[0].address(), live[1].address()), json!(hist));
    }

    if let Some(rules) = rules {
        for (i, line) in rules.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let rule: Json = serde_json::from_str(line).unwrap();
            m.insert(format!("infer.rule.{i}"), qids(infer_instances(&stmts, &g, &rule)));
        }
    }

    let metrics: serde_json::Map<String, Json> = m
        .into_iter()
        .map(|(k, v)| (k, json!({"value": v, "source": "oracle"})))
        .collect();
    json!({"fixture": name, "metrics": metrics})
}
