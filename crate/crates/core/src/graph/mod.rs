//! The `subclass of` graph.
//!
//! Nodes are every class (an item with at least one kept P279 statement)
//! plus every parent those statements point at. Node indices follow
//! ascending [`EntityId`] order, so walking a bitset of indices yields ids
//! in sorted order. Adjacency is stored in CSR form in both directions.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::model::{truthy, vocab, EntityId, KnowledgeBase, Rank, Statement, Value};

mod scc;
mod set;
mod snapshot;

pub use scc::CycleReport;
pub use set::ClassSet;
pub use snapshot::SnapshotError;

/// Which statements of a (subject, property) pair are taken into account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankPolicy {
    /// Preferred if any, else normal.
    #[default]
    Truthy,
    /// The truthy statements plus every deprecated one.
    IncludeDeprecated,
    AllRanks,
}

impl RankPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            RankPolicy::Truthy => "truthy",
            RankPolicy::IncludeDeprecated => "include-deprecated",
            RankPolicy::AllRanks => "all",
        }
    }

    /// Applies the policy to the statements of one (subject, property) pair; key order is kept.
    pub fn select<'a>(self, statements: impl IntoIterator<Item = &'a Statement>) -> Vec<&'a Statement> {
        let all: Vec<&Statement> = statements.into_iter().collect();
        match self {
            RankPolicy::Truthy => truthy(all),
            RankPolicy::AllRanks => all,
            RankPolicy::IncludeDeprecated => {
                let chosen = truthy(all.iter().copied());
                all.into_iter()
                    .filter(|s| s.rank == Rank::Deprecated || chosen.iter().any(|c| c.key == s.key))
                    .collect()
            }
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            RankPolicy::Truthy => 0,
            RankPolicy::IncludeDeprecated => 1,
            RankPolicy::AllRanks => 2,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(RankPolicy::Truthy),
            1 => Some(RankPolicy::IncludeDeprecated),
            2 => Some(RankPolicy::AllRanks),
            _ => None,
        }
    }
}

impl fmt::Display for RankPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truthy" => Ok(RankPolicy::Truthy),
            "include-deprecated" => Ok(RankPolicy::IncludeDeprecated),
            "all" | "all-ranks" => Ok(RankPolicy::AllRanks),
            other => Err(format!("unknown rank policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGraph {
    policy: RankPolicy,
    ids: Vec<EntityId>,
    is_class: FixedBitSet,
    root_candidates: Vec<u32>,
    parent_offsets: Vec<u32>,
    parents: Vec<u32>,
    child_offsets: Vec<u32>,
    children: Vec<u32>,
}

/// Builds the class graph of `kb` under `policy`.
pub fn build_class_graph(kb: &KnowledgeBase, policy: RankPolicy) -> ClassGraph {
    ClassGraph::build(kb, policy)
}

fn csr(n: usize, edges: &[(u32, u32)]) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = vec![0u32; n + 1];
    for &(from, _) in edges {
        offsets[from as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; edges.len()];
    for &(from, to) in edges {
        targets[fill[from as usize] as usize] = to;
        fill[from as usize] += 1;
    }
    (offsets, targets)
}

impl ClassGraph {
    pub fn build(kb: &KnowledgeBase, policy: RankPolicy) -> Self {
        let mut classes = Vec::new();
        let mut candidates = Vec::new();
        let mut edges: Vec<(EntityId, EntityId)> = Vec::new();
        for subject in kb.subjects() {
            let kept = policy.select(kb.statements_for(subject, vocab::SUBCLASS_OF));
            if kept.is_empty() {
                continue;
            }
            classes.push(subject);
            if kept.iter().all(|s| s.value == Value::NoValue) {
                candidates.push(subject);
            }
            edges.extend(kept.iter().filter_map(|s| s.value.as_entity()).map(|p| (subject, p)));
        }
        Self::from_parts(policy, &classes, &candidates, &edges)
    }

    /// `classes` and `root_candidates` may be in any order; edges are (child, parent).
    fn from_parts(
        policy: RankPolicy,
        classes: &[EntityId],
        root_candidates: &[EntityId],
        edges: &[(EntityId, EntityId)],
    ) -> Self {
        let mut ids: Vec<EntityId> = classes.to_vec();
        ids.extend(edges.iter().map(|&(_, p)| p));
        ids.sort_unstable();
        ids.dedup();
        let index = |id: EntityId| ids.binary_search(&id).expect("node present") as u32;

        let mut is_class = FixedBitSet::with_capacity(ids.len());
        for &c in classes {
            is_class.insert(index(c) as usize);
        }
        let mut root_candidates: Vec<u32> = root_candidates.iter().map(|&c| index(c)).collect();
        root_candidates.sort_unstable();
        root_candidates.dedup();

        let mut up: Vec<(u32, u32)> = edges.iter().map(|&(c, p)| (index(c), index(p))).collect();
        up.sort_unstable();
        up.dedup();
        let (parent_offsets, parents) = csr(ids.len(), &up);
        let mut down: Vec<(u32, u32)> = up.iter().map(|&(c, p)| (p, c)).collect();
        down.sort_unstable();
        let (child_offsets, children) = csr(ids.len(), &down);

        Self {
            policy,
            ids,
            is_class,
            root_candidates,
            parent_offsets,
            parents,
            child_offsets,
            children,
        }
    }

    pub fn policy(&self) -> RankPolicy {
        self.policy
    }

    /// Classes plus parent-only nodes.
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn class_count(&self) -> usize {
        self.is_class.count_ones(..)
    }

    /// Distinct (child, parent) pairs.
    pub fn edge_count(&self) -> usize {
        self.parents.len()
    }

    pub fn classes(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.is_class.ones().map(|i| self.ids[i])
    }

    pub fn is_class(&self, id: EntityId) -> bool {
        self.index_of(id).is_some_and(|i| self.is_class.contains(i as usize))
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.index_of(id).is_some()
    }

    /// Classes whose only kept P279 value is "no value".
    pub fn root_candidates(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.root_candidates.iter().map(|&i| self.ids[i as usize])
    }

    /// (child, parent) pairs sorted by child then parent.
    pub fn edges(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        (0..self.ids.len()).flat_map(move |c| {
            self.parents_of_index(c as u32)
                .iter()
                .map(move |&p| (self.ids[c], self.ids[p as usize]))
        })
    }

    pub fn parents_of(&self, id: EntityId) -> Vec<EntityId> {
        self.index_of(id)
            .map(|i| self.parents_of_index(i).iter().map(|&p| self.ids[p as usize]).collect())
            .unwrap_or_default()
    }

    pub fn children_of(&self, id: EntityId) -> Vec<EntityId> {
        self.index_of(id)
            .map(|i| self.children_of_index(i).iter().map(|&c| self.ids[c as usize]).collect())
            .unwrap_or_default()
    }

    pub(crate) fn index_of(&self, id: EntityId) -> Option<u32> {
        self.ids.binary_search(&id).ok().map(|i| i as u32)
    }

    pub(crate) fn id_at(&self, index: u32) -> EntityId {
        self.ids[index as usize]
    }

    pub(crate) fn class_bits(&self) -> &FixedBitSet {
        &self.is_class
    }

    fn parents_of_index(&self, i: u32) -> &[u32] {
        let i = i as usize;
        &self.parents[self.parent_offsets[i] as usize..self.parent_offsets[i + 1] as usize]
    }

    fn children_of_index(&self, i: u32) -> &[u32] {
        let i = i as usize;
        &self.children[self.child_offsets[i] as usize..self.child_offsets[i + 1] as usize]
    }

    fn sweep(&self, start: u32, up: bool) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.ids.len());
        let mut queue = VecDeque::new();
        seen.insert(start as usize);
        queue.push_back(start);
        while let Some(n) = queue.pop_front() {
            let next = if up {
                self.parents_of_index(n)
            } else {
                self.children_of_index(n)
            };
            for &m in next {
                if !seen.put(m as usize) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Reflexive-transitive `subclass of`. Unknown ids are only subclasses of themselves.
    pub fn is_subclass_of(&self, a: EntityId, b: EntityId) -> bool {
        if a == b {
            return true;
        }
        let (Some(from), Some(to)) = (self.index_of(a), self.index_of(b)) else {
            return false;
        };
        let mut seen = FixedBitSet::with_capacity(self.ids.len());
        let mut stack = vec![from];
        seen.insert(from as usize);
        while let Some(n) = stack.pop() {
            for &p in self.parents_of_index(n) {
                if p == to {
                    return true;
                }
                if !seen.put(p as usize) {
                    stack.push(p);
                }
            }
        }
        false
    }

    /// Every class reaching `root` through `subclass of`, plus `root` itself. One O(V+E) sweep.
    pub fn subclasses_of(&self, root: EntityId) -> ClassSet<'_> {
        match self.index_of(root) {
            Some(i) => ClassSet::from_bits(self, self.sweep(i, false), None),
            None => ClassSet::from_bits(self, FixedBitSet::with_capacity(self.ids.len()), Some(root)),
        }
    }

    /// `id` and everything it is a subclass of.
    pub fn superclasses_of(&self, id: EntityId) -> ClassSet<'_> {
        match self.index_of(id) {
            Some(i) => ClassSet::from_bits(self, self.sweep(i, true), None),
            None => ClassSet::from_bits(self, FixedBitSet::with_capacity(self.ids.len()), Some(id)),
        }
    }

    /// Classes that do not reach `root`.
    pub fn unconnected_classes(&self, root: EntityId) -> ClassSet<'_> {
        let mut bits = self.is_class.clone();
        bits.difference_with(self.subclasses_of(root).bits());
        ClassSet::from_bits(self, bits, None)
    }

    pub fn find_cycles(&self) -> CycleReport {
        scc::find_cycles(self)
    }
}
