//! Eligibility, coverage, disjointness violations and multi-axial typing.
//!
//! A class is eligible for an axis when it is a subclass of the axis's
//! subject, and covered when it is also a subclass of at least one branch.
//! Both relations are reflexive, so a branch class that sits under the
//! subject covers itself.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::axes::{Axis, AxisMode};
use crate::graph::{ClassGraph, ClassSet};
use crate::model::EntityId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("axis on {0} is a plain union, not a disjoint union")]
    NotDisjointAxis(EntityId),
    #[error("at least one axis is required")]
    NoAxes,
}

/// A member of a [`ClassSet`]: a graph node or the one id outside the graph.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Member {
    Node(usize),
    Outside(EntityId),
}

impl Member {
    pub(crate) fn id(self, g: &ClassGraph) -> EntityId {
        match self {
            Member::Node(i) => g.id_at(i as u32),
            Member::Outside(id) => id,
        }
    }
}

/// Members of the intersection of `sets`, ascending by id.
pub(crate) fn intersection_members(g: &ClassGraph, sets: &[&ClassSet<'_>]) -> Vec<Member> {
    let Some((first, rest)) = sets.split_first() else {
        return Vec::new();
    };
    let mut bits = first.bits().clone();
    for s in rest {
        bits.intersect_with(s.bits());
    }
    let mut out: Vec<Member> = bits.ones().map(Member::Node).collect();
    if let Some(x) = first.outside() {
        if rest.iter().all(|s| s.contains(x)) {
            let at = out.partition_point(|m| m.id(g) < x);
            out.insert(at, Member::Outside(x));
        }
    }
    out
}

/// Subclass sets of one axis's subject and branches.
pub(crate) struct AxisSweep<'g> {
    pub eligible: ClassSet<'g>,
    pub branches: Vec<ClassSet<'g>>,
}

impl<'g> AxisSweep<'g> {
    pub(crate) fn new(g: &'g ClassGraph, axis: &Axis) -> Self {
        Self {
            eligible: g.subclasses_of(axis.subject),
            branches: axis.branches.iter().map(|&b| g.subclasses_of(b)).collect(),
        }
    }

    /// Branch positions containing `m`.
    pub(crate) fn branches_of(&self, m: Member) -> impl Iterator<Item = usize> + '_ {
        self.branches.iter().enumerate().filter_map(move |(k, set)| {
            let hit = match m {
                Member::Node(i) => set.bits().contains(i),
                Member::Outside(id) => set.outside() == Some(id),
            };
            hit.then_some(k)
        })
    }

    /// Per-node branch hit counts over the whole graph.
    fn hit_counts(&self, nodes: usize) -> Vec<u16> {
        let mut counts = vec![0u16; nodes];
        for set in &self.branches {
            for i in set.bits().ones() {
                counts[i] = counts[i].saturating_add(1);
            }
        }
        counts
    }
}

/// Classes of the joint population sorted into product cells.
pub(crate) struct Tabulation {
    /// Row-major over the axes' branch positions, last axis fastest.
    pub counts: Vec<u64>,
    /// In two or more branches of some axis.
    pub ambiguous: u64,
    /// Unambiguous but outside every branch of some axis.
    pub uncovered: u64,
}

/// Tabulates the classes eligible for every axis. A class counts as
/// ambiguous before it counts as uncovered. The caller bounds the cell count.
pub(crate) fn tabulate(g: &ClassGraph, axes: &[&Axis]) -> Tabulation {
    let sweeps: Vec<AxisSweep<'_>> = axes.par_iter().map(|a| AxisSweep::new(g, a)).collect();
    let eligible: Vec<&ClassSet<'_>> = sweeps.iter().map(|s| &s.eligible).collect();
    let members = intersection_members(g, &eligible);
    let cells: usize = axes.iter().map(|a| a.branches.len()).product();

    let empty = || Tabulation {
        counts: vec![0; cells],
        ambiguous: 0,
        uncovered: 0,
    };
    members
        .par_chunks(4096)
        .fold(empty, |mut t, chunk| {
            'member: for &m in chunk {
                let mut cell = 0usize;
                let mut uncovered = false;
                for (sweep, axis) in sweeps.iter().zip(axes) {
                    let mut hits = sweep.branches_of(m);
                    match (hits.next(), hits.next()) {
                        (Some(_), Some(_)) => {
                            t.ambiguous += 1;
                            continue 'member;
                        }
                        (Some(k), None) => cell = cell * axis.branches.len() + k,
                        (None, _) => uncovered = true,
                    }
                }
                if uncovered {
                    t.uncovered += 1;
                } else {
                    t.counts[cell] += 1;
                }
            }
            t
        })
        .reduce(empty, |mut a, b| {
            for (x, y) in a.counts.iter_mut().zip(b.counts) {
                *x += y;
            }
            a.ambiguous += b.ambiguous;
            a.uncovered += b.uncovered;
            a
        })
}

/// Branches of `axis` that `class` is a (reflexive) subclass of, in axis order.
pub fn branch_membership(g: &ClassGraph, axis: &Axis, class: EntityId) -> Vec<EntityId> {
    let above = g.superclasses_of(class);
    axis.branches.iter().copied().filter(|&b| above.contains(b)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub axis: Axis,
    pub eligible_count: usize,
    pub covered_count: usize,
    /// Eligible classes under each branch, in axis order.
    pub per_branch: Vec<(EntityId, usize)>,
    /// Eligible classes under two or more branches; always empty for overlapping axes.
    pub violations: Vec<EntityId>,
    pub coverage_ratio: f64,
}

pub fn axis_coverage(g: &ClassGraph, axis: &Axis) -> CoverageReport {
    let sweep = AxisSweep::new(g, axis);
    let counts = sweep.hit_counts(g.node_count());
    let mut covered = 0;
    let mut per_branch = vec![0usize; axis.branches.len()];
    let mut violations = Vec::new();
    let mut visit = |m: Member, hits: usize| {
        if hits == 0 {
            return;
        }
        covered += 1;
        for k in sweep.branches_of(m) {
            per_branch[k] += 1;
        }
        if hits >= 2 && axis.mode == AxisMode::Disjoint {
            violations.push(m.id(g));
        }
    };
    for i in sweep.eligible.bits().ones() {
        visit(Member::Node(i), counts[i] as usize);
    }
    if let Some(x) = sweep.eligible.outside() {
        let m = Member::Outside(x);
        visit(m, sweep.branches_of(m).count());
    }
    violations.sort_unstable();

    let eligible_count = sweep.eligible.len();
    CoverageReport {
        axis: axis.clone(),
        eligible_count,
        covered_count: covered,
        per_branch: axis.branches.iter().copied().zip(per_branch).collect(),
        violations,
        coverage_ratio: if eligible_count == 0 {
            0.0
        } else {
            covered as f64 / eligible_count as f64
        },
    }
}

/// Coverage of every axis; the sweeps run in parallel, output keeps input order.
pub fn coverage_all(g: &ClassGraph, axes: &[Axis]) -> Vec<CoverageReport> {
    axes.par_iter().map(|a| axis_coverage(g, a)).collect()
}

/// Classes of the graph under two or more branches of a disjoint axis, sorted by id.
pub fn disjointness_violations(g: &ClassGraph, axis: &Axis) -> Result<Vec<EntityId>, MetricsError> {
    if axis.mode != AxisMode::Disjoint {
        return Err(MetricsError::NotDisjointAxis(axis.subject));
    }
    let sweep = AxisSweep::new(g, axis);
    let counts = sweep.hit_counts(g.node_count());
    Ok(g.class_bits()
        .ones()
        .filter(|&i| counts[i] >= 2)
        .map(|i| g.id_at(i as u32))
        .collect())
}

/// Number of classes typed along exactly k of the supplied axes, for k ≥ 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub counts: BTreeMap<usize, u64>,
}

impl Histogram {
    pub fn typed_classes(&self) -> u64 {
        self.counts.values().sum()
    }
}

fn covered_bits(g: &ClassGraph, axis: &Axis) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(g.node_count());
    for &b in &axis.branches {
        bits.union_with(g.subclasses_of(b).bits());
    }
    bits
}

pub fn multiaxial_histogram(g: &ClassGraph, axes: &[Axis]) -> Result<Histogram, MetricsError> {
    if axes.is_empty() {
        return Err(MetricsError::NoAxes);
    }
    let covered: Vec<FixedBitSet> = axes.par_iter().map(|a| covered_bits(g, a)).collect();
    let mut k = vec![0u16; g.node_count()];
    for bits in &covered {
        for i in bits.ones() {
            k[i] += 1;
        }
    }
    let mut hist = Histogram::default();
    for i in g.class_bits().ones() {
        if k[i] > 0 {
            *hist.counts.entry(k[i] as usize).or_default() += 1;
        }
    }
    Ok(hist)
}

/// Classes reaching the root versus all classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootConnectivity {
    pub root: EntityId,
    pub class_count: usize,
    /// Classes that are (reflexive) subclasses of the root.
    pub connected_count: usize,
    pub unconnected_count: usize,
}

pub fn root_connectivity(g: &ClassGraph, root: EntityId) -> RootConnectivity {
    let mut connected = g.subclasses_of(root).bits().clone();
    connected.intersect_with(g.class_bits());
    let unconnected = g.unconnected_classes(root).len();
    RootConnectivity {
        root,
        class_count: g.class_count(),
        connected_count: connected.count_ones(..),
        unconnected_count: unconnected,
    }
}
