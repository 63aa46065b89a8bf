//! Product lattice of selected axes.
//!
//! Nodes are tuples with one branch per axis, enumerated in lexicographic
//! order of branch positions (last axis fastest). Occupancy counts the
//! classes eligible for every axis that sit in exactly the tuple's branches.
//! Two nodes are adjacent when they differ in exactly one coordinate.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::axes::Axis;
use crate::graph::ClassGraph;
use crate::metrics::tabulate;
use crate::model::{EntityId, Labels};

pub const DEFAULT_MAX_NODES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("at least one axis is required")]
    NoAxes,
    #[error("lattice would have {nodes} nodes, more than the cap of {cap}")]
    TooLarge { nodes: u128, cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeNode {
    pub branches: Vec<EntityId>,
    pub occupancy: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lattice {
    pub axes: Vec<Axis>,
    pub nodes: Vec<LatticeNode>,
    pub ambiguous_count: u64,
    pub uncovered_count: u64,
}

pub fn build_lattice(g: &ClassGraph, axes: &[Axis]) -> Result<Lattice, LatticeError> {
    build_lattice_with_cap(g, axes, DEFAULT_MAX_NODES)
}

pub fn build_lattice_with_cap(g: &ClassGraph, axes: &[Axis], cap: u64) -> Result<Lattice, LatticeError> {
    if axes.is_empty() {
        return Err(LatticeError::NoAxes);
    }
    let nodes = axes
        .iter()
        .try_fold(1u128, |acc, a| acc.checked_mul(a.branches.len() as u128))
        .unwrap_or(u128::MAX);
    if nodes > cap as u128 {
        return Err(LatticeError::TooLarge { nodes, cap });
    }
    let refs: Vec<&Axis> = axes.iter().collect();
    let t = tabulate(g, &refs);
    // Odometer over branch positions, last axis fastest.
    let mut coords = vec![0usize; axes.len()];
    let mut nodes = Vec::with_capacity(t.counts.len());
    for &occupancy in &t.counts {
        nodes.push(LatticeNode {
            branches: coords.iter().zip(axes).map(|(&k, a)| a.branches[k]).collect(),
            occupancy,
        });
        for (slot, a) in coords.iter_mut().zip(axes).rev() {
            *slot += 1;
            if *slot < a.branches.len() {
                break;
            }
            *slot = 0;
        }
    }
    Ok(Lattice {
        axes: axes.to_vec(),
        nodes,
        ambiguous_count: t.ambiguous,
        uncovered_count: t.uncovered,
    })
}

/// Branch positions of node `index`.
fn coordinates(axes: &[Axis], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; axes.len()];
    for (slot, a) in out.iter_mut().zip(axes).rev() {
        *slot = index % a.branches.len();
        index /= a.branches.len();
    }
    out
}

impl Lattice {
    pub fn tabulated(&self) -> u64 {
        self.nodes.iter().map(|n| n.occupancy).sum()
    }

    /// Pairs of node indices differing in exactly one coordinate, `(lower, higher)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.branches.len()).collect();
        let mut strides = vec![1usize; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        let mut edges = Vec::new();
        for i in 0..self.nodes.len() {
            let coords = coordinates(&self.axes, i);
            for (k, &c) in coords.iter().enumerate() {
                for other in c + 1..sizes[k] {
                    edges.push((i, i + (other - c) * strides[k]));
                }
            }
        }
        edges.sort_unstable();
        edges
    }
}

/// Nodes with occupancy zero, in lattice order.
pub fn missing_combinations(l: &Lattice) -> Vec<&LatticeNode> {
    l.nodes.iter().filter(|n| n.occupancy == 0).collect()
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. Node labels list the branches and the occupancy.
pub fn emit_dot(l: &Lattice, labels: Option<&Labels>) -> String {
    let name = |id: EntityId| match labels.and_then(|m| m.get(id)) {
        Some(label) => label.to_string(),
        None => id.to_string(),
    };
    let mut out = String::from("digraph lattice {\n  node [shape=box];\n  edge [dir=none];\n");
    for (i, node) in l.nodes.iter().enumerate() {
        let parts: Vec<String> = node.branches.iter().map(|&b| name(b)).collect();
        let label = format!("{}\n{}", parts.join(" / "), node.occupancy);
        let _ = writeln!(out, "  n{i} [label={}];", quote(&label));
    }
    for (a, b) in l.edges() {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}
