//! Mutual information between two axes over their jointly typed classes.
//!
//! The population is the set of classes eligible for both axes. Classes in
//! two or more branches of either axis are excluded as ambiguous; the rest
//! that miss one of the axes are excluded as uncovered.

use serde::Serialize;

use crate::axes::Axis;
use crate::graph::ClassGraph;
use crate::metrics::tabulate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    pub axis_a: Axis,
    pub axis_b: Axis,
    /// `counts[i][j]`: classes in branch `i` of A and branch `j` of B.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
    pub excluded_ambiguous: u64,
    pub excluded_uncovered: u64,
}

impl JointTable {
    pub fn count(&self, a_branch: usize, b_branch: usize) -> u64 {
        self.counts[a_branch][b_branch]
    }
}

pub fn joint_table(g: &ClassGraph, a: &Axis, b: &Axis) -> JointTable {
    let t = tabulate(g, &[a, b]);
    let counts: Vec<Vec<u64>> = t.counts.chunks(b.branches.len()).map(<[u64]>::to_vec).collect();
    JointTable {
        axis_a: a.clone(),
        axis_b: b.clone(),
        n: counts.iter().flatten().sum(),
        counts,
        excluded_ambiguous: t.ambiguous,
        excluded_uncovered: t.uncovered,
    }
}

/// Entropies and mutual information of a contingency table, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Information {
    pub h_a: f64,
    pub h_b: f64,
    pub mi_bits: f64,
    /// `mi / min(h_a, h_b)`; absent when that minimum is zero or the table is empty.
    pub nmi: Option<f64>,
}

fn entropy(marginal: &[u64], n: f64) -> f64 {
    marginal
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        // A certain outcome gives -0.0; report it as 0.
        + 0.0
}

/// Information measures of a rectangular count table. Zero cells contribute zero.
pub fn information(counts: &[Vec<u64>]) -> Information {
    let rows: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let width = counts.first().map_or(0, Vec::len);
    let cols: Vec<u64> = (0..width).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    let total: u64 = rows.iter().sum();
    if total == 0 {
        return Information {
            h_a: 0.0,
            h_b: 0.0,
            mi_bits: 0.0,
            nmi: None,
        };
    }
    let n = total as f64;
    let mut mi = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).log2();
            }
        }
    }
    let h_a = entropy(&rows, n);
    let h_b = entropy(&cols, n);
    // Rounding can leave an exact zero slightly negative.
    let mi = mi.max(0.0);
    let floor = h_a.min(h_b);
    Information {
        h_a,
        h_b,
        mi_bits: mi,
        nmi: (floor > 0.0).then(|| (mi / floor).min(1.0)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MIReport {
    pub table: JointTable,
    pub h_a: f64,
    pub h_b: f64,
    pub mi_bits: f64,
    pub nmi: Option<f64>,
}

pub fn mutual_information(t: &JointTable) -> MIReport {
    let info = information(&t.counts);
    MIReport {
        table: t.clone(),
        h_a: info.h_a,
        h_b: info.h_b,
        mi_bits: info.mi_bits,
        nmi: info.nmi,
    }
}
