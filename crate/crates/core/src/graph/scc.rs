//! Cycle detection: iterative Tarjan over the parent adjacency.

use serde::Serialize;

use super::ClassGraph;
use crate::model::EntityId;

/// Strongly connected components of size two or more, plus self-loops.
/// Each cycle is sorted ascending; cycles are ordered by their smallest id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CycleReport {
    pub cycles: Vec<Vec<EntityId>>,
}

impl CycleReport {
    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }
}

const UNVISITED: u32 = u32::MAX;

pub(super) fn find_cycles(g: &ClassGraph) -> CycleReport {
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, position in its parent list)
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut cycles = Vec::new();

    for start in 0..n as u32 {
        if index[start as usize] != UNVISITED {
            continue;
        }
        frames.push((start, 0));
        index[start as usize] = next_index;
        low[start as usize] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start as usize] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            let parents = g.parents_of_index(v);
            if *pos < parents.len() {
                let w = parents[*pos];
                *pos += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(u, _)) = frames.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("component on stack");
                    on_stack[w as usize] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                let self_loop = component.len() == 1 && parents.contains(&v);
                if component.len() > 1 || self_loop {
                    let mut ids: Vec<EntityId> = component.into_iter().map(|i| g.id_at(i)).collect();
                    ids.sort_unstable();
                    cycles.push(ids);
                }
            }
        }
    }
    cycles.sort_unstable();
    CycleReport { cycles }
}
