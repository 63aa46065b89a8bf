//! Binary snapshot of a [`ClassGraph`].
//!
//! Layout (little endian): magic `AXSCGRPH`, version byte, policy byte,
//! node count (u64), node ids (u64 each), class flags (one bit per node,
//! packed into bytes), root-candidate count (u64) and indices (u32 each),
//! edge count (u64) and (child, parent) index pairs (u32 each).

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{ClassGraph, RankPolicy};
use crate::model::EntityId;

const MAGIC: &[u8; 8] = b"AXSCGRPH";
const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a class graph snapshot")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u8),
    #[error("corrupt snapshot: {0}")]
    Corrupt(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

impl ClassGraph {
    pub fn write_snapshot(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.policy.to_byte()])?;
        w.write_all(&(self.ids.len() as u64).to_le_bytes())?;
        for id in &self.ids {
            w.write_all(&id.get().to_le_bytes())?;
        }
        let mut flags = vec![0u8; self.ids.len().div_ceil(8)];
        for i in self.is_class.ones() {
            flags[i / 8] |= 1 << (i % 8);
        }
        w.write_all(&flags)?;
        w.write_all(&(self.root_candidates.len() as u64).to_le_bytes())?;
        for &i in &self.root_candidates {
            w.write_all(&i.to_le_bytes())?;
        }
        w.write_all(&(self.parents.len() as u64).to_le_bytes())?;
        for child in 0..self.ids.len() as u32 {
            for &parent in self.parents_of_index(child) {
                w.write_all(&child.to_le_bytes())?;
                w.write_all(&parent.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_snapshot(mut r: impl Read) -> Result<Self, SnapshotError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let mut header = [0u8; 2];
        r.read_exact(&mut header)?;
        if header[0] != VERSION {
            return Err(SnapshotError::UnsupportedVersion(header[0]));
        }
        let policy = RankPolicy::from_byte(header[1]).ok_or(SnapshotError::Corrupt("rank policy"))?;

        let n = usize::try_from(read_u64(&mut r)?).map_err(|_| SnapshotError::Corrupt("node count"))?;
        if n > u32::MAX as usize {
            return Err(SnapshotError::Corrupt("node count"));
        }
        let mut ids = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            ids.push(EntityId::new(read_u64(&mut r)?).ok_or(SnapshotError::Corrupt("zero id"))?);
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SnapshotError::Corrupt("ids not strictly ascending"));
        }
        let mut flags = vec![0u8; n.div_ceil(8)];
        r.read_exact(&mut flags)?;
        let classes: Vec<EntityId> = (0..n)
            .filter(|&i| flags[i / 8] & (1 << (i % 8)) != 0)
            .map(|i| ids[i])
            .collect();

        let node = |i: u32| ids.get(i as usize).copied().ok_or(SnapshotError::Corrupt("node index"));
        let rc = read_u64(&mut r)?;
        let mut roots = Vec::new();
        for _ in 0..rc {
            roots.push(node(read_u32(&mut r)?)?);
        }
        let m = read_u64(&mut r)?;
        let mut edges = Vec::new();
        for _ in 0..m {
            let child = node(read_u32(&mut r)?)?;
            let parent = node(read_u32(&mut r)?)?;
            edges.push((child, parent));
        }

        let graph = ClassGraph::from_parts(policy, &classes, &roots, &edges);
        // Parent-only nodes are implied by edges; anything else is stray.
        if graph.ids != ids {
            return Err(SnapshotError::Corrupt("node table disagrees with edges"));
        }
        Ok(graph)
    }
}
