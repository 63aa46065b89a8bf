use std::fmt;

use fixedbitset::FixedBitSet;

use super::ClassGraph;
use crate::model::EntityId;

/// A set of nodes of one [`ClassGraph`], plus at most one id the graph does
/// not know (a query root without statements is still a member of its own
/// subclass set).
#[derive(Clone)]
pub struct ClassSet<'g> {
    graph: &'g ClassGraph,
    bits: FixedBitSet,
    outside: Option<EntityId>,
}

impl<'g> ClassSet<'g> {
    pub(crate) fn from_bits(graph: &'g ClassGraph, bits: FixedBitSet, outside: Option<EntityId>) -> Self {
        debug_assert!(outside.is_none_or(|id| !graph.contains(id)));
        Self { graph, bits, outside }
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub(crate) fn outside(&self) -> Option<EntityId> {
        self.outside
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..) + usize::from(self.outside.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: EntityId) -> bool {
        match self.graph.index_of(id) {
            Some(i) => self.bits.contains(i as usize),
            None => self.outside == Some(id),
        }
    }

    /// Ascending ids.
    pub fn iter(&self) -> impl Iterator<Item = EntityId> + '_ {
        let mut inner = self.bits.ones().map(|i| self.graph.id_at(i as u32)).peekable();
        let mut outside = self.outside;
        std::iter::from_fn(move || match (inner.peek(), outside) {
            (Some(&next), Some(o)) if o < next => outside.take(),
            (Some(_), _) => inner.next(),
            (None, _) => outside.take(),
        })
    }

    pub fn to_vec(&self) -> Vec<EntityId> {
        self.iter().collect()
    }
}

impl fmt::Debug for ClassSet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl PartialEq for ClassSet<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}
