use fixedbitset::FixedBitSet;

pub type AtomId = usize;

/// A two-valued interpretation over a fixed Herbrand base, stored as the set
/// of true atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSet(FixedBitSet);

impl AtomSet {
    pub fn empty(base_len: usize) -> Self {
        AtomSet(FixedBitSet::with_capacity(base_len))
    }

    pub fn from_ids(base_len: usize, ids: impl IntoIterator<Item = AtomId>) -> Self {
        let mut s = Self::empty(base_len);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn base_len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, id: AtomId) -> bool {
        self.0.contains(id)
    }

    pub fn insert(&mut self, id: AtomId) {
        self.0.insert(id);
    }

    pub fn remove(&mut self, id: AtomId) {
        self.0.set(id, false);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&mut self, other: &AtomSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        let mut s = self.clone();
        s.0.intersect_with(&other.0);
        s
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        let mut s = self.clone();
        s.0.difference_with(&other.0);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let a = AtomSet::from_ids(8, [1, 3, 5]);
        let b = AtomSet::from_ids(8, [3, 4]);
        assert_eq!(a.intersection(&b).ids().collect::<Vec<_>>(), vec![3]);
        assert_eq!(a.difference(&b).ids().collect::<Vec<_>>(), vec![1, 5]);
        assert!(AtomSet::from_ids(8, [3]).is_subset(&b));
        assert_eq!(a.len(), 3);
        let mut c = a.clone();
        c.remove(1);
        assert!(!c.contains(1));
        assert!(AtomSet::empty(8).is_empty());
    }
}
