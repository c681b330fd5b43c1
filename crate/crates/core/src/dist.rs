use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::atomset::AtomSet;
use crate::ground::GroundTheory;
use crate::prob::Prob;

/// A finite distribution over total interpretations, with exact masses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Distribution {
    map: BTreeMap<AtomSet, Prob>,
}

impl Distribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(set: AtomSet) -> Self {
        let mut d = Self::new();
        d.add(set, Prob::one());
        d
    }

    /// Adds mass to an interpretation; zero masses are not recorded.
    pub fn add(&mut self, set: AtomSet, p: Prob) {
        if p.is_zero() {
            return;
        }
        let e = self.map.entry(set).or_insert_with(Prob::zero);
        *e += p;
    }

    pub fn merge_scaled(&mut self, other: &Distribution, factor: &Prob) {
        for (s, p) in &other.map {
            self.add(s.clone(), p * factor);
        }
    }

    pub fn get(&self, set: &AtomSet) -> Prob {
        self.map.get(set).cloned().unwrap_or_else(Prob::zero)
    }

    pub fn total(&self) -> Prob {
        self.map.values().sum()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AtomSet, &Prob)> {
        self.map.iter()
    }

    /// Total mass of interpretations satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&AtomSet) -> bool) -> Prob {
        self.map.iter().filter(|(s, _)| pred(s)).map(|(_, p)| p.clone()).sum()
    }

    /// Rows as (atom names, probability), sorted by descending probability and
    /// then lexicographically by the rendered atom list.
    pub fn rows(&self, theory: &GroundTheory) -> Vec<(Vec<String>, Prob)> {
        let mut rows: Vec<(Vec<String>, Prob)> =
            self.map.iter().map(|(s, p)| (theory.set_names(s), p.clone())).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// First interpretation whose masses differ between the two distributions.
    pub fn first_difference<'a>(&'a self, other: &'a Distribution) -> Option<(&'a AtomSet, Prob, Prob)> {
        self.map
            .keys()
            .chain(other.map.keys())
            .find(|s| self.get(s) != other.get(s))
            .map(|s| (s, self.get(s), other.get(s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;

    #[test]
    fn accumulates_and_skips_zero() {
        let mut d = Distribution::new();
        d.add(AtomSet::from_ids(2, [0]), ratio(1, 4));
        d.add(AtomSet::from_ids(2, [0]), ratio(1, 4));
        d.add(AtomSet::from_ids(2, [1]), Prob::zero());
        assert_eq!(d.len(), 1);
        assert_eq!(d.total(), ratio(1, 2));
        let mut e = Distribution::new();
        e.merge_scaled(&d, &ratio(1, 2));
        assert_eq!(e.get(&AtomSet::from_ids(2, [0])), ratio(1, 4));
        assert!(d.first_difference(&e).is_some());
        assert!(d.first_difference(&d).is_none());
    }
}
