use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::syntax::Loc;

/// Ordered location bindings. Lookups see the rightmost binding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Substitution {
    bindings: Vec<(Loc, f64)>,
    latest: BTreeMap<Loc, f64>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a binding on the right (`ρ ⊕ (ℓ ↦ n)`).
    pub fn push(&mut self, loc: Loc, value: f64) {
        self.bindings.push((loc, value));
        self.latest.insert(loc, value);
    }

    pub fn with(mut self, loc: Loc, value: f64) -> Self {
        self.push(loc, value);
        self
    }

    pub fn extend_from(&mut self, other: &Substitution) {
        for &(l, v) in &other.bindings {
            self.push(l, v);
        }
    }

    pub fn get(&self, loc: Loc) -> Option<f64> {
        self.latest.get(&loc).copied()
    }

    pub fn bindings(&self) -> &[(Loc, f64)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Effective value of every bound location.
    pub fn resolved(&self) -> &BTreeMap<Loc, f64> {
        &self.latest
    }

    /// Locations whose effective value differs from `base`, in id order.
    pub fn delta(&self, base: &Substitution) -> Vec<(Loc, f64)> {
        self.latest
            .iter()
            .filter(|(l, v)| base.get(**l).is_none_or(|b| b.to_bits() != v.to_bits()))
            .map(|(l, v)| (*l, *v))
            .collect()
    }
}

impl FromIterator<(Loc, f64)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Loc, f64)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (l, v) in iter {
            s.push(l, v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rightmost_binding_wins() {
        let s: Substitution = [(Loc(1), 1.0), (Loc(1), 2.0)].into_iter().collect();
        assert_eq!(s.get(Loc(1)), Some(2.0));
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(Loc(2)), None);
    }

    #[test]
    fn delta_reports_changed_locations() {
        let base: Substitution = [(Loc(1), 1.0), (Loc(2), 2.0)].into_iter().collect();
        let next = base.clone().with(Loc(2), 5.0).with(Loc(1), 1.0);
        assert_eq!(next.delta(&base), alloc::vec![(Loc(2), 5.0)]);
    }
}
