//! The proximity relation between symbols.

use std::collections::BTreeMap;

use crate::interval::Interval;
use crate::syntax::ProximityEquation;

/// A symmetric, reflexive (implicitly, at `[1,1]`) relation on symbols.
/// Deliberately not transitively closed: only stated pairs, in either
/// order, are proximate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProximityTable {
    map: BTreeMap<(String, String), Interval>,
}

impl ProximityTable {
    pub fn new() -> Self {
        ProximityTable {
            map: BTreeMap::new(),
        }
    }

    pub fn from_equations(equations: &[ProximityEquation]) -> Self {
        let mut table = ProximityTable::new();
        for eq in equations {
            table.insert(&eq.left, &eq.right, eq.degree);
        }
        table
    }

    /// Record a pair; repeating a pair overwrites its degree.
    pub fn insert(&mut self, left: &str, right: &str, degree: Interval) {
        self.map.insert(Self::key(left, right), degree);
    }

    /// Proximity degree between two symbols: `[1,1]` for identical
    /// symbols, the stored degree for stated pairs, nothing otherwise.
    pub fn degree_between(&self, x: &str, y: &str) -> Option<Interval> {
        if x == y {
            return Some(Interval::TOP);
        }
        self.map.get(&Self::key(x, y)).copied()
    }

    /// All symbols explicitly stated proximate to `x`.
    pub fn partners(&self, x: &str) -> Vec<(String, Interval)> {
        let mut out = Vec::new();
        for ((a, b), degree) in &self.map {
            if a == x {
                out.push((b.clone(), *degree));
            } else if b == x {
                out.push((a.clone(), *degree));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn key(x: &str, y: &str) -> (String, String) {
        if x <= y {
            (x.to_string(), y.to_string())
        } else {
            (y.to_string(), x.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn lookup_is_symmetric() {
        let mut table = ProximityTable::new();
        table.insert("loves", "passion", iv(0.25, 0.8));
        assert_eq!(
            table.degree_between("loves", "passion"),
            Some(iv(0.25, 0.8))
        );
        assert_eq!(
            table.degree_between("passion", "loves"),
            Some(iv(0.25, 0.8))
        );
    }

    #[test]
    fn identical_symbols_are_fully_proximate() {
        let table = ProximityTable::new();
        assert_eq!(table.degree_between("p", "p"), Some(Interval::TOP));
    }

    #[test]
    fn no_transitive_closure_is_taken() {
        let mut table = ProximityTable::new();
        table.insert("a", "b", iv(0.5, 0.6));
        table.insert("b", "c", iv(0.5, 0.6));
        assert_eq!(table.degree_between("a", "c"), None);
    }

    #[test]
    fn repeated_pairs_keep_the_last_degree() {
        let mut table = ProximityTable::new();
        table.insert("a", "b", iv(0.5, 0.6));
        table.insert("b", "a", iv(0.7, 0.8));
        assert_eq!(table.degree_between("a", "b"), Some(iv(0.7, 0.8)));
    }

    #[test]
    fn partners_collects_both_orientations() {
        let mut table = ProximityTable::new();
        table.insert("sport", "variation", iv(0.1, 0.5));
        table.insert("fun", "sport", iv(0.3, 0.8));
        let mut partners = table.partners("sport");
        partners.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            partners,
            vec![
                ("fun".to_string(), iv(0.3, 0.8)),
                ("variation".to_string(), iv(0.1, 0.5)),
            ]
        );
    }
}
