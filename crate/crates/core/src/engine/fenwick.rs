//! Threshold counting over a fixed grid.

use crate::position::UnitPos;

/// Counts of particles at or below each of a fixed set of thresholds,
/// backed by a Fenwick tree over the grid cells.
#[derive(Clone, Debug)]
pub struct ThresholdIndex {
    thresholds: Vec<UnitPos>,
    tree: Vec<i64>,
}

impl ThresholdIndex {
    /// `thresholds` are sorted and deduplicated.
    pub fn new(mut thresholds: Vec<UnitPos>) -> Self {
        thresholds.sort();
        thresholds.dedup();
        let n = thresholds.len();
        ThresholdIndex {
            thresholds,
            tree: vec![0; n + 1],
        }
    }

    pub fn thresholds(&self) -> &[UnitPos] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// Cell of `p`: the first threshold with `p <= threshold`.
    #[inline]
    fn cell(&self, p: UnitPos) -> usize {
        self.thresholds.partition_point(|t| *t < p)
    }

    #[inline]
    pub fn insert(&mut self, p: UnitPos) {
        self.add(self.cell(p), 1);
    }

    #[inline]
    pub fn remove(&mut self, p: UnitPos) {
        self.add(self.cell(p), -1);
    }

    fn add(&mut self, cell: usize, delta: i64) {
        let mut i = cell + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of particles `<= thresholds[j]`.
    #[inline]
    pub fn count_le(&self, j: usize) -> u64 {
        let mut i = j + 1;
        let mut acc = 0i64;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        debug_assert!(acc >= 0);
        acc as u64
    }

    pub fn counts_into(&self, out: &mut Vec<u64>) {
        out.clear();
        out.extend((0..self.len()).map(|j| self.count_le(j)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pos(x: f64) -> UnitPos {
        UnitPos::new(x).unwrap()
    }

    #[test]
    fn closed_threshold_semantics() {
        let mut idx = ThresholdIndex::new(vec![pos(0.5), pos(0.2)]);
        for x in [0.1, 0.2, 0.5, 0.7] {
            idx.insert(pos(x));
        }
        assert_eq!(idx.thresholds()[0], pos(0.2));
        assert_eq!(idx.count_le(0), 2);
        assert_eq!(idx.count_le(1), 3);
        idx.remove(pos(0.2));
        assert_eq!(idx.count_le(0), 1);
        assert_eq!(idx.count_le(1), 2);
    }

    proptest! {
        #[test]
        fn matches_direct_counting(
            grid in prop::collection::vec(0.0f64..1.0, 1..12),
            pts in prop::collection::vec(0.0f64..1.0, 0..60),
        ) {
            let mut idx = ThresholdIndex::new(grid.iter().map(|&x| pos(x)).collect());
            for &x in &pts { idx.insert(pos(x)); }
            for (j, t) in idx.thresholds().to_vec().iter().enumerate() {
                let direct = pts.iter().filter(|&&x| x <= t.value()).count() as u64;
                prop_assert_eq!(idx.count_le(j), direct);
            }
        }
    }
}
