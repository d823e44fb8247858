use serde::Serialize;

use super::{ClassMode, FrequencyClassSet};
use crate::data::JoinValue;
use crate::rational::{serde_ratio, Ratio};

/// Level-one node of the frequency tree: one frequency class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassNode {
    pub label: String,
    #[serde(with = "serde_ratio")]
    pub key: Ratio,
    pub leaves: Vec<JoinValue>,
}

/// Two-level tree: an implicit root, one node per class (descending key),
/// one leaf per member value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyTree {
    pub mode: ClassMode,
    pub classes: Vec<ClassNode>,
}

impl FrequencyTree {
    pub fn leaf_count(&self) -> usize {
        self.classes.iter().map(|c| c.leaves.len()).sum()
    }

    /// Depth below the root: 2 for any tree with a leaf.
    pub fn depth(&self) -> usize {
        if self.leaf_count() > 0 {
            2
        } else if self.classes.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, JoinValue)> + '_ {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.leaves.iter().map(move |&v| (k, v)))
    }
}

pub fn build_frequency_tree(cs: &FrequencyClassSet) -> FrequencyTree {
    FrequencyTree {
        mode: cs.mode,
        classes: cs
            .classes
            .iter()
            .enumerate()
            .map(|(k, c)| ClassNode {
                label: format!("C{}", k + 1),
                key: c.key.clone(),
                leaves: c.members.keys().copied().collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{relative_frequencies, ValueHistogram};
    use crate::freqclass::exact_classes;

    #[test]
    fn single_leaf_tree() {
        let h = ValueHistogram::from_dense(&[0, 4]).unwrap();
        let tree = build_frequency_tree(&exact_classes(&relative_frequencies(&h).unwrap()));
        assert_eq!(tree.classes.len(), 1);
        assert_eq!(tree.leaf_count(), 1);
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.classes[0].leaves, vec![JoinValue(1)]);
    }

    #[test]
    fn four_class_tree_over_six_values() {
        // C1 = {b2}, C2 = {b1, b6}, C3 = {b3, b5}, C4 = {b4} with b_i = value i-1
        let h = ValueHistogram::from_dense(&[4, 5, 3, 1, 3, 4]).unwrap();
        let tree = build_frequency_tree(&exact_classes(&relative_frequencies(&h).unwrap()));
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.classes.len(), 4);
        assert_eq!(tree.leaf_count(), 6);
        let labels: Vec<&str> = tree.classes.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["C1", "C2", "C3", "C4"]);
        let leaves: Vec<Vec<u32>> = tree
            .classes
            .iter()
            .map(|c| c.leaves.iter().map(|v| v.0).collect())
            .collect();
        assert_eq!(leaves, vec![vec![1], vec![0, 5], vec![2, 4], vec![3]]);
        assert!(tree.classes.windows(2).all(|w| w[0].key > w[1].key));
    }
}
