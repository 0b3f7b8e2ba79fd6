//! Sparse weighted sets: the documents being sketched.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SetError {
    #[error("element {element_id} has negative weight {weight}")]
    NegativeWeight { element_id: u64, weight: f64 },
    #[error("element {element_id} has non-finite weight")]
    NonFiniteWeight { element_id: u64 },
    #[error("element {element_id} appears more than once")]
    DuplicateElement { element_id: u64 },
}

/// A document as a sparse map from element id to strictly positive weight.
///
/// Entries are held sorted by element id, so construction order never
/// influences anything downstream. Zero weights mean "absent" and are
/// dropped on construction; negative or non-finite weights are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeightedSet {
    doc_id: u64,
    label: String,
    entries: Vec<(u64, f64)>,
}

impl SparseWeightedSet {
    pub fn new(
        doc_id: u64,
        entries: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<Self, SetError> {
        let mut entries: Vec<(u64, f64)> = entries.into_iter().collect();
        for &(element_id, weight) in &entries {
            if !weight.is_finite() {
                return Err(SetError::NonFiniteWeight { element_id });
            }
            if weight < 0.0 {
                return Err(SetError::NegativeWeight { element_id, weight });
            }
        }
        entries.retain(|&(_, w)| w > 0.0);
        entries.sort_by_key(|&(id, _)| id);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(SetError::DuplicateElement { element_id: w[0].0 });
        }
        Ok(Self {
            doc_id,
            label: String::new(),
            entries,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn doc_id(&self) -> u64 {
        self.doc_id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Entries sorted ascending by element id, all weights > 0.
    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, element_id: u64) -> Option<f64> {
        self.entries
            .binary_search_by_key(&element_id, |&(id, _)| id)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.entries.iter().map(|&(_, w)| w).reduce(f64::max)
    }

    /// Copy with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(
            factor.is_finite() && factor > 0.0,
            "scale factor must be positive and finite"
        );
        Self {
            doc_id: self.doc_id,
            label: self.label.clone(),
            entries: self
                .entries
                .iter()
                .map(|&(id, w)| (id, w * factor))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_sorted_regardless_of_insertion_order() {
        let a = SparseWeightedSet::new(0, vec![(5, 1.0), (1, 2.0), (3, 0.5)]).unwrap();
        let b = SparseWeightedSet::new(0, vec![(3, 0.5), (5, 1.0), (1, 2.0)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries(), &[(1, 2.0), (3, 0.5), (5, 1.0)]);
    }

    #[test]
    fn zero_weights_are_dropped_as_absent() {
        let s = SparseWeightedSet::new(0, vec![(1, 0.0), (2, 1.5)]).unwrap();
        assert_eq!(s.entries(), &[(2, 1.5)]);
        assert_eq!(s.weight(1), None);
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert_eq!(
            SparseWeightedSet::new(0, vec![(4, -1.0)]).unwrap_err(),
            SetError::NegativeWeight {
                element_id: 4,
                weight: -1.0
            }
        );
        assert_eq!(
            SparseWeightedSet::new(0, vec![(4, f64::NAN)]).unwrap_err(),
            SetError::NonFiniteWeight { element_id: 4 }
        );
        assert_eq!(
            SparseWeightedSet::new(0, vec![(4, 1.0), (4, 2.0)]).unwrap_err(),
            SetError::DuplicateElement { element_id: 4 }
        );
    }

    #[test]
    fn aggregates_and_lookup() {
        let s = SparseWeightedSet::new(7, vec![(1, 2.0), (2, 1.0), (9, 4.0)])
            .unwrap()
            .with_label("doc-7");
        assert_eq!(s.doc_id(), 7);
        assert_eq!(s.label(), "doc-7");
        assert_eq!(s.len(), 3);
        assert_eq!(s.weight(9), Some(4.0));
        assert_eq!(s.total_weight(), 7.0);
        assert_eq!(s.max_weight(), Some(4.0));
        assert_eq!(SparseWeightedSet::new(0, vec![]).unwrap().max_weight(), None);
    }

    #[test]
    fn scaling_multiplies_every_weight() {
        let s = SparseWeightedSet::new(0, vec![(1, 2.0), (2, 1.0)]).unwrap();
        assert_eq!(s.scaled(0.5).entries(), &[(1, 1.0), (2, 0.5)]);
    }
}
