use std::collections::HashMap;

use super::FeatureSet;

/// Sorted, duplicate-free feature indices of a binary feature vector. The
/// classifier's bias is implicit and never stored here.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVector(Vec<u32>);

impl SparseVector {
    pub fn from_unsorted(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SparseVector(indices)
    }

    /// Caller guarantees strictly increasing input.
    pub fn from_sorted(indices: Vec<u32>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SparseVector(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Frozen feature-string to index mapping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, u32>,
    strings: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from strings in index order. Duplicates are an
    /// error (`Err` carries the offending string).
    pub fn from_strings(strings: Vec<String>) -> Result<Self, String> {
        let mut index = HashMap::with_capacity(strings.len());
        for (i, s) in strings.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(s.clone());
            }
        }
        Ok(Vocabulary { index, strings })
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn get(&self, feature: &str) -> Option<u32> {
        self.index.get(feature).copied()
    }

    pub fn string(&self, index: u32) -> Option<&str> {
        self.strings.get(index as usize).map(String::as_str)
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    /// Unknown features are dropped.
    pub fn encode(&self, features: &FeatureSet) -> SparseVector {
        self.encode_iter(features.iter())
    }

    pub fn encode_iter<'a>(&self, features: impl IntoIterator<Item = &'a str>) -> SparseVector {
        SparseVector::from_unsorted(features.into_iter().filter_map(|f| self.get(f)).collect())
    }
}

/// Counts feature occurrences in first-occurrence order; frozen into a
/// [`Vocabulary`] by [`VocabularyBuilder::finish`].
#[derive(Clone, Debug, Default)]
pub struct VocabularyBuilder {
    index: HashMap<String, u32>,
    strings: Vec<String>,
    counts: Vec<usize>,
}

impl VocabularyBuilder {
    pub fn new() -> Self {
        VocabularyBuilder::default()
    }

    /// Records one occurrence and returns the provisional id.
    pub fn observe(&mut self, feature: &str) -> u32 {
        match self.index.get(feature) {
            Some(&id) => {
                self.counts[id as usize] += 1;
                id
            }
            None => {
                let id = self.strings.len() as u32;
                self.index.insert(feature.to_string(), id);
                self.strings.push(feature.to_string());
                self.counts.push(1);
                id
            }
        }
    }

    /// Like [`observe`](Self::observe) but without counting.
    pub fn intern(&mut self, feature: &str) -> u32 {
        match self.index.get(feature) {
            Some(&id) => id,
            None => {
                let id = self.strings.len() as u32;
                self.index.insert(feature.to_string(), id);
                self.strings.push(feature.to_string());
                self.counts.push(0);
                id
            }
        }
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn string(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    /// Keeps features seen at least `min_count` times, preserving
    /// first-occurrence order. Also returns the provisional-to-final id map.
    pub fn finish(self, min_count: usize) -> (Vocabulary, Vec<Option<u32>>) {
        let mut remap = Vec::with_capacity(self.strings.len());
        let mut strings = Vec::new();
        for (s, &c) in self.strings.into_iter().zip(&self.counts) {
            if c >= min_count {
                remap.push(Some(strings.len() as u32));
                strings.push(s);
            } else {
                remap.push(None);
            }
        }
        let index = strings
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        (Vocabulary { index, strings }, remap)
    }
}

/// Indexes every feature occurring at least `min_count` times across `sets`,
/// in first-occurrence order (each set is scanned in its sorted order).
pub fn fit_vocabulary<'a>(
    sets: impl IntoIterator<Item = &'a FeatureSet>,
    min_count: usize,
) -> Vocabulary {
    let mut builder = VocabularyBuilder::new();
    for set in sets {
        for f in set.iter() {
            builder.observe(f);
        }
    }
    builder.finish(min_count.max(1)).0
}
