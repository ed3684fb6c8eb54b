//! Small labelled structures and their canonical keys.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("structure with {0} elements exceeds the canonicalization limit of {1}")]
    TooLarge(usize, usize),
    #[error("labelling is not injective")]
    NotInjective,
}

/// Largest structure accepted by [`canonical_key`] (8! orderings).
pub const MAX_CANONICAL_ELEMENTS: usize = 8;

/// A structure on elements `0..size` over a function-free language given by
/// relation ids, with an injective partial labelling of its elements by
/// depths `1..k−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KLabelledStructure {
    pub size: usize,
    /// `labels[e]` is the depth label of element `e`, if any.
    pub labels: Vec<Option<usize>>,
    /// `(relation id, elements)` facts.
    pub tuples: BTreeSet<(usize, Vec<usize>)>,
}

/// Encoding of the k-isomorphism class of a labelled structure's trunk.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub Vec<u8>);

impl KLabelledStructure {
    pub fn unlabelled(size: usize) -> Self {
        KLabelledStructure { size, labels: vec![None; size], tuples: BTreeSet::new() }
    }

    /// Bitmask of the labels in use.
    pub fn label_mask(&self) -> u64 {
        self.labels.iter().flatten().fold(0, |m, &l| m | 1 << l)
    }

    pub fn unlabelled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    /// Removes the tuples whose elements are all labelled.
    pub fn trunk(&self) -> KLabelledStructure {
        let tuples = self
            .tuples
            .iter()
            .filter(|(_, t)| t.iter().any(|&e| self.labels[e].is_none()))
            .cloned()
            .collect();
        KLabelledStructure { size: self.size, labels: self.labels.clone(), tuples }
    }

    pub fn is_hollow(&self) -> bool {
        self.trunk() == *self
    }

    /// Renames element `e` to `perm[e]`.
    pub fn permuted(&self, perm: &[usize]) -> KLabelledStructure {
        let mut labels = vec![None; self.size];
        for (e, &l) in self.labels.iter().enumerate() {
            labels[perm[e]] = l;
        }
        let tuples = self.tuples.iter().map(|(r, t)| (*r, t.iter().map(|&e| perm[e]).collect())).collect();
        KLabelledStructure { size: self.size, labels, tuples }
    }

    fn check(&self) -> Result<(), KeyError> {
        if self.size > MAX_CANONICAL_ELEMENTS {
            return Err(KeyError::TooLarge(self.size, MAX_CANONICAL_ELEMENTS));
        }
        let mut seen = 0u64;
        for &l in self.labels.iter().flatten() {
            if seen & 1 << l != 0 {
                return Err(KeyError::NotInjective);
            }
            seen |= 1 << l;
        }
        Ok(())
    }
}

fn encode(s: &KLabelledStructure, perm: &[usize], out: &mut Vec<u8>) {
    out.clear();
    out.push(s.size as u8);
    let mut labels = vec![u8::MAX; s.size];
    for (e, l) in s.labels.iter().enumerate() {
        if let Some(l) = l {
            labels[perm[e]] = *l as u8;
        }
    }
    out.extend_from_slice(&labels);
    let mut facts: Vec<(usize, Vec<u8>)> = s
        .tuples
        .iter()
        .filter(|(_, t)| t.iter().any(|&e| s.labels[e].is_none()))
        .map(|(r, t)| (*r, t.iter().map(|&e| perm[e] as u8).collect()))
        .collect();
    facts.sort();
    for (r, t) in facts {
        out.push(r as u8);
        out.push(t.len() as u8);
        out.extend_from_slice(&t);
    }
}

/// Canonical key of the trunk, together with the element permutation that
/// realizes it (labelled elements first by label, then the unlabelled
/// elements in the order minimizing the encoding).
pub fn canonical_form(s: &KLabelledStructure) -> Result<(CanonicalKey, Vec<usize>), KeyError> {
    s.check()?;
    let mut labelled: Vec<usize> = (0..s.size).filter(|&e| s.labels[e].is_some()).collect();
    labelled.sort_by_key(|&e| s.labels[e]);
    let mut free: Vec<usize> = (0..s.size).filter(|&e| s.labels[e].is_none()).collect();
    let base = labelled.len();
    let mut perm = vec![0usize; s.size];
    for (i, &e) in labelled.iter().enumerate() {
        perm[e] = i;
    }
    let mut best: Option<(Vec<u8>, Vec<usize>)> = None;
    let mut buf = Vec::new();
    // Heap's algorithm over the unlabelled elements.
    let m = free.len();
    let mut c = vec![0usize; m];
    let mut visit = |free: &[usize], perm: &mut Vec<usize>, best: &mut Option<(Vec<u8>, Vec<usize>)>| {
        for (i, &e) in free.iter().enumerate() {
            perm[e] = base + i;
        }
        encode(s, perm, &mut buf);
        if best.as_ref().is_none_or(|(b, _)| buf < *b) {
            *best = Some((buf.clone(), perm.clone()));
        }
    };
    visit(&free, &mut perm, &mut best);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                free.swap(0, i);
            } else {
                free.swap(c[i], i);
            }
            visit(&free, &mut perm, &mut best);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let (key, perm) = best.expect("at least one ordering");
    Ok((CanonicalKey(key), perm))
}

/// Canonical key of the trunk: equal keys iff the trunks are isomorphic by a
/// label-preserving isomorphism (in particular, the label domains agree).
pub fn canonical_key(s: &KLabelledStructure) -> Result<CanonicalKey, KeyError> {
    canonical_form(s).map(|(k, _)| k)
}
