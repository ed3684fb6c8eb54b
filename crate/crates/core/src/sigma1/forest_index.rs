//! Per-forest Σ₁ index: for every forest vertex, the tuples ending at it,
//! the labelled hollow structures realized below it, and which children
//! realize each structure; plus the global list of small induced
//! substructures, all maintained under tuple insertions and deletions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::labelled::{canonical_form, CanonicalKey, KLabelledStructure};
use super::matching::assign_distinct;
use super::{IndexError, Schema};
use crate::treedepth::RootedForest;

/// Where an element of a stored structure comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// The vertex at this depth on the current root path (the owner itself
    /// when the depth equals the owner's depth).
    Path(usize),
    /// Element `elem` of the structure chosen from part `part`.
    Child { part: usize, elem: usize },
}

/// Why a structure was included: the children (with their keys) whose
/// structures were merged, and the origin of every element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Certificate {
    pub parts: Vec<(usize, CanonicalKey)>,
    pub origin: Vec<Origin>,
}

/// A stored structure (elements in canonical order) with its certificate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Entry {
    pub structure: KLabelledStructure,
    pub cert: Certificate,
}

/// The children of one vertex that realize one key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Realizers {
    pub mask: u64,
    pub unlabelled: usize,
    pub children: BTreeSet<usize>,
}

/// Deliberate defects for exercising the self-test harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Updates recompute second lists but never refresh the parent's
    /// third list.
    SkipList3Update,
}

/// Work counters of one index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IndexCounters {
    /// Multisets of child structures examined, vertices processed.
    pub build_work: u64,
    /// Vertices whose second list was recomputed by updates.
    pub vertices_recomputed: u64,
    /// Second-list recomputations including the virtual root.
    pub list_recomputations: u64,
}

/// The index over one rooted forest. Vertices are stored under local
/// identifiers `0..m`; the public interface speaks global identifiers.
#[derive(Clone, Debug)]
pub struct ForestIndex {
    schema: Arc<Schema>,
    forest: RootedForest,
    globals: Vec<usize>,
    locals: HashMap<usize, usize>,
    d0: usize,
    nullary: BTreeSet<usize>,
    list1: Vec<BTreeSet<(usize, Vec<usize>)>>,
    list2: Vec<BTreeMap<CanonicalKey, Entry>>,
    list3: Vec<BTreeMap<CanonicalKey, Realizers>>,
    top: BTreeMap<CanonicalKey, Realizers>,
    global: BTreeMap<CanonicalKey, Entry>,
    fault: Option<Fault>,
    pub counters: IndexCounters,
}

impl ForestIndex {
    /// Builds the index for `forest` (over global vertex identifiers, with
    /// its member set) and the given facts `(relation id, tuple)`.
    pub fn build(
        schema: Arc<Schema>,
        forest: &RootedForest,
        facts: &[(usize, Vec<usize>)],
        d0: usize,
    ) -> Result<ForestIndex, IndexError> {
        let globals: Vec<usize> = (0..forest.n()).filter(|&v| forest.is_member(v)).collect();
        let locals: HashMap<usize, usize> = globals.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let parent = globals.iter().map(|&v| locals[&forest.parent[v]]).collect();
        let local = RootedForest::from_parents(parent, vec![true; globals.len()]);
        Self::build_local(schema, local, globals, facts, d0)
    }

    /// Builds the index from a forest on local identifiers, `globals[i]`
    /// being the global name of local vertex `i`.
    pub fn build_local(
        schema: Arc<Schema>,
        forest: RootedForest,
        globals: Vec<usize>,
        facts: &[(usize, Vec<usize>)],
        d0: usize,
    ) -> Result<ForestIndex, IndexError> {
        if d0 == 0 || d0 > super::MAX_D0 {
            return Err(IndexError::BadOrder(d0));
        }
        if forest.height() >= 63 {
            return Err(IndexError::TooDeep(forest.height()));
        }
        let m = globals.len();
        let locals = globals.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut idx = ForestIndex {
            schema,
            forest,
            globals,
            locals,
            d0,
            nullary: BTreeSet::new(),
            list1: vec![BTreeSet::new(); m],
            list2: vec![BTreeMap::new(); m],
            list3: vec![BTreeMap::new(); m],
            top: BTreeMap::new(),
            global: BTreeMap::new(),
            fault: None,
            counters: IndexCounters::default(),
        };
        for (rel, tuple) in facts {
            idx.place(*rel, tuple)?;
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(idx.forest.depth[v]));
        for v in order {
            let list = idx.compute_list2(v);
            idx.counters.build_work += 1;
            idx.list2[v] = list;
            idx.link_into_parent(v, &BTreeMap::new());
        }
        idx.global = idx.compute_global();
        Ok(idx)
    }

    pub fn set_fault(&mut self, fault: Option<Fault>) {
        self.fault = fault;
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    /// Forest on local identifiers.
    pub fn forest(&self) -> &RootedForest {
        &self.forest
    }

    /// Global vertex identifiers covered by this index, ascending.
    pub fn vertices(&self) -> &[usize] {
        &self.globals
    }

    fn local(&self, v: usize) -> Result<usize, IndexError> {
        self.locals.get(&v).copied().ok_or(IndexError::NotInForest(v))
    }

    /// Converts a global tuple to local identifiers and checks that it lies
    /// on one root path; returns the deepest local element.
    fn localize(&self, rel: usize, tuple: &[usize]) -> Result<(Vec<usize>, Option<usize>), IndexError> {
        let arity = self.schema.arity(rel).ok_or(IndexError::UnknownRelationId(rel))?;
        if arity != tuple.len() {
            return Err(IndexError::Arity { rel: self.schema.name(rel).to_string(), expected: arity, got: tuple.len() });
        }
        let local: Vec<usize> = tuple.iter().map(|&v| self.local(v)).collect::<Result<_, _>>()?;
        let deepest = local.iter().copied().max_by_key(|&v| (self.forest.depth[v], v));
        if let Some(d) = deepest {
            for &e in &local {
                if self.forest.ancestor_at(d, self.forest.depth[e]) != e {
                    return Err(IndexError::NotGuarded { rel: self.schema.name(rel).to_string(), tuple: tuple.to_vec() });
                }
            }
        }
        Ok((local, deepest))
    }

    fn place(&mut self, rel: usize, tuple: &[usize]) -> Result<bool, IndexError> {
        let (local, deepest) = self.localize(rel, tuple)?;
        Ok(match deepest {
            None => self.nullary.insert(rel),
            Some(d) => self.list1[d].insert((rel, local)),
        })
    }

    /// Adds a fact; returns whether it was new.
    pub fn insert_tuple(&mut self, rel: usize, tuple: &[usize]) -> Result<bool, IndexError> {
        let (local, deepest) = self.localize(rel, tuple)?;
        let Some(d) = deepest else {
            return Ok(self.nullary.insert(rel));
        };
        if !self.list1[d].insert((rel, local)) {
            return Ok(false);
        }
        self.refresh(d);
        Ok(true)
    }

    /// Removes a fact; fails if it is absent.
    pub fn remove_tuple(&mut self, rel: usize, tuple: &[usize]) -> Result<(), IndexError> {
        let (local, deepest) = self.localize(rel, tuple)?;
        let removed = match deepest {
            None => self.nullary.remove(&rel),
            Some(d) => self.list1[d].remove(&(rel, local)),
        };
        if !removed {
            return Err(IndexError::Absent { rel: self.schema.name(rel).to_string(), tuple: tuple.to_vec() });
        }
        if let Some(d) = deepest {
            self.refresh(d);
        }
        Ok(())
    }

    /// True when the fact is stored.
    pub fn contains(&self, rel: usize, tuple: &[usize]) -> bool {
        match self.localize(rel, tuple) {
            Ok((_, None)) => self.nullary.contains(&rel),
            Ok((local, Some(d))) => self.list1[d].contains(&(rel, local)),
            Err(_) => false,
        }
    }

    pub fn nullary_facts(&self) -> &BTreeSet<usize> {
        &self.nullary
    }

    /// Recomputes the second lists along the root path of `v`, bottom-up,
    /// then the global list.
    fn refresh(&mut self, v: usize) {
        let path = self.forest.root_path(v);
        for &u in path.iter().rev() {
            let new = self.compute_list2(u);
            let old = std::mem::replace(&mut self.list2[u], new);
            self.counters.vertices_recomputed += 1;
            self.counters.list_recomputations += 1;
            if self.fault != Some(Fault::SkipList3Update) {
                self.link_into_parent(u, &old);
            }
        }
        self.global = self.compute_global();
        self.counters.list_recomputations += 1;
    }

    /// Updates the third list of `v`'s parent (or the root aggregation)
    /// after `v`'s second list changed from `old`.
    fn link_into_parent(&mut self, v: usize, old: &BTreeMap<CanonicalKey, Entry>) {
        let p = self.forest.parent[v];
        let target = if p == v { &mut self.top } else { &mut self.list3[p] };
        for key in old.keys() {
            if !self.list2[v].contains_key(key) {
                if let Some(r) = target.get_mut(key) {
                    r.children.remove(&v);
                    if r.children.is_empty() {
                        target.remove(key);
                    }
                }
            }
        }
        for (key, entry) in &self.list2[v] {
            target
                .entry(key.clone())
                .or_insert_with(|| Realizers {
                    mask: entry.structure.label_mask(),
                    unlabelled: entry.structure.unlabelled_count(),
                    children: BTreeSet::new(),
                })
                .children
                .insert(v);
        }
    }

    /// Second list of `v` from its first list and its third list.
    fn compute_list2(&mut self, v: usize) -> BTreeMap<CanonicalKey, Entry> {
        let depth = self.forest.depth[v];
        let path = self.forest.root_path(v);
        let mut out = BTreeMap::new();
        let mut by_mask: BTreeMap<u64, Vec<(&CanonicalKey, &Realizers)>> = BTreeMap::new();
        for (key, r) in &self.list3[v] {
            if r.unlabelled > 0 {
                by_mask.entry(r.mask).or_default().push((key, r));
            }
        }
        let mut work = 0u64;
        for labels in subsets_up_to(depth - 1, self.d0) {
            for include_self in [false, true] {
                if labels.len() + usize::from(include_self) > self.d0 {
                    continue;
                }
                let mut base_depths = labels.clone();
                if include_self {
                    base_depths.push(depth);
                }
                let mask = base_depths.iter().fold(0u64, |m, &d| m | 1 << d);
                let mut base = KLabelledStructure::unlabelled(base_depths.len());
                for (i, &d) in labels.iter().enumerate() {
                    base.labels[i] = Some(d);
                }
                if include_self {
                    // facts at v inside W0: elements are path vertices at the chosen depths
                    for (rel, tuple) in &self.list1[v] {
                        let mapped: Option<Vec<usize>> = tuple
                            .iter()
                            .map(|&e| base_depths.iter().position(|&d| path[d - 1] == e))
                            .collect();
                        if let Some(t) = mapped {
                            base.tuples.insert((*rel, t));
                        }
                    }
                }
                let origin: Vec<Origin> = base_depths.iter().map(|&d| Origin::Path(d)).collect();
                let candidates = by_mask.get(&mask).map(Vec::as_slice).unwrap_or(&[]);
                let budget = self.d0 - base_depths.len();
                work += combine(
                    &base,
                    &origin,
                    &base_depths,
                    candidates,
                    budget,
                    |child, key| self.list2[child].get(key).map(|e| &e.structure),
                    &mut out,
                );
            }
        }
        self.counters.build_work += work;
        out
    }

    /// Global list: structures assembled from the roots' lists.
    fn compute_global(&mut self) -> BTreeMap<CanonicalKey, Entry> {
        let mut out = BTreeMap::new();
        let candidates: Vec<(&CanonicalKey, &Realizers)> =
            self.top.iter().filter(|(_, r)| r.unlabelled > 0 && r.mask == 0).collect();
        let base = KLabelledStructure::unlabelled(0);
        let work = combine(&base, &[], &[], &candidates, self.d0, |child, key| self.list2[child].get(key).map(|e| &e.structure), &mut out);
        self.counters.build_work += work;
        out
    }

    /// Keys of the global list.
    pub fn global_keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.global.keys()
    }

    pub fn global_entry(&self, key: &CanonicalKey) -> Option<&Entry> {
        self.global.get(key)
    }

    pub fn global_len(&self) -> usize {
        self.global.len()
    }

    /// Concrete global vertices for the elements of a global-list structure.
    pub fn decode_global(&self, key: &CanonicalKey) -> Option<Vec<usize>> {
        let entry = self.global.get(key)?;
        let mut out = Vec::with_capacity(entry.structure.size);
        for o in &entry.cert.origin {
            match o {
                Origin::Child { part, elem } => {
                    let (child, ref ckey) = entry.cert.parts[*part];
                    out.push(self.decode_local(child, ckey)?[*elem]);
                }
                Origin::Path(_) => return None,
            }
        }
        Some(out.into_iter().map(|v| self.globals[v]).collect())
    }

    fn decode_local(&self, v: usize, key: &CanonicalKey) -> Option<Vec<usize>> {
        let entry = self.list2[v].get(key)?;
        let mut out = Vec::with_capacity(entry.structure.size);
        for o in &entry.cert.origin {
            out.push(match o {
                Origin::Path(d) => self.forest.ancestor_at(v, *d),
                Origin::Child { part, elem } => {
                    let (child, ref ckey) = entry.cert.parts[*part];
                    self.decode_local(child, ckey)?[*elem]
                }
            });
        }
        Some(out)
    }

    /// First list of a vertex (global identifiers).
    pub fn list1(&self, v: usize) -> Result<BTreeSet<(usize, Vec<usize>)>, IndexError> {
        let l = self.local(v)?;
        Ok(self.list1[l].iter().map(|(r, t)| (*r, t.iter().map(|&e| self.globals[e]).collect())).collect())
    }

    /// Keys of the second list of a vertex.
    pub fn list2_keys(&self, v: usize) -> Result<BTreeSet<CanonicalKey>, IndexError> {
        Ok(self.list2[self.local(v)?].keys().cloned().collect())
    }

    /// Second-list entry of a vertex together with the concrete vertices of
    /// its elements.
    pub fn list2_witness(&self, v: usize, key: &CanonicalKey) -> Option<(&Entry, Vec<usize>)> {
        let l = self.local(v).ok()?;
        let entry = self.list2[l].get(key)?;
        let concrete = self.decode_local(l, key)?;
        Some((entry, concrete.into_iter().map(|e| self.globals[e]).collect()))
    }

    /// Third list of a vertex: key → realizing children (global identifiers).
    pub fn list3(&self, v: usize) -> Result<BTreeMap<CanonicalKey, BTreeSet<usize>>, IndexError> {
        let l = self.local(v)?;
        Ok(self.list3[l]
            .iter()
            .map(|(k, r)| (k.clone(), r.children.iter().map(|&c| self.globals[c]).collect()))
            .collect())
    }

    /// Exact equality of every list, certificates included.
    pub fn same_lists(&self, other: &ForestIndex) -> bool {
        self.globals == other.globals
            && self.forest == other.forest
            && self.nullary == other.nullary
            && self.list1 == other.list1
            && self.list2 == other.list2
            && self.list3 == other.list3
            && self.top == other.top
            && self.global == other.global
    }

    /// Equality of the key sets of every list (ignoring certificates).
    pub fn same_keys(&self, other: &ForestIndex) -> bool {
        let keys2 = |i: &ForestIndex| i.list2.iter().map(|l| l.keys().cloned().collect::<Vec<_>>()).collect::<Vec<_>>();
        self.globals == other.globals
            && self.list1 == other.list1
            && keys2(self) == keys2(other)
            && self.list3 == other.list3
            && self.top == other.top
            && self.global.keys().eq(other.global.keys())
    }

    /// Every stored fact, global identifiers.
    pub fn facts(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = self.nullary.iter().map(|&r| (r, Vec::new())).collect();
        for l in &self.list1 {
            out.extend(l.iter().map(|(r, t)| (*r, t.iter().map(|&e| self.globals[e]).collect())));
        }
        out.sort();
        out
    }
}

/// All subsets of `{1..=max}` with at most `limit` elements, ascending.
fn subsets_up_to(max: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..limit {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(1, |&l: &usize| l + 1);
            for d in start..=max {
                let mut t: Vec<usize> = s.clone();
                t.push(d);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Merges `base` with every multiset of child structures from `candidates`
/// (total unlabelled elements at most `budget`) that can be realized by
/// distinct children, inserting each result under its canonical key.
/// Labelled elements of a child structure are identified with the base
/// elements carrying the same depth (`base_depths[i]` for element `i`).
/// Returns the number of multisets examined.
fn combine<'a>(
    base: &KLabelledStructure,
    base_origin: &[Origin],
    base_depths: &[usize],
    candidates: &[(&'a CanonicalKey, &'a Realizers)],
    budget: usize,
    structure_of: impl Fn(usize, &CanonicalKey) -> Option<&'a KLabelledStructure>,
    out: &mut BTreeMap<CanonicalKey, Entry>,
) -> u64 {
    let mut work = 0;
    let mut chosen: Vec<usize> = Vec::new();
    // Depth-first enumeration of non-decreasing index sequences.
    fn rec<'a>(
        start: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        candidates: &[(&'a CanonicalKey, &'a Realizers)],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(chosen);
        for i in start..candidates.len() {
            let cost = candidates[i].1.unlabelled;
            if cost <= remaining {
                chosen.push(i);
                rec(i, remaining - cost, chosen, candidates, visit);
                chosen.pop();
            }
        }
    }
    let mut visit = |multiset: &[usize]| {
        work += 1;
        // Distinct children: slot i may use any of the first `len` realizers.
        let slots = multiset.len();
        let options: Vec<Vec<usize>> =
            multiset.iter().map(|&i| candidates[i].1.children.iter().copied().take(slots).collect()).collect();
        let Some(children) = assign_distinct(&options) else { return };
        let mut s = base.clone();
        let mut origin = base_origin.to_vec();
        let mut parts = Vec::with_capacity(slots);
        for (part, (&i, &child)) in multiset.iter().zip(&children).enumerate() {
            let key = candidates[i].0;
            // Only a stale third list (fault injection) lacks the entry.
            let Some(cs) = structure_of(child, key) else { return };
            let mut map = Vec::with_capacity(cs.size);
            for (e, label) in cs.labels.iter().enumerate() {
                match label {
                    Some(d) => map.push(base_depths.iter().position(|x| x == d).expect("label domain matches")),
                    None => {
                        map.push(s.size);
                        s.size += 1;
                        s.labels.push(None);
                        origin.push(Origin::Child { part, elem: e });
                    }
                }
            }
            for (rel, t) in &cs.tuples {
                s.tuples.insert((*rel, t.iter().map(|&e| map[e]).collect()));
            }
            parts.push((child, key.clone()));
        }
        let (key, perm) = canonical_form(&s).expect("structures stay within the element limit");
        if out.contains_key(&key) {
            return;
        }
        let structure = s.trunk().permuted(&perm);
        let mut new_origin = origin.clone();
        for (e, o) in origin.into_iter().enumerate() {
            new_origin[perm[e]] = o;
        }
        out.insert(key, Entry { structure, cert: Certificate { parts, origin: new_origin } });
    };
    rec(0, budget, &mut chosen, candidates, &mut visit);
    work
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets() {
        assert_eq!(subsets_up_to(0, 3), vec![Vec::<usize>::new()]);
        assert_eq!(subsets_up_to(3, 2).len(), 1 + 3 + 3);
        assert_eq!(subsets_up_to(4, 4).len(), 16);
    }
}
