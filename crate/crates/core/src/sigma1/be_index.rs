//! Σ₁ index over a structure guarded by a graph of bounded expansion: one
//! forest index per set of `d0` color classes of a low tree-depth coloring.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::forest_index::{Fault, ForestIndex};
use super::labelled::CanonicalKey;
use super::query::{QueryAnswer, QueryCache};
use super::{IndexError, Schema};
use crate::augment::AugmentLimits;
use crate::graph::Graph;
use crate::logic::{is_guarded, Formula, Structure};
use crate::treedepth::{certify_forest, dfs_forest_local, low_treedepth_coloring_with, LocalIds, LowTDColoring};

/// Resource limits of the index build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeLimits {
    /// Maximum number of color subsets (forest indexes).
    pub max_subsets: usize,
    pub augment: AugmentLimits,
}

impl Default for BeLimits {
    fn default() -> Self {
        BeLimits { max_subsets: 100_000, augment: AugmentLimits::default() }
    }
}

/// Effect of one update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateReport {
    /// Whether the structure changed.
    pub changed: bool,
    /// Forest indexes updated.
    pub forests_touched: usize,
    /// Forest vertices whose lists were recomputed, over all touched forests.
    pub vertices_recomputed: u64,
}

/// Cumulative work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BeCounters {
    pub build_work: u64,
    pub updates: u64,
    pub forests_touched: u64,
    pub vertices_recomputed: u64,
    pub queries: u64,
    pub query_work: u64,
}

/// The composed index (one forest index per `d0`-subset of colors).
#[derive(Clone, Debug)]
pub struct BEIndex {
    schema: Arc<Schema>,
    guard: Graph,
    structure: Structure,
    d0: usize,
    limits: BeLimits,
    ltd: LowTDColoring,
    colors: usize,
    subsets: Vec<Vec<usize>>,
    subset_ids: HashMap<Vec<usize>, usize>,
    forests: Vec<ForestIndex>,
    global: BTreeMap<CanonicalKey, BTreeSet<usize>>,
    cache: Arc<QueryCache>,
    pub counters: BeCounters,
}

/// Binomial coefficient, saturating.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All `k`-subsets of `pool` (sorted input gives sorted subsets), in
/// lexicographic order.
fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < k - cur.len() {
                break;
            }
            cur.push(pool[i]);
            go(pool, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

impl BEIndex {
    pub fn build(guard: &Graph, s: &Structure, d0: usize) -> Result<BEIndex, IndexError> {
        Self::build_with(guard, s, d0, BeLimits::default())
    }

    pub fn build_with(guard: &Graph, s: &Structure, d0: usize, limits: BeLimits) -> Result<BEIndex, IndexError> {
        if d0 == 0 || d0 > super::MAX_D0 {
            return Err(IndexError::BadOrder(d0));
        }
        let schema = Arc::new(Schema::of_structure(s)?);
        if !is_guarded(s, guard)? {
            return Err(IndexError::NotGuarded { rel: "*".into(), tuple: Vec::new() });
        }
        let ltd = low_treedepth_coloring_with(guard, d0, limits.augment)?;
        Self::build_on_coloring(guard, s, d0, limits, schema, ltd)
    }

    /// Builds every list from scratch on top of a coloring of `guard`.
    fn build_on_coloring(
        guard: &Graph,
        s: &Structure,
        d0: usize,
        limits: BeLimits,
        schema: Arc<Schema>,
        ltd: LowTDColoring,
    ) -> Result<BEIndex, IndexError> {
        let colors = ltd.coloring.k.max(d0);
        let count = binomial(colors, d0);
        if count > limits.max_subsets {
            return Err(IndexError::Cap(format!(
                "{count} color subsets (K = {colors}, d0 = {d0}) exceed the limit of {}",
                limits.max_subsets
            )));
        }
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); colors + 1];
        for (v, &c) in ltd.coloring.colors.iter().enumerate() {
            classes[c].push(v);
        }
        // Facts bucketed by their color sets.
        let mut buckets: HashMap<Vec<usize>, Vec<(usize, Vec<usize>)>> = HashMap::new();
        for (rel, tuple) in schema.facts_of(s)? {
            let mut cs: Vec<usize> = tuple.iter().map(|&v| ltd.coloring.colors[v]).collect();
            cs.sort_unstable();
            cs.dedup();
            if cs.len() <= d0 {
                buckets.entry(cs).or_default().push((rel, tuple));
            }
        }
        let pool: Vec<usize> = (1..=colors).collect();
        let subsets = combinations(&pool, d0);
        let mut scratch = LocalIds::new(guard.n());
        let mut forests = Vec::with_capacity(subsets.len());
        let mut build_work = ltd.chain.pair_checks + guard.n() as u64;
        for x in &subsets {
            let mut members: Vec<usize> = x.iter().flat_map(|&c| classes[c].iter().copied()).collect();
            members.sort_unstable();
            let (forest, local) = dfs_forest_local(guard, &members, &mut scratch);
            certify_forest(&forest, &local, d0)?;
            let mut facts = Vec::new();
            for sub in (0..=d0).flat_map(|k| combinations(x, k)) {
                if let Some(b) = buckets.get(&sub) {
                    facts.extend(b.iter().cloned());
                }
            }
            let idx = ForestIndex::build_local(schema.clone(), forest, members.clone(), &facts, d0)?;
            build_work += idx.counters.build_work + members.len() as u64;
            forests.push(idx);
        }
        let subset_ids = subsets.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        let mut global: BTreeMap<CanonicalKey, BTreeSet<usize>> = BTreeMap::new();
        for (i, f) in forests.iter().enumerate() {
            for key in f.global_keys() {
                global.entry(key.clone()).or_default().insert(i);
            }
        }
        Ok(BEIndex {
            schema,
            guard: guard.clone(),
            structure: s.clone(),
            d0,
            limits,
            ltd,
            colors,
            subsets,
            subset_ids,
            forests,
            global,
            cache: Arc::new(QueryCache::default()),
            counters: BeCounters { build_work, ..BeCounters::default() },
        })
    }

    /// A fresh index over the current structure. The coloring depends on
    /// the guard only, which updates never change, so it is reused; every
    /// forest and list is built from scratch.
    pub fn rebuild(&self) -> Result<BEIndex, IndexError> {
        let schema = Arc::new(Schema::of_structure(&self.structure)?);
        Self::build_on_coloring(&self.guard, &self.structure, self.d0, self.limits, schema, self.ltd.clone())
    }

    /// Exact equality of every forest's lists and of the composed global map.
    pub fn same_lists(&self, other: &BEIndex) -> bool {
        self.subsets == other.subsets
            && self.global == other.global
            && self.forests.iter().zip(&other.forests).all(|(a, b)| a.same_lists(b))
    }

    /// Equality of key sets only.
    pub fn same_keys(&self, other: &BEIndex) -> bool {
        self.subsets == other.subsets
            && self.global == other.global
            && self.forests.iter().zip(&other.forests).all(|(a, b)| a.same_keys(b))
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn coloring(&self) -> &LowTDColoring {
        &self.ltd
    }

    /// Number of colors after padding to at least `d0`.
    pub fn color_count(&self) -> usize {
        self.colors
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn forest_index(&self, i: usize) -> &ForestIndex {
        &self.forests[i]
    }

    /// Injects (or clears) a defect in every forest index.
    pub fn set_fault(&mut self, fault: Option<Fault>) {
        for f in &mut self.forests {
            f.set_fault(fault);
        }
    }

    pub fn forest_index_mut(&mut self, i: usize) -> &mut ForestIndex {
        &mut self.forests[i]
    }

    pub fn global_len(&self) -> usize {
        self.global.len()
    }

    /// Subsets whose forest index receives a fact on these vertices.
    pub fn subsets_for(&self, tuple: &[usize]) -> Vec<usize> {
        let mut cs: Vec<usize> = tuple.iter().map(|&v| self.ltd.coloring.colors[v]).collect();
        cs.sort_unstable();
        cs.dedup();
        if cs.len() > self.d0 {
            return Vec::new();
        }
        let rest: Vec<usize> = (1..=self.colors).filter(|c| !cs.contains(c)).collect();
        combinations(&rest, self.d0 - cs.len())
            .into_iter()
            .map(|extra| {
                let mut x = cs.clone();
                x.extend(extra);
                x.sort_unstable();
                self.subset_ids[&x]
            })
            .collect()
    }

    fn check_fact(&self, rel: &str, tuple: &[usize]) -> Result<usize, IndexError> {
        let id = self.schema.id(rel).ok_or_else(|| IndexError::UnknownRelation(rel.to_string()))?;
        let arity = self.schema.arity(id).expect("known id");
        if arity != tuple.len() {
            return Err(IndexError::Arity { rel: rel.to_string(), expected: arity, got: tuple.len() });
        }
        if tuple.iter().any(|&v| v >= self.guard.n()) || !self.guard.is_clique(tuple) {
            return Err(IndexError::NotGuarded { rel: rel.to_string(), tuple: tuple.to_vec() });
        }
        Ok(id)
    }

    /// Inserts a fact (no-op if present).
    pub fn insert(&mut self, rel: &str, tuple: &[usize]) -> Result<UpdateReport, IndexError> {
        let id = self.check_fact(rel, tuple)?;
        if !self.structure.insert(rel, tuple.to_vec())? {
            return Ok(UpdateReport::default());
        }
        Ok(self.route(id, tuple, true))
    }

    /// Removes a fact; fails if absent.
    pub fn remove(&mut self, rel: &str, tuple: &[usize]) -> Result<UpdateReport, IndexError> {
        let id = self.check_fact(rel, tuple)?;
        if !self.structure.remove(rel, tuple)? {
            return Err(IndexError::Absent { rel: rel.to_string(), tuple: tuple.to_vec() });
        }
        Ok(self.route(id, tuple, false))
    }

    fn route(&mut self, id: usize, tuple: &[usize], insert: bool) -> UpdateReport {
        let targets = self.subsets_for(tuple);
        let mut report = UpdateReport { changed: true, forests_touched: targets.len(), vertices_recomputed: 0 };
        for x in targets {
            let f = &mut self.forests[x];
            let before: BTreeSet<CanonicalKey> = f.global_keys().cloned().collect();
            let recomputed = f.counters.vertices_recomputed;
            if insert {
                f.insert_tuple(id, tuple).expect("validated fact fits every target forest");
            } else {
                f.remove_tuple(id, tuple).expect("fact present in every target forest");
            }
            report.vertices_recomputed += f.counters.vertices_recomputed - recomputed;
            let after: BTreeSet<CanonicalKey> = f.global_keys().cloned().collect();
            for key in before.difference(&after) {
                let xs = self.global.get_mut(key).expect("key registered");
                xs.remove(&x);
                if xs.is_empty() {
                    self.global.remove(key);
                }
            }
            for key in after.difference(&before) {
                self.global.entry(key.clone()).or_default().insert(x);
            }
        }
        self.counters.updates += 1;
        self.counters.forests_touched += report.forests_touched as u64;
        self.counters.vertices_recomputed += report.vertices_recomputed;
        report
    }

    /// Decides an existential sentence with at most `d0` variables; a SAT
    /// answer carries a witness verified against the current structure.
    pub fn query(&mut self, phi: &Formula) -> Result<QueryAnswer, IndexError> {
        let q = self.cache.get(phi, &self.schema, self.d0)?;
        let nullary: BTreeSet<usize> = (0..self.schema.len())
            .filter(|&r| self.schema.arity(r) == Some(0) && self.structure.contains(self.schema.name(r), &[]))
            .collect();
        let forests = &self.forests;
        let globals = self.global.iter().map(|(key, xs)| {
            let x = *xs.first().expect("non-empty");
            (key, &forests[x].global_entry(key).expect("registered key").structure)
        });
        let (hit, work) = q.scan(globals, &nullary);
        self.counters.queries += 1;
        self.counters.query_work += work;
        let Some((key, assignment)) = hit else {
            return Ok(QueryAnswer { sat: false, witness: None, work });
        };
        let x = *self.global[&key].first().expect("non-empty");
        let concrete = self.forests[x].decode_global(&key).ok_or(IndexError::BadWitness)?;
        let values: Vec<usize> = assignment.iter().map(|&e| concrete[e]).collect();
        let schema = &self.schema;
        let structure = &self.structure;
        if !q.verify(&values, |r, t| structure.contains(schema.name(r), t)) {
            return Err(IndexError::BadWitness);
        }
        let witness = q.variables().iter().cloned().zip(values).collect();
        Ok(QueryAnswer { sat: true, witness: Some(witness), work })
    }
}

impl ForestIndex {
    /// Decides an existential sentence on the structure stored in this
    /// forest index alone.
    pub fn query(&self, phi: &Formula, cache: &QueryCache) -> Result<QueryAnswer, IndexError> {
        let q = cache.get(phi, self.schema(), self.d0())?;
        let globals = self.global_keys().map(|k| (k, &self.global_entry(k).expect("listed key").structure));
        let (hit, work) = q.scan(globals, self.nullary_facts());
        let Some((key, assignment)) = hit else {
            return Ok(QueryAnswer { sat: false, witness: None, work });
        };
        let concrete = self.decode_global(&key).ok_or(IndexError::BadWitness)?;
        let values: Vec<usize> = assignment.iter().map(|&e| concrete[e]).collect();
        if !q.verify(&values, |r, t| self.contains(r, t)) {
            return Err(IndexError::BadWitness);
        }
        let witness = q.variables().iter().cloned().zip(values).collect();
        Ok(QueryAnswer { sat: true, witness: Some(witness), work })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_combinations() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(combinations(&[1, 2, 3, 4], 2).len(), 6);
        assert_eq!(combinations(&[1, 2], 0), vec![Vec::<usize>::new()]);
    }
}
