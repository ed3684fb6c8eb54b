mod common;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::Rng;
use sparsefo::gen::{self, FormulaShape};
use sparsefo::graph::Graph;
use sparsefo::logic::Structure;
use sparsefo::sigma1::{canonical_key, BEIndex, CanonicalKey, Fault, ForestIndex, KLabelledStructure, QueryCache, Schema};
use sparsefo::treedepth::{dfs_forest, RootedForest};

const RELS: [(&str, usize); 3] = [("E", 2), ("P", 1), ("T", 3)];

/// The structure induced on `labelled` (labelled by their depth) followed
/// by `free` (unlabelled), over all facts of `s`.
fn induced_labelled(
    schema: &Schema,
    s: &Structure,
    forest: &RootedForest,
    labelled: &[usize],
    free: &[usize],
) -> KLabelledStructure {
    let elems: Vec<usize> = labelled.iter().chain(free).copied().collect();
    let mut k = KLabelledStructure::unlabelled(elems.len());
    for (i, &v) in labelled.iter().enumerate() {
        k.labels[i] = Some(forest.depth[v]);
    }
    for (rel, tuple) in schema.facts_of(s).unwrap() {
        if tuple.is_empty() {
            continue;
        }
        let mapped: Option<Vec<usize>> = tuple.iter().map(|v| elems.iter().position(|e| e == v)).collect();
        if let Some(t) = mapped {
            k.tuples.insert((rel, t));
        }
    }
    k
}

fn subsets_of<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for item in items {
        let mut more = Vec::new();
        for s in &out {
            if s.len() < max {
                let mut t: Vec<T> = s.clone();
                t.push(item.clone());
                more.push(t);
            }
        }
        out.extend(more);
    }
    out
}

/// Keys of the second list of `v` by exhaustive search: every set of
/// proper ancestors (labelled) plus every set of subtree vertices.
fn brute_list2(schema: &Schema, s: &Structure, forest: &RootedForest, v: usize, d0: usize) -> BTreeSet<CanonicalKey> {
    let path = forest.root_path(v);
    let ancestors = &path[..path.len() - 1];
    let subtree: Vec<usize> = (0..forest.n()).filter(|&w| forest.is_ancestor(v, w)).collect();
    let mut out = BTreeSet::new();
    for l in subsets_of(ancestors, d0) {
        for f in subsets_of(&subtree, d0 - l.len()) {
            out.insert(canonical_key(&induced_labelled(schema, s, forest, &l, &f)).unwrap());
        }
    }
    out
}

/// Keys of all induced substructures on at most `d0` members (the empty
/// one included).
fn brute_global(schema: &Schema, s: &Structure, forest: &RootedForest, d0: usize) -> BTreeSet<CanonicalKey> {
    let members: Vec<usize> = (0..forest.n()).filter(|&v| forest.is_member(v)).collect();
    subsets_of(&members, d0)
        .into_iter()
        .map(|f| canonical_key(&induced_labelled(schema, s, forest, &[], &f)).unwrap())
        .collect()
}

fn instance(seed: u64, n: usize) -> (Graph, Structure) {
    let mut r = gen::rng(seed);
    let g = gen::random_sparse(n, &mut r);
    let s = gen::random_structure(&g, &RELS, &[], 0.7, &mut r);
    (g, s)
}

#[test]
fn second_lists_match_exhaustive_search() {
    for seed in 0..25u64 {
        let (g, s) = instance(seed, 11);
        let members: Vec<bool> = (0..g.n()).map(|v| v % 4 != 3 || seed % 2 == 0).collect();
        let forest = dfs_forest(&g, &members);
        let s = s.induced_relations(&members);
        let schema = Arc::new(Schema::of_structure(&s).unwrap());
        let facts = schema.facts_of(&s).unwrap();
        for d0 in 1..=3 {
            let idx = ForestIndex::build(schema.clone(), &forest, &facts, d0).unwrap();
            for v in (0..g.n()).filter(|&v| members[v]) {
                assert_eq!(idx.list2_keys(v).unwrap(), brute_list2(&schema, &s, &forest, v, d0), "seed {seed} d0 {d0} v {v} path {:?}", forest.root_path(v));
            }
            let global: BTreeSet<CanonicalKey> = idx.global_keys().cloned().collect();
            assert_eq!(global, brute_global(&schema, &s, &forest, d0), "seed {seed} d0 {d0}");
        }
    }
}

#[test]
fn witnesses_decode_to_their_structures() {
    for seed in 0..15u64 {
        let (g, s) = instance(100 + seed, 14);
        let members = vec![true; g.n()];
        let forest = dfs_forest(&g, &members);
        let schema = Arc::new(Schema::of_structure(&s).unwrap());
        let idx = ForestIndex::build(schema.clone(), &forest, &schema.facts_of(&s).unwrap(), 3).unwrap();
        for key in idx.global_keys() {
            let concrete = idx.decode_global(key).unwrap();
            let distinct: HashSet<usize> = concrete.iter().copied().collect();
            assert_eq!(distinct.len(), concrete.len());
            let found = induced_labelled(&schema, &s, &forest, &[], &concrete);
            assert_eq!(&canonical_key(&found).unwrap(), key);
        }
        for v in 0..g.n() {
            for key in idx.list2_keys(v).unwrap() {
                let (entry, concrete) = idx.list2_witness(v, &key).unwrap();
                let labelled: Vec<usize> =
                    concrete.iter().zip(&entry.structure.labels).filter(|(_, l)| l.is_some()).map(|(&c, _)| c).collect();
                let free: Vec<usize> =
                    concrete.iter().zip(&entry.structure.labels).filter(|(_, l)| l.is_none()).map(|(&c, _)| c).collect();
                for &a in &labelled {
                    assert!(forest.is_ancestor(a, v) && a != v);
                }
                for &w in &free {
                    assert!(forest.is_ancestor(v, w));
                }
                assert_eq!(canonical_key(&induced_labelled(&schema, &s, &forest, &labelled, &free)).unwrap(), key);
            }
        }
    }
}

#[test]
fn updates_agree_with_rebuilds() {
    for seed in 0..6u64 {
        let (g, s) = instance(200 + seed, 16);
        let mut r = gen::rng(seed);
        let mut idx = BEIndex::build(&g, &s, 2).unwrap();
        for step in 0..60 {
            let (name, arity) = RELS[r.gen_range(0..RELS.len())];
            let tuple = gen::random_guarded_tuple(&g, arity, &mut r);
            if idx.structure().contains(name, &tuple) {
                idx.remove(name, &tuple).unwrap();
            } else {
                idx.insert(name, &tuple).unwrap();
            }
            let fresh = idx.rebuild().unwrap();
            assert!(idx.same_lists(&fresh), "seed {seed} step {step}");
        }
    }
}

#[test]
fn queries_agree_with_naive_evaluation() {
    let shape = FormulaShape { relations: &RELS, functions: &[], term_nesting: 0, atoms: 3 };
    for seed in 0..30u64 {
        let (g, s) = instance(300 + seed, 10 + (seed as usize % 12));
        let mut r = gen::rng(seed);
        let mut idx = BEIndex::build(&g, &s, 3).unwrap();
        for _ in 0..4 {
            let k = r.gen_range(1..=3);
            // Three variables over a ternary relation exceed the fact-bit cap.
            let shape = if k == 3 { FormulaShape { relations: &RELS[..2], ..shape.clone() } } else { shape.clone() };
            let phi = gen::random_existential(k, &shape, &mut r);
            let ans = idx.query(&phi).unwrap();
            assert_eq!(ans.sat, common::naive_sentence(&s, &phi), "{phi}");
            if let Some(w) = &ans.witness {
                assert!(common::witness_satisfies(&s, &phi, w), "{phi}");
            }
        }
    }
}

#[test]
fn forest_index_answers_queries_alone() {
    let shape = FormulaShape { relations: &RELS, functions: &[], term_nesting: 0, atoms: 2 };
    let cache = QueryCache::default();
    for seed in 0..10u64 {
        let (g, s) = instance(400 + seed, 12);
        let forest = dfs_forest(&g, &vec![true; g.n()]);
        let schema = Arc::new(Schema::of_structure(&s).unwrap());
        let idx = ForestIndex::build(schema.clone(), &forest, &schema.facts_of(&s).unwrap(), 2).unwrap();
        let mut r = gen::rng(seed);
        for _ in 0..5 {
            let phi = gen::random_existential(2, &shape, &mut r);
            assert_eq!(idx.query(&phi, &cache).unwrap().sat, common::naive_sentence(&s, &phi), "{phi}");
        }
    }
}

#[test]
fn skipped_third_list_updates_are_caught() {
    let mut caught = 0;
    for seed in 0..10u64 {
        let (g, s) = instance(500 + seed, 14);
        let mut idx = BEIndex::build(&g, &s, 2).unwrap();
        for i in 0..idx.subsets().len() {
            idx.forest_index_mut(i).set_fault(Some(Fault::SkipList3Update));
        }
        let mut r = gen::rng(seed);
        for _ in 0..20 {
            let tuple = gen::random_guarded_tuple(&g, 2, &mut r);
            if idx.structure().contains("E", &tuple) {
                idx.remove("E", &tuple).unwrap();
            } else {
                idx.insert("E", &tuple).unwrap();
            }
        }
        if !idx.same_lists(&idx.rebuild().unwrap()) {
            caught += 1;
        }
    }
    assert!(caught >= 8, "fault caught in only {caught} of 10 runs");
}

#[test]
fn malformed_updates_are_rejected() {
    let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    let mut s = Structure::new(4);
    s.add_relation("E", 2).unwrap();
    let mut idx = BEIndex::build(&g, &s, 2).unwrap();
    assert!(idx.insert("E", &[0, 2]).is_err());
    assert!(idx.insert("F", &[0, 1]).is_err());
    assert!(idx.insert("E", &[0]).is_err());
    assert!(idx.remove("E", &[0, 1]).is_err());
    assert!(idx.insert("E", &[0, 1]).unwrap().changed);
    assert!(!idx.insert("E", &[0, 1]).unwrap().changed);
    assert!(idx.remove("E", &[0, 1]).unwrap().changed);
}
