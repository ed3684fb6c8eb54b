mod common;

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use sparsefo::gen::{self, FormulaShape};
use sparsefo::graph::Graph;
use sparsefo::logic::{is_guarded, Compiled, Formula, Structure, Term};
use sparsefo::qelim::{
    build_xi, build_xi_reduced, canonical_template, eliminate_exists, enumerate_templates, reduce_sentence, to_simple,
    Names, QelimError, QelimLimits, QelimStats,
};
use sparsefo::treedepth::{dfs_forest, RootedForest};

const RELS: [(&str, usize); 3] = [("R", 2), ("S", 2), ("P", 1)];

fn shape(atoms: usize) -> FormulaShape<'static> {
    FormulaShape { relations: &RELS, functions: &["f"], term_nesting: 1, atoms }
}

/// Calls `visit` on every tuple in `0..n` of length `len`.
fn all_tuples(n: usize, len: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut tuple = vec![0; len];
    if n == 0 && len > 0 {
        return;
    }
    loop {
        visit(&tuple);
        let mut i = 0;
        while i < len {
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if i == len {
            return;
        }
    }
}

fn differential(depth: usize, count: u64, max_n: usize) -> (usize, usize) {
    let mut capped = 0;
    let mut agreed = 0;
    for seed in 0..count {
        let mut rng = gen::rng(seed * 7919 + depth as u64);
        let n = 1 + (seed as usize * 5) % max_n;
        let g = gen::random_sparse(n, &mut rng);
        let s = gen::random_structure(&g, &RELS, &["f"], 0.8, &mut rng);
        let phi = gen::random_sentence(depth, &shape(3), &mut rng);
        let expected = common::naive_sentence(&s, &phi);
        match reduce_sentence(&phi, &s, &g) {
            Ok(r) => {
                assert_eq!(r.value, expected, "seed {seed}, n = {n}: {phi}\n{}", r.trace.join("\n"));
                agreed += 1;
            }
            Err(QelimError::Cap(_)) => capped += 1,
            Err(e) => panic!("seed {seed}: {phi}: {e}"),
        }
    }
    (agreed, capped)
}

#[test]
fn depth_one_sentences_match_naive_evaluation() {
    let (agreed, capped) = differential(1, 150, 14);
    assert_eq!(capped, 0);
    assert_eq!(agreed, 150);
}

#[test]
fn depth_two_sentences_match_naive_evaluation() {
    let (agreed, capped) = differential(2, 100, 12);
    assert!(agreed >= 95, "{agreed} agreed, {capped} capped");
}

#[test]
fn depth_three_sentences_match_naive_evaluation() {
    let (agreed, capped) = differential(3, 60, 10);
    assert!(agreed >= 50, "{agreed} agreed, {capped} capped");
}

/// One elimination step on formulas with one or two other free variables,
/// checked pointwise against naive evaluation; the expanded structure must
/// stay guarded by the returned graph.
#[test]
fn single_eliminations_match_naive_evaluation() {
    let mut checked = 0;
    for seed in 0..120u64 {
        let mut rng = gen::rng(seed + 1000);
        let n = 2 + (seed as usize * 3) % 11;
        let g = gen::random_sparse(n, &mut rng);
        let s = gen::random_structure(&g, &RELS, &["f"], 1.0, &mut rng);
        let nvars = 2 + (seed as usize % 2);
        let vars: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
        let psi = gen::random_quantifier_free(&vars, &shape(4), &mut rng);
        if !psi.free_vars().contains("x0") {
            continue;
        }
        let mut names = Names::new(&s, &psi);
        let mut stats = QelimStats::default();
        let mut trace = Vec::new();
        let e = eliminate_exists("x0", &psi, &s, &g, &mut names, QelimLimits::default(), &mut stats, &mut trace).unwrap();
        assert!(e.formula.is_quantifier_free());
        assert!(is_guarded(&e.structure, &e.guard).unwrap(), "seed {seed}");
        let free: Vec<String> = vars[1..].to_vec();
        let compiled = Compiled::new(&e.structure, &e.formula, &free).unwrap();
        let phi = Formula::exists("x0", psi.clone());
        all_tuples(n, free.len(), &mut |tuple| {
            let mut env: HashMap<String, usize> = free.iter().cloned().zip(tuple.iter().copied()).collect();
            let expected = common::naive_holds(&s, &phi, &mut env);
            assert_eq!(compiled.eval(tuple), expected, "seed {seed}, tuple {tuple:?}: {psi}\n=> {}", e.formula);
            checked += 1;
        });
    }
    assert!(checked > 1000, "{checked}");
}

fn random_forest(n: usize, rng: &mut gen::GenRng) -> RootedForest {
    // Parents point to smaller vertices, so there are no cycles.
    let parent: Vec<usize> = (0..n).map(|v| if v == 0 || rng.gen_bool(0.25) { v } else { rng.gen_range(0..v) }).collect();
    RootedForest::from_parents(parent, vec![true; n])
}

/// Both tracing formulas hold exactly for the value tuples whose canonical
/// template is the given one.
#[test]
fn tracing_formulas_recognize_their_templates() {
    let terms = [Term::var("x"), Term::var("y"), Term::app("g", Term::var("x"))];
    for seed in 0..12u64 {
        let mut rng = gen::rng(seed + 77);
        let n = 6;
        let forest = random_forest(n, &mut rng);
        let mut s = Structure::new(n);
        s.set_function("p", forest.parent.clone()).unwrap();
        let g: Vec<usize> = forest.parent.iter().enumerate().map(|(v, &w)| if rng.gen_bool(0.5) { v } else { w }).collect();
        s.set_function("g", g.clone()).unwrap();
        let templates = enumerate_templates(&terms, forest.height(), 10_000).unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        for t in &templates {
            let full = Compiled::new(&s, &build_xi(t, "p"), &vars).unwrap();
            let reduced = Compiled::new(&s, &build_xi_reduced(t, "p"), &vars).unwrap();
            all_tuples(n, 2, &mut |tuple| {
                let values: BTreeMap<Term, usize> =
                    [(terms[0].clone(), tuple[0]), (terms[1].clone(), tuple[1]), (terms[2].clone(), g[tuple[0]])].into();
                let traces = canonical_template(&values, &forest).key() == t.key();
                assert_eq!(full.eval(tuple), traces, "seed {seed}, {tuple:?}, template {}", t.key());
                assert_eq!(reduced.eval(tuple), traces, "seed {seed}, {tuple:?}, template {}", t.key());
            });
        }
    }
}

/// Every tuple of a forest traces exactly one enumerated template.
#[test]
fn enumerated_templates_partition_tuples() {
    let terms = [Term::var("x"), Term::var("y"), Term::var("z")];
    for seed in 0..8u64 {
        let forest = random_forest(7, &mut gen::rng(seed));
        let templates = enumerate_templates(&terms, forest.height(), 10_000).unwrap();
        let keys: Vec<String> = templates.iter().map(|t| t.key()).collect();
        let mut distinct = keys.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), keys.len());
        all_tuples(7, 3, &mut |tuple| {
            let values: BTreeMap<Term, usize> = terms.iter().cloned().zip(tuple.iter().copied()).collect();
            let key = canonical_template(&values, &forest).key();
            assert_eq!(keys.iter().filter(|k| **k == key).count(), 1, "{tuple:?}");
        });
    }
}

/// Composing nested function applications keeps the meaning of a formula
/// and yields a structure guarded by the extended graph.
#[test]
fn composition_keeps_meaning_and_guardedness() {
    for seed in 0..40u64 {
        let mut rng = gen::rng(seed + 500);
        let n = 2 + seed as usize % 12;
        let g = gen::random_sparse(n, &mut rng);
        let s = gen::random_structure(&g, &RELS, &["f", "h"], 0.8, &mut rng);
        let vars = vec!["x".to_string(), "y".to_string()];
        let deep = FormulaShape { relations: &RELS, functions: &["f", "h"], term_nesting: 4, atoms: 4 };
        let phi = gen::random_quantifier_free(&vars, &deep, &mut rng);
        let mut names = Names::new(&s, &phi);
        let out = to_simple(&phi, &s, &g, &mut names).unwrap();
        assert!(out.formula.is_simple());
        assert!(is_guarded(&out.structure, &out.guard).unwrap(), "seed {seed}");
        let before = Compiled::new(&s, &phi, &vars).unwrap();
        let after = Compiled::new(&out.structure, &out.formula, &vars).unwrap();
        all_tuples(n, 2, &mut |tuple| assert_eq!(before.eval(tuple), after.eval(tuple), "seed {seed}: {phi}"));
    }
}

#[test]
fn inputs_are_validated() {
    let g = Graph::from_edges(3, [(0, 1)]).unwrap();
    let mut s = Structure::new(3);
    s.add_relation("R", 2).unwrap();
    s.insert("R", vec![0, 2]).unwrap();
    let phi = Formula::parse("E x. E y. R(x, y)").unwrap();
    assert!(matches!(reduce_sentence(&phi, &s, &g), Err(QelimError::NotGuarded)));
    let open = Formula::parse("E x. R(x, y)").unwrap();
    let guard = Graph::from_edges(3, [(0, 2)]).unwrap();
    assert!(matches!(reduce_sentence(&open, &s, &guard), Err(QelimError::NotSentence(_))));
    assert!(reduce_sentence(&phi, &s, &guard).unwrap().value);
    let limits = QelimLimits { max_quantifier_depth: 1, ..QelimLimits::default() };
    assert!(matches!(sparsefo::qelim::reduce_sentence_with(&phi, &s, &guard, limits), Err(QelimError::Cap(_))));
}

#[test]
fn empty_universe_is_handled() {
    let s = Structure::new(0);
    let g = Graph::empty(0);
    for (text, expected) in [("E x. x = x", false), ("A x. F", true), ("!(E x. A y. x = y)", true)] {
        let phi = Formula::parse(text).unwrap();
        assert_eq!(reduce_sentence(&phi, &s, &g).unwrap().value, expected, "{text}");
    }
}

#[test]
fn forest_of_a_path_is_a_chain() {
    // Sanity check of the forest construction the engine relies on.
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let f = dfs_forest(&g, &[true; 4]);
    assert_eq!(f.height(), 4);
}
