//! Randomized self-test: every module against the brute-force evaluator or
//! an exhaustive reference, on small seeded instances. The report is a
//! deterministic function of the configuration.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::gen::{self, FormulaShape, GenRng};
use crate::graph::Graph;
use crate::logic::{eval_oracle, eval_sentence, Formula, Structure};
use crate::qelim::{reduce_sentence_with, QelimError, QelimLimits};
use crate::sigma1::{BEIndex, Fault};
use crate::treedepth::{certify_forest, exact_treedepth, low_treedepth_coloring};

/// Relations of the function-free suites.
const RELATIONS: [(&str, usize); 3] = [("R", 2), ("P", 1), ("Q", 0)];
/// Relations and function of the first-order suite.
const FO_RELATIONS: [(&str, usize); 3] = [("R", 2), ("S", 2), ("P", 1)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Multiplies the default number of trials of every suite.
    pub scale: usize,
    pub max_quantifier_depth: usize,
    pub max_templates: usize,
    /// Defect injected into every forest index of the dynamic suite.
    pub fault: Option<Fault>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: 42, scale: 1, max_quantifier_depth: 6, max_templates: 4_096, fault: None }
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Trials stopped by a resource cap (reported, not failures).
    pub capped: usize,
    pub counterexample: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, ..SuiteResult::default() }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn cap(&mut self) {
        self.trials += 1;
        self.capped += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = writeln!(out, "{} trials {} failures {} capped {}", s.name, s.trials, s.failures, s.capped);
            if let Some(c) = &s.counterexample {
                let _ = writeln!(out, "{} counterexample: {c}", s.name);
            }
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn run_selftest(config: &SelftestConfig) -> SelftestReport {
    let mut rng = gen::rng(config.seed);
    let scale = config.scale.max(1);
    let suites = vec![
        sigma1_suite(&mut rng, 40 * scale),
        dynamic_suite(&mut rng, 300 * scale, config.fault),
        treedepth_suite(&mut rng, 15 * scale),
        qelim_suite(&mut rng, 40 * scale, config),
        round_trip_suite(&mut rng, 50 * scale),
    ];
    SelftestReport { suites }
}

fn function_free_instance(n: usize, rng: &mut GenRng) -> (Graph, Structure) {
    let g = gen::random_sparse(n, rng);
    let s = gen::random_structure(&g, &RELATIONS, &[], 0.7, rng);
    (g, s)
}

/// The matrix of a prenex existential sentence and its variables.
fn matrix(phi: &Formula) -> (Vec<String>, &Formula) {
    let mut vars = Vec::new();
    let mut body = phi;
    while let Formula::Exists(x, inner) = body {
        vars.push(x.clone());
        body = inner;
    }
    (vars, body)
}

/// Σ₁ answers of the index against the evaluator; witnesses are checked by
/// substitution into the matrix.
fn sigma1_suite(rng: &mut GenRng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("sigma1");
    let shape = FormulaShape { relations: &RELATIONS, functions: &[], term_nesting: 0, atoms: 3 };
    for trial in 0..trials {
        let n = rng.gen_range(1..=14);
        let (g, s) = function_free_instance(n, rng);
        let phi = gen::random_existential(rng.gen_range(1..=3), &shape, rng);
        let answer = BEIndex::build(&g, &s, 3).and_then(|mut idx| idx.query(&phi));
        let answer = match answer {
            Ok(a) => a,
            Err(e) if e.is_cap() => {
                r.cap();
                continue;
            }
            Err(e) => {
                r.check(false, || format!("trial {trial}: {phi}: {e}"));
                continue;
            }
        };
        let expected = eval_sentence(&s, &phi).expect("generated sentence fits the structure");
        let witness_ok = match &answer.witness {
            None => !answer.sat,
            Some(w) => {
                let (_, body) = matrix(&phi);
                let bindings: HashMap<String, usize> = w.iter().cloned().collect();
                eval_oracle(&s, body, &bindings).unwrap_or(false)
            }
        };
        r.check(answer.sat == expected && witness_ok, || {
            format!("trial {trial}, n = {n}: {phi}: index says {}, evaluator says {expected}", answer.render())
        });
    }
    r
}

/// Random insertions and deletions on one instance; after each, the index
/// must equal a rebuild, and every few steps a query is checked.
fn dynamic_suite(rng: &mut GenRng, steps: usize, fault: Option<Fault>) -> SuiteResult {
    let mut r = SuiteResult::new("dynamic");
    let shape = FormulaShape { relations: &RELATIONS, functions: &[], term_nesting: 0, atoms: 3 };
    let (g, s) = function_free_instance(16, rng);
    let mut idx = match BEIndex::build(&g, &s, 2) {
        Ok(idx) => idx,
        Err(e) => {
            r.check(false, || format!("build failed: {e}"));
            return r;
        }
    };
    idx.set_fault(fault);
    for step in 0..steps {
        let (name, arity) = RELATIONS[rng.gen_range(0..RELATIONS.len())];
        let tuple = gen::random_guarded_tuple(&g, arity, rng);
        let present = idx.structure().contains(name, &tuple);
        let op = if present { "del" } else { "add" };
        let applied = if present { idx.remove(name, &tuple) } else { idx.insert(name, &tuple) };
        let consistent = applied.is_ok() && idx.rebuild().is_ok_and(|fresh| idx.same_keys(&fresh));
        r.check(consistent, || {
            let elems: Vec<String> = tuple.iter().map(|v| v.to_string()).collect();
            format!("step {step}: `{op} {name} {}` leaves the index different from a rebuild", elems.join(" "))
        });
        if step % 5 == 4 {
            let phi = gen::random_existential(rng.gen_range(1..=2), &shape, rng);
            let expected = eval_sentence(idx.structure(), &phi).expect("generated sentence fits the structure");
            let got = idx.query(&phi).map(|a| a.sat);
            r.check(got == Ok(expected), || format!("step {step}: {phi}: index says {got:?}, evaluator says {expected}"));
        }
    }
    r
}

/// Colorings of order d: every union of s ≤ d classes gets a forest with the
/// ancestor property and depth ≤ 2^s − 1, and has tree-depth ≤ s.
fn treedepth_suite(rng: &mut GenRng, graphs: usize) -> SuiteResult {
    let mut r = SuiteResult::new("treedepth");
    for trial in 0..graphs {
        let n = rng.gen_range(1..=14);
        let g = gen::random_degenerate(n, 2, rng);
        for d in 1..=2 {
            let ltd = match low_treedepth_coloring(&g, d) {
                Ok(ltd) => ltd,
                Err(e) => {
                    r.check(false, || format!("graph {trial}, d = {d}: {e}"));
                    continue;
                }
            };
            let k = ltd.coloring.k;
            for classes in class_unions(k, d) {
                let members = ltd.coloring.class_mask(&classes);
                let h = g.induced(&members);
                let ok = ltd.forest_for_classes(&classes).is_ok_and(|f| certify_forest(&f, &h, classes.len()).is_ok())
                    && exact_treedepth(&h).is_ok_and(|td| td <= classes.len());
                r.check(ok, || format!("graph {trial} ({} edges), d = {d}, classes {classes:?}", g.edge_count()));
            }
        }
    }
    r
}

/// Non-empty sets of at most `d` colors out of `1..=k`.
fn class_unions(k: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for c in 1..=k {
        let extended: Vec<Vec<usize>> = out
            .iter()
            .filter(|x| x.len() < d)
            .map(|x| {
                let mut y = x.clone();
                y.push(c);
                y
            })
            .collect();
        out.extend(extended);
    }
    out.retain(|x| !x.is_empty());
    out
}

/// Quantifier elimination against the evaluator on sentences of depth ≤ 2.
fn qelim_suite(rng: &mut GenRng, trials: usize, config: &SelftestConfig) -> SuiteResult {
    let mut r = SuiteResult::new("qelim");
    let shape = FormulaShape { relations: &FO_RELATIONS, functions: &["f"], term_nesting: 1, atoms: 3 };
    let limits = QelimLimits {
        max_quantifier_depth: config.max_quantifier_depth,
        max_templates: config.max_templates,
        ..QelimLimits::default()
    };
    for trial in 0..trials {
        let n = rng.gen_range(1..=10);
        let g = gen::random_sparse(n, rng);
        let s = gen::random_structure(&g, &FO_RELATIONS, &["f"], 0.8, rng);
        let phi = gen::random_sentence(rng.gen_range(1..=2), &shape, rng);
        let expected = eval_sentence(&s, &phi).expect("generated sentence fits the structure");
        match reduce_sentence_with(&phi, &s, &g, limits) {
            Ok(red) => r.check(red.value == expected, || {
                format!("trial {trial}, n = {n}: {phi}: elimination says {}, evaluator says {expected}", red.value)
            }),
            Err(QelimError::Cap(_)) => r.cap(),
            Err(e) => r.check(false, || format!("trial {trial}: {phi}: {e}")),
        }
    }
    r
}

/// Formulas and structures survive printing and parsing.
fn round_trip_suite(rng: &mut GenRng, trials: usize) -> SuiteResult {
    let mut r = SuiteResult::new("roundtrip");
    let shape = FormulaShape { relations: &FO_RELATIONS, functions: &["f", "g"], term_nesting: 2, atoms: 4 };
    for trial in 0..trials {
        let phi = gen::random_sentence(rng.gen_range(0..=3), &shape, rng);
        let text = phi.to_string();
        r.check(Formula::parse(&text).as_ref() == Ok(&phi), || format!("formula {trial}: {text}"));
        let n = rng.gen_range(0..=12);
        let g = gen::random_sparse(n, rng);
        let s = gen::random_structure(&g, &RELATIONS, &["f"], 1.0, rng);
        let text = s.to_text();
        r.check(Structure::parse(&text).as_ref() == Ok(&s), || format!("structure {trial}:\n{text}"));
    }
    r
}
