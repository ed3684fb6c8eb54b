//! The elimination loop: one existential quantifier at a time, innermost
//! first, over a growing expansion of the structure.

use std::collections::{BTreeMap, BTreeSet};

use crate::augment::kth_augmentation_with;
use crate::graph::{degeneracy_order, greedy_color, Graph};
use crate::logic::{is_guarded, Compiled, Formula, LogicError, Structure, Term};
use crate::treedepth::dfs_forest;

use super::eliminate::{eliminate_template, TemplateElimination};
use super::normal::{eliminate_forall, miniscope, rename_apart, simplify};
use super::simple::to_simple;
use super::template::{canonical_template, Template};
use super::{Names, QelimError, QelimLimits};

/// Work performed by a reduction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QelimStats {
    /// Existential quantifiers eliminated.
    pub eliminations: usize,
    /// Maximal palettes over all eliminations.
    pub palettes: usize,
    /// Realized templates over all palettes.
    pub templates: usize,
    /// Template eliminations performed.
    pub pieces: usize,
    /// Function-composition rounds.
    pub compositions: usize,
    /// Subformulas with at most one free variable replaced by a relation.
    pub materialized: usize,
    /// Fresh symbols created.
    pub fresh_symbols: usize,
    pub max_formula_size: usize,
    pub max_guard_edges: usize,
    pub max_forest_height: usize,
}

/// Outcome of [`reduce_sentence`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub value: bool,
    pub stats: QelimStats,
    /// One line per step.
    pub trace: Vec<String>,
}

/// Result of eliminating one quantifier.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// Quantifier-free equivalent over `structure`.
    pub formula: Formula,
    /// The input structure expanded by the fresh symbols.
    pub structure: Structure,
    /// A graph guarding `structure`.
    pub guard: Graph,
}

/// Decides a sentence by quantifier elimination with default limits.
pub fn reduce_sentence(phi: &Formula, s: &Structure, guard: &Graph) -> Result<Reduction, QelimError> {
    reduce_sentence_with(phi, s, guard, QelimLimits::default())
}

/// Decides a sentence on a structure guarded by `guard`: quantifiers are
/// eliminated innermost first until a quantifier-free sentence remains,
/// which is then evaluated.
pub fn reduce_sentence_with(phi: &Formula, s: &Structure, guard: &Graph, limits: QelimLimits) -> Result<Reduction, QelimError> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(QelimError::NotSentence(free.into_iter().collect::<Vec<_>>().join(", ")));
    }
    if guard.n() != s.size() {
        return Err(LogicError::SizeMismatch { structure: s.size(), guard: guard.n() }.into());
    }
    if !is_guarded(s, guard)? {
        return Err(QelimError::NotGuarded);
    }
    if phi.quantifier_depth() > limits.max_quantifier_depth {
        return Err(QelimError::Cap(format!(
            "quantifier depth {} exceeds {}",
            phi.quantifier_depth(),
            limits.max_quantifier_depth
        )));
    }
    let mut stats = QelimStats::default();
    let mut trace = Vec::new();
    let mut counter = 0;
    let mut f = eliminate_forall(phi);
    if s.size() == 0 {
        // Over the empty universe every existential statement fails.
        f = simplify(&existentials_false(&f));
        trace.push("empty universe: existential subformulas are false".to_string());
    } else {
        f = simplify(&miniscope(&rename_apart(&f, "v", &mut counter)));
    }
    let base_symbols: BTreeSet<String> =
        s.relations().map(|(r, _)| r.to_string()).chain(s.functions().map(|(g, _)| g.to_string())).collect();
    let mut names = Names::new(s, phi);
    let mut st = s.clone();
    let mut g = guard.clone();
    trace.push(format!("normalized: {f}"));
    loop {
        stats.max_formula_size = stats.max_formula_size.max(f.size());
        stats.max_guard_edges = stats.max_guard_edges.max(g.edge_count());
        if f.size() > limits.max_formula_size {
            return Err(QelimError::Cap(format!("formula size {} exceeds {}", f.size(), limits.max_formula_size)));
        }
        if f.is_quantifier_free() {
            let value = Compiled::new(&st, &f, &[])?.eval(&[]);
            trace.push(format!("value: {value}"));
            return Ok(Reduction { value, stats, trace });
        }
        if !f.is_simple() {
            let simplified = to_simple(&f, &st, &g, &mut names)?;
            stats.compositions += simplified.rounds;
            stats.fresh_symbols += simplified.composed.len();
            trace.push(format!(
                "composed {} function pairs in {} rounds; guard has {} edges",
                simplified.composed.len(),
                simplified.rounds,
                simplified.guard.edge_count()
            ));
            f = simplified.formula;
            st = simplified.structure;
            g = simplified.guard;
        }
        let mut done = false;
        let mut step = |x0: &str, body: &Formula| -> Result<Formula, QelimError> {
            let e = eliminate_exists(x0, body, &st, &g, &mut names, limits, &mut stats, &mut trace)?;
            st = e.structure;
            g = e.guard;
            Ok(e.formula)
        };
        f = simplify(&replace_innermost(&f, &mut done, &mut step)?);
        // Drop fresh symbols the formula no longer mentions.
        let mut keep = base_symbols.clone();
        keep.extend(f.relations().into_iter().map(|(r, _)| r));
        keep.extend(f.functions());
        st = st.restrict_to(&keep);
    }
}

fn existentials_false(f: &Formula) -> Formula {
    match f {
        Formula::Exists(..) => Formula::False,
        Formula::Not(g) => Formula::not(existentials_false(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(existentials_false).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(existentials_false).collect()),
        other => other.clone(),
    }
}

fn replace_innermost(
    f: &Formula,
    done: &mut bool,
    step: &mut dyn FnMut(&str, &Formula) -> Result<Formula, QelimError>,
) -> Result<Formula, QelimError> {
    if *done {
        return Ok(f.clone());
    }
    Ok(match f {
        Formula::Exists(x, g) if g.is_quantifier_free() => {
            *done = true;
            step(x, g)?
        }
        Formula::Exists(x, g) => Formula::exists(x, replace_innermost(g, done, step)?),
        Formula::Forall(x, g) => Formula::forall(x, replace_innermost(g, done, step)?),
        Formula::Not(g) => Formula::not(replace_innermost(g, done, step)?),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| replace_innermost(g, done, step)).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| replace_innermost(g, done, step)).collect::<Result<_, _>>()?),
        other => other.clone(),
    })
}

/// How a term of the elimination reads off a value tuple.
struct TermReader {
    term: Term,
    var: usize,
    function: Option<Vec<usize>>,
}

impl TermReader {
    fn value(&self, tuple: &[usize]) -> usize {
        let v = tuple[self.var];
        self.function.as_ref().map_or(v, |m| m[v])
    }
}

/// Calls `visit` on every tuple of `0..n` of length `len`.
fn for_each_tuple(n: usize, len: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut tuple = vec![0usize; len];
    if n == 0 && len > 0 {
        return;
    }
    loop {
        visit(&tuple);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Eliminates `∃x0 ψ` for a quantifier-free `ψ` whose terms are variables
/// or functions applied to variables. Returns an equivalent quantifier-free
/// formula in the returned expansion of `s`.
#[allow(clippy::too_many_arguments)]
pub fn eliminate_exists(
    x0: &str,
    psi: &Formula,
    s: &Structure,
    guard: &Graph,
    names: &mut Names,
    limits: QelimLimits,
    stats: &mut QelimStats,
    trace: &mut Vec<String>,
) -> Result<Elimination, QelimError> {
    let mut st = s.clone();
    let psi = simplify(psi);
    let done = |formula: Formula, st: Structure| Elimination { formula, structure: st, guard: guard.clone() };
    if !psi.free_vars().contains(x0) {
        // Non-empty universe.
        return Ok(done(psi, st));
    }
    stats.eliminations += 1;
    let mut vars: Vec<String> = vec![x0.to_string()];
    vars.extend(psi.free_vars().into_iter().filter(|v| v != x0));
    let mut terms: BTreeSet<Term> = psi.terms();
    terms.extend(vars.iter().map(|v| Term::var(v)));
    let readers: Vec<TermReader> = terms
        .iter()
        .map(|t| {
            let var = vars.iter().position(|v| v == t.variable()).expect("term variables are free in ψ");
            let function = match t {
                Term::Var(_) => Ok(None),
                Term::App(f, _) => st.function(f).map(|m| Some(m.to_vec())).ok_or_else(|| QelimError::UnknownFunction(f.clone())),
            }?;
            Ok(TermReader { term: t.clone(), var, function })
        })
        .collect::<Result<_, QelimError>>()?;
    let n = st.size();
    let total = n.checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
    if total > limits.max_tuples {
        return Err(QelimError::Cap(format!("{total} value tuples exceed {}", limits.max_tuples)));
    }

    // Coloring of an augmentation of the guard.
    let x = terms.len();
    let k = (3 * (x * x + 1) * (x * x + 1)).min(limits.max_k);
    let gk = kth_augmentation_with(guard, k, limits.augment)?.augmented;
    let coloring = greedy_color(&gk, &degeneracy_order(&gk));
    let colors = &coloring.colors;

    // Maximal realized palettes.
    let mut realized: BTreeSet<Vec<usize>> = BTreeSet::new();
    for_each_tuple(n, vars.len(), &mut |tuple| {
        let mut p: Vec<usize> = readers.iter().map(|r| colors[r.value(tuple)]).collect();
        p.sort_unstable();
        p.dedup();
        realized.insert(p);
    });
    let sets: Vec<BTreeSet<usize>> = realized.iter().map(|p| p.iter().copied().collect()).collect();
    let palettes: Vec<BTreeSet<usize>> = sets
        .iter()
        .filter(|p| !sets.iter().any(|q| q.len() > p.len() && p.is_subset(q)))
        .cloned()
        .collect();
    if palettes.len() > limits.max_palettes {
        return Err(QelimError::Cap(format!("{} palettes exceed {}", palettes.len(), limits.max_palettes)));
    }
    stats.palettes += palettes.len();
    // Each realized color set is handled by the first maximal palette
    // containing it; one template per value tuple suffices.
    let owner: BTreeMap<Vec<usize>, usize> = realized
        .iter()
        .zip(&sets)
        .map(|(key, set)| (key.clone(), palettes.iter().position(|p| set.is_subset(p)).expect("some maximal palette")))
        .collect();

    let functions: BTreeSet<String> = terms.iter().filter_map(|t| matches!(t, Term::App(..)).then(|| fname(t))).collect();

    // With at most one other free variable the result is materialized:
    // every piece is evaluated as soon as it is built.
    let outer: Vec<String> = vars[1..].to_vec();
    let stream = outer.len() <= 1;
    let mut hits = vec![false; if outer.is_empty() { 1 } else { n }];
    let mut pieces: Vec<Formula> = Vec::new();
    let mut tree_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut templates_seen = 0;
    for (index, palette) in palettes.iter().enumerate() {
        let members: Vec<bool> = colors.iter().map(|c| palette.contains(c)).collect();
        // Membership guards C_P(x) and C_{f,P}(x) = C_P(f(x)).
        let cp = names.fresh("C");
        st.set_relation(&cp, 1, (0..n).filter(|&v| members[v]).map(|v| vec![v]).collect())?;
        let mut cf: BTreeMap<String, String> = BTreeMap::new();
        for f in &functions {
            let name = names.fresh("C");
            let map = st.function(f).expect("checked above").to_vec();
            st.set_relation(&name, 1, (0..n).filter(|&v| members[map[v]]).map(|v| vec![v]).collect())?;
            cf.insert(f.clone(), name);
        }
        let mut guarded: Vec<Formula> = terms
            .iter()
            .map(|t| match t {
                Term::Var(_) => Formula::rel(&cp, vec![t.clone()]),
                Term::App(f, inner) => Formula::rel(&cf[f], vec![(**inner).clone()]),
            })
            .collect();
        guarded.push(psi.clone());
        let guarded = Formula::And(guarded);
        let forest = dfs_forest(&gk, &members);
        stats.max_forest_height = stats.max_forest_height.max(forest.height());
        let bound = 1usize.checked_shl(palette.len() as u32).map_or(usize::MAX, |b| b - 1);
        if forest.height() > bound {
            trace.push(format!("note: forest of height {} on palette {palette:?} exceeds 2^{} - 1", forest.height(), palette.len()));
        }
        tree_edges.extend((0..n).filter(|&v| members[v] && forest.parent[v] != v).map(|v| (v, forest.parent[v])));
        let p = names.fresh("p");
        st.set_function(&p, forest.parent.clone())?;
        stats.fresh_symbols += 2 + cf.len();

        // Templates traced by value tuples inside the palette.
        let mut templates: BTreeMap<String, Template> = BTreeMap::new();
        let mut overflow = false;
        for_each_tuple(n, vars.len(), &mut |tuple| {
            if overflow {
                return;
            }
            let mut colors_of: Vec<usize> = readers.iter().map(|r| colors[r.value(tuple)]).collect();
            colors_of.sort_unstable();
            colors_of.dedup();
            if owner[&colors_of] == index {
                let values: BTreeMap<Term, usize> = readers.iter().map(|r| (r.term.clone(), r.value(tuple))).collect();
                let t = canonical_template(&values, &forest);
                templates.entry(t.key()).or_insert(t);
                overflow = templates.len() > limits.max_templates;
            }
        });
        if overflow {
            return Err(QelimError::Cap(format!("more than {} templates on one palette", limits.max_templates)));
        }
        templates_seen += templates.len();
        stats.templates += templates.len();

        for t in templates.values() {
            stats.pieces += 1;
            let formula = match eliminate_template(&guarded, t, x0, &p) {
                TemplateElimination::Done(f) => f,
                TemplateElimination::Expand(expander) => {
                    let (f, relations) = expander.expand(&st, &forest, names)?;
                    for (name, arity, tuples) in relations {
                        st.set_relation(&name, arity, tuples)?;
                        stats.fresh_symbols += 1;
                    }
                    f
                }
            };
            if formula == Formula::False {
                continue;
            }
            if stream {
                let compiled = Compiled::new(&st, &formula, &outer)?;
                if outer.is_empty() {
                    hits[0] = hits[0] || compiled.eval(&[]);
                } else {
                    for (a, hit) in hits.iter_mut().enumerate() {
                        *hit = *hit || compiled.eval(&[a]);
                    }
                }
            } else {
                pieces.push(formula);
            }
        }
    }
    let formula = if !stream {
        simplify(&Formula::or(pieces))
    } else if outer.is_empty() {
        stats.materialized += 1;
        if hits[0] {
            Formula::True
        } else {
            Formula::False
        }
    } else {
        stats.materialized += 1;
        // Only the input symbols and the new relation remain.
        let mut keep: BTreeSet<String> =
            s.relations().map(|(r, _)| r.to_string()).chain(s.functions().map(|(g, _)| g.to_string())).collect();
        let m = names.fresh("M");
        keep.insert(m.clone());
        stats.fresh_symbols += 1;
        st.set_relation(&m, 1, (0..n).filter(|&a| hits[a]).map(|a| vec![a]).collect())?;
        st = st.restrict_to(&keep);
        Formula::rel(&m, vec![Term::var(&outer[0])])
    };
    trace.push(format!(
        "eliminated {x0} (free: {}): k = {k}, {} colors, {} palettes, {} templates; {}",
        outer.join(", "),
        coloring.k,
        palettes.len(),
        templates_seen,
        if stream { format!("materialized as {formula}") } else { format!("result size {}", formula.size()) }
    ));
    let guard = Graph::from_edges(n, guard.edges().chain(tree_edges))?;
    Ok(Elimination { formula, structure: st, guard })
}

fn fname(t: &Term) -> String {
    match t {
        Term::App(f, _) => f.clone(),
        Term::Var(x) => x.clone(),
    }
}
