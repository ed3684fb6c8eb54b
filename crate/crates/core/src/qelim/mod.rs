//! Quantifier elimination for structures with unary functions guarded by a
//! sparse graph: every existential quantifier is replaced by a
//! quantifier-free formula over an expansion of the structure by fresh
//! unary functions and relations of arity at most one.

mod eliminate;
mod normal;
mod reduce;
mod simple;
mod template;
mod xi;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::augment::{AugmentError, AugmentLimits};
use crate::graph::GraphError;
use crate::logic::{Formula, LogicError, Structure, Term};

pub use eliminate::{eliminate_template, Expander, NewRelation, TemplateElimination};
pub use normal::{eliminate_forall, miniscope, rename_apart, simplify};
pub use reduce::{eliminate_exists, reduce_sentence, reduce_sentence_with, Elimination, QelimStats, Reduction};
pub use simple::{to_simple, Simplified};
pub use template::{canonical_template, enumerate_templates, Template};
pub use xi::{build_xi, build_xi_reduced};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QelimError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("resource cap reached: {0}")]
    Cap(String),
    #[error("formula has free variables: {0}")]
    NotSentence(String),
    #[error("the structure is not guarded by the graph")]
    NotGuarded,
    #[error("unknown function symbol {0}")]
    UnknownFunction(String),
}

/// Resource limits of the reduction. Exceeding one returns
/// [`QelimError::Cap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QelimLimits {
    /// Largest augmentation order used for the coloring.
    pub max_k: usize,
    /// Maximal palettes per elimination.
    pub max_palettes: usize,
    /// Realized templates per palette.
    pub max_templates: usize,
    /// Value tuples enumerated per elimination and palette.
    pub max_tuples: usize,
    /// Size of the working formula.
    pub max_formula_size: usize,
    pub max_quantifier_depth: usize,
    pub augment: AugmentLimits,
}

impl Default for QelimLimits {
    fn default() -> Self {
        QelimLimits {
            max_k: 2,
            max_palettes: 4_096,
            max_templates: 4_096,
            max_tuples: 2_000_000,
            max_formula_size: 2_000_000,
            max_quantifier_depth: 6,
            augment: AugmentLimits::default(),
        }
    }
}

/// Generator of symbol names unused by a structure and by earlier calls.
#[derive(Clone, Debug, Default)]
pub struct Names {
    taken: BTreeSet<String>,
    counter: usize,
}

impl Names {
    /// Reserves every symbol of `s` and `f`.
    pub fn new(s: &Structure, f: &Formula) -> Names {
        let mut taken: BTreeSet<String> = s.relations().map(|(r, _)| r.to_string()).collect();
        taken.extend(s.functions().map(|(g, _)| g.to_string()));
        taken.extend(f.relations().into_iter().map(|(r, _)| r));
        taken.extend(f.functions());
        Names { taken, counter: 0 }
    }

    /// A fresh name of the form `{prefix}_{i}`.
    pub fn fresh(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{prefix}_{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// Value of a term whose variables are bound by `env`. Unknown function
/// symbols are a programming error.
pub fn eval_term(s: &Structure, t: &Term, env: &dyn Fn(&str) -> usize) -> usize {
    match t {
        Term::Var(x) => env(x),
        Term::App(f, inner) => {
            let v = eval_term(s, inner, env);
            s.function(f).unwrap_or_else(|| panic!("unknown function {f}"))[v]
        }
    }
}
