//! Dynamic index for existential (Σ₁) sentences over function-free
//! structures guarded by a sparse graph.

mod be_index;
mod forest_index;
mod labelled;
mod matching;
mod query;

use thiserror::Error;

pub use be_index::{BEIndex, BeLimits, UpdateReport};
pub use forest_index::{Certificate, Entry, Fault, ForestIndex, IndexCounters, Origin};
pub use labelled::{canonical_form, canonical_key, CanonicalKey, KLabelledStructure, KeyError};
pub use matching::assign_distinct;
pub use query::{QueryAnswer, QueryCache, Sigma1Query};

use crate::augment::AugmentError;
use crate::logic::{LogicError, Structure};
use crate::treedepth::TreedepthError;

/// Largest supported number of variables per query (and element bound of
/// indexed structures).
pub const MAX_D0: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("index order d0 = {0} is outside 1..={max}", max = MAX_D0)]
    BadOrder(usize),
    #[error("forest depth {0} is too large")]
    TooDeep(usize),
    #[error("vertex {0} is not covered by this index")]
    NotInForest(usize),
    #[error("unknown relation id {0}")]
    UnknownRelationId(usize),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {rel} has arity {expected}, got {got}")]
    Arity { rel: String, expected: usize, got: usize },
    #[error("tuple {tuple:?} of {rel} is not guarded")]
    NotGuarded { rel: String, tuple: Vec<usize> },
    #[error("tuple {tuple:?} of {rel} is not present")]
    Absent { rel: String, tuple: Vec<usize> },
    #[error("the index language has no function symbols, but {0} is used")]
    FunctionSymbol(String),
    #[error("query has {got} variables, the index supports at most {max}")]
    TooManyVariables { got: usize, max: usize },
    #[error("query is not an existential sentence: {0}")]
    NotSigma1(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("witness failed verification")]
    BadWitness,
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Treedepth(#[from] TreedepthError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

impl IndexError {
    /// True for resource-cap failures (as opposed to input errors).
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            IndexError::Cap(_)
                | IndexError::Augment(_)
                | IndexError::TooDeep(_)
                | IndexError::Treedepth(TreedepthError::Augment(_))
        )
    }
}

/// Relation names and arities of a function-free language, indexed by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    names: Vec<String>,
    arities: Vec<usize>,
}

impl Schema {
    pub fn new(relations: Vec<(String, usize)>) -> Schema {
        let (names, arities) = relations.into_iter().unzip();
        Schema { names, arities }
    }

    /// The relations of a structure (sorted by name); rejects functions.
    pub fn of_structure(s: &Structure) -> Result<Schema, IndexError> {
        if let Some((f, _)) = s.functions().next() {
            return Err(IndexError::FunctionSymbol(f.to_string()));
        }
        Ok(Schema::new(s.relations().map(|(r, rel)| (r.to_string(), rel.arity)).collect()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn arity(&self, id: usize) -> Option<usize> {
        self.arities.get(id).copied()
    }

    /// All facts of `s` as `(relation id, tuple)`.
    pub fn facts_of(&self, s: &Structure) -> Result<Vec<(usize, Vec<usize>)>, IndexError> {
        let mut out = Vec::new();
        for (name, rel) in s.relations() {
            let id = self.id(name).ok_or_else(|| IndexError::UnknownRelation(name.to_string()))?;
            out.extend(rel.tuples.iter().map(|t| (id, t.clone())));
        }
        Ok(out)
    }
}
