//! Deciding first-order properties of structures guarded by sparse graphs.
//!
//! The pipeline: orient the guard graph along a degeneracy order, compute
//! transitive-fraternal augmentations, color the augmented graph to obtain a
//! low tree-depth coloring, and certify the tree-depth of color-class unions
//! by rooted forests. On top of the forests sit a dynamic index answering
//! existential (Σ₁) sentences under tuple updates, and a quantifier
//! elimination engine deciding arbitrary first-order sentences. A
//! brute-force evaluator serves as the reference semantics throughout.

pub mod augment;
pub mod cli;
pub mod gen;
pub mod graph;
pub mod logic;
pub mod qelim;
pub mod sigma1;
pub mod treedepth;
