//! Exact inference for propositional probabilistic logic programs:
//! marginal, interventional and counterfactual queries.

pub mod benchgen;
pub mod counterfactual;
pub mod error;
pub mod lpad;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod random;
pub mod semantics;
pub mod transforms;
pub mod weight;
pub mod wmc;

pub use error::{Error, ErrorClass, Result};
pub use model::{
    Atom, Clause, CounterfactualQuery, Formula, Literal, LiteralSet, Prob, Program, RandomFact,
};
