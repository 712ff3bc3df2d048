//! Junta learning over Markov random fields with smoothed external fields.
//!
//! The crate has three layers:
//!
//! - **Models and sampling**: sparse multilinear factorization polynomials
//!   ([`poly`]), dependency graphs ([`graph`]), smoothed MRFs ([`model`]),
//!   exact enumeration ([`dist`]) and Gibbs sampling ([`gibbs`]).
//! - **Learning**: k-juntas and their pivot decompositions ([`junta`]), the
//!   conditional correlation statistic and the relevant-variable /
//!   truth-table learners ([`learner`]).
//! - **Verification**: brute-force oracles for the identities and bounds the
//!   learner relies on ([`oracle`]), configured check batteries
//!   ([`battery`]), instance generators ([`gen`]) and the seeded experiment
//!   runner ([`experiment`]).

pub mod battery;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod gen;
pub mod gibbs;
pub mod graph;
pub mod junta;
pub mod learner;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod restriction;
pub mod samples;
pub mod seeds;

pub use dist::{enumerate_distribution, ExactDistribution, ENUMERATION_CAP};
pub use error::{Error, Result};
pub use gibbs::{gibbs_sample, GibbsConfig};
pub use graph::DependencyGraph;
pub use junta::Junta;
pub use model::{MrfModel, SmoothingVector};
pub use poly::MultilinearPolynomial;
pub use restriction::Restriction;
pub use samples::{Example, SampleSet};
