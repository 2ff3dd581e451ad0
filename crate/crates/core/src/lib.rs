//! Codon optimisation of mRNA coding sequences with a multi-objective
//! genetic algorithm.

pub mod codon_data;
pub mod error;
pub mod folding;
pub mod ga;
pub mod io;
pub mod metrics;
pub mod num;
pub mod seq;
#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
pub use num::Scalar;

/// Double-precision instantiations of the generic types.
pub type MetricVectorF64 = metrics::MetricVector<f64>;
pub type ScoringTablesF64 = metrics::ScoringTables<f64>;
pub type FitnessWeightsF64 = ga::FitnessWeights<f64>;
pub type GaConfigF64 = ga::GaConfig<f64>;
pub type ProblemF64 = ga::Problem<f64>;
pub type RunConfigF64 = io::RunConfig<f64>;
