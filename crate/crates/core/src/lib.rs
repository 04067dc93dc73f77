//! De-anonymization of correlated databases whose columns are repeated,
//! deleted and corrupted by noise.
//!
//! The labeled database `D2` is produced from the anonymized `D1` by a
//! hidden row permutation, an i.i.d. column repetition pattern and a
//! memoryless channel. A small set of pre-matched seed rows reveals the
//! pattern; everything else is estimated from the data:
//!
//! 1. [`replica::detect_replicas`] finds adjacent replicated columns from
//!    running Hamming distances.
//! 2. [`deletion::detect_deletions`] finds deleted columns from the seeds.
//! 3. [`estimate`] builds plug-in distributions.
//! 4. [`matching::match_rows`] pairs rows by joint typicality.
//!
//! [`matching::deanonymize`] runs the whole chain, and [`harness`] repeats
//! it over Monte Carlo trials.
//!
//! ```
//! use deanon::{capacity, ModelSpec};
//!
//! let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
//! let c = capacity(&spec).unwrap().capacity;
//! assert!((c - 0.531).abs() < 1e-3);
//! ```

pub mod cli;
pub mod config;
pub mod deletion;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod info;
pub mod io;
pub mod matching;
pub mod matrix;
pub mod replica;
pub mod rng;
pub mod synth;

pub use deletion::{detect_deletions, DeletionDetection, Remapping, RetentionResult};
pub use error::{Error, Result};
pub use estimate::DistributionEstimate;
pub use harness::{run_experiment, ExperimentConfig, ExperimentReport};
pub use info::{capacity, CapacityReport};
pub use matching::{deanonymize, Deanonymization, Distributions, MatchOptions, MatchResult};
pub use matrix::{Symbol, SymbolMatrix};
pub use replica::{detect_replicas, ReplicaDetection};
pub use rng::Streams;
pub use synth::{DatabasePair, Instance, ModelSpec, RepetitionPattern, SeedPair};
