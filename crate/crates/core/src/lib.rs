//! # cascata
//!
//! Automata cascades built from prime components (flip-flops and modular
//! counters), together with the tooling needed to study how many samples a
//! class of cascades needs in order to be learned.
//!
//! The crate is organised bottom-up:
//!
//! - [`alphabet`]: factored alphabets, letters, projections and enumerable
//!   finite classes of letter functions.
//! - [`automaton`]: semiautomata, flat automata, minimisation, transition
//!   monoids and equivalence checking.
//! - [`primes`]: flip-flops and `n`-counters.
//! - [`cascade`]: component automata, cascades, stepping and flattening.
//! - [`functional`]: string-function constructors and the compositional
//!   descriptions of components and cascades.
//! - [`family`]: enumerable classes of cascades.
//! - [`complexity`]: cardinality, growth, dimension and sample-size bounds,
//!   plus exact growth and shattering searches.
//! - [`learner`]: sampling, empirical risk minimisation and risk estimates.
//! - [`scenario`]: the crafting-task running example.
//! - [`spec`]: JSON documents read and written by the command-line tool.

pub mod alphabet;
pub mod automaton;
pub mod cascade;
pub mod complexity;
pub mod error;
pub mod family;
pub mod functional;
pub mod learner;
pub mod primes;
pub mod scenario;
pub mod spec;

pub use error::{Error, Result};

/// Name of the environment variable that overrides every default cap.
pub const CAP_ENV: &str = "CASCATA_CAP";

/// Size limits for the exhaustive procedures of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of members a function or cascade class may enumerate.
    pub enumeration: u64,
    /// Maximum number of product states produced by flattening.
    pub product_states: u64,
    /// Maximum number of elements of a transition monoid.
    pub monoid: u64,
    /// Maximum number of candidate samples examined by exact growth searches.
    pub growth_samples: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            enumeration: 10_000_000,
            product_states: 1_000_000,
            monoid: 100_000,
            growth_samples: 5_000_000,
        }
    }
}

impl Caps {
    /// Every cap set to the same value.
    pub fn uniform(cap: u64) -> Self {
        Caps {
            enumeration: cap,
            product_states: cap,
            monoid: cap,
            growth_samples: cap,
        }
    }

    /// Default caps, overridden by `CASCATA_CAP` when it holds a number.
    pub fn from_env() -> Self {
        std::env::var(CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Caps::uniform)
            .unwrap_or_default()
    }
}
