//! Growth exponents of free groups, forbidden-factor languages, `L^p`
//! products and their quotients, with the tree geometry behind growth
//! tightness.
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod automata;
pub mod error;
pub mod growth;
pub mod products;
pub mod quotients;
pub mod scalar;
pub mod tree_geometry;
pub mod words;

pub use automata::{avoid_factors, count_lengths, perron_root, reduced_word_automaton, CountSequence, CountingAutomaton};
pub use error::{Error, Result};
pub use scalar::Real;
pub use words::{Alphabet, Letter, ReducedWord};

pub type Bracket = growth::GrowthBracket<f64>;
pub type ProductSpec = products::LpProductSpec<f64>;
pub type Exponent = products::Exponent<f64>;
pub type Section = quotients::MinimalSection<f64>;
pub type Tightness = quotients::TightnessReport<f64>;
pub type Duality = products::DualityReport<f64>;
