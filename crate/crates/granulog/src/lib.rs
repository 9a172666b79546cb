//! Automata and satisfiability checking for layered time-granularity logics.
//!
//! The crate provides omega-word automata, finite tree automata, Rabin tree
//! automata and their temporalized combinations, eventually periodic sets of
//! naturals, and a temporal logic front end with satisfiability checking over
//! sequence-of-sequences, finitely layered, and upward unbounded layered
//! structures.

pub mod buchi;
pub mod error;
pub mod ftree;
pub mod game;
pub mod json;
pub mod logic;
pub mod model;
pub mod mso;
pub mod periodic;
pub mod rabin;
pub mod temporalized;

pub use error::{Error, Result};
