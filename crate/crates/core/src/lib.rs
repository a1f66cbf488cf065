//! Exact, exhaustive checking of object-allocation rules against incentive
//! and efficiency axioms on small instances.

pub mod axioms;
pub mod cli;
pub mod error;
pub mod io;
pub mod matchings;
pub mod model;
pub mod preferences;
pub mod rules;
pub mod theorems;

pub use error::{Error, Result};
