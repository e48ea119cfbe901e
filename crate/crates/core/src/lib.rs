//! Harmonic metrics, flat connections and transversality certificates for
//! geometric structures built from Higgs bundles.
//!
//! The library is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix it to `f64`.

pub mod connection;
pub mod constructions;
pub mod domain;
pub mod error;
pub mod higgs;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod transversality;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Chart = domain::DomainChart<f64>;
pub type Field = domain::ComplexField<f64>;
