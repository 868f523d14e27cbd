//! Numerical toolkit for singular inner functions, compressed shifts on model
//! spaces, Besicovitch measure functions and characteristic functions of
//! matrix contractions.

pub mod charfn;
pub mod error;
pub mod hausdorff;
pub mod inner;
pub mod measures;
pub mod modelspace;
pub mod numeric;
pub mod verify;

pub use error::{Error, Result};
pub use inner::{DecayRecord, InnerFunction};
pub use measures::{Arc, SingularMeasure};
