//! Bounds, exact values and optimal testers for unambiguous identification of
//! a change point in a sequence of quantum channels.

pub mod error;
pub mod adaptive;
pub mod bounds;
pub mod certificate;
pub mod cli;
pub mod fmap;
pub mod numerics;

pub use error::{Error, Result};
