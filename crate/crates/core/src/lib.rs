//! Simulator for field-directed growth of conductive polymer fiber networks
//! between electrodes in an electrolyte, the RC circuits they form, and the
//! synaptic plasticity those circuits show.

pub mod artifacts;
pub mod circuit;
pub mod error;
pub mod field;
pub mod growth;
pub mod plasticity;
pub mod protocols;
pub mod render;
pub mod script;
pub mod signals;
pub mod sparse;

pub use error::{Diagnostic, Error, Result};
