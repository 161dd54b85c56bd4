//! Equivalent-circuit design and heralding analysis for FBAR piezo-optomechanical
//! microwave–optical transducers.
//!
//! Frequencies and rates are ordinary frequencies in Hz everywhere in the public
//! API. Times are in seconds, capacitances in farads, inductances in henries and
//! resistances in ohms.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fom;
pub mod herald;
pub mod matching;
pub mod mcsim;
pub mod optomech;
pub mod transducer;

pub use error::{Error, Result};
