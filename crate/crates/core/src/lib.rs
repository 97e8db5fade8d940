//! Causal impact of an intervention on a coverage fraction observed through
//! an image time series.
//!
//! The pipeline runs in four stages, each usable on its own:
//!
//! 1. [`imagery`]: decode epoch images, convert to HSV, mask an HSV box and
//!    count the covered fraction.
//! 2. [`series`]: collect the fractions into an epoch-ordered series.
//! 3. [`changepoint`]: locate a single change with a Normal likelihood-ratio test.
//! 4. [`impact`]: fit a structural time-series model ([`bsts`]) on the
//!    pre-change span, forecast the counterfactual and summarize
//!    observed-minus-predicted effects.
//!
//! [`synth`] produces fixtures with known ground truth, [`report`] renders
//! the three-panel SVG and [`cli`] wires everything to the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsts;
pub mod changepoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod imagery;
pub mod impact;
pub mod report;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
