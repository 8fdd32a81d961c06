//! Optimal prediction of the last time a spectrally negative Lévy process is
//! below zero.
//!
//! The threshold rule `tau_a = inf { t : X_t > a }` that minimises
//! `E|g - tau|` stops at the median `a*` of `H = F * F`, where `F` is the law
//! of the all-time infimum depth. This crate evaluates the scale functions
//! behind `F`, builds `H`, solves for `a*`, evaluates the value functions and
//! checks all of it against an independent path simulator.

pub mod convolve;
pub mod error;
pub mod model;
pub mod numerics;
pub mod rule;
pub mod scale;
pub mod simulate;

pub use convolve::{Convolution, ConvolutionTable, HMethod};
pub use error::{Error, Result};
pub use model::{LevyModel, ModelProfile, Variation};
pub use rule::{FitRegime, OptimalRule, SolveOptions};
pub use scale::ScaleEvaluator;
pub use simulate::{McConfig, McReport, Quantity};
