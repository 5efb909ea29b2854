//! Measures how linear data transformations (component-based reduction,
//! feature selection, trend extraction) change the adversarial robustness
//! of a recurrent time-series classifier under a minimum-distortion
//! L-infinity evasion attack.
//!
//! The pipeline: ingest a delimited sensor recording, normalize features
//! to [0,1], optionally transform (PCA / feature masks / candlesticks /
//! EMA), window into labeled sequences, train an LSTM classifier, attack
//! a sample of test windows with a Carlini-Wagner-style minimum-distortion
//! search, and report robustness curves over the perturbation budget.

pub mod attack;
pub mod classifier;
pub mod dataset;
pub mod diffmath;
pub mod error;
pub mod forest;
pub mod harness;
pub mod par;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
