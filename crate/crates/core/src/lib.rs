//! Read-channel simulator and coding library for resistive crossbar memories
//! affected by sneak-path interference.
//!
//! A crossbar memory stores one bit per cell as a high or low resistance. When
//! a high-resistance cell is read, current can sneak through a triple of
//! low-resistance cells whose shared selector has failed, pulling the measured
//! resistance down and corrupting the read. This crate models that channel and
//! provides the signal-processing and coding stack around it:
//!
//! - [`channel`]: data/selector-failure sampling, sneak-path event generation,
//!   Gaussian and lognormal readback noise, likelihoods, and the closed-form
//!   sneak-path rate.
//! - [`detector`]: an iterative message-passing detector over a graph built
//!   from the uncertain cells, plus threshold, mixture-LLR (ESE), and
//!   genie-aided baselines.
//! - [`polar`]: polar encoder, iterative factor-graph decoder, polarization
//!   weight ordering, Bhattacharyya-based predetermined index sets, and a
//!   genetic-algorithm code construction driven by a block-error evaluator.
//! - [`joint`]: the outer loop coupling detector soft outputs to the decoder
//!   and decoder feedback to the detector priors.
//! - [`harness`]: seeded, reproducible Monte Carlo experiment runners with
//!   CSV output, behind the `reram-sim` CLI.

pub mod channel;
pub mod detector;
pub mod error;
pub mod grid;
pub mod harness;
pub mod joint;
pub mod polar;
pub mod rng;

pub use error::Error;
pub use grid::Grid;

/// Probabilities are clamped to this interval before they enter ratios or
/// logs, so message updates cannot divide by zero or produce infinities.
pub const PROB_CLAMP: f64 = 1e-12;

/// Clamp a probability to `[PROB_CLAMP, 1 - PROB_CLAMP]`.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}
