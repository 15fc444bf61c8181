//! Mean estimation over a noisy relay channel in the large-deviations regime.
//!
//! A teacher observes i.i.d. samples and, one channel use per sample, relays
//! information over a discrete memoryless channel to a student who estimates
//! the mean. This crate contains:
//!
//! - [`channel`]: discrete memoryless channels, sampling and Bhattacharyya
//!   quantities;
//! - [`exponents`]: closed-form and optimized error exponents;
//! - [`codebook`]: random low-rate codebooks with verified pairwise distance;
//! - [`protocol`]: the block-structured teacher/student protocol;
//! - [`baselines`]: simple forwarding, one-shot estimate-and-forward and the
//!   hypothetical non-causal protocol;
//! - [`oracle`]: exact enumeration at tiny scale for checking the analysis.
//!
//! All exponents are in nats. Vector-valued sources are handled by running
//! the scalar machinery on each component separately; nothing here is
//! specific to that case.

pub mod baselines;
pub mod channel;
pub mod codebook;
mod error;
pub mod exponents;
pub mod json_f64;
pub mod numeric;
pub mod oracle;
pub mod protocol;

pub use error::{Error, Result};
