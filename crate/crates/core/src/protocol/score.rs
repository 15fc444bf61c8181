//! Per-block proxy log-likelihoods `log f(theta, Z)`.
//!
//! Both variants are `log sum_alpha w(theta, alpha) sqrt(P(Z | W_alpha))`:
//! the Bernoulli weight is `sqrt(Binom(k, theta)(alpha))`, the sub-Gaussian
//! one the kernel `exp(-k (theta - alpha)^2 / (4 sigma2))`. The square root
//! on the channel likelihood is what turns cross terms into Bhattacharyya
//! coefficients between codewords.

use super::teacher::IndexSpace;
use crate::channel::{ChannelModel, Word};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, LnFactorials};

/// `(1/2) log P(Z | W_c)` for the first `count` codewords.
pub(crate) fn half_log_likelihoods(
    codebook: &Codebook,
    channel: &ChannelModel,
    received: &[u8],
    count: usize,
) -> Vec<f64> {
    codebook.codewords()[..count]
        .iter()
        .map(|w| 0.5 * channel.word_log_likelihood_unchecked(w.symbols(), received))
        .collect()
}

fn check_block(received: &Word, codebook: &Codebook, channel: &ChannelModel, needed: usize) -> Result<()> {
    if received.len() != codebook.k() {
        return Err(Error::LengthMismatch {
            left: received.len(),
            right: codebook.k(),
        });
    }
    received.validate(channel.output_alphabet_size())?;
    if codebook.m() < needed {
        return Err(Error::CodebookTooSmall {
            available: codebook.m(),
            required: needed,
        });
    }
    for w in &codebook.codewords()[..needed] {
        w.validate(channel.input_alphabet_size())?;
    }
    Ok(())
}

/// Bernoulli proxy log-likelihood; codeword `alpha` encodes `alpha` ones.
pub fn log_f_bernoulli(
    theta: f64,
    received: &Word,
    codebook: &Codebook,
    channel: &ChannelModel,
) -> Result<f64> {
    let k = received.len();
    check_block(received, codebook, channel, k + 1)?;
    let lf = LnFactorials::up_to(k);
    let half = half_log_likelihoods(codebook, channel, received.symbols(), k + 1);
    let terms: Vec<f64> = (0..=k)
        .map(|alpha| 0.5 * lf.ln_binomial_pmf(k, alpha, theta) + half[alpha])
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Sub-Gaussian proxy log-likelihood; codeword `c` encodes the lattice
/// value at position `c` of `space`.
pub fn log_f_subg(
    theta: f64,
    received: &Word,
    codebook: &Codebook,
    channel: &ChannelModel,
    sigma2: f64,
    space: &IndexSpace,
) -> Result<f64> {
    let k = received.len();
    check_block(received, codebook, channel, space.len())?;
    let half = half_log_likelihoods(codebook, channel, received.symbols(), space.len());
    let scale = k as f64 / (4.0 * sigma2);
    let terms: Vec<f64> = space
        .values()
        .zip(&half)
        .map(|(v, h)| -scale * (theta - v) * (theta - v) + h)
        .collect();
    Ok(log_sum_exp(&terms))
}
