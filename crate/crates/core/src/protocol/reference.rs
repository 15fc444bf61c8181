//! Straightforward decoder used to cross-check the fast one: per-point
//! log-sum-exp scores and a quadratic scan for the survivor set.

use super::decoder::{beats, first_argmax, midpoint, DecoderState, Grid};
use super::score::{log_f_bernoulli, log_f_subg};
use super::teacher::IndexSpace;
use crate::channel::{ChannelModel, Word};
use crate::codebook::Codebook;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub enum ReferenceVariant<'a> {
    Bernoulli,
    SubGaussian { sigma2: f64, space: &'a IndexSpace },
}

pub fn reference_decode(
    blocks: &[Word],
    variant: ReferenceVariant<'_>,
    codebook: &Codebook,
    channel: &ChannelModel,
    grid: Grid,
    radius: f64,
) -> Result<DecoderState> {
    if blocks.is_empty() {
        return Err(Error::NoUsableBlocks);
    }
    let thetas = grid.values();
    let mut scores = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        let mut total = 0.0;
        for z in blocks {
            total += match variant {
                ReferenceVariant::Bernoulli => log_f_bernoulli(theta, z, codebook, channel)?,
                ReferenceVariant::SubGaussian { sigma2, space } => {
                    log_f_subg(theta, z, codebook, channel, sigma2, space)?
                }
            };
        }
        scores.push(total);
    }
    let tolerance = 1e-9 * grid.step();
    let survivors: Vec<usize> = (0..thetas.len())
        .filter(|&i| {
            (0..thetas.len())
                .filter(|&j| (thetas[i] - thetas[j]).abs() >= radius - tolerance)
                .all(|j| beats(scores[i], scores[j]))
        })
        .collect();
    let (theta_hat, fallback_used) = match (survivors.first(), survivors.last()) {
        (Some(&a), Some(&b)) => (midpoint(&grid, a, b), false),
        _ => (grid.value(first_argmax(&scores)), true),
    };
    Ok(DecoderState {
        grid,
        log_scores: scores,
        survivors,
        exclusion_radius: radius,
        exclusion_steps: super::decoder::exclusion_steps(radius, grid.step()),
        fallback_used,
        theta_hat,
    })
}
