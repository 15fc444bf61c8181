//! Teacher-side block maps.
//!
//! Bernoulli blocks are summarized by their number of ones. Real-valued
//! blocks are first stochastically rounded to multiples of `quant_step`,
//! then reduced by a base estimator and clipped. All of that is done on
//! integer numerators so the set of possible outputs is an exact, finite
//! lattice: the [`IndexSpace`].

use crate::error::{check_range, Error, Result};
use crate::numeric::exact;
use num_integer::Integer;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseEstimator {
    SampleMean,
    MedianOfMeans { groups: usize },
}

/// Number of ones in a binary block.
pub fn teacher_block_bernoulli(block: &[f64]) -> Result<usize> {
    let mut ones = 0;
    for (position, &x) in block.iter().enumerate() {
        if x == 1.0 {
            ones += 1;
        } else if x != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "non-binary sample {x} at position {position} of a Bernoulli block"
            )));
        }
    }
    Ok(ones)
}

/// The two grid neighbours of `x` as numerators of `step`, and the
/// probability of rounding up. `down == up` when `x` is on the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingBranches {
    pub down: i64,
    pub up: i64,
    pub p_up: f64,
}

pub fn rounding_branches(x: f64, step: f64) -> RoundingBranches {
    let t = x / step;
    let fl = t.floor();
    let frac = t - fl;
    let down = fl as i64;
    if frac == 0.0 {
        RoundingBranches {
            down,
            up: down,
            p_up: 0.0,
        }
    } else {
        RoundingBranches {
            down,
            up: down + 1,
            p_up: frac,
        }
    }
}

/// Exact branch probabilities `(P(down), P(up))` as rationals, derived from
/// the exact values of `x` and `step`.
pub fn exact_branch_probabilities(x: f64, step: f64) -> (BigRational, BigRational, i64) {
    let ratio = exact(x) / exact(step);
    let down = ratio.floor();
    let p_up = &ratio - &down;
    let one = BigRational::from_integer(1.into());
    let down_i: i64 = down
        .to_integer()
        .try_into()
        .expect("numerator fits in i64");
    (one - &p_up, p_up, down_i)
}

/// Stochastic rounding to a numerator of `step`; no randomness is used when
/// `x` is already on the grid.
pub fn stochastic_round_numerator<R: Rng + ?Sized>(x: f64, step: f64, rng: &mut R) -> i64 {
    let b = rounding_branches(x, step);
    if b.up == b.down || rng.random::<f64>() >= b.p_up {
        b.down
    } else {
        b.up
    }
}

pub fn stochastic_round<R: Rng + ?Sized>(x: f64, step: f64, rng: &mut R) -> f64 {
    stochastic_round_numerator(x, step, rng) as f64 * step
}

/// Sizes of `groups` contiguous, nearly equal groups covering `k` items;
/// the first `k mod groups` groups get the extra element.
pub fn group_sizes(k: usize, groups: usize) -> Vec<usize> {
    let base = k / groups;
    let extra = k % groups;
    (0..groups).map(|g| base + usize::from(g < extra)).collect()
}

/// Median (lower median for an even count) of the contiguous group means.
pub fn median_of_means(block: &[f64], groups: usize) -> Result<f64> {
    if block.is_empty() {
        return Err(Error::InvalidConfig("median of means of an empty block".into()));
    }
    if groups == 0 || groups > block.len() {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= groups <= {}, got {groups}",
            block.len()
        )));
    }
    let mut means = Vec::with_capacity(groups);
    let mut start = 0;
    for size in group_sizes(block.len(), groups) {
        let chunk = &block[start..start + size];
        means.push(chunk.iter().sum::<f64>() / size as f64);
        start += size;
    }
    means.sort_by(f64::total_cmp);
    Ok(means[(groups - 1) / 2])
}

/// Largest index space we are willing to lay out (one codeword per value).
pub const MAX_INDEX_SPACE: u64 = 100_000_000;

/// The lattice of possible teacher outputs for real-valued blocks.
///
/// Values are integers times `unit = quant_step / L`, where `L` is the lcm of
/// the group sizes (just `k` for the sample mean). The estimate is clipped to
/// `[-(C + k), C + k]`; clipping is done on the lattice, i.e. to the
/// outermost lattice points inside that interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSpace {
    k: usize,
    quant_step: f64,
    estimator: BaseEstimator,
    sizes: Vec<usize>,
    scale: Vec<i64>,
    unit: f64,
    lo: i64,
    hi: i64,
}

impl IndexSpace {
    pub fn new(k: usize, quant_step: f64, estimator: BaseEstimator, clip_c: f64) -> Result<Self> {
        check_range("quant_step", quant_step, quant_step > 0.0 && quant_step.is_finite(), "quant_step > 0")?;
        if k == 0 {
            return Err(Error::InvalidConfig("block length must be positive".into()));
        }
        let sizes = match estimator {
            BaseEstimator::SampleMean => vec![k],
            BaseEstimator::MedianOfMeans { groups } => {
                if groups == 0 || groups > k {
                    return Err(Error::InvalidConfig(format!(
                        "median of means needs 1 <= groups <= k = {k}, got {groups}"
                    )));
                }
                group_sizes(k, groups)
            }
        };
        let lcm = sizes.iter().fold(1i64, |acc, &s| acc.lcm(&(s as i64)));
        let scale = sizes.iter().map(|&s| lcm / s as i64).collect();
        let unit = quant_step / lcm as f64;
        let bound = clip_c + k as f64;
        let lo = (-bound / unit - 1e-9).ceil();
        let hi = (bound / unit + 1e-9).floor();
        let size = hi - lo + 1.0;
        if !(size.is_finite() && size >= 1.0 && size <= MAX_INDEX_SPACE as f64) {
            return Err(Error::InvalidConfig(format!(
                "index space of {size} values is too large; use a coarser quant_step"
            )));
        }
        Ok(Self {
            k,
            quant_step,
            estimator,
            sizes,
            scale,
            unit,
            lo: lo as i64,
            hi: hi as i64,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn quant_step(&self) -> f64 {
        self.quant_step
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn estimator(&self) -> BaseEstimator {
        self.estimator
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, index: i64) -> f64 {
        index as f64 * self.unit
    }

    /// Position of `index` in codebook order.
    pub fn codeword_of(&self, index: i64) -> usize {
        (index - self.lo) as usize
    }

    pub fn index_at(&self, codeword: usize) -> i64 {
        self.lo + codeword as i64
    }

    pub fn contains(&self, index: i64) -> bool {
        (self.lo..=self.hi).contains(&index)
    }

    /// All lattice values in codebook order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (self.lo..=self.hi).map(|i| self.value(i))
    }

    /// Clipped estimator index from rounded sample numerators.
    pub fn index_of_numerators(&self, numerators: &[i64]) -> i64 {
        debug_assert_eq!(numerators.len(), self.k);
        let mut sums = Vec::with_capacity(self.sizes.len());
        let mut start = 0;
        for size in &self.sizes {
            sums.push(numerators[start..start + size].iter().sum::<i64>());
            start += size;
        }
        self.index_of_group_sums(&sums)
    }

    /// Clipped estimator index from per-group numerator sums.
    pub fn index_of_group_sums(&self, sums: &[i64]) -> i64 {
        debug_assert_eq!(sums.len(), self.sizes.len());
        let mut means: Vec<i64> = sums.iter().zip(&self.scale).map(|(s, c)| s * c).collect();
        means.sort_unstable();
        means[(means.len() - 1) / 2].clamp(self.lo, self.hi)
    }
}

/// Teacher output for one real-valued block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubgAlpha {
    pub index: i64,
    pub value: f64,
    pub codeword: usize,
}

/// Rounds each sample, applies the base estimator, clips, and maps the
/// result to its codeword position.
pub fn teacher_block_subg<R: Rng + ?Sized>(
    block: &[f64],
    space: &IndexSpace,
    rng: &mut R,
) -> Result<SubgAlpha> {
    if block.len() != space.k {
        return Err(Error::LengthMismatch {
            left: block.len(),
            right: space.k,
        });
    }
    let numerators: Vec<i64> = block
        .iter()
        .map(|&x| stochastic_round_numerator(x, space.quant_step, rng))
        .collect();
    let index = space.index_of_numerators(&numerators);
    Ok(SubgAlpha {
        index,
        value: space.value(index),
        codeword: space.codeword_of(index),
    })
}
