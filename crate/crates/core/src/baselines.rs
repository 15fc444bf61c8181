//! Comparison strategies: direct observation, simple forwarding and the
//! two estimate-then-forward schemes (one-shot and the hypothetical
//! non-causal one).

use crate::channel::{ChannelModel, Word};
use crate::codebook::Codebook;
use crate::error::{check_range, Error, Result};
use crate::numeric::{abs_diff_exceeds, xlny};
use crate::protocol::{DecoderState, Grid, SourceModel};
use rand::Rng;
use serde::Serialize;

/// Odd multiples of `delta_eps` inside a range, plus the right endpoint if
/// it would otherwise be left uncovered.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantizerGrid {
    pub points: Vec<f64>,
    pub step: f64,
}

const COVER_TOLERANCE: f64 = 1e-12;

pub fn quantizer_grid(delta_eps: f64, lo: f64, hi: f64) -> Result<QuantizerGrid> {
    check_range("delta_eps", delta_eps, delta_eps > 0.0 && delta_eps.is_finite(), "delta_eps > 0")?;
    if !(lo < hi) {
        return Err(Error::InvalidConfig(format!("empty quantizer range [{lo}, {hi}]")));
    }
    let mut points = Vec::new();
    let mut j = 0u64;
    loop {
        let p = lo + (2 * j + 1) as f64 * delta_eps;
        if p > hi + COVER_TOLERANCE * delta_eps {
            break;
        }
        points.push(p.min(hi));
        j += 1;
    }
    match points.last() {
        Some(&last) if hi - last <= delta_eps * (1.0 + COVER_TOLERANCE) => {}
        _ => points.push(hi),
    }
    Ok(QuantizerGrid {
        points,
        step: 2.0 * delta_eps,
    })
}

impl QuantizerGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the nearest point (ties go to the lower one).
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.points.partition_point(|&p| p < x);
        match i {
            0 => 0,
            _ if i == self.points.len() => i - 1,
            _ if x - self.points[i - 1] <= self.points[i] - x => i - 1,
            _ => i,
        }
    }

    pub fn covering_radius(&self, lo: f64, hi: f64) -> f64 {
        let mut r = (self.points[0] - lo).max(hi - self.points[self.points.len() - 1]);
        for w in self.points.windows(2) {
            r = r.max(0.5 * (w[1] - w[0]));
        }
        r
    }
}

/// Default decoder spacing for `m` direct observations.
pub fn default_direct_step(source: &SourceModel, m: usize, eps: f64) -> f64 {
    let m = m as f64;
    if source.is_bernoulli() {
        1.0 / (2.0 * m)
    } else {
        (1.0 / (m * m)).max(eps / 50.0)
    }
}

/// Pairwise-test estimator on directly observed samples: exact log
/// likelihood on a grid over the source's mean range, exclusion radius
/// `2 eps - 2 step`, midpoint of the survivors.
pub fn direct_estimator(samples: &[f64], source: &SourceModel, eps: f64, grid_step: f64) -> Result<DecoderState> {
    check_range("eps", eps, eps > 0.0, "eps > 0")?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig("direct estimator needs at least one sample".into()));
    }
    let (lo, hi) = source.mean_range();
    let grid = Grid::new(lo, hi, grid_step)?;
    let scores: Vec<f64> = if source.is_bernoulli() {
        let mut ones = 0usize;
        for &x in samples {
            if x == 1.0 {
                ones += 1;
            } else if x != 0.0 {
                return Err(Error::InvalidConfig(format!("non-binary sample {x}")));
            }
        }
        let (c, z) = (ones as f64, (samples.len() - ones) as f64);
        grid.values().iter().map(|&t| xlny(c, t) + xlny(z, 1.0 - t)).collect()
    } else {
        // Gaussian log likelihood up to a positive factor and a constant
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        grid.values().iter().map(|&t| -(t - mean) * (t - mean)).collect()
    };
    Ok(DecoderState::from_scores(grid, scores, 2.0 * eps - 2.0 * grid_step))
}

/// Maximum-likelihood message; ties go to the smallest index.
pub fn ml_decode(codebook: &Codebook, channel: &ChannelModel, received: &Word) -> Result<usize> {
    if received.len() != codebook.k() {
        return Err(Error::LengthMismatch {
            left: received.len(),
            right: codebook.k(),
        });
    }
    received.validate(channel.output_alphabet_size())?;
    for w in codebook.codewords() {
        w.validate(channel.input_alphabet_size())?;
    }
    // On a BSC the likelihood is monotone in Hamming distance; deciding on
    // integer distances keeps exact ties exact.
    if let Some(p) = channel.bsc_crossover() {
        let distances = codebook.codewords().iter().map(|w| w.hamming(received).expect("lengths checked"));
        let pick = if p < 0.5 {
            distances.enumerate().min_by_key(|&(i, d)| (d, i))
        } else {
            distances.enumerate().min_by_key(|&(i, _)| i)
        };
        return Ok(pick.map_or(0, |(i, _)| i));
    }
    // Otherwise sum over symbol-pair counts in a fixed order, so equal
    // count profiles give bit-identical likelihoods.
    let outputs = channel.output_alphabet_size();
    let mut counts = vec![0u32; channel.input_alphabet_size() * outputs];
    let mut best = (0, f64::NEG_INFINITY);
    for (i, w) in codebook.codewords().iter().enumerate() {
        counts.iter_mut().for_each(|c| *c = 0);
        for (&a, &b) in w.symbols().iter().zip(received.symbols()) {
            counts[a as usize * outputs + b as usize] += 1;
        }
        let mut l = 0.0;
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                l += c as f64 * channel.ln_prob(j / outputs, j % outputs);
            }
        }
        if l > best.1 || i == 0 {
            best = (i, l);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleForwardingRun {
    pub theta_hat: f64,
    /// Estimate of the mixed mean `theta (1 - p) + (1 - theta) p`.
    pub internal: f64,
}

/// Every sample is forwarded raw one use later; the student estimates the
/// mean seen through the BSC at accuracy `(1 - 2p) eps` and inverts the
/// mixing. The first use carries a fixed 0 and is discarded.
pub fn run_simple_forwarding<R: Rng + ?Sized>(
    source: &SourceModel,
    channel: &ChannelModel,
    n: usize,
    eps: f64,
    grid_step: Option<f64>,
    rng: &mut R,
) -> Result<SimpleForwardingRun> {
    if !source.is_bernoulli() {
        return Err(Error::InvalidConfig("simple forwarding needs a Bernoulli source".into()));
    }
    let p = channel
        .bsc_crossover()
        .ok_or_else(|| Error::InvalidConfig("simple forwarding needs a binary symmetric channel".into()))?;
    if p >= 0.5 {
        return Err(Error::InvalidChannel(format!("crossover {p} carries no information")));
    }
    if n < 2 {
        return Err(Error::InvalidConfig("simple forwarding needs n >= 2".into()));
    }
    let mut x = vec![0.0; n];
    source.sample_into(&mut x, rng);
    // use i sends x[i - 1]; use 0 is the fixed symbol and is dropped
    let z: Vec<f64> = x[..n - 1]
        .iter()
        .map(|&v| channel.sample_output(v as usize, rng) as f64)
        .collect();
    let inner_eps = (1.0 - 2.0 * p) * eps;
    let step = grid_step.unwrap_or(1.0 / (2.0 * z.len() as f64));
    let internal = direct_estimator(&z, source, inner_eps, step)?.theta_hat;
    Ok(SimpleForwardingRun {
        theta_hat: (internal - p) / (1.0 - 2.0 * p),
        internal,
    })
}

/// Estimate with part of the samples, quantize, send the quantizer index
/// as one codeword. The non-causal variant is a thought experiment in
/// which all `n` samples and all `n` channel uses are available at once.
#[derive(Clone, Debug)]
pub struct EstimateForward {
    pub eps: f64,
    pub delta: f64,
    pub source_samples: usize,
    pub channel_uses: usize,
    pub quantizer: QuantizerGrid,
    pub hypothetical: bool,
    codebook: Codebook,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateForwardRun {
    pub theta_hat: f64,
    pub teacher_estimate: f64,
    pub sent: usize,
    pub decoded: usize,
}

impl EstimateForward {
    /// `(source samples, channel uses)` for a one-shot split.
    pub fn oneshot_budget(n: usize, lambda: f64) -> Result<(usize, usize)> {
        check_range("lambda", lambda, lambda > 0.0 && lambda < 1.0, "0 < lambda < 1")?;
        let uses = (lambda * n as f64).floor() as usize;
        if uses == 0 || uses == n {
            return Err(Error::InvalidConfig(format!("lambda = {lambda} leaves an empty stage at n = {n}")));
        }
        Ok((n - uses, uses))
    }

    /// Quantizer the teacher uses for a given `(eps, delta)`.
    pub fn quantizer_for(source: &SourceModel, eps: f64, delta: f64) -> Result<QuantizerGrid> {
        check_range("delta", delta, delta > 0.0 && delta < 1.0, "0 < delta < 1")?;
        check_range("eps", eps, eps > 0.0, "eps > 0")?;
        let (lo, hi) = source.mean_range();
        quantizer_grid(delta * eps, lo, hi)
    }

    pub fn oneshot(source: &SourceModel, n: usize, eps: f64, lambda: f64, delta: f64, codebook: Codebook) -> Result<Self> {
        let (samples, uses) = Self::oneshot_budget(n, lambda)?;
        Self::build(source, samples, uses, eps, delta, codebook, false)
    }

    pub fn noncausal(source: &SourceModel, n: usize, eps: f64, delta: f64, codebook: Codebook) -> Result<Self> {
        Self::build(source, n, n, eps, delta, codebook, true)
    }

    fn build(
        source: &SourceModel,
        source_samples: usize,
        channel_uses: usize,
        eps: f64,
        delta: f64,
        codebook: Codebook,
        hypothetical: bool,
    ) -> Result<Self> {
        let quantizer = Self::quantizer_for(source, eps, delta)?;
        if codebook.k() != channel_uses {
            return Err(Error::LengthMismatch {
                left: codebook.k(),
                right: channel_uses,
            });
        }
        if codebook.m() < quantizer.len() {
            return Err(Error::CodebookTooSmall {
                available: codebook.m(),
                required: quantizer.len(),
            });
        }
        Ok(Self {
            eps,
            delta,
            source_samples,
            channel_uses,
            quantizer,
            hypothetical,
            codebook,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn run<R: Rng + ?Sized>(&self, source: &SourceModel, channel: &ChannelModel, rng: &mut R) -> Result<EstimateForwardRun> {
        let mut x = vec![0.0; self.source_samples];
        source.sample_into(&mut x, rng);
        let inner = (1.0 - self.delta) * self.eps;
        let step = default_direct_step(source, x.len(), inner);
        let teacher_estimate = direct_estimator(&x, source, inner, step)?.theta_hat;
        let sent = self.quantizer.nearest(teacher_estimate);
        let received = channel.transmit(self.codebook.codeword(sent), rng)?;
        let decoded = ml_decode(&self.codebook, channel, &received)?;
        let decoded = decoded.min(self.quantizer.len() - 1);
        Ok(EstimateForwardRun {
            theta_hat: self.quantizer.points[decoded],
            teacher_estimate,
            sent,
            decoded,
        })
    }
}

pub fn run_oneshot<R: Rng + ?Sized>(
    source: &SourceModel,
    channel: &ChannelModel,
    n: usize,
    eps: f64,
    lambda: f64,
    delta: f64,
    codebook: Codebook,
    rng: &mut R,
) -> Result<EstimateForwardRun> {
    EstimateForward::oneshot(source, n, eps, lambda, delta, codebook)?.run(source, channel, rng)
}

pub fn run_noncausal<R: Rng + ?Sized>(
    source: &SourceModel,
    channel: &ChannelModel,
    n: usize,
    eps: f64,
    delta: f64,
    codebook: Codebook,
    rng: &mut R,
) -> Result<EstimateForwardRun> {
    EstimateForward::noncausal(source, n, eps, delta, codebook)?.run(source, channel, rng)
}

/// The miss indicator `|theta_hat - theta_star| > eps`, decided exactly.
pub fn misses(theta_hat: f64, theta_star: f64, eps: f64) -> bool {
    abs_diff_exceeds(theta_hat, theta_star, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{generate_dmc, Metric};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantizer_examples() {
        assert_eq!(quantizer_grid(0.25, 0.0, 1.0).unwrap().points, vec![0.25, 0.75]);
        let g = quantizer_grid(0.24, 0.0, 1.0).unwrap();
        assert_eq!(g.points.len(), 3);
        assert!((g.points[1] - 0.72).abs() < 1e-15 && g.points[2] == 1.0);
        assert!(g.covering_radius(0.0, 1.0) <= 0.24 + 1e-12);
        assert!(quantizer_grid(0.0, 0.0, 1.0).is_err());
        assert_eq!(g.nearest(0.5), 1);
        assert_eq!(g.nearest(0.0), 0);
        assert_eq!(g.nearest(0.95), 2);
    }

    #[test]
    fn direct_on_degenerate_samples() {
        let s = SourceModel::bernoulli(0.9).unwrap();
        let ones = vec![1.0; 50];
        let d = direct_estimator(&ones, &s, 0.1, 0.01).unwrap();
        assert!(d.theta_hat >= 1.0 - 0.1 - 0.01);
        assert!(direct_estimator(&[0.5], &s, 0.1, 0.01).is_err());
    }

    #[test]
    fn ml_decoding() {
        let ch = ChannelModel::bsc(0.1).unwrap();
        let words = vec![Word::from_digits("000000").unwrap(), Word::from_digits("111111").unwrap()];
        let book = Codebook::new(words, Metric::Hamming, None).unwrap();
        assert_eq!(ml_decode(&book, &ch, &Word::from_digits("010100").unwrap()).unwrap(), 0);
        assert_eq!(ml_decode(&book, &ch, &Word::from_digits("011101").unwrap()).unwrap(), 1);
        // a tie goes to the first message
        assert_eq!(ml_decode(&book, &ch, &Word::from_digits("000111").unwrap()).unwrap(), 0);
        assert!(ml_decode(&book, &ch, &Word::from_digits("0001").unwrap()).is_err());
    }

    #[test]
    fn forwarding_with_clean_channel_is_direct() {
        let s = SourceModel::bernoulli(0.3).unwrap();
        let ch = ChannelModel::noiseless(2);
        for seed in 0..20 {
            let run = run_simple_forwarding(&s, &ch, 400, 0.1, None, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = vec![0.0; 400];
            s.sample_into(&mut x, &mut rng);
            let d = direct_estimator(&x[..399], &s, 0.1, 1.0 / 798.0).unwrap();
            assert_eq!(run.theta_hat, d.theta_hat);
        }
    }

    #[test]
    fn forwarding_undoes_mixing() {
        let s = SourceModel::bernoulli(0.0).unwrap();
        let ch = ChannelModel::bsc(0.1).unwrap();
        let run = run_simple_forwarding(&s, &ch, 20_000, 0.05, None, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!((run.internal - 0.1).abs() < 0.02);
        assert!(run.theta_hat.abs() < 0.03);
        assert!(run_simple_forwarding(&SourceModel::gaussian(0.0, 1.0).unwrap(), &ch, 10, 0.1, None, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn oneshot_layout_and_accuracy() {
        let s = SourceModel::bernoulli(0.5).unwrap();
        let ch = ChannelModel::bsc(0.1).unwrap();
        let (m, k) = EstimateForward::oneshot_budget(1000, 0.3).unwrap();
        assert_eq!((m, k), (700, 300));
        let q = EstimateForward::quantizer_for(&s, 0.2, 0.5).unwrap();
        assert_eq!(q.len(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let book = generate_dmc(k, q.len(), &ch, &mut rng, 0.2, 10_000).unwrap();
        let plan = EstimateForward::oneshot(&s, 1000, 0.2, 0.3, 0.5, book.clone()).unwrap();
        let miss = (0..200)
            .filter(|_| misses(plan.run(&s, &ch, &mut rng).unwrap().theta_hat, 0.5, 0.2))
            .count();
        assert_eq!(miss, 0);
        assert!(EstimateForward::oneshot(&s, 1000, 0.2, 0.4, 0.5, book.clone()).is_err());
        let short = generate_dmc(k, 3, &ch, &mut rng, 0.2, 100).unwrap();
        assert!(matches!(
            EstimateForward::oneshot(&s, 1000, 0.2, 0.3, 0.5, short),
            Err(Error::CodebookTooSmall { .. })
        ));
        let nc_book = generate_dmc(50, q.len(), &ch, &mut rng, 0.2, 10_000).unwrap();
        let nc = EstimateForward::noncausal(&s, 50, 0.2, 0.5, nc_book).unwrap();
        assert!(nc.hypothetical && nc.source_samples == 50 && nc.channel_uses == 50);
    }
}
