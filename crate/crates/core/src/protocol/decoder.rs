//! Student side: grid scores `L(theta) = sum_j log f(theta, Z^j)`, the
//! survivor set and the midpoint rule.
//!
//! The survivor set keeps every grid point whose score strictly beats the
//! best score at distance at least the exclusion radius. With prefix and
//! suffix maxima of `L` this is linear in the grid size once the scores are
//! known; the scores dominate the cost.

use super::teacher::IndexSpace;
use crate::channel::ChannelModel;
use crate::codebook::Codebook;
use crate::error::{check_range, Error, Result};
use crate::numeric::{xlny, LnFactorials, LogSumExp};

/// Equally spaced points `lo + i * step`, `i = 0..len`, inside `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    lo: f64,
    step: f64,
    len: usize,
}

/// Slack used when deciding whether a ratio is an integer.
const INDEX_TOLERANCE: f64 = 1e-9;

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        check_range("grid_step", step, step > 0.0 && step.is_finite(), "grid_step > 0")?;
        if !(lo <= hi) {
            return Err(Error::InvalidConfig(format!("empty grid range [{lo}, {hi}]")));
        }
        let count = ((hi - lo) / step + INDEX_TOLERANCE).floor() + 1.0;
        if count > 5e8 {
            return Err(Error::InvalidConfig(format!(
                "grid of {count} points is too fine; set a grid override"
            )));
        }
        Ok(Self {
            lo,
            step,
            len: count as usize,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    fn position(&self, x: f64) -> f64 {
        (x - self.lo) / self.step
    }

    fn clamp(&self, i: f64) -> usize {
        i.max(0.0).min((self.len - 1) as f64) as usize
    }

    /// Index of the grid point nearest to `x` (ties go up).
    pub fn nearest(&self, x: f64) -> usize {
        self.clamp((self.position(x) + 0.5).floor())
    }

    /// Index of `x` rounded to the grid towards `target`; the nearest point
    /// when `x` is (numerically) on the grid or equal to `target`.
    pub fn round_toward(&self, x: f64, target: f64) -> usize {
        let t = self.position(x);
        if (t - t.round()).abs() < INDEX_TOLERANCE || x == target {
            return self.nearest(x);
        }
        if x < target {
            self.clamp(t.ceil())
        } else {
            self.clamp(t.floor())
        }
    }
}

/// Smallest index distance `D` with `D * step >= radius` (up to rounding).
pub fn exclusion_steps(radius: f64, step: f64) -> usize {
    if radius <= 0.0 {
        0
    } else {
        (radius / step - INDEX_TOLERANCE).ceil().max(0.0) as usize
    }
}

/// Relative gap below which two scores count as tied. The fast and reference
/// scorers round differently, and symmetric instances produce exact ties.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-10;

/// `a > b` by more than rounding noise.
pub fn beats(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return a > b;
    }
    a > b + SCORE_TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Indices `i` with `L_i > max{L_j : |i - j| >= d}` (in the sense of
/// [`beats`]); an index with no point that far away survives vacuously.
pub fn survivors(scores: &[f64], d: usize) -> Vec<usize> {
    let n = scores.len();
    if n == 0 {
        return Vec::new();
    }
    let mut prefix = scores.to_vec();
    for i in 1..n {
        prefix[i] = prefix[i].max(prefix[i - 1]);
    }
    let mut suffix = scores.to_vec();
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    (0..n)
        .filter(|&i| {
            let left = (i >= d).then(|| prefix[i - d]);
            let right = (i + d < n).then(|| suffix[i + d]);
            match (left, right) {
                (None, None) => true,
                (l, r) => beats(scores[i], l.unwrap_or(f64::NEG_INFINITY).max(r.unwrap_or(f64::NEG_INFINITY))),
            }
        })
        .collect()
}

/// Everything the student computed for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderState {
    pub grid: Grid,
    pub log_scores: Vec<f64>,
    /// Grid indices of the survivor set, increasing.
    pub survivors: Vec<usize>,
    pub exclusion_radius: f64,
    pub exclusion_steps: usize,
    /// The survivor set was empty and the estimate is the first maximizer.
    pub fallback_used: bool,
    pub theta_hat: f64,
}

impl DecoderState {
    pub fn from_scores(grid: Grid, log_scores: Vec<f64>, exclusion_radius: f64) -> Self {
        let d = exclusion_steps(exclusion_radius, grid.step());
        let survivors = survivors(&log_scores, d);
        let (theta_hat, fallback_used) = match (survivors.first(), survivors.last()) {
            (Some(&a), Some(&b)) => (midpoint(&grid, a, b), false),
            _ => (grid.value(first_argmax(&log_scores)), true),
        };
        Self {
            grid,
            log_scores,
            survivors,
            exclusion_radius,
            exclusion_steps: d,
            fallback_used,
            theta_hat,
        }
    }

    pub fn survivor_values(&self) -> Vec<f64> {
        self.survivors.iter().map(|&i| self.grid.value(i)).collect()
    }
}

pub(crate) fn midpoint(grid: &Grid, a: usize, b: usize) -> f64 {
    0.5 * (grid.value(a) + grid.value(b))
}

pub(crate) fn first_argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Codewords and channel log-probabilities laid out flat for the scorers.
#[derive(Clone, Debug)]
struct LikelihoodTable {
    k: usize,
    outputs: usize,
    ln_prob: Vec<f64>,
    codewords: Vec<u8>,
}

impl LikelihoodTable {
    fn new(codebook: &Codebook, count: usize, channel: &ChannelModel) -> Result<Self> {
        if codebook.m() < count {
            return Err(Error::CodebookTooSmall {
                available: codebook.m(),
                required: count,
            });
        }
        let inputs = channel.input_alphabet_size();
        let outputs = channel.output_alphabet_size();
        let mut codewords = Vec::with_capacity(count * codebook.k());
        for w in &codebook.codewords()[..count] {
            w.validate(inputs)?;
            codewords.extend_from_slice(w.symbols());
        }
        let ln_prob = (0..inputs)
            .flat_map(|w| (0..outputs).map(move |z| (w, z)))
            .map(|(w, z)| channel.ln_prob(w, z))
            .collect();
        Ok(Self {
            k: codebook.k(),
            outputs,
            ln_prob,
            codewords,
        })
    }

    /// `(1/2) log P(z | W_c)` for every codeword `c`, written into `out`.
    fn half_log_likelihoods(&self, z: &[u8], out: &mut Vec<f64>) {
        out.clear();
        for w in self.codewords.chunks_exact(self.k) {
            let mut s = 0.0;
            for (&a, &b) in w.iter().zip(z) {
                s += self.ln_prob[a as usize * self.outputs + b as usize];
            }
            out.push(0.5 * s);
        }
    }
}

fn check_blocks(blocks: &[&[u8]], k: usize, outputs: usize) -> Result<()> {
    if blocks.is_empty() {
        return Err(Error::NoUsableBlocks);
    }
    for b in blocks {
        if b.len() != k {
            return Err(Error::LengthMismatch {
                left: b.len(),
                right: k,
            });
        }
        if let Some(position) = b.iter().position(|&z| z as usize >= outputs) {
            return Err(Error::SymbolOutOfRange {
                symbol: b[position] as usize,
                position,
                alphabet: outputs,
            });
        }
    }
    Ok(())
}

const LANES: usize = 32;
/// Products are renormalized by `2^RESCALE_BITS` when they leave this range.
const RESCALE_BITS: i32 = 600;
/// Below this a single block factor is recomputed in the log domain.
const UNDERFLOW_GUARD: f64 = 1e-290;

#[inline(always)]
fn horner_lanes(coeffs: &[f64], x: &[f64; LANES]) -> [f64; LANES] {
    let mut acc = [0.0f64; LANES];
    for &c in coeffs {
        for l in 0..LANES {
            acc[l] = acc[l] * x[l] + c;
        }
    }
    acc
}

#[inline(always)]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Precomputed Bernoulli scorer for one `(k, grid, codebook, channel)`.
///
/// For `0 < theta <= 1/2` one block factor is
/// `f = e^{b_max} (1-theta)^{k/2} r^{a_lo} H(r)`, `r = sqrt(theta/(1-theta))`,
/// with `H` a polynomial whose coefficients `e^{b_alpha - b_max}` lie in
/// `[0, 1]`; for `theta > 1/2` the mirrored form uses
/// `s = sqrt((1-theta)/theta)`. Products over blocks are kept in the linear
/// domain with explicit exponent bookkeeping, so each grid point pays one
/// Horner evaluation per block and a single logarithm overall. Endpoints
/// and any factor that would underflow go through log-sum-exp instead.
#[derive(Clone, Debug)]
pub struct BernoulliScorer {
    k: usize,
    grid: Grid,
    table: LikelihoodTable,
    half_ln_choose: Vec<f64>,
    ln_theta: Vec<f64>,
    ln_one_minus: Vec<f64>,
    /// `r` below the split, `s` from the split on (interior points only).
    x: Vec<f64>,
    ln_x: Vec<f64>,
    /// Interior points `[first, split)` use `r`, `[split, end)` use `s`.
    first: usize,
    split: usize,
    end: usize,
}

impl BernoulliScorer {
    pub fn new(grid: Grid, codebook: &Codebook, channel: &ChannelModel) -> Result<Self> {
        let k = codebook.k();
        let table = LikelihoodTable::new(codebook, k + 1, channel)?;
        let lf = LnFactorials::up_to(k);
        let half_ln_choose = (0..=k).map(|a| 0.5 * lf.ln_choose(k, a)).collect();
        let thetas = grid.values();
        if thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidConfig("Bernoulli grid must lie in [0, 1]".into()));
        }
        let first = thetas.iter().position(|&t| t > 0.0).unwrap_or(thetas.len());
        let end = thetas.iter().rposition(|&t| t < 1.0).map_or(first, |i| i + 1).max(first);
        let split = (first..end).find(|&i| thetas[i] > 0.5).unwrap_or(end);
        let x: Vec<f64> = thetas
            .iter()
            .enumerate()
            .map(|(i, &t)| if i < split { (t / (1.0 - t)).sqrt() } else { ((1.0 - t) / t).sqrt() })
            .collect();
        Ok(Self {
            k,
            grid,
            table,
            half_ln_choose,
            ln_theta: thetas.iter().map(|t| t.ln()).collect(),
            ln_one_minus: thetas.iter().map(|t| (1.0 - t).ln()).collect(),
            ln_x: x.iter().map(|v| v.ln()).collect(),
            x,
            first,
            split,
            end,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `b_alpha = (1/2) ln C(k, alpha) + (1/2) ln P(Z | W_alpha)` per block.
    fn block_coefficients(&self, blocks: &[&[u8]]) -> Vec<Vec<f64>> {
        let mut half = Vec::with_capacity(self.k + 1);
        blocks
            .iter()
            .map(|z| {
                self.table.half_log_likelihoods(z, &mut half);
                half.iter().zip(&self.half_ln_choose).map(|(h, c)| h + c).collect()
            })
            .collect()
    }

    /// Exact `L(theta_i)` by log-sum-exp over every block.
    fn exact_score(&self, i: usize, coefficients: &[Vec<f64>]) -> f64 {
        let theta = self.grid.value(i);
        let k = self.k;
        let mut total = 0.0;
        for b in coefficients {
            let mut acc = LogSumExp::default();
            for (alpha, &ba) in b.iter().enumerate() {
                acc.push(ba + 0.5 * (xlny(alpha as f64, theta) + xlny((k - alpha) as f64, 1.0 - theta)));
            }
            total += acc.value();
        }
        total
    }

    pub fn scores(&self, blocks: &[&[u8]]) -> Result<Vec<f64>> {
        check_blocks(blocks, self.k, self.table.outputs)?;
        let coefficients = self.block_coefficients(blocks);
        let n = self.grid.len();
        let k = self.k;
        let mut prod = vec![1.0f64; n];
        let mut exps = vec![0i32; n];
        let mut exact = vec![false; n];
        let mut shift = 0.0;
        let mut low_power = 0usize;
        let mut high_power = 0usize;
        let mut c = vec![0.0; k + 1];
        let mut desc = Vec::with_capacity(k + 1);
        for b in &coefficients {
            let b_max = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if b_max == f64::NEG_INFINITY {
                // this block is impossible under every codeword
                return Ok(vec![f64::NEG_INFINITY; n]);
            }
            shift += b_max;
            for (ci, &bi) in c.iter_mut().zip(b) {
                *ci = (bi - b_max).exp();
            }
            let lo = c.iter().position(|&v| v > 0.0).expect("b_max term is 1");
            let hi = c.iter().rposition(|&v| v > 0.0).expect("b_max term is 1");
            low_power += lo;
            high_power += k - hi;
            if lo == hi {
                continue;
            }
            desc.clear();
            desc.extend(c[lo..=hi].iter().rev());
            self.multiply_side(&desc, self.first, self.split, &mut prod, &mut exact);
            self.multiply_side(&c[lo..=hi], self.split, self.end, &mut prod, &mut exact);
            for i in self.first..self.end {
                let p = prod[i];
                if !(p > 1e-150 && p < 1e150) && p > 0.0 && p.is_finite() {
                    let e = if p < 1.0 { -RESCALE_BITS } else { RESCALE_BITS };
                    prod[i] = p * 2f64.powi(-e);
                    exps[i] += e;
                }
            }
        }
        let blocks_f = coefficients.len() as f64;
        let half_k = 0.5 * k as f64;
        let ln2 = std::f64::consts::LN_2;
        let mut scores = vec![0.0; n];
        for i in 0..n {
            scores[i] = if i < self.first || i >= self.end || exact[i] || !(prod[i] > 0.0) {
                self.exact_score(i, &coefficients)
            } else if i < self.split {
                shift
                    + blocks_f * half_k * self.ln_one_minus[i]
                    + low_power as f64 * self.ln_x[i]
                    + prod[i].ln()
                    + exps[i] as f64 * ln2
            } else {
                shift
                    + blocks_f * half_k * self.ln_theta[i]
                    + high_power as f64 * self.ln_x[i]
                    + prod[i].ln()
                    + exps[i] as f64 * ln2
            };
        }
        Ok(scores)
    }

    fn multiply_side(&self, coeffs: &[f64], from: usize, to: usize, prod: &mut [f64], exact: &mut [bool]) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("avx2") {
            // same operations and rounding as the portable loop, wider registers
            // SAFETY: the required CPU feature was just detected.
            unsafe { multiply_side_avx2(coeffs, &self.x, from, to, prod, exact) };
            return;
        }
        multiply_side_portable(coeffs, &self.x, from, to, prod, exact);
    }
}

#[inline(always)]
fn multiply_side_portable(coeffs: &[f64], x: &[f64], from: usize, to: usize, prod: &mut [f64], exact: &mut [bool]) {
    let mut i = from;
    while i + LANES <= to {
        let xs: &[f64; LANES] = x[i..i + LANES].try_into().expect("lane width");
        let h = horner_lanes(coeffs, xs);
        for l in 0..LANES {
            prod[i + l] *= h[l];
            exact[i + l] |= h[l] < UNDERFLOW_GUARD;
        }
        i += LANES;
    }
    for j in i..to {
        let h = horner(coeffs, x[j]);
        prod[j] *= h;
        exact[j] |= h < UNDERFLOW_GUARD;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn multiply_side_avx2(coeffs: &[f64], x: &[f64], from: usize, to: usize, prod: &mut [f64], exact: &mut [bool]) {
    multiply_side_portable(coeffs, x, from, to, prod, exact)
}

/// Sub-Gaussian scorer: `L(theta) = sum_j log sum_c exp(-k (theta - v_c)^2 /
/// (4 sigma2) + (1/2) log P(Z^j | W_c))` over the lattice values `v_c`.
#[derive(Clone, Debug)]
pub struct SubgScorer {
    k: usize,
    grid: Grid,
    table: LikelihoodTable,
    values: Vec<f64>,
    kernel_scale: f64,
}

impl SubgScorer {
    pub fn new(
        grid: Grid,
        codebook: &Codebook,
        channel: &ChannelModel,
        sigma2: f64,
        space: &IndexSpace,
    ) -> Result<Self> {
        check_range("sigma2", sigma2, sigma2 > 0.0, "sigma2 > 0")?;
        if codebook.k() != space.k() {
            return Err(Error::LengthMismatch {
                left: codebook.k(),
                right: space.k(),
            });
        }
        let table = LikelihoodTable::new(codebook, space.len(), channel)?;
        Ok(Self {
            k: space.k(),
            grid,
            table,
            values: space.values().collect(),
            kernel_scale: space.k() as f64 / (4.0 * sigma2),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scores(&self, blocks: &[&[u8]]) -> Result<Vec<f64>> {
        check_blocks(blocks, self.k, self.table.outputs)?;
        let thetas = self.grid.values();
        let mut scores = vec![0.0; thetas.len()];
        let mut half = Vec::new();
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for z in blocks {
            self.table.half_log_likelihoods(z, &mut half);
            terms.clear();
            terms.extend(
                self.values
                    .iter()
                    .zip(&half)
                    .filter(|(_, h)| **h > f64::NEG_INFINITY)
                    .map(|(&v, &h)| (v, h)),
            );
            for (s, &theta) in scores.iter_mut().zip(&thetas) {
                let mut max = f64::NEG_INFINITY;
                for &(v, h) in &terms {
                    max = max.max(h - self.kernel_scale * (theta - v) * (theta - v));
                }
                if max == f64::NEG_INFINITY {
                    *s = f64::NEG_INFINITY;
                    continue;
                }
                let sum: f64 = terms
                    .iter()
                    .map(|&(v, h)| (h - self.kernel_scale * (theta - v) * (theta - v) - max).exp())
                    .sum();
                *s += max + sum.ln();
            }
        }
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Word;
    use crate::codebook::{generate_dmc, Metric};
    use crate::protocol::score::log_f_bernoulli;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_layout() {
        let g = Grid::new(0.0, 1.0, 1.0 / 20.0).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g.value(20), 1.0);
        assert_eq!(g.round_toward(0.31, 0.5), 7);
        assert_eq!(g.round_toward(0.69, 0.5), 13);
        assert_eq!(g.round_toward(0.35, 0.5), 7);
        assert_eq!(g.nearest(0.33), 7);
        let coarse = Grid::new(0.0, 1.0, 0.3).unwrap();
        assert_eq!(coarse.len(), 4);
        assert!(Grid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exclusion_distance() {
        // 2 eps - 2 h with eps = 0.1, h = 1/40 is six steps
        assert_eq!(exclusion_steps(0.2 - 2.0 / 40.0, 1.0 / 40.0), 6);
        assert_eq!(exclusion_steps(0.25, 0.1), 3);
        assert_eq!(exclusion_steps(0.0, 0.1), 0);
    }

    #[test]
    fn survivor_rule() {
        let scores = [0.0, 1.0, 3.0, 2.5, 0.5, -1.0];
        assert_eq!(survivors(&scores, 2), vec![2, 3]);
        assert_eq!(survivors(&scores, 1), vec![2]);
        assert_eq!(survivors(&scores, 0), Vec::<usize>::new());
        // nobody is far from anybody
        assert_eq!(survivors(&scores, 10), (0..6).collect::<Vec<_>>());
        // a rounding-level lead is a tie
        assert_eq!(survivors(&[-5.0, 0.0, -5.0 * (1.0 - 1e-15)], 2), vec![1]);
        assert!(beats(0.0, f64::NEG_INFINITY) && !beats(f64::NEG_INFINITY, f64::NEG_INFINITY));
        let state = DecoderState::from_scores(Grid::new(0.0, 0.5, 0.1).unwrap(), scores.to_vec(), 0.2);
        assert_eq!(state.survivors, vec![2, 3]);
        assert!((state.theta_hat - 0.25).abs() < 1e-15);
        let flat = DecoderState::from_scores(Grid::new(0.0, 0.5, 0.1).unwrap(), vec![1.0; 6], 0.05);
        assert!(flat.fallback_used && flat.theta_hat == 0.0);
    }

    #[test]
    fn fast_scores_match_log_sum_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (k, p) in [(6usize, 0.1), (9, 0.25), (30, 0.05)] {
            let ch = ChannelModel::bsc(p).unwrap();
            let book = generate_dmc(k, k + 1, &ch, &mut rng, 0.5, 10_000).unwrap();
            let grid = Grid::new(0.0, 1.0, 1.0 / 50.0).unwrap();
            let scorer = BernoulliScorer::new(grid, &book, &ch).unwrap();
            let blocks: Vec<Vec<u8>> = (0..5)
                .map(|_| (0..k).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let refs: Vec<&[u8]> = blocks.iter().map(|b| &b[..]).collect();
            let fast = scorer.scores(&refs).unwrap();
            for (i, &s) in fast.iter().enumerate() {
                let direct: f64 = blocks
                    .iter()
                    .map(|b| log_f_bernoulli(grid.value(i), &Word::new(b.clone()), &book, &ch).unwrap())
                    .sum();
                assert!((s - direct).abs() <= 1e-10 * direct.abs().max(1.0), "k={k} i={i}: {s} vs {direct}");
            }
        }
    }

    #[test]
    fn noiseless_blocks_are_monomials() {
        let ch = ChannelModel::noiseless(2);
        let words: Vec<Word> = ["0000", "1000", "1100", "1110", "1111"]
            .iter()
            .map(|w| Word::from_digits(w).unwrap())
            .collect();
        let book = Codebook::new(words, Metric::Hamming, None).unwrap();
        let grid = Grid::new(0.0, 1.0, 1.0 / 8.0).unwrap();
        let scorer = BernoulliScorer::new(grid, &book, &ch).unwrap();
        let blocks: [&[u8]; 2] = [&[1, 1, 0, 0], &[1, 0, 0, 0]];
        let s = scorer.scores(&blocks).unwrap();
        let lf = LnFactorials::up_to(4);
        for (i, &v) in s.iter().enumerate() {
            let t = grid.value(i);
            let expected = 0.5 * (lf.ln_binomial_pmf(4, 2, t) + lf.ln_binomial_pmf(4, 1, t));
            assert!((v - expected).abs() < 1e-12 || v == expected, "{i}: {v} vs {expected}");
        }
        // a block that matches no codeword rules everything out
        let impossible: [&[u8]; 1] = [&[0, 1, 0, 1]];
        assert!(scorer.scores(&impossible).unwrap().iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn block_shape_errors() {
        let ch = ChannelModel::bsc(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let book = generate_dmc(4, 5, &ch, &mut rng, 0.9, 1000).unwrap();
        let scorer = BernoulliScorer::new(Grid::new(0.0, 1.0, 0.125).unwrap(), &book, &ch).unwrap();
        assert_eq!(scorer.scores(&[]), Err(Error::NoUsableBlocks));
        assert!(scorer.scores(&[&[0, 1, 1]]).is_err());
        assert!(scorer.scores(&[&[0, 1, 1, 2]]).is_err());
    }
}
