//! Block protocol: a teacher observing the source encodes each block of `k`
//! samples as one codeword, sent during the next block; a student decodes
//! all received blocks at the end.

pub mod decoder;
pub mod reference;
pub mod score;
pub mod source;
pub mod teacher;

pub use decoder::{beats, exclusion_steps, survivors, BernoulliScorer, DecoderState, Grid, SubgScorer, SCORE_TIE_TOLERANCE};
pub use reference::{reference_decode, ReferenceVariant};
pub use score::{log_f_bernoulli, log_f_subg};
pub use source::{SourceKind, SourceModel, SourceSpec};
pub use teacher::{
    exact_branch_probabilities, group_sizes, median_of_means, rounding_branches, stochastic_round,
    stochastic_round_numerator, teacher_block_bernoulli, teacher_block_subg, BaseEstimator, IndexSpace,
    RoundingBranches, SubgAlpha, MAX_INDEX_SPACE,
};

use crate::channel::ChannelModel;
use crate::codebook::Codebook;
use crate::error::{check_range, Error, Result};
use crate::numeric::abs_diff_exceeds;
use rand::Rng;
use serde::{Deserialize, Serialize};

fn default_estimator() -> BaseEstimator {
    BaseEstimator::SampleMean
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    #[serde(default)]
    pub grid_step: Option<f64>,
    /// Sub-Gaussian only; defaults to `1/k`.
    #[serde(default)]
    pub quant_step: Option<f64>,
    #[serde(default = "default_estimator")]
    pub base_estimator: BaseEstimator,
    /// Coarser grid for runs where the faithful grid is too expensive.
    #[serde(default)]
    pub grid_override: Option<f64>,
}

impl ProtocolConfig {
    pub fn new(n: usize, k: usize, eps: f64) -> Self {
        Self {
            n,
            k,
            eps,
            grid_step: None,
            quant_step: None,
            base_estimator: BaseEstimator::SampleMean,
            grid_override: None,
        }
    }

    pub fn with_grid_override(mut self, step: f64) -> Self {
        self.grid_override = Some(step);
        self
    }

    pub fn with_quant_step(mut self, step: f64) -> Self {
        self.quant_step = Some(step);
        self
    }

    pub fn with_estimator(mut self, estimator: BaseEstimator) -> Self {
        self.base_estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("k = {} must be at least 2", self.k)));
        }
        if self.n < 3 * self.k {
            return Err(Error::InvalidConfig(format!(
                "n = {} must be at least 3k = {}",
                self.n,
                3 * self.k
            )));
        }
        check_range("eps", self.eps, self.eps > 0.0 && self.eps.is_finite(), "eps > 0")?;
        for (name, v) in [
            ("grid_step", self.grid_step),
            ("quant_step", self.quant_step),
            ("grid_override", self.grid_override),
        ] {
            if let Some(v) = v {
                check_range(name, v, v > 0.0 && v.is_finite(), "> 0")?;
            }
        }
        if let BaseEstimator::MedianOfMeans { groups } = self.base_estimator {
            if groups == 0 || groups > self.k {
                return Err(Error::InvalidConfig(format!("median-of-means groups = {groups} must lie in [1, k]")));
            }
        }
        Ok(())
    }

    /// Blocks the student decodes: all full blocks but the first.
    pub fn usable_blocks(&self) -> usize {
        (self.n / self.k).saturating_sub(1)
    }

    pub fn quant_step(&self) -> f64 {
        self.quant_step.unwrap_or(1.0 / self.k as f64)
    }

    /// Faithful grid spacing for the source class.
    pub fn faithful_grid_step(&self, bernoulli: bool) -> f64 {
        let n = self.n as f64;
        if bernoulli {
            1.0 / (2.0 * n)
        } else {
            1.0 / (n * n)
        }
    }

    /// The coarse default for desk-scale sub-Gaussian runs.
    pub fn desk_grid_step(&self) -> f64 {
        let n = self.n as f64;
        (1.0 / (n * n)).max(self.eps / 50.0)
    }

    pub fn grid_step(&self, bernoulli: bool) -> f64 {
        self.grid_override
            .or(self.grid_step)
            .unwrap_or_else(|| self.faithful_grid_step(bernoulli))
    }

    /// `2 eps` minus two grid steps.
    pub fn exclusion_radius(&self, bernoulli: bool) -> f64 {
        2.0 * self.eps - 2.0 * self.grid_step(bernoulli)
    }
}

/// One teacher message.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Channel block carrying the message (the first one, 0, carries none).
    pub block: usize,
    /// Message index: ones count, or lattice index for the sub-Gaussian case.
    pub alpha: i64,
    pub alpha_value: f64,
    pub codeword: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<BlockRecord>,
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?;
        Ok(Self { records })
    }

    /// Checks block numbering and the message-to-codeword map against a
    /// run layout.
    pub fn check(&self, runner: &ProtocolRunner) -> Result<()> {
        let expected = runner.config.usable_blocks();
        if self.records.len() != expected {
            return Err(Error::LengthMismatch {
                left: self.records.len(),
                right: expected,
            });
        }
        for (j, r) in self.records.iter().enumerate() {
            let bad = |what: &str| Error::Parse(format!("record {}: {what}", j + 1));
            if r.block != j + 1 {
                return Err(bad("block numbers must run 1, 2, ..."));
            }
            match &runner.space {
                None => {
                    if r.alpha < 0 || r.alpha as usize > runner.config.k {
                        return Err(bad("ones count outside [0, k]"));
                    }
                    if r.codeword != r.alpha as usize || r.alpha_value != r.alpha as f64 {
                        return Err(bad("codeword does not match ones count"));
                    }
                }
                Some(space) => {
                    if !space.contains(r.alpha) {
                        return Err(bad("lattice index outside the clip range"));
                    }
                    if r.codeword != space.codeword_of(r.alpha) || r.alpha_value != space.value(r.alpha) {
                        return Err(bad("codeword does not match lattice index"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Scorer {
    Bernoulli(BernoulliScorer),
    SubGaussian(SubgScorer),
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub theta_hat: f64,
    pub state: DecoderState,
    pub transcript: Transcript,
}

/// A validated `(source, channel, codebook, config)` with the student's
/// tables precomputed, so repeated trials only pay for sampling and scoring.
#[derive(Clone, Debug)]
pub struct ProtocolRunner {
    config: ProtocolConfig,
    source: SourceModel,
    channel: ChannelModel,
    codebook: Codebook,
    space: Option<IndexSpace>,
    scorer: Scorer,
    radius: f64,
}

impl ProtocolRunner {
    pub fn new(source: SourceModel, channel: ChannelModel, codebook: Codebook, config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        if codebook.k() != config.k {
            return Err(Error::LengthMismatch {
                left: codebook.k(),
                right: config.k,
            });
        }
        let bernoulli = source.is_bernoulli();
        if bernoulli && config.base_estimator != BaseEstimator::SampleMean {
            return Err(Error::InvalidConfig(
                "Bernoulli sources use the ones count; median-of-means does not apply".into(),
            ));
        }
        let (lo, hi) = source.mean_range();
        let grid = Grid::new(lo, hi, config.grid_step(bernoulli))?;
        let (space, scorer) = if bernoulli {
            (None, Scorer::Bernoulli(BernoulliScorer::new(grid, &codebook, &channel)?))
        } else {
            let sigma2 = source
                .sigma2()
                .ok_or_else(|| Error::InvalidConfig("sub-Gaussian source needs sigma2".into()))?;
            let space = IndexSpace::new(config.k, config.quant_step(), config.base_estimator, source.clip_c())?;
            let scorer = SubgScorer::new(grid, &codebook, &channel, sigma2, &space)?;
            (Some(space), Scorer::SubGaussian(scorer))
        };
        let radius = config.exclusion_radius(bernoulli);
        Ok(Self {
            config,
            source,
            channel,
            codebook,
            space,
            scorer,
            radius,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn source(&self) -> &SourceModel {
        &self.source
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn index_space(&self) -> Option<&IndexSpace> {
        self.space.as_ref()
    }

    pub fn grid(&self) -> Grid {
        match &self.scorer {
            Scorer::Bernoulli(s) => *s.grid(),
            Scorer::SubGaussian(s) => *s.grid(),
        }
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.radius
    }

    /// Decodes received blocks (channel blocks 1, 2, ...).
    pub fn decode(&self, blocks: &[&[u8]]) -> Result<DecoderState> {
        let scores = match &self.scorer {
            Scorer::Bernoulli(s) => s.scores(blocks)?,
            Scorer::SubGaussian(s) => s.scores(blocks)?,
        };
        Ok(DecoderState::from_scores(self.grid(), scores, self.radius))
    }

    /// Teacher side: the messages and the received blocks. Block 0 carries
    /// no message and is never looked at, so it is not simulated.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Transcript, Vec<u8>)> {
        let k = self.config.k;
        let usable = self.config.usable_blocks();
        let mut samples = vec![0.0; self.config.n];
        self.source.sample_into(&mut samples, rng);
        let mut received = Vec::with_capacity(usable * k);
        let mut records = Vec::with_capacity(usable);
        for (j, block) in samples.chunks_exact(k).take(usable).enumerate() {
            let record = match &self.space {
                None => {
                    let ones = teacher_block_bernoulli(block)?;
                    BlockRecord {
                        block: j + 1,
                        alpha: ones as i64,
                        alpha_value: ones as f64,
                        codeword: ones,
                    }
                }
                Some(space) => {
                    let a = teacher_block_subg(block, space, rng)?;
                    BlockRecord {
                        block: j + 1,
                        alpha: a.index,
                        alpha_value: a.value,
                        codeword: a.codeword,
                    }
                }
            };
            for &w in self.codebook.codeword(record.codeword).symbols() {
                received.push(self.channel.sample_output(w as usize, rng));
            }
            records.push(record);
        }
        Ok((Transcript { records }, received))
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProtocolRun> {
        let (transcript, received) = self.simulate(rng)?;
        let blocks: Vec<&[u8]> = received.chunks_exact(self.config.k).collect();
        let state = self.decode(&blocks)?;
        Ok(ProtocolRun {
            theta_hat: state.theta_hat,
            state,
            transcript,
        })
    }

    /// Whether an estimate misses the target by more than `eps`, decided
    /// exactly.
    pub fn misses(&self, theta_hat: f64) -> bool {
        abs_diff_exceeds(theta_hat, self.source.theta_star(), self.config.eps)
    }

    /// The grid point the analysis compares against: `theta*` rounded
    /// towards 1/2 (Bernoulli) or to the nearest point (sub-Gaussian).
    pub fn theta_double_star(&self) -> f64 {
        let grid = self.grid();
        let t = self.source.theta_star();
        let i = if self.source.is_bernoulli() {
            grid.round_toward(t, 0.5)
        } else {
            grid.nearest(t)
        };
        grid.value(i)
    }
}

pub fn run_protocol<R: Rng + ?Sized>(
    source: &SourceModel,
    channel: &ChannelModel,
    codebook: &Codebook,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<ProtocolRun> {
    ProtocolRunner::new(source.clone(), channel.clone(), codebook.clone(), config.clone())?.run(rng)
}
