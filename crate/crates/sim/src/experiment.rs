//! Monte Carlo error-probability experiments over a list of sample sizes.

use crate::stats::{fit_exponent, fmt_sig, trial_seed, wilson_interval, ExponentFit, Z95};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use relay_core::baselines::{default_direct_step, direct_estimator, run_simple_forwarding, EstimateForward};
use relay_core::channel::{ChannelModel, ChannelSpec};
use relay_core::codebook::{generate_dmc, Codebook};
use relay_core::exponents::{
    optimize_noncausal_capped, optimize_oneshot_capped, ChannelProfile, ExponentReport,
};
use relay_core::numeric::abs_diff_exceeds;
use relay_core::protocol::{BaseEstimator, ProtocolConfig, ProtocolRunner, SourceModel, SourceSpec};
use relay_core::Error as CoreError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Main,
    SimpleForwarding,
    Oneshot,
    Noncausal,
    Direct,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Main => "main",
            Strategy::SimpleForwarding => "simple_forwarding",
            Strategy::Oneshot => "oneshot",
            Strategy::Noncausal => "noncausal",
            Strategy::Direct => "direct",
        }
    }

    /// Runs that assume information no causal scheme has.
    pub fn hypothetical(self) -> bool {
        self == Strategy::Noncausal
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `k = ceil(sqrt(n))`.
    #[default]
    Sqrt,
    Fixed(usize),
}

impl KRule {
    pub fn k(self, n: usize) -> usize {
        match self {
            KRule::Sqrt => {
                let mut k = (n as f64).sqrt().ceil() as usize;
                // guard against sqrt rounding on perfect squares
                while k > 1 && (k - 1) * (k - 1) >= n {
                    k -= 1;
                }
                k
            }
            KRule::Fixed(k) => k,
        }
    }
}

fn default_slack() -> f64 {
    0.2
}

fn default_attempts() -> usize {
    1_000
}

fn default_max_messages() -> u64 {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyParams {
    /// One-shot time split; defaults to the optimized value.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Quantizer fraction; defaults to the optimized value.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub k_rule: KRule,
    #[serde(default)]
    pub grid_override: Option<f64>,
    #[serde(default)]
    pub quant_step: Option<f64>,
    #[serde(default)]
    pub base_estimator: Option<BaseEstimator>,
    #[serde(default = "default_slack")]
    pub codebook_slack: f64,
    #[serde(default = "default_attempts")]
    pub codebook_attempts: usize,
    /// Largest quantizer size the optimized estimate-and-forward baselines
    /// may choose; keeps their codebooks constructible.
    #[serde(default = "default_max_messages")]
    pub max_messages: u64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self {
            lambda: None,
            delta: None,
            k_rule: KRule::Sqrt,
            grid_override: None,
            quant_step: None,
            base_estimator: None,
            codebook_slack: default_slack(),
            codebook_attempts: default_attempts(),
            max_messages: default_max_messages(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub strategy: Strategy,
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub eps: f64,
    pub n_values: Vec<usize>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub params: StrategyParams,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl ExperimentError {
    pub fn is_config(&self) -> bool {
        match self {
            ExperimentError::Config(_) => true,
            ExperimentError::Core(e) => !matches!(
                e,
                CoreError::CodebookGeneration { .. } | CoreError::EnumerationTooLarge { .. }
            ),
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.n_values.is_empty() {
            return bad("n_values is empty".into());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_values must be strictly increasing".into());
        }
        if self.n_values[0] == 0 {
            return bad("n_values must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps = {} must be positive", self.eps));
        }
        if !(self.params.codebook_slack > 0.0 && self.params.codebook_slack < 1.0) {
            return bad("codebook_slack must lie in (0, 1)".into());
        }
        if self.params.max_messages < 2 {
            return bad("max_messages must be at least 2".into());
        }
        self.source.build()?;
        self.channel.build()?;
        Ok(())
    }
}

/// Everything shared by the trials at one sample size.
#[derive(Clone, Debug)]
pub enum Prepared {
    Main(Box<ProtocolRunner>),
    Direct { n: usize, source: SourceModel, eps: f64, step: f64 },
    SimpleForwarding { n: usize, source: SourceModel, channel: ChannelModel, eps: f64, step: Option<f64> },
    EstimateForward { source: SourceModel, channel: ChannelModel, plan: Box<EstimateForward> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrialOutcome {
    pub miss: bool,
    pub fallback: bool,
}

/// Random codebook for `m` messages of length `k`, retrying with more slack
/// if the distance target cannot be met.
pub fn main_codebook(
    k: usize,
    m: usize,
    channel: &ChannelModel,
    seed: u64,
    slack: f64,
    attempts: usize,
) -> Result<Codebook> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slack = slack;
    loop {
        match generate_dmc(k, m, channel, &mut rng, slack, attempts) {
            Ok(book) => return Ok(book),
            Err(CoreError::CodebookGeneration { .. }) if slack + 0.1 < 1.0 => slack += 0.1,
            Err(e) => return Err(e.into()),
        }
    }
}

impl Prepared {
    pub fn new(spec: &ExperimentSpec, n: usize) -> Result<Self> {
        let source = spec.source.build()?;
        let channel = spec.channel.build()?;
        let p = &spec.params;
        let book_seed = trial_seed(spec.master_seed, spec.strategy.name(), n, u64::MAX);
        Ok(match spec.strategy {
            Strategy::Main => {
                let k = p.k_rule.k(n);
                let mut config = ProtocolConfig::new(n, k, spec.eps);
                config.quant_step = p.quant_step;
                if let Some(e) = p.base_estimator {
                    config.base_estimator = e;
                }
                config.grid_override = p.grid_override;
                if config.grid_override.is_none() && !source.is_bernoulli() {
                    config.grid_override = Some(config.desk_grid_step());
                }
                config.validate()?;
                let messages = if source.is_bernoulli() {
                    k + 1
                } else {
                    relay_core::protocol::IndexSpace::new(k, config.quant_step(), config.base_estimator, source.clip_c())?
                        .len()
                };
                let book = main_codebook(k, messages, &channel, book_seed, p.codebook_slack, p.codebook_attempts)?;
                Prepared::Main(Box::new(ProtocolRunner::new(source, channel, book, config)?))
            }
            Strategy::Direct => Prepared::Direct {
                n,
                step: p.grid_override.unwrap_or_else(|| default_direct_step(&source, n, spec.eps)),
                source,
                eps: spec.eps,
            },
            Strategy::SimpleForwarding => Prepared::SimpleForwarding {
                n,
                source,
                channel,
                eps: spec.eps,
                step: p.grid_override,
            },
            Strategy::Oneshot | Strategy::Noncausal => {
                let profile = ChannelProfile::of(&channel);
                let class = source.class();
                let optimum = if spec.strategy == Strategy::Oneshot {
                    optimize_oneshot_capped(spec.eps, class, &profile, p.max_messages)
                } else {
                    optimize_noncausal_capped(spec.eps, class, &profile, p.max_messages)
                };
                let delta = p.delta.unwrap_or(optimum.delta);
                let quantizer = EstimateForward::quantizer_for(&source, spec.eps, delta)?;
                let uses = if spec.strategy == Strategy::Oneshot {
                    EstimateForward::oneshot_budget(n, p.lambda.unwrap_or(optimum.lambda))?.1
                } else {
                    n
                };
                let book = main_codebook(uses, quantizer.len(), &channel, book_seed, p.codebook_slack, p.codebook_attempts)?;
                let plan = if spec.strategy == Strategy::Oneshot {
                    EstimateForward::oneshot(&source, n, spec.eps, p.lambda.unwrap_or(optimum.lambda), delta, book)?
                } else {
                    EstimateForward::noncausal(&source, n, spec.eps, delta, book)?
                };
                Prepared::EstimateForward {
                    source,
                    channel,
                    plan: Box::new(plan),
                }
            }
        })
    }

    /// Block length, for strategies that have one.
    pub fn k(&self) -> Option<usize> {
        match self {
            Prepared::Main(r) => Some(r.config().k),
            _ => None,
        }
    }

    /// The transcript of the main-protocol trial with this seed.
    pub fn transcript(&self, seed: u64) -> Option<Result<relay_core::protocol::Transcript>> {
        match self {
            Prepared::Main(runner) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Some(runner.run(&mut rng).map(|r| r.transcript).map_err(Into::into))
            }
            _ => None,
        }
    }

    pub fn trial(&self, seed: u64) -> Result<TrialOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match self {
            Prepared::Main(runner) => {
                let run = runner.run(&mut rng)?;
                TrialOutcome {
                    miss: runner.misses(run.theta_hat),
                    fallback: run.state.fallback_used,
                }
            }
            Prepared::Direct { n, source, eps, step } => {
                let mut x = vec![0.0; *n];
                source.sample_into(&mut x, &mut rng);
                let state = direct_estimator(&x, source, *eps, *step)?;
                TrialOutcome {
                    miss: abs_diff_exceeds(state.theta_hat, source.theta_star(), *eps),
                    fallback: state.fallback_used,
                }
            }
            Prepared::SimpleForwarding { n, source, channel, eps, step } => {
                let run = run_simple_forwarding(source, channel, *n, *eps, *step, &mut rng)?;
                TrialOutcome {
                    miss: abs_diff_exceeds(run.theta_hat, source.theta_star(), *eps),
                    fallback: false,
                }
            }
            Prepared::EstimateForward { source, channel, plan } => {
                let run = plan.run(source, channel, &mut rng)?;
                TrialOutcome {
                    miss: abs_diff_exceeds(run.theta_hat, source.theta_star(), plan.eps),
                    fallback: false,
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    pub k: Option<usize>,
    pub trials: u64,
    pub misses: u64,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub fallback_count: u64,
}

/// Runs every trial at one sample size; trial `t` uses
/// `trial_seed(master, strategy, n, t)` regardless of scheduling.
pub fn estimate_error_prob(spec: &ExperimentSpec, n: usize) -> Result<ResultRow> {
    let prepared = Prepared::new(spec, n)?;
    estimate_with(&prepared, spec, n)
}

pub fn estimate_with(prepared: &Prepared, spec: &ExperimentSpec, n: usize) -> Result<ResultRow> {
    let name = spec.strategy.name();
    let (misses, fallbacks) = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            prepared
                .trial(trial_seed(spec.master_seed, name, n, t))
                .map(|o| (o.miss as u64, o.fallback as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let (lo, hi) = wilson_interval(misses, spec.trials, Z95);
    Ok(ResultRow {
        n,
        k: prepared.k(),
        trials: spec.trials,
        misses,
        p_hat: misses as f64 / spec.trials as f64,
        wilson_lo: lo,
        wilson_hi: hi,
        fallback_count: fallbacks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTable {
    pub strategy: Strategy,
    pub hypothetical: bool,
    pub eps: f64,
    pub master_seed: u64,
    pub rows: Vec<ResultRow>,
    pub fit: Option<ExponentFit>,
    /// Why no exponent was fitted, when it was not.
    pub fit_note: Option<String>,
    /// Analytic exponents for the same instance, when defined.
    pub theory: Option<ExponentReport>,
    pub spec: ExperimentSpec,
}

pub const CSV_HEADER: &str = "n,k,trials,misses,p_hat,wilson_lo,wilson_hi,fallback_count";

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let k = r.k.map_or(String::new(), |k| k.to_string());
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n,
                k,
                r.trials,
                r.misses,
                fmt_sig(r.p_hat),
                fmt_sig(r.wilson_lo),
                fmt_sig(r.wilson_hi),
                r.fallback_count
            )
            .expect("writing to a String");
        }
        out
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let rows = spec
        .n_values
        .iter()
        .map(|&n| estimate_error_prob(spec, n))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, u64, u64)> = rows.iter().map(|r| (r.n, r.misses, r.trials)).collect();
    let (fit, fit_note) = match fit_exponent(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let theory = match (spec.source.build(), spec.channel.build()) {
        (Ok(s), Ok(c)) => ExponentReport::new(s.class(), &c, spec.eps).ok(),
        _ => None,
    };
    Ok(ResultTable {
        strategy: spec.strategy,
        hypothetical: spec.strategy.hypothetical(),
        eps: spec.eps,
        master_seed: spec.master_seed,
        rows,
        fit,
        fit_note,
        theory,
        spec: spec.clone(),
    })
}
