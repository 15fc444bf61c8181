//! The exact oracle suite behind `relay-est verify`.

use crate::experiment::main_codebook;
use crate::stats::splitmix64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_core::channel::ChannelModel;
use relay_core::oracle::{
    exact_ef_ratio_bernoulli, exact_error_probability, markov_chain_check, rounding_ratio,
    OracleReport, ORACLE_TOLERANCE,
};
use relay_core::protocol::{ProtocolConfig, ProtocolRunner, SourceModel};
use relay_core::Result;
use serde::Serialize;
use serde_json::json;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub ks: Vec<usize>,
    pub crossovers: Vec<f64>,
    pub codebooks: usize,
    /// `(theta*, theta')` pairs per codebook.
    pub pairs: usize,
    /// Random transcripts per `(k, p)`, spread over the codebooks.
    pub transcripts: usize,
    pub seed: u64,
}

impl SuiteConfig {
    /// Block lengths `2, 4, ..., max_k`.
    pub fn up_to(max_k: usize, seed: u64) -> Self {
        Self {
            ks: (2..=max_k.max(2)).step_by(2).collect(),
            crossovers: vec![0.1, 0.25],
            codebooks: 3,
            pairs: 5,
            transcripts: 10,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: usize,
    pub failed: usize,
    /// Every check, failing or not.
    pub reports: Vec<OracleReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn count(&self, quantity: &str) -> usize {
        self.reports.iter().filter(|r| r.quantity == quantity).count()
    }
}

fn runner(theta: f64, k: usize, blocks: usize, book: relay_core::codebook::Codebook, channel: &ChannelModel) -> Result<ProtocolRunner> {
    let config = ProtocolConfig::new(k * (blocks + 1), k, 0.1);
    ProtocolRunner::new(SourceModel::bernoulli(theta)?, channel.clone(), book, config)
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut reports = Vec::new();
    for &k in &cfg.ks {
        for &p in &cfg.crossovers {
            let channel = ChannelModel::bsc(p)?;
            let base = splitmix64(cfg.seed ^ ((k as u64) << 32) ^ p.to_bits());
            let mut rng = ChaCha8Rng::seed_from_u64(base);
            let books = (0..cfg.codebooks.max(1))
                .map(|c| {
                    main_codebook(k, k + 1, &channel, splitmix64(base ^ c as u64), 0.5, 1000)
                        .map_err(|e| match e {
                            crate::ExperimentError::Core(e) => e,
                            crate::ExperimentError::Config(s) => relay_core::Error::InvalidConfig(s),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            for book in books.iter().take(cfg.codebooks) {
                for _ in 0..cfg.pairs {
                    let ts: f64 = rng.random_range(0.01..0.99);
                    let tp: f64 = rng.random_range(0.01..0.99);
                    reports.push(exact_ef_ratio_bernoulli(ts, tp, book, &channel)?);
                }
            }
            // rounding: any transcript, so k blocks of length k
            for t in 0..cfg.transcripts {
                let theta: f64 = rng.random_range(0.0..1.0);
                let book = books[t % books.len()].clone();
                let r = runner(theta, k, k, book, &channel)?;
                let (_, received) = r.simulate(&mut rng)?;
                let blocks: Vec<&[u8]> = received.chunks_exact(k).collect();
                let ratio = rounding_ratio(&r, &blocks)?;
                reports.push(OracleReport {
                    quantity: "rounding_ratio".into(),
                    exact: ratio,
                    bound: 2.0,
                    satisfied: ratio <= 2.0 + ORACLE_TOLERANCE,
                    parameters: json!({"k": k, "p": p, "theta_star": theta, "blocks": k, "n": r.config().n}),
                });
            }
            // whole-run enumeration on two blocks where the guard allows it
            if 2 * k <= 20 {
                let theta: f64 = rng.random_range(0.05..0.95);
                let r = runner(theta, k, 2, books[0].clone(), &channel)?;
                reports.push(markov_chain_check(&r)?);
                let exact = exact_error_probability(&r)?;
                reports.push(OracleReport {
                    quantity: "miss_within_not_in_s".into(),
                    exact: exact.miss_probability,
                    bound: exact.not_in_s_probability,
                    satisfied: exact.containment_holds(),
                    parameters: json!({"k": k, "p": p, "theta_star": theta, "blocks": 2}),
                });
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.satisfied).count();
    Ok(SuiteReport {
        config: cfg.clone(),
        checks: reports.len(),
        failed,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_suite(&SuiteConfig::up_to(4, 3)).unwrap();
        assert!(report.passed(), "{:#?}", report.reports.iter().filter(|r| !r.satisfied).collect::<Vec<_>>());
        assert_eq!(report.count("rounding_ratio"), 2 * 2 * 10);
        assert_eq!(report.count("ef_ratio_bernoulli"), 2 * 2 * 3 * 5);
    }
}
