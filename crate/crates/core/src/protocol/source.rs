//! Sampleable sources with a known mean.

use crate::error::{check_range, Error, Result};
use crate::exponents::SourceClass;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Bernoulli,
    Gaussian,
    /// Finite support, only the variance is assumed (median-of-means regime).
    DiscreteHeavyTailed,
    /// Finite support inside a declared bounded interval.
    CustomBounded,
}

#[derive(Clone, Debug)]
pub struct SourceModel {
    kind: SourceKind,
    theta_star: f64,
    sigma2: Option<f64>,
    variance: Option<f64>,
    mean_range: (f64, f64),
    support: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    normal: Option<Normal<f64>>,
}

impl SourceModel {
    pub fn bernoulli(theta: f64) -> Result<Self> {
        check_range("theta", theta, (0.0..=1.0).contains(&theta), "0 <= theta <= 1")?;
        Ok(Self {
            kind: SourceKind::Bernoulli,
            theta_star: theta,
            sigma2: None,
            variance: Some(theta * (1.0 - theta)),
            mean_range: (0.0, 1.0),
            support: vec![0.0, 1.0],
            probs: vec![1.0 - theta, theta],
            cumulative: vec![1.0 - theta, 1.0],
            normal: None,
        })
    }

    pub fn gaussian(mean: f64, sigma2: f64) -> Result<Self> {
        let model = Self::gaussian_unchecked(mean, sigma2)?;
        model.check_mean_in_range()?;
        Ok(model)
    }

    fn gaussian_unchecked(mean: f64, sigma2: f64) -> Result<Self> {
        check_range("sigma2", sigma2, sigma2 > 0.0 && sigma2.is_finite(), "sigma2 > 0")?;
        check_range("mean", mean, mean.is_finite(), "finite mean")?;
        let normal = Normal::new(mean, sigma2.sqrt())
            .map_err(|e| Error::InvalidConfig(format!("gaussian source: {e}")))?;
        Ok(Self {
            kind: SourceKind::Gaussian,
            theta_star: mean,
            sigma2: Some(sigma2),
            variance: Some(sigma2),
            mean_range: (0.0, 1.0),
            support: Vec::new(),
            probs: Vec::new(),
            cumulative: Vec::new(),
            normal: Some(normal),
        })
    }

    /// A finite-support source used through its variance only; the
    /// decoder's kernel parameter is `32 Var[X]`, the median-of-means
    /// sub-Gaussian constant.
    pub fn discrete_heavy_tailed(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let model = Self::heavy_tailed_unchecked(values, probs)?;
        model.check_mean_in_range()?;
        Ok(model)
    }

    fn heavy_tailed_unchecked(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let mut model = Self::discrete(SourceKind::DiscreteHeavyTailed, values, probs)?;
        model.sigma2 = Some(32.0 * model.variance.expect("set by discrete"));
        Ok(model)
    }

    /// A finite-support source on `[lo, hi]`; Hoeffding gives the
    /// sub-Gaussian parameter `(hi - lo)^2 / 4`.
    pub fn custom_bounded(values: Vec<f64>, probs: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        let model = Self::bounded_unchecked(values, probs, lo, hi)?;
        model.check_mean_in_range()?;
        Ok(model)
    }

    fn bounded_unchecked(values: Vec<f64>, probs: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidConfig(format!("empty support interval [{lo}, {hi}]")));
        }
        if let Some(v) = values.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(Error::InvalidConfig(format!("support value {v} outside [{lo}, {hi}]")));
        }
        let mut model = Self::discrete(SourceKind::CustomBounded, values, probs)?;
        model.sigma2 = Some((hi - lo) * (hi - lo) / 4.0);
        Ok(model)
    }

    fn discrete(kind: SourceKind, values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidConfig(
                "discrete source needs equally many values and probabilities".into(),
            ));
        }
        if values.iter().chain(&probs).any(|x| !x.is_finite()) || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidConfig("discrete source has invalid entries".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
        }
        let mean: f64 = values.iter().zip(&probs).map(|(v, p)| v * p).sum();
        let var: f64 = values
            .iter()
            .zip(&probs)
            .map(|(v, p)| p * (v - mean) * (v - mean))
            .sum();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            kind,
            theta_star: mean,
            sigma2: None,
            variance: Some(var),
            mean_range: (0.0, 1.0),
            support: values,
            probs,
            cumulative,
            normal: None,
        })
    }

    /// Sets the interval `[lo, hi]` known to contain the mean. Not
    /// available for Bernoulli sources, whose range is always `[0, 1]`.
    pub fn with_mean_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.set_mean_range(lo, hi)?;
        self.check_mean_in_range()?;
        Ok(self)
    }

    fn set_mean_range(&mut self, lo: f64, hi: f64) -> Result<()> {
        if self.kind == SourceKind::Bernoulli {
            return Err(Error::InvalidConfig("a Bernoulli mean range is fixed to [0, 1]".into()));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidConfig(format!("bad mean range [{lo}, {hi}]")));
        }
        self.mean_range = (lo, hi);
        Ok(())
    }

    /// Overrides the sub-Gaussian parameter used by the decoder.
    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if self.kind == SourceKind::Bernoulli {
            return Err(Error::InvalidConfig("Bernoulli sources have no sigma2".into()));
        }
        check_range("sigma2", sigma2, sigma2 > 0.0 && sigma2.is_finite(), "sigma2 > 0")?;
        self.sigma2 = Some(sigma2);
        Ok(self)
    }

    fn check_mean_in_range(&self) -> Result<()> {
        let (lo, hi) = self.mean_range;
        if (lo..=hi).contains(&self.theta_star) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "mean {} lies outside the mean range [{lo}, {hi}]",
                self.theta_star
            )))
        }
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn theta_star(&self) -> f64 {
        self.theta_star
    }

    pub fn sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    pub fn variance(&self) -> Option<f64> {
        self.variance
    }

    pub fn mean_range(&self) -> (f64, f64) {
        self.mean_range
    }

    /// Half-width `C >= 1` of a symmetric interval containing the mean range.
    pub fn clip_c(&self) -> f64 {
        let (lo, hi) = self.mean_range;
        1f64.max(lo.abs()).max(hi.abs())
    }

    pub fn is_bernoulli(&self) -> bool {
        self.kind == SourceKind::Bernoulli
    }

    pub fn class(&self) -> SourceClass {
        match self.sigma2 {
            Some(sigma2) if !self.is_bernoulli() => SourceClass::SubGaussian { sigma2 },
            _ => SourceClass::Bernoulli,
        }
    }

    /// `(values, probabilities)` for finite-support sources.
    pub fn discrete_support(&self) -> Option<(&[f64], &[f64])> {
        (!self.support.is_empty()).then_some((&self.support[..], &self.probs[..]))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Some(normal) = &self.normal {
            return normal.sample(rng);
        }
        if self.kind == SourceKind::Bernoulli {
            return if rng.random::<f64>() < self.theta_star { 1.0 } else { 0.0 };
        }
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0));
        self.support[i]
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

/// JSON source description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceSpec {
    Bernoulli {
        theta: f64,
    },
    Gaussian {
        mean: f64,
        sigma2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean_range: Option<(f64, f64)>,
    },
    DiscreteHeavyTailed {
        values: Vec<f64>,
        probs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean_range: Option<(f64, f64)>,
    },
    CustomBounded {
        values: Vec<f64>,
        probs: Vec<f64>,
        lo: f64,
        hi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean_range: Option<(f64, f64)>,
    },
}

impl SourceSpec {
    pub fn build(&self) -> Result<SourceModel> {
        let (mut model, range) = match self {
            SourceSpec::Bernoulli { theta } => return SourceModel::bernoulli(*theta),
            SourceSpec::Gaussian {
                mean,
                sigma2,
                mean_range,
            } => (SourceModel::gaussian_unchecked(*mean, *sigma2)?, mean_range),
            SourceSpec::DiscreteHeavyTailed {
                values,
                probs,
                mean_range,
            } => (
                SourceModel::heavy_tailed_unchecked(values.clone(), probs.clone())?,
                mean_range,
            ),
            SourceSpec::CustomBounded {
                values,
                probs,
                lo,
                hi,
                mean_range,
            } => (
                SourceModel::bounded_unchecked(values.clone(), probs.clone(), *lo, *hi)?,
                mean_range,
            ),
        };
        if let Some((lo, hi)) = range {
            model.set_mean_range(*lo, *hi)?;
        }
        model.check_mean_in_range()?;
        Ok(model)
    }
}
