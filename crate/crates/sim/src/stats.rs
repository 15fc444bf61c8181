//! Seeds, binomial confidence intervals and exponent regression.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a, used to fold strategy names into seeds.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Per-trial seed. Depends only on its four inputs, so adding trials or
/// sample sizes never changes existing ones.
pub fn trial_seed(master: u64, strategy: &str, n: usize, trial: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ fnv1a(strategy));
    h = splitmix64(h ^ n as u64);
    splitmix64(h ^ trial)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    /// `None` with only two usable points.
    pub stderr: Option<f64>,
    pub intercept: f64,
    pub used_n: Vec<usize>,
    /// Sample sizes left out because no misses were observed.
    pub excluded_n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least two sample sizes with observed misses, got {usable}")]
    TooFewRows { usable: usize },
}

/// Least-squares slope of `-ln p_hat` against `n` over `(n, misses,
/// trials)`, skipping zero-miss rows.
pub fn fit_exponent(rows: &[(usize, u64, u64)]) -> Result<ExponentFit, FitError> {
    let (used, excluded): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.1 > 0 && r.2 > 0);
    if used.len() < 2 {
        return Err(FitError::TooFewRows { usable: used.len() });
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .map(|&&(n, m, t)| (n as f64, -(m as f64 / t as f64).ln()))
        .collect();
    let count = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = (pts.len() > 2).then(|| {
        let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (sse / (count - 2.0) / sxx).sqrt()
    });
    Ok(ExponentFit {
        slope,
        stderr,
        intercept,
        used_n: used.iter().map(|r| r.0).collect(),
        excluded_n: excluded.iter().map(|r| r.0).collect(),
    })
}

/// Shortest decimal rendering of `x` rounded to 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("round trip");
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(1, "main", 100, 0), trial_seed(1, "main", 100, 0));
        assert_ne!(trial_seed(1, "main", 100, 0), trial_seed(1, "main", 100, 1));
        assert_ne!(trial_seed(1, "main", 100, 0), trial_seed(1, "direct", 100, 0));
        assert_ne!(trial_seed(1, "main", 100, 0), trial_seed(2, "main", 100, 0));
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775327998628892).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038315303659956).abs() < 1e-12 && (hi - 0.5961684696340044).abs() < 1e-12);
    }

    #[test]
    fn exact_linear_fit() {
        // p_hat = exp(-0.01 n) up to 2^-60 relative rounding
        let big = 1u64 << 60;
        let rows: Vec<(usize, u64, u64)> = [100usize, 200, 300]
            .iter()
            .map(|&n| (n, ((-0.01 * n as f64).exp() * big as f64) as u64, big))
            .collect();
        assert!((fit_exponent(&rows).unwrap().slope - 0.01).abs() < 1e-12);
    }

    #[test]
    fn zero_rows_excluded() {
        let fit = fit_exponent(&[(10, 5, 100), (20, 2, 100), (30, 0, 100)]).unwrap();
        assert_eq!(fit.used_n, vec![10, 20]);
        assert_eq!(fit.excluded_n, vec![30]);
        assert!(fit.stderr.is_none());
        assert!(fit_exponent(&[(10, 5, 100), (30, 0, 100)]).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(2.0), "2");
    }
}
