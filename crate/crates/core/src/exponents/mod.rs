//! Error exponents, in nats.
//!
//! Source exponents, the zero-rate channel exponent `E0`, the M-message
//! factors `c_M`, and the achievable / converse / baseline exponents built
//! from them. The channel enters only through a [`ChannelProfile`]: its
//! zero-rate exponent and, when it is a BSC, its crossover probability
//! (for BSCs the exact `c_M` is known; for anything else only the `c = 1`
//! lower bracket is reported and flagged as such).

mod zero_rate;

pub use zero_rate::{
    default_starts, input_quadratic_form, maximize_from_starts, project_to_simplex, simplex_grid,
    stationary_point_on, zero_rate_exponent, zero_rate_from_db, ZeroRateExponent,
};

use crate::channel::ChannelModel;
use crate::error::{check_range, Result};
use crate::json_f64;
use serde::{Deserialize, Serialize};

/// Largest message count tried when optimizing over `delta`.
pub const MAX_OPTIMIZED_MESSAGES: u64 = 100_000;

/// `D(a || b)` for Bernoulli laws, `+inf` when `a` puts mass where `b` has none.
pub fn binary_kl(a: f64, b: f64) -> Result<f64> {
    check_range("a", a, (0.0..=1.0).contains(&a), "0 <= a <= 1")?;
    check_range("b", b, (0.0..=1.0).contains(&b), "0 <= b <= 1")?;
    Ok(kl(a, b))
}

fn kl(a: f64, b: f64) -> f64 {
    let term = |x: f64, y: f64| {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln()
        }
    };
    (term(a, b) + term(1.0 - a, 1.0 - b)).max(0.0)
}

/// Bhattacharyya distance between `Ber(t1)` and `Ber(t2)`.
pub fn bernoulli_db(t1: f64, t2: f64) -> Result<f64> {
    check_range("t1", t1, (0.0..=1.0).contains(&t1), "0 <= t1 <= 1")?;
    check_range("t2", t2, (0.0..=1.0).contains(&t2), "0 <= t2 <= 1")?;
    Ok(db(t1, t2))
}

fn db(t1: f64, t2: f64) -> f64 {
    if t1 == t2 {
        return 0.0;
    }
    let rho = (t1 * t2).sqrt() + ((1.0 - t1) * (1.0 - t2)).sqrt();
    if rho <= 0.0 {
        f64::INFINITY
    } else {
        (-rho.ln()).max(0.0)
    }
}

/// `D(1/2 || 1/2 + eps) = -ln(1 - 4 eps^2) / 2`.
pub fn e_src_bernoulli(eps: f64) -> Result<f64> {
    check_range("eps", eps, (0.0..0.5).contains(&eps), "0 <= eps < 1/2")?;
    Ok(src_bernoulli(eps))
}

fn src_bernoulli(eps: f64) -> f64 {
    -0.5 * (-4.0 * eps * eps).ln_1p()
}

/// `eps^2 / (2 sigma2)`.
pub fn e_src_gaussian(eps: f64, sigma2: f64) -> Result<f64> {
    check_range("eps", eps, eps >= 0.0, "eps >= 0")?;
    check_range("sigma2", sigma2, sigma2 > 0.0, "sigma2 > 0")?;
    Ok(eps * eps / (2.0 * sigma2))
}

/// `c_M` for the binary symmetric channel; always in `(1, 2]`.
pub fn c_m_bsc(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(crate::Error::OutOfRange {
            name: "m",
            value: m as f64,
            expected: "m >= 2",
        });
    }
    Ok(c_m(m))
}

fn c_m(m: u64) -> f64 {
    let mf = m as f64;
    if m % 2 == 0 {
        mf / (mf - 1.0)
    } else {
        (mf + 1.0) / mf
    }
}

/// `ceil(1 / (2 x))`, the number of messages needed to describe the unit
/// interval to accuracy `x`. A relative slack of `1e-9` absorbs rounding in
/// `1/(2x)` for values like `x = 0.1`.
pub fn message_count(x: f64) -> u64 {
    let r = 1.0 / (2.0 * x);
    (r - 1e-9 * r.max(1.0)).ceil().max(1.0) as u64
}

fn check_eps(eps: f64) -> Result<()> {
    check_range("eps", eps, eps > 0.0 && eps < 0.5, "0 < eps < 1/2")
}

fn check_p(p: f64) -> Result<()> {
    check_range("p", p, p > 0.0 && p < 0.5, "0 < p < 1/2")
}

fn bsc_e0(p: f64) -> f64 {
    0.5 * kl(0.5, p)
}

/// Achievable exponent `min(D(1/2 || 1/2+eps), D(1/2 || p)/2)`.
pub fn achievable_bernoulli(eps: f64, p: f64) -> Result<f64> {
    check_eps(eps)?;
    check_p(p)?;
    Ok(src_bernoulli(eps).min(bsc_e0(p)))
}

/// Instance-dependent exponent at a given true mean.
///
/// `d_B(theta*, .)` grows with distance on each side of `theta*`, so the
/// minimum over `|theta' - theta*| >= 2 eps` sits at one of the two
/// endpoints. With no feasible endpoint the source term is `+inf`.
pub fn instance_bernoulli(theta_star: f64, eps: f64, p: f64) -> Result<f64> {
    check_range(
        "theta_star",
        theta_star,
        (0.0..=1.0).contains(&theta_star),
        "0 <= theta_star <= 1",
    )?;
    check_eps(eps)?;
    check_p(p)?;
    Ok(instance_source_term(theta_star, eps).min(bsc_e0(p)))
}

/// `min_{|theta' - theta*| >= 2 eps} d_B(theta*, theta')` over `[0, 1]`.
pub fn instance_source_term(theta_star: f64, eps: f64) -> f64 {
    [theta_star - 2.0 * eps, theta_star + 2.0 * eps]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| db(theta_star, t))
        .fold(f64::INFINITY, f64::min)
}

/// Converse `min(D(1/2 || 1/2+eps), c_M D(1/2 || p)/2)` with `M = ceil(1/(2 eps))`.
pub fn converse_bernoulli(eps: f64, p: f64) -> Result<f64> {
    check_eps(eps)?;
    check_p(p)?;
    let m = message_count(eps).max(2);
    Ok(src_bernoulli(eps).min(c_m(m) * bsc_e0(p)))
}

/// What the exponent formulas need to know about a channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    #[serde(with = "json_f64")]
    pub zero_rate: f64,
    /// Crossover probability when the channel is a BSC (0 for the noiseless
    /// binary channel).
    pub bsc_crossover: Option<f64>,
}

/// `E^chan_M = c_M E0`, and whether `c_M` is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MessageExponent {
    pub value: f64,
    pub c_m: f64,
    pub c_m_exact: bool,
}

impl ChannelProfile {
    pub fn of(channel: &ChannelModel) -> Self {
        Self {
            zero_rate: zero_rate_exponent(channel).value,
            bsc_crossover: channel.bsc_crossover(),
        }
    }

    pub fn bsc(p: f64) -> Result<Self> {
        check_range("p", p, (0.0..0.5).contains(&p), "0 <= p < 1/2")?;
        Ok(Self {
            zero_rate: if p == 0.0 { f64::INFINITY } else { bsc_e0(p) },
            bsc_crossover: Some(p),
        })
    }

    /// The M-message exponent. For non-BSC channels the factor `c_M = 1` is
    /// a lower bracket only.
    pub fn e_chan_m(&self, m: u64) -> MessageExponent {
        if m < 2 {
            // a single message needs no channel at all
            return MessageExponent {
                value: f64::INFINITY,
                c_m: f64::INFINITY,
                c_m_exact: true,
            };
        }
        let (c, exact) = match self.bsc_crossover {
            Some(_) => (c_m(m), true),
            None => (1.0, false),
        };
        MessageExponent {
            value: c * self.zero_rate,
            c_m: c,
            c_m_exact: exact,
        }
    }
}

/// The source classes with closed-form source exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SourceClass {
    Bernoulli,
    SubGaussian { sigma2: f64 },
}

impl SourceClass {
    /// Source exponent at accuracy `eps`.
    pub fn e_src(&self, eps: f64) -> f64 {
        match *self {
            SourceClass::Bernoulli => {
                if eps >= 0.5 {
                    f64::INFINITY
                } else {
                    src_bernoulli(eps.max(0.0))
                }
            }
            SourceClass::SubGaussian { sigma2 } => eps * eps / (2.0 * sigma2),
        }
    }
}

/// Sub-Gaussian achievable exponent `min(eps^2/(2 sigma2), E0)`.
pub fn achievable_subg(eps: f64, sigma2: f64, channel: &ChannelModel) -> Result<f64> {
    check_eps(eps)?;
    let src = e_src_gaussian(eps, sigma2)?;
    Ok(src.min(zero_rate_exponent(channel).value))
}

/// A converse value together with whether its channel factor is exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Converse {
    #[serde(with = "json_f64")]
    pub value: f64,
    pub c_m_exact: bool,
}

/// Converse for Gaussian sources, `min(eps^2/(2 sigma2), c_M E0)`; for
/// non-BSC channels `c_M = 1` and the value is only a lower bracket.
pub fn converse_gaussian(eps: f64, sigma2: f64, channel: &ChannelModel) -> Result<Converse> {
    check_eps(eps)?;
    let src = e_src_gaussian(eps, sigma2)?;
    let chan = ChannelProfile::of(channel).e_chan_m(message_count(eps).max(2));
    Ok(Converse {
        value: src.min(chan.value),
        c_m_exact: chan.c_m_exact,
    })
}

fn check_fraction(name: &'static str, x: f64) -> Result<()> {
    check_range(name, x, x > 0.0 && x < 1.0, "strictly between 0 and 1")
}

/// One-shot estimate-and-forward:
/// `min((1-lambda) E^src_{(1-delta) eps}, lambda E^chan_{ceil(1/(2 delta eps))})`.
pub fn oneshot_exponent(
    eps: f64,
    lambda: f64,
    delta: f64,
    source: SourceClass,
    channel: &ChannelProfile,
) -> Result<f64> {
    check_fraction("lambda", lambda)?;
    check_fraction("delta", delta)?;
    let a = source.e_src((1.0 - delta) * eps);
    let b = channel.e_chan_m(message_count(delta * eps)).value;
    Ok(((1.0 - lambda) * a).min(lambda * b))
}

/// The `lambda` at which `(1-lambda) a = lambda b`, i.e. `a / (a + b)`.
/// An infinite channel term gives the limit `lambda = 0`.
pub fn equalizing_lambda(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        0.0
    } else if a + b <= 0.0 {
        0.5
    } else {
        a / (a + b)
    }
}

/// `(1 - lambda) a` at the equalizing `lambda`: `ab/(a+b)`, or `a` when `b = inf`.
fn equalized_value(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        a
    } else if a + b <= 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncausalExponents {
    pub achievable: f64,
    #[serde(with = "json_f64")]
    pub converse: f64,
}

/// Non-causal achievable (at `delta`) and converse exponents.
pub fn noncausal_exponents(
    eps: f64,
    delta: f64,
    source: SourceClass,
    channel: &ChannelProfile,
) -> Result<NoncausalExponents> {
    check_fraction("delta", delta)?;
    let achievable = source
        .e_src((1.0 - delta) * eps)
        .min(channel.e_chan_m(message_count(delta * eps)).value);
    let converse = source
        .e_src(eps)
        .min(channel.e_chan_m(message_count(eps)).value);
    Ok(NoncausalExponents {
        achievable,
        converse,
    })
}

/// Simple forwarding over a BSC(p): `E^src_{(1-2p) eps}`.
pub fn simple_forwarding_exponent(eps: f64, p: f64) -> Result<f64> {
    check_eps(eps)?;
    check_range("p", p, (0.0..0.5).contains(&p), "0 <= p < 1/2")?;
    Ok(src_bernoulli((1.0 - 2.0 * p) * eps))
}

/// An optimized baseline exponent and the parameters attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedExponent {
    pub value: f64,
    pub lambda: f64,
    pub delta: f64,
}

/// Candidate `(delta, source term, channel term)` triples.
///
/// Only `M = ceil(1/(2 delta eps))` matters on the channel side and the
/// source side improves as `delta` shrinks, so for each message count the
/// best `delta` is the smallest one producing it, `1/(2 eps M)`. This makes
/// the search over `delta` an exact search over integers `M` with
/// `delta < 1`, up to [`MAX_OPTIMIZED_MESSAGES`].
fn delta_candidates<'a>(
    eps: f64,
    source: SourceClass,
    channel: &'a ChannelProfile,
    max_messages: u64,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let first = (1.0 / (2.0 * eps)).floor() as u64 + 1;
    (first.max(2)..=max_messages.max(first)).filter_map(move |m| {
        let delta = 1.0 / (2.0 * eps * m as f64);
        if delta >= 1.0 || message_count(delta * eps) != m {
            return None;
        }
        let a = source.e_src((1.0 - delta) * eps);
        let b = channel.e_chan_m(m).value;
        Some((delta, a, b))
    })
}

/// One-shot exponent maximized over `(lambda, delta)`.
pub fn optimize_oneshot(eps: f64, source: SourceClass, channel: &ChannelProfile) -> OptimizedExponent {
    optimize_oneshot_capped(eps, source, channel, MAX_OPTIMIZED_MESSAGES)
}

/// [`optimize_oneshot`] restricted to at most `max_messages` codewords
/// (the smallest feasible count is always allowed).
pub fn optimize_oneshot_capped(
    eps: f64,
    source: SourceClass,
    channel: &ChannelProfile,
    max_messages: u64,
) -> OptimizedExponent {
    let mut best = OptimizedExponent {
        value: 0.0,
        lambda: 0.5,
        delta: 0.5,
    };
    for (delta, a, b) in delta_candidates(eps, source, channel, max_messages) {
        let value = equalized_value(a, b);
        if value > best.value {
            best = OptimizedExponent {
                value,
                lambda: equalizing_lambda(a, b),
                delta,
            };
        }
    }
    best
}

/// Non-causal achievable exponent maximized over `delta` (no time split,
/// so `lambda` is reported as 1).
pub fn optimize_noncausal(
    eps: f64,
    source: SourceClass,
    channel: &ChannelProfile,
) -> OptimizedExponent {
    optimize_noncausal_capped(eps, source, channel, MAX_OPTIMIZED_MESSAGES)
}

pub fn optimize_noncausal_capped(
    eps: f64,
    source: SourceClass,
    channel: &ChannelProfile,
    max_messages: u64,
) -> OptimizedExponent {
    let mut best = OptimizedExponent {
        value: 0.0,
        lambda: 1.0,
        delta: 0.5,
    };
    for (delta, a, b) in delta_candidates(eps, source, channel, max_messages) {
        let value = a.min(b);
        if value > best.value {
            best = OptimizedExponent {
                value,
                lambda: 1.0,
                delta,
            };
        }
    }
    best
}

/// Every analytic exponent for one `(source, channel, eps)` instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub e_src: f64,
    #[serde(with = "json_f64")]
    pub e_chan_zero: f64,
    pub c_m: f64,
    /// False when `c_m` is only the `c = 1` lower bracket.
    pub c_m_exact: bool,
    pub e_achievable: f64,
    pub e_converse: f64,
    /// Only defined for a Bernoulli source over a BSC.
    pub e_simple_forwarding: Option<f64>,
    pub e_oneshot: OptimizedExponent,
    pub e_noncausal_ach: f64,
    pub message_count_m: u64,
}

impl ExponentReport {
    pub fn new(source: SourceClass, channel: &ChannelModel, eps: f64) -> Result<Self> {
        Self::from_profile(source, &ChannelProfile::of(channel), eps)
    }

    pub fn from_profile(source: SourceClass, channel: &ChannelProfile, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if let SourceClass::SubGaussian { sigma2 } = source {
            check_range("sigma2", sigma2, sigma2 > 0.0, "sigma2 > 0")?;
        }
        let m = message_count(eps).max(2);
        let e_src = source.e_src(eps);
        let chan = channel.e_chan_m(m);
        let e_simple_forwarding = match (source, channel.bsc_crossover) {
            (SourceClass::Bernoulli, Some(p)) => Some(simple_forwarding_exponent(eps, p)?),
            _ => None,
        };
        Ok(Self {
            e_src,
            e_chan_zero: channel.zero_rate,
            c_m: chan.c_m,
            c_m_exact: chan.c_m_exact,
            e_achievable: e_src.min(channel.zero_rate),
            e_converse: e_src.min(chan.value),
            e_simple_forwarding,
            e_oneshot: optimize_oneshot(eps, source, channel),
            e_noncausal_ach: optimize_noncausal(eps, source, channel).value,
            message_count_m: m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kl_values() {
        assert!(close(binary_kl(0.5, 0.6).unwrap(), 0.020411, 5e-7));
        assert!(close(binary_kl(0.4, 0.5).unwrap(), 0.020136, 5e-7));
        assert_eq!(binary_kl(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(binary_kl(0.3, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(binary_kl(0.0, 0.0).unwrap(), 0.0);
        assert!(binary_kl(0.3, 1.5).is_err());
    }

    #[test]
    fn bernoulli_db_values() {
        // -(1/2) ln(0.96), the symmetric pair around 1/2
        assert!(close(bernoulli_db(0.4, 0.6).unwrap(), 0.020411, 5e-7));
        assert_eq!(bernoulli_db(0.2, 0.2).unwrap(), 0.0);
        assert_eq!(bernoulli_db(0.0, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn source_exponents() {
        assert!(close(e_src_bernoulli(0.1).unwrap(), -0.5 * 0.96f64.ln(), 1e-15));
        assert!(close(e_src_bernoulli(0.3).unwrap(), 0.223144, 5e-7));
        assert!(e_src_bernoulli(1e-9).unwrap() < 1e-17);
        assert!(e_src_bernoulli(0.5).is_err());
        assert_eq!(e_src_gaussian(0.1, 1.0).unwrap(), 0.005000000000000001);
        assert!(close(e_src_gaussian(0.2, 0.02).unwrap(), 1.0, 1e-15));
        assert_eq!(e_src_gaussian(0.0, 1.0).unwrap(), 0.0);
        assert!(e_src_gaussian(0.1, 0.0).is_err());
    }

    #[test]
    fn c_m_table() {
        assert_eq!(c_m_bsc(2).unwrap(), 2.0);
        assert!(close(c_m_bsc(3).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(c_m_bsc(4).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(c_m_bsc(5).unwrap(), 1.2, 1e-15));
        assert!(close(c_m_bsc(10).unwrap(), 10.0 / 9.0, 1e-15));
        assert!(c_m_bsc(1).is_err());
        for m in 2..200u64 {
            let lo = (m / 2) as f64;
            let hi = m.div_ceil(2) as f64;
            let mf = m as f64;
            assert!(close(c_m(m), 4.0 * lo * hi / (mf * (mf - 1.0)), 1e-14));
        }
    }

    #[test]
    fn message_counts() {
        assert_eq!(message_count(0.1), 5);
        assert_eq!(message_count(0.25), 2);
        assert_eq!(message_count(0.05), 10);
        assert_eq!(message_count(0.5 * 0.1), 10);
        assert_eq!(message_count(0.1 * 0.1), 50);
        assert_eq!(message_count(0.3), 2);
        assert_eq!(message_count(0.24), 3);
    }

    #[test]
    fn achievable_exponents() {
        let e0 = 0.5 * binary_kl(0.5, 0.1).unwrap();
        assert!(close(e0, 0.255413, 5e-7));
        assert_eq!(achievable_bernoulli(0.1, 0.1).unwrap(), e_src_bernoulli(0.1).unwrap());
        assert_eq!(achievable_bernoulli(0.45, 0.1).unwrap(), e0);
        assert!(close(converse_bernoulli(0.25, 0.1).unwrap(), 0.143841, 5e-7));
        let inst = instance_bernoulli(0.5, 0.1, 0.1).unwrap();
        assert!(close(inst, bernoulli_db(0.5, 0.7).unwrap(), 1e-15));
        assert!(close(
            instance_bernoulli(0.0, 0.1, 0.4).unwrap(),
            bernoulli_db(0.0, 0.2).unwrap().min(0.5 * binary_kl(0.5, 0.4).unwrap()),
            1e-15
        ));
        assert_eq!(instance_source_term(0.5, 0.3), f64::INFINITY);
    }

    #[test]
    fn gaussian_exponents_over_channels() {
        let bsc = ChannelModel::bsc(0.1).unwrap();
        assert!(close(achievable_subg(0.1, 1.0, &bsc).unwrap(), 0.005, 1e-15));
        let noiseless = ChannelModel::noiseless(2);
        assert!(close(achievable_subg(0.3, 1.0, &noiseless).unwrap(), 0.045, 1e-15));
        let quarter = ChannelModel::bsc(0.25).unwrap();
        let v = achievable_subg(0.4, 0.05, &quarter).unwrap();
        assert!(close(v, 0.5 * binary_kl(0.5, 0.25).unwrap(), 1e-12));
        let c = converse_gaussian(0.1, 1.0, &bsc).unwrap();
        assert!(close(c.value, 0.005, 1e-15) && c.c_m_exact);
        let dmc = ChannelModel::from_rows(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.2, 0.7]]).unwrap();
        assert!(!converse_gaussian(0.1, 1.0, &dmc).unwrap().c_m_exact);
    }

    #[test]
    fn oneshot_and_noncausal() {
        let prof = ChannelProfile::bsc(0.1).unwrap();
        let v = oneshot_exponent(0.1, 0.5, 0.5, SourceClass::Bernoulli, &prof).unwrap();
        let expected = (0.5 * binary_kl(0.5, 0.55).unwrap()).min(0.5 * 10.0 / 9.0 * prof.zero_rate);
        assert!(close(v, expected, 1e-15));
        assert!(oneshot_exponent(0.1, 1.0, 0.5, SourceClass::Bernoulli, &prof).is_err());
        let near_one = oneshot_exponent(0.1, 1.0 - 1e-9, 0.5, SourceClass::Bernoulli, &prof).unwrap();
        assert!(near_one < 1e-10);
        let nc = noncausal_exponents(0.1, 0.1, SourceClass::Bernoulli, &prof).unwrap();
        assert!(close(
            nc.achievable,
            e_src_bernoulli(0.09).unwrap().min(c_m(50) * prof.zero_rate),
            1e-15
        ));
        assert!(nc.achievable <= nc.converse);
        assert_eq!(equalizing_lambda(1.0, 3.0), 0.25);
        assert_eq!(equalizing_lambda(1.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn optimized_oneshot_beats_fixed_parameters() {
        let prof = ChannelProfile::bsc(0.1).unwrap();
        let best = optimize_oneshot(0.1, SourceClass::Bernoulli, &prof);
        for &delta in &[0.05, 0.1, 0.3, 0.5, 0.9] {
            for &lambda in &[0.05, 0.1, 0.2, 0.5] {
                let v = oneshot_exponent(0.1, lambda, delta, SourceClass::Bernoulli, &prof).unwrap();
                assert!(v <= best.value + 1e-15);
            }
        }
        let at_opt =
            oneshot_exponent(0.1, best.lambda, best.delta, SourceClass::Bernoulli, &prof).unwrap();
        assert!(close(at_opt, best.value, 1e-12));
        let nc = optimize_noncausal(0.1, SourceClass::Bernoulli, &prof);
        assert!(nc.value >= best.value);
        assert!(nc.value <= e_src_bernoulli(0.1).unwrap());
    }

    #[test]
    fn simple_forwarding() {
        let v = simple_forwarding_exponent(0.1, 0.1).unwrap();
        assert!(close(v, binary_kl(0.5, 0.58).unwrap(), 1e-15));
        assert!(close(v, 0.012967, 5e-7));
        assert_eq!(simple_forwarding_exponent(0.1, 0.0).unwrap(), e_src_bernoulli(0.1).unwrap());
        assert!(simple_forwarding_exponent(0.1, 0.5 - 1e-12).unwrap() < 1e-20);
    }

    #[test]
    fn report_fields_and_json() {
        let report = ExponentReport::new(SourceClass::Bernoulli, &ChannelModel::bsc(0.1).unwrap(), 0.1).unwrap();
        assert_eq!(report.message_count_m, 5);
        assert!(close(report.c_m, 1.2, 1e-15));
        assert!(report.e_achievable <= report.e_converse);
        assert!(report.e_simple_forwarding.unwrap() < report.e_src);
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "e_src",
            "e_chan_zero",
            "c_m",
            "e_achievable",
            "e_converse",
            "e_simple_forwarding",
            "e_oneshot",
            "e_noncausal_ach",
            "message_count_m",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let noiseless =
            ExponentReport::new(SourceClass::Bernoulli, &ChannelModel::noiseless(2), 0.1).unwrap();
        let text = serde_json::to_string(&noiseless).unwrap();
        assert!(text.contains("\"e_chan_zero\":\"inf\""));
        let back: ExponentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, noiseless);
    }
}
