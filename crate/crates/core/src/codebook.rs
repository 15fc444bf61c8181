//! Random low-rate codebooks with a verified minimum pairwise distance.
//!
//! Generation draws codewords i.i.d. and then repeatedly redraws only the
//! codewords involved in pairs that are too close. Redrawing a word
//! independently of everything else keeps each accepted book distributed as
//! an i.i.d. book conditioned on the distance constraint.

use crate::channel::{ChannelModel, DbMatrix, Word};
use crate::error::{check_range, Error, Result};
use crate::exponents::zero_rate_exponent;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Number of differing positions.
    Hamming,
    /// Word-level Bhattacharyya distance under a channel, in nats.
    Bhattacharyya,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Hamming => "hamming",
            Metric::Bhattacharyya => "bhattacharyya",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Metric::Hamming),
            "bhattacharyya" => Ok(Metric::Bhattacharyya),
            _ => Err(Error::Parse(format!("unknown metric {s:?}"))),
        }
    }
}

/// `M` codewords of common length `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    k: usize,
    codewords: Vec<Word>,
    metric: Metric,
    min_pairwise: f64,
    threshold: Option<f64>,
}

/// Result of an exact pairwise scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `+inf` for books with fewer than two codewords.
    #[serde(with = "crate::json_f64")]
    pub min_pairwise: f64,
    /// First pair (in lexicographic order) attaining the minimum.
    pub pair: Option<(usize, usize)>,
}

impl Codebook {
    /// Builds a codebook and measures its minimum distance. The Bhattacharyya
    /// metric needs the channel.
    pub fn new(codewords: Vec<Word>, metric: Metric, channel: Option<&ChannelModel>) -> Result<Self> {
        let k = codewords.first().map_or(0, Word::len);
        if k == 0 {
            return Err(Error::InvalidCodebook("codebook needs codewords of positive length".into()));
        }
        if let Some(bad) = codewords.iter().position(|w| w.len() != k) {
            return Err(Error::InvalidCodebook(format!(
                "codeword {bad} has length {} instead of {k}",
                codewords[bad].len()
            )));
        }
        if let Some(ch) = channel {
            for w in &codewords {
                w.validate(ch.input_alphabet_size())?;
            }
        }
        let v = scan(&codewords, metric, channel)?;
        Ok(Self {
            k,
            codewords,
            metric,
            min_pairwise: v.min_pairwise,
            threshold: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.codewords.len()
    }

    pub fn codeword(&self, index: usize) -> &Word {
        &self.codewords[index]
    }

    pub fn codewords(&self) -> &[Word] {
        &self.codewords
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn min_pairwise(&self) -> f64 {
        self.min_pairwise
    }

    /// The distance the generator was asked to guarantee, if generated.
    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    /// Text form: a `k m metric` header and one digit string per codeword.
    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("{} {} {}\n", self.k, self.m(), self.metric);
        for w in &self.codewords {
            out.push_str(&w.to_digits()?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses [`Codebook::to_text`] output; the minimum distance is
    /// recomputed rather than trusted.
    pub fn from_text(text: &str, channel: Option<&ChannelModel>) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty codebook file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [k, m, metric] = fields[..] else {
            return Err(Error::Parse(format!("bad header {header:?}, expected \"k m metric\"")));
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad header field {s:?}: {e}")))
        };
        let (k, m, metric) = (parse(k)?, parse(m)?, metric.parse::<Metric>()?);
        let codewords = lines.map(Word::from_digits).collect::<Result<Vec<_>>>()?;
        if codewords.len() != m {
            return Err(Error::InvalidCodebook(format!(
                "header declares {m} codewords, found {}",
                codewords.len()
            )));
        }
        let book = Self::new(codewords, metric, channel)?;
        if book.k != k {
            return Err(Error::InvalidCodebook(format!(
                "header declares length {k}, codewords have length {}",
                book.k
            )));
        }
        Ok(book)
    }
}

/// Exact `O(M^2 k)` recomputation of the minimum pairwise distance.
pub fn verify(codebook: &Codebook, channel: Option<&ChannelModel>) -> Result<Verification> {
    scan(&codebook.codewords, codebook.metric, channel)
}

fn scan(codewords: &[Word], metric: Metric, channel: Option<&ChannelModel>) -> Result<Verification> {
    let distance = pair_distance(metric, channel)?;
    let mut best = Verification {
        min_pairwise: f64::INFINITY,
        pair: None,
    };
    for i in 0..codewords.len() {
        for j in (i + 1)..codewords.len() {
            let d = distance(codewords[i].symbols(), codewords[j].symbols());
            if best.pair.is_none() || d < best.min_pairwise {
                best = Verification {
                    min_pairwise: d,
                    pair: Some((i, j)),
                };
            }
        }
    }
    Ok(best)
}

fn pair_distance(
    metric: Metric,
    channel: Option<&ChannelModel>,
) -> Result<Box<dyn Fn(&[u8], &[u8]) -> f64>> {
    Ok(match metric {
        Metric::Hamming => Box::new(|a: &[u8], b: &[u8]| {
            a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
        }),
        Metric::Bhattacharyya => {
            let db = channel
                .ok_or_else(|| {
                    Error::InvalidCodebook("the bhattacharyya metric needs a channel".into())
                })?
                .symbol_db_matrix();
            Box::new(move |a: &[u8], b: &[u8]| db.word_distance(a, b))
        }
    })
}

/// Binary codebook with pairwise Hamming distance at least `min_fraction * k`.
///
/// Each attempt redraws, for every violating pair not already covered, its
/// higher-indexed codeword.
pub fn generate_binary<R: Rng + ?Sized>(
    k: usize,
    m: usize,
    min_fraction: f64,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Codebook> {
    check_range(
        "min_fraction",
        min_fraction,
        (0.0..0.5).contains(&min_fraction),
        "0 <= min_fraction < 1/2",
    )?;
    check_sizes(k, m)?;
    if k < 64 && (m as u128) > (1u128 << k) {
        return Err(Error::InvalidCodebook(format!("{m} distinct binary words of length {k} do not exist")));
    }
    let required = (min_fraction * k as f64 - 1e-9).ceil().max(0.0);
    let limbs = k.div_ceil(64);
    let tail_mask = if k % 64 == 0 { u64::MAX } else { (1u64 << (k % 64)) - 1 };
    let draw = |rng: &mut R| -> Vec<u64> {
        let mut w: Vec<u64> = (0..limbs).map(|_| rng.random()).collect();
        *w.last_mut().expect("k > 0") &= tail_mask;
        w
    };
    let mut words: Vec<Vec<u64>> = (0..m).map(|_| draw(rng)).collect();
    let dist = |a: &[u64], b: &[u64]| {
        a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum::<u32>() as f64
    };
    let words = repair(
        &mut words,
        required,
        max_attempts,
        |a, b| dist(a, b),
        |_| draw(rng),
    )?;
    let codewords = words
        .iter()
        .map(|w| Word::new((0..k).map(|i| ((w[i / 64] >> (i % 64)) & 1) as u8).collect()))
        .collect();
    let mut book = Codebook::new(codewords, Metric::Hamming, None)?;
    book.threshold = Some(required);
    Ok(book)
}

/// Codebook for a general channel: symbols i.i.d. from the input law that
/// attains the zero-rate exponent, every pair at Bhattacharyya distance at
/// least `(1 - slack) k E0`. When `E0 = inf` every pair must be at infinite
/// distance, i.e. contain some position carrying a perfectly distinguishable
/// symbol pair.
pub fn generate_dmc<R: Rng + ?Sized>(
    k: usize,
    m: usize,
    channel: &ChannelModel,
    rng: &mut R,
    slack: f64,
    max_attempts: usize,
) -> Result<Codebook> {
    check_range("slack", slack, slack > 0.0 && slack < 1.0, "0 < slack < 1")?;
    check_sizes(k, m)?;
    let zr = zero_rate_exponent(channel);
    let required = if zr.value.is_infinite() {
        f64::INFINITY
    } else {
        (1.0 - slack) * k as f64 * zr.value
    };
    let mut cumulative = Vec::with_capacity(zr.input_distribution.len());
    let mut acc = 0.0;
    for &p in &zr.input_distribution {
        acc += p;
        cumulative.push(acc);
    }
    let last_positive = zr
        .input_distribution
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(0);
    let draw = |rng: &mut R| -> Vec<u8> {
        (0..k)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(last_positive) as u8
            })
            .collect()
    };
    let db: DbMatrix = channel.symbol_db_matrix();
    let mut words: Vec<Vec<u8>> = (0..m).map(|_| draw(rng)).collect();
    let words = repair(
        &mut words,
        required,
        max_attempts,
        |a, b| db.word_distance(a, b),
        |_| draw(rng),
    )?;
    let mut book = Codebook::new(
        words.iter().cloned().map(Word::new).collect(),
        Metric::Bhattacharyya,
        Some(channel),
    )?;
    book.threshold = Some(required);
    Ok(book)
}

fn check_sizes(k: usize, m: usize) -> Result<()> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidCodebook(format!("need k >= 1 and m >= 1, got k={k}, m={m}")));
    }
    Ok(())
}

/// Shared rejection loop. Each round scans the violating pairs in
/// lexicographic order, redraws the later word of every pair whose words
/// are both still unmarked, and recomputes distances for redrawn words only.
fn repair<'w, T>(
    words: &'w mut [T],
    required: f64,
    max_attempts: usize,
    dist: impl Fn(&T, &T) -> f64,
    mut redraw: impl FnMut(usize) -> T,
) -> Result<&'w [T]> {
    let m = words.len();
    let mut table = vec![0.0; m * m];
    // a pair is fine when it meets the requirement (infinite requirement: infinite distance)
    let ok = |d: f64| d >= required;
    let mut bad = BTreeSet::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let d = dist(&words[i], &words[j]);
            table[i * m + j] = d;
            table[j * m + i] = d;
            if !ok(d) {
                bad.insert((i, j));
            }
        }
    }
    // while violations remain, the minimum distance is attained among them
    let min_bad = |bad: &BTreeSet<(usize, usize)>, table: &[f64]| {
        bad.iter().map(|&(i, j)| table[i * m + j]).fold(f64::INFINITY, f64::min)
    };
    let mut best = f64::NEG_INFINITY;
    let mut marked = vec![false; m];
    for _ in 0..max_attempts.max(1) {
        if bad.is_empty() {
            return Ok(words);
        }
        best = best.max(min_bad(&bad, &table));
        marked.iter_mut().for_each(|x| *x = false);
        for &(i, j) in &bad {
            if !marked[i] && !marked[j] {
                marked[j] = true;
            }
        }
        for j in (0..m).filter(|&j| marked[j]) {
            words[j] = redraw(j);
        }
        bad.retain(|&(i, j)| !marked[i] && !marked[j]);
        for j in (0..m).filter(|&j| marked[j]) {
            for i in 0..m {
                if i != j {
                    let d = dist(&words[i], &words[j]);
                    table[i * m + j] = d;
                    table[j * m + i] = d;
                }
            }
        }
        for j in (0..m).filter(|&j| marked[j]) {
            for i in 0..m {
                if i != j && !ok(table[i * m + j]) {
                    bad.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    // the final redraw might have fixed everything
    if bad.is_empty() {
        return Ok(words);
    }
    Err(Error::CodebookGeneration {
        attempts: max_attempts.max(1),
        best_min_pairwise: best.max(min_bad(&bad, &table)),
        required,
    })
}
