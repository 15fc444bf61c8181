//! Discrete memoryless channels.
//!
//! Alphabets are index based (`0..size`). Transition probabilities are kept
//! in the linear domain; every likelihood leaves this module as a log.
//! A Bhattacharyya distance of `f64::INFINITY` means the two output
//! distributions have disjoint supports.

use crate::error::{check_range, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A sequence of alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn zeros(len: usize) -> Self {
        Word(vec![0; len])
    }

    /// Parses a digit string such as `"0110"`.
    pub fn from_digits(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Parse(format!("non-digit symbol {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Digit-string form; only defined for symbols below 10.
    pub fn to_digits(&self) -> Result<String> {
        self.0
            .iter()
            .map(|&s| {
                char::from_digit(s as u32, 10).ok_or_else(|| {
                    Error::InvalidCodebook(format!("symbol {s} has no single-digit form"))
                })
            })
            .collect()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hamming(&self, other: &Word) -> Result<usize> {
        check_lengths(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }

    /// Checks every symbol against `alphabet`.
    pub fn validate(&self, alphabet: usize) -> Result<()> {
        match self.0.iter().position(|&s| s as usize >= alphabet) {
            Some(position) => Err(Error::SymbolOutOfRange {
                symbol: self.0[position] as usize,
                position,
                alphabet,
            }),
            None => Ok(()),
        }
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            if *s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

/// A row-stochastic transition matrix; entry `(w, z)` is `P(z | w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    inputs: usize,
    outputs: usize,
    transition: Vec<f64>,
    ln_transition: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ChannelModel {
    /// Binary symmetric channel with crossover `p` in `(0, 1/2)`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_range("p", p, p > 0.0 && p < 0.5, "0 < p < 1/2")?;
        Self::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// The identity channel on `size` symbols.
    pub fn noiseless(size: usize) -> Self {
        let rows = (0..size)
            .map(|w| (0..size).map(|z| if w == z { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(rows).expect("identity matrix is row-stochastic")
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::InvalidChannel("no output symbols".into()));
        }
        if inputs > 256 || outputs > 256 {
            return Err(Error::InvalidChannel("alphabets are limited to 256 symbols".into()));
        }
        let mut transition = Vec::with_capacity(inputs * outputs);
        for (w, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::InvalidChannel(format!(
                    "row {w} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidChannel(format!("row {w} has entry {bad} outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidChannel(format!("row {w} sums to {sum}")));
            }
            transition.extend_from_slice(row);
        }
        let ln_transition = transition.iter().map(|p| p.ln()).collect();
        let mut cumulative = Vec::with_capacity(transition.len());
        for row in transition.chunks(outputs) {
            let mut acc = 0.0;
            for &p in row {
                acc += p;
                cumulative.push(acc);
            }
        }
        Ok(Self {
            inputs,
            outputs,
            transition,
            ln_transition,
            cumulative,
        })
    }

    pub fn input_alphabet_size(&self) -> usize {
        self.inputs
    }

    pub fn output_alphabet_size(&self) -> usize {
        self.outputs
    }

    pub fn prob(&self, w: usize, z: usize) -> f64 {
        self.transition[w * self.outputs + z]
    }

    pub fn ln_prob(&self, w: usize, z: usize) -> f64 {
        self.ln_transition[w * self.outputs + z]
    }

    pub fn row(&self, w: usize) -> &[f64] {
        &self.transition[w * self.outputs..(w + 1) * self.outputs]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.transition.chunks(self.outputs).map(<[f64]>::to_vec).collect()
    }

    /// `Some(p)` when the matrix is `[[1-p, p], [p, 1-p]]` with `p <= 1/2`.
    pub fn bsc_crossover(&self) -> Option<f64> {
        if self.inputs != 2 || self.outputs != 2 {
            return None;
        }
        let p = self.prob(0, 1);
        let symmetric = self.prob(1, 0) == p && p <= 0.5;
        symmetric.then_some(p)
    }

    /// Draws one output symbol for input `w`. Consumes exactly one uniform.
    pub fn sample_output<R: Rng + ?Sized>(&self, w: usize, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        let cum = &self.cumulative[w * self.outputs..(w + 1) * self.outputs];
        let z = cum.iter().position(|&c| u < c).unwrap_or_else(|| {
            // u landed in rounding slack above the last partial sum
            self.row(w).iter().rposition(|&p| p > 0.0).unwrap_or(0)
        });
        z as u8
    }

    /// Sends `input` through the channel, one independent draw per symbol.
    pub fn transmit<R: Rng + ?Sized>(&self, input: &Word, rng: &mut R) -> Result<Word> {
        input.validate(self.inputs)?;
        Ok(Word(
            input
                .symbols()
                .iter()
                .map(|&w| self.sample_output(w as usize, rng))
                .collect(),
        ))
    }

    /// Per-symbol Bhattacharyya distances `-ln sum_z sqrt(P(z|w) P(z|w'))`.
    pub fn symbol_db_matrix(&self) -> DbMatrix {
        let n = self.inputs;
        let mut values = vec![0.0; n * n];
        for w in 0..n {
            for v in (w + 1)..n {
                let rho: f64 = self
                    .row(w)
                    .iter()
                    .zip(self.row(v))
                    .map(|(a, b)| (a * b).sqrt())
                    .sum();
                let d = if rho <= 0.0 {
                    f64::INFINITY
                } else {
                    (-rho.ln()).max(0.0)
                };
                values[w * n + v] = d;
                values[v * n + w] = d;
            }
        }
        DbMatrix { size: n, values }
    }

    /// `ln P(output | input)`; `-inf` when some symbol has zero probability.
    pub fn word_log_likelihood(&self, input: &Word, output: &Word) -> Result<f64> {
        check_lengths(input.len(), output.len())?;
        input.validate(self.inputs)?;
        output.validate(self.outputs)?;
        Ok(self.word_log_likelihood_unchecked(input.symbols(), output.symbols()))
    }

    pub(crate) fn word_log_likelihood_unchecked(&self, input: &[u8], output: &[u8]) -> f64 {
        input
            .iter()
            .zip(output)
            .map(|(&w, &z)| self.ln_prob(w as usize, z as usize))
            .sum()
    }

    /// Word-level Bhattacharyya distance, as the sum of per-symbol distances.
    pub fn word_db(&self, a: &Word, b: &Word) -> Result<f64> {
        check_lengths(a.len(), b.len())?;
        a.validate(self.inputs)?;
        b.validate(self.inputs)?;
        Ok(self.symbol_db_matrix().word_distance(a.symbols(), b.symbols()))
    }
}

/// Symmetric matrix of per-symbol Bhattacharyya distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DbMatrix {
    size: usize,
    values: Vec<f64>,
}

impl DbMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, w: usize, v: usize) -> f64 {
        self.values[w * self.size + v]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    pub fn has_infinite_pair(&self) -> bool {
        self.values.iter().any(|d| d.is_infinite())
    }

    pub fn word_distance(&self, a: &[u8], b: &[u8]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.get(x as usize, y as usize))
            .sum()
    }
}

/// JSON channel description: `{"type":"bsc","p":0.1}`,
/// `{"type":"dmc","matrix":[[...],...]}` or `{"type":"noiseless","size":2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    Bsc { p: f64 },
    Dmc { matrix: Vec<Vec<f64>> },
    Noiseless { size: usize },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelModel> {
        match self {
            ChannelSpec::Bsc { p } => ChannelModel::bsc(*p),
            ChannelSpec::Dmc { matrix } => ChannelModel::from_rows(matrix.clone()),
            ChannelSpec::Noiseless { size } => {
                if *size == 0 || *size > 256 {
                    return Err(Error::InvalidChannel(format!("noiseless size {size}")));
                }
                Ok(ChannelModel::noiseless(*size))
            }
        }
    }

    pub fn from_json(s: &str) -> Result<ChannelModel> {
        let spec: ChannelSpec =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.build()
    }
}
