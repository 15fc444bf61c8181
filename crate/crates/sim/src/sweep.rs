//! Analytic exponent curves for a Bernoulli source over a BSC, swept over
//! the accuracy or the crossover probability.

use crate::stats::fmt_sig;
use rayon::prelude::*;
use relay_core::exponents::{ChannelProfile, ExponentReport, SourceClass};
use relay_core::Result;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub p: f64,
    pub e_src: f64,
    pub achievable: f64,
    pub converse: f64,
    pub simple_forwarding: f64,
    pub oneshot: f64,
    pub oneshot_lambda: f64,
    pub oneshot_delta: f64,
    pub noncausal: f64,
}

/// Which parameter is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Fixed {
    P(f64),
    Eps(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub fixed: Fixed,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "eps",
    "p",
    "e_src",
    "achievable",
    "converse",
    "simple_forwarding",
    "oneshot",
    "oneshot_lambda",
    "oneshot_delta",
    "noncausal",
];

/// `points` midpoints of an even partition of `(0, 1/2)`.
pub fn default_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| (i as f64 - 0.5) / (2.0 * points as f64)).collect()
}

pub fn exponent_row(eps: f64, p: f64) -> Result<SweepRow> {
    let profile = ChannelProfile::bsc(p)?;
    let r = ExponentReport::from_profile(SourceClass::Bernoulli, &profile, eps)?;
    Ok(SweepRow {
        eps,
        p,
        e_src: r.e_src,
        achievable: r.e_achievable,
        converse: r.e_converse,
        simple_forwarding: r.e_simple_forwarding.expect("Bernoulli over a BSC"),
        oneshot: r.e_oneshot.value,
        oneshot_lambda: r.e_oneshot.lambda,
        oneshot_delta: r.e_oneshot.delta,
        noncausal: r.e_noncausal_ach,
    })
}

pub fn sweep_eps(p: f64, grid: &[f64]) -> Result<SweepTable> {
    let rows = grid.par_iter().map(|&eps| exponent_row(eps, p)).collect::<Result<_>>()?;
    Ok(SweepTable { fixed: Fixed::P(p), rows })
}

pub fn sweep_p(eps: f64, grid: &[f64]) -> Result<SweepTable> {
    let rows = grid.par_iter().map(|&p| exponent_row(eps, p)).collect::<Result<_>>()?;
    Ok(SweepTable {
        fixed: Fixed::Eps(eps),
        rows,
    })
}

impl SweepTable {
    /// The swept parameter of each row.
    pub fn x(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match self.fixed {
                Fixed::P(_) => r.eps,
                Fixed::Eps(_) => r.p,
            })
            .collect()
    }

    pub fn x_label(&self) -> &'static str {
        match self.fixed {
            Fixed::P(_) => "eps",
            Fixed::Eps(_) => "p",
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = SWEEP_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells = [
                r.eps,
                r.p,
                r.e_src,
                r.achievable,
                r.converse,
                r.simple_forwarding,
                r.oneshot,
                r.oneshot_lambda,
                r.oneshot_delta,
                r.noncausal,
            ];
            let line: Vec<String> = cells.iter().map(|&v| fmt_sig(v)).collect();
            writeln!(out, "{}", line.join(",")).expect("writing to a String");
        }
        out
    }

    /// The exponent curves in plotting order.
    pub fn series(&self) -> Vec<(&'static str, Vec<f64>)> {
        let col = |f: fn(&SweepRow) -> f64| self.rows.iter().map(f).collect::<Vec<_>>();
        vec![
            ("converse", col(|r| r.converse)),
            ("achievable", col(|r| r.achievable)),
            ("e_src", col(|r| r.e_src)),
            ("noncausal", col(|r| r.noncausal)),
            ("oneshot", col(|r| r.oneshot)),
            ("simple_forwarding", col(|r| r.simple_forwarding)),
        ]
    }
}
