//! The zero-rate channel exponent
//! `E(0) = max_P sum_{w,w'} P(w) P(w') d_B(w, w')` over input distributions.
//!
//! The quadratic form is indefinite in general, so for three or more inputs
//! we run projected gradient ascent from several starting points and keep
//! the best stationary point, then polish it by solving the stationarity
//! system on its support.

use crate::channel::{ChannelModel, DbMatrix};
use crate::json_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const RESTARTS: usize = 20;
const GRID_RESOLUTION: usize = 8;
const MOVE_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200_000;
const MAX_GRID_INPUTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroRateExponent {
    #[serde(with = "json_f64")]
    pub value: f64,
    pub input_distribution: Vec<f64>,
}

pub fn zero_rate_exponent(channel: &ChannelModel) -> ZeroRateExponent {
    zero_rate_from_db(&channel.symbol_db_matrix())
}

pub fn zero_rate_from_db(db: &DbMatrix) -> ZeroRateExponent {
    let n = db.size();
    if n == 1 {
        return ZeroRateExponent {
            value: 0.0,
            input_distribution: vec![1.0],
        };
    }
    if n == 2 {
        return ZeroRateExponent {
            value: db.get(0, 1) / 2.0,
            input_distribution: vec![0.5, 0.5],
        };
    }
    if let Some((w, v)) = infinite_pair(db) {
        let mut p = vec![0.0; n];
        p[w] = 0.5;
        p[v] = 0.5;
        return ZeroRateExponent {
            value: f64::INFINITY,
            input_distribution: p,
        };
    }
    maximize_from_starts(db, &default_starts(db))
}

fn infinite_pair(db: &DbMatrix) -> Option<(usize, usize)> {
    let n = db.size();
    (0..n)
        .flat_map(|w| ((w + 1)..n).map(move |v| (w, v)))
        .find(|&(w, v)| db.get(w, v).is_infinite())
}

/// `sum_{w,v} p_w p_v d(w,v)`, with `0 * inf = 0`.
pub fn input_quadratic_form(db: &DbMatrix, p: &[f64]) -> f64 {
    let n = db.size();
    let mut total = 0.0;
    for w in 0..n {
        if p[w] == 0.0 {
            continue;
        }
        for v in 0..n {
            if p[v] == 0.0 || w == v {
                continue;
            }
            total += p[w] * p[v] * db.get(w, v);
        }
    }
    total
}

/// Starting points: the uniform distribution, every vertex, and the best
/// points of the resolution-1/8 simplex grid to make up the restart budget.
pub fn default_starts(db: &DbMatrix) -> Vec<Vec<f64>> {
    let n = db.size();
    let mut starts = vec![vec![1.0 / n as f64; n]];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        starts.push(e);
    }
    let fill = RESTARTS.saturating_sub(starts.len());
    if fill == 0 {
        return starts;
    }
    let mut pool = if n <= MAX_GRID_INPUTS {
        simplex_grid(n, GRID_RESOLUTION)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ee_d5);
        (0..4 * RESTARTS)
            .map(|_| {
                let mut v: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
                let s: f64 = v.iter().sum();
                v.iter_mut().for_each(|x| *x /= s);
                v
            })
            .collect()
    };
    pool.retain(|p| !starts.contains(p));
    let mut scored: Vec<(f64, Vec<f64>)> = pool
        .into_iter()
        .map(|p| (input_quadratic_form(db, &p), p))
        .collect();
    // stable sort keeps grid order among ties
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    starts.extend(scored.into_iter().take(fill).map(|(_, p)| p));
    starts
}

/// All points of the simplex whose coordinates are multiples of `1/resolution`.
pub fn simplex_grid(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[i] = c;
            rec(i + 1, left - c, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, resolution, &mut vec![0; n], &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|x| x as f64 / resolution as f64).collect())
        .collect()
}

/// Runs projected gradient ascent from each start and keeps the best result
/// (earliest start wins ties).
pub fn maximize_from_starts(db: &DbMatrix, starts: &[Vec<f64>]) -> ZeroRateExponent {
    let mut best: Option<ZeroRateExponent> = None;
    for start in starts {
        let candidate = ascend(db, start.clone());
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    best.expect("at least one start")
}

fn ascend(db: &DbMatrix, mut p: Vec<f64>) -> ZeroRateExponent {
    let n = db.size();
    let max_row: f64 = (0..n)
        .map(|w| (0..n).map(|v| db.get(w, v)).sum::<f64>())
        .fold(0.0, f64::max);
    if max_row > 0.0 {
        // gradient 2 D p is Lipschitz with constant 2 ||D|| <= 2 max_row
        let step = 1.0 / (2.0 * max_row);
        let mut next = vec![0.0; n];
        for _ in 0..MAX_ITERATIONS {
            for w in 0..n {
                let grad: f64 = 2.0 * (0..n).map(|v| db.get(w, v) * p[v]).sum::<f64>();
                next[w] = p[w] + step * grad;
            }
            project_to_simplex(&mut next);
            let moved = p
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            p.copy_from_slice(&next);
            if moved < MOVE_TOLERANCE {
                break;
            }
        }
    }
    let mut value = input_quadratic_form(db, &p);
    if let Some(polished) = polish_on_support(db, &p) {
        let v = input_quadratic_form(db, &polished);
        if v >= value {
            value = v;
            p = polished;
        }
    }
    ZeroRateExponent {
        value,
        input_distribution: p,
    }
}

/// Solves `D_S x = mu 1, sum x = 1` on the support of `p`.
fn polish_on_support(db: &DbMatrix, p: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 1e-12).collect();
    let y = stationary_point_on(db, &support)?;
    let mut full = vec![0.0; p.len()];
    for (&i, &x) in support.iter().zip(&y) {
        full[i] = x;
    }
    Some(full)
}

/// Stationary point of the quadratic form restricted to the face spanned by
/// `support`, if it exists and lies strictly inside that face.
pub fn stationary_point_on(db: &DbMatrix, support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let mut a: Vec<Vec<f64>> = support
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = support.iter().map(|&j| db.get(i, j)).collect();
            row.push(1.0);
            row
        })
        .collect();
    let y = solve_linear(&mut a)?;
    let s: f64 = y.iter().sum();
    if s.abs() < 1e-300 {
        return None;
    }
    let x: Vec<f64> = y.iter().map(|v| v / s).collect();
    x.iter().all(|&v| v > 0.0).then_some(x)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_linear(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        for r in (col + 1)..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = ((r + 1)..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - tail) / a[r][r];
    }
    Some(x)
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_to_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_lands_on_simplex() {
        let mut v = vec![0.9, 0.6, -0.3];
        project_to_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((v[0] - 0.65).abs() < 1e-15 && (v[1] - 0.35).abs() < 1e-15 && v[2] == 0.0);
        let mut v = vec![0.2, 0.3, 0.5];
        project_to_simplex(&mut v);
        assert_eq!(v, vec![0.2, 0.3, 0.5]);
    }

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(3, 8).len(), 45);
        assert_eq!(simplex_grid(4, 8).len(), 165);
        for p in simplex_grid(4, 8) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn restart_budget() {
        let c = ChannelModel::from_rows(vec![
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        assert_eq!(default_starts(&c.symbol_db_matrix()).len(), RESTARTS);
    }

    #[test]
    fn symmetric_ternary_is_uniform() {
        let c = ChannelModel::from_rows(vec![
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let db = c.symbol_db_matrix();
        let z = zero_rate_exponent(&c);
        // uniform: (1 - 1/3) d
        assert!((z.value - 2.0 / 3.0 * db.get(0, 1)).abs() < 1e-12);
        for p in &z.input_distribution {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_rows_give_zero() {
        let c = ChannelModel::from_rows(vec![vec![0.3, 0.7]; 3]).unwrap();
        assert_eq!(zero_rate_exponent(&c).value, 0.0);
        let c = ChannelModel::from_rows(vec![vec![0.3, 0.7]; 2]).unwrap();
        assert_eq!(zero_rate_exponent(&c).value, 0.0);
    }

    #[test]
    fn disjoint_pair_is_infinite() {
        let c = ChannelModel::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.6, 0.4],
        ])
        .unwrap();
        let z = zero_rate_exponent(&c);
        assert_eq!(z.value, f64::INFINITY);
        assert_eq!(z.input_distribution, vec![0.5, 0.5, 0.0]);
        assert_eq!(zero_rate_exponent(&ChannelModel::noiseless(2)).value, f64::INFINITY);
    }
}
