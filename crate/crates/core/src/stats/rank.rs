//! Row-wise ranking, average ranks, and win counting.
//!
//! Ranks are the common currency of the non-parametric workflow: the Friedman
//! test, average-ranking tables, and radar charts all consume the output of
//! [`rank_rows`]. Ties receive the arithmetic mean of the rank positions they
//! span (mean-rank a.k.a. fractional ranking).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether smaller or larger observed values are considered better (rank 1).
///
/// Fitness errors use [`Direction::LowerIsBetter`]; the direction is explicit
/// everywhere to avoid silent sign errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    LowerIsBetter,
    HigherIsBetter,
}

/// Row-wise ranks of an n×k value matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    /// `ranks[row][col]`, each in `[1, k]`; every row sums to `k(k+1)/2`.
    pub ranks: Vec<Vec<f64>>,
    pub direction: Direction,
}

impl RankMatrix {
    /// Number of subjects (rows).
    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    /// Number of treatments (columns).
    pub fn k(&self) -> usize {
        self.ranks.first().map_or(0, Vec::len)
    }
}

fn check_matrix(values: &[Vec<f64>]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let k = values[0].len();
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 columns to rank, got {k}"
        )));
    }
    for (r, row) in values.iter().enumerate() {
        if row.len() != k {
            return Err(Error::InvalidInput(format!(
                "ragged matrix: row {r} has {} columns, expected {k}",
                row.len()
            )));
        }
        for (c, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite value {v} at row {r}, column {c}"
                )));
            }
        }
    }
    Ok(k)
}

/// Ranks one row; `key` maps a value to the sort key under the chosen direction.
fn rank_row(row: &[f64], direction: Direction) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    match direction {
        Direction::LowerIsBetter => order.sort_by(|&a, &b| row[a].total_cmp(&row[b])),
        Direction::HigherIsBetter => order.sort_by(|&a, &b| row[b].total_cmp(&row[a])),
    }
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        // Extend the tie group: exact value equality shares a mean rank.
        let mut j = i + 1;
        while j < k && row[order[j]] == row[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) hold ranks i+1..=j; their mean is (i+j+1)/2.
        let mean_rank = (i + j + 1) as f64 / 2.0;
        for &col in &order[i..j] {
            ranks[col] = mean_rank;
        }
        i = j;
    }
    ranks
}

/// Ranks every row of `values`; rank 1 is the best column under `direction`.
///
/// Tied entries share the arithmetic mean of the rank positions they span, so
/// every row sums to `k(k+1)/2` exactly.
pub fn rank_rows(values: &[Vec<f64>], direction: Direction) -> Result<RankMatrix> {
    check_matrix(values)?;
    let ranks = values.iter().map(|row| rank_row(row, direction)).collect();
    Ok(RankMatrix { ranks, direction })
}

/// Column means of a rank matrix; a lower mean rank is better on average.
pub fn average_ranks(ranks: &RankMatrix) -> Vec<f64> {
    let n = ranks.n() as f64;
    let k = ranks.k();
    let mut sums = vec![0.0; k];
    for row in &ranks.ranks {
        for (c, r) in row.iter().enumerate() {
            sums[c] += r;
        }
    }
    sums.iter_mut().for_each(|s| *s /= n);
    sums
}

/// Per-column count of rows where that column is (tied-)best — the "Better" row.
///
/// Ties credit every tied-best column, so a row can contribute to several
/// counts and the counts can sum to more than the number of rows.
pub fn count_wins(values: &[Vec<f64>], direction: Direction) -> Result<Vec<u64>> {
    let k = check_matrix(values)?;
    let mut wins = vec![0u64; k];
    for row in values {
        let best = match direction {
            Direction::LowerIsBetter => row.iter().copied().fold(f64::INFINITY, f64::min),
            Direction::HigherIsBetter => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        for (c, &v) in row.iter().enumerate() {
            if v == best {
                wins[c] += 1;
            }
        }
    }
    Ok(wins)
}
