use crate::error::{invalid, Result};

/// Mean rank of one algorithm over paired runs; rank 1 is best.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub algorithm: String,
    pub mean_rank: f64,
}

/// Friedman-style mean ranks of final fitness samples, higher fitness
/// ranking first. Run `r` of every algorithm forms one block; ties share
/// the average of their ranks. Rows are sorted by mean rank, keeping input
/// order among equal ranks.
pub fn rank_table(samples: &[(String, Vec<f64>)]) -> Result<Vec<RankRow>> {
    if samples.len() < 2 {
        return Err(invalid("ranking needs at least two algorithms"));
    }
    let n_runs = samples[0].1.len();
    if n_runs == 0 || samples.iter().any(|(_, s)| s.len() != n_runs) {
        return Err(invalid("ranking needs equal, non-empty samples for every algorithm"));
    }
    let mut totals = vec![0.0; samples.len()];
    for r in 0..n_runs {
        let block: Vec<f64> = samples.iter().map(|(_, s)| s[r]).collect();
        for (a, rank) in block_ranks(&block).into_iter().enumerate() {
            totals[a] += rank;
        }
    }
    let mut rows: Vec<RankRow> = samples
        .iter()
        .zip(totals)
        .map(|((name, _), t)| RankRow { algorithm: name.clone(), mean_rank: t / n_runs as f64 })
        .collect();
    rows.sort_by(|a, b| a.mean_rank.total_cmp(&b.mean_rank));
    Ok(rows)
}

/// Ranks of one block, descending by value, ties averaged.
fn block_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}
