//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use specious::bitset::BitVec;
use specious::measures::PairCounts;
use specious::miner::MinerConfig;
use specious::{Attr, Dataset, PolarityMode};

/// A consistent table with `1 <= n <= max_n` rows spread over the eight cells
/// with random, often lopsided, weights.
pub fn random_table(rng: &mut ChaCha8Rng, max_n: u64) -> PairCounts {
    let n = rng.gen_range(1..=max_n);
    let weights: Vec<f64> = (0..8)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    cells_from_weights(rng, n, &weights)
}

fn cells_from_weights(rng: &mut ChaCha8Rng, n: u64, weights: &[f64]) -> PairCounts {
    let total: f64 = weights.iter().sum();
    let mut cells = [0u64; 8];
    for _ in 0..n {
        if total == 0.0 {
            cells[rng.gen_range(0..8)] += 1;
            continue;
        }
        let mut u = rng.gen::<f64>() * total;
        let mut pick = 7;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                pick = i;
                break;
            }
            u -= w;
        }
        cells[pick] += 1;
    }
    PairCounts::from_cells(cells)
}

/// A table where every `X` row is also a `Q` row.
pub fn table_x_within_q(rng: &mut ChaCha8Rng, max_n: u64) -> PairCounts {
    let n = rng.gen_range(1..=max_n);
    let mut weights: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
    weights[2] = 0.0;
    weights[3] = 0.0;
    cells_from_weights(rng, n, &weights)
}

/// A table where every `Q` row is also an `X` row.
pub fn table_q_within_x(rng: &mut ChaCha8Rng, max_n: u64) -> PairCounts {
    let n = rng.gen_range(1..=max_n);
    let mut weights: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
    weights[4] = 0.0;
    weights[5] = 0.0;
    cells_from_weights(rng, n, &weights)
}

/// Columns mixing independent noise with noisy copies, conjunctions,
/// disjunctions and exact duplicates or complements of earlier columns.
pub fn structured_dataset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Dataset {
    let mut cols: Vec<Vec<bool>> = Vec::with_capacity(k);
    for j in 0..k {
        let kind = if j == 0 { 0 } else { rng.gen_range(0..6) };
        let col: Vec<bool> = match kind {
            0 | 1 => {
                let p = rng.gen_range(0.1..0.9);
                (0..n).map(|_| rng.gen_bool(p)).collect()
            }
            2 => {
                let src = rng.gen_range(0..j);
                let flip = rng.gen_range(0.0..0.25);
                (0..n).map(|r| cols[src][r] ^ rng.gen_bool(flip)).collect()
            }
            3 | 4 => {
                let a = rng.gen_range(0..j);
                let b = rng.gen_range(0..j);
                let flip = rng.gen_range(0.0..0.15);
                let and = kind == 3;
                (0..n)
                    .map(|r| {
                        let v = if and {
                            cols[a][r] && cols[b][r]
                        } else {
                            cols[a][r] || cols[b][r]
                        };
                        v ^ rng.gen_bool(flip)
                    })
                    .collect()
            }
            _ => {
                let src = rng.gen_range(0..j);
                let negate = rng.gen_bool(0.5);
                cols[src].iter().map(|&v| v ^ negate).collect()
            }
        };
        cols.push(col);
    }
    let named = cols
        .iter()
        .enumerate()
        .map(|(j, c)| ((j + 1).to_string(), BitVec::from_bools(c)))
        .collect();
    Dataset::from_columns(n, named).expect("valid columns")
}

/// A usable structured dataset (at least two non-constant columns).
pub fn usable_dataset(rng: &mut ChaCha8Rng, n_range: (usize, usize), k_range: (usize, usize)) -> Dataset {
    loop {
        let n = rng.gen_range(n_range.0..=n_range.1);
        let k = rng.gen_range(k_range.0..=k_range.1);
        let d = structured_dataset(rng, n, k);
        if d.is_usable() {
            return d;
        }
    }
}

/// Random miner settings: K, antecedent cap, polarity mode and sometimes a
/// restricted consequent list.
pub fn random_miner_config(rng: &mut ChaCha8Rng, d: &Dataset, max_k: usize) -> MinerConfig {
    let mut cfg = MinerConfig::top(rng.gen_range(1..=max_k));
    if rng.gen_bool(0.3) {
        cfg.max_antecedent = Some(rng.gen_range(1..=3));
    }
    if rng.gen_bool(0.3) {
        cfg.polarity_mode = PolarityMode::Positive;
    }
    if rng.gen_bool(0.25) {
        let list: Vec<Attr> = d.attrs().filter(|_| rng.gen_bool(0.5)).collect();
        if !list.is_empty() {
            cfg.consequents = Some(list);
        }
    }
    cfg
}
