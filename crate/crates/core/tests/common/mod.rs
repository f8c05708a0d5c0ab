//! Reference implementations that share no code with the library paths they
//! check.
#![allow(dead_code)]

use std::f64::consts::PI;

use ascal::{Dataset, Label, PairRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Two overlapping Gaussian classes with random centres and spreads.
pub fn random_dataset(rng: &mut ChaCha8Rng, n_pos: usize, n_neg: usize) -> Dataset {
    let pos_mean = rng.gen_range(-0.2..0.8);
    let neg_mean = pos_mean - rng.gen_range(0.02..0.6);
    let pos_sd = rng.gen_range(0.02..0.25);
    let neg_sd = rng.gen_range(0.02..0.25);
    let mut records = Vec::with_capacity(n_pos + n_neg);
    for _ in 0..n_pos {
        let s = (pos_mean + pos_sd * normal(rng)).clamp(-1.0, 1.0);
        records.push(PairRecord::new(s, Label::Positive).unwrap());
    }
    for _ in 0..n_neg {
        let s = (neg_mean + neg_sd * normal(rng)).clamp(-1.0, 1.0);
        records.push(PairRecord::new(s, Label::Negative).unwrap());
    }
    Dataset::new(records)
}

/// Mean squared error of the angular remap evaluated through the
/// angle-addition identity `cos(w t + b) = cos(w t) cos b - sin(w t) sin b`,
/// with clamped angles pinned to `±1`.
fn grid_loss(thetas: &[f64], ys: &[f64], w: f64, cw: &[(f64, f64)], b: f64) -> f64 {
    let (sb, cb) = b.sin_cos();
    let mut sum = 0.0;
    for ((&t, &y), &(c, s)) in thetas.iter().zip(ys).zip(cw) {
        let a = t * w + b;
        let v = if a <= 0.0 {
            1.0
        } else if a >= PI {
            -1.0
        } else {
            c * cb - s * sb
        };
        sum += (v - y) * (v - y);
    }
    sum / thetas.len() as f64
}

/// Best loss on the grid `w in (0, 8]`, `b in [-pi, pi]`, both with `step`.
pub fn grid_search_min(dataset: &Dataset, step: f64) -> (f64, f64, f64) {
    let thetas: Vec<f64> = dataset.similarities().map(f64::acos).collect();
    let ys: Vec<f64> = dataset
        .records()
        .iter()
        .map(|r| if r.label == Label::Positive { 1.0 } else { -1.0 })
        .collect();
    let nw = (8.0 / step).round() as usize;
    let nb = (2.0 * PI / step).floor() as usize;
    (1..=nw)
        .into_par_iter()
        .map(|i| {
            let w = i as f64 * step;
            let cw: Vec<(f64, f64)> = thetas.iter().map(|t| ((t * w).cos(), (t * w).sin())).collect();
            let mut best = (f64::INFINITY, w, 0.0);
            for j in 0..=nb {
                let b = -PI + j as f64 * step;
                let l = grid_loss(&thetas, &ys, w, &cw, b);
                if l < best.0 {
                    best = (l, w, b);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, 0.0, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Exhaustive weighted isotonic least squares over every split of the
/// sorted points into contiguous blocks. Points with equal `x` must share a
/// block. Returns the minimum loss.
pub fn brute_isotonic_loss(xs: &[f64], ys: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let n = x.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        // bit j set: cut between j and j + 1
        let cuts: Vec<usize> = (0..n - 1).filter(|j| mask & (1 << j) != 0).collect();
        if cuts.iter().any(|&j| x[j] == x[j + 1]) {
            continue;
        }
        let mut bounds = vec![0];
        bounds.extend(cuts.iter().map(|j| j + 1));
        bounds.push(n);
        let means: Vec<f64> = bounds
            .windows(2)
            .map(|w| y[w[0]..w[1]].iter().sum::<f64>() / (w[1] - w[0]) as f64)
            .collect();
        if means.windows(2).any(|m| m[0] > m[1]) {
            continue;
        }
        let loss: f64 = bounds
            .windows(2)
            .zip(&means)
            .map(|(w, m)| y[w[0]..w[1]].iter().map(|v| (v - m) * (v - m)).sum::<f64>())
            .sum();
        best = best.min(loss);
    }
    best
}

/// Mann-Whitney estimate of P(s_pos > s_neg) with ties counted one half.
pub fn mann_whitney(dataset: &Dataset) -> f64 {
    let pos: Vec<f64> = dataset.records().iter().filter(|r| r.label.is_positive()).map(|r| r.similarity).collect();
    let neg: Vec<f64> = dataset.records().iter().filter(|r| !r.label.is_positive()).map(|r| r.similarity).collect();
    let mut twice = 0u64;
    for &p in &pos {
        for &n in &neg {
            twice += if p > n { 2 } else if p == n { 1 } else { 0 };
        }
    }
    twice as f64 / (2 * pos.len() * neg.len()) as f64
}

/// Highest achievable accuracy by scanning thresholds at, between and
/// around every observed similarity.
pub fn brute_best_accuracy(dataset: &Dataset) -> usize {
    let mut vals: Vec<f64> = dataset.similarities().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut candidates = vals.clone();
    candidates.extend(vals.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(0.5 * (vals[vals.len() - 1] + 1.0));
    candidates.push(-0.999_999_999);
    candidates
        .into_iter()
        .filter(|&t| t > -1.0 && t < 1.0)
        .map(|t| {
            dataset
                .records()
                .iter()
                .filter(|r| (r.similarity >= t) == r.label.is_positive())
                .count()
        })
        .max()
        .unwrap()
}
