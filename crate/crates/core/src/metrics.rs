//! Calibration and verification metrics: ECE under equal-width or
//! equal-frequency confidence bins, accuracy, ROC sweeps, AUC and threshold
//! selection.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Threshold};
use crate::scalar::Scalar;

pub const DEFAULT_ECE_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinScheme {
    /// `M` bins of width `1 / (2M)` tiling `[0.5, 1]`.
    #[default]
    EqualWidth,
    /// `M` bins of (nearly) equal population, sorted by confidence.
    EqualFrequency,
}

impl BinScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            BinScheme::EqualWidth => "equal-width",
            BinScheme::EqualFrequency => "equal-frequency",
        }
    }
}

impl fmt::Display for BinScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinScheme {
    type Err = CalibError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" => Ok(BinScheme::EqualWidth),
            "equal-frequency" => Ok(BinScheme::EqualFrequency),
            other => Err(CalibError::InvalidArgument(format!(
                "unknown bin scheme {other:?}"
            ))),
        }
    }
}

/// One bin of a reliability diagram. `accuracy` and `mean_confidence` are
/// absent for empty bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport<T> {
    pub lo: T,
    pub hi: T,
    pub count: usize,
    pub accuracy: Option<T>,
    pub mean_confidence: Option<T>,
}

impl<T: Scalar> BinReport<T> {
    /// `|accuracy - mean_confidence|`, zero for an empty bin.
    pub fn gap(&self) -> T {
        match (self.accuracy, self.mean_confidence) {
            (Some(a), Some(c)) => (a - c).abs(),
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EceReport<T> {
    pub ece: T,
    pub scheme: BinScheme,
    pub m_bins: usize,
    pub bins: Vec<BinReport<T>>,
}

impl<T: Scalar> EceReport<T> {
    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Recomputes the ECE from the per-bin rows.
    pub fn recompute(&self) -> T {
        let n = T::from_count(self.total_count());
        self.bins
            .iter()
            .map(|b| T::from_count(b.count) / n * b.gap())
            .sum()
    }
}

fn summarize<T: Scalar>(lo: T, hi: T, members: &[(T, bool)]) -> BinReport<T> {
    let count = members.len();
    if count == 0 {
        return BinReport {
            lo,
            hi,
            count,
            accuracy: None,
            mean_confidence: None,
        };
    }
    let n = T::from_count(count);
    let correct = members.iter().filter(|m| m.1).count();
    let conf: T = members.iter().map(|m| m.0).sum();
    BinReport {
        lo,
        hi,
        count,
        accuracy: Some(T::from_count(correct) / n),
        mean_confidence: Some(conf / n),
    }
}

/// Equal-width bin edges over `[0.5, 1]`.
fn confidence_edges<T: Scalar>(m_bins: usize) -> Vec<T> {
    let denom = T::from_count(2 * m_bins);
    let mut edges: Vec<T> = (0..=m_bins)
        .map(|i| T::half() + T::from_count(i) / denom)
        .collect();
    edges[m_bins] = T::one();
    edges
}

/// Bin for confidence `c`: `[lo, hi)`, except the last bin which is closed.
fn equal_width_index<T: Scalar>(edges: &[T], c: T) -> usize {
    let m_bins = edges.len() - 1;
    let raw = ((c - T::half()) * T::from_count(2 * m_bins)).floor();
    let mut idx = raw.to_usize().unwrap_or(0).min(m_bins - 1);
    while idx > 0 && c < edges[idx] {
        idx -= 1;
    }
    while idx + 1 < m_bins && c >= edges[idx + 1] {
        idx += 1;
    }
    idx
}

/// ECE of `(confidence, correct)` predictions.
pub fn ece_from_predictions<T: Scalar>(
    predictions: &[(T, bool)],
    m_bins: usize,
    scheme: BinScheme,
) -> Result<EceReport<T>> {
    if m_bins == 0 {
        return Err(CalibError::InvalidArgument("ECE needs at least one bin".into()));
    }
    if predictions.is_empty() {
        return Err(CalibError::EmptyDataset);
    }
    let bins = match scheme {
        BinScheme::EqualWidth => {
            let edges = confidence_edges::<T>(m_bins);
            let mut grouped: Vec<Vec<(T, bool)>> = vec![Vec::new(); m_bins];
            for &p in predictions {
                grouped[equal_width_index(&edges, p.0)].push(p);
            }
            grouped
                .iter()
                .enumerate()
                .map(|(m, members)| summarize(edges[m], edges[m + 1], members))
                .collect::<Vec<_>>()
        }
        BinScheme::EqualFrequency => {
            let mut sorted = predictions.to_vec();
            // stable: ties keep input order
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let n = sorted.len();
            let (base, extra) = (n / m_bins, n % m_bins);
            let mut start = 0;
            let mut bins = Vec::with_capacity(m_bins);
            for m in 0..m_bins {
                let size = base + usize::from(m < extra);
                if size == 0 {
                    continue;
                }
                let members = &sorted[start..start + size];
                bins.push(summarize(members[0].0, members[size - 1].0, members));
                start += size;
            }
            bins
        }
    };
    let mut report = EceReport {
        ece: T::zero(),
        scheme,
        m_bins,
        bins,
    };
    report.ece = report.recompute();
    Ok(report)
}

/// Expected calibration error of the thresholded confidence measure.
pub fn ece<T: Scalar>(
    pairs: &Dataset<T>,
    tau: Threshold<T>,
    m_bins: usize,
    scheme: BinScheme,
) -> Result<EceReport<T>> {
    let predictions: Vec<(T, bool)> = pairs
        .predictions(tau)
        .zip(pairs.records())
        .map(|(p, r)| (p.confidence, p.is_correct(r.label)))
        .collect();
    ece_from_predictions(&predictions, m_bins, scheme)
}

/// Fraction of pairs whose thresholded decision matches the label.
pub fn accuracy<T: Scalar>(pairs: &Dataset<T>, tau: Threshold<T>) -> Result<T> {
    pairs.require_non_empty()?;
    let correct = pairs
        .predictions(tau)
        .zip(pairs.records())
        .filter(|(p, r)| p.is_correct(r.label))
        .count();
    Ok(T::from_count(correct) / T::from_count(pairs.len()))
}

pub fn mean_confidence<T: Scalar>(pairs: &Dataset<T>, tau: Threshold<T>) -> Result<T> {
    pairs.require_non_empty()?;
    let sum: T = pairs.predictions(tau).map(|p| p.confidence).sum();
    Ok(sum / T::from_count(pairs.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<T> {
    pub threshold: T,
    pub tar: T,
    pub far: T,
}

/// Similarities split by class, each sorted ascending.
struct Sorted<T> {
    pos: Vec<T>,
    neg: Vec<T>,
}

impl<T: Scalar> Sorted<T> {
    fn new(pairs: &Dataset<T>) -> Result<Self> {
        pairs.require_both_classes()?;
        let (mut pos, mut neg): (Vec<T>, Vec<T>) = (Vec::new(), Vec::new());
        for r in pairs.records() {
            if r.label.is_positive() {
                pos.push(r.similarity);
            } else {
                neg.push(r.similarity);
            }
        }
        let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap();
        pos.sort_by(cmp);
        neg.sort_by(cmp);
        Ok(Sorted { pos, neg })
    }

    /// Accepted positives and negatives at threshold `t` (`s >= t`).
    fn accepted(&self, t: T) -> (usize, usize) {
        (
            self.pos.len() - self.pos.partition_point(|&s| s < t),
            self.neg.len() - self.neg.partition_point(|&s| s < t),
        )
    }

    fn distinct(&self) -> Vec<T> {
        let mut all: Vec<T> = self.pos.iter().chain(&self.neg).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        all
    }
}

/// TAR and FAR when accepting `s >= tau`.
pub fn rates_at<T: Scalar>(pairs: &Dataset<T>, tau: Threshold<T>) -> Result<(T, T)> {
    let sorted = Sorted::new(pairs)?;
    let (tp, fp) = sorted.accepted(tau.value());
    Ok((
        T::from_count(tp) / T::from_count(sorted.pos.len()),
        T::from_count(fp) / T::from_count(sorted.neg.len()),
    ))
}

fn roc_counts<T: Scalar>(sorted: &Sorted<T>) -> Vec<(T, usize, usize)> {
    let mut thresholds = vec![-T::one()];
    thresholds.extend(sorted.distinct().into_iter().filter(|&v| v > -T::one()));
    // just above any valid similarity: rejects everything
    thresholds.push(T::one() + T::epsilon());
    thresholds
        .into_iter()
        .map(|t| {
            let (tp, fp) = sorted.accepted(t);
            (t, tp, fp)
        })
        .collect()
}

/// ROC sweep over every distinct similarity plus accept-all and reject-all
/// sentinels, ordered by increasing threshold.
pub fn roc_curve<T: Scalar>(pairs: &Dataset<T>) -> Result<Vec<RocPoint<T>>> {
    let sorted = Sorted::new(pairs)?;
    let (np, nn) = (
        T::from_count(sorted.pos.len()),
        T::from_count(sorted.neg.len()),
    );
    Ok(roc_counts(&sorted)
        .into_iter()
        .map(|(t, tp, fp)| RocPoint {
            threshold: t,
            tar: T::from_count(tp) / np,
            far: T::from_count(fp) / nn,
        })
        .collect())
}

/// Area under the ROC curve by the trapezoidal rule.
pub fn auc<T: Scalar>(pairs: &Dataset<T>) -> Result<T> {
    let sorted = Sorted::new(pairs)?;
    let counts = roc_counts(&sorted);
    // twice the area, in units of (positive, negative) pair counts
    let twice: usize = counts
        .windows(2)
        .map(|w| (w[0].2 - w[1].2) * (w[0].1 + w[1].1))
        .sum();
    let denom = T::from_count(2) * T::from_count(sorted.pos.len()) * T::from_count(sorted.neg.len());
    Ok(T::from_count(twice) / denom)
}

/// A threshold together with the rates it achieves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct OperatingPoint<T: Scalar> {
    pub threshold: Threshold<T>,
    pub tar: T,
    pub far: T,
}

/// Smallest threshold whose empirical FAR does not exceed `far_target`.
/// Thresholds are taken at observed similarity values; when only the region
/// above the largest observed value qualifies, the midpoint of that value and
/// 1 is used.
pub fn threshold_at_far<T: Scalar>(pairs: &Dataset<T>, far_target: T) -> Result<OperatingPoint<T>> {
    if !(far_target > T::zero() && far_target < T::one()) {
        return Err(CalibError::InvalidArgument(format!(
            "FAR target must lie in (0, 1), got {far_target}"
        )));
    }
    let sorted = Sorted::new(pairs)?;
    let n_neg = sorted.neg.len();
    let recommended = (T::one() / far_target).ceil().to_usize().unwrap_or(usize::MAX);
    if n_neg < recommended {
        warn!("only {n_neg} negatives for a FAR target of {far_target}; at least {recommended} recommended");
    }
    let nn = T::from_count(n_neg);
    let np = T::from_count(sorted.pos.len());
    let values = sorted.distinct();

    let far_of = |t: T| T::from_count(sorted.accepted(t).1) / nn;
    let idx = values.partition_point(|&v| far_of(v) > far_target);
    let candidate = if idx == values.len() {
        let top = *values.last().unwrap();
        (top + T::one()) * T::half()
    } else if values[idx] >= T::one() {
        // 1 itself is not a valid threshold; anything in (previous, 1) is equivalent
        let prev = if idx > 0 { values[idx - 1] } else { -T::one() };
        (prev + T::one()) * T::half()
    } else {
        values[idx]
    };
    let threshold = Threshold::new(candidate).map_err(|_| CalibError::DegenerateThreshold {
        value: candidate.to_f64().unwrap_or(f64::NAN),
    })?;
    let (tp, fp) = sorted.accepted(threshold.value());
    let far = T::from_count(fp) / nn;
    if far > far_target {
        return Err(CalibError::DegenerateThreshold {
            value: candidate.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(OperatingPoint {
        threshold,
        tar: T::from_count(tp) / np,
        far,
    })
}

/// Threshold maximising empirical accuracy. Interior optima return the
/// midpoint between the two neighbouring observed similarities; accepting
/// everything returns the smallest similarity, rejecting everything returns
/// the midpoint between the largest similarity and 1. Among equally accurate
/// choices the lowest threshold wins.
pub fn best_accuracy_threshold<T: Scalar>(pairs: &Dataset<T>) -> Result<Threshold<T>> {
    let sorted = Sorted::new(pairs)?;
    let values = sorted.distinct();
    let n_neg = sorted.neg.len();
    let one = T::one();

    let mut best: Option<(usize, T)> = None;
    // option j accepts values[j..]; j == values.len() rejects everything
    for j in 0..=values.len() {
        let t = if j == 0 {
            values[0]
        } else if j == values.len() {
            (values[j - 1] + one) * T::half()
        } else {
            let mid = (values[j - 1] + values[j]) * T::half();
            if mid > values[j - 1] {
                mid
            } else {
                values[j]
            }
        };
        if !(t > -one && t < one) {
            continue;
        }
        let (tp, fp) = sorted.accepted(t);
        let correct = tp + (n_neg - fp);
        if best.is_none_or(|(c, _)| correct > c) {
            best = Some((correct, t));
        }
    }
    let (_, t) = best.ok_or(CalibError::DegenerateThreshold { value: 1.0 })?;
    Threshold::new(t)
}
