//! Non-parametric comparison calibrators: equal-width histogram binning over
//! the similarity axis and isotonic regression fitted by pool-adjacent-
//! violators. Both remap the threshold to the calibrated score of the
//! threshold itself.

use std::cmp::Ordering::{Greater, Less};

use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Threshold};
use crate::scalar::Scalar;

pub const DEFAULT_HISTOGRAM_BINS: usize = 15;

/// Distance by which a calibrated threshold of exactly `±1` is pulled inward.
pub const THRESHOLD_NUDGE: f64 = 1e-6;

fn threshold_from_level<T: Scalar>(level: T) -> Result<Threshold<T>> {
    let one = T::one();
    let nudge = T::lit(THRESHOLD_NUDGE);
    let value = if level >= one {
        one - nudge
    } else if level <= -one {
        nudge - one
    } else {
        level
    };
    Threshold::new(value).map_err(|_| CalibError::DegenerateThreshold {
        value: level.to_f64().unwrap_or(f64::NAN),
    })
}

/// Equal-width histogram calibrator. Bin `m` covers `(a_m, a_{m+1}]`, with
/// `s = -1` assigned to the first bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "HistogramRepr<T>",
    into = "HistogramRepr<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct HistogramModel<T: Scalar> {
    boundaries: Vec<T>,
    scores: Vec<T>,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
struct HistogramRepr<T: Scalar> {
    boundaries: Vec<T>,
    scores: Vec<T>,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

impl<T: Scalar> From<HistogramModel<T>> for HistogramRepr<T> {
    fn from(m: HistogramModel<T>) -> Self {
        HistogramRepr {
            boundaries: m.boundaries,
            scores: m.scores,
            tau_raw: m.tau_raw,
            tau_calibrated: m.tau_calibrated,
        }
    }
}

impl<T: Scalar> TryFrom<HistogramRepr<T>> for HistogramModel<T> {
    type Error = CalibError;

    fn try_from(r: HistogramRepr<T>) -> Result<Self> {
        let bad = |msg: &str| Err(CalibError::InvalidArgument(format!("histogram model: {msg}")));
        let m = r.scores.len();
        if m == 0 || r.boundaries.len() != m + 1 {
            return bad("need M scores and M + 1 boundaries");
        }
        if r.boundaries[0] != -T::one() || r.boundaries[m] != T::one() {
            return bad("boundaries must start at -1 and end at 1");
        }
        if r.boundaries.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Less)) {
            return bad("boundaries must be strictly increasing");
        }
        if r.scores.iter().any(|&s| !(s >= -T::one() && s <= T::one())) {
            return bad("scores must lie in [-1, 1]");
        }
        Ok(HistogramModel {
            boundaries: r.boundaries,
            scores: r.scores,
            tau_raw: r.tau_raw,
            tau_calibrated: r.tau_calibrated,
        })
    }
}

impl<T: Scalar> HistogramModel<T> {
    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn bins(&self) -> usize {
        self.scores.len()
    }

    pub fn tau_raw(&self) -> Threshold<T> {
        self.tau_raw
    }

    pub fn tau_calibrated(&self) -> Threshold<T> {
        self.tau_calibrated
    }

    /// Index of the bin holding `s`.
    pub fn bin_of(&self, s: T) -> usize {
        let interior = &self.boundaries[1..self.scores.len()];
        interior.partition_point(|&a| a < s)
    }

    pub fn apply(&self, s: T) -> T {
        self.scores[self.bin_of(s)]
    }
}

fn equal_width_boundaries<T: Scalar>(m_bins: usize) -> Vec<T> {
    let width = T::two() / T::from_count(m_bins);
    let mut b: Vec<T> = (0..=m_bins)
        .map(|i| -T::one() + width * T::from_count(i))
        .collect();
    b[0] = -T::one();
    b[m_bins] = T::one();
    b
}

/// Fills empty bins by linear interpolation between the nearest non-empty
/// neighbours, extending the end values outward.
fn fill_empty<T: Scalar>(values: &[Option<T>]) -> Vec<T> {
    let filled: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let first = filled[0];
    let last = *filled.last().unwrap();
    let mut out = vec![T::zero(); values.len()];
    for i in 0..values.len() {
        out[i] = match values[i] {
            Some(v) => v,
            None if i < first => values[first].unwrap(),
            None if i > last => values[last].unwrap(),
            None => {
                let k = filled.partition_point(|&j| j < i);
                let (lo, hi) = (filled[k - 1], filled[k]);
                let (a, b) = (values[lo].unwrap(), values[hi].unwrap());
                let frac = T::from_count(i - lo) / T::from_count(hi - lo);
                a + (b - a) * frac
            }
        };
    }
    out
}

/// Fits per-bin label means over `m_bins` equal-width similarity bins.
pub fn fit_histogram<T: Scalar>(
    dataset: &Dataset<T>,
    tau: Threshold<T>,
    m_bins: usize,
) -> Result<HistogramModel<T>> {
    if m_bins == 0 {
        return Err(CalibError::InvalidArgument("histogram needs at least one bin".into()));
    }
    dataset.require_non_empty()?;
    let boundaries = equal_width_boundaries::<T>(m_bins);
    let mut model = HistogramModel {
        boundaries,
        scores: vec![T::zero(); m_bins],
        tau_raw: tau,
        tau_calibrated: tau,
    };
    let mut sums = vec![T::zero(); m_bins];
    let mut counts = vec![0usize; m_bins];
    for r in dataset.records() {
        let m = model.bin_of(r.similarity);
        sums[m] = sums[m] + r.label.target::<T>();
        counts[m] += 1;
    }
    let means: Vec<Option<T>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / T::from_count(c)))
        .collect();
    model.scores = fill_empty(&means);
    model.tau_calibrated = threshold_from_level(model.apply(tau.value()))?;
    Ok(model)
}

/// Non-decreasing step function. The level of the rightmost breakpoint not
/// above `s` applies; below the first breakpoint the first level applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "IsotonicRepr<T>",
    into = "IsotonicRepr<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct IsotonicModel<T: Scalar> {
    breakpoints: Vec<T>,
    levels: Vec<T>,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
struct IsotonicRepr<T: Scalar> {
    breakpoints: Vec<T>,
    levels: Vec<T>,
    tau_raw: Threshold<T>,
    tau_calibrated: Threshold<T>,
}

impl<T: Scalar> From<IsotonicModel<T>> for IsotonicRepr<T> {
    fn from(m: IsotonicModel<T>) -> Self {
        IsotonicRepr {
            breakpoints: m.breakpoints,
            levels: m.levels,
            tau_raw: m.tau_raw,
            tau_calibrated: m.tau_calibrated,
        }
    }
}

impl<T: Scalar> TryFrom<IsotonicRepr<T>> for IsotonicModel<T> {
    type Error = CalibError;

    fn try_from(r: IsotonicRepr<T>) -> Result<Self> {
        let bad = |msg: &str| Err(CalibError::InvalidArgument(format!("isotonic model: {msg}")));
        if r.breakpoints.is_empty() || r.breakpoints.len() != r.levels.len() {
            return bad("need one level per breakpoint");
        }
        if r.breakpoints.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Less)) {
            return bad("breakpoints must be strictly increasing");
        }
        if r.levels.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o == Greater)) {
            return bad("levels must be non-decreasing");
        }
        Ok(IsotonicModel {
            breakpoints: r.breakpoints,
            levels: r.levels,
            tau_raw: r.tau_raw,
            tau_calibrated: r.tau_calibrated,
        })
    }
}

impl<T: Scalar> IsotonicModel<T> {
    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn tau_raw(&self) -> Threshold<T> {
        self.tau_raw
    }

    pub fn tau_calibrated(&self) -> Threshold<T> {
        self.tau_calibrated
    }

    pub fn apply(&self, s: T) -> T {
        let idx = self.breakpoints.partition_point(|&b| b <= s);
        self.levels[idx.saturating_sub(1)]
    }
}

/// Weighted pool-adjacent-violators. Returns the least-squares non-decreasing
/// fit of `values` (in the given order), one fitted value per input.
pub fn pava<T: Scalar>(values: &[T], weights: &[T]) -> Vec<T> {
    assert_eq!(values.len(), weights.len());
    // (mean, weight, number of inputs pooled)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, n2) = blocks[blocks.len() - 1];
            let (m1, w1, n1) = blocks[blocks.len() - 2];
            if m1 < m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 + m2 * w2) / w, w, n1 + n2);
        }
    }
    blocks
        .iter()
        .flat_map(|&(m, _, n)| std::iter::repeat_n(m, n))
        .collect()
}

/// Fits an isotonic map from similarity to label by PAVA. Records with equal
/// similarity are pooled into one weighted point first.
pub fn fit_isotonic<T: Scalar>(dataset: &Dataset<T>, tau: Threshold<T>) -> Result<IsotonicModel<T>> {
    dataset.require_non_empty()?;
    let mut sorted: Vec<(T, T)> = dataset
        .records()
        .iter()
        .map(|r| (r.similarity, r.label.target::<T>()))
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut xs: Vec<T> = Vec::new();
    let mut sums: Vec<T> = Vec::new();
    let mut weights: Vec<T> = Vec::new();
    for (s, y) in sorted {
        if xs.last() == Some(&s) {
            let k = xs.len() - 1;
            sums[k] = sums[k] + y;
            weights[k] = weights[k] + T::one();
        } else {
            xs.push(s);
            sums.push(y);
            weights.push(T::one());
        }
    }
    let means: Vec<T> = sums.iter().zip(&weights).map(|(&s, &w)| s / w).collect();
    let fitted = pava(&means, &weights);

    let mut breakpoints = Vec::new();
    let mut levels: Vec<T> = Vec::new();
    for (&x, &f) in xs.iter().zip(&fitted) {
        if levels.last() != Some(&f) {
            breakpoints.push(x);
            levels.push(f);
        }
    }
    let mut model = IsotonicModel {
        breakpoints,
        levels,
        tau_raw: tau,
        tau_calibrated: tau,
    };
    model.tau_calibrated = threshold_from_level(model.apply(tau.value()))?;
    Ok(model)
}
