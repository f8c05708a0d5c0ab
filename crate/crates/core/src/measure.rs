//! Verification domain types, the thresholded decision rule and the
//! threshold-relative confidence measure.
//!
//! A pair with cosine similarity `s` is accepted when `s >= tau`. Its
//! confidence grows linearly with the distance from `tau`, normalised by the
//! length of the side of `[-1, 1]` the score fell on, so that the threshold
//! itself scores 0.5 and both ends of the interval score 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::scalar::{clamp, Scalar};

/// How far outside `[-1, 1]` a similarity may stray before it is treated as
/// corrupt rather than float noise.
pub const SIMILARITY_TOLERANCE: f64 = 1e-6;

/// Binary verification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    /// The label as a regression target, `-1` or `+1`.
    pub fn target<T: Scalar>(self) -> T {
        match self {
            Label::Negative => -T::one(),
            Label::Positive => T::one(),
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = CalibError;

    fn try_from(value: i64) -> Result<Self> {
        match value {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            _ => Err(CalibError::InvalidLabel { value }),
        }
    }
}

impl From<Label> for i64 {
    fn from(l: Label) -> i64 {
        l.as_i8() as i64
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Validates a raw similarity, clamping float noise of at most
/// [`SIMILARITY_TOLERANCE`] back into `[-1, 1]`.
pub fn checked_similarity<T: Scalar>(s: T) -> Result<T> {
    let tol = T::lit(SIMILARITY_TOLERANCE);
    let one = T::one();
    if s.is_nan() || s > one + tol || s < -one - tol {
        return Err(CalibError::SimilarityOutOfRange {
            value: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(clamp(s, -one, one))
}

/// One scored verification pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord<T> {
    pub similarity: T,
    pub label: Label,
}

impl<T: Scalar> PairRecord<T> {
    pub fn new(similarity: T, label: Label) -> Result<Self> {
        Ok(PairRecord {
            similarity: checked_similarity(similarity)?,
            label,
        })
    }
}

/// Decision threshold, strictly inside `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(
    try_from = "f64",
    into = "f64",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub struct Threshold<T>(T);

impl<T: Scalar> Threshold<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > -T::one() && value < T::one() {
            Ok(Threshold(value))
        } else {
            Err(CalibError::InvalidThreshold {
                value: value.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

impl<T: Scalar> TryFrom<f64> for Threshold<T> {
    type Error = CalibError;

    fn try_from(value: f64) -> Result<Self> {
        Threshold::new(T::lit(value))
    }
}

impl<T: Scalar> From<Threshold<T>> for f64 {
    fn from(t: Threshold<T>) -> f64 {
        t.0.to_f64().unwrap()
    }
}

impl<T: Scalar> fmt::Display for Threshold<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A decision together with its probabilistic confidence in `[0.5, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub decision: Label,
    pub confidence: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn new(s: T, tau: Threshold<T>) -> Self {
        Prediction {
            decision: predict(s, tau),
            confidence: confidence(s, tau),
        }
    }

    pub fn is_correct(&self, label: Label) -> bool {
        self.decision == label
    }
}

/// Accept (`+1`) iff `s >= tau`; a similarity equal to the threshold is
/// accepted.
#[inline]
pub fn predict<T: Scalar>(s: T, tau: Threshold<T>) -> Label {
    if s >= tau.value() {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Relative distance of `s` from `tau` in `[0, 1]`, measured against the
/// length of the accepted (`1 - tau`) or rejected (`1 + tau`) side.
#[inline]
pub fn phi<T: Scalar>(s: T, tau: Threshold<T>) -> T {
    let t = tau.value();
    let one = T::one();
    let raw = match predict(s, tau) {
        Label::Positive => (s - t) / (one - t),
        Label::Negative => (t - s) / (one + t),
    };
    clamp(raw, T::zero(), one)
}

/// Confidence of the thresholded decision, `0.5 * phi + 0.5`.
#[inline]
pub fn confidence<T: Scalar>(s: T, tau: Threshold<T>) -> T {
    T::half() * phi(s, tau) + T::half()
}

/// Cosine of the angle between two embeddings, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(CalibError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut aa, mut bb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        dot = dot + x * y;
        aa = aa + x * x;
        bb = bb + y * y;
    }
    if !(aa > T::zero() && bb > T::zero()) {
        return Err(CalibError::ZeroNorm);
    }
    let s = dot / (aa.sqrt() * bb.sqrt());
    Ok(clamp(s, -T::one(), T::one()))
}

/// An ordered collection of scored pairs with optional fold ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    records: Vec<PairRecord<T>>,
    folds: Option<Vec<usize>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(records: Vec<PairRecord<T>>) -> Self {
        Dataset {
            records,
            folds: None,
        }
    }

    /// Attaches one fold id per record. Ids must cover `0..k` without gaps.
    pub fn with_folds(records: Vec<PairRecord<T>>, folds: Vec<usize>) -> Result<Self> {
        if folds.len() != records.len() {
            return Err(CalibError::InvalidFolds(format!(
                "{} fold ids for {} records",
                folds.len(),
                records.len()
            )));
        }
        if let Some(&max) = folds.iter().max() {
            let mut seen = vec![false; max + 1];
            for &f in &folds {
                seen[f] = true;
            }
            if let Some(gap) = seen.iter().position(|&s| !s) {
                return Err(CalibError::InvalidFolds(format!(
                    "fold ids are not contiguous from 0 (missing {gap})"
                )));
            }
        }
        Ok(Dataset {
            records,
            folds: Some(folds),
        })
    }

    /// Builds a dataset from raw `(similarity, label)` pairs.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, i64)>,
    {
        let records = pairs
            .into_iter()
            .map(|(s, y)| PairRecord::new(s, Label::try_from(y)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset::new(records))
    }

    pub fn records(&self) -> &[PairRecord<T>] {
        &self.records
    }

    pub fn folds(&self) -> Option<&[usize]> {
        self.folds.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn similarities(&self) -> impl Iterator<Item = T> + '_ {
        self.records.iter().map(|r| r.similarity)
    }

    /// `(positives, negatives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.records.iter().filter(|r| r.label.is_positive()).count();
        (pos, self.records.len() - pos)
    }

    pub fn require_non_empty(&self) -> Result<()> {
        if self.records.is_empty() {
            Err(CalibError::EmptyDataset)
        } else {
            Ok(())
        }
    }

    pub fn require_both_classes(&self) -> Result<()> {
        self.require_non_empty()?;
        let (positives, negatives) = self.class_counts();
        if positives == 0 || negatives == 0 {
            return Err(CalibError::SingleClassDataset {
                positives,
                negatives,
            });
        }
        Ok(())
    }

    /// Records at the given indices, in that order. Fold ids are dropped.
    pub fn subset(&self, indices: &[usize]) -> Dataset<T> {
        Dataset::new(indices.iter().map(|&i| self.records[i]).collect())
    }

    /// Replaces every similarity by `f(similarity)`, keeping labels and folds.
    pub fn map_similarities<F: Fn(T) -> T>(&self, f: F) -> Dataset<T> {
        Dataset {
            records: self
                .records
                .iter()
                .map(|r| PairRecord {
                    similarity: f(r.similarity),
                    label: r.label,
                })
                .collect(),
            folds: self.folds.clone(),
        }
    }

    pub fn predictions(&self, tau: Threshold<T>) -> impl Iterator<Item = Prediction<T>> + '_ {
        self.records
            .iter()
            .map(move |r| Prediction::new(r.similarity, tau))
    }
}
