//! Canberra and Euclidean distances.
//!
//! The Canberra distance needs no feature scaling: every per-dimension term
//! is normalized by the magnitudes involved and lies in `[0, 1]`. A term whose
//! operands are both zero contributes zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    #[default]
    Canberra,
    Euclidean,
}

impl DistanceKind {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dims(a, b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// Caller guarantees `a.len() == b.len()`.
    #[inline]
    pub fn distance_unchecked(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            DistanceKind::Canberra => canberra_unchecked(a, b),
            DistanceKind::Euclidean => euclidean_unchecked(a, b),
        }
    }

    /// The distance when it is at most `bound`, `None` otherwise. Canberra
    /// sums stop as soon as the partial sum passes the bound.
    #[inline]
    pub fn distance_within(self, a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
        match self {
            DistanceKind::Canberra => {
                let mut sum = 0.0;
                for (&x, &y) in a.iter().zip(b) {
                    sum += canberra_term(x, y);
                    if sum > bound {
                        return None;
                    }
                }
                Some(sum)
            }
            DistanceKind::Euclidean => {
                let d = self.distance_unchecked(a, b);
                (d <= bound).then_some(d)
            }
        }
    }

    /// Contribution of a single dimension, used as the subtree pruning bound.
    #[inline]
    pub fn segment(self, a: f64, b: f64) -> f64 {
        match self {
            DistanceKind::Canberra => canberra_term(a, b),
            DistanceKind::Euclidean => (a - b).abs(),
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

#[inline]
pub fn canberra_term(a: f64, b: f64) -> f64 {
    let denom = a.abs() + b.abs();
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

pub fn canberra(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(canberra_unchecked(a, b))
}

#[inline]
fn canberra_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| canberra_term(x, y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(euclidean_unchecked(a, b))
}

#[inline]
fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
