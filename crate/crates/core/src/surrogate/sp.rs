use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stabilizing-predictions stopping rule: stop once successive surrogates
/// agree on all but a small fraction of the points, averaged over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SpTracker<T: Real> {
    pub history: Vec<T>,
    pub window: usize,
    pub rel_threshold: T,
    pub abs_threshold: T,
    pub stop_threshold: T,
}

impl<T: Real> SpTracker<T> {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("SP window must be positive".into()));
        }
        Ok(Self {
            history: Vec::new(),
            window,
            rel_threshold: T::lit(0.01),
            abs_threshold: T::one(),
            stop_threshold: T::lit(0.01),
        })
    }

    /// Fraction of points where both the relative and the absolute change
    /// exceed their thresholds.
    pub fn disagree_ratio(&self, m_old: &[T], m_new: &[T]) -> Result<T> {
        if m_old.len() != m_new.len() {
            return Err(Error::DimensionMismatch { expected: m_old.len(), got: m_new.len() });
        }
        if m_old.is_empty() {
            return Ok(T::zero());
        }
        let bad = m_old
            .iter()
            .zip(m_new)
            .filter(|(&a, &b)| {
                let diff = (b - a).abs();
                let scale = a.abs().max(b.abs());
                !(diff < self.abs_threshold || diff < self.rel_threshold * scale)
            })
            .count();
        Ok(T::from_usize_lossy(bad) / T::from_usize_lossy(m_old.len()))
    }

    /// Mean of the last `window` ratios, once that many exist.
    pub fn trailing_mean(&self) -> Option<T> {
        if self.history.len() < self.window {
            return None;
        }
        let tail = &self.history[self.history.len() - self.window..];
        Some(tail.iter().copied().sum::<T>() / T::from_usize_lossy(self.window))
    }

    pub fn should_stop(&self) -> bool {
        self.trailing_mean().is_some_and(|m| m < self.stop_threshold)
    }

    /// Records the ratio between two successive prediction sets over `W`
    /// and reports whether training should stop.
    pub fn update(&mut self, m_old: &[T], m_new: &[T]) -> Result<bool> {
        let r = self.disagree_ratio(m_old, m_new)?;
        self.history.push(r);
        Ok(self.should_stop())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_examples() {
        let sp = SpTracker::<f64>::new(5).unwrap();
        let old = vec![10.0, 20.0, 30.0, 40.0];
        assert_eq!(sp.disagree_ratio(&old, &old).unwrap(), 0.0);
        let shifted: Vec<f64> = old.iter().map(|v| v + 0.5).collect();
        assert_eq!(sp.disagree_ratio(&old, &shifted).unwrap(), 0.0);
        let half = vec![11.0, 22.0, 30.0, 40.0];
        assert_eq!(sp.disagree_ratio(&old, &half).unwrap(), 0.5);
        // 1% relative agreement on large counts
        assert_eq!(sp.disagree_ratio(&[500.0], &[504.0]).unwrap(), 0.0);
    }

    #[test]
    fn stops_only_on_full_window() {
        let mut sp = SpTracker::<f64>::new(3).unwrap();
        let a = vec![1.0; 10];
        assert!(!sp.update(&a, &a).unwrap());
        assert!(!sp.update(&a, &a).unwrap());
        assert!(sp.update(&a, &a).unwrap());
        let mut b = a.clone();
        b[0] = 50.0;
        // one disagreeing point in ten lifts the mean to 1/30
        assert!(!sp.update(&a, &b).unwrap());
        assert_eq!(sp.history.len(), 4);
    }
}
