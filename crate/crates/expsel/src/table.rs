//! Normalized probability tables shared by the operator and path-sum engines.

use crate::error::{Error, Result};
use crate::hilbert::C64;

/// Threshold below which a total selection weight counts as unreachable.
pub const UNREACHABLE_TOL: f64 = 1e-14;

/// Absolute bound on the imaginary part of any raw selection weight.
pub const RAW_IMAG_TOL: f64 = 1e-8;

/// Bound on imaginary part / negative excursion of a normalized probability
/// before clamping.
pub const ENTRY_TOL: f64 = 1e-10;

/// A labeled probability distribution together with the normalization
/// constant that was applied to the raw weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    entries: Vec<(String, f64)>,
    normalization: f64,
}

impl ProbabilityTable {
    /// Normalizes nonnegative real weights. Errors with
    /// [`Error::ConditionUnreachable`] when the total falls below
    /// [`UNREACHABLE_TOL`].
    pub fn from_real_weights(weights: Vec<(String, f64)>) -> Result<Self> {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if total < UNREACHABLE_TOL {
            return Err(Error::ConditionUnreachable { total });
        }
        let normalization = 1.0 / total;
        let entries = weights
            .into_iter()
            .map(|(label, w)| (label, (w * normalization).clamp(0.0, 1.0)))
            .collect();
        Ok(ProbabilityTable { entries, normalization })
    }

    /// Normalizes complex raw weights, enforcing the engine contracts: every
    /// raw weight must be real within [`RAW_IMAG_TOL`], and every normalized
    /// entry must lie in [−1e-10, 1 + 1e-10] before clamping.
    pub fn from_weights(weights: Vec<(String, C64)>) -> Result<Self> {
        for (label, w) in &weights {
            if w.im.abs() >= RAW_IMAG_TOL {
                return Err(Error::IllPosedSelection {
                    label: label.clone(),
                    value: format!("{:.3e}{:+.3e}i", w.re, w.im),
                });
            }
        }
        let total: f64 = weights.iter().map(|(_, w)| w.re).sum();
        if total < UNREACHABLE_TOL {
            return Err(Error::ConditionUnreachable { total });
        }
        let normalization = 1.0 / total;
        let mut entries = Vec::with_capacity(weights.len());
        for (label, w) in weights {
            let p_im = w.im * normalization;
            let p_re = w.re * normalization;
            if p_im.abs() >= ENTRY_TOL || p_re <= -ENTRY_TOL || p_re >= 1.0 + ENTRY_TOL {
                return Err(Error::IllPosedSelection {
                    label: label.clone(),
                    value: format!("normalized weight {p_re:.6e}{p_im:+.6e}i"),
                });
            }
            entries.push((label, p_re.clamp(0.0, 1.0)));
        }
        Ok(ProbabilityTable { entries, normalization })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn probability(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, p)| *p)
    }

    /// The constant N actually applied to the raw weights.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn normalizes_and_records_constant() {
        let t = ProbabilityTable::from_real_weights(vec![("a".into(), 0.5), ("b".into(), 1.5)])
            .unwrap();
        assert!((t.probability("a").unwrap() - 0.25).abs() < 1e-15);
        assert!((t.probability("b").unwrap() - 0.75).abs() < 1e-15);
        assert!((t.normalization() - 0.5).abs() < 1e-15);
        assert!((t.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_total_is_unreachable() {
        let r = ProbabilityTable::from_real_weights(vec![("a".into(), 0.0)]);
        assert!(matches!(r, Err(Error::ConditionUnreachable { .. })));
    }

    #[test]
    fn imaginary_weight_is_ill_posed() {
        let r = ProbabilityTable::from_weights(vec![
            ("a".into(), Complex64::new(0.5, 0.0)),
            ("b".into(), Complex64::new(0.5, 1e-6)),
        ]);
        assert!(matches!(r, Err(Error::IllPosedSelection { .. })));
    }

    #[test]
    fn tiny_negative_weight_is_clamped() {
        let t = ProbabilityTable::from_weights(vec![
            ("a".into(), Complex64::new(1.0, 0.0)),
            ("b".into(), Complex64::new(-1e-12, 0.0)),
        ])
        .unwrap();
        assert_eq!(t.probability("b").unwrap(), 0.0);
        assert!((t.sum() - 1.0).abs() < 1e-11);
    }
}
