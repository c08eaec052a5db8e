//! Grid scan over the rescaling exponent: rescale, normalize, truncate,
//! KS test at every alpha, then pick the p-maximizing grid point.

use rayon::prelude::*;

use crate::bhp::BhpTable;
use crate::error::{Error, Result};
use crate::fluct;
use crate::gof;
use crate::market::{Sign, SignedReturns};
use crate::num::Real;

/// Inclusive alpha grid [min, max] in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRange<T> {
    pub min: T,
    pub max: T,
    pub step: T,
}

impl<T: Real> Default for AlphaRange<T> {
    fn default() -> Self {
        Self {
            min: T::of(0.4),
            max: T::of(0.6),
            step: T::of(0.01),
        }
    }
}

impl<T: Real> AlphaRange<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.min <= self.max) || !(self.step > T::zero()) {
            return Err(Error::invalid(format!(
                "empty alpha grid: min {} max {} step {}",
                self.min, self.max, self.step
            )));
        }
        if !(self.min > T::zero() && self.max <= T::of(2.0)) {
            return Err(Error::invalid(format!(
                "alpha grid [{}, {}] must lie inside (0, 2]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Grid values, inclusive of both ends (up to rounding of the span).
    pub fn values(&self) -> Vec<T> {
        let span = (self.max - self.min) / self.step;
        let count = (span * (T::one() + T::of(1e-12)) + T::of(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0);
        (0..=count)
            .map(|i| self.min + self.step * T::of_usize(i))
            .collect()
    }
}

/// One grid point of the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry<T> {
    pub alpha: T,
    /// KS sup-distance at this alpha.
    pub statistic: T,
    pub p_value: T,
    pub mean_alpha: T,
    pub sd_alpha: T,
    /// Smallest normalized fluctuation (trunc lower bound).
    pub lower: T,
    /// Largest normalized fluctuation (trunc upper bound).
    pub upper: T,
}

/// Scan curve plus the selected optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<T> {
    pub sign: Sign,
    pub entries: Vec<ScanEntry<T>>,
    /// Index of the p-maximizing entry (ties resolve to the smallest
    /// alpha).
    pub best: usize,
}

impl<T: Real> ScanResult<T> {
    pub fn best_entry(&self) -> &ScanEntry<T> {
        &self.entries[self.best]
    }

    pub fn alpha_star(&self) -> T {
        self.best_entry().alpha
    }

    pub fn p_star(&self) -> T {
        self.best_entry().p_value
    }

    pub fn d_star(&self) -> T {
        self.best_entry().statistic
    }
}

/// The per-alpha pipeline: normalize the magnitudes, truncate the
/// table to the observed fluctuation range, and run the KS test.
pub fn evaluate_alpha<T: Real>(
    sign: Sign,
    magnitudes: &[T],
    table: &BhpTable<T>,
    alpha: T,
) -> Result<ScanEntry<T>> {
    let set = fluct::normalize(sign, magnitudes, alpha)?;
    let truncated = table.truncate(set.lower, set.upper)?;
    let ks = gof::ks_test(&set.values, |x| truncated.cdf(x))?;
    Ok(ScanEntry {
        alpha,
        statistic: ks.statistic,
        p_value: ks.p_value,
        mean_alpha: set.mean_alpha,
        sd_alpha: set.sd_alpha,
        lower: set.lower,
        upper: set.upper,
    })
}

/// Runs [`evaluate_alpha`] across the grid (entries are independent and
/// evaluated in parallel) and selects the optimum.
pub fn scan<T: Real>(
    population: &SignedReturns<T>,
    table: &BhpTable<T>,
    range: &AlphaRange<T>,
) -> Result<ScanResult<T>> {
    range.validate()?;
    if population.magnitudes.is_empty() {
        return Err(Error::invalid(format!(
            "empty {} population",
            population.sign
        )));
    }
    let alphas = range.values();
    let entries: Vec<ScanEntry<T>> = alphas
        .par_iter()
        .map(|&alpha| evaluate_alpha(population.sign, &population.magnitudes, table, alpha))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, entry) in entries.iter().enumerate() {
        if !entry.p_value.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite p-value at alpha {}",
                entry.alpha
            )));
        }
        if entry.p_value > entries[best].p_value {
            best = i;
        }
    }
    Ok(ScanResult {
        sign: population.sign,
        entries,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grid_is_inclusive() {
        let range = AlphaRange::<f64>::default();
        let values = range.values();
        assert_eq!(values.len(), 21);
        assert!((values[0] - 0.4).abs() < 1e-12);
        assert!((values[20] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn alpha_grid_never_oversteps_max() {
        let range = AlphaRange {
            min: 0.4f64,
            max: 0.61,
            step: 0.02,
        };
        let values = range.values();
        assert!(values.last().unwrap() <= &(0.61 + 1e-12));
        assert_eq!(values.len(), 11);
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert!(AlphaRange {
            min: 0.6f64,
            max: 0.4,
            step: 0.01
        }
        .validate()
        .is_err());
        assert!(AlphaRange {
            min: 0.4f64,
            max: 0.6,
            step: 0.0
        }
        .validate()
        .is_err());
        assert!(AlphaRange {
            min: 0.0f64,
            max: 0.6,
            step: 0.01
        }
        .validate()
        .is_err());
    }
}
