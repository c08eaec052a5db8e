//! Power-rescaled statistics and normalized fluctuation sets.

use crate::error::{Error, Result};
use crate::market::Sign;
use crate::num::{CompensatedSum, Real};

/// Normalized (mean 0, population sd 1) alpha-rescaled magnitudes of
/// one signed population, with the observed range recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSet<T> {
    pub sign: Sign,
    pub alpha: T,
    pub values: Vec<T>,
    /// Mean of the alpha powers before normalization.
    pub mean_alpha: T,
    /// Population standard deviation of the alpha powers.
    pub sd_alpha: T,
    /// Smallest normalized fluctuation.
    pub lower: T,
    /// Largest normalized fluctuation.
    pub upper: T,
}

impl<T: Real> FluctuationSet<T> {
    pub fn count(&self) -> usize {
        self.values.len()
    }
}

fn validate_inputs<T: Real>(magnitudes: &[T], alpha: T) -> Result<()> {
    if magnitudes.is_empty() {
        return Err(Error::invalid("empty magnitude population"));
    }
    if !(alpha > T::zero() && alpha <= T::of(2.0)) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if magnitudes.iter().any(|&m| !(m > T::zero())) {
        return Err(Error::invalid(
            "magnitudes must all be strictly positive and finite",
        ));
    }
    Ok(())
}

/// Mean and population standard deviation of the alpha powers m^alpha.
///
/// The variance uses the 1/n convention. The two-pass form is the same
/// estimator as sqrt(mean(m^2a) - mean(m^a)^2) without its cancellation.
pub fn rescale_stats<T: Real>(magnitudes: &[T], alpha: T) -> Result<(T, T)> {
    validate_inputs(magnitudes, alpha)?;
    let n = T::of_usize(magnitudes.len());
    let mut sum = CompensatedSum::new();
    let powers: Vec<T> = magnitudes.iter().map(|&m| m.powf(alpha)).collect();
    for &p in &powers {
        sum.add(p);
    }
    let mean = sum.total() / n;
    let mut sq = CompensatedSum::new();
    for &p in &powers {
        let d = p - mean;
        sq.add(d * d);
    }
    let sd = (sq.total() / n).sqrt();
    if !(sd > T::zero()) {
        return Err(Error::numeric(format!(
            "degenerate population: rescaled standard deviation is zero at alpha {alpha}"
        )));
    }
    Ok((mean, sd))
}

/// The normalized fluctuations (m^alpha - mean) / sd with their range.
pub fn normalize<T: Real>(sign: Sign, magnitudes: &[T], alpha: T) -> Result<FluctuationSet<T>> {
    let (mean_alpha, sd_alpha) = rescale_stats(magnitudes, alpha)?;
    let values: Vec<T> = magnitudes
        .iter()
        .map(|&m| (m.powf(alpha) - mean_alpha) / sd_alpha)
        .collect();
    let mut lower = T::infinity();
    let mut upper = T::neg_infinity();
    for &v in &values {
        lower = lower.min(v);
        upper = upper.max(v);
    }
    Ok(FluctuationSet {
        sign,
        alpha,
        values,
        mean_alpha,
        sd_alpha,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_population_errors() {
        let err = rescale_stats(&[0.5f64, 0.5, 0.5], 1.0).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "{err:?}");
        // Mean is still c^alpha right up to the failure.
        let err2 = rescale_stats(&[2.0f64, 2.0], 0.5).unwrap_err();
        assert!(err2.to_string().contains("degenerate"), "{err2}");
    }

    #[test]
    fn empty_and_invalid_inputs_error() {
        assert!(matches!(
            rescale_stats::<f64>(&[], 0.5),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            rescale_stats(&[1.0f64], 0.0),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            rescale_stats(&[1.0f64], 2.5),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            rescale_stats(&[1.0f64, -1.0], 0.5),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn three_point_normalization_by_hand() {
        // {e, e, 1} at alpha = 1: mean = (2e + 1)/3, and the two
        // distinct values straddle it symmetrically in rank.
        let e = std::f64::consts::E;
        let set = normalize(Sign::Positive, &[e, e, 1.0], 1.0).unwrap();
        let mean = (2.0 * e + 1.0) / 3.0;
        let var = (2.0 * (e - mean).powi(2) + (1.0 - mean).powi(2)) / 3.0;
        let sd = var.sqrt();
        assert!((set.mean_alpha - mean).abs() < 1e-15);
        assert!((set.sd_alpha - sd).abs() < 1e-15);
        assert!((set.values[0] - (e - mean) / sd).abs() < 1e-15);
        assert!((set.values[2] - (1.0 - mean) / sd).abs() < 1e-15);
        assert_eq!(set.lower, set.values[2]);
        assert_eq!(set.upper, set.values[0]);
    }

    #[test]
    fn alpha_one_is_the_classic_z_score() {
        let mags = [0.7f64, 1.3, 0.2, 2.4, 0.9];
        let set = normalize(Sign::Positive, &mags, 1.0).unwrap();
        let n = mags.len() as f64;
        let mean = mags.iter().sum::<f64>() / n;
        let sd = (mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt();
        for (v, m) in set.values.iter().zip(&mags) {
            assert!((v - (m - mean) / sd).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn normalization_invariants(
            mags in proptest::collection::vec(1e-4f64..10.0, 2..300),
            alpha in 0.05f64..2.0,
        ) {
            prop_assume!(mags.iter().any(|&m| (m - mags[0]).abs() > 1e-9));
            let set = normalize(Sign::Negative, &mags, alpha).unwrap();
            let n = set.values.len() as f64;
            let mean: f64 = set.values.iter().sum::<f64>() / n;
            let sd = (set.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-12 * n.sqrt());
            prop_assert!((sd - 1.0).abs() < 1e-12);
            let lo = set.values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = set.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(set.lower, lo);
            prop_assert_eq!(set.upper, hi);
            prop_assert!(set.lower < set.upper);
        }

        #[test]
        fn rank_order_is_preserved(
            mags in proptest::collection::vec(1e-4f64..10.0, 2..100),
            alpha in 0.05f64..2.0,
        ) {
            prop_assume!(mags.iter().any(|&m| (m - mags[0]).abs() > 1e-9));
            let set = normalize(Sign::Positive, &mags, alpha).unwrap();
            let mut idx: Vec<usize> = (0..mags.len()).collect();
            let mut by_mag = idx.clone();
            by_mag.sort_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap());
            idx.sort_by(|&a, &b| set.values[a].partial_cmp(&set.values[b]).unwrap());
            prop_assert_eq!(by_mag, idx);
        }
    }
}
