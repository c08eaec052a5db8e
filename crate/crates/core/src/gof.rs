//! One-sample Kolmogorov-Smirnov statistic, p-value, and the pointwise
//! distance map between the empirical and model distribution functions.

use crate::error::{Error, Result};
use crate::num::Real;

/// Result of the one-sample test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult<T> {
    /// Sup-distance D between the empirical and model cdf.
    pub statistic: T,
    /// Sample size.
    pub n: usize,
    /// Asymptotic p-value with the small-sample size correction.
    pub p_value: T,
}

/// |F_emp(x) - F_model(x)| sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCurve<T> {
    pub grid: Vec<T>,
    pub distances: Vec<T>,
}

fn sorted_sample<T: Real>(sample: &[T]) -> Result<Vec<T>> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sample contains non-finite values"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
    Ok(sorted)
}

/// D = max over the sorted sample of
/// max(i/n - F(x_i), F(x_i) - (i-1)/n), with ties processed through
/// their cumulative counts (the empirical step jumps by multiplicity/n).
pub fn ks_statistic<T: Real>(sample: &[T], model_cdf: impl Fn(T) -> T) -> Result<(T, usize)> {
    let sorted = sorted_sample(sample)?;
    let n = sorted.len();
    let n_t = T::of_usize(n);
    let mut d = T::zero();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        let f = model_cdf(sorted[i]);
        if !(f >= T::zero() && f <= T::one()) {
            return Err(Error::numeric(format!(
                "model cdf returned {f} outside [0, 1] at {}",
                sorted[i]
            )));
        }
        let before = T::of_usize(i) / n_t;
        let after = T::of_usize(j) / n_t;
        d = d.max(after - f).max(f - before);
        i = j;
    }
    Ok((d, n))
}

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2),
/// evaluated at lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
///
/// The series is summed until a term drops below 1e-12; below
/// lambda = 0.01 the value is 1 to far beyond f64 resolution.
pub fn ks_pvalue<T: Real>(statistic: T, n: usize) -> T {
    debug_assert!(n >= 1);
    let sqrt_n = T::of_usize(n).sqrt();
    let lambda = (sqrt_n + T::of(0.12) + T::of(0.11) / sqrt_n) * statistic;
    if lambda < T::of(0.01) {
        return T::one();
    }
    let two = T::of(2.0);
    let neg_two_lambda_sq = -two * lambda * lambda;
    let mut sum = T::zero();
    let mut sign = T::one();
    let tiny = T::of(1e-12);
    for j in 1..100_000u32 {
        let j_t = T::of(f64::from(j));
        let term = two * (neg_two_lambda_sq * j_t * j_t).exp();
        sum += sign * term;
        if term < tiny {
            break;
        }
        sign = -sign;
    }
    sum.max(T::zero()).min(T::one())
}

/// Statistic and p-value in one call.
pub fn ks_test<T: Real>(sample: &[T], model_cdf: impl Fn(T) -> T) -> Result<KsResult<T>> {
    let (statistic, n) = ks_statistic(sample, model_cdf)?;
    Ok(KsResult {
        statistic,
        n,
        p_value: ks_pvalue(statistic, n),
    })
}

/// Pointwise |F_emp(x) - F_model(x)| on `grid`, with F_emp the
/// right-continuous empirical step function.
pub fn distance_curve<T: Real>(
    sample: &[T],
    model_cdf: impl Fn(T) -> T,
    grid: &[T],
) -> Result<DistanceCurve<T>> {
    let sorted = sorted_sample(sample)?;
    let n_t = T::of_usize(sorted.len());
    let distances = grid
        .iter()
        .map(|&x| {
            let count = sorted.partition_point(|&v| v <= x);
            let f_emp = T::of_usize(count) / n_t;
            let f = model_cdf(x);
            if !(f >= T::zero() && f <= T::one()) {
                return Err(Error::numeric(format!(
                    "model cdf returned {f} outside [0, 1] at {x}"
                )));
            }
            Ok((f_emp - f).abs())
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(DistanceCurve {
        grid: grid.to_vec(),
        distances,
    })
}
