//! Dense tabulation of the BHP density with interpolation, quantiles,
//! sampling, and truncation.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::bhp::quad::PdfEvaluator;
use crate::bhp::spectrum::LatticeSpectrum;
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};

/// Which side of the mean carries the long exponential tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Long exponential tail above the mean (the default; this is the
    /// reflected variable, which is what observed fluctuation ranges
    /// like [-1.9, 5.5] require).
    RightSkew,
    /// Long exponential tail below the mean (the inversion integral as
    /// written).
    LeftSkew,
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Orientation::RightSkew => "right-skew",
            Orientation::LeftSkew => "left-skew",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right-skew" | "right" => Ok(Orientation::RightSkew),
            "left-skew" | "left" => Ok(Orientation::LeftSkew),
            other => Err(Error::invalid(format!(
                "unknown orientation '{other}' (expected right-skew or left-skew)"
            ))),
        }
    }
}

/// Uniform tabulation grid. Must cover at least [-8, +10] with a step
/// of at most 0.005 so the interpolation error stays inside the table's
/// accuracy budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub lo: T,
    pub hi: T,
    pub step: T,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            lo: T::of(-10.0),
            hi: T::of(12.0),
            step: T::of(0.002),
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn new(lo: T, hi: T, step: T) -> Result<Self> {
        let spec = Self { lo, hi, step };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid("grid spec must be finite with step > 0"));
        }
        if self.lo > T::of(-8.0) || self.hi < T::of(10.0) {
            return Err(Error::invalid(format!(
                "grid [{}, {}] must cover at least [-8, 10]",
                self.lo, self.hi
            )));
        }
        if self.step > T::of(0.005) {
            return Err(Error::invalid(format!(
                "grid step {} exceeds the 0.005 maximum",
                self.step
            )));
        }
        Ok(())
    }

    /// Number of grid points (inclusive of both ends).
    pub fn points(&self) -> usize {
        let span = (self.hi - self.lo) / self.step;
        span.round().to_usize().expect("grid fits in usize") + 1
    }

    pub fn value(&self, index: usize) -> T {
        self.lo + self.step * T::of_usize(index)
    }
}

/// Tabulated BHP pdf/cdf for one lattice size and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct BhpTable<T> {
    orientation: Orientation,
    spec: GridSpec<T>,
    grid: Vec<T>,
    pdf: Vec<T>,
    cdf: Vec<T>,
    spectrum: LatticeSpectrum<T>,
    x_max: T,
    normalization_defect: T,
}

/// Budget on |trapezoid integral - 1| before the cdf renormalization.
const DEFECT_BUDGET: f64 = 1e-3;

impl<T: Real> BhpTable<T> {
    /// Builds the table by inverse-Fourier quadrature of the mode
    /// product. Grid evaluations are independent and run in parallel.
    pub fn build(side: u32, orientation: Orientation, spec: &GridSpec<T>) -> Result<Self> {
        spec.validate()?;
        let spectrum = LatticeSpectrum::new(side)?;
        let max_abs_y = spec.lo.abs().max(spec.hi.abs());
        let evaluator = PdfEvaluator::new(&spectrum, max_abs_y);

        let count = spec.points();
        let grid: Vec<T> = (0..count).map(|i| spec.value(i)).collect();
        let pdf: Vec<T> = grid
            .par_iter()
            .map(|&x| {
                let y = match orientation {
                    Orientation::RightSkew => x,
                    Orientation::LeftSkew => -x,
                };
                evaluator.pdf(y)
            })
            .collect();

        let mut cdf = Vec::with_capacity(count);
        let half_step = T::of(0.5) * spec.step;
        let mut cum = CompensatedSum::new();
        cdf.push(T::zero());
        for i in 1..count {
            cum.add(half_step * (pdf[i - 1] + pdf[i]));
            cdf.push(cum.total());
        }
        let total = cdf[count - 1];
        let defect = (total - T::one()).abs();
        if !(defect <= T::of(DEFECT_BUDGET)) {
            return Err(Error::numeric(format!(
                "quadrature normalization defect {defect:e} exceeds the {DEFECT_BUDGET:e} budget"
            )));
        }
        for c in &mut cdf {
            *c = *c / total;
        }

        Ok(Self {
            orientation,
            spec: *spec,
            grid,
            pdf,
            cdf,
            spectrum,
            x_max: evaluator.x_max(),
            normalization_defect: defect,
        })
    }

    pub(crate) fn from_parts(
        orientation: Orientation,
        spec: GridSpec<T>,
        grid: Vec<T>,
        pdf: Vec<T>,
        cdf: Vec<T>,
        spectrum: LatticeSpectrum<T>,
        x_max: T,
        normalization_defect: T,
    ) -> Self {
        Self {
            orientation,
            spec,
            grid,
            pdf,
            cdf,
            spectrum,
            x_max,
            normalization_defect,
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn grid_spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn pdf_values(&self) -> &[T] {
        &self.pdf
    }

    pub fn cdf_values(&self) -> &[T] {
        &self.cdf
    }

    pub fn spectrum(&self) -> &LatticeSpectrum<T> {
        &self.spectrum
    }

    /// Frequency truncation bound used by the quadrature.
    pub fn x_max(&self) -> T {
        self.x_max
    }

    /// |trapezoid integral of the pdf - 1| before cdf renormalization.
    pub fn normalization_defect(&self) -> T {
        self.normalization_defect
    }

    fn locate(&self, x: T) -> Option<(usize, T)> {
        let last = self.grid.len() - 1;
        if x < self.grid[0] || x > self.grid[last] {
            return None;
        }
        let pos = (x - self.spec.lo) / self.spec.step;
        let idx = pos
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(last.saturating_sub(1));
        let t = (x - self.grid[idx]) / self.spec.step;
        Some((idx, t.max(T::zero()).min(T::one())))
    }

    /// Linearly interpolated density; zero outside the grid.
    pub fn pdf_at(&self, x: T) -> T {
        match self.locate(x) {
            Some((i, t)) => self.pdf[i] + t * (self.pdf[i + 1] - self.pdf[i]),
            None => T::zero(),
        }
    }

    /// Linearly interpolated distribution function; clamps to {0, 1}
    /// outside the grid.
    pub fn cdf_at(&self, x: T) -> T {
        let last = self.grid.len() - 1;
        if x < self.grid[0] {
            return T::zero();
        }
        if x > self.grid[last] {
            return T::one();
        }
        match self.locate(x) {
            Some((i, t)) => self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i]),
            None => unreachable!("bounds checked above"),
        }
    }

    /// Inverse cdf by monotone piecewise-linear interpolation.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::invalid(format!(
                "quantile probability must lie in (0, 1), got {p}"
            )));
        }
        let idx = self.cdf.partition_point(|&c| c < p);
        if idx == 0 {
            return Ok(self.grid[0]);
        }
        let denom = self.cdf[idx] - self.cdf[idx - 1];
        let t = (p - self.cdf[idx - 1]) / denom;
        Ok(self.grid[idx - 1] + t * self.spec.step)
    }

    /// Inverse-cdf sampling from a deterministic uniform stream; the
    /// same seed always yields the same output.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u = unit_open(&mut rng);
                self.quantile(T::of(u)).expect("u lies strictly in (0,1)")
            })
            .collect()
    }

    /// Restriction to [lower, upper], renormalized to unit mass.
    pub fn truncate(&self, lower: T, upper: T) -> Result<TruncatedDist<'_, T>> {
        if !(lower < upper) {
            return Err(Error::invalid(format!(
                "degenerate truncation interval [{lower}, {upper}]"
            )));
        }
        let mass = self.cdf_at(upper) - self.cdf_at(lower);
        if mass < T::of(1e-12) {
            return Err(Error::numeric(format!(
                "vanishing truncation mass {mass:e} on [{lower}, {upper}]"
            )));
        }
        Ok(TruncatedDist {
            base: self,
            lower,
            upper,
            mass,
        })
    }

    /// (mean, variance) of the tabulated density by trapezoid
    /// integration, without renormalization.
    pub fn mean_variance(&self) -> (T, T) {
        let half_step = T::of(0.5) * self.spec.step;
        let mut m1 = CompensatedSum::new();
        let mut m2 = CompensatedSum::new();
        for i in 1..self.grid.len() {
            let a = self.grid[i - 1];
            let b = self.grid[i];
            m1.add(half_step * (a * self.pdf[i - 1] + b * self.pdf[i]));
            m2.add(half_step * (a * a * self.pdf[i - 1] + b * b * self.pdf[i]));
        }
        let mean = m1.total();
        (mean, m2.total() - mean * mean)
    }
}

/// Uniform deviate strictly inside (0, 1) from the top 53 bits.
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits + 1) as f64 / ((1u64 << 53) + 1) as f64
}

/// A [`BhpTable`] restricted to an interval and renormalized.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedDist<'a, T> {
    base: &'a BhpTable<T>,
    lower: T,
    upper: T,
    mass: T,
}

impl<'a, T: Real> TruncatedDist<'a, T> {
    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    /// Retained probability mass F(upper) - F(lower) of the base table.
    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn base(&self) -> &'a BhpTable<T> {
        self.base
    }

    /// (F(x) - F(lower)) / mass, clamped to [0, 1].
    pub fn cdf(&self, x: T) -> T {
        let raw = (self.base.cdf_at(x) - self.base.cdf_at(self.lower)) / self.mass;
        raw.max(T::zero()).min(T::one())
    }

    /// f(x) / mass on [lower, upper], zero outside.
    pub fn pdf(&self, x: T) -> T {
        if x < self.lower || x > self.upper {
            T::zero()
        } else {
            self.base.pdf_at(x) / self.mass
        }
    }

    /// Deterministic inverse-cdf sampling restricted to the interval.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<T> {
        let f_lo = self.base.cdf_at(self.lower);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u = T::of(unit_open(&mut rng));
                let p = f_lo + u * self.mass;
                self.base
                    .quantile(p.max(T::of(1e-300)).min(T::one() - T::epsilon()))
                    .expect("p lies strictly in (0,1)")
            })
            .collect()
    }
}
