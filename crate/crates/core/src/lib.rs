//! Universality analysis of daily index returns against the
//! Bramwell-Holdsworth-Pinton (BHP) fluctuation distribution.
//!
//! The pipeline: parse daily closes, form relative returns, split them
//! by sign, raise the magnitudes to a power alpha and normalize, then
//! pick the alpha whose normalized fluctuations best match the BHP
//! distribution truncated to the observed range, judged by the
//! Kolmogorov-Smirnov p-value. The fitted alpha also yields a
//! closed-form density for the raw return magnitudes by change of
//! variable.
//!
//! The numeric core is generic over the scalar type via [`num::Real`]
//! (`f32` or `f64`); the `*64` aliases below pin the common choice.

pub mod bhp;
pub mod error;
pub mod fluct;
pub mod gof;
pub mod market;
pub mod num;
pub mod report;
pub mod scan;
pub mod svg;

pub use error::{Error, Result};
pub use market::Sign;

/// `f64`-concrete aliases for the main artifacts.
pub type BhpTable64 = bhp::BhpTable<f64>;
pub type GridSpec64 = bhp::GridSpec<f64>;
pub type PriceSeries64 = market::PriceSeries<f64>;
pub type ReturnSeries64 = market::ReturnSeries<f64>;
pub type SignedReturns64 = market::SignedReturns<f64>;
pub type FluctuationSet64 = fluct::FluctuationSet<f64>;
pub type KsResult64 = gof::KsResult<f64>;
pub type AlphaRange64 = scan::AlphaRange<f64>;
pub type ScanResult64 = scan::ScanResult<f64>;
pub type Histogram64 = report::Histogram<f64>;
pub type Summary64 = report::Summary<f64>;
