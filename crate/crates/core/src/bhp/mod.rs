//! The BHP probability distribution: lattice spectrum, numerical
//! construction by characteristic-function inversion, and the table
//! operations (pdf, cdf, quantile, sampling, truncation, caching).

mod cache;
mod quad;
mod spectrum;
mod table;

pub use cache::{cache_path, load_or_build, read_csv, write_csv, CacheStatus};
pub use spectrum::LatticeSpectrum;
pub use table::{BhpTable, GridSpec, Orientation, TruncatedDist};
