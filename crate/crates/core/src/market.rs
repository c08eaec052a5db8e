//! Daily price ingestion, returns, and the split into signed populations.

use std::io::Read;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::num::Real;

/// Which side of zero a return population sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// Short directory/label name ("pos"/"neg").
    pub fn label(self) -> &'static str {
        match self {
            Sign::Positive => "pos",
            Sign::Negative => "neg",
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

/// How to read a delimiter-separated price file.
#[derive(Debug, Clone)]
pub struct PriceFormat {
    pub delimiter: u8,
    /// Column holding the date; resolved by header name when set,
    /// otherwise auto-detected ("date", else the first column).
    pub date_column: Option<String>,
    /// Column holding the adjusted close; resolved by header name when
    /// set, otherwise auto-detected ("adj close" variants, then
    /// "close", else the second column).
    pub close_column: Option<String>,
    /// chrono format string, ISO-8601 dates by default.
    pub date_format: String,
}

impl Default for PriceFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            date_column: None,
            close_column: None,
            date_format: "%Y-%m-%d".to_string(),
        }
    }
}

/// Ordered daily (date, adjusted close) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    observations: Vec<(NaiveDate, T)>,
}

impl<T: Real> PriceSeries<T> {
    /// Builds a series from raw observations, enforcing the invariants
    /// (strictly increasing dates, positive finite closes). Rows are
    /// sorted by date first.
    pub fn new(mut observations: Vec<(NaiveDate, T)>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyInput);
        }
        observations.sort_by_key(|(d, _)| *d);
        for (i, (date, close)) in observations.iter().enumerate() {
            if !close.is_finite() {
                return Err(Error::Parse {
                    row: i + 1,
                    reason: format!("non-finite price on {date}"),
                });
            }
            if *close <= T::zero() {
                return Err(Error::Parse {
                    row: i + 1,
                    reason: format!("non-positive price on {date}"),
                });
            }
            if i > 0 && observations[i - 1].0 == *date {
                return Err(Error::Parse {
                    row: i + 1,
                    reason: format!("duplicate date {date}"),
                });
            }
        }
        Ok(Self { observations })
    }

    pub fn observations(&self) -> &[(NaiveDate, T)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn closes(&self) -> impl Iterator<Item = T> + '_ {
        self.observations.iter().map(|(_, c)| *c)
    }
}

/// Daily relative returns derived from a [`PriceSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries<T> {
    entries: Vec<(NaiveDate, T)>,
}

impl<T: Real> ReturnSeries<T> {
    pub fn entries(&self) -> &[(NaiveDate, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|(_, r)| *r)
    }
}

/// One sign's return magnitudes (all strictly positive).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedReturns<T> {
    pub sign: Sign,
    pub magnitudes: Vec<T>,
    /// Total number of return days in the source series, including the
    /// other sign and zero-return days.
    pub total_days: usize,
}

impl<T: Real> SignedReturns<T> {
    pub fn count(&self) -> usize {
        self.magnitudes.len()
    }
}

/// Parses a delimiter-separated price file into a [`PriceSeries`].
///
/// The first row is treated as a header when its close cell does not
/// parse as a number; column names are resolved against it. Explicitly
/// configured column names require a header row.
pub fn parse_prices<T: Real, R: Read>(reader: R, format: &PriceFormat) -> Result<PriceSeries<T>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: idx + 1,
            reason: e.to_string(),
        })?;
        // Skip fully blank lines.
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((idx + 1, record));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }

    let (date_idx, close_idx, data_start) = resolve_columns(&records, format)?;
    if records.len() <= data_start {
        return Err(Error::EmptyInput);
    }

    let mut observations = Vec::with_capacity(records.len() - data_start);
    let mut row_of_date = Vec::with_capacity(records.len() - data_start);
    for (row, record) in &records[data_start..] {
        let date_cell = record.get(date_idx).ok_or_else(|| Error::Parse {
            row: *row,
            reason: format!("missing date column {date_idx}"),
        })?;
        let close_cell = record.get(close_idx).ok_or_else(|| Error::Parse {
            row: *row,
            reason: format!("missing close column {close_idx}"),
        })?;
        let date =
            NaiveDate::parse_from_str(date_cell, &format.date_format).map_err(|e| Error::Parse {
                row: *row,
                reason: format!("bad date '{date_cell}': {e}"),
            })?;
        let close: f64 = close_cell.parse().map_err(|_| Error::Parse {
            row: *row,
            reason: format!("bad close '{close_cell}'"),
        })?;
        if !close.is_finite() {
            return Err(Error::Parse {
                row: *row,
                reason: format!("non-finite price '{close_cell}'"),
            });
        }
        if close <= 0.0 {
            return Err(Error::Parse {
                row: *row,
                reason: format!("non-positive price '{close_cell}'"),
            });
        }
        observations.push((date, T::of(close)));
        row_of_date.push((*row, date));
    }

    // Report duplicates against source rows before handing off to the
    // invariant check (which only knows sorted indices).
    let mut sorted = row_of_date.clone();
    sorted.sort_by_key(|(_, d)| *d);
    for pair in sorted.windows(2) {
        if pair[0].1 == pair[1].1 {
            let row = pair[0].0.max(pair[1].0);
            return Err(Error::Parse {
                row,
                reason: format!("duplicate date {}", pair[0].1),
            });
        }
    }

    PriceSeries::new(observations)
}

fn resolve_columns(
    records: &[(usize, csv::StringRecord)],
    format: &PriceFormat,
) -> Result<(usize, usize, usize)> {
    let (first_row, first) = &records[0];
    let looks_like_header = !first
        .iter()
        .any(|cell| cell.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));

    if looks_like_header {
        let names: Vec<String> = first.iter().map(|c| c.trim().to_lowercase()).collect();
        let find = |wanted: &[&str]| -> Option<usize> {
            wanted
                .iter()
                .find_map(|w| names.iter().position(|n| n == w))
        };
        let date_idx = match &format.date_column {
            Some(name) => find(&[name.to_lowercase().as_str()]).ok_or_else(|| Error::Parse {
                row: *first_row,
                reason: format!("date column '{name}' not found in header"),
            })?,
            None => find(&["date", "day"]).unwrap_or(0),
        };
        let close_idx = match &format.close_column {
            Some(name) => find(&[name.to_lowercase().as_str()]).ok_or_else(|| Error::Parse {
                row: *first_row,
                reason: format!("close column '{name}' not found in header"),
            })?,
            None => find(&["adj close", "adjusted close", "adj_close", "adjclose", "close"])
                .unwrap_or(1),
        };
        Ok((date_idx, close_idx, 1))
    } else {
        if format.date_column.is_some() || format.close_column.is_some() {
            return Err(Error::Parse {
                row: *first_row,
                reason: "column names configured but the file has no header row".to_string(),
            });
        }
        Ok((0, 1, 0))
    }
}

/// Daily relative return r(t) = (Y(t) - Y(t-1)) / Y(t-1), dated at day t.
pub fn compute_returns<T: Real>(prices: &PriceSeries<T>) -> Result<ReturnSeries<T>> {
    if prices.len() < 2 {
        return Err(Error::invalid(format!(
            "price series too short: need at least 2 observations, got {}",
            prices.len()
        )));
    }
    let entries = prices
        .observations()
        .windows(2)
        .map(|w| {
            let (_, prev) = w[0];
            let (date, cur) = w[1];
            (date, (cur - prev) / prev)
        })
        .collect();
    Ok(ReturnSeries { entries })
}

/// Splits returns into strictly positive and strictly negative
/// populations; zero returns belong to neither.
pub fn split_by_sign<T: Real>(returns: &ReturnSeries<T>) -> (SignedReturns<T>, SignedReturns<T>) {
    let total_days = returns.len();
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for r in returns.values() {
        if r > T::zero() {
            positive.push(r);
        } else if r < T::zero() {
            negative.push(-r);
        }
    }
    (
        SignedReturns {
            sign: Sign::Positive,
            magnitudes: positive,
            total_days,
        },
        SignedReturns {
            sign: Sign::Negative,
            magnitudes: negative,
            total_days,
        },
    )
}

/// Rebuilds a close series from the first close and a return sequence.
/// Inverse of [`compute_returns`]; also used to synthesize price files.
pub fn reconstruct_prices<T: Real>(first_close: T, returns: &[T]) -> Vec<T> {
    let mut closes = Vec::with_capacity(returns.len() + 1);
    closes.push(first_close);
    let mut current = first_close;
    for &r in returns {
        current = current * (T::one() + r);
        closes.push(current);
    }
    closes
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse_str(text: &str) -> Result<PriceSeries<f64>> {
        parse_prices(text.as_bytes(), &PriceFormat::default())
    }

    #[test]
    fn minimal_two_row_file() {
        let series = parse_str("2009-01-02,100.0\n2009-01-05,110.0\n").unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series.observations()[1].1, 110.0);
    }

    #[test]
    fn non_positive_price_is_rejected() {
        let err = parse_str("2009-01-02,100.0\n2009-01-05,-5.0\n").unwrap_err();
        match err {
            Error::Parse { row, reason } => {
                assert_eq!(row, 2);
                assert!(reason.contains("non-positive price"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_price_is_rejected() {
        let err = parse_str("2009-01-02,100.0\n2009-01-05,NaN\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn header_row_is_detected_and_columns_resolved() {
        let text = "Date,Open,High,Low,Close,Adj Close,Volume\n\
                    2009-01-02,1.0,1.0,1.0,90.0,100.0,5\n\
                    2009-01-05,1.0,1.0,1.0,95.0,110.0,5\n";
        let series = parse_str(text).unwrap();
        assert_eq!(series.len(), 2);
        // Adj Close wins over Close.
        assert_eq!(series.observations()[0].1, 100.0);
    }

    #[test]
    fn configured_close_column() {
        let fmt = PriceFormat {
            close_column: Some("Close".to_string()),
            ..PriceFormat::default()
        };
        let text = "Date,Close,Adj Close\n2009-01-02,90.0,100.0\n2009-01-05,95.0,110.0\n";
        let series: PriceSeries<f64> = parse_prices(text.as_bytes(), &fmt).unwrap();
        assert_eq!(series.observations()[0].1, 90.0);
    }

    #[test]
    fn missing_configured_column_reports_header_row() {
        let fmt = PriceFormat {
            close_column: Some("Nope".to_string()),
            ..PriceFormat::default()
        };
        let err = parse_prices::<f64, _>("Date,Close\n2009-01-02,1.0\n".as_bytes(), &fmt)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_date_is_rejected() {
        let err = parse_str("2009-01-02,100.0\n2009-01-02,110.0\n").unwrap_err();
        match err {
            Error::Parse { row, reason } => {
                assert_eq!(row, 2);
                assert!(reason.contains("duplicate date"), "{reason}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rows_are_sorted_by_date() {
        let series = parse_str("2009-01-05,110.0\n2009-01-02,100.0\n").unwrap();
        assert!(series.observations()[0].0 < series.observations()[1].0);
        assert_eq!(series.observations()[0].1, 100.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse_str(""), Err(Error::EmptyInput)));
        assert!(matches!(parse_str("\n\n"), Err(Error::EmptyInput)));
        // A lone header row carries no data.
        assert!(matches!(parse_str("Date,Close\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn malformed_row_reports_index() {
        let err = parse_str("2009-01-02,100.0\nnot-a-date,101.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn returns_direct_arithmetic() {
        let series = parse_str("2009-01-02,100.0\n2009-01-05,110.0\n").unwrap();
        let returns = compute_returns(&series).unwrap();
        assert_eq!(returns.len(), 1);
        assert!((returns.entries()[0].1 - 0.10).abs() < 1e-15);
    }

    #[test]
    fn constant_closes_give_zero_returns() {
        let series = parse_str("2009-01-02,50.0\n2009-01-05,50.0\n2009-01-06,50.0\n").unwrap();
        let returns = compute_returns(&series).unwrap();
        assert_eq!(returns.len(), 2);
        assert!(returns.values().all(|r| r == 0.0));
    }

    #[test]
    fn too_short_series_is_rejected() {
        let series = parse_str("2009-01-02,100.0\n").unwrap();
        assert!(matches!(compute_returns(&series), Err(Error::Invalid(_))));
    }

    #[test]
    fn split_drops_zero_returns() {
        let entries = vec![
            (NaiveDate::from_ymd_opt(2009, 1, 2).unwrap(), 0.1),
            (NaiveDate::from_ymd_opt(2009, 1, 5).unwrap(), -0.2),
            (NaiveDate::from_ymd_opt(2009, 1, 6).unwrap(), 0.0),
        ];
        let returns = ReturnSeries { entries };
        let (pos, neg) = split_by_sign(&returns);
        assert_eq!(pos.magnitudes, vec![0.1]);
        assert_eq!(neg.magnitudes, vec![0.2]);
        assert_eq!(pos.total_days, 3);
        assert_eq!(neg.total_days, 3);
    }

    proptest! {
        #[test]
        fn partition_counts_add_up(values in proptest::collection::vec(-0.5f64..2.0, 1..200)) {
            let entries: Vec<(NaiveDate, f64)> = values.iter().enumerate()
                .map(|(i, &r)| {
                    let date = NaiveDate::from_num_days_from_ce_opt(730_000 + i as i32).unwrap();
                    // Inject exact zeros for a fraction of entries.
                    (date, if r.abs() < 0.05 { 0.0 } else { r })
                })
                .collect();
            let returns = ReturnSeries { entries };
            let zeros = returns.values().filter(|&r| r == 0.0).count();
            let (pos, neg) = split_by_sign(&returns);
            prop_assert_eq!(pos.count() + neg.count() + zeros, returns.len());
            prop_assert!(pos.magnitudes.iter().all(|&m| m > 0.0));
            prop_assert!(neg.magnitudes.iter().all(|&m| m > 0.0));
        }

        #[test]
        fn price_round_trip(
            first in 1.0f64..1000.0,
            rets in proptest::collection::vec(-0.5f64..2.0, 1..100),
        ) {
            let closes = reconstruct_prices(first, &rets);
            let observations: Vec<(NaiveDate, f64)> = closes.iter().enumerate()
                .map(|(i, &c)| (NaiveDate::from_num_days_from_ce_opt(730_000 + i as i32).unwrap(), c))
                .collect();
            let series = PriceSeries::new(observations).unwrap();
            let recomputed = compute_returns(&series).unwrap();
            for (orig, got) in rets.iter().zip(recomputed.values()) {
                prop_assert!((orig - got).abs() <= 1e-12 * (1.0 + orig.abs()));
            }
            // And back again: reconstructed closes match the originals.
            let rebuilt = reconstruct_prices(first, &recomputed.values().collect::<Vec<_>>());
            for (a, b) in closes.iter().zip(rebuilt.iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }
    }
}
