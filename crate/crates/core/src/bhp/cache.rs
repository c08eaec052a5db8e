//! On-disk table cache.
//!
//! Tables are keyed by (lattice side, orientation, grid spec); files
//! are written atomically (temp file in the cache directory, then
//! rename) so concurrent builders never observe a partial table.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use crate::bhp::spectrum::LatticeSpectrum;
use crate::bhp::table::{BhpTable, GridSpec, Orientation};
use crate::error::{Error, Result};
use crate::num::Real;

const FORMAT_VERSION: &str = "v1";
/// Eigenvalue formula recorded alongside every table.
const EIGEN_FORMULA: &str = "4-2cos(2*pi*n1/L)-2cos(2*pi*n2/L)";

/// Whether [`load_or_build`] found a usable cached table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

/// Returns the cached table when present and matching, otherwise
/// builds, persists, and returns it.
pub fn load_or_build<T: Real>(
    side: u32,
    orientation: Orientation,
    spec: &GridSpec<T>,
    cache_dir: &Path,
) -> Result<(BhpTable<T>, CacheStatus)> {
    spec.validate()?;
    let path = cache_path(side, orientation, spec, cache_dir);
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(table) = read_csv::<T, _>(file) {
            if table_matches(&table, side, orientation, spec) {
                return Ok((table, CacheStatus::Hit));
            }
        }
        // Unreadable or mismatched cache entry: rebuild over it.
    }
    let table = BhpTable::build(side, orientation, spec)?;
    fs::create_dir_all(cache_dir)?;
    write_atomic(&table, &path)?;
    Ok((table, CacheStatus::Miss))
}

/// Cache file path for a table key.
pub fn cache_path<T: Real>(
    side: u32,
    orientation: Orientation,
    spec: &GridSpec<T>,
    cache_dir: &Path,
) -> PathBuf {
    let key = format!(
        "{FORMAT_VERSION},L={side},orientation={orientation},lo={:.16e},hi={:.16e},step={:.16e}",
        spec.lo, spec.hi, spec.step
    );
    let digest = Sha256::digest(key.as_bytes());
    let short: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    cache_dir.join(format!("bhp-L{side}-{orientation}-{short}.csv"))
}

fn table_matches<T: Real>(
    table: &BhpTable<T>,
    side: u32,
    orientation: Orientation,
    spec: &GridSpec<T>,
) -> bool {
    table.spectrum().side() == side
        && table.orientation() == orientation
        && table.grid_spec() == spec
}

fn write_atomic<T: Real>(table: &BhpTable<T>, path: &Path) -> Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp.{}.{}", std::process::id(), unique));
    {
        let mut writer = BufWriter::new(fs::File::create(&tmp)?);
        write_csv(table, &mut writer)?;
        writer.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the table as a metadata header line followed by
/// "x,pdf,cdf" rows with 17 significant digits.
pub fn write_csv<T: Real, W: Write>(table: &BhpTable<T>, writer: &mut W) -> Result<()> {
    let spec = table.grid_spec();
    let spectrum = table.spectrum();
    writeln!(
        writer,
        "bhp-table,{FORMAT_VERSION},L={},N={},orientation={},lo={:.16e},hi={:.16e},step={:.16e},x_max={:.16e},defect={:.16e},eigen={EIGEN_FORMULA}",
        spectrum.side(),
        spectrum.sites(),
        table.orientation(),
        spec.lo,
        spec.hi,
        spec.step,
        table.x_max(),
        table.normalization_defect(),
    )?;
    writeln!(writer, "x,pdf,cdf")?;
    for i in 0..table.grid().len() {
        writeln!(
            writer,
            "{:.16e},{:.16e},{:.16e}",
            table.grid()[i],
            table.pdf_values()[i],
            table.cdf_values()[i]
        )?;
    }
    Ok(())
}

/// Reads a table previously written by [`write_csv`].
pub fn read_csv<T: Real, R: Read>(reader: R) -> Result<BhpTable<T>> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or(Error::EmptyInput)?
        .map_err(Error::from)?;
    let mut fields = header.split(',');
    if fields.next() != Some("bhp-table") {
        return Err(Error::Parse {
            row: 1,
            reason: "not a bhp table file".to_string(),
        });
    }
    if fields.next() != Some(FORMAT_VERSION) {
        return Err(Error::Parse {
            row: 1,
            reason: "unsupported table format version".to_string(),
        });
    }
    let mut side = None;
    let mut orientation = None;
    let mut lo = None;
    let mut hi = None;
    let mut step = None;
    let mut x_max = None;
    let mut defect = None;
    for field in fields {
        let Some((key, value)) = field.split_once('=') else {
            continue;
        };
        match key {
            "L" => side = value.parse::<u32>().ok(),
            "orientation" => orientation = value.parse::<Orientation>().ok(),
            "lo" => lo = parse_float::<T>(value),
            "hi" => hi = parse_float::<T>(value),
            "step" => step = parse_float::<T>(value),
            "x_max" => x_max = parse_float::<T>(value),
            "defect" => defect = parse_float::<T>(value),
            _ => {}
        }
    }
    let bad_header = || Error::Parse {
        row: 1,
        reason: "incomplete table metadata".to_string(),
    };
    let side = side.ok_or_else(bad_header)?;
    let orientation = orientation.ok_or_else(bad_header)?;
    let spec = GridSpec {
        lo: lo.ok_or_else(bad_header)?,
        hi: hi.ok_or_else(bad_header)?,
        step: step.ok_or_else(bad_header)?,
    };
    let x_max = x_max.ok_or_else(bad_header)?;
    let defect = defect.ok_or_else(bad_header)?;

    let columns = lines.next().ok_or(Error::EmptyInput)?.map_err(Error::from)?;
    if columns.trim() != "x,pdf,cdf" {
        return Err(Error::Parse {
            row: 2,
            reason: format!("unexpected column header '{columns}'"),
        });
    }

    let expected = spec.points();
    let mut grid = Vec::with_capacity(expected);
    let mut pdf = Vec::with_capacity(expected);
    let mut cdf = Vec::with_capacity(expected);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(Error::from)?;
        if line.is_empty() {
            continue;
        }
        let row = i + 3;
        let mut cells = line.split(',');
        let mut next = || -> Result<T> {
            let cell = cells.next().ok_or_else(|| Error::Parse {
                row,
                reason: "missing column".to_string(),
            })?;
            parse_float::<T>(cell).ok_or_else(|| Error::Parse {
                row,
                reason: format!("bad float '{cell}'"),
            })
        };
        grid.push(next()?);
        pdf.push(next()?);
        cdf.push(next()?);
    }
    if grid.len() != expected {
        return Err(Error::Parse {
            row: grid.len() + 2,
            reason: format!("expected {expected} rows, found {}", grid.len()),
        });
    }
    let spectrum = LatticeSpectrum::new(side)?;
    Ok(BhpTable::from_parts(
        orientation,
        spec,
        grid,
        pdf,
        cdf,
        spectrum,
        x_max,
        defect,
    ))
}

fn parse_float<T: Real>(s: &str) -> Option<T> {
    s.parse::<f64>().ok().map(T::of)
}
