//! Data-collapse outputs: density histograms with truncated overlays,
//! the closed-form return pdfs, and the serialized report bundle.
//!
//! Bundle layout under the output directory:
//!   summary.json
//!   pos/{pcurve.csv,dmap.csv,hist_fluct.csv,overlay_fluct.csv,
//!        hist_ret.csv,overlay_ret.csv,*.svg}
//!   neg/...
//!
//! Everything written here is deterministic for fixed inputs: stable
//! key order in the JSON (alphabetical at every level), floats with 17
//! significant digits, no timestamps.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bhp::{BhpTable, TruncatedDist};
use crate::error::{Error, Result};
use crate::fluct::{self, FluctuationSet};
use crate::gof::{self, DistanceCurve};
use crate::market::{Sign, SignedReturns};
use crate::num::Real;
use crate::scan::{self, AlphaRange, ScanResult};
use crate::svg::Figure;

/// Histogram binning rule. The fallback when the interquartile range
/// degenerates is the square-root rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRule {
    FreedmanDiaconis,
    Count(usize),
}

impl Default for BinRule {
    fn default() -> Self {
        BinRule::FreedmanDiaconis
    }
}

/// Area-normalized histogram: `edges` has one more entry than
/// `densities`, and sum(density * width) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub densities: Vec<T>,
}

impl<T: Real> Histogram<T> {
    pub fn bin_count(&self) -> usize {
        self.densities.len()
    }

    /// Total area; exactly 1 up to rounding by construction.
    pub fn area(&self) -> T {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

/// Area-normalized histogram of `values` over [lo, hi].
pub fn histogram<T: Real>(values: &[T], lo: T, hi: T, rule: BinRule) -> Result<Histogram<T>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot bin an empty sample"));
    }
    if !(lo < hi) {
        return Err(Error::invalid(format!(
            "degenerate histogram range [{lo}, {hi}]"
        )));
    }
    let distinct = values.iter().any(|&v| v != values[0]);
    if !distinct {
        return Err(Error::invalid(
            "histogram needs at least 2 distinct values",
        ));
    }
    let n = values.len();
    let bins = match rule {
        BinRule::Count(0) => return Err(Error::invalid("bin count must be positive")),
        BinRule::Count(k) => k,
        BinRule::FreedmanDiaconis => {
            let mut sorted = values.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
            let iqr = percentile_sorted(&sorted, T::of(0.75)) - percentile_sorted(&sorted, T::of(0.25));
            let width = T::of(2.0) * iqr / T::of_usize(n).powf(T::of(1.0 / 3.0));
            if width > T::zero() {
                ((hi - lo) / width)
                    .ceil()
                    .to_usize()
                    .unwrap_or(1)
                    .clamp(1, 2000)
            } else {
                (T::of_usize(n).sqrt().ceil()).to_usize().unwrap_or(1).max(1)
            }
        }
    };
    let width = (hi - lo) / T::of_usize(bins);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = ((v - lo) / width)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(bins - 1);
        counts[idx] += 1;
    }
    let scale = (T::of_usize(n) * width).recip();
    Ok(Histogram {
        edges: (0..=bins).map(|i| lo + width * T::of_usize(i)).collect(),
        densities: counts.iter().map(|&c| T::of_usize(c) * scale).collect(),
    })
}

fn percentile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    let pos = p * T::of_usize(n - 1);
    let idx = pos.floor().to_usize().unwrap_or(0).min(n - 1);
    if idx + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - T::of_usize(idx);
    sorted[idx] + frac * (sorted[idx + 1] - sorted[idx])
}

/// Derived constants of the closed-form return pdf
/// f(x) = amplitude * x^(alpha-1) * f_BHP(inner_scale * x^alpha - inner_shift)
/// on [support_lo, support_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnPdfSpec<T> {
    pub alpha: T,
    /// amplitude = alpha / (sd * mass).
    pub amplitude: T,
    /// inner_scale = 1 / sd.
    pub inner_scale: T,
    /// inner_shift = mean / sd.
    pub inner_shift: T,
    /// Retained BHP mass between the fluctuation bounds.
    pub mass: T,
    pub mean_alpha: T,
    pub sd_alpha: T,
    pub support_hi: T,
    pub support_lo: T,
}

/// Evaluator for the return pdf against a concrete table.
#[derive(Debug, Clone, Copy)]
pub struct ReturnPdf<'a, T> {
    pub spec: ReturnPdfSpec<T>,
    table: &'a BhpTable<T>,
}

impl<'a, T: Real> ReturnPdf<'a, T> {
    pub fn density(&self, x: T) -> T {
        let s = &self.spec;
        if x <= T::zero() || x < s.support_lo || x > s.support_hi {
            return T::zero();
        }
        let y = s.inner_scale * x.powf(s.alpha) - s.inner_shift;
        s.amplitude * x.powf(s.alpha - T::one()) * self.table.pdf_at(y)
    }
}

/// Builds the change-of-variable pdf of the raw return magnitudes from
/// the fitted alpha, the rescaled moments, and the fluctuation range.
pub fn return_pdf<'a, T: Real>(
    table: &'a BhpTable<T>,
    alpha: T,
    mean_alpha: T,
    sd_alpha: T,
    lower: T,
    upper: T,
) -> Result<ReturnPdf<'a, T>> {
    if !(alpha > T::zero() && alpha <= T::of(2.0)) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if !(sd_alpha > T::zero()) {
        return Err(Error::invalid("sd must be positive"));
    }
    let mass = table.truncate(lower, upper)?.mass();
    let u_lo = sd_alpha * lower + mean_alpha;
    let u_hi = sd_alpha * upper + mean_alpha;
    if !(u_hi > T::zero()) {
        return Err(Error::invalid(
            "empty support: upper fluctuation bound maps below zero",
        ));
    }
    let support_lo = if u_lo > T::zero() {
        u_lo.powf(alpha.recip())
    } else {
        T::zero()
    };
    let support_hi = u_hi.powf(alpha.recip());
    if !(support_lo < support_hi) {
        return Err(Error::invalid("empty support"));
    }
    Ok(ReturnPdf {
        spec: ReturnPdfSpec {
            alpha,
            amplitude: alpha / (sd_alpha * mass),
            inner_scale: sd_alpha.recip(),
            inner_shift: mean_alpha / sd_alpha,
            mass,
            mean_alpha,
            sd_alpha,
            support_hi,
            support_lo,
        },
        table,
    })
}

/// A plain sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
}

/// Per-sign summary block of summary.json. Field names are kept in
/// alphabetical order so a parse-then-serialize round trip through a
/// key-sorted JSON value is byte-identical.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SignSummary<T> {
    pub alpha_star: T,
    pub amplitude: T,
    pub count: usize,
    pub d_star: T,
    pub inner_scale: T,
    pub inner_shift: T,
    pub lower: T,
    pub mass: T,
    pub mean_alpha: T,
    pub p_star: T,
    pub sd_alpha: T,
    pub support_hi: T,
    pub support_lo: T,
    pub upper: T,
}

/// Everything emitted for one sign.
#[derive(Debug, Clone)]
pub struct SignBundle<T> {
    pub sign: Sign,
    pub scan: ScanResult<T>,
    pub dmap: DistanceCurve<T>,
    pub fluct_hist: Histogram<T>,
    pub fluct_overlay: Curve<T>,
    pub ret_hist: Histogram<T>,
    pub ret_overlay: Curve<T>,
    pub summary: SignSummary<T>,
}

/// Number of points used for overlay and distance-map curves.
const CURVE_POINTS: usize = 801;

fn sample_range<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    let step = (hi - lo) / T::of_usize(count - 1);
    (0..count).map(|i| lo + step * T::of_usize(i)).collect()
}

/// Full per-sign analysis: scan the alpha grid, then rebuild the
/// optimal-alpha artifacts (distance map, histograms, overlays, return
/// pdf).
pub fn analyze_sign<T: Real>(
    population: &SignedReturns<T>,
    table: &BhpTable<T>,
    range: &AlphaRange<T>,
    rule: BinRule,
) -> Result<SignBundle<T>> {
    let scan_result = scan::scan(population, table, range)?;
    let best = scan_result.best_entry();
    let set: FluctuationSet<T> =
        fluct::normalize(population.sign, &population.magnitudes, best.alpha)?;
    let truncated: TruncatedDist<'_, T> = table.truncate(set.lower, set.upper)?;

    let fluct_grid = sample_range(set.lower, set.upper, CURVE_POINTS);
    let dmap = gof::distance_curve(&set.values, |x| truncated.cdf(x), &fluct_grid)?;
    let fluct_hist = histogram(&set.values, set.lower, set.upper, rule)?;
    let fluct_overlay = Curve {
        ys: fluct_grid.iter().map(|&x| truncated.pdf(x)).collect(),
        xs: fluct_grid,
    };

    let rp = return_pdf(
        table,
        best.alpha,
        best.mean_alpha,
        best.sd_alpha,
        set.lower,
        set.upper,
    )?;
    let mut m_lo = T::infinity();
    let mut m_hi = T::neg_infinity();
    for &m in &population.magnitudes {
        m_lo = m_lo.min(m);
        m_hi = m_hi.max(m);
    }
    let ret_hist = histogram(&population.magnitudes, m_lo, m_hi, rule)?;
    let ret_grid = sample_range(rp.spec.support_lo.max(m_lo), rp.spec.support_hi, CURVE_POINTS);
    let ret_overlay = Curve {
        ys: ret_grid.iter().map(|&x| rp.density(x)).collect(),
        xs: ret_grid,
    };

    let summary = SignSummary {
        alpha_star: best.alpha,
        amplitude: rp.spec.amplitude,
        count: population.count(),
        d_star: best.statistic,
        inner_scale: rp.spec.inner_scale,
        inner_shift: rp.spec.inner_shift,
        lower: set.lower,
        mass: rp.spec.mass,
        mean_alpha: best.mean_alpha,
        p_star: best.p_value,
        sd_alpha: best.sd_alpha,
        support_hi: rp.spec.support_hi,
        support_lo: rp.spec.support_lo,
        upper: set.upper,
    };

    Ok(SignBundle {
        sign: population.sign,
        scan: scan_result,
        dmap,
        fluct_hist,
        fluct_overlay,
        ret_hist,
        ret_overlay,
        summary,
    })
}

/// Observation counts recorded in the summary.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Counts {
    pub negative: usize,
    pub positive: usize,
    /// Total return days (positive + negative + zeros).
    pub returns: usize,
    pub zeros: usize,
}

/// Table metadata recorded in the summary.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TableSummary<T> {
    pub defect: T,
    pub grid_hi: T,
    pub grid_lo: T,
    pub grid_step: T,
    pub lattice: u32,
    pub orientation: String,
    pub sites: u32,
    pub x_max: T,
}

impl<T: Real> TableSummary<T> {
    pub fn from_table(table: &BhpTable<T>) -> Self {
        let spec = table.grid_spec();
        Self {
            defect: table.normalization_defect(),
            grid_hi: spec.hi,
            grid_lo: spec.lo,
            grid_step: spec.step,
            lattice: table.spectrum().side(),
            orientation: table.orientation().to_string(),
            sites: table.spectrum().sites(),
            x_max: table.x_max(),
        }
    }
}

/// Top-level summary.json document.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary<T> {
    pub counts: Counts,
    /// SHA-256 of the raw input file bytes.
    pub input_digest: String,
    pub negative: Option<SignSummary<T>>,
    pub positive: Option<SignSummary<T>>,
    pub table: TableSummary<T>,
    pub version: String,
}

/// Serializes with floats at 17 significant digits so values round-trip
/// exactly and re-serialization is byte-identical.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// JSON text with stable key order and 17-significant-digit floats.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::numeric(format!("json serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::numeric(format!("json not utf-8: {e}")))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("writing {}: {e}", path.display()),
        ))
    })
}

fn fmt<T: Real>(v: T) -> String {
    format!("{v:.16e}")
}

fn scan_csv<T: Real>(scan: &ScanResult<T>) -> String {
    let mut out = String::from("alpha,D,p,mu,sigma,L,R\n");
    for e in &scan.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(e.alpha),
            fmt(e.statistic),
            fmt(e.p_value),
            fmt(e.mean_alpha),
            fmt(e.sd_alpha),
            fmt(e.lower),
            fmt(e.upper)
        ));
    }
    out
}

fn curve_csv<T: Real>(header: &str, xs: &[T], ys: &[T]) -> String {
    let mut out = String::with_capacity(xs.len() * 48);
    out.push_str(header);
    out.push('\n');
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{},{}\n", fmt(*x), fmt(*y)));
    }
    out
}

fn hist_csv<T: Real>(hist: &Histogram<T>) -> String {
    let mut out = String::from("lo,hi,density\n");
    for (i, d) in hist.densities.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(hist.edges[i]),
            fmt(hist.edges[i + 1]),
            fmt(*d)
        ));
    }
    out
}

/// Writes the full report bundle. With `render_svg` set, each sign
/// directory also gets the six figure renderings.
pub fn emit_report<T: Real + Serialize>(
    out_dir: &Path,
    summary: &Summary<T>,
    bundles: &[SignBundle<T>],
    render_svg: bool,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_file(&out_dir.join("summary.json"), &to_json(summary)?)?;
    for bundle in bundles {
        let dir = out_dir.join(bundle.sign.label());
        fs::create_dir_all(&dir)?;
        write_file(&dir.join("pcurve.csv"), &scan_csv(&bundle.scan))?;
        write_file(
            &dir.join("dmap.csv"),
            &curve_csv("x,d", &bundle.dmap.grid, &bundle.dmap.distances),
        )?;
        write_file(&dir.join("hist_fluct.csv"), &hist_csv(&bundle.fluct_hist))?;
        write_file(
            &dir.join("overlay_fluct.csv"),
            &curve_csv("x,pdf", &bundle.fluct_overlay.xs, &bundle.fluct_overlay.ys),
        )?;
        write_file(&dir.join("hist_ret.csv"), &hist_csv(&bundle.ret_hist))?;
        write_file(
            &dir.join("overlay_ret.csv"),
            &curve_csv("x,pdf", &bundle.ret_overlay.xs, &bundle.ret_overlay.ys),
        )?;
        if render_svg {
            render_sign_svgs(&dir)?;
        }
    }
    Ok(())
}

/// (Re-)renders the six SVG figures of one sign directory from its CSV
/// curves. The CSVs are the canonical data; rendering from them keeps
/// direct emission and later re-rendering byte-identical.
pub fn render_sign_svgs(dir: &Path) -> Result<()> {
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();

    let pcurve = read_two_column(&dir.join("pcurve.csv"), 0, 2)?;
    write_file(
        &dir.join("pcurve.svg"),
        &Figure::new(&format!("KS p-value vs alpha ({label})"), "alpha", "p", false)
            .line(pcurve)
            .render(),
    )?;

    let dmap = read_two_column(&dir.join("dmap.csv"), 0, 1)?;
    write_file(
        &dir.join("dmap.svg"),
        &Figure::new(
            &format!("|F_emp - F_model| at alpha* ({label})"),
            "fluctuation",
            "distance",
            false,
        )
        .line(dmap)
        .render(),
    )?;

    let fluct_hist = read_histogram(&dir.join("hist_fluct.csv"))?;
    let fluct_overlay = read_two_column(&dir.join("overlay_fluct.csv"), 0, 1)?;
    for (name, log_y) in [("fluct_semilog.svg", true), ("fluct_linear.svg", false)] {
        write_file(
            &dir.join(name),
            &Figure::new(
                &format!("fluctuation collapse ({label})"),
                "normalized fluctuation",
                "density",
                log_y,
            )
            .steps(fluct_hist.clone())
            .line(fluct_overlay.clone())
            .render(),
        )?;
    }

    let ret_hist = read_histogram(&dir.join("hist_ret.csv"))?;
    let ret_overlay = read_two_column(&dir.join("overlay_ret.csv"), 0, 1)?;
    for (name, log_y) in [("ret_semilog.svg", true), ("ret_linear.svg", false)] {
        write_file(
            &dir.join(name),
            &Figure::new(
                &format!("return collapse ({label})"),
                "return magnitude",
                "density",
                log_y,
            )
            .steps(ret_hist.clone())
            .line(ret_overlay.clone())
            .render(),
        )?;
    }
    Ok(())
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: i + 1,
                    reason: format!("bad float '{cell}' in {}", path.display()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn read_two_column(path: &Path, x_col: usize, y_col: usize) -> Result<Vec<(f64, f64)>> {
    read_csv_rows(path)?
        .into_iter()
        .map(|row| {
            let x = *row.get(x_col).ok_or_else(|| Error::Parse {
                row: 0,
                reason: format!("missing column {x_col} in {}", path.display()),
            })?;
            let y = *row.get(y_col).ok_or_else(|| Error::Parse {
                row: 0,
                reason: format!("missing column {y_col} in {}", path.display()),
            })?;
            Ok((x, y))
        })
        .collect()
}

/// Histogram CSV as step points: (lo_i, density_i) plus a closing
/// (hi_last, density_last).
fn read_histogram(path: &Path) -> Result<Vec<(f64, f64)>> {
    let rows = read_csv_rows(path)?;
    let mut points = Vec::with_capacity(rows.len() + 1);
    for row in &rows {
        if row.len() < 3 {
            return Err(Error::Parse {
                row: 0,
                reason: format!("histogram rows need 3 columns in {}", path.display()),
            });
        }
        points.push((row[0], row[2]));
    }
    if let Some(last) = rows.last() {
        points.push((last[1], last[2]));
    }
    Ok(points)
}
