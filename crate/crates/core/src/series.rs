//! Core data model and file ingestion for both data modes.
//!
//! Two observables are supported: time-tagged events (integer ticks on a
//! span of `M` ticks, at most one event per tick) and evenly sampled values
//! with per-sample Gaussian noise scales. A third record type,
//! [`WeightedDatum`], carries measurements that average an underlying
//! signal through a weight function; it feeds the block-fitting module.
//!
//! All types are immutable after construction and safe to share across
//! threads.

use std::io::BufRead;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the even-spacing check on sampled-file time columns.
const SPACING_RTOL: f64 = 1e-9;

/// Tabulated weights are renormalized on load when their trapezoid mass is
/// within this fraction of unity, and rejected otherwise.
const TABULATED_MASS_SLACK: f64 = 0.01;

/// Event ticks on `[0, M)`, strictly increasing; at most one event per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSeries {
    ticks: Vec<usize>,
    span_m: usize,
}

impl EventSeries {
    /// Build a series, checking ordering and range.
    pub fn new(ticks: Vec<usize>, span_m: usize) -> Result<Self> {
        if span_m == 0 {
            return Err(Error::validation("span M must be at least 1"));
        }
        for pair in ticks.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::validation(format!(
                    "duplicate tick {} (at most one event per tick)",
                    pair[0]
                )));
            }
            if pair[0] > pair[1] {
                return Err(Error::validation(format!(
                    "ticks not increasing: {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        if let Some(&last) = ticks.last() {
            if last >= span_m {
                return Err(Error::validation(format!(
                    "tick {last} outside span [0, {span_m})"
                )));
            }
        }
        Ok(EventSeries { ticks, span_m })
    }

    pub fn ticks(&self) -> &[usize] {
        &self.ticks
    }

    /// Total observation length in ticks.
    pub fn span_m(&self) -> usize {
        self.span_m
    }

    /// Number of events.
    pub fn count(&self) -> usize {
        self.ticks.len()
    }
}

/// Dense 0/1 representation of an [`EventSeries`] over its full span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorVector {
    bits: Vec<u8>,
}

impl IndicatorVector {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::validation("indicator entries must be 0 or 1"));
        }
        Ok(IndicatorVector { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Positions of the set bits, in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(m, _)| m)
            .collect()
    }

    /// Entries widened to `f64`, as consumed by the correlation routines.
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }
}

/// Expand an event series into its indicator vector.
pub fn to_indicator(events: &EventSeries) -> IndicatorVector {
    let mut bits = vec![0u8; events.span_m()];
    for &tick in events.ticks() {
        bits[tick] = 1;
    }
    IndicatorVector { bits }
}

/// Evenly sampled values with per-sample noise scales.
///
/// `dt` is metadata: all lag arithmetic works in sample units.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeries {
    values: Vec<f64>,
    sigmas: Vec<f64>,
    dt: f64,
}

impl SampledSeries {
    pub fn new(values: Vec<f64>, sigmas: Vec<f64>, dt: f64) -> Result<Self> {
        if values.len() != sigmas.len() {
            return Err(Error::validation(format!(
                "values ({}) and sigmas ({}) differ in length",
                values.len(),
                sigmas.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::validation("sampled series must be non-empty"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation("dt must be positive and finite"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation(format!("non-finite sample value {v}")));
        }
        if let Some((i, s)) = sigmas
            .iter()
            .enumerate()
            .find(|(_, s)| !(**s > 0.0) || !s.is_finite())
        {
            return Err(Error::validation(format!(
                "sigma must be positive and finite, got {s} at row {i}"
            )));
        }
        Ok(SampledSeries { values, sigmas, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every noise scale equals the first one exactly.
    pub fn has_constant_sigma(&self) -> bool {
        self.sigmas.windows(2).all(|w| w[0] == w[1])
    }
}

/// Kernel through which a weighted measurement averages the signal.
///
/// Every variant integrates to one over its support; tabulated kernels are
/// renormalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    /// Point measurement at `center`.
    Delta { center: f64 },
    /// Uniform average over `[lo, hi]`.
    Boxcar { lo: f64, hi: f64 },
    /// Normal kernel with standard deviation `width`.
    Gaussian { center: f64, width: f64 },
    /// Piecewise-linear density through `(abscissae[i], densities[i])`.
    Tabulated {
        abscissae: Vec<f64>,
        densities: Vec<f64>,
    },
}

impl WeightFunction {
    pub fn delta(center: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::validation("delta center must be finite"));
        }
        Ok(WeightFunction::Delta { center })
    }

    pub fn boxcar(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!(
                "boxcar requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(WeightFunction::Boxcar { lo, hi })
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() || !width.is_finite() {
            return Err(Error::validation(format!(
                "gaussian requires positive width, got {width}"
            )));
        }
        Ok(WeightFunction::Gaussian { center, width })
    }

    /// Build a tabulated kernel, renormalizing when the trapezoid mass is
    /// within 1% of unity and rejecting otherwise.
    pub fn tabulated(abscissae: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if abscissae.len() != densities.len() || abscissae.len() < 2 {
            return Err(Error::validation(
                "tabulated weight needs at least two (abscissa, density) pairs of equal length",
            ));
        }
        if abscissae.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation(
                "tabulated abscissae must be strictly increasing",
            ));
        }
        if densities.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::validation(
                "tabulated densities must be non-negative and finite",
            ));
        }
        let mass = trapezoid_mass(&abscissae, &densities);
        if (mass - 1.0).abs() > TABULATED_MASS_SLACK {
            return Err(Error::validation(format!(
                "tabulated weight mass {mass:.6} deviates from 1 by more than 1%"
            )));
        }
        let densities = densities.iter().map(|d| d / mass).collect();
        Ok(WeightFunction::Tabulated {
            abscissae,
            densities,
        })
    }

    /// Re-run constructor validation; used after deserializing.
    pub fn validated(self) -> Result<Self> {
        match self {
            WeightFunction::Delta { center } => WeightFunction::delta(center),
            WeightFunction::Boxcar { lo, hi } => WeightFunction::boxcar(lo, hi),
            WeightFunction::Gaussian { center, width } => WeightFunction::gaussian(center, width),
            WeightFunction::Tabulated {
                abscissae,
                densities,
            } => WeightFunction::tabulated(abscissae, densities),
        }
    }

    /// Nominal position of the measurement: the kernel's center of mass.
    pub fn nominal_position(&self) -> f64 {
        match self {
            WeightFunction::Delta { center } => *center,
            WeightFunction::Boxcar { lo, hi } => 0.5 * (lo + hi),
            WeightFunction::Gaussian { center, .. } => *center,
            WeightFunction::Tabulated {
                abscissae,
                densities,
            } => {
                // centroid of the piecewise-linear density
                let mut num = 0.0;
                for w in abscissae.windows(2).zip(densities.windows(2)) {
                    let (xs, ds) = w;
                    let h = xs[1] - xs[0];
                    // ∫ x d(x) dx over one linear segment
                    num += h * (xs[0] * (2.0 * ds[0] + ds[1]) + xs[1] * (ds[0] + 2.0 * ds[1])) / 6.0;
                }
                num
            }
        }
    }
}

fn trapezoid_mass(xs: &[f64], ds: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ds.windows(2))
        .map(|(x, d)| 0.5 * (d[0] + d[1]) * (x[1] - x[0]))
        .sum()
}

/// One weighted-integral measurement: value, nominal position, noise scale,
/// and the averaging kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDatum {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub weight: WeightFunction,
}

impl WeightedDatum {
    pub fn new(x: f64, y: f64, sigma: f64, weight: WeightFunction) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::validation(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::validation("x and y must be finite"));
        }
        Ok(WeightedDatum {
            x,
            y,
            sigma,
            weight,
        })
    }
}

/// Input format accepted by [`load_events`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    /// One integer per line, `#`-prefixed comments, optional `# M=<int>` header.
    Lines,
    /// CSV with a single `tick` column; the span comes from `m_flag`.
    Csv,
}

/// Read an event file. The span `M` must come from a `# M=<int>` header
/// line or from `m_flag`; when both are present they must agree.
pub fn load_events(
    reader: impl BufRead,
    format: EventFormat,
    m_flag: Option<usize>,
) -> Result<EventSeries> {
    let mut ticks: Vec<i64> = Vec::new();
    let mut m_header: Option<usize> = None;
    let mut saw_column = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text.starts_with('#') {
            if let Some(rest) = text.trim_start_matches('#').trim().strip_prefix("M=") {
                let m: usize = rest.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad span header {text:?}"),
                })?;
                m_header = Some(m);
            }
            continue;
        }
        if format == EventFormat::Csv && !saw_column {
            saw_column = true;
            if text.eq_ignore_ascii_case("tick") {
                continue;
            }
        }
        let tick: i64 = text.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("expected an integer tick, got {text:?}"),
        })?;
        if tick < 0 {
            return Err(Error::validation(format!(
                "line {lineno}: negative tick {tick}"
            )));
        }
        if let Some(&prev) = ticks.last() {
            if tick == prev {
                return Err(Error::validation(format!(
                    "line {lineno}: duplicate tick {tick} (at most one event per tick)"
                )));
            }
            if tick < prev {
                return Err(Error::validation(format!(
                    "line {lineno}: tick {tick} out of order after {prev}"
                )));
            }
        }
        ticks.push(tick);
    }
    let span_m = match (m_header, m_flag) {
        (Some(h), Some(f)) if h != f => {
            return Err(Error::validation(format!(
                "span M given twice and inconsistent: header {h}, flag {f}"
            )))
        }
        (Some(h), _) => h,
        (None, Some(f)) => f,
        (None, None) => {
            return Err(Error::validation(
                "span M missing: add a '# M=<int>' header or pass --m",
            ))
        }
    };
    EventSeries::new(ticks.into_iter().map(|t| t as usize).collect(), span_m)
}

/// Write an event series in the line format with its `# M=` header.
pub fn write_events(events: &EventSeries, mut w: impl Write) -> Result<()> {
    writeln!(w, "# M={}", events.span_m())?;
    for tick in events.ticks() {
        writeln!(w, "{tick}")?;
    }
    Ok(())
}

/// Read a `t,y,sigma` CSV. The time column must be evenly spaced within
/// 1e-9 relative; the inferred spacing becomes `dt`.
pub fn load_sampled(reader: impl std::io::Read) -> Result<SampledSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    {
        let headers = rdr.headers().map_err(csv_err)?;
        let expect = ["t", "y", "sigma"];
        let got: Vec<&str> = headers.iter().collect();
        if got != expect {
            return Err(Error::validation(format!(
                "sampled CSV header must be t,y,sigma, got {}",
                got.join(",")
            )));
        }
    }
    let mut ts = Vec::new();
    let mut values = Vec::new();
    let mut sigmas = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = idx + 2; // 1-based, after the header
        let field = |i: usize, name: &str| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| Error::Parse {
                    line: row,
                    message: format!("missing {name} column"),
                })?
                .parse::<f64>()
                .map_err(|_| Error::Parse {
                    line: row,
                    message: format!("bad {name} value {:?}", record.get(i).unwrap_or("")),
                })
        };
        ts.push(field(0, "t")?);
        values.push(field(1, "y")?);
        sigmas.push(field(2, "sigma")?);
    }
    if ts.len() < 2 {
        return Err(Error::validation(
            "sampled CSV needs at least two rows to infer the spacing",
        ));
    }
    let dt = ts[1] - ts[0];
    if !(dt > 0.0) {
        return Err(Error::validation(format!(
            "time column must be increasing, first step is {dt}"
        )));
    }
    let mut max_dev: f64 = 0.0;
    for w in ts.windows(2) {
        max_dev = max_dev.max(((w[1] - w[0]) - dt).abs());
    }
    if max_dev > SPACING_RTOL * dt.abs() {
        return Err(Error::validation(format!(
            "time column not evenly spaced: max deviation {max_dev:.3e} exceeds {:.0e} of dt={dt}",
            SPACING_RTOL
        )));
    }
    SampledSeries::new(values, sigmas, dt)
}

/// Write a series as `t,y,sigma` CSV with `t = i * dt`.
pub fn write_sampled(series: &SampledSeries, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "y", "sigma"]).map_err(csv_err)?;
    for (i, (v, s)) in series.values().iter().zip(series.sigmas()).enumerate() {
        wtr.serialize((i as f64 * series.dt(), v, s)).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TabulatedSidecar {
    abscissae: Vec<f64>,
    densities: Vec<f64>,
}

/// Read a weighted-datum CSV (`x,y,sigma,wkind,w1,w2`). Tabulated kernels
/// name a sidecar JSON file in `w1`, resolved relative to the CSV's parent.
pub fn load_weighted(path: &Path) -> Result<Vec<WeightedDatum>> {
    let file = std::fs::File::open(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    {
        let headers = rdr.headers().map_err(csv_err)?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["x", "y", "sigma", "wkind", "w1", "w2"] {
            return Err(Error::validation(format!(
                "weighted CSV header must be x,y,sigma,wkind,w1,w2, got {}",
                got.join(",")
            )));
        }
    }
    let mut data = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = idx + 2;
        let get = |i: usize| record.get(i).unwrap_or("").to_string();
        let num = |i: usize, name: &str| -> Result<f64> {
            record
                .get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| Error::Parse {
                    line: row,
                    message: format!("bad {name} value {:?}", record.get(i).unwrap_or("")),
                })
        };
        let weight = match get(3).as_str() {
            "delta" => WeightFunction::delta(num(4, "w1")?)?,
            "boxcar" => WeightFunction::boxcar(num(4, "w1")?, num(5, "w2")?)?,
            "gaussian" => WeightFunction::gaussian(num(4, "w1")?, num(5, "w2")?)?,
            "tabulated" => {
                let sidecar_path = base.join(get(4));
                let text = std::fs::read_to_string(&sidecar_path)?;
                let sidecar: TabulatedSidecar =
                    serde_json::from_str(&text).map_err(|e| Error::Parse {
                        line: row,
                        message: format!("bad sidecar {}: {e}", sidecar_path.display()),
                    })?;
                WeightFunction::tabulated(sidecar.abscissae, sidecar.densities)?
            }
            other => {
                return Err(Error::Parse {
                    line: row,
                    message: format!("unknown weight kind {other:?}"),
                })
            }
        };
        data.push(WeightedDatum::new(
            num(0, "x")?,
            num(1, "y")?,
            num(2, "sigma")?,
            weight,
        )?);
    }
    Ok(data)
}

/// Write weighted data next to any tabulated sidecars under `dir`.
pub fn write_weighted(data: &[WeightedDatum], dir: &Path, stem: &str) -> Result<std::path::PathBuf> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut wtr = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    wtr.write_record(["x", "y", "sigma", "wkind", "w1", "w2"])
        .map_err(csv_err)?;
    for (n, d) in data.iter().enumerate() {
        let (kind, w1, w2) = match &d.weight {
            WeightFunction::Delta { center } => ("delta", center.to_string(), String::new()),
            WeightFunction::Boxcar { lo, hi } => ("boxcar", lo.to_string(), hi.to_string()),
            WeightFunction::Gaussian { center, width } => {
                ("gaussian", center.to_string(), width.to_string())
            }
            WeightFunction::Tabulated {
                abscissae,
                densities,
            } => {
                let name = format!("{stem}_weight_{n}.json");
                let sidecar = TabulatedSidecar {
                    abscissae: abscissae.clone(),
                    densities: densities.clone(),
                };
                std::fs::write(dir.join(&name), serde_json::to_string_pretty(&sidecar)?)?;
                ("tabulated", name, String::new())
            }
        };
        wtr.write_record([
            d.x.to_string(),
            d.y.to_string(),
            d.sigma.to_string(),
            kind.to_string(),
            w1,
            w2,
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(csv_path)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv error: {other:?}")),
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(format!("json error: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn load_events_basic() {
        let e = load_events(Cursor::new("2\n5\n9\n"), EventFormat::Lines, Some(10)).unwrap();
        assert_eq!(e.ticks(), &[2, 5, 9]);
        assert_eq!(e.span_m(), 10);
    }

    #[test]
    fn load_events_empty_is_valid() {
        let e = load_events(Cursor::new(""), EventFormat::Lines, Some(10)).unwrap();
        assert_eq!(e.count(), 0);
        assert_eq!(e.span_m(), 10);
    }

    #[test]
    fn load_events_duplicate_rejected() {
        let err = load_events(Cursor::new("5\n5\n"), EventFormat::Lines, Some(10)).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn load_events_unsorted_names_line() {
        let err = load_events(Cursor::new("7\n3\n"), EventFormat::Lines, Some(10)).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn load_events_out_of_range() {
        let err = load_events(Cursor::new("10\n"), EventFormat::Lines, Some(10)).unwrap_err();
        assert!(err.to_string().contains("outside span"), "{err}");
    }

    #[test]
    fn load_events_non_integer() {
        let err = load_events(Cursor::new("2.5\n"), EventFormat::Lines, Some(10)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn load_events_header_supplies_m() {
        let e = load_events(Cursor::new("# M=12\n3\n"), EventFormat::Lines, None).unwrap();
        assert_eq!(e.span_m(), 12);
        let err = load_events(Cursor::new("# M=12\n3\n"), EventFormat::Lines, Some(10)).unwrap_err();
        assert!(err.to_string().contains("inconsistent"), "{err}");
        let err = load_events(Cursor::new("3\n"), EventFormat::Lines, None).unwrap_err();
        assert!(err.to_string().contains("span M missing"), "{err}");
    }

    #[test]
    fn indicator_examples() {
        let e = EventSeries::new(vec![0], 3).unwrap();
        assert_eq!(to_indicator(&e).bits(), &[1, 0, 0]);
        let e = EventSeries::new(vec![], 2).unwrap();
        assert_eq!(to_indicator(&e).bits(), &[0, 0]);
        let e = EventSeries::new(vec![1, 2], 4).unwrap();
        assert_eq!(to_indicator(&e).bits(), &[0, 1, 1, 0]);
    }

    #[test]
    fn indicator_round_trip() {
        let e = EventSeries::new(vec![1, 4, 5, 9], 11).unwrap();
        let ind = to_indicator(&e);
        assert_eq!(ind.positions(), e.ticks());
        assert_eq!(ind.count_ones(), e.count());
    }

    #[test]
    fn load_sampled_basic() {
        let s = load_sampled(Cursor::new("t,y,sigma\n0,1.0,0.5\n1,2.0,0.5\n")).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert_eq!(s.sigmas(), &[0.5, 0.5]);
        assert_eq!(s.dt(), 1.0);
    }

    #[test]
    fn load_sampled_uneven_spacing() {
        let err =
            load_sampled(Cursor::new("t,y,sigma\n0,1,1\n1,2,1\n2.5,3,1\n")).unwrap_err();
        assert!(err.to_string().contains("not evenly spaced"), "{err}");
        assert!(err.to_string().contains("deviation"), "{err}");
    }

    #[test]
    fn load_sampled_bad_sigma() {
        let err = load_sampled(Cursor::new("t,y,sigma\n0,1,0\n1,2,1\n")).unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }

    #[test]
    fn weight_constructors_validate() {
        assert!(WeightFunction::boxcar(2.0, 1.0).is_err());
        assert!(WeightFunction::gaussian(0.0, 0.0).is_err());
        // mass 0.5 is off by 50%: rejected
        assert!(WeightFunction::tabulated(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        // mass 1.005 is within 1%: normalized to exactly 1
        let w = WeightFunction::tabulated(vec![0.0, 1.0], vec![1.005, 1.005]).unwrap();
        if let WeightFunction::Tabulated {
            abscissae,
            densities,
        } = &w
        {
            let mass = trapezoid_mass(abscissae, densities);
            assert!((mass - 1.0).abs() < 1e-12);
        } else {
            unreachable!()
        }
    }

    #[test]
    fn weighted_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("lagscope-series-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let data = vec![
            WeightedDatum::new(0.5, 1.0, 0.1, WeightFunction::delta(0.5).unwrap()).unwrap(),
            WeightedDatum::new(1.5, 2.0, 0.2, WeightFunction::boxcar(1.0, 2.0).unwrap()).unwrap(),
            WeightedDatum::new(2.5, 3.0, 0.3, WeightFunction::gaussian(2.5, 0.4).unwrap())
                .unwrap(),
            WeightedDatum::new(
                3.5,
                4.0,
                0.4,
                WeightFunction::tabulated(vec![3.0, 4.0], vec![1.0, 1.0]).unwrap(),
            )
            .unwrap(),
        ];
        let path = write_weighted(&data, &dir, "roundtrip").unwrap();
        let back = load_weighted(&path).unwrap();
        assert_eq!(back, data);
        std::fs::remove_dir_all(&dir).ok();
    }
}
