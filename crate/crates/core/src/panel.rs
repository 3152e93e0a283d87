//! Date-indexed panel of named economic series.
//!
//! Cells are `Option<f64>`: a missing observation is `None`, never a sentinel
//! number, so rolling statistics can tell "not enough data" apart from zero.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Name of the date column in every CSV the crate reads or writes.
pub const DATE_COLUMN: &str = "Date";

/// The sixteen canonical column names, in the order the data table lists them.
pub const CANONICAL_COLUMNS: [&str; 16] = [
    "Usa Pi Exp",
    "Long Term Usd Rate",
    "Short Term Usd Rate",
    "M2 Usd",
    "Ipc Usa",
    "Historical Ars Usd",
    "Argentina Net Lending Borrowing",
    "Ipc Argentina",
    "Pi Exp",
    "Long Interest",
    "Short Interest",
    "M2",
    "Gdp_argentina",
    "Gdp_usa",
    "E",
    "Embi+ARG",
];

/// Column name of an economic variable. Canonical names are matched
/// byte-for-byte; anything else is a user extension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(String);

impl VariableId {
    pub fn new(name: impl Into<String>) -> Self {
        VariableId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_canonical(&self) -> bool {
        CANONICAL_COLUMNS.contains(&self.0.as_str())
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VariableId {
    fn from(s: &str) -> Self {
        VariableId(s.to_owned())
    }
}

impl From<String> for VariableId {
    fn from(s: String) -> Self {
        VariableId(s)
    }
}

impl std::borrow::Borrow<str> for VariableId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for VariableId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn canonical_schema() -> Vec<VariableId> {
    CANONICAL_COLUMNS.iter().map(|&c| VariableId::from(c)).collect()
}

pub fn ids<S: AsRef<str>>(names: &[S]) -> Vec<VariableId> {
    names.iter().map(|n| VariableId::new(n.as_ref())).collect()
}

/// A column of observations, possibly with gaps.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Series {
    values: Vec<Option<f64>>,
}

impl Series {
    pub fn from_options(values: Vec<Option<f64>>) -> Self {
        Series { values }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Series { values: values.into_iter().map(Some).collect() }
    }

    pub fn missing(len: usize) -> Self {
        Series { values: vec![None; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Option<f64>] {
        &mut self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// All values, or `None` if any is missing.
    pub fn dense(&self) -> Option<Vec<f64>> {
        self.values.iter().copied().collect()
    }

    /// Present values only, in order.
    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().filter_map(|v| *v)
    }

    pub fn min(&self) -> Option<f64> {
        self.present().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.present().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self.present().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Series {
        Series { values: self.values.iter().map(|v| v.map(&f)).collect() }
    }

    /// Fills interior gaps with the straight line between the nearest present
    /// neighbours. The first and last entries must be present.
    pub fn linear_interpolate(&self) -> Result<Series> {
        let n = self.values.len();
        if n == 0 {
            return Ok(self.clone());
        }
        if self.values[0].is_none() || self.values[n - 1].is_none() {
            return Err(Error::LeadingOrTrailingGap);
        }
        let mut out = self.values.clone();
        let mut last_present = 0usize;
        for i in 1..n {
            if let Some(right) = self.values[i] {
                let gap = i - last_present;
                if gap > 1 {
                    let left = self.values[last_present].unwrap();
                    for (k, slot) in out[last_present + 1..i].iter_mut().enumerate() {
                        let frac = (k + 1) as f64 / gap as f64;
                        *slot = Some(left + (right - left) * frac);
                    }
                }
                last_present = i;
            }
        }
        Ok(Series { values: out })
    }

    /// First difference applied `order` times. A gap on either side of a
    /// difference yields a gap.
    pub fn difference(&self, order: usize) -> Result<Series> {
        if order == 0 {
            return Err(Error::InvalidArgument("difference order must be positive".into()));
        }
        if self.values.len() <= order {
            return Err(Error::SeriesTooShort { needed: order, got: self.values.len() });
        }
        let mut cur = self.values.clone();
        for _ in 0..order {
            cur = cur
                .windows(2)
                .map(|w| match (w[0], w[1]) {
                    (Some(a), Some(b)) => Some(b - a),
                    _ => None,
                })
                .collect();
        }
        Ok(Series { values: cur })
    }

    /// Trailing-window mean. Index `t` averages the present values among the
    /// last `min(window, t + 1)` entries when at least `min_periods` are present.
    pub fn rolling_mean(&self, window: usize, min_periods: usize) -> Series {
        assert!(window > 0 && min_periods > 0 && min_periods <= window);
        let values = (0..self.values.len())
            .map(|t| {
                let start = (t + 1).saturating_sub(window);
                let (sum, n) = self.values[start..=t]
                    .iter()
                    .filter_map(|v| *v)
                    .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                (n >= min_periods).then(|| sum / n as f64)
            })
            .collect();
        Series { values }
    }

    /// Trailing-window Pearson correlation with `other`, over the pairs where
    /// both values are present. Missing when fewer than `min_periods` pairs are
    /// available or when either window has zero variance.
    pub fn rolling_corr(&self, other: &Series, window: usize, min_periods: usize) -> Result<Series> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "rolling_corr on series of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        if window == 0 || min_periods == 0 || min_periods > window {
            return Err(Error::InvalidArgument(format!(
                "rolling window {window} with min_periods {min_periods}"
            )));
        }
        let values = (0..self.len())
            .map(|t| {
                let start = (t + 1).saturating_sub(window);
                let pairs: Vec<(f64, f64)> = (start..=t)
                    .filter_map(|i| Some((self.values[i]?, other.values[i]?)))
                    .collect();
                if pairs.len() < min_periods {
                    return None;
                }
                pearson(&pairs)
            })
            .collect();
        Ok(Series { values })
    }

    /// Affine map of this series' range onto the range of `target`.
    ///
    /// Evaluated as `u·max(t) + (1 − u)·min(t)` with `u` the position within the
    /// source range, so the endpoints land exactly on the target's extremes.
    pub fn minmax_rescale(&self, target: &Series) -> Result<Series> {
        let (smin, smax) = match (self.min(), self.max()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::DegenerateRange),
        };
        if smax <= smin {
            return Err(Error::DegenerateRange);
        }
        let (tmin, tmax) = match (target.min(), target.max()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidArgument("rescale target has no values".into())),
        };
        let span = smax - smin;
        Ok(self.map(|s| {
            let u = (s - smin) / span;
            (u * tmax + (1.0 - u) * tmin).clamp(tmin, tmax)
        }))
    }
}

impl From<Vec<f64>> for Series {
    fn from(v: Vec<f64>) -> Self {
        Series::from_values(v)
    }
}

impl FromIterator<Option<f64>> for Series {
    fn from_iter<I: IntoIterator<Item = Option<f64>>>(iter: I) -> Self {
        Series { values: iter.into_iter().collect() }
    }
}

/// Sample Pearson correlation; `None` for fewer than two points or a constant side.
pub(crate) fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Date-indexed table of named series.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    columns: IndexMap<VariableId, Series>,
}

impl Panel {
    /// Builds a panel, checking that dates strictly increase and that every
    /// column has one entry per date.
    pub fn new(dates: Vec<NaiveDate>, columns: IndexMap<VariableId, Series>) -> Result<Self> {
        if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(if dates[i + 1] == dates[i] {
                Error::DuplicateDate(dates[i])
            } else {
                Error::UnorderedDates(i + 1)
            });
        }
        for (name, s) in &columns {
            if s.len() != dates.len() {
                return Err(Error::LengthMismatch {
                    column: name.to_string(),
                    expected: dates.len(),
                    got: s.len(),
                });
            }
        }
        Ok(Panel { dates, columns })
    }

    /// Convenience constructor from fully observed columns.
    pub fn from_columns<S: AsRef<str>>(dates: Vec<NaiveDate>, columns: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let map = columns
            .into_iter()
            .map(|(n, v)| (VariableId::new(n.as_ref()), Series::from_values(v)))
            .collect();
        Panel::new(dates, map)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &VariableId> {
        self.columns.keys()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&VariableId, &Series)> {
        self.columns.iter()
    }

    pub fn has(&self, name: &str) -> bool {
        self.columns.contains_key(&VariableId::from(name))
    }

    pub fn column(&self, name: &str) -> Result<&Series> {
        self.columns
            .get(&VariableId::from(name))
            .ok_or_else(|| Error::UnknownVariable(name.to_owned()))
    }

    pub fn column_mut(&mut self, name: &str) -> Result<&mut Series> {
        self.columns
            .get_mut(&VariableId::from(name))
            .ok_or_else(|| Error::UnknownVariable(name.to_owned()))
    }

    /// Column values with no gaps allowed.
    pub fn dense_column(&self, name: &str) -> Result<Vec<f64>> {
        let s = self.column(name)?;
        s.values()
            .iter()
            .zip(&self.dates)
            .map(|(v, d)| v.ok_or_else(|| Error::MissingValue { column: name.to_owned(), date: *d }))
            .collect()
    }

    /// `len × names.len()` matrix of the named columns, gaps not allowed.
    pub fn dense_matrix<S: AsRef<str>>(&self, names: &[S]) -> Result<DMatrix<f64>> {
        let cols = names
            .iter()
            .map(|n| self.dense_column(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(self.len(), names.len(), |r, c| cols[c][r]))
    }

    /// Adds or replaces a column.
    pub fn set_column(&mut self, name: impl Into<VariableId>, series: Series) -> Result<()> {
        let name = name.into();
        if series.len() != self.len() {
            return Err(Error::LengthMismatch {
                column: name.to_string(),
                expected: self.len(),
                got: series.len(),
            });
        }
        self.columns.insert(name, series);
        Ok(())
    }

    /// Sub-panel holding only `names`, in the given order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Panel> {
        let mut columns = IndexMap::with_capacity(names.len());
        for n in names {
            let s = self.column(n.as_ref())?;
            columns.insert(VariableId::new(n.as_ref()), s.clone());
        }
        Ok(Panel { dates: self.dates.clone(), columns })
    }

    /// Rows `range` of every column.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Panel {
        Panel {
            dates: self.dates[range.clone()].to_vec(),
            columns: self
                .columns
                .iter()
                .map(|(k, s)| (k.clone(), Series::from_options(s.values()[range.clone()].to_vec())))
                .collect(),
        }
    }

    /// Rows whose date lies in `[start, end]`; either bound may be open.
    pub fn filter_dates(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Panel {
        let keep: Vec<bool> = self
            .dates
            .iter()
            .map(|d| start.is_none_or(|s| *d >= s) && end.is_none_or(|e| *d <= e))
            .collect();
        self.filter_rows(&keep)
    }

    fn filter_rows(&self, keep: &[bool]) -> Panel {
        let pick = |v: &[Option<f64>]| -> Series {
            v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect()
        };
        Panel {
            dates: self.dates.iter().zip(keep).filter(|(_, k)| **k).map(|(d, _)| *d).collect(),
            columns: self.columns.iter().map(|(k, s)| (k.clone(), pick(s.values()))).collect(),
        }
    }

    /// Drops every row that has a gap in any column.
    pub fn drop_incomplete_rows(&self) -> Panel {
        let keep: Vec<bool> = (0..self.len())
            .map(|i| self.columns.values().all(|s| s.values()[i].is_some()))
            .collect();
        self.filter_rows(&keep)
    }

    /// Interpolates interior gaps column by column, then drops rows that still
    /// have gaps (leading or trailing ones). The result has no missing values.
    pub fn clean(&self) -> Panel {
        let mut out = self.clone();
        for s in out.columns.values_mut() {
            let first = s.values().iter().position(Option::is_some);
            let last = s.values().iter().rposition(Option::is_some);
            if let (Some(a), Some(b)) = (first, last) {
                let inner = Series::from_options(s.values()[a..=b].to_vec())
                    .linear_interpolate()
                    .expect("endpoints are present");
                s.values_mut()[a..=b].copy_from_slice(inner.values());
            }
        }
        out.drop_incomplete_rows()
    }

    pub fn is_complete(&self) -> bool {
        self.columns.values().all(Series::is_complete)
    }

    /// Reads a CSV file keeping only the `schema` columns, in schema order.
    pub fn load_csv(path: impl AsRef<Path>, schema: &[VariableId]) -> Result<Panel> {
        let file = std::fs::File::open(path)?;
        Panel::read_csv(file, Some(schema))
    }

    /// Reads a CSV file keeping every non-date column, in header order.
    pub fn load_csv_all(path: impl AsRef<Path>) -> Result<Panel> {
        let file = std::fs::File::open(path)?;
        Panel::read_csv(file, None)
    }

    /// Parses CSV text: header row, a `Date` column, empty cell = missing.
    /// Rows are sorted ascending by date.
    pub fn read_csv<R: Read>(reader: R, schema: Option<&[VariableId]>) -> Result<Panel> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_owned()).collect();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let date_idx = find(DATE_COLUMN).ok_or_else(|| Error::MissingColumn(DATE_COLUMN.into()))?;
        let wanted: Vec<(VariableId, usize)> = match schema {
            Some(schema) => schema
                .iter()
                .map(|v| find(v.as_str()).map(|i| (v.clone(), i)).ok_or_else(|| Error::MissingColumn(v.to_string())))
                .collect::<Result<_>>()?,
            None => headers
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != date_idx)
                .map(|(i, h)| (VariableId::new(h.clone()), i))
                .collect(),
        };

        let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record.position().map_or(k + 2, |p| p.line() as usize);
            let raw_date = record.get(date_idx).unwrap_or("");
            let date = parse_date(raw_date).ok_or_else(|| Error::UnparseableValue {
                row,
                column: DATE_COLUMN.into(),
                value: raw_date.to_owned(),
            })?;
            let values = wanted
                .iter()
                .map(|(name, i)| {
                    let cell = record.get(*i).unwrap_or("").trim();
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| Error::UnparseableValue {
                            row,
                            column: name.to_string(),
                            value: cell.to_owned(),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((date, values));
        }
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateDate(w[0].0));
        }

        let dates = rows.iter().map(|r| r.0).collect();
        let columns = wanted
            .iter()
            .enumerate()
            .map(|(c, (name, _))| (name.clone(), rows.iter().map(|r| r.1[c]).collect()))
            .collect();
        Panel::new(dates, columns)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(file)
    }

    /// Writes `Date` plus every column. Values use the shortest representation
    /// that parses back to the same `f64`.
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![DATE_COLUMN.to_owned()];
        header.extend(self.columns.keys().map(|k| k.to_string()));
        w.write_record(&header)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut rec = vec![d.format("%Y-%m-%d").to_string()];
            rec.extend(self.columns.values().map(|s| format_cell(s.values()[i])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn format_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `YYYY-MM-DD`, optionally followed by a time part that is ignored.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let head = raw.get(..10)?;
    let rest = &raw[10..];
    if !(rest.is_empty() || rest.starts_with(' ') || rest.starts_with('T')) {
        return None;
    }
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}
