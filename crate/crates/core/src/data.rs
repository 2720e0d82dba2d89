//! Price and holiday ingestion, returns, calendar design matrix and
//! descriptive statistics.
//!
//! File formats:
//! - prices: CSV with header `date,close`, ISO-8601 dates, one row per
//!   consecutive calendar day;
//! - holidays: one ISO-8601 date per line, `#` starts a comment;
//! - returns: CSV `date,return`;
//! - design: CSV `date,<label>…` with one row per return date plus the
//!   trailing day.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::scalar::Scalar;
use crate::format_float;

/// Countries whose holidays enter the design, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Country {
    #[serde(rename = "JP")]
    Japan,
    #[serde(rename = "CN")]
    China,
    #[serde(rename = "DE")]
    Germany,
    #[serde(rename = "US")]
    UnitedStates,
}

impl Country {
    pub const ALL: [Country; 4] = [
        Country::Japan,
        Country::China,
        Country::Germany,
        Country::UnitedStates,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Country::Japan => "JP",
            Country::China => "CN",
            Country::Germany => "DE",
            Country::UnitedStates => "US",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Country::Japan => "Japan",
            Country::China => "China",
            Country::Germany => "Germany",
            Country::UnitedStates => "the United States",
        }
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Country {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "JP" => Ok(Country::Japan),
            "CN" => Ok(Country::China),
            "DE" => Ok(Country::Germany),
            "US" => Ok(Country::UnitedStates),
            other => Err(Error::Calendar(format!("unknown country code `{other}`"))),
        }
    }
}

/// Daily closing prices on consecutive calendar days.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::InvalidDataset(format!(
                "{} dates for {} prices",
                dates.len(),
                prices.len()
            )));
        }
        check_consecutive(&dates)?;
        for (d, p) in dates.iter().zip(&prices) {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidDataset(format!("price {p} on {d} is not positive")));
            }
        }
        Ok(Self { dates, prices })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Dates of the returns, i.e. every date but the first.
    pub fn return_dates(&self) -> &[NaiveDate] {
        self.dates.get(1..).unwrap_or(&[])
    }

    /// Rebuilds prices from percent log returns.
    pub fn from_returns(start: NaiveDate, initial_price: f64, returns: &[f64]) -> Result<Self> {
        let mut prices = Vec::with_capacity(returns.len() + 1);
        prices.push(initial_price);
        let mut log_p = initial_price.ln();
        for y in returns {
            log_p += y / 100.0;
            prices.push(log_p.exp());
        }
        let dates = consecutive_dates(start, prices.len())?;
        Self::new(dates, prices)
    }
}

fn check_consecutive(dates: &[NaiveDate]) -> Result<()> {
    for w in dates.windows(2) {
        if w[0].checked_add_days(Days::new(1)) != Some(w[1]) {
            return Err(Error::Calendar(format!(
                "dates are not consecutive days: {} followed by {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `n` consecutive days starting at `start`.
pub fn consecutive_dates(start: NaiveDate, n: usize) -> Result<Vec<NaiveDate>> {
    let dates: Vec<NaiveDate> = start.iter_days().take(n).collect();
    if dates.len() != n {
        return Err(Error::Calendar("date range overflows the calendar".into()));
    }
    Ok(dates)
}

/// Holiday dates of one country.
#[derive(Debug, Clone, PartialEq)]
pub struct HolidayCalendar {
    pub country: Country,
    pub holidays: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn new(country: Country, holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self {
            country,
            holidays: holidays.into_iter().collect(),
        }
    }

    pub fn empty(country: Country) -> Self {
        Self::new(country, [])
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.holidays.contains(&date)
    }

    /// Keeps only holidays within a day of `[first, last]`.
    pub fn restricted_to(&self, first: NaiveDate, last: NaiveDate) -> Self {
        let lo = first.pred_opt().unwrap_or(first);
        let hi = last.succ_opt().unwrap_or(last);
        Self {
            country: self.country,
            holidays: self.holidays.range(lo..=hi).copied().collect(),
        }
    }
}

/// Percent log returns `100·(ln P_t − ln P_{t−1})`.
pub fn compute_returns(series: &PriceSeries) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InvalidDataset("need at least two prices".into()));
    }
    for (d, p) in series.dates.iter().zip(&series.prices) {
        if !(*p > 0.0) {
            return Err(Error::InvalidDataset(format!("non-positive price on {d}")));
        }
    }
    Ok(series
        .prices
        .windows(2)
        .map(|w| 100.0 * (w[1].ln() - w[0].ln()))
        .collect())
}

/// Day-of-week columns; Wednesday is the omitted baseline.
pub const WEEKDAY_COLUMNS: [Weekday; 6] = [
    Weekday::Sun,
    Weekday::Mon,
    Weekday::Tue,
    Weekday::Thu,
    Weekday::Fri,
    Weekday::Sat,
];

/// Holiday-family indicator classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HolidayClass {
    PreHoliday,
    Holiday,
    PostHoliday,
}

impl HolidayClass {
    pub const ALL: [HolidayClass; 3] = [
        HolidayClass::PreHoliday,
        HolidayClass::Holiday,
        HolidayClass::PostHoliday,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            HolidayClass::PreHoliday => "pre",
            HolidayClass::Holiday => "hol",
            HolidayClass::PostHoliday => "post",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            HolidayClass::PreHoliday => "Pre-holiday",
            HolidayClass::Holiday => "Holiday",
            HolidayClass::PostHoliday => "Post-holiday",
        }
    }
}

fn weekday_name(d: Weekday) -> &'static str {
    match d {
        Weekday::Sun => "Sunday",
        Weekday::Mon => "Monday",
        Weekday::Tue => "Tuesday",
        Weekday::Wed => "Wednesday",
        Weekday::Thu => "Thursday",
        Weekday::Fri => "Friday",
        Weekday::Sat => "Saturday",
    }
}

fn is_weekend(d: NaiveDate) -> bool {
    matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Design construction switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Weekend days get holiday-family indicators only when they are
    /// holidays themselves.
    pub weekend_rule: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { weekend_rule: true }
    }
}

/// Orders calendars as JP, CN, DE, US, failing on duplicates or gaps.
fn ordered_calendars(calendars: &[HolidayCalendar]) -> Result<[&HolidayCalendar; 4]> {
    if calendars.len() != 4 {
        return Err(Error::Calendar(format!(
            "expected calendars for JP, CN, DE, US; got {}",
            calendars.len()
        )));
    }
    let pick = |c: Country| -> Result<&HolidayCalendar> {
        let mut it = calendars.iter().filter(|cal| cal.country == c);
        match (it.next(), it.next()) {
            (Some(cal), None) => Ok(cal),
            (None, _) => Err(Error::Calendar(format!("missing calendar for {c}"))),
            (Some(_), Some(_)) => Err(Error::Calendar(format!("duplicate calendar for {c}"))),
        }
    };
    Ok([
        pick(Country::Japan)?,
        pick(Country::China)?,
        pick(Country::Germany)?,
        pick(Country::UnitedStates)?,
    ])
}

/// Whether `date` carries the `class` indicator of `calendar`.
pub fn holiday_indicator(
    date: NaiveDate,
    calendar: &HolidayCalendar,
    class: HolidayClass,
    options: DesignOptions,
) -> bool {
    let is_holiday = calendar.contains(date);
    if class == HolidayClass::Holiday {
        return is_holiday;
    }
    if is_holiday || (options.weekend_rule && is_weekend(date)) {
        return false;
    }
    let neighbour = match class {
        HolidayClass::PreHoliday => date.succ_opt(),
        HolidayClass::PostHoliday => date.pred_opt(),
        HolidayClass::Holiday => unreachable!(),
    };
    neighbour.is_some_and(|n| calendar.contains(n))
}

/// Column labels of the 19-column calendar design.
pub fn design_labels() -> Vec<String> {
    let mut labels = vec!["constant".to_string()];
    labels.extend(WEEKDAY_COLUMNS.iter().map(|d| weekday_name(*d).to_string()));
    for class in HolidayClass::ALL {
        for c in Country::ALL {
            labels.push(format!("{}_{}", class.prefix(), c.code()));
        }
    }
    labels
}

/// A labelled design with its row dates.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub dates: Vec<NaiveDate>,
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
}

impl DesignMatrix {
    /// Constant-only design on the given dates.
    pub fn constant(dates: Vec<NaiveDate>) -> Self {
        let n = dates.len();
        Self {
            dates,
            labels: vec!["constant".into()],
            values: DMatrix::from_element(n, 1, 1.0),
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Pairs the design with returns (one fewer row).
    pub fn into_dataset<T: Scalar>(self, returns: &[f64]) -> Result<Dataset<T>> {
        Dataset::new(
            returns.iter().map(|&y| T::lit(y)).collect(),
            self.values.map(T::lit),
            self.labels,
        )
    }
}

/// Builds the `(T+1) × 19` calendar design for consecutive `dates`.
///
/// Columns: constant; Sunday, Monday, Tuesday, Thursday, Friday, Saturday;
/// then pre-holiday, holiday and post-holiday indicators for JP, CN, DE, US.
pub fn build_design_matrix(
    dates: &[NaiveDate],
    calendars: &[HolidayCalendar],
    options: DesignOptions,
) -> Result<DesignMatrix> {
    check_consecutive(dates)?;
    let cals = ordered_calendars(calendars)?;
    let labels = design_labels();
    let mut values = DMatrix::zeros(dates.len(), labels.len());
    for (i, &date) in dates.iter().enumerate() {
        values[(i, 0)] = 1.0;
        if let Some(j) = WEEKDAY_COLUMNS.iter().position(|&d| d == date.weekday()) {
            values[(i, 1 + j)] = 1.0;
        }
        let mut col = 1 + WEEKDAY_COLUMNS.len();
        for class in HolidayClass::ALL {
            for cal in cals {
                if holiday_indicator(date, cal, class, options) {
                    values[(i, col)] = 1.0;
                }
                col += 1;
            }
        }
    }
    Ok(DesignMatrix {
        dates: dates.to_vec(),
        labels,
        values,
    })
}

/// Return dates extended by the day after the last one.
pub fn design_dates(return_dates: &[NaiveDate]) -> Result<Vec<NaiveDate>> {
    let last = return_dates
        .last()
        .ok_or_else(|| Error::InvalidDataset("no return dates".into()))?;
    let next = last
        .succ_opt()
        .ok_or_else(|| Error::Calendar("date overflow".into()))?;
    let mut out = return_dates.to_vec();
    out.push(next);
    Ok(out)
}

/// Summary statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub obs: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub skew: f64,
    /// Excess kurtosis.
    pub kurt: f64,
}

/// Mean, SD (denominator `n − 1`), extremes, moment skewness and excess
/// kurtosis (central moments with denominator `n`).
pub fn descriptive_stats(values: &[f64]) -> Result<DescriptiveStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "descriptive statistics need at least 2 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(DescriptiveStats {
        obs: n,
        mean,
        sd,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        skew,
        kurt,
    })
}

/// Returns grouped by weekday, Sunday first.
pub fn slice_by_weekday(returns: &[f64], dates: &[NaiveDate]) -> Vec<(Weekday, Vec<f64>)> {
    let order = [
        Weekday::Sun,
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
    ];
    order
        .iter()
        .map(|&wd| {
            let group = returns
                .iter()
                .zip(dates)
                .filter(|(_, d)| d.weekday() == wd)
                .map(|(y, _)| *y)
                .collect();
            (wd, group)
        })
        .collect()
}

/// One (class, country) group of returns.
#[derive(Debug, Clone, PartialEq)]
pub struct HolidayGroup {
    pub class: HolidayClass,
    pub country: Country,
    pub values: Vec<f64>,
}

/// Returns grouped by holiday class and country, using the same indicator
/// logic as [`build_design_matrix`].
pub fn slice_by_holiday_class(
    returns: &[f64],
    dates: &[NaiveDate],
    calendars: &[HolidayCalendar],
    options: DesignOptions,
) -> Result<Vec<HolidayGroup>> {
    let cals = ordered_calendars(calendars)?;
    let mut out = Vec::with_capacity(12);
    for class in HolidayClass::ALL {
        for cal in cals {
            let values = returns
                .iter()
                .zip(dates)
                .filter(|(_, d)| holiday_indicator(**d, cal, class, options))
                .map(|(y, _)| *y)
                .collect();
            out.push(HolidayGroup {
                class,
                country: cal.country,
                values,
            });
        }
    }
    Ok(out)
}

/// A named row of a descriptive-statistics report.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub group: String,
    pub subgroup: String,
    /// `None` when the group has fewer than two observations.
    pub stats: Option<DescriptiveStats>,
    pub obs: usize,
}

fn stats_row(group: &str, subgroup: &str, values: &[f64]) -> StatsRow {
    StatsRow {
        group: group.to_string(),
        subgroup: subgroup.to_string(),
        stats: descriptive_stats(values).ok(),
        obs: values.len(),
    }
}

/// "All" followed by the seven weekdays.
pub fn weekday_report(returns: &[f64], dates: &[NaiveDate]) -> Vec<StatsRow> {
    let mut rows = vec![stats_row("All", "", returns)];
    for (wd, values) in slice_by_weekday(returns, dates) {
        rows.push(stats_row(weekday_name(wd), "", &values));
    }
    rows
}

/// Pre-holiday, holiday and post-holiday rows for each country.
pub fn holiday_report(
    returns: &[f64],
    dates: &[NaiveDate],
    calendars: &[HolidayCalendar],
    options: DesignOptions,
) -> Result<Vec<StatsRow>> {
    Ok(slice_by_holiday_class(returns, dates, calendars, options)?
        .into_iter()
        .map(|g| stats_row(g.class.title(), g.country.name(), &g.values))
        .collect())
}

// ---------------------------------------------------------------------------
// file I/O

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_date(path: &Path, line: usize, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| parse_error(path, line, format!("bad date `{}`: {e}", s.trim())))
}

fn parse_number(path: &Path, line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| parse_error(path, line, format!("bad number `{}`: {e}", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_error(path, line, format!("non-finite number `{}`", s.trim())));
    }
    Ok(v)
}

/// Reads a CSV whose first column is a date; returns header and rows with
/// 1-based file line numbers.
/// `(line, date, values)` for each data row.
type DatedRows = Vec<(usize, NaiveDate, Vec<f64>)>;

fn read_dated_csv(path: &Path) -> Result<(Vec<String>, DatedRows)> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header.first().map(String::as_str) != Some("date") {
        return Err(parse_error(path, 1, "first column must be `date`"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let date = parse_date(path, line, &record[0])?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| parse_number(path, line, f))
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, date, values));
    }
    Ok((header, rows))
}

/// Reads a `date,close` price file.
pub fn read_prices(path: &Path) -> Result<PriceSeries> {
    let (header, rows) = read_dated_csv(path)?;
    if header.len() != 2 || header[1] != "close" {
        return Err(parse_error(path, 1, "expected header `date,close`"));
    }
    let mut dates = Vec::with_capacity(rows.len());
    let mut prices = Vec::with_capacity(rows.len());
    for (line, date, values) in rows {
        if let Some(prev) = dates.last() {
            if Some(date) != NaiveDate::succ_opt(prev) {
                return Err(parse_error(
                    path,
                    line,
                    format!("{date} does not follow {prev} by one day"),
                ));
            }
        }
        if !(values[0] > 0.0) {
            return Err(parse_error(path, line, format!("non-positive price on {date}")));
        }
        dates.push(date);
        prices.push(values[0]);
    }
    PriceSeries::new(dates, prices)
}

/// Reads a holiday list: one date per line, `#` comments, blank lines ignored.
pub fn read_holidays(path: &Path, country: Country) -> Result<HolidayCalendar> {
    let text = read_to_string(path)?;
    let mut holidays = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        holidays.insert(parse_date(path, i + 1, content)?);
    }
    Ok(HolidayCalendar { country, holidays })
}

/// Reads a `date,return` file.
pub fn read_returns(path: &Path) -> Result<(Vec<NaiveDate>, Vec<f64>)> {
    let (header, rows) = read_dated_csv(path)?;
    if header.len() != 2 {
        return Err(parse_error(path, 1, "expected header `date,return`"));
    }
    Ok(rows.into_iter().map(|(_, d, v)| (d, v[0])).unzip())
}

/// Reads a labelled design file.
pub fn read_design(path: &Path) -> Result<DesignMatrix> {
    let (header, rows) = read_dated_csv(path)?;
    let k = header.len() - 1;
    if k == 0 {
        return Err(parse_error(path, 1, "design has no covariate columns"));
    }
    let mut values = DMatrix::zeros(rows.len(), k);
    let mut dates = Vec::with_capacity(rows.len());
    for (i, (_, date, row)) in rows.into_iter().enumerate() {
        dates.push(date);
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    Ok(DesignMatrix {
        dates,
        labels: header[1..].to_vec(),
        values,
    })
}

/// Loads a dataset from a returns file and a design file whose dates must
/// be the return dates plus the trailing day.
pub fn load_dataset<T: Scalar>(returns_path: &Path, design_path: &Path) -> Result<(Vec<NaiveDate>, Dataset<T>)> {
    let (dates, returns) = read_returns(returns_path)?;
    let design = read_design(design_path)?;
    let expected = design_dates(&dates)?;
    if design.dates != expected {
        return Err(Error::InvalidDataset(format!(
            "{} rows must be the return dates of {} plus one trailing day",
            design_path.display(),
            returns_path.display()
        )));
    }
    let dataset = design.clone().into_dataset(&returns)?;
    Ok((design.dates, dataset))
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: PathBuf::from(path),
        source,
    }
}

/// Writes `date,<label>…` rows.
pub fn write_design(path: &Path, design: &DesignMatrix) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "date,{}", design.labels.join(",")).map_err(&err)?;
    for (i, date) in design.dates.iter().enumerate() {
        let row: Vec<String> = design.values.row(i).iter().map(|v| format_float(*v)).collect();
        writeln!(w, "{date},{}", row.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_returns(path: &Path, dates: &[NaiveDate], returns: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "date,return").map_err(&err)?;
    for (d, y) in dates.iter().zip(returns) {
        writeln!(w, "{d},{}", format_float(*y)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_prices(path: &Path, series: &PriceSeries) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "date,close").map_err(&err)?;
    for (d, p) in series.dates.iter().zip(&series.prices) {
        writeln!(w, "{d},{}", format_float(*p)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_holidays(path: &Path, calendar: &HolidayCalendar) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "# {} holidays", calendar.country.code()).map_err(&err)?;
    for d in &calendar.holidays {
        writeln!(w, "{d}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Writes `group,subgroup,obs,mean,sd,min,max,skew,kurt` rows; statistics
/// of groups with fewer than two observations are left empty.
pub fn write_stats_report(path: &Path, rows: &[StatsRow]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "group,subgroup,obs,mean,sd,min,max,skew,kurt").map_err(&err)?;
    for row in rows {
        let stats = match &row.stats {
            Some(s) => [s.mean, s.sd, s.min, s.max, s.skew, s.kurt]
                .iter()
                .map(|v| format_float(*v))
                .collect::<Vec<_>>()
                .join(","),
            None => ",,,,,".to_string(),
        };
        writeln!(w, "{},{},{},{}", row.group, row.subgroup, row.obs, stats).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Prices, returns and the calendar design of one market.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: PriceSeries,
    pub returns: Vec<f64>,
    pub return_dates: Vec<NaiveDate>,
    pub calendars: Vec<HolidayCalendar>,
    pub design: DesignMatrix,
}

impl Ingested {
    pub fn dataset<T: Scalar>(&self) -> Result<Dataset<T>> {
        self.design.clone().into_dataset(&self.returns)
    }

    /// Keeps the returns dated `first..=last`, the prices they need and the
    /// matching design rows (including the trailing one).
    pub fn window(self, first: NaiveDate, last: NaiveDate) -> Result<Self> {
        let keep: Vec<usize> = (0..self.returns.len())
            .filter(|&t| (first..=last).contains(&self.return_dates[t]))
            .collect();
        let (Some(&i0), Some(&i1)) = (keep.first(), keep.last()) else {
            return Err(Error::InvalidDataset(format!("no returns dated {first} … {last}")));
        };
        let series = PriceSeries::new(
            self.series.dates()[i0..=i1 + 1].to_vec(),
            self.series.prices()[i0..=i1 + 1].to_vec(),
        )?;
        let design = DesignMatrix {
            dates: self.design.dates[i0..=i1 + 1].to_vec(),
            labels: self.design.labels,
            values: self.design.values.rows(i0, i1 - i0 + 2).into_owned(),
        };
        Ok(Self {
            series,
            returns: self.returns[i0..=i1].to_vec(),
            return_dates: self.return_dates[i0..=i1].to_vec(),
            calendars: self.calendars,
            design,
        })
    }
}

/// Reads prices and the four holiday files (in JP, CN, DE, US order).
pub fn ingest(prices: &Path, holidays: [&Path; 4], options: DesignOptions) -> Result<Ingested> {
    let series = read_prices(prices)?;
    let returns = compute_returns(&series)?;
    let return_dates = series.return_dates().to_vec();
    let dates = design_dates(&return_dates)?;
    let (first, last) = (series.dates()[0], *dates.last().expect("non-empty"));
    let calendars = Country::ALL
        .iter()
        .zip(holidays)
        .map(|(&c, p)| Ok(read_holidays(p, c)?.restricted_to(first, last)))
        .collect::<Result<Vec<_>>>()?;
    let design = build_design_matrix(&dates, &calendars, options)?;
    Ok(Ingested {
        series,
        returns,
        return_dates,
        calendars,
        design,
    })
}
