//! Two-line element set parsing and formatting.
//!
//! Column positions follow the standard 69-column NORAD layout. Implied-decimal
//! fields (eccentricity, second derivative of mean motion, BSTAR) are decoded
//! here; propagation lives in [`super::propagator`].

use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate, NaiveTime, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LINE_WIDTH: usize = 69;

/// Mean orbital elements of one object, as carried by a TLE.
///
/// Angles are degrees, mean motion is revolutions per day and `bstar` is in
/// inverse Earth radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLineElementSet {
    pub name: String,
    pub catalog_id: u32,
    pub classification: char,
    pub international_designator: String,
    pub epoch: DateTime<Utc>,
    /// First derivative of mean motion divided by two (rev/day²), as printed.
    pub mean_motion_dot: f64,
    /// Second derivative of mean motion divided by six (rev/day³), as printed.
    pub mean_motion_ddot: f64,
    pub bstar: f64,
    pub ephemeris_type: u8,
    pub element_set_number: u32,
    pub inclination: f64,
    pub raan: f64,
    pub eccentricity: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
    pub mean_motion: f64,
    pub revolution_number: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// Checksum problems are errors.
    Strict,
    /// Checksum problems and a missing checksum column are reported as warnings.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TleLine {
    Line1,
    Line2,
}

impl fmt::Display for TleLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TleLine::Line1 => f.write_str("line 1"),
            TleLine::Line2 => f.write_str("line 2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TleError {
    #[error("expected a 2- or 3-line record, found {0} lines")]
    LineCount(usize),
    #[error("{line}: expected {LINE_WIDTH} columns, found {found}")]
    BadLength { line: TleLine, found: usize },
    #[error("{line}: must start with '{expected}'")]
    BadLineNumber { line: TleLine, expected: char },
    #[error("{line}: field `{field}` (columns {}-{end}): {reason}", .start + 1)]
    Field {
        line: TleLine,
        field: &'static str,
        start: usize,
        end: usize,
        reason: String,
    },
    #[error("{line}: checksum mismatch (computed {computed}, printed '{printed}')")]
    Checksum { line: TleLine, computed: u8, printed: char },
    #[error("catalog number differs between lines ({line1} vs {line2})")]
    CatalogMismatch { line1: u32, line2: u32 },
    #[error("cannot encode `{field}` = {value} in TLE columns")]
    Unencodable { field: &'static str, value: f64 },
}

/// A parsed record together with the problems tolerated in lenient mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTle {
    pub tle: TwoLineElementSet,
    pub warnings: Vec<TleError>,
}

/// Modulo-10 checksum over the first 68 columns: digits count their value,
/// minus signs count one.
pub fn checksum(line: &str) -> u8 {
    let sum: u32 = line
        .bytes()
        .take(LINE_WIDTH - 1)
        .map(|b| match b {
            b'0'..=b'9' => u32::from(b - b'0'),
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

struct Columns<'a> {
    text: &'a str,
    line: TleLine,
}

impl<'a> Columns<'a> {
    fn slice(&self, field: &'static str, start: usize, end: usize) -> Result<&'a str, TleError> {
        self.text.get(start..end).ok_or_else(|| TleError::Field {
            line: self.line,
            field,
            start,
            end,
            reason: "missing columns".into(),
        })
    }

    fn err(&self, field: &'static str, start: usize, end: usize, reason: impl Into<String>) -> TleError {
        TleError::Field {
            line: self.line,
            field,
            start,
            end,
            reason: reason.into(),
        }
    }

    fn float(&self, field: &'static str, start: usize, end: usize) -> Result<f64, TleError> {
        let raw = self.slice(field, start, end)?.trim();
        let normalized = match raw.strip_prefix('-') {
            Some(rest) if rest.starts_with('.') => format!("-0{rest}"),
            _ if raw.starts_with('.') => format!("0{raw}"),
            _ => raw.to_string(),
        };
        normalized
            .parse::<f64>()
            .map_err(|_| self.err(field, start, end, format!("'{raw}' is not a number")))
    }

    fn integer(&self, field: &'static str, start: usize, end: usize) -> Result<u32, TleError> {
        let raw = self.slice(field, start, end)?.trim();
        if raw.is_empty() {
            return Ok(0);
        }
        raw.parse::<u32>()
            .map_err(|_| self.err(field, start, end, format!("'{raw}' is not an integer")))
    }

    /// Leading-decimal-point field such as eccentricity "0001234" → 0.0001234.
    fn implied_fraction(&self, field: &'static str, start: usize, end: usize) -> Result<f64, TleError> {
        let raw = self.slice(field, start, end)?.trim();
        if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(field, start, end, format!("'{raw}' is not an implied-decimal fraction")));
        }
        let digits: f64 = raw.parse().unwrap_or(0.0);
        Ok(digits / 10f64.powi(raw.len() as i32))
    }

    /// Implied-decimal mantissa with exponent such as " 28098-4" → 0.28098e-4.
    fn implied_exponent(&self, field: &'static str, start: usize, end: usize) -> Result<f64, TleError> {
        let raw = self.slice(field, start, end)?;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Ok(0.0);
        }
        let bad = || {
            self.err(
                field,
                start,
                end,
                format!("'{trimmed}' is not an implied-decimal exponent field"),
            )
        };
        let (sign, body) = match trimmed.as_bytes()[0] {
            b'-' => (-1.0, &trimmed[1..]),
            b'+' => (1.0, &trimmed[1..]),
            _ => (1.0, trimmed),
        };
        let split = body.rfind(['-', '+']).ok_or_else(bad)?;
        let (mantissa, exponent) = body.split_at(split);
        if mantissa.is_empty() || !mantissa.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let exponent: i32 = exponent.parse().map_err(|_| bad())?;
        let mantissa: f64 = mantissa.parse::<f64>().map_err(|_| bad())? / 10f64.powi(mantissa.len() as i32);
        Ok(sign * mantissa * 10f64.powi(exponent))
    }
}

fn parse_catalog(cols: &Columns<'_>) -> Result<u32, TleError> {
    let raw = cols.slice("catalog_id", 2, 7)?.trim();
    let bad = || cols.err("catalog_id", 2, 7, format!("'{raw}' is not a catalog number"));
    match raw.chars().next() {
        // Alpha-5: a leading letter (I and O skipped) encodes the ten-thousands digit.
        Some(c) if c.is_ascii_uppercase() => {
            let offset = match c {
                'A'..='H' => c as u32 - 'A' as u32 + 10,
                'J'..='N' => c as u32 - 'A' as u32 + 9,
                'P'..='Z' => c as u32 - 'A' as u32 + 8,
                _ => return Err(bad()),
            };
            let rest: u32 = raw[1..].parse().map_err(|_| bad())?;
            Ok(offset * 10_000 + rest)
        }
        Some(_) => raw.parse().map_err(|_| bad()),
        None => Err(bad()),
    }
}

fn parse_epoch(cols: &Columns<'_>) -> Result<DateTime<Utc>, TleError> {
    let year = cols.integer("epoch_year", 18, 20)? as i32;
    let year = if year < 57 { 2000 + year } else { 1900 + year };
    let day = cols.float("epoch_day", 20, 32)?;
    if !(1.0..367.0).contains(&day) {
        return Err(cols.err("epoch_day", 20, 32, format!("day of year {day} out of range")));
    }
    let seconds = day.fract() * 86_400.0;
    let mut nanos = (seconds.fract() * 1e9).round() as u32;
    let mut whole = seconds as u32;
    if nanos >= 1_000_000_000 {
        nanos -= 1_000_000_000;
        whole += 1;
    }
    let date = NaiveDate::from_yo_opt(year, day as u32)
        .ok_or_else(|| cols.err("epoch_day", 20, 32, format!("day {day} not in year {year}")))?;
    let time = NaiveTime::from_num_seconds_from_midnight_opt(whole, nanos)
        .ok_or_else(|| cols.err("epoch_day", 20, 32, "fraction of day out of range"))?;
    Ok(date.and_time(time).and_utc())
}

fn check_line(text: &str, line: TleLine, mode: ParseMode, warnings: &mut Vec<TleError>) -> Result<(), TleError> {
    let expected = match line {
        TleLine::Line1 => '1',
        TleLine::Line2 => '2',
    };
    if !text.starts_with(expected) {
        return Err(TleError::BadLineNumber { line, expected });
    }
    let len = text.len();
    if len == LINE_WIDTH - 1 && mode == ParseMode::Lenient {
        warnings.push(TleError::BadLength { line, found: len });
        return Ok(());
    }
    if len != LINE_WIDTH {
        return Err(TleError::BadLength { line, found: len });
    }
    let computed = checksum(text);
    let printed = text.as_bytes()[LINE_WIDTH - 1] as char;
    if printed.to_digit(10) != Some(u32::from(computed)) {
        let err = TleError::Checksum {
            line,
            computed,
            printed,
        };
        match mode {
            ParseMode::Strict => return Err(err),
            ParseMode::Lenient => warnings.push(err),
        }
    }
    Ok(())
}

/// Parses one record given as two lines, or three with a leading name line.
pub fn parse_tle(text: &str, mode: ParseMode) -> Result<ParsedTle, TleError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end()).filter(|l| !l.is_empty()).collect();
    let (name, line1, line2) = match lines.as_slice() {
        [l1, l2] => ("", *l1, *l2),
        [name, l1, l2] => (*name, *l1, *l2),
        other => return Err(TleError::LineCount(other.len())),
    };
    parse_lines(name, line1, line2, mode)
}

fn parse_lines(name: &str, line1: &str, line2: &str, mode: ParseMode) -> Result<ParsedTle, TleError> {
    let mut warnings = Vec::new();
    check_line(line1, TleLine::Line1, mode, &mut warnings)?;
    check_line(line2, TleLine::Line2, mode, &mut warnings)?;

    let c1 = Columns {
        text: line1,
        line: TleLine::Line1,
    };
    let c2 = Columns {
        text: line2,
        line: TleLine::Line2,
    };

    let catalog_id = parse_catalog(&c1)?;
    let catalog_2 = parse_catalog(&c2)?;
    if catalog_id != catalog_2 {
        return Err(TleError::CatalogMismatch {
            line1: catalog_id,
            line2: catalog_2,
        });
    }

    let classification = c1.slice("classification", 7, 8)?.chars().next().unwrap_or('U');
    let international_designator = c1.slice("international_designator", 9, 17)?.trim().to_string();
    let epoch = parse_epoch(&c1)?;
    let mean_motion_dot = c1.float("mean_motion_dot", 33, 43)?;
    let mean_motion_ddot = c1.implied_exponent("mean_motion_ddot", 44, 52)?;
    let bstar = c1.implied_exponent("bstar", 53, 61)?;
    let ephemeris_type = c1.integer("ephemeris_type", 62, 63)? as u8;
    let element_set_number = c1.integer("element_set_number", 64, 68)?;

    let inclination = c2.float("inclination", 8, 16)?;
    if !(0.0..=180.0).contains(&inclination) {
        return Err(c2.err("inclination", 8, 16, format!("{inclination} outside [0, 180]")));
    }
    let raan = c2.float("raan", 17, 25)?;
    let eccentricity = c2.implied_fraction("eccentricity", 26, 33)?;
    let arg_perigee = c2.float("arg_perigee", 34, 42)?;
    let mean_anomaly = c2.float("mean_anomaly", 43, 51)?;
    let mean_motion = c2.float("mean_motion", 52, 63)?;
    if mean_motion <= 0.0 {
        return Err(c2.err("mean_motion", 52, 63, "must be positive"));
    }
    let revolution_number = c2.integer("revolution_number", 63, 68)?;

    let name = name.strip_prefix("0 ").unwrap_or(name).trim().to_string();

    Ok(ParsedTle {
        tle: TwoLineElementSet {
            name,
            catalog_id,
            classification,
            international_designator,
            epoch,
            mean_motion_dot,
            mean_motion_ddot,
            bstar,
            ephemeris_type,
            element_set_number,
            inclination,
            raan,
            eccentricity,
            arg_perigee,
            mean_anomaly,
            mean_motion,
            revolution_number,
        },
        warnings,
    })
}

/// Parses a file holding a sequence of records, each with an optional name
/// line. Blank lines and lines starting with `#` are skipped.
pub fn parse_tle_file(text: &str, mode: ParseMode) -> Result<Vec<ParsedTle>, TleError> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end())
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect();
    let mut records = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let is_pair =
            |at: usize| at + 1 < lines.len() && lines[at].starts_with("1 ") && lines[at + 1].starts_with("2 ");
        if is_pair(i) {
            records.push(parse_lines("", lines[i], lines[i + 1], mode)?);
            i += 2;
        } else if is_pair(i + 1) {
            records.push(parse_lines(lines[i], lines[i + 1], lines[i + 2], mode)?);
            i += 3;
        } else {
            return Err(TleError::LineCount(lines.len() - i));
        }
    }
    Ok(records)
}

fn format_implied_exponent(field: &'static str, value: f64) -> Result<String, TleError> {
    let sign = if value < 0.0 { '-' } else { ' ' };
    let magnitude = value.abs();
    if magnitude == 0.0 {
        return Ok(" 00000-0".to_string());
    }
    let mut exponent = magnitude.log10().floor() as i32 + 1;
    let mut digits = (magnitude / 10f64.powi(exponent) * 1e5).round() as u64;
    if digits >= 100_000 {
        digits /= 10;
        exponent += 1;
    }
    if exponent < -9 {
        return Ok(" 00000-0".to_string());
    }
    if exponent > 9 {
        return Err(TleError::Unencodable { field, value });
    }
    let exp_sign = if exponent < 0 { '-' } else { '+' };
    Ok(format!("{sign}{digits:05}{exp_sign}{}", exponent.abs()))
}

fn format_angle(field: &'static str, value: f64, upper: f64) -> Result<String, TleError> {
    let mut rounded = (value * 1e4).round() / 1e4;
    if upper >= 360.0 {
        rounded = rounded.rem_euclid(360.0);
        if rounded >= 359.99995 {
            rounded = 0.0;
        }
    }
    if !(0.0..=upper).contains(&rounded) {
        return Err(TleError::Unencodable { field, value });
    }
    Ok(format!("{rounded:8.4}"))
}

fn with_checksum(mut body: String) -> String {
    let sum = checksum(&body);
    body.push(char::from(b'0' + sum));
    body
}

impl TwoLineElementSet {
    /// Renders the two 69-column element lines, checksums included.
    pub fn to_lines(&self) -> Result<(String, String), TleError> {
        if self.catalog_id > 99_999 {
            return Err(TleError::Unencodable {
                field: "catalog_id",
                value: f64::from(self.catalog_id),
            });
        }
        let year = self.epoch.year() % 100;
        let day_fraction =
            (f64::from(self.epoch.num_seconds_from_midnight()) + f64::from(self.epoch.nanosecond()) * 1e-9) / 86_400.0;
        let day = f64::from(self.epoch.ordinal()) + day_fraction;
        let ndot_sign = if self.mean_motion_dot < 0.0 { '-' } else { ' ' };
        let ndot = (self.mean_motion_dot.abs() * 1e8).round() as u64;
        if ndot >= 100_000_000 {
            return Err(TleError::Unencodable {
                field: "mean_motion_dot",
                value: self.mean_motion_dot,
            });
        }
        let line1 = format!(
            "1 {:05}{} {:<8} {:02}{:012.8} {}.{:08} {} {} {} {:>4}",
            self.catalog_id,
            self.classification,
            self.international_designator,
            year,
            day,
            ndot_sign,
            ndot,
            format_implied_exponent("mean_motion_ddot", self.mean_motion_ddot)?,
            format_implied_exponent("bstar", self.bstar)?,
            self.ephemeris_type % 10,
            self.element_set_number % 10_000,
        );

        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(TleError::Unencodable {
                field: "eccentricity",
                value: self.eccentricity,
            });
        }
        let ecc = (self.eccentricity * 1e7).round() as u64;
        if !(self.mean_motion > 0.0 && self.mean_motion < 100.0) {
            return Err(TleError::Unencodable {
                field: "mean_motion",
                value: self.mean_motion,
            });
        }
        let line2 = format!(
            "2 {:05} {} {} {:07} {} {} {:11.8}{:>5}",
            self.catalog_id,
            format_angle("inclination", self.inclination, 180.0)?,
            format_angle("raan", self.raan, 360.0)?,
            ecc.min(9_999_999),
            format_angle("arg_perigee", self.arg_perigee, 360.0)?,
            format_angle("mean_anomaly", self.mean_anomaly, 360.0)?,
            self.mean_motion,
            self.revolution_number % 100_000,
        );
        Ok((with_checksum(line1), with_checksum(line2)))
    }

    /// Renders the record with its name line when a name is set.
    pub fn to_text(&self) -> Result<String, TleError> {
        let (l1, l2) = self.to_lines()?;
        Ok(if self.name.is_empty() {
            format!("{l1}\n{l2}\n")
        } else {
            format!("{}\n{l1}\n{l2}\n", self.name)
        })
    }
}
