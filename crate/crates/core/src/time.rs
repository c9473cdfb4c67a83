//! Calendar binning shared by temporal features, sentiment, topics and the
//! server's windowed queries. All bins are UTC.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Months, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Calendar granularity of a temporal bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Year,
    Month,
    Day,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::Year, Granularity::Month, Granularity::Day];

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Year => "year",
            Granularity::Month => "month",
            Granularity::Day => "day",
        }
    }
}

/// Aggregation level: the whole history of an account, or calendar bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    Overall,
    Year,
    Month,
    Day,
}

impl Level {
    pub fn granularity(self) -> Option<Granularity> {
        match self {
            Level::Overall => None,
            Level::Year => Some(Granularity::Year),
            Level::Month => Some(Granularity::Month),
            Level::Day => Some(Granularity::Day),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Overall => "overall",
            Level::Year => "year",
            Level::Month => "month",
            Level::Day => "day",
        }
    }
}

impl From<Granularity> for Level {
    fn from(g: Granularity) -> Self {
        match g {
            Granularity::Year => Level::Year,
            Granularity::Month => Level::Month,
            Granularity::Day => Level::Day,
        }
    }
}

impl FromStr for Level {
    type Err = PeriodParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "overall" => Ok(Level::Overall),
            "year" => Ok(Level::Year),
            "month" => Ok(Level::Month),
            "day" => Ok(Level::Day),
            _ => Err(PeriodParseError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unparseable period label {0:?}")]
pub struct PeriodParseError(pub String);

/// One calendar bin, identified by its granularity and first day.
///
/// Serialized as its label: `2014`, `2014-09` or `2014-09-05`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    granularity: Granularity,
    start: NaiveDate,
}

impl Period {
    /// The bin of `granularity` containing `ts`.
    pub fn containing(granularity: Granularity, ts: DateTime<Utc>) -> Period {
        let d = ts.date_naive();
        let start = match granularity {
            Granularity::Year => NaiveDate::from_ymd_opt(d.year(), 1, 1),
            Granularity::Month => NaiveDate::from_ymd_opt(d.year(), d.month(), 1),
            Granularity::Day => Some(d),
        }
        .expect("valid calendar date");
        Period { granularity, start }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn first_day(&self) -> NaiveDate {
        self.start
    }

    pub fn next(&self) -> Period {
        let start = match self.granularity {
            Granularity::Year => self.start.checked_add_months(Months::new(12)),
            Granularity::Month => self.start.checked_add_months(Months::new(1)),
            Granularity::Day => self.start.succ_opt(),
        }
        .expect("date in range");
        Period { granularity: self.granularity, start }
    }

    /// Inclusive start instant.
    pub fn start(&self) -> DateTime<Utc> {
        Utc.from_utc_datetime(&self.start.and_hms_opt(0, 0, 0).expect("midnight"))
    }

    /// Exclusive end instant (start of the following bin).
    pub fn end(&self) -> DateTime<Utc> {
        self.next().start()
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        ts >= self.start() && ts < self.end()
    }

    /// Every bin of `granularity` from the one containing `from` through the
    /// one containing `to`, contiguous and sorted.
    pub fn span(granularity: Granularity, from: DateTime<Utc>, to: DateTime<Utc>) -> Vec<Period> {
        let last = Period::containing(granularity, to);
        let mut p = Period::containing(granularity, from);
        let mut out = Vec::new();
        while p <= last {
            out.push(p);
            p = p.next();
        }
        out
    }

    pub fn label(&self) -> String {
        match self.granularity {
            Granularity::Year => format!("{:04}", self.start.year()),
            Granularity::Month => format!("{:04}-{:02}", self.start.year(), self.start.month()),
            Granularity::Day => self.start.format("%Y-%m-%d").to_string(),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Period {
    type Err = PeriodParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PeriodParseError(s.to_string());
        let parts: Vec<&str> = s.split('-').collect();
        let num = |p: &str, len: usize| -> Result<u32, PeriodParseError> {
            if p.len() != len || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            p.parse().map_err(|_| err())
        };
        let (granularity, y, m, d) = match parts.as_slice() {
            [y] => (Granularity::Year, num(y, 4)?, 1, 1),
            [y, m] => (Granularity::Month, num(y, 4)?, num(m, 2)?, 1),
            [y, m, d] => (Granularity::Day, num(y, 4)?, num(m, 2)?, num(d, 2)?),
            _ => return Err(err()),
        };
        let start = NaiveDate::from_ymd_opt(y as i32, m, d).ok_or_else(err)?;
        Ok(Period { granularity, start })
    }
}

impl Serialize for Period {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive range of periods, possibly of different granularities
/// (`2014` .. `2015-03`). Covers `[from.start(), to.end())`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodRange {
    pub from: Period,
    pub to: Period,
}

impl PeriodRange {
    pub fn single(p: Period) -> Self {
        PeriodRange { from: p, to: p }
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.from.start()
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.to.end()
    }

    pub fn is_empty(&self) -> bool {
        self.end() <= self.start()
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        ts >= self.start() && ts < self.end()
    }

    /// True when the whole period lies inside the range.
    pub fn covers(&self, p: &Period) -> bool {
        p.start() >= self.start() && p.end() <= self.end()
    }

    /// True when the range intersects `[from, to]` (inclusive instants).
    pub fn overlaps(&self, from: DateTime<Utc>, to: DateTime<Utc>) -> bool {
        self.start() <= to && self.end() > from
    }

    pub fn key(&self) -> String {
        format!("{}..{}", self.from, self.to)
    }
}
