use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A calendar quarter, the native time index of the panel.
///
/// Parses both `1991Q2` and ISO dates (`1991-04-01`, mapped to the quarter
/// containing the month).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Quarter {
    year: i32,
    q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self, CoreError> {
        if !(1..=4).contains(&q) {
            return Err(CoreError::data(format!("quarter index {q} outside 1..=4")));
        }
        Ok(Quarter { year, q })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u8 {
        self.q
    }

    /// Quarters since 0000Q1; used for arithmetic and ordering.
    fn index(&self) -> i64 {
        self.year as i64 * 4 + (self.q as i64 - 1)
    }

    fn from_index(idx: i64) -> Self {
        let year = idx.div_euclid(4) as i32;
        let q = (idx.rem_euclid(4) + 1) as u8;
        Quarter { year, q }
    }

    pub fn add(&self, n: i64) -> Self {
        Self::from_index(self.index() + n)
    }

    pub fn diff(&self, other: &Quarter) -> i64 {
        self.index() - other.index()
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl fmt::Debug for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Quarter {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((y, q)) = s.split_once(['Q', 'q']) {
            let year: i32 = y
                .parse()
                .map_err(|_| CoreError::data(format!("bad quarter string {s:?}")))?;
            let q: u8 = q
                .parse()
                .map_err(|_| CoreError::data(format!("bad quarter string {s:?}")))?;
            return Quarter::new(year, q);
        }
        // ISO date: YYYY-MM-DD (or YYYY-MM)
        let mut parts = s.split('-');
        let year: i32 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| CoreError::data(format!("bad date string {s:?}")))?;
        let month: u8 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| CoreError::data(format!("bad date string {s:?}")))?;
        if !(1..=12).contains(&month) {
            return Err(CoreError::data(format!("bad month in date {s:?}")));
        }
        Quarter::new(year, (month - 1) / 3 + 1)
    }
}

impl TryFrom<String> for Quarter {
    type Error = CoreError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Quarter> for String {
    fn from(q: Quarter) -> String {
        q.to_string()
    }
}
