//! Weakness identifiers of the form `MWC-NNN` with an optional `a`/`b` suffix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A catalog identifier such as `MWC-101` or `MWC-120a`.
///
/// Ordering is numeric first, then by suffix, so `MWC-120a < MWC-120b < MWC-121`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MwcId {
    number: u16,
    suffix: Option<char>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed identifier `{0}`: expected `MWC-` followed by three digits and an optional a/b suffix")]
pub struct MalformedId(pub String);

impl MwcId {
    pub const fn new(number: u16, suffix: Option<char>) -> Self {
        Self { number, suffix }
    }

    pub fn number(self) -> u16 {
        self.number
    }

    pub fn suffix(self) -> Option<char> {
        self.suffix
    }

    /// Same number, suffix dropped.
    pub fn base(self) -> MwcId {
        MwcId::new(self.number, None)
    }
}

impl FromStr for MwcId {
    type Err = MalformedId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MalformedId(s.to_string());
        let rest = s.strip_prefix("MWC-").ok_or_else(bad)?;
        let bytes = rest.as_bytes();
        if bytes.len() < 3 || bytes.len() > 4 || !bytes[..3].iter().all(u8::is_ascii_digit) {
            return Err(bad());
        }
        let number: u16 = rest[..3].parse().map_err(|_| bad())?;
        let suffix = match bytes.get(3) {
            None => None,
            Some(b'a') => Some('a'),
            Some(b'b') => Some('b'),
            Some(_) => return Err(bad()),
        };
        Ok(MwcId { number, suffix })
    }
}

impl fmt::Display for MwcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MWC-{:03}", self.number)?;
        if let Some(c) = self.suffix {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Serialize for MwcId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MwcId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for tests and tables: `mwc("MWC-101")`. Panics on malformed input.
pub fn mwc(s: &str) -> MwcId {
    s.parse().unwrap_or_else(|e| panic!("{e}"))
}
