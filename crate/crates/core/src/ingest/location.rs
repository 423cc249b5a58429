use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::fold::fold;
use crate::error::Error;

/// Location path ordered finest → coarsest, e.g. `Moselle, Lorraine, France`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationPath(Vec<String>);

impl LocationPath {
    pub fn new(components: Vec<String>) -> Result<Self, Error> {
        let components: Vec<String> = components
            .into_iter()
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if components.is_empty() {
            return Err(Error::Invalid("empty location path".into()));
        }
        Ok(LocationPath(components))
    }

    pub fn components(&self) -> &[String] {
        &self.0
    }

    pub fn country(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or_default()
    }

    /// True when `member` equals the coarse end of this path, i.e. this path
    /// lies inside the area `member` names. Comparison is on folded text.
    pub fn within(&self, member: &LocationPath) -> bool {
        let (n, k) = (self.0.len(), member.0.len());
        k <= n
            && self.0[n - k..]
                .iter()
                .zip(&member.0)
                .all(|(a, b)| fold(a) == fold(b))
    }

    pub fn same_place(&self, other: &LocationPath) -> bool {
        self.0.len() == other.0.len() && self.within(other)
    }
}

impl fmt::Display for LocationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(", "))
    }
}

impl FromStr for LocationPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        LocationPath::new(s.split(',').map(str::to_string).collect())
    }
}

impl Serialize for LocationPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LocationPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
