use std::path::Path;

use serde::{Deserialize, Serialize};

use super::location::LocationPath;
use super::tweets::TweetRecord;
use crate::error::{Error, Result};

/// A named analysis region made of one or more location-path prefixes.
/// The Greater Region, for example, is Luxembourg plus Wallonia, Saarland,
/// Rhineland-Palatinate and Lorraine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub members: Vec<LocationPath>,
}

impl RegionSpec {
    pub fn new(name: impl Into<String>, members: Vec<LocationPath>) -> Result<Self> {
        let spec = RegionSpec {
            name: name.into(),
            members,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Invalid("region spec with empty name".into()));
        }
        if self.members.is_empty() {
            return Err(Error::Invalid(format!(
                "region spec '{}' has no members",
                self.name
            )));
        }
        for (i, a) in self.members.iter().enumerate() {
            for (j, b) in self.members.iter().enumerate() {
                if i != j && a.within(b) {
                    return Err(Error::Invalid(format!(
                        "region spec '{}': member '{}' lies inside member '{}'",
                        self.name, a, b
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, path: &LocationPath) -> bool {
        self.members.iter().any(|m| path.within(m))
    }
}

/// Load a JSON array of `{ "name": ..., "members": [...] }` objects.
pub fn load_region_specs(path: &Path) -> Result<Vec<RegionSpec>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let specs: Vec<RegionSpec> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    for s in &specs {
        s.validate()?;
    }
    let mut names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invalid("duplicate region spec names".into()));
    }
    Ok(specs)
}

/// Names of every region the tweet's resolved location falls into, in spec
/// order. A tweet in Lorraine belongs to both the Greater Region and France.
pub fn assign_region(record: &TweetRecord, specs: &[RegionSpec]) -> Vec<String> {
    match &record.user_geo {
        None => Vec::new(),
        Some(geo) => specs
            .iter()
            .filter(|s| s.contains(geo))
            .map(|s| s.name.clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn p(s: &str) -> LocationPath {
        s.parse().unwrap()
    }

    pub(crate) fn standard_specs() -> Vec<RegionSpec> {
        vec![
            RegionSpec::new(
                "GR",
                vec![
                    p("Luxembourg"),
                    p("Wallonia, Belgium"),
                    p("Saarland, Germany"),
                    p("Rhineland-Palatinate, Germany"),
                    p("Lorraine, France"),
                ],
            )
            .unwrap(),
            RegionSpec::new("Luxembourg", vec![p("Luxembourg")]).unwrap(),
            RegionSpec::new("Belgium", vec![p("Belgium")]).unwrap(),
            RegionSpec::new("France", vec![p("France")]).unwrap(),
            RegionSpec::new("Germany", vec![p("Germany")]).unwrap(),
        ]
    }

    fn tweet(geo: Option<&str>) -> TweetRecord {
        TweetRecord {
            tweet_id: "1".into(),
            full_text: String::new(),
            user_id: "u".into(),
            user_geo_original: None,
            user_geo: geo.map(p),
            date: NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
        }
    }

    #[test]
    fn moselle_is_gr_and_france() {
        let got = assign_region(&tweet(Some("Moselle, Lorraine, France")), &standard_specs());
        assert_eq!(got, vec!["GR", "France"]);
    }

    #[test]
    fn berlin_is_only_germany() {
        let got = assign_region(&tweet(Some("Berlin, Germany")), &standard_specs());
        assert_eq!(got, vec!["Germany"]);
    }

    #[test]
    fn no_geo_no_region() {
        assert!(assign_region(&tweet(None), &standard_specs()).is_empty());
    }

    #[test]
    fn nested_members_rejected() {
        assert!(RegionSpec::new("bad", vec![p("France"), p("Lorraine, France")]).is_err());
        assert!(RegionSpec::new("empty", vec![]).is_err());
    }

    #[test]
    fn adding_specs_never_removes_assignments() {
        let specs = standard_specs();
        let t = tweet(Some("Arlon, Wallonia, Belgium"));
        for n in 0..specs.len() {
            let fewer = assign_region(&t, &specs[..n]);
            let more = assign_region(&t, &specs[..n + 1]);
            assert!(fewer.iter().all(|r| more.contains(r)));
        }
    }
}
