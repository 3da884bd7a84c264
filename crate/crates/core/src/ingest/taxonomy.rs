//! Sector taxonomy and country grouping.
//!
//! Both ship with built-in defaults (31 STAN industry classes in 7 sector
//! groups; 7 accession and 14 incumbent EU member states) and can be
//! replaced by small CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_SECTOR_GROUPS: [(&str, &[&str]); 7] = [
    (
        "Primary production",
        &["D01T03", "D05T09", "D10T12", "D13T15", "D16T18"],
    ),
    ("Basic manufacturing", &["D19T23", "D24T25"]),
    ("Manufacturing of capital goods", &["D26T28", "D29T30", "D31T33"]),
    ("Infrastructure", &["D35T39", "D41T43"]),
    ("Retail", &["D45T47", "D49T53"]),
    (
        "Services",
        &[
            "D55T56", "D58T60", "D61", "D62T63", "D64T66", "D68", "D69T71", "D72", "D73T75",
            "D77T82",
        ],
    ),
    (
        "Personal services",
        &["D84", "D85", "D86T88", "D90T93", "D94T96", "D97T98", "D99"],
    ),
];

const DEFAULT_CEE: [&str; 7] = ["CZE", "EST", "HUN", "LVA", "POL", "SVK", "SVN"];
const DEFAULT_EU15: [&str; 14] = [
    "AUT", "BEL", "DEU", "DNK", "ESP", "FIN", "FRA", "GBR", "GRC", "ITA", "LUX", "NLD", "PRT",
    "SWE",
];

/// Maps raw activity codes onto sector classes, and classes onto sector groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorTaxonomy {
    code_to_class: BTreeMap<String, String>,
    class_to_group: BTreeMap<String, String>,
    /// Group names in declaration order.
    groups: Vec<String>,
}

impl SectorTaxonomy {
    /// Builds a taxonomy from `(raw code, class, group)` triples.
    ///
    /// A raw code may appear once; a class must always name the same group.
    pub fn new<I, A, B, C>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B, C)>,
        A: Into<String>,
        B: Into<String>,
        C: Into<String>,
    {
        let mut code_to_class = BTreeMap::new();
        let mut class_to_group: BTreeMap<String, String> = BTreeMap::new();
        let mut groups = Vec::new();
        for (code, class, group) in entries {
            let (code, class, group) = (code.into(), class.into(), group.into());
            if code.is_empty() || class.is_empty() || group.is_empty() {
                return Err(Error::Taxonomy("empty code, class, or group".into()));
            }
            if let Some(prev) = class_to_group.get(&class) {
                if *prev != group {
                    return Err(Error::Taxonomy(format!(
                        "class {class} assigned to both {prev} and {group}"
                    )));
                }
            }
            if code_to_class.insert(code.clone(), class.clone()).is_some() {
                return Err(Error::Taxonomy(format!("raw code {code} listed twice")));
            }
            if !groups.contains(&group) {
                groups.push(group.clone());
            }
            class_to_group.insert(class, group);
        }
        if code_to_class.is_empty() {
            return Err(Error::Taxonomy("taxonomy is empty".into()));
        }
        Ok(Self {
            code_to_class,
            class_to_group,
            groups,
        })
    }

    /// The 31 STAN classes in their 7 groups; every class maps to itself.
    pub fn stan_default() -> Self {
        let entries = DEFAULT_SECTOR_GROUPS.iter().flat_map(|(group, classes)| {
            classes.iter().map(move |c| (*c, *c, *group))
        });
        Self::new(entries).expect("built-in taxonomy is valid")
    }

    /// Each code is its own class, all in one group.
    pub fn identity<S: AsRef<str>>(codes: &[S], group: &str) -> Result<Self> {
        Self::new(
            codes
                .iter()
                .map(|c| (c.as_ref().to_string(), c.as_ref().to_string(), group.to_string())),
        )
    }

    /// Reads a `code,class,group` CSV with a header row.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() < 3 {
                return Err(Error::Taxonomy(format!(
                    "{}: expected code,class,group",
                    path.display()
                )));
            }
            entries.push((row[0].to_string(), row[1].to_string(), row[2].to_string()));
        }
        Self::new(entries)
    }

    pub fn class_of(&self, code: &str) -> Option<&str> {
        self.code_to_class.get(code).map(String::as_str)
    }

    pub fn group_of_class(&self, class: &str) -> Option<&str> {
        self.class_to_group.get(class).map(String::as_str)
    }

    pub fn raw_codes(&self) -> impl Iterator<Item = &str> {
        self.code_to_class.keys().map(String::as_str)
    }

    /// Sorted class codes.
    pub fn classes(&self) -> Vec<&str> {
        self.class_to_group.keys().map(String::as_str).collect()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn classes_in_group(&self, group: &str) -> Vec<&str> {
        self.class_to_group
            .iter()
            .filter(|(_, g)| g.as_str() == group)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

impl Default for SectorTaxonomy {
    fn default() -> Self {
        Self::stan_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CountryGroup {
    #[serde(rename = "EU15")]
    Eu15,
    #[serde(rename = "CEE")]
    Cee,
}

impl CountryGroup {
    pub const ALL: [CountryGroup; 2] = [CountryGroup::Eu15, CountryGroup::Cee];

    pub fn label(self) -> &'static str {
        match self {
            CountryGroup::Eu15 => "EU15",
            CountryGroup::Cee => "CEE",
        }
    }

    pub fn other(self) -> CountryGroup {
        match self {
            CountryGroup::Eu15 => CountryGroup::Cee,
            CountryGroup::Cee => CountryGroup::Eu15,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            CountryGroup::Eu15 => 0,
            CountryGroup::Cee => 1,
        }
    }
}

impl fmt::Display for CountryGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CountryGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EU15" => Ok(CountryGroup::Eu15),
            "CEE" => Ok(CountryGroup::Cee),
            other => Err(Error::Config(format!("unknown country group {other:?}"))),
        }
    }
}

/// Country → group assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryGroups {
    members: BTreeMap<String, CountryGroup>,
}

impl CountryGroups {
    pub fn new<I, S>(members: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, CountryGroup)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (country, group) in members {
            let country = country.into();
            if let Some(prev) = map.insert(country.clone(), group) {
                if prev != group {
                    return Err(Error::Config(format!(
                        "country {country} assigned to both {prev} and {group}"
                    )));
                }
            }
        }
        Ok(Self { members: map })
    }

    /// 7 CEE accession countries and 14 EU15 incumbents.
    pub fn eu_default() -> Self {
        let members = DEFAULT_CEE
            .iter()
            .map(|c| (*c, CountryGroup::Cee))
            .chain(DEFAULT_EU15.iter().map(|c| (*c, CountryGroup::Eu15)));
        Self::new(members).expect("built-in groups are disjoint")
    }

    /// Reads a `country,group` CSV with a header row.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut members = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() < 2 {
                return Err(Error::Config(format!(
                    "{}: expected country,group",
                    path.display()
                )));
            }
            members.push((row[0].to_string(), row[1].parse::<CountryGroup>()?));
        }
        Self::new(members)
    }

    pub fn group_of(&self, country: &str) -> Option<CountryGroup> {
        self.members.get(country).copied()
    }

    pub fn contains(&self, country: &str) -> bool {
        self.members.contains_key(country)
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.members.keys().map(String::as_str)
    }

    pub fn members_of(&self, group: CountryGroup) -> BTreeSet<&str> {
        self.members
            .iter()
            .filter(|(_, g)| **g == group)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Resolves a group for each label, failing on the first unlabeled one.
    pub fn resolve<S: AsRef<str>>(&self, countries: &[S]) -> Result<Vec<CountryGroup>> {
        countries
            .iter()
            .map(|c| {
                self.group_of(c.as_ref())
                    .ok_or_else(|| Error::UnlabeledCountry(c.as_ref().to_string()))
            })
            .collect()
    }
}

impl Default for CountryGroups {
    fn default() -> Self {
        Self::eu_default()
    }
}
