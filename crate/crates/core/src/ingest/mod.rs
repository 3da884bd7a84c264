//! Raw panel ingestion: CSV parsing, sector aggregation and validation.

mod aggregate;
mod load;
mod taxonomy;
mod validate;

pub use aggregate::aggregate_sectors;
pub use load::{load_panel, read_panel, write_panel_csv, ColumnSchema, DroppedRows, LoadOptions, LoadedPanel};
pub use taxonomy::{CountryGroup, CountryGroups, SectorTaxonomy};
pub use validate::{validate_panel, CountryCoverage, Issue, ValidationReport};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the per-cell measures carried by the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Employment,
    ValueAddedPc,
    Gfc,
    Ulc,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Employment,
        Measure::ValueAddedPc,
        Measure::Gfc,
        Measure::Ulc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Employment => "employment",
            Measure::ValueAddedPc => "value_added_pc",
            Measure::Gfc => "gfc",
            Measure::Ulc => "ulc",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measures for one (country, sector, year). `None` is an explicit absence.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cell {
    pub employment: Option<f64>,
    pub value_added_pc: Option<f64>,
    pub gfc: Option<f64>,
    pub ulc: Option<f64>,
}

impl Cell {
    pub fn get(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::Employment => self.employment,
            Measure::ValueAddedPc => self.value_added_pc,
            Measure::Gfc => self.gfc,
            Measure::Ulc => self.ulc,
        }
    }

    pub fn is_empty(&self) -> bool {
        Measure::ALL.iter().all(|m| self.get(*m).is_none())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    pub country: String,
    pub sector: String,
    pub year: i32,
    pub cell: Cell,
}

/// Dense (country, sector, year) panel with lexicographically ordered indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EmploymentPanel {
    countries: Vec<String>,
    sectors: Vec<String>,
    first_year: i32,
    last_year: i32,
    // year-major: ((t * C) + c) * S + s
    cells: Vec<Cell>,
}

impl EmploymentPanel {
    /// Builds a panel from records. Exact duplicates are merged; the number
    /// merged is returned alongside. Conflicting duplicates are an error.
    pub fn from_records(records: Vec<ObservationRecord>) -> Result<(Self, usize)> {
        if records.is_empty() {
            return Err(Error::EmptySample("panel has no observations".into()));
        }
        let mut keyed: BTreeMap<(String, String, i32), Cell> = BTreeMap::new();
        let mut duplicates = 0;
        for rec in records {
            let key = (rec.country, rec.sector, rec.year);
            match keyed.get(&key) {
                Some(existing) if *existing == rec.cell => duplicates += 1,
                Some(_) => {
                    return Err(Error::DuplicateKey {
                        country: key.0,
                        sector: key.1,
                        year: key.2,
                    })
                }
                None => {
                    keyed.insert(key, rec.cell);
                }
            }
        }
        let mut countries: Vec<String> = keyed.keys().map(|k| k.0.clone()).collect();
        countries.sort();
        countries.dedup();
        let mut sectors: Vec<String> = keyed.keys().map(|k| k.1.clone()).collect();
        sectors.sort();
        sectors.dedup();
        let first_year = keyed.keys().map(|k| k.2).min().unwrap_or_default();
        let last_year = keyed.keys().map(|k| k.2).max().unwrap_or_default();

        let mut panel = Self::empty(countries, sectors, first_year, last_year);
        for ((country, sector, year), cell) in keyed {
            let c = panel.country_index(&country).expect("indexed");
            let s = panel.sector_index(&sector).expect("indexed");
            let idx = panel.offset(c, s, year).expect("in range");
            panel.cells[idx] = cell;
        }
        Ok((panel, duplicates))
    }

    /// A panel with every cell absent. Labels are sorted and deduplicated.
    pub fn empty(
        mut countries: Vec<String>,
        mut sectors: Vec<String>,
        first_year: i32,
        last_year: i32,
    ) -> Self {
        countries.sort();
        countries.dedup();
        sectors.sort();
        sectors.dedup();
        let years = (last_year - first_year + 1).max(0) as usize;
        let cells = vec![Cell::default(); years * countries.len() * sectors.len()];
        Self {
            countries,
            sectors,
            first_year,
            last_year,
            cells,
        }
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn sectors(&self) -> &[String] {
        &self.sectors
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.first_year..=self.last_year
    }

    pub fn has_year(&self, year: i32) -> bool {
        self.years().contains(&year)
    }

    pub fn country_index(&self, country: &str) -> Option<usize> {
        self.countries
            .binary_search_by(|c| c.as_str().cmp(country))
            .ok()
    }

    pub fn sector_index(&self, sector: &str) -> Option<usize> {
        self.sectors.binary_search_by(|s| s.as_str().cmp(sector)).ok()
    }

    fn offset(&self, c: usize, s: usize, year: i32) -> Option<usize> {
        if !self.has_year(year) || c >= self.countries.len() || s >= self.sectors.len() {
            return None;
        }
        let t = (year - self.first_year) as usize;
        Some((t * self.countries.len() + c) * self.sectors.len() + s)
    }

    pub fn cell(&self, c: usize, s: usize, year: i32) -> Option<&Cell> {
        self.offset(c, s, year).map(|i| &self.cells[i])
    }

    pub fn cell_mut(&mut self, c: usize, s: usize, year: i32) -> Option<&mut Cell> {
        self.offset(c, s, year).map(move |i| &mut self.cells[i])
    }

    pub fn value(&self, c: usize, s: usize, year: i32, measure: Measure) -> Option<f64> {
        self.cell(c, s, year).and_then(|cell| cell.get(measure))
    }

    /// Row-major C×S slice of cells for one year.
    pub fn year_cells(&self, year: i32) -> Option<&[Cell]> {
        let start = self.offset(0, 0, year)?;
        Some(&self.cells[start..start + self.countries.len() * self.sectors.len()])
    }

    /// Iterates over every present observation (any measure non-absent).
    pub fn records(&self) -> impl Iterator<Item = ObservationRecord> + '_ {
        self.years().flat_map(move |year| {
            (0..self.countries.len()).flat_map(move |c| {
                (0..self.sectors.len()).filter_map(move |s| {
                    let cell = *self.cell(c, s, year)?;
                    (!cell.is_empty()).then(|| ObservationRecord {
                        country: self.countries[c].clone(),
                        sector: self.sectors[s].clone(),
                        year,
                        cell,
                    })
                })
            })
        })
    }

    /// Sum of a measure over present cells, with the number of absent cells.
    pub fn total(&self, c: usize, year: i32, measure: Measure) -> (f64, usize) {
        let mut sum = 0.0;
        let mut missing = 0;
        for s in 0..self.sectors.len() {
            match self.value(c, s, year, measure) {
                Some(v) => sum += v,
                None => missing += 1,
            }
        }
        (sum, missing)
    }
}
