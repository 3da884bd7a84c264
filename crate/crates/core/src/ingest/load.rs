use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, EmploymentPanel, Measure, ObservationRecord};
use crate::error::{Error, Result};

/// Column names in the input CSV. Optional measures may be absent from the
/// header, in which case every cell is recorded as missing for them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub country: String,
    pub sector: String,
    pub year: String,
    /// Persons employed or full-time equivalents; point this at whichever
    /// column holds the preferred measure.
    pub employment: String,
    pub value_added_pc: String,
    pub gfc: String,
    pub ulc: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            country: "country".into(),
            sector: "sector".into(),
            year: "year".into(),
            employment: "employment".into(),
            value_added_pc: "value_added_pc".into(),
            gfc: "gfc".into(),
            ulc: "ulc".into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub schema: ColumnSchema,
    /// Accepted country codes; `None` accepts any.
    pub known_countries: Option<BTreeSet<String>>,
    /// Accepted raw sector codes; `None` accepts any.
    pub known_sectors: Option<BTreeSet<String>>,
    /// Inclusive year window; rows outside it are dropped.
    pub years: Option<(i32, i32)>,
    /// Drop rows with unknown codes instead of failing.
    pub allow_skip_unknown: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRows {
    pub reason: String,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedPanel {
    pub panel: EmploymentPanel,
    pub dropped: Vec<DroppedRows>,
}

impl LoadedPanel {
    pub fn dropped_total(&self) -> usize {
        self.dropped.iter().map(|d| d.count).sum()
    }
}

pub fn load_panel(path: &Path, options: &LoadOptions) -> Result<LoadedPanel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(file, options)
}

struct Columns {
    country: usize,
    sector: usize,
    year: usize,
    measures: [Option<usize>; 4],
}

fn locate_columns(headers: &csv::StringRecord, schema: &ColumnSchema) -> Result<Columns> {
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut missing = Vec::new();
    let mut required = |name: &str| {
        find(name).unwrap_or_else(|| {
            missing.push(name.to_string());
            usize::MAX
        })
    };
    let country = required(&schema.country);
    let sector = required(&schema.sector);
    let year = required(&schema.year);
    let employment = required(&schema.employment);
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing));
    }
    Ok(Columns {
        country,
        sector,
        year,
        measures: [
            Some(employment),
            find(&schema.value_added_pc),
            find(&schema.gfc),
            find(&schema.ulc),
        ],
    })
}

fn parse_measure(raw: &str, measure: Measure) -> std::result::Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| format!("{measure} value {raw:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{measure} value {raw:?} is not finite"));
    }
    if v < 0.0 && measure != Measure::Gfc {
        return Err(format!("{measure} value {raw:?} is negative"));
    }
    Ok(Some(v))
}

fn parse_row(row: &csv::StringRecord, cols: &Columns) -> std::result::Result<ObservationRecord, String> {
    let field = |i: usize| row.get(i).unwrap_or("");
    let country = field(cols.country);
    let sector = field(cols.sector);
    if country.is_empty() || sector.is_empty() {
        return Err("empty country or sector".into());
    }
    let year: i32 = field(cols.year)
        .parse()
        .map_err(|_| format!("year {:?} is not an integer", field(cols.year)))?;
    let mut values = [None; 4];
    for (slot, (col, measure)) in values
        .iter_mut()
        .zip(cols.measures.iter().zip(Measure::ALL))
    {
        if let Some(col) = col {
            *slot = parse_measure(field(*col), measure)?;
        }
    }
    Ok(ObservationRecord {
        country: country.to_string(),
        sector: sector.to_string(),
        year,
        cell: Cell {
            employment: values[0],
            value_added_pc: values[1],
            gfc: values[2],
            ulc: values[3],
        },
    })
}

/// Parses a long-form panel CSV.
///
/// All malformed rows are collected before failing so the error lists every
/// offending line.
pub fn read_panel<R: Read>(reader: R, options: &LoadOptions) -> Result<LoadedPanel> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let cols = locate_columns(&headers, &options.schema)?;

    let mut records = Vec::new();
    let mut bad_lines = Vec::new();
    let mut first_problem = None;
    let mut unknown_countries = BTreeSet::new();
    let mut unknown_sectors = BTreeSet::new();
    let (mut skipped_unknown, mut out_of_range) = (0, 0);

    for row in csv_reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let rec = match parse_row(&row, &cols) {
            Ok(rec) => rec,
            Err(msg) => {
                bad_lines.push(line);
                first_problem.get_or_insert(format!("line {line}: {msg}"));
                continue;
            }
        };
        if let Some((lo, hi)) = options.years {
            if rec.year < lo || rec.year > hi {
                out_of_range += 1;
                continue;
            }
        }
        let bad_country = options
            .known_countries
            .as_ref()
            .is_some_and(|k| !k.contains(&rec.country));
        let bad_sector = options
            .known_sectors
            .as_ref()
            .is_some_and(|k| !k.contains(&rec.sector));
        if bad_country {
            unknown_countries.insert(rec.country.clone());
        }
        if bad_sector {
            unknown_sectors.insert(rec.sector.clone());
        }
        if bad_country || bad_sector {
            skipped_unknown += 1;
            continue;
        }
        records.push(rec);
    }

    if !bad_lines.is_empty() {
        return Err(Error::MalformedRows {
            lines: bad_lines,
            detail: first_problem.unwrap_or_default(),
        });
    }
    if !options.allow_skip_unknown {
        if !unknown_countries.is_empty() {
            return Err(Error::UnknownCodes {
                kind: "country",
                codes: unknown_countries.into_iter().collect(),
            });
        }
        if !unknown_sectors.is_empty() {
            return Err(Error::UnknownCodes {
                kind: "sector",
                codes: unknown_sectors.into_iter().collect(),
            });
        }
    }

    let (panel, duplicates) = EmploymentPanel::from_records(records)?;
    let dropped = [
        ("exact duplicate row", duplicates),
        ("unknown country or sector code", skipped_unknown),
        ("year outside configured range", out_of_range),
    ]
    .into_iter()
    .filter(|(_, n)| *n > 0)
    .map(|(reason, count)| DroppedRows {
        reason: reason.to_string(),
        count,
    })
    .collect();
    Ok(LoadedPanel { panel, dropped })
}

/// Writes the canonical long-form CSV: every (country, sector, year) cell of
/// the panel grid, absent measures as empty fields.
pub fn write_panel_csv<W: Write>(panel: &EmploymentPanel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["country", "sector", "year", "employment", "value_added_pc", "gfc", "ulc"])?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for year in panel.years() {
        for (c, country) in panel.countries().iter().enumerate() {
            for (s, sector) in panel.sectors().iter().enumerate() {
                let cell = panel.cell(c, s, year).copied().unwrap_or_default();
                w.write_record([
                    country.clone(),
                    sector.clone(),
                    year.to_string(),
                    fmt(cell.employment),
                    fmt(cell.value_added_pc),
                    fmt(cell.gfc),
                    fmt(cell.ulc),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<panel csv>", e))?;
    Ok(())
}
