use std::fmt;

use super::{EmploymentPanel, Measure};

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    /// `count` cells lack `measure` in `year`.
    MissingCells { measure: Measure, year: i32, count: usize },
    /// Zero employment makes the country-sector RCA degenerate.
    ZeroEmployment { country: String, sector: String, year: i32 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::MissingCells { measure, year, count } => {
                write!(f, "missing {measure} in {year}: {count} cell(s)")
            }
            Issue::ZeroEmployment { country, sector, year } => write!(
                f,
                "zero employment at ({country}, {sector}, {year}): degenerate RCA risk"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryCoverage {
    pub country: String,
    /// Years in which at least one sector reports employment.
    pub years: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub coverage: Vec<CountryCoverage>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn missing(&self, measure: Measure, year: i32) -> usize {
        self.issues
            .iter()
            .find_map(|i| match i {
                Issue::MissingCells { measure: m, year: y, count } if *m == measure && *y == year => {
                    Some(*count)
                }
                _ => None,
            })
            .unwrap_or(0)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "issues: {}", self.issues.len())?;
        for issue in &self.issues {
            writeln!(f, "  {issue}")?;
        }
        writeln!(f, "coverage:")?;
        for cov in &self.coverage {
            let span = match (cov.years.first(), cov.years.last()) {
                (Some(a), Some(b)) => format!("{a}-{b} ({} years)", cov.years.len()),
                _ => "no data".to_string(),
            };
            writeln!(f, "  {}: {span}", cov.country)?;
        }
        Ok(())
    }
}

pub fn validate_panel(panel: &EmploymentPanel) -> ValidationReport {
    let mut issues = Vec::new();
    for measure in Measure::ALL {
        for year in panel.years() {
            let count = panel
                .year_cells(year)
                .map_or(0, |cells| cells.iter().filter(|c| c.get(measure).is_none()).count());
            if count > 0 {
                issues.push(Issue::MissingCells { measure, year, count });
            }
        }
    }
    for year in panel.years() {
        for (c, country) in panel.countries().iter().enumerate() {
            for (s, sector) in panel.sectors().iter().enumerate() {
                if panel.value(c, s, year, Measure::Employment) == Some(0.0) {
                    issues.push(Issue::ZeroEmployment {
                        country: country.clone(),
                        sector: sector.clone(),
                        year,
                    });
                }
            }
        }
    }
    let coverage = panel
        .countries()
        .iter()
        .enumerate()
        .map(|(c, country)| CountryCoverage {
            country: country.clone(),
            years: panel
                .years()
                .filter(|&y| {
                    (0..panel.sectors().len())
                        .any(|s| panel.value(c, s, y, Measure::Employment).is_some())
                })
                .collect(),
        })
        .collect();
    ValidationReport { issues, coverage }
}
