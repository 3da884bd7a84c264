use std::collections::BTreeMap;

use super::{Cell, EmploymentPanel, SectorTaxonomy};
use crate::error::{Error, Result};

/// Collapses raw activity codes into taxonomy classes.
///
/// Employment and GFC are summed. Value added per worker is recomputed as
/// aggregate value added over aggregate employment; unit labor cost becomes
/// the employment-weighted mean. A class measure is absent if any component
/// lacks an input it needs. Single-component classes are copied verbatim.
pub fn aggregate_sectors(panel: &EmploymentPanel, taxonomy: &SectorTaxonomy) -> Result<EmploymentPanel> {
    let unmapped: Vec<String> = panel
        .sectors()
        .iter()
        .filter(|code| taxonomy.class_of(code).is_none())
        .cloned()
        .collect();
    if !unmapped.is_empty() {
        return Err(Error::UnmappedCodes(unmapped));
    }

    let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (s, code) in panel.sectors().iter().enumerate() {
        let class = taxonomy.class_of(code).expect("checked above");
        members.entry(class.to_string()).or_default().push(s);
    }

    let classes: Vec<String> = members.keys().cloned().collect();
    let mut out = EmploymentPanel::empty(
        panel.countries().to_vec(),
        classes,
        panel.first_year(),
        panel.last_year(),
    );
    for year in panel.years() {
        for c in 0..panel.countries().len() {
            for (k, parts) in members.values().enumerate() {
                let cells: Vec<Cell> = parts
                    .iter()
                    .map(|&s| *panel.cell(c, s, year).expect("in range"))
                    .collect();
                *out.cell_mut(c, k, year).expect("in range") = combine(&cells);
            }
        }
    }
    Ok(out)
}

fn sum_all(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.sum()
}

fn weighted_by_employment(cells: &[Cell], pick: impl Fn(&Cell) -> Option<f64>) -> Option<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for cell in cells {
        let emp = cell.employment?;
        weighted += pick(cell)? * emp;
        weight += emp;
    }
    (weight > 0.0).then(|| weighted / weight)
}

fn combine(cells: &[Cell]) -> Cell {
    if let [single] = cells {
        return *single;
    }
    Cell {
        employment: sum_all(cells.iter().map(|c| c.employment)),
        gfc: sum_all(cells.iter().map(|c| c.gfc)),
        value_added_pc: weighted_by_employment(cells, |c| c.value_added_pc),
        ulc: weighted_by_employment(cells, |c| c.ulc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Measure, ObservationRecord};

    fn rec(country: &str, sector: &str, year: i32, emp: Option<f64>, va: Option<f64>) -> ObservationRecord {
        ObservationRecord {
            country: country.into(),
            sector: sector.into(),
            year,
            cell: Cell {
                employment: emp,
                value_added_pc: va,
                gfc: emp.map(|e| e / 10.0),
                ulc: None,
            },
        }
    }

    #[test]
    fn sums_within_class() {
        let (panel, _) = EmploymentPanel::from_records(vec![
            rec("AUT", "D24", 2000, Some(5.0), Some(2.0)),
            rec("AUT", "D25", 2000, Some(7.0), Some(8.0)),
        ])
        .unwrap();
        let tax = SectorTaxonomy::new([("D24", "D24T25", "Basic"), ("D25", "D24T25", "Basic")]).unwrap();
        let agg = aggregate_sectors(&panel, &tax).unwrap();
        assert_eq!(agg.sectors(), ["D24T25"]);
        assert_eq!(agg.value(0, 0, 2000, Measure::Employment), Some(12.0));
        let gfc = agg.value(0, 0, 2000, Measure::Gfc).unwrap();
        assert!((gfc - 1.2).abs() < 1e-12);
        // (5*2 + 7*8) / 12
        let va = agg.value(0, 0, 2000, Measure::ValueAddedPc).unwrap();
        assert!((va - 66.0 / 12.0).abs() < 1e-12);
        assert_eq!(agg.value(0, 0, 2000, Measure::Ulc), None);
    }

    #[test]
    fn identity_taxonomy_is_noop() {
        let (panel, _) = EmploymentPanel::from_records(vec![
            rec("AUT", "A", 2000, Some(5.0), Some(0.3)),
            rec("BEL", "B", 2001, Some(1.0), None),
        ])
        .unwrap();
        let tax = SectorTaxonomy::identity(panel.sectors(), "all").unwrap();
        assert_eq!(aggregate_sectors(&panel, &tax).unwrap(), panel);
    }

    #[test]
    fn missing_component_makes_class_absent() {
        let (panel, _) = EmploymentPanel::from_records(vec![
            rec("AUT", "x", 2000, Some(5.0), Some(1.0)),
            rec("AUT", "y", 2000, None, Some(1.0)),
        ])
        .unwrap();
        let tax = SectorTaxonomy::new([("x", "K", "G"), ("y", "K", "G")]).unwrap();
        let agg = aggregate_sectors(&panel, &tax).unwrap();
        assert_eq!(agg.value(0, 0, 2000, Measure::Employment), None);
        assert_eq!(agg.value(0, 0, 2000, Measure::ValueAddedPc), None);
    }

    #[test]
    fn unmapped_codes_listed() {
        let (panel, _) = EmploymentPanel::from_records(vec![
            rec("AUT", "q1", 2000, Some(1.0), None),
            rec("AUT", "q2", 2000, Some(1.0), None),
            rec("AUT", "x", 2000, Some(1.0), None),
        ])
        .unwrap();
        let tax = SectorTaxonomy::new([("x", "K", "G")]).unwrap();
        let err = aggregate_sectors(&panel, &tax).unwrap_err();
        assert!(matches!(err, Error::UnmappedCodes(c) if c == vec!["q1".to_string(), "q2".to_string()]));
    }
}
