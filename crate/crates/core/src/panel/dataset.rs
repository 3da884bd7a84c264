use std::collections::{BTreeSet, HashMap};

use super::{Control, Dependent, ModelSpec, MotifTerms};
use super::estimate::{ColumnRole, PanelDataset};
use crate::bicm::{Level, NullMode, Scope, ZScoreResult};
use crate::error::{Error, Result};
use crate::ingest::{CountryGroup, CountryGroups, EmploymentPanel, Measure, SectorTaxonomy};

/// Standardizes the present values in place to mean 0 and sample sd 1;
/// returns the (mean, sd) used.
pub fn standardize(values: &mut [Option<f64>], name: &str) -> Result<(f64, f64)> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::DegenerateColumn(name.to_string()));
    }
    let mean = present.iter().sum::<f64>() / n as f64;
    let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateColumn(name.to_string()));
    }
    for v in values.iter_mut().flatten() {
        *v = (*v - mean) / sd;
    }
    Ok((mean, sd))
}

type ZKey<'a> = (Scope, &'a str, &'a str, i32);

struct Candidate {
    country: usize,
    sector: usize,
    year: i32,
}

/// Builds the regression dataset for `spec`.
///
/// Observations are (country, sector, t) with t from the window start plus
/// the lag; motif z-scores and the EMP/GFC controls are taken at t − lag,
/// the Entry and Recession dummies at t. Continuous variables are
/// standardized over all candidate rows, then rows missing any required
/// value are dropped.
pub fn build_dataset(
    panel: &EmploymentPanel,
    zscores: &[ZScoreResult],
    groups: &CountryGroups,
    taxonomy: &SectorTaxonomy,
    spec: &ModelSpec,
    years: Option<(i32, i32)>,
) -> Result<PanelDataset> {
    if spec.lag < 1 {
        return Err(Error::Config(format!("lag must be at least 1, got {}", spec.lag)));
    }
    let sectors: Vec<usize> = match &spec.sector_group {
        None => (0..panel.sectors().len()).collect(),
        Some(g) => {
            if !taxonomy.groups().iter().any(|t| t == g) {
                return Err(Error::Config(format!("unknown sector group {g:?}")));
            }
            (0..panel.sectors().len())
                .filter(|&s| taxonomy.group_of_class(&panel.sectors()[s]) == Some(g.as_str()))
                .collect()
        }
    };
    let membership = groups.resolve(panel.countries())?;

    let present = |m: Measure| panel.years().any(|y| panel.year_cells(y).is_some_and(|cells| cells.iter().any(|c| c.get(m).is_some())));
    if !present(Measure::ValueAddedPc) {
        return Err(Error::MissingVariable(Measure::ValueAddedPc.name().into()));
    }
    for (control, measure) in [(Control::Emp, Measure::Employment), (Control::Gfc, Measure::Gfc)] {
        if spec.controls.contains(&control) && !present(measure) {
            return Err(Error::MissingVariable(control.name().into()));
        }
    }

    let mut z: HashMap<ZKey, Option<f64>> = HashMap::new();
    for r in zscores {
        if r.level == Level::Node && r.null_mode == NullMode::Full {
            if let (Some(c), Some(s)) = (&r.country, &r.sector) {
                z.insert((r.scope, c.as_str(), s.as_str(), r.year), r.z);
            }
        }
    }
    let scopes: &[Scope] = match spec.motifs {
        MotifTerms::Overall => &[Scope::Overall],
        MotifTerms::InternalExternal => &[Scope::Internal, Scope::External],
    };
    for (scope, name) in scopes.iter().zip(spec.motif_names()) {
        if !z.keys().any(|k| k.0 == *scope) {
            return Err(Error::MissingVariable(name.to_string()));
        }
    }

    let (lo, hi) = match years {
        Some((a, b)) => (a.max(panel.first_year()), b.min(panel.last_year())),
        None => (panel.first_year(), panel.last_year()),
    };
    let mut rows = Vec::new();
    for t in lo + spec.lag..=hi {
        for c in 0..panel.countries().len() {
            for &s in &sectors {
                rows.push(Candidate { country: c, sector: s, year: t });
            }
        }
    }

    let value = |r: &Candidate, year: i32, m: Measure| panel.value(r.country, r.sector, year, m);
    let mut y: Vec<Option<f64>> = rows
        .iter()
        .map(|r| match spec.dependent {
            Dependent::Level => value(r, r.year, Measure::ValueAddedPc),
            Dependent::FirstDifference => {
                Some(value(r, r.year, Measure::ValueAddedPc)? - value(r, r.year - 1, Measure::ValueAddedPc)?)
            }
        })
        .collect();
    let dependent = match spec.dependent {
        Dependent::Level => "value_added_pc",
        Dependent::FirstDifference => "d.value_added_pc",
    };
    if spec.standardize_dependent {
        standardize(&mut y, dependent)?;
    }

    let mut continuous: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for (scope, name) in scopes.iter().zip(spec.motif_names()) {
        let mut col: Vec<Option<f64>> = rows
            .iter()
            .map(|r| {
                let key = (*scope, panel.countries()[r.country].as_str(), panel.sectors()[r.sector].as_str(), r.year - spec.lag);
                z.get(&key).copied().flatten()
            })
            .collect();
        standardize(&mut col, name)?;
        continuous.push((name.to_string(), col));
    }
    for (control, measure) in [(Control::Emp, Measure::Employment), (Control::Gfc, Measure::Gfc)] {
        if spec.controls.contains(&control) {
            let mut col: Vec<Option<f64>> = rows.iter().map(|r| value(r, r.year - spec.lag, measure)).collect();
            standardize(&mut col, control.name())?;
            continuous.push((control.name().to_string(), col));
        }
    }

    let keep: Vec<usize> = (0..rows.len())
        .filter(|&i| y[i].is_some() && continuous.iter().all(|(_, col)| col[i].is_some()))
        .collect();
    let dropped = rows.len() - keep.len();
    if keep.is_empty() {
        return Err(Error::EmptySample(format!(
            "{} candidate rows in {}..={hi}, all dropped for missing values",
            rows.len(),
            lo + spec.lag
        )));
    }

    let get = |name: &str| -> Vec<f64> {
        let col = &continuous.iter().find(|(n, _)| n == name).expect("built above").1;
        keep.iter().map(|&i| col[i].expect("complete row")).collect()
    };
    let cee: Vec<f64> = keep.iter().map(|&i| (membership[rows[i].country] == CountryGroup::Cee) as u8 as f64).collect();
    let entry: Vec<f64> = keep.iter().map(|&i| (rows[i].year >= spec.entry_year) as u8 as f64).collect();
    let recession: Vec<f64> = keep.iter().map(|&i| spec.recession_years.contains(&rows[i].year) as u8 as f64).collect();
    let product = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<f64>>();

    let mut columns: Vec<(String, ColumnRole, Vec<f64>)> = Vec::new();
    for name in spec.motif_names() {
        columns.push((name.to_string(), ColumnRole::Regressor, get(name)));
    }
    if spec.interactions {
        for name in spec.motif_names() {
            let m = get(name);
            columns.push((format!("CEE#{name}"), ColumnRole::Regressor, product(&cee, &m)));
            columns.push((format!("Entry#{name}"), ColumnRole::Regressor, product(&entry, &m)));
            columns.push((format!("CEE#Entry#{name}"), ColumnRole::Regressor, product(&product(&cee, &entry), &m)));
        }
    }
    for control in &spec.controls {
        let column = match control {
            Control::Entry => (control.name().into(), ColumnRole::TimeDummy, entry.clone()),
            Control::Recession => (control.name().into(), ColumnRole::TimeDummy, recession.clone()),
            Control::Emp | Control::Gfc => (control.name().into(), ColumnRole::Regressor, get(control.name())),
        };
        columns.push(column);
    }
    let sample_years: BTreeSet<i32> = keep.iter().map(|&i| rows[i].year).collect();
    let first = *sample_years.first().expect("non-empty sample");
    if spec.year_effects {
        for &year in sample_years.iter().skip(1) {
            let d = keep.iter().map(|&i| (rows[i].year == year) as u8 as f64).collect();
            columns.push((format!("year={year}"), ColumnRole::YearEffect, d));
        }
    }
    if spec.trend {
        let t = keep.iter().map(|&i| (rows[i].year - first) as f64).collect();
        columns.push(("trend".into(), ColumnRole::Trend, t));
    }

    let units: Vec<String> = keep
        .iter()
        .map(|&i| format!("{}/{}", panel.countries()[rows[i].country], panel.sectors()[rows[i].sector]))
        .collect();
    let clusters: Vec<String> = keep.iter().map(|&i| panel.countries()[rows[i].country].clone()).collect();
    let years: Vec<i32> = keep.iter().map(|&i| rows[i].year).collect();
    let y = keep.iter().map(|&i| y[i].expect("complete row")).collect();
    let mut data = PanelDataset::from_columns(dependent, &units, &clusters, &years, y, columns)?;
    data.dropped = dropped;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Cell, ObservationRecord};

    fn record(country: &str, sector: &str, year: i32, emp: f64, va: Option<f64>, gfc: f64) -> ObservationRecord {
        ObservationRecord {
            country: country.into(),
            sector: sector.into(),
            year,
            cell: Cell {
                employment: Some(emp),
                value_added_pc: va,
                gfc: Some(gfc),
                ulc: None,
            },
        }
    }

    fn node(country: &str, sector: &str, year: i32, scope: Scope, z: Option<f64>) -> ZScoreResult {
        ZScoreResult {
            year,
            level: Level::Node,
            scope,
            null_mode: NullMode::Full,
            group: None,
            country: Some(country.into()),
            sector: Some(sector.into()),
            observed: 0.0,
            mean: 0.0,
            sd: 1.0,
            z,
        }
    }

    /// Two countries × two sectors over `years`, with values that encode
    /// their coordinates so lags can be checked by hand.
    fn fixture(years: std::ops::RangeInclusive<i32>) -> (EmploymentPanel, Vec<ZScoreResult>) {
        let mut records = Vec::new();
        let mut z = Vec::new();
        for (ci, c) in ["AUT", "POL"].iter().enumerate() {
            for (si, s) in ["D01T03", "D24T25"].iter().enumerate() {
                for year in years.clone() {
                    let code = (ci * 10 + si) as f64 + (year - 2000) as f64 / 100.0;
                    records.push(record(c, s, year, 100.0 + code, Some(1000.0 + code), code * 2.0));
                    for scope in [Scope::Overall, Scope::Internal, Scope::External] {
                        z.push(node(c, s, year, scope, Some(code + scope as u8 as f64)));
                    }
                }
            }
        }
        (EmploymentPanel::from_records(records).unwrap().0, z)
    }

    fn unstandardized() -> ModelSpec {
        ModelSpec {
            standardize_dependent: false,
            year_effects: false,
            trend: false,
            ..ModelSpec::default()
        }
    }

    #[test]
    fn two_years_leave_one_row_per_unit() {
        let (panel, z) = fixture(2003..=2004);
        let data = build_dataset(&panel, &z, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &unstandardized(), None).unwrap();
        assert_eq!(data.rows(), 4);
        assert_eq!(data.unit_count(), 4);
        assert!(data.year.iter().all(|&y| y == 2004));
    }

    #[test]
    fn lags_match_manual_shift() {
        let (panel, z) = fixture(2000..=2003);
        let data = build_dataset(&panel, &z, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &unstandardized(), None).unwrap();
        // manual table: y at t, Overall z at t-1, both decoded from coordinates
        let mut overall: Vec<Option<f64>> = Vec::new();
        let mut expected_y = Vec::new();
        for t in 2001..=2003 {
            for ci in 0..2 {
                for si in 0..2 {
                    let code = |year: i32| (ci * 10 + si) as f64 + (year - 2000) as f64 / 100.0;
                    overall.push(Some(code(t - 1)));
                    expected_y.push(1000.0 + code(t));
                }
            }
        }
        standardize(&mut overall, "Overall").unwrap();
        assert_eq!(data.y, expected_y);
        let got = data.column("Overall").unwrap();
        for (g, e) in got.iter().zip(overall) {
            assert!((g - e.unwrap()).abs() < 1e-12);
        }
        // entry dummy at the observation year
        let entry = data.column("Entry").unwrap();
        assert!(entry.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn interactions_and_filters() {
        let (panel, z) = fixture(2002..=2006);
        let spec = ModelSpec {
            motifs: MotifTerms::InternalExternal,
            interactions: true,
            sector_group: Some("Basic manufacturing".into()),
            ..unstandardized()
        };
        let data = build_dataset(&panel, &z, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &spec, None).unwrap();
        assert!(data.unit_labels.iter().all(|u| u.ends_with("D24T25")));
        let internal = data.column("Internal").unwrap();
        let inter = data.column("CEE#Entry#Internal").unwrap();
        for r in 0..data.rows() {
            let cee = data.cluster_labels[data.cluster[r]] == "POL";
            let entry = data.year[r] >= 2004;
            let expected = if cee && entry { internal[r] } else { 0.0 };
            assert_eq!(inter[r], expected);
        }
    }

    #[test]
    fn missing_values_dropped_and_counted() {
        let (panel, mut z) = fixture(2000..=2003);
        z.retain(|r| !(r.country.as_deref() == Some("AUT") && r.year == 2001));
        let data = build_dataset(&panel, &z, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &unstandardized(), None).unwrap();
        assert_eq!(data.dropped, 2);
        assert_eq!(data.rows(), 10);
    }

    #[test]
    fn absent_variable_is_named() {
        let (panel, z) = fixture(2000..=2003);
        let only_overall: Vec<ZScoreResult> = z.into_iter().filter(|r| r.scope == Scope::Overall).collect();
        let spec = ModelSpec {
            motifs: MotifTerms::InternalExternal,
            ..unstandardized()
        };
        let err = build_dataset(&panel, &only_overall, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &spec, None).unwrap_err();
        assert!(matches!(err, Error::MissingVariable(v) if v == "Internal"));
    }

    #[test]
    fn constant_column_is_degenerate() {
        let mut v = vec![Some(3.0), None, Some(3.0)];
        assert!(matches!(standardize(&mut v, "x"), Err(Error::DegenerateColumn(_))));
    }

    #[test]
    fn standardizing_twice_is_idempotent() {
        let mut v: Vec<Option<f64>> = (0..50).map(|i| Some(((i * 37) % 11) as f64 * 1.7)).collect();
        standardize(&mut v, "x").unwrap();
        let once = v.clone();
        standardize(&mut v, "x").unwrap();
        for (a, b) in once.iter().zip(&v) {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_sample_reported() {
        let records = ["AUT", "POL"]
            .iter()
            .flat_map(|c| (2000..=2002).map(move |y| record(c, "D01T03", y, 10.0 + y as f64, (y == 2000).then_some(5.0), 1.0 + y as f64)))
            .collect();
        let panel = EmploymentPanel::from_records(records).unwrap().0;
        let (_, z) = fixture(2000..=2002);
        let err = build_dataset(&panel, &z, &CountryGroups::eu_default(), &SectorTaxonomy::stan_default(), &unstandardized(), None).unwrap_err();
        assert!(matches!(err, Error::EmptySample(msg) if msg.contains("4 candidate rows")));
    }
}
