use crate::error::{Error, Result};
use crate::ingest::{CountryGroup, CountryGroups, EmploymentPanel, Measure};
use crate::motifs::motif_node;

use super::{network_for_year, rca_matrix};

/// Quantity correlated against its base-year value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMeasure {
    Panel(Measure),
    /// Node-level co-specialization count `(u_s - 1) M_cs`.
    MotifCount,
}

impl CorrelationMeasure {
    pub fn name(self) -> &'static str {
        match self {
            CorrelationMeasure::Panel(m) => m.name(),
            CorrelationMeasure::MotifCount => "motif_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFilter {
    All,
    Only(CountryGroup),
}

impl GroupFilter {
    pub fn label(self) -> &'static str {
        match self {
            GroupFilter::All => "all",
            GroupFilter::Only(g) => g.label(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationOptions {
    pub base_year: i32,
    pub filter: GroupFilter,
    /// Correlate `ln(x)`; non-positive values drop out.
    pub log_transform: bool,
    /// RCA threshold used when the measure is the motif count.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearCorrelation {
    pub year: i32,
    pub pairs: usize,
    /// `None` with fewer than 3 pairs or zero variance.
    pub coefficient: Option<f64>,
}

/// Pearson correlation, centered two-pass form.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn year_values(panel: &EmploymentPanel, measure: CorrelationMeasure, year: i32, threshold: f64) -> Result<Vec<Option<f64>>> {
    match measure {
        CorrelationMeasure::Panel(m) => {
            let cells = panel.year_cells(year).ok_or(Error::YearAbsent(year))?;
            Ok(cells.iter().map(|c| c.get(m)).collect())
        }
        CorrelationMeasure::MotifCount => {
            let rca = rca_matrix(panel, year)?;
            let counts = motif_node(&network_for_year(panel, year, threshold)?.matrix);
            Ok(rca
                .values()
                .iter()
                .zip(counts)
                .map(|(r, m)| r.map(|_| m as f64))
                .collect())
        }
    }
}

/// Per-year correlation of a cell measure with its base-year value, across
/// the (country, sector) cells observed in both years.
pub fn base_year_correlation(
    panel: &EmploymentPanel,
    measure: CorrelationMeasure,
    groups: &CountryGroups,
    options: &CorrelationOptions,
) -> Result<Vec<YearCorrelation>> {
    let n_s = panel.sectors().len();
    let keep_country: Vec<bool> = panel
        .countries()
        .iter()
        .map(|c| match options.filter {
            GroupFilter::All => true,
            GroupFilter::Only(g) => groups.group_of(c) == Some(g),
        })
        .collect();
    let transform = |v: Option<f64>| -> Option<f64> {
        let v = v?;
        if options.log_transform {
            (v > 0.0).then(|| v.ln())
        } else {
            Some(v)
        }
    };

    let base = year_values(panel, measure, options.base_year, options.threshold)?;
    let mut out = Vec::new();
    for year in panel.years() {
        let current = match year_values(panel, measure, year, options.threshold) {
            Ok(v) => v,
            // a year without usable employment has no motif counts
            Err(Error::EmptyYear(_)) => {
                out.push(YearCorrelation { year, pairs: 0, coefficient: None });
                continue;
            }
            Err(e) => return Err(e),
        };
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, (b, v)) in base.iter().zip(&current).enumerate() {
            if !keep_country[i / n_s] {
                continue;
            }
            if let (Some(b), Some(v)) = (transform(*b), transform(*v)) {
                xs.push(b);
                ys.push(v);
            }
        }
        out.push(YearCorrelation {
            year,
            pairs: xs.len(),
            coefficient: pearson(&xs, &ys),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Cell, ObservationRecord};

    fn panel(values: impl Fn(usize, usize, i32) -> f64) -> EmploymentPanel {
        let mut recs = Vec::new();
        for year in 2000..=2003 {
            for (c, country) in ["AUT", "BEL", "POL", "HUN"].iter().enumerate() {
                for s in 0..3 {
                    recs.push(ObservationRecord {
                        country: country.to_string(),
                        sector: format!("S{s}"),
                        year,
                        cell: Cell {
                            employment: Some(values(c, s, year)),
                            ulc: Some(values(c, s, year) * 0.5),
                            ..Cell::default()
                        },
                    });
                }
            }
        }
        EmploymentPanel::from_records(recs).unwrap().0
    }

    fn options(filter: GroupFilter) -> CorrelationOptions {
        CorrelationOptions {
            base_year: 2000,
            filter,
            log_transform: false,
            threshold: 1.0,
        }
    }

    #[test]
    fn constant_over_time_gives_one() {
        let p = panel(|c, s, _| (1 + c * 3 + s * s) as f64);
        let out = base_year_correlation(
            &p,
            CorrelationMeasure::Panel(Measure::Employment),
            &CountryGroups::eu_default(),
            &options(GroupFilter::All),
        )
        .unwrap();
        assert_eq!(out.len(), 4);
        for yc in out {
            assert_eq!(yc.pairs, 12);
            assert!((yc.coefficient.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negated_shifted_gives_minus_one() {
        let p = panel(|c, s, y| {
            let base = (1 + c * 3 + s * s) as f64;
            if y == 2000 {
                base
            } else {
                100.0 - base
            }
        });
        let out = base_year_correlation(
            &p,
            CorrelationMeasure::Panel(Measure::Ulc),
            &CountryGroups::eu_default(),
            &options(GroupFilter::Only(CountryGroup::Cee)),
        )
        .unwrap();
        assert_eq!(out[0].pairs, 6);
        assert!((out[0].coefficient.unwrap() - 1.0).abs() < 1e-12);
        for yc in &out[1..] {
            assert!((yc.coefficient.unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_pairs_or_flat_is_undefined() {
        assert_eq!(pearson(&[1.0, 2.0], &[2.0, 1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[2.0, 1.0, 0.0]), None);
    }

    #[test]
    fn motif_count_measure_runs() {
        let p = panel(|c, s, y| ((c + s + y as usize) % 4 + 1) as f64);
        let out = base_year_correlation(
            &p,
            CorrelationMeasure::MotifCount,
            &CountryGroups::eu_default(),
            &options(GroupFilter::All),
        )
        .unwrap();
        assert_eq!(out[0].pairs, 12);
        assert!((out[0].coefficient.unwrap() - 1.0).abs() < 1e-12);
    }
}
