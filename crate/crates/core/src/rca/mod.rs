//! Balassa RCA, binarization into specialization networks, degree sequences
//! and the country projection.

mod correlation;
mod io;
mod network;

pub use correlation::{base_year_correlation, pearson, CorrelationMeasure, CorrelationOptions, GroupFilter, YearCorrelation};
pub use io::{read_dense, read_edge_list, write_dense, write_edge_list, write_rca_csv};
pub use network::{BinaryMatrix, BipartiteNetwork};

use crate::error::{Error, Result};
use crate::ingest::{EmploymentPanel, Measure};

/// RCA values for one year; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RcaMatrix {
    pub year: i32,
    pub countries: Vec<String>,
    pub sectors: Vec<String>,
    values: Vec<Option<f64>>,
}

impl RcaMatrix {
    pub fn from_values(
        year: i32,
        countries: Vec<String>,
        sectors: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(values.len(), countries.len() * sectors.len());
        Self {
            year,
            countries,
            sectors,
            values,
        }
    }

    pub fn get(&self, c: usize, s: usize) -> Option<f64> {
        self.values[c * self.sectors.len() + s]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn undefined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Balassa index on employment:
/// `(M_cs / Σ_s' M_cs') / (Σ_c' M_c's / Σ_c's' M_c's')`.
///
/// Totals run over cells with recorded employment. A cell is undefined when
/// its own employment is missing, or its country or sector total is zero.
pub fn rca_matrix(panel: &EmploymentPanel, year: i32) -> Result<RcaMatrix> {
    let cells = panel.year_cells(year).ok_or(Error::YearAbsent(year))?;
    let (n_c, n_s) = (panel.countries().len(), panel.sectors().len());
    let emp: Vec<Option<f64>> = cells.iter().map(|c| c.get(Measure::Employment)).collect();

    let mut country_total = vec![0.0; n_c];
    let mut sector_total = vec![0.0; n_s];
    let mut any = false;
    for c in 0..n_c {
        for s in 0..n_s {
            if let Some(m) = emp[c * n_s + s] {
                country_total[c] += m;
                sector_total[s] += m;
                any = true;
            }
        }
    }
    let grand: f64 = country_total.iter().sum();
    if !any || grand <= 0.0 {
        return Err(Error::EmptyYear(year));
    }

    let values = (0..n_c * n_s)
        .map(|i| {
            let (c, s) = (i / n_s, i % n_s);
            let m = emp[i]?;
            if country_total[c] <= 0.0 || sector_total[s] <= 0.0 {
                return None;
            }
            Some((m / country_total[c]) / (sector_total[s] / grand))
        })
        .collect();
    Ok(RcaMatrix {
        year,
        countries: panel.countries().to_vec(),
        sectors: panel.sectors().to_vec(),
        values,
    })
}

/// Link iff the RCA is defined and `>= threshold`.
pub fn binarize(rca: &RcaMatrix, threshold: f64) -> BipartiteNetwork {
    let n_s = rca.sectors.len();
    let matrix = BinaryMatrix::from_fn(rca.countries.len(), n_s, |c, s| {
        rca.get(c, s).is_some_and(|v| v >= threshold)
    });
    BipartiteNetwork::new(rca.year, rca.countries.clone(), rca.sectors.clone(), matrix)
}

/// RCA followed by binarization for one year of the panel.
pub fn network_for_year(panel: &EmploymentPanel, year: i32, threshold: f64) -> Result<BipartiteNetwork> {
    Ok(binarize(&rca_matrix(panel, year)?, threshold))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequences {
    /// Sectors each country is specialized in.
    pub diversification: Vec<usize>,
    /// Countries specialized in each sector.
    pub ubiquity: Vec<usize>,
}

impl DegreeSequences {
    pub fn link_count(&self) -> usize {
        self.diversification.iter().sum()
    }
}

pub fn degrees(matrix: &BinaryMatrix) -> DegreeSequences {
    DegreeSequences {
        diversification: matrix.row_sums(),
        ubiquity: matrix.col_sums(),
    }
}

/// Country × country count of shared specialized sectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryProjection {
    pub year: i32,
    size: usize,
    values: Vec<u64>,
}

impl CountryProjection {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, c: usize, d: usize) -> u64 {
        self.values[c * self.size + d]
    }

    /// Half the off-diagonal sum: the number of co-specialized country pairs
    /// summed over sectors.
    pub fn off_diagonal_half_sum(&self) -> u64 {
        let mut total = 0;
        for c in 0..self.size {
            for d in (c + 1)..self.size {
                total += self.get(c, d);
            }
        }
        total
    }
}

pub fn project_countries(net: &BipartiteNetwork) -> CountryProjection {
    let m = &net.matrix;
    let n = m.rows();
    let mut values = vec![0u64; n * n];
    for c in 0..n {
        for d in c..n {
            let shared = m
                .row(c)
                .iter()
                .zip(m.row(d))
                .filter(|(a, b)| **a != 0 && **b != 0)
                .count() as u64;
            values[c * n + d] = shared;
            values[d * n + c] = shared;
        }
    }
    CountryProjection {
        year: net.year,
        size: n,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Cell, ObservationRecord};

    pub(crate) fn panel_from(rows: &[&[f64]], year: i32) -> EmploymentPanel {
        let mut recs = Vec::new();
        for (c, row) in rows.iter().enumerate() {
            for (s, &v) in row.iter().enumerate() {
                recs.push(ObservationRecord {
                    country: format!("C{c:02}"),
                    sector: format!("S{s:02}"),
                    year,
                    cell: Cell {
                        employment: Some(v),
                        ..Cell::default()
                    },
                });
            }
        }
        EmploymentPanel::from_records(recs).unwrap().0
    }

    #[test]
    fn uniform_panel_gives_unit_rca() {
        let panel = panel_from(&[&[4.0; 4], &[4.0; 4], &[4.0; 4]], 2000);
        let rca = rca_matrix(&panel, 2000).unwrap();
        assert!(rca.values().iter().all(|v| *v == Some(1.0)));
        let net = binarize(&rca, 1.0);
        assert_eq!(net.matrix, BinaryMatrix::ones(3, 4));
    }

    #[test]
    fn diagonal_panel() {
        let panel = panel_from(&[&[10.0, 0.0], &[0.0, 10.0]], 2000);
        let rca = rca_matrix(&panel, 2000).unwrap();
        assert_eq!(rca.values(), &[Some(2.0), Some(0.0), Some(0.0), Some(2.0)]);
        let net = binarize(&rca, 1.0);
        assert_eq!(net.matrix, BinaryMatrix::from_rows(&[[1, 0], [0, 1]]));
    }

    #[test]
    fn zero_sector_is_undefined_and_unlinked() {
        let panel = panel_from(&[&[3.0, 0.0, 1.0], &[1.0, 0.0, 3.0]], 2000);
        let rca = rca_matrix(&panel, 2000).unwrap();
        assert_eq!(rca.get(0, 1), None);
        assert_eq!(rca.get(1, 1), None);
        assert_eq!(rca.undefined_count(), 2);
        let net = binarize(&rca, 0.0);
        assert!(!net.matrix.get(0, 1));
        assert!(net.matrix.get(0, 0));
    }

    #[test]
    fn absent_year_and_empty_year() {
        let panel = panel_from(&[&[1.0]], 2000);
        assert!(matches!(rca_matrix(&panel, 1999), Err(Error::YearAbsent(1999))));
        let zero = panel_from(&[&[0.0, 0.0]], 2000);
        assert!(matches!(rca_matrix(&zero, 2000), Err(Error::EmptyYear(2000))));
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        let rca = RcaMatrix::from_values(
            2000,
            vec!["a".into()],
            vec!["x".into(), "y".into(), "z".into()],
            vec![Some(1.0), Some(0.999_999_999), None],
        );
        let net = binarize(&rca, 1.0);
        assert_eq!(net.matrix, BinaryMatrix::from_rows(&[[1, 0, 0]]));
    }

    #[test]
    fn degree_sequences() {
        let d = degrees(&BinaryMatrix::from_rows(&[[1, 0], [0, 1]]));
        assert_eq!(d.diversification, vec![1, 1]);
        assert_eq!(d.ubiquity, vec![1, 1]);
        let d = degrees(&BinaryMatrix::ones(3, 4));
        assert_eq!(d.diversification, vec![4, 4, 4]);
        assert_eq!(d.ubiquity, vec![3, 3, 3, 3]);
    }

    #[test]
    fn projection_small_cases() {
        let net = BipartiteNetwork::new(
            2000,
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            BinaryMatrix::from_rows(&[[1, 1], [1, 0]]),
        );
        let z = project_countries(&net);
        assert_eq!((z.get(0, 0), z.get(0, 1), z.get(1, 0), z.get(1, 1)), (2, 1, 1, 1));

        let disjoint = net.with_matrix(BinaryMatrix::from_rows(&[[1, 0], [0, 1]]));
        assert_eq!(project_countries(&disjoint).off_diagonal_half_sum(), 0);
    }
}
