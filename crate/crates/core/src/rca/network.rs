use std::fmt;

use crate::ingest::{CountryGroup, CountryGroups, SectorTaxonomy};

/// Dense row-major 0/1 matrix (countries × sectors).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![1; rows * cols],
        }
    }

    /// Builds from row-major booleans; panics on a length mismatch.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        Self::from_fn(rows.len(), cols, |r, c| {
            let row = rows[r].as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            row[c] != 0
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c] != 0
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r * self.cols + c] = value as u8;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn link_count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    /// Row degrees.
    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|&v| v as usize).sum())
            .collect()
    }

    /// Column degrees.
    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.cols];
        for r in 0..self.rows {
            for (sum, &v) in sums.iter_mut().zip(self.row(r)) {
                *sum += v as usize;
            }
        }
        sums
    }

    /// Submatrix keeping the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                f.write_str("; ")?;
            }
            for &v in self.row(r) {
                write!(f, "{v}")?;
            }
        }
        f.write_str("]")
    }
}

/// One year's country × sector specialization network.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteNetwork {
    pub year: i32,
    pub countries: Vec<String>,
    pub sectors: Vec<String>,
    /// Group tag per country, when known.
    pub country_groups: Vec<Option<CountryGroup>>,
    /// Sector-group tag per sector, when known.
    pub sector_groups: Vec<Option<String>>,
    pub matrix: BinaryMatrix,
}

impl BipartiteNetwork {
    pub fn new(year: i32, countries: Vec<String>, sectors: Vec<String>, matrix: BinaryMatrix) -> Self {
        assert_eq!(matrix.rows(), countries.len(), "row labels");
        assert_eq!(matrix.cols(), sectors.len(), "column labels");
        Self {
            year,
            country_groups: vec![None; countries.len()],
            sector_groups: vec![None; sectors.len()],
            countries,
            sectors,
            matrix,
        }
    }

    /// Attaches country-group and sector-group tags where known.
    pub fn tagged(mut self, groups: &CountryGroups, taxonomy: &SectorTaxonomy) -> Self {
        self.country_groups = self.countries.iter().map(|c| groups.group_of(c)).collect();
        self.sector_groups = self
            .sectors
            .iter()
            .map(|s| {
                // aggregated panels carry class names, raw ones carry codes
                taxonomy
                    .group_of_class(s)
                    .or_else(|| taxonomy.class_of(s).and_then(|class| taxonomy.group_of_class(class)))
                    .map(str::to_string)
            })
            .collect();
        self
    }

    pub fn with_matrix(&self, matrix: BinaryMatrix) -> Self {
        assert_eq!((matrix.rows(), matrix.cols()), (self.matrix.rows(), self.matrix.cols()));
        Self {
            matrix,
            ..self.clone()
        }
    }
}
