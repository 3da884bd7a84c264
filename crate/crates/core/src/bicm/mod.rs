//! Bipartite Configuration Model: maximum-entropy ensemble of binary
//! country × sector matrices whose expected degrees match the observed ones.
//!
//! Links are independent with `p_cs = x_c y_s / (1 + x_c y_s)`. [`fit`]
//! solves for the multipliers, [`sample`] draws from the ensemble and
//! [`zscores`] scores observed motif counts against it.

mod ensemble;
mod fit;
mod io;
mod zscore;

pub use ensemble::{
    analytic_motif_mean, exact_ensemble_stats, fill_sample, matrix_log_probability, sample, sample_one,
    sampled_stats, EnsembleStats, ENUMERATION_LIMIT,
};
pub use fit::{fit, FitOptions};
pub use io::{read_model, write_model};
pub use zscore::{
    group_refit_zscore, read_zscore_csv, write_zscore_csv, zscores, Level, NullMode, Scope, ZScoreOptions,
    ZScoreResult,
};

use crate::error::{Error, Result};

/// Independent link probabilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProbabilities {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl LinkProbabilities {
    pub fn new(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} probabilities for a {rows}x{cols} matrix",
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Dimension(format!("probability {bad} outside [0, 1]")));
        }
        Ok(Self { rows, cols, p })
    }

    pub fn uniform(rows: usize, cols: usize, value: f64) -> Self {
        Self::new(rows, cols, vec![value; rows * cols]).expect("valid probability")
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
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.p[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Expected row degrees `Σ_s p_cs`.
    pub fn expected_row_degrees(&self) -> Vec<f64> {
        self.p.chunks(self.cols.max(1)).take(self.rows).map(|r| r.iter().sum()).collect()
    }

    /// Expected column degrees `Σ_c p_cs`.
    pub fn expected_col_degrees(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (o, v) in out.iter_mut().zip(&self.p[r * self.cols..(r + 1) * self.cols]) {
                *o += v;
            }
        }
        out
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut p = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            p.extend_from_slice(&self.p[r * self.cols..(r + 1) * self.cols]);
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            p,
        }
    }
}

/// Solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Max absolute difference between expected and observed degree.
    pub residual: f64,
    pub iterations: usize,
    /// Newton steps taken after the fixed-point iteration stalled.
    pub newton_steps: usize,
}

/// A fitted (or directly parameterized) BiCM.
///
/// Multipliers of `0` and `+inf` encode deterministic nodes: all links to
/// the still-free partners absent or present. Each such node carries the
/// pass in which it was pinned; between two deterministic nodes the one
/// pinned earlier decides the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BicmModel {
    pub year: i32,
    x: Vec<f64>,
    y: Vec<f64>,
    x_pass: Vec<Option<u32>>,
    y_pass: Vec<Option<u32>>,
    probabilities: LinkProbabilities,
    pub diagnostics: Option<FitDiagnostics>,
}

/// `x y / (1 + x y)` with the deterministic limits spelled out.
pub(crate) fn link_probability(x: f64, y: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        0.0
    } else if x.is_infinite() || y.is_infinite() {
        1.0
    } else {
        let xy = x * y;
        if xy.is_infinite() {
            1.0
        } else {
            xy / (1.0 + xy)
        }
    }
}

fn deterministic(v: f64) -> bool {
    v == 0.0 || v.is_infinite()
}

impl BicmModel {
    /// Every `0`/`inf` multiplier is pinned in the same pass, so an empty
    /// row may not meet a full column.
    pub fn from_multipliers(year: i32, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let pass = |v: &[f64]| v.iter().map(|&m| deterministic(m).then_some(0)).collect();
        let (x_pass, y_pass) = (pass(&x), pass(&y));
        Self::from_pinned(year, x, y, x_pass, y_pass)
    }

    /// Multipliers with explicit pin passes for the deterministic nodes.
    pub fn from_pinned(year: i32, x: Vec<f64>, y: Vec<f64>, x_pass: Vec<Option<u32>>, y_pass: Vec<Option<u32>>) -> Result<Self> {
        if let Some(bad) = x.iter().chain(&y).find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::Dimension(format!("multiplier {bad} must be non-negative")));
        }
        if x_pass.len() != x.len() || y_pass.len() != y.len() {
            return Err(Error::Dimension("pin passes do not match multipliers".into()));
        }
        for (v, pass) in x.iter().zip(&x_pass).chain(y.iter().zip(&y_pass)) {
            if deterministic(*v) != pass.is_some() {
                return Err(Error::Dimension(format!("multiplier {v} and pin pass {pass:?} disagree")));
            }
        }
        let mut p = Vec::with_capacity(x.len() * y.len());
        for (c, (&xc, pc)) in x.iter().zip(&x_pass).enumerate() {
            for (s, (&ys, ps)) in y.iter().zip(&y_pass).enumerate() {
                let value = match (pc, ps) {
                    (Some(a), Some(b)) if a < b => link_probability(xc, 1.0),
                    (Some(a), Some(b)) if b < a => link_probability(1.0, ys),
                    (Some(_), Some(_)) if (xc == 0.0) != (ys == 0.0) => {
                        return Err(Error::InconsistentDegrees(format!(
                            "row {c} and column {s} force contradicting links"
                        )))
                    }
                    _ => link_probability(xc, ys),
                };
                p.push(value);
            }
        }
        let probabilities = LinkProbabilities::new(x.len(), y.len(), p)?;
        Ok(Self {
            year,
            x,
            y,
            x_pass,
            y_pass,
            probabilities,
            diagnostics: None,
        })
    }

    /// Pin pass of each country (`None` for free nodes).
    pub fn country_pins(&self) -> &[Option<u32>] {
        &self.x_pass
    }

    pub fn sector_pins(&self) -> &[Option<u32>] {
        &self.y_pass
    }

    pub fn country_multipliers(&self) -> &[f64] {
        &self.x
    }

    pub fn sector_multipliers(&self) -> &[f64] {
        &self.y
    }

    pub fn probabilities(&self) -> &LinkProbabilities {
        &self.probabilities
    }

    pub fn p(&self, c: usize, s: usize) -> f64 {
        self.probabilities.get(c, s)
    }

    /// Max absolute deviation of expected from the given degrees.
    pub fn degree_residual(&self, diversification: &[usize], ubiquity: &[usize]) -> f64 {
        let rows = self.probabilities.expected_row_degrees();
        let cols = self.probabilities.expected_col_degrees();
        rows.iter()
            .zip(diversification)
            .chain(cols.iter().zip(ubiquity))
            .map(|(e, &d)| (e - d as f64).abs())
            .fold(0.0, f64::max)
    }
}
