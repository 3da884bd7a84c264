use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// How a design column may be treated when the design is rank deficient.
/// Variants are listed in the order columns are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ColumnRole {
    /// Substantive regressor; collinearity is an error.
    Regressor,
    /// Year-level dummy such as Entry; dropped with a warning if redundant.
    TimeDummy,
    YearEffect,
    Trend,
}

/// Long-format panel: one row per (unit, year) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    pub dependent: String,
    pub unit: Vec<usize>,
    pub unit_labels: Vec<String>,
    pub cluster: Vec<usize>,
    pub cluster_labels: Vec<String>,
    pub year: Vec<i32>,
    pub y: Vec<f64>,
    pub names: Vec<String>,
    pub roles: Vec<ColumnRole>,
    /// `rows × columns` design, without intercept.
    pub x: DMatrix<f64>,
    /// Rows removed by listwise deletion.
    pub dropped: usize,
}

fn intern(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let sorted: BTreeMap<&String, usize> = labels.iter().map(|l| (l, 0)).collect();
    let names: Vec<String> = sorted.keys().map(|s| s.to_string()).collect();
    let index: BTreeMap<&String, usize> = sorted.keys().enumerate().map(|(i, s)| (*s, i)).collect();
    (labels.iter().map(|l| index[l]).collect(), names)
}

impl PanelDataset {
    /// Builds a dataset from labelled rows; ids are assigned in label order.
    pub fn from_columns(
        dependent: &str,
        units: &[String],
        clusters: &[String],
        years: &[i32],
        y: Vec<f64>,
        columns: Vec<(String, ColumnRole, Vec<f64>)>,
    ) -> Result<Self> {
        let n = y.len();
        if units.len() != n || clusters.len() != n || years.len() != n || columns.iter().any(|c| c.2.len() != n) {
            return Err(Error::Dimension(format!("panel columns must all have {n} rows")));
        }
        let (unit, unit_labels) = intern(units);
        let (cluster, cluster_labels) = intern(clusters);
        let x = DMatrix::from_fn(n, columns.len(), |r, c| columns[c].2[r]);
        Ok(Self {
            dependent: dependent.to_string(),
            unit,
            unit_labels,
            cluster,
            cluster_labels,
            year: years.to_vec(),
            y,
            names: columns.iter().map(|c| c.0.clone()).collect(),
            roles: columns.iter().map(|c| c.1).collect(),
            x,
            dropped: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.x.column(j).iter().copied().collect())
    }

    pub fn unit_count(&self) -> usize {
        let mut seen = vec![false; self.unit_labels.len()];
        self.unit.iter().for_each(|&u| seen[u] = true);
        seen.into_iter().filter(|s| *s).count()
    }
}

/// Data demeaned within unit, with the unit means kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct WithinData {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    /// Per unit id: mean of y (NaN for units without rows).
    pub y_means: Vec<f64>,
    /// `units × columns`.
    pub x_means: DMatrix<f64>,
}

pub fn within_transform(data: &PanelDataset) -> WithinData {
    let units = data.unit_labels.len();
    let k = data.x.ncols();
    let mut count = vec![0usize; units];
    let mut y_sum = vec![0.0; units];
    let mut x_sum = DMatrix::<f64>::zeros(units, k);
    for (r, &u) in data.unit.iter().enumerate() {
        count[u] += 1;
        y_sum[u] += data.y[r];
        for j in 0..k {
            x_sum[(u, j)] += data.x[(r, j)];
        }
    }
    let y_means: Vec<f64> = y_sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
    let x_means = DMatrix::from_fn(units, k, |u, j| x_sum[(u, j)] / count[u] as f64);
    let y = DVector::from_fn(data.rows(), |r, _| data.y[r] - y_means[data.unit[r]]);
    let x = DMatrix::from_fn(data.rows(), k, |r, j| data.x[(r, j)] - x_means[(data.unit[r], j)]);
    WithinData { y, x, y_means, x_means }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub model: String,
    pub dependent: String,
    pub coefficients: Vec<Coefficient>,
    /// `ȳ − x̄'β` over the estimation sample.
    pub intercept: f64,
    /// Time dummies, year effects or trend removed as collinear.
    pub dropped_terms: Vec<String>,
    pub r2_within: f64,
    pub groups: usize,
    pub clusters: usize,
    pub observations: usize,
    pub dropped_rows: usize,
    pub window: Option<(i32, i32)>,
    pub year_effects: bool,
    pub trend: bool,
    /// Within residuals, in dataset row order.
    pub residuals: Vec<f64>,
    pub vcov: DMatrix<f64>,
}

impl RegressionResult {
    pub fn coefficient(&self, term: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == term)
    }
}

/// Relative size below which a column counts as a combination of the
/// columns kept before it.
const COLLINEAR_TOL: f64 = 1e-9;

/// Greedy column selection by modified Gram–Schmidt in role order.
/// Returns kept indices (in original order) and dropped ones.
fn select_columns(x: &DMatrix<f64>, raw: &DMatrix<f64>, roles: &[ColumnRole]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..x.ncols()).collect();
    order.sort_by_key(|&j| (roles[j], j));
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let (mut kept, mut dropped) = (Vec::new(), Vec::new());
    for j in order {
        let mut v: DVector<f64> = x.column(j).into_owned();
        for q in &basis {
            let d = q.dot(&v);
            v.axpy(-d, q, 1.0);
        }
        let scale = raw.column(j).norm().max(x.column(j).norm());
        let norm = v.norm();
        if scale > 0.0 && norm > COLLINEAR_TOL * scale {
            basis.push(v / norm);
            kept.push(j);
        } else {
            dropped.push(j);
        }
    }
    kept.sort_unstable();
    dropped.sort_unstable();
    (kept, dropped)
}

/// `(X'X)^{-1} B (X'X)^{-1}` with `B = Σ_g s_g s_g'`, `s_g = Σ_{i∈g} x_i e_i`,
/// scaled by `G/(G−1) · (N−1)/(N−K)`.
fn sandwich(bread: &DMatrix<f64>, x: &DMatrix<f64>, residuals: &[f64], clusters: &[usize]) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    let n_clusters = clusters.iter().max().map_or(0, |m| m + 1);
    let mut scores = DMatrix::<f64>::zeros(n_clusters, k);
    for r in 0..n {
        for j in 0..k {
            scores[(clusters[r], j)] += x[(r, j)] * residuals[r];
        }
    }
    let mut seen = vec![false; n_clusters];
    clusters.iter().for_each(|&c| seen[c] = true);
    let used: Vec<usize> = (0..n_clusters).filter(|&g| seen[g]).collect();
    let g = used.len();
    if g < 2 {
        return Err(Error::TooFewClusters(g));
    }
    if n <= k {
        return Err(Error::EmptySample(format!("{n} observations for {k} coefficients")));
    }
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for &c in &used {
        let s = scores.row(c).transpose();
        meat += &s * s.transpose();
    }
    let correction = g as f64 / (g as f64 - 1.0) * (n as f64 - 1.0) / (n as f64 - k as f64);
    Ok(bread * meat * bread * correction)
}

/// Cluster-robust (Liang–Zeger) covariance of the least-squares fit of
/// `residuals` on `x`, with cluster ids per row.
pub fn cluster_robust_vcov(x: &DMatrix<f64>, residuals: &[f64], clusters: &[usize]) -> Result<DMatrix<f64>> {
    let xtx = x.transpose() * x;
    let bread = xtx
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(vec!["<design>".into()]))?
        .inverse();
    sandwich(&bread, x, residuals, clusters)
}

pub fn cluster_robust_se(x: &DMatrix<f64>, residuals: &[f64], clusters: &[usize]) -> Result<Vec<f64>> {
    let v = cluster_robust_vcov(x, residuals, clusters)?;
    Ok((0..v.nrows()).map(|i| v[(i, i)].max(0.0).sqrt()).collect())
}

/// Within (fixed-effect) estimator with cluster-robust errors and
/// Student-t p-values on `G − 1` degrees of freedom.
pub fn fit_fe(data: &PanelDataset) -> Result<RegressionResult> {
    let n = data.rows();
    if n == 0 {
        return Err(Error::EmptySample(format!("no usable rows ({} dropped)", data.dropped)));
    }
    let within = within_transform(data);
    let (kept, dropped) = select_columns(&within.x, &data.x, &data.roles);
    let collinear: Vec<String> = dropped
        .iter()
        .filter(|&&j| data.roles[j] == ColumnRole::Regressor)
        .map(|&j| data.names[j].clone())
        .collect();
    if !collinear.is_empty() {
        return Err(Error::RankDeficient(collinear));
    }
    let dropped_terms: Vec<String> = dropped.iter().map(|&j| data.names[j].clone()).collect();
    for term in &dropped_terms {
        log::warn!("dropping collinear term {term}");
    }

    let x = within.x.select_columns(&kept);
    let k = kept.len();
    let (beta, bread) = if k == 0 {
        (DVector::zeros(0), DMatrix::zeros(0, 0))
    } else {
        let qr = x.clone().qr();
        let r = qr.r();
        let qty = qr.q().transpose() * &within.y;
        let beta = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::RankDeficient(kept.iter().map(|&j| data.names[j].clone()).collect()))?;
        let r_inv = r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .ok_or_else(|| Error::RankDeficient(vec!["<design>".into()]))?;
        (beta, &r_inv * r_inv.transpose())
    };
    let residuals = &within.y - &x * &beta;
    let residuals: Vec<f64> = residuals.iter().copied().collect();
    let vcov = sandwich(&bread, &x, &residuals, &data.cluster)?;
    let clusters = {
        let mut c = data.cluster.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    let t_dist = StudentsT::new(0.0, 1.0, (clusters - 1) as f64).expect("positive degrees of freedom");
    let coefficients = kept
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let se = vcov[(i, i)].max(0.0).sqrt();
            let t = beta[i] / se;
            let p = if t.is_finite() { 2.0 * (1.0 - t_dist.cdf(t.abs())) } else { 0.0 };
            Coefficient {
                term: data.names[j].clone(),
                estimate: beta[i],
                se,
                t,
                p,
            }
        })
        .collect();

    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let tss = within.y.norm_squared();
    let r2_within = if tss > 0.0 { (1.0 - ssr / tss).clamp(0.0, 1.0) } else { 0.0 };
    let y_bar = data.y.iter().sum::<f64>() / n as f64;
    let intercept = y_bar
        - kept
            .iter()
            .zip(beta.iter())
            .map(|(&j, b)| b * data.x.column(j).sum() / n as f64)
            .sum::<f64>();
    let window = data.year.iter().min().zip(data.year.iter().max()).map(|(a, b)| (*a, *b));
    let has = |role| data.roles.iter().zip(0..).any(|(r, j)| *r == role && kept.contains(&j));

    Ok(RegressionResult {
        model: String::new(),
        dependent: data.dependent.clone(),
        coefficients,
        intercept,
        dropped_terms,
        r2_within,
        groups: data.unit_count(),
        clusters,
        observations: n,
        dropped_rows: data.dropped,
        window,
        year_effects: has(ColumnRole::YearEffect),
        trend: has(ColumnRole::Trend),
        residuals,
        vcov,
    })
}
