//! Fixed-effect panel regressions of productivity on lagged motif z-scores.
//!
//! [`build_dataset`] assembles the long-format design (lags, pooled
//! standardization, dummies, interactions, listwise deletion); [`fit_fe`]
//! runs the within estimator with country-clustered standard errors.

mod dataset;
mod estimate;
mod report;

pub use dataset::{build_dataset, standardize};
pub use estimate::{
    cluster_robust_se, cluster_robust_vcov, fit_fe, within_transform, Coefficient, ColumnRole, PanelDataset,
    RegressionResult, WithinData,
};
pub use report::{format_table, write_results_csv, write_summary_csv};

use serde::{Deserialize, Serialize};

/// Which motif z-scores enter as main regressors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifTerms {
    Overall,
    /// Internal and External side by side.
    InternalExternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Entry,
    Recession,
    Emp,
    Gfc,
}

impl Control {
    pub fn name(self) -> &'static str {
        match self {
            Control::Entry => "Entry",
            Control::Recession => "Recession",
            Control::Emp => "EMP",
            Control::Gfc => "GFC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependent {
    /// Value added per capita in year t.
    Level,
    /// Change in value added per capita from t − 1 to t.
    FirstDifference,
}

/// One fixed-effect model: y on lagged motifs, optional interactions with
/// CEE and Entry, and controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub motifs: MotifTerms,
    /// Adds CEE×M, Entry×M and CEE×Entry×M for every motif term M.
    pub interactions: bool,
    /// Restricts the sample to sectors of one taxonomy group.
    pub sector_group: Option<String>,
    pub controls: Vec<Control>,
    pub year_effects: bool,
    pub trend: bool,
    pub dependent: Dependent,
    pub standardize_dependent: bool,
    /// Years between the regressors and the dependent variable.
    pub lag: i32,
    pub entry_year: i32,
    pub recession_years: Vec<i32>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            name: "model".into(),
            motifs: MotifTerms::Overall,
            interactions: false,
            sector_group: None,
            controls: vec![Control::Entry, Control::Recession, Control::Emp, Control::Gfc],
            year_effects: true,
            trend: true,
            dependent: Dependent::Level,
            standardize_dependent: true,
            lag: 1,
            entry_year: 2004,
            recession_years: vec![2008, 2009],
        }
    }
}

impl ModelSpec {
    /// The eight specifications of the published regression table: overall
    /// motifs without and with interactions, internal/external likewise, and
    /// internal/external with interactions per sector group.
    pub fn table_s1() -> Vec<ModelSpec> {
        let base = |name: &str, motifs, interactions, group: Option<&str>| ModelSpec {
            name: name.into(),
            motifs,
            interactions,
            sector_group: group.map(str::to_string),
            ..ModelSpec::default()
        };
        vec![
            base("(1) All", MotifTerms::Overall, false, None),
            base("(2) All", MotifTerms::Overall, true, None),
            base("(3) All", MotifTerms::InternalExternal, false, None),
            base("(4) All", MotifTerms::InternalExternal, true, None),
            base("(5) Primary", MotifTerms::InternalExternal, true, Some("Primary production")),
            base("(6) Basic Manu", MotifTerms::InternalExternal, true, Some("Basic manufacturing")),
            base("(7) Capital Manu", MotifTerms::InternalExternal, true, Some("Manufacturing of capital goods")),
            base("(8) Services", MotifTerms::InternalExternal, true, Some("Services")),
        ]
    }

    pub fn motif_names(&self) -> &'static [&'static str] {
        match self.motifs {
            MotifTerms::Overall => &["Overall"],
            MotifTerms::InternalExternal => &["Internal", "External"],
        }
    }

    /// Design terms in table order: motifs, interactions per motif, controls.
    pub fn terms(&self) -> Vec<String> {
        let motifs = self.motif_names();
        let mut out: Vec<String> = motifs.iter().map(|m| m.to_string()).collect();
        if self.interactions {
            for m in motifs {
                out.extend([format!("CEE#{m}"), format!("Entry#{m}"), format!("CEE#Entry#{m}")]);
            }
        }
        out.extend(self.controls.iter().map(|c| c.name().to_string()));
        out
    }
}
