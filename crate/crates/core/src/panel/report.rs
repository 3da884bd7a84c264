use std::fmt::Write as _;
use std::io::Write;

use super::estimate::RegressionResult;
use crate::error::{Error, Result};

/// `term,estimate,se,t,p`, with a trailing `_cons` row (estimate only).
pub fn write_results_csv<W: Write>(result: &RegressionResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["term", "estimate", "se", "t", "p"])?;
    for c in &result.coefficients {
        w.write_record([c.term.clone(), c.estimate.to_string(), c.se.to_string(), c.t.to_string(), c.p.to_string()])?;
    }
    w.write_record(["_cons".to_string(), result.intercept.to_string(), String::new(), String::new(), String::new()])?;
    w.flush().map_err(|e| Error::io("<results csv>", e))
}

/// One row of fit statistics per model.
pub fn write_summary_csv<W: Write>(results: &[RegressionResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model",
        "dependent",
        "observations",
        "groups",
        "clusters",
        "dropped_rows",
        "r2_within",
        "first_year",
        "last_year",
        "year_effects",
        "trend",
        "dropped_terms",
    ])?;
    for r in results {
        let (first, last) = r.window.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        w.write_record([
            r.model.clone(),
            r.dependent.clone(),
            r.observations.to_string(),
            r.groups.to_string(),
            r.clusters.to_string(),
            r.dropped_rows.to_string(),
            r.r2_within.to_string(),
            first,
            last,
            (r.year_effects as u8).to_string(),
            (r.trend as u8).to_string(),
            r.dropped_terms.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))
}

fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Side-by-side text table: estimates with significance stars, standard
/// errors in brackets underneath, then fit statistics.
pub fn format_table(results: &[RegressionResult]) -> String {
    let mut terms: Vec<&str> = Vec::new();
    for r in results {
        for c in &r.coefficients {
            if !terms.contains(&c.term.as_str()) && !c.term.starts_with("year=") && c.term != "trend" {
                terms.push(&c.term);
            }
        }
    }
    // main motif terms, then interactions, then controls
    let rank = |t: &str| match t {
        "Overall" | "Internal" | "External" => 0,
        t if t.contains('#') => 1,
        _ => 2,
    };
    terms.sort_by_key(|t| rank(t));
    let mut rows: Vec<Vec<String>> = Vec::new();
    rows.push(std::iter::once(String::new()).chain(results.iter().map(|r| r.model.clone())).collect());
    for term in &terms {
        let mut est = vec![term.replace('#', " # ")];
        let mut se = vec![String::new()];
        for r in results {
            match r.coefficient(term) {
                Some(c) => {
                    est.push(format!("{:.3}{}", c.estimate, stars(c.p)));
                    se.push(format!("({:.3})", c.se));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        rows.push(est);
        rows.push(se);
    }
    let flag = |b: bool| if b { "Y" } else { "N" }.to_string();
    let footer: [(&str, Box<dyn Fn(&RegressionResult) -> String>); 6] = [
        ("Intercept", Box::new(|r| format!("{:.3}", r.intercept))),
        ("Time trend", Box::new(move |r| flag(r.trend))),
        ("Year FE", Box::new(move |r| flag(r.year_effects))),
        ("R2 (within)", Box::new(|r| format!("{:.3}", r.r2_within))),
        ("N (Groups)", Box::new(|r| r.groups.to_string())),
        ("N (Observations)", Box::new(|r| r.observations.to_string())),
    ];
    for (label, f) in &footer {
        rows.push(std::iter::once(label.to_string()).chain(results.iter().map(f)).collect());
    }

    let widths: Vec<usize> = (0..=results.len())
        .map(|j| rows.iter().map(|row| row[j].chars().count()).max().unwrap_or(0))
        .collect();
    let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * results.len());
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        if i == 1 || i == 1 + 2 * terms.len() {
            out.push_str(&rule);
            out.push('\n');
        }
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for (cell, w) in row.iter().zip(&widths).skip(1) {
            let _ = write!(line, "  {cell:>w$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{Coefficient, RegressionResult};
    use nalgebra::DMatrix;

    fn result(model: &str, terms: &[(&str, f64, f64, f64)]) -> RegressionResult {
        RegressionResult {
            model: model.into(),
            dependent: "y".into(),
            coefficients: terms
                .iter()
                .map(|&(term, estimate, se, p)| Coefficient {
                    term: term.into(),
                    estimate,
                    se,
                    t: estimate / se,
                    p,
                })
                .collect(),
            intercept: -0.019,
            dropped_terms: vec!["trend".into()],
            r2_within: 0.113,
            groups: 537,
            clusters: 21,
            observations: 8032,
            dropped_rows: 3,
            window: Some((2001, 2014)),
            year_effects: true,
            trend: false,
            residuals: vec![],
            vcov: DMatrix::zeros(0, 0),
        }
    }

    #[test]
    fn table_layout() {
        let a = result("(1)", &[("Overall", -0.02, 0.008, 0.02), ("year=2002", 0.1, 0.1, 0.5)]);
        let b = result("(2)", &[("Overall", -0.018, 0.011, 0.2), ("CEE#Overall", -0.072, 0.024, 0.009)]);
        let table = format_table(&[a, b]);
        assert!(table.contains("-0.020**"));
        assert!(table.contains("(0.008)"));
        assert!(table.contains("CEE # Overall"));
        assert!(table.contains("-0.072***"));
        assert!(!table.contains("year=2002"));
        assert!(table.lines().any(|l| l.starts_with("N (Observations)") && l.ends_with("8032")));
    }

    #[test]
    fn csv_has_intercept_row() {
        let mut buf = Vec::new();
        write_results_csv(&result("m", &[("Overall", 0.5, 0.25, 0.05)]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "term,estimate,se,t,p\nOverall,0.5,0.25,2,0.05\n_cons,-0.019,,,\n");
    }
}
