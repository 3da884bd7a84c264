use std::io::{Read, Write};

use super::{BicmModel, FitDiagnostics};
use crate::error::{Error, Result};

const HEADER: [&str; 5] = ["year", "layer", "node", "value", "pin"];

/// Writes a model as `year,layer,node,value,pin` rows: one per country and
/// sector multiplier (`inf` for full nodes, with the pin pass of
/// deterministic nodes), then the fit diagnostics.
pub fn write_model<W: Write>(model: &BicmModel, countries: &[String], sectors: &[String], writer: W) -> Result<()> {
    if countries.len() != model.x.len() || sectors.len() != model.y.len() {
        return Err(Error::Dimension(format!(
            "{} country and {} sector labels for a {}x{} model",
            countries.len(),
            sectors.len(),
            model.x.len(),
            model.y.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    let year = model.year.to_string();
    let pin = |p: &Option<u32>| p.map(|p| p.to_string()).unwrap_or_default();
    for ((name, v), p) in countries.iter().zip(&model.x).zip(&model.x_pass) {
        w.write_record([year.as_str(), "country", name, &v.to_string(), &pin(p)])?;
    }
    for ((name, v), p) in sectors.iter().zip(&model.y).zip(&model.y_pass) {
        w.write_record([year.as_str(), "sector", name, &v.to_string(), &pin(p)])?;
    }
    if let Some(d) = model.diagnostics {
        w.write_record([year.as_str(), "diagnostic", "residual", &d.residual.to_string(), ""])?;
        w.write_record([year.as_str(), "diagnostic", "iterations", &d.iterations.to_string(), ""])?;
        w.write_record([year.as_str(), "diagnostic", "newton_steps", &d.newton_steps.to_string(), ""])?;
    }
    w.flush().map_err(|e| Error::io("<model csv>", e))
}

/// Reads a file written by [`write_model`]; returns the model with its
/// country and sector labels.
pub fn read_model<R: Read>(reader: R) -> Result<(BicmModel, Vec<String>, Vec<String>)> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()?.iter().ne(HEADER) {
        return Err(Error::MissingColumns(HEADER.iter().map(|s| s.to_string()).collect()));
    }
    let mut year = None;
    let (mut countries, mut x, mut sectors, mut y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut x_pass, mut y_pass) = (Vec::new(), Vec::new());
    let (mut residual, mut iterations, mut newton_steps) = (None, None, None);
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |detail: String| Error::MalformedRows {
            lines: vec![line],
            detail,
        };
        let y_row: i32 = row[0].parse().map_err(|_| bad(format!("bad year {:?}", &row[0])))?;
        if *year.get_or_insert(y_row) != y_row {
            return Err(bad("model file mixes years".into()));
        }
        let value: f64 = row[3].parse().map_err(|_| bad(format!("bad value {:?}", &row[3])))?;
        let pass: Option<u32> = match &row[4] {
            "" => None,
            p => Some(p.parse().map_err(|_| bad(format!("bad pin {p:?}")))?),
        };
        match (&row[1], &row[2]) {
            ("country", name) => {
                countries.push(name.to_string());
                x.push(value);
                x_pass.push(pass);
            }
            ("sector", name) => {
                sectors.push(name.to_string());
                y.push(value);
                y_pass.push(pass);
            }
            ("diagnostic", "residual") => residual = Some(value),
            ("diagnostic", "iterations") => iterations = Some(value as usize),
            ("diagnostic", "newton_steps") => newton_steps = Some(value as usize),
            (layer, node) => return Err(bad(format!("unknown entry {layer}/{node}"))),
        }
    }
    let year = year.ok_or_else(|| Error::Config("empty model file".into()))?;
    let mut model = BicmModel::from_pinned(year, x, y, x_pass, y_pass)?;
    if let (Some(residual), Some(iterations), Some(newton_steps)) = (residual, iterations, newton_steps) {
        model.diagnostics = Some(FitDiagnostics {
            residual,
            iterations,
            newton_steps,
        });
    }
    Ok((model, countries, sectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicm::{fit, FitOptions};
    use crate::rca::{degrees, BinaryMatrix};

    #[test]
    fn round_trip_with_pinned_nodes() {
        // column 0 full, column 2 empty, then row 1 empty among the rest
        let m = BinaryMatrix::from_rows(&[[1, 1, 0, 1], [1, 0, 0, 0], [1, 1, 0, 1]]);
        let model = fit(&degrees(&m), &FitOptions::default()).unwrap();
        assert!(model.sector_multipliers().contains(&f64::INFINITY));
        let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let (countries, sectors) = (names("c", 3), names("s", 4));
        let mut buf = Vec::new();
        write_model(&model, &countries, &sectors, &mut buf).unwrap();
        let (back, c2, s2) = read_model(buf.as_slice()).unwrap();
        assert_eq!((c2, s2), (countries, sectors));
        assert_eq!(back.country_multipliers(), model.country_multipliers());
        assert_eq!(back.sector_multipliers(), model.sector_multipliers());
        assert_eq!(back.diagnostics, model.diagnostics);
        assert_eq!(back.country_pins(), model.country_pins());
        for (p, q) in back.probabilities().as_slice().iter().zip(model.probabilities().as_slice()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn label_mismatch_rejected() {
        let model = BicmModel::from_multipliers(2000, vec![1.0], vec![1.0]).unwrap();
        assert!(write_model(&model, &[], &["s".into()], Vec::new()).is_err());
    }
}
