use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{BinaryMatrix, BipartiteNetwork, RcaMatrix};
use crate::error::{Error, Result};

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// `year,country,sector` rows, one per link, in matrix order.
pub fn write_edge_list<W: Write>(net: &BipartiteNetwork, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["year", "country", "sector"])?;
    let year = net.year.to_string();
    for (c, country) in net.countries.iter().enumerate() {
        for (s, sector) in net.sectors.iter().enumerate() {
            if net.matrix.get(c, s) {
                w.write_record([year.as_str(), country, sector])?;
            }
        }
    }
    flush(w)
}

/// Reads an edge list against known node labels; returns one network per
/// year present in the file, in year order. A year without links cannot be
/// represented in this format.
pub fn read_edge_list<R: Read>(reader: R, countries: &[String], sectors: &[String]) -> Result<Vec<BipartiteNetwork>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut by_year: BTreeMap<i32, BinaryMatrix> = BTreeMap::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |detail: String| Error::MalformedRows { lines: vec![line], detail };
        if row.len() != 3 {
            return Err(malformed("expected year,country,sector".into()));
        }
        let year: i32 = row[0].parse().map_err(|_| malformed(format!("bad year {:?}", &row[0])))?;
        let c = countries
            .iter()
            .position(|x| x == &row[1])
            .ok_or_else(|| malformed(format!("unknown country {:?}", &row[1])))?;
        let s = sectors
            .iter()
            .position(|x| x == &row[2])
            .ok_or_else(|| malformed(format!("unknown sector {:?}", &row[2])))?;
        by_year
            .entry(year)
            .or_insert_with(|| BinaryMatrix::zeros(countries.len(), sectors.len()))
            .set(c, s, true);
    }
    Ok(by_year
        .into_iter()
        .map(|(year, m)| BipartiteNetwork::new(year, countries.to_vec(), sectors.to_vec(), m))
        .collect())
}

/// Dense 0/1 matrix: header `year,country,<sector...>`, one row per country.
pub fn write_dense<W: Write>(net: &BipartiteNetwork, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["year".to_string(), "country".to_string()];
    header.extend(net.sectors.iter().cloned());
    w.write_record(&header)?;
    let year = net.year.to_string();
    for (c, country) in net.countries.iter().enumerate() {
        let mut row = vec![year.clone(), country.clone()];
        row.extend(net.matrix.row(c).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    flush(w)
}

pub fn read_dense<R: Read>(reader: R) -> Result<BipartiteNetwork> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "year" || &header[1] != "country" {
        return Err(Error::MissingColumns(vec!["year".into(), "country".into()]));
    }
    let sectors: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut year = None;
    let mut countries = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |detail: &str| Error::MalformedRows { lines: vec![line], detail: detail.into() };
        if row.len() != sectors.len() + 2 {
            return Err(malformed("wrong number of fields"));
        }
        let y: i32 = row[0].parse().map_err(|_| malformed("bad year"))?;
        if *year.get_or_insert(y) != y {
            return Err(malformed("mixed years in one dense matrix"));
        }
        countries.push(row[1].to_string());
        let values = row
            .iter()
            .skip(2)
            .map(|v| match v {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(malformed("entries must be 0 or 1")),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(values);
    }
    let year = year.ok_or_else(|| Error::EmptySample("dense matrix has no rows".into()))?;
    let matrix = BinaryMatrix::from_fn(countries.len(), sectors.len(), |c, s| rows[c][s] != 0);
    Ok(BipartiteNetwork::new(year, countries, sectors, matrix))
}

/// Dense RCA values, undefined cells left empty.
pub fn write_rca_csv<W: Write>(rca: &RcaMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["year".to_string(), "country".to_string()];
    header.extend(rca.sectors.iter().cloned());
    w.write_record(&header)?;
    for (c, country) in rca.countries.iter().enumerate() {
        let mut row = vec![rca.year.to_string(), country.clone()];
        row.extend((0..rca.sectors.len()).map(|s| rca.get(c, s).map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    flush(w)
}
