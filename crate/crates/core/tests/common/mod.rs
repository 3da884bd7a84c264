#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

pub const COUNTRIES: [&str; 7] = ["AUT", "CZE", "DEU", "FRA", "HUN", "ITA", "POL"];
pub const SECTORS: [&str; 7] = ["D01T03", "D10T12", "D24T25", "D26T28", "D45T47", "D62T63", "D85"];

/// Random long-format panel CSV over the given countries, sectors and years.
pub fn panel_csv(countries: &[&str], sectors: &[&str], years: std::ops::RangeInclusive<i32>, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("country,sector,year,employment,value_added_pc,gfc,ulc\n");
    for c in countries {
        for s in sectors {
            let base: f64 = rng.random_range(10.0..100.0);
            for y in years.clone() {
                let emp = base * rng.random_range(0.8..1.2);
                let va: f64 = rng.random_range(20.0..60.0);
                let gfc: f64 = rng.random_range(-1.0..5.0);
                let ulc: f64 = rng.random_range(0.5..1.5);
                writeln!(out, "{c},{s},{y},{emp:.4},{va:.4},{gfc:.4},{ulc:.4}").unwrap();
            }
        }
    }
    out
}

pub struct Fixture {
    pub dir: TempDir,
    pub config: PathBuf,
}

impl Fixture {
    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }
}

/// Writes `panel.csv` and `cospec.toml` into a fresh directory.
pub fn fixture(panel: &str, extra_config: &str) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("panel.csv"), panel).unwrap();
    let config = dir.path().join("cospec.toml");
    let first = panel.lines().skip(1).filter_map(|l| l.split(',').nth(2)?.parse::<i32>().ok()).min().unwrap_or(2000);
    let last = panel.lines().skip(1).filter_map(|l| l.split(',').nth(2)?.parse::<i32>().ok()).max().unwrap_or(2000);
    fs::write(
        &config,
        format!(
            "output = \"out\"\n[input]\npanel = \"panel.csv\"\naggregate = false\n\
             [analysis]\nfirst_year = {first}\nlast_year = {last}\n\
             [ensemble]\nsamples = 200\nseed = 11\n{extra_config}"
        ),
    )
    .unwrap();
    Fixture { dir, config }
}

/// Relative path → file bytes for every file under `root`.
pub fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
