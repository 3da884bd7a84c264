use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;

use super::fit::fit_year;
use super::{fill_sample, BicmModel, FitOptions, LinkProbabilities};
use crate::error::{Error, Result};
use crate::ingest::{CountryGroup, CountryGroups};
use crate::motifs::{motif_total, specialists_by_group};
use crate::rca::{degrees, BinaryMatrix, BipartiteNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Network,
    Group,
    SectorGroup,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Overall,
    Internal,
    External,
}

/// Which ensemble a score was computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullMode {
    /// One model on the full matrix; group statistics counted on its samples.
    #[default]
    Full,
    /// Internal group statistics against a model refitted on that group's rows.
    GroupRefit,
}

macro_rules! string_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $text),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($variant),)+
                    other => Err(Error::Config(format!("unknown {} {other:?}", stringify!($ty)))),
                }
            }
        }
    };
}

string_enum!(Level { Level::Network => "network", Level::Group => "group", Level::SectorGroup => "sector_group", Level::Node => "node" });
string_enum!(Scope { Scope::Overall => "overall", Scope::Internal => "internal", Scope::External => "external" });
string_enum!(NullMode { NullMode::Full => "full", NullMode::GroupRefit => "group_refit" });

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZScoreOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for ZScoreOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreResult {
    pub year: i32,
    pub level: Level,
    pub scope: Scope,
    pub null_mode: NullMode,
    /// Country group for internal scopes and node rows.
    pub group: Option<CountryGroup>,
    pub country: Option<String>,
    /// Sector code for node rows, sector-group name for sector-group rows.
    pub sector: Option<String>,
    pub observed: f64,
    pub mean: f64,
    pub sd: f64,
    /// `None` exactly when `sd == 0`.
    pub z: Option<f64>,
}

impl ZScoreResult {
    pub fn degenerate(&self) -> bool {
        self.z.is_none()
    }
}

/// Where each statistic lives in the per-sample vector.
struct Layout {
    rows: usize,
    cols: usize,
    /// Sector-group index per sector, if tagged.
    sector_group: Vec<Option<usize>>,
    sector_group_names: Vec<String>,
}

impl Layout {
    // network: total, internal EU15, internal CEE, external
    const NETWORK: usize = 4;

    fn new(net: &BipartiteNetwork) -> Self {
        let mut names: Vec<String> = Vec::new();
        let sector_group = net
            .sector_groups
            .iter()
            .map(|g| {
                g.as_ref().map(|g| match names.iter().position(|n| n == g) {
                    Some(i) => i,
                    None => {
                        names.push(g.clone());
                        names.len() - 1
                    }
                })
            })
            .collect();
        Self {
            rows: net.matrix.rows(),
            cols: net.matrix.cols(),
            sector_group,
            sector_group_names: names,
        }
    }

    fn sector_base(&self) -> usize {
        Self::NETWORK
    }

    fn node_base(&self) -> usize {
        Self::NETWORK + 4 * self.sector_group_names.len()
    }

    fn len(&self) -> usize {
        self.node_base() + 3 * self.rows * self.cols
    }

    /// Writes every statistic of `m` into `out`.
    fn evaluate(&self, m: &BinaryMatrix, membership: &[CountryGroup], out: &mut [u64]) {
        out.fill(0);
        let counts = specialists_by_group(m, membership);
        let pairs = |n: u64| n * n.saturating_sub(1) / 2;
        for (s, [eu, cee]) in counts.iter().enumerate() {
            let stats = [pairs(eu + cee), pairs(*eu), pairs(*cee), eu * cee];
            for (o, v) in out[..Self::NETWORK].iter_mut().zip(stats) {
                *o += v;
            }
            if let Some(g) = self.sector_group[s] {
                let base = self.sector_base() + 4 * g;
                for (o, v) in out[base..base + 4].iter_mut().zip(stats) {
                    *o += v;
                }
            }
        }
        let cells = self.rows * self.cols;
        let base = self.node_base();
        for (r, g) in membership.iter().enumerate() {
            for (s, &v) in m.row(r).iter().enumerate() {
                if v != 0 {
                    let i = r * self.cols + s;
                    let own = counts[s][g.index()];
                    let other = counts[s][g.other().index()];
                    out[base + i] = own + other - 1;
                    out[base + cells + i] = own - 1;
                    out[base + 2 * cells + i] = other;
                }
            }
        }
    }
}

/// Exact integer sums over samples; order of accumulation cannot matter.
#[derive(Clone)]
struct Moments {
    sum: Vec<u128>,
    sum_sq: Vec<u128>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Self {
            sum: vec![0; len],
            sum_sq: vec![0; len],
        }
    }

    fn add(&mut self, values: &[u64]) {
        for ((s, q), &v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(values) {
            let v = v as u128;
            *s += v;
            *q += v * v;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
        self
    }

    /// Mean and population sd of entry `i`; the variance numerator
    /// `N Σx² − (Σx)²` is exact, so `sd == 0` is detected exactly.
    fn mean_sd(&self, i: usize, n: usize) -> (f64, f64) {
        let n128 = n as u128;
        let numer = n128 * self.sum_sq[i] - self.sum[i] * self.sum[i];
        let nf = n as f64;
        (self.sum[i] as f64 / nf, (numer as f64).sqrt() / nf)
    }
}

const CHUNK: usize = 64;

fn accumulate<F>(p: &LinkProbabilities, n: usize, seed: u64, len: usize, evaluate: F) -> Moments
where
    F: Fn(&BinaryMatrix, &mut [u64]) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut moments = Moments::zeros(len);
            let mut m = BinaryMatrix::zeros(p.rows(), p.cols());
            let mut values = vec![0u64; len];
            for k in chunk * CHUNK..((chunk + 1) * CHUNK).min(n) {
                fill_sample(p, seed, k as u64, &mut m);
                evaluate(&m, &mut values);
                moments.add(&values);
            }
            moments
        })
        .reduce(|| Moments::zeros(len), Moments::merge)
}

fn score(observed: u64, mean: f64, sd: f64) -> Option<f64> {
    (sd > 0.0).then(|| (observed as f64 - mean) / sd)
}

/// Scores the observed motif statistics of `net` against `n` samples of
/// `model`: the whole-network count, its internal/external split, the same
/// per sector group (for tagged sectors), and every node-level count.
pub fn zscores(
    net: &BipartiteNetwork,
    model: &BicmModel,
    groups: &CountryGroups,
    options: &ZScoreOptions,
) -> Result<Vec<ZScoreResult>> {
    if options.samples < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: options.samples,
        });
    }
    let p = model.probabilities();
    if (p.rows(), p.cols()) != (net.matrix.rows(), net.matrix.cols()) {
        return Err(Error::Dimension(format!(
            "model is {}x{}, network is {}x{}",
            p.rows(),
            p.cols(),
            net.matrix.rows(),
            net.matrix.cols()
        )));
    }
    let membership = groups.resolve(&net.countries)?;
    let layout = Layout::new(net);
    let len = layout.len();

    let mut observed = vec![0u64; len];
    layout.evaluate(&net.matrix, &membership, &mut observed);
    let moments = accumulate(p, options.samples, options.seed, len, |m, out| layout.evaluate(m, &membership, out));

    let mut results = Vec::with_capacity(len);
    let mut push = |i: usize, level: Level, scope: Scope, group: Option<CountryGroup>, country: Option<&str>, sector: Option<&str>| {
        let (mean, sd) = moments.mean_sd(i, options.samples);
        results.push(ZScoreResult {
            year: net.year,
            level,
            scope,
            null_mode: NullMode::Full,
            group,
            country: country.map(str::to_string),
            sector: sector.map(str::to_string),
            observed: observed[i] as f64,
            mean,
            sd,
            z: score(observed[i], mean, sd),
        });
    };

    push(0, Level::Network, Scope::Overall, None, None, None);
    push(1, Level::Group, Scope::Internal, Some(CountryGroup::Eu15), None, None);
    push(2, Level::Group, Scope::Internal, Some(CountryGroup::Cee), None, None);
    push(3, Level::Group, Scope::External, None, None, None);
    for (g, name) in layout.sector_group_names.iter().enumerate() {
        let base = layout.sector_base() + 4 * g;
        let name = Some(name.as_str());
        push(base, Level::SectorGroup, Scope::Overall, None, None, name);
        push(base + 1, Level::SectorGroup, Scope::Internal, Some(CountryGroup::Eu15), None, name);
        push(base + 2, Level::SectorGroup, Scope::Internal, Some(CountryGroup::Cee), None, name);
        push(base + 3, Level::SectorGroup, Scope::External, None, None, name);
    }
    let cells = layout.rows * layout.cols;
    for (k, scope) in [Scope::Overall, Scope::Internal, Scope::External].into_iter().enumerate() {
        for (c, country) in net.countries.iter().enumerate() {
            for (s, sector) in net.sectors.iter().enumerate() {
                let i = layout.node_base() + k * cells + c * layout.cols + s;
                push(i, Level::Node, scope, Some(membership[c]), Some(country), Some(sector));
            }
        }
    }
    Ok(results)
}

/// Internal motif of one group scored against a BiCM refitted on that
/// group's rows only.
pub fn group_refit_zscore(
    net: &BipartiteNetwork,
    groups: &CountryGroups,
    group: CountryGroup,
    fit_options: &FitOptions,
    options: &ZScoreOptions,
) -> Result<ZScoreResult> {
    if options.samples < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: options.samples,
        });
    }
    let membership = groups.resolve(&net.countries)?;
    let rows: Vec<usize> = (0..membership.len()).filter(|&r| membership[r] == group).collect();
    let sub = net.matrix.select_rows(&rows);
    let model = fit_year(net.year, &degrees(&sub), fit_options)?;
    let moments = accumulate(model.probabilities(), options.samples, options.seed, 1, |m, out| {
        out[0] = motif_total(m);
    });
    let observed = motif_total(&sub);
    let (mean, sd) = moments.mean_sd(0, options.samples);
    Ok(ZScoreResult {
        year: net.year,
        level: Level::Group,
        scope: Scope::Internal,
        null_mode: NullMode::GroupRefit,
        group: Some(group),
        country: None,
        sector: None,
        observed: observed as f64,
        mean,
        sd,
        z: score(observed, mean, sd),
    })
}

const HEADER: [&str; 12] = [
    "year", "level", "scope", "group", "country", "sector", "null_model", "observed", "mean", "sd", "z", "degenerate",
];

/// Tidy z-score CSV. Floats use shortest round-trip formatting.
pub fn write_zscore_csv<W: Write>(results: &[ZScoreResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in results {
        w.write_record([
            r.year.to_string(),
            r.level.to_string(),
            r.scope.to_string(),
            r.group.map(|g| g.label().to_string()).unwrap_or_default(),
            r.country.clone().unwrap_or_default(),
            r.sector.clone().unwrap_or_default(),
            r.null_mode.to_string(),
            r.observed.to_string(),
            r.mean.to_string(),
            r.sd.to_string(),
            r.z.map(|z| z.to_string()).unwrap_or_default(),
            (r.degenerate() as u8).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<z-score csv>", e))
}

pub fn read_zscore_csv<R: Read>(reader: R) -> Result<Vec<ZScoreResult>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::MissingColumns(HEADER.iter().map(|s| s.to_string()).collect()));
    }
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::MalformedRows {
            lines: vec![line],
            detail: format!("bad {what}"),
        };
        let num = |i: usize, what: &str| row[i].parse::<f64>().map_err(|_| bad(what));
        out.push(ZScoreResult {
            year: row[0].parse().map_err(|_| bad("year"))?,
            level: row[1].parse()?,
            scope: row[2].parse()?,
            group: if row[3].is_empty() { None } else { Some(row[3].parse()?) },
            country: opt(&row[4]),
            sector: opt(&row[5]),
            null_mode: row[6].parse()?,
            observed: num(7, "observed")?,
            mean: num(8, "mean")?,
            sd: num(9, "sd")?,
            z: if row[10].is_empty() { None } else { Some(num(10, "z")?) },
        });
    }
    Ok(out)
}
