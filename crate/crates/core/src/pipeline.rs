//! End-to-end runs driven by a TOML [`RunConfig`].
//!
//! Every stage writes under the configured output directory and records the
//! resolved configuration next to its outputs. Outputs depend only on the
//! config and the input files, never on the thread count.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bicm::{
    fit, group_refit_zscore, read_zscore_csv, write_model, write_zscore_csv, zscores, FitOptions, Level, NullMode,
    Scope, ZScoreOptions, ZScoreResult,
};
use crate::error::{Error, Result};
use crate::ingest::{
    aggregate_sectors, load_panel, validate_panel, ColumnSchema, CountryGroup, CountryGroups, EmploymentPanel,
    LoadOptions, LoadedPanel, Measure, SectorTaxonomy, ValidationReport,
};
use crate::motifs::{motif_counts, write_motif_csv};
use crate::panel::{build_dataset, fit_fe, format_table, write_results_csv, write_summary_csv, ModelSpec, RegressionResult};
use crate::rca::{
    base_year_correlation, degrees, network_for_year, rca_matrix, write_dense, write_rca_csv, BipartiteNetwork,
    CorrelationMeasure, CorrelationOptions, GroupFilter,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Long-format panel CSV.
    pub panel: PathBuf,
    #[serde(default)]
    pub columns: ColumnSchema,
    /// `code,class,group` CSV; the built-in STAN grouping when absent.
    pub taxonomy: Option<PathBuf>,
    /// `country,group` CSV; the built-in EU15/CEE lists when absent.
    pub groups: Option<PathBuf>,
    /// Sum raw sector codes into taxonomy classes before analysis.
    #[serde(default = "yes")]
    pub aggregate: bool,
    /// Drop rows with countries or sectors outside the definitions.
    #[serde(default)]
    pub skip_unknown: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub first_year: i32,
    pub last_year: i32,
    pub threshold: f64,
    /// Base year of the correlation diagnostics; the first year when absent.
    pub base_year: Option<i32>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            first_year: 2000,
            last_year: 2014,
            threshold: 1.0,
            base_year: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Also score internal motifs against per-group refitted models.
    pub group_refit: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            tolerance: 1e-8,
            max_iterations: 10_000,
            group_refit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    /// Regression models; the eight published specifications when empty.
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Worker threads; does not affect any output.
    pub threads: Option<usize>,
    /// Directory relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// The part of the config that determines outputs.
#[derive(Serialize)]
struct Canonical<'a> {
    input: &'a InputConfig,
    analysis: &'a AnalysisConfig,
    ensemble: &'a EnsembleConfig,
    models: &'a [ModelSpec],
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        if config.models.is_empty() {
            config.models = ModelSpec::table_s1();
        }
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn check(&self) -> Result<()> {
        if self.analysis.first_year > self.analysis.last_year {
            return Err(Error::Config(format!(
                "first_year {} is after last_year {}",
                self.analysis.first_year, self.analysis.last_year
            )));
        }
        if self.ensemble.samples < 2 {
            return Err(Error::Config(format!("ensemble.samples must be at least 2, got {}", self.ensemble.samples)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    /// Output-relevant settings as TOML (no output dir, no thread count).
    pub fn canonical_toml(&self) -> String {
        let canonical = Canonical {
            input: &self.input,
            analysis: &self.analysis,
            ensemble: &self.ensemble,
            models: &self.models,
        };
        toml::to_string(&canonical).expect("config serializes")
    }

    /// SHA-256 over the canonical config and the bytes of every input file.
    pub fn hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.canonical_toml().as_bytes());
        for path in self.input_files() {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            h.update(path.file_name().map(|n| n.as_encoded_bytes()).unwrap_or_default());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
        Ok(hex::encode(h.finalize()))
    }

    fn input_files(&self) -> Vec<PathBuf> {
        let mut files = vec![self.resolve(&self.input.panel)];
        files.extend(self.input.taxonomy.iter().map(|p| self.resolve(p)));
        files.extend(self.input.groups.iter().map(|p| self.resolve(p)));
        files
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            tolerance: self.ensemble.tolerance,
            max_iterations: self.ensemble.max_iterations,
            ..FitOptions::default()
        }
    }
}

/// Loaded inputs shared by the stages.
pub struct Context {
    pub config: RunConfig,
    pub hash: String,
    pub loaded: LoadedPanel,
    pub panel: EmploymentPanel,
    pub taxonomy: SectorTaxonomy,
    pub groups: CountryGroups,
    pub years: Vec<i32>,
}

impl Context {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let taxonomy = match &config.input.taxonomy {
            Some(p) => SectorTaxonomy::from_csv_path(&config.resolve(p))?,
            None => SectorTaxonomy::stan_default(),
        };
        let groups = match &config.input.groups {
            Some(p) => CountryGroups::from_csv_path(&config.resolve(p))?,
            None => CountryGroups::eu_default(),
        };
        let options = LoadOptions {
            schema: config.input.columns.clone(),
            known_countries: Some(groups.countries().map(str::to_string).collect()),
            known_sectors: config
                .input
                .aggregate
                .then(|| taxonomy.raw_codes().map(str::to_string).collect()),
            years: Some((config.analysis.first_year, config.analysis.last_year)),
            allow_skip_unknown: config.input.skip_unknown,
        };
        let loaded = load_panel(&config.resolve(&config.input.panel), &options)?;
        let panel = if config.input.aggregate {
            aggregate_sectors(&loaded.panel, &taxonomy)?
        } else {
            loaded.panel.clone()
        };
        let years = panel.years().collect();
        Ok(Self {
            hash: config.hash()?,
            config: config.clone(),
            loaded,
            panel,
            taxonomy,
            groups,
            years,
        })
    }

    fn out(&self, relative: &str) -> Result<PathBuf> {
        let path = self.config.output_dir().join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(path)
    }

    fn write<F>(&self, relative: &str, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.out(relative)?;
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn write_config(&self) -> Result<()> {
        self.write("config.toml", |w| {
            w.write_all(self.config.canonical_toml().as_bytes())
                .map_err(|e| Error::io("config.toml", e))
        })?;
        Ok(())
    }

    pub fn network(&self, year: i32) -> Result<BipartiteNetwork> {
        Ok(network_for_year(&self.panel, year, self.config.analysis.threshold)?.tagged(&self.groups, &self.taxonomy))
    }
}

pub fn cmd_validate(config: &RunConfig) -> Result<ValidationReport> {
    let ctx = Context::load(config)?;
    let report = validate_panel(&ctx.panel);
    ctx.write_config()?;
    ctx.write("validation/report.txt", |w| {
        let io = |e| Error::io("validation/report.txt", e);
        writeln!(w, "rows dropped on load: {}", ctx.loaded.dropped_total()).map_err(io)?;
        for d in &ctx.loaded.dropped {
            writeln!(w, "  {}: {}", d.reason, d.count).map_err(io)?;
        }
        write!(w, "{report}").map_err(io)
    })?;
    if !report.is_clean() {
        log::warn!("{} validation issue(s); see validation/report.txt", report.issues.len());
    }
    Ok(report)
}

pub fn cmd_networks(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let ctx = Context::load(config)?;
    ctx.write_config()?;
    let per_year: Vec<Result<_>> = ctx
        .years
        .par_iter()
        .map(|&year| {
            let rca = rca_matrix(&ctx.panel, year)?;
            let net = ctx.network(year)?;
            let counts = motif_counts(&net, &ctx.groups)?;
            Ok((rca, net, counts))
        })
        .collect();
    let mut paths = Vec::new();
    let mut all_counts = Vec::new();
    for item in per_year {
        let (rca, net, counts) = item?;
        paths.push(ctx.write(&format!("networks/rca_{}.csv", net.year), |w| write_rca_csv(&rca, w))?);
        paths.push(ctx.write(&format!("networks/network_{}.csv", net.year), |w| write_dense(&net, w))?);
        all_counts.push(counts);
    }
    paths.push(ctx.write("networks/motifs.csv", |w| write_motif_csv(&all_counts, w))?);
    Ok(paths)
}

/// Per-year seed: sample streams of different years never coincide.
fn year_seed(seed: u64, year: i32) -> u64 {
    seed ^ (year as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

const ZSCORE_FILE: &str = "zscores/zscores.csv";
const CACHE_KEY: &str = "zscores/cache.key";

fn compute_zscores(ctx: &Context) -> Result<Vec<ZScoreResult>> {
    let fit_options = ctx.config.fit_options();
    let per_year: Vec<Result<_>> = ctx
        .years
        .par_iter()
        .map(|&year| {
            let net = ctx.network(year)?;
            let mut model = fit(&degrees(&net.matrix), &fit_options).map_err(|e| match e {
                Error::NonConvergence { iterations, residual } => {
                    log::error!("BiCM fit for {year} did not converge");
                    Error::NonConvergence { iterations, residual }
                }
                other => other,
            })?;
            model.year = year;
            let options = ZScoreOptions {
                samples: ctx.config.ensemble.samples,
                seed: year_seed(ctx.config.ensemble.seed, year),
            };
            let mut results = zscores(&net, &model, &ctx.groups, &options)?;
            if ctx.config.ensemble.group_refit {
                for g in CountryGroup::ALL {
                    results.push(group_refit_zscore(&net, &ctx.groups, g, &fit_options, &options)?);
                }
            }
            Ok((net, model, results))
        })
        .collect();
    let mut all = Vec::new();
    for item in per_year {
        let (net, model, results) = item?;
        ctx.write(&format!("zscores/models/bicm_{}.csv", net.year), |w| {
            write_model(&model, &net.countries, &net.sectors, w)
        })?;
        all.extend(results);
    }
    ctx.write(ZSCORE_FILE, |w| write_zscore_csv(&all, w))?;
    ctx.write(CACHE_KEY, |w| {
        writeln!(w, "{}", ctx.hash).map_err(|e| Error::io(CACHE_KEY, e))
    })?;
    Ok(all)
}

/// Z-scores from the on-disk cache when its key matches this config,
/// computed (and cached) otherwise.
fn ensure_zscores(ctx: &Context) -> Result<Vec<ZScoreResult>> {
    let dir = ctx.config.output_dir();
    let key = fs::read_to_string(dir.join(CACHE_KEY)).unwrap_or_default();
    if key.trim() == ctx.hash {
        let path = dir.join(ZSCORE_FILE);
        if let Ok(file) = File::open(&path) {
            log::info!("using cached z-scores from {}", path.display());
            return read_zscore_csv(file);
        }
    }
    compute_zscores(ctx)
}

pub fn cmd_zscores(config: &RunConfig) -> Result<Vec<ZScoreResult>> {
    let ctx = Context::load(config)?;
    ctx.write_config()?;
    ensure_zscores(&ctx)
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

pub fn cmd_panel(config: &RunConfig) -> Result<Vec<RegressionResult>> {
    let ctx = Context::load(config)?;
    ctx.write_config()?;
    let z = ensure_zscores(&ctx)?;
    let window = Some((ctx.config.analysis.first_year, ctx.config.analysis.last_year));
    let fitted: Vec<Result<RegressionResult>> = ctx
        .config
        .models
        .par_iter()
        .map(|spec| {
            let data = build_dataset(&ctx.panel, &z, &ctx.groups, &ctx.taxonomy, spec, window)?;
            let mut result = fit_fe(&data)?;
            result.model = spec.name.clone();
            Ok(result)
        })
        .collect();
    let results: Vec<RegressionResult> = fitted.into_iter().collect::<Result<_>>()?;
    for (i, r) in results.iter().enumerate() {
        ctx.write(&format!("panel/model_{}_{}.csv", i + 1, slug(&r.model)), |w| write_results_csv(r, w))?;
    }
    ctx.write("panel/summary.csv", |w| write_summary_csv(&results, w))?;
    ctx.write("panel/table.txt", |w| {
        w.write_all(format_table(&results).as_bytes())
            .map_err(|e| Error::io("panel/table.txt", e))
    })?;
    Ok(results)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row)?;
    }
    csv.flush().map_err(|e| Error::io("<report csv>", e))
}

fn series_name(r: &ZScoreResult) -> String {
    let base = match (r.scope, r.group) {
        (Scope::Internal, Some(g)) => format!("internal_{}", g.label()),
        (scope, _) => scope.to_string(),
    };
    match r.null_mode {
        NullMode::Full => base,
        NullMode::GroupRefit => format!("{base}_refit"),
    }
}

fn zscore_row(r: &ZScoreResult, lead: Vec<String>) -> Vec<String> {
    let mut row = lead;
    row.extend([
        r.observed.to_string(),
        r.mean.to_string(),
        r.sd.to_string(),
        opt(r.z),
        (r.degenerate() as u8).to_string(),
    ]);
    row
}

/// Plot-ready data for every figure, then a manifest of the output tree.
pub fn cmd_report(config: &RunConfig) -> Result<PathBuf> {
    let ctx = Context::load(config)?;
    ctx.write_config()?;
    let z = ensure_zscores(&ctx)?;
    let filters = [GroupFilter::All, GroupFilter::Only(CountryGroup::Eu15), GroupFilter::Only(CountryGroup::Cee)];

    // correlations with the base year
    let base_year = ctx.config.analysis.base_year.unwrap_or(ctx.panel.first_year());
    let measures = [
        CorrelationMeasure::Panel(Measure::Employment),
        CorrelationMeasure::Panel(Measure::Ulc),
        CorrelationMeasure::Panel(Measure::ValueAddedPc),
        CorrelationMeasure::MotifCount,
    ];
    let mut rows = Vec::new();
    for measure in measures {
        for filter in filters {
            let options = CorrelationOptions {
                base_year,
                filter,
                log_transform: false,
                threshold: ctx.config.analysis.threshold,
            };
            for c in base_year_correlation(&ctx.panel, measure, &ctx.groups, &options)? {
                rows.push(vec![
                    c.year.to_string(),
                    measure.name().to_string(),
                    filter.label().to_string(),
                    base_year.to_string(),
                    c.pairs.to_string(),
                    opt(c.coefficient),
                ]);
            }
        }
    }
    ctx.write("report/fig1b_correlations.csv", |w| {
        write_csv(w, &["year", "measure", "group", "base_year", "pairs", "coefficient"], &rows)
    })?;

    // distribution summaries of cell measures
    let mut rows = Vec::new();
    let membership = ctx.groups.resolve(ctx.panel.countries())?;
    let n_s = ctx.panel.sectors().len();
    for &year in &ctx.years {
        let cells = ctx.panel.year_cells(year).ok_or(Error::YearAbsent(year))?;
        for measure in Measure::ALL {
            for filter in filters {
                let mut v: Vec<f64> = cells
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| match filter {
                        GroupFilter::All => true,
                        GroupFilter::Only(g) => membership[i / n_s] == g,
                    })
                    .filter_map(|(_, c)| c.get(measure))
                    .collect();
                if v.is_empty() {
                    continue;
                }
                v.sort_by(f64::total_cmp);
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
                rows.push(vec![
                    year.to_string(),
                    measure.name().to_string(),
                    filter.label().to_string(),
                    v.len().to_string(),
                    mean.to_string(),
                    sd.to_string(),
                    v[0].to_string(),
                    quantile(&v, 0.25).to_string(),
                    quantile(&v, 0.5).to_string(),
                    quantile(&v, 0.75).to_string(),
                    v[v.len() - 1].to_string(),
                ]);
            }
        }
    }
    ctx.write("report/fig1c_distributions.csv", |w| {
        write_csv(w, &["year", "measure", "group", "n", "mean", "sd", "min", "q25", "median", "q75", "max"], &rows)
    })?;

    // share of links held by CEE countries
    let mut rows = Vec::new();
    for &year in &ctx.years {
        let net = ctx.network(year)?;
        let d = net.matrix.row_sums();
        let total: usize = d.iter().sum();
        let cee: usize = d.iter().zip(&membership).filter(|(_, g)| **g == CountryGroup::Cee).map(|(d, _)| d).sum();
        let share = (total > 0).then(|| cee as f64 / total as f64);
        rows.push(vec![year.to_string(), cee.to_string(), total.to_string(), opt(share)]);
    }
    ctx.write("report/fig2a_cee_share.csv", |w| write_csv(w, &["year", "cee_links", "total_links", "cee_share"], &rows))?;

    let stats = ["observed", "mean", "sd", "z", "degenerate"];
    let header = |lead: &[&'static str]| -> Vec<&'static str> { lead.iter().chain(&stats).copied().collect() };
    let rows: Vec<Vec<String>> = z
        .iter()
        .filter(|r| matches!(r.level, Level::Network | Level::Group))
        .map(|r| zscore_row(r, vec![r.year.to_string(), series_name(r)]))
        .collect();
    ctx.write("report/fig2c_zscores.csv", |w| write_csv(w, &header(&["year", "series"]), &rows))?;

    let rows: Vec<Vec<String>> = z
        .iter()
        .filter(|r| r.level == Level::Node)
        .map(|r| {
            let lead = vec![
                r.year.to_string(),
                r.country.clone().unwrap_or_default(),
                r.group.map(|g| g.label().to_string()).unwrap_or_default(),
                r.sector.clone().unwrap_or_default(),
                r.scope.to_string(),
            ];
            zscore_row(r, lead)
        })
        .collect();
    ctx.write("report/fig3a_node_zscores.csv", |w| {
        write_csv(w, &header(&["year", "country", "group", "sector", "scope"]), &rows)
    })?;

    let rows: Vec<Vec<String>> = z
        .iter()
        .filter(|r| r.level == Level::SectorGroup)
        .map(|r| zscore_row(r, vec![r.year.to_string(), r.sector.clone().unwrap_or_default(), series_name(r)]))
        .collect();
    ctx.write("report/figS1_sector_groups.csv", |w| write_csv(w, &header(&["year", "sector_group", "series"]), &rows))?;

    write_manifest(&ctx)
}

fn collect_files(dir: &Path, root: &Path, out: &mut BTreeMap<String, PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, root, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("inside root");
            let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            out.insert(key, path);
        }
    }
    Ok(())
}

pub const MANIFEST: &str = "manifest.csv";

/// `path,bytes,sha256,config_hash,seed` for every file in the output tree.
pub fn write_manifest(ctx: &Context) -> Result<PathBuf> {
    let root = ctx.config.output_dir();
    let mut files = BTreeMap::new();
    collect_files(&root, &root, &mut files)?;
    files.remove(MANIFEST);
    let mut rows = Vec::new();
    for (rel, path) in files {
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        rows.push(vec![
            rel,
            bytes.len().to_string(),
            hex::encode(Sha256::digest(&bytes)),
            ctx.hash.clone(),
            ctx.config.ensemble.seed.to_string(),
        ]);
    }
    ctx.write(MANIFEST, |w| write_csv(w, &["path", "bytes", "sha256", "config_hash", "seed"], &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_hash_scope() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p.csv"), "country,sector,year,employment\n").unwrap();
        let a = RunConfig::from_toml("output = \"a\"\nthreads = 2\n[input]\npanel = \"p.csv\"\n", dir.path()).unwrap();
        let b = RunConfig::from_toml("output = \"b\"\n[input]\npanel = \"p.csv\"\n", dir.path()).unwrap();
        assert_eq!(a.models.len(), 8);
        assert_eq!(a.ensemble.samples, 10_000);
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = RunConfig::from_toml("[input]\npanel = \"p.csv\"\n[ensemble]\nseed = 9\n", dir.path()).unwrap();
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn bad_config_is_a_config_error() {
        let err = RunConfig::from_toml("[input]\npanel = \"p.csv\"\nwat = 1\n", Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = RunConfig::from_toml("[input]\npanel = \"p\"\n[analysis]\nfirst_year = 2010\nlast_year = 2000\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("(5) Primary"), "5_primary");
        assert_eq!(slug("Capital Manu"), "capital_manu");
    }
}
