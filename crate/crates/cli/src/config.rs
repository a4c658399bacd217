//! Run configuration: one TOML file plus `--set key=value` overrides.
//!
//! ```toml
//! alpha = 1.0
//! n_grid = 6
//! t_final = 71.6
//! tol = 1e-8
//! sample_times = 50            # or an explicit list [0.0, 1.0, 5.0]
//! window = [-1.0, 1.0]
//! output_dir = "out"
//! seed = 0
//! initial_measure = "droplet.toml"   # or an inline table
//!
//! [fields]
//! points = 4001
//!
//! [verify]
//! splitting_ns = [2, 4, 8, 16]
//! convergence = false
//!
//! [converge]
//! n_list = [3, 4, 5, 6, 7, 8]
//! times = [0.0, 1.0, 5.0]
//!
//! [bench]
//! fast_sizes = [1000, 10000, 100000, 1000000]
//! direct_sizes = [1000, 2000, 4000, 10000]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use gtfe::integrator::{TOL_MAX, TOL_MIN};
use gtfe::InitialMeasure;

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum SampleTimes {
    /// `k` uniform samples `t_final·j/k`, `j = 1..=k` (t = 0 is always added).
    Count(usize),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsConfig {
    /// Uniform field grid over the particle window padded by `pad_alpha·α`.
    pub points: usize,
    pub pad_alpha: f64,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        Self { points: 4001, pad_alpha: 40.0 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub identity_points: usize,
    pub oracle_states: usize,
    pub oracle_max_n: usize,
    /// Pair budget of the envelope check; all pairs below it.
    pub envelope_pairs: usize,
    pub test_functions: usize,
    pub weak_pair_t_final: f64,
    pub refinement_levels: u32,
    pub holder_pairs: usize,
    pub splitting_ns: Vec<u32>,
    pub splitting_t_final: f64,
    pub splitting_tol: f64,
    pub convergence: bool,
    /// Test hook: perturbs the fast sum before comparing it with the direct one.
    pub corrupt_fast_sum: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            identity_points: 1000,
            oracle_states: 200,
            oracle_max_n: 1024,
            envelope_pairs: 100_000,
            test_functions: 3,
            weak_pair_t_final: 20.0,
            refinement_levels: 6,
            holder_pairs: 100,
            splitting_ns: vec![2, 4, 8, 16],
            splitting_t_final: 50.0,
            splitting_tol: 1e-9,
            convergence: false,
            corrupt_fast_sum: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub n_list: Vec<u32>,
    pub times: Vec<f64>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self { n_list: vec![3, 4, 5, 6, 7, 8], times: vec![0.0, 1.0, 5.0] }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub fast_sizes: Vec<usize>,
    pub direct_sizes: Vec<usize>,
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let d = gtfe::bench::BenchOptions::default();
        Self { fast_sizes: d.fast_sizes, direct_sizes: d.direct_sizes, repeats: d.repeats }
    }
}

/// File layout before the measure is resolved.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: f64,
    initial_measure: toml::Value,
    n_grid: u32,
    t_final: f64,
    tol: f64,
    sample_times: SampleTimes,
    window: (f64, f64),
    output_dir: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    fields: FieldsConfig,
    #[serde(default)]
    verify: VerifyConfig,
    #[serde(default)]
    converge: ConvergeConfig,
    #[serde(default)]
    bench: BenchConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub initial_measure: InitialMeasure,
    pub n_grid: u32,
    pub t_final: f64,
    pub tol: f64,
    pub sample_times: SampleTimes,
    pub window: (f64, f64),
    pub output_dir: PathBuf,
    pub seed: u64,
    pub fields: FieldsConfig,
    pub verify: VerifyConfig,
    pub converge: ConvergeConfig,
    pub bench: BenchConfig,
}

impl RunConfig {
    /// Reads `path`, applies `overrides` (`key=value`, dotted keys, TOML values)
    /// and validates. Relative paths resolve against the config's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str_with(&text, base, overrides)
    }

    pub fn from_str_with(text: &str, base: &Path, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let raw: RawConfig = toml::Value::Table(table).try_into().context("invalid config")?;
        let initial_measure = match raw.initial_measure {
            toml::Value::String(p) => {
                let p = base.join(p);
                let s = fs::read_to_string(&p).with_context(|| format!("reading measure file {}", p.display()))?;
                InitialMeasure::from_toml_str(&s).with_context(|| format!("in measure file {}", p.display()))?
            }
            v @ toml::Value::Table(_) => v.try_into().context("in initial_measure")?,
            other => bail!("initial_measure must be a file path or a table, got {}", other.type_str()),
        };
        let output_dir = if raw.output_dir.is_absolute() { raw.output_dir } else { base.join(raw.output_dir) };
        let cfg = RunConfig {
            alpha: raw.alpha,
            initial_measure,
            n_grid: raw.n_grid,
            t_final: raw.t_final,
            tol: raw.tol,
            sample_times: raw.sample_times,
            window: raw.window,
            output_dir,
            seed: raw.seed,
            fields: raw.fields,
            verify: raw.verify,
            converge: raw.converge,
            bench: raw.bench,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            bail!("alpha must be > 0, got {}", self.alpha);
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            bail!("t_final must be > 0, got {}", self.t_final);
        }
        if !(TOL_MIN..=TOL_MAX).contains(&self.tol) {
            bail!("tol must lie in [{TOL_MIN:e}, {TOL_MAX:e}], got {:e}", self.tol);
        }
        let (lo, hi) = self.window;
        let (s_lo, s_hi) = self.initial_measure.support_bounds();
        if !(lo < hi && lo <= s_lo && hi >= s_hi) {
            bail!("window ({lo}, {hi}) does not cover the measure support [{s_lo}, {s_hi}]");
        }
        if let SampleTimes::List(ts) = &self.sample_times {
            if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && **t <= self.t_final)) {
                bail!("sample_times entry {t} outside [0, t_final]");
            }
        }
        if let SampleTimes::Count(0) = self.sample_times {
            bail!("sample_times count must be >= 1");
        }
        if self.fields.points < 2 {
            bail!("fields.points must be >= 2");
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        match &self.sample_times {
            SampleTimes::Count(k) => (1..=*k).map(|j| self.t_final * j as f64 / *k as f64).collect(),
            SampleTimes::List(ts) => ts.clone(),
        }
    }
}

fn apply_override(table: &mut toml::Table, arg: &str) -> Result<()> {
    let (key, value) = arg.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got {arg:?}"))?;
    let key = key.trim();
    let value = value.trim();
    // parse as a TOML value; bare words fall back to strings
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| anyhow!("empty key in --set {arg:?}"))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("--set {key}: {p} is not a table"))?;
    }
    cur.insert(last.to_string(), parsed);
    Ok(())
}
