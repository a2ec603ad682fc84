//! Configuration and drivers behind the `sortmeans` binary: single-image
//! quantization, the benchmark grid, and the K-scaling sweep.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sortmeans::imageio::{load_ppm, map_pixels};
use sortmeans::method::{self, Method, MethodParams};
use sortmeans::metrics::{self, rank_summaries, BenchSummary, RankRecord, RunRecord};
use sortmeans::RgbImage;

pub const DEFAULT_K_VALUES: [usize; 4] = [32, 64, 128, 256];
pub const DEFAULT_RUNS: usize = 100;
/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "SORTMEANS_THREADS";

/// The benchmark grid: every method on every image at every K, `runs`
/// times each. Run `r` of a cell uses seed `base_seed + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub images: Vec<PathBuf>,
    pub methods: Vec<Method>,
    /// Parameters shared by all methods.
    pub params: MethodParams,
    /// Per-method overrides, applied on top of `params`.
    pub overrides: Vec<(Method, String, String)>,
    pub k_values: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    /// Directory receiving `runs.csv`, `summary.csv` and `ranks.csv`.
    pub output: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            images: Vec::new(),
            methods: Vec::new(),
            params: MethodParams::default(),
            overrides: Vec::new(),
            k_values: DEFAULT_K_VALUES.to_vec(),
            runs: DEFAULT_RUNS,
            base_seed: 0,
            output: PathBuf::from("bench-out"),
        }
    }
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .trim()
        .parse()
        .with_context(|| format!("invalid value '{value}' for {key}"))
}

/// Sets one named method parameter.
pub fn set_param(params: &mut MethodParams, key: &str, value: &str) -> Result<()> {
    match key {
        "max_iters" => params.max_iters = parse_num(key, value)?,
        "epsilon" => params.epsilon = parse_num(key, value)?,
        "k_prime" => params.k_prime = parse_num(key, value)?,
        "i_prime" => params.i_prime = parse_num(key, value)?,
        "theta" => params.theta = parse_num(key, value)?,
        "q" => params.q = parse_num(key, value)?,
        "delta" => params.delta = parse_num(key, value)?,
        "fuzzy_iters" => params.fuzzy_iters = parse_num(key, value)?,
        "fuzzy_full_pixels" => params.fuzzy_full_pixels = parse_num(key, value)?,
        _ => bail!("unknown parameter '{key}'"),
    }
    Ok(())
}

/// Parses a list of K values: comma-separated integers or inclusive
/// ranges `a-b`, e.g. `2-8,16,32`.
pub fn parse_k_values(value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (parse_num("K", a)?, parse_num("K", b)?);
                ensure!(a <= b, "empty K range '{item}'");
                out.extend(a..=b);
            }
            None => out.push(parse_num("K", item)?),
        }
    }
    ensure!(!out.is_empty(), "no K values given");
    Ok(out)
}

impl BenchConfig {
    /// Parses a flat `key = value` file. Blank lines and lines starting with
    /// `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
            config
                .set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Applies one setting. Keys: `images`, `methods`, `k`, `runs`,
    /// `base_seed`, `output`, any method parameter, or `<method>.<parameter>`
    /// for a per-method override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "images" => self.images = parse_list(value, |s| Ok(PathBuf::from(s)))?,
            "methods" => {
                self.methods = parse_list(value, |s| s.parse::<Method>().map_err(Into::into))?
            }
            "k" | "K" | "k_values" => self.k_values = parse_k_values(value)?,
            "runs" => self.runs = parse_num(key, value)?,
            "base_seed" => self.base_seed = parse_num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => match key.split_once('.') {
                Some((m, param)) => {
                    let method: Method = m.parse()?;
                    set_param(&mut MethodParams::default(), param, value)?;
                    self.overrides.push((method, param.to_string(), value.to_string()));
                }
                None => set_param(&mut self.params, key, value)?,
            },
        }
        Ok(())
    }

    /// Applies `key=value` overrides, e.g. from the command line.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .with_context(|| format!("override '{o}' is not key=value"))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Effective parameters of `method`.
    pub fn params_for(&self, method: Method) -> Result<MethodParams> {
        let mut params = self.params;
        for (m, key, value) in &self.overrides {
            if *m == method {
                set_param(&mut params, key, value)?;
            }
        }
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.images.is_empty(), "no images configured");
        ensure!(!self.methods.is_empty(), "no methods configured");
        ensure!(!self.k_values.is_empty(), "no K values configured");
        ensure!(self.k_values.iter().all(|&k| k >= 1), "K values must be at least 1");
        ensure!(self.runs >= 1, "runs must be at least 1");
        for &m in &self.methods {
            self.params_for(m)?
                .validate()
                .with_context(|| format!("parameters of {m}"))?;
        }
        Ok(())
    }
}

/// Result of one palette design plus mapping.
pub struct Quantized {
    pub image: RgbImage,
    pub palette: sortmeans::Palette,
    pub report: sortmeans::RunReport,
    pub mse: f64,
}

/// Designs a palette and maps `image` through it.
pub fn quantize(
    image: &RgbImage,
    method: Method,
    k: usize,
    params: &MethodParams,
    seed: u64,
) -> sortmeans::Result<Quantized> {
    let (palette, report) = method::run(method, image, k, params, seed)?;
    let mapped = map_pixels(image, &palette)?;
    let mse = metrics::mse(image, &mapped)?;
    Ok(Quantized {
        image: mapped,
        palette,
        report,
        mse,
    })
}

/// Everything one benchmark invocation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<BenchSummary>,
    pub ranks: Vec<RankRecord>,
}

fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the grid. With `serial` set, runs execute one at a time so timings
/// are not disturbed by each other; otherwise they are spread over the
/// current rayon pool. Output order is the same either way.
pub fn run_bench(config: &BenchConfig, serial: bool) -> Result<BenchOutput> {
    config.validate()?;
    let images = config
        .images
        .iter()
        .map(|p| {
            load_ppm(p)
                .with_context(|| format!("loading {}", p.display()))
                .map(|img| (image_name(p), img))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for (i, _) in images.iter().enumerate() {
        for &m in &config.methods {
            for &k in &config.k_values {
                cells.push((i, m, k, config.params_for(m)?));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.runs).map(move |r| (c, r)))
        .collect();
    let run_one = |&(c, r): &(usize, usize)| -> Result<RunRecord> {
        let (i, m, k, params) = &cells[c];
        let (name, img) = &images[*i];
        let seed = config.base_seed + r as u64;
        let q = quantize(img, *m, *k, params, seed)
            .with_context(|| format!("cell image={name} method={m} K={k} seed={seed}"))?;
        Ok(RunRecord::new(name.clone(), &q.report, q.mse))
    };
    let runs: Vec<RunRecord> = if serial {
        jobs.iter().map(run_one).collect::<Result<_>>()?
    } else {
        jobs.par_iter().map(run_one).collect::<Result<_>>()?
    };

    let summaries = runs
        .chunks(config.runs)
        .map(BenchSummary::from_runs)
        .collect::<sortmeans::Result<Vec<_>>>()?;
    let ranks = rank_summaries(&summaries)?;
    Ok(BenchOutput {
        runs,
        summaries,
        ranks,
    })
}

/// Writes `runs.csv`, `summary.csv` and `ranks.csv` into `dir`.
pub fn write_bench(dir: &Path, output: &BenchOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, f: &dyn Fn(fs::File) -> sortmeans::Result<()>| -> Result<()> {
        let path = dir.join(name);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        f(file).with_context(|| format!("writing {}", path.display()))
    };
    write("runs.csv", &|f| metrics::write_csv(f, &output.runs))?;
    write("summary.csv", &|f| metrics::write_csv(f, &output.summaries))?;
    write("ranks.csv", &|f| metrics::write_csv(f, &output.ranks))?;
    Ok(())
}

/// One row of the K sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub elapsed_ms: f64,
    pub distance_evals: u64,
    pub iterations: usize,
}

/// Runs `method` once per K, serially, with the same seed.
pub fn run_scaling(
    image: &RgbImage,
    method: Method,
    k_values: &[usize],
    params: &MethodParams,
    seed: u64,
) -> sortmeans::Result<Vec<ScalingRow>> {
    k_values
        .iter()
        .map(|&k| {
            let (_, report) = method::run(method, image, k, params, seed)?;
            Ok(ScalingRow {
                k,
                elapsed_ms: report.elapsed.as_secs_f64() * 1e3,
                distance_evals: report.distance_evals,
                iterations: report.iterations,
            })
        })
        .collect()
}
