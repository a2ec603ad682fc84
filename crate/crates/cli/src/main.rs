use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sortmeans::imageio::{error_image, load_ppm, save_ppm, write_palette};
use sortmeans::metrics::{psnr, write_csv};
use sortmeans::{Method, MethodParams, Palette};
use sortmeans_cli::{
    parse_k_values, quantize, run_bench, run_scaling, set_param, write_bench, BenchConfig,
    THREADS_ENV,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_IO: u8 = 3;
const EXIT_METHOD: u8 = 4;
const EXIT_K_RANGE: u8 = 5;
const EXIT_INVALID: u8 = 6;

#[derive(Parser)]
#[command(name = "sortmeans", version, about = "Color quantization and benchmarking")]
struct Cli {
    /// Worker threads for the benchmark grid (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MethodArgs {
    /// Method id: mc, wan, wu, mmm, fcm, pim, km, km-c, fkm, fkm-c, skm, wsm, wsm-c.
    #[arg(long, short)]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Method parameter as key=value, e.g. --set k_prime=4. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl MethodArgs {
    fn resolve(&self) -> Result<(Method, MethodParams)> {
        let method: Method = self.method.parse()?;
        let mut params = MethodParams::default();
        for p in &self.params {
            let (key, value) = p
                .split_once('=')
                .with_context(|| format!("parameter '{p}' is not key=value"))?;
            set_param(&mut params, key.trim(), value.trim())?;
        }
        params.validate()?;
        Ok((method, params))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Quantize one PPM image.
    Quantize {
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Number of colors.
        #[arg(long, short)]
        k: usize,
        /// Quantized image path.
        #[arg(long, short)]
        output: PathBuf,
        /// Also write the palette, one `R G B` line per color.
        #[arg(long)]
        palette: Option<PathBuf>,
        /// Also write the amplified absolute-difference image.
        #[arg(long)]
        error_image: Option<PathBuf>,
    },
    /// Run the method x image x K grid and write runs, summary and ranks CSVs.
    Bench {
        /// Flat key = value configuration file.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Configuration override as key=value. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (overrides the config's `output`).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Run one job at a time so timings do not interfere.
        #[arg(long)]
        serial_timing: bool,
    },
    /// Time one method over a sweep of K and write K, elapsed_ms, distance_evals.
    Scaling {
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// K values: integers and inclusive ranges, e.g. 2-8,16,32.
        #[arg(long, short, default_value = "2-256")]
        k: String,
        /// CSV path; standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<sortmeans::Error>() {
            return match e {
                sortmeans::Error::Io(_) => EXIT_IO,
                sortmeans::Error::UnknownMethod(_) => EXIT_METHOD,
                sortmeans::Error::KOutOfRange { .. } => EXIT_K_RANGE,
                _ => EXIT_INVALID,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_FAILURE
}

fn cmd_quantize(
    input: PathBuf,
    method: MethodArgs,
    k: usize,
    output: PathBuf,
    palette: Option<PathBuf>,
    error: Option<PathBuf>,
) -> Result<()> {
    let (m, params) = method.resolve()?;
    let image = load_ppm(&input).with_context(|| format!("reading {}", input.display()))?;
    let q = quantize(&image, m, k, &params, method.seed)?;
    save_ppm(&output, &q.image).with_context(|| format!("writing {}", output.display()))?;
    if let Some(path) = palette {
        let rounded = Palette::from_colors(&q.palette.rounded())?;
        fs::write(&path, write_palette(&rounded))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = error {
        save_ppm(&path, &error_image(&image, &q.image)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "method={} K={} seed={} colors={} iterations={} mse={:.6} psnr={:.4} time_ms={:.3}",
        m,
        k,
        method.seed,
        q.palette.len(),
        q.report.iterations,
        q.mse,
        psnr(q.mse)?,
        q.report.elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}

fn cmd_bench(
    config: Option<PathBuf>,
    overrides: Vec<String>,
    output: Option<PathBuf>,
    serial: bool,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => BenchConfig::load(&path)?,
        None => BenchConfig::default(),
    };
    cfg.apply_overrides(&overrides)?;
    if let Some(dir) = output {
        cfg.output = dir;
    }
    let out = run_bench(&cfg, serial)?;
    write_bench(&cfg.output, &out)?;
    let mut stdout = std::io::stdout().lock();
    for r in &out.ranks {
        writeln!(
            stdout,
            "{:<6} mse_rank={:.2} time_rank={:.2} stability_rank={:.2}",
            r.method, r.mse_rank, r.time_rank, r.stability_rank
        )?;
    }
    writeln!(stdout, "wrote {}", cfg.output.display())?;
    Ok(())
}

fn cmd_scaling(input: PathBuf, method: MethodArgs, k: String, output: Option<PathBuf>) -> Result<()> {
    let (m, params) = method.resolve()?;
    let ks = parse_k_values(&k)?;
    let image = load_ppm(&input).with_context(|| format!("reading {}", input.display()))?;
    let rows = run_scaling(&image, m, &ks, &params, method.seed)?;
    match output {
        Some(path) => {
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(file, &rows)?;
        }
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Quantize {
            input,
            method,
            k,
            output,
            palette,
            error_image,
        } => cmd_quantize(input, method, k, output, palette, error_image),
        Command::Bench {
            config,
            overrides,
            output,
            serial_timing,
        } => cmd_bench(config, overrides, output, serial_timing),
        Command::Scaling {
            input,
            method,
            k,
            output,
        } => cmd_scaling(input, method, k, output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
