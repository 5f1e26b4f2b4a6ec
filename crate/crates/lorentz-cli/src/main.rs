mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use lorentz_gas::horizons::{principal_horizons, HorizonRegime};
use lorentz_gas::montecarlo::{
    estimate_msd, estimate_survival, estimate_vacf, fit_exponent, scaled_displacement_histogram,
    SurvivalCurve,
};
use lorentz_gas::theory::{
    conjectured_incipient_exponent, discrete_covariance, free_flight_asymptote, mean_free_time,
    small_r_leading, small_r_linear_correction, superdiffusion_matrix, GasConfig,
    SuperdiffusionMatrix,
};
use manifest::RunManifest;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_INVALID: u8 = 2;
const EXIT_INCIPIENT: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;
const EXIT_FIT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "lorentz",
    version,
    about = "Cubic Lorentz gas transport: horizon formulas and event-driven Monte Carlo",
    after_help = "Units: times in lattice constants per unit speed; the unit cell has covolume 1."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the principal horizons of one gas.
    Horizons {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print every closed-form transport prediction as JSON.
    Theory {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: f64,
        /// Include the small-radius expansion terms.
        #[arg(long)]
        small_r_terms: bool,
    },
    /// Run a Monte Carlo estimator and write CSV plus a JSON manifest.
    Simulate {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: machine parallelism; results never
        /// depend on this). LORENTZ_THREADS overrides the default.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a power-law exponent to a survival CSV within the
    /// 10^2/n < F < 10^4/n window.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        samples: u64,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Mode {
    Survival,
    Vacf,
    Msd,
    Dist,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Survival => "survival",
            Mode::Vacf => "vacf",
            Mode::Msd => "msd",
            Mode::Dist => "dist",
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<lorentz_gas::Error> for Failure {
    fn from(e: lorentz_gas::Error) -> Self {
        let code = match e {
            lorentz_gas::Error::IncipientOrClosed { .. } => EXIT_INCIPIENT,
            lorentz_gas::Error::DegenerateGeometry(_) => EXIT_DEGENERATE,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_INVALID, e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Horizons { dim, radius, format } => cmd_horizons(dim, radius, format),
        Command::Theory {
            dim,
            radius,
            small_r_terms,
        } => cmd_theory(dim, radius, small_r_terms),
        Command::Simulate {
            mode,
            dim,
            radius,
            samples,
            tmax,
            seed,
            threads,
            out,
        } => cmd_simulate(mode, dim, radius, samples, tmax, seed, threads, &out),
        Command::Fit { input, samples } => cmd_fit(&input, samples),
    }
}

fn cmd_horizons(dim: usize, radius: f64, format: Format) -> Result<u8, Failure> {
    let set = principal_horizons(dim, radius)?;
    if set.regime == HorizonRegime::IncipientOrClosed {
        return Err(Failure::new(
            EXIT_INCIPIENT,
            format!("incipient-or-closed: no principal horizons at radius {radius}"),
        ));
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&set).unwrap()),
        Format::Csv => {
            let mut out = String::new();
            writeln!(out, "# schema: lorentz-horizons-v1").unwrap();
            writeln!(out, "# dim={dim} radius={radius}").unwrap();
            writeln!(out, "vector,l,width,perp_covolume,normal").unwrap();
            for h in &set.horizons {
                let vector = join_space(h.vector.coords.iter());
                let normal = join_space(h.normal.iter());
                writeln!(
                    out,
                    "{vector},{},{},{},{normal}",
                    h.norm(),
                    h.width,
                    h.perp_covolume
                )
                .unwrap();
            }
            print!("{out}");
        }
    }
    Ok(0)
}

fn join_space<T: ToString>(iter: impl Iterator<Item = T>) -> String {
    iter.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn matrix_json(m: &SuperdiffusionMatrix) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.dim)
        .map(|i| (0..m.dim).map(|j| m.entry(i, j)).collect())
        .collect();
    json!({ "matrix": rows, "scalar": m.scalar })
}

fn cmd_theory(dim: usize, radius: f64, small_r_terms: bool) -> Result<u8, Failure> {
    let cfg = GasConfig::new(dim, radius)?;
    let set = cfg.horizons()?;
    if set.regime == HorizonRegime::IncipientOrClosed {
        // no principal horizons: report the conjectured incipient decay
        // classification instead of the open-regime formulas
        let classification = if dim >= 3 {
            conjectured_incipient_exponent(dim)?.description().to_string()
        } else {
            // touching or overlapping disks close the plane entirely
            "collision-at-bounded-time".to_string()
        };
        let report = json!({
            "schema": "lorentz-theory-v1",
            "dim": dim,
            "radius": radius,
            "regime": "incipient-or-closed",
            "classification": classification,
            "critical_dimension": 6,
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return Ok(EXIT_INCIPIENT);
    }

    let asymptote = free_flight_asymptote(&cfg)?;
    let matrix = superdiffusion_matrix(&cfg)?;
    let tau = mean_free_time(&cfg)?;
    let xi_disc = discrete_covariance(&cfg)?;
    let identity_residual = (dim as f64 * matrix.scalar - asymptote).abs();
    let mut report = json!({
        "schema": "lorentz-theory-v1",
        "dim": dim,
        "radius": radius,
        "packing": cfg.packing(),
        "regime": "open",
        "horizon_count": set.horizons.len(),
        "free_flight_asymptote": asymptote,
        "superdiffusion": matrix_json(&matrix),
        "mean_free_time": tau,
        "xi_disc": matrix_json(&xi_disc),
        "xi_disc_diag": xi_disc.entry(0, 0),
        "identity_residual": identity_residual,
    });
    if small_r_terms {
        let leading = small_r_leading(dim, radius)?;
        let linear = small_r_linear_correction(dim)?;
        report["small_r"] = json!({
            "leading": leading,
            "linear_coefficient": linear,
            "leading_plus_linear": leading + linear * radius,
        });
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mode: Mode,
    dim: usize,
    radius: f64,
    samples: u64,
    tmax: f64,
    seed: u64,
    threads: Option<usize>,
    out: &Path,
) -> Result<u8, Failure> {
    let cfg = GasConfig::new(dim, radius)?;
    if samples == 0 {
        return Err(Failure::new(EXIT_INVALID, "--samples must be at least 1"));
    }
    if !(tmax > 0.0) {
        return Err(Failure::new(EXIT_INVALID, "--tmax must be positive"));
    }
    let threads = configure_threads(threads)?;
    let start = Instant::now();

    let command_line = format!(
        "simulate --mode {} --dim {dim} --radius {radius} --samples {samples} --tmax {tmax} --seed {seed}",
        mode.name()
    );
    let mut csv = String::new();
    writeln!(csv, "# schema: lorentz-{}-v1", mode.name()).unwrap();
    writeln!(csv, "# command: {command_line}").unwrap();
    writeln!(csv, "# units: time in lattice constants per unit speed").unwrap();

    match mode {
        Mode::Survival => {
            let curve = estimate_survival(&cfg, samples, tmax, seed)?;
            writeln!(csv, "t,survivors,estimate,stderr").unwrap();
            for j in 0..curve.len() {
                writeln!(
                    csv,
                    "{},{},{},{}",
                    curve.thresholds[j],
                    curve.survivors[j],
                    curve.estimate(j),
                    curve.stderr(j)
                )
                .unwrap();
            }
        }
        Mode::Vacf => {
            let lags = log_spaced(f64::max(1.0, tmax / 100.0), tmax, 16);
            let series = estimate_vacf(&cfg, samples, &lags, seed, 1)?;
            writeln!(csv, "lag,value,stderr").unwrap();
            for l in 0..series.lags.len() {
                writeln!(
                    csv,
                    "{},{},{}",
                    series.lags[l], series.values[l], series.stderrs[l]
                )
                .unwrap();
            }
        }
        Mode::Msd => {
            if !(tmax > 2.0) {
                return Err(Failure::new(EXIT_INVALID, "--tmax must exceed 2 for msd"));
            }
            let times = log_spaced(2.0, tmax, 8.max((tmax / 2.0).log10() as usize * 8));
            let series = estimate_msd(&cfg, samples, &times, seed)?;
            write!(csv, "t,norm_scalar,norm_scalar_stderr").unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    write!(csv, ",m_{i}_{j}").unwrap();
                }
            }
            writeln!(csv).unwrap();
            for p in &series.points {
                write!(csv, "{},{},{}", p.time, p.normalized_scalar, p.normalized_stderr).unwrap();
                for v in &p.second_moment {
                    write!(csv, ",{v}").unwrap();
                }
                writeln!(csv).unwrap();
            }
        }
        Mode::Dist => {
            let hist = scaled_displacement_histogram(&cfg, samples, tmax, seed)?;
            writeln!(csv, "# scaled by sqrt(t ln t) at t={tmax}").unwrap();
            writeln!(csv, "bin_center,density,stderr,reference_density").unwrap();
            for j in 0..hist.density.len() {
                let center = 0.5 * (hist.edges[j] + hist.edges[j + 1]);
                let reference = hist
                    .reference
                    .as_ref()
                    .map_or(f64::NAN, |r| r[j]);
                writeln!(
                    csv,
                    "{center},{},{},{reference}",
                    hist.density[j], hist.stderr[j]
                )
                .unwrap();
            }
        }
    }

    std::fs::write(out, csv)?;

    let mut man = RunManifest::new("simulate", seed, threads, &out.display().to_string());
    man.param("mode", mode.name())
        .param("dim", dim)
        .param("radius", radius)
        .param("samples", samples)
        .param("tmax", tmax)
        .param("seed", seed);
    man.wall_time_s = start.elapsed().as_secs_f64();
    let manifest_path = manifest_path_for(out);
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&man).unwrap())?;
    eprintln!(
        "wrote {} and {} in {:.2}s",
        out.display(),
        manifest_path.display(),
        man.wall_time_s
    );
    Ok(0)
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut out: Vec<f64> = (0..points).map(|k| lo * (ratio * k as f64).exp()).collect();
    out.dedup();
    out
}

fn configure_threads(flag: Option<usize>) -> Result<usize, Failure> {
    let from_env = std::env::var("LORENTZ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    let threads = flag.or(from_env);
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::new(EXIT_INVALID, "--threads must be at least 1"));
        }
        // only configurable once per process; a failure here means the
        // global pool already exists, which is fine for our single-run CLI
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        Ok(t)
    } else {
        Ok(rayon::current_num_threads())
    }
}

fn cmd_fit(input: &Path, samples: u64) -> Result<u8, Failure> {
    if samples == 0 {
        return Err(Failure::new(EXIT_INVALID, "--samples must be at least 1"));
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::new(EXIT_FIT, format!("cannot read {}: {e}", input.display())))?;
    let curve = parse_survival_csv(&text, samples)
        .map_err(|e| Failure::new(EXIT_FIT, format!("{}: {e}", input.display())))?;
    let window = (100.0 / samples as f64, 10_000.0 / samples as f64);
    let fit = fit_exponent(&curve, window).map_err(|e| Failure::new(EXIT_FIT, e))?;
    let report = json!({
        "schema": "lorentz-fit-v1",
        "alpha": fit.alpha,
        "alpha_stderr": fit.alpha_stderr,
        "window": [fit.window.0, fit.window.1],
        "residual_rms": fit.residual_rms,
        "bins_used": fit.bins_used,
        "weighting": "unweighted-loglog",
        "samples": samples,
        "input": input.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(0)
}

fn parse_survival_csv(text: &str, samples: u64) -> Result<SurvivalCurve, String> {
    let mut thresholds = Vec::new();
    let mut survivors = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if !line.starts_with("t,survivors") {
                return Err(format!("unexpected header {line:?}"));
            }
            header_seen = true;
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .ok_or("missing t column")?
            .parse()
            .map_err(|e| format!("bad t value: {e}"))?;
        let s: u64 = fields
            .next()
            .ok_or("missing survivors column")?
            .parse()
            .map_err(|e| format!("bad survivors value: {e}"))?;
        thresholds.push(t);
        survivors.push(s);
    }
    if thresholds.is_empty() {
        return Err("no data rows".to_string());
    }
    Ok(SurvivalCurve {
        thresholds,
        survivors,
        samples,
    })
}
