//! Campaign runner: writes channel realizations, correlation curves and
//! delay-spread CDFs as delimited text with `#` headers.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iiot_gbsm::ensemble::{build_channel, delay_spread_samples, generate, DsMode};
use iiot_gbsm::export::{correlation_csv, header, labelled_cdfs_csv, read_cdf, realization_csv};
use iiot_gbsm::stats::{empirical_cdf, mmse_fit, CdfCurve, CorrelationSamples, Estimator, FitConfig, FitParam, Lag, PathFilter};
use iiot_gbsm::{Clutter, Condition, Error, ScenarioParams};

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "iiot-gbsm", version, about = "Industrial MIMO channel simulator campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump path lists (delay and complex gain) per time, Rx and Tx element.
    Realize {
        #[command(flatten)]
        run: RunArgs,
        /// Sample instants, seconds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        times: Vec<f64>,
    },
    /// Temporal autocorrelation curves, whole channel and per cluster.
    Acf {
        #[command(flatten)]
        run: RunArgs,
        /// Reference instants, seconds.
        #[arg(long, value_delimiter = ',', default_value = "1e-3,5e-3")]
        instants: Vec<f64>,
        /// Largest time lag, seconds.
        #[arg(long, default_value_t = 5e-3)]
        max_lag: f64,
        #[arg(long, default_value_t = 1e-4)]
        lag_step: f64,
        /// 1-based cluster numbers to report separately.
        #[arg(long, value_delimiter = ',', default_value = "1,3")]
        clusters: Vec<usize>,
    },
    /// Delay-spread CDFs for a set of scenario variants.
    DsCdf {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Variants::Dmc)]
        variants: Variants,
        /// Evaluation instant, seconds.
        #[arg(long, default_value_t = 0.0)]
        at: f64,
    },
    /// Fit parameters so the simulated delay-spread CDF matches a reference.
    Fit {
        #[command(flatten)]
        run: RunArgs,
        /// Reference CDF file (`value,cdf` columns, optional `label`).
        #[arg(long)]
        reference: PathBuf,
        /// Curve to use when the reference holds several labels.
        #[arg(long)]
        label: Option<String>,
        /// Free parameter as `key:lo:hi`; repeatable.
        #[arg(long = "param", default_value = "k_factor_db:0:20")]
        params: Vec<String>,
        #[arg(long, default_value_t = 60)]
        budget: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Largest vertical distance between two CDF files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        label_a: Option<String>,
        #[arg(long)]
        label_b: Option<String>,
    },
    /// Print a built-in scenario as TOML.
    Preset {
        #[arg(value_parser = ["SA-LOS", "SA-NLOS", "SB-LOS", "SB-NLOS"])]
        name: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    realizations: u64,
    /// Override any scenario field, e.g. `--set link.rx_speed=1`.
    #[arg(long = "set")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variants {
    /// SMC-only and SMC+DMC for the scenario as given.
    Dmc,
    /// 2 decay factors x 2 delay scalings x {SMC, SMC+DMC}.
    DmcSweep,
    /// Light/heavy clutter x LOS/NLOS presets with the scenario's link.
    Clutter,
}

enum Failure {
    Config(String),
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn setup(e: Error) -> Self {
        match e {
            Error::Validation(_) => Failure::Validation(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn load(run: &RunArgs) -> Outcome<ScenarioParams> {
    let mut p = ScenarioParams::load(&run.scenario).map_err(Failure::setup)?;
    p.apply_overrides(&run.overrides).map_err(Failure::setup)?;
    p.validated().map_err(Failure::setup)
}

fn meta(command: &str, run: &RunArgs) -> Vec<(&'static str, String)> {
    vec![
        ("generator", format!("iiot-gbsm {}", env!("CARGO_PKG_VERSION"))),
        ("command", command.to_string()),
        ("seed", run.seed.to_string()),
        ("realizations", run.realizations.to_string()),
    ]
}

fn write(dir: &Path, name: &str, body: String) -> Outcome<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn realize(run: &RunArgs, times: &[f64]) -> Outcome<()> {
    let p = load(run)?;
    let width = run.realizations.to_string().len();
    let files: Vec<(String, String)> = {
        use rayon::prelude::*;
        (0..run.realizations)
            .into_par_iter()
            .map(|i| {
                let r = build_channel(&p, run.seed, i)?.synthesize(times)?;
                let mut m = meta("realize", run);
                m.push(("realization", i.to_string()));
                Ok((format!("realization_{i:0width$}.csv"), header(&m, Some(&p)) + &realization_csv(&r)))
            })
            .collect::<iiot_gbsm::Result<_>>()?
    };
    for (name, body) in files {
        write(&run.out, &name, body)?;
    }
    Ok(())
}

fn acf(run: &RunArgs, instants: &[f64], max_lag: f64, lag_step: f64, clusters: &[usize]) -> Outcome<()> {
    let p = load(run)?;
    if !(lag_step > 0.0) || !(max_lag >= 0.0) {
        return Err(Failure::Config("lag step must be positive and max lag non-negative".into()));
    }
    if let Some(bad) = clusters.iter().find(|c| **c == 0 || **c > p.n_clusters) {
        return Err(Failure::Config(format!("cluster {bad} outside 1..={}", p.n_clusters)));
    }
    let n_lags = (max_lag / lag_step + 1e-9).floor() as usize + 1;
    let lags: Vec<Lag> = (0..n_lags).map(|k| Lag { dt: k as f64 * lag_step, df: 0.0 }).collect();
    let ensemble = generate(&p, run.seed, run.realizations as usize)?;
    let mut filters = vec![("all".to_string(), PathFilter::All)];
    filters.extend(clusters.iter().map(|c| (format!("cluster_{c}"), PathFilter::Cluster(c - 1))));
    let mut curves = Vec::new();
    for t in instants {
        for (name, filter) in &filters {
            let s = CorrelationSamples::collect(&ensemble, (0, 0), (0, 0), *t, 0.0, &lags, *filter)?;
            for (tag, est) in [("theoretical", Estimator::Theoretical), ("simulated", Estimator::Simulated)] {
                let curve = s.curve(est, iiot_gbsm::stats::Normalization::UnitAtZero);
                curves.push((format!("t={t:e};{name};{tag}"), curve));
            }
        }
    }
    let mut m = meta("acf", run);
    m.push(("normalization", "unit at zero lag, per curve".into()));
    write(&run.out, "acf.csv", header(&m, Some(&p)) + &correlation_csv(&curves))?;
    Ok(())
}

fn variant_set(base: &ScenarioParams, variants: Variants) -> Vec<(String, ScenarioParams, DsMode)> {
    match variants {
        Variants::Dmc => vec![
            ("SMC".into(), base.clone(), DsMode::SmcOnly),
            ("SMC+DMC".into(), base.clone(), DsMode::All),
        ],
        Variants::DmcSweep => {
            let mut out = Vec::new();
            for beta in [10e-9, 50e-9] {
                for s in [2.0, 10.0] {
                    let p = base.clone().with_dmc_delay(s, beta);
                    for mode in [DsMode::SmcOnly, DsMode::All] {
                        out.push((format!("beta={:.0}ns;S={s};{}", beta * 1e9, mode.label()), p.clone(), mode));
                    }
                }
            }
            out
        }
        Variants::Clutter => {
            let mut out = Vec::new();
            for c in [Clutter::Light, Clutter::Heavy] {
                for k in [Condition::Los, Condition::Nlos] {
                    let mut p = ScenarioParams::preset(c, k);
                    p.link = base.link.clone();
                    p.clusters = base.clusters.clone();
                    p.s_dmc_tau = base.s_dmc_tau;
                    p.beta_dmc = base.beta_dmc;
                    p.angle_std = base.angle_std;
                    out.push((format!("{c}-{k}"), p, DsMode::All));
                }
            }
            out
        }
    }
}

fn ds_cdf(run: &RunArgs, variants: Variants, at: f64) -> Outcome<()> {
    let base = load(run)?;
    let mut curves: Vec<(String, CdfCurve)> = Vec::new();
    let mut m = meta("ds-cdf", run);
    m.push(("evaluated at", format!("{at:e} s")));
    for (label, p, mode) in variant_set(&base, variants) {
        p.validate().map_err(|e| Failure::setup(Error::Validation(e)))?;
        let ds = delay_spread_samples(&p, run.seed, run.realizations as usize, at, mode)?;
        let cdf = empirical_cdf(&ds)?;
        m.push((
            "curve",
            format!(
                "{label}: clutter {}, condition {}, K {} dB, eta {}, S {}, beta {:e} s, median {:e} s",
                p.clutter,
                p.condition,
                p.k_factor_db,
                p.eta_dmc,
                p.s_dmc_tau,
                p.beta_dmc,
                cdf.median()
            ),
        ));
        curves.push((label, cdf));
    }
    write(&run.out, "ds_cdf.csv", header(&m, Some(&base)) + &labelled_cdfs_csv(&curves))?;
    Ok(())
}

fn parse_param(s: &str) -> Outcome<FitParam> {
    let bad = || Failure::Config(format!("parameter '{s}' is not key:lo:hi"));
    let mut it = s.split(':');
    let (Some(key), Some(lo), Some(hi), None) = (it.next(), it.next(), it.next(), it.next()) else {
        return Err(bad());
    };
    Ok(FitParam {
        key: key.to_string(),
        lo: lo.parse().map_err(|_| bad())?,
        hi: hi.parse().map_err(|_| bad())?,
    })
}

fn fit(run: &RunArgs, reference: &Path, label: Option<&str>, params: &[String], budget: usize, levels: usize) -> Outcome<()> {
    let base = load(run)?;
    let reference = read_cdf(reference, label).map_err(Failure::setup)?;
    let space = params.iter().map(|s| parse_param(s)).collect::<Outcome<Vec<_>>>()?;
    for fp in &space {
        base.clone().set_f64(&fp.key, fp.lo).map_err(Failure::setup)?;
    }
    let cfg = FitConfig {
        seed: run.seed,
        realizations: run.realizations as usize,
        budget,
        levels,
        ..Default::default()
    };
    let r = mmse_fit(&reference, &base, &space, &cfg)?;
    let mut m = meta("fit", run);
    for (fp, v) in space.iter().zip(&r.point) {
        m.push(("fitted", format!("{} = {v} (searched {}..{})", fp.key, fp.lo, fp.hi)));
    }
    m.push(("residual", format!("{:e}", r.residual)));
    m.push(("evaluations", r.evaluations.to_string()));
    let mut trace = String::from("step,residual\n");
    for (i, v) in r.trace.iter().enumerate() {
        trace.push_str(&format!("{i},{v:e}\n"));
    }
    write(&run.out, "fit_trace.csv", header(&m, Some(&r.params)) + &trace)?;
    write(&run.out, "fitted.toml", r.params.to_toml_string())?;
    println!("residual {:e} after {} evaluations", r.residual, r.evaluations);
    for (fp, v) in space.iter().zip(&r.point) {
        println!("{} = {v}", fp.key);
    }
    Ok(())
}

fn compare(a: &Path, b: &Path, la: Option<&str>, lb: Option<&str>) -> Outcome<()> {
    let ca = read_cdf(a, la).map_err(Failure::setup)?;
    let cb = read_cdf(b, lb).map_err(Failure::setup)?;
    println!("{:e}", ca.max_distance(&cb));
    Ok(())
}

fn preset(name: &str) -> Outcome<()> {
    let (c, k) = name.split_once('-').expect("validated by clap");
    let c: Clutter = c.parse().map_err(Failure::setup)?;
    let k: Condition = k.parse().map_err(Failure::setup)?;
    print!("{}", ScenarioParams::preset(c, k).to_toml_string());
    Ok(())
}

fn pool(run: &RunArgs) -> Outcome<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = run.workers {
        if n == 0 {
            return Err(Failure::Config("--workers must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Runtime(e.to_string()))
}

fn dispatch(cmd: Command) -> Outcome<()> {
    match cmd {
        Command::Realize { run, times } => pool(&run)?.install(|| realize(&run, &times)),
        Command::Acf {
            run,
            instants,
            max_lag,
            lag_step,
            clusters,
        } => pool(&run)?.install(|| acf(&run, &instants, max_lag, lag_step, &clusters)),
        Command::DsCdf { run, variants, at } => pool(&run)?.install(|| ds_cdf(&run, variants, at)),
        Command::Fit {
            run,
            reference,
            label,
            params,
            budget,
            levels,
        } => pool(&run)?.install(|| fit(&run, &reference, label.as_deref(), &params, budget, levels)),
        Command::Compare { a, b, label_a, label_b } => compare(&a, &b, label_a.as_deref(), label_b.as_deref()),
        Command::Preset { name } => preset(&name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
