use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ldp1d::harness::{ldp_report, RunConfig};
use ldp1d::horseshoe::{
    build_horseshoe, free_energy_lower_bound, verify_horseshoe, Constraint, ConstraintSet,
    HorseshoeCertificate, HorseshoeParams,
};
use ldp1d::maps::{MapSpec, ObservableSpec};
use ldp1d::pullback::{distortion, pullbacks};
use ldp1d::safety::{safe_dense_set, safety_balls, DEFAULT_J_MAX};
use ldp1d::thermo::{
    invariant_density, legendre_rate, observable_range, pressure, scgf_curve, theta_grid,
    ulam_operator, PressureMethod, ScgfMethod,
};
use ldp1d::{Error, Interval, Observable, Result, SmoothMap};

#[derive(Parser)]
#[command(name = "ldp1d", version, about = "Large deviations for smooth interval maps")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "LDP1D_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `chebyshev`, `tent`, `quadratic:A`, or a map JSON object.
    #[arg(long)]
    map: Option<String>,
    /// `identity`, `log-deriv` or `poly:c0,c1,...`.
    #[arg(long)]
    observable: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Full LDP report: volumes, rate fit, Legendre prediction.
    Run {
        #[command(flatten)]
        common: Common,
        /// Window `lo,hi`.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        bins: Option<usize>,
        /// Directory for CSV tables and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pressure of `θ·φ`, optionally minus `log|Df|`.
    Pressure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "ulam")]
        method: MethodArg,
        /// Period `n` for periodic, bin count for ulam.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Subtract `log|Df|`.
        #[arg(long)]
        geometric: bool,
        /// Use the zero potential (topological pressure) instead of `φ`.
        #[arg(long)]
        zero: bool,
    },
    /// SCGF curve and its Legendre transform as CSV.
    Rate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "ulam")]
        method: MethodArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Build a horseshoe for `S_nφ/n ≥ α` near `x0`, or re-verify a
    /// certificate.
    Horseshoe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Threshold; omit for no constraint.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Write the certificate JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-verify this certificate instead of building.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Pull-backs of `[lo, hi]` by `f^n` as CSV on stdout.
    Pullbacks {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        n: usize,
    },
    /// The neighbourhood `E_n(α)` of the critical orbit and a dense set of
    /// safe points.
    Safe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_J_MAX)]
        j_max: usize,
        /// Cell width of the safe set; omit to skip it.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Ulam estimate of the invariant density as CSV.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Periodic,
    Ulam,
    Grid,
}

fn parse_map(text: &str) -> Result<MapSpec> {
    match text {
        "chebyshev" => Ok(MapSpec::Chebyshev),
        "tent" => Ok(MapSpec::Tent),
        _ => match text.strip_prefix("quadratic:") {
            Some(a) => Ok(MapSpec::Quadratic {
                a: a.parse().map_err(|_| Error::Argument(format!("bad parameter in {text}")))?,
            }),
            None => serde_json::from_str(text).map_err(|e| {
                Error::Argument(format!(
                    "map {text} is not chebyshev, tent, quadratic:A or map JSON ({e})"
                ))
            }),
        },
    }
}

fn parse_observable(text: &str) -> Result<ObservableSpec> {
    match text {
        "identity" => Ok(ObservableSpec::Identity),
        "log-deriv" => Ok(ObservableSpec::LogDeriv),
        _ => {
            let coeffs = text
                .strip_prefix("poly:")
                .ok_or_else(|| Error::Argument(format!("unknown observable {text}")))?;
            let c = coeffs
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Argument(format!("bad coefficients in {text}")))?;
            Ok(ObservableSpec::Polynomial(c))
        }
    }
}

fn parse_window(text: &str) -> Result<Interval> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Error::Argument(format!("window {text} is not lo,hi"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse().map_err(|_| bad())?;
    let hi = parts[1].trim().parse().map_err(|_| bad())?;
    Interval::span(lo, hi)
}

fn load(common: &Common) -> Result<(RunConfig, SmoothMap, Observable)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.map {
        cfg.map = parse_map(m)?;
    }
    if let Some(o) = &common.observable {
        cfg.observable = parse_observable(o)?;
    }
    let map = SmoothMap::from_spec(&cfg.map)?;
    let phi = cfg.observable.build(&map);
    Ok((cfg, map, phi))
}

fn scgf_method(method: MethodArg, cfg: &RunConfig) -> Result<ScgfMethod> {
    match method {
        MethodArg::Grid => Ok(ScgfMethod::GridMc {
            n: cfg.scgf_n,
            samples: cfg.scgf_samples,
            jitter: cfg.seed,
        }),
        MethodArg::Ulam => Ok(ScgfMethod::UlamPressure { bins: cfg.bins }),
        MethodArg::Periodic => Err(Error::Argument(
            "the SCGF has grid and ulam estimators only".into(),
        )),
    }
}

/// `Ok(true)` on pass, `Ok(false)` on a tolerance or verification failure.
fn run(cli: Cli) -> Result<bool> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run {
            common,
            window,
            samples,
            n_list,
            bins,
            out: dir,
        } => {
            let (mut cfg, map, phi) = load(&common)?;
            if let Some(w) = window {
                cfg.window = parse_window(&w)?;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            if let Some(l) = n_list {
                cfg.n_list = l;
            }
            if let Some(b) = bins {
                cfg.bins = b;
            }
            cfg.validate()?;
            let report = ldp_report(&map, &phi, &cfg.window, &cfg)?;
            if let Some(dir) = dir {
                report.write_outputs(&dir)?;
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&report.summary())?)?;
            Ok(report.pass)
        }
        Command::Pressure {
            common,
            method,
            size,
            theta,
            geometric,
            zero,
        } => {
            let (cfg, map, phi) = load(&common)?;
            let base = if zero { Observable::Zero } else { phi.scaled(theta) };
            let psi = if geometric {
                Observable::Combination(vec![(1.0, base), (-1.0, Observable::log_abs_deriv(&map))])
            } else {
                base
            };
            let (m, k) = match method {
                MethodArg::Periodic => (PressureMethod::Periodic, size.unwrap_or(14)),
                MethodArg::Ulam => (PressureMethod::Ulam, size.unwrap_or(cfg.bins)),
                MethodArg::Grid => {
                    return Err(Error::Argument("pressure has periodic and ulam methods only".into()))
                }
            };
            writeln!(out, "{}", pressure(&map, &psi, m, k)?)?;
            Ok(true)
        }
        Command::Rate {
            common,
            method,
            out: dir,
        } => {
            let (cfg, map, phi) = load(&common)?;
            let thetas = theta_grid(cfg.theta_half_width, cfg.theta_count);
            let lambda = scgf_curve(&map, &phi, &thetas, &scgf_method(method, &cfg)?)?;
            let range = observable_range(&map, &phi, cfg.range_period)?;
            let table = legendre_rate(&thetas, &lambda)?.with_range(range.c_lo, range.d_hi);
            std::fs::create_dir_all(&dir)?;
            table.write_lambda_csv(File::create(dir.join("lambda.csv"))?)?;
            table.write_rate_csv(File::create(dir.join("rate.csv"))?)?;
            writeln!(
                out,
                "mean {} range [{}, {}] inf_J q {}",
                table.mean(),
                range.c_lo,
                range.d_hi,
                table.inf_over(&cfg.window)
            )?;
            Ok(true)
        }
        Command::Horseshoe {
            common,
            x0,
            n,
            alpha,
            rho,
            epsilon,
            out: cert_path,
            verify,
        } => {
            if let Some(p) = verify {
                let cert = HorseshoeCertificate::from_json(&std::fs::read_to_string(p)?)?;
                let (map, hs) = cert.load()?;
                let report = verify_horseshoe(&map, &hs);
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
                return Ok(report.passed());
            }
            let (cfg, map, _) = load(&common)?;
            let constraints = ConstraintSet {
                constraints: alpha
                    .map(|a| vec![Constraint::from_spec(&map, cfg.observable.clone(), a)])
                    .unwrap_or_default(),
                n,
            };
            let params = HorseshoeParams {
                rho,
                epsilon,
                ..HorseshoeParams::default()
            };
            let hs = build_horseshoe(&map, &constraints, x0, &params)?;
            let report = verify_horseshoe(&map, &hs);
            writeln!(
                out,
                "q {} branches {} total length {} delta {} bound {}",
                hs.q,
                hs.branches.len(),
                hs.total_length(),
                hs.distortion_bound,
                free_energy_lower_bound(&hs)?
            )?;
            if let Some(p) = cert_path {
                let cert = HorseshoeCertificate::new(&map, &hs, Some(report.clone()))?;
                std::fs::write(p, cert.to_json()?)?;
            }
            Ok(report.passed())
        }
        Command::Pullbacks { common, lo, hi, n } => {
            let (_, map, _) = load(&common)?;
            let u = Interval::new(lo, hi)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["lo", "hi", "diffeomorphic", "distortion"])?;
            for p in pullbacks(&map, &u, n)? {
                let d = if p.diffeomorphic {
                    distortion(&map, &p.interval, n, 17)?.to_string()
                } else {
                    String::new()
                };
                w.write_record([
                    p.interval.lo.to_string(),
                    p.interval.hi.to_string(),
                    p.diffeomorphic.to_string(),
                    d,
                ])?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Safe {
            common,
            alpha,
            n,
            j_max,
            eta,
        } => {
            let (_, map, _) = load(&common)?;
            let q = safety_balls(&map, alpha, n, j_max)?;
            writeln!(out, "E_n(alpha), {} balls, tail bound {}", q.balls.len(), q.tail_bound)?;
            for iv in q.closed_union() {
                writeln!(out, "  {iv}")?;
            }
            if let Some(eta) = eta {
                let pts = safe_dense_set(&map, alpha, n, eta, j_max)?;
                writeln!(out, "safe points: {pts:?}")?;
            }
            Ok(true)
        }
        Command::Density {
            common,
            bins,
            out: path,
        } => {
            let (cfg, map, _) = load(&common)?;
            let op = ulam_operator(&map, bins.unwrap_or(cfg.bins), &Observable::Zero)?;
            let d = invariant_density(&op)?;
            match path {
                Some(p) => d.write_csv(File::create(p)?)?,
                None => d.write_csv(out)?,
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
