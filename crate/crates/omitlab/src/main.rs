//! `omitlab` command-line driver: every module operation behind a subcommand,
//! figure-dataset reproduction, and the analytic-vs-oracle comparison report.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use omitlab::config::{apply_overrides, drive_amplitudes, ProbeSetting, SystemConfig};
use omitlab::effective::lit_shift_report;
use omitlab::error::Error;
use omitlab::figures::{figure_ids, figure_spec, parse_spec_document};
use omitlab::omit::linear_response;
use omitlab::optical::{exceptional_point, numeric_tp_scan, turning_point};
use omitlab::oracle::{integrate, max_step, oracle_batch, oracle_batch_serial};
use omitlab::sideband::second_order_amplitude;
use omitlab::steady_state::solve_steady_state;
use omitlab::sweep::{
    emit, run_sweep, run_sweep_serial, AxisSpec, Format, Observable, SweepResult, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "omitlab",
    version,
    about = "Compound-resonator optomechanics simulator"
)]
struct Cli {
    /// Configuration document (TOML); defaults used when omitted.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Inline overrides, e.g. --set gamma_tip=19.29 (document units).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = CliFormat::Csv)]
    format: CliFormat,

    /// Evaluate sweeps sequentially even when built with the parallel pool.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the pumped steady state.
    SteadyState,
    /// Purely optical transmission spectrum over Delta_P.
    OpticalSpectrum {
        #[arg(long, default_value_t = -30e6, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 30e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 241)]
        points: usize,
    },
    /// Supermode eigenfrequencies over gamma_tip, plus EP diagnostics.
    Eigenmodes {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 51.44e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 161)]
        points: usize,
    },
    /// Numeric turning-point scan vs the closed form.
    LitScan {
        /// Common probe-cavity detuning Delta1 = Delta2 [s^-1].
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 51.44e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Probe transmission spectrum of the full system over Delta_P.
    OmitSpectrum {
        #[arg(long, default_value_t = -15e6, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 15e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
    },
    /// Group delay over Delta_P or gamma_tip.
    GroupDelay {
        /// Swept parameter.
        #[arg(long, default_value = "Delta_P")]
        axis: String,
        #[arg(long, default_value_t = -15e6, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 15e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 301)]
        points: usize,
        /// Fixed probe detuning when the axis is not Delta_P [s^-1].
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delta_p: f64,
    },
    /// Second-order sideband efficiency spectrum over Delta_P.
    Sideband2 {
        #[arg(long, default_value_t = -15e6, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 15e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
    },
    /// Frequency-shift diagnostics locating the loss-induced transparency.
    ShiftReport,
    /// Compare analytic T_P and eta against the time-domain oracle.
    OracleCheck {
        #[arg(long, default_value_t = -15e6, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = 15e6, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Dump one integrated trace (t, x, Re a1, Im a1, Re a2, Im a2) as CSV.
        #[arg(long)]
        dump_trace: Option<String>,
        /// Probe detuning for the trace dump [s^-1].
        #[arg(long, default_value_t = -3e6, allow_hyphen_values = true)]
        delta_p: f64,
    },
    /// Run a sweep described by a spec document.
    Sweep {
        #[arg(long)]
        spec: String,
    },
    /// Re-run a checked-in figure recipe.
    ReproduceFigure {
        /// Figure id (see --list).
        id: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let cfg = build_config(&cli)?;
    let format = match cli.format {
        CliFormat::Csv => Format::Csv,
        CliFormat::Json => Format::Json,
    };

    let execute = |spec: &SweepSpec| -> Result<SweepResult, Error> {
        if cli.serial {
            run_sweep_serial(spec)
        } else {
            run_sweep(spec)
        }
    };
    let probe_sweep =
        |observable: Observable, param: &str, start: f64, stop: f64, count: usize, delta_p: f64| {
            SweepSpec {
                observable,
                axis1: AxisSpec {
                    param: param.to_string(),
                    start,
                    stop,
                    count,
                },
                axis2: None,
                delta_p,
                config: cfg.clone(),
            }
        };

    let mut cell_errors = 0usize;
    let output = match &cli.command {
        Command::SteadyState => {
            let ss = solve_steady_state(&cfg)?;
            let (eps_l, eps_p) = drive_amplitudes(&cfg);
            record(
                format,
                &SteadyStateRecord {
                    x_s: ss.x_s,
                    beta: ss.beta,
                    a1_re: ss.a1_s.re,
                    a1_im: ss.a1_s.im,
                    a2_re: ss.a2_s.re,
                    a2_im: ss.a2_s.im,
                    photons_1: ss.a1_s.norm_sqr(),
                    photons_2: ss.a2_s.norm_sqr(),
                    residual: ss.residual,
                    bistable: ss.bistable,
                    eps_l,
                    eps_p,
                },
            )?
        }
        Command::OpticalSpectrum {
            start,
            stop,
            points,
        } => {
            let result = execute(&probe_sweep(
                Observable::OpticalT,
                "Delta_P",
                *start,
                *stop,
                *points,
                0.0,
            ))?;
            cell_errors = result.errors.len();
            emit(&result, format)?
        }
        Command::Eigenmodes {
            start,
            stop,
            points,
        } => {
            let result = execute(&probe_sweep(
                Observable::Eigenmodes,
                "gamma_tip",
                *start,
                *stop,
                *points,
                0.0,
            ))?;
            cell_errors = result.errors.len();
            let ep = exceptional_point(&cfg, cfg.omega_c, cfg.omega_c)?;
            eprintln!("closed-form exceptional point: gamma_tip = {ep:.6e} s^-1");
            emit(&result, format)?
        }
        Command::LitScan {
            delta,
            start,
            stop,
            points,
        } => {
            let closed = turning_point(&cfg, *delta, *delta);
            let scan = numeric_tp_scan(&cfg, *delta, *delta, (*start, *stop), *points);
            let (scan_gamma, scan_t, interior) = match scan {
                Ok(s) => (s.gamma_at_min, s.t_min, true),
                Err(Error::NoInteriorMinimum { .. }) => (f64::NAN, f64::NAN, false),
                Err(e) => return Err(e),
            };
            record(
                format,
                &LitScanRecord {
                    delta: *delta,
                    gamma_tp_closed_form: closed.gamma_tp,
                    gamma_tp_im: closed.gamma_complex.im,
                    physical: closed.physical,
                    approximate: closed.approximate,
                    interior_minimum: interior,
                    gamma_at_min: scan_gamma,
                    t_min: scan_t,
                },
            )?
        }
        Command::OmitSpectrum {
            start,
            stop,
            points,
        } => {
            let result = execute(&probe_sweep(
                Observable::TransmissionP,
                "Delta_P",
                *start,
                *stop,
                *points,
                0.0,
            ))?;
            cell_errors = result.errors.len();
            emit(&result, format)?
        }
        Command::GroupDelay {
            axis,
            start,
            stop,
            points,
            delta_p,
        } => {
            let result = execute(&probe_sweep(
                Observable::TauG,
                axis,
                *start,
                *stop,
                *points,
                *delta_p,
            ))?;
            cell_errors = result.errors.len();
            emit(&result, format)?
        }
        Command::Sideband2 {
            start,
            stop,
            points,
        } => {
            let result = execute(&probe_sweep(
                Observable::Eta,
                "Delta_P",
                *start,
                *stop,
                *points,
                0.0,
            ))?;
            cell_errors = result.errors.len();
            emit(&result, format)?
        }
        Command::ShiftReport => {
            let report = lit_shift_report(&cfg)?;
            record(format, &report)?
        }
        Command::OracleCheck {
            start,
            stop,
            points,
            dump_trace,
            delta_p,
        } => {
            if let Some(path) = dump_trace {
                dump_trace_csv(&cfg, *delta_p, path)?;
                eprintln!("trace written to {path}");
            }
            oracle_check(&cfg, *start, *stop, *points, format, cli.serial)?
        }
        Command::Sweep { spec } => {
            let text =
                fs::read_to_string(spec).map_err(|e| Error::InvalidSpec(format!("{spec}: {e}")))?;
            let result = execute(&parse_spec_document(&text, &cfg)?)?;
            cell_errors = result.errors.len();
            emit(&result, format)?
        }
        Command::ReproduceFigure { id, list } => {
            if *list || id.is_none() {
                figure_ids().join("\n") + "\n"
            } else {
                let result = execute(&figure_spec(id.as_deref().unwrap(), &cfg)?)?;
                cell_errors = result.errors.len();
                emit(&result, format)?
            }
        }
    };

    match &cli.out {
        Some(path) => {
            fs::write(path, output).map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(output.as_bytes());
        }
    }

    if cell_errors > 0 {
        eprintln!("{cell_errors} grid cell(s) recorded errors");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn build_config(cli: &Cli) -> Result<SystemConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            omitlab::load_config(&text)?
        }
        None => SystemConfig::default(),
    };
    if !cli.set.is_empty() {
        let doc = cli
            .set
            .iter()
            .map(|kv| match kv.split_once('=') {
                Some((k, v)) => Ok(format!("{k} = {v}\n")),
                None => Err(Error::Parse(format!("--set needs KEY=VALUE, got `{kv}`"))),
            })
            .collect::<Result<String, Error>>()?;
        let table: toml::Table = doc
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg = apply_overrides(cfg, &table)?;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct SteadyStateRecord {
    x_s: f64,
    beta: f64,
    a1_re: f64,
    a1_im: f64,
    a2_re: f64,
    a2_im: f64,
    photons_1: f64,
    photons_2: f64,
    residual: f64,
    bistable: bool,
    eps_l: f64,
    eps_p: f64,
}

#[derive(Serialize)]
struct LitScanRecord {
    delta: f64,
    gamma_tp_closed_form: f64,
    gamma_tp_im: f64,
    physical: bool,
    approximate: bool,
    interior_minimum: bool,
    gamma_at_min: f64,
    t_min: f64,
}

/// Render a flat record as JSON or key,value CSV lines.
fn record<T: Serialize>(format: Format, value: &T) -> Result<String, Error> {
    let json = serde_json::to_value(value).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    match format {
        Format::Json => serde_json::to_string_pretty(&json)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidSpec(e.to_string())),
        Format::Csv => {
            let mut out = String::from("key,value\n");
            if let serde_json::Value::Object(map) = json {
                for (k, v) in map {
                    out.push_str(&format!("{k},{v}\n"));
                }
            }
            Ok(out)
        }
    }
}

fn oracle_check(
    cfg: &SystemConfig,
    start: f64,
    stop: f64,
    points: usize,
    format: Format,
    serial: bool,
) -> Result<String, Error> {
    if points < 1 {
        return Err(Error::InvalidSpec("oracle-check needs points >= 1".into()));
    }
    let ss = solve_steady_state(cfg)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                start
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let oracle_points = if serial {
        oracle_batch_serial(cfg, &grid)
    } else {
        oracle_batch(cfg, &grid)
    };

    let mut rows = Vec::with_capacity(points);
    let mut max_tp_rel = 0.0_f64;
    let mut max_eta_rel = 0.0_f64;
    for (&delta_p, oracle) in grid.iter().zip(oracle_points) {
        let oracle = oracle?;
        let epsilon = ProbeSetting::from_delta_p(delta_p, cfg.delta_l).epsilon;
        let lr = linear_response(cfg, &ss, epsilon)?;
        let so = second_order_amplitude(cfg, &ss, &lr, epsilon)?;
        let tp_rel = (lr.t_p - oracle.t_p).norm() / oracle.t_p.norm().max(1e-300);
        let eta_rel = (so.eta - oracle.eta).abs() / oracle.eta.max(1e-300);
        max_tp_rel = max_tp_rel.max(tp_rel);
        max_eta_rel = max_eta_rel.max(eta_rel);
        rows.push(OracleRow {
            delta_p,
            t_p_analytic: lr.transmission,
            t_p_oracle: oracle.transmission,
            t_p_amplitude_rel_err: tp_rel,
            eta_analytic: so.eta,
            eta_oracle: oracle.eta,
            eta_rel_err: eta_rel,
        });
    }
    let report = OracleReport {
        max_t_p_amplitude_rel_err: max_tp_rel,
        max_eta_rel_err: max_eta_rel,
        rows,
    };
    match format {
        Format::Json => serde_json::to_string_pretty(&report)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidSpec(e.to_string())),
        Format::Csv => {
            let mut out = String::from(
                "delta_p,t_p_analytic,t_p_oracle,t_p_amplitude_rel_err,eta_analytic,eta_oracle,eta_rel_err\n",
            );
            for r in &report.rows {
                out.push_str(&format!(
                    "{:.12e},{:.12e},{:.12e},{:.3e},{:.12e},{:.12e},{:.3e}\n",
                    r.delta_p,
                    r.t_p_analytic,
                    r.t_p_oracle,
                    r.t_p_amplitude_rel_err,
                    r.eta_analytic,
                    r.eta_oracle,
                    r.eta_rel_err
                ));
            }
            out.push_str(&format!(
                "# max |t_P - t_P_oracle|/|t_P| = {:.3e}, max eta rel err = {:.3e}\n",
                report.max_t_p_amplitude_rel_err, report.max_eta_rel_err
            ));
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct OracleRow {
    delta_p: f64,
    t_p_analytic: f64,
    t_p_oracle: f64,
    t_p_amplitude_rel_err: f64,
    eta_analytic: f64,
    eta_oracle: f64,
    eta_rel_err: f64,
}

#[derive(Serialize)]
struct OracleReport {
    max_t_p_amplitude_rel_err: f64,
    max_eta_rel_err: f64,
    rows: Vec<OracleRow>,
}

fn dump_trace_csv(cfg: &SystemConfig, delta_p: f64, path: &str) -> Result<(), Error> {
    let epsilon = ProbeSetting::from_delta_p(delta_p, cfg.delta_l).epsilon;
    let trace = integrate(cfg, epsilon, 50.0 / cfg.gamma_m, max_step(cfg, epsilon))?;
    let mut out = String::from("t,x,re_a1,im_a1,re_a2,im_a2\n");
    for i in 0..trace.t.len() {
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            trace.t[i], trace.x[i], trace.a1[i].re, trace.a1[i].im, trace.a2[i].re, trace.a2[i].im
        ));
    }
    fs::write(path, out).map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?;
    Ok(())
}
