//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 when a
//! numerical method fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic;
use crate::config::{self, RunConfig, SolverChoice};
use crate::csv_io;
use crate::error::{Error, Result};
use crate::model::LowEnergyParams;
use crate::presets::{self, FigureId, Output};
use crate::ramp::{self, Solver};
use crate::scaling::{self, CollapseDataset, Regime, SolverKind, SweepRecord};
use crate::sweep;

#[derive(Parser, Debug)]
#[command(name = "kitaev-cooling", version, about = "Cooling ramps of Kitaev wires in thermal baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one ramp and write E(T) along it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Number of equally spaced temperature samples.
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Run the configured (T_i, v/gamma) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rescale sweep records onto collapse axes and report the collapse quality.
    Collapse {
        /// Sweep CSV.
        #[arg(long)]
        input: PathBuf,
        /// Config supplying z and s.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = CollapseKind::Ti)]
        kind: CollapseKind,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Records of this solver only (default: exact when present).
        #[arg(long)]
        solver: Option<String>,
    },
    /// Fit the low and high asymptotes of a T_i sweep, or the power-ramp exponent.
    Asymptotes {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Fit window `lo,hi` on the rescaled axis for the low regime.
        #[arg(long, value_parser = parse_window)]
        low_window: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_window)]
        high_window: Option<(f64, f64)>,
        #[arg(long)]
        solver: Option<String>,
    },
    /// Print the asymptotic constants for the configured model and bath.
    Constants {
        /// Defaults to the parameters of figure 2.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the built-in preset for a figure.
    Figure {
        /// One of 2a 2b 2c s1a s1b s2a s2b s3.
        id: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    solver: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CollapseKind {
    /// Families of fixed v/gamma against the rescaled initial temperature.
    Ti,
    /// Families of fixed T_i against the rescaled ramp rate.
    V,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad bound '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad bound '{b}'"))?;
    if !(lo < hi) {
        return Err("need lo < hi".into());
    }
    Ok((lo, hi))
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() || matches!(e, Error::Analysis(_)) {
        2
    } else {
        1
    }
}

/// Runs the program with `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => 1,
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(path: &Path, common: Option<&Common>) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(c) = common {
        if let Some(w) = c.workers {
            cfg.workers = w;
        }
        if let Some(out) = &c.out {
            cfg.out = Some(out.clone());
        }
        if let Some(s) = &c.solver {
            cfg.solver = s.parse()?;
        }
        cfg.validate()?;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(fs::File::create(path)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate { config, common, samples } => {
            let cfg = load_config(&config, Some(&common))?;
            simulate(&cfg, samples, stdout)
        }
        Command::Sweep { config, common } => {
            let cfg = load_config(&config, Some(&common))?;
            let outcome = sweep::run_sweep(&cfg)?;
            emit(cfg.out.as_deref(), stdout, |w| csv_io::write_records(&outcome.records, w))?;
            if let Some(gap) = outcome.max_solver_gap {
                writeln!(stderr, "max |E_exact - E_ode| = {gap:.3e}")?;
            }
            report_failures(&outcome.failures, stderr)
        }
        Command::Collapse { input, config, kind, out, solver } => {
            let cfg = load_config(&config, None)?;
            let records = select_solver(csv_io::read_csv(&input)?, solver.as_deref())?;
            let (z, s) = exponents(&cfg)?;
            let ds = match kind {
                CollapseKind::Ti => scaling::rescale_ti_collapse(&records, z, s)?,
                CollapseKind::V => scaling::rescale_v_collapse(&records, z, s)?,
            };
            let quality = scaling::collapse_quality(&ds)?;
            emit(out.as_deref(), stdout, |w| write_collapse(&[(cfg.model.tag(), ds)], w))?;
            let line = format!("collapse_quality = {quality:.6e}");
            if out.is_some() {
                writeln!(stdout, "{line}")?;
            } else {
                writeln!(stderr, "{line}")?;
            }
            Ok(0)
        }
        Command::Asymptotes { input, config, low_window, high_window, solver } => {
            let cfg = load_config(&config, None)?;
            let records = select_solver(csv_io::read_csv(&input)?, solver.as_deref())?;
            asymptotes(&cfg, &records, low_window, high_window, stdout)
        }
        Command::Constants { config } => {
            let cfg = match config {
                Some(path) => load_config(&path, None)?,
                None => presets::preset(FigureId::F2b, 1.0, 1)?.runs.remove(0),
            };
            constants(&cfg, stdout)
        }
        Command::Figure { id, scale, workers, out } => {
            let id: FigureId = id.parse()?;
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let preset = presets::preset(id, scale, workers)?;
            figure(&preset, out.as_deref(), stdout, stderr)
        }
    }
}

fn report_failures(failures: &[sweep::PointFailure], stderr: &mut dyn Write) -> Result<i32> {
    for f in failures {
        writeln!(stderr, "failed: T_i = {}, v/gamma = {}, solver = {}: {}", f.t_i, f.v_over_gamma, f.solver, f.error)?;
    }
    Ok(if failures.is_empty() {
        0
    } else if failures.iter().all(|f| f.error.is_numerical()) {
        2
    } else {
        1
    })
}

fn exponents(cfg: &RunConfig) -> Result<(f64, f64)> {
    match cfg.model.low_energy_params()? {
        LowEnergyParams::Critical { z, .. } => Ok((z, cfg.bath.s())),
        LowEnergyParams::Gapped { .. } => Err(Error::invalid("scaling collapse needs a critical model")),
    }
}

fn select_solver(records: Vec<SweepRecord>, solver: Option<&str>) -> Result<Vec<SweepRecord>> {
    let wanted = match solver {
        Some(s) => s.parse()?,
        None if records.iter().any(|r| r.solver == SolverKind::Exact) => SolverKind::Exact,
        None => SolverKind::Ode,
    };
    Ok(records.into_iter().filter(|r| r.solver == wanted).collect())
}

fn single_solver(cfg: &RunConfig) -> Result<Solver> {
    match cfg.solver {
        SolverChoice::Ode => Ok(Solver::Ode { tol: cfg.tol }),
        SolverChoice::Exact => Ok(Solver::Exact { quad_tol: cfg.quad_tol }),
        SolverChoice::Both => Err(Error::invalid("simulate runs a single solver; choose ode or exact")),
    }
}

fn simulate(cfg: &RunConfig, samples: usize, stdout: &mut dyn Write) -> Result<i32> {
    if cfg.ti_grid.len() != 1 || cfg.v_over_gamma_grid.len() != 1 {
        return Err(Error::invalid("simulate needs a single T_i and a single v/gamma"));
    }
    let protocol = cfg.protocol(cfg.ti_grid[0], cfg.v_over_gamma_grid[0])?;
    let solver = single_solver(cfg)?;
    let evo =
        rayon_pool(cfg.workers)?.install(|| ramp::evolve_all(&cfg.model, &cfg.bath, &protocol, solver, samples))?;
    let thermal: Vec<f64> = evo.temperatures.iter().map(|&t| cfg.model.thermal_excitation_density(t)).collect();
    emit(cfg.out.as_deref(), stdout, |w| {
        csv_io::write_columns(&["T", "E", "E_th"], &[evo.temperatures.clone(), evo.densities.clone(), thermal], w)
    })?;
    Ok(0)
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

fn write_collapse(sets: &[(String, CollapseDataset)], sink: &mut dyn Write) -> Result<()> {
    writeln!(sink, "model_tag,family,X,Y")?;
    for (tag, ds) in sets {
        for f in &ds.families {
            for (x, y) in f.x.iter().zip(&f.y) {
                writeln!(
                    sink,
                    "{tag},{},{},{}",
                    csv_io::format_float(f.key),
                    csv_io::format_float(*x),
                    csv_io::format_float(*y)
                )?;
            }
        }
    }
    Ok(())
}

fn asymptotes(
    cfg: &RunConfig,
    records: &[SweepRecord],
    low_window: Option<(f64, f64)>,
    high_window: Option<(f64, f64)>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let (z, s) = exponents(cfg)?;
    if cfg.eta != 1.0 {
        let predicted = scaling::predicted_power_ramp_exponent(z, s, cfg.eta);
        writeln!(stdout, "regime,T_i,exponent,stderr,predicted")?;
        let mut ti: Vec<f64> = records.iter().map(|r| r.t_i).collect();
        ti.dedup();
        for t in ti {
            let family: Vec<SweepRecord> = records.iter().filter(|r| r.t_i == t).cloned().collect();
            let fit = scaling::power_ramp_exponent(&family)?;
            writeln!(stdout, "power,{t},{:.6},{:.2e},{predicted:.6}", fit.exponent, fit.stderr)?;
        }
        return Ok(0);
    }
    let cross = analytic::crossover(&cfg.bath, &cfg.model, 1.0)?;
    let ds = scaling::rescale_ti_collapse(records, z, s)?;
    writeln!(stdout, "regime,exponent,stderr,prefactor,points,predicted_exponent,predicted_prefactor")?;
    for (regime, window, name, exponent, prefactor) in
        [(Regime::Low, low_window, "low", 1.0 / z, cross.c2), (Regime::High, high_window, "high", 0.0, cross.c1)]
    {
        let window = window.unwrap_or_else(|| scaling::default_window(regime, cross.rescaled));
        let fit = scaling::fit_asymptote(&ds, regime, window)?;
        writeln!(
            stdout,
            "{name},{:.6},{:.2e},{:.6e},{},{exponent:.6},{prefactor:.6e}",
            fit.exponent, fit.stderr, fit.prefactor, fit.points
        )?;
    }
    Ok(0)
}

fn constants(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    match cfg.model.low_energy_params()? {
        LowEnergyParams::Critical { c, z } => {
            let cross = analytic::crossover(&cfg.bath, &cfg.model, 1.0)?;
            writeln!(stdout, "z = {z}")?;
            writeln!(stdout, "c = {c}")?;
            writeln!(stdout, "c1 = {:.10}", cross.c1)?;
            writeln!(stdout, "abs_delta_c1 = {:.10}", cross.c1 * cfg.model.delta().abs())?;
            writeln!(stdout, "c2 = {:.10}", cross.c2)?;
            writeln!(stdout, "c1_over_c2 = {:.10}", cross.ratio)?;
            writeln!(stdout, "crossover_coefficient = {:.10}", cross.t_i)?;
        }
        LowEnergyParams::Gapped { lambda0, lambda1 } => {
            config::require_positive_curvature(&cfg.model)?;
            writeln!(stdout, "lambda0 = {lambda0}")?;
            writeln!(stdout, "lambda1 = {lambda1}")?;
        }
    }
    Ok(0)
}

fn figure(preset: &presets::Preset, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match preset.output {
        Output::Trajectory { samples } => {
            let cfg = &preset.runs[0];
            let pool = rayon_pool(cfg.workers)?;
            let mut columns = vec![Vec::new(), Vec::new(), Vec::new(), Vec::new()];
            for &vg in &cfg.v_over_gamma_grid {
                let protocol = cfg.protocol(cfg.ti_grid[0], vg)?;
                let evo = pool.install(|| {
                    ramp::evolve_all(&cfg.model, &cfg.bath, &protocol, Solver::Ode { tol: cfg.tol }, samples)
                })?;
                for (t, e) in evo.temperatures.iter().zip(&evo.densities) {
                    columns[0].push(vg);
                    columns[1].push(*t);
                    columns[2].push(*e);
                    columns[3].push(cfg.model.thermal_excitation_density(*t));
                }
            }
            emit(out, stdout, |w| csv_io::write_columns(&["v_over_gamma", "T", "E", "E_th"], &columns, w))?;
            Ok(0)
        }
        Output::Records | Output::TiCollapse | Output::VCollapse => {
            let mut records = Vec::new();
            let mut failures = Vec::new();
            let mut sets = Vec::new();
            for cfg in &preset.runs {
                let outcome = sweep::run_sweep(cfg)?;
                failures.extend(outcome.failures);
                if preset.output != Output::Records {
                    let (z, s) = exponents(cfg)?;
                    let ds = if preset.output == Output::TiCollapse {
                        scaling::rescale_ti_collapse(&outcome.records, z, s)?
                    } else {
                        scaling::rescale_v_collapse(&outcome.records, z, s)?
                    };
                    let quality = scaling::collapse_quality(&ds)?;
                    let line = format!("collapse_quality[{}] = {quality:.6e}", cfg.model.tag());
                    if out.is_some() {
                        writeln!(stdout, "{line}")?;
                    } else {
                        writeln!(stderr, "{line}")?;
                    }
                    sets.push((cfg.model.tag(), ds));
                }
                records.extend(outcome.records);
            }
            if preset.output == Output::Records {
                emit(out, stdout, |w| csv_io::write_records(&records, w))?;
            } else {
                emit(out, stdout, |w| write_collapse(&sets, w))?;
            }
            report_failures(&failures, stderr)
        }
    }
}
