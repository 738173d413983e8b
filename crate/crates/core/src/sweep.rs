//! Parallel evaluation of `(T_i, v/gamma)` grids.

use rayon::prelude::*;

use crate::config::{RunConfig, SolverChoice};
use crate::error::{Error, Result};
use crate::ramp::{final_excitation_density, Solver};
use crate::scaling::{SolverKind, SweepRecord};

/// A grid point that could not be evaluated.
#[derive(Debug)]
pub struct PointFailure {
    pub t_i: f64,
    pub v_over_gamma: f64,
    pub solver: SolverKind,
    pub error: Error,
}

#[derive(Debug)]
pub struct SweepOutcome {
    /// Successful points in grid order: `v/gamma` outer, `T_i` inner, exact before ode.
    pub records: Vec<SweepRecord>,
    pub failures: Vec<PointFailure>,
    /// Largest `|E_exact - E_ode|` when both solvers ran.
    pub max_solver_gap: Option<f64>,
}

fn solvers(cfg: &RunConfig) -> Vec<(SolverKind, Solver)> {
    let exact = (SolverKind::Exact, Solver::Exact { quad_tol: cfg.quad_tol });
    let ode = (SolverKind::Ode, Solver::Ode { tol: cfg.tol });
    match cfg.solver {
        SolverChoice::Exact => vec![exact],
        SolverChoice::Ode => vec![ode],
        SolverChoice::Both => vec![exact, ode],
    }
}

/// Evaluates one grid point.
pub fn run_point(cfg: &RunConfig, t_i: f64, v_over_gamma: f64, solver: Solver) -> Result<f64> {
    let protocol = cfg.protocol(t_i, v_over_gamma)?;
    final_excitation_density(&cfg.model, &cfg.bath, &protocol, solver)
}

/// Runs the whole grid on a pool of `cfg.workers` threads. The output order
/// and every value are independent of the worker count.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let kinds = solvers(cfg);
    let points: Vec<(f64, f64, SolverKind, Solver)> = cfg
        .v_over_gamma_grid
        .iter()
        .flat_map(|&vg| cfg.ti_grid.iter().map(move |&t_i| (t_i, vg)))
        .flat_map(|(t_i, vg)| kinds.iter().map(move |&(k, s)| (t_i, vg, k, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<f64>> =
        pool.install(|| points.par_iter().map(|&(t_i, vg, _, s)| run_point(cfg, t_i, vg, s)).collect());

    let (model_tag, bath_tag) = (cfg.model.tag(), cfg.bath.tag());
    let mut records = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for (&(t_i, v_over_gamma, solver, _), result) in points.iter().zip(results) {
        match result {
            Ok(e_final) => records.push(SweepRecord {
                t_i,
                v_over_gamma,
                e_final,
                solver,
                model_tag: model_tag.clone(),
                bath_tag: bath_tag.clone(),
            }),
            Err(error) => failures.push(PointFailure { t_i, v_over_gamma, solver, error }),
        }
    }
    let max_solver_gap = (cfg.solver == SolverChoice::Both).then(|| {
        records
            .windows(2)
            .filter(|w| {
                w[0].solver == SolverKind::Exact
                    && w[1].solver == SolverKind::Ode
                    && w[0].t_i == w[1].t_i
                    && w[0].v_over_gamma == w[1].v_over_gamma
            })
            .map(|w| (w[0].e_final - w[1].e_final).abs())
            .fold(0.0, f64::max)
    });
    Ok(SweepOutcome { records, failures, max_solver_gap })
}
