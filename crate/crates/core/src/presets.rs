//! Built-in parameter sets for each published figure.
//!
//! At `scale = 1` the presets use the captioned chain lengths; smaller
//! scales shrink `L` and the grid densities proportionally for desk-scale runs.

use std::fmt;
use std::str::FromStr;

use crate::bath::BathSpec;
use crate::config::{RunConfig, SolverChoice};
use crate::error::{Error, Result};
use crate::model::ChainModel;
use crate::ramp::{DEFAULT_QUAD_TOL, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    F2a,
    F2b,
    F2c,
    S1a,
    S1b,
    S2a,
    S2b,
    S3,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F2c,
        FigureId::S1a,
        FigureId::S1b,
        FigureId::S2a,
        FigureId::S2b,
        FigureId::S3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::S1a => "s1a",
            FigureId::S1b => "s1b",
            FigureId::S2a => "s2a",
            FigureId::S2b => "s2b",
            FigureId::S3 => "s3",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown figure '{s}', expected one of 2a 2b 2c s1a s1b s2a s2b s3")))
    }
}

/// What a preset produces from its sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Output {
    /// `E(T)` along each ramp, with this many temperature samples.
    Trajectory { samples: usize },
    /// Final densities as sweep records.
    Records,
    /// Families of fixed `v/gamma` on rescaled axes.
    TiCollapse,
    /// Families of fixed `T_i` on rescaled axes.
    VCollapse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub id: FigureId,
    pub runs: Vec<RunConfig>,
    pub output: Output,
}

/// `v/gamma` values for the `T_i` sweeps; the caption does not list them.
pub const FIG2_V_OVER_GAMMA: [f64; 4] = [0.081, 0.81, 8.1, 81.0];
/// Chemical potentials away from the critical point `mu_c = -1`.
pub const NONCRITICAL_MU: [f64; 3] = [-0.8, -1.2, -1.5];
pub const LONG_RANGE_PHI: [f64; 3] = [1.5, 1.75, 1.9];
const GAMMA: f64 = 0.01;

fn scaled_sites(full: usize, scale: f64) -> usize {
    let l = (full as f64 * scale / 2.0).round() as usize * 2;
    l.max(100)
}

fn scaled_count(full: usize, scale: f64) -> usize {
    ((full as f64 * scale).round() as usize).clamp(5, full.max(5) * 4)
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = a;
    g[n - 1] = b;
    g
}

fn run(
    model: ChainModel,
    ti_grid: Vec<f64>,
    v_over_gamma_grid: Vec<f64>,
    solver: SolverChoice,
    workers: usize,
) -> RunConfig {
    RunConfig {
        model,
        bath: BathSpec::new(GAMMA, 1.0, 1.0).expect("valid bath"),
        ti_grid,
        v_over_gamma_grid,
        eta: 1.0,
        t_f: 0.0,
        solver,
        tol: DEFAULT_TOL,
        quad_tol: DEFAULT_QUAD_TOL,
        workers,
        out: None,
        seed: None,
    }
}

/// Builds the preset for `id`. `scale` must lie in `(0, 1]`.
pub fn preset(id: FigureId, scale: f64, workers: usize) -> Result<Preset> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::invalid(format!("scale must lie in (0, 1], got {scale}")));
    }
    if workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    let kitaev = |l: usize, mu: f64| ChainModel::short_range(1.0, 1.0, mu, scaled_sites(l, scale));
    let fig2_ti = logspace(1e-2, 1e2, scaled_count(41, scale));
    let rates = logspace(1e-4, 1e2, scaled_count(31, scale));
    let exact = SolverChoice::Exact;
    let (runs, output) = match id {
        FigureId::F2a => (
            vec![run(kitaev(1_000_000, -1.0)?, vec![15.0], FIG2_V_OVER_GAMMA.to_vec(), SolverChoice::Ode, workers)],
            Output::Trajectory { samples: scaled_count(301, scale) },
        ),
        FigureId::F2b => {
            (vec![run(kitaev(40_000, -1.0)?, fig2_ti, FIG2_V_OVER_GAMMA.to_vec(), exact, workers)], Output::Records)
        }
        FigureId::F2c => {
            (vec![run(kitaev(40_000, -1.0)?, fig2_ti, FIG2_V_OVER_GAMMA.to_vec(), exact, workers)], Output::TiCollapse)
        }
        FigureId::S1a => {
            (vec![run(kitaev(40_000, -1.0)?, vec![0.3, 1.0, 3.0, 10.0], rates, exact, workers)], Output::Records)
        }
        FigureId::S1b => {
            (vec![run(kitaev(40_000, -1.0)?, vec![0.3, 1.0, 3.0], rates, exact, workers)], Output::VCollapse)
        }
        FigureId::S2a => {
            let ti = logspace(1e-2, 1e1, scaled_count(31, scale));
            let runs = std::iter::once(-1.0)
                .chain(NONCRITICAL_MU)
                .map(|mu| Ok(run(kitaev(40_000, mu)?, ti.clone(), vec![8.1], exact, workers)))
                .collect::<Result<_>>()?;
            (runs, Output::Records)
        }
        FigureId::S2b => {
            let v = logspace(1e-3, 1e2, scaled_count(26, scale));
            let runs = std::iter::once(-1.0)
                .chain(NONCRITICAL_MU)
                .map(|mu| Ok(run(kitaev(40_000, mu)?, vec![0.9], v.clone(), exact, workers)))
                .collect::<Result<_>>()?;
            (runs, Output::Records)
        }
        FigureId::S3 => {
            let ti = logspace(1e-3, 1e2, scaled_count(31, scale));
            let runs = LONG_RANGE_PHI
                .iter()
                .map(|&phi| {
                    let model =
                        ChainModel::long_range(1.0, 1.0, 0.0, scaled_sites(4_000_000, scale), phi, f64::INFINITY)?
                            .at_critical_point();
                    Ok(run(model, ti.clone(), vec![0.1, 1.0, 10.0], exact, workers))
                })
                .collect::<Result<_>>()?;
            (runs, Output::TiCollapse)
        }
    };
    Ok(Preset { id, runs, output })
}
