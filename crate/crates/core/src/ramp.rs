//! Temperature ramps and the time evolution of mode occupations.
//!
//! Each Bogoliubov mode obeys
//! `dP_k/dt = -tau^{-1}(lambda_k, T(t)) [P_k - P^th(lambda_k / T(t))]`,
//! starting thermal at `T_i`. Two solvers are provided: an adaptive stiff
//! integrator that handles any protocol, and the integrating-factor solution
//! for linear ramps, which serves as the precision reference.

use rayon::prelude::*;

use crate::bath::{coth_half, BathSpec};
use crate::error::{Error, Result};
use crate::kernel;
use crate::model::{occupation, ChainModel};
use crate::ode;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// `T(t) = T_i (1 - v t / T_i)^eta`, stopped when `T_f` is reached.
#[derive(Clone, Debug, PartialEq)]
pub struct RampProtocol {
    t_i: f64,
    t_f: f64,
    v: f64,
    eta: f64,
}

impl RampProtocol {
    pub fn new(t_i: f64, t_f: f64, v: f64, eta: f64) -> Result<Self> {
        if !(t_i > 0.0) || !t_i.is_finite() {
            return Err(Error::invalid(format!("T_i must be positive and finite, got {t_i}")));
        }
        if !(t_f >= 0.0) || !(t_f < t_i) {
            return Err(Error::invalid(format!("need 0 <= T_f < T_i, got T_f = {t_f}, T_i = {t_i}")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("ramp velocity v must be positive, got {v}")));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!("ramp exponent eta must be positive, got {eta}")));
        }
        Ok(RampProtocol { t_i, t_f, v, eta })
    }

    /// `T(t) = T_i - v t` down to zero.
    pub fn linear(t_i: f64, v: f64) -> Result<Self> {
        Self::new(t_i, 0.0, v, 1.0)
    }

    pub fn initial_temperature(&self) -> f64 {
        self.t_i
    }

    pub fn final_temperature(&self) -> f64 {
        self.t_f
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn exponent(&self) -> f64 {
        self.eta
    }

    pub fn is_linear(&self) -> bool {
        self.eta == 1.0
    }

    /// Ramp duration `t_f = (T_i / v) (1 - (T_f / T_i)^{1/eta})`.
    pub fn duration(&self) -> f64 {
        if self.t_f == 0.0 {
            return self.t_i / self.v;
        }
        (self.t_i / self.v) * (1.0 - (self.t_f / self.t_i).powf(1.0 / self.eta))
    }

    pub fn temperature(&self, t: f64) -> Result<f64> {
        let end = self.duration();
        if !(t >= 0.0) || t > end * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain(format!("time {t} outside the ramp [0, {end}]")));
        }
        Ok(self.temperature_clamped(t))
    }

    fn temperature_clamped(&self, t: f64) -> f64 {
        let base = if self.eta == 1.0 {
            self.t_i - self.v * t
        } else {
            let frac = (1.0 - self.v * t / self.t_i).max(0.0);
            self.t_i * frac.powf(self.eta)
        };
        base.max(self.t_f)
    }

    /// Inverse of [`RampProtocol::temperature`].
    pub fn time_at(&self, temperature: f64) -> f64 {
        if temperature >= self.t_i {
            return 0.0;
        }
        if temperature <= self.t_f {
            return self.duration();
        }
        if self.eta == 1.0 {
            (self.t_i - temperature) / self.v
        } else {
            (self.t_i / self.v) * (1.0 - (temperature / self.t_i).powf(1.0 / self.eta))
        }
    }

    /// `n >= 2` equally spaced temperatures from `T_i` down to `T_f`.
    pub fn temperature_samples(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
        }
        let span = self.t_i - self.t_f;
        let mut temps: Vec<f64> = (0..n).map(|i| self.t_i - span * i as f64 / (n - 1) as f64).collect();
        temps[n - 1] = self.t_f;
        Ok(temps)
    }
}

/// Snapshot of all mode occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOccupations {
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub p: Vec<f64>,
    pub temperature: f64,
}

impl ModeOccupations {
    /// `E = (1/L) sum_k P_k`.
    pub fn excitation_density(&self) -> f64 {
        excitation_density(&self.p)
    }
}

/// Mean occupation, summed in index order.
pub fn excitation_density(p: &[f64]) -> f64 {
    if p.is_empty() {
        return 0.0;
    }
    p.iter().sum::<f64>() / p.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solver {
    /// Adaptive SDIRK with absolute local error `tol` on `P_k`.
    Ode { tol: f64 },
    /// Integrating-factor quadrature with relative accuracy `quad_tol` (linear ramps only).
    Exact { quad_tol: f64 },
}

impl Solver {
    pub fn ode() -> Self {
        Solver::Ode { tol: DEFAULT_TOL }
    }

    pub fn exact() -> Self {
        Solver::Exact { quad_tol: DEFAULT_QUAD_TOL }
    }

    fn validate(&self, protocol: &RampProtocol) -> Result<()> {
        match *self {
            Solver::Ode { tol } if !(tol > 0.0) => {
                Err(Error::invalid(format!("tolerance must be positive, got {tol}")))
            }
            Solver::Exact { quad_tol } if !(quad_tol > 0.0) => {
                Err(Error::invalid(format!("quadrature tolerance must be positive, got {quad_tol}")))
            }
            Solver::Exact { .. } if !protocol.is_linear() => {
                Err(Error::invalid("the exact solver needs a linear ramp (eta = 1); use the ODE solver".to_string()))
            }
            _ => Ok(()),
        }
    }
}

/// Occupations of one mode at the given temperatures (decreasing from `T_i`).
pub fn mode_trajectory(
    lambda: f64,
    bath: &BathSpec,
    protocol: &RampProtocol,
    temperatures: &[f64],
    solver: Solver,
) -> Result<Vec<f64>> {
    solver.validate(protocol)?;
    if lambda == 0.0 {
        // Thermal value 1/2 at every T > 0, so the mode never moves.
        return Ok(vec![0.5; temperatures.len()]);
    }
    let t_i = protocol.initial_temperature();
    match solver {
        Solver::Exact { quad_tol } => {
            let kappa = 2.0 * bath.gamma() * bath.spectral_density(lambda)? * lambda / protocol.velocity();
            let y = t_i / lambda;
            temperatures.iter().map(|&t| kernel::relaxed_occupation((t / lambda).min(y), y, kappa, quad_tol)).collect()
        }
        Solver::Ode { tol } => {
            let bare = bath.bare_rate(lambda);
            let coeffs = |t: f64| {
                let temp = protocol.temperature_clamped(t);
                (bare * coth_half(lambda, temp), occupation(lambda, temp))
            };
            let end = protocol.duration();
            let mut times: Vec<f64> = temperatures.iter().map(|&t| protocol.time_at(t)).collect();
            if let Some(last) = times.last_mut() {
                if temperatures.last() == Some(&protocol.final_temperature()) {
                    *last = end;
                }
            }
            ode::integrate_relaxation(coeffs, occupation(lambda, t_i), end, &times, tol)
                .map(|(p, _)| p)
                .map_err(|f| Error::StepUnderflow { t: f.t, lambda, step: f.step })
        }
    }
}

/// Sampled trajectory of a single mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTrajectory {
    pub lambda: f64,
    pub temperatures: Vec<f64>,
    pub p: Vec<f64>,
}

/// Integrates the rate equation for the mode at momentum `k` with the
/// adaptive solver, sampled at `samples` equally spaced temperatures.
pub fn evolve_mode_ode(
    model: &ChainModel,
    bath: &BathSpec,
    protocol: &RampProtocol,
    k: f64,
    tol: f64,
    samples: usize,
) -> Result<ModeTrajectory> {
    let lambda = model.mode_energy(k)?;
    let temperatures = protocol.temperature_samples(samples)?;
    let p = mode_trajectory(lambda, bath, protocol, &temperatures, Solver::Ode { tol })?;
    Ok(ModeTrajectory { lambda, temperatures, p })
}

/// Final occupation of the mode at momentum `k` from the integrating-factor solution.
pub fn evolve_mode_exact(
    model: &ChainModel,
    bath: &BathSpec,
    protocol: &RampProtocol,
    k: f64,
    quad_tol: f64,
) -> Result<f64> {
    let lambda = model.mode_energy(k)?;
    let p = mode_trajectory(lambda, bath, protocol, &[protocol.final_temperature()], Solver::Exact { quad_tol })?;
    Ok(p[0])
}

/// Excitation density along a ramp plus the final mode occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub temperatures: Vec<f64>,
    pub densities: Vec<f64>,
    pub final_state: ModeOccupations,
}

impl Evolution {
    pub fn final_density(&self) -> f64 {
        *self.densities.last().expect("at least two samples")
    }
}

/// Evolves every mode of the chain and records `E(T)` at `samples` equally
/// spaced temperatures. Modes run in parallel on the current rayon pool;
/// the result does not depend on scheduling.
pub fn evolve_all(
    model: &ChainModel,
    bath: &BathSpec,
    protocol: &RampProtocol,
    solver: Solver,
    samples: usize,
) -> Result<Evolution> {
    let temperatures = protocol.temperature_samples(samples)?;
    evolve_at(model, bath, protocol, solver, &temperatures)
}

/// As [`evolve_all`], sampled at the given temperatures, which must
/// decrease from `T_i` (inclusive) towards `T_f`.
pub fn evolve_at(
    model: &ChainModel,
    bath: &BathSpec,
    protocol: &RampProtocol,
    solver: Solver,
    temperatures: &[f64],
) -> Result<Evolution> {
    solver.validate(protocol)?;
    let (t_i, t_f) = (protocol.initial_temperature(), protocol.final_temperature());
    if temperatures.is_empty()
        || temperatures.windows(2).any(|w| !(w[1] < w[0]))
        || temperatures.iter().any(|&t| !(t <= t_i && t >= t_f))
    {
        return Err(Error::invalid(format!("sample temperatures must decrease within [{t_f}, {t_i}]")));
    }
    let samples = temperatures.len();
    let energies = model.mode_energies();
    let unique = model.unique_modes();
    let trajectories: Vec<Result<Vec<f64>>> = unique
        .par_iter()
        .map(|&n| {
            mode_trajectory(energies[n], bath, protocol, temperatures, solver)
                .map_err(|e| Error::Mode { index: n, source: Box::new(e) })
        })
        .collect();
    let trajectories: Vec<Vec<f64>> = trajectories.into_iter().collect::<Result<_>>()?;

    let l = model.sites();
    let half = l / 2;
    let slot = |n: usize| -> usize {
        let m = if n > 0 && n < half { l - n } else { n };
        if m == 0 {
            0
        } else {
            m - half + 1
        }
    };
    let densities = (0..samples).map(|j| (0..l).map(|n| trajectories[slot(n)][j]).sum::<f64>() / l as f64).collect();
    let p = (0..l).map(|n| trajectories[slot(n)][samples - 1]).collect();
    Ok(Evolution {
        temperatures: temperatures.to_vec(),
        densities,
        final_state: ModeOccupations { grid: model.mode_grid(), energies, p, temperature: temperatures[samples - 1] },
    })
}

/// Excitation density at the end of the ramp.
pub fn final_excitation_density(
    model: &ChainModel,
    bath: &BathSpec,
    protocol: &RampProtocol,
    solver: Solver,
) -> Result<f64> {
    Ok(evolve_all(model, bath, protocol, solver, 2)?.final_density())
}
