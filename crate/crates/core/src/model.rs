//! Kitaev chains and their Bogoliubov mode energies.
//!
//! Only the quasiparticle spectrum `lambda_k` enters the cooling dynamics,
//! so a chain is described by its couplings and the mode energies are
//! computed from the 2x2 Bogoliubov-de Gennes block
//! `lambda_k = sqrt(xi_k^2 + D_k^2)` with
//! `xi_k = 2J sum_l d_l^{-phi} cos(kl) + 2 mu` and
//! `D_k = Delta sum_l d_l^{-alpha} sin(kl)`.
//! The nearest-neighbour chain is the `phi, alpha -> inf` limit, for which
//! `xi_k = 2J cos k + 2 mu` and `D_k = Delta sin k`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::special::zeta;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Range {
    ShortRange,
    /// Power-law hopping `d_l^{-phi}` and pairing `d_l^{-alpha}`.
    LongRange {
        phi: f64,
        alpha: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainModel {
    j: f64,
    delta: f64,
    mu: f64,
    l: usize,
    range: Range,
}

/// Low-energy form of the spectrum: `c |k|^z` at a critical point,
/// `lambda0 + lambda1 k^2` away from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LowEnergyParams {
    Critical { c: f64, z: f64 },
    Gapped { lambda0: f64, lambda1: f64 },
}

impl LowEnergyParams {
    pub fn gap(&self) -> f64 {
        match *self {
            LowEnergyParams::Critical { .. } => 0.0,
            LowEnergyParams::Gapped { lambda0, .. } => lambda0,
        }
    }
}

impl ChainModel {
    pub fn new(j: f64, delta: f64, mu: f64, l: usize, range: Range) -> Result<Self> {
        for (name, value) in [("J", j), ("Delta", delta), ("mu", mu)] {
            if !value.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {value}")));
            }
        }
        if l < 2 || !l.is_multiple_of(2) {
            return Err(Error::invalid(format!("L must be even and >= 2, got {l}")));
        }
        if let Range::LongRange { phi, alpha } = range {
            if !(phi > 1.0) || !(alpha > 1.0) {
                return Err(Error::invalid(format!(
                    "long-range exponents must exceed 1, got phi = {phi}, alpha = {alpha}"
                )));
            }
        }
        Ok(ChainModel { j, delta, mu, l, range })
    }

    pub fn short_range(j: f64, delta: f64, mu: f64, l: usize) -> Result<Self> {
        Self::new(j, delta, mu, l, Range::ShortRange)
    }

    pub fn long_range(j: f64, delta: f64, mu: f64, l: usize, phi: f64, alpha: f64) -> Result<Self> {
        Self::new(j, delta, mu, l, Range::LongRange { phi, alpha })
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn range(&self) -> Range {
        self.range
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.j, self.delta, mu, self.l, self.range)
    }

    pub fn with_sites(&self, l: usize) -> Result<Self> {
        Self::new(self.j, self.delta, self.mu, l, self.range)
    }

    /// Same couplings with `mu` moved to the critical value.
    pub fn at_critical_point(&self) -> Self {
        ChainModel { mu: self.critical_mu(), ..self.clone() }
    }

    /// Momenta `k_n = 2 pi n / L - pi`, `n = 0..L`.
    pub fn mode_grid(&self) -> Vec<f64> {
        let l = self.l as f64;
        (0..self.l).map(|n| 2.0 * PI * n as f64 / l - PI).collect()
    }

    /// `mu_c = -J` for the nearest-neighbour chain, `-J zeta(phi)` with long-range hopping.
    pub fn critical_mu(&self) -> f64 {
        match self.range {
            Range::ShortRange => -self.j,
            Range::LongRange { phi, .. } => -self.j * zeta(phi),
        }
    }

    pub fn is_critical(&self) -> bool {
        let mu_c = self.critical_mu();
        let scale = mu_c.abs().max(1.0);
        let near = |target: f64| (self.mu - target).abs() <= 1e-12 * scale;
        match self.range {
            Range::ShortRange => near(mu_c) || near(-mu_c),
            Range::LongRange { .. } => near(mu_c),
        }
    }

    fn hopping_weights(&self) -> Vec<f64> {
        match self.range {
            Range::ShortRange => vec![1.0],
            Range::LongRange { phi, .. } => distance_weights(self.l, phi, phi),
        }
    }

    fn pairing_weights(&self) -> Vec<f64> {
        match self.range {
            Range::ShortRange => vec![1.0],
            Range::LongRange { phi, alpha } => distance_weights(self.l, phi, alpha),
        }
    }

    /// Energy of the mode at momentum `k`, `|k| <= pi`.
    pub fn mode_energy(&self, k: f64) -> Result<f64> {
        if !(k.abs() <= PI) {
            return Err(Error::OutOfDomain(format!("momentum {k} outside [-pi, pi]")));
        }
        Ok(match self.range {
            Range::ShortRange => {
                let xi = 2.0 * self.j * k.cos() + 2.0 * self.mu;
                xi.hypot(self.delta * k.sin())
            }
            Range::LongRange { .. } => {
                let xi = 2.0 * self.j * cos_sum(&self.hopping_weights(), k) + 2.0 * self.mu;
                let d = self.delta * sin_sum(&self.pairing_weights(), k);
                xi.hypot(d)
            }
        })
    }

    /// Energies on the whole mode grid, bitwise symmetric under `k -> -k`.
    pub fn mode_energies(&self) -> Vec<f64> {
        let l = self.l;
        let half = l / 2;
        let mut energies = vec![0.0; l];
        match self.range {
            Range::ShortRange => {
                let grid = self.mode_grid();
                for n in half..l {
                    let k = grid[n];
                    let xi = 2.0 * self.j * k.cos() + 2.0 * self.mu;
                    energies[n] = xi.hypot(self.delta * k.sin());
                }
                energies[0] = 2.0 * (self.mu - self.j).abs();
            }
            Range::LongRange { .. } => {
                let (cos_h, _) = grid_sums(&self.hopping_weights(), l);
                let (_, sin_p) = grid_sums(&self.pairing_weights(), l);
                for n in (half..l).chain(std::iter::once(0)) {
                    let xi = 2.0 * self.j * cos_h[n] + 2.0 * self.mu;
                    energies[n] = xi.hypot(self.delta * sin_p[n]);
                }
            }
        }
        for n in 1..half {
            energies[n] = energies[l - n];
        }
        energies
    }

    /// Indices of the grid modes that are distinct up to `k -> -k`:
    /// `n = 0`, `n = L/2` and `L/2 < n < L`.
    pub fn unique_modes(&self) -> Vec<usize> {
        let half = self.l / 2;
        std::iter::once(0).chain(half..self.l).collect()
    }

    /// Leading small-`k` behaviour of the spectrum.
    pub fn low_energy_params(&self) -> Result<LowEnergyParams> {
        if self.is_critical() {
            return self.critical_params();
        }
        match self.range {
            Range::ShortRange => {
                let shift = self.mu + self.j;
                let lambda0 = 2.0 * shift.abs();
                let lambda1 = (self.delta * self.delta - 4.0 * self.j * shift) / (4.0 * shift.abs());
                if !(lambda1 > 0.0) {
                    return Err(Error::OutOfDomain(format!(
                        "curvature lambda1 = {lambda1} is not positive; the noncritical expansion needs lambda1 > 0"
                    )));
                }
                Ok(LowEnergyParams::Gapped { lambda0, lambda1 })
            }
            Range::LongRange { .. } => Err(Error::OutOfDomain(
                "gapped low-energy expansion is only available for the nearest-neighbour chain".into(),
            )),
        }
    }

    fn critical_params(&self) -> Result<LowEnergyParams> {
        let (phi, alpha) = match self.range {
            Range::ShortRange => return Ok(LowEnergyParams::Critical { c: self.delta.abs(), z: 1.0 }),
            Range::LongRange { phi, alpha } => (phi, alpha),
        };
        // sum_l cos(kl)/l^p = zeta(p) + Gamma(1-p) sin(pi p/2) k^{p-1} + O(k^2),
        // sum_l sin(kl)/l^p = Gamma(1-p) cos(pi p/2) k^{p-1} + zeta(p-1) k + ...
        let mut terms: Vec<(f64, f64)> = Vec::new();
        if phi < 2.0 {
            terms.push((phi - 1.0, 2.0 * self.j * gamma(1.0 - phi) * (0.5 * PI * phi).sin()));
        } else if phi == 2.0 {
            terms.push((1.0, -PI * self.j));
        }
        if alpha < 2.0 {
            terms.push((alpha - 1.0, self.delta * gamma(1.0 - alpha) * (0.5 * PI * alpha).cos()));
        } else if alpha > 2.0 {
            terms.push((1.0, self.delta * zeta(alpha - 1.0)));
        } else {
            return Err(Error::OutOfDomain(
                "alpha = 2 carries logarithmic corrections; no power-law critical dispersion".into(),
            ));
        }
        let z = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
        let c = terms.iter().filter(|t| (t.0 - z).abs() < 1e-12).map(|t| t.1 * t.1).sum::<f64>().sqrt();
        if !(c > 0.0) {
            return Err(Error::OutOfDomain("critical dispersion has a vanishing prefactor".into()));
        }
        Ok(LowEnergyParams::Critical { c, z })
    }

    /// Equilibrium excitation density `(1/L) sum_k P^th(lambda_k / T)`.
    pub fn thermal_excitation_density(&self, t: f64) -> f64 {
        thermal_density(&self.mode_energies(), t)
    }

    /// Compact identifier written into sweep records.
    pub fn tag(&self) -> String {
        match self.range {
            Range::ShortRange => {
                format!("kitaev-sr(J={};Delta={};mu={};L={})", self.j, self.delta, self.mu, self.l)
            }
            Range::LongRange { phi, alpha } => format!(
                "kitaev-lr(J={};Delta={};mu={};L={};phi={};alpha={})",
                self.j, self.delta, self.mu, self.l, phi, alpha
            ),
        }
    }
}

/// Weights `d_l^{-p}` for `l = 1..=L/2`, with `d_{L/2} = 2^{1/phi} L/2`.
fn distance_weights(l: usize, phi: f64, p: f64) -> Vec<f64> {
    let half = l / 2;
    (1..=half)
        .map(|r| {
            let d = if r == half { 2f64.powf(1.0 / phi) * r as f64 } else { r as f64 };
            d.powf(-p)
        })
        .collect()
}

fn cos_sum(weights: &[f64], k: f64) -> f64 {
    weights.iter().enumerate().rev().map(|(i, w)| w * (k * (i + 1) as f64).cos()).sum()
}

fn sin_sum(weights: &[f64], k: f64) -> f64 {
    weights.iter().enumerate().rev().map(|(i, w)| w * (k * (i + 1) as f64).sin()).sum()
}

/// `sum_l a_l cos(k_n l)` and `sum_l a_l sin(k_n l)` on the whole grid by one FFT.
/// With `k_n = 2 pi n/L - pi`, `e^{i k_n l} = (-1)^l e^{2 pi i n l/L}`.
fn grid_sums(weights: &[f64], l: usize) -> (Vec<f64>, Vec<f64>) {
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    for (i, w) in weights.iter().enumerate() {
        let r = i + 1;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        buf[r % l].re += sign * w;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(l).process(&mut buf);
    let cos = buf.iter().map(|c| c.re).collect();
    let sin = buf.iter().map(|c| -c.im).collect();
    (cos, sin)
}

/// `1 / (e^x + 1)` without overflow for large `|x|`.
pub fn fermi_dirac(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Thermal occupation of a mode of energy `lambda` at temperature `t`;
/// zero at `t = 0`.
pub fn occupation(lambda: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    fermi_dirac(lambda / t)
}

/// Mean thermal occupation of the given energies, summed in index order.
pub fn thermal_density(energies: &[f64], t: f64) -> f64 {
    if energies.is_empty() {
        return 0.0;
    }
    energies.iter().map(|&e| occupation(e, t)).sum::<f64>() / energies.len() as f64
}
