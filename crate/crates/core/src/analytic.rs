//! Continuum limit of the cooling problem.
//!
//! Near a critical point `lambda = c |k|^z`, the sum over modes becomes an
//! integral and the final excitation density is
//! `E(T, T_i, gamma/v) = (1/(pi z c^{1/z})) int_0^inf lambda^{1/z-1} P(T/lambda, T_i/lambda, gamma lambda^{s+1}/v) dlambda`.
//! `P(x, y, w)` is the occupation of a mode after cooling from `y` to `x`
//! (in units of its energy) with dimensionless coupling `w`.

use std::f64::consts::{LN_2, PI};

use statrs::function::gamma::gamma;

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::kernel;
use crate::model::{ChainModel, LowEnergyParams};
use crate::quadrature::{self, Tolerance};
use crate::special::bessel_k1_scaled;

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-9;
const MAX_SEGMENTS: usize = 2000;

/// Arguments of the scaling function: `x = T/lambda`, `y = T_i/lambda`
/// (possibly infinite) and `w = gamma lambda^{s+1} / v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingArgs {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl ScalingArgs {
    pub fn new(x: f64, y: f64, w: f64) -> Result<Self> {
        if !(x >= 0.0) || !(y >= x) || x.is_infinite() {
            return Err(Error::invalid(format!("need 0 <= x <= y, got x = {x}, y = {y}")));
        }
        if !(w >= 0.0) || w.is_infinite() {
            return Err(Error::invalid(format!("w must be finite and >= 0, got {w}")));
        }
        Ok(ScalingArgs { x, y, w })
    }
}

/// `f(x, y) = 2 pi delta int_y^x coth(1/(2u)) du`. `NaN` for negative input.
pub fn f_kernel(x: f64, y: f64, delta: f64) -> f64 {
    if !(x >= 0.0) || !(y >= 0.0) {
        return f64::NAN;
    }
    let (lo, hi, sign) = if x >= y { (y, x, 1.0) } else { (x, y, -1.0) };
    sign * 2.0 * PI * delta * kernel::coth_integral_between(lo, hi)
}

/// Occupation `P(x, y, w)` after a linear ramp, for a bath strength `delta`.
pub fn p_trivariate(args: ScalingArgs, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    kernel::relaxed_occupation(args.x, args.y, 2.0 * PI * delta * args.w, INNER_TOL)
}

fn critical_params(model: &ChainModel) -> Result<(f64, f64)> {
    match model.low_energy_params() {
        Ok(LowEnergyParams::Critical { c, z }) => Ok((c, z)),
        Ok(LowEnergyParams::Gapped { .. }) => Err(Error::invalid(format!(
            "continuum scaling needs a critical model (mu = {}), got mu = {}",
            model.critical_mu(),
            model.mu()
        ))),
        Err(e) => Err(e),
    }
}

fn prefactor(c: f64, z: f64) -> f64 {
    1.0 / (PI * z * c.powf(1.0 / z))
}

/// Continuum excitation density after cooling from `t_i` (may be infinite)
/// to `t` at rate `v`, with `gamma_over_v = gamma / v`.
pub fn excitation_continuum(t: f64, t_i: f64, gamma_over_v: f64, model: &ChainModel, bath: &BathSpec) -> Result<f64> {
    if !(t >= 0.0) || !(t_i >= t) || !(t_i > 0.0) || t.is_infinite() {
        return Err(Error::invalid(format!("need 0 <= T <= T_i and T_i > 0, got T = {t}, T_i = {t_i}")));
    }
    if !(gamma_over_v > 0.0) || gamma_over_v.is_infinite() {
        return Err(Error::invalid(format!("gamma/v must be positive and finite, got {gamma_over_v}")));
    }
    let (c, z) = critical_params(model)?;
    let s = bath.s();
    let freeze = (1.0 / (2.0 * PI * bath.delta() * gamma_over_v)).powf(1.0 / (s + 1.0));
    // Every length scale of the integrand transforms like this one under
    // the homogeneity rescaling, so the quadrature nodes do too.
    let scale = t.max(t_i.min(freeze));
    let a = 1.0 / z;
    let mut failure = None;
    let integrand = |lambda: f64| {
        if failure.is_some() || lambda == 0.0 {
            return 0.0;
        }
        let kappa = 2.0 * gamma_over_v * bath.spectral_density(lambda).unwrap_or(0.0) * lambda;
        match kernel::relaxed_occupation(t / lambda, t_i / lambda, kappa, INNER_TOL) {
            Ok(p) => lambda.powf(a - 1.0) * p,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let estimate =
        quadrature::integrate_to_infinity(integrand, 0.0, scale, Tolerance::relative(OUTER_TOL), MAX_SEGMENTS);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(prefactor(c, z) * estimate?.value)
}

/// Plateau constant `c1 = lim_{T_i -> inf} (gamma/v)^{1/[z(s+1)]} E(0, T_i, gamma/v)`.
///
/// Uses `P(0, inf, w) = int_0^inf g'(x) exp(-2 pi delta w G(x)) dx`; the
/// `lambda` integral of the exponential is then a Gamma function.
pub fn c1_constant(bath: &BathSpec, z: f64, c: f64) -> Result<f64> {
    if !(z > 0.0) || !(c > 0.0) {
        return Err(Error::invalid(format!("need z > 0 and c > 0, got z = {z}, c = {c}")));
    }
    let a = 1.0 / z;
    let p = bath.s() + 1.0;
    let q = a / p;
    let two_pi_delta = 2.0 * PI * bath.delta();
    let gamma_q = gamma(q);
    let integrand = |x: f64| {
        let slope = kernel::thermal_inv_slope(x);
        if slope == 0.0 {
            return 0.0;
        }
        slope * gamma_q / (p * (two_pi_delta * kernel::coth_integral(x)).powf(q))
    };
    let estimate = quadrature::integrate_to_infinity(integrand, 0.0, 1.0, Tolerance::relative(1e-13), MAX_SEGMENTS)?;
    Ok(prefactor(c, z) * estimate.value)
}

/// Slope constant of the low-`T_i` regime, `E(0, T_i, gamma/v) ~ c2 T_i^{1/z}`.
/// Closed form `ln 2 / (pi |Delta|)` for the nearest-neighbour chain.
pub fn c2_constant(model: &ChainModel) -> Result<f64> {
    let (c, z) = critical_params(model)?;
    if z == 1.0 {
        return Ok(LN_2 / (PI * c));
    }
    c2_quadrature(z, c)
}

/// `(1/(pi z c^{1/z})) int_0^inf lambda^{1/z-1} / (e^lambda + 1) dlambda`.
pub fn c2_quadrature(z: f64, c: f64) -> Result<f64> {
    if !(z > 0.0) || !(c > 0.0) {
        return Err(Error::invalid(format!("need z > 0 and c > 0, got z = {z}, c = {c}")));
    }
    let a = 1.0 / z;
    let integrand = |lambda: f64| lambda.powf(a - 1.0) * crate::model::fermi_dirac(lambda);
    let estimate = quadrature::integrate_to_infinity(integrand, 0.0, 1.0, Tolerance::relative(1e-13), MAX_SEGMENTS)?;
    Ok(prefactor(c, z) * estimate.value)
}

/// Where the low-`T_i` line `c2 T~^{1/z}` meets the plateau `c1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossover {
    pub c1: f64,
    pub c2: f64,
    /// `c1 / c2`.
    pub ratio: f64,
    /// Rescaled initial temperature `(c1/c2)^z`.
    pub rescaled: f64,
    /// Initial temperature at the given `v/gamma`.
    pub t_i: f64,
}

pub fn crossover(bath: &BathSpec, model: &ChainModel, v_over_gamma: f64) -> Result<Crossover> {
    if !(v_over_gamma > 0.0) || v_over_gamma.is_infinite() {
        return Err(Error::invalid(format!("v/gamma must be positive, got {v_over_gamma}")));
    }
    let (c, z) = critical_params(model)?;
    let c1 = c1_constant(bath, z, c)?;
    let c2 = c2_constant(model)?;
    let ratio = c1 / c2;
    let rescaled = ratio.powf(z);
    let t_i = rescaled * v_over_gamma.powf(1.0 / (bath.s() + 1.0));
    Ok(Crossover { c1, c2, ratio, rescaled, t_i })
}

/// `U(lambda) = 2 lambda^{1/z-1} sqrt(b) K_1(2 sqrt(b))`, `b = 2 pi delta lambda^{s+1}`.
/// Bounds `lambda^{1/z-1} P(0, inf, lambda^{s+1})`.
pub fn dominating_bound(lambda: f64, bath: &BathSpec, z: f64) -> f64 {
    log_dominating_bound(lambda, bath, z).exp()
}

/// `ln U(lambda)`, finite where `U` itself underflows.
pub fn log_dominating_bound(lambda: f64, bath: &BathSpec, z: f64) -> f64 {
    if !(lambda > 0.0) {
        return f64::NAN;
    }
    let b = 2.0 * PI * bath.delta() * lambda.powf(bath.s() + 1.0);
    let arg = 2.0 * b.sqrt();
    LN_2 + (1.0 / z - 1.0) * lambda.ln() + 0.5 * b.ln() + bessel_k1_scaled(arg).ln() - arg
}

fn gapped_params(model: &ChainModel) -> Result<(f64, f64)> {
    match model.low_energy_params() {
        Ok(LowEnergyParams::Gapped { lambda0, lambda1 }) => Ok((lambda0, lambda1)),
        Ok(LowEnergyParams::Critical { .. }) => {
            Err(Error::invalid("noncritical asymptotics need a gapped model (mu != mu_c)"))
        }
        Err(Error::OutOfDomain(msg)) => Err(Error::InvalidParameter(msg)),
        Err(e) => Err(e),
    }
}

/// Low-`T_i` asymptote away from criticality,
/// `E = (1/2) sqrt(T_i/(pi lambda1)) exp(-lambda0/T_i)`.
pub fn noncritical_low_ti(model: &ChainModel, t_i: f64) -> Result<f64> {
    if !(t_i > 0.0) || t_i.is_infinite() {
        return Err(Error::invalid(format!("T_i must be positive and finite, got {t_i}")));
    }
    let (lambda0, lambda1) = gapped_params(model)?;
    Ok(0.5 * (t_i / (PI * lambda1)).sqrt() * (-lambda0 / t_i).exp())
}

/// Small-`v/gamma` asymptote away from criticality for an ohmic bath,
/// `E = sqrt(lambda0/(8 lambda1)) exp(-sqrt(8 pi delta) lambda0 sqrt(gamma/v))`.
pub fn noncritical_small_v(model: &ChainModel, bath: &BathSpec, v_over_gamma: f64) -> Result<f64> {
    if !(v_over_gamma > 0.0) || v_over_gamma.is_infinite() {
        return Err(Error::invalid(format!("v/gamma must be positive, got {v_over_gamma}")));
    }
    if bath.s() != 1.0 {
        return Err(Error::invalid(format!(
            "the small-v asymptote is for an ohmic bath (s = 1), got s = {}",
            bath.s()
        )));
    }
    let (lambda0, lambda1) = gapped_params(model)?;
    let decay = (8.0 * PI * bath.delta()).sqrt() * lambda0 / v_over_gamma.sqrt();
    Ok((lambda0 / (8.0 * lambda1)).sqrt() * (-decay).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{bessel_k1, zeta};

    /// Plateau constants for `s = 1`, `z = c = 1`, from 30-digit quadrature.
    const C1_DELTA_ONE: f64 = 0.052_692_469_182_786_465;
    const C1_DELTA_TWO: f64 = 0.037_259_202_276_611_487_79;

    fn critical() -> ChainModel {
        ChainModel::short_range(1.0, 1.0, -1.0, 4).unwrap()
    }

    fn ohmic(delta: f64) -> BathSpec {
        BathSpec::new(0.01, delta, 1.0).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(f_kernel(0.4, 0.4, 1.0), 0.0);
        let f = f_kernel(1.0, 0.0, 1.0);
        assert!((f - 2.0 * PI * 1.402_678_968_205_504_626_3).abs() < 1e-13);
        assert_eq!(f_kernel(0.0, 1.0, 1.0), -f);
        assert!(f_kernel(-1.0, 0.0, 1.0).is_nan());
        for x in [0.1, 1.0, 5.0, 50.0] {
            assert!(f_kernel(x, 0.0, 1.0) >= 2.0 * PI * x);
        }
        let big = f_kernel(1e3, 0.0, 1.0) / (2.0 * PI * 1e6);
        assert!((big - 1.0).abs() < 1e-5);
    }

    #[test]
    fn trivariate_edge_cases() {
        let thermal = kernel::thermal_inv(0.8);
        assert_eq!(p_trivariate(ScalingArgs::new(0.0, 0.8, 0.0).unwrap(), 1.0).unwrap(), thermal);
        assert_eq!(p_trivariate(ScalingArgs::new(0.8, 0.8, 5.0).unwrap(), 1.0).unwrap(), thermal);
        assert!(ScalingArgs::new(1.0, 0.5, 1.0).is_err());
        let p = p_trivariate(ScalingArgs::new(0.0, f64::INFINITY, 1.0).unwrap(), 1.0).unwrap();
        assert!(p > 0.0 && p < 0.5);
    }

    #[test]
    fn plateau_constant_matches_reference() {
        let c1 = c1_constant(&ohmic(1.0), 1.0, 1.0).unwrap();
        assert!((c1 - C1_DELTA_ONE).abs() < 1e-13, "{c1}");
        let c1 = c1_constant(&ohmic(2.0), 1.0, 1.0).unwrap();
        assert!((c1 - C1_DELTA_TWO).abs() < 1e-13, "{c1}");
        let scaled = c1_constant(&ohmic(1.0), 0.5, 3.0).unwrap() / c1_constant(&ohmic(1.0), 0.5, 1.0).unwrap();
        assert!((scaled - 3f64.powf(-2.0)).abs() < 1e-13);
    }

    #[test]
    fn plateau_constant_equals_the_nested_integral() {
        let nested = excitation_continuum(0.0, f64::INFINITY, 1.0, &critical(), &ohmic(1.0)).unwrap();
        assert!((nested / C1_DELTA_ONE - 1.0).abs() < 1e-8, "{nested}");
    }

    #[test]
    fn slope_constant_both_paths() {
        let closed = c2_constant(&critical()).unwrap();
        assert!((closed - 0.220_635_600_152_651_6).abs() < 1e-15);
        assert!((c2_quadrature(1.0, 1.0).unwrap() - closed).abs() < 1e-13);
        let wide = ChainModel::short_range(1.0, 2.0, -1.0, 4).unwrap();
        assert!((c2_constant(&wide).unwrap() - LN_2 / (2.0 * PI)).abs() < 1e-15);
        // int lambda^{a-1}/(e^lambda+1) = Gamma(a) (1 - 2^{1-a}) zeta(a)
        let a = 2.0;
        let want = gamma(a) * (1.0 - 2f64.powf(1.0 - a)) * zeta(a) / (PI * 0.5 * 1.7f64.powf(a));
        assert!((c2_quadrature(0.5, 1.7).unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossover_coefficient() {
        let x = crossover(&ohmic(1.0), &critical(), 1.0).unwrap();
        assert!((x.ratio - 0.238_821_247_098_567_95).abs() < 1e-12);
        assert!((x.t_i - 0.239).abs() < 1e-3);
        let x100 = crossover(&ohmic(1.0), &critical(), 100.0).unwrap();
        assert!((x100.t_i - 2.39).abs() < 1e-2);
        assert!((x100.rescaled - x.c1 / x.c2).abs() < 1e-15);
    }

    #[test]
    fn thermal_start_equals_ramp_start() {
        let t_i = 0.7;
        let e = excitation_continuum(t_i, t_i, 3.0, &critical(), &ohmic(1.0)).unwrap();
        assert!((e - t_i * LN_2 / PI).abs() < 1e-10, "{e}");
    }

    #[test]
    fn continuum_limits() {
        let (model, bath) = (critical(), ohmic(1.0));
        let small = excitation_continuum(0.0, 1e-4, 1.0, &model, &bath).unwrap() / 1e-4;
        assert!((small / (LN_2 / PI) - 1.0).abs() < 1e-3, "{small}");
        let large = excitation_continuum(0.0, 1e4, 1.0, &model, &bath).unwrap();
        assert!((large / C1_DELTA_ONE - 1.0).abs() < 1e-3, "{large}");
        assert!(excitation_continuum(0.0, 1.0, 1.0, &model.with_mu(-1.2).unwrap(), &bath).is_err());
    }

    #[test]
    fn homogeneity_spot_check() {
        let (model, bath) = (critical(), ohmic(1.0));
        let (t, t_i, g, l): (f64, f64, f64, f64) = (0.03, 0.4, 2.5, 3.7);
        let lhs = excitation_continuum(l * t, l * t_i, g * l.powi(-2), &model, &bath).unwrap();
        let rhs = l * excitation_continuum(t, t_i, g, &model, &bath).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bound_dominates_and_matches_bessel_asymptote() {
        let bath = ohmic(1.0);
        for i in 0..30 {
            let lambda = 10f64.powf(-3.0 + 5.0 * i as f64 / 29.0);
            let p = p_trivariate(ScalingArgs::new(0.0, f64::INFINITY, lambda * lambda).unwrap(), 1.0).unwrap();
            assert!(p <= dominating_bound(lambda, &bath, 1.0) * (1.0 + 1e-9), "lambda = {lambda}");
        }
        let lambda: f64 = 50.0;
        let b = 2.0 * PI * lambda * lambda;
        let asymptote = PI.sqrt().ln() + 0.25 * b.ln() - 2.0 * b.sqrt();
        let log_u = log_dominating_bound(lambda, &bath, 1.0);
        assert!(((log_u - asymptote) / asymptote).abs() < 1e-2);
        let b = 2.0 * PI * 0.09;
        let direct = 2.0 * b.sqrt() * bessel_k1(2.0 * b.sqrt());
        assert!((dominating_bound(0.3, &bath, 1.0) / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn noncritical_formulas() {
        let model = ChainModel::short_range(1.0, 1.0, -1.2, 4).unwrap();
        let e = noncritical_low_ti(&model, 0.2).unwrap();
        assert!((e - 0.5 * (0.2 / (PI * 2.25)).sqrt() * (-2f64).exp()).abs() < 1e-15);
        let e = noncritical_small_v(&model, &ohmic(1.0), 1.0).unwrap();
        let want = (0.4f64 / 2.25).sqrt() / 8f64.sqrt() * (-(8.0 * PI).sqrt() * 0.4).exp();
        assert!((e / want - 1.0).abs() < 1e-14);
        assert!(noncritical_low_ti(&critical(), 0.2).is_err());
        let flat = ChainModel::short_range(1.0, 0.1, -0.5, 4).unwrap();
        assert!(matches!(noncritical_low_ti(&flat, 0.2), Err(Error::InvalidParameter(_))));
    }
}
