//! Dimensionless kernel of the rate equation.
//!
//! With `x = T/lambda` the occupation of a mode obeys
//! `dP/dx = kappa * coth(1/(2x)) * (P - g(x))` where `g(x) = 1/(e^{1/x} + 1)`.
//! Its solution is expressed through the primitive
//! `G(x) = int_0^x coth(1/(2u)) du`, evaluated here from a cached table of
//! knots below `x = 1` and from its asymptotic series above.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

const TABLE_STEPS: usize = 1024;
const TABLE_H: f64 = 1.0 / TABLE_STEPS as f64;

/// `G(x) - x^2 - ln(x)/6` as `x -> inf`.
const SERIES_CONSTANT: f64 = 0.401_306_343_250_646_381_66;

/// Coefficients of `x^{-2}, x^{-4}, ...` in the large-x expansion of `G`:
/// `2 B_{2n} / ((2n)! (2 - 2n))` for n = 2..=14.
const SERIES: [f64; 13] = [
    1.388_888_888_888_888_888_9e-3,
    -1.653_439_153_439_153_439_2e-5,
    2.755_731_922_398_589_065_3e-7,
    -5.219_189_246_967_024_744_8e-9,
    1.056_838_027_737_498_637e-10,
    -2.230_422_755_114_113_138_8e-12,
    4.842_400_423_317_975_524e-14,
    -1.073_257_757_034_730_570_5e-15,
    2.416_520_776_175_624_303_4e-17,
    -5.509_002_828_360_229_515_2e-19,
    1.268_587_698_710_229_394_6e-20,
    -2.945_589_199_691_222_893_1e-22,
    6.887_321_097_721_189_884_9e-24,
];

/// Below this `x` the slope `g'(x) ~ e^{-1/x}/x^2` underflows.
const SLOPE_FLOOR: f64 = 1.0 / 700.0;

/// `coth(1/(2x))`, equal to 1 at `x = 0`.
pub fn coth_half_inv(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    1.0 + 2.0 / (1.0 / x).exp_m1()
}

fn coth_half_inv_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (-1.0 / x).exp();
    let d = 1.0 - e;
    2.0 * e / (x * x * d * d)
}

/// Thermal occupation as a function of `x = T/lambda`: `g(x) = 1/(e^{1/x} + 1)`.
pub fn thermal_inv(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    crate::model::fermi_dirac(1.0 / x)
}

/// `g'(x) = e^{-1/x} / (x^2 (1 + e^{-1/x})^2)`, bounded by `1/(4x^2)`.
pub fn thermal_inv_slope(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let e = (-1.0 / x).exp();
    let d = 1.0 + e;
    e / (x * x * d * d)
}

struct Knot {
    value: f64,
    slope: f64,
    curvature: f64,
}

fn table() -> &'static [Knot] {
    static TABLE: OnceLock<Vec<Knot>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut knots = Vec::with_capacity(TABLE_STEPS + 1);
        let mut sum = 0.0;
        let mut compensation = 0.0;
        let mut f = coth_half_inv;
        for i in 0..=TABLE_STEPS {
            let x = i as f64 * TABLE_H;
            if i > 0 {
                let (piece, _) = quadrature::gauss_kronrod(&mut f, x - TABLE_H, x);
                let t = sum + piece;
                compensation += if sum.abs() >= piece.abs() { (sum - t) + piece } else { (piece - t) + sum };
                sum = t;
            }
            knots.push(Knot {
                value: sum + compensation,
                slope: coth_half_inv(x),
                curvature: coth_half_inv_derivative(x),
            });
        }
        knots
    })
}

fn series_tail(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    SERIES.iter().rev().fold(0.0, |acc, c| (acc + c) * inv2)
}

/// `G(x) = int_0^x coth(1/(2u)) du` for `x >= 0` (and `+inf`).
pub fn coth_integral(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x >= 1.0 {
        return x * x + x.ln() / 6.0 + SERIES_CONSTANT + series_tail(x);
    }
    let knots = table();
    let i = ((x * TABLE_STEPS as f64) as usize).min(TABLE_STEPS - 1);
    let (a, b) = (&knots[i], &knots[i + 1]);
    let h = TABLE_H;
    let t = (x - i as f64 * h) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * t3 - t4 + 0.5 * t5;
    a.value * h0
        + h * a.slope * h1
        + h * h * a.curvature * h2
        + b.value * h3
        + h * b.slope * h4
        + h * h * b.curvature * h5
}

/// `G(b) - G(a)` without cancellation when both arguments are large.
pub fn coth_integral_between(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a >= 1.0 && b >= 1.0 && a.is_finite() && b.is_finite() {
        let d = b - a;
        return d * (a + b) + (d / a).ln_1p() / 6.0 + series_tail(b) - series_tail(a);
    }
    coth_integral(b) - coth_integral(a)
}

/// Solution of the scaled rate equation,
/// `P(x, y, kappa) = g(x) + int_x^y g'(u) exp(-kappa [G(u) - G(x)]) du`,
/// for a mode that starts thermal at `y` and is followed down to `x <= y`.
/// `y` may be infinite. The integral has a positive integrand and is
/// computed to relative accuracy `rel_tol`.
pub fn relaxed_occupation(x: f64, y: f64, kappa: f64, rel_tol: f64) -> Result<f64> {
    if !(x >= 0.0) || !(y >= x) || x.is_infinite() {
        return Err(Error::invalid(format!("need 0 <= x <= y, got x = {x}, y = {y}")));
    }
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(Error::invalid(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {rel_tol}")));
    }
    if x == y || kappa == 0.0 {
        return Ok(if y.is_infinite() { 0.5 } else { thermal_inv(y) });
    }
    let base = thermal_inv(x);
    let lo = x.max(SLOPE_FLOOR);
    let hi = if y.is_finite() {
        y
    } else {
        // Past this point the integrand is below the smallest double.
        let mut upper = (2.0 * lo).max(1.0);
        while kappa * coth_integral_between(x, upper) < 750.0 {
            upper *= 2.0;
        }
        upper
    };
    if lo >= hi {
        return Ok(base);
    }
    let g_x = coth_integral(x);
    let integrand = |u: f64| {
        let s = u.exp();
        let exponent =
            if s >= 1.0 && x >= 1.0 { kappa * coth_integral_between(x, s) } else { kappa * (coth_integral(s) - g_x) };
        if exponent > 745.0 {
            0.0
        } else {
            s * thermal_inv_slope(s) * (-exponent).exp()
        }
    };
    let (u_lo, u_hi) = (lo.ln(), hi.ln());
    let mut breaks = vec![u_lo];
    let peak = -0.5 * kappa.ln();
    let pieces = ((u_hi - u_lo) / 2.0).ceil().max(1.0) as usize;
    for i in 1..pieces {
        breaks.push(u_lo + (u_hi - u_lo) * i as f64 / pieces as f64);
    }
    if peak > u_lo && peak < u_hi {
        breaks.push(peak);
    }
    // The exponential decays from the lower end on the scale
    // 1/(kappa lo coth(1/(2 lo))) in log u, which can be far narrower than
    // a panel.
    let width = 1.0 / (kappa * lo * coth_half_inv(lo));
    let mut offset = width;
    while offset < u_hi - u_lo {
        breaks.push(u_lo + offset);
        offset *= 4.0;
    }
    breaks.push(u_hi);
    breaks.sort_by(f64::total_cmp);
    let rel = rel_tol.max(1e-13);
    let tol = Tolerance { abs: rel * base, rel };
    let estimate = quadrature::integrate(integrand, &breaks, tol, 4000)?;
    Ok(base + estimate.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from 30-digit quadrature.
    const G_HALF: f64 = 0.541_089_218_833_433_674_6;
    const G_ONE: f64 = 1.402_678_968_205_504_626_3;
    const G_THREE: f64 = 9.584_562_508_598_583_421_4;
    const G_TEN: f64 = 100.785_084_412_652_045_918_8;
    const G_QUARTER: f64 = 0.251_616_408_095_780_080_2;

    #[test]
    fn primitive_matches_reference_values() {
        for (x, want) in [(0.25, G_QUARTER), (0.5, G_HALF), (1.0, G_ONE), (3.0, G_THREE), (10.0, G_TEN)] {
            let got = coth_integral(x);
            assert!((got - want).abs() <= 2e-15 * want, "G({x}) = {got}, want {want}");
        }
        assert!((coth_integral(0.01) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn table_and_series_meet_continuously() {
        let below = coth_integral(1.0 - 1e-12);
        let above = coth_integral(1.0);
        assert!((above - below - coth_half_inv(1.0) * 1e-12).abs() < 1e-14);
    }

    #[test]
    fn difference_form_agrees_with_subtraction() {
        let (a, b) = (3.0, 10.0);
        let d = coth_integral_between(a, b);
        assert!((d - (G_TEN - G_THREE)).abs() < 1e-13);
        let d = 2f64.powi(-20);
        let close = coth_integral_between(1e4, 1e4 + d);
        let want = d * (2e4 + d) + (d / 1e4).ln_1p() / 6.0;
        assert!((close - want).abs() < 1e-16, "{close}");
    }

    #[test]
    fn decoupled_mode_keeps_its_initial_occupation() {
        assert_eq!(relaxed_occupation(0.0, 2.0, 0.0, 1e-10).unwrap(), thermal_inv(2.0));
        assert_eq!(relaxed_occupation(0.0, f64::INFINITY, 0.0, 1e-10).unwrap(), 0.5);
        assert_eq!(relaxed_occupation(0.7, 0.7, 3.0, 1e-10).unwrap(), thermal_inv(0.7));
    }

    #[test]
    fn strong_coupling_gives_the_bessel_limit() {
        // For large kappa only x << 1 matters, where G(x) = x and the
        // integral becomes 2 sqrt(kappa) K_1(2 sqrt(kappa)).
        let kappa: f64 = 2500.0;
        let p = relaxed_occupation(0.0, f64::INFINITY, kappa, 1e-12).unwrap();
        let arg = 2.0 * kappa.sqrt();
        let bessel = arg * crate::special::bessel_k1(arg);
        assert!((p / bessel - 1.0).abs() < 1e-9, "{p} vs {bessel}");
    }

    #[test]
    fn occupation_decreases_with_coupling() {
        let mut last = 0.5;
        for kappa in [1e-3, 1e-1, 1.0, 10.0, 100.0] {
            let p = relaxed_occupation(0.0, 5.0, kappa, 1e-10).unwrap();
            assert!(p < last && p > 0.0);
            last = p;
        }
    }
}
