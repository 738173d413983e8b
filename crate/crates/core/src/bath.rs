//! Bosonic bath with spectral density `J(lambda) = pi delta lambda^s e^{-lambda/lambda_c}`
//! and the resulting mode relaxation rate `2 gamma J(lambda) coth(lambda / 2T)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    gamma: f64,
    delta: f64,
    s: f64,
    lambda_c: f64,
}

impl BathSpec {
    /// Pure power-law bath (`lambda_c = inf`).
    pub fn new(gamma: f64, delta: f64, s: f64) -> Result<Self> {
        Self::with_cutoff(gamma, delta, s, f64::INFINITY)
    }

    pub fn with_cutoff(gamma: f64, delta: f64, s: f64, lambda_c: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("s must be >= 0, got {s}")));
        }
        if !(lambda_c > 0.0) {
            return Err(Error::invalid(format!("lambda_c must be positive, got {lambda_c}")));
        }
        Ok(BathSpec { gamma, delta, s, lambda_c })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn lambda_c(&self) -> f64 {
        self.lambda_c
    }

    pub fn is_power_law(&self) -> bool {
        self.lambda_c.is_infinite()
    }

    /// Checks that the cutoff sits at least a decade above `max_energy`.
    pub fn check_cutoff(&self, max_energy: f64) -> Result<()> {
        if self.lambda_c < 10.0 * max_energy {
            return Err(Error::invalid(format!(
                "cutoff lambda_c = {} is below 10 x the largest mode energy {max_energy}",
                self.lambda_c
            )));
        }
        Ok(())
    }

    pub fn spectral_density(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::OutOfDomain(format!("spectral density needs lambda >= 0, got {lambda}")));
        }
        Ok(self.density_unchecked(lambda))
    }

    fn density_unchecked(&self, lambda: f64) -> f64 {
        let cutoff = if self.lambda_c.is_infinite() { 1.0 } else { (-lambda / self.lambda_c).exp() };
        PI * self.delta * lambda.powf(self.s) * cutoff
    }

    /// Zero-temperature rate `2 gamma J(lambda)`.
    pub fn bare_rate(&self, lambda: f64) -> f64 {
        2.0 * self.gamma * self.density_unchecked(lambda)
    }

    /// `tau^{-1}(lambda, T) = 2 gamma J(lambda) coth(lambda / 2T)`.
    pub fn relaxation_rate(&self, lambda: f64, t: f64) -> Result<f64> {
        if !(lambda >= 0.0) || !(t >= 0.0) {
            return Err(Error::OutOfDomain(format!("rate needs lambda, T >= 0, got {lambda}, {t}")));
        }
        if lambda == 0.0 && t > 0.0 {
            // lim 2 gamma pi delta lambda^s (2T / lambda)
            return if self.s > 1.0 {
                Ok(0.0)
            } else if self.s == 1.0 {
                Ok(4.0 * PI * self.gamma * self.delta * t)
            } else {
                Err(Error::OutOfDomain(format!("rate diverges at lambda = 0 for s = {} < 1", self.s)))
            };
        }
        Ok(self.bare_rate(lambda) * coth_half(lambda, t))
    }

    /// Compact identifier written into sweep records.
    pub fn tag(&self) -> String {
        format!("bath(gamma={};delta={};s={};lambda_c={})", self.gamma, self.delta, self.s, self.lambda_c)
    }
}

/// `coth(lambda / 2T)`, equal to 1 at `T = 0`.
pub fn coth_half(lambda: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    1.0 + 2.0 / (lambda / t).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic() -> BathSpec {
        BathSpec::new(0.01, 1.0, 1.0).unwrap()
    }

    #[test]
    fn spectral_density_examples() {
        let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
        assert!((b.spectral_density(1.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(b.spectral_density(0.0).unwrap(), 0.0);
        let cut = BathSpec::with_cutoff(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((cut.spectral_density(2.0).unwrap() - 2.0 * PI * (-1f64).exp()).abs() < 1e-14);
        assert!(b.spectral_density(-1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let b = ohmic();
        let coth1 = 1.0 / 1f64.tanh();
        let r = b.relaxation_rate(1.0, 0.5).unwrap();
        assert!((r - 2.0 * 0.01 * PI * coth1).abs() < 1e-15);
        assert!((r - 0.082_500_440_136_577_5).abs() < 1e-15);
        assert_eq!(b.relaxation_rate(0.3, 0.0).unwrap(), b.bare_rate(0.3));
        let t = 0.2;
        let small = b.relaxation_rate(1e-9, t).unwrap() / t;
        assert!((small - 4.0 * PI * 0.01).abs() < 1e-9);
        assert_eq!(b.relaxation_rate(0.0, t).unwrap(), 4.0 * PI * 0.01 * t);
    }

    #[test]
    fn zero_energy_limits_by_exponent() {
        let super_ohmic = BathSpec::new(0.1, 1.0, 2.0).unwrap();
        assert_eq!(super_ohmic.relaxation_rate(0.0, 1.0).unwrap(), 0.0);
        let sub_ohmic = BathSpec::new(0.1, 1.0, 0.5).unwrap();
        assert!(matches!(sub_ohmic.relaxation_rate(0.0, 1.0), Err(Error::OutOfDomain(_))));
        assert!(sub_ohmic.relaxation_rate(0.1, 1.0).is_ok());
    }

    #[test]
    fn coth_is_accurate_across_scales() {
        for a in [1e-8f64, 1e-4, 0.1, 1.0, 30.0, 1e3] {
            let exact = if a < 1e-3 { 1.0 / a + a / 3.0 } else { 1.0 / a.tanh() };
            let got = coth_half(2.0 * a, 1.0);
            assert!((got / exact - 1.0).abs() < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(BathSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(BathSpec::new(1.0, -1.0, 1.0).is_err());
        assert!(BathSpec::with_cutoff(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ohmic().check_cutoff(4.0).is_ok());
        assert!(BathSpec::with_cutoff(1.0, 1.0, 1.0, 5.0).unwrap().check_cutoff(4.0).is_err());
    }
}
