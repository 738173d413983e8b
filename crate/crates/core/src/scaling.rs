//! Data collapse and asymptote fitting for sweeps of final excitation densities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ode,
    Exact,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Ode => "ode",
            SolverKind::Exact => "exact",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(SolverKind::Ode),
            "exact" => Ok(SolverKind::Exact),
            other => Err(Error::invalid(format!("unknown solver '{other}', expected ode or exact"))),
        }
    }
}

/// One completed ramp.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub t_i: f64,
    pub v_over_gamma: f64,
    pub e_final: f64,
    pub solver: SolverKind,
    pub model_tag: String,
    pub bath_tag: String,
}

/// One curve of a collapse plot, sorted by strictly increasing `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    /// The control parameter held fixed along the curve.
    pub key: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Curves rescaled as `X~ = X scale^a`, `Y~ = E scale^b`. `scale` is the
/// family key, or its inverse for the `T_i` collapse.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseDataset {
    pub families: Vec<Family>,
    pub a: f64,
    pub b: f64,
}

impl CollapseDataset {
    /// Groups `(key, X, E)` points by key (in order of first appearance) and
    /// rescales them.
    pub fn build(points: impl IntoIterator<Item = (f64, f64, f64)>, a: f64, b: f64) -> Result<Self> {
        Self::build_scaled(points.into_iter().map(|(key, x, e)| (key, key, x, e)), a, b)
    }

    /// As [`CollapseDataset::build`], with a rescaling base that may differ from the key.
    fn build_scaled(points: impl IntoIterator<Item = (f64, f64, f64, f64)>, a: f64, b: f64) -> Result<Self> {
        // (key, rescaling base, points)
        type Group = (f64, f64, Vec<(f64, f64)>);
        let mut groups: Vec<Group> = Vec::new();
        for (key, scale, x, e) in points {
            match groups.iter_mut().find(|g| g.0 == key) {
                Some(g) => g.2.push((x, e)),
                None => groups.push((key, scale, vec![(x, e)])),
            }
        }
        if groups.is_empty() {
            return Err(Error::Analysis("no records to collapse".into()));
        }
        let mut families = Vec::with_capacity(groups.len());
        for (key, scale, mut pts) in groups {
            if !(scale > 0.0) {
                return Err(Error::Analysis(format!("family {key} has a non-positive scale {scale}")));
            }
            pts.sort_by(|p, q| p.0.total_cmp(&q.0));
            if pts.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Analysis(format!(
                    "family {key} has repeated abscissae; select a single solver first"
                )));
            }
            let (fx, fy) = (scale.powf(a), scale.powf(b));
            families.push(Family {
                key,
                x: pts.iter().map(|p| p.0 * fx).collect(),
                y: pts.iter().map(|p| p.1 * fy).collect(),
            });
        }
        Ok(CollapseDataset { families, a, b })
    }
}

/// Families of fixed `v/gamma`, rescaled to `X~ = (gamma/v)^{1/(s+1)} T_i`
/// and `Y~ = (gamma/v)^{1/[z(s+1)]} E`.
pub fn rescale_ti_collapse(records: &[SweepRecord], z: f64, s: f64) -> Result<CollapseDataset> {
    check_exponents(z, s)?;
    let points = records.iter().map(|r| (r.v_over_gamma, 1.0 / r.v_over_gamma, r.t_i, r.e_final));
    CollapseDataset::build_scaled(points, 1.0 / (s + 1.0), 1.0 / (z * (s + 1.0)))
}

/// Families of fixed `T_i`, rescaled to `X~ = (v/gamma) T_i^{-(s+1)}` and
/// `Y~ = E T_i^{-1/z}`.
pub fn rescale_v_collapse(records: &[SweepRecord], z: f64, s: f64) -> Result<CollapseDataset> {
    check_exponents(z, s)?;
    let points = records.iter().map(|r| (r.t_i, r.v_over_gamma, r.e_final));
    CollapseDataset::build(points, -(s + 1.0), -1.0 / z)
}

fn check_exponents(z: f64, s: f64) -> Result<()> {
    if !(z > 0.0) || !(s >= 0.0) {
        return Err(Error::invalid(format!("need z > 0 and s >= 0, got z = {z}, s = {s}")));
    }
    Ok(())
}

/// Monotone cubic (Fritsch-Carlson) interpolant.
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d = vec![delta[0]; 2];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Pchip { x, y, d }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[i]
            + (s3 - 2.0 * s2 + s) * h * self.d[i]
            + (-2.0 * s3 + 3.0 * s2) * self.y[i + 1]
            + (s3 - s2) * h * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

const QUALITY_GRID: usize = 50;

/// Largest relative spread `(max - min) / median` across families on a
/// 50-point log grid spanning the common abscissa range. Interpolation is
/// monotone cubic in `(ln X~, ln Y~)`. A single family gives 0.
pub fn collapse_quality(ds: &CollapseDataset) -> Result<f64> {
    if ds.families.len() < 2 {
        return Ok(0.0);
    }
    let mut curves = Vec::with_capacity(ds.families.len());
    for f in &ds.families {
        if f.x.len() < 2 {
            return Err(Error::Analysis(format!("family {} has fewer than two points", f.key)));
        }
        if f.x.iter().chain(&f.y).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Analysis(format!("family {} has non-positive values", f.key)));
        }
        let lx = f.x.iter().map(|v| v.ln()).collect();
        let ly = f.y.iter().map(|v| v.ln()).collect();
        curves.push(Pchip::new(lx, ly));
    }
    let lo = curves.iter().map(|c| c.x[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = curves.iter().map(|c| *c.x.last().unwrap()).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        return Err(Error::Analysis("families have no overlapping abscissa range".into()));
    }
    let mut worst: f64 = 0.0;
    let mut values = vec![0.0; curves.len()];
    for i in 0..QUALITY_GRID {
        let t = lo + (hi - lo) * i as f64 / (QUALITY_GRID - 1) as f64;
        for (v, c) in values.iter_mut().zip(&curves) {
            *v = c.eval(t).exp();
        }
        values.sort_by(f64::total_cmp);
        let m = values.len();
        let median = if m % 2 == 1 { values[m / 2] } else { 0.5 * (values[m / 2 - 1] + values[m / 2]) };
        worst = worst.max((values[m - 1] - values[0]) / median);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Power law `Y~ ~ A X~^p` below the crossover.
    Low,
    /// Plateau `Y~ ~ A` above the crossover.
    High,
}

/// Default fit windows: a decade below or above the crossover `X~*`.
pub fn default_window(regime: Regime, crossover: f64) -> (f64, f64) {
    match regime {
        Regime::Low => (0.0, 0.1 * crossover),
        Regime::High => (10.0 * crossover, f64::INFINITY),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoteFit {
    /// Log-log slope (close to zero on a plateau).
    pub exponent: f64,
    pub stderr: f64,
    /// `A` of the power law, or the mean plateau level.
    pub prefactor: f64,
    pub points: usize,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    stderr: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, intercept, stderr }
}

fn check_range(x: &[f64], what: &str, min_points: usize, min_decades: f64) -> Result<()> {
    if x.len() < min_points {
        return Err(Error::Analysis(format!("{what}: {} points, need at least {min_points}", x.len())));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let decades = (hi / lo).log10();
    if !(decades >= min_decades - 1e-9) {
        return Err(Error::Analysis(format!("{what}: abscissa spans {decades:.2} decades, need {min_decades}")));
    }
    Ok(())
}

/// Fits the asymptote of all rescaled points with `X~` in `window`.
pub fn fit_asymptote(ds: &CollapseDataset, regime: Regime, window: (f64, f64)) -> Result<AsymptoteFit> {
    let (mut lx, mut ly, mut raw) = (Vec::new(), Vec::new(), Vec::new());
    for f in &ds.families {
        for (&x, &y) in f.x.iter().zip(&f.y) {
            if x >= window.0 && x <= window.1 {
                if !(x > 0.0) || !(y > 0.0) {
                    return Err(Error::Analysis(format!("non-positive point ({x}, {y}) in the fit window")));
                }
                lx.push(x.ln());
                ly.push(y.ln());
                raw.push((x, y));
            }
        }
    }
    let xs: Vec<f64> = raw.iter().map(|p| p.0).collect();
    check_range(&xs, "fit window", 5, 0.5)?;
    let line = least_squares(&lx, &ly);
    let prefactor = match regime {
        Regime::Low => line.intercept.exp(),
        Regime::High => raw.iter().map(|p| p.1).sum::<f64>() / raw.len() as f64,
    };
    Ok(AsymptoteFit { exponent: line.slope, stderr: line.stderr, prefactor, points: raw.len() })
}

/// `1/[z(s + 1/eta)]`.
pub fn predicted_power_ramp_exponent(z: f64, s: f64, eta: f64) -> f64 {
    1.0 / (z * (s + 1.0 / eta))
}

/// Log-log slope of `E` against `v/gamma` (at least five points over two decades).
pub fn power_ramp_exponent(records: &[SweepRecord]) -> Result<AsymptoteFit> {
    let xs: Vec<f64> = records.iter().map(|r| r.v_over_gamma).collect();
    check_range(&xs, "power-ramp fit", 5, 2.0)?;
    if records.iter().any(|r| !(r.e_final > 0.0)) {
        return Err(Error::Analysis("power-ramp fit needs positive excitation densities".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = records.iter().map(|r| r.e_final.ln()).collect();
    let line = least_squares(&lx, &ly);
    Ok(AsymptoteFit {
        exponent: line.slope,
        stderr: line.stderr,
        prefactor: line.intercept.exp(),
        points: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t_i: f64, v_over_gamma: f64, e_final: f64) -> SweepRecord {
        SweepRecord {
            t_i,
            v_over_gamma,
            e_final,
            solver: SolverKind::Exact,
            model_tag: "m".into(),
            bath_tag: "b".into(),
        }
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn ti_collapse_exponents() {
        let recs = vec![record(1.0, 4.0, 0.1), record(2.0, 4.0, 0.2)];
        let ds = rescale_ti_collapse(&recs, 1.0, 1.0).unwrap();
        assert_eq!((ds.a, ds.b), (0.5, 0.5));
        assert_eq!(ds.families[0].key, 4.0);
        assert_eq!(ds.families[0].x, vec![0.5, 1.0]);
        assert_eq!(ds.families[0].y, vec![0.05, 0.1]);
        let lr = rescale_ti_collapse(&recs, 0.5, 1.0).unwrap();
        assert_eq!(lr.b, 1.0);
    }

    #[test]
    fn v_collapse_axes() {
        let recs = vec![record(2.0, 0.4, 0.1), record(2.0, 0.1, 0.05)];
        let ds = rescale_v_collapse(&recs, 1.0, 1.0).unwrap();
        assert_eq!(ds.families[0].x, vec![0.025, 0.1]);
        assert_eq!(ds.families[0].y, vec![0.025, 0.05]);
    }

    #[test]
    fn zero_exponents_leave_curves_untouched() {
        let pts = vec![(3.0, 0.2, 0.7), (3.0, 0.1, 0.5)];
        let ds = CollapseDataset::build(pts, 0.0, 0.0).unwrap();
        assert_eq!(ds.families[0].x, vec![0.1, 0.2]);
        assert_eq!(ds.families[0].y, vec![0.5, 0.7]);
    }

    #[test]
    fn build_rejects_empty_and_repeated() {
        assert!(CollapseDataset::build(Vec::new(), 1.0, 1.0).is_err());
        assert!(CollapseDataset::build(vec![(1.0, 0.5, 0.1), (1.0, 0.5, 0.2)], 1.0, 1.0).is_err());
    }

    #[test]
    fn quality_of_constructed_families() {
        let x = log_grid(0.01, 10.0, 12);
        let curve = |f: f64| x.iter().map(|&v| f * v / (1.0 + v)).collect::<Vec<_>>();
        let same = CollapseDataset {
            families: vec![
                Family { key: 1.0, x: x.clone(), y: curve(1.0) },
                Family { key: 2.0, x: x.clone(), y: curve(1.0) },
            ],
            a: 0.0,
            b: 0.0,
        };
        assert_eq!(collapse_quality(&same).unwrap(), 0.0);
        let offset = CollapseDataset {
            families: vec![
                Family { key: 1.0, x: x.clone(), y: curve(1.0) },
                Family { key: 2.0, x: x.clone(), y: curve(1.1) },
            ],
            a: 0.0,
            b: 0.0,
        };
        let q = collapse_quality(&offset).unwrap();
        assert!((q - 0.1 / 1.05).abs() < 1e-12, "{q}");
        let single = CollapseDataset { families: vec![offset.families[0].clone()], a: 0.0, b: 0.0 };
        assert_eq!(collapse_quality(&single).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_families_have_no_quality() {
        let ds = CollapseDataset {
            families: vec![
                Family { key: 1.0, x: vec![1.0, 2.0], y: vec![1.0, 2.0] },
                Family { key: 2.0, x: vec![3.0, 4.0], y: vec![3.0, 4.0] },
            ],
            a: 0.0,
            b: 0.0,
        };
        assert!(matches!(collapse_quality(&ds), Err(Error::Analysis(_))));
    }

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.1, 0.1, 2.0, 2.05];
        let p = Pchip::new(x.clone(), y.clone());
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let mut last = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = p.eval(i as f64 / 100.0);
            assert!(v >= last - 1e-15);
            last = v;
        }
    }

    #[test]
    fn power_law_fit_is_exact_on_synthetic_data() {
        let x = log_grid(1e-3, 1e-1, 9);
        let ds = CollapseDataset {
            families: vec![Family { key: 1.0, y: x.iter().map(|v| 0.2206 * v).collect(), x }],
            a: 0.0,
            b: 0.0,
        };
        let fit = fit_asymptote(&ds, Regime::Low, (0.0, 1.0)).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-10);
        assert!((fit.prefactor - 0.2206).abs() < 1e-10);
        assert_eq!(fit.points, 9);
    }

    #[test]
    fn plateau_fit_averages() {
        let x = log_grid(10.0, 1000.0, 6);
        let ds = CollapseDataset { families: vec![Family { key: 1.0, y: vec![0.0527; 6], x }], a: 0.0, b: 0.0 };
        let fit = fit_asymptote(&ds, Regime::High, default_window(Regime::High, 0.239)).unwrap();
        assert!((fit.prefactor - 0.0527).abs() < 1e-15);
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn fit_needs_dynamic_range() {
        let x = log_grid(1.0, 2.0, 6);
        let ds = CollapseDataset { families: vec![Family { key: 1.0, y: x.clone(), x }], a: 0.0, b: 0.0 };
        assert!(fit_asymptote(&ds, Regime::Low, (0.0, 10.0)).is_err());
        let few = log_grid(1.0, 100.0, 4);
        let ds = CollapseDataset { families: vec![Family { key: 1.0, y: few.clone(), x: few }], a: 0.0, b: 0.0 };
        assert!(fit_asymptote(&ds, Regime::Low, (0.0, 1e3)).is_err());
    }

    #[test]
    fn power_ramp_predictions() {
        assert_eq!(predicted_power_ramp_exponent(1.0, 1.0, 1.0), 0.5);
        assert!((predicted_power_ramp_exponent(1.0, 1.0, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((predicted_power_ramp_exponent(1.0, 1.0, 0.5) - 1.0 / 3.0).abs() < 1e-15);
        let recs: Vec<_> = log_grid(1e-4, 1e-1, 7).into_iter().map(|v| record(10.0, v, 0.3 * v.sqrt())).collect();
        let fit = power_ramp_exponent(&recs).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12);
        assert!(power_ramp_exponent(&recs[..4]).is_err());
    }

    #[test]
    fn solver_kind_round_trip() {
        for k in [SolverKind::Ode, SolverKind::Exact] {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
        assert!("both".parse::<SolverKind>().is_err());
    }
}
