//! Globally adaptive 21-point Gauss-Kronrod quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate and the
//! worst one is bisected until the summed error meets the tolerance. The
//! refinement order depends only on the integrand values, so results are
//! reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_602_935,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights at `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Convergence target: the summed error estimate must satisfy
/// `error <= max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            // Tie-break on position so the heap order is total.
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// One 21-point Kronrod estimate over `[a, b]` with QUADPACK's error scaling.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, node) in XGK.iter().take(10).enumerate() {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let abs_sum = abs_sum * scale;
    let asc = asc * scale;
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (value, err)
}

/// Integrates `f` over the partition given by `breakpoints` (at least two,
/// increasing), refining adaptively until `tol` is met or `max_segments`
/// is exhausted.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    tol: Tolerance,
    max_segments: usize,
) -> Result<Estimate> {
    if breakpoints.len() < 2 {
        return Err(Error::invalid("quadrature needs at least two breakpoints"));
    }
    let mut heap = BinaryHeap::with_capacity(max_segments + breakpoints.len());
    let mut evaluations = 0usize;
    for pair in breakpoints.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if lo == hi {
            continue;
        }
        let (value, error) = gauss_kronrod(&mut f, lo, hi);
        evaluations += 21;
        heap.push(Segment { lo, hi, value, error });
    }
    loop {
        let (value, error) = totals(&heap);
        if !value.is_finite() {
            let worst = heap.peek().copied();
            return Err(nonconvergence(worst, error));
        }
        if error <= tol.target(value) || heap.is_empty() {
            return Ok(Estimate { value, error, evaluations });
        }
        if heap.len() >= max_segments {
            return Err(nonconvergence(heap.peek().copied(), error));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            return Err(nonconvergence(Some(worst), error));
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.lo, mid);
        let (v2, e2) = gauss_kronrod(&mut f, mid, worst.hi);
        evaluations += 42;
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
}

/// Integrates `f` over `[a, inf)` through `x = a + scale * u / (1 - u)`.
/// The Kronrod nodes never touch `u = 1`, so only decay of `f` is needed.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
    max_segments: usize,
) -> Result<Estimate> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid(format!("mapping scale must be positive, got {scale}")));
    }
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let x = a + scale * u / one_minus;
        let jac = scale / (one_minus * one_minus);
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * jac
        }
    };
    // Breakpoints at x - a = scale * {1/3, 1, 3, 9, 27}.
    let breaks = [0.0, 0.25, 0.5, 0.75, 0.9, 27.0 / 28.0, 1.0];
    integrate(mapped, &breaks, tol, max_segments)
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    // Sum in position order for a result independent of heap layout.
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

fn nonconvergence(worst: Option<Segment>, total_error: f64) -> Error {
    match worst {
        Some(s) => Error::Quadrature { lo: s.lo, hi: s.hi, error: s.error },
        None => Error::Quadrature { lo: f64::NAN, hi: f64::NAN, error: total_error },
    }
}
