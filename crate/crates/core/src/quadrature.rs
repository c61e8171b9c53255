//! Adaptive Gauss–Kronrod (10/21-point) quadrature over finite and
//! semi-infinite ranges, plus Neumaier compensated summation.
//!
//! The integrator works on any [`QuadValue`], so several related integrals
//! (tensor components and their derivatives) share one set of nodes and one
//! error estimate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

/// A value that can be integrated: a vector space over `f64` with a norm.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, factor: f64) -> Self;
    /// Max-norm over components.
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
}

impl<T: QuadValue, const N: usize> QuadValue for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.add(b);
        }
        self
    }
    fn scale(mut self, factor: f64) -> Self {
        for a in self.iter_mut() {
            *a = a.scale(factor);
        }
        self
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(QuadValue::magnitude).fold(0.0, f64::max)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(QuadValue::is_finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 0.0,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Result<Panel<T>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut values = [T::zero(); 21];
    values[10] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        values[j] = f(center - dx);
        values[20 - j] = f(center + dx);
    }
    let mut kron = values[10].scale(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let pair = values[j].add(values[20 - j]);
        kron = kron.add(pair.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG[j / 2]));
        }
    }
    if !kron.is_finite() {
        return Err(Error::Quadrature {
            estimate: f64::NAN,
            error_bound: f64::INFINITY,
        });
    }
    // QUADPACK-style error rescaling on the component max-norm.
    let mean = kron.scale(0.5);
    let mut resasc = WGK[10] * values[10].add(mean.scale(-1.0)).magnitude();
    let mut resabs = WGK[10] * values[10].magnitude();
    for j in 0..10 {
        resasc +=
            WGK[j] * (values[j].add(mean.scale(-1.0)).magnitude() + values[20 - j].add(mean.scale(-1.0)).magnitude());
        resabs += WGK[j] * (values[j].magnitude() + values[20 - j].magnitude());
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let mut error = kron.add(gauss.scale(-1.0)).scale(half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > error {
        error = floor;
    }
    Ok(Panel {
        a,
        b,
        value: kron.scale(half),
        error,
    })
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// the given panels and bisecting the panel with the largest error until the
/// total error estimate drops below `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<T, F>(mut f: F, breakpoints: &[f64], tol: &Tolerance) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidInput("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1])?);
            evaluations += 21;
        }
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((T::zero(), 0.0), |(v, e), p| (v.add(p.value), e + p.error));
        let target = tol.abs.max(tol.rel * value.magnitude());
        if error <= target {
            // Re-sum in panel order so the result does not depend on heap layout.
            let mut panels: Vec<_> = heap.into_vec();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = panels.iter().fold(T::zero(), |v, p| v.add(p.value));
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= tol.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: value.magnitude(),
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature {
                estimate: value.magnitude(),
                error_bound: error,
            });
        }
        heap.push(kronrod(&mut f, worst.a, mid)?);
        heap.push(kronrod(&mut f, mid, worst.b)?);
        evaluations += 42;
    }
}

/// Integrates `f` over `[breakpoints[0], ∞)`. The last breakpoint `b` starts
/// a tail panel mapped through `x = b + scale·t/(1 − t)`, `t ∈ [0, 1)`.
pub fn integrate_semi_infinite<T, F>(
    mut f: F,
    breakpoints: &[f64],
    tail_scale: f64,
    tol: &Tolerance,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let (&last, _) = breakpoints
        .split_last()
        .ok_or_else(|| Error::InvalidInput("need at least one breakpoint".into()))?;
    let finite_len = breakpoints.len();
    // Parameterize the finite part on [0, n-1] (panel index + fraction) and the
    // tail on [n-1, n), so one adaptive run controls the global error.
    let map = |s: f64| -> (f64, f64) {
        let k = s.floor() as usize;
        if k + 1 < finite_len {
            let (a, b) = (breakpoints[k], breakpoints[k + 1]);
            let frac = s - k as f64;
            (a + frac * (b - a), b - a)
        } else {
            let t = s - (finite_len - 1) as f64;
            let one_minus = 1.0 - t;
            (last + tail_scale * t / one_minus, tail_scale / (one_minus * one_minus))
        }
    };
    let nodes: Vec<f64> = (0..=finite_len).map(|k| k as f64).collect();
    integrate(
        |s| {
            let (x, jac) = map(s);
            if jac == 0.0 {
                T::zero()
            } else {
                f(x).scale(jac)
            }
        },
        &nodes,
        tol,
    )
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_is_exact_for_high_degree_polynomials() {
        for deg in 0..=31 {
            let mut f = |x: f64| x.powi(deg);
            let p = kronrod(&mut f, 0.0, 1.0).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((p.value - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let tol = Tolerance::default();
        let r = integrate(|x: f64| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], &tol).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let tol = Tolerance {
            rel: 1e-12,
            ..Default::default()
        };
        let r = integrate_semi_infinite(|x: f64| x * x * (-2.0 * x).exp(), &[0.0, 1.0, 4.0], 1.0, &tol).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vector_valued_integrand() {
        let tol = Tolerance::default();
        let r = integrate(
            |x: f64| [Complex64::new(x.cos(), x.sin()), Complex64::new(1.0, 0.0)],
            &[0.0, std::f64::consts::PI],
            &tol,
        )
        .unwrap();
        assert!((r.value[0] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((r.value[1].re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn refinement_limit_reports_estimate() {
        let tol = Tolerance {
            rel: 1e-15,
            abs: 0.0,
            max_subdivisions: 3,
        };
        let err = integrate(|x: f64| x.abs().sqrt().recip(), &[0.0, 1.0], &tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
