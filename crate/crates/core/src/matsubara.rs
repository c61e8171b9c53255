//! Matsubara sums `Σ'_N f(ξ_N)` and their zero-temperature counterpart
//! `(ħ/2πk_BT) ∫ dξ f(ξ)`.
//!
//! Terms are evaluated in batches of growing size in parallel, then folded
//! in ascending `N` with compensated accumulation; truncation is decided
//! during the fold. The result is therefore independent of the thread count.

use rayon::prelude::*;

use crate::quadrature::{integrate_semi_infinite, NeumaierSum, Tolerance};
use crate::thermal::{matsubara_frequency, Temperature};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// A term counts as negligible when `|term| ≤ tol·|partial sum|`.
    pub tol: f64,
    /// Number of consecutive negligible terms required to stop.
    pub confirmations: usize,
    pub n_max: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            confirmations: 3,
            n_max: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum<const K: usize> {
    /// `Σ'_N term_N` per channel (the `N = 0` term carries weight ½).
    pub values: [f64; K],
    /// Number of terms folded into the sum.
    pub terms: usize,
}

const FIRST_BATCH: usize = 8;
const MAX_BATCH: usize = 512;

/// Sums `Σ'_N term(N, ξ_N)` over `K` channels with a joint stopping rule.
///
/// `term` receives `ξ_0 = 0` for `N = 0` and must return the appropriate
/// limit there.
pub fn matsubara_sum<const K: usize, F>(
    temperature: Temperature,
    opts: &SeriesOptions,
    operation: &'static str,
    term: F,
) -> Result<SeriesSum<K>>
where
    F: Fn(usize, f64) -> Result<[f64; K]> + Sync,
{
    if temperature.is_zero() {
        return Err(Error::Domain(format!("{operation}: Matsubara sum needs T > 0")));
    }
    let mut sums = [NeumaierSum::new(); K];
    let mut quiet = 0usize;
    let mut next = 0usize;
    let mut batch = FIRST_BATCH;
    let mut last_ratio = f64::INFINITY;
    while next < opts.n_max {
        let end = (next + batch).min(opts.n_max);
        let terms: Vec<[f64; K]> = (next..end)
            .into_par_iter()
            .map(|n| term(n, matsubara_frequency(n, temperature)?))
            .collect::<Result<_>>()?;
        for (offset, t) in terms.into_iter().enumerate() {
            let n = next + offset;
            let weight = if n == 0 { 0.5 } else { 1.0 };
            let mut negligible = true;
            last_ratio = 0.0;
            for (s, v) in sums.iter_mut().zip(t) {
                let v = weight * v;
                if !v.is_finite() {
                    return Err(Error::Domain(format!("{operation}: non-finite term at N = {n}")));
                }
                s.add(v);
                let total = s.value().abs();
                if v.abs() > opts.tol * total {
                    negligible = false;
                }
                if total > 0.0 {
                    last_ratio = last_ratio.max(v.abs() / total);
                }
            }
            if negligible {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= opts.confirmations {
                return Ok(SeriesSum {
                    values: sums.map(|s| s.value()),
                    terms: n + 1,
                });
            }
        }
        next = end;
        batch = (batch * 2).min(MAX_BATCH);
    }
    Err(Error::Convergence {
        operation,
        terms: opts.n_max,
        partial: sums[0].value(),
        achieved: last_ratio,
    })
}

/// `∫₀^∞ dξ f(ξ)` for a Matsubara-type integrand, with panel boundaries
/// placed geometrically around each characteristic frequency in `scales`.
pub fn frequency_integral<const K: usize, F>(scales: &[f64], tol: &Tolerance, f: F) -> Result<[f64; K]>
where
    F: Fn(f64) -> Result<[f64; K]>,
{
    let mut breaks: Vec<f64> = vec![0.0];
    for &s in scales.iter().filter(|s| s.is_finite() && **s > 0.0) {
        for j in -6..=3 {
            breaks.push(s * 4f64.powi(j));
        }
    }
    if breaks.len() == 1 {
        return Err(Error::InvalidInput("frequency integral needs a positive scale".into()));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tail = *breaks.last().expect("non-empty");
    let mut failure = None;
    let r = integrate_semi_infinite(
        |xi| match f(xi) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; K]
            }
        },
        &breaks,
        tail,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{HBAR, KB, TWO_PI};

    #[test]
    fn geometric_series_with_half_weight() {
        let temp = Temperature::new(300.0).unwrap();
        let opts = SeriesOptions {
            tol: 1e-15,
            ..Default::default()
        };
        let r = matsubara_sum(temp, &opts, "test", |n, _| Ok([0.5f64.powi(n as i32)])).unwrap();
        // 1/2 + (2 - 1) = 1.5
        assert!((r.values[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn replacement_rule_for_exponential() {
        // 2πk_BT/ħ Σ' e^{-ξ_N/s} → ∫ e^{-ξ/s} dξ = s as T → 0
        let temp = Temperature::new(1.0).unwrap();
        let s = 1e14;
        let opts = SeriesOptions {
            tol: 1e-14,
            ..Default::default()
        };
        let sum = matsubara_sum(temp, &opts, "test", |_, xi| Ok([(-xi / s).exp()])).unwrap();
        let spacing = TWO_PI * KB / HBAR;
        let integral = frequency_integral(&[s], &Tolerance::default(), |xi| Ok([(-xi / s).exp()])).unwrap();
        assert!((integral[0] - s).abs() / s < 1e-10);
        assert!((sum.values[0] * spacing - s).abs() / s < 1e-3);
    }

    #[test]
    fn truncation_limit_is_reported() {
        let temp = Temperature::new(300.0).unwrap();
        let opts = SeriesOptions {
            n_max: 50,
            ..Default::default()
        };
        let err = matsubara_sum(temp, &opts, "harmonic", |n, _| Ok([1.0 / (n as f64 + 1.0)])).unwrap_err();
        assert!(matches!(
            err,
            Error::Convergence {
                operation: "harmonic",
                terms: 50,
                ..
            }
        ));
    }

    #[test]
    fn zero_sum_terminates() {
        let temp = Temperature::new(300.0).unwrap();
        let r = matsubara_sum(temp, &SeriesOptions::default(), "zero", |_, _| Ok([0.0])).unwrap();
        assert_eq!(r.values[0], 0.0);
        assert_eq!(r.terms, 3);
    }
}
