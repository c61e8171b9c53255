//! Internal-state evolution under the rate equations
//! `σ̇_nn = −Γ_n σ_nn + Σ_k Γ_kn σ_kk`, with coherence magnitudes decaying
//! at `(Γ_m + Γ_n)/2`.
//!
//! Populations are propagated exactly through an eigendecomposition of the
//! rate matrix. When the rates obey detailed balance with a strictly
//! positive stationary state the matrix is symmetrized and diagonalized
//! orthogonally; otherwise a real Schur decomposition supplies the
//! spectrum and eigenvectors come from null spaces.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::atom::DressedLevels;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InternalState {
    /// Seconds.
    pub time: f64,
    pub populations: Vec<f64>,
    /// `|σ_mn|`, row-major `n×n`; the diagonal is unused.
    pub coherences: Option<Vec<f64>>,
}

impl InternalState {
    pub fn ground(levels: usize) -> Self {
        Self::pure(levels, 0)
    }

    pub fn pure(levels: usize, n: usize) -> Self {
        let mut populations = vec![0.0; levels];
        populations[n] = 1.0;
        Self {
            time: 0.0,
            populations,
            coherences: None,
        }
    }
}

/// Generator `M` of `σ̇ = Mσ`.
pub fn rate_matrix(dressed: &DressedLevels) -> DMatrix<f64> {
    let n = dressed.len();
    DMatrix::from_fn(n, n, |i, k| {
        if i == k {
            -dressed.total_rate(i)
        } else {
            dressed.rate(k, i)
        }
    })
}

const EIGEN_TOL: f64 = 1e-10;

/// Spectral form of `M`: `σ(t) = V e^{Λt} V⁻¹ σ(0)`.
enum Propagator {
    Spectral {
        values: DVector<f64>,
        vectors: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
    Zero,
}

impl Propagator {
    fn new(m: &DMatrix<f64>, dressed: &DressedLevels) -> Result<Self> {
        let n = m.nrows();
        let scale = m.amax();
        if scale == 0.0 {
            return Ok(Propagator::Zero);
        }
        if let Some(p) = Self::symmetrized(m, dressed, scale) {
            return Ok(p);
        }
        let schur = Schur::new(m.clone());
        let values = schur
            .eigenvalues()
            .ok_or_else(|| Error::Model("rate matrix has complex eigenvalues".into()))?;
        if let Some(v) = values.iter().find(|v| **v > EIGEN_TOL * scale) {
            return Err(Error::Model(format!("rate matrix has positive eigenvalue {v:e}")));
        }
        // Group eigenvalues and take null spaces of M − λI.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        let mut clusters: Vec<(f64, usize)> = Vec::new();
        for &i in &order {
            match clusters.last_mut() {
                Some((lam, count)) if (values[i] - *lam).abs() <= 1e-8 * scale => *count += 1,
                _ => clusters.push((values[i], 1)),
            }
        }
        let mut vals = Vec::with_capacity(n);
        let mut cols = Vec::with_capacity(n);
        for (lam, count) in clusters {
            let shifted = m - DMatrix::identity(n, n) * lam;
            let svd = shifted.svd(false, true);
            let vt = svd.v_t.expect("requested V^T");
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]));
            for &j in idx.iter().take(count) {
                if svd.singular_values[j] > 1e-8 * scale {
                    return Err(Error::Model("rate matrix is defective".into()));
                }
                vals.push(lam);
                cols.push(vt.row(j).transpose());
            }
        }
        let vectors = DMatrix::from_columns(&cols);
        let inverse = vectors
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Model("rate matrix eigenvectors are singular".into()))?;
        Ok(Propagator::Spectral {
            values: DVector::from_vec(vals),
            vectors,
            inverse,
        })
    }

    fn symmetrized(m: &DMatrix<f64>, dressed: &DressedLevels, scale: f64) -> Option<Self> {
        let pi = steady_state(dressed).ok()?;
        if pi.iter().any(|p| *p <= 0.0) {
            return None;
        }
        let n = m.nrows();
        let sq: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
        let s = DMatrix::from_fn(n, n, |i, k| m[(i, k)] * sq[k] / sq[i]);
        if (&s - s.transpose()).amax() > EIGEN_TOL * scale {
            return None;
        }
        let sym = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        if let Some(v) = eig.eigenvalues.iter().find(|v| **v > EIGEN_TOL * scale) {
            let _ = v;
            return None;
        }
        // M = D^{1/2} S D^{-1/2}, S = Q Λ Qᵀ  ⇒  V = D^{1/2} Q, V⁻¹ = Qᵀ D^{-1/2}
        let vectors = DMatrix::from_fn(n, n, |i, j| sq[i] * eig.eigenvectors[(i, j)]);
        let inverse = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(j, i)] / sq[j]);
        Some(Propagator::Spectral {
            values: eig.eigenvalues,
            vectors,
            inverse,
        })
    }

    fn apply(&self, p0: &DVector<f64>, dt: f64) -> DVector<f64> {
        match self {
            _ if dt == 0.0 => p0.clone(),
            Propagator::Zero => p0.clone(),
            Propagator::Spectral {
                values,
                vectors,
                inverse,
            } => {
                let c = inverse * p0;
                let scaled = DVector::from_fn(c.len(), |j, _| c[j] * (values[j].min(0.0) * dt).exp());
                vectors * scaled
            }
        }
    }
}

/// Evolves `initial` to every time in `t_grid`.
pub fn evolve(initial: &InternalState, dressed: &DressedLevels, t_grid: &[f64]) -> Result<Vec<InternalState>> {
    let n = dressed.len();
    if initial.populations.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} populations for {} levels",
            initial.populations.len(),
            n
        )));
    }
    if initial.populations.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidInput("populations must be finite and >= 0".into()));
    }
    if let Some(c) = &initial.coherences {
        if c.len() != n * n {
            return Err(Error::InvalidInput("coherence matrix must be n x n".into()));
        }
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("time grid must be ascending".into()));
    }
    if let Some(&t0) = t_grid.first() {
        if t0 < initial.time {
            return Err(Error::InvalidInput("time grid starts before the initial state".into()));
        }
    }
    let m = rate_matrix(dressed);
    let prop = Propagator::new(&m, dressed)?;
    let p0 = DVector::from_vec(initial.populations.clone());
    Ok(t_grid
        .iter()
        .map(|&t| {
            let dt = t - initial.time;
            let p = prop.apply(&p0, dt);
            let populations = p
                .iter()
                .map(|v| if *v < 0.0 && *v > -1e-12 { 0.0 } else { *v })
                .collect();
            let coherences = initial.coherences.as_ref().map(|c| {
                (0..n * n)
                    .map(|idx| {
                        let (i, k) = (idx / n, idx % n);
                        let decay = 0.5 * (dressed.total_rate(i) + dressed.total_rate(k));
                        c[idx] * (-decay * dt).exp()
                    })
                    .collect()
            });
            InternalState {
                time: t,
                populations,
                coherences,
            }
        })
        .collect())
}

fn components(dressed: &DressedLevels) -> Vec<Vec<usize>> {
    let n = dressed.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for k in 0..n {
                if !seen[k] && (dressed.rate(i, k) > 0.0 || dressed.rate(k, i) > 0.0) {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Normalized null vector of the rate matrix.
pub fn steady_state(dressed: &DressedLevels) -> Result<Vec<f64>> {
    let n = dressed.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let comps = components(dressed);
    if comps.len() > 1 {
        return Err(Error::DisconnectedLevels { components: comps });
    }
    let absorbing: Vec<usize> = (0..n).filter(|&i| dressed.total_rate(i) == 0.0).collect();
    match absorbing.len() {
        0 => {}
        1 => {
            let mut p = vec![0.0; n];
            p[absorbing[0]] = 1.0;
            return Ok(p);
        }
        _ => {
            return Err(Error::DisconnectedLevels {
                components: absorbing.into_iter().map(|i| vec![i]).collect(),
            })
        }
    }
    // Null vector of the embedded jump chain: (M D⁻¹) y = 0, σ = D⁻¹ y.
    let m = rate_matrix(dressed);
    let scaled = DMatrix::from_fn(n, n, |i, k| m[(i, k)] / dressed.total_rate(k));
    let svd = scaled.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (j, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let y = vt.row(j);
    let sign = if y.sum() < 0.0 { -1.0 } else { 1.0 };
    let mut p: Vec<f64> = (0..n).map(|i| (sign * y[i] / dressed.total_rate(i)).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{thermal_state, LevelSystem};
    use crate::constants::{HBAR, KB};
    use crate::thermal::{photon_number, Temperature};

    fn two_level_rates(w: f64, temp: f64, gamma0: f64) -> (LevelSystem, DressedLevels) {
        let ls = LevelSystem::two_level(w, 1e-29).unwrap();
        let nbar = photon_number(w, Temperature::new(temp).unwrap()).unwrap();
        let d = DressedLevels::from_parts(
            &ls,
            vec![0.0, 0.0],
            vec![vec![0.0, gamma0 * nbar], vec![gamma0 * (nbar + 1.0), 0.0]],
        )
        .unwrap();
        (ls, d)
    }

    #[test]
    fn zero_rates_freeze_populations() {
        let ls = LevelSystem::two_level(1e15, 1e-29).unwrap();
        let d = DressedLevels::bare(&ls);
        let init = InternalState {
            time: 0.0,
            populations: vec![0.3, 0.7],
            coherences: None,
        };
        let out = evolve(&init, &d, &[0.0, 1.0, 1e6]).unwrap();
        for s in out {
            assert_eq!(s.populations, vec![0.3, 0.7]);
        }
    }

    #[test]
    fn two_level_relaxation_closed_form() {
        let (_, d) = two_level_rates(1.32e11, 300.0, 2.0);
        let nbar = photon_number(1.32e11, Temperature::new(300.0).unwrap()).unwrap();
        let sum = d.total_rate(0) + d.total_rate(1);
        let inf = nbar / (2.0 * nbar + 1.0);
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.2 / sum).collect();
        let out = evolve(&InternalState::ground(2), &d, &grid).unwrap();
        for s in &out {
            let expected = inf * (1.0 - (-sum * s.time).exp());
            assert!((s.populations[1] - expected).abs() < 1e-12);
            assert!((s.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_two_level_and_zero_temperature() {
        let (_, d) = two_level_rates(1.15e14, 300.0, 5.0);
        let nbar = photon_number(1.15e14, Temperature::new(300.0).unwrap()).unwrap();
        let p = steady_state(&d).unwrap();
        assert!((p[0] - (nbar + 1.0) / (2.0 * nbar + 1.0)).abs() < 1e-12);
        assert!((p[1] - nbar / (2.0 * nbar + 1.0)).abs() < 1e-12);
        let (_, cold) = two_level_rates(1.15e14, 0.0, 5.0);
        assert_eq!(steady_state(&cold).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_temperature_decay() {
        let (_, d) = two_level_rates(1e15, 0.0, 3.0);
        let out = evolve(&InternalState::pure(2, 1), &d, &[0.0, 0.5, 1.0]).unwrap();
        for s in out {
            assert!((s.populations[1] - (-3.0 * s.time).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn disconnected_levels_are_reported() {
        let ls = LevelSystem::new(
            vec![0.0, 1e-20, 2e-20],
            vec!["a".into(), "b".into(), "c".into()],
            &[],
            true,
        )
        .unwrap();
        let d = DressedLevels::from_parts(
            &ls,
            vec![0.0; 3],
            vec![vec![0.0, 1.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
        )
        .unwrap();
        let err = steady_state(&d).unwrap_err();
        assert_eq!(
            err,
            Error::DisconnectedLevels {
                components: vec![vec![0, 1], vec![2]]
            }
        );
    }

    #[test]
    fn steady_state_matches_thermal_state() {
        let temp = Temperature::new(400.0).unwrap();
        let ws = [0.0, 3e13, 7e13];
        let ls = LevelSystem::new(
            ws.iter().map(|w| HBAR * w).collect(),
            vec!["a".into(), "b".into(), "c".into()],
            &[],
            true,
        )
        .unwrap();
        let boltz = |i: usize, k: usize| (-(HBAR * (ws[k] - ws[i])) / (KB * 400.0)).exp();
        // downward rates arbitrary; upward fixed by detailed balance
        let down = [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.5, 7.0, 0.0]];
        let mut r = vec![vec![0.0; 3]; 3];
        for i in 0..3 {
            for k in 0..i {
                r[i][k] = down[i][k];
                r[k][i] = down[i][k] * boltz(k, i);
            }
        }
        let d = DressedLevels::from_parts(&ls, vec![0.0; 3], r).unwrap();
        let p = steady_state(&d).unwrap();
        let q = thermal_state(&d, temp);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coherences_decay() {
        let (_, d) = two_level_rates(1e15, 0.0, 2.0);
        let init = InternalState {
            time: 0.0,
            populations: vec![0.5, 0.5],
            coherences: Some(vec![0.0, 0.5, 0.5, 0.0]),
        };
        let out = evolve(&init, &d, &[0.0, 1.0]).unwrap();
        let c = out[1].coherences.as_ref().unwrap();
        assert!((c[1] - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_descending_grid() {
        let (_, d) = two_level_rates(1e15, 300.0, 1.0);
        assert!(evolve(&InternalState::ground(2), &d, &[1.0, 0.5]).is_err());
    }
}
