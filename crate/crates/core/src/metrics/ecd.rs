use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::Channel;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{coherent_amplitudes, coherent_leak, extended_expectation, operator_power, HermitianOperator, DEFAULT_LEAK_TOLERANCE};
use crate::sampling::{dirichlet, ginibre, rng};
use crate::state::DensityMatrix;

/// Relative slack on `tr(S^{2α}ρ) ≤ E^{2α}` absorbing roundoff in the energy of boundary states.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

/// `tr(S^{2α} ρ_sys) ≤ E^{2α}` for a positive constraint operator `S`.
#[derive(Debug, Clone)]
pub struct EnergyConstraint {
    constraint_op: HermitianOperator,
    energy: f64,
    alpha: f64,
    powered: HermitianOperator,
    number_like: bool,
}

impl EnergyConstraint {
    pub fn new(constraint_op: HermitianOperator, energy: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !energy.is_finite() {
            return Err(invalid(format!("E must be finite, got {energy}")));
        }
        let min = constraint_op.min_eigenvalue()?;
        if min < -1e-12 * constraint_op.spectral_norm()?.max(1.0) {
            return Err(Error::Domain { eigenvalue: min });
        }
        if energy <= min {
            return Err(Error::Infeasible(format!("E = {energy} does not exceed the lowest constraint eigenvalue {min}")));
        }
        let powered = operator_power(&constraint_op, 2.0 * alpha)?;
        let m = constraint_op.matrix();
        let d = constraint_op.dim();
        let number_like = (0..d).all(|i| (0..d).all(|j| {
            let expected = if i == j { i as f64 } else { 0.0 };
            (m[[i, j]].re - expected).abs() <= 1e-12 && m[[i, j]].im.abs() <= 1e-12
        }));
        Ok(Self { constraint_op, energy, alpha, powered, number_like })
    }

    pub fn constraint_op(&self) -> &HermitianOperator {
        &self.constraint_op
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.constraint_op.dim()
    }

    /// `E^{2α}`.
    pub fn budget(&self) -> f64 {
        self.energy.powf(2.0 * self.alpha)
    }

    /// True when `S` is the number operator `diag(0, 1, ..., d−1)`.
    pub fn is_number_like(&self) -> bool {
        self.number_like
    }

    /// `tr((S^{2α} ⊗ I) X)`.
    pub fn energy_of(&self, x: &CMat, ancilla: usize) -> f64 {
        extended_expectation(self.powered.matrix(), x, ancilla)
    }

    pub fn admits(&self, x: &CMat, ancilla: usize) -> bool {
        self.energy_of(x, ancilla) <= self.budget() * (1.0 + ADMISSIBILITY_TOL)
    }

    /// Same constraint at a different energy.
    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        Self::new(self.constraint_op.clone(), energy, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Mixture of constraint eigenvectors.
    Mixture,
    /// Truncated coherent state.
    Coherent,
    /// Pure state on system ⊗ ancilla.
    Entangled,
}

/// A sampled input state on `system ⊗ ancilla`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub matrix: CMat,
    pub ancilla_dim: usize,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, Copy)]
pub struct EcdSettings {
    pub samples: usize,
    pub ancilla_dim: usize,
    pub seed: u64,
}

impl Default for EcdSettings {
    fn default() -> Self {
        Self { samples: 200, ancilla_dim: 4, seed: 0 }
    }
}

/// Best sampled input. The bound is a certified lower bound only.
#[derive(Debug, Clone)]
pub struct EcdEstimate {
    pub lower_bound: f64,
    pub witness_state: DensityMatrix,
    pub samples_used: usize,
    pub ancilla_dim: usize,
    pub kind: SampleKind,
}

impl EcdEstimate {
    /// Recomputes `‖(Λ_A ⊗ id − Λ_B ⊗ id)(witness)‖₁`.
    pub fn recheck(&self, a: &dyn Channel, t: f64, b: &dyn Channel, s: f64) -> Result<f64> {
        candidate_distance(a, t, b, s, self.witness_state.matrix(), self.ancilla_dim)
    }
}

/// Lowest constraint eigenvectors with `μᵢ = λᵢ^{2α}`.
struct LowSpace {
    mu: Vec<f64>,
    vectors: CMat,
}

fn low_space(c: &EnergyConstraint) -> Result<LowSpace> {
    let eig = c.constraint_op.eigensystem()?;
    let d = c.dim();
    let below = eig.values.iter().filter(|&&l| l <= c.energy).count();
    let m = (2 * c.energy.ceil().max(1.0) as usize).max(2 * below).max(2).min(d);
    let mu = eig.values[..m].iter().map(|l| l.max(0.0).powf(2.0 * c.alpha)).collect();
    Ok(LowSpace { mu, vectors: eig.vectors.slice(ndarray::s![.., ..m]).to_owned() })
}

/// Normalized `wᵢ e^{−κμᵢ}`.
fn tilted(w: &[f64], mu: &[f64], kappa: f64) -> Vec<f64> {
    let logs: Vec<f64> = w.iter().zip(mu).map(|(&wi, &m)| if wi > 0.0 { wi.ln() - kappa * m } else { f64::NEG_INFINITY }).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn mean(p: &[f64], mu: &[f64]) -> f64 {
    p.iter().zip(mu).map(|(a, b)| a * b).sum()
}

/// Exponential tilt of `w` meeting `Σ pᵢμᵢ ≤ budget`. With `on_boundary` the tilt may also push
/// weight upwards so the mean lands on the budget; otherwise admissible weights are left alone.
fn tilt_to_budget(w: &[f64], mu: &[f64], budget: f64, on_boundary: bool) -> Result<Vec<f64>> {
    let energy = |k: f64| mean(&tilted(w, mu, k), mu);
    let support: Vec<f64> = w.iter().zip(mu).filter(|(wi, _)| **wi > 0.0).map(|(_, m)| *m).collect();
    let (lo_mu, hi_mu) = support.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| (a.min(m), b.max(m)));
    if lo_mu > budget {
        return Err(Error::Infeasible("no sampled weight lies below the energy budget".into()));
    }
    let e0 = energy(0.0);
    if hi_mu - lo_mu <= 0.0 || (e0 <= budget && !on_boundary) {
        return Ok(tilted(w, mu, 0.0));
    }
    let unit = 1.0 / (hi_mu - lo_mu);
    // (lo, hi) brackets the root with energy(lo) > budget ≥ energy(hi)
    let (mut lo, mut hi);
    if e0 > budget {
        lo = 0.0;
        hi = unit;
        while energy(hi) > budget {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 * unit {
                break;
            }
        }
    } else {
        hi = 0.0;
        lo = -unit;
        while energy(lo) <= budget {
            hi = lo;
            lo *= 2.0;
            if lo < -1e6 * unit {
                // the budget sits above every sampled level
                return Ok(tilted(w, mu, hi));
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if energy(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(tilted(w, mu, hi))
}

fn sample_mixture<R: Rng>(low: &LowSpace, budget: f64, rng: &mut R) -> Result<Candidate> {
    let w = dirichlet(low.mu.len(), 0.5, rng);
    let p = tilt_to_budget(&w, &low.mu, budget, rng.random_bool(0.5))?;
    Ok(Candidate { matrix: linalg::hermitize(&linalg::reconstruct(&p, &low.vectors)), ancilla_dim: 1, kind: SampleKind::Mixture })
}

fn coherent_probs(r: f64, d: usize) -> Vec<f64> {
    let amp = coherent_amplitudes(crate::linalg::c(r), d);
    let p: Vec<f64> = amp.iter().map(|z| z.norm_sqr()).collect();
    let s: f64 = p.iter().sum();
    p.into_iter().map(|x| x / s).collect()
}

/// Truncated coherent state with `tr(N^{2α}ρ) ≤ u·E^{2α}` and leak within tolerance.
fn sample_coherent<R: Rng>(c: &EnergyConstraint, rng: &mut R) -> Result<Candidate> {
    let d = c.dim();
    let exponent = 2.0 * c.alpha;
    let levels: Vec<f64> = (0..d).map(|n| (n as f64).powf(exponent)).collect();
    let energy = |r: f64| mean(&coherent_probs(r, d), &levels);
    let target = if rng.random_bool(0.5) { c.budget() } else { c.budget() * rng.random_range(0.05..1.0) };
    let (mut lo, mut hi) = (0.0, d as f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if coherent_leak(mid, d) <= DEFAULT_LEAK_TOLERANCE {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_max = lo.sqrt();
    let radius = if energy(r_max) <= target {
        r_max
    } else {
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if energy(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let amp = coherent_amplitudes(num_complex::Complex64::from_polar(radius, phase), d);
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = amp.mapv(|z| z / norm);
    let col = v.view().insert_axis(ndarray::Axis(1));
    Ok(Candidate { matrix: col.dot(&linalg::dagger(&col.to_owned())), ancilla_dim: 1, kind: SampleKind::Coherent })
}

/// Pure state `Σ Cᵢₐ |vᵢ⟩|a⟩` on `system ⊗ C^k` with Schmidt vectors in the low space.
fn sample_entangled<R: Rng>(low: &LowSpace, budget: f64, ancilla_dim: usize, rng: &mut R) -> Result<Candidate> {
    let k = rng.random_range(1..=ancilla_dim);
    let mut coeffs = ginibre(low.mu.len(), k, rng);
    let w: Vec<f64> = coeffs.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
    let p = tilt_to_budget(&w, &low.mu, budget, rng.random_bool(0.5))?;
    for (i, mut row) in coeffs.rows_mut().into_iter().enumerate() {
        let f = if w[i] > 0.0 { (p[i] / w[i]).sqrt() } else { 0.0 };
        row.mapv_inplace(|z| z * f);
    }
    // row-major flattening of V·C puts system index j and ancilla index a at j·k + a
    let psi = low.vectors.dot(&coeffs);
    let col = psi.into_shape_with_order((low.vectors.nrows() * k, 1)).map_err(|e| Error::Linalg(e.to_string()))?;
    Ok(Candidate { matrix: col.dot(&linalg::dagger(&col)), ancilla_dim: k, kind: SampleKind::Entangled })
}

/// Draws `settings.samples` admissible inputs; sample `i` uses its own stream of `settings.seed`.
pub fn sample_pool(c: &EnergyConstraint, settings: &EcdSettings) -> Result<Vec<Candidate>> {
    if settings.samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    if settings.ancilla_dim == 0 {
        return Err(invalid("ancilla dimension must be at least 1"));
    }
    let low = low_space(c)?;
    let budget = c.budget();
    (0..settings.samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(settings.seed, i as u64);
            match i % 3 {
                0 => sample_mixture(&low, budget, &mut r),
                1 if c.number_like => sample_coherent(c, &mut r),
                _ => sample_entangled(&low, budget, settings.ancilla_dim, &mut r),
            }
        })
        .collect()
}

fn candidate_distance(a: &dyn Channel, t: f64, b: &dyn Channel, s: f64, x: &CMat, ancilla: usize) -> Result<f64> {
    let diff = a.apply_extended(x, t, ancilla)? - b.apply_extended(x, s, ancilla)?;
    linalg::trace_norm_hermitian(&diff)
}

/// `(Λ_t ⊗ id)` applied to every candidate.
pub fn apply_pool(ch: &dyn Channel, t: f64, pool: &[Candidate]) -> Result<Vec<CMat>> {
    pool.par_iter().map(|c| ch.apply_extended(&c.matrix, t, c.ancilla_dim)).collect()
}

/// Index and value of the largest `‖Aᵢ − Bᵢ‖₁`, ties going to the smallest index.
pub fn max_distance(outputs_a: &[CMat], outputs_b: &[CMat]) -> Result<(usize, f64)> {
    if outputs_a.len() != outputs_b.len() || outputs_a.is_empty() {
        return Err(invalid("output lists must be nonempty and of equal length"));
    }
    let dists: Vec<f64> = outputs_a.par_iter().zip(outputs_b).map(|(x, y)| linalg::trace_norm_hermitian(&(x - y))).collect::<Result<_>>()?;
    Ok(argmax(&dists))
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
}

/// Largest distance over the admissible members of `pool`.
pub fn evaluate_pool(a: &dyn Channel, t: f64, b: &dyn Channel, s: f64, c: &EnergyConstraint, pool: &[Candidate]) -> Result<EcdEstimate> {
    linalg::check_same_dim(a.dim(), b.dim())?;
    linalg::check_same_dim(a.dim(), c.dim())?;
    let admissible: Vec<&Candidate> = pool.iter().filter(|x| x.matrix.nrows() == c.dim() * x.ancilla_dim && c.admits(&x.matrix, x.ancilla_dim)).collect();
    if admissible.is_empty() {
        return Err(Error::Infeasible("no sampled state satisfies the energy constraint".into()));
    }
    let dists: Vec<f64> = admissible.par_iter().map(|x| candidate_distance(a, t, b, s, &x.matrix, x.ancilla_dim)).collect::<Result<_>>()?;
    let (i, v) = argmax(&dists);
    let w = admissible[i];
    Ok(EcdEstimate {
        lower_bound: v.min(2.0),
        witness_state: DensityMatrix::from_evolved(w.matrix.clone(), 1e-10)?,
        samples_used: admissible.len(),
        ancilla_dim: w.ancilla_dim,
        kind: w.kind,
    })
}

/// Sampled lower bound on `sup ‖(Λ_A(t) ⊗ id − Λ_B(s) ⊗ id)(ρ)‖₁` over inputs with
/// `tr(S^{2α}ρ_sys) ≤ E^{2α}`.
pub fn ecd_lower_bound(a: &dyn Channel, t: f64, b: &dyn Channel, s: f64, c: &EnergyConstraint, settings: &EcdSettings) -> Result<EcdEstimate> {
    evaluate_pool(a, t, b, s, c, &sample_pool(c, settings)?)
}

/// As [`ecd_lower_bound`], with `extra` candidates added to the sampled pool (kept only if admissible).
pub fn ecd_lower_bound_with_pool(a: &dyn Channel, t: f64, b: &dyn Channel, s: f64, c: &EnergyConstraint, settings: &EcdSettings, extra: &[Candidate]) -> Result<EcdEstimate> {
    let mut pool = sample_pool(c, settings)?;
    pool.extend_from_slice(extra);
    evaluate_pool(a, t, b, s, c, &pool)
}
