use serde::Serialize;

use super::Spectrum;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::operators::HermitianOperator;
use crate::state::DensityMatrix;

/// Relative bound on the omitted part of every partition moment.
pub const TAIL_TOL: f64 = 1e-14;
/// Term budget for a single partition sum.
pub const MAX_TERMS: usize = 50_000_000;
/// Gibbs weight allowed on the top level of a truncated operator.
const TOP_WEIGHT_TOL: f64 = 1e-12;
const TAIL_CHECK_EVERY: usize = 64;
/// Below this value of `β(λ−λ₀)` the tail cannot be small enough, so it is not checked.
const TAIL_CHECK_EXPONENT: f64 = 30.0;

/// `Z(β) = Σ e^{−βλᵢ}` as `log_z`, with the number of summed terms and a bound on the
/// omitted mass relative to `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionSum {
    pub log_z: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Moments `Σ wᵢλᵢᵏ` for `k = 0, 1, 2` with `wᵢ = e^{−β(λᵢ−λ₀)}`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    m0: f64,
    m1: f64,
    m2: f64,
    terms: usize,
    tail0: f64,
}

impl Moments {
    fn mean(&self) -> f64 {
        self.m1 / self.m0
    }

    fn variance(&self) -> f64 {
        (self.m2 / self.m0 - self.mean().powi(2)).max(0.0)
    }
}

fn moments(spec: &Spectrum, beta: f64) -> Result<Moments> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be positive and finite, got {beta}")));
    }
    let l0 = spec.min_eigenvalue();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    let mut i = 0;
    loop {
        let Some(lam) = spec.eigenvalue(i) else {
            // end of the listed values: finite spectrum, or the tail law covers the rest
            let tail0 = match spec.tail_model() {
                None => 0.0,
                Some(tm) => {
                    let bounds = [0u32, 1, 2].map(|k| tm.law.tail_moment(i.max(tm.valid_from), beta, l0, k));
                    match bounds {
                        [Some(t0), Some(t1), Some(t2)] if t0 <= TAIL_TOL * m0 && t1 <= TAIL_TOL * m1 && t2 <= TAIL_TOL * m2 => t0 / m0,
                        _ => return Err(Error::Convergence(format!("listed spectrum ({i} values) is too short for beta = {beta}"))),
                    }
                }
            };
            return Ok(Moments { m0, m1, m2, terms: i, tail0 });
        };
        let w = (-beta * (lam - l0)).exp();
        m0 += w;
        m1 += w * lam;
        m2 += w * lam * lam;
        i += 1;
        if i % TAIL_CHECK_EVERY == 0 && beta * (lam - l0) >= TAIL_CHECK_EXPONENT {
            if let Some(tm) = spec.tail_model() {
                if i >= tm.valid_from {
                    let t = [0u32, 1, 2].map(|k| tm.law.tail_moment(i, beta, l0, k));
                    if let [Some(t0), Some(t1), Some(t2)] = t {
                        if t0 <= TAIL_TOL * m0 && t1 <= TAIL_TOL * m1 && t2 <= TAIL_TOL * m2 {
                            return Ok(Moments { m0, m1, m2, terms: i, tail0: t0 / m0 });
                        }
                    }
                }
            }
        }
        if i >= MAX_TERMS {
            return Err(Error::Convergence(format!("partition sum at beta = {beta} needs more than {MAX_TERMS} terms")));
        }
    }
}

pub fn partition_function(spec: &Spectrum, beta: f64) -> Result<PartitionSum> {
    let m = moments(spec, beta)?;
    Ok(PartitionSum { log_z: -beta * spec.min_eigenvalue() + m.m0.ln(), terms: m.terms, tail_bound: m.tail0 })
}

/// `tr(e^{−βH}H)/tr(e^{−βH})`, strictly decreasing in `β`.
pub fn mean_energy(spec: &Spectrum, beta: f64) -> Result<f64> {
    Ok(moments(spec, beta)?.mean())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsSolution {
    pub energy: f64,
    pub beta: f64,
    pub log_z: f64,
    /// `log Z + βE`.
    pub entropy: f64,
    pub truncation_terms: usize,
    pub tail_bound: f64,
}

/// Root of `tr(e^{−βH}(H − E)) = 0` by bracketing and safeguarded Newton steps.
pub fn solve_beta(spec: &Spectrum, energy: f64) -> Result<GibbsSolution> {
    let l0 = spec.min_eigenvalue();
    if !(energy > l0) || !energy.is_finite() {
        return Err(Error::Infeasible(format!("E = {energy} must exceed the lowest eigenvalue {l0}")));
    }
    if spec.is_finite() {
        let n = spec.listed_len().unwrap_or(0);
        let top_mean = (0..n).filter_map(|i| spec.eigenvalue(i)).sum::<f64>() / n as f64;
        if energy >= top_mean {
            return Err(Error::Infeasible(format!("E = {energy} is not below the infinite-temperature mean {top_mean} of the finite spectrum")));
        }
    }
    let mean = |b: f64| mean_energy(spec, b);
    let mut hi = 1.0 / (energy - l0);
    let mut guard = 0;
    while mean(hi)? >= energy {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence("could not bracket beta from above".into()));
        }
    }
    let mut lo = hi;
    guard = 0;
    loop {
        lo /= 2.0;
        if mean(lo)? > energy {
            break;
        }
        hi = lo;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence("could not bracket beta from below".into()));
        }
    }
    // mean(lo) > E > mean(hi); Newton in ln β, falling back to geometric bisection
    let tol = 1e-12 * energy.abs().max(1.0);
    // iterate past the acceptance tolerance; Newton steps are cheap near the root
    let target = 1e-3 * tol;
    let mut beta = (lo * hi).sqrt();
    let mut m = moments(spec, beta)?;
    for _ in 0..200 {
        let r = m.mean() - energy;
        if r.abs() <= target {
            break;
        }
        if r > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        let slope = beta * m.variance();
        let mut next = if slope > 0.0 { beta * (r / slope).exp() } else { (lo * hi).sqrt() };
        if !(next > lo && next < hi) {
            next = (lo * hi).sqrt();
        }
        if next == beta || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        beta = next;
        m = moments(spec, beta)?;
    }
    let residual = (m.mean() - energy).abs();
    if residual > tol {
        return Err(Error::Convergence(format!("beta residual {residual:e} at E = {energy}")));
    }
    let log_z = -beta * l0 + m.m0.ln();
    Ok(GibbsSolution { energy, beta, log_z, entropy: log_z + beta * energy, truncation_terms: m.terms, tail_bound: m.tail0 })
}

/// `S(γ(E)) = log Z(β(E)) + β(E)E`.
pub fn gibbs_entropy(spec: &Spectrum, energy: f64) -> Result<f64> {
    Ok(solve_beta(spec, energy)?.entropy)
}

/// `e^{−β(E)H}/Z` on the truncation given by `op`, whose top level must carry negligible weight.
pub fn gibbs_state(op: &HermitianOperator, energy: f64) -> Result<DensityMatrix> {
    let eig = op.eigensystem()?;
    let spec = Spectrum::from_values(eig.values.iter().map(|&v| v.max(0.0)).collect())?;
    let sol = solve_beta(&spec, energy)?;
    let l0 = eig.values[0];
    let w: Vec<f64> = eig.values.iter().map(|&v| (-sol.beta * (v - l0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let top = *p.last().expect("nonempty");
    if top > TOP_WEIGHT_TOL {
        let d = p.len();
        let spacing = (eig.values[d - 1] - l0) / (d as f64 - 1.0).max(1.0);
        let needed = l0 + (z.ln() - TOP_WEIGHT_TOL.ln()) / sol.beta;
        let required_dim = if spacing > 0.0 { ((needed - l0) / spacing).ceil() as usize + 1 } else { d + 1 };
        return Err(Error::TruncationTooSmall { required_dim: required_dim.max(d + 1), leak: top });
    }
    DensityMatrix::from_evolved(linalg::reconstruct(&p, &eig.vectors), 1e-10)
}
