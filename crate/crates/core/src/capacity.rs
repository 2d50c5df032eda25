//! Holevo quantities of discrete ensembles and continuity bounds for energy-constrained
//! capacities. The capacities themselves are not computed.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::Channel;
use crate::entropy::{g_of, h_of, r_eps, von_neumann_entropy, EntropyFactor};
use crate::error::{invalid, Error, Result};
use crate::gibbs::gibbs_entropy;
use crate::metrics::{sample_pool, EcdSettings, EnergyConstraint};
use crate::operators::{extended_expectation, HermitianOperator};
use crate::state::DensityMatrix;

/// Tolerance on the normalization of ensemble weights.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DiscreteEnsemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl DiscreteEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::Shape { expected: format!("{} states", weights.len()), found: format!("{}", states.len()) });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(invalid("ensemble weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid(format!("ensemble weights sum to {total}, not 1")));
        }
        let d = states[0].dim();
        for s in &states {
            crate::linalg::check_same_dim(d, s.dim())?;
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ pᵢ ρᵢ`.
    pub fn barycenter(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&self.weights, &self.states)
    }
}

/// `χ(μ) = S(ρ̄) − Σ pᵢ S(ρᵢ)`.
pub fn holevo_quantity(mu: &DiscreteEnsemble) -> Result<f64> {
    let member: Vec<f64> = mu.states.par_iter().map(von_neumann_entropy).collect::<Result<_>>()?;
    let avg: f64 = mu.weights.iter().zip(&member).map(|(p, s)| p * s).sum();
    Ok(von_neumann_entropy(&mu.barycenter()?)? - avg)
}

/// Each member mapped through `Λ_t`, weights unchanged.
pub fn pushforward(mu: &DiscreteEnsemble, channel: &dyn Channel, t: f64) -> Result<DiscreteEnsemble> {
    let states = mu.states.par_iter().map(|s| channel.apply(s, t)).collect::<Result<Vec<_>>>()?;
    Ok(DiscreteEnsemble { weights: mu.weights.clone(), states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityBoundKind {
    /// Product-state classical capacity `C^{(1)}`.
    COne,
    /// Classical capacity `C`.
    CFull,
    /// Entanglement-assisted capacity `C_ea`.
    Eac,
    /// Mutual information of `n` channel uses.
    Qmi,
    /// Holevo quantity of a pushed-forward ensemble.
    HolevoChi,
}

impl CapacityBoundKind {
    pub const ALL: [CapacityBoundKind; 5] = [Self::COne, Self::CFull, Self::Eac, Self::Qmi, Self::HolevoChi];

    pub fn name(self) -> &'static str {
        match self {
            Self::COne => "c_one",
            Self::CFull => "c_full",
            Self::Eac => "eac",
            Self::Qmi => "qmi",
            Self::HolevoChi => "holevo_chi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownName {
            kind: "capacity bound",
            name: s.into(),
            known: Self::ALL.map(|k| k.name()).join(", "),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CapacityBoundParams {
    pub energy: f64,
    pub epsilon: f64,
    pub t: f64,
    pub eta: f64,
    /// Output-energy factor `k(E)` with `tr(H_B Φ(ρ)) ≤ k(E)·E`.
    pub k_of_e: f64,
    /// Number of channel uses (mutual-information bound only).
    pub n: usize,
    pub mode: EntropyFactor,
}

impl CapacityBoundParams {
    pub fn new(energy: f64, epsilon: f64, t: f64, eta: f64, k_of_e: f64, n: usize, mode: EntropyFactor) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(invalid(format!("energy must be positive, got {energy}")));
        }
        r_eps(epsilon, t)?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {eta}")));
        }
        if !(k_of_e > 0.0 && k_of_e.is_finite()) {
            return Err(invalid(format!("k(E) must be positive, got {k_of_e}")));
        }
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        Ok(Self { energy, epsilon, t, eta, k_of_e, n, mode })
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        r_eps(self.epsilon, t)?;
        Ok(Self { t, ..self.clone() })
    }

    /// Largest admissible `t`, `1/(2ε)`.
    pub fn t_max(&self) -> f64 {
        1.0 / (2.0 * self.epsilon)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityBound {
    pub kind: String,
    pub t: f64,
    /// Energy argument of the entropy factor.
    pub gibbs_energy: f64,
    pub prefactor: f64,
    pub additive: f64,
    /// The high-energy `η·log` form; its `1 + o(1)` is not controlled at finite energy.
    pub asymptotic: f64,
    pub exact_gibbs: Option<f64>,
}

impl CapacityBound {
    pub fn value(&self) -> f64 {
        self.exact_gibbs.unwrap_or(self.asymptotic)
    }
}

pub fn capacity_continuity(p: &CapacityBoundParams, which: CapacityBoundKind) -> Result<CapacityBound> {
    let (e, t) = (p.epsilon, p.t);
    let r = r_eps(e, t)?;
    let g = g_of(e * r)?;
    let h = h_of(e * t)?;
    let base = e * (2.0 * t + r);
    let plain = p.energy / (e * t);
    let (prefactor, x, additive) = match which {
        CapacityBoundKind::COne => (base, p.k_of_e * plain, 2.0 * g + 2.0 * h),
        CapacityBoundKind::CFull => (2.0 * base, p.k_of_e * plain, 2.0 * g + 4.0 * h),
        CapacityBoundKind::Eac => (2.0 * base, plain, 2.0 * g + 4.0 * h),
        CapacityBoundKind::Qmi => {
            let n = p.n as f64;
            (2.0 * n * base, plain, n * (2.0 * g + 4.0 * h))
        }
        CapacityBoundKind::HolevoChi => (base, plain, 2.0 * g + 2.0 * h),
    };
    let exact_gibbs = match &p.mode {
        EntropyFactor::ExactGibbs(spec) => Some(prefactor * gibbs_entropy(spec, x)? + additive),
        EntropyFactor::Asymptotic => None,
    };
    Ok(CapacityBound { kind: which.name().into(), t, gibbs_energy: x, prefactor, additive, asymptotic: prefactor * p.eta * x.ln() + additive, exact_gibbs })
}

/// Smallest bound over a log-spaced grid of `points` values of `t` in `[10⁻⁴, 1]·1/(2ε)`.
///
/// Grid points whose Gibbs solve exceeds the summation budget are skipped.
pub fn minimize_over_t(p: &CapacityBoundParams, which: CapacityBoundKind, points: usize) -> Result<CapacityBound> {
    if points < 2 {
        return Err(invalid("t grid needs at least 2 points"));
    }
    let hi = p.t_max();
    let lo = hi * 1e-4;
    let evals: Vec<Result<CapacityBound>> = (0..points)
        .into_par_iter()
        .map(|k| {
            let t = if k == points - 1 { hi } else { lo * (hi / lo).powf(k as f64 / (points - 1) as f64) };
            capacity_continuity(&p.with_t(t)?, which)
        })
        .collect();
    let mut best: Option<CapacityBound> = None;
    let mut last_err = None;
    for ev in evals {
        match ev {
            Ok(b) => {
                if best.as_ref().is_none_or(|cur| b.value() < cur.value()) {
                    best = Some(b);
                }
            }
            Err(e @ (Error::Convergence(_) | Error::Budget(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| invalid("no grid point could be evaluated")))
}

/// Empirical `sup tr(H_B Φ_t(ρ))/E` over sampled inputs with `tr(H_A ρ) ≤ E`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyFactorProbe {
    /// A lower estimate of the true `k(E)`.
    pub k_lower_estimate: f64,
    pub energy: f64,
    pub samples_used: usize,
}

pub fn energy_factor_probe(
    channel: &dyn Channel,
    t: f64,
    op_in: &HermitianOperator,
    op_out: &HermitianOperator,
    energy: f64,
    samples: usize,
    seed: u64,
) -> Result<EnergyFactorProbe> {
    crate::linalg::check_same_dim(channel.dim(), op_in.dim())?;
    crate::linalg::check_same_dim(channel.dim(), op_out.dim())?;
    let constraint = EnergyConstraint::new(op_in.clone(), energy, 0.5)?;
    let pool = sample_pool(&constraint, &EcdSettings { samples, ancilla_dim: 1, seed })?;
    let admitted: Vec<_> = pool.into_iter().filter(|c| constraint.admits(&c.matrix, c.ancilla_dim)).collect();
    let ratios: Vec<f64> = admitted
        .par_iter()
        .map(|c| Ok(extended_expectation(op_out.matrix(), &channel.apply_extended(&c.matrix, t, c.ancilla_dim)?, c.ancilla_dim) / energy))
        .collect::<Result<_>>()?;
    let k = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !k.is_finite() {
        return Err(Error::Infeasible("no sampled input satisfied the energy constraint".into()));
    }
    Ok(EnergyFactorProbe { k_lower_estimate: k, energy, samples_used: ratios.len() })
}
