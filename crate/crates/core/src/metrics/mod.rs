//! Distances and divergences between states, and a sampled lower bound on the
//! energy-constrained diamond distance between two channels.

mod ecd;

pub use ecd::{
    ADMISSIBILITY_TOL,
    apply_pool, ecd_lower_bound, ecd_lower_bound_with_pool, evaluate_pool, max_distance, sample_pool, Candidate, EcdEstimate, EcdSettings,
    EnergyConstraint, SampleKind,
};

use serde_json::json;

use crate::bounds::BoundReport;
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::state::DensityMatrix;

/// Slack tolerance for the Fuchs–van de Graaf and Powers–Størmer inequalities.
pub const INEQUALITY_TOL: f64 = 1e-10;

/// Sum of singular values; the eigenvalue route is used for Hermitian input.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    linalg::check_square(a)?;
    let scale = linalg::max_abs(a).max(1.0);
    if linalg::max_asymmetry(a) <= 1e-14 * scale {
        linalg::trace_norm_hermitian(a)
    } else {
        linalg::trace_norm_general(a)
    }
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))
}

fn one_sided_fidelity(sqrt_rho: &CMat, sigma: &CMat) -> Result<f64> {
    let inner = linalg::hermitize(&sqrt_rho.dot(sigma).dot(sqrt_rho));
    let w = linalg::eigvalsh(&inner)?;
    let floor = linalg::roundoff_floor(&w);
    Ok(w.iter().filter(|&&x| x > floor).map(|x| x.sqrt()).sum())
}

/// `tr√(√ρ σ √ρ)`, averaged over both argument orders and clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    let a = one_sided_fidelity(&linalg::psd_sqrt(rho.matrix())?, sigma.matrix())?;
    let b = one_sided_fidelity(&linalg::psd_sqrt(sigma.matrix())?, rho.matrix())?;
    Ok((0.5 * (a + b)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bures {
    pub angle: f64,
    pub distance: f64,
}

/// Bures angle `arccos F` and distance `√(2(1−F))`.
pub fn bures(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Bures> {
    let f = fidelity(rho, sigma)?;
    Ok(Bures { angle: f.acos(), distance: (2.0 * (1.0 - f)).max(0.0).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfDivergences {
    pub tsallis_half: f64,
    /// `+∞` when the states have orthogonal supports.
    pub renyi_half: f64,
    pub bhattacharyya: f64,
}

/// Order-½ Tsallis and Rényi divergences from `tr(√ρ √σ)`.
pub fn divergences_half(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<HalfDivergences> {
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    let overlap = linalg::trace(&linalg::psd_sqrt(rho.matrix())?.dot(&linalg::psd_sqrt(sigma.matrix())?)).re.clamp(0.0, 1.0);
    Ok(HalfDivergences {
        tsallis_half: 2.0 * (1.0 - overlap),
        renyi_half: if overlap > 0.0 { -2.0 * overlap.ln() } else { f64::INFINITY },
        bhattacharyya: overlap,
    })
}

/// Checks `2(1−F) ≤ ‖ρ−σ‖₁ ≤ 2√(1−F²)` and `D½ ≤ ‖ρ−σ‖₁`.
///
/// The report's bound is the upper Fuchs–van de Graaf value, its margin the smallest of
/// the three slacks.
pub fn check_fvg_ps(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<BoundReport> {
    let dist = trace_distance(rho, sigma)?;
    let f = fidelity(rho, sigma)?;
    let div = divergences_half(rho, sigma)?;
    let lower = 2.0 * (1.0 - f);
    let upper = 2.0 * (1.0 - f * f).max(0.0).sqrt();
    let slacks = [dist - lower, upper - dist, dist - div.tsallis_half];
    let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BoundReport {
        formula_id: "fvg_powers_stormer".into(),
        bound_value: upper,
        observed_value: Some(dist),
        margin: Some(margin),
        pass: Some(margin >= -INEQUALITY_TOL),
        vacuous: false,
        params: json!({
            "fidelity": f,
            "tsallis_half": div.tsallis_half,
            "slack_fvg_lower": slacks[0],
            "slack_fvg_upper": slacks[1],
            "slack_powers_stormer": slacks[2],
        }),
    })
}
