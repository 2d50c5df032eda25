//! Analytic convergence bounds, speed limits and certification reports.
//!
//! All bounds are on trace distances (or on divergences dominated by them) between
//! `Λ_t(ρ)` and `Λ_s(ρ)` for states obeying `tr(S^{2α} ρ) ≤ E^{2α}`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::MARGIN_TOL;

/// Largest trace distance between two states; bounds above it carry no information.
pub const MAX_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    pub alpha: f64,
    pub zeta: f64,
    pub g: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and nonnegative, got {x}")))
    }
}

/// `ζ_α = (2α/(1−α))^{1−α} + 2(2α/(1−α))^{−α}`, `ζ₁ = 1`, and `g_α = ζ_α(1−α)^{(1−α)/2}α^{α/2}`.
pub fn constants(alpha: f64) -> Result<BoundConstants> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(BoundConstants { alpha, zeta: 1.0, g: 1.0 });
    }
    let beta = 1.0 - alpha;
    // logs keep the α → 1 limit accurate: (1−α)·ln(2α/(1−α)) → 0
    let ln_r = (2.0 * alpha).ln() - beta.ln();
    let zeta = (beta * ln_r).exp() + 2.0 * (-alpha * ln_r).exp();
    let g = zeta * (0.5 * beta * beta.ln() + 0.5 * alpha * alpha.ln()).exp();
    Ok(BoundConstants { alpha, zeta, g })
}

/// `g_α ‖|H|^α φ₀‖ dt^α` for Schrödinger evolution.
pub fn closed_schrodinger_bound(alpha: f64, energy_norm: f64, dt: f64) -> Result<f64> {
    check_nonneg("dt", dt)?;
    check_nonneg("energy norm", energy_norm)?;
    Ok(constants(alpha)?.g * energy_norm * dt.powf(alpha))
}

/// Autonomous bound plus the caller-supplied `∫ₛᵗ ‖V(r)‖ dr`.
pub fn nonautonomous_bound(alpha: f64, energy_norm: f64, dt: f64, potential_integral: f64) -> Result<f64> {
    check_nonneg("potential integral", potential_integral)?;
    Ok(closed_schrodinger_bound(alpha, energy_norm, dt)? + potential_integral)
}

/// `2 g_α E^α dt^α` for von Neumann evolution.
pub fn closed_vn_bound(alpha: f64, energy: f64, dt: f64) -> Result<f64> {
    check_nonneg("dt", dt)?;
    check_nonneg("E", energy)?;
    Ok(2.0 * constants(alpha)?.g * energy.powf(alpha) * dt.powf(alpha))
}

/// Largest `dt` admitted by the pure-state bound: both the stated window `dt^α ≤ 1/(√2 g_α)`
/// and `g_α E^α dt^α ≤ √2`, where the overlap estimate behind the bound stays nonnegative.
pub fn pure_state_max_dt(alpha: f64, energy: f64) -> Result<f64> {
    let g = constants(alpha)?.g;
    let stated = (1.0 / (2f64.sqrt() * g)).powf(1.0 / alpha);
    let overlap = if energy > 0.0 { (2f64.sqrt() / (g * energy.powf(alpha))).powf(1.0 / alpha) } else { f64::INFINITY };
    Ok(stated.min(overlap))
}

/// `2 g_α E^α dt^α √(1 − g_α² E^{2α} dt^{2α}/4)` for pure inputs.
pub fn pure_state_bound(alpha: f64, energy: f64, dt: f64) -> Result<f64> {
    check_nonneg("dt", dt)?;
    check_nonneg("E", energy)?;
    let max_dt = pure_state_max_dt(alpha, energy)?;
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Window { dt, max_dt });
    }
    let x = constants(alpha)?.g * energy.powf(alpha) * dt.powf(alpha);
    Ok(2.0 * x * (1.0 - x * x / 4.0).max(0.0).sqrt())
}

/// `2 g_α √(a E^{2α} + b) dt^α`: the closed bound for a constraint operator `S` with
/// `‖|H|^α φ‖² ≤ a‖S^α φ‖² + b‖φ‖²`.
pub fn transfer_bound(alpha: f64, a: f64, b: f64, energy: f64, dt: f64) -> Result<f64> {
    check_nonneg("a", a)?;
    check_nonneg("b", b)?;
    check_nonneg("dt", dt)?;
    Ok(2.0 * constants(alpha)?.g * (a * energy.powf(2.0 * alpha) + b).sqrt() * dt.powf(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaCase {
    /// `K` relatively `H`-bounded; constraint operator `|H|`.
    OmegaH,
    /// `H` relatively `K`-bounded; constraint operator `|K|`.
    OmegaK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CChoice {
    Value(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpenSystemParams {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: CChoice,
    pub energy: f64,
    pub case: OmegaCase,
}

impl OpenSystemParams {
    pub fn new(alpha: f64, a: f64, b: f64, c: CChoice, energy: f64, case: OmegaCase) -> Result<Self> {
        check_alpha(alpha)?;
        check_nonneg("a", a)?;
        check_nonneg("b", b)?;
        check_nonneg("E", energy)?;
        if let CChoice::Value(c) = c {
            check_nonneg("c", c)?;
            if c == 0.0 && alpha < 1.0 && b > 0.0 {
                return Err(invalid("c = 0 requires alpha = 1 or b = 0"));
            }
        }
        Ok(Self { alpha, a, b, c, energy, case })
    }
}

/// The `E`-dependent factor inside the max: `(1−α)^{(1−α)/2}α^{α/2}` for `ω_H`, squared for `ω_K`.
fn energy_coefficient(alpha: f64, case: OmegaCase) -> f64 {
    let base = (1.0 - alpha).powf((1.0 - alpha) / 2.0) * alpha.powf(alpha / 2.0);
    match case {
        OmegaCase::OmegaH => base,
        OmegaCase::OmegaK => base * base,
    }
}

/// `ω(c)` at an explicit `c`; `c = 0` is the limit `c ↓ 0`.
pub fn omega_at(p: &OpenSystemParams, c: f64) -> Result<f64> {
    let k = constants(p.alpha)?;
    let energy_term = (1.0 + 3.0 * p.a) * energy_coefficient(p.alpha, p.case) * p.energy.powf(p.alpha);
    let (inc, dec) = if c == 0.0 {
        if p.alpha < 1.0 && p.b > 0.0 {
            return Err(invalid("c = 0 requires alpha = 1 or b = 0"));
        }
        // α = 1: 3b·c⁰ = 3b; otherwise b = 0 and the term vanishes
        let b_term = if p.alpha == 1.0 { 3.0 * p.b } else { 0.0 };
        (0.0, b_term + energy_term)
    } else {
        (2.0 * c.powf(p.alpha), 3.0 * p.b * c.powf(p.alpha - 1.0) + energy_term)
    };
    Ok(4.0 * k.zeta * inc.max(dec))
}

const C_MIN: f64 = 1e-6;
const C_MAX: f64 = 1e6;

/// The `c` minimizing `ω`: the limit `c ↓ 0` when the decreasing branch has no `c` term
/// (`b = 0` or `α = 1`), otherwise golden-section search on `ln c` over `[1e-6, 1e6]`.
pub fn c_auto(p: &OpenSystemParams) -> Result<f64> {
    if p.b == 0.0 || p.alpha == 1.0 {
        return Ok(0.0);
    }
    let f = |lc: f64| omega_at(p, lc.exp());
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (C_MIN.ln(), C_MAX.ln());
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..500 {
        if (hi - lo).abs() <= 1e-10 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    // the search interval endpoints are candidates too
    let mut best = (f(mid)?, mid);
    for lc in [C_MIN.ln(), C_MAX.ln()] {
        let v = f(lc)?;
        if v < best.0 {
            best = (v, lc);
        }
    }
    Ok(best.1.exp())
}

/// Resolved `c` and `ω`.
pub fn omega_with_c(p: &OpenSystemParams) -> Result<(f64, f64)> {
    let c = match p.c {
        CChoice::Value(c) => c,
        CChoice::Auto => c_auto(p)?,
    };
    Ok((c, omega_at(p, c)?))
}

pub fn omega(p: &OpenSystemParams) -> Result<f64> {
    Ok(omega_with_c(p)?.1)
}

/// `ω dt^α`.
pub fn open_system_bound(p: &OpenSystemParams, dt: f64) -> Result<f64> {
    check_nonneg("dt", dt)?;
    Ok(omega(p)? * dt.powf(p.alpha))
}

/// `4ζ_α(1−α)^{1−α}α^α E^α dt^α`, the attenuator (and amplifier with `S = M`) bound.
pub fn attenuator_bound(alpha: f64, energy: f64, dt: f64) -> Result<f64> {
    let p = OpenSystemParams::new(alpha, 0.0, 0.0, CChoice::Value(0.0), energy, OmegaCase::OmegaK)?;
    open_system_bound(&p, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum SpeedLimitCase {
    Schrodinger,
    VonNeumann,
    Open(OpenSystemParams),
}

/// Lower bound on the time to reach angle `theta`.
///
/// Schrödinger: relative angle `arccos Re⟨φ(0)|φ(t)⟩ ∈ [0, π]`; the others use the Bures angle in `[0, π/2]`.
pub fn speed_limit(alpha: f64, energy: f64, theta: f64, case: &SpeedLimitCase) -> Result<f64> {
    check_alpha(alpha)?;
    let max_theta = match case {
        SpeedLimitCase::Schrodinger => std::f64::consts::PI,
        _ => std::f64::consts::FRAC_PI_2,
    };
    if !(0.0..=max_theta).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0, {max_theta}], got {theta}")));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let g = constants(alpha)?.g;
    match case {
        SpeedLimitCase::Schrodinger => Ok(((2.0 - 2.0 * theta.cos()) / (g * g)).powf(1.0 / (2.0 * alpha)) / energy),
        SpeedLimitCase::VonNeumann => Ok(((1.0 - theta.cos()) / g).powf(1.0 / alpha) / energy),
        SpeedLimitCase::Open(p) => {
            if p.alpha != alpha {
                return Err(invalid("open-system parameters carry a different alpha"));
            }
            Ok(((2.0 - 2.0 * theta.cos()) / omega(p)?).powf(1.0 / alpha))
        }
    }
}

/// `|tr(Λ_t(ρ)²) − tr(Λ_s(ρ)²)| ≤ 2ω dt^α`.
pub fn purity_change_bound(p: &OpenSystemParams, dt: f64) -> Result<f64> {
    Ok(2.0 * open_system_bound(p, dt)?)
}

/// `(|p_start − p_fin|/ω)^{1/α}`.
pub fn purity_time(p: &OpenSystemParams, p_start: f64, p_fin: f64) -> Result<f64> {
    for (name, x) in [("p_start", p_start), ("p_fin", p_fin)] {
        if !(x > 0.0 && x <= 1.0) {
            return Err(invalid(format!("{name} must lie in (0, 1], got {x}")));
        }
    }
    Ok(((p_start - p_fin).abs() / omega(p)?).powf(1.0 / p.alpha))
}

/// Divergence and distance bounds implied by a trace-distance bound `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceBounds {
    pub trace_distance: f64,
    pub tsallis_half: f64,
    pub renyi_half: f64,
    pub bures_distance: f64,
    pub bures_angle: f64,
}

pub fn divergence_bounds(trace_bound: f64) -> DivergenceBounds {
    let b = trace_bound;
    let one_minus = 1.0 - b / 2.0;
    DivergenceBounds {
        trace_distance: b,
        tsallis_half: b,
        renyi_half: if one_minus > 0.0 { -2.0 * one_minus.ln() } else { f64::INFINITY },
        bures_distance: b.sqrt(),
        bures_angle: one_minus.clamp(-1.0, 1.0).acos(),
    }
}

/// An evaluated bound, optionally paired with an observed value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub formula_id: String,
    pub bound_value: f64,
    pub observed_value: Option<f64>,
    pub margin: Option<f64>,
    pub pass: Option<bool>,
    pub vacuous: bool,
    pub params: Value,
}

impl BoundReport {
    pub fn bound_only(formula_id: &str, bound_value: f64, params: Value) -> Self {
        Self { formula_id: formula_id.into(), bound_value, observed_value: None, margin: None, pass: None, vacuous: bound_value > MAX_DISTANCE, params }
    }

    pub fn passed(&self) -> bool {
        self.pass.unwrap_or(true)
    }
}

/// Pairs a bound with an observation; passes iff `bound − observed ≥ −1e-9`.
pub fn certify(formula_id: &str, bound_value: f64, observed_value: f64, params: Value) -> Result<BoundReport> {
    if !bound_value.is_finite() && bound_value != f64::INFINITY {
        return Err(invalid(format!("bound is not a number: {bound_value}")));
    }
    if !observed_value.is_finite() {
        return Err(invalid(format!("observed value is not finite: {observed_value}")));
    }
    let margin = bound_value - observed_value;
    Ok(BoundReport {
        formula_id: formula_id.into(),
        bound_value,
        observed_value: Some(observed_value),
        margin: Some(margin),
        pass: Some(margin >= -MARGIN_TOL),
        vacuous: bound_value > MAX_DISTANCE,
        params,
    })
}

/// Same as [`certify`] with a caller-chosen tolerance.
pub fn certify_with_tol(formula_id: &str, bound_value: f64, observed_value: f64, tol: f64, params: Value) -> Result<BoundReport> {
    let mut r = certify(formula_id, bound_value, observed_value, params)?;
    r.pass = r.margin.map(|m| m >= -tol);
    Ok(r)
}

pub fn params_json(p: &OpenSystemParams) -> Value {
    json!({ "alpha": p.alpha, "a": p.a, "b": p.b, "c": p.c, "E": p.energy, "case": p.case })
}
