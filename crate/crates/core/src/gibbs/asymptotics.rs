use rayon::prelude::*;
use serde::Serialize;

use super::{solve_beta, Spectrum};
use crate::error::{invalid, Result};

/// Largest number of eigenvalues enumerated for the pair sums.
pub const MAX_PAIR_LEVELS: usize = 20_000_000;
/// RMS relative residual above which the ratio sequence is declared non-convergent.
pub const FIT_RESIDUAL_TOL: f64 = 1e-3;

/// `N↑(Λ) = Σ λ²` and `N↓(Λ) = Σ λλ′` over ordered pairs of levels with `λ + λ′ ≤ Λ`.
///
/// Levels are sorted, so for each `λᵢ` the admissible partners form a prefix whose
/// length only shrinks as `i` grows; prefix sums make the whole thing linear.
pub fn n_updown(spec: &Spectrum, cutoff: f64) -> Result<(f64, f64)> {
    if !cutoff.is_finite() {
        return Err(invalid(format!("cutoff must be finite, got {cutoff}")));
    }
    let lmin = spec.min_eigenvalue();
    if cutoff < 2.0 * lmin {
        return Ok((0.0, 0.0));
    }
    let levels = spec.levels_up_to(cutoff - lmin, MAX_PAIR_LEVELS)?;
    let mut prefix = Vec::with_capacity(levels.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in &levels {
        acc += v;
        prefix.push(acc);
    }
    let (mut up, mut down) = (0.0, 0.0);
    let mut count = levels.len();
    for &v in &levels {
        while count > 0 && v + levels[count - 1] > cutoff {
            count -= 1;
        }
        if count == 0 {
            break;
        }
        up += v * v * count as f64;
        down += v * prefix[count];
    }
    Ok((up, down))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub cutoffs: Vec<f64>,
    pub xi_estimates: Vec<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub fit_residual: f64,
    pub diagnostic: Option<String>,
    /// `(E, Z(β(E))/E^η)` at one finite energy; not a certified limit.
    pub kappa_estimate: Option<(f64, f64)>,
}

impl AsymptoticsReport {
    pub fn with_kappa(mut self, spec: &Spectrum, energy: f64) -> Result<Self> {
        if let Some(eta) = self.eta {
            let sol = solve_beta(spec, energy)?;
            self.kappa_estimate = Some((energy, (sol.log_z - eta * energy.ln()).exp()));
        }
        Ok(self)
    }
}

/// `count` cutoffs spaced geometrically from `Λmax/100` to `Λmax`.
pub fn default_cutoffs(lambda_max: f64, count: usize) -> Vec<f64> {
    let lo = lambda_max / 100.0;
    if count < 2 {
        return vec![lambda_max];
    }
    (0..count).map(|k| lo * 100f64.powf(k as f64 / (count - 1) as f64)).collect()
}

/// Fits `N↑/N↓ ≈ ξ + c/Λ` by least squares and reports `η = 1/(ξ−1)`.
pub fn estimate_eta(spec: &Spectrum, cutoffs: &[f64]) -> Result<AsymptoticsReport> {
    if cutoffs.len() < 3 {
        return Err(invalid(format!("need at least 3 cutoffs, got {}", cutoffs.len())));
    }
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("cutoffs must be strictly increasing"));
    }
    let pairs: Vec<(f64, f64)> = cutoffs.par_iter().map(|&c| n_updown(spec, c)).collect::<Result<_>>()?;
    if let Some(k) = pairs.iter().position(|p| p.1 <= 0.0) {
        return Err(invalid(format!("no admissible level pair below cutoff {}", cutoffs[k])));
    }
    let ratios: Vec<f64> = pairs.iter().map(|(u, d)| u / d).collect();

    let x: Vec<f64> = cutoffs.iter().map(|c| 1.0 / c).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, ratios.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&ratios).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let xi = my - slope * mx;
    let fit_residual = (x.iter().zip(&ratios).map(|(a, r)| ((r - xi - slope * a) / r).powi(2)).sum::<f64>() / n).sqrt();

    let diagnostic = if !(fit_residual <= FIT_RESIDUAL_TOL) {
        Some(format!("ratio sequence does not settle: fit residual {fit_residual:.3e} exceeds {FIT_RESIDUAL_TOL:.0e}"))
    } else if xi <= 1.0 {
        Some(format!("extrapolated ratio {xi} is not above 1"))
    } else {
        None
    };
    let (xi, eta) = match diagnostic {
        None => (Some(xi), Some(1.0 / (xi - 1.0))),
        Some(_) => (None, None),
    };
    Ok(AsymptoticsReport { cutoffs: cutoffs.to_vec(), xi_estimates: ratios, xi, eta, fit_residual, diagnostic, kappa_estimate: None })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticRow {
    pub energy: f64,
    pub beta: f64,
    pub beta_e_over_eta: f64,
    pub log_z_minus_eta_log_e: f64,
    pub entropy_ratio: f64,
    pub kappa_estimate: f64,
}

/// `β(E)·E/η`, `log Z − η log E` and `S(γ(E))/(η log E)` along an energy grid.
pub fn asymptotics_check(spec: &Spectrum, energies: &[f64], eta: f64) -> Result<Vec<AsymptoticRow>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta must be positive, got {eta}")));
    }
    energies
        .par_iter()
        .map(|&e| {
            let sol = solve_beta(spec, e)?;
            let shift = sol.log_z - eta * e.ln();
            Ok(AsymptoticRow {
                energy: e,
                beta: sol.beta,
                beta_e_over_eta: sol.beta * e / eta,
                log_z_minus_eta_log_e: shift,
                entropy_ratio: sol.entropy / (eta * e.ln()),
                kappa_estimate: shift.exp(),
            })
        })
        .collect()
}
