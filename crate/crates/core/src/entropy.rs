//! Entropies, mutual information and energy-constrained continuity bounds.

use serde::Serialize;
use serde_json::json;

use crate::bounds::{certify, BoundReport};
use crate::error::{invalid, Result};
use crate::gibbs::{gibbs_entropy, Spectrum};
use crate::linalg::{self, CMat};
use crate::state::DensityMatrix;

/// Eigenvalues below this are treated as exact zeros before taking logarithms.
pub const EIGEN_CLIP: f64 = 1e-15;
/// Support tolerance for the relative entropy.
pub const SUPPORT_TOL: f64 = 1e-12;

/// `−Σ λ ln λ` with `0 ln 0 = 0`.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > EIGEN_CLIP).map(|&x| -x * x.ln()).sum::<f64>().max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&rho.eigenvalues()?))
}

/// `H(A|B) = S(ρ_AB) − S(ρ_B)` for a `da × db` bipartition.
pub fn conditional_entropy(rho: &DensityMatrix, da: usize, db: usize) -> Result<f64> {
    let b = rho.reduce_second(da, db)?;
    Ok(von_neumann_entropy(rho)? - von_neumann_entropy(&b)?)
}

/// `I(A;B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(rho: &DensityMatrix, da: usize, db: usize) -> Result<f64> {
    let a = rho.reduce_first(da, db)?;
    let b = rho.reduce_second(da, db)?;
    Ok(von_neumann_entropy(&a)? + von_neumann_entropy(&b)? - von_neumann_entropy(rho)?)
}

/// `tr ρ(ln ρ − ln σ)`, or `+∞` when `ρ` has weight outside the support of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    let (s_vals, s_vecs) = linalg::eigh(sigma.matrix())?;
    let rotated = linalg::dagger(&s_vecs).dot(rho.matrix()).dot(&s_vecs);
    let mut cross = 0.0;
    for (j, &s) in s_vals.iter().enumerate() {
        let weight = rotated[[j, j]].re;
        if s <= SUPPORT_TOL {
            if weight > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * s.ln();
    }
    Ok((-von_neumann_entropy(rho)? - cross).max(0.0))
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(invalid(format!("order q must be a finite number above 1, got {q}")));
    }
    Ok(())
}

/// Schatten `q`-norm of a Hermitian matrix.
pub fn schatten_norm(m: &CMat, q: f64) -> Result<f64> {
    let w = linalg::eigvalsh(m)?;
    Ok(w.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q))
}

fn power_trace(rho: &DensityMatrix, q: f64) -> Result<f64> {
    Ok(rho.eigenvalues()?.iter().map(|x| x.powf(q)).sum())
}

/// `T_q(ρ) = (1 − ‖ρ‖_q^q)/(q−1)`.
pub fn tsallis_q(rho: &DensityMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok((1.0 - power_trace(rho, q)?) / (q - 1.0))
}

/// Rényi entropy `ln(‖ρ‖_q^q)/(1−q)`, nonnegative for states.
pub fn renyi_q(rho: &DensityMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(-power_trace(rho, q)?.ln() / (q - 1.0))
}

/// `|T_q(ρ) − T_q(σ)| ≤ q/(q−1)·‖ρ−σ‖_q`.
pub fn check_tsallis_lipschitz(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> Result<BoundReport> {
    check_q(q)?;
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    let dist = schatten_norm(&(rho.matrix() - sigma.matrix()), q)?;
    let observed = (tsallis_q(rho, q)? - tsallis_q(sigma, q)?).abs();
    certify("tsallis_lipschitz", q / (q - 1.0) * dist, observed, json!({ "q": q, "schatten_distance": dist }))
}

/// Local Lipschitz estimate for the Rényi entropy, with `ε = ‖ρ−σ‖_q`.
///
/// Needs `‖ρ‖_q ≥ δ` and `ε < δ`; otherwise the report carries `status: inapplicable`
/// and no pass/fail verdict.
pub fn check_renyi_lipschitz(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64, delta: f64) -> Result<BoundReport> {
    check_q(q)?;
    linalg::check_same_dim(rho.dim(), sigma.dim())?;
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let dist = schatten_norm(&(rho.matrix() - sigma.matrix()), q)?;
    let norm = power_trace(rho, q)?.powf(1.0 / q);
    let params = json!({ "q": q, "delta": delta, "schatten_distance": dist, "schatten_norm": norm });
    if norm < delta || dist >= delta {
        let mut p = params;
        p["status"] = json!("inapplicable");
        return Ok(BoundReport::bound_only("renyi_lipschitz", f64::INFINITY, p));
    }
    let observed = (renyi_q(rho, q)? - renyi_q(sigma, q)?).abs();
    let mut r = certify("renyi_lipschitz", q / ((q - 1.0) * (delta - dist)) * dist, observed, params)?;
    r.params["status"] = json!("applicable");
    r.vacuous = false;
    Ok(r)
}

/// `q/(q−1)·ω·dt^α`, the Tsallis change along a semigroup with rate `ω`.
pub fn tsallis_semigroup_bound(q: f64, omega: f64, alpha: f64, dt: f64) -> Result<f64> {
    check_q(q)?;
    Ok(q / (q - 1.0) * omega * dt.powf(alpha))
}

/// `q ω t^α/((q−1)(δ − ω t^α))` while `ω t^α < δ`.
pub fn renyi_semigroup_bound(q: f64, omega: f64, alpha: f64, delta: f64, t: f64) -> Result<f64> {
    check_q(q)?;
    let eps = omega * t.powf(alpha);
    if eps >= delta {
        return Err(invalid(format!("ω·t^α = {eps} must stay below δ = {delta}")));
    }
    Ok(q * eps / ((q - 1.0) * (delta - eps)))
}

/// Binary entropy `−x ln x − (1−x) ln(1−x)` on `[0, 1]`.
pub fn h_of(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("binary entropy needs x in [0, 1], got {x}")));
    }
    let xl = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    Ok(xl(x) + xl(1.0 - x))
}

/// `(x+1) ln(x+1) − x ln x`, the entropy of a thermal oscillator with mean photon number `x`.
pub fn g_of(x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("g needs a finite x >= 0, got {x}")));
    }
    Ok(if x == 0.0 { 0.0 } else { (x + 1.0) * x.ln_1p() - x * x.ln() })
}

/// `(1 + t/2)/(1 − εt)` on `0 < t ≤ 1/(2ε)`.
pub fn r_eps(eps: f64, t: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if !(t > 0.0 && t <= 1.0 / (2.0 * eps) * (1.0 + 1e-15)) {
        return Err(invalid(format!("t must lie in (0, 1/(2ε)] = (0, {}], got {t}", 1.0 / (2.0 * eps))));
    }
    Ok((1.0 + 0.5 * t) / (1.0 - eps * t))
}

/// How the maximal entropy at a given energy enters a continuity bound.
#[derive(Debug, Clone)]
pub enum EntropyFactor {
    /// `S(γ(x))` of the Gibbs state for this spectrum.
    ExactGibbs(Spectrum),
    /// `η ln x`, the high-energy form.
    Asymptotic,
}

#[derive(Debug, Clone)]
pub struct ContinuityParams {
    pub energy: f64,
    pub epsilon: f64,
    pub epsilon_prime: Option<f64>,
    pub eta: f64,
    pub mode: EntropyFactor,
}

impl ContinuityParams {
    pub fn new(energy: f64, epsilon: f64, epsilon_prime: Option<f64>, eta: f64, mode: EntropyFactor) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(invalid(format!("energy must be positive, got {energy}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if let Some(ep) = epsilon_prime {
            if !(ep > epsilon && ep <= 1.0) {
                return Err(invalid(format!("epsilon' must satisfy epsilon < epsilon' <= 1, got {ep} with epsilon {epsilon}")));
            }
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("eta must be positive, got {eta}")));
        }
        Ok(Self { energy, epsilon, epsilon_prime, eta, mode })
    }

    /// `δ = (ε′−ε)/(1+ε′)`.
    pub fn delta(&self) -> Option<f64> {
        self.epsilon_prime.map(|ep| (ep - self.epsilon) / (1.0 + ep))
    }

    fn asymptotic_factor(&self, x: f64) -> f64 {
        self.eta * x.ln()
    }

    fn exact_factor(&self, x: f64) -> Result<Option<f64>> {
        match &self.mode {
            EntropyFactor::ExactGibbs(spec) => Ok(Some(gibbs_entropy(spec, x)?)),
            EntropyFactor::Asymptotic => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBoundKind {
    VnSimple,
    VnTwoEps,
    Conditional,
}

impl EntropyBoundKind {
    pub const ALL: [EntropyBoundKind; 3] = [Self::VnSimple, Self::VnTwoEps, Self::Conditional];

    pub fn name(self) -> &'static str {
        match self {
            Self::VnSimple => "vn_simple",
            Self::VnTwoEps => "vn_two_eps",
            Self::Conditional => "conditional",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| crate::Error::UnknownName {
            kind: "entropy bound",
            name: s.into(),
            known: Self::ALL.map(|k| k.name()).join(", "),
        })
    }
}

/// Both evaluations of a continuity bound. `exact_gibbs` is present in exact mode only.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityBound {
    pub kind: String,
    /// Energy argument `x` of the entropy factor (`E/ε` or `E/δ`).
    pub gibbs_energy: f64,
    pub prefactor: f64,
    pub additive: f64,
    /// The high-energy `η·log` form; its `1 + o(1)` is not controlled at finite energy.
    pub asymptotic: f64,
    pub exact_gibbs: Option<f64>,
    pub delta: Option<f64>,
}

impl ContinuityBound {
    /// The exact value when available, else the asymptotic form.
    pub fn value(&self) -> f64 {
        self.exact_gibbs.unwrap_or(self.asymptotic)
    }
}

/// Splits a continuity bound into `prefactor · F(x) + additive`.
fn entropy_bound_terms(p: &ContinuityParams, which: EntropyBoundKind) -> Result<(f64, f64, f64)> {
    let e = p.energy;
    Ok(match which {
        EntropyBoundKind::VnSimple => (2.0 * p.epsilon, e / p.epsilon, h_of(p.epsilon)?),
        EntropyBoundKind::VnTwoEps | EntropyBoundKind::Conditional => {
            let (ep, d) = match (p.epsilon_prime, p.delta()) {
                (Some(ep), Some(d)) => (ep, d),
                _ => return Err(invalid(format!("{} needs epsilon'", which.name()))),
            };
            if which == EntropyBoundKind::VnTwoEps {
                (ep + 2.0 * d, e / d, h_of(ep)? + h_of(d)?)
            } else {
                (2.0 * (ep + 4.0 * d), e / d, (1.0 + ep) * h_of(ep / (1.0 + ep))? + 2.0 * h_of(d)?)
            }
        }
    })
}

pub fn entropy_continuity_bound(p: &ContinuityParams, which: EntropyBoundKind) -> Result<ContinuityBound> {
    let (prefactor, x, additive) = entropy_bound_terms(p, which)?;
    Ok(ContinuityBound {
        kind: which.name().into(),
        gibbs_energy: x,
        prefactor,
        additive,
        asymptotic: prefactor * p.asymptotic_factor(x) + additive,
        exact_gibbs: p.exact_factor(x)?.map(|s| prefactor * s + additive),
        delta: p.delta(),
    })
}

/// Time window `t₀ = (1/E)·(2ε/(ζ_{1/2}·2^{−1/2}))²` of the attenuator entropy example.
///
/// [`crate::bounds::attenuator_bound`] at `t₀` evaluates to `4√2·ε`, not `2ε`; use
/// [`attenuator_certified_window`] when the channel distance must be guaranteed.
pub fn attenuator_entropy_window(eps: f64, energy: f64) -> Result<f64> {
    let k = crate::bounds::constants(0.5)?;
    Ok((2.0 * eps / (k.zeta * 0.5f64.sqrt())).powi(2) / energy)
}

/// Largest `t` with `attenuator_bound(½, E, t) ≤ 2ε`.
pub fn attenuator_certified_window(eps: f64, energy: f64) -> Result<f64> {
    let unit = crate::bounds::attenuator_bound(0.5, energy, 1.0)?;
    Ok((2.0 * eps / unit).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{attenuator_apply, LMax};
    use crate::gibbs::builtin_spectrum;
    use crate::operators::{build_fock, expected_energy, StateVector};
    use crate::sampling::{random_density, random_density_on, random_pure, rng};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::LN_2;

    fn bell() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        StateVector::new(ndarray::array![Complex64::new(s, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)])
            .unwrap()
            .projector()
    }

    #[test]
    fn entropy_examples() {
        let mut r = rng(5, 0);
        assert_abs_diff_eq!(von_neumann_entropy(&random_pure(6, &mut r).projector()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(von_neumann_entropy(&DensityMatrix::maximally_mixed(2)).unwrap(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(conditional_entropy(&bell(), 2, 2).unwrap(), -LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&bell(), 2, 2).unwrap(), 2.0 * LN_2, epsilon = 1e-12);
        assert!(conditional_entropy(&bell(), 3, 2).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = StateVector::basis(2, 0).projector();
        let one = StateVector::basis(2, 1).projector();
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(relative_entropy(&zero, &DensityMatrix::maximally_mixed(2)).unwrap(), LN_2, epsilon = 1e-12);
        // commuting states reduce to the classical divergence
        let p = [0.6f64, 0.3, 0.1];
        let q = [0.2f64, 0.5, 0.3];
        let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
        let d = relative_entropy(&DensityMatrix::from_diagonal(&p).unwrap(), &DensityMatrix::from_diagonal(&q).unwrap()).unwrap();
        assert_abs_diff_eq!(d, kl, epsilon = 1e-13);
        // mutual information is the divergence from the product of marginals
        let mut r = rng(8, 0);
        let rho = random_density(6, 6, &mut r);
        let prod = rho.reduce_first(2, 3).unwrap().tensor(&rho.reduce_second(2, 3).unwrap());
        assert_abs_diff_eq!(relative_entropy(&rho, &prod).unwrap(), mutual_information(&rho, 2, 3).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn product_states_and_positivity() {
        let mut r = rng(9, 0);
        for _ in 0..20 {
            let a = random_density(3, 2, &mut r);
            let b = random_density(4, 4, &mut r);
            let ab = a.tensor(&b);
            assert_abs_diff_eq!(conditional_entropy(&ab, 3, 4).unwrap(), von_neumann_entropy(&a).unwrap(), epsilon = 1e-9);
            assert!(mutual_information(&ab, 3, 4).unwrap().abs() <= 1e-10);
            let c = random_density(3, 3, &mut r);
            assert!(relative_entropy(&c, &a).unwrap() >= 0.0);
            assert!(relative_entropy(&c, &c).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn tsallis_and_renyi_examples() {
        let pure = StateVector::basis(3, 1).projector();
        assert_abs_diff_eq!(tsallis_q(&pure, 2.5).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(renyi_q(&pure, 2.5).unwrap(), 0.0, epsilon = 1e-14);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(tsallis_q(&mixed, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(renyi_q(&mixed, 2.0).unwrap(), LN_2, epsilon = 1e-15);
        let mut r = rng(12, 0);
        let rho = random_density(5, 5, &mut r);
        // tr ρ³ without an eigendecomposition
        let cube = linalg::trace(&rho.matrix().dot(rho.matrix()).dot(rho.matrix())).re;
        assert_abs_diff_eq!(tsallis_q(&rho, 3.0).unwrap(), (1.0 - cube) / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(renyi_q(&rho, 3.0).unwrap(), -cube.ln() / 2.0, epsilon = 1e-13);
        assert!(tsallis_q(&rho, 1.0).is_err() && renyi_q(&rho, 0.5).is_err());
    }

    #[test]
    fn lipschitz_checks() {
        let mut r = rng(13, 0);
        let a = random_density(2, 2, &mut r);
        let same = check_tsallis_lipschitz(&a, &a, 2.0).unwrap();
        assert_eq!(same.margin, Some(same.bound_value));
        for _ in 0..500 {
            let a = random_density(2, 1 + r.random_range(0..2), &mut r);
            let b = random_density(2, 1 + r.random_range(0..2), &mut r);
            assert!(check_tsallis_lipschitz(&a, &b, 2.0).unwrap().passed());
            let rep = check_renyi_lipschitz(&a, &b, 2.0, 0.7).unwrap();
            assert!(rep.passed());
        }
        // two orthogonal pure states are too far apart for the local estimate
        let rep = check_renyi_lipschitz(&StateVector::basis(2, 0).projector(), &StateVector::basis(2, 1).projector(), 2.0, 0.9).unwrap();
        assert_eq!(rep.params["status"], "inapplicable");
        assert_eq!(rep.pass, None);
    }

    #[test]
    fn auxiliary_functions() {
        assert_abs_diff_eq!(h_of(0.5).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!((h_of(0.0).unwrap(), h_of(1.0).unwrap(), g_of(0.0).unwrap()), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(r_eps(0.1, 1.0).unwrap(), 5.0 / 3.0, epsilon = 1e-15);
        assert!(h_of(1.1).is_err() && g_of(-1.0).is_err() && r_eps(0.1, 6.0).is_err() && r_eps(0.1, 0.0).is_err());
        assert!(r_eps(0.1, 5.0).is_ok());
    }

    #[test]
    fn number_spectrum_gibbs_entropy_is_g() {
        let n = builtin_spectrum("number").unwrap();
        for e in [0.1, 1.0, 7.5, 300.0] {
            assert_abs_diff_eq!(gibbs_entropy(&n, e).unwrap(), g_of(e).unwrap(), epsilon = 1e-10 * g_of(e).unwrap().max(1.0));
        }
    }

    #[test]
    fn continuity_examples() {
        let exact = ContinuityParams::new(10.0, 0.1, None, 1.0, EntropyFactor::ExactGibbs(builtin_spectrum("ho").unwrap())).unwrap();
        let b = entropy_continuity_bound(&exact, EntropyBoundKind::VnSimple).unwrap();
        // S(γ(100)) of the oscillator in closed form
        let s100 = (39999f64.sqrt() / 2.0).ln() + 100.0 * (201.0f64 / 199.0).ln();
        assert_abs_diff_eq!(b.exact_gibbs.unwrap(), 0.2 * s100 + h_of(0.1).unwrap(), epsilon = 1e-9);
        assert_abs_diff_eq!(b.exact_gibbs.unwrap(), 1.4461, epsilon = 5e-5);
        assert_abs_diff_eq!(b.asymptotic, 1.2461, epsilon = 5e-5);
        let asym = ContinuityParams::new(10.0, 0.1, None, 1.0, EntropyFactor::Asymptotic).unwrap();
        let b = entropy_continuity_bound(&asym, EntropyBoundKind::VnSimple).unwrap();
        assert_abs_diff_eq!(b.value(), 0.2 * 100f64.ln() + h_of(0.1).unwrap(), epsilon = 1e-14);
        assert!(b.exact_gibbs.is_none());
    }

    #[test]
    fn two_epsilon_forms() {
        let p = ContinuityParams::new(50.0, 0.05, Some(0.2), 1.0, EntropyFactor::ExactGibbs(builtin_spectrum("ho").unwrap())).unwrap();
        let d = p.delta().unwrap();
        assert_abs_diff_eq!(d, 0.15 / 1.2, epsilon = 1e-15);
        let two = entropy_continuity_bound(&p, EntropyBoundKind::VnTwoEps).unwrap();
        let cond = entropy_continuity_bound(&p, EntropyBoundKind::Conditional).unwrap();
        assert_abs_diff_eq!(two.asymptotic, (0.2 + 2.0 * d) * (50.0 / d).ln() + h_of(0.2).unwrap() + h_of(d).unwrap(), epsilon = 1e-12);
        let cond_expected = 2.0 * (0.2 + 4.0 * d) * (50.0 / d).ln() + 1.2 * h_of(0.2 / 1.2).unwrap() + 2.0 * h_of(d).unwrap();
        assert_abs_diff_eq!(cond.asymptotic, cond_expected, epsilon = 1e-12);
        assert!(cond.exact_gibbs.unwrap() > two.exact_gibbs.unwrap());
        let no_prime = ContinuityParams::new(50.0, 0.05, None, 1.0, EntropyFactor::Asymptotic).unwrap();
        assert!(entropy_continuity_bound(&no_prime, EntropyBoundKind::VnTwoEps).is_err());
        assert!(ContinuityParams::new(50.0, 0.3, Some(0.2), 1.0, EntropyFactor::Asymptotic).is_err());
    }

    #[test]
    fn bounds_vanish_as_epsilon_shrinks() {
        let ho = builtin_spectrum("ho").unwrap();
        let mut last = (f64::INFINITY, f64::INFINITY);
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let p = ContinuityParams::new(10.0, eps, None, 1.0, EntropyFactor::ExactGibbs(ho.clone())).unwrap();
            let b = entropy_continuity_bound(&p, EntropyBoundKind::VnSimple).unwrap();
            assert!(b.asymptotic < last.0 && b.exact_gibbs.unwrap() < last.1);
            last = (b.asymptotic, b.exact_gibbs.unwrap());
        }
        assert!(last.0 < 5e-3 && last.1 < 5e-3, "{last:?}");
    }

    #[test]
    fn bound_holds_on_perturbed_oscillator_states() {
        // mix a constrained state towards another one; both obey the energy bound
        let dim = 40;
        let fock = build_fock(dim).unwrap();
        let ho = builtin_spectrum("ho").unwrap();
        let mut r = rng(21, 0);
        for k in 0..30 {
            let a = random_density_on(dim, 8, 3, &mut r);
            let b = random_density_on(dim, 8, 3, &mut r);
            let lam = 0.02 * (1 + k % 10) as f64;
            let sigma = DensityMatrix::mixture(&[1.0 - lam, lam], &[a.clone(), b]).unwrap();
            let e = expected_energy(&a, &fock.osc_hamiltonian, 1.0).unwrap().max(expected_energy(&sigma, &fock.osc_hamiltonian, 1.0).unwrap());
            let eps = 0.5 * crate::metrics::trace_distance(&a, &sigma).unwrap();
            let p = ContinuityParams::new(e, eps, None, 1.0, EntropyFactor::ExactGibbs(ho.clone())).unwrap();
            let bound = entropy_continuity_bound(&p, EntropyBoundKind::VnSimple).unwrap().value();
            let observed = (von_neumann_entropy(&a).unwrap() - von_neumann_entropy(&sigma).unwrap()).abs();
            assert!(observed <= bound, "observed {observed} bound {bound}");
        }
    }

    #[test]
    fn attenuator_windows() {
        // ζ_{1/2} = 2√2, so the printed window is ε²/E
        assert_abs_diff_eq!(attenuator_entropy_window(0.1, 4.0).unwrap(), 0.01 / 4.0, epsilon = 1e-15);
        let certified = attenuator_certified_window(0.1, 4.0).unwrap();
        assert_abs_diff_eq!(crate::bounds::attenuator_bound(0.5, 4.0, certified).unwrap(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(attenuator_entropy_window(0.1, 4.0).unwrap() / certified, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn attenuator_entropy_change_within_bound() {
        let dim = 40;
        let (energy, eps, s) = (4.0, 0.1, 0.5f64);
        let fock = build_fock(dim).unwrap();
        let number = builtin_spectrum("number").unwrap();
        let t0 = attenuator_entropy_window(eps, energy).unwrap();
        let mut r = rng(31, 0);
        let mut checked = 0;
        while checked < 10 {
            let rho0 = random_density_on(dim, 12, 2, &mut r);
            if expected_energy(&rho0, &fock.number_op, 1.0).unwrap() > energy * s.exp() {
                continue;
            }
            let at_s = attenuator_apply(&rho0, s, LMax::Auto).unwrap();
            for frac in [0.1, 0.5, 0.99] {
                let later = attenuator_apply(&rho0, s + frac * t0, LMax::Auto).unwrap();
                let dist = 0.5 * crate::metrics::trace_distance(&at_s, &later).unwrap();
                assert!(dist <= eps, "distance {dist}");
                let p = ContinuityParams::new(energy, eps, None, 1.0, EntropyFactor::ExactGibbs(number.clone())).unwrap();
                let bound = entropy_continuity_bound(&p, EntropyBoundKind::VnSimple).unwrap();
                let observed = (von_neumann_entropy(&later).unwrap() - von_neumann_entropy(&at_s).unwrap()).abs();
                assert!(observed <= bound.exact_gibbs.unwrap(), "observed {observed} bound {bound:?}");
            }
            checked += 1;
        }
    }

    #[test]
    fn tsallis_along_attenuator_trajectory() {
        let dim = 30;
        let energy = 3.0;
        let fock = build_fock(dim).unwrap();
        let omega = crate::bounds::attenuator_bound(0.5, energy, 1.0).unwrap();
        let mut r = rng(41, 0);
        for _ in 0..10 {
            let rho = random_density_on(dim, 6, 2, &mut r);
            if expected_energy(&rho, &fock.number_op, 1.0).unwrap() > energy {
                continue;
            }
            for t in [1e-4, 1e-2, 0.3] {
                let out = attenuator_apply(&rho, t, LMax::Auto).unwrap();
                let observed = (tsallis_q(&out, 2.0).unwrap() - tsallis_q(&rho, 2.0).unwrap()).abs();
                assert!(observed <= tsallis_semigroup_bound(2.0, omega, 0.5, t).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn entropy_is_bounded_by_log_dim(seed in any::<u64>(), dim in 2usize..7, rank in 1usize..7) {
            let rho = random_density(dim, rank, &mut rng(seed, 0));
            let s = von_neumann_entropy(&rho).unwrap();
            prop_assert!(s >= 0.0 && s <= (dim as f64).ln() + 1e-12);
            prop_assert!(renyi_q(&rho, 2.0).unwrap() <= s + 1e-12);
        }
    }
}
