//! Spectra, partition functions, Gibbs states and their high-energy asymptotics.

mod asymptotics;
mod solve;

pub use asymptotics::{asymptotics_check, default_cutoffs, estimate_eta, n_updown, AsymptoticRow, AsymptoticsReport, FIT_RESIDUAL_TOL, MAX_PAIR_LEVELS};
pub use solve::{gibbs_entropy, gibbs_state, mean_energy, partition_function, solve_beta, GibbsSolution, PartitionSum, MAX_TERMS, TAIL_TOL};

use std::path::{Path, PathBuf};

use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::registry::parse_name_params;

/// `λᵢ = coeff·(i + shift)^power`, used both as an exact spectrum and as a lower bound on one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub power: f64,
    pub shift: f64,
}

impl PowerLaw {
    pub fn value(&self, i: usize) -> f64 {
        let x = i as f64 + self.shift;
        let xp = if self.power == 1.0 {
            x
        } else if self.power == 2.0 {
            x * x
        } else {
            x.powf(self.power)
        };
        self.coeff * xp
    }

    /// Bound on `Σ_{i≥n} λᵢᵏ e^{−β(λᵢ−λ₀)}` for any spectrum dominating the law from `n − 1` on,
    /// by the integral `∫_{n−1}^∞` of the law. Needs the integrand to be decreasing there,
    /// i.e. `law(n−1) ≥ k/β`; returns `None` otherwise.
    pub fn tail_moment(&self, n: usize, beta: f64, lambda0: f64, k: u32) -> Option<f64> {
        let x0 = n as f64 - 1.0 + self.shift;
        if n == 0 || x0 <= 0.0 {
            return None;
        }
        let start = self.coeff * x0.powf(self.power);
        if start * beta < k as f64 {
            return None;
        }
        let a = 1.0 / self.power + k as f64;
        let upper = gamma_ur(a, beta * start);
        if upper == 0.0 {
            return Some(0.0);
        }
        let ln = -self.power.ln() - (beta * self.coeff).ln() / self.power - k as f64 * beta.ln() + ln_gamma(a) + upper.ln() + beta * lambda0;
        Some(ln.exp())
    }
}

/// A growth law known to bound the eigenvalues from below from index `valid_from` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailModel {
    pub law: PowerLaw,
    pub valid_from: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectrumSource {
    ClosedForm { name: String, params: Vec<f64> },
    File { path: PathBuf },
    Values,
}

#[derive(Debug, Clone, PartialEq)]
enum Levels {
    Law(PowerLaw),
    Listed(Vec<f64>),
}

/// Nondecreasing eigenvalue sequence, possibly infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub source: SpectrumSource,
    levels: Levels,
    tail: Option<TailModel>,
}

impl Spectrum {
    /// Infinite spectrum given exactly by a power law.
    pub fn from_law(source: SpectrumSource, law: PowerLaw) -> Result<Self> {
        if !(law.coeff > 0.0 && law.power > 0.0 && law.shift >= 0.0) || !(law.coeff.is_finite() && law.power.is_finite() && law.shift.is_finite()) {
            return Err(invalid(format!("power law needs coeff > 0, power > 0, shift >= 0, got {law:?}")));
        }
        Ok(Self { source, levels: Levels::Law(law), tail: Some(TailModel { law, valid_from: 0 }) })
    }

    /// Finite spectrum made of exactly these values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        check_levels(&values)?;
        Ok(Self { source: SpectrumSource::Values, levels: Levels::Listed(values), tail: None })
    }

    /// Leading eigenvalues followed by an unlisted tail obeying `tail`.
    pub fn with_tail(source: SpectrumSource, values: Vec<f64>, tail: TailModel) -> Result<Self> {
        check_levels(&values)?;
        for (i, &v) in values.iter().enumerate().skip(tail.valid_from) {
            if v < tail.law.value(i) * (1.0 - 1e-12) {
                return Err(Error::Parse(format!("eigenvalue {v} at index {i} lies below the declared tail law {}", tail.law.value(i))));
            }
        }
        Ok(Self { source, levels: Levels::Listed(values), tail: Some(tail) })
    }

    pub fn eigenvalue(&self, i: usize) -> Option<f64> {
        match &self.levels {
            Levels::Law(l) => Some(l.value(i)),
            Levels::Listed(v) => v.get(i).copied(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalue(0).expect("spectra are nonempty")
    }

    /// Number of explicitly known eigenvalues; `None` for closed forms.
    pub fn listed_len(&self) -> Option<usize> {
        match &self.levels {
            Levels::Law(_) => None,
            Levels::Listed(v) => Some(v.len()),
        }
    }

    pub fn tail_model(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// A listed spectrum without a tail law is the whole (finite-dimensional) spectrum.
    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// All eigenvalues `≤ cutoff`.
    pub fn levels_up_to(&self, cutoff: f64, budget: usize) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let Some(v) = self.eigenvalue(i) else {
                if !self.is_finite() {
                    return Err(invalid(format!("cutoff {cutoff} exceeds the listed eigenvalues; the unlisted tail is not known exactly")));
                }
                break;
            };
            if v > cutoff {
                break;
            }
            if out.len() >= budget {
                return Err(Error::Budget(format!("more than {budget} eigenvalues below {cutoff}")));
            }
            out.push(v);
            i += 1;
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_spectrum_text(&text, SpectrumSource::File { path: path.to_path_buf() })
    }
}

fn check_levels(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Parse("spectrum has no eigenvalues".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Parse(format!("eigenvalues must be finite and nonnegative, found {v}")));
    }
    if let Some(w) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Parse(format!("eigenvalues must be nondecreasing (index {})", w + 1)));
    }
    Ok(())
}

/// One eigenvalue per line, `#` comments, optional `tail: power <p> <coeff>` or `tail: poly <degree>`.
///
/// `power` declares `λᵢ ≥ coeff·(i+1)^p` for every index. `poly` takes the coefficient
/// from the upper half of the listed data: `coeff = min λᵢ/(i+1)^degree` over `i ≥ n/2`.
pub fn parse_spectrum_text(text: &str, source: SpectrumSource) -> Result<Spectrum> {
    let mut values = Vec::new();
    let mut header: Option<Vec<String>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let body = line.trim_start_matches('#').trim();
        if let Some(rest) = body.strip_prefix("tail:") {
            if header.is_some() {
                return Err(Error::Parse(format!("line {}: duplicate tail header", lineno + 1)));
            }
            header = Some(rest.split_whitespace().map(String::from).collect());
            continue;
        }
        let data = line.split('#').next().unwrap_or("").trim();
        if data.is_empty() {
            continue;
        }
        let v: f64 = data.parse().map_err(|e| Error::Parse(format!("line {}: `{data}`: {e}", lineno + 1)))?;
        values.push(v);
    }
    check_levels(&values)?;
    let Some(h) = header else {
        return Ok(Spectrum { source, levels: Levels::Listed(values), tail: None });
    };
    let num = |s: &String| s.parse::<f64>().map_err(|e| Error::Parse(format!("tail header `{s}`: {e}")));
    let tail = match h.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["power", p, c] => TailModel { law: PowerLaw { coeff: num(&c.to_string())?, power: num(&p.to_string())?, shift: 1.0 }, valid_from: 0 },
        ["poly", d] => {
            let degree = num(&d.to_string())?;
            let from = values.len() / 2;
            let coeff = values.iter().enumerate().skip(from).map(|(i, v)| v / ((i + 1) as f64).powf(degree)).fold(f64::INFINITY, f64::min);
            TailModel { law: PowerLaw { coeff, power: degree, shift: 1.0 }, valid_from: from }
        }
        _ => return Err(Error::Parse(format!("tail header must be `power <p> <coeff>` or `poly <degree>`, got `{}`", h.join(" ")))),
    };
    if !(tail.law.coeff > 0.0 && tail.law.power > 0.0 && tail.law.coeff.is_finite()) {
        return Err(Error::Parse(format!("tail law needs positive coefficient and exponent, got {:?}", tail.law)));
    }
    Spectrum::with_tail(source, values, tail)
}

/// Named closed-form spectrum.
pub trait SpectrumFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn param_names(&self) -> &'static [&'static str];
    fn defaults(&self) -> &'static [f64];
    fn law(&self, params: &[f64]) -> Result<PowerLaw>;
}

struct Oscillator;
struct Number;
struct BoxWell;
struct Weyl;

static FAMILIES: &[&dyn SpectrumFamily] = &[&Oscillator, &Number, &BoxWell, &Weyl];

impl SpectrumFamily for Oscillator {
    fn name(&self) -> &'static str {
        "ho"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn defaults(&self) -> &'static [f64] {
        &[]
    }
    /// `i + 1/2`
    fn law(&self, _: &[f64]) -> Result<PowerLaw> {
        Ok(PowerLaw { coeff: 1.0, power: 1.0, shift: 0.5 })
    }
}

impl SpectrumFamily for Number {
    fn name(&self) -> &'static str {
        "number"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn defaults(&self) -> &'static [f64] {
        &[]
    }
    /// `i`, the photon-number operator
    fn law(&self, _: &[f64]) -> Result<PowerLaw> {
        Ok(PowerLaw { coeff: 1.0, power: 1.0, shift: 0.0 })
    }
}

impl SpectrumFamily for BoxWell {
    fn name(&self) -> &'static str {
        "box"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn defaults(&self) -> &'static [f64] {
        &[]
    }
    /// `i²` for `i ≥ 1`
    fn law(&self, _: &[f64]) -> Result<PowerLaw> {
        Ok(PowerLaw { coeff: 1.0, power: 2.0, shift: 1.0 })
    }
}

impl SpectrumFamily for Weyl {
    fn name(&self) -> &'static str {
        "weyl"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["n", "volume"]
    }
    fn defaults(&self) -> &'static [f64] {
        &[3.0, 1.0]
    }
    /// `4π²/(C_n·vol)^{2/n}·m^{2/n}` for `m ≥ 1`, `C_n = π^{n/2}/Γ(n/2+1)` the unit-ball volume.
    fn law(&self, p: &[f64]) -> Result<PowerLaw> {
        let (n, vol) = (p[0], p[1]);
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(invalid(format!("weyl dimension must be a positive integer, got {n}")));
        }
        if !(vol > 0.0 && vol.is_finite()) {
            return Err(invalid(format!("weyl volume must be positive, got {vol}")));
        }
        let ln_cn = 0.5 * n * std::f64::consts::PI.ln() - ln_gamma(0.5 * n + 1.0);
        let coeff = 4.0 * std::f64::consts::PI.powi(2) * (-(2.0 / n) * (ln_cn + vol.ln())).exp();
        Ok(PowerLaw { coeff, power: 2.0 / n, shift: 1.0 })
    }
}

pub fn spectrum_names() -> Vec<&'static str> {
    FAMILIES.iter().map(|f| f.name()).collect()
}

/// `ho`, `number`, `box` or `weyl(n, volume)`.
pub fn builtin_spectrum(spec: &str) -> Result<Spectrum> {
    let (name, params) = parse_name_params(spec)?;
    let fam = FAMILIES.iter().find(|f| f.name() == name).ok_or_else(|| Error::UnknownName { kind: "spectrum", name: name.clone(), known: spectrum_names().join(", ") })?;
    let params = if params.is_empty() { fam.defaults().to_vec() } else { params };
    if params.len() != fam.param_names().len() {
        return Err(invalid(format!("spectrum {} takes parameters ({}), got {}", fam.name(), fam.param_names().join(", "), params.len())));
    }
    let law = fam.law(&params)?;
    Spectrum::from_law(SpectrumSource::ClosedForm { name, params }, law)
}

/// `file:PATH`, an existing path, or a builtin name.
pub fn resolve_spectrum(arg: &str) -> Result<Spectrum> {
    if let Some(path) = arg.strip_prefix("file:") {
        return Spectrum::from_file(Path::new(path));
    }
    let p = Path::new(arg);
    if p.is_file() {
        return Spectrum::from_file(p);
    }
    builtin_spectrum(arg)
}
