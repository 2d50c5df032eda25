use crate::channels::{BoundedBy, LindbladModel};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{build_fock, spectral_function, HermitianOperator};

/// Named Lindblad model on a Fock truncation of size `dim_fock`.
pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    fn param_names(&self) -> &'static [&'static str];
    fn defaults(&self) -> &'static [f64];
    fn build(&self, dim_fock: usize, params: &[f64]) -> Result<LindbladModel>;
}

struct Attenuator;
struct Amplifier;
struct DampedPumped;
struct Brownian;
struct JaynesCummings;

static PRESETS: &[&dyn Preset] = &[&Attenuator, &Amplifier, &DampedPumped, &Brownian, &JaynesCummings];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name()).collect()
}

/// Splits `name(p1,p2,...)` or `name:p1,p2,...` into the name and its numeric parameters.
pub fn parse_preset_spec(spec: &str) -> Result<(String, Vec<f64>)> {
    crate::registry::parse_name_params(spec)
}

pub fn preset_with_params(name: &str, dim_fock: usize, params: &[f64]) -> Result<LindbladModel> {
    let p = PRESETS.iter().find(|p| p.name() == name).ok_or_else(|| Error::UnknownName { kind: "preset", name: name.into(), known: preset_names().join(", ") })?;
    let params: Vec<f64> = if params.is_empty() { p.defaults().to_vec() } else { params.to_vec() };
    if params.len() != p.param_names().len() {
        return Err(invalid(format!("preset {} takes parameters ({}), got {}", p.name(), p.param_names().join(", "), params.len())));
    }
    if params.iter().any(|x| !x.is_finite()) {
        return Err(invalid("preset parameters must be finite"));
    }
    p.build(dim_fock, &params)
}

/// Looks up a preset by its spec string, e.g. `damped_pumped(1,1,1)`.
pub fn preset(spec: &str, dim_fock: usize) -> Result<LindbladModel> {
    let (name, params) = parse_preset_spec(spec)?;
    preset_with_params(&name, dim_fock, &params)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be nonnegative, got {x}")))
    }
}

impl Preset for Attenuator {
    fn name(&self) -> &'static str {
        "attenuator"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn defaults(&self) -> &'static [f64] {
        &[]
    }
    fn build(&self, dim: usize, _: &[f64]) -> Result<LindbladModel> {
        let f = build_fock(dim)?;
        let h = HermitianOperator::from_diagonal(&vec![0.0; dim]);
        LindbladModel::new("attenuator", h, vec![f.ladder.lower.clone()], BoundedBy::KBoundsH, Some((0.0, 0.0)), Some(f.number_op))
    }
}

impl Preset for Amplifier {
    fn name(&self) -> &'static str {
        "amplifier"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn defaults(&self) -> &'static [f64] {
        &[]
    }
    fn build(&self, dim: usize, _: &[f64]) -> Result<LindbladModel> {
        let f = build_fock(dim)?;
        let h = HermitianOperator::from_diagonal(&vec![0.0; dim]);
        let m = HermitianOperator::new(f.ladder.aa_dagger())?;
        LindbladModel::new("amplifier", h, vec![f.ladder.raise.clone()], BoundedBy::KBoundsH, Some((0.0, 0.0)), Some(m))
    }
}

impl Preset for DampedPumped {
    fn name(&self) -> &'static str {
        "damped_pumped"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["gamma_down", "gamma_up", "zeta"]
    }
    fn defaults(&self) -> &'static [f64] {
        &[1.0, 0.5, 1.0]
    }
    fn build(&self, dim: usize, p: &[f64]) -> Result<LindbladModel> {
        let (down, up, zeta) = (p[0], p[1], p[2]);
        nonnegative("gamma_down", down)?;
        nonnegative("gamma_up", up)?;
        positive("zeta", zeta)?;
        let f = build_fock(dim)?;
        let h = f.number_op.scaled(zeta);
        let ops = vec![f.ladder.lower.mapv(|z| z * down.sqrt()), f.ladder.raise.mapv(|z| z * up.sqrt())];
        // K = −((γ↓+γ↑)N + γ↑)/2 on the untruncated space, so ‖Kφ‖ ≤ (γ↓+γ↑)/(2ζ)‖Hφ‖ + γ↑/2 ‖φ‖
        LindbladModel::new("damped_pumped", h, ops, BoundedBy::HBoundsK, Some(((down + up) / (2.0 * zeta), up / 2.0)), None)
    }
}

impl Preset for Brownian {
    fn name(&self) -> &'static str {
        "brownian"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["gamma1", "beta1", "gamma2", "beta2"]
    }
    fn defaults(&self) -> &'static [f64] {
        &[0.5, 0.3, 0.2, -0.1]
    }
    fn build(&self, dim: usize, p: &[f64]) -> Result<LindbladModel> {
        let f = build_fock(dim)?;
        let x = f.ladder.position();
        let dx = f.ladder.derivative();
        // −d²/dx² + x² = 2N + 1 in these quadratures
        let h = HermitianOperator::from_diagonal(&(0..dim).map(|n| 2.0 * n as f64 + 1.0).collect::<Vec<_>>());
        let ops: Vec<CMat> = [(p[0], p[1]), (p[2], p[3])].iter().filter(|(g, b)| *g != 0.0 || *b != 0.0).map(|(g, b)| x.mapv(|z| z * *g) + dx.mapv(|z| z * *b)).collect();
        if ops.is_empty() {
            return Err(invalid("brownian needs at least one nonzero coupling"));
        }
        LindbladModel::new("brownian", h, ops, BoundedBy::HBoundsK, None, None)
    }
}

impl Preset for JaynesCummings {
    fn name(&self) -> &'static str {
        "jaynes_cummings"
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["nu", "delta", "omega", "eta", "gamma"]
    }
    fn defaults(&self) -> &'static [f64] {
        &[1.0, 0.5, 0.8, 0.3, 0.4]
    }
    /// Acts on `Fock ⊗ qubit` (dimension `2·dim_fock`, Fock index major).
    fn build(&self, dim: usize, p: &[f64]) -> Result<LindbladModel> {
        let (nu, delta, omega, eta, gamma) = (p[0], p[1], p[2], p[3], p[4]);
        positive("nu", nu)?;
        positive("gamma", gamma)?;
        let f = build_fock(dim)?;
        let id_f = linalg::identity(dim);
        let id_q = linalg::identity(2);
        let sz = linalg::diag(&[1.0, -1.0]);
        let mut sminus = CMat::zeros((2, 2));
        sminus[[1, 0]] = linalg::ONE;
        let splus = linalg::dagger(&sminus);
        let quad = HermitianOperator::new(&f.ladder.lower + &f.ladder.raise)?;
        let sine = spectral_function(&quad, |x| (eta * x).sin())?;
        let h = linalg::kron(f.number_op.matrix(), &id_q).mapv(|z| z * nu) + linalg::kron(&id_f, &sz).mapv(|z| z * (delta / 2.0))
            - linalg::kron(sine.matrix(), &(&splus + &sminus)).mapv(|z| z * (omega / 2.0));
        let h = HermitianOperator::new(linalg::hermitize(&h))?;
        let ops = vec![linalg::kron(&id_f, &sminus).mapv(|z| z * gamma.sqrt()), linalg::kron(&id_f, &splus).mapv(|z| z * gamma.sqrt())];
        // K = −Γ/2 · I
        LindbladModel::new("jaynes_cummings", h, ops, BoundedBy::HBoundsK, Some((0.0, gamma / 2.0)), None)
    }
}
