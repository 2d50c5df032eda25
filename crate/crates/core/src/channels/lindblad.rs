use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::HermitianOperator;

/// Largest `dim²` for which Liouvillian evolution is attempted.
pub const LINDBLAD_DIM_LIMIT: usize = 4096;

/// Which relative-boundedness hypothesis the open-system bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedBy {
    /// `‖Kφ‖ ≤ a‖Hφ‖ + b‖φ‖`; constraint operator `|H|`.
    HBoundsK,
    /// `‖Hφ‖ ≤ a‖Kφ‖ + b‖φ‖`; constraint operator `|K|`.
    KBoundsH,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RelBoundSource {
    Analytic,
    /// Least-squares fit over the eigenbasis of the bounding operator, shifted to hold on every eigenvector.
    Fitted { max_violation_before_shift: f64 },
}

/// Generator `𝓛(ρ) = −i[H, ρ] + Σ (L ρ L† − ½{L†L, ρ})` with `K = −½ Σ L†L`.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub name: String,
    pub hamiltonian: HermitianOperator,
    pub lindblad_ops: Vec<CMat>,
    pub dissipator: HermitianOperator,
    pub rel_bound_a: f64,
    pub rel_bound_b: f64,
    pub bounded_by: BoundedBy,
    pub rel_bound_source: RelBoundSource,
    /// Operator `S` of the energy constraint the bound refers to.
    pub constraint: HermitianOperator,
}

impl LindbladModel {
    /// Assembles the model, deriving `K` and checking dissipativity. The relative bounds
    /// are fitted when not supplied.
    pub fn new(
        name: impl Into<String>,
        hamiltonian: HermitianOperator,
        lindblad_ops: Vec<CMat>,
        bounded_by: BoundedBy,
        rel_bounds: Option<(f64, f64)>,
        constraint: Option<HermitianOperator>,
    ) -> Result<Self> {
        let d = hamiltonian.dim();
        let mut k = CMat::zeros((d, d));
        for l in &lindblad_ops {
            linalg::check_same_dim(d, linalg::check_square(l)?)?;
            k = k - linalg::dagger(l).dot(l).mapv(|z| z * 0.5);
        }
        let dissipator = HermitianOperator::new(linalg::hermitize(&k))?;
        let top = *dissipator.eigenvalues()?.last().expect("nonempty");
        if top > 1e-10 {
            return Err(Error::InvalidParameter(format!("dissipator has positive eigenvalue {top:e}")));
        }
        let (a, b, source) = match rel_bounds {
            Some((a, b)) => (a, b, RelBoundSource::Analytic),
            None => {
                let (a, b, v) = match bounded_by {
                    BoundedBy::HBoundsK => fit_relative_bound(dissipator.matrix(), &hamiltonian)?,
                    BoundedBy::KBoundsH => fit_relative_bound(hamiltonian.matrix(), &dissipator)?,
                };
                (a, b, RelBoundSource::Fitted { max_violation_before_shift: v })
            }
        };
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidParameter(format!("relative bounds must be nonnegative, got a={a}, b={b}")));
        }
        let constraint = match constraint {
            Some(s) => s,
            None => match bounded_by {
                BoundedBy::HBoundsK => hamiltonian.abs()?,
                BoundedBy::KBoundsH => dissipator.abs()?,
            },
        };
        linalg::check_same_dim(d, constraint.dim())?;
        Ok(Self { name: name.into(), hamiltonian, lindblad_ops, dissipator, rel_bound_a: a, rel_bound_b: b, bounded_by, rel_bound_source: source, constraint })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// `G = K − iH`.
    pub fn g_operator(&self) -> CMat {
        self.dissipator.matrix() - &self.hamiltonian.matrix().mapv(|z| z * linalg::I)
    }

    /// Direct evaluation of the generator on a (possibly extended) matrix.
    pub fn generator_action(&self, x: &CMat, r: usize) -> CMat {
        let g = self.g_operator();
        let gx = linalg::lmul_sys(&g, x, r);
        let xg = linalg::dagger(&linalg::lmul_sys(&g, &linalg::dagger(x), r));
        let mut out = gx + xg;
        for l in &self.lindblad_ops {
            out = out + linalg::conjugate_sys(l, x, r);
        }
        out
    }
}

/// Fit of `‖A v‖ ≤ a|λ| + b` over the eigenpairs `(λ, v)` of `bounding`.
///
/// Returns `(a, b, worst violation of the raw least-squares line)`.
pub fn fit_relative_bound(a_op: &CMat, bounding: &HermitianOperator) -> Result<(f64, f64, f64)> {
    let eig = bounding.eigensystem()?;
    let av = a_op.dot(&eig.vectors);
    let xs: Vec<f64> = eig.values.iter().map(|x| x.abs()).collect();
    let ys: Vec<f64> = av.columns().into_iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let intercept = (my - slope * mx).max(0.0);
    let violation = xs.iter().zip(&ys).map(|(x, y)| y - slope * x - intercept).fold(0.0, f64::max);
    Ok((slope, intercept + violation, violation))
}

/// Column-stacked superoperator: `vec(𝓛(X)) = 𝓛̂ · vec(X)` with `vec(X)[i + j·n] = X[i, j]`.
pub fn lindblad_superoperator(model: &LindbladModel) -> Result<CMat> {
    let d = model.dim();
    if d * d > LINDBLAD_DIM_LIMIT {
        return Err(Error::DimensionLimit { dim: d, limit: LINDBLAD_DIM_LIMIT });
    }
    let id = linalg::identity(d);
    let g = model.g_operator();
    // vec(A X B) = (Bᵀ ⊗ A) vec(X)
    let mut sup = linalg::kron(&id, &g) + linalg::kron(&g.mapv(|z| z.conj()), &id);
    for l in &model.lindblad_ops {
        sup = sup + linalg::kron(&l.mapv(|z| z.conj()), l);
    }
    Ok(sup)
}
