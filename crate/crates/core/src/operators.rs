//! Finite truncations of the bosonic operators and spectral calculus.

use std::sync::OnceLock;

use ndarray::Array1;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::state::DensityMatrix;

/// Soft limit on operator dimension; larger matrices work but are slow.
pub const SOFT_DIM_LIMIT: usize = 200;

/// Default tolerated probability mass outside a truncation.
pub const DEFAULT_LEAK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: CMat,
}

/// Dense self-adjoint matrix with a lazily computed eigendecomposition.
#[derive(Debug)]
pub struct HermitianOperator {
    matrix: CMat,
    eig: OnceLock<Eigensystem>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let eig = OnceLock::new();
        if let Some(e) = self.eig.get() {
            let _ = eig.set(e.clone());
        }
        Self { matrix: self.matrix.clone(), eig }
    }
}

impl HermitianOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n = linalg::check_square(&matrix)?;
        if n == 0 {
            return Err(Error::InvalidDimension { dim: 0, reason: "empty operator".into() });
        }
        if n > SOFT_DIM_LIMIT {
            log::warn!("operator dimension {n} exceeds the soft limit {SOFT_DIM_LIMIT}");
        }
        let asym = linalg::max_asymmetry(&matrix);
        if asym > 1e-12 * linalg::max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self { matrix: linalg::hermitize(&matrix), eig: OnceLock::new() })
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let eig = OnceLock::new();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut vectors = CMat::zeros((values.len(), values.len()));
        for (col, &idx) in order.iter().enumerate() {
            vectors[[idx, col]] = linalg::ONE;
        }
        let _ = eig.set(Eigensystem { values: order.iter().map(|&i| values[i]).collect(), vectors });
        Self { matrix: linalg::diag(values), eig }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn eigensystem(&self) -> Result<&Eigensystem> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let (values, vectors) = linalg::eigh(&self.matrix)?;
        // a concurrent fill may win; both results are equivalent
        let _ = self.eig.set(Eigensystem { values, vectors });
        Ok(self.eig.get().expect("eigensystem just set"))
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.eigensystem()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let v = self.eigenvalues()?;
        Ok(v[0].abs().max(v[v.len() - 1].abs()))
    }

    /// `|op|`, the absolute value through functional calculus.
    pub fn abs(&self) -> Result<HermitianOperator> {
        spectral_function(self, |x| x.abs())
    }

    pub fn scaled(&self, factor: f64) -> HermitianOperator {
        let eig = OnceLock::new();
        if let Some(e) = self.eig.get() {
            if factor >= 0.0 {
                let _ = eig.set(Eigensystem { values: e.values.iter().map(|v| v * factor).collect(), vectors: e.vectors.clone() });
            }
        }
        Self { matrix: self.matrix.mapv(|z| z * factor), eig }
    }
}

/// Truncated annihilation/creation pair on the Fock levels `0..dim`.
#[derive(Debug, Clone)]
pub struct LadderPair {
    pub dim: usize,
    /// `a|n⟩ = √n |n−1⟩`.
    pub lower: CMat,
    pub raise: CMat,
}

impl LadderPair {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, reason: "Fock truncation needs dim >= 2".into() });
        }
        let mut lower = CMat::zeros((dim, dim));
        for n in 1..dim {
            lower[[n - 1, n]] = c((n as f64).sqrt());
        }
        let raise = linalg::dagger(&lower);
        Ok(Self { dim, lower, raise })
    }

    /// `a a†` on the truncation; equals `N + 1` except in the last level, where it is 0.
    pub fn aa_dagger(&self) -> CMat {
        self.lower.dot(&self.raise)
    }

    /// Position quadrature `(a + a†)/√2`.
    pub fn position(&self) -> CMat {
        (&self.lower + &self.raise).mapv(|z| z / 2f64.sqrt())
    }

    /// `d/dx = (a − a†)/√2`.
    pub fn derivative(&self) -> CMat {
        (&self.lower - &self.raise).mapv(|z| z / 2f64.sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct FockSystem {
    pub ladder: LadderPair,
    pub number_op: HermitianOperator,
    pub osc_hamiltonian: HermitianOperator,
}

pub fn build_fock(dim: usize) -> Result<FockSystem> {
    let ladder = LadderPair::new(dim)?;
    let n: Vec<f64> = (0..dim).map(|k| k as f64).collect();
    let osc: Vec<f64> = n.iter().map(|k| k + 0.5).collect();
    Ok(FockSystem { ladder, number_op: HermitianOperator::from_diagonal(&n), osc_hamiltonian: HermitianOperator::from_diagonal(&osc) })
}

/// Unit vector in a truncated Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Array1<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "empty state vector".into() });
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotAState(format!("vector norm {norm} != 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Array1<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotAState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.mapv(|z| z / norm) })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Array1::zeros(dim);
        v[k] = linalg::ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = &self.amplitudes;
        let m = CMat::from_shape_fn((v.len(), v.len()), |(i, j)| v[i] * v[j].conj());
        DensityMatrix::from_matrix_unchecked(m)
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Poisson mass `Σ_{n≥dim} e^{−x} xⁿ/n!` with `x = |α|²`.
pub fn coherent_leak(x: f64, dim: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = (-x + dim as f64 * x.ln() - ln_gamma(dim as f64 + 1.0)).exp();
    let mut total = 0.0;
    let mut n = dim;
    loop {
        total += term;
        n += 1;
        term *= x / n as f64;
        if (n as f64) > x && term < 1e-18 * total.max(1e-300) {
            break;
        }
        if n > dim + 100_000 {
            break;
        }
    }
    total.min(1.0)
}

/// Smallest truncation whose coherent-state leak is at most `tol`.
pub fn coherent_required_dim(alpha: Complex64, tol: f64) -> usize {
    let x = alpha.norm_sqr();
    let mut d = 1;
    while coherent_leak(x, d) > tol {
        d += 1;
    }
    d.max(2)
}

/// Truncated coherent state `e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩`, renormalized after truncation.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    if dim < 1 {
        return Err(Error::InvalidDimension { dim, reason: "coherent state needs dim >= 1".into() });
    }
    let leak = coherent_leak(alpha.norm_sqr(), dim);
    if leak > DEFAULT_LEAK_TOLERANCE {
        return Err(Error::TruncationTooSmall { required_dim: coherent_required_dim(alpha, DEFAULT_LEAK_TOLERANCE), leak });
    }
    StateVector::normalized(coherent_amplitudes(alpha, dim))
}

/// Raw (un-renormalized) coherent amplitudes on the first `dim` levels.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Array1<Complex64> {
    let mut amp = Array1::zeros(dim);
    let mut cur = c((-alpha.norm_sqr() / 2.0).exp());
    for n in 0..dim {
        if n > 0 {
            cur = cur * alpha / (n as f64).sqrt();
        }
        amp[n] = cur;
    }
    amp
}

/// `f(op) = V diag(f(λᵢ)) V†`.
pub fn spectral_function(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let eig = op.eigensystem()?;
    let mut mapped = Vec::with_capacity(eig.values.len());
    for &lambda in &eig.values {
        let v = f(lambda);
        if !v.is_finite() {
            return Err(Error::Domain { eigenvalue: lambda });
        }
        mapped.push(v);
    }
    let matrix = linalg::hermitize(&linalg::reconstruct(&mapped, &eig.vectors));
    let cache = OnceLock::new();
    let mut order: Vec<usize> = (0..mapped.len()).collect();
    order.sort_by(|&a, &b| mapped[a].total_cmp(&mapped[b]));
    let vectors = eig.vectors.select(ndarray::Axis(1), &order);
    let _ = cache.set(Eigensystem { values: order.iter().map(|&i| mapped[i]).collect(), vectors });
    Ok(HermitianOperator { matrix, eig: cache })
}

/// `op^power` with integer powers taken literally and fractional powers requiring `op ≥ 0`.
pub fn operator_power(op: &HermitianOperator, power: f64) -> Result<HermitianOperator> {
    if power.fract() == 0.0 && power.abs() < 64.0 {
        let p = power as i32;
        return spectral_function(op, |x| x.powi(p));
    }
    let min = op.min_eigenvalue()?;
    if min < -1e-12 * op.spectral_norm()?.max(1.0) {
        return Err(Error::Domain { eigenvalue: min });
    }
    spectral_function(op, |x| x.max(0.0).powf(power))
}

/// `tr(op^power · ρ)`.
pub fn expected_energy(rho: &DensityMatrix, op: &HermitianOperator, power: f64) -> Result<f64> {
    linalg::check_same_dim(op.dim(), rho.dim())?;
    let p = operator_power(op, power)?;
    Ok(trace_product(p.matrix(), rho.matrix()).re)
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut s = linalg::ZERO;
    for i in 0..n {
        for k in 0..n {
            s += a[[i, k]] * b[[k, i]];
        }
    }
    s
}

/// `tr((S ⊗ I_r) X)` for a system operator `S` of size `d` and an extended matrix of size `d·r`.
pub fn extended_expectation(s: &CMat, x: &CMat, r: usize) -> f64 {
    let d = s.nrows();
    trace_product(s, &linalg::partial_trace_second(x, d, r)).re
}
