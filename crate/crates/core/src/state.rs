use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Positive unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity at the strict tolerances.
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOL, PSD_TOL)
    }

    /// Accepts roundoff from propagation: hermitizes, then checks trace and positivity at `tol`.
    pub fn from_evolved(matrix: CMat, tol: f64) -> Result<Self> {
        let n = linalg::check_square(&matrix)?;
        let asym = linalg::max_asymmetry(&matrix);
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let m = linalg::hermitize(&matrix);
        let tr = linalg::trace(&m).re;
        if (tr - 1.0).abs() > tol {
            return Err(Error::NotAState(format!("trace {tr} deviates from 1 by more than {tol:e}")));
        }
        let _ = n;
        let min = linalg::eigvalsh(&m)?[0];
        if min < -tol {
            return Err(Error::NotAState(format!("minimum eigenvalue {min:e} below -{tol:e}")));
        }
        Ok(Self { matrix: m })
    }

    fn with_tolerance(matrix: CMat, herm_tol: f64, psd_tol: f64) -> Result<Self> {
        let n = linalg::check_square(&matrix)?;
        if n == 0 {
            return Err(Error::InvalidDimension { dim: 0, reason: "empty density matrix".into() });
        }
        let asym = linalg::max_asymmetry(&matrix);
        if asym > herm_tol {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let m = linalg::hermitize(&matrix);
        let tr = linalg::trace(&m).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr} != 1")));
        }
        let min = linalg::eigvalsh(&m)?[0];
        if min < -psd_tol {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix: m })
    }

    /// Caller guarantees the state property (constructed projectors, mixtures of states).
    pub(crate) fn from_matrix_unchecked(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim).mapv(|z| z / dim as f64) }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Eigenvalues with negatives from roundoff clipped to 0.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eigvalsh(&self.matrix)?.into_iter().map(|x| x.max(0.0)).collect())
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Convex combination `Σ wᵢ ρᵢ`.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Shape { expected: format!("{} states", weights.len()), found: format!("{}", states.len()) });
        }
        let n = states[0].dim();
        let mut m = CMat::zeros((n, n));
        for (w, s) in weights.iter().zip(states) {
            linalg::check_same_dim(n, s.dim())?;
            m.scaled_add(linalg::c(*w), s.matrix());
        }
        // a convex combination of accepted states needs no further check
        let total: f64 = weights.iter().sum();
        if weights.iter().all(|&w| w >= 0.0) && (total - 1.0).abs() <= TRACE_TOL {
            return Ok(Self::from_matrix_unchecked(linalg::hermitize(&m)));
        }
        Self::new(m)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }

    /// Reduced state on the first factor of a `da × db` bipartition.
    pub fn reduce_first(&self, da: usize, db: usize) -> Result<Self> {
        linalg::check_same_dim(da * db, self.dim())?;
        Ok(Self { matrix: linalg::partial_trace_second(&self.matrix, da, db) })
    }

    /// Reduced state on the second factor.
    pub fn reduce_second(&self, da: usize, db: usize) -> Result<Self> {
        linalg::check_same_dim(da * db, self.dim())?;
        Ok(Self { matrix: linalg::partial_trace_first(&self.matrix, da, db) })
    }

    /// Probability mass on basis levels `>= level`.
    pub fn mass_from(&self, level: usize) -> f64 {
        (level..self.dim()).map(|i| self.matrix[[i, i]].re).sum::<f64>().max(0.0)
    }
}
