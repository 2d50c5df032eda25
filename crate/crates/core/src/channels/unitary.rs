use crate::channels::{check_time, Channel};
use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::operators::HermitianOperator;
use crate::state::DensityMatrix;

/// Closed evolution `ρ ↦ e^{−itH} ρ e^{itH}`.
#[derive(Debug, Clone)]
pub struct UnitaryChannel {
    hamiltonian: HermitianOperator,
}

impl UnitaryChannel {
    pub fn new(hamiltonian: HermitianOperator) -> Self {
        Self { hamiltonian }
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn unitary(&self, t: f64) -> Result<CMat> {
        let eig = self.hamiltonian.eigensystem()?;
        let n = eig.values.len();
        let mut vp = eig.vectors.clone();
        for (j, &lambda) in eig.values.iter().enumerate() {
            let phase = linalg::I * (-lambda * t);
            let ph = phase.exp();
            for i in 0..n {
                vp[[i, j]] *= ph;
            }
        }
        Ok(vp.dot(&linalg::dagger(&eig.vectors)))
    }
}

impl Channel for UnitaryChannel {
    fn name(&self) -> String {
        "unitary".into()
    }

    fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    fn apply_extended(&self, x: &CMat, t: f64, ancilla: usize) -> Result<CMat> {
        check_time(t.abs())?;
        linalg::check_same_dim(self.dim() * ancilla, x.nrows())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        Ok(linalg::conjugate_sys(&self.unitary(t)?, x, ancilla))
    }
}

pub fn evolve_von_neumann(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    linalg::check_same_dim(h.dim(), rho.dim())?;
    let ch = UnitaryChannel::new(h.clone());
    DensityMatrix::from_evolved(ch.apply_extended(rho.matrix(), t, 1)?, 1e-10)
}
