//! Quantum dynamical semigroups on truncated spaces.
//!
//! Every channel acts on extended inputs `X` on `system ⊗ ancilla` (system-major
//! indices) and returns `(Λ_t ⊗ id)(X)`; plain states are the `ancilla = 1` case.

mod attenuator;
mod lindblad;
mod presets;
mod propagate;
mod unitary;

use std::sync::Arc;

pub use attenuator::{attenuator_apply, kraus_completeness_defect, AttenuatorKraus, LMax};
pub use lindblad::{lindblad_superoperator, BoundedBy, LindbladModel, RelBoundSource, LINDBLAD_DIM_LIMIT};
pub use presets::{parse_preset_spec, preset, preset_names, preset_with_params, Preset};
pub use propagate::{propagator, propagator_names, LiouvillianChannel, Propagator};
pub use unitary::{evolve_von_neumann, UnitaryChannel};

use crate::error::Result;
use crate::linalg::CMat;
use crate::state::DensityMatrix;

/// Tolerance on trace and positivity of channel outputs.
pub const OUTPUT_TOL: f64 = 1e-8;

pub trait Channel: Send + Sync {
    fn name(&self) -> String;

    /// System dimension.
    fn dim(&self) -> usize;

    /// `(Λ_t ⊗ id_ancilla)(x)` for `x` of size `dim·ancilla`.
    fn apply_extended(&self, x: &CMat, t: f64, ancilla: usize) -> Result<CMat>;

    fn apply(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        crate::linalg::check_same_dim(self.dim(), rho.dim())?;
        DensityMatrix::from_evolved(self.apply_extended(rho.matrix(), t, 1)?, OUTPUT_TOL)
    }
}

pub type ChannelFamily = Arc<dyn Channel>;

/// The identity map, used as a reference channel.
#[derive(Debug, Clone)]
pub struct IdentityChannel {
    pub dim: usize,
}

impl Channel for IdentityChannel {
    fn name(&self) -> String {
        "identity".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_extended(&self, x: &CMat, _t: f64, ancilla: usize) -> Result<CMat> {
        crate::linalg::check_same_dim(self.dim * ancilla, x.nrows())?;
        Ok(x.clone())
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(crate::error::invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}
