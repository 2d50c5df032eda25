use statrs::function::gamma::ln_gamma;

use crate::channels::{check_time, Channel, OUTPUT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::state::DensityMatrix;

/// Entries below this magnitude do not count towards the occupied Fock levels.
const SUPPORT_TOL: f64 = 1e-12;
/// Target Kraus-completeness defect for automatic series length.
pub const COMPLETENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMax {
    Auto,
    Fixed(usize),
}

/// Quantum-limited attenuator with transmissivity `e^{−t}`, applied through its Kraus series
/// `K_l = √((1−e^{−t})^l / l!) e^{−tN/2} aˡ`.
///
/// The Kraus operators only lower the Fock level, so on a truncation the series with
/// `l_max = dim − 1` is the exact restriction of the infinite-dimensional channel.
#[derive(Debug, Clone)]
pub struct AttenuatorKraus {
    pub dim: usize,
    pub l_max: LMax,
}

fn ln_binom(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `1 − Σ_{l ≤ l_max} ⟨k|K_l†K_l|k⟩`, the binomial tail `P(Bin(k, 1−e^{−t}) > l_max)`,
/// maximized over levels `k ≤ top`.
pub fn kraus_completeness_defect(t: f64, l_max: usize, top: usize) -> f64 {
    if t == 0.0 || l_max >= top {
        return 0.0;
    }
    let ln_p = (-(-t).exp_m1()).ln();
    // the tail grows with k, so the top occupied level is the worst case
    let k = top;
    (l_max + 1..=k).map(|l| (ln_binom(k, l) + l as f64 * ln_p - t * (k - l) as f64).exp()).sum::<f64>().min(1.0)
}

impl AttenuatorKraus {
    pub fn new(dim: usize, l_max: LMax) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, reason: "attenuator needs dim >= 2".into() });
        }
        Ok(Self { dim, l_max })
    }

    /// Series length used for an input whose highest occupied level is `top`.
    pub fn resolve_l_max(&self, t: f64, top: usize) -> Result<usize> {
        match self.l_max {
            LMax::Fixed(l) => {
                if top + l > self.dim {
                    return Err(Error::TruncationTooSmall { required_dim: top + l, leak: 0.0 });
                }
                Ok(l.min(top))
            }
            LMax::Auto => {
                let mut l = 0;
                while l < top && kraus_completeness_defect(t, l, top) > COMPLETENESS_TOL {
                    l += 1;
                }
                Ok(l)
            }
        }
    }

    fn top_level(&self, x: &CMat, r: usize) -> usize {
        (0..self.dim)
            .rev()
            .find(|&k| (0..r).any(|a| x.row(k * r + a).iter().chain(x.column(k * r + a).iter()).any(|z| z.norm() > SUPPORT_TOL)))
            .unwrap_or(0)
    }

    /// `w[k][l] = ⟨k−l|K_l|k⟩`.
    fn kraus_table(&self, t: f64, l_max: usize) -> Vec<Vec<f64>> {
        let ln_p = (-(-t).exp_m1()).ln();
        (0..self.dim)
            .map(|k| (0..=k.min(l_max)).map(|l| (0.5 * (ln_binom(k, l) + l as f64 * ln_p) - 0.5 * t * (k - l) as f64).exp()).collect())
            .collect()
    }
}

impl Channel for AttenuatorKraus {
    fn name(&self) -> String {
        "attenuator".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_extended(&self, x: &CMat, t: f64, r: usize) -> Result<CMat> {
        check_time(t)?;
        let d = self.dim;
        linalg::check_same_dim(d * r, x.nrows())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let top = self.top_level(x, r);
        let l_max = self.resolve_l_max(t, top)?;
        let w = self.kraus_table(t, l_max);
        let mut out = CMat::zeros((d * r, d * r));
        for m in 0..=top {
            for n in 0..=top {
                let lim = (top - m.max(n)).min(l_max);
                for l in 0..=lim {
                    let coef = w[m + l][l] * w[n + l][l];
                    for a in 0..r {
                        for b in 0..r {
                            out[[m * r + a, n * r + b]] += x[[(m + l) * r + a, (n + l) * r + b]] * coef;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn attenuator_apply(rho: &DensityMatrix, t: f64, l_max: LMax) -> Result<DensityMatrix> {
    let ch = AttenuatorKraus::new(rho.dim(), l_max)?;
    DensityMatrix::from_evolved(ch.apply_extended(rho.matrix(), t, 1)?, OUTPUT_TOL)
}
