use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::channels::{check_time, lindblad_superoperator, Channel, LindbladModel, LINDBLAD_DIM_LIMIT};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Strategy for applying `e^{t𝓛} ⊗ id` to an extended matrix.
pub trait Propagator: Send + Sync {
    fn name(&self) -> &'static str;
    fn propagate(&self, x: &CMat, t: f64, ancilla: usize) -> Result<CMat>;
}

type PropagatorCtor = fn(Arc<LindbladModel>) -> Result<Box<dyn Propagator>>;

const PROPAGATORS: &[(&str, PropagatorCtor)] = &[("pade", |m| Ok(Box::new(PadePropagator::new(m)?))), ("taylor", |m| Ok(Box::new(TaylorPropagator::new(m)))), ("auto", auto_propagator)];

/// `dim²` up to which `auto` exponentiates the dense superoperator.
const AUTO_PADE_LIMIT: usize = 1024;

fn auto_propagator(m: Arc<LindbladModel>) -> Result<Box<dyn Propagator>> {
    let d = m.dim();
    if d * d <= AUTO_PADE_LIMIT {
        Ok(Box::new(PadePropagator::new(m)?))
    } else {
        Ok(Box::new(TaylorPropagator::new(m)))
    }
}

pub fn propagator_names() -> Vec<&'static str> {
    PROPAGATORS.iter().map(|(n, _)| *n).collect()
}

pub fn propagator(name: &str, model: Arc<LindbladModel>) -> Result<Box<dyn Propagator>> {
    let d = model.dim();
    if d * d > LINDBLAD_DIM_LIMIT {
        return Err(Error::DimensionLimit { dim: d, limit: LINDBLAD_DIM_LIMIT });
    }
    match PROPAGATORS.iter().find(|(n, _)| *n == name) {
        Some((_, ctor)) => ctor(model),
        None => Err(Error::UnknownName { kind: "propagator", name: name.into(), known: propagator_names().join(", ") }),
    }
}

/// Dense `expm(t·𝓛̂)` by Padé scaling and squaring, cached per time.
pub struct PadePropagator {
    superop: CMat,
    dim: usize,
    cache: Mutex<HashMap<u64, Arc<CMat>>>,
}

impl PadePropagator {
    pub fn new(model: Arc<LindbladModel>) -> Result<Self> {
        Ok(Self { superop: lindblad_superoperator(&model)?, dim: model.dim(), cache: Mutex::new(HashMap::new()) })
    }

    fn exponential(&self, t: f64) -> Result<Arc<CMat>> {
        let key = t.to_bits();
        if let Some(p) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(linalg::expm(&self.superop.mapv(|z| z * t))?);
        self.cache.lock().expect("cache lock").entry(key).or_insert_with(|| p.clone());
        Ok(p)
    }
}

impl Propagator for PadePropagator {
    fn name(&self) -> &'static str {
        "pade"
    }

    fn propagate(&self, x: &CMat, t: f64, r: usize) -> Result<CMat> {
        let d = self.dim;
        let p = self.exponential(t)?;
        // column (a·r + b) holds vec of the system block X_ab[i, k] = X[i·r + a, k·r + b]
        let mut blocks = CMat::zeros((d * d, r * r));
        for a in 0..r {
            for b in 0..r {
                for k in 0..d {
                    for i in 0..d {
                        blocks[[i + k * d, a * r + b]] = x[[i * r + a, k * r + b]];
                    }
                }
            }
        }
        let out_blocks = p.dot(&blocks);
        let mut out = CMat::zeros((d * r, d * r));
        for a in 0..r {
            for b in 0..r {
                for k in 0..d {
                    for i in 0..d {
                        out[[i * r + a, k * r + b]] = out_blocks[[i + k * d, a * r + b]];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Truncated Taylor series of `e^{τ𝓛}` applied to the matrix directly, over substeps with
/// `τ‖𝓛‖ ≤ 2`.
pub struct TaylorPropagator {
    model: Arc<LindbladModel>,
    norm_bound: f64,
}

fn spectral_norm_bound(m: &CMat) -> f64 {
    let one = linalg::one_norm(&m.view());
    let inf = linalg::one_norm(&m.t());
    (one * inf).sqrt()
}

impl TaylorPropagator {
    pub fn new(model: Arc<LindbladModel>) -> Self {
        let g = model.g_operator();
        let norm_bound = 2.0 * spectral_norm_bound(&g) + model.lindblad_ops.iter().map(|l| spectral_norm_bound(l).powi(2)).sum::<f64>();
        Self { model, norm_bound }
    }
}

impl Propagator for TaylorPropagator {
    fn name(&self) -> &'static str {
        "taylor"
    }

    fn propagate(&self, x: &CMat, t: f64, r: usize) -> Result<CMat> {
        let steps = ((t * self.norm_bound / 2.0).ceil() as usize).max(1);
        let tau = t / steps as f64;
        let mut cur = x.clone();
        for _ in 0..steps {
            let mut term = cur.clone();
            let mut acc = cur.clone();
            let mut converged = false;
            for k in 1..=60 {
                term = self.model.generator_action(&term, r).mapv(|z| z * (tau / k as f64));
                acc += &term;
                if linalg::frobenius(&term) <= 1e-17 * linalg::frobenius(&acc).max(1e-300) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Convergence(format!("Taylor series did not converge at tau = {tau}")));
            }
            cur = acc;
        }
        Ok(cur)
    }
}

/// Channel `e^{t𝓛}` of a Lindblad model.
pub struct LiouvillianChannel {
    model: Arc<LindbladModel>,
    propagator: Box<dyn Propagator>,
}

impl LiouvillianChannel {
    pub fn new(model: LindbladModel, propagator_name: &str) -> Result<Self> {
        let model = Arc::new(model);
        Ok(Self { propagator: propagator(propagator_name, model.clone())?, model })
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn propagator_name(&self) -> &'static str {
        self.propagator.name()
    }
}

impl Channel for LiouvillianChannel {
    fn name(&self) -> String {
        format!("{} [{}]", self.model.name, self.propagator.name())
    }

    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn apply_extended(&self, x: &CMat, t: f64, ancilla: usize) -> Result<CMat> {
        check_time(t)?;
        linalg::check_same_dim(self.dim() * ancilla, x.nrows())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        Ok(linalg::hermitize(&self.propagator.propagate(x, t, ancilla)?))
    }
}
