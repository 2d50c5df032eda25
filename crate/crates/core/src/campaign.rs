//! Sampling campaigns that certify the analytic bounds against simulated channels,
//! and the data series behind the plotted figures.
//!
//! Reports are plain serializable records; identical configurations give
//! byte-identical JSON.

use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{self, CChoice, OmegaCase, OpenSystemParams};
use crate::channels::{self, AttenuatorKraus, BoundedBy, Channel, LMax, LiouvillianChannel, UnitaryChannel};
use crate::error::{invalid, Error, Result};
use crate::gibbs::{self, Spectrum};
use crate::linalg::CMat;
use crate::metrics::{self as ecd, Candidate, EcdSettings, EnergyConstraint, SampleKind};
use crate::operators::{build_fock, HermitianOperator};
use crate::sampling::{random_hermitian, rng};
use crate::{MARGIN_TOL, VERSION};

/// RNG stream for the random Hamiltonian of the closed campaign; sample streams start at 0.
const HAMILTONIAN_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct CampaignConfig {
    /// `attenuator`, `closed` or `preset:NAME[(params)]`.
    pub target: String,
    pub dim: usize,
    pub alpha: f64,
    pub energy: f64,
    pub samples: usize,
    pub ancilla_dim: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    /// Propagator for preset channels.
    pub propagator: String,
}

impl CampaignConfig {
    pub fn new(target: &str, seed: u64) -> Self {
        Self {
            target: target.to_string(),
            dim: 30,
            alpha: 0.5,
            energy: 2.0,
            samples: 200,
            ancilla_dim: 4,
            seed,
            t_grid: uniform_grid(0.0, 1.0, 6),
            propagator: "auto".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(invalid("time grid must be nonempty"));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(invalid(format!("grid times must be finite and nonnegative, got {t}")));
        }
        Ok(())
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// Position in the sampled pool.
    pub index: usize,
    pub kind: SampleKind,
    pub ancilla_dim: usize,
    /// `tr(S^{2α}ρ_sys)` of the witness.
    pub constraint_moment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResult {
    pub t: f64,
    pub s: f64,
    pub observed: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub vacuous: bool,
    pub witness: Witness,
}

/// Pure-input check of the closed campaign, restricted to pairs inside the pure-state window.
#[derive(Debug, Clone, Serialize)]
pub struct PureStateResult {
    pub t: f64,
    pub s: f64,
    pub observed: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub witness_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub margin: f64,
    pub channel_output: f64,
    pub admissibility: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationDiagnostics {
    pub system_dim: usize,
    /// Largest population of the top truncation level over inputs and outputs; absent when the
    /// system is genuinely finite.
    pub max_top_level_population: Option<f64>,
    pub pure_state_window: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub version: String,
    pub campaign: String,
    pub channel: String,
    pub seed: u64,
    pub config: CampaignConfig,
    pub tolerances: Tolerances,
    pub bound: Value,
    pub truncation: TruncationDiagnostics,
    pub samples_admissible: usize,
    pub pairs: Vec<PairResult>,
    pub pure_state: Vec<PureStateResult>,
    pub pass: bool,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    /// Smallest margin, ignoring the trivial `t = s` pairs unless the grid has nothing else.
    pub fn worst_margin(&self) -> f64 {
        let all = self.pairs.iter().map(|p| (p.t, p.s, p.margin)).chain(self.pure_state.iter().map(|p| (p.t, p.s, p.margin)));
        let off: Vec<f64> = all.clone().filter(|(t, s, _)| t != s).map(|x| x.2).collect();
        let pick = if off.is_empty() { all.map(|x| x.2).collect() } else { off };
        pick.into_iter().fold(f64::INFINITY, f64::min)
    }
}

enum Target {
    Attenuator,
    Closed,
    Preset(String),
}

fn parse_target(s: &str) -> Result<Target> {
    match s {
        "attenuator" => Ok(Target::Attenuator),
        "closed" => Ok(Target::Closed),
        _ => match s.strip_prefix("preset:") {
            Some(spec) if !spec.is_empty() => Ok(Target::Preset(spec.to_string())),
            _ => Err(Error::UnknownName { kind: "campaign", name: s.into(), known: "attenuator, closed, preset:NAME".into() }),
        },
    }
}

/// Everything a campaign needs: channel, constraint, and the analytic bound as a function of `|t − s|`.
struct Setup {
    channel: Box<dyn Channel>,
    constraint: EnergyConstraint,
    bound: Box<dyn Fn(f64) -> Result<f64>>,
    bound_info: Value,
    /// Number of trailing system indices forming the top truncation level; `None` for finite systems.
    top_block: Option<usize>,
    pure_window: Option<f64>,
}

fn setup(cfg: &CampaignConfig) -> Result<Setup> {
    let (alpha, energy) = (cfg.alpha, cfg.energy);
    match parse_target(&cfg.target)? {
        Target::Attenuator => {
            let fock = build_fock(cfg.dim)?;
            let k = bounds::constants(alpha)?;
            Ok(Setup {
                channel: Box::new(AttenuatorKraus::new(cfg.dim, LMax::Auto)?),
                constraint: EnergyConstraint::new(fock.number_op, energy, alpha)?,
                bound: Box::new(move |dt| bounds::attenuator_bound(alpha, energy, dt)),
                bound_info: json!({"formula": "attenuator", "constraint": "number", "zeta": k.zeta, "g": k.g}),
                top_block: Some(1),
                pure_window: None,
            })
        }
        Target::Closed => {
            let h = random_hermitian(cfg.dim, &mut rng(cfg.seed, HAMILTONIAN_STREAM));
            let k = bounds::constants(alpha)?;
            let window = bounds::pure_state_max_dt(alpha, energy)?;
            Ok(Setup {
                constraint: EnergyConstraint::new(h.abs()?, energy, alpha)?,
                channel: Box::new(UnitaryChannel::new(h)),
                bound: Box::new(move |dt| bounds::closed_vn_bound(alpha, energy, dt)),
                bound_info: json!({"formula": "closed_von_neumann", "constraint": "abs_hamiltonian", "zeta": k.zeta, "g": k.g}),
                top_block: None,
                pure_window: Some(window),
            })
        }
        Target::Preset(spec) => {
            let model = channels::preset(&spec, cfg.dim)?;
            let case = match model.bounded_by {
                BoundedBy::HBoundsK => OmegaCase::OmegaH,
                BoundedBy::KBoundsH => OmegaCase::OmegaK,
            };
            let p = OpenSystemParams::new(alpha, model.rel_bound_a, model.rel_bound_b, CChoice::Auto, energy, case)?;
            let (c, omega) = bounds::omega_with_c(&p)?;
            let constraint = EnergyConstraint::new(model.constraint.clone(), energy, alpha)?;
            let block = model.dim() / cfg.dim;
            let channel = LiouvillianChannel::new(model, &cfg.propagator)?;
            let mut info = bounds::params_json(&p);
            info["formula"] = json!("open_system");
            info["c"] = json!(c);
            info["omega"] = json!(omega);
            Ok(Setup {
                channel: Box::new(channel),
                constraint,
                bound: Box::new(move |dt| bounds::open_system_bound(&p, dt)),
                bound_info: info,
                top_block: Some(block),
                pure_window: None,
            })
        }
    }
}

/// Population of the last `block` system indices of `x` on `system ⊗ ancilla`.
fn top_population(x: &CMat, ancilla: usize, block: usize) -> f64 {
    let d = x.nrows() / ancilla;
    (d - block..d).flat_map(|i| (0..ancilla).map(move |a| i * ancilla + a)).map(|j| x[[j, j]].re).sum()
}

/// Runs the campaign: every pair `t ≤ s` of the grid is compared on the whole admissible pool.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let su = setup(cfg)?;
    let settings = EcdSettings { samples: cfg.samples, ancilla_dim: cfg.ancilla_dim, seed: cfg.seed };
    let (indices, pool): (Vec<usize>, Vec<Candidate>) =
        ecd::sample_pool(&su.constraint, &settings)?.into_iter().enumerate().filter(|(_, c)| su.constraint.admits(&c.matrix, c.ancilla_dim)).unzip();
    if pool.is_empty() {
        return Err(Error::Infeasible("no sampled state satisfies the energy constraint".into()));
    }
    let outputs: Vec<Vec<CMat>> = cfg.t_grid.iter().map(|&t| ecd::apply_pool(su.channel.as_ref(), t, &pool)).collect::<Result<_>>()?;

    let top = su.top_block.map(|b| {
        let inputs = pool.iter().map(|c| top_population(&c.matrix, c.ancilla_dim, b));
        let outs = outputs.iter().flat_map(|o| o.iter().zip(&pool).map(|(x, c)| top_population(x, c.ancilla_dim, b)));
        inputs.chain(outs).fold(0.0, f64::max)
    });

    let pure_idx: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].kind == SampleKind::Entangled).collect();
    let mut pairs = Vec::new();
    let mut pure_state = Vec::new();
    for i in 0..cfg.t_grid.len() {
        for j in i..cfg.t_grid.len() {
            let (t, s) = (cfg.t_grid[i], cfg.t_grid[j]);
            let dt = (s - t).abs();
            let (w, observed) = ecd::max_distance(&outputs[i], &outputs[j])?;
            let bound = (su.bound)(dt)?;
            let margin = bound - observed;
            pairs.push(PairResult {
                t,
                s,
                observed,
                bound,
                margin,
                pass: margin >= -MARGIN_TOL,
                vacuous: bound >= bounds::MAX_DISTANCE,
                witness: Witness {
                    index: indices[w],
                    kind: pool[w].kind,
                    ancilla_dim: pool[w].ancilla_dim,
                    constraint_moment: su.constraint.energy_of(&pool[w].matrix, pool[w].ancilla_dim),
                },
            });
            if let Some(window) = su.pure_window {
                if pure_idx.is_empty() || dt > window {
                    continue;
                }
                let a: Vec<CMat> = pure_idx.iter().map(|&k| outputs[i][k].clone()).collect();
                let b: Vec<CMat> = pure_idx.iter().map(|&k| outputs[j][k].clone()).collect();
                let (w, observed) = ecd::max_distance(&a, &b)?;
                let bound = bounds::pure_state_bound(cfg.alpha, cfg.energy, dt)?;
                let margin = bound - observed;
                pure_state.push(PureStateResult { t, s, observed, bound, margin, pass: margin >= -MARGIN_TOL, witness_index: indices[pure_idx[w]] });
            }
        }
    }
    let pass = pairs.iter().all(|p| p.pass) && pure_state.iter().all(|p| p.pass);
    Ok(CampaignReport {
        version: VERSION.to_string(),
        campaign: cfg.target.clone(),
        channel: su.channel.name(),
        seed: cfg.seed,
        config: cfg.clone(),
        tolerances: Tolerances { margin: MARGIN_TOL, channel_output: channels::OUTPUT_TOL, admissibility: ecd::ADMISSIBILITY_TOL },
        bound: su.bound_info,
        truncation: TruncationDiagnostics { system_dim: su.channel.dim(), max_top_level_population: top, pure_state_window: su.pure_window },
        samples_admissible: pool.len(),
        pairs,
        pure_state,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GAlphaRow {
    pub alpha: f64,
    pub zeta: f64,
    pub g: f64,
}

/// `ζ_α` and `g_α` on `points` equally spaced `α ∈ [1/2, 1]`.
pub fn g_alpha_series(points: usize) -> Result<Vec<GAlphaRow>> {
    if points < 2 {
        return Err(invalid("need at least two points"));
    }
    uniform_grid(0.5, 1.0, points)
        .into_iter()
        .map(|alpha| bounds::constants(alpha).map(|k| GAlphaRow { alpha, zeta: k.zeta, g: k.g }))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCompareRow {
    pub t: f64,
    pub mixed: f64,
    /// Empty outside the pure-state window.
    pub pure: Option<f64>,
    /// `C t^{1/3}` when a constant is supplied.
    pub cube_root: Option<f64>,
}

/// Mixed-state and pure-state closed bounds on `[0, t_max]`.
pub fn bound_compare_series(alpha: f64, energy: f64, t_max: f64, points: usize, cube_root_const: Option<f64>) -> Result<Vec<BoundCompareRow>> {
    if points < 2 || !(t_max > 0.0) {
        return Err(invalid("need at least two points and a positive t_max"));
    }
    let window = bounds::pure_state_max_dt(alpha, energy)?;
    uniform_grid(0.0, t_max, points)
        .into_iter()
        .map(|t| {
            Ok(BoundCompareRow {
                t,
                mixed: bounds::closed_vn_bound(alpha, energy, t)?,
                pure: if t <= window * (1.0 + 1e-12) { Some(bounds::pure_state_bound(alpha, energy, t)?) } else { None },
                cube_root: cube_root_const.map(|c| c * t.cbrt()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaAsymptoticsRow {
    pub energy: f64,
    pub beta: f64,
    pub eta_over_energy: f64,
    pub ratio: f64,
}

/// Exact `β(E)` against the high-energy law `η/E`.
pub fn beta_asymptotics_series(spec: &Spectrum, energies: &[f64], eta: f64) -> Result<Vec<BetaAsymptoticsRow>> {
    Ok(gibbs::asymptotics_check(spec, energies, eta)?
        .into_iter()
        .map(|r| BetaAsymptoticsRow { energy: r.energy, beta: r.beta, eta_over_energy: eta / r.energy, ratio: r.beta_e_over_eta })
        .collect())
}

/// `points` log-spaced energies from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    uniform_grid(lo.ln(), hi.ln(), points).into_iter().map(f64::exp).collect()
}

/// Hamiltonian drawn by the closed campaign for `seed`.
pub fn closed_hamiltonian(dim: usize, seed: u64) -> HermitianOperator {
    random_hermitian(dim, &mut rng(seed, HAMILTONIAN_STREAM))
}
