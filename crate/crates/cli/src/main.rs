use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qdslim::bounds::{self, CChoice, OmegaCase, OpenSystemParams, SpeedLimitCase};
use qdslim::campaign::{self, CampaignConfig};
use qdslim::gibbs::{self, Spectrum};
use qdslim::{Error, Result, VERSION};

#[derive(Parser)]
#[command(name = "qdslim", version, about = "Convergence-rate bounds, speed limits and Gibbs-state sweeps for quantum dynamical semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single analytic bound (JSON).
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Gibbs-state quantities and asymptotics of a spectrum (CSV).
    #[command(subcommand)]
    Gibbs(GibbsCmd),
    /// Sampling campaign certifying a bound against a simulated channel (JSON report).
    Verify(VerifyArgs),
    /// Data series for the g_α, bound-comparison and β-asymptotics plots (CSV).
    #[command(subcommand)]
    Figures(FiguresCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosedKind {
    /// Mixed inputs under von Neumann evolution.
    Vn,
    /// Pure inputs, valid inside the pure-state time window.
    Pure,
    /// Schrödinger evolution of a vector; `--E` is `‖|H|^α ψ‖`.
    Schrodinger,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    OmegaH,
    OmegaK,
}

impl From<CaseArg> for OmegaCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::OmegaH => OmegaCase::OmegaH,
            CaseArg::OmegaK => OmegaCase::OmegaK,
        }
    }
}

#[derive(Args)]
struct OpenArgs {
    #[arg(long)]
    alpha: f64,
    /// Relative-bound coefficient a.
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Relative-bound offset b.
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Free constant c, a number or `auto` to minimize ω over it.
    #[arg(long, default_value = "auto")]
    c: String,
    #[arg(long = "E")]
    energy: f64,
    #[arg(long = "omega-case", value_enum, default_value = "omega-h")]
    case: CaseArg,
}

impl OpenArgs {
    fn params(&self) -> Result<OpenSystemParams> {
        let c = match self.c.as_str() {
            "auto" => CChoice::Auto,
            s => CChoice::Value(s.parse().map_err(|e| Error::Parse(format!("--c `{s}`: {e}")))?),
        };
        OpenSystemParams::new(self.alpha, self.a, self.b, c, self.energy, self.case.into())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedCase {
    Schrodinger,
    VonNeumann,
    Open,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Closed-system bound `2 g_α E^α dt^α` and its variants.
    Closed {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "E")]
        energy: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, value_enum, default_value = "vn")]
        kind: ClosedKind,
    },
    /// Open-system bound `ω dt^α`.
    Open {
        #[command(flatten)]
        open: OpenArgs,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
    /// Minimal time to reach a given angle.
    Speedlimit {
        #[arg(long, value_enum)]
        case: SpeedCase,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long = "E")]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value = "auto")]
        c: String,
        #[arg(long = "omega-case", value_enum, default_value = "omega-h")]
        omega_case: CaseArg,
    },
    /// Minimal time for the purity to move from `--p-start` to `--p-fin`.
    Purity {
        #[command(flatten)]
        open: OpenArgs,
        #[arg(long = "p-start")]
        p_start: f64,
        #[arg(long = "p-fin")]
        p_fin: f64,
    },
}

#[derive(Subcommand)]
enum GibbsCmd {
    /// Inverse temperature at each energy.
    Beta(GibbsEnergyArgs),
    /// Gibbs entropy at each energy.
    Entropy(GibbsEnergyArgs),
    /// Universal exponent η from pair sums below geometric cutoffs.
    Eta {
        /// `ho`, `number`, `box`, `weyl:n,vol` or `file:PATH`.
        #[arg(long)]
        spectrum: String,
        /// Largest cutoff; the others are spaced geometrically down to cutoff/100.
        #[arg(long, default_value_t = 1e4)]
        cutoff: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// β·E, log Z and S along an energy grid, compared with η when given.
    Asymptotics {
        #[arg(long)]
        spectrum: String,
        #[arg(long = "E-grid", value_delimiter = ',', required = true)]
        energies: Vec<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
}

#[derive(Args)]
struct GibbsEnergyArgs {
    #[arg(long)]
    spectrum: String,
    /// One or more comma-separated energies.
    #[arg(long = "E", value_delimiter = ',', required = true)]
    energies: Vec<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// `attenuator`, `closed` or `preset:NAME[(params)]`.
    target: String,
    #[arg(long, default_value_t = 30)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long = "E", default_value_t = 2.0)]
    energy: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Comma-separated times; default six points on [0, 1].
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    ancilla: usize,
    /// `pade`, `taylor` or `auto` (preset channels only).
    #[arg(long, default_value = "auto")]
    propagator: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FiguresCmd {
    /// ζ_α and g_α for α in [1/2, 1].
    GAlpha {
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Mixed-state against pure-state closed bounds.
    BoundCompare {
        #[arg(long = "E", default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long = "t-max", default_value_t = 0.25)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Adds a `C t^{1/3}` reference series.
        #[arg(long = "cube-root-const")]
        cube_root_const: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Exact β(E) against η/E on a log grid.
    BetaAsymptotics {
        #[arg(long)]
        spectrum: String,
        /// Defaults to an estimate from pair sums below `--cutoff`.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 1e4)]
        cutoff: f64,
        /// Defaults to twice the lowest level, or 1 for a zero ground level.
        #[arg(long = "E-min")]
        e_min: Option<f64>,
        #[arg(long = "E-max", default_value_t = 1e4)]
        e_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Command outcome: text to emit and whether the run certified everything it checked.
struct Outcome {
    text: String,
    output: Option<PathBuf>,
    pass: bool,
}

impl Outcome {
    fn stdout(text: String) -> Self {
        Self { text, output: None, pass: true }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn bound_json(formula: &str, bound: f64, params: Value, extra: Value) -> Value {
    let mut v = json!({
        "version": VERSION,
        "formula": formula,
        "bound": bound,
        "vacuous": bound >= bounds::MAX_DISTANCE,
        "params": params,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn cmd_bounds(cmd: BoundsCmd) -> Result<Outcome> {
    let v = match cmd {
        BoundsCmd::Closed { alpha, energy, dt, kind } => {
            let params = json!({"alpha": alpha, "E": energy, "dt": dt});
            match kind {
                ClosedKind::Vn => bound_json("closed_von_neumann", bounds::closed_vn_bound(alpha, energy, dt)?, params, json!({})),
                ClosedKind::Schrodinger => bound_json("closed_schrodinger", bounds::closed_schrodinger_bound(alpha, energy, dt)?, params, json!({})),
                ClosedKind::Pure => {
                    let window = bounds::pure_state_max_dt(alpha, energy)?;
                    bound_json("pure_state", bounds::pure_state_bound(alpha, energy, dt)?, params, json!({"max_dt": window}))
                }
            }
        }
        BoundsCmd::Open { open, dt } => {
            let p = open.params()?;
            let (c, omega) = bounds::omega_with_c(&p)?;
            let mut params = bounds::params_json(&p);
            params["dt"] = json!(dt);
            bound_json("open_system", bounds::open_system_bound(&p, dt)?, params, json!({"omega": omega, "c_used": c}))
        }
        BoundsCmd::Speedlimit { case, alpha, theta, energy, a, b, c, omega_case } => {
            let params = json!({"alpha": alpha, "theta": theta, "E": energy});
            let case = match case {
                SpeedCase::Schrodinger => SpeedLimitCase::Schrodinger,
                SpeedCase::VonNeumann => SpeedLimitCase::VonNeumann,
                SpeedCase::Open => SpeedLimitCase::Open(OpenArgs { alpha, a, b, c, energy, case: omega_case }.params()?),
            };
            let t = bounds::speed_limit(alpha, energy, theta, &case)?;
            let mut v = bound_json("speed_limit", t, params, json!({"case": case}));
            v["vacuous"] = json!(t == 0.0);
            v
        }
        BoundsCmd::Purity { open, p_start, p_fin } => {
            let p = open.params()?;
            let mut params = bounds::params_json(&p);
            params["p_start"] = json!(p_start);
            params["p_fin"] = json!(p_fin);
            let t = bounds::purity_time(&p, p_start, p_fin)?;
            let mut v = bound_json("purity_time", t, params, json!({"omega": bounds::omega(&p)?}));
            v["vacuous"] = json!(t == 0.0);
            v
        }
    };
    Ok(Outcome::stdout(json_text(&v)))
}

#[derive(Serialize)]
struct GibbsRow {
    energy: f64,
    beta: f64,
    beta_energy: f64,
    log_z: f64,
    entropy: f64,
    truncation_terms: usize,
    tail_bound: f64,
}

#[derive(Serialize)]
struct EtaRow {
    cutoff: f64,
    xi_estimate: f64,
    xi: Option<f64>,
    eta: Option<f64>,
    fit_residual: f64,
}

#[derive(Serialize)]
struct AsymptoticsRow {
    energy: f64,
    beta: f64,
    beta_energy: f64,
    log_z: f64,
    entropy: f64,
    beta_e_over_eta: Option<f64>,
    log_z_minus_eta_log_e: Option<f64>,
    entropy_ratio: Option<f64>,
}

fn gibbs_rows(spec: &Spectrum, energies: &[f64]) -> Result<Vec<GibbsRow>> {
    energies
        .iter()
        .map(|&e| {
            let s = gibbs::solve_beta(spec, e)?;
            Ok(GibbsRow {
                energy: s.energy,
                beta: s.beta,
                beta_energy: s.beta * s.energy,
                log_z: s.log_z,
                entropy: s.entropy,
                truncation_terms: s.truncation_terms,
                tail_bound: s.tail_bound,
            })
        })
        .collect()
}

fn estimate_eta(spec: &Spectrum, cutoff: f64, count: usize) -> Result<gibbs::AsymptoticsReport> {
    let report = gibbs::estimate_eta(spec, &gibbs::default_cutoffs(cutoff, count))?;
    if let Some(d) = &report.diagnostic {
        eprintln!("warning: {d}");
    }
    Ok(report)
}

fn cmd_gibbs(cmd: GibbsCmd) -> Result<Outcome> {
    let text = match cmd {
        GibbsCmd::Beta(a) | GibbsCmd::Entropy(a) => csv_text(&gibbs_rows(&gibbs::resolve_spectrum(&a.spectrum)?, &a.energies)?)?,
        GibbsCmd::Eta { spectrum, cutoff, count } => {
            let r = estimate_eta(&gibbs::resolve_spectrum(&spectrum)?, cutoff, count)?;
            let rows: Vec<EtaRow> = r
                .cutoffs
                .iter()
                .zip(&r.xi_estimates)
                .map(|(&cutoff, &xi_estimate)| EtaRow { cutoff, xi_estimate, xi: r.xi, eta: r.eta, fit_residual: r.fit_residual })
                .collect();
            csv_text(&rows)?
        }
        GibbsCmd::Asymptotics { spectrum, energies, eta } => {
            let spec = gibbs::resolve_spectrum(&spectrum)?;
            let base = gibbs_rows(&spec, &energies)?;
            let asym = match eta {
                Some(eta) => Some(gibbs::asymptotics_check(&spec, &energies, eta)?),
                None => None,
            };
            let rows: Vec<AsymptoticsRow> = base
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let a = asym.as_ref().map(|v| v[i]);
                    AsymptoticsRow {
                        energy: g.energy,
                        beta: g.beta,
                        beta_energy: g.beta_energy,
                        log_z: g.log_z,
                        entropy: g.entropy,
                        beta_e_over_eta: a.map(|r| r.beta_e_over_eta),
                        log_z_minus_eta_log_e: a.map(|r| r.log_z_minus_eta_log_e),
                        entropy_ratio: a.map(|r| r.entropy_ratio),
                    }
                })
                .collect();
            csv_text(&rows)?
        }
    };
    Ok(Outcome::stdout(text))
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let mut cfg = CampaignConfig::new(&a.target, a.seed);
    cfg.dim = a.dim;
    cfg.alpha = a.alpha;
    cfg.energy = a.energy;
    cfg.samples = a.samples;
    cfg.ancilla_dim = a.ancilla;
    cfg.propagator = a.propagator;
    if !a.t_grid.is_empty() {
        cfg.t_grid = a.t_grid;
    }
    let report = campaign::run_campaign(&cfg)?;
    let failed = report.pairs.iter().filter(|p| !p.pass).count() + report.pure_state.iter().filter(|p| !p.pass).count();
    eprintln!(
        "{}: {} pairs, {} pure-state checks, worst margin {:.3e}, {} failed",
        report.channel,
        report.pairs.len(),
        report.pure_state.len(),
        report.worst_margin(),
        failed
    );
    let mut text = report.to_json();
    text.push('\n');
    Ok(Outcome { text, output: a.output, pass: report.pass })
}

fn cmd_figures(cmd: FiguresCmd) -> Result<Outcome> {
    let (text, output) = match cmd {
        FiguresCmd::GAlpha { points, output } => (csv_text(&campaign::g_alpha_series(points)?)?, output),
        FiguresCmd::BoundCompare { energy, alpha, t_max, points, cube_root_const, output } => {
            (csv_text(&campaign::bound_compare_series(alpha, energy, t_max, points, cube_root_const)?)?, output)
        }
        FiguresCmd::BetaAsymptotics { spectrum, eta, cutoff, e_min, e_max, points, output } => {
            let spec = gibbs::resolve_spectrum(&spectrum)?;
            let eta = match eta {
                Some(e) => e,
                None => estimate_eta(&spec, cutoff, 8)?.eta.ok_or_else(|| Error::Convergence("no η estimate for this spectrum; pass --eta".into()))?,
            };
            let e_min = match e_min {
                Some(e) => e,
                None => match spec.min_eigenvalue() {
                    l if l > 0.0 => 2.0 * l,
                    _ => 1.0,
                },
            };
            if !(e_min > 0.0 && e_max > e_min && points >= 2) {
                return Err(Error::InvalidParameter("need 0 < E-min < E-max and at least two points".into()));
            }
            (csv_text(&campaign::beta_asymptotics_series(&spec, &campaign::log_grid(e_min, e_max, points), eta)?)?, output)
        }
    };
    Ok(Outcome { text, output, pass: true })
}

fn configure_threads() {
    if let Ok(v) = std::env::var("QDSLIM_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size the thread pool: {e}");
                }
            }
            _ => eprintln!("warning: ignoring QDSLIM_THREADS={v}, expected a positive integer"),
        }
    }
}

fn emit(out: &Outcome) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, &out.text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))),
        None => {
            let mut h = std::io::stdout().lock();
            Ok(h.write_all(out.text.as_bytes()).and_then(|_| h.flush())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Bounds(c) => cmd_bounds(c),
        Command::Gibbs(c) => cmd_gibbs(c),
        Command::Verify(a) => cmd_verify(a),
        Command::Figures(c) => cmd_figures(c),
    };
    match result.and_then(|out| emit(&out).map(|_| out.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
