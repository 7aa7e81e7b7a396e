//! Config-driven scenario runs and their JSON/CSV reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::fresnel_abel::{abel_limit_from_samples, fresnel_closed, quadrature_sweep, AbelSchedule};
use crate::kernels::{KernelSpec, KernelVariant, PhysicalParams, PotentialShape, PotentialSpec};
use crate::oracle::{collocation_solve, reference_solution, ReferenceCase};
use crate::picard::{neumann_solve_detailed, NeumannReport, SolveSettings};
use crate::rng::SplitRng;
use crate::schrodinger::{build_dyson_kernel, free_source, initial_condition_sweep, GaussianPacket, SpatialGrid};
use crate::state_space::{BanachElement, LpExponent, NormKind, SpaceDescriptor, TimeGrid, Trajectory};
use crate::{Error, Result, C64};

pub const SCENARIOS: [&str; 6] =
    ["resolvent", "hilbert_schmidt", "dyson_constant", "dyson_lorentzian", "fresnel", "poisson_sweep"];

/// Exit status of `solve`.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

/// Float serialized with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig { x_min: -20.0, x_max: 20.0, n_points: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum PField {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    #[serde(alias = "T")]
    horizon: Option<f64>,
    n_steps: Option<usize>,
    p: Option<PField>,
    tol: Option<f64>,
    max_terms: Option<usize>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    parallel: Option<bool>,
    dump_terms: Option<bool>,
    snapshot_times: Option<Vec<f64>>,
    spatial: Option<SpatialConfig>,
    physics: Option<PhysicalParams>,
    packet: Option<GaussianPacket>,
    lambda: Option<C64>,
    dim: Option<usize>,
    bound: Option<f64>,
    potential: Option<PotentialShape>,
    n: Option<u32>,
    schedule_len: Option<usize>,
    t_list: Option<Vec<f64>>,
}

/// What a run computes.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `u = 1 + λ∫₀ᵗu` against `e^{λt}`.
    Resolvent { lambda: C64 },
    /// Random sampled matrix kernel against forward substitution.
    HilbertSchmidt { dim: usize, bound: f64 },
    DysonConstant { potential: PotentialSpec, wave: WaveSetup },
    DysonLorentzian { potential: PotentialSpec, wave: WaveSetup },
    Fresnel { n: u32, schedule_len: usize },
    PoissonSweep { t_list: Vec<f64>, wave: WaveSetup },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSetup {
    pub grid: SpatialGrid,
    pub params: PhysicalParams,
    pub packet: GaussianPacket,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Resolvent { .. } => "resolvent",
            Scenario::HilbertSchmidt { .. } => "hilbert_schmidt",
            Scenario::DysonConstant { .. } => "dyson_constant",
            Scenario::DysonLorentzian { .. } => "dyson_lorentzian",
            Scenario::Fresnel { .. } => "fresnel",
            Scenario::PoissonSweep { .. } => "poisson_sweep",
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub grid: TimeGrid,
    pub p: LpExponent,
    pub tol: f64,
    pub max_terms: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub parallel: bool,
    pub dump_terms: bool,
    pub snapshot_times: Vec<f64>,
}

fn cfg_err(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { reason, .. } => Error::config(field, reason),
        other => Error::config(field, other.to_string()),
    }
}

fn wave_setup(raw: &RawConfig, default_points: usize) -> Result<WaveSetup> {
    let sc = raw.spatial.unwrap_or(SpatialConfig { n_points: default_points, ..SpatialConfig::default() });
    let grid = SpatialGrid::new(sc.x_min, sc.x_max, sc.n_points).map_err(cfg_err("spatial"))?;
    let params = raw.physics.unwrap_or_default().validate().map_err(cfg_err("physics"))?;
    let packet = raw.packet.unwrap_or_default();
    packet.validate().map_err(cfg_err("packet"))?;
    Ok(WaveSetup { grid, params, packet })
}

fn forbid(present: bool, field: &str, scenario: &str) -> Result<()> {
    if present {
        return Err(Error::config(field, format!("not used by scenario `{scenario}`")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("config_path", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let name = raw.scenario.as_str();
        let (default_t, default_steps) = match name {
            "resolvent" => (1.0, 512),
            "hilbert_schmidt" => (1.0, 128),
            "dyson_constant" => (1.0, 512),
            "dyson_lorentzian" => (1.0, 256),
            "fresnel" | "poisson_sweep" => (1.0, 1),
            other => {
                return Err(Error::config(
                    "scenario",
                    format!("unknown scenario `{other}`; expected one of {}", SCENARIOS.join(", ")),
                ))
            }
        };
        let scenario = match name {
            "resolvent" => {
                forbid(raw.potential.is_some(), "potential", name)?;
                Scenario::Resolvent { lambda: raw.lambda.unwrap_or(C64::new(1.0, 0.0)) }
            }
            "hilbert_schmidt" => {
                let dim = raw.dim.unwrap_or(8);
                if dim == 0 {
                    return Err(Error::config("dim", "must be at least 1"));
                }
                let bound = raw.bound.unwrap_or(5.0);
                if !(bound > 0.0 && bound.is_finite()) {
                    return Err(Error::config("bound", format!("must be positive, got {bound}")));
                }
                Scenario::HilbertSchmidt { dim, bound }
            }
            "dyson_constant" => {
                let shape = raw.potential.unwrap_or(PotentialShape::Constant { value: 0.3 });
                if !matches!(shape, PotentialShape::Constant { .. }) {
                    return Err(Error::config("potential", "dyson_constant needs kind `constant`"));
                }
                Scenario::DysonConstant { potential: PotentialSpec::new(shape), wave: wave_setup(&raw, 256)? }
            }
            "dyson_lorentzian" => {
                let shape = raw.potential.unwrap_or(PotentialShape::Lorentzian { amplitude: 0.5, width: 1.0 });
                if let PotentialShape::Lorentzian { width, .. } = shape {
                    if !(width > 0.0) {
                        return Err(Error::config("potential", "Lorentzian width must be positive"));
                    }
                } else {
                    return Err(Error::config("potential", "dyson_lorentzian needs kind `lorentzian`"));
                }
                Scenario::DysonLorentzian { potential: PotentialSpec::new(shape), wave: wave_setup(&raw, 512)? }
            }
            "fresnel" => {
                let n = raw.n.unwrap_or(1);
                if n == 0 {
                    return Err(Error::config("n", "dimension must be at least 1"));
                }
                let schedule_len = raw.schedule_len.unwrap_or(21);
                if schedule_len < 2 {
                    return Err(Error::config("schedule_len", "need at least two schedule points"));
                }
                Scenario::Fresnel { n, schedule_len }
            }
            _ => {
                let t_list = raw.t_list.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025, 1e-3]);
                check_t_list(&t_list)?;
                Scenario::PoissonSweep { t_list, wave: wave_setup(&raw, 1024)? }
            }
        };

        let horizon = raw.horizon.unwrap_or(default_t);
        let n_steps = raw.n_steps.unwrap_or(default_steps);
        let grid = TimeGrid::new(horizon, n_steps).map_err(|e| match e {
            Error::InvalidParameter { name: "n_steps", reason } => Error::config("n_steps", reason),
            Error::InvalidParameter { reason, .. } => Error::config("horizon", reason),
            other => other,
        })?;
        let p = match raw.p {
            None => LpExponent::Infinity,
            Some(PField::Text(s)) => s.parse().map_err(cfg_err("p"))?,
            Some(PField::Number(x)) => LpExponent::finite(x).map_err(cfg_err("p"))?,
        };
        let tol = raw.tol.unwrap_or(1e-8);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::config("tol", format!("must be positive, got {tol}")));
        }
        let max_terms = raw.max_terms.unwrap_or(100);
        if max_terms == 0 {
            return Err(Error::config("max_terms", "must be at least 1"));
        }
        let snapshot_times = raw.snapshot_times.clone().unwrap_or_else(|| vec![0.0, horizon]);
        for &t in &snapshot_times {
            if grid.index_of(t).is_none() {
                return Err(Error::config("snapshot_times", format!("{t} is not a node of the time grid")));
            }
        }
        Ok(RunConfig {
            output_dir: raw.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(scenario.name())),
            scenario,
            grid,
            p,
            tol,
            max_terms,
            seed: raw.seed.unwrap_or(0),
            parallel: raw.parallel.unwrap_or(false),
            dump_terms: raw.dump_terms.unwrap_or(false),
            snapshot_times,
        })
    }

    pub fn settings(&self) -> Result<SolveSettings> {
        Ok(SolveSettings::new(self.p, self.tol, self.max_terms)?.parallel(self.parallel).keep_terms(self.dump_terms))
    }
}

fn check_t_list(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(Error::config("t_list", "needs at least one time"));
    }
    for (k, &t) in t_list.iter().enumerate() {
        if !(t > 0.0 && t.is_finite()) || (k > 0 && !(t < t_list[k - 1])) {
            return Err(Error::config("t_list", format!("entry {k} must be positive and below its predecessor")));
        }
    }
    Ok(())
}

/// Machine-readable result of one run. Every key is present for every scenario.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub p: String,
    pub horizon: Num,
    pub n_steps: usize,
    pub converged: bool,
    pub terms_used: usize,
    pub kernel_bound: Num,
    pub term_norms: Vec<Num>,
    pub majorants: Vec<Num>,
    pub quad_slack: Vec<Num>,
    pub ratios: Vec<Num>,
    pub majorant_violations: Vec<usize>,
    pub certified_tail: Num,
    pub residual: Num,
    pub oracle_gap: Num,
    pub oracle_residual: Num,
    /// Scenario-specific named columns.
    pub curves: BTreeMap<String, Vec<Num>>,
    pub wall_time: Num,
}

impl RunReport {
    fn empty(cfg: &RunConfig) -> Self {
        RunReport {
            scenario: cfg.scenario.name().to_string(),
            seed: cfg.seed,
            p: cfg.p.to_string(),
            horizon: Num(cfg.grid.horizon()),
            n_steps: cfg.grid.n_steps(),
            converged: true,
            terms_used: 0,
            kernel_bound: Num(f64::NAN),
            term_norms: Vec::new(),
            majorants: Vec::new(),
            quad_slack: Vec::new(),
            ratios: Vec::new(),
            majorant_violations: Vec::new(),
            certified_tail: Num(f64::NAN),
            residual: Num(f64::NAN),
            oracle_gap: Num(f64::NAN),
            oracle_residual: Num(f64::NAN),
            curves: BTreeMap::new(),
            wall_time: Num(0.0),
        }
    }

    fn fill_neumann(&mut self, r: &NeumannReport) {
        self.converged = r.converged;
        self.terms_used = r.terms_used;
        self.kernel_bound = Num(r.kernel_bound);
        self.term_norms = nums(&r.term_norms);
        self.majorants = nums(&r.majorants);
        self.quad_slack = nums(&r.quad_slack);
        self.ratios = nums(&r.ratios);
        self.majorant_violations = r.majorant_violations();
        self.certified_tail = Num(r.certified_tail);
        self.residual = Num(r.residual);
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Report plus the CSV files that go next to it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub files: Vec<(String, String)>,
}

/// Random sampled kernel `K(t,τ) = M₀ + cos(πt)M₁ + sin(πτ)M₂` with entries
/// of each `M` uniform in the complex unit square, rescaled so the largest
/// Hilbert–Schmidt block norm is `bound`, plus a random affine source.
pub fn random_hilbert_schmidt(
    grid: TimeGrid,
    dim: usize,
    bound: f64,
    seed: u64,
) -> Result<(KernelSpec, Trajectory)> {
    let space = SpaceDescriptor::new(dim, NormKind::GridL2 { cell_width: 1.0 / dim as f64 }, format!("hs{dim}"))?;
    let d2 = dim * dim;
    let mut rng = SplitRng::stream(seed, 1);
    let mats: Vec<Vec<C64>> = (0..3).map(|_| (0..d2).map(|_| rng.unit_square()).collect()).collect();
    let n = grid.n_nodes();
    let mut samples = Vec::with_capacity(n * n * d2);
    for i in 0..n {
        let ct = (PI * grid.node(i)).cos();
        for j in 0..n {
            let st = (PI * grid.node(j)).sin();
            samples.extend((0..d2).map(|e| mats[0][e] + ct * mats[1][e] + st * mats[2][e]));
        }
    }
    let raw = KernelSpec::new(KernelVariant::HilbertSchmidtGrid { samples }, grid, space.clone())?;
    let scale = bound / crate::VolterraKernel::uniform_bound(&raw);
    let KernelVariant::HilbertSchmidtGrid { samples } = raw.variant() else { unreachable!() };
    let scaled = samples.iter().map(|z| z * scale).collect();
    let kernel = KernelSpec::new(KernelVariant::HilbertSchmidtGrid { samples: scaled }, grid, space.clone())?;

    let mut src = SplitRng::stream(seed, 2);
    let v0: Vec<C64> = (0..dim).map(|_| src.unit_square()).collect();
    let v1: Vec<C64> = (0..dim).map(|_| src.unit_square()).collect();
    let f = Trajectory::from_fn(grid, &space, |t| v0.iter().zip(&v1).map(|(a, b)| a + b * t).collect())?;
    Ok((kernel, f))
}

fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "component", "re", "im", "abs2"]).map_err(csv_err)?;
    for (i, v) in traj.values().iter().enumerate() {
        let t = traj.grid().node(i);
        for (a, z) in v.coords().iter().enumerate() {
            w.write_record(&[fmt(t), a.to_string(), fmt(z.re), fmt(z.im), fmt(z.norm_sqr())]).map_err(csv_err)?;
        }
    }
    finish_csv(w)
}

fn snapshot_csv(grid: &SpatialGrid, values: &[C64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "re", "im", "abs2"]).map_err(csv_err)?;
    for (x, z) in grid.points().zip(values) {
        w.write_record(&[fmt(x), fmt(z.re), fmt(z.im), fmt(z.norm_sqr())]).map_err(csv_err)?;
    }
    finish_csv(w)
}

fn columns_csv(header: &[&str], cols: &[&[f64]]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in 0..cols.first().map_or(0, |c| c.len()) {
        w.write_record(cols.iter().map(|c| fmt(c[row]))).map_err(csv_err)?;
    }
    finish_csv(w)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Sampled points of the Abel sweep as CSV `(alpha, re, im, abs_error)`.
pub fn fresnel_csv(n: u32, schedule_len: usize) -> Result<String> {
    let rows = quadrature_sweep(n, &AbelSchedule::geometric(schedule_len))?;
    let a: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let re: Vec<f64> = rows.iter().map(|r| r.value.re).collect();
    let im: Vec<f64> = rows.iter().map(|r| r.value.im).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.error).collect();
    columns_csv(&["alpha", "re", "im", "abs_error"], &[&a, &re, &im, &err])
}

/// `(t, sup error)` CSV of the free evolution of the standard Gaussian.
pub fn poisson_csv(t_list: &[f64], wave: &WaveSetup) -> Result<String> {
    let f = wave.packet.sample(wave.grid, wave.params, 0.0);
    let errs = initial_condition_sweep(&f, t_list)?;
    columns_csv(&["t", "sup_error"], &[t_list, &errs])
}

fn dump_terms(files: &mut Vec<(String, String)>, terms: &[Trajectory]) -> Result<()> {
    for (n, term) in terms.iter().enumerate() {
        files.push((format!("term_{n:03}.csv"), trajectory_csv(term)?));
    }
    Ok(())
}

fn dyson_snapshots(
    files: &mut Vec<(String, String)>,
    cfg: &RunConfig,
    wave: &WaveSetup,
    sol: &Trajectory,
) -> Result<()> {
    for &t in &cfg.snapshot_times {
        let i = cfg.grid.index_of(t).expect("validated snapshot time");
        files.push((format!("snapshot_{i:05}.csv"), snapshot_csv(&wave.grid, sol.at(i).coords())?));
    }
    Ok(())
}

/// Run a scenario in memory. The report's `wall_time` is the only field that
/// depends on anything but the config.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let mut report = RunReport::empty(cfg);
    let mut files = Vec::new();
    let grid = cfg.grid;
    match &cfg.scenario {
        Scenario::Resolvent { lambda } => {
            let k = KernelSpec::scalar_constant(*lambda, grid);
            let one = BanachElement::from_real(&SpaceDescriptor::scalar(), &[1.0])?;
            let f = Trajectory::constant(grid, &one);
            let out = neumann_solve_detailed(&k, &f, &cfg.settings()?)?;
            let exact = reference_solution(&ReferenceCase::ResolventExponential { lambda: *lambda }, grid, k_space(&k))?;
            report.fill_neumann(&out.report);
            report.oracle_gap = Num(out.solution.sup_distance(&exact)?);
            files.push(("solution.csv".into(), trajectory_csv(&out.solution)?));
            if cfg.dump_terms {
                dump_terms(&mut files, &out.terms)?;
            }
        }
        Scenario::HilbertSchmidt { dim, bound } => {
            let (k, f) = random_hilbert_schmidt(grid, *dim, *bound, cfg.seed)?;
            let out = neumann_solve_detailed(&k, &f, &cfg.settings()?)?;
            let reference = collocation_solve(&k, &f)?;
            report.fill_neumann(&out.report);
            report.oracle_gap = Num(out.solution.sup_distance(&reference)?);
            report.oracle_residual = Num(crate::picard::residual_with(&k, &reference, &f, cfg.parallel)?);
            files.push(("solution.csv".into(), trajectory_csv(&out.solution)?));
            if cfg.dump_terms {
                dump_terms(&mut files, &out.terms)?;
            }
        }
        Scenario::DysonConstant { potential, wave } | Scenario::DysonLorentzian { potential, wave } => {
            let k = build_dyson_kernel(*potential, wave.grid, wave.params, grid)?;
            let initial = wave.packet.sample(wave.grid, wave.params, 0.0);
            let f = free_source(&initial, grid)?;
            let out = neumann_solve_detailed(&k, &f, &cfg.settings()?)?;
            report.fill_neumann(&out.report);
            let reference = match potential.shape {
                PotentialShape::Constant { value } => reference_solution(
                    &ReferenceCase::ConstantPotentialPhase {
                        v0: value,
                        params: wave.params,
                        grid: wave.grid,
                        packet: wave.packet,
                    },
                    grid,
                    k_space(&k),
                )?,
                _ => {
                    let r = collocation_solve(&k, &f)?;
                    report.oracle_residual = Num(crate::picard::residual_with(&k, &r, &f, cfg.parallel)?);
                    r
                }
            };
            report.oracle_gap = Num(out.solution.sup_distance(&reference)?);
            let profile = crate::schrodinger::source_term_profile(
                &out.solution,
                &f,
                potential,
                &wave.grid,
                &wave.params,
            )?;
            report.curves.insert("t".into(), nums(&grid.nodes().collect::<Vec<_>>()));
            report.curves.insert("source_gap".into(), profile.iter().map(|p| Num(p.0)).collect());
            report.curves.insert("source_bound".into(), profile.iter().map(|p| Num(p.1)).collect());
            report.curves.insert("l2_norm".into(), nums(&out.solution.node_norms()));
            dyson_snapshots(&mut files, cfg, wave, &out.solution)?;
            if cfg.dump_terms {
                for (n, term) in out.terms.iter().enumerate() {
                    let last = term.at(grid.n_steps()).coords();
                    files.push((format!("term_{n:03}.csv"), snapshot_csv(&wave.grid, last)?));
                }
            }
        }
        Scenario::Fresnel { n, schedule_len } => {
            let rows = quadrature_sweep(*n, &AbelSchedule::geometric(*schedule_len))?;
            let samples: Vec<(f64, C64)> = rows.iter().map(|r| (r.alpha, r.value)).collect();
            let (limit, est) = abel_limit_from_samples(&samples);
            report.oracle_gap = Num((limit - fresnel_closed(*n, 0.0)).norm());
            report.certified_tail = Num(est);
            report.curves.insert("alpha".into(), rows.iter().map(|r| Num(r.alpha)).collect());
            report.curves.insert("re".into(), rows.iter().map(|r| Num(r.value.re)).collect());
            report.curves.insert("im".into(), rows.iter().map(|r| Num(r.value.im)).collect());
            report.curves.insert("abs_error".into(), rows.iter().map(|r| Num(r.error)).collect());
            report.curves.insert("limit".into(), vec![Num(limit.re), Num(limit.im)]);
            files.push(("fresnel.csv".into(), fresnel_csv(*n, *schedule_len)?));
        }
        Scenario::PoissonSweep { t_list, wave } => {
            let f = wave.packet.sample(wave.grid, wave.params, 0.0);
            let errs = initial_condition_sweep(&f, t_list)?;
            report.oracle_gap = Num(*errs.last().expect("non-empty t_list"));
            report.curves.insert("t".into(), nums(t_list));
            report.curves.insert("sup_error".into(), nums(&errs));
            files.push(("poisson.csv".into(), poisson_csv(t_list, wave)?));
        }
    }
    report.wall_time = Num(start.elapsed().as_secs_f64());
    Ok(RunOutput { report, files })
}

fn k_space(k: &KernelSpec) -> &std::sync::Arc<SpaceDescriptor> {
    crate::VolterraKernel::space(k)
}

/// Write `report.json` and CSV files into `dir`.
pub fn write_output(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), out.report.to_json()?)?;
    for (name, body) in &out.files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Exit code for an error raised while loading or running a config.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Load, run and write; returns the process exit code.
pub fn run(config_path: &Path) -> Result<i32> {
    let cfg = RunConfig::load(config_path)?;
    let out = execute(&cfg)?;
    write_output(&cfg.output_dir, &out)?;
    Ok(if out.report.converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

/// `report.json` text with the `wall_time` line removed, for comparisons.
pub fn strip_wall_time(json: &str) -> String {
    json.lines().filter(|l| !l.trim_start().starts_with("\"wall_time\"")).collect::<Vec<_>>().join("\n")
}
