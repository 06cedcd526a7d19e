//! Experiment configuration.
//!
//! A configuration is one TOML document. Top-level keys describe the job;
//! tables describe its parts:
//!
//! ```toml
//! walk = "discrete"            # or "continuous"
//! steps = 100                  # discrete: one T or a list (sweep)
//! # time = [5.0, 10.0]         # continuous: one t or a list (sweep)
//! # gamma = 1.0                # continuous hopping rate
//! seed = 7
//! runs = 1                     # ensemble size for noisy or percolated jobs
//! memory_budget = 67108864     # complex amplitudes (or density entries)
//! outputs = ["distribution", "moments", "ipr", "tv_vs_classical", "samples(100000)"]
//!
//! [substrate]
//! kind = "line"                # line | lattice | adjacency
//! # sites = 201                # line; default sized to the walk
//! # dims = [31, 31]            # lattice
//! # file = "graph.txt"         # adjacency, relative to the config file
//! boundary = "open"            # or "periodic"
//! # percolation = { mode = "bond", p = 0.9 }
//!
//! [coin]                       # discrete walks only
//! name = "hadamard"            # hadamard | grover | dft | identity
//! # dim = 2                    # defaults to the substrate's port count
//!
//! [initial]
//! b = 0.5
//! beta = 1.5707963267948966
//! # start = 100                # default: the centre of a line or lattice
//!
//! # [noise]
//! # kind = "coin_measure"      # none | coin_measure | position_measure |
//! #                            # static_phase | fast_phase | slow_phase
//! # strength = 1.0
//! # seed = 0
//! # method = "trajectories"    # or "density"
//!
//! # [multiwalker]
//! # walkers = 2
//! # statistics = "boson"       # distinguishable | boson | fermion
//! # starts = [3, 5]
//!
//! # [interaction]
//! # kind = "collision_phase"   # none | collision_phase | hubbard
//! # phi = 3.141592653589793
//! # u = 2.0
//! ```

use std::path::{Path, PathBuf};

use qwalk_core::coined::CoinOperator;
use qwalk_core::continuous::line_for_time;
use qwalk_core::decoherence::{NoiseKind, NoiseModel};
use qwalk_core::multiwalker::{dimension_guard, InteractionSpec, Statistics};
use qwalk_core::substrate::{lattice_coords, make_lattice, make_line, Boundary, PercolationMode};
use qwalk_core::{Substrate, WalkError};
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};

pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Walk {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstrateKind {
    Line,
    Lattice,
    Adjacency,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Bond,
    Site,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolationConfig {
    pub mode: ModeChoice,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateConfig {
    pub kind: SubstrateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default)]
    pub boundary: BoundaryChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percolation: Option<PercolationConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinName {
    Hadamard,
    Grover,
    Dft,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinConfig {
    pub name: CoinName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChoice {
    None,
    CoinMeasure,
    PositionMeasure,
    StaticPhase,
    FastPhase,
    SlowPhase,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    #[default]
    Trajectories,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseChoice,
    #[serde(default)]
    pub strength: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: NoiseMethod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsChoice {
    #[default]
    Distinguishable,
    Boson,
    Fermion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiwalkerConfig {
    pub walkers: usize,
    #[serde(default)]
    pub statistics: StatisticsChoice,
    pub starts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionChoice {
    None,
    CollisionPhase,
    Hubbard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub kind: InteractionChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub walk: Walk,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<OneOrMany<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
    pub substrate: SubstrateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coin: Option<CoinConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiwalker: Option<MultiwalkerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionConfig>,
    /// Directory that relative paths in the document resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

/// One evolution length of a (possibly swept) job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Steps(usize),
    Time(f64),
}

impl Point {
    /// Sub-directory name used when a job sweeps several points.
    pub fn dir_name(&self) -> String {
        match self {
            Point::Steps(t) => format!("steps-{t}"),
            Point::Time(t) => format!("time-{t}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub distribution: bool,
    pub moments: bool,
    pub ipr: bool,
    pub tv_vs_classical: bool,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPlan {
    pub walkers: usize,
    pub statistics: Statistics,
    pub starts: Vec<usize>,
}

/// A validated configuration, resolved into library objects.
#[derive(Debug, Clone)]
pub struct Plan {
    pub walk: Walk,
    pub substrate: Substrate,
    pub percolation: Option<(PercolationMode, f64)>,
    pub coin: Option<CoinOperator>,
    pub b: f64,
    pub beta: f64,
    pub start: usize,
    pub gamma: f64,
    pub noise: NoiseModel,
    pub density: bool,
    pub multi: Option<MultiPlan>,
    pub interaction: InteractionSpec,
    pub points: Vec<Point>,
    pub runs: usize,
    pub seed: u64,
    pub budget: u128,
    pub outputs: Outputs,
}

impl Plan {
    /// Whether results average over several stochastic runs.
    pub fn is_ensemble(&self) -> bool {
        self.multi.is_none() && (self.percolation.is_some() || (self.noise.is_active() && !self.density))
    }

    pub fn coin_dim(&self) -> usize {
        self.coin.as_ref().map_or(1, |c| c.dim())
    }

    /// Complex numbers held by one state of this job.
    pub fn amplitude_count(&self) -> u128 {
        let per_walker = (self.coin_dim() * self.substrate.n_vertices()) as u128;
        match &self.multi {
            Some(m) => per_walker.checked_pow(m.walkers as u32).unwrap_or(u128::MAX),
            None if self.density => per_walker * per_walker,
            None => per_walker,
        }
    }

    fn check_resources(&self) -> Result<(), WalkError> {
        let n = self.substrate.n_vertices();
        match &self.multi {
            Some(m) => dimension_guard(n, m.walkers, self.coin_dim(), self.budget).map(drop),
            None => {
                let required = self.amplitude_count();
                if required > self.budget {
                    Err(WalkError::Resource {
                        what: if self.density {
                            "density matrix"
                        } else {
                            "walk amplitudes"
                        },
                        required,
                        available: self.budget,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        config.base_dir = base_dir.into();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    /// Every violated constraint, by field path; empty when the config is
    /// valid. Resource limits are not diagnostics; see [`Self::plan`].
    pub fn validate(&self) -> Vec<Diagnostic> {
        match self.build() {
            Err(Error::Invalid(d)) => d,
            _ => Vec::new(),
        }
    }

    /// Resolves a valid configuration. Fails with [`Error::Invalid`] listing
    /// diagnostics, or with a resource error when the job exceeds
    /// `memory_budget`.
    pub fn plan(&self) -> Result<Plan> {
        self.build()
    }

    fn build(&self) -> Result<Plan> {
        let mut diags = Vec::new();
        let mut diag = |path: &str, msg: String| diags.push(Diagnostic::new(path, msg));

        let budget = self.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET) as u128;
        if budget == 0 {
            diag("memory_budget", "must be positive".into());
        }
        if self.runs == 0 {
            diag("runs", "must be at least 1".into());
        }

        // evolution lengths
        let mut points = Vec::new();
        let mut gamma = 1.0;
        match self.walk {
            Walk::Discrete => {
                match &self.steps {
                    None => diag("steps", "required for discrete walks".into()),
                    Some(s) if s.to_vec().is_empty() => diag("steps", "needs at least one value".into()),
                    Some(s) => points = s.to_vec().into_iter().map(Point::Steps).collect(),
                }
                if self.time.is_some() {
                    diag("time", "only continuous walks take a time".into());
                }
                if self.gamma.is_some() {
                    diag("gamma", "only continuous walks take a hopping rate".into());
                }
            }
            Walk::Continuous => {
                match &self.time {
                    None => diag("time", "required for continuous walks".into()),
                    Some(t) if t.to_vec().is_empty() => diag("time", "needs at least one value".into()),
                    Some(t) => {
                        for (i, x) in t.to_vec().into_iter().enumerate() {
                            if !(x >= 0.0 && x.is_finite()) {
                                diag(&format!("time[{i}]"), format!("must be a finite non-negative number, got {x}"));
                            }
                            points.push(Point::Time(x));
                        }
                    }
                }
                if self.steps.is_some() {
                    diag("steps", "only discrete walks take a step count".into());
                }
                if let Some(g) = self.gamma {
                    if !(g > 0.0 && g.is_finite()) {
                        diag("gamma", format!("must be positive, got {g}"));
                    } else {
                        gamma = g;
                    }
                }
            }
        }
        let max_steps = points
            .iter()
            .filter_map(|p| match p {
                Point::Steps(t) => Some(*t),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let max_time = points
            .iter()
            .filter_map(|p| match p {
                Point::Time(t) if t.is_finite() => Some(*t),
                _ => None,
            })
            .fold(0.0, f64::max);

        // substrate
        let sc = &self.substrate;
        let boundary = match sc.boundary {
            BoundaryChoice::Open => Boundary::Open,
            BoundaryChoice::Periodic => Boundary::Periodic,
        };
        let mut default_start = 0;
        let substrate: Option<Substrate> = match sc.kind {
            SubstrateKind::Line => {
                if sc.dims.is_some() {
                    diag("substrate.dims", "lines take `sites`, not `dims`".into());
                }
                if sc.file.is_some() {
                    diag("substrate.file", "only adjacency substrates read a file".into());
                }
                let sized = match (sc.sites, self.walk) {
                    (Some(n), _) => Some((n, n / 2)),
                    (None, Walk::Discrete) => {
                        let half = max_steps.max(1);
                        half.checked_mul(2).map(|x| (x + 1, half))
                    }
                    (None, Walk::Continuous) => line_for_time(gamma, max_time)
                        .ok()
                        .map(|(line, x)| (line.n_vertices(), x)),
                };
                match sized {
                    None => {
                        diag("substrate.sites", "cannot size the line automatically; give `sites`".into());
                        None
                    }
                    Some((n, centre)) => {
                        if (2 * n) as u128 > budget {
                            return Err(resource("walk amplitudes", 2 * n as u128, budget));
                        }
                        default_start = centre;
                        match make_line(n, boundary) {
                            Ok(s) => Some(s),
                            Err(e) => {
                                diag("substrate.sites", e.to_string());
                                None
                            }
                        }
                    }
                }
            }
            SubstrateKind::Lattice => {
                if sc.sites.is_some() {
                    diag("substrate.sites", "lattices take `dims`, not `sites`".into());
                }
                if sc.file.is_some() {
                    diag("substrate.file", "only adjacency substrates read a file".into());
                }
                match &sc.dims {
                    None => {
                        diag("substrate.dims", "required for lattices".into());
                        None
                    }
                    Some(dims) => {
                        let n = dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128));
                        let need = n.and_then(|n| n.checked_mul(2 * dims.len() as u128));
                        match need {
                            Some(need) if need <= budget => {}
                            _ => return Err(resource("walk amplitudes", need.unwrap_or(u128::MAX), budget)),
                        }
                        match make_lattice(dims, boundary) {
                            Ok(s) => {
                                let centre: Vec<usize> = dims.iter().map(|d| d / 2).collect();
                                default_start = centre
                                    .iter()
                                    .zip(dims)
                                    .fold(0, |acc, (c, d)| acc * d + c);
                                debug_assert_eq!(lattice_coords(dims, default_start), centre);
                                Some(s)
                            }
                            Err(e) => {
                                diag("substrate.dims", e.to_string());
                                None
                            }
                        }
                    }
                }
            }
            SubstrateKind::Adjacency => {
                if sc.sites.is_some() || sc.dims.is_some() {
                    diag("substrate", "adjacency substrates take only `file`".into());
                }
                if sc.boundary != BoundaryChoice::Open {
                    diag("substrate.boundary", "boundaries apply to lines and lattices".into());
                }
                match &sc.file {
                    None => {
                        diag("substrate.file", "required for adjacency substrates".into());
                        None
                    }
                    Some(f) => {
                        let path = self.base_dir.join(f);
                        let read = std::fs::File::open(&path)
                            .map_err(|e| Error::io(&path, e))
                            .and_then(|file| crate::io::read_adjacency(std::io::BufReader::new(file)));
                        match read {
                            Ok(s) => Some(s),
                            Err(e) => {
                                diag("substrate.file", e.to_string());
                                None
                            }
                        }
                    }
                }
            }
        };
        let n_vertices = substrate.as_ref().map(Substrate::n_vertices);

        let percolation = sc.percolation.as_ref().and_then(|p| {
            if !(0.0..=1.0).contains(&p.p) {
                diag("substrate.percolation.p", format!("must lie in [0, 1], got {}", p.p));
                return None;
            }
            let mode = match p.mode {
                ModeChoice::Bond => PercolationMode::Bond,
                ModeChoice::Site => PercolationMode::Site,
            };
            Some((mode, p.p))
        });

        // coin
        let coin = match (self.walk, &self.coin) {
            (Walk::Continuous, Some(_)) => {
                diag("coin", "continuous walks have no coin".into());
                None
            }
            (Walk::Continuous, None) => None,
            (Walk::Discrete, None) => {
                diag("coin", "required for discrete walks".into());
                None
            }
            (Walk::Discrete, Some(cc)) => {
                let ports = substrate.as_ref().map(Substrate::coin_slots);
                let dim = cc.dim.or(match cc.name {
                    CoinName::Hadamard => Some(2),
                    _ => ports,
                });
                match dim {
                    None => None,
                    Some(0) => {
                        diag("coin.dim", "must be positive".into());
                        None
                    }
                    Some(d) => {
                        if let Some(p) = ports {
                            if p != d {
                                diag(
                                    "coin.dim",
                                    format!("coin dimension {d} does not match the substrate's {p} ports (its maximum degree)"),
                                );
                            }
                        }
                        let built = match cc.name {
                            CoinName::Hadamard if d != 2 => {
                                diag("coin.dim", format!("the Hadamard coin is two-dimensional, not {d}"));
                                None
                            }
                            CoinName::Hadamard => Some(CoinOperator::hadamard()),
                            CoinName::Grover => CoinOperator::grover(d).ok(),
                            CoinName::Dft => CoinOperator::dft(d).ok(),
                            CoinName::Identity => CoinOperator::identity(d).ok(),
                        };
                        built
                    }
                }
            }
        };

        // initial state
        let init = self.initial.clone().unwrap_or_default();
        let b = init.b.unwrap_or(0.5);
        let beta = init.beta.unwrap_or(0.0);
        if self.walk == Walk::Continuous {
            if init.b.is_some() {
                diag("initial.b", "continuous walkers start on a vertex without a coin".into());
            }
            if init.beta.is_some() {
                diag("initial.beta", "continuous walkers start on a vertex without a coin".into());
            }
        }
        if !(0.0..=1.0).contains(&b) {
            diag("initial.b", format!("must lie in [0, 1], got {b}"));
        }
        if !beta.is_finite() {
            diag("initial.beta", format!("must be finite, got {beta}"));
        }
        let start = init.start.unwrap_or(default_start);
        if let Some(n) = n_vertices {
            if start >= n {
                diag("initial.start", format!("vertex {start} outside 0..{n}"));
            }
        }
        if self.multiwalker.is_some() && init.start.is_some() {
            diag("initial.start", "multiple walkers take `multiwalker.starts`".into());
        }

        // noise
        let nc = self.noise.clone().unwrap_or(NoiseConfig {
            kind: NoiseChoice::None,
            strength: 0.0,
            seed: 0,
            method: NoiseMethod::Trajectories,
        });
        let kind = match nc.kind {
            NoiseChoice::None => NoiseKind::None,
            NoiseChoice::CoinMeasure => NoiseKind::CoinMeasure,
            NoiseChoice::PositionMeasure => NoiseKind::PositionMeasure,
            NoiseChoice::StaticPhase => NoiseKind::StaticPhase,
            NoiseChoice::FastPhase => NoiseKind::FastPhase,
            NoiseChoice::SlowPhase => NoiseKind::SlowPhase,
        };
        let noise = match NoiseModel::new(kind, nc.strength, nc.seed) {
            Ok(n) => n,
            Err(e) => {
                diag("noise.strength", e.to_string());
                NoiseModel::none()
            }
        };
        let density = nc.method == NoiseMethod::Density;
        if kind != NoiseKind::None && self.walk == Walk::Continuous {
            diag("noise.kind", "decoherence channels act on discrete walks only".into());
        }
        if density {
            if matches!(kind, NoiseKind::StaticPhase | NoiseKind::SlowPhase) {
                diag("noise.method", format!("{:?} noise has no density-matrix form; use trajectories", nc.kind));
            }
            if percolation.is_some() {
                diag("noise.method", "density evolution runs on a single, unpercolated substrate".into());
            }
            if self.walk == Walk::Continuous {
                diag("noise.method", "density evolution applies to discrete walks".into());
            }
        }

        // multiple walkers
        let multi = self.multiwalker.as_ref().and_then(|mc| {
            let mut ok = true;
            if mc.walkers == 0 {
                diag("multiwalker.walkers", "must be at least 1".into());
                ok = false;
            }
            if mc.starts.len() != mc.walkers {
                diag(
                    "multiwalker.starts",
                    format!("expected {} start vertices, got {}", mc.walkers, mc.starts.len()),
                );
                ok = false;
            }
            for (i, &s) in mc.starts.iter().enumerate() {
                if n_vertices.is_some_and(|n| s >= n) {
                    diag(&format!("multiwalker.starts[{i}]"), format!("vertex {s} outside the substrate"));
                    ok = false;
                }
            }
            let statistics = match mc.statistics {
                StatisticsChoice::Distinguishable => Statistics::Distinguishable,
                StatisticsChoice::Boson => Statistics::Boson,
                StatisticsChoice::Fermion => Statistics::Fermion,
            };
            if statistics == Statistics::Fermion {
                let mut sorted = mc.starts.clone();
                sorted.sort_unstable();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    diag("multiwalker.starts", "fermions cannot share a start vertex".into());
                    ok = false;
                }
            }
            if noise.kind != NoiseKind::None {
                diag("noise.kind", "decoherence is not available for multiple walkers".into());
            }
            if percolation.is_some() {
                diag("substrate.percolation", "percolation ensembles take a single walker".into());
            }
            ok.then(|| MultiPlan {
                walkers: mc.walkers,
                statistics,
                starts: mc.starts.clone(),
            })
        });

        // interaction
        let interaction = match &self.interaction {
            None => InteractionSpec::None,
            Some(ic) => {
                if ic.kind != InteractionChoice::None && self.multiwalker.is_none() {
                    diag("interaction.kind", "interactions need a [multiwalker] section".into());
                }
                match ic.kind {
                    InteractionChoice::None => InteractionSpec::None,
                    InteractionChoice::CollisionPhase => {
                        if self.walk != Walk::Discrete {
                            diag("interaction.kind", "collision phases apply to discrete walks; use hubbard".into());
                        }
                        match ic.phi {
                            Some(phi) if phi.is_finite() => InteractionSpec::CollisionPhase { phi },
                            _ => {
                                diag("interaction.phi", "collision_phase needs a finite `phi`".into());
                                InteractionSpec::None
                            }
                        }
                    }
                    InteractionChoice::Hubbard => {
                        if self.walk != Walk::Continuous {
                            diag("interaction.kind", "Hubbard energies apply to continuous walks; use collision_phase".into());
                        }
                        match ic.u {
                            Some(u) if u.is_finite() => InteractionSpec::Hubbard { u },
                            _ => {
                                diag("interaction.u", "hubbard needs a finite `u`".into());
                                InteractionSpec::None
                            }
                        }
                    }
                }
            }
        };

        // outputs
        let mut outputs = Outputs::default();
        let requested = self.outputs.clone().unwrap_or_else(|| vec!["distribution".into()]);
        let is_line = sc.kind == SubstrateKind::Line;
        for (i, name) in requested.iter().enumerate() {
            let path = format!("outputs[{i}]");
            match name.as_str() {
                "distribution" => outputs.distribution = true,
                "ipr" => outputs.ipr = true,
                "moments" => {
                    if !is_line {
                        diag(&path, "moments need a line substrate".into());
                    }
                    outputs.moments = true;
                }
                "tv_vs_classical" => {
                    if !is_line || self.walk != Walk::Discrete || self.multiwalker.is_some() {
                        diag(&path, "tv_vs_classical compares a single discrete walker on a line".into());
                    }
                    outputs.tv_vs_classical = true;
                }
                other => match parse_samples(other) {
                    Some(Some(n)) => outputs.samples = Some(n),
                    Some(None) => diag(&path, "sample count must be a positive integer".into()),
                    None => diag(
                        &path,
                        format!(
                            "unknown output {other:?}; expected distribution, moments, ipr, tv_vs_classical or samples(N)"
                        ),
                    ),
                },
            }
        }

        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        let plan = Plan {
            walk: self.walk,
            substrate: substrate.expect("diagnosed"),
            percolation,
            coin,
            b,
            beta,
            start,
            gamma,
            noise,
            density,
            multi,
            interaction,
            points,
            runs: self.runs,
            seed: self.seed,
            budget,
            outputs,
        };
        plan.check_resources()?;
        Ok(plan)
    }

    /// The configuration with every default made explicit.
    pub fn resolved(&self, plan: &Plan) -> ExperimentConfig {
        let mut c = self.clone();
        if c.substrate.kind == SubstrateKind::Line {
            c.substrate.sites = Some(plan.substrate.n_vertices());
        }
        if let Some(coin) = c.coin.as_mut() {
            coin.dim = Some(plan.coin_dim());
        }
        if plan.walk == Walk::Discrete || plan.multi.is_none() {
            let init = c.initial.get_or_insert_with(InitialConfig::default);
            if plan.multi.is_none() {
                init.start = Some(plan.start);
            }
            if plan.walk == Walk::Discrete {
                init.b = Some(plan.b);
                init.beta = Some(plan.beta);
            }
        }
        if plan.walk == Walk::Continuous {
            c.gamma = Some(plan.gamma);
        }
        c.memory_budget = Some(plan.budget as u64);
        c.outputs = Some(c.outputs.unwrap_or_else(|| vec!["distribution".into()]));
        c
    }
}

fn resource(what: &'static str, required: u128, available: u128) -> Error {
    Error::Walk(WalkError::Resource {
        what,
        required,
        available,
    })
}

/// `samples(N)`: `Some(Some(N))` for a valid count, `Some(None)` for a bad
/// count, `None` for anything else.
fn parse_samples(s: &str) -> Option<Option<usize>> {
    let inner = s.strip_prefix("samples(")?.strip_suffix(')')?;
    Some(inner.trim().parse().ok().filter(|&n| n > 0))
}
