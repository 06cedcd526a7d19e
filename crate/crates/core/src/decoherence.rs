//! Imperfect coined walks.
//!
//! Every step applies the unitary walk step followed by a noise channel:
//!
//! | kind               | trajectory (one run)                                   | density matrix                         |
//! |--------------------|--------------------------------------------------------|----------------------------------------|
//! | `CoinMeasure`      | with prob. `strength`, measure the coin (Born rule)    | coin coherences × `(1 - strength)`     |
//! | `PositionMeasure`  | with prob. `strength`, measure the vertex              | vertex coherences × `(1 - strength)`   |
//! | `StaticPhase`      | phase per vertex drawn once per run                    | ensemble only                          |
//! | `FastPhase`        | phase per occupied vertex, redrawn every step          | vertex coherences × `sinc²(strength)`  |
//! | `SlowPhase`        | phase per coin slot, same at every vertex, per step    | ensemble only                          |
//!
//! Phases are uniform on `[-strength, strength]`. The slow phase depends on
//! the coin slot, since a phase that is uniform across positions and coin
//! states would be a global phase.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;
use rand::Rng;

use crate::analysis::{normalised, Distribution, PositionLaw};
use crate::coined::{CoinOperator, Propagator, WalkState};
use crate::ensemble::{self, EnsembleSummary};
use crate::error::{Result, WalkError};
use crate::seed::{derive_seed, rng_from_seed};
use crate::substrate::{Substrate, VertexLabels};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default density-matrix budget in complex entries: a 2^12-site line with
/// a two-state coin, squared.
pub const DEFAULT_DENSITY_BUDGET: u128 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    None,
    CoinMeasure,
    PositionMeasure,
    StaticPhase,
    FastPhase,
    SlowPhase,
}

impl NoiseKind {
    pub fn is_measurement(self) -> bool {
        matches!(self, NoiseKind::CoinMeasure | NoiseKind::PositionMeasure)
    }

    pub fn is_phase(self) -> bool {
        matches!(
            self,
            NoiseKind::StaticPhase | NoiseKind::FastPhase | NoiseKind::SlowPhase
        )
    }
}

/// Decoherence specification.
///
/// `strength` is a probability in `[0, 1]` for the measurement kinds and a
/// phase half-width in `[0, π]` radians for the phase kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub strength: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, strength: f64, seed: u64) -> Result<Self> {
        let max = if kind.is_phase() {
            core::f64::consts::PI
        } else {
            1.0
        };
        if !(0.0..=max).contains(&strength) {
            return Err(WalkError::InvalidParameter(format!(
                "{kind:?} strength {strength} outside [0, {max}]"
            )));
        }
        Ok(Self {
            kind,
            strength,
            seed,
        })
    }

    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            strength: 0.0,
            seed: 0,
        }
    }

    /// `false` when the channel is the identity.
    pub fn is_active(&self) -> bool {
        self.kind != NoiseKind::None && self.strength > 0.0
    }
}

/// Mixed state over the (vertex, coin) basis, row-major, vertex-major basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    coin_dim: usize,
    labels: VertexLabels,
    dim: usize,
    matrix: Vec<Complex64>,
    step_count: u64,
}

fn check_budget(dim: usize, budget: u128) -> Result<()> {
    let required = (dim as u128) * (dim as u128);
    if required > budget {
        return Err(WalkError::Resource {
            what: "density matrix",
            required,
            available: budget,
        });
    }
    Ok(())
}

impl DensityState {
    /// `|ψ><ψ|`, refusing states whose matrix would exceed `budget` entries.
    pub fn from_pure(psi: &WalkState, budget: u128) -> Result<Self> {
        let a = psi.amplitudes();
        let dim = a.len();
        check_budget(dim, budget)?;
        let mut matrix = vec![ZERO; dim * dim];
        for (i, ai) in a.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            for (j, aj) in a.iter().enumerate() {
                matrix[i * dim + j] = ai * aj.conj();
            }
        }
        Ok(Self {
            coin_dim: psi.coin_dim(),
            labels: psi.labels().clone(),
            dim,
            matrix,
            step_count: psi.step_count(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coin_dim(&self) -> usize {
        self.coin_dim
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[i * self.dim + j]
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest `|ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `true` when `ρ + tol·1` admits a Cholesky factorisation, i.e. the
    /// smallest eigenvalue is at least `-tol`.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let n = self.dim;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self.get(j, j).re + tol;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }

    /// Probability of each vertex: diagonal entries summed over the coin.
    pub fn vertex_probabilities(&self) -> Vec<f64> {
        (0..self.dim / self.coin_dim)
            .map(|v| {
                (0..self.coin_dim)
                    .map(|c| {
                        let i = v * self.coin_dim + c;
                        self.get(i, i).re.max(0.0)
                    })
                    .sum()
            })
            .collect()
    }

    /// `ρ → U ρ U†` for one walk step.
    fn conjugate(&mut self, prop: &Propagator, scratch: &mut [Complex64]) {
        let n = self.dim;
        // rows of conj(ρ) are the columns of ρ
        for v in self.matrix.iter_mut() {
            *v = v.conj();
        }
        // rows become columns of Uρ, so the matrix now holds (Uρ)^T
        for row in self.matrix.chunks_exact_mut(n) {
            prop.apply(row, scratch);
        }
        // conj((Uρ)^T)^T = conj(Uρ), whose rows are columns of (Uρ)†
        conj_transpose_in_place(&mut self.matrix, n);
        // rows become columns of U(Uρ)† = (UρU†)† = UρU†
        for row in self.matrix.chunks_exact_mut(n) {
            prop.apply(row, scratch);
        }
        transpose_in_place(&mut self.matrix, n);
    }

    fn dephase(&mut self, noise: &NoiseModel) {
        let n = self.dim;
        let d = self.coin_dim;
        let p = noise.strength;
        match noise.kind {
            NoiseKind::CoinMeasure => {
                for i in 0..n {
                    for j in 0..n {
                        if i % d != j % d {
                            self.matrix[i * n + j] *= 1.0 - p;
                        }
                    }
                }
            }
            NoiseKind::PositionMeasure => {
                for i in 0..n {
                    for j in 0..n {
                        if i / d != j / d {
                            self.matrix[i * n + j] *= 1.0 - p;
                        }
                    }
                }
            }
            NoiseKind::FastPhase => {
                // E[e^{iθ}] for θ uniform on [-s, s] is sin(s)/s
                let s = noise.strength;
                let damp = if s == 0.0 { 1.0 } else { (s.sin() / s).powi(2) };
                for i in 0..n {
                    for j in 0..n {
                        if i / d != j / d {
                            self.matrix[i * n + j] *= damp;
                        }
                    }
                }
            }
            NoiseKind::None | NoiseKind::StaticPhase | NoiseKind::SlowPhase => {}
        }
    }
}

fn transpose_in_place(m: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            m.swap(i * n + j, j * n + i);
        }
    }
}

fn conj_transpose_in_place(m: &mut [Complex64], n: usize) {
    transpose_in_place(m, n);
    for v in m.iter_mut() {
        *v = v.conj();
    }
}

impl PositionLaw for DensityState {
    fn position_distribution(&self) -> Distribution {
        Distribution::new(normalised(self.vertex_probabilities()), self.labels.clone())
            .expect("density diagonal is a distribution")
    }
}

/// Density-matrix evolution under a Markovian noise channel.
///
/// Static and slow phase noise have no single-matrix form here; average
/// trajectories with [`ensemble_average`] instead.
pub fn evolve_density(
    rho0: &DensityState,
    coin: &CoinOperator,
    substrate: &Substrate,
    noise: &NoiseModel,
    steps: usize,
    budget: u128,
) -> Result<DensityState> {
    check_budget(rho0.dim, budget)?;
    if matches!(noise.kind, NoiseKind::StaticPhase | NoiseKind::SlowPhase) && noise.is_active() {
        return Err(WalkError::Unsupported(format!(
            "{:?} noise is defined by its trajectory ensemble",
            noise.kind
        )));
    }
    let prop = Propagator::new(coin, substrate)?;
    let expected = coin.dim() * substrate.n_vertices();
    if rho0.dim != expected {
        return Err(WalkError::DimensionMismatch {
            expected,
            found: rho0.dim,
        });
    }
    let mut rho = rho0.clone();
    let mut scratch = vec![ZERO; rho.dim];
    for _ in 0..steps {
        rho.conjugate(&prop, &mut scratch);
        if noise.is_active() {
            rho.dephase(noise);
        }
        rho.step_count += 1;
    }
    Ok(rho)
}

/// One stochastic realisation of the noisy walk.
///
/// The run draws from a generator seeded with
/// `derive_seed(run_seed, noise.seed)`; with inactive noise nothing is
/// drawn and the result equals the noiseless evolution exactly.
pub fn evolve_trajectory(
    psi0: &WalkState,
    coin: &CoinOperator,
    substrate: &Substrate,
    noise: &NoiseModel,
    steps: usize,
    run_seed: u64,
) -> Result<WalkState> {
    let prop = Propagator::new(coin, substrate)?;
    prop.check(psi0)?;
    Ok(run_trajectory(&prop, psi0, noise, steps, run_seed))
}

pub(crate) fn run_trajectory(
    prop: &Propagator,
    psi0: &WalkState,
    noise: &NoiseModel,
    steps: usize,
    run_seed: u64,
) -> WalkState {
    let mut state = psi0.clone();
    let mut scratch = Vec::new();
    if !noise.is_active() {
        for _ in 0..steps {
            prop.step_in_place(&mut state, &mut scratch);
        }
        return state;
    }

    let mut rng = rng_from_seed(derive_seed(run_seed, noise.seed));
    let d = state.coin_dim();
    let len = state.amplitudes().len();
    let s = noise.strength;
    let draw_phase = |rng: &mut rand_chacha::ChaCha8Rng| {
        Complex64::from_polar(1.0, s * (2.0 * rng.gen::<f64>() - 1.0))
    };
    let static_phases: Vec<Complex64> = if noise.kind == NoiseKind::StaticPhase {
        (0..len / d).map(|_| draw_phase(&mut rng)).collect()
    } else {
        Vec::new()
    };
    let mut coin_phases = vec![ZERO; d];

    for _ in 0..steps {
        prop.step_in_place(&mut state, &mut scratch);
        let amps = state.amplitudes_mut();
        match noise.kind {
            NoiseKind::CoinMeasure | NoiseKind::PositionMeasure => {
                if rng.gen::<f64>() < s {
                    measure(amps, d, noise.kind, &mut rng);
                }
            }
            NoiseKind::StaticPhase => {
                for (cell, ph) in amps.chunks_exact_mut(d).zip(&static_phases) {
                    cell.iter_mut().for_each(|a| *a *= ph);
                }
            }
            NoiseKind::FastPhase => {
                // a phase on an empty vertex is invisible, so none is drawn
                for cell in amps.chunks_exact_mut(d).filter(|c| c.iter().any(|a| *a != ZERO)) {
                    let ph = draw_phase(&mut rng);
                    cell.iter_mut().for_each(|a| *a *= ph);
                }
            }
            NoiseKind::SlowPhase => {
                for ph in coin_phases.iter_mut() {
                    *ph = draw_phase(&mut rng);
                }
                for cell in amps.chunks_exact_mut(d) {
                    for (a, ph) in cell.iter_mut().zip(&coin_phases) {
                        *a *= ph;
                    }
                }
            }
            NoiseKind::None => {}
        }
    }
    state
}

/// Projective measurement of the coin or the vertex with a Born-rule outcome.
fn measure(amps: &mut [Complex64], d: usize, kind: NoiseKind, rng: &mut impl Rng) {
    let outcomes = if kind == NoiseKind::CoinMeasure {
        d
    } else {
        amps.len() / d
    };
    let index_outcome = |i: usize| {
        if kind == NoiseKind::CoinMeasure {
            i % d
        } else {
            i / d
        }
    };
    let mut weights = vec![0.0; outcomes];
    for (i, a) in amps.iter().enumerate() {
        weights[index_outcome(i)] += a.norm_sqr();
    }
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc && w > 0.0 {
            chosen = k;
            break;
        }
    }
    let scale = 1.0 / weights[chosen].sqrt();
    for (i, a) in amps.iter_mut().enumerate() {
        if index_outcome(i) == chosen {
            *a *= scale;
        } else {
            *a = ZERO;
        }
    }
}

/// Mean position law over `runs` trajectories; run `i` uses
/// `derive_seed(seed, i)` as its run seed.
pub fn ensemble_average(
    psi0: &WalkState,
    coin: &CoinOperator,
    substrate: &Substrate,
    noise: &NoiseModel,
    steps: usize,
    runs: usize,
    seed: u64,
) -> Result<EnsembleSummary> {
    let job = ensemble::EnsembleJob {
        base: substrate,
        percolation: None,
        coin,
        initial: psi0,
        noise: *noise,
        steps,
        runs,
        seed,
    };
    job.run()
}
