//! Several walkers on one substrate.
//!
//! States live in the full distinguishable product space: a configuration
//! is one single-walker mode per walker (mode `v * coin_dim + c` for coined
//! walks, `v` for continuous ones) and walker 0 is the most significant
//! digit of the configuration index. Bosonic and fermionic states are
//! (anti)symmetrised when built and stay so because every operator here
//! commutes with walker exchange.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;

use crate::analysis::{normalised, Distribution};
use crate::coined::{CoinOperator, Propagator, WalkState};
use crate::continuous::ContinuousState;
use crate::error::{Result, WalkError};
use crate::linalg::{chebyshev_propagate, HermitianOperator};
use crate::substrate::{Substrate, VertexLabels};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Distinguishable,
    Boson,
    Fermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkKind {
    Coined { coin_dim: usize },
    Continuous,
}

impl WalkKind {
    fn coin_dim(self) -> usize {
        match self {
            WalkKind::Coined { coin_dim } => coin_dim,
            WalkKind::Continuous => 1,
        }
    }
}

/// On-site interaction between walkers sharing a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionSpec {
    None,
    /// Phase `e^{iφ}` per coinciding pair after every coined step.
    CollisionPhase { phi: f64 },
    /// Energy `U` per coinciding pair added to the continuous Hamiltonian.
    Hubbard { u: f64 },
}

/// Checks that `(coin_dim · sites)^walkers` amplitudes fit in `budget`.
///
/// Pass `coin_dim = 1` for continuous walks. Returns the amplitude count.
pub fn dimension_guard(sites: usize, walkers: usize, coin_dim: usize, budget: u128) -> Result<u128> {
    if sites == 0 || walkers == 0 || coin_dim == 0 {
        return Err(WalkError::InvalidSize(format!(
            "need positive sizes, got L={sites}, m={walkers}, coin={coin_dim}"
        )));
    }
    let base = (coin_dim as u128) * (sites as u128);
    let required = u32::try_from(walkers)
        .ok()
        .and_then(|m| base.checked_pow(m))
        .unwrap_or(u128::MAX);
    if required > budget || required > usize::MAX as u128 {
        return Err(WalkError::Resource {
            what: "multi-walker amplitudes",
            required,
            available: budget,
        });
    }
    Ok(required)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiWalkerState {
    walkers: usize,
    sites: usize,
    statistics: Statistics,
    kind: WalkKind,
    labels: VertexLabels,
    amplitudes: Vec<Complex64>,
    step_count: u64,
    time: f64,
}

fn decode(mut index: usize, modes: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % modes;
        index /= modes;
    }
}

fn encode(digits: &[usize], modes: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * modes + d)
}

/// Heap's algorithm: every permutation of `0..m` with its sign.
fn permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut sign = 1.0;
    let mut c = vec![0; m];
    let mut out = vec![(perm.clone(), sign)];
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Number of unordered walker pairs on the same vertex.
fn coinciding_pairs(modes: &[usize], coin_dim: usize) -> usize {
    let mut pairs = 0;
    for a in 0..modes.len() {
        for b in a + 1..modes.len() {
            if modes[a] / coin_dim == modes[b] / coin_dim {
                pairs += 1;
            }
        }
    }
    pairs
}

impl MultiWalkerState {
    fn modes(&self) -> usize {
        self.kind.coin_dim() * self.sites
    }

    /// Wraps a full product-space amplitude vector, checking its norm and
    /// exchange symmetry.
    pub fn from_amplitudes(
        labels: VertexLabels,
        walkers: usize,
        statistics: Statistics,
        kind: WalkKind,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let sites = labels.len();
        let expected = dimension_guard(sites, walkers, kind.coin_dim(), u128::MAX)? as usize;
        if amplitudes.len() != expected {
            return Err(WalkError::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        let state = Self {
            walkers,
            sites,
            statistics,
            kind,
            labels,
            amplitudes,
            step_count: 0,
            time: 0.0,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::InvalidParameter(format!(
                "state norm {norm} is not 1"
            )));
        }
        let defect = state.exchange_defect();
        if defect > NORM_TOL {
            return Err(WalkError::InvalidParameter(format!(
                "{statistics:?} exchange symmetry violated by {defect}"
            )));
        }
        Ok(state)
    }

    /// (Anti)symmetrised product of single-walker coined states; marginals
    /// are labelled like the first walker.
    pub fn coined(
        walkers: &[WalkState],
        statistics: Statistics,
        budget: u128,
    ) -> Result<Self> {
        let first = walkers
            .first()
            .ok_or_else(|| WalkError::InvalidSize("need at least one walker".into()))?;
        let kind = WalkKind::Coined {
            coin_dim: first.coin_dim(),
        };
        let factors: Vec<&[Complex64]> = walkers.iter().map(|w| w.amplitudes()).collect();
        if walkers
            .iter()
            .any(|w| w.labels().len() != first.labels().len() || w.coin_dim() != first.coin_dim())
        {
            return Err(WalkError::Incompatible("walkers live on different substrates".into()));
        }
        Self::product(first.labels().clone(), &factors, statistics, kind, budget)
    }

    /// (Anti)symmetrised product of single-walker continuous states.
    pub fn continuous(
        walkers: &[ContinuousState],
        statistics: Statistics,
        budget: u128,
    ) -> Result<Self> {
        let first = walkers
            .first()
            .ok_or_else(|| WalkError::InvalidSize("need at least one walker".into()))?;
        if walkers.iter().any(|w| w.labels().len() != first.labels().len()) {
            return Err(WalkError::Incompatible("walkers live on different substrates".into()));
        }
        let factors: Vec<&[Complex64]> = walkers.iter().map(|w| w.amplitudes()).collect();
        Self::product(
            first.labels().clone(),
            &factors,
            statistics,
            WalkKind::Continuous,
            budget,
        )
    }

    fn product(
        labels: VertexLabels,
        factors: &[&[Complex64]],
        statistics: Statistics,
        kind: WalkKind,
        budget: u128,
    ) -> Result<Self> {
        let m = factors.len();
        let sites = labels.len();
        let dim = dimension_guard(sites, m, kind.coin_dim(), budget)? as usize;
        let modes = kind.coin_dim() * sites;
        let mut digits = vec![0; m];
        let mut amplitudes = vec![ZERO; dim];
        for (i, a) in amplitudes.iter_mut().enumerate() {
            decode(i, modes, &mut digits);
            *a = digits
                .iter()
                .zip(factors)
                .map(|(&d, f)| f[d])
                .product();
        }
        let mut state = Self {
            walkers: m,
            sites,
            statistics,
            kind,
            labels,
            amplitudes,
            step_count: 0,
            time: 0.0,
        };
        if statistics != Statistics::Distinguishable {
            state.project();
            let norm = state.norm_sqr();
            if norm < 1e-24 {
                return Err(WalkError::InvalidParameter(format!(
                    "{statistics:?} projection of the product state vanishes"
                )));
            }
            let scale = 1.0 / norm.sqrt();
            state.amplitudes.iter_mut().for_each(|a| *a *= scale);
        }
        Ok(state)
    }

    /// Projects onto the symmetric or antisymmetric subspace.
    fn project(&mut self) {
        let fermion = self.statistics == Statistics::Fermion;
        let perms = permutations(self.walkers);
        let modes = self.modes();
        let weight = 1.0 / perms.len() as f64;
        let mut digits = vec![0; self.walkers];
        let mut permuted = vec![0; self.walkers];
        let out: Vec<Complex64> = (0..self.amplitudes.len())
            .map(|i| {
                decode(i, modes, &mut digits);
                let mut acc = ZERO;
                for (perm, sign) in &perms {
                    for (p, &src) in permuted.iter_mut().zip(perm) {
                        *p = digits[src];
                    }
                    let s = if fermion { *sign } else { 1.0 };
                    acc += self.amplitudes[encode(&permuted, modes)] * s;
                }
                acc * weight
            })
            .collect();
        self.amplitudes = out;
    }

    pub fn walkers(&self) -> usize {
        self.walkers
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest violation of the exchange rule over adjacent walker swaps
    /// (which generate every permutation); zero for distinguishable walkers.
    pub fn exchange_defect(&self) -> f64 {
        let sign = match self.statistics {
            Statistics::Distinguishable => return 0.0,
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        };
        let modes = self.modes();
        let mut digits = vec![0; self.walkers];
        let mut worst: f64 = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            decode(i, modes, &mut digits);
            for w in 0..self.walkers.saturating_sub(1) {
                digits.swap(w, w + 1);
                let j = encode(&digits, modes);
                digits.swap(w, w + 1);
                worst = worst.max((self.amplitudes[j] - a * sign).norm());
            }
        }
        worst
    }

    /// Probability of each joint vertex configuration, coin summed out.
    pub fn joint_distribution(&self) -> Distribution {
        let d = self.kind.coin_dim();
        let modes = self.modes();
        let labels = VertexLabels::Configurations {
            sites: self.sites,
            walkers: self.walkers,
        };
        let mut p = vec![0.0; labels.len()];
        let mut digits = vec![0; self.walkers];
        for (i, a) in self.amplitudes.iter().enumerate() {
            decode(i, modes, &mut digits);
            digits.iter_mut().for_each(|x| *x /= d);
            p[encode(&digits, self.sites)] += a.norm_sqr();
        }
        Distribution::new(normalised(p), labels).expect("joint law is normalised")
    }

    /// Position law of walker `w` alone.
    pub fn marginal(&self, w: usize) -> Result<Distribution> {
        if w >= self.walkers {
            return Err(WalkError::OutOfRange {
                index: w,
                len: self.walkers,
            });
        }
        let d = self.kind.coin_dim();
        let stride = self.modes().pow((self.walkers - 1 - w) as u32);
        let mut p = vec![0.0; self.sites];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[(i / stride) % self.modes() / d] += a.norm_sqr();
        }
        Distribution::new(normalised(p), self.labels.clone())
    }

    /// Expected number of walkers on each vertex.
    pub fn occupations(&self) -> Vec<f64> {
        let d = self.kind.coin_dim();
        let modes = self.modes();
        let mut n = vec![0.0; self.sites];
        let mut digits = vec![0; self.walkers];
        for (i, a) in self.amplitudes.iter().enumerate() {
            decode(i, modes, &mut digits);
            let p = a.norm_sqr();
            for &x in &digits {
                n[x / d] += p;
            }
        }
        n
    }

    /// Applies a single-walker linear map to every walker's factor in turn.
    fn apply_per_walker(&mut self, mut op: impl FnMut(&mut [Complex64])) {
        let modes = self.modes();
        let dim = self.amplitudes.len();
        let mut fibre = vec![ZERO; modes];
        for w in 0..self.walkers {
            let stride = modes.pow((self.walkers - 1 - w) as u32);
            let block = stride * modes;
            for start in (0..dim).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (k, f) in fibre.iter_mut().enumerate() {
                        *f = self.amplitudes[base + k * stride];
                    }
                    op(&mut fibre);
                    for (k, f) in fibre.iter().enumerate() {
                        self.amplitudes[base + k * stride] = *f;
                    }
                }
            }
        }
    }
}

/// `steps` coined steps for every walker, each followed by the collision phase.
pub fn multi_evolve_dt(
    state: &MultiWalkerState,
    coin: &CoinOperator,
    substrate: &Substrate,
    inter: &InteractionSpec,
    steps: usize,
    budget: u128,
) -> Result<MultiWalkerState> {
    let coin_dim = match state.kind {
        WalkKind::Coined { coin_dim } => coin_dim,
        WalkKind::Continuous => {
            return Err(WalkError::Incompatible("continuous state given to a coined evolution".into()))
        }
    };
    dimension_guard(state.sites, state.walkers, coin_dim, budget)?;
    if substrate.n_vertices() != state.sites {
        return Err(WalkError::DimensionMismatch {
            expected: state.sites,
            found: substrate.n_vertices(),
        });
    }
    if coin.dim() != coin_dim {
        return Err(WalkError::DimensionMismatch {
            expected: coin_dim,
            found: coin.dim(),
        });
    }
    let phi = match *inter {
        InteractionSpec::None => None,
        InteractionSpec::CollisionPhase { phi } => Some(phi),
        InteractionSpec::Hubbard { .. } => {
            return Err(WalkError::Unsupported(
                "Hubbard interaction applies to continuous walks".into(),
            ))
        }
    };
    let prop = Propagator::new(coin, substrate)?;

    // interaction phase per configuration, only where walkers meet
    let phases: Vec<(usize, Complex64)> = match phi {
        None => Vec::new(),
        Some(phi) => {
            let modes = state.modes();
            let mut digits = vec![0; state.walkers];
            (0..state.amplitudes.len())
                .filter_map(|i| {
                    decode(i, modes, &mut digits);
                    let k = coinciding_pairs(&digits, coin_dim);
                    (k > 0).then(|| (i, Complex64::from_polar(1.0, phi * k as f64)))
                })
                .collect()
        }
    };

    let mut out = state.clone();
    let mut scratch = vec![ZERO; state.modes()];
    for _ in 0..steps {
        out.apply_per_walker(|fibre| prop.apply(fibre, &mut scratch));
        for &(i, ph) in &phases {
            out.amplitudes[i] *= ph;
        }
        out.step_count += 1;
    }
    Ok(out)
}

/// `H = Σ_w γ A_w + U · (coinciding pairs)` on the product space.
struct MultiHamiltonian<'a> {
    substrate: &'a Substrate,
    gamma: f64,
    walkers: usize,
    sites: usize,
    /// Diagonal interaction energy per configuration.
    diagonal: Vec<f64>,
}

impl HermitianOperator for MultiHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let mut digits = vec![0; self.walkers];
        for (i, o) in out.iter_mut().enumerate() {
            decode(i, self.sites, &mut digits);
            let mut acc = input[i] * self.diagonal[i];
            let mut hop = ZERO;
            let mut stride = 1;
            for w in (0..self.walkers).rev() {
                let v = digits[w];
                for &u in self.substrate.neighbours(v) {
                    hop += input[i + u * stride - v * stride];
                }
                stride *= self.sites;
            }
            acc += hop * self.gamma;
            *o = acc;
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let hop = self.gamma * (self.walkers * self.substrate.max_degree()) as f64;
        let (lo, hi) = self
            .diagonal
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        (lo - hop, hi + hop)
    }
}

/// Continuous-time evolution of every walker with optional Hubbard coupling.
pub fn multi_evolve_ct(
    state: &MultiWalkerState,
    substrate: &Substrate,
    gamma: f64,
    inter: &InteractionSpec,
    t: f64,
    budget: u128,
) -> Result<MultiWalkerState> {
    if state.kind != WalkKind::Continuous {
        return Err(WalkError::Incompatible("coined state given to a continuous evolution".into()));
    }
    dimension_guard(state.sites, state.walkers, 1, budget)?;
    if substrate.n_vertices() != state.sites {
        return Err(WalkError::DimensionMismatch {
            expected: state.sites,
            found: substrate.n_vertices(),
        });
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(WalkError::InvalidParameter(format!(
            "hopping rate must be positive, got {gamma}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(WalkError::InvalidParameter(format!("evolution time {t}")));
    }
    let u = match *inter {
        InteractionSpec::None => 0.0,
        InteractionSpec::Hubbard { u } if u.is_finite() => u,
        InteractionSpec::Hubbard { u } => {
            return Err(WalkError::InvalidParameter(format!("Hubbard energy {u}")))
        }
        InteractionSpec::CollisionPhase { .. } => {
            return Err(WalkError::Unsupported(
                "collision phases apply to coined walks".into(),
            ))
        }
    };
    let mut digits = vec![0; state.walkers];
    let diagonal = (0..state.amplitudes.len())
        .map(|i| {
            decode(i, state.sites, &mut digits);
            u * coinciding_pairs(&digits, 1) as f64
        })
        .collect();
    let h = MultiHamiltonian {
        substrate,
        gamma,
        walkers: state.walkers,
        sites: state.sites,
        diagonal,
    };
    let mut out = state.clone();
    out.amplitudes = chebyshev_propagate(&h, &state.amplitudes, t)?;
    out.time += t;
    Ok(out)
}
