//! Discrete-time coined quantum walk.
//!
//! One step is `U = S (C ⊗ 1)`: the coin operator acts on the coin register
//! at every vertex, then the conditional shift moves each coin component
//! along the edge it selects.
//!
//! Two shift rules are used, chosen by the substrate:
//!
//! * Lattices (including lines and their percolations) index the coin by
//!   direction slot. The shift keeps the slot, so `|-1, x>` goes to
//!   `|-1, x-1>` and `|+1, x>` to `|+1, x+1>`. A slot whose edge is missing
//!   reflects: the amplitude stays at its vertex and its slot flips to the
//!   opposite direction on the same axis.
//! * General graphs index the coin by port and use the flip-flop rule: the
//!   amplitude on port `k` of `v` moves to the far endpoint `u` and lands on
//!   the port of `u` that carries the same edge. Coin slots beyond the
//!   degree of a vertex wait in place.
//!
//! Both rules are permutations of the basis, so every step is unitary.
//!
//! Amplitudes are stored vertex-major: index `v * coin_dim + c`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;

use crate::error::{Result, WalkError};
use crate::substrate::{make_line, Boundary, Substrate, VertexLabels};

const UNITARY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

/// A `d × d` unitary acting on the coin register.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinOperator {
    dim: usize,
    /// Row-major entries.
    matrix: Vec<Complex64>,
}

impl CoinOperator {
    /// Wraps a row-major matrix, rejecting anything that is not unitary to 1e-12.
    pub fn new(dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(WalkError::InvalidDimension("coin dimension 0".into()));
        }
        if matrix.len() != dim * dim {
            return Err(WalkError::DimensionMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        let coin = Self { dim, matrix };
        let deviation = coin.unitarity_defect();
        if deviation > UNITARY_TOL {
            return Err(WalkError::NotUnitary { deviation });
        }
        Ok(coin)
    }

    /// `[[1, 1], [1, -1]] / √2` in basis order `(|-1>, |+1>)`.
    pub fn hadamard() -> Self {
        let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            dim: 2,
            matrix: vec![h, h, h, -h],
        }
    }

    /// Grover diffusion coin with entries `2/d - δ_ij`.
    pub fn grover(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(WalkError::InvalidDimension("coin dimension 0".into()));
        }
        let off = 2.0 / dim as f64;
        let matrix = (0..dim * dim)
            .map(|k| {
                let diag = if k / dim == k % dim { 1.0 } else { 0.0 };
                Complex64::new(off - diag, 0.0)
            })
            .collect();
        Ok(Self { dim, matrix })
    }

    /// Discrete Fourier coin with entries `ω^{jk} / √d`, `ω = e^{2πi/d}`.
    pub fn dft(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(WalkError::InvalidDimension("coin dimension 0".into()));
        }
        let scale = 1.0 / (dim as f64).sqrt();
        let matrix = (0..dim * dim)
            .map(|k| {
                // reduce the exponent first so the phase stays exact for small d
                let e = ((k / dim) * (k % dim)) % dim;
                let theta = 2.0 * PI * e as f64 / dim as f64;
                Complex64::from_polar(scale, theta)
            })
            .collect();
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(WalkError::InvalidDimension("coin dimension 0".into()));
        }
        let matrix = (0..dim * dim)
            .map(|k| {
                if k / dim == k % dim {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let matrix = (0..d * d)
            .map(|k| self.matrix[(k % d) * d + k / d].conj())
            .collect();
        Self { dim: d, matrix }
    }

    /// Largest entry of `|C†C - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.matrix[k * d + i].conj() * self.matrix[k * d + j];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `out = C · input` for one coin register.
    #[inline]
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for (row, o) in out.iter_mut().enumerate().take(d) {
            let r = &self.matrix[row * d..row * d + d];
            *o = r.iter().zip(input).map(|(a, b)| a * b).sum();
        }
    }
}

/// Biased initial coin state `√b |-1> + e^{iβ} √(1-b) |+1>` at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCoinSpec {
    pub b: f64,
    pub beta: f64,
    pub start_vertex: usize,
}

impl InitialCoinSpec {
    pub fn new(b: f64, beta: f64, start_vertex: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) || !beta.is_finite() {
            return Err(WalkError::InvalidParameter(format!(
                "initial coin bias b = {b}, beta = {beta}"
            )));
        }
        Ok(Self {
            b,
            beta,
            start_vertex,
        })
    }

    /// The coin state as a pair of amplitudes on `(|-1>, |+1>)`.
    pub fn coin_amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.b.sqrt(), 0.0),
            Complex64::from_polar((1.0 - self.b).sqrt(), self.beta),
        ]
    }
}

/// Pure state of one coined walker: amplitude per (vertex, coin slot).
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    coin_dim: usize,
    labels: VertexLabels,
    amplitudes: Vec<Complex64>,
    step_count: u64,
}

impl WalkState {
    /// Wraps a vertex-major amplitude vector laid out for `substrate`.
    pub fn from_amplitudes(
        substrate: &Substrate,
        origin: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let coin_dim = substrate.coin_slots();
        let expected = coin_dim * substrate.n_vertices();
        if amplitudes.len() != expected {
            return Err(WalkError::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        if origin >= substrate.n_vertices() {
            return Err(WalkError::OutOfRange {
                index: origin,
                len: substrate.n_vertices(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::InvalidParameter(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            coin_dim,
            labels: substrate.labels(origin),
            amplitudes,
            step_count: 0,
        })
    }

    /// State with the given coin register at `vertex` and nothing elsewhere.
    pub fn localized(substrate: &Substrate, vertex: usize, coin: &[Complex64]) -> Result<Self> {
        let n = substrate.n_vertices();
        if vertex >= n {
            return Err(WalkError::OutOfRange {
                index: vertex,
                len: n,
            });
        }
        let d = substrate.coin_slots();
        if coin.len() > d {
            return Err(WalkError::DimensionMismatch {
                expected: d,
                found: coin.len(),
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); d * n];
        amplitudes[vertex * d..vertex * d + coin.len()].copy_from_slice(coin);
        Self::from_amplitudes(substrate, vertex, amplitudes)
    }

    pub fn coin_dim(&self) -> usize {
        self.coin_dim
    }

    pub fn n_vertices(&self) -> usize {
        self.amplitudes.len() / self.coin_dim
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, coin: usize, vertex: usize) -> Complex64 {
        self.amplitudes[vertex * self.coin_dim + coin]
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each vertex, summed over the coin.
    pub fn vertex_probabilities(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(self.coin_dim)
            .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }
}

/// Biased initial state of an inline walk, with the coin on slots 0 and 1.
pub fn initial_state(spec: &InitialCoinSpec, substrate: &Substrate) -> Result<WalkState> {
    if substrate.coin_slots() < 2 && spec.b < 1.0 {
        return Err(WalkError::InvalidDimension(format!(
            "biased two-component coin needs at least 2 coin slots, substrate has {}",
            substrate.coin_slots()
        )));
    }
    let [minus, plus] = spec.coin_amplitudes();
    if substrate.coin_slots() < 2 {
        return WalkState::localized(substrate, spec.start_vertex, &[minus]);
    }
    WalkState::localized(substrate, spec.start_vertex, &[minus, plus])
}

/// Line of `2T + 1` sites with the walker's start in the middle, which is
/// exactly the region a `T`-step walk can reach.
pub fn line_for_steps(steps: usize) -> Result<(Substrate, usize)> {
    let half = steps.max(1);
    Ok((make_line(2 * half + 1, Boundary::Open)?, half))
}

/// Where each basis index goes under the conditional shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shift {
    coin_dim: usize,
    dest: Vec<usize>,
}

impl Shift {
    pub fn new(substrate: &Substrate) -> Self {
        let d = substrate.coin_slots();
        let n = substrate.n_vertices();
        let mut dest = Vec::with_capacity(d * n);
        for v in 0..n {
            for slot in 0..d {
                let target = if substrate.is_directional() {
                    match substrate.neighbour_in_direction(v, slot) {
                        Some(u) => u * d + slot,
                        None => v * d + (slot ^ 1),
                    }
                } else {
                    match substrate.port(v, slot) {
                        Some((u, back)) => u * d + back,
                        None => v * d + slot,
                    }
                };
                dest.push(target);
            }
        }
        Self { coin_dim: d, dest }
    }

    pub fn coin_dim(&self) -> usize {
        self.coin_dim
    }

    /// Destination index of basis state `index`.
    pub fn destination(&self, index: usize) -> usize {
        self.dest[index]
    }

    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (i, &a) in input.iter().enumerate() {
            out[self.dest[i]] = a;
        }
    }

    pub fn apply_inverse(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = input[self.dest[i]];
        }
    }

    /// `true` when every basis state has exactly one preimage.
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.dest.len()];
        for &t in &self.dest {
            if t >= seen.len() || seen[t] {
                return false;
            }
            seen[t] = true;
        }
        true
    }
}

/// Coin and shift prepared once for repeated steps on one substrate.
#[derive(Debug, Clone)]
pub struct Propagator {
    coin: CoinOperator,
    shift: Shift,
    n_vertices: usize,
}

impl Propagator {
    pub fn new(coin: &CoinOperator, substrate: &Substrate) -> Result<Self> {
        if coin.dim() != substrate.coin_slots() {
            return Err(WalkError::DimensionMismatch {
                expected: substrate.coin_slots(),
                found: coin.dim(),
            });
        }
        Ok(Self {
            coin: coin.clone(),
            shift: Shift::new(substrate),
            n_vertices: substrate.n_vertices(),
        })
    }

    pub fn coin(&self) -> &CoinOperator {
        &self.coin
    }

    pub fn shift(&self) -> &Shift {
        &self.shift
    }

    pub fn check(&self, state: &WalkState) -> Result<()> {
        if state.coin_dim != self.coin.dim() {
            return Err(WalkError::DimensionMismatch {
                expected: self.coin.dim(),
                found: state.coin_dim,
            });
        }
        if state.n_vertices() != self.n_vertices {
            return Err(WalkError::DimensionMismatch {
                expected: self.n_vertices,
                found: state.n_vertices(),
            });
        }
        Ok(())
    }

    /// Applies `U = S (C ⊗ 1)` to a raw amplitude vector; `scratch` must match its length.
    pub fn apply(&self, amps: &mut [Complex64], scratch: &mut [Complex64]) {
        let d = self.coin.dim();
        for (src, dst) in amps.chunks_exact(d).zip(scratch.chunks_exact_mut(d)) {
            self.coin.apply(src, dst);
        }
        self.shift.apply(scratch, amps);
    }

    /// Applies `U† = (C† ⊗ 1) S⁻¹`.
    pub fn apply_adjoint(&self, amps: &mut [Complex64], scratch: &mut [Complex64]) {
        let d = self.coin.dim();
        self.shift.apply_inverse(amps, scratch);
        let back = self.coin.adjoint();
        for (src, dst) in scratch.chunks_exact(d).zip(amps.chunks_exact_mut(d)) {
            back.apply(src, dst);
        }
    }

    pub fn step_in_place(&self, state: &mut WalkState, scratch: &mut Vec<Complex64>) {
        scratch.resize(state.amplitudes.len(), Complex64::new(0.0, 0.0));
        self.apply(&mut state.amplitudes, scratch);
        state.step_count += 1;
    }
}

/// One step of the walk.
pub fn step(state: &WalkState, coin: &CoinOperator, substrate: &Substrate) -> Result<WalkState> {
    evolve(state, coin, substrate, 1)
}

/// Inverse of [`step`]; the step counter goes back by one.
pub fn step_back(
    state: &WalkState,
    coin: &CoinOperator,
    substrate: &Substrate,
) -> Result<WalkState> {
    let prop = Propagator::new(coin, substrate)?;
    prop.check(state)?;
    let mut out = state.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); out.amplitudes.len()];
    prop.apply_adjoint(&mut out.amplitudes, &mut scratch);
    out.step_count = out.step_count.saturating_sub(1);
    Ok(out)
}

/// `U^T |ψ>`.
pub fn evolve(
    state: &WalkState,
    coin: &CoinOperator,
    substrate: &Substrate,
    steps: usize,
) -> Result<WalkState> {
    let prop = Propagator::new(coin, substrate)?;
    prop.check(state)?;
    let mut out = state.clone();
    let mut scratch = Vec::new();
    for _ in 0..steps {
        prop.step_in_place(&mut out, &mut scratch);
    }
    Ok(out)
}
