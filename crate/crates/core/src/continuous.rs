//! Continuous-time quantum walk with `H = γA`.
//!
//! The Hamiltonian is the adjacency matrix scaled by the hopping rate: no
//! degree term on the diagonal. States evolve as `exp(-iHt)|ψ>`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;

use crate::error::{Result, WalkError};
use crate::linalg::{bessel_j_sequence, chebyshev_propagate, DenseMatrix, HermitianOperator};
use crate::substrate::{make_line, Boundary, Geometry, Substrate, VertexLabels};

const NORM_TOL: f64 = 1e-10;

/// Largest vertex count accepted by [`EvolutionMethod::Dense`].
pub const DENSE_LIMIT: usize = 1024;

/// `H = γA` for one substrate, held as a sparse neighbour list.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    gamma: f64,
    offsets: Vec<usize>,
    neighbours: Vec<usize>,
    max_degree: usize,
}

pub fn build_hamiltonian(substrate: &Substrate, gamma: f64) -> Result<Hamiltonian> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(WalkError::InvalidParameter(format!(
            "hopping rate must be positive, got {gamma}"
        )));
    }
    let n = substrate.n_vertices();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbours = Vec::with_capacity(2 * substrate.n_edges());
    offsets.push(0);
    for v in 0..n {
        neighbours.extend_from_slice(substrate.neighbours(v));
        offsets.push(neighbours.len());
    }
    Ok(Hamiltonian {
        gamma,
        offsets,
        neighbours,
        max_degree: substrate.max_degree(),
    })
}

impl Hamiltonian {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.neighbours[self.offsets[i]..self.offsets[i + 1]].contains(&j) {
            self.gamma
        } else {
            0.0
        }
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n(), |i, j| Complex64::new(self.entry(i, j), 0.0))
    }

    /// `<ψ|H|ψ>`.
    pub fn expectation(&self, amplitudes: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
        self.apply(amplitudes, &mut h_psi);
        amplitudes
            .iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

impl HermitianOperator for Hamiltonian {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (v, o) in out.iter_mut().enumerate() {
            let s: Complex64 = self.neighbours[self.offsets[v]..self.offsets[v + 1]]
                .iter()
                .map(|&u| input[u])
                .sum();
            *o = s * self.gamma;
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let r = self.gamma * self.max_degree as f64;
        (-r, r)
    }
}

/// Amplitude per vertex plus the elapsed time.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousState {
    labels: VertexLabels,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl ContinuousState {
    pub fn from_amplitudes(
        substrate: &Substrate,
        origin: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let n = substrate.n_vertices();
        if amplitudes.len() != n {
            return Err(WalkError::DimensionMismatch {
                expected: n,
                found: amplitudes.len(),
            });
        }
        if origin >= n {
            return Err(WalkError::OutOfRange {
                index: origin,
                len: n,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(WalkError::InvalidParameter(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            labels: substrate.labels(origin),
            amplitudes,
            time: 0.0,
        })
    }

    /// Walker on a single vertex.
    pub fn localized(substrate: &Substrate, vertex: usize) -> Result<Self> {
        let n = substrate.n_vertices();
        if vertex >= n {
            return Err(WalkError::OutOfRange {
                index: vertex,
                len: n,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[vertex] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(substrate, vertex, amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn vertex_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// How `exp(-iHt)` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionMethod {
    /// Chebyshev polynomial propagation, any size.
    #[default]
    Chebyshev,
    /// Full matrix exponential by scaling and squaring, up to [`DENSE_LIMIT`] vertices.
    Dense,
}

/// `exp(-iHt)|ψ>` by Chebyshev propagation.
pub fn evolve_ct(state: &ContinuousState, h: &Hamiltonian, t: f64) -> Result<ContinuousState> {
    evolve_ct_with(state, h, t, EvolutionMethod::Chebyshev)
}

pub fn evolve_ct_with(
    state: &ContinuousState,
    h: &Hamiltonian,
    t: f64,
    method: EvolutionMethod,
) -> Result<ContinuousState> {
    if state.amplitudes.len() != h.n() {
        return Err(WalkError::DimensionMismatch {
            expected: h.n(),
            found: state.amplitudes.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(WalkError::InvalidParameter(format!("evolution time {t}")));
    }
    let amplitudes = match method {
        EvolutionMethod::Chebyshev => chebyshev_propagate(h, &state.amplitudes, t)?,
        EvolutionMethod::Dense => {
            if h.n() > DENSE_LIMIT {
                return Err(WalkError::Unsupported(format!(
                    "dense exponential limited to {DENSE_LIMIT} vertices, got {}",
                    h.n()
                )));
            }
            let generator = h.to_dense().scale(Complex64::new(0.0, -t));
            let out = generator.expm()?.matvec(&state.amplitudes);
            let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
            let residual = (norm - state.norm_sqr()).abs();
            if residual > 1e-9 {
                return Err(WalkError::Numerical { residual });
            }
            out
        }
    };
    Ok(ContinuousState {
        labels: state.labels.clone(),
        amplitudes,
        time: state.time + t,
    })
}

/// Open line long enough that a walker started at its centre keeps every
/// boundary amplitude below 1e-12 up to time `t`, with the start vertex.
///
/// On the infinite line the amplitude at distance `n` is `(-i)^n J_n(2γt)`,
/// so the half-width is the first order at which the Bessel tail is
/// negligible, plus a small margin.
pub fn line_for_time(gamma: f64, t: f64) -> Result<(Substrate, usize)> {
    if !(gamma > 0.0) || !(t >= 0.0) || !t.is_finite() {
        return Err(WalkError::InvalidParameter(format!(
            "line sizing needs gamma > 0 and t >= 0, got {gamma}, {t}"
        )));
    }
    let x = 2.0 * gamma * t;
    let kmax = (x + 60.0 + 20.0 * x.cbrt()).ceil() as usize;
    let j = bessel_j_sequence(x, kmax);
    let first_small = (0..=kmax)
        .find(|&k| j[k..].iter().all(|v| v.abs() < 1e-13))
        .unwrap_or(kmax);
    let half = first_small + 4;
    Ok((make_line(2 * half + 1, Boundary::Open)?, half))
}

/// Probability on the outer faces of an open lattice, a proxy for how much
/// of the wave has reached the truncation. `None` for other substrates.
pub fn boundary_probability(state: &ContinuousState, substrate: &Substrate) -> Option<f64> {
    match substrate.geometry() {
        Geometry::Lattice { dims } if substrate.boundary() == Boundary::Open => {
            let probs = state.vertex_probabilities();
            let total = probs
                .iter()
                .enumerate()
                .filter(|(v, _)| {
                    crate::substrate::lattice_coords(dims, *v)
                        .iter()
                        .zip(dims)
                        .any(|(&c, &d)| c == 0 || c + 1 == d)
                })
                .map(|(_, p)| p)
                .sum();
            Some(total)
        }
        _ => None,
    }
}
