//! Position laws, measurement sampling, spreading metrics and resource
//! estimates.
//!
//! A strong simulation yields every amplitude; [`PositionLaw`] reduces any
//! state to its position distribution. A weak simulation reports one
//! position per run; [`sample`] draws such outcomes from the strong result.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;
use rand::Rng;

use crate::coined::WalkState;
use crate::continuous::ContinuousState;
use crate::error::{Result, WalkError};
use crate::seed::rng_from_seed;
use crate::substrate::VertexLabels;

const SUM_TOL: f64 = 1e-9;

/// Probability per labelled position.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probabilities: Vec<f64>,
    labels: VertexLabels,
}

impl Distribution {
    pub fn new(probabilities: Vec<f64>, labels: VertexLabels) -> Result<Self> {
        if probabilities.len() != labels.len() {
            return Err(WalkError::DimensionMismatch {
                expected: labels.len(),
                found: probabilities.len(),
            });
        }
        if let Some((i, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= 0.0) || !p.is_finite())
        {
            return Err(WalkError::InvalidParameter(format!(
                "probability {p} at entry {i}"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(WalkError::InvalidParameter(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            probabilities,
            labels,
        })
    }

    /// All weight on entry `index`.
    pub fn point_mass(labels: VertexLabels, index: usize) -> Result<Self> {
        let mut p = vec![0.0; labels.len()];
        *p.get_mut(index).ok_or(WalkError::OutOfRange {
            index,
            len: labels.len(),
        })? = 1.0;
        Self::new(p, labels)
    }

    pub fn uniform(labels: VertexLabels) -> Result<Self> {
        let n = labels.len();
        Self::new(vec![1.0 / n as f64; n], labels)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability at integer position `x` of a line distribution.
    pub fn at(&self, x: i64) -> Option<f64> {
        match self.labels {
            VertexLabels::Line { origin, len } => {
                let i = x + origin as i64;
                (0..len as i64)
                    .contains(&i)
                    .then(|| self.probabilities[i as usize])
            }
            _ => None,
        }
    }
}

/// Anything with a position distribution.
pub trait PositionLaw {
    fn position_distribution(&self) -> Distribution;
}

impl PositionLaw for WalkState {
    fn position_distribution(&self) -> Distribution {
        Distribution {
            probabilities: normalised(self.vertex_probabilities()),
            labels: self.labels().clone(),
        }
    }
}

impl PositionLaw for ContinuousState {
    fn position_distribution(&self) -> Distribution {
        Distribution {
            probabilities: normalised(self.vertex_probabilities()),
            labels: self.labels().clone(),
        }
    }
}

/// Clears rounding noise in the total so the distribution sums to one.
pub(crate) fn normalised(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    if total > 0.0 && total != 1.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    p
}

pub fn position_distribution(state: &impl PositionLaw) -> Distribution {
    state.position_distribution()
}

/// Measurement outcomes drawn from a distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    /// Entry index of each outcome in the source distribution.
    pub outcomes: Vec<usize>,
    pub seed: u64,
    pub source: String,
}

/// `n` independent draws by inverse CDF over the label order.
///
/// Each draw takes one uniform `u` in `[0, 1)` from the seeded stream and
/// returns the first entry whose cumulative probability exceeds `u · total`.
pub fn sample(dist: &Distribution, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(WalkError::InvalidParameter("sample count must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in &dist.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last_nonzero = dist
        .probabilities
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(0);
    let mut rng = rng_from_seed(seed);
    let outcomes = (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let i = cdf.partition_point(|&c| c <= u);
            i.min(last_nonzero)
        })
        .collect();
    Ok(SampleSet {
        outcomes,
        seed,
        source: format!("distribution over {} entries", dist.len()),
    })
}

/// Empirical distribution of a sample set on the labels of `like`.
pub fn empirical(samples: &SampleSet, like: &Distribution) -> Result<Distribution> {
    let mut counts = vec![0.0; like.len()];
    for &o in &samples.outcomes {
        *counts.get_mut(o).ok_or(WalkError::OutOfRange {
            index: o,
            len: like.len(),
        })? += 1.0;
    }
    let n = samples.outcomes.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    Distribution::new(counts, like.labels.clone())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub sigma: f64,
}

/// Mean, variance and standard deviation of a line distribution.
pub fn moments(dist: &Distribution) -> Result<Moments> {
    let positions: Vec<f64> = match dist.labels {
        VertexLabels::Line { .. } => (0..dist.len())
            .map(|i| dist.labels.position(i).unwrap_or(0) as f64)
            .collect(),
        _ => {
            return Err(WalkError::Unsupported(
                "moments need one-dimensional numeric labels".into(),
            ))
        }
    };
    let mean: f64 = dist
        .probabilities
        .iter()
        .zip(&positions)
        .map(|(p, x)| p * x)
        .sum();
    let variance: f64 = dist
        .probabilities
        .iter()
        .zip(&positions)
        .map(|(p, x)| p * (x - mean) * (x - mean))
        .sum();
    Ok(Moments {
        mean,
        variance,
        sigma: variance.sqrt(),
    })
}

/// Half the L1 distance between two distributions on the same labels.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.labels != b.labels {
        return Err(WalkError::Incompatible(format!(
            "labels {:?} vs {:?}",
            a.labels, b.labels
        )));
    }
    let d: f64 = a
        .probabilities
        .iter()
        .zip(&b.probabilities)
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok((0.5 * d).min(1.0))
}

/// Inverse participation ratio `Σ p²`.
pub fn ipr(dist: &Distribution) -> f64 {
    dist.probabilities.iter().map(|p| p * p).sum()
}

/// Displacement law of `steps` fair ±1 steps, on positions `-T..=T`.
pub fn classical_binomial(steps: usize) -> Distribution {
    let len = 2 * steps + 1;
    let mut probabilities = vec![0.0; len];
    // ln C(T, k) built incrementally, minus T ln 2
    let ln2t = steps as f64 * core::f64::consts::LN_2;
    let mut ln_choose = 0.0;
    for k in 0..=steps {
        if k > 0 {
            ln_choose += ((steps - k + 1) as f64).ln() - (k as f64).ln();
        }
        // k right-steps land at x = 2k - T, entry index x + T = 2k
        probabilities[2 * k] = (ln_choose - ln2t).exp();
    }
    Distribution {
        probabilities: normalised(probabilities),
        labels: VertexLabels::Line { len, origin: steps },
    }
}

/// Register size for a binary-encoded `T`-step line walk:
/// `⌈log₂(2T + 1)⌉` position qubits plus one coin qubit.
pub fn qubits_needed(steps: u64) -> Result<u32> {
    if steps == 0 {
        return Err(WalkError::InvalidParameter("step count must be positive".into()));
    }
    let positions = (steps as u128) * 2 + 1;
    // positions is odd and > 1, so it is never a power of two and its
    // ceiling log equals its bit length
    Ok(128 - positions.leading_zeros() + 1)
}

fn check_float_width(bytes_per_float: u32) -> Result<()> {
    if bytes_per_float != 4 && bytes_per_float != 8 {
        return Err(WalkError::InvalidParameter(format!(
            "float width must be 4 or 8 bytes, got {bytes_per_float}"
        )));
    }
    Ok(())
}

/// Complex amplitudes that fit in `memory_bytes`, two floats each.
pub fn amplitude_capacity(memory_bytes: u128, bytes_per_float: u32) -> Result<u128> {
    check_float_width(bytes_per_float)?;
    Ok(memory_bytes / (2 * bytes_per_float as u128))
}

/// Basis states whose density matrix fits in `memory_bytes`: the integer
/// square root of [`amplitude_capacity`].
pub fn density_capacity(memory_bytes: u128, bytes_per_float: u32) -> Result<u128> {
    Ok(isqrt(amplitude_capacity(memory_bytes, bytes_per_float)?))
}

/// Bytes needed to hold `amplitudes` complex numbers.
pub fn memory_for_amplitudes(amplitudes: u128, bytes_per_float: u32) -> Result<u128> {
    check_float_width(bytes_per_float)?;
    amplitudes
        .checked_mul(2 * bytes_per_float as u128)
        .ok_or_else(|| WalkError::InvalidParameter("memory size overflows".into()))
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Least-squares slope of `ln σ` against `ln T`.
pub fn spreading_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(t, s)| !(t > 0.0) || !(s > 0.0)) {
        return Err(WalkError::InvalidParameter(
            "need at least two points with positive time and spread".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(WalkError::InvalidParameter("all times are equal".into()));
    }
    Ok(sxy / sxx)
}
