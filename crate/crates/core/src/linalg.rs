//! Small dense complex linear algebra and polynomial propagation.
//!
//! Two routes to `exp(-iHt)|ψ>` are provided:
//!
//! * [`DenseMatrix::expm`]: scaling and squaring with a degree-13 Padé
//!   approximant, for small Hamiltonians.
//! * [`chebyshev_propagate`]: Chebyshev expansion of the propagator driven
//!   only by operator-vector products, for anything that implements
//!   [`HermitianOperator`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent f64 math shadows this whenever std is linked
use num_traits::Float;

use crate::error::{Result, WalkError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A Hermitian operator known through its action on vectors.
pub trait HermitianOperator {
    fn dim(&self) -> usize;

    /// `out = H · input`.
    fn apply(&self, input: &[Complex64], out: &mut [Complex64]);

    /// Interval `[lo, hi]` containing the whole spectrum.
    fn spectral_bounds(&self) -> (f64, f64);
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, data }
    }

    /// Dense matrix of an operator, built column by column.
    pub fn from_operator(op: &impl HermitianOperator) -> Self {
        let n = op.dim();
        let mut m = Self::zeros(n);
        let mut e = vec![ZERO; n];
        let mut col = vec![ZERO; n];
        for j in 0..n {
            e[j] = ONE;
            op.apply(&e, &mut col);
            for i in 0..n {
                m.data[i * n + j] = col[i];
            }
            e[j] = ZERO;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.n + j] = value;
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .norm()
                        .partial_cmp(&a[y * n + col].norm())
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            let p = a[pivot * n + col];
            if p.norm() < 1e-300 {
                return Err(WalkError::Numerical {
                    residual: p.norm(),
                });
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    b.swap(col * n + j, pivot * n + j);
                }
            }
            let inv = ONE / p;
            for row in col + 1..n {
                let f = a[row * n + col] * inv;
                if f == ZERO {
                    continue;
                }
                for j in col..n {
                    let t = a[col * n + j];
                    a[row * n + j] -= f * t;
                }
                for j in 0..n {
                    let t = b[col * n + j];
                    b[row * n + j] -= f * t;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = ONE / a[col * n + col];
            for j in 0..n {
                let mut acc = b[col * n + j];
                for k in col + 1..n {
                    acc -= a[col * n + k] * b[k * n + j];
                }
                b[col * n + j] = acc * inv;
            }
        }
        Ok(Self { n, data: b })
    }

    /// Matrix exponential by scaling and squaring with a [13/13] Padé approximant.
    pub fn expm(&self) -> Result<Self> {
        const B: [f64; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        const THETA_13: f64 = 5.371920351148152;

        let n = self.n;
        if n == 0 {
            return Ok(Self::zeros(0));
        }
        let norm = self.norm1();
        let squarings = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scale(Complex64::new(2f64.powi(-squarings), 0.0));
        let ident = Self::identity(n);
        let a2 = a.matmul(&a);
        let a4 = a2.matmul(&a2);
        let a6 = a4.matmul(&a2);

        let mut inner_u = a6.scale(Complex64::new(B[13], 0.0));
        inner_u.axpy(B[11], &a4);
        inner_u.axpy(B[9], &a2);
        let mut u = a6.matmul(&inner_u);
        u.axpy(B[7], &a6);
        u.axpy(B[5], &a4);
        u.axpy(B[3], &a2);
        u.axpy(B[1], &ident);
        let u = a.matmul(&u);

        let mut inner_v = a6.scale(Complex64::new(B[12], 0.0));
        inner_v.axpy(B[10], &a4);
        inner_v.axpy(B[8], &a2);
        let mut v = a6.matmul(&inner_v);
        v.axpy(B[6], &a6);
        v.axpy(B[4], &a4);
        v.axpy(B[2], &a2);
        v.axpy(B[0], &ident);

        let mut p = v.clone();
        p.axpy(1.0, &u);
        let mut q = v;
        q.axpy(-1.0, &u);
        let mut r = q.solve(&p)?;
        for _ in 0..squarings {
            r = r.matmul(&r);
        }
        Ok(r)
    }
}

/// `J_0(x) ..= J_kmax(x)` for `x ≥ 0` by Miller's downward recurrence,
/// normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x < 1e-6 {
        // leading term (x/2)^k / k!; the next correction is O(x^2) relative
        let mut term = 1.0;
        for (k, v) in out.iter_mut().enumerate() {
            if k > 0 {
                term *= 0.5 * x / k as f64;
            }
            *v = term;
        }
        return out;
    }
    let top = kmax.max(x.ceil() as usize);
    let mut start = top + 30 + (160.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        if k <= kmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            even_sum += cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e200 {
            let s = 1e-200;
            cur *= s;
            next *= s;
            even_sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    let norm = cur + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Largest `b·Δt` per Chebyshev segment.
const SEGMENT_ARGUMENT: f64 = 100.0;

/// `exp(-i H t) ψ` by Chebyshev expansion.
///
/// The spectrum is mapped onto `[-1, 1]` with the operator's bounds and the
/// series is truncated once the Bessel coefficients fall below 1e-17. Long
/// times are split into segments with `b·Δt ≤ 100`. The result is rejected
/// when its norm drifts from the input norm by more than 1e-9.
pub fn chebyshev_propagate(
    op: &impl HermitianOperator,
    psi: &[Complex64],
    t: f64,
) -> Result<Vec<Complex64>> {
    let n = op.dim();
    if psi.len() != n {
        return Err(WalkError::DimensionMismatch {
            expected: n,
            found: psi.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(WalkError::InvalidParameter(format!("evolution time {t}")));
    }
    let norm_in: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let (lo, hi) = op.spectral_bounds();
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if t == 0.0 {
        return Ok(psi.to_vec());
    }
    if half <= 1e-300 {
        let phase = Complex64::from_polar(1.0, -centre * t);
        return Ok(psi.iter().map(|a| a * phase).collect());
    }

    let segments = ((half * t) / SEGMENT_ARGUMENT).ceil().max(1.0) as usize;
    let dt = t / segments as f64;
    let x = half * dt;
    let guess = (x + 20.0 + 10.0 * x.cbrt()).ceil() as usize;
    let bessel = bessel_j_sequence(x, guess);
    let terms = bessel
        .iter()
        .rposition(|j| j.abs() > 1e-17)
        .map_or(1, |k| k + 1);
    let phase = Complex64::from_polar(1.0, -centre * dt);

    let mut state = psi.to_vec();
    let mut prev = vec![ZERO; n];
    let mut cur = vec![ZERO; n];
    let mut next = vec![ZERO; n];
    let mut acc = vec![ZERO; n];
    let normalized = |input: &[Complex64], out: &mut [Complex64]| {
        op.apply(input, out);
        for (o, i) in out.iter_mut().zip(input) {
            *o = (*o - i * centre) / half;
        }
    };

    // (-i)^k cycles through 1, -i, -1, i
    let powers = [
        ONE,
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    for _ in 0..segments {
        prev.copy_from_slice(&state);
        for (a, p) in acc.iter_mut().zip(&prev) {
            *a = p * bessel[0];
        }
        if terms > 1 {
            normalized(&prev, &mut cur);
            let c1 = powers[1] * (2.0 * bessel[1]);
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += c * c1;
            }
        }
        for k in 2..terms {
            normalized(&cur, &mut next);
            for (nx, p) in next.iter_mut().zip(&prev) {
                *nx = *nx * 2.0 - p;
            }
            let ck = powers[k % 4] * (2.0 * bessel[k]);
            for (a, v) in acc.iter_mut().zip(&next) {
                *a += v * ck;
            }
            core::mem::swap(&mut prev, &mut cur);
            core::mem::swap(&mut cur, &mut next);
        }
        for (s, a) in state.iter_mut().zip(&acc) {
            *s = a * phase;
        }
    }

    let norm_out: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let residual = (norm_out - norm_in).abs();
    if residual > 1e-9 || !norm_out.is_finite() {
        return Err(WalkError::Numerical { residual });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        // Abramowitz & Stegun table values
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_sequence(10.0, 5);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-14);
        let j = bessel_j_sequence(0.0, 2);
        assert_eq!(j, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bessel_sum_rule_large_argument() {
        let x = 150.0;
        let j = bessel_j_sequence(x, 400);
        let total: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(j[400].abs() < 1e-30);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = DenseMatrix::from_fn(2, |i, j| {
            if i == j {
                Complex64::new(0.0, if i == 0 { 1.0 } else { -2.0 })
            } else {
                ZERO
            }
        });
        let e = d.expm().unwrap();
        assert!((e.get(0, 0) - Complex64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert!((e.get(1, 1) - Complex64::from_polar(1.0, -2.0)).norm() < 1e-14);
        // exp([[0, 7], [0, 0]]) = [[1, 7], [0, 1]]
        let nil = DenseMatrix::from_fn(2, |i, j| {
            if i == 0 && j == 1 {
                Complex64::new(7.0, 0.0)
            } else {
                ZERO
            }
        });
        let e = nil.expm().unwrap();
        assert!((e.get(0, 1) - Complex64::new(7.0, 0.0)).norm() < 1e-13);
        assert!((e.get(0, 0) - ONE).norm() < 1e-14);
    }

    #[test]
    fn expm_rotation_with_large_norm() {
        // exp(-i θ X) = cos θ - i sin θ X, θ large enough to force squaring
        let theta = 37.5;
        let m = DenseMatrix::from_fn(2, |i, j| {
            if i != j {
                Complex64::new(0.0, -theta)
            } else {
                ZERO
            }
        });
        let e = m.expm().unwrap();
        assert!((e.get(0, 0) - Complex64::new(theta.cos(), 0.0)).norm() < 1e-12);
        assert!((e.get(0, 1) - Complex64::new(0.0, -theta.sin())).norm() < 1e-12);
    }

    #[test]
    fn solve_recovers_identity() {
        let m = DenseMatrix::from_fn(3, |i, j| Complex64::new((i * 3 + j) as f64 + 1.0, (i as f64) - (j as f64)));
        let m = {
            let mut m = m;
            m.set(2, 2, Complex64::new(-4.0, 1.0));
            m
        };
        let inv = m.solve(&DenseMatrix::identity(3)).unwrap();
        let prod = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { ONE } else { ZERO };
                assert!((prod.get(i, j) - want).norm() < 1e-12);
            }
        }
        assert!(DenseMatrix::zeros(2).solve(&DenseMatrix::identity(2)).is_err());
    }
}
