//! Reference implementations used only as test oracles. Nothing here calls
//! the library's evolution code.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Cyclic Jacobi diagonalisation of a real symmetric matrix.
/// Returns eigenvalues and the eigenvectors as columns of `v`.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = cs * vkp - sn * vkq;
                    row[q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// `exp(-i h t) psi` through the eigendecomposition of the real symmetric `h`.
pub fn spectral_propagate(h: &[Vec<f64>], t: f64, psi: &[C]) -> Vec<C> {
    let n = h.len();
    let (lambda, v) = jacobi_eigen(h.to_vec());
    let mut out = vec![C::new(0.0, 0.0); n];
    for k in 0..n {
        let overlap: C = (0..n).map(|i| psi[i] * v[i][k]).sum();
        let w = overlap * C::from_polar(1.0, -lambda[k] * t);
        for i in 0..n {
            out[i] += w * v[i][k];
        }
    }
    out
}

/// `gamma * A` from an edge list.
pub fn adjacency(n: usize, edges: &[(usize, usize)], gamma: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        a[u][v] = gamma;
        a[v][u] = gamma;
    }
    a
}

pub type Dense = Vec<Vec<C>>;

pub fn matvec(m: &Dense, x: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Full one-step matrix of the two-state walk on an `n`-site line, written
/// straight from the move rule: coin slot 0 steps left, slot 1 steps right,
/// and a step off an open end turns the coin around in place.
pub fn line_step_matrix(n: usize, periodic: bool, coin: [[C; 2]; 2]) -> Dense {
    let dim = 2 * n;
    let mut u = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for v in 0..n {
        for c_in in 0..2 {
            for c_out in 0..2 {
                let amp = coin[c_out][c_in];
                let target = match (c_out, v) {
                    (0, 0) if !periodic => 1,
                    (0, 0) => 2 * (n - 1),
                    (0, v) => 2 * (v - 1),
                    (_, v) if v == n - 1 && !periodic => 2 * v,
                    (_, v) if v == n - 1 => 1,
                    (_, v) => 2 * (v + 1) + 1,
                };
                u[target][2 * v + c_in] += amp;
            }
        }
    }
    u
}

/// One-step matrix of the flip-flop walk on a general graph given by
/// ascending neighbour lists; ports beyond a vertex's degree stay put.
pub fn flip_flop_matrix(neighbours: &[Vec<usize>], d: usize, coin: &[C]) -> Dense {
    let n = neighbours.len();
    let dim = d * n;
    let mut u = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for v in 0..n {
        for c_in in 0..d {
            for k in 0..d {
                let amp = coin[k * d + c_in];
                let target = match neighbours[v].get(k) {
                    Some(&w) => {
                        let back = neighbours[w].iter().position(|&x| x == v).unwrap();
                        w * d + back
                    }
                    None => v * d + k,
                };
                u[target][v * d + c_in] += amp;
            }
        }
    }
    u
}

/// Pascal-triangle law of `steps` fair ±1 steps over `-steps..=steps`.
pub fn pascal(steps: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..steps {
        let mut next = vec![0.0; row.len() + 1];
        for (i, p) in row.iter().enumerate() {
            next[i] += 0.5 * p;
            next[i + 1] += 0.5 * p;
        }
        row = next;
    }
    let mut out = vec![0.0; 2 * steps + 1];
    for (k, p) in row.into_iter().enumerate() {
        out[2 * k] = p;
    }
    out
}

pub fn std_dev(probabilities: &[f64], origin: usize) -> f64 {
    let x = |i: usize| i as f64 - origin as f64;
    let mean: f64 = probabilities.iter().enumerate().map(|(i, p)| p * x(i)).sum();
    probabilities
        .iter()
        .enumerate()
        .map(|(i, p)| p * (x(i) - mean).powi(2))
        .sum::<f64>()
        .sqrt()
}
