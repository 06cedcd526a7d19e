mod common;

use common::*;
use num_complex::Complex64;
use qwalk_core::analysis::{classical_binomial, moments, position_distribution, total_variation};
use qwalk_core::coined::{evolve, initial_state, line_for_steps, step, CoinOperator, InitialCoinSpec};
use qwalk_core::continuous::{build_hamiltonian, evolve_ct, evolve_ct_with, EvolutionMethod};
use qwalk_core::substrate::{from_adjacency, make_lattice, make_line, Boundary};
use qwalk_core::{ContinuousState, WalkState};
use std::f64::consts::PI;

fn hadamard_rows() -> [[Complex64; 2]; 2] {
    let h = c(SQRT_HALF, 0.0);
    [[h, h], [h, -h]]
}

#[test]
fn three_steps_from_left_coin_by_hand() {
    let (line, x0) = line_for_steps(3).unwrap();
    let psi = initial_state(&InitialCoinSpec::new(1.0, 0.0, x0).unwrap(), &line).unwrap();
    let out = evolve(&psi, &CoinOperator::hadamard(), &line, 3).unwrap();
    let s = 0.5 * SQRT_HALF;
    // (displacement, left amplitude, right amplitude)
    let table = [
        (-3, s, 0.0),
        (-2, 0.0, 0.0),
        (-1, 2.0 * s, s),
        (0, 0.0, 0.0),
        (1, -s, 0.0),
        (2, 0.0, 0.0),
        (3, 0.0, s),
    ];
    for (x, left, right) in table {
        let v = (x0 as i64 + x) as usize;
        assert!((out.amplitude(0, v) - c(left, 0.0)).norm() < 1e-15, "x={x}");
        assert!((out.amplitude(1, v) - c(right, 0.0)).norm() < 1e-15, "x={x}");
    }
}

#[test]
fn one_step_from_left_coin() {
    let line = make_line(3, Boundary::Open).unwrap();
    let psi = WalkState::localized(&line, 1, &[c(1.0, 0.0)]).unwrap();
    let out = step(&psi, &CoinOperator::hadamard(), &line).unwrap();
    assert!((out.amplitude(0, 0) - c(SQRT_HALF, 0.0)).norm() < 1e-15);
    assert!((out.amplitude(1, 2) - c(SQRT_HALF, 0.0)).norm() < 1e-15);
    assert_eq!(out.step_count(), 1);
}

#[test]
fn line_walk_matches_explicit_step_matrix() {
    for (n, periodic) in [(9, false), (10, true), (3, true), (2, false)] {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let line = match make_line(n, boundary) {
            Ok(l) => l,
            Err(_) => continue,
        };
        let u = line_step_matrix(n, periodic, hadamard_rows());
        let mut want: Vec<Complex64> = (0..2 * n)
            .map(|i| c((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let norm = want.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        want.iter_mut().for_each(|a| *a /= norm);
        let mut got = WalkState::from_amplitudes(&line, 0, want.clone()).unwrap();
        for t in 0..25 {
            want = matvec(&u, &want);
            got = step(&got, &CoinOperator::hadamard(), &line).unwrap();
            for (a, b) in got.amplitudes().iter().zip(&want) {
                assert!((a - b).norm() < 1e-12, "n={n} periodic={periodic} t={t}");
            }
        }
    }
}

#[test]
fn graph_walk_matches_flip_flop_matrix() {
    // a kite: triangle 0-1-2 with a tail 2-3-4 and a pendant 1-5
    let edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 5)];
    let g = from_adjacency(&edges, 6).unwrap();
    let d = g.coin_slots();
    assert_eq!(d, 3);
    let neighbours: Vec<Vec<usize>> = (0..6).map(|v| g.neighbours(v).to_vec()).collect();
    for coin in [CoinOperator::grover(3).unwrap(), CoinOperator::dft(3).unwrap()] {
        let u = flip_flop_matrix(&neighbours, d, coin.matrix());
        let mut want = vec![c(0.0, 0.0); 18];
        want[7] = c(0.6, 0.0);
        want[8] = c(0.0, 0.8);
        let mut got = WalkState::from_amplitudes(&g, 2, want.clone()).unwrap();
        for _ in 0..30 {
            want = matvec(&u, &want);
            got = step(&got, &coin, &g).unwrap();
        }
        for (a, b) in got.amplitudes().iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn binomial_matches_pascal_triangle() {
    for steps in [0, 1, 2, 7, 20, 100] {
        let law = classical_binomial(steps);
        let want = pascal(steps);
        assert_eq!(law.len(), want.len());
        for (a, b) in law.probabilities().iter().zip(&want) {
            assert!((a - b).abs() < 1e-14, "T={steps}");
        }
    }
    let sigma = moments(&classical_binomial(100)).unwrap().sigma;
    assert!((sigma - 10.0).abs() < 1e-12);
}

#[test]
fn continuous_walk_matches_spectral_oracle_on_small_graphs() {
    let graphs: Vec<(usize, Vec<(usize, usize)>)> = vec![
        (2, vec![(0, 1)]),
        (3, vec![(0, 1), (0, 2), (1, 2)]),
        (5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
        (6, vec![]),
    ];
    for (n, edges) in graphs {
        let g = from_adjacency(&edges, n).unwrap();
        let h = adjacency(n, &edges, 0.8);
        let psi = ContinuousState::localized(&g, 0).unwrap();
        for t in [0.0, 0.3, 2.5, 11.0] {
            let want = spectral_propagate(&h, t, psi.amplitudes());
            let ham = build_hamiltonian(&g, 0.8).unwrap();
            for method in [EvolutionMethod::Chebyshev, EvolutionMethod::Dense] {
                let got = evolve_ct_with(&psi, &ham, t, method).unwrap();
                for (a, b) in got.amplitudes().iter().zip(&want) {
                    assert!((a - b).norm() < 1e-8, "n={n} t={t} {method:?}");
                }
            }
        }
    }
}

#[test]
fn continuous_walk_on_a_grid_matches_spectral_oracle() {
    let g = make_lattice(&[8, 8], Boundary::Open).unwrap();
    let h = adjacency(64, &g.edges(), 1.0);
    let psi = ContinuousState::localized(&g, 27).unwrap();
    let want = spectral_propagate(&h, 6.0, psi.amplitudes());
    let got = evolve_ct(&psi, &build_hamiltonian(&g, 1.0).unwrap(), 6.0).unwrap();
    for (a, b) in got.amplitudes().iter().zip(&want) {
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn two_site_rabi_transfer() {
    let g = make_line(2, Boundary::Open).unwrap();
    for gamma in [0.5, 1.0, 3.0] {
        let psi = ContinuousState::localized(&g, 0).unwrap();
        let out = evolve_ct(&psi, &build_hamiltonian(&g, gamma).unwrap(), PI / (2.0 * gamma)).unwrap();
        assert!((out.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn quantum_and_classical_laws_differ() {
    let (line, x0) = line_for_steps(100).unwrap();
    let psi = initial_state(&InitialCoinSpec::new(0.5, PI / 2.0, x0).unwrap(), &line).unwrap();
    let q = position_distribution(&evolve(&psi, &CoinOperator::hadamard(), &line, 100).unwrap());
    let tv = total_variation(&q, &classical_binomial(100)).unwrap();
    assert!(tv > 0.3, "tv {tv}");
}
