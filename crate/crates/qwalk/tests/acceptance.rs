//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p qwalk --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use qwalk_core::analysis::{
    amplitude_capacity, classical_binomial, empirical, ipr, moments, qubits_needed, sample, total_variation,
};
use qwalk_core::coined::{evolve, initial_state, line_for_steps, Propagator};
use qwalk_core::continuous::{build_hamiltonian, evolve_ct};
use qwalk_core::decoherence::{evolve_density, DensityState, NoiseKind, NoiseModel};
use qwalk_core::ensemble::{summarize, EnsembleJob};
use qwalk_core::multiwalker::{dimension_guard, multi_evolve_ct, multi_evolve_dt, MultiWalkerState};
use qwalk_core::seed::derive_seed;
use qwalk_core::substrate::{from_adjacency, make_lattice, make_line, percolate, Boundary};
use qwalk_core::{
    CoinOperator, Complex64, ContinuousState, Distribution, InitialCoinSpec, InteractionSpec, PercolationMode,
    PercolationSpec, PositionLaw, Statistics, Substrate, WalkState,
};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn symmetric_start(line: &Substrate, x: usize) -> WalkState {
    initial_state(&InitialCoinSpec::new(0.5, FRAC_PI_2, x).unwrap(), line).unwrap()
}

fn clean_walk(steps: usize) -> Distribution {
    let (line, x) = line_for_steps(steps).unwrap();
    let h = CoinOperator::hadamard();
    evolve(&symmetric_start(&line, x), &h, &line, steps)
        .unwrap()
        .position_distribution()
}

fn sigma(d: &Distribution) -> f64 {
    moments(d).unwrap().sigma
}

/// Total variation between line laws, matched by position.
fn tv_by_position(a: &Distribution, b: &Distribution, reach: i64) -> f64 {
    0.5 * (-reach..=reach)
        .map(|x| (a.at(x).unwrap_or(0.0) - b.at(x).unwrap_or(0.0)).abs())
        .sum::<f64>()
}

// ---------------------------------------------------------------------------
// independent reference: cyclic Jacobi diagonalisation of real symmetric H

fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
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
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// `exp(-iHt) ψ0` through the eigenbasis of `h`.
fn spectral_propagate(h: &[Vec<f64>], psi0: &[Complex64], t: f64) -> Vec<Complex64> {
    let (lambda, v) = jacobi_eigen(h.to_vec());
    let n = h.len();
    let coeff: Vec<Complex64> = (0..n)
        .map(|k| {
            let proj: Complex64 = (0..n).map(|i| psi0[i] * v[i][k]).sum();
            proj * Complex64::from_polar(1.0, -lambda[k] * t)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|k| coeff[k] * v[i][k]).sum()).collect()
}

fn adjacency(g: &Substrate, gamma: f64) -> Vec<Vec<f64>> {
    let n = g.n_vertices();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = gamma;
        a[v][u] = gamma;
    }
    a
}

fn unit(u: u64) -> f64 {
    (u >> 11) as f64 / (1u64 << 53) as f64
}

fn random_graph(n: usize, p: f64, seed: u64) -> Substrate {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| unit(derive_seed(seed, (u * n + v) as u64)) < p)
        .collect();
    from_adjacency(&edges, n).unwrap()
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let line = make_line(201, Boundary::Open).unwrap();
    let psi = evolve(&symmetric_start(&line, 100), &CoinOperator::hadamard(), &line, 100).unwrap();
    let d = psi.position_distribution();
    let elapsed = clock.elapsed().as_secs_f64();
    let p = |x: i64| d.at(x).unwrap();
    let odd = (-99..=99).step_by(2).map(p).fold(0.0, f64::max);
    let asym = (0..=100).map(|x| (p(x) - p(-x)).abs()).fold(0.0, f64::max);
    // local maxima over the even sublattice
    let peaks: Vec<i64> = (-98..=98)
        .step_by(2)
        .filter(|&x| p(x) > p(x - 2) && p(x) > p(x + 2))
        .collect();
    let top = *peaks
        .iter()
        .max_by(|a, b| p(**a).total_cmp(&p(**b)))
        .ok_or("no local maximum")?;
    let x_star = top.abs();
    let mirrored = peaks.contains(&-top);
    check(
        odd <= 1e-12 && asym <= 1e-10 && mirrored && (60..=80).contains(&x_star) && elapsed < 1.0,
        format!(
            "max odd-site p = {odd:.1e}, max asymmetry = {asym:.1e}, peaks at ±{x_star} (mirrored: {mirrored}), {elapsed:.3} s"
        ),
    )
}

fn criterion_2() -> Outcome {
    let q = sigma(&clean_walk(100)) / sigma(&clean_walk(50));
    let c100 = sigma(&classical_binomial(100));
    let c = c100 / sigma(&classical_binomial(50));
    let over = sigma(&clean_walk(100)) / c100;
    check(
        (q - 2.0).abs() <= 0.05 && (c - 2f64.sqrt()).abs() <= 1e-12 && over > 3.0,
        format!("σ_q(100)/σ_q(50) = {q:.4}, σ_c(100)/σ_c(50) = {c:.15}, σ_q(100)/σ_c(100) = {over:.3}"),
    )
}

fn criterion_3() -> Outcome {
    let q = qubits_needed(1_000_000).map_err(|e| e.to_string())?;
    let a = amplitude_capacity(1 << 30, 4).map_err(|e| e.to_string())?;
    check(q == 22 && a == 1 << 27, format!("qubits_needed(10^6) = {q}, amplitude_capacity(2^30, 4) = {a}"))
}

fn criterion_4() -> Outcome {
    let dimer = make_line(2, Boundary::Open).unwrap();
    let gamma = 0.7;
    let h = build_hamiltonian(&dimer, gamma).unwrap();
    let out = evolve_ct(&ContinuousState::localized(&dimer, 0).unwrap(), &h, PI / (2.0 * gamma)).unwrap();
    let transfer = out.vertex_probabilities()[1];

    let mut graphs: Vec<Substrate> = Vec::new();
    for n in 1..=64 {
        graphs.push(random_graph(n, 0.15 + 0.5 * unit(derive_seed(77, n as u64)), 1000 + n as u64));
    }
    for n in [2, 5, 17, 64] {
        graphs.push(make_line(n, Boundary::Open).unwrap());
    }
    for n in [3, 8, 31, 64] {
        graphs.push(make_line(n, Boundary::Periodic).unwrap());
    }
    graphs.push(make_lattice(&[8, 8], Boundary::Open).unwrap());
    graphs.push(make_lattice(&[4, 4, 4], Boundary::Periodic).unwrap());
    graphs.push(percolate(
        &make_lattice(&[6, 9], Boundary::Open).unwrap(),
        &PercolationSpec::new(PercolationMode::Bond, 0.6, 5).unwrap(),
    ));
    let complete: Vec<(usize, usize)> = (0..16).flat_map(|u| (u + 1..16).map(move |v| (u, v))).collect();
    graphs.push(from_adjacency(&complete, 16).unwrap());
    let star: Vec<(usize, usize)> = (1..40).map(|v| (0, v)).collect();
    graphs.push(from_adjacency(&star, 40).unwrap());

    let mut worst: f64 = 0.0;
    for (k, g) in graphs.iter().enumerate() {
        let gamma = 0.5 + unit(derive_seed(3, k as u64));
        let h = build_hamiltonian(g, gamma).unwrap();
        let dense = adjacency(g, gamma);
        let start = derive_seed(4, k as u64) as usize % g.n_vertices();
        let psi0 = ContinuousState::localized(g, start).unwrap();
        for t in [0.3, 1.7, 5.0] {
            let got = evolve_ct(&psi0, &h, t).map_err(|e| e.to_string())?;
            let want = spectral_propagate(&dense, psi0.amplitudes(), t);
            for (a, b) in got.amplitudes().iter().zip(&want) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    check(
        (transfer - 1.0).abs() <= 1e-8 && worst <= 1e-8,
        format!(
            "dimer transfer = {transfer:.12}, worst amplitude error {worst:.1e} over {} graphs × 3 times",
            graphs.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let h = CoinOperator::hadamard();
    let full = NoiseModel::new(NoiseKind::CoinMeasure, 1.0, 0).unwrap();

    let (line, x) = line_for_steps(20).unwrap();
    let rho0 = DensityState::from_pure(&symmetric_start(&line, x), 1 << 26).unwrap();
    let rho = evolve_density(&rho0, &h, &line, &full, 20, 1 << 26).map_err(|e| e.to_string())?;
    let tv = tv_by_position(&rho.position_distribution(), &classical_binomial(20), 20);

    let (line, x) = line_for_steps(100).unwrap();
    let psi0 = symmetric_start(&line, x);
    let job = EnsembleJob {
        base: &line,
        percolation: None,
        coin: &h,
        initial: &psi0,
        noise: full,
        steps: 100,
        runs: 10_000,
        seed: 2024,
    };
    let runs: Vec<Distribution> = (0..job.runs)
        .into_par_iter()
        .map(|i| job.run_single(i).unwrap())
        .collect();
    let s = summarize(&runs).unwrap().sigma.unwrap();
    check(
        tv < 1e-8 && (s / 10.0 - 1.0).abs() <= 0.05,
        format!("density TV to binomial(20) = {tv:.1e}; trajectory σ(100) over 10^4 runs = {s:.4}"),
    )
}

fn criterion_6() -> Outcome {
    let h = CoinOperator::hadamard();
    let (line, x) = line_for_steps(200).unwrap();
    let psi0 = symmetric_start(&line, x);
    let noise = NoiseModel::new(NoiseKind::StaticPhase, PI, 1).unwrap();
    let ensemble = |steps: usize| {
        let job = EnsembleJob {
            base: &line,
            percolation: None,
            coin: &h,
            initial: &psi0,
            noise,
            steps,
            runs: 100,
            seed: 606,
        };
        let runs: Vec<Distribution> = (0..job.runs)
            .into_par_iter()
            .map(|i| job.run_single(i).unwrap())
            .collect();
        summarize(&runs).unwrap()
    };
    let (s100, s200) = (ensemble(100), ensemble(200));
    let ratio = s200.sigma.unwrap() / s100.sigma.unwrap();
    let clean = evolve(&psi0, &h, &line, 200).unwrap().position_distribution();
    let clean_ipr = ipr(&clean);
    check(
        ratio < 1.2 && s200.mean_ipr > clean_ipr,
        format!(
            "σ(200)/σ(100) = {ratio:.3} (clean walk: {:.3}); mean IPR(200) = {:.4} vs clean {clean_ipr:.4}",
            sigma(&clean) / sigma(&evolve(&psi0, &h, &line, 100).unwrap().position_distribution()),
            s200.mean_ipr
        ),
    )
}

fn criterion_7() -> Outcome {
    let clock = Instant::now();
    let h = CoinOperator::hadamard();
    let (line, x) = line_for_steps(1000).unwrap();
    let psi0 = symmetric_start(&line, x);
    let clean = evolve(&psi0, &h, &line, 1000).unwrap().position_distribution();
    let mut sigmas = Vec::new();
    let mut exact = false;
    for p in [1.0, 0.9, 0.7] {
        let job = EnsembleJob {
            base: &line,
            percolation: Some((PercolationMode::Bond, p)),
            coin: &h,
            initial: &psi0,
            noise: NoiseModel::none(),
            steps: 1000,
            runs: 100,
            seed: 4300,
        };
        let runs: Vec<Distribution> = (0..job.runs)
            .into_par_iter()
            .map(|i| job.run_single(i).unwrap())
            .collect();
        if p == 1.0 {
            exact = runs.iter().all(|r| *r == clean);
        }
        let s = summarize(&runs).unwrap();
        sigmas.push(s.mean_run_sigma.unwrap());
        if p == 1.0 {
            exact &= s.distribution == clean;
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    check(
        sigmas[0] > sigmas[1] && sigmas[1] > sigmas[2] && exact && elapsed < 600.0,
        format!(
            "mean σ at p = 1, 0.9, 0.7: {:.2}, {:.2}, {:.2}; p = 1 equals clean walk: {exact}; {elapsed:.1} s",
            sigmas[0], sigmas[1], sigmas[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    const BUDGET: u128 = 1 << 30;
    let h = CoinOperator::hadamard();

    // m = 1 reduction, coined and continuous
    let line = make_line(41, Boundary::Open).unwrap();
    let single = initial_state(&InitialCoinSpec::new(0.3, 0.8, 20).unwrap(), &line).unwrap();
    let one = MultiWalkerState::coined(std::slice::from_ref(&single), Statistics::Distinguishable, BUDGET).unwrap();
    let out = multi_evolve_dt(&one, &h, &line, &InteractionSpec::None, 15, BUDGET).unwrap();
    let want = evolve(&single, &h, &line, 15).unwrap();
    let mut reduction = out
        .amplitudes()
        .iter()
        .zip(want.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let c0 = ContinuousState::localized(&line, 20).unwrap();
    let one = MultiWalkerState::continuous(std::slice::from_ref(&c0), Statistics::Distinguishable, BUDGET).unwrap();
    let out = multi_evolve_ct(&one, &line, 1.0, &InteractionSpec::None, 4.0, BUDGET).unwrap();
    let want = evolve_ct(&c0, &build_hamiltonian(&line, 1.0).unwrap(), 4.0).unwrap();
    for (a, b) in out.amplitudes().iter().zip(want.amplitudes()) {
        reduction = reduction.max((a - b).norm());
    }

    // two free distinguishable walkers factorise
    let g = make_lattice(&[4, 4], Boundary::Open).unwrap();
    let grover = CoinOperator::grover(4).unwrap();
    let a = initial_state(&InitialCoinSpec::new(0.5, 0.0, 5).unwrap(), &g).unwrap();
    let b = initial_state(&InitialCoinSpec::new(0.2, 1.0, 10).unwrap(), &g).unwrap();
    let pair = MultiWalkerState::coined(&[a.clone(), b.clone()], Statistics::Distinguishable, BUDGET).unwrap();
    let joint = multi_evolve_dt(&pair, &grover, &g, &InteractionSpec::None, 6, BUDGET)
        .unwrap()
        .joint_distribution();
    let pa = evolve(&a, &grover, &g, 6).unwrap().vertex_probabilities();
    let pb = evolve(&b, &grover, &g, 6).unwrap().vertex_probabilities();
    let n = g.n_vertices();
    let factor = (0..n * n)
        .map(|i| (joint.probabilities()[i] - pa[i / n] * pb[i % n]).abs())
        .fold(0.0, f64::max);

    // Hubbard dimer against the three-level problem on |2,0>, |1,1>, |0,2>
    let (gamma, u, t) = (0.8, 1.9, 2.3);
    let r = 2f64.sqrt() * gamma;
    let h3 = vec![vec![u, r, 0.0], vec![r, 0.0, r], vec![0.0, r, u]];
    let c = spectral_propagate(&h3, &[Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()], t);
    let dimer = make_line(2, Boundary::Open).unwrap();
    let left = ContinuousState::localized(&dimer, 0).unwrap();
    let s = MultiWalkerState::continuous(&[left.clone(), left], Statistics::Boson, BUDGET).unwrap();
    let out = multi_evolve_ct(&s, &dimer, gamma, &InteractionSpec::Hubbard { u }, t, BUDGET).unwrap();
    let p = out.joint_distribution();
    let pj = p.probabilities();
    let hubbard = [
        (pj[0] - c[0].norm_sqr()).abs(),
        (pj[1] + pj[2] - c[1].norm_sqr()).abs(),
        (pj[3] - c[2].norm_sqr()).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let budget = 1u128 << 40;
    let accepts = dimension_guard(10, 12, 1, budget).is_ok();
    let rejects = dimension_guard(10, 13, 1, budget).is_err();
    check(
        reduction <= 1e-12 && factor <= 1e-10 && hubbard <= 1e-8 && accepts && rejects,
        format!(
            "m=1 deviation {reduction:.1e}, factorisation {factor:.1e}, Hubbard dimer {hubbard:.1e}, \
             guard accepts (10, 12): {accepts}, rejects (10, 13): {rejects}"
        ),
    )
}

/// Every file under `dir` with manifest timestamps blanked.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&p).unwrap();
            if name == "manifest.json" {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v["started_unix"] = 0.into();
                v["wall_clock_seconds"] = 0.into();
                bytes = serde_json::to_vec(&v).unwrap();
            }
            (name, bytes)
        })
        .collect();
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let strong = clean_walk(100);
    let draw = sample(&strong, 100_000, 99).unwrap();
    let tv = total_variation(&empirical(&draw, &strong).unwrap(), &strong).unwrap();
    let repeat = sample(&strong, 100_000, 99).unwrap() == draw;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("weak.toml");
    fs::write(
        &config,
        "walk = \"discrete\"\nsteps = 100\nseed = 99\nruns = 8\n\
         outputs = [\"distribution\", \"moments\", \"ipr\", \"samples(100000)\"]\n\
         [substrate]\nkind = \"line\"\n[coin]\nname = \"hadamard\"\n\
         [initial]\nb = 0.5\nbeta = 1.5707963267948966\n\
         [noise]\nkind = \"fast_phase\"\nstrength = 0.5\nseed = 3\n",
    )
    .unwrap();
    let mut snapshots = Vec::new();
    for (name, threads) in [("first", "1"), ("second", "3")] {
        let out = tmp.path().join(name);
        let run = Command::new(env!("CARGO_BIN_EXE_qwalk"))
            .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        if !run.status.success() {
            return Err(format!(
                "qwalk run exited with {}: {}",
                run.status,
                String::from_utf8_lossy(&run.stderr)
            ));
        }
        snapshots.push(snapshot(&out));
    }
    let identical = snapshots[0] == snapshots[1];
    let files = snapshots[0].len();
    check(
        tv < 0.02 && repeat && identical && files == 5,
        format!(
            "empirical TV of 10^5 samples = {tv:.4}; resampling identical: {repeat}; \
             two CLI runs byte-identical over {files} files: {identical}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // unitarity: columns of the one-step operator stay orthonormal
    let substrates = [
        make_line(9, Boundary::Open).unwrap(),
        make_line(7, Boundary::Periodic).unwrap(),
        make_lattice(&[3, 4], Boundary::Periodic).unwrap(),
        make_lattice(&[3, 3], Boundary::Open).unwrap(),
        random_graph(12, 0.35, 8),
    ];
    let mut unitarity: f64 = 0.0;
    for g in &substrates {
        let coin = match g.coin_slots() {
            2 => CoinOperator::hadamard(),
            d => CoinOperator::dft(d).unwrap(),
        };
        let prop = Propagator::new(&coin, g).unwrap();
        let dim = g.coin_slots() * g.n_vertices();
        let cols: Vec<Vec<Complex64>> = (0..dim)
            .map(|k| {
                let mut v = vec![Complex64::default(); dim];
                v[k] = Complex64::new(1.0, 0.0);
                let mut scratch = vec![Complex64::default(); dim];
                prop.apply(&mut v, &mut scratch);
                v
            })
            .collect();
        for i in 0..dim {
            for j in 0..dim {
                let dot: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                unitarity = unitarity.max((dot - want).norm());
            }
        }
    }
    ok &= unitarity <= 1e-12;
    notes.push(format!("unitarity {unitarity:.1e}"));

    // norm after 1000 steps
    let (line, x) = line_for_steps(1000).unwrap();
    let norm = evolve(&symmetric_start(&line, x), &CoinOperator::hadamard(), &line, 1000)
        .unwrap()
        .norm_sqr();
    ok &= (norm - 1.0).abs() <= 1e-10;
    notes.push(format!("norm drift {:.1e}", (norm - 1.0).abs()));

    // trace, Hermiticity and positivity under each Markovian channel
    let (line, x) = line_for_steps(12).unwrap();
    let rho0 = DensityState::from_pure(&symmetric_start(&line, x), 1 << 26).unwrap();
    let (mut trace, mut herm, mut positive) = (0.0f64, 0.0f64, true);
    for (kind, strength) in [
        (NoiseKind::CoinMeasure, 0.4),
        (NoiseKind::PositionMeasure, 0.7),
        (NoiseKind::FastPhase, 2.0),
    ] {
        let noise = NoiseModel::new(kind, strength, 0).unwrap();
        let mut rho = rho0.clone();
        for _ in 0..12 {
            rho = evolve_density(&rho, &CoinOperator::hadamard(), &line, &noise, 1, 1 << 26).unwrap();
            trace = trace.max((rho.trace() - 1.0).norm());
            herm = herm.max(rho.hermiticity_defect());
            positive &= rho.is_positive_within(1e-10);
        }
    }
    ok &= trace <= 1e-12 && herm <= 1e-12 && positive;
    notes.push(format!("trace {trace:.1e}, Hermiticity {herm:.1e}, positive {positive}"));

    // exchange symmetry survives interacting evolution
    let g = make_lattice(&[3, 3], Boundary::Open).unwrap();
    let mut exchange: f64 = 0.0;
    for stats in [Statistics::Boson, Statistics::Fermion] {
        let walkers: Vec<ContinuousState> = [0, 4, 8].iter().map(|&s| ContinuousState::localized(&g, s).unwrap()).collect();
        let s = MultiWalkerState::continuous(&walkers, stats, 1 << 20).unwrap();
        let out = multi_evolve_ct(&s, &g, 1.0, &InteractionSpec::Hubbard { u: 1.5 }, 3.0, 1 << 20).unwrap();
        exchange = exchange.max(out.exchange_defect());
        let line = make_line(6, Boundary::Open).unwrap();
        let walkers: Vec<WalkState> = [1, 4]
            .iter()
            .map(|&s| initial_state(&InitialCoinSpec::new(0.5, 0.3, s).unwrap(), &line).unwrap())
            .collect();
        let s = MultiWalkerState::coined(&walkers, stats, 1 << 20).unwrap();
        let phase = InteractionSpec::CollisionPhase { phi: 1.1 };
        let out = multi_evolve_dt(&s, &CoinOperator::hadamard(), &line, &phase, 9, 1 << 20).unwrap();
        exchange = exchange.max(out.exchange_defect());
    }
    ok &= exchange <= 1e-10;
    notes.push(format!("exchange defect {exchange:.1e}"));

    // support bound: nothing beyond distance T from the start
    let line = make_line(301, Boundary::Open).unwrap();
    let mut leak: f64 = 0.0;
    let mut psi = symmetric_start(&line, 150);
    for t in 1..=100usize {
        psi = evolve(&psi, &CoinOperator::hadamard(), &line, 1).unwrap();
        let d = psi.position_distribution();
        leak += (-150..=150i64)
            .filter(|x| x.unsigned_abs() as usize > t)
            .map(|x| d.at(x).unwrap())
            .sum::<f64>();
    }
    ok &= leak == 0.0;
    notes.push(format!("support leak {leak:e}"));

    check(ok, notes.join(", "))
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("symmetric Hadamard walk at T=100", criterion_1),
        ("ballistic vs diffusive spreading", criterion_2),
        ("resource arithmetic", criterion_3),
        ("continuous-walk oracle", criterion_4),
        ("classical limit", criterion_5),
        ("static-disorder localization", criterion_6),
        ("percolation study", criterion_7),
        ("multiple walkers", criterion_8),
        ("weak simulation and determinism", criterion_9),
        ("invariant suite", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
