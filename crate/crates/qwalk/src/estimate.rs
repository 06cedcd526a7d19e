//! Resource figures for a configured job, computed without running it.

use std::fmt;

use qwalk_core::analysis::{amplitude_capacity, memory_for_amplitudes, qubits_needed};
use qwalk_core::continuous::line_for_time;
use qwalk_core::WalkError;
use serde::Serialize;

use crate::config::{ExperimentConfig, NoiseMethod, OneOrMany, SubstrateKind, Walk, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    /// `steps-T` or `time-t`.
    pub point: String,
    /// Register width of a binary encoding of the job's state space.
    pub qubits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub vertices: u128,
    pub coin_dim: usize,
    pub walkers: usize,
    pub density: bool,
    /// Complex numbers held by one state (density entries for density jobs).
    pub amplitudes: u128,
    pub bytes_double: u128,
    pub bytes_single: u128,
    /// Amplitudes the double-precision footprint would hold at 4-byte floats.
    pub single_precision_capacity: u128,
    pub budget: u128,
    pub fits: bool,
    pub points: Vec<PointEstimate>,
}

/// Sizes the configured job. Invalid configurations are reported as
/// such; jobs over budget are estimated all the same.
pub fn estimate(config: &ExperimentConfig) -> Result<Estimate> {
    match config.plan() {
        Ok(_) | Err(Error::Walk(WalkError::Resource { .. })) => {}
        Err(e) => return Err(e),
    }
    let max_steps = match &config.steps {
        Some(s) => s.to_vec().into_iter().max().unwrap_or(0),
        None => 0,
    };
    let times = config.time.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
    let max_time = times.iter().copied().fold(0.0, f64::max);
    let sc = &config.substrate;
    let (vertices, ports) = match sc.kind {
        SubstrateKind::Line => {
            let n = match (sc.sites, config.walk) {
                (Some(n), _) => n as u128,
                (None, Walk::Discrete) => 2 * max_steps.max(1) as u128 + 1,
                (None, Walk::Continuous) => line_for_time(config.gamma.unwrap_or(1.0), max_time)?.0.n_vertices() as u128,
            };
            (n, 2)
        }
        SubstrateKind::Lattice => {
            let dims = sc.dims.clone().unwrap_or_default();
            let n = dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128)).unwrap_or(u128::MAX);
            (n, 2 * dims.len())
        }
        SubstrateKind::Adjacency => {
            let path = config.base_dir.join(sc.file.as_ref().expect("validated"));
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let g = crate::io::read_adjacency(std::io::BufReader::new(file))?;
            (g.n_vertices() as u128, g.coin_slots())
        }
    };
    let coin_dim = match config.walk {
        Walk::Discrete => config.coin.as_ref().and_then(|c| c.dim).unwrap_or(ports),
        Walk::Continuous => 1,
    };
    let walkers = config.multiwalker.as_ref().map_or(1, |m| m.walkers);
    let density = config.noise.as_ref().is_some_and(|n| n.method == NoiseMethod::Density);

    let per_walker = vertices.saturating_mul(coin_dim as u128);
    let amplitudes = if density {
        per_walker.saturating_mul(per_walker)
    } else {
        (0..walkers).fold(1u128, |acc, _| acc.saturating_mul(per_walker))
    };
    let bytes_double = memory_for_amplitudes(amplitudes, 8).unwrap_or(u128::MAX);
    let bytes_single = memory_for_amplitudes(amplitudes, 4).unwrap_or(u128::MAX);
    let budget = config.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET) as u128;

    let copies = if density { 2 } else { walkers as u32 };
    let general = copies * (ceil_log2(vertices) + ceil_log2(coin_dim as u128));
    let line_walk = sc.kind == SubstrateKind::Line && sc.sites.is_none() && walkers == 1 && !density;
    let points = match (config.walk, &config.steps) {
        (Walk::Discrete, Some(s)) => s
            .to_vec()
            .into_iter()
            .map(|t| PointEstimate {
                point: format!("steps-{t}"),
                qubits: if line_walk && t > 0 {
                    qubits_needed(t as u64).expect("positive")
                } else {
                    general
                },
            })
            .collect(),
        _ => times
            .iter()
            .map(|t| PointEstimate {
                point: format!("time-{t}"),
                qubits: general,
            })
            .collect(),
    };

    Ok(Estimate {
        vertices,
        coin_dim,
        walkers,
        density,
        amplitudes,
        bytes_double,
        bytes_single,
        single_precision_capacity: amplitude_capacity(bytes_double, 4)?,
        budget,
        fits: amplitudes <= budget,
        points,
    })
}

fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertices)?;
        writeln!(f, "coin_dim: {}", self.coin_dim)?;
        writeln!(f, "walkers: {}", self.walkers)?;
        let what = if self.density { "density_entries" } else { "amplitudes" };
        writeln!(f, "{what}: {}", self.amplitudes)?;
        writeln!(f, "bytes_at_8_byte_floats: {}", self.bytes_double)?;
        writeln!(f, "bytes_at_4_byte_floats: {}", self.bytes_single)?;
        writeln!(f, "amplitude_capacity_at_4_byte_floats: {}", self.single_precision_capacity)?;
        writeln!(f, "memory_budget: {}", self.budget)?;
        writeln!(f, "fits_budget: {}", self.fits)?;
        for p in &self.points {
            writeln!(f, "qubits_needed[{}]: {}", p.point, p.qubits)?;
        }
        Ok(())
    }
}
