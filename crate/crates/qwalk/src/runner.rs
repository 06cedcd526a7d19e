//! Executes a validated experiment and writes its outputs.
//!
//! Every output of a job lands in one directory; a sweep writes one
//! sibling sub-directory per point (`steps-T`, `time-t`), each with its own
//! manifest. Files are written to a staging directory beside the target
//! and moved into place only when the whole job has succeeded.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qwalk_core::analysis::{classical_binomial, empirical, ipr, moments, sample, total_variation};
use qwalk_core::coined::{evolve, initial_state};
use qwalk_core::continuous::{boundary_probability, build_hamiltonian, evolve_ct};
use qwalk_core::decoherence::{evolve_density, DensityState};
use qwalk_core::ensemble::{run_substrate, summarize, EnsembleJob};
use qwalk_core::multiwalker::{multi_evolve_ct, multi_evolve_dt, MultiWalkerState};
use qwalk_core::seed::{derive_seed, SAMPLING_STREAM};
use qwalk_core::{
    ContinuousState, Distribution, EnsembleSummary, InitialCoinSpec, PositionLaw, Substrate, WalkState,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Plan, Point, Walk};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for ensembles; `None` uses every core.
    pub threads: Option<usize>,
    /// Replaces the configured master seed.
    pub seed: Option<u64>,
}

/// Figures computed for one point of a job; serialised as `metrics.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_run_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ipr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_run_ipr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_vs_classical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_tv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exchange_defect: Option<f64>,
    /// Probability on the faces of an open line or lattice after a
    /// continuous walk: how far the wave has reached the truncation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_probability: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PointReport {
    pub point: Point,
    pub dir: PathBuf,
    pub metrics: Metrics,
}

#[derive(Serialize)]
struct Seeds {
    master: u64,
    rule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampling: Option<u64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
    seeds: Seeds,
    files: Vec<String>,
    started_unix: u64,
    wall_clock_seconds: f64,
}

const SEED_RULE: &str = "run i of an ensemble uses derive_seed(master, i); a percolated run draws its substrate \
from derive_seed(run seed, PERCOLATION_STREAM) and its noise from derive_seed(run seed, noise seed); samples \
use derive_seed(master, SAMPLING_STREAM); derive_seed is the SplitMix64 finaliser of \
master ^ (stream + 1) * 0x9e3779b97f4a7c15 and every stream is a ChaCha8 generator";

/// Runs `config` and writes its outputs into `out`, which must not exist
/// or be an empty directory.
pub fn run(config: &ExperimentConfig, out: &Path, options: &RunOptions) -> Result<Vec<PointReport>> {
    let mut config = config.clone();
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    let plan = config.plan()?;
    let resolved = config.resolved(&plan);

    if out.exists() {
        let mut entries = fs::read_dir(out).map_err(|e| Error::io(out, e))?;
        if entries.next().is_some() {
            return Err(Error::io(
                out,
                std::io::Error::new(std::io::ErrorKind::AlreadyExists, "output directory is not empty"),
            ));
        }
    }
    let name = out
        .file_name()
        .ok_or_else(|| Error::Parse(format!("{}: not a directory name", out.display())))?;
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = parent.join(format!(".{}.staging-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_points(&plan, &resolved, &staging));

    match result {
        Ok(mut reports) => {
            if out.exists() {
                fs::remove_dir(out).map_err(|e| Error::io(out, e))?;
            }
            fs::rename(&staging, out).map_err(|e| Error::io(out, e))?;
            for r in &mut reports {
                let rel = r.dir.strip_prefix(&staging).expect("inside staging");
                r.dir = if rel.as_os_str().is_empty() {
                    out.to_path_buf()
                } else {
                    out.join(rel)
                };
            }
            Ok(reports)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn run_points(plan: &Plan, resolved: &ExperimentConfig, staging: &Path) -> Result<Vec<PointReport>> {
    let sweep = plan.points.len() > 1;
    plan.points
        .iter()
        .map(|&point| {
            let dir = if sweep {
                let d = staging.join(point.dir_name());
                fs::create_dir(&d).map_err(|e| Error::io(&d, e))?;
                d
            } else {
                staging.to_path_buf()
            };
            let started = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            let clock = Instant::now();
            let (metrics, files) = run_point(plan, point, &dir)?;
            let (steps, time) = match point {
                Point::Steps(t) => (Some(t), None),
                Point::Time(t) => (None, Some(t)),
            };
            let manifest = Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                config: resolved,
                steps,
                time,
                seeds: Seeds {
                    master: plan.seed,
                    rule: SEED_RULE,
                    noise: plan.noise.is_active().then_some(plan.noise.seed),
                    sampling: plan.outputs.samples.map(|_| sampling_seed(plan)),
                },
                files,
                started_unix: started,
                wall_clock_seconds: clock.elapsed().as_secs_f64(),
            };
            write_json(&dir.join("manifest.json"), &manifest)?;
            Ok(PointReport { point, dir, metrics })
        })
        .collect()
}

fn sampling_seed(plan: &Plan) -> u64 {
    derive_seed(plan.seed, SAMPLING_STREAM)
}

/// What one point produced before it is written out.
struct Outcome {
    distribution: Distribution,
    metrics: Metrics,
    multi: Option<MultiWalkerState>,
}

fn run_point(plan: &Plan, point: Point, dir: &Path) -> Result<(Metrics, Vec<String>)> {
    let Outcome {
        distribution,
        mut metrics,
        multi,
    } = match (&plan.multi, point) {
        (Some(_), _) => run_multi(plan, point)?,
        (None, Point::Steps(t)) => run_discrete(plan, t)?,
        (None, Point::Time(t)) => run_continuous(plan, t)?,
    };
    match point {
        Point::Steps(t) => metrics.steps = Some(t),
        Point::Time(t) => metrics.time = Some(t),
    }

    let mut files = vec!["metrics.json".to_string()];
    let outputs = &plan.outputs;
    if outputs.moments {
        if let Ok(m) = moments(&distribution) {
            metrics.mean = Some(m.mean);
            metrics.variance = Some(m.variance);
            metrics.sigma = Some(m.sigma);
        }
    } else {
        metrics.sigma_stderr = None;
        metrics.mean_run_sigma = None;
    }
    if outputs.ipr {
        metrics.ipr = Some(ipr(&distribution));
    } else {
        metrics.mean_run_ipr = None;
    }
    if outputs.tv_vs_classical {
        if let Point::Steps(t) = point {
            metrics.tv_vs_classical = Some(tv_by_position(&distribution, &classical_binomial(t)));
        }
    }
    if outputs.distribution {
        write_csv(&dir.join("distribution.csv"), |w| crate::io::write_distribution(w, &distribution))?;
        files.push("distribution.csv".into());
    }
    if let Some(state) = &multi {
        write_csv(&dir.join("marginals.csv"), |w| write_marginals(w, state))?;
        files.push("marginals.csv".into());
    }
    if let Some(n) = outputs.samples {
        let set = sample(&distribution, n, sampling_seed(plan))?;
        metrics.samples_tv = Some(total_variation(&empirical(&set, &distribution)?, &distribution)?);
        let mut sidecar = None;
        write_csv(&dir.join("samples.csv"), |w| {
            sidecar = Some(crate::io::write_samples(w, &set, &distribution)?);
            Ok(())
        })?;
        write_json(&dir.join("samples.json"), &sidecar)?;
        files.push("samples.csv".into());
        files.push("samples.json".into());
    }
    write_json(&dir.join("metrics.json"), &metrics)?;
    files.push("manifest.json".into());
    Ok((metrics, files))
}

fn discrete_initial(plan: &Plan, substrate: &Substrate, start: usize) -> Result<WalkState> {
    Ok(initial_state(&InitialCoinSpec::new(plan.b, plan.beta, start)?, substrate)?)
}

fn from_summary(s: EnsembleSummary) -> Outcome {
    Outcome {
        metrics: Metrics {
            runs: s.runs,
            sigma_stderr: s.sigma_stderr,
            mean_run_sigma: s.mean_run_sigma,
            mean_run_ipr: Some(s.mean_ipr),
            ..Metrics::default()
        },
        distribution: s.distribution,
        multi: None,
    }
}

fn run_discrete(plan: &Plan, steps: usize) -> Result<Outcome> {
    let coin = plan.coin.as_ref().expect("discrete plans carry a coin");
    let psi0 = discrete_initial(plan, &plan.substrate, plan.start)?;
    if plan.density {
        let rho0 = DensityState::from_pure(&psi0, plan.budget)?;
        let rho = evolve_density(&rho0, coin, &plan.substrate, &plan.noise, steps, plan.budget)?;
        return Ok(Outcome {
            distribution: rho.position_distribution(),
            metrics: Metrics {
                runs: 1,
                trace: Some(rho.trace().re),
                purity: Some(rho.purity()),
                ..Metrics::default()
            },
            multi: None,
        });
    }
    if plan.is_ensemble() {
        let job = EnsembleJob {
            base: &plan.substrate,
            percolation: plan.percolation,
            coin,
            initial: &psi0,
            noise: plan.noise,
            steps,
            runs: plan.runs,
            seed: plan.seed,
        };
        let outcomes = (0..plan.runs)
            .into_par_iter()
            .map(|i| job.run_single(i))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(from_summary(summarize(&outcomes)?));
    }
    let psi = evolve(&psi0, coin, &plan.substrate, steps)?;
    Ok(Outcome {
        distribution: psi.position_distribution(),
        metrics: Metrics {
            runs: 1,
            norm: Some(psi.norm_sqr()),
            ..Metrics::default()
        },
        multi: None,
    })
}

fn run_continuous(plan: &Plan, t: f64) -> Result<Outcome> {
    let single = |substrate: &Substrate| -> Result<ContinuousState> {
        let h = build_hamiltonian(substrate, plan.gamma)?;
        Ok(evolve_ct(&ContinuousState::localized(substrate, plan.start)?, &h, t)?)
    };
    if let Some((mode, p)) = plan.percolation {
        let outcomes = (0..plan.runs)
            .into_par_iter()
            .map(|i| {
                let g = run_substrate(&plan.substrate, mode, p, plan.seed, i);
                single(&g).map(|s| s.position_distribution())
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(from_summary(summarize(&outcomes)?));
    }
    let psi = single(&plan.substrate)?;
    Ok(Outcome {
        distribution: psi.position_distribution(),
        metrics: Metrics {
            runs: 1,
            norm: Some(psi.norm_sqr()),
            boundary_probability: boundary_probability(&psi, &plan.substrate),
            ..Metrics::default()
        },
        multi: None,
    })
}

fn run_multi(plan: &Plan, point: Point) -> Result<Outcome> {
    let m = plan.multi.as_ref().expect("multi plan");
    let g = &plan.substrate;
    let state = match (plan.walk, point) {
        (Walk::Discrete, Point::Steps(steps)) => {
            let walkers = m
                .starts
                .iter()
                .map(|&s| discrete_initial(plan, g, s))
                .collect::<Result<Vec<_>>>()?;
            let psi0 = MultiWalkerState::coined(&walkers, m.statistics, plan.budget)?;
            let coin = plan.coin.as_ref().expect("discrete plans carry a coin");
            multi_evolve_dt(&psi0, coin, g, &plan.interaction, steps, plan.budget)?
        }
        (Walk::Continuous, Point::Time(t)) => {
            let walkers = m
                .starts
                .iter()
                .map(|&s| ContinuousState::localized(g, s))
                .collect::<Result<Vec<_>, _>>()?;
            let psi0 = MultiWalkerState::continuous(&walkers, m.statistics, plan.budget)?;
            multi_evolve_ct(&psi0, g, plan.gamma, &plan.interaction, t, plan.budget)?
        }
        _ => unreachable!("points match the walk kind"),
    };
    Ok(Outcome {
        distribution: state.joint_distribution(),
        metrics: Metrics {
            runs: 1,
            norm: Some(state.norm_sqr()),
            exchange_defect: Some(state.exchange_defect()),
            ..Metrics::default()
        },
        multi: Some(state),
    })
}

/// Total variation between two line laws, matching entries by position
/// rather than by index.
fn tv_by_position(a: &Distribution, b: &Distribution) -> f64 {
    let range = |d: &Distribution| {
        let lo = d.labels().position(0).unwrap_or(0);
        (lo, lo + d.len() as i64 - 1)
    };
    let (a0, a1) = range(a);
    let (b0, b1) = range(b);
    let d: f64 = (a0.min(b0)..=a1.max(b1))
        .map(|x| (a.at(x).unwrap_or(0.0) - b.at(x).unwrap_or(0.0)).abs())
        .sum();
    (0.5 * d).min(1.0)
}

fn write_marginals(w: &mut BufWriter<fs::File>, state: &MultiWalkerState) -> std::io::Result<()> {
    let marginals: Vec<Distribution> = (0..state.walkers())
        .map(|i| state.marginal(i).expect("walker index in range"))
        .collect();
    let occupation = state.occupations();
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["label".to_string()];
    header.extend((0..state.walkers()).map(|i| format!("walker_{i}")));
    header.push("occupation".into());
    csv.write_record(&header)?;
    let labels = marginals[0].labels();
    for v in 0..state.sites() {
        let mut row = vec![labels.label(v)];
        row.extend(marginals.iter().map(|d| d.probabilities()[v].to_string()));
        row.push(occupation[v].to_string());
        csv.write_record(&row)?;
    }
    csv.flush()
}

fn write_csv(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| Error::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
