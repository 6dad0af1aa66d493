//! Parallel path ensembles. Each path draws from its own stream
//! `derive_stream(master_seed, path_index)` and results are collected in
//! path order, so output does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{Field, GridSpec};
use crate::rng::{derive_stream, StreamId};
use crate::solver::{coupled_paths, simulate_with, ModelParams, SolverError, Stepper, Trajectory};

/// Map `f` over path indices `0..count` on a pool of `threads` workers
/// (0 = rayon default). The result is in index order.
pub fn run_parallel<T: Send>(count: usize, threads: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| (0..count as u64).into_par_iter().map(&f).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathOutcome {
    Complete(Trajectory),
    /// Path hit a non-finite value at `time`.
    Censored { stream: StreamId, time: f64 },
}

impl PathOutcome {
    pub fn trajectory(&self) -> Option<&Trajectory> {
        match self {
            PathOutcome::Complete(t) => Some(t),
            PathOutcome::Censored { .. } => None,
        }
    }
}

fn censor(result: Result<Trajectory, SolverError>) -> Result<PathOutcome, SolverError> {
    match result {
        Ok(t) => Ok(PathOutcome::Complete(t)),
        Err(SolverError::BlowUp { time, stream }) => Ok(PathOutcome::Censored { stream, time }),
        Err(e) => Err(e),
    }
}

/// Snapshot times for a schedule: 0 followed by the positive requested times.
fn snapshot_grid(dt: f64, snapshot_times: &[f64]) -> Vec<f64> {
    let mut times = vec![0.0];
    for &t in snapshot_times {
        let k = (t / dt).round();
        if k > 0.0 {
            times.push(k * dt);
        }
    }
    times
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub master_seed: u64,
    pub paths: Vec<PathOutcome>,
}

/// Parameters shared by every path of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub params: ModelParams,
    pub u0: Field,
    pub horizon: f64,
    pub dt: f64,
    pub snapshot_times: Vec<f64>,
    pub paths: usize,
    pub master_seed: u64,
    pub threads: usize,
}

impl Ensemble {
    pub fn run(spec: &EnsembleSpec) -> Result<Self, SolverError> {
        let stepper = Stepper::new(&spec.params, spec.dt)?;
        let outcomes = run_parallel(spec.paths, spec.threads, |i| {
            let mut rng = derive_stream(spec.master_seed, i);
            censor(simulate_with(&stepper, &spec.u0, spec.horizon, &spec.snapshot_times, &mut rng))
        });
        let paths = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            grid: *spec.params.grid(),
            times: snapshot_grid(spec.dt, &spec.snapshot_times),
            master_seed: spec.master_seed,
            paths,
        })
    }

    pub fn completed(&self) -> impl Iterator<Item = &Trajectory> {
        self.paths.iter().filter_map(PathOutcome::trajectory)
    }

    pub fn completed_count(&self) -> usize {
        self.completed().count()
    }

    pub fn censored_count(&self) -> usize {
        self.paths.len() - self.completed_count()
    }

    /// Index of the snapshot closest to `t`.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let (i, d) = self
            .times
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s - t).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        let tol = 1e-9 * t.abs().max(1.0);
        (d <= tol).then_some(i)
    }

    /// Field values of every completed path at snapshot index `ti`.
    pub fn slices(&self, ti: usize) -> Vec<&[f64]> {
        self.completed().map(|t| t.fields[ti].values.as_slice()).collect()
    }
}

/// Two ensembles whose paths share noise realizations pairwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledEnsemble {
    pub u: Ensemble,
    pub v: Ensemble,
}

impl CoupledEnsemble {
    #[allow(clippy::too_many_arguments)]
    pub fn run(
        params_u: &ModelParams,
        params_v: &ModelParams,
        u0: &Field,
        v0: &Field,
        horizon: f64,
        dt: f64,
        snapshot_times: &[f64],
        paths: usize,
        master_seed: u64,
        threads: usize,
    ) -> Result<Self, SolverError> {
        let outcomes = run_parallel(paths, threads, |i| {
            let mut rng = derive_stream(master_seed, i);
            match coupled_paths(params_u, params_v, u0, v0, horizon, dt, snapshot_times, &mut rng) {
                Ok((a, b)) => Ok((PathOutcome::Complete(a), PathOutcome::Complete(b))),
                Err(SolverError::BlowUp { time, stream }) => {
                    Ok((PathOutcome::Censored { stream, time }, PathOutcome::Censored { stream, time }))
                }
                Err(e) => Err(e),
            }
        });
        let pairs = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
        let times = snapshot_grid(dt, snapshot_times);
        let (pu, pv): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let grid = *params_u.grid();
        Ok(Self {
            u: Ensemble {
                grid,
                times: times.clone(),
                master_seed,
                paths: pu,
            },
            v: Ensemble {
                grid,
                times,
                master_seed,
                paths: pv,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelParams;
    use crate::noise::NoiseSpec;
    use crate::solver::SigmaSpec;

    fn spec(threads: usize) -> EnsembleSpec {
        let g = GridSpec::new(1, 16.0, 64).unwrap();
        let params = ModelParams::new(
            KernelParams::new(2.0, 1.0, 1).unwrap(),
            NoiseSpec::new(0.5, g, None).unwrap(),
            SigmaSpec::linear(1.0),
        )
        .unwrap();
        EnsembleSpec {
            params,
            u0: Field::constant(g, 1.0),
            horizon: 0.1,
            dt: 0.01,
            snapshot_times: vec![0.05, 0.1],
            paths: 12,
            master_seed: 42,
            threads,
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = Ensemble::run(&spec(1)).unwrap();
        let b = Ensemble::run(&spec(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times.len(), 3);
        assert_eq!(a.censored_count(), 0);
        assert_eq!(a.time_index(0.1), Some(2));
        assert_eq!(a.time_index(0.07), None);
    }

    #[test]
    fn ordered_collection() {
        let v = run_parallel(100, 4, |i| i * 2);
        assert_eq!(v, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }
}
