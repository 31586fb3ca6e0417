//! Fans seeded runs out over worker threads and collects them in job order.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use crate::metrics::RunMetrics;
use crate::preset::Point;
use crate::sim::run_scenario;

#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Index into the point list.
    pub point: usize,
    pub seed: u64,
    /// Metrics, or the error text if the run could not be carried out.
    pub outcome: Result<RunMetrics, String>,
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        matches!(&self.outcome, Ok(m) if m.is_complete())
    }
}

/// Every (point, seed) pair, points outermost.
pub fn jobs(points: &[Point]) -> Vec<(usize, u64)> {
    points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.scenario.seeds.iter().map(move |&s| (i, s)))
        .collect()
}

pub fn run_one(points: &[Point], point: usize, seed: u64) -> RunRecord {
    let start = Instant::now();
    let sc = &points[point].scenario;
    let outcome = match catch_unwind(AssertUnwindSafe(|| run_scenario(sc, seed))) {
        Ok(Ok(m)) => Ok(m),
        Ok(Err(e)) => Err(e.to_string()),
        Err(panic) => Err(match panic.downcast_ref::<&str>() {
            Some(s) => format!("panic: {s}"),
            None => match panic.downcast_ref::<String>() {
                Some(s) => format!("panic: {s}"),
                None => "panic".to_string(),
            },
        }),
    };
    RunRecord {
        point,
        seed,
        outcome,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

pub fn run_sequential(points: &[Point], progress: &(dyn Fn(&RunRecord) + Sync)) -> Vec<RunRecord> {
    jobs(points)
        .into_iter()
        .map(|(p, s)| {
            let r = run_one(points, p, s);
            progress(&r);
            r
        })
        .collect()
}

/// Runs on a dedicated pool of `workers` threads (0 picks the core count).
#[cfg(feature = "parallel")]
pub fn run_parallel(
    points: &[Point],
    workers: usize,
    progress: &(dyn Fn(&RunRecord) + Sync),
) -> Vec<RunRecord> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let jobs = jobs(points);
    pool.install(|| {
        jobs.par_iter()
            .map(|&(p, s)| {
                let r = run_one(points, p, s);
                progress(&r);
                r
            })
            .collect()
    })
}

/// Parallel when built with the `parallel` feature and `workers != 1`.
pub fn run_points(
    points: &[Point],
    workers: usize,
    progress: &(dyn Fn(&RunRecord) + Sync),
) -> Vec<RunRecord> {
    #[cfg(feature = "parallel")]
    if workers != 1 {
        return run_parallel(points, workers, progress);
    }
    let _ = workers;
    run_sequential(points, progress)
}
