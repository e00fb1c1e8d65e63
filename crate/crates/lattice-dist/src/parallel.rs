//! Multi-threaded drivers for searches and sweeps.
//!
//! Workers own their scratch state and produce partial results that are
//! merged with an order-independent reduction, so output never depends on
//! scheduling or on the number of threads.

use lattice_dist_core::epsilon::{epsilon_optimal_with, OptimalError};
use lattice_dist_core::lattice::{ClassTable, LatticeSpec};
use lattice_dist_core::search::{self, Mode, Partial, SearchResult, SearchTask};
use lattice_dist_core::Result;
use rayon::prelude::*;

/// Caps the number of worker threads when set to a positive integer.
pub const THREADS_ENV: &str = "LATTICE_DIST_THREADS";

/// Ranges handed out per worker thread, for load balancing.
const CHUNKS_PER_THREAD: u128 = 16;

pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

/// Splits `0..limit` into at most `pieces` contiguous nonempty ranges.
fn split(limit: u128, pieces: u128) -> Vec<std::ops::Range<u128>> {
    let pieces = pieces.clamp(1, limit.max(1));
    (0..pieces)
        .map(|i| limit * i / pieces..limit * (i + 1) / pieces)
        .filter(|r| !r.is_empty())
        .collect()
}

/// Same result as [`search::run`], computed on the worker pool.
pub fn search(task: &SearchTask) -> Result<SearchResult> {
    let table = ClassTable::new(task.spec);
    pool().install(|| match task.mode {
        Mode::Exhaustive => {
            let plan = search::plan(task)?;
            let pieces = rayon::current_num_threads() as u128 * CHUNKS_PER_THREAD;
            let parts: Vec<Partial> = split(plan.limit, pieces)
                .into_par_iter()
                .map(|range| search::search_ranks(task, &table, range))
                .collect::<Result<_>>()?;
            let merged = parts.into_iter().fold(Partial::default(), |acc, p| acc.merge(p, task.objective));
            search::finish(task, &table, merged, plan.complete())
        }
        Mode::RandomRestart { iterations, .. } => {
            let parts: Vec<Partial> = (0..iterations)
                .into_par_iter()
                .map(|i| search::random_restart(task, &table, i))
                .collect::<Result<_>>()?;
            let complete = parts.iter().all(|p| p.examined < task.budget);
            let merged = parts.into_iter().fold(Partial::default(), |acc, p| acc.merge(p, task.objective));
            search::finish(task, &table, merged, complete)
        }
    })
}

/// `epsilon_optimal` for every `p` in `ps`, in input order.
pub fn optimal_sweep(spec: LatticeSpec, ps: &[u64]) -> Result<Vec<OptimalError>> {
    let table = ClassTable::new(spec);
    pool().install(|| ps.par_iter().map(|&p| epsilon_optimal_with(&table, p)).collect())
}
