//! Replica-level parallelism. Replica RNG streams are a pure function of
//! (seed, replica index) and results are collected in index order, so the
//! output is bitwise identical to the sequential runner regardless of the
//! thread count.

use anyhow::{Context, Result};
use ergodicity_core::simulator::{simulate_replica, ChainRunner, IncrementSampler, SimConfig, SimError};
use rayon::prelude::*;

pub struct ParallelRunner {
    pool: Option<rayon::ThreadPool>,
}

impl ParallelRunner {
    /// `threads = None` uses the global pool; `Some(n)` builds a dedicated
    /// pool of exactly `n` workers.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let pool = match threads {
            None => None,
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .context("cannot build worker pool")?,
            ),
        };
        Ok(Self { pool })
    }
}

impl ChainRunner for ParallelRunner {
    fn run(&self, sampler: &IncrementSampler, cfg: &SimConfig) -> Result<Vec<(f64, u64)>, SimError> {
        let work = || {
            (0..cfg.replicas)
                .into_par_iter()
                .map(|i| simulate_replica(sampler, cfg, i))
                .collect::<Result<Vec<_>, SimError>>()
        };
        match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergodicity_core::kernel::{Drift, KernelSpec, LevyTypeModel};
    use ergodicity_core::simulator::simulate_chain_with;

    #[test]
    fn parallel_endpoints_match_sequential_bitwise() {
        let model = LevyTypeModel::new(
            Drift::Power { strength: 1.0, exponent: 1.0 },
            KernelSpec::stable(1.0, 1.5),
        )
        .unwrap();
        let cfg = SimConfig {
            steps_per_unit: 50,
            horizon: 1.0,
            replicas: 64,
            eps: None,
            seed: 7,
            x0: 2.0,
        };
        let sequential =
            simulate_chain_with(&model, &cfg, &ergodicity_core::simulator::SequentialRunner)
                .unwrap();
        let two_threads =
            simulate_chain_with(&model, &cfg, &ParallelRunner::new(Some(2)).unwrap()).unwrap();
        let four_threads =
            simulate_chain_with(&model, &cfg, &ParallelRunner::new(Some(4)).unwrap()).unwrap();
        assert_eq!(sequential.endpoints, two_threads.endpoints);
        assert_eq!(sequential.endpoints, four_threads.endpoints);
    }
}
