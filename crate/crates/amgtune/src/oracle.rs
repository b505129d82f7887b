//! Fitness oracle that spreads work-unit evaluations over a thread pool.

use std::collections::HashMap;

use amgtune_core::evaluator::{evaluate, FitnessOracle};
use amgtune_core::{
    EvalBudget, FitnessMode, FitnessResult, LinearSystem, NullClock, ParameterVector, SearchSpace,
};
use rayon::prelude::*;

use crate::clock::StdClock;

/// Cached oracle over one problem. In work-units mode uncached vectors of a
/// batch are solved concurrently on `jobs` threads and no clock is read, so
/// results are bit-identical for any job count. Wall-time mode solves one
/// vector at a time.
pub struct ParallelOracle<'a> {
    problem: &'a LinearSystem,
    space: &'a SearchSpace,
    budget: EvalBudget,
    clock: StdClock,
    pool: rayon::ThreadPool,
    cache: HashMap<ParameterVector, FitnessResult>,
    solves: usize,
}

impl<'a> ParallelOracle<'a> {
    pub fn new(problem: &'a LinearSystem, space: &'a SearchSpace, budget: EvalBudget, jobs: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .expect("thread pool");
        ParallelOracle {
            problem,
            space,
            budget,
            clock: StdClock::new(),
            pool,
            cache: HashMap::new(),
            solves: 0,
        }
    }

    pub fn budget(&self) -> &EvalBudget {
        &self.budget
    }

    pub fn cached(&self, v: &ParameterVector) -> Option<&FitnessResult> {
        self.cache.get(v)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }
}

impl FitnessOracle for ParallelOracle<'_> {
    fn evaluate_batch(&mut self, vectors: &[ParameterVector]) -> Vec<FitnessResult> {
        let mut todo: Vec<&ParameterVector> = Vec::new();
        for v in vectors {
            if !self.cache.contains_key(v) && !todo.contains(&v) {
                todo.push(v);
            }
        }
        let (problem, space, budget) = (self.problem, self.space, &self.budget);
        let fresh: Vec<FitnessResult> = match budget.mode {
            FitnessMode::WorkUnits => self.pool.install(|| {
                todo.par_iter()
                    .map(|v| evaluate(problem, space, v, budget, &NullClock))
                    .collect()
            }),
            FitnessMode::WallTime => todo
                .iter()
                .map(|v| evaluate(problem, space, v, budget, &self.clock))
                .collect(),
        };
        self.solves += fresh.len();
        for (v, r) in todo.into_iter().zip(fresh) {
            self.cache.insert(v.clone(), r);
        }
        vectors.iter().map(|v| self.cache[v].clone()).collect()
    }

    fn solves(&self) -> usize {
        self.solves
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use amgtune_core::evaluator::SolverOracle;
    use amgtune_core::space::{ParamValue, ParameterSpec};
    use amgtune_core::sparse::build_cube;
    use amgtune_core::{seeded_rng, SolverConfig};
    use std::collections::BTreeMap;

    #[test]
    fn matches_the_serial_oracle_for_any_job_count() {
        let problem = build_cube(8).unwrap();
        let specs = vec![
            ParameterSpec::ints("pre_cheby_order", 1, 4).unwrap(),
            ParameterSpec::list(
                "coarsening",
                vec![ParamValue::Symbol("classical_rs".into()), ParamValue::Symbol("pmis_like".into())],
            )
            .unwrap(),
        ];
        let space = SearchSpace::for_solver(specs, BTreeMap::new(), &SolverConfig::default()).unwrap();
        let mut rng = seeded_rng(3);
        let mut vectors: Vec<_> = (0..12).map(|_| space.random_vector(&mut rng)).collect();
        vectors.push(vectors[0].clone());
        let budget = EvalBudget::new(FitnessMode::WorkUnits);
        let serial = SolverOracle::new(&problem, &space, budget.clone(), &NullClock).evaluate_batch(&vectors);
        for jobs in [1, 3] {
            let mut o = ParallelOracle::new(&problem, &space, budget.clone(), jobs);
            assert_eq!(o.evaluate_batch(&vectors), serial);
            let distinct: std::collections::BTreeSet<_> = vectors.iter().collect();
            assert_eq!(o.solves(), distinct.len());
            o.evaluate_batch(&vectors);
            assert_eq!(o.solves(), distinct.len());
        }
    }
}
