//! Multi-threaded drivers for the Monte Carlo estimators.
//!
//! Each replicate draws from its own seed, so collecting replicates in index
//! order and folding them with the sequential constructors gives the same
//! numbers as the single-threaded versions in the core crate.

use anyhow::Result;
use permuton_lab_core::limit_sim::{
    ladder_draw, renewal_replicate, renewal_times, return_time, skewness_replicate, Component, LadderCheck,
    RenewalCheck, RenewalMass, ReturnTail, Simulator, SkewnessEstimate,
};
use permuton_lab_core::permuton::{
    convergence_from_averages, pattern_density_replicate, permuton_of, replicate_seed, ClassSampler, DiagnosticRow,
    EmpiricalPermuton, Estimate, PATTERN_DRAWS,
};
use permuton_lab_core::{seed, Family, Permutation};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "PERMUTON_LAB_THREADS";

/// Thread count from `PERMUTON_LAB_THREADS`, or rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Runs `f` inside a pool sized by [`thread_count`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count() {
        b = b.num_threads(t);
    }
    Ok(b.build()?.install(f))
}

fn indices(n: usize) -> rayon::range::Iter<u64> {
    (0..n as u64).into_par_iter()
}

pub fn skewness(family: Family, n: usize, reps: usize, t: f64, seed: u64) -> Result<SkewnessEstimate> {
    anyhow::ensure!(reps >= 100, "at least 100 replicates are needed");
    let sim = Simulator::new(family);
    let samples = indices(reps).map(|r| skewness_replicate(&sim, n, t, seed::split(seed, r))).collect();
    Ok(SkewnessEstimate::from_samples(t, samples))
}

pub fn ladder(family: Family, c: Component, samples: usize, seed: u64) -> LadderCheck {
    let sim = Simulator::new(family);
    let draws: Vec<_> = indices(samples).map(|r| ladder_draw(&sim, c, &mut seed::stream(seed, r))).collect();
    LadderCheck::from_draws(&sim, c, draws)
}

pub fn renewal_function(samples: usize, seed: u64) -> RenewalCheck {
    let sim = Simulator::new(Family::Semi);
    let counts: Vec<_> = indices(samples).map(|r| renewal_replicate(&sim, seed::split(seed, r))).collect();
    RenewalCheck::from_counts(sim.params.gamma, counts)
}

pub fn return_tail(family: Family, k_max: usize, samples: usize, seed: u64) -> ReturnTail {
    let sim = Simulator::new(family);
    let times: Vec<_> = indices(samples).map(|r| return_time(&sim, k_max, &mut seed::stream(seed, r))).collect();
    ReturnTail::from_times(family, k_max, times)
}

pub fn renewal_mass(family: Family, k_max: usize, samples: usize, seed: u64) -> RenewalMass {
    let sim = Simulator::new(family);
    let runs: Vec<_> = indices(samples).map(|r| renewal_times(&sim, k_max, &mut seed::stream(seed, r))).collect();
    RenewalMass::from_runs(family, k_max, runs)
}

pub fn averaged_permuton(family: Family, n: usize, reps: usize, k: usize, seed: u64) -> Result<EmpiricalPermuton> {
    let sampler = ClassSampler::new(family, n)?;
    let items = indices(reps)
        .map(|r| permuton_of(&sampler.sample(&mut seed::rng(replicate_seed(seed, n, r))), k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmpiricalPermuton::average(&items)?)
}

pub fn averaged_permutons(family: Family, sizes: &[usize], reps: usize, k: usize, seed: u64) -> Result<Vec<EmpiricalPermuton>> {
    sizes.iter().map(|&n| averaged_permuton(family, n, reps, k, seed)).collect()
}

pub fn convergence(family: Family, sizes: &[usize], reps: usize, k: usize, seed: u64) -> Result<Vec<DiagnosticRow>> {
    let averages = averaged_permutons(family, sizes, reps, k, seed)?;
    Ok(convergence_from_averages(sizes, &averages)?)
}

pub fn pattern_density(family: Family, pi: &Permutation, n: usize, reps: usize, seed: u64) -> Result<Estimate> {
    anyhow::ensure!(reps > 0, "at least one replicate is needed");
    anyhow::ensure!(pi.len() <= n, "pattern longer than the permutations");
    let sampler = ClassSampler::new(family, n)?;
    let values = indices(reps)
        .map(|r| pattern_density_replicate(&sampler, pi, PATTERN_DRAWS, seed::split(seed, r)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Estimate::from_values(&values))
}
