//! Monte Carlo estimators on unconditioned walks: rescaled coalescent
//! trajectories, the skewness of their limit, ladder heights, renewal
//! functions and return-time tails.
//!
//! Every driver comes in two layers. A `*_replicate` function runs one
//! replicate from its own seed; the driver calls it for `split(seed, r)`,
//! `r = 0..reps`, and folds the results with an order-independent
//! reduction. Callers that want threads can map the replicate function in
//! parallel and fold with the same `from_*` constructor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coalescent::update;
use crate::float::{powi, sqrt};
use crate::perm::Family;
use crate::seed;
use crate::walks::{params, Params, Step, StepDistribution};
use crate::{Error, Result};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Steps a single ladder epoch may take before it is discarded and drawn
/// again. The overshoot below zero does not depend on how long the walk
/// waited, so discarding long epochs leaves the law of `S_τ` unchanged.
pub const LADDER_STEP_CAP: u64 = 100_000;

/// A family's step law together with its scaling constants.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub family: Family,
    pub params: Params,
    pub dist: StepDistribution,
}

impl Simulator {
    pub fn new(family: Family) -> Self {
        let params = params(family);
        let dist = StepDistribution::new(family, &params);
        Simulator { family, params, dist }
    }

    pub fn step<R: Rng + ?Sized>(&self, rng: &mut R) -> Step {
        self.dist.sample(rng)
    }

    /// `z / (σ′√n)` for `z ≥ 0` and `z / (σ√n)` otherwise.
    pub fn rescale_z(&self, z: i64, n: usize) -> f64 {
        let s = if z >= 0 { self.params.sigma_prime() } else { self.params.sigma() };
        z as f64 / (s * sqrt(n as f64))
    }

    /// Runs one trajectory from 0 for `steps` steps and returns its end value.
    pub fn trajectory_end<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> i64 {
        let mut z = 0;
        for _ in 0..steps {
            z = update(self.family, z, self.step(rng));
        }
        z
    }
}

// ---------------------------------------------------------------------------
// Rescaled paths

/// Values at the nodes `k/n`, `k = 0..=n`, linearly interpolated between.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledPath {
    n: usize,
    nodes: Vec<f64>,
}

impl RescaledPath {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Invalid("a rescaled path needs at least two nodes".into()));
        }
        Ok(RescaledPath { n: nodes.len() - 1, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Value at time `t`, clamped to `[0, 1]`.
    pub fn at(&self, t: f64) -> f64 {
        let x = t.clamp(0.0, 1.0) * self.n as f64;
        let k = (x as usize).min(self.n - 1);
        let frac = x - k as f64;
        self.nodes[k] + frac * (self.nodes[k + 1] - self.nodes[k])
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.n]
    }
}

/// Rescaled walk coordinates and one rescaled coalescent trajectory.
#[derive(Clone, Debug)]
pub struct UnconditionedRun {
    /// `X(k) / (σ√n)`.
    pub x: RescaledPath,
    /// `Y(k) / (σ′√n)`.
    pub y: RescaledPath,
    /// The trajectory started at `⌈nu⌉`, zero before that.
    pub z: RescaledPath,
    pub start: usize,
    pub raw_z: Vec<i64>,
}

pub fn run_unconditioned(n: usize, family: Family, u: f64, seed: u64) -> Result<UnconditionedRun> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Invalid("u must lie in [0, 1)".into()));
    }
    if n == 0 {
        return Err(Error::EmptySize);
    }
    let sim = Simulator::new(family);
    let mut rng = seed::rng(seed);
    let start = libm::ceil(n as f64 * u) as usize;
    let (sx, sy) = (sim.params.sigma() * sqrt(n as f64), sim.params.sigma_prime() * sqrt(n as f64));
    let mut x = vec![0.0; n + 1];
    let mut y = vec![0.0; n + 1];
    let mut raw_z = vec![0i64; n + 1];
    let (mut cx, mut cy, mut z) = (0i64, 0i64, 0i64);
    for k in 1..=n {
        let s = sim.step(&mut rng);
        cx += s.0;
        cy += s.1;
        x[k] = cx as f64 / sx;
        y[k] = cy as f64 / sy;
        if k > start {
            z = update(family, z, s);
        }
        raw_z[k] = z;
    }
    let zs = raw_z.iter().map(|&v| sim.rescale_z(v, n)).collect();
    Ok(UnconditionedRun {
        x: RescaledPath::new(x)?,
        y: RescaledPath::new(y)?,
        z: RescaledPath::new(zs)?,
        start,
        raw_z,
    })
}

// ---------------------------------------------------------------------------
// Skewness

/// `Z̄_n(t)` for the trajectory started at time 0, read at node `⌊nt⌋`.
pub fn skewness_replicate(sim: &Simulator, n: usize, t: f64, seed: u64) -> f64 {
    let mut rng = seed::rng(seed);
    let steps = libm::floor(n as f64 * t) as usize;
    sim.rescale_z(sim.trajectory_end(steps, &mut rng), n)
}

/// Fraction of replicates with `Z̄(t) > 0` and a normal 99% interval.
#[derive(Clone, Debug)]
pub struct SkewnessEstimate {
    pub t: f64,
    pub reps: usize,
    pub positive: usize,
    pub p_hat: f64,
    pub ci99: (f64, f64),
    pub samples: Vec<f64>,
}

impl SkewnessEstimate {
    pub fn from_samples(t: f64, samples: Vec<f64>) -> Self {
        let reps = samples.len();
        let positive = samples.iter().filter(|&&v| v > 0.0).count();
        let p_hat = if reps == 0 { 0.0 } else { positive as f64 / reps as f64 };
        let half = if reps == 0 { 0.0 } else { Z99 * sqrt(p_hat * (1.0 - p_hat) / reps as f64) };
        SkewnessEstimate { t, reps, positive, p_hat, ci99: (p_hat - half, p_hat + half), samples }
    }

    /// Mean of `Z̄(t)²`.
    pub fn second_moment(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.reps.max(1) as f64
    }
}

pub fn empirical_skewness(n: usize, family: Family, reps: usize, t: f64, seed: u64) -> Result<SkewnessEstimate> {
    if reps < 100 {
        return Err(Error::Invalid("at least 100 replicates are needed".into()));
    }
    let sim = Simulator::new(family);
    let samples = (0..reps as u64).map(|r| skewness_replicate(&sim, n, t, seed::split(seed, r))).collect();
    Ok(SkewnessEstimate::from_samples(t, samples))
}

/// Draws from the time-`t` marginal of a skew Brownian motion of parameter
/// `q` started at 0: `|N(0,t)|`, made negative with probability `1 − q`.
pub fn skew_bm_reference(q: f64, t: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Invalid("q must lie in (0, 1)".into()));
    }
    let mut rng = seed::rng(seed);
    let sd = sqrt(t);
    Ok((0..samples)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            let a = libm::fabs(g) * sd;
            if rng.gen::<f64>() < q { a } else { -a }
        })
        .collect())
}

/// Counts of `samples` in `bins` equal cells of `[lo, hi)`, with one extra
/// cell on each side for the tails.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut out = vec![0u64; bins + 2];
    let w = (hi - lo) / bins as f64;
    for &v in samples {
        let idx = if v < lo {
            0
        } else if v >= hi {
            bins + 1
        } else {
            1 + ((v - lo) / w) as usize
        };
        out[idx.min(bins + 1)] += 1;
    }
    out
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / n - j as f64 / m));
    }
    d
}

/// Large-sample critical value of [`ks_distance`] at level 1%.
pub fn ks_critical_99(n: usize, m: usize) -> f64 {
    1.627_608 * sqrt((n + m) as f64 / (n as f64 * m as f64))
}

// ---------------------------------------------------------------------------
// Ladder heights

/// A one-dimensional projection of the step law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    X,
    NegX,
    Y,
    NegY,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::X, Component::NegX, Component::Y, Component::NegY];

    pub fn project(self, (dx, dy): Step) -> i64 {
        match self {
            Component::X => dx,
            Component::NegX => -dx,
            Component::Y => dy,
            Component::NegY => -dy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::X => "X",
            Component::NegX => "-X",
            Component::Y => "Y",
            Component::NegY => "-Y",
        }
    }
}

/// Ratio `r` of the negative tail `P(ξ = −i) ∝ r^i` of a component; 0 when
/// the only negative step is −1.
pub fn component_ratio(p: &Params, c: Component) -> f64 {
    match (p.family, c) {
        (Family::Strong, Component::X) => p.gamma,
        (Family::Strong, Component::Y) => p.theta.expect("strong parameters carry theta"),
        (Family::Strong, _) => 0.0,
        (Family::Semi, Component::NegY) => 0.0,
        (Family::Semi, _) => p.gamma,
    }
}

/// Law of the first entry below zero when the negative steps are geometric
/// with ratio `r`: `P(S_τ = −x) = (1−r) r^{x−1}`.
pub fn ladder_law(r: f64, x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        (1.0 - r) * powi(r, x as i32 - 1)
    }
}

/// `S_τ` for the first `τ` with `S_τ < 0`, plus the number of epochs that
/// hit [`LADDER_STEP_CAP`] and were drawn again.
pub fn ladder_draw<R: Rng + ?Sized>(sim: &Simulator, c: Component, rng: &mut R) -> (i64, u64) {
    let mut censored = 0;
    loop {
        let mut s = 0i64;
        for _ in 0..LADDER_STEP_CAP {
            s += c.project(sim.step(rng));
            if s < 0 {
                return (s, censored);
            }
        }
        censored += 1;
    }
}

/// Histogram of `−S_τ`: `counts[x]` is the number of draws with `S_τ = −x`.
#[derive(Clone, Debug)]
pub struct LadderCheck {
    pub family: Family,
    pub component: Component,
    pub ratio: f64,
    pub samples: usize,
    pub counts: Vec<u64>,
    pub censored: u64,
}

impl LadderCheck {
    pub fn from_draws(sim: &Simulator, c: Component, draws: impl IntoIterator<Item = (i64, u64)>) -> Self {
        let mut counts = vec![0u64; 2];
        let (mut samples, mut censored) = (0, 0);
        for (s, cens) in draws {
            let x = (-s) as usize;
            if x >= counts.len() {
                counts.resize(x + 1, 0);
            }
            counts[x] += 1;
            samples += 1;
            censored += cens;
        }
        LadderCheck {
            family: sim.family,
            component: c,
            ratio: component_ratio(&sim.params, c),
            samples,
            counts,
            censored,
        }
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.counts.iter().enumerate().map(|(x, &c)| x as f64 * c as f64).sum();
        s / self.samples as f64
    }

    /// Standard error of [`Self::mean`].
    pub fn mean_std_err(&self) -> f64 {
        let m = self.mean();
        let v: f64 = self.counts.iter().enumerate().map(|(x, &c)| (x as f64 - m) * (x as f64 - m) * c as f64).sum();
        sqrt(v / (self.samples as f64 * (self.samples as f64 - 1.0)))
    }

    pub fn expected_mean(&self) -> f64 {
        1.0 / (1.0 - self.ratio)
    }

    pub fn frequency(&self, x: u64) -> f64 {
        self.counts.get(x as usize).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// Pearson statistic against [`ladder_law`], pooling the tail from the
    /// first cell whose expected count drops below `min_expected`. Returns
    /// the statistic and its degrees of freedom.
    pub fn chi_square(&self, min_expected: f64) -> (f64, usize) {
        let n = self.samples as f64;
        let mut stat = 0.0;
        let mut cells = 0usize;
        let mut x = 1u64;
        let mut mass_left = 1.0;
        loop {
            let p = ladder_law(self.ratio, x);
            if p * n < min_expected || mass_left - p <= 0.0 {
                break;
            }
            let obs = self.counts.get(x as usize).copied().unwrap_or(0) as f64;
            stat += (obs - p * n) * (obs - p * n) / (p * n);
            mass_left -= p;
            cells += 1;
            x += 1;
        }
        let tail_obs: f64 = self.counts.iter().skip(x as usize).map(|&c| c as f64).sum();
        if mass_left * n > 1e-9 {
            stat += (tail_obs - mass_left * n) * (tail_obs - mass_left * n) / (mass_left * n);
            cells += 1;
        }
        (stat, cells.saturating_sub(1))
    }
}

pub fn ladder_height_check(family: Family, component: Component, samples: usize, seed: u64) -> LadderCheck {
    let sim = Simulator::new(family);
    let draws = (0..samples as u64).map(|r| ladder_draw(&sim, component, &mut seed::stream(seed, r)));
    LadderCheck::from_draws(&sim, component, draws)
}

// ---------------------------------------------------------------------------
// Renewal function

/// The points `x = −1, …, −8` at which the renewal function is estimated.
pub const RENEWAL_POINTS: [i64; 8] = [-1, -2, -3, -4, -5, -6, -7, -8];

/// `h′(x) = γ + (γ−1)x` for `x < 0` and 0 otherwise.
pub fn h_prime_closed(gamma: f64, x: i64) -> f64 {
    if x >= 0 {
        0.0
    } else {
        gamma + (gamma - 1.0) * x as f64
    }
}

/// Number of partial sums of ladder heights of `−X` (semi family) that stay
/// strictly below `m`, for `m = 1..=8`.
pub fn renewal_replicate(sim: &Simulator, seed: u64) -> [u32; 8] {
    let mut rng = seed::rng(seed);
    let mut out = [0u32; 8];
    let mut total = 0i64;
    loop {
        let (s, _) = ladder_draw(sim, Component::X, &mut rng);
        total += -s;
        if total >= 8 {
            return out;
        }
        for (m, slot) in out.iter_mut().enumerate() {
            if total < m as i64 + 1 {
                *slot += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenewalCheck {
    pub gamma: f64,
    pub samples: usize,
    /// `(x, estimate, standard error)`.
    pub estimates: Vec<(i64, f64, f64)>,
}

impl RenewalCheck {
    pub fn from_counts(gamma: f64, counts: impl IntoIterator<Item = [u32; 8]>) -> Self {
        let mut sum = [0.0f64; 8];
        let mut sq = [0.0f64; 8];
        let mut samples = 0usize;
        for c in counts {
            for m in 0..8 {
                sum[m] += c[m] as f64;
                sq[m] += (c[m] as f64) * (c[m] as f64);
            }
            samples += 1;
        }
        let n = samples as f64;
        let estimates = (0..8)
            .map(|m| {
                let mean = sum[m] / n;
                let var = (sq[m] / n - mean * mean).max(0.0);
                (-(m as i64) - 1, 1.0 + mean, sqrt(var / n))
            })
            .collect();
        RenewalCheck { gamma, samples, estimates }
    }

    pub fn estimate(&self, x: i64) -> f64 {
        if x >= 0 {
            return 0.0;
        }
        self.estimates.iter().find(|e| e.0 == x).map_or(f64::NAN, |e| e.1)
    }
}

pub fn renewal_function_check(samples: usize, seed: u64) -> RenewalCheck {
    let sim = Simulator::new(Family::Semi);
    let gamma = sim.params.gamma;
    RenewalCheck::from_counts(gamma, (0..samples as u64).map(|r| renewal_replicate(&sim, seed::split(seed, r))))
}

// ---------------------------------------------------------------------------
// Return times

/// Start value and renewal event of a family's trajectory: strong returns to
/// 0; semi jumps to 1 from a negative value, starting from 1.
fn renewal_start(family: Family) -> i64 {
    match family {
        Family::Strong => 0,
        Family::Semi => 1,
    }
}

fn is_renewal(family: Family, prev: i64, z: i64) -> bool {
    match family {
        Family::Strong => z == 0,
        Family::Semi => prev < 0 && z == 1,
    }
}

/// First renewal time `τ⁺ ≥ 1`, if it is at most `k_max`.
pub fn return_time<R: Rng + ?Sized>(sim: &Simulator, k_max: usize, rng: &mut R) -> Option<usize> {
    let mut z = renewal_start(sim.family);
    for k in 1..=k_max {
        let next = update(sim.family, z, sim.step(rng));
        if is_renewal(sim.family, z, next) {
            return Some(k);
        }
        z = next;
    }
    None
}

/// Histogram of first renewal times: `counts[k]` draws had `τ⁺ = k`.
#[derive(Clone, Debug)]
pub struct ReturnTail {
    pub family: Family,
    pub k_max: usize,
    pub samples: usize,
    pub counts: Vec<u64>,
}

impl ReturnTail {
    pub fn from_times(family: Family, k_max: usize, times: impl IntoIterator<Item = Option<usize>>) -> Self {
        let mut counts = vec![0u64; k_max + 1];
        let mut samples = 0;
        for t in times {
            if let Some(k) = t {
                counts[k] += 1;
            }
            samples += 1;
        }
        ReturnTail { family, k_max, samples, counts }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.counts[k] as f64 / self.samples as f64
    }

    /// `k^{3/2} P̂(τ⁺ = k)`.
    pub fn scaled(&self, k: usize) -> f64 {
        let kf = k as f64;
        kf * sqrt(kf) * self.prob(k)
    }

    /// Average of [`Self::scaled`] over `lo..=hi` and its standard error.
    pub fn mean_scaled(&self, lo: usize, hi: usize) -> (f64, f64) {
        let width = (hi - lo + 1) as f64;
        let n = self.samples as f64;
        let mut mean = 0.0;
        let mut var = 0.0;
        for k in lo..=hi {
            let a = powi(k as f64, 3);
            mean += self.scaled(k);
            var += a * self.prob(k);
        }
        mean /= width;
        let var = (var - (mean * width) * (mean * width)) / n;
        (mean, sqrt(var.max(0.0)) / width)
    }
}

pub fn return_time_tail(family: Family, k_max: usize, samples: usize, seed: u64) -> ReturnTail {
    let sim = Simulator::new(family);
    ReturnTail::from_times(family, k_max, (0..samples as u64).map(|r| return_time(&sim, k_max, &mut seed::stream(seed, r))))
}

/// Renewal indicators `1{renewal at time k}` for `k = 1..=k_max` along one
/// trajectory.
pub fn renewal_times<R: Rng + ?Sized>(sim: &Simulator, k_max: usize, rng: &mut R) -> Vec<usize> {
    let mut z = renewal_start(sim.family);
    let mut out = Vec::new();
    for k in 1..=k_max {
        let next = update(sim.family, z, sim.step(rng));
        if is_renewal(sim.family, z, next) {
            out.push(k);
        }
        z = next;
    }
    out
}

/// Monte Carlo of the renewal mass `u(k) = Σ_ℓ P(τ⁺_ℓ = k)`.
#[derive(Clone, Debug)]
pub struct RenewalMass {
    pub family: Family,
    pub k_max: usize,
    pub samples: usize,
    pub hits: Vec<u64>,
}

impl RenewalMass {
    pub fn from_runs(family: Family, k_max: usize, runs: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut hits = vec![0u64; k_max + 1];
        let mut samples = 0;
        for run in runs {
            for k in run {
                hits[k] += 1;
            }
            samples += 1;
        }
        RenewalMass { family, k_max, samples, hits }
    }

    pub fn u(&self, k: usize) -> f64 {
        self.hits[k] as f64 / self.samples as f64
    }

    /// Average of `2π√k u(k)` over `lo..=hi`.
    pub fn mean_scaled(&self, lo: usize, hi: usize) -> f64 {
        let s: f64 = (lo..=hi).map(|k| 2.0 * PI * sqrt(k as f64) * self.u(k)).sum();
        s / (hi - lo + 1) as f64
    }
}

pub fn renewal_mass(family: Family, k_max: usize, samples: usize, seed: u64) -> RenewalMass {
    let sim = Simulator::new(family);
    RenewalMass::from_runs(family, k_max, (0..samples as u64).map(|r| renewal_times(&sim, k_max, &mut seed::stream(seed, r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_interpolates() {
        let p = RescaledPath::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.at(0.25), 0.5);
        assert_eq!(p.at(0.75), 2.0);
        assert_eq!(p.at(1.0), 3.0);
        assert_eq!(p.end(), 3.0);
    }

    #[test]
    fn trajectory_is_zero_before_start() {
        for f in Family::ALL {
            let run = run_unconditioned(200, f, 0.4, 3).unwrap();
            assert_eq!(run.start, 80);
            assert!(run.z.nodes()[..=80].iter().all(|&v| v == 0.0));
            assert!(run.z.at(0.3) == 0.0);
        }
        assert!(run_unconditioned(10, Family::Strong, 1.0, 0).is_err());
    }

    #[test]
    fn skewness_at_time_zero_is_zero() {
        let e = empirical_skewness(100, Family::Strong, 100, 0.0, 1).unwrap();
        assert_eq!(e.p_hat, 0.0);
        assert!(empirical_skewness(100, Family::Strong, 99, 1.0, 1).is_err());
    }

    #[test]
    fn reference_sign_balance() {
        let s = skew_bm_reference(0.5, 1.0, 20_000, 9).unwrap();
        let pos = s.iter().filter(|&&v| v > 0.0).count() as f64 / s.len() as f64;
        assert!((pos - 0.5).abs() < 0.015);
        let m2 = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        assert!((m2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn ks_of_identical_samples_is_zero() {
        let a = [0.1, 0.5, 0.2, 0.9];
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&[0.0, 0.1], &[1.0, 2.0]), 1.0);
    }

    #[test]
    fn histogram_tails() {
        let h = histogram(&[-5.0, 0.1, 0.6, 9.0], 0.0, 1.0, 2);
        assert_eq!(h, vec![1, 1, 1, 1]);
    }

    #[test]
    fn closed_renewal_function() {
        let g = 0.6;
        assert!((h_prime_closed(g, -1) - 1.0).abs() < 1e-15);
        assert_eq!(h_prime_closed(g, 0), 0.0);
        assert_eq!(h_prime_closed(g, 4), 0.0);
    }

    #[test]
    fn strong_return_can_be_immediate() {
        // A (−i,0) step leaves a trajectory at 0 unchanged.
        let sim = Simulator::new(Family::Strong);
        let t = return_time_tail(Family::Strong, 5, 2000, 4);
        assert!(t.prob(1) > 0.0);
        let p1 = sim.dist.atom_families()[0].coef * sim.params.gamma / (1.0 - sim.params.gamma);
        assert!((t.prob(1) - p1).abs() < 0.03);
    }
}
