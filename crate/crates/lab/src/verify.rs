//! Verification suites. Each returns a [`Report`] listing every check with
//! what was observed and what was expected.

use std::fmt;

use anyhow::{ensure, Result};
use permuton_lab_core::coalescent::{check_active_site_lemma, check_commute};
use permuton_lab_core::gentree::{for_each_path, Rule};
use permuton_lab_core::limit_sim::{h_prime_closed, ks_distance, skew_bm_reference, Component, Z99};
use permuton_lab_core::walks::{check_measure, params, StepDistribution};
use permuton_lab_core::{seed, Family};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Diagram,
    Lemma,
    Measure,
    Ladder,
    Skewness,
    Tail,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub observed: String,
    pub expected: String,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, observed: impl Into<String>, expected: impl Into<String>, pass: bool) {
        self.checks.push(Check { name: name.into(), observed: observed.into(), expected: expected.into(), pass });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "  {tag} {}: observed {}; expected {}", c.name, c.observed, c.expected)?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Budgets for the stochastic suites.
#[derive(Clone, Debug)]
pub struct Budget {
    pub nmax: usize,
    pub n: usize,
    pub reps: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { nmax: 8, n: 10_000, reps: 10_000, samples: 100_000, seed: 1 }
    }
}

pub fn run(suite: Suite, family: Family, b: &Budget) -> Result<Report> {
    match suite {
        Suite::Diagram => diagram(family, b.nmax),
        Suite::Lemma => lemma(family, b.nmax),
        Suite::Measure => Ok(measure(family)),
        Suite::Ladder => Ok(ladder(family, b.samples, b.seed)),
        Suite::Skewness => skewness(family, b.n, b.reps, b.seed),
        Suite::Tail => Ok(tail(family, 2 * b.samples, b.seed)),
    }
}

fn exhaustive(family: Family, nmax: usize, what: &str, check: impl Fn(&[permuton_lab_core::gentree::Label]) -> bool) -> Result<Report> {
    ensure!(nmax <= 10, "--nmax above 10 is not supported for exhaustive suites");
    let mut walks = vec![0u64; nmax + 1];
    let mut bad = vec![0u64; nmax + 1];
    for_each_path(&Rule::from(family), nmax, |p| {
        walks[p.len()] += 1;
        if !check(p) {
            bad[p.len()] += 1;
        }
    });
    let mut r = Report::new(format!("{what} ({family}, n <= {nmax})"));
    for n in 1..=nmax {
        r.push(format!("n={n}"), format!("{} of {} walks fail", bad[n], walks[n]), "0 failures", bad[n] == 0);
    }
    Ok(r)
}

/// Bijection against coalescent process composition, every walk up to `nmax`.
pub fn diagram(family: Family, nmax: usize) -> Result<Report> {
    exhaustive(family, nmax, "commuting diagram", |p| check_commute(p, family).unwrap_or(false))
}

/// Final values and active sites agree for every walk up to `nmax`.
pub fn lemma(family: Family, nmax: usize) -> Result<Report> {
    exhaustive(family, nmax, "final values vs active sites", |p| check_active_site_lemma(p, family).unwrap_or(false))
}

pub fn measure(family: Family) -> Report {
    const TOL: f64 = 1e-10;
    let p = params(family);
    let mut r = Report::new(format!("step distribution ({family})"));
    for (label, d) in [("forward", StepDistribution::for_family(family)), ("reversed", StepDistribution::for_family(family).reversed())] {
        let m = check_measure(&d);
        let mut close = |name: &str, got: f64, want: f64| {
            r.push(format!("{label} {name}"), format!("{got:.12}"), format!("{want:.12} ± {TOL:e}"), (got - want).abs() < TOL);
        };
        close("mass", m.mass, 1.0);
        close("mean x", m.mean[0], 0.0);
        close("mean y", m.mean[1], 0.0);
        close("var x", m.cov[0][0], p.sigma2);
        close("var y", m.cov[1][1], p.sigma2_prime);
        close("cov", m.cov[0][1], p.cov);
        close("corr", m.corr, p.rho);
    }
    r
}

/// Upper tail p-value of a chi-square statistic.
pub fn chi_square_p(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
}

/// Geometric ladder heights of every coordinate; for semi also the linear
/// renewal function.
pub fn ladder(family: Family, samples: usize, seed: u64) -> Report {
    let mut r = Report::new(format!("ladder heights ({family}, {samples} samples per component)"));
    for (i, c) in Component::ALL.into_iter().enumerate() {
        let l = par::ladder(family, c, samples, seed::split(seed, i as u64));
        let (stat, dof) = l.chi_square(5.0);
        let p = chi_square_p(stat, dof);
        r.push(
            format!("{} law", c.name()),
            format!("chi2 = {stat:.2} on {dof} dof, p = {p:.4}, ratio {:.5}, {} redrawn", l.ratio, l.censored),
            "p > 0.01",
            p > 0.01,
        );
        let want = l.expected_mean();
        r.push(
            format!("{} mean", c.name()),
            format!("{:.5} ± {:.5}", l.mean(), Z99 * l.mean_std_err()),
            format!("{want:.5} ± 1%"),
            (l.mean() - want).abs() <= 0.01 * want,
        );
    }
    if family == Family::Semi {
        let h = par::renewal_function(samples, seed::split(seed, 99));
        for (x, tol) in [(-1, 0.01), (-2, 0.02), (-3, 0.02)] {
            let (_, est, se) = *h.estimates.iter().find(|e| e.0 == x).expect("tabulated point");
            let want = h_prime_closed(h.gamma, x);
            r.push(
                format!("renewal h'({x})"),
                format!("{est:.5} ± {:.5}", Z99 * se),
                format!("{want:.5} ± {tol}"),
                (est - want).abs() <= tol,
            );
        }
    }
    r
}

/// Share of positive rescaled trajectory values against `q`, and the
/// Kolmogorov–Smirnov distance to skew Brownian motion.
pub fn skewness(family: Family, n: usize, reps: usize, seed: u64) -> Result<Report> {
    let q = params(family).q;
    let est = par::skewness(family, n, reps, 1.0, seed)?;
    let reference = skew_bm_reference(q, 1.0, 10 * reps, seed::split(seed, u64::MAX))?;
    let ks = ks_distance(&est.samples, &reference);
    let mut r = Report::new(format!("skewness ({family}, n = {n}, {reps} replicates)"));
    r.push(
        "P(Z > 0)",
        format!("{:.4}, 99% CI [{:.4}, {:.4}]", est.p_hat, est.ci99.0, est.ci99.1),
        format!("{q:.4} ± 0.02"),
        (est.p_hat - q).abs() <= 0.02,
    );
    r.push("E[Z^2]", format!("{:.4}", est.second_moment()), "1 ± 0.1", (est.second_moment() - 1.0).abs() <= 0.1);
    r.push("KS distance", format!("{ks:.4} against {} reference draws", reference.len()), "< 0.03", ks < 0.03);
    Ok(r)
}

/// `k^{3/2} P(τ⁺ = k)` averaged over `k ∈ [200, 500]`.
pub fn tail(family: Family, samples: usize, seed: u64) -> Report {
    let beta = params(family).beta;
    let t = par::return_tail(family, 500, samples, seed);
    let (m, se) = t.mean_scaled(200, 500);
    let mut r = Report::new(format!("return time tail ({family}, {samples} trajectories)"));
    r.push("k^1.5 P(tau = k), k in [200, 500]", format!("{m:.4} ± {:.4}", Z99 * se), format!("{beta:.6} ± 0.08"), (m - beta).abs() <= 0.08);
    r
}
