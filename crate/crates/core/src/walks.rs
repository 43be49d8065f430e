//! Step distributions, their parameters, and the reversed-walk rejection
//! sampler for uniform walks in the quadrant.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::float::{exp, floor, ln, powi, sqrt};
use crate::gentree::{labels_at_level, Label, Rule};
use crate::perm::Family;
use crate::{Error, Result};

pub type Step = (i64, i64);
/// A lattice walk as its list of points.
pub type Walk2D = Vec<(i64, i64)>;

/// Atoms `base + i·dir` for `i ≥ start`, with weight `coef · ratio^i`.
/// A family with `ratio == 0` and `start == 0` is a single atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomFamily {
    pub base: Step,
    pub dir: Step,
    pub start: u32,
    pub coef: f64,
    pub ratio: f64,
}

impl AtomFamily {
    fn single(at: Step, weight: f64) -> Self {
        AtomFamily { base: at, dir: (0, 0), start: 0, coef: weight, ratio: 0.0 }
    }

    fn point(&self, i: u32) -> Step {
        (self.base.0 + i as i64 * self.dir.0, self.base.1 + i as i64 * self.dir.1)
    }

    fn weight(&self, i: u32) -> f64 {
        if i < self.start {
            0.0
        } else if self.ratio == 0.0 {
            if i == 0 { self.coef } else { 0.0 }
        } else {
            self.coef * powi(self.ratio, i as i32)
        }
    }

    /// `Σ_{i≥start} i^p r^i` for `p = 0, 1, 2`.
    fn power_sums(&self) -> [f64; 3] {
        let (r, s) = (self.ratio, self.start as f64);
        let rs = if self.start == 0 { 1.0 } else { powi(r, self.start as i32) };
        let a = 1.0 - r;
        [
            rs / a,
            rs * (r / (a * a) + s / a),
            rs * (r * (1.0 + r) / (a * a * a) + 2.0 * s * r / (a * a) + s * s / a),
        ]
    }

    fn mass(&self) -> f64 {
        self.coef * self.power_sums()[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepDistribution {
    family: Family,
    atoms: Vec<AtomFamily>,
    reversed: bool,
    cumulative: Vec<f64>,
}

/// Mass, mean and covariance of a step distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    pub corr: f64,
}

impl StepDistribution {
    pub fn new(family: Family, params: &Params) -> Self {
        let (a, g) = (params.alpha, params.gamma);
        let atoms = match family {
            Family::Strong => {
                let t = params.theta.expect("strong parameters carry theta");
                alloc::vec![
                    AtomFamily { base: (0, 0), dir: (-1, 0), start: 1, coef: a, ratio: g },
                    AtomFamily::single((0, 1), a / t),
                    AtomFamily { base: (1, 0), dir: (0, -1), start: 0, coef: a / g, ratio: t },
                ]
            }
            Family::Semi => alloc::vec![
                AtomFamily { base: (0, 1), dir: (-1, 0), start: 0, coef: a, ratio: g },
                AtomFamily { base: (0, 1), dir: (1, -1), start: 1, coef: a, ratio: g },
            ],
        };
        Self::from_atoms(family, atoms, false)
    }

    pub fn for_family(family: Family) -> Self {
        Self::new(family, &params(family))
    }

    fn from_atoms(family: Family, atoms: Vec<AtomFamily>, reversed: bool) -> Self {
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|f| {
                acc += f.mass();
                acc
            })
            .collect();
        StepDistribution { family, atoms, reversed, cumulative }
    }

    /// The law of `−ξ`.
    pub fn reversed(&self) -> Self {
        Self::from_atoms(self.family, self.atoms.clone(), !self.reversed)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn atom_families(&self) -> &[AtomFamily] {
        &self.atoms
    }

    fn orient(&self, s: Step) -> Step {
        if self.reversed { (-s.0, -s.1) } else { s }
    }

    /// Probability of the increment `s`.
    pub fn prob(&self, s: Step) -> f64 {
        let s = self.orient(s);
        let mut p = 0.0;
        for f in &self.atoms {
            // Solve base + i·dir = s for a non-negative integer i.
            let (rx, ry) = (s.0 - f.base.0, s.1 - f.base.1);
            let i = match f.dir {
                (0, 0) => (rx == 0 && ry == 0).then_some(0),
                (dx, dy) => {
                    let i = if dx != 0 { rx / dx } else { ry / dy };
                    (i >= 0 && i * dx == rx && i * dy == ry).then_some(i)
                }
            };
            if let Some(i) = i {
                p += f.weight(i as u32);
            }
        }
        p
    }

    /// Atoms with index below `max_index` in each family, for brute-force checks.
    pub fn truncated_atoms(&self, max_index: u32) -> Vec<(Step, f64)> {
        let mut out = Vec::new();
        for f in &self.atoms {
            let top = if f.ratio == 0.0 { 1 } else { max_index };
            for i in f.start..top.max(f.start + 1) {
                out.push((self.orient(f.point(i)), f.weight(i)));
            }
        }
        out
    }

    /// Closed-form moments from geometric series.
    pub fn moments(&self) -> Moments {
        let mut mass = 0.0;
        let mut m1 = [0.0; 2];
        let mut m2 = [[0.0; 2]; 2];
        for f in &self.atoms {
            let [s0, s1, s2] = f.power_sums();
            let c = f.coef;
            let b = [f.base.0 as f64, f.base.1 as f64];
            let d = [f.dir.0 as f64, f.dir.1 as f64];
            mass += c * s0;
            for u in 0..2 {
                m1[u] += c * (b[u] * s0 + d[u] * s1);
                for v in 0..2 {
                    m2[u][v] += c * (b[u] * b[v] * s0 + (b[u] * d[v] + d[u] * b[v]) * s1 + d[u] * d[v] * s2);
                }
            }
        }
        if self.reversed {
            m1 = [-m1[0], -m1[1]];
        }
        let mut cov = [[0.0; 2]; 2];
        for u in 0..2 {
            for v in 0..2 {
                cov[u][v] = m2[u][v] / mass - (m1[u] / mass) * (m1[v] / mass);
            }
        }
        Moments {
            mass,
            mean: [m1[0] / mass, m1[1] / mass],
            corr: cov[0][1] / sqrt(cov[0][0] * cov[1][1]),
            cov,
        }
    }

    /// Exact draw: pick the atom family by its mass, then the index by
    /// inverting the geometric distribution function.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Step {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        let which = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.atoms.len() - 1);
        let f = &self.atoms[which];
        let extra = if f.ratio == 0.0 {
            0
        } else {
            let v = 1.0 - rng.gen::<f64>();
            floor(ln(v) / ln(f.ratio)) as u32
        };
        self.orient(f.point(f.start + extra))
    }
}

/// See [`StepDistribution::moments`].
pub fn check_measure(d: &StepDistribution) -> Moments {
    d.moments()
}

// ---------------------------------------------------------------------------
// Parameters

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub family: Family,
    pub alpha: f64,
    pub gamma: f64,
    pub theta: Option<f64>,
    /// Variance of the first coordinate.
    pub sigma2: f64,
    /// Variance of the second coordinate.
    pub sigma2_prime: f64,
    pub cov: f64,
    pub rho: f64,
    pub q: f64,
    /// Tail constant of the return time of a coalescent trajectory.
    pub beta: f64,
    pub residuals: Vec<(&'static str, f64)>,
}

impl Params {
    pub fn sigma(&self) -> f64 {
        sqrt(self.sigma2)
    }

    pub fn sigma_prime(&self) -> f64 {
        sqrt(self.sigma2_prime)
    }
}

pub fn params(family: Family) -> Params {
    match family {
        Family::Strong => solve_params_strong(),
        Family::Semi => params_semi(),
    }
}

fn bisect(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    debug_assert!(flo * f(hi) < 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    x - f(x) / df(x)
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn dpoly(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &a)| acc * x + i as f64 * a)
}

/// Coefficients (constant term first) of the polynomials whose roots give
/// γ, ρ and q for the strong family.
pub const GAMMA_POLY: [f64; 4] = [-1.0, 2.0, -1.0, 1.0];
pub const RHO_POLY: [f64; 4] = [1.0, 6.0, 8.0, 8.0];
pub const Q_POLY: [f64; 4] = [-1.0, 6.0, -11.0, 7.0];

pub fn solve_params_strong() -> Params {
    let g = bisect(|x| poly(&GAMMA_POLY, x), |x| dpoly(&GAMMA_POLY, x), 0.0, 1.0);
    let (g2, g3, g4) = (g * g, g * g * g, g * g * g * g);
    let t = -7.0 + 18.0 * g - 14.0 * g2 + 11.0 * g3 - 3.0 * g4;
    let a = 36.0 / 11.0 - 83.0 / 11.0 * g + 61.0 / 11.0 * g2 - 4.0 * g3 + 12.0 / 11.0 * g4;

    let sigma2 = a * (1.0 / (g * (1.0 - t)) + g * (1.0 + g) / powi(1.0 - g, 3));
    let sigma2_prime = a * (1.0 / t + t * (1.0 + t) / (g * powi(1.0 - t, 3)));
    let cov = -a * t / (g * (1.0 - t) * (1.0 - t));
    let rho = cov / sqrt(sigma2 * sigma2_prime);
    let q = bisect(|x| poly(&Q_POLY, x), |x| dpoly(&Q_POLY, x), 0.0, 1.0);
    let (s, sp) = (sqrt(sigma2), sqrt(sigma2_prime));
    let beta = (1.0 / sqrt(2.0 * PI))
        * ((1.0 / sp) * (a / t) / (1.0 - t) + (1.0 / s) * (a / t + (a / g) / (1.0 - t)) / (1.0 - g));

    let residuals = alloc::vec![
        ("mass", a - 1.0 / (1.0 / t + g / (1.0 - g) + 1.0 / (g * (1.0 - t)))),
        ("mean_x", 1.0 / (g * (1.0 - t)) - g / ((1.0 - g) * (1.0 - g))),
        ("mean_y", 1.0 / t - t / (g * (1.0 - t) * (1.0 - t))),
        ("gamma_poly", poly(&GAMMA_POLY, g)),
        ("rho_poly", poly(&RHO_POLY, rho)),
        ("q_poly", poly(&Q_POLY, q)),
    ];
    Params {
        family: Family::Strong,
        alpha: a,
        gamma: g,
        theta: Some(t),
        sigma2,
        sigma2_prime,
        cov,
        rho,
        q,
        beta,
        residuals,
    }
}

pub fn params_semi() -> Params {
    let r5 = sqrt(5.0);
    let a = r5 - 2.0;
    let g = (r5 - 1.0) / 2.0;
    let sigma2 = 2.0 * (2.0 + r5);
    let sigma2_prime = 1.0 + r5;
    let cov = -(2.0 + r5);
    let rho = -(1.0 + r5) / 4.0;
    let (s, sp) = (sqrt(sigma2), sqrt(sigma2_prime));
    let beta = (1.0 / sqrt(2.0 * PI)) / (1.0 - g) * (1.0 / sp + (1.0 + g) / s);
    let residuals = alloc::vec![
        ("mass", a * (1.0 / (1.0 - g) + g / (1.0 - g)) - 1.0),
        ("rho_closed_form", cov / (s * sp) - rho),
    ];
    Params {
        family: Family::Semi,
        alpha: a,
        gamma: g,
        theta: None,
        sigma2,
        sigma2_prime,
        cov,
        rho,
        q: 0.5,
        beta,
        residuals,
    }
}

// ---------------------------------------------------------------------------
// Walks

pub fn is_increment(family: Family, s: Step) -> bool {
    let (dx, dy) = s;
    match family {
        Family::Strong => (dx <= -1 && dy == 0) || (dx == 0 && dy == 1) || (dx == 1 && dy <= 0),
        Family::Semi => (dx <= 0 && dy == 1) || (dx >= 1 && dy == 1 - dx),
    }
}

/// Starts at the origin, stays in the closed quadrant, uses only the
/// family's increments.
pub fn walk_validity(w: &[(i64, i64)], family: Family) -> bool {
    w.first() == Some(&(0, 0))
        && w.iter().all(|&(x, y)| x >= 0 && y >= 0)
        && w.windows(2).all(|p| is_increment(family, (p[1].0 - p[0].0, p[1].1 - p[0].1)))
}

pub fn labels_to_walk(labels: &[Label]) -> Walk2D {
    labels.iter().map(|l| (l.h as i64, l.k as i64)).collect()
}

pub fn walk_to_labels(w: &[(i64, i64)]) -> Option<Vec<Label>> {
    w.iter()
        .map(|&(x, y)| (x >= 0 && y >= 0).then(|| Label::new(x as u32, y as u32)))
        .collect()
}

/// Log of the start weight of label `l` (before normalization).
fn log_start_weight(p: &Params, l: Label) -> f64 {
    let (h, k) = (l.h as f64, l.k as f64);
    match p.family {
        Family::Strong => h * ln(p.gamma) + k * ln(p.theta.unwrap()),
        Family::Semi => (h + 2.0 * k) * ln(p.gamma),
    }
}

/// Uniform sampler over `n`-point quadrant walks by rejection: draw the end
/// point from a geometric start law on the labels reachable at level `n`,
/// run `n − 1` reversed steps and accept when the path stays in the quadrant
/// and ends at the origin. Every accepted path has the same probability, so
/// the time-reversed path is uniform.
#[derive(Clone, Debug)]
pub struct RejectionSampler {
    n: usize,
    params: Params,
    reversed: StepDistribution,
    starts: Vec<Label>,
    cumulative: Vec<f64>,
    log_z: f64,
}

impl RejectionSampler {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        let params = params(family);
        let starts: Vec<Label> = labels_at_level(&Rule::from(family), n)?.into_keys().collect();
        let logs: Vec<f64> = starts.iter().map(|&l| log_start_weight(&params, l)).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|&x| exp(x - max)).sum();
        let log_z = max + ln(sum);
        let mut acc = 0.0;
        let cumulative = logs
            .iter()
            .map(|&x| {
                acc += exp(x - log_z);
                acc
            })
            .collect();
        let reversed = StepDistribution::new(family, &params).reversed();
        Ok(RejectionSampler { n, params, reversed, starts, cumulative, log_z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln Z_n`, the log normalizer of the start law.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn start_labels(&self) -> &[Label] {
        &self.starts
    }

    /// Start-law probability of `l`.
    pub fn start_prob(&self, l: Label) -> f64 {
        match self.starts.binary_search(&l) {
            Ok(_) => exp(log_start_weight(&self.params, l) - self.log_z),
            Err(_) => 0.0,
        }
    }

    /// Probability that one attempt produces exactly the forward path
    /// `labels` (start weight times the reversed step weights).
    pub fn path_probability(&self, labels: &[Label]) -> f64 {
        let mut p = self.start_prob(*labels.last().unwrap());
        for w in labels.windows(2).rev() {
            let (dx, dy) = w[0].step(w[1]);
            p *= self.reversed.prob((-dx, -dy));
        }
        p
    }

    /// The common value every path probability should take:
    /// `α^{n−1}/Z_n` (strong) or `α^{n−1}γ^{2n−2}/Z_n` (semi).
    pub fn predicted_path_probability(&self) -> f64 {
        let m = (self.n - 1) as f64;
        let p = &self.params;
        let log = match p.family {
            Family::Strong => m * ln(p.alpha),
            Family::Semi => m * ln(p.alpha) + 2.0 * m * ln(p.gamma),
        };
        exp(log - self.log_z)
    }

    /// One attempt; `None` on rejection.
    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<Label>> {
        let u = rng.gen::<f64>() * self.cumulative.last().unwrap();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.starts.len() - 1);
        let start = self.starts[i];
        let (mut x, mut y) = (start.h as i64, start.k as i64);
        let mut back = Vec::with_capacity(self.n);
        back.push(start);
        for _ in 1..self.n {
            let (dx, dy) = self.reversed.sample(rng);
            x += dx;
            y += dy;
            if x < 0 || y < 0 {
                return None;
            }
            back.push(Label::new(x as u32, y as u32));
        }
        if (x, y) != (0, 0) {
            return None;
        }
        back.reverse();
        Some(back)
    }

    /// Retries until acceptance; returns the path and the attempts used.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(Vec<Label>, u64)> {
        for a in 1..=max_attempts {
            if let Some(p) = self.attempt(rng) {
                return Ok((p, a));
            }
        }
        Err(Error::AttemptsExhausted { attempts: max_attempts })
    }
}

/// One uniform walk of `n` points; also returns the number of attempts.
pub fn sample_conditioned_rejection<R: Rng + ?Sized>(
    n: usize,
    family: Family,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Walk2D, u64)> {
    let s = RejectionSampler::new(family, n)?;
    let (labels, attempts) = s.sample(rng, max_attempts)?;
    Ok((labels_to_walk(&labels), attempts))
}
