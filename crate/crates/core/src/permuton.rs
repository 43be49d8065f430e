//! Grid approximations of permutons, the rectangle distance between them,
//! random patterns, and size-to-size convergence diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::float::sqrt;
use crate::gentree::{walk_to_perm, ExactSampler, Rule};
use crate::limit_sim::Z99;
use crate::perm::{pattern, standardize, Family, Permutation};
use crate::seed;
use crate::{Error, Result};

/// Default grid resolution.
pub const DEFAULT_GRID: usize = 64;

/// Index draws per replicate in [`pattern_density`].
pub const PATTERN_DRAWS: usize = 256;

/// A probability measure on the unit square, constant on each cell of a
/// `k × k` grid. `mass(i, j)` is the mass of `[i/k, (i+1)/k) × [j/k, (j+1)/k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalPermuton {
    k: usize,
    mass: Vec<f64>,
}

impl EmpiricalPermuton {
    /// Row-major masses (`i` outer). Must be non-negative and sum to 1.
    pub fn new(k: usize, mass: Vec<f64>) -> Result<Self> {
        if k == 0 || mass.len() != k * k {
            return Err(Error::Invalid("mass matrix must be k × k with k ≥ 1".into()));
        }
        if mass.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::Invalid("masses must be non-negative".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid("masses must sum to 1".into()));
        }
        Ok(EmpiricalPermuton { k, mass })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.k + j]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mass of each column `i` (the horizontal marginal).
    pub fn x_marginal(&self) -> Vec<f64> {
        self.mass.chunks(self.k).map(|r| r.iter().sum()).collect()
    }

    pub fn y_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for row in self.mass.chunks(self.k) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m;
            }
        }
        out
    }

    /// Largest deviation of a marginal cell from `1/k`.
    pub fn marginal_deviation(&self) -> f64 {
        let u = 1.0 / self.k as f64;
        self.x_marginal()
            .into_iter()
            .chain(self.y_marginal())
            .map(|m| (m - u).abs())
            .fold(0.0, f64::max)
    }

    /// Cell-wise mean of permutons on the same grid.
    pub fn average(items: &[EmpiricalPermuton]) -> Result<Self> {
        let first = items.first().ok_or(Error::Invalid("nothing to average".into()))?;
        let mut mass = vec![0.0; first.mass.len()];
        for p in items {
            if p.k != first.k {
                return Err(Error::GridMismatch(first.k, p.k));
            }
            for (a, b) in mass.iter_mut().zip(&p.mass) {
                *a += b;
            }
        }
        let n = items.len() as f64;
        mass.iter_mut().for_each(|m| *m /= n);
        Ok(EmpiricalPermuton { k: first.k, mass })
    }
}

fn cell(pos: u32, n: usize, k: usize) -> usize {
    let c = ((pos as f64 - 0.5) / n as f64 * k as f64) as usize;
    c.min(k - 1)
}

/// Mass `1/n` at the cell holding `((i − ½)/n, (σ(i) − ½)/n)`.
pub fn permuton_of(sigma: &Permutation, k: usize) -> Result<EmpiricalPermuton> {
    let n = sigma.len();
    if n == 0 {
        return Err(Error::EmptySize);
    }
    if k == 0 {
        return Err(Error::Invalid("grid resolution must be positive".into()));
    }
    let mut mass = vec![0.0; k * k];
    let w = 1.0 / n as f64;
    for (i, &v) in sigma.values().iter().enumerate() {
        mass[cell(i as u32 + 1, n, k) * k + cell(v, n, k)] += w;
    }
    Ok(EmpiricalPermuton { k, mass })
}

/// `sup_R |a(R) − b(R)|` over rectangles with corners on the grid.
///
/// For each pair of column bounds the strip sums are reduced to prefix sums
/// over rows, and the best row interval is `max prefix − min prefix`.
pub fn rect_distance(a: &EmpiricalPermuton, b: &EmpiricalPermuton) -> Result<f64> {
    if a.k != b.k {
        return Err(Error::GridMismatch(a.k, b.k));
    }
    let k = a.k;
    let diff: Vec<f64> = a.mass.iter().zip(&b.mass).map(|(x, y)| x - y).collect();
    let mut best = 0.0f64;
    let mut strip = vec![0.0f64; k];
    for x0 in 0..k {
        strip.iter_mut().for_each(|s| *s = 0.0);
        for x1 in x0..k {
            for (s, d) in strip.iter_mut().zip(&diff[x1 * k..(x1 + 1) * k]) {
                *s += d;
            }
            let (mut acc, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
            for s in &strip {
                acc += s;
                lo = lo.min(acc);
                hi = hi.max(acc);
            }
            best = best.max(hi - lo);
        }
    }
    Ok(best.min(1.0))
}

// ---------------------------------------------------------------------------
// Patterns

/// Where random points come from.
#[derive(Clone, Copy, Debug)]
pub enum PointSource<'a> {
    /// i.i.d. points with the permuton's law.
    Permuton(&'a EmpiricalPermuton),
    /// Distinct uniform indices of a permutation.
    Permutation(&'a Permutation),
}

/// `k` i.i.d. points from `p`, as `(x, y)` in the unit square.
pub fn sample_points<R: Rng + ?Sized>(p: &EmpiricalPermuton, k: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let mut cumulative = Vec::with_capacity(p.mass.len());
    let mut acc = 0.0;
    for &m in &p.mass {
        acc += m;
        cumulative.push(acc);
    }
    let g = p.k as f64;
    (0..k)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            let mut c = cumulative.partition_point(|&v| v <= u).min(p.mass.len() - 1);
            while p.mass[c] == 0.0 {
                c -= 1;
            }
            let (i, j) = (c / p.k, c % p.k);
            ((i as f64 + rng.gen::<f64>()) / g, (j as f64 + rng.gen::<f64>()) / g)
        })
        .collect()
}

/// The permutation induced by points: sort by `x`, standardize the `y`s.
/// Fails on tied `y` values.
pub fn points_pattern(points: &mut [(f64, f64)]) -> Result<Permutation> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    standardize(&ys)
}

/// `k` distinct indices of `0..n`, sorted. Draws with a repeated index are
/// discarded and drawn again.
pub fn sample_indices<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::Invalid("more indices than positions".into()));
    }
    loop {
        let mut idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        idx.sort_unstable();
        if idx.windows(2).all(|w| w[0] < w[1]) {
            return Ok(idx);
        }
    }
}

pub fn sample_pattern_with<R: Rng + ?Sized>(source: PointSource<'_>, k: usize, rng: &mut R) -> Result<Permutation> {
    if k == 0 {
        return Err(Error::EmptySize);
    }
    match source {
        PointSource::Permuton(p) => points_pattern(&mut sample_points(p, k, rng)),
        PointSource::Permutation(s) => pattern(s, &sample_indices(s.len(), k, rng)?),
    }
}

pub fn sample_pattern(source: PointSource<'_>, k: usize, seed: u64) -> Result<Permutation> {
    sample_pattern_with(source, k, &mut seed::rng(seed))
}

/// Uniform permutations of one size in one family.
pub struct ClassSampler {
    family: Family,
    inner: ExactSampler,
}

impl ClassSampler {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        Ok(ClassSampler { family, inner: ExactSampler::new(Rule::from(family), n)? })
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        walk_to_perm(&self.inner.sample(rng), self.family).expect("sampled paths decode")
    }
}

/// A mean with its standard error and a normal 99% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci99: (f64, f64),
    pub reps: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let std_err = sqrt(var / n);
        Estimate { mean, std_err, ci99: (mean - Z99 * std_err, mean + Z99 * std_err), reps: values.len() }
    }

    /// Whether two independent estimates agree within a joint 99% interval.
    pub fn agrees_with(&self, other: &Estimate) -> bool {
        let se = sqrt(self.std_err * self.std_err + other.std_err * other.std_err);
        (self.mean - other.mean).abs() <= Z99 * se
    }
}

/// Fraction of `draws` random index sets of `sigma` that induce `pi`.
pub fn pattern_frequency<R: Rng + ?Sized>(sigma: &Permutation, pi: &Permutation, draws: usize, rng: &mut R) -> Result<f64> {
    let mut hits = 0usize;
    for _ in 0..draws {
        if sample_pattern_with(PointSource::Permutation(sigma), pi.len(), rng)? == *pi {
            hits += 1;
        }
    }
    Ok(hits as f64 / draws as f64)
}

pub fn pattern_density_replicate(sampler: &ClassSampler, pi: &Permutation, draws: usize, seed: u64) -> Result<f64> {
    let mut rng = seed::rng(seed);
    let sigma = sampler.sample(&mut rng);
    pattern_frequency(&sigma, pi, draws, &mut rng)
}

/// Mean over `reps` uniform permutations of size `n` of the probability that
/// random indices induce `pi`.
pub fn pattern_density(family: Family, pi: &Permutation, n: usize, reps: usize, seed: u64) -> Result<Estimate> {
    if reps == 0 {
        return Err(Error::Invalid("at least one replicate is needed".into()));
    }
    if pi.len() > n {
        return Err(Error::Invalid("pattern longer than the permutations".into()));
    }
    let sampler = ClassSampler::new(family, n)?;
    let values = (0..reps as u64)
        .map(|r| pattern_density_replicate(&sampler, pi, PATTERN_DRAWS, seed::split(seed, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_values(&values))
}

// ---------------------------------------------------------------------------
// Convergence

/// Seed of replicate `r` at size `n`.
pub fn replicate_seed(seed: u64, n: usize, r: u64) -> u64 {
    seed::split(seed::split(seed, n as u64), r)
}

/// Mean of `reps` permutons of uniform class permutations of size `n`.
pub fn averaged_permuton(family: Family, n: usize, reps: usize, k: usize, seed: u64) -> Result<EmpiricalPermuton> {
    let sampler = ClassSampler::new(family, n)?;
    let items = (0..reps as u64)
        .map(|r| permuton_of(&sampler.sample(&mut seed::rng(replicate_seed(seed, n, r))), k))
        .collect::<Result<Vec<_>>>()?;
    EmpiricalPermuton::average(&items)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub n_from: usize,
    pub n_to: usize,
    pub distance: f64,
}

/// `d_□` between the averaged permutons of consecutive sizes.
pub fn convergence_from_averages(sizes: &[usize], averages: &[EmpiricalPermuton]) -> Result<Vec<DiagnosticRow>> {
    sizes
        .windows(2)
        .zip(averages.windows(2))
        .map(|(s, a)| Ok(DiagnosticRow { n_from: s[0], n_to: s[1], distance: rect_distance(&a[0], &a[1])? }))
        .collect()
}

pub fn convergence_diagnostic(family: Family, sizes: &[usize], reps: usize, k: usize, seed: u64) -> Result<Vec<DiagnosticRow>> {
    let averages = sizes
        .iter()
        .map(|&n| averaged_permuton(family, n, reps, k, seed))
        .collect::<Result<Vec<_>>>()?;
    convergence_from_averages(sizes, &averages)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_reverse() {
        let k = 8;
        let id = permuton_of(&Permutation::identity(k), k).unwrap();
        let rev = permuton_of(&Permutation::reverse(k), k).unwrap();
        for i in 0..k {
            for j in 0..k {
                assert_eq!(id.mass(i, j), if i == j { 0.125 } else { 0.0 });
                assert_eq!(rev.mass(i, j), if i + j == k - 1 { 0.125 } else { 0.0 });
            }
        }
        assert_eq!(rect_distance(&id, &id).unwrap(), 0.0);
        assert!((rect_distance(&id, &rev).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch() {
        let a = permuton_of(&Permutation::identity(4), 4).unwrap();
        let b = permuton_of(&Permutation::identity(4), 2).unwrap();
        assert_eq!(rect_distance(&a, &b), Err(Error::GridMismatch(4, 2)));
    }

    #[test]
    fn trivial_patterns() {
        // Points drawn from the identity permuton in distinct grid cells
        // always induce the identity.
        let g = 10;
        let id = permuton_of(&Permutation::identity(g), g).unwrap();
        let mut rng = seed::rng(5);
        let mut checked = 0;
        for k in 1..6 {
            for _ in 0..200 {
                let mut pts = sample_points(&id, k, &mut rng);
                let mut cells: Vec<usize> = pts.iter().map(|p| (p.0 * g as f64) as usize).collect();
                cells.sort_unstable();
                cells.dedup();
                if cells.len() == k {
                    assert_eq!(points_pattern(&mut pts).unwrap(), Permutation::identity(k));
                    checked += 1;
                }
            }
        }
        assert!(checked > 500);
        assert_eq!(sample_pattern(PointSource::Permuton(&id), 1, 3).unwrap(), Permutation::identity(1));
        let s = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(sample_pattern(PointSource::Permutation(&s), 1, 0).unwrap(), Permutation::identity(1));
        assert_eq!(sample_pattern(PointSource::Permutation(&s), 3, 0).unwrap(), s);
        assert!(sample_pattern(PointSource::Permutation(&s), 4, 0).is_err());
    }
}
