//! Coalescent-walk processes driven by two-dimensional walks.
//!
//! Trajectory `t` starts at `Z^{(t)}_t = 0` and moves according to the
//! increments of the driving walk. Indices are 0-based: a walk with `n`
//! points drives `n` trajectories and has `n − 1` increments.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::gentree::{walk_to_perm, Label};
use crate::perm::{from_last_ranks, Family, Permutation};
use crate::walks::{is_increment, Step};
use crate::{Error, Result};

/// Largest size for which the whole triangle `Z^{(t)}_s` is stored.
pub const MATERIALIZE_MAX: usize = 2000;

/// Strong update, written by cases on the increment type. `None` when the
/// increment is not a strong increment.
pub fn update_strong_cases(z: i64, s: Step) -> Option<i64> {
    match s {
        (1, dy) if dy <= 0 => {
            let i = -dy;
            Some(if z > 0 && z - i > 0 {
                z - i
            } else if z <= 0 {
                z - 1
            } else {
                -1
            })
        }
        (0, 1) => Some(if z >= 0 { z + 1 } else { z }),
        (dx, 0) if dx <= -1 => {
            let i = -dx;
            Some(if z >= 0 {
                z
            } else if z + i < 0 {
                z + i
            } else {
                0
            })
        }
        _ => None,
    }
}

/// Strong update in terms of the coordinate increments.
pub fn update_strong(z: i64, (dx, dy): Step) -> i64 {
    if (z == 0 && z - dx >= 0) || (z > 0 && z + dy > 0) {
        z + dy
    } else if z > 0 {
        -1
    } else if z - dx < 0 {
        z - dx
    } else {
        0
    }
}

/// Semi update, by cases.
pub fn update_semi_cases(z: i64, s: Step) -> Option<i64> {
    match s {
        (i, dy) if i >= 1 && dy == 1 - i => Some(if z >= 0 && z - i + 1 > 0 { z - i + 1 } else { z - i }),
        (dx, 1) if dx <= 0 => {
            let i = -dx;
            Some(if z < 0 && z + i < 0 {
                z + i
            } else if z < 0 {
                1
            } else {
                z + 1
            })
        }
        _ => None,
    }
}

/// Semi update in terms of the coordinate increments.
pub fn update_semi(z: i64, (dx, dy): Step) -> i64 {
    if z >= 0 && z + dy > 0 {
        z + dy
    } else if z >= 0 || z - dx < 0 {
        z - dx
    } else {
        1
    }
}

#[inline]
pub fn update(family: Family, z: i64, s: Step) -> i64 {
    match family {
        Family::Strong => update_strong(z, s),
        Family::Semi => update_semi(z, s),
    }
}

fn update_checked(family: Family, z: i64, s: Step) -> i64 {
    let by_cases = match family {
        Family::Strong => update_strong_cases(z, s),
        Family::Semi => update_semi_cases(z, s),
    };
    let v = update(family, z, s);
    debug_assert_eq!(by_cases, Some(v), "{family} update disagrees at z={z}, step={s:?}");
    v
}

/// The family `{Z^{(t)}}` for a driving walk given by its increments.
#[derive(Clone, Debug)]
pub struct CoalescentProcess {
    family: Family,
    steps: Vec<Step>,
    /// Row `s` holds `Z^{(t)}_s` for `t = 0..=s`.
    triangle: Option<Vec<i32>>,
}

fn tri(s: usize) -> usize {
    s * (s + 1) / 2
}

impl CoalescentProcess {
    /// Builds the process from increments, each of which must belong to the
    /// family's increment set. The walk need not stay in the quadrant.
    pub fn from_steps(family: Family, steps: Vec<Step>) -> Result<Self> {
        if let Some(pos) = steps.iter().position(|&s| !is_increment(family, s)) {
            return Err(Error::InconsistentLabels { pos });
        }
        let n = steps.len() + 1;
        let triangle = (n <= MATERIALIZE_MAX).then(|| {
            let mut t = vec![0i32; tri(n)];
            for s in 1..n {
                let (prev, cur) = t.split_at_mut(tri(s));
                let prev = &prev[tri(s - 1)..];
                for (dst, &z) in cur.iter_mut().zip(prev) {
                    *dst = update_checked(family, z as i64, steps[s - 1]) as i32;
                }
                cur[s] = 0;
            }
            t
        });
        Ok(CoalescentProcess { family, steps, triangle })
    }

    pub fn from_walk(family: Family, w: &[(i64, i64)]) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptySize);
        }
        let steps = w.windows(2).map(|p| (p[1].0 - p[0].0, p[1].1 - p[0].1)).collect();
        Self::from_steps(family, steps)
    }

    pub fn from_labels(family: Family, labels: &[Label]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySize);
        }
        Self::from_steps(family, labels.windows(2).map(|p| p[0].step(p[1])).collect())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_materialized(&self) -> bool {
        self.triangle.is_some()
    }

    /// `Z^{(t)}_s` for `t ≤ s`.
    pub fn value(&self, t: usize, s: usize) -> i64 {
        assert!(t <= s && s < self.n());
        match &self.triangle {
            Some(tr) => tr[tri(s) + t] as i64,
            None => self.steps[t..s].iter().fold(0, |z, &st| update(self.family, z, st)),
        }
    }

    /// `(Z^{(t)}_s)_{s ≥ t}`.
    pub fn trajectory(&self, t: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.n() - t);
        let mut z = 0;
        out.push(z);
        for &st in &self.steps[t..] {
            z = update(self.family, z, st);
            out.push(z);
        }
        out
    }

    /// `(Z^{(t)}_s)_{t ≤ s}`.
    pub fn column(&self, s: usize) -> Vec<i64> {
        match &self.triangle {
            Some(tr) => tr[tri(s)..tri(s) + s + 1].iter().map(|&z| z as i64).collect(),
            None => {
                let mut col: Vec<i64> = Vec::with_capacity(s + 1);
                col.push(0);
                for &st in &self.steps[..s] {
                    col.iter_mut().for_each(|z| *z = update(self.family, *z, st));
                    col.push(0);
                }
                col
            }
        }
    }
}

pub fn wcp_strong(w: &[(i64, i64)]) -> Result<CoalescentProcess> {
    CoalescentProcess::from_walk(Family::Strong, w)
}

pub fn wcp_semi(w: &[(i64, i64)]) -> Result<CoalescentProcess> {
    CoalescentProcess::from_walk(Family::Semi, w)
}

/// The permutation encoded by the process:
/// `σ(j) = 1 + #{i < j : Z^{(i)}_j < 0} + #{i > j : Z^{(j)}_i ≥ 0}`.
///
/// An earlier time `i` sits below `j` exactly when `Z^{(i)}_j < 0`. Old
/// trajectories can rest at 0 only in the strong family (after a merge in a
/// `(-i,0)` step) and those lie above the new point.
pub fn cp(p: &CoalescentProcess) -> Permutation {
    if !p.is_materialized() {
        return cp_from_steps(p.family, &p.steps);
    }
    let n = p.n();
    let mut sigma = vec![0u32; n];
    for (j, out) in sigma.iter_mut().enumerate() {
        let below = (0..j).filter(|&i| p.value(i, j) < 0).count();
        let above = (j + 1..n).filter(|&i| p.value(j, i) >= 0).count();
        *out = (1 + below + above) as u32;
    }
    Permutation::new(sigma).expect("the order of a coalescent-walk process is total")
}

/// Trajectories alive at the current time, grouped by value. Sorted by value;
/// the update is monotone so the order survives each step and trajectories
/// that meet are merged into one class.
#[derive(Clone, Debug, Default)]
pub struct Front {
    classes: Vec<(i64, u64)>,
}

impl Front {
    pub fn new() -> Self {
        Front { classes: vec![(0, 1)] }
    }

    pub fn classes(&self) -> &[(i64, u64)] {
        &self.classes
    }

    /// Moves every trajectory by one increment, then starts a new one at 0.
    pub fn advance(&mut self, family: Family, s: Step) {
        let mut out: Vec<(i64, u64)> = Vec::with_capacity(self.classes.len() + 1);
        let mut inserted = false;
        let push = |out: &mut Vec<(i64, u64)>, z: i64, c: u64| match out.last_mut() {
            Some(last) if last.0 == z => last.1 += c,
            _ => out.push((z, c)),
        };
        for &(z, c) in &self.classes {
            let v = update(family, z, s);
            if !inserted && v > 0 {
                push(&mut out, 0, 1);
                inserted = true;
            }
            push(&mut out, v, c);
        }
        if !inserted {
            push(&mut out, 0, 1);
        }
        self.classes = out;
    }

    /// Number of trajectories with value `< 0`.
    pub fn count_negative(&self) -> u64 {
        self.classes.iter().take_while(|c| c.0 < 0).map(|c| c.1).sum()
    }
}

/// [`cp`] without the triangle: the rank of `j` among `0..=j` is the number
/// of trajectories `i < j` with `Z^{(i)}_j < 0`, plus one, read off the
/// merged front.
pub fn cp_from_steps(family: Family, steps: &[Step]) -> Permutation {
    let mut ranks = Vec::with_capacity(steps.len() + 1);
    let mut front = Front::new();
    ranks.push(1u32);
    for &s in steps {
        front.advance(family, s);
        ranks.push(front.count_negative() as u32 + 1);
    }
    from_last_ranks(&ranks)
}

/// The order `≤_Z` between 0-based times.
pub fn order_relation(p: &CoalescentProcess, i: usize, j: usize) -> Ordering {
    match i.cmp(&j) {
        Ordering::Equal => Ordering::Equal,
        Ordering::Less => {
            if p.value(i, j) < 0 { Ordering::Less } else { Ordering::Greater }
        }
        Ordering::Greater => order_relation(p, j, i).reverse(),
    }
}

/// The pattern of `cp(p)` at the 0-based times `indices`, read directly from
/// the trajectories started at those times: for `ℓ < s`,
/// `π(s) < π(ℓ)` exactly when `Z^{(i_ℓ)}_{i_s} ≥ 0`.
pub fn pattern_from_subset(p: &CoalescentProcess, indices: &[usize]) -> Result<Permutation> {
    if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadIndexSet);
    }
    let last = *indices.last().unwrap();
    if last >= p.n() {
        return Err(Error::IndexOutOfRange { index: last, n: p.n() });
    }
    let k = indices.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| order_relation(p, indices[a], indices[b]));
    let mut pi = vec![0u32; k];
    for (rank, &a) in order.iter().enumerate() {
        pi[a] = rank as u32 + 1;
    }
    Permutation::new(pi)
}

/// Distinct end values `Z^{(t)}_{n−1}` with multiplicities, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalValues {
    pub values: Vec<i64>,
    pub mult: Vec<u64>,
}

impl FinalValues {
    pub fn total(&self) -> u64 {
        self.mult.iter().sum()
    }

    /// Whether the values are exactly the integers `lo..=hi`.
    pub fn is_interval(&self, lo: i64, hi: i64) -> bool {
        self.values.len() as i64 == hi - lo + 1
            && self.values.iter().enumerate().all(|(i, &v)| v == lo + i as i64)
    }

    pub fn mult_of(&self, v: i64) -> u64 {
        self.values.iter().position(|&x| x == v).map_or(0, |i| self.mult[i])
    }
}

fn final_values_of(column: &[i64]) -> FinalValues {
    let mut col = column.to_vec();
    col.sort_unstable();
    let mut values: Vec<i64> = Vec::new();
    let mut mult: Vec<u64> = Vec::new();
    for v in col {
        if values.last() == Some(&v) {
            *mult.last_mut().unwrap() += 1;
        } else {
            values.push(v);
            mult.push(1);
        }
    }
    FinalValues { values, mult }
}

pub fn final_values(p: &CoalescentProcess) -> FinalValues {
    final_values_of(&p.column(p.n() - 1))
}

/// Checks, for every prefix of the label path, that the final values form
/// the interval `[−x, y]` for the prefix's last label `(x,y)` and that the
/// active sites (from the class membership oracle) satisfy
/// `s_ℓ = 1 + Σ_{j<ℓ} mult(j)`.
pub fn check_active_site_lemma(labels: &[Label], family: Family) -> Result<bool> {
    let sigma = walk_to_perm(labels, family)?;
    let p = CoalescentProcess::from_labels(family, labels)?;
    let class = family.class();
    for m in 1..=labels.len() {
        let sites = class.active_sites(&sigma.prefix(m));
        if !lemma_at(&p, labels[m - 1], m, &sites) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Same as [`check_active_site_lemma`] with the sites tracked through the
/// succession rule instead of the oracle; fast enough for long paths.
pub fn check_active_site_lemma_tracked(labels: &[Label], family: Family) -> Result<bool> {
    let p = CoalescentProcess::from_labels(family, labels)?;
    let mut ok = true;
    crate::gentree::walk_to_perm_traced(labels, family, |m, sites| {
        ok &= lemma_at(&p, labels[m - 1], m, &sites.all());
    })?;
    Ok(ok)
}

fn lemma_at(p: &CoalescentProcess, label: Label, m: usize, sites: &[u32]) -> bool {
    let fv = final_values_of(&p.column(m - 1));
    let (x, y) = (label.h as i64, label.k as i64);
    if !fv.is_interval(-x, y) || sites.len() as i64 != x + y + 2 {
        return false;
    }
    // s_ℓ for ℓ = −x..=y+1 sits at index ℓ + x.
    let mut acc = 1u64;
    for (idx, &s) in sites.iter().enumerate() {
        if s as u64 != acc {
            return false;
        }
        if idx < fv.mult.len() {
            acc += fv.mult[idx];
        }
    }
    true
}

/// Whether decoding the path through the active sites agrees with the
/// permutation of its coalescent-walk process.
pub fn check_commute(labels: &[Label], family: Family) -> Result<bool> {
    let direct = walk_to_perm(labels, family)?;
    let p = CoalescentProcess::from_labels(family, labels)?;
    Ok(direct == cp(&p))
}

/// Coalescent points `(s, Z_s)`: times and values at which trajectories that
/// were apart (or one just born) first share a value. Each point is listed
/// once.
pub fn coalescent_points(p: &CoalescentProcess) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut prev = vec![0i64];
    for s in 1..p.n() {
        let cur = p.column(s);
        // Trajectories are sorted by start time; group them by current value.
        let mut groups: Vec<(i64, Vec<usize>)> = Vec::new();
        for (t, &v) in cur.iter().enumerate() {
            match groups.iter_mut().find(|g| g.0 == v) {
                Some(g) => g.1.push(t),
                None => groups.push((v, vec![t])),
            }
        }
        for (v, members) in groups {
            if members.len() < 2 {
                continue;
            }
            let fresh = members.iter().any(|&t| t == s);
            let old: Vec<i64> = members.iter().filter(|&&t| t < s).map(|&t| prev[t]).collect();
            let split_before = old.windows(2).any(|w| w[0] != w[1]);
            if fresh || split_before {
                out.push((s, v));
            }
        }
        prev = cur;
    }
    out
}

/// Values of the coalescent points.
pub fn coalescent_point_levels(p: &CoalescentProcess) -> Vec<i64> {
    coalescent_points(p).into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lab(v: &[(u32, u32)]) -> Vec<Label> {
        v.iter().map(|&(h, k)| Label::new(h, k)).collect()
    }

    #[test]
    fn two_point_walks() {
        let p = wcp_strong(&[(0, 0), (0, 1)]).unwrap();
        assert_eq!(p.trajectory(0), vec![0, 1]);
        assert_eq!(cp(&p).values(), &[2, 1]);
        let p = wcp_strong(&[(0, 0), (1, 0)]).unwrap();
        assert_eq!(p.trajectory(0), vec![0, -1]);
        assert_eq!(cp(&p).values(), &[1, 2]);
        let p = wcp_semi(&[(0, 0), (0, 1)]).unwrap();
        assert_eq!(p.trajectory(0), vec![0, 1]);
        let p = wcp_semi(&[(0, 0), (1, 0)]).unwrap();
        assert_eq!(p.trajectory(0), vec![0, -1]);
    }

    #[test]
    fn single_point() {
        let p = wcp_strong(&[(0, 0)]).unwrap();
        assert_eq!(p.trajectory(0), vec![0]);
        assert_eq!(cp(&p).values(), &[1]);
        assert_eq!(final_values(&p), FinalValues { values: vec![0], mult: vec![1] });
        assert!(coalescent_point_levels(&p).is_empty());
        assert!(check_active_site_lemma(&lab(&[(0, 0)]), Family::Strong).unwrap());
        assert!(check_commute(&lab(&[(0, 0)]), Family::Semi).unwrap());
    }

    #[test]
    fn rejects_foreign_increments() {
        assert!(wcp_strong(&[(0, 0), (1, 1)]).is_err());
        assert!(wcp_semi(&[(0, 0), (1, 1)]).is_err());
    }

    #[test]
    fn lazy_column_matches_triangle() {
        let steps = vec![(0, 1), (1, -1), (0, 1), (-1, 0), (1, 0), (0, 1), (1, -2), (-2, 0)];
        let p = CoalescentProcess::from_steps(Family::Strong, steps.clone()).unwrap();
        let lazy = CoalescentProcess { triangle: None, ..p.clone() };
        for s in 0..p.n() {
            assert_eq!(p.column(s), lazy.column(s));
            for t in 0..=s {
                assert_eq!(p.value(t, s), lazy.value(t, s));
            }
        }
        assert_eq!(cp(&p), cp(&lazy));
    }
}
