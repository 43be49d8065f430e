//! Generating trees with two-dimensional labels.
//!
//! A class member of size `n` is encoded by the labels of its ancestors in the
//! generating tree, a path of `n` labels starting at the root `(0,0)`. For the
//! two built-in families a label `(h,k)` counts the active sites at or below
//! (resp. above) the last value, minus one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::perm::{Family, Permutation};
use crate::{seed, Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label {
    pub h: u32,
    pub k: u32,
}

impl Label {
    pub const ROOT: Label = Label { h: 0, k: 0 };

    pub const fn new(h: u32, k: u32) -> Self {
        Label { h, k }
    }

    pub fn step(self, to: Label) -> (i64, i64) {
        (to.h as i64 - self.h as i64, to.k as i64 - self.k as i64)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.h, self.k)
    }
}

/// A root-to-node path in the generating tree.
pub type LabelSequence = Vec<Label>;

pub fn children_strong(l: Label) -> Vec<Label> {
    let Label { h, k } = l;
    let mut out = Vec::with_capacity((h + k + 2) as usize);
    out.extend((0..h).map(|j| Label::new(j, k)));
    out.push(Label::new(h, k + 1));
    out.extend((0..=k).map(|j| Label::new(h + 1, j)));
    out
}

pub fn children_semi(l: Label) -> Vec<Label> {
    let Label { h, k } = l;
    let mut out = Vec::with_capacity((h + k + 2) as usize);
    out.extend((0..=h).map(|j| Label::new(j, k + 1)));
    out.extend((0..=k).map(|j| Label::new(h + k + 1 - j, j)));
    out
}

/// A succession rule given by a root and a children map. Custom rules may
/// return repeated children; every routine treats the output as a multiset.
#[derive(Clone, Copy)]
pub struct CustomRule {
    pub root: Label,
    pub children: fn(Label) -> Vec<Label>,
}

#[derive(Clone, Copy)]
pub enum Rule {
    Strong,
    Semi,
    Custom(CustomRule),
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Strong => f.write_str("Rule::Strong"),
            Rule::Semi => f.write_str("Rule::Semi"),
            Rule::Custom(c) => write!(f, "Rule::Custom(root={:?})", c.root),
        }
    }
}

impl From<Family> for Rule {
    fn from(f: Family) -> Rule {
        match f {
            Family::Strong => Rule::Strong,
            Family::Semi => Rule::Semi,
        }
    }
}

impl Rule {
    pub fn custom(root: Label, children: fn(Label) -> Vec<Label>) -> Rule {
        Rule::Custom(CustomRule { root, children })
    }

    pub fn family(&self) -> Option<Family> {
        match self {
            Rule::Strong => Some(Family::Strong),
            Rule::Semi => Some(Family::Semi),
            Rule::Custom(_) => None,
        }
    }

    pub fn root(&self) -> Label {
        match self {
            Rule::Custom(c) => c.root,
            _ => Label::ROOT,
        }
    }

    pub fn children(&self, l: Label) -> Vec<Label> {
        match self {
            Rule::Strong => children_strong(l),
            Rule::Semi => children_semi(l),
            Rule::Custom(c) => (c.children)(l),
        }
    }

    /// Multiplicity of `child` among the children of `parent`.
    pub fn child_multiplicity(&self, parent: Label, child: Label) -> usize {
        let (p, c) = (parent, child);
        match self {
            Rule::Strong => {
                let hit = (c.h < p.h && c.k == p.k)
                    || (c.h == p.h && c.k == p.k + 1)
                    || (c.h == p.h + 1 && c.k <= p.k);
                hit as usize
            }
            Rule::Semi => {
                let hit = (c.h <= p.h && c.k == p.k + 1)
                    || (c.h + c.k == p.h + p.k + 1 && c.k <= p.k);
                hit as usize
            }
            Rule::Custom(r) => (r.children)(p).iter().filter(|&&x| x == c).count(),
        }
    }

    /// Checks that `labels` starts at the root and follows the rule.
    pub fn check_path(&self, labels: &[Label]) -> Result<()> {
        match labels.first() {
            Some(&l) if l == self.root() => {}
            _ => return Err(Error::WalkNotRooted),
        }
        for (pos, w) in labels.windows(2).enumerate() {
            if self.child_multiplicity(w[0], w[1]) == 0 {
                return Err(Error::InconsistentLabels { pos });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bijection with permutations

/// Encodes a class member as its label path. Active sites of each prefix come
/// from the membership oracle, not from the succession rule.
pub fn perm_to_walk(sigma: &Permutation, family: Family) -> Result<LabelSequence> {
    if sigma.is_empty() {
        return Err(Error::EmptySize);
    }
    let class = family.class();
    if let Some(prefix) = class.first_bad_prefix(sigma) {
        return Err(Error::NotInClass { prefix });
    }
    (1..=sigma.len())
        .map(|m| {
            let pi = sigma.prefix(m);
            let last = pi.at(m - 1);
            let sites = class.active_sites(&pi);
            let below = sites.iter().filter(|&&s| s <= last).count();
            let above = sites.len() - below;
            if below == 0 || above == 0 {
                return Err(Error::Invalid(alloc::format!(
                    "prefix {pi} has no active site on one side of its last value"
                )));
            }
            Ok(Label::new(below as u32 - 1, above as u32 - 1))
        })
        .collect()
}

/// Active sites of the permutation being built, split at the last value:
/// `lower = [s_{-x} < … < s_0]` and `upper = [s_1 < … < s_{y+1}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveSites {
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

impl ActiveSites {
    fn initial() -> Self {
        ActiveSites { lower: vec![1], upper: vec![2] }
    }

    pub fn all(&self) -> Vec<u32> {
        let mut v = self.lower.clone();
        v.extend_from_slice(&self.upper);
        v
    }

    /// Applies one increment, returning the inserted value.
    fn advance(&mut self, family: Family, dx: i64, dy: i64) -> Option<u32> {
        let x = self.lower.len() as i64 - 1;
        let y = self.upper.len() as i64 - 1;
        let bump = |v: &[u32]| v.iter().map(|s| s + 1).collect::<Vec<_>>();
        match family {
            Family::Strong => {
                if dx == 1 && dy <= 0 && -dy <= y {
                    let i = (-dy) as usize;
                    let v = self.upper[i];
                    self.lower.push(v);
                    let mut up = vec![v + 1];
                    up.extend(bump(&self.upper[i + 1..]));
                    self.upper = up;
                    Some(v)
                } else if dx == 0 && dy == 1 {
                    let v = *self.lower.last().unwrap();
                    let mut up = vec![v + 1];
                    up.extend(bump(&self.upper));
                    self.upper = up;
                    Some(v)
                } else if dy == 0 && dx < 0 && -dx <= x {
                    let keep = (x + dx) as usize;
                    let v = self.lower[keep];
                    self.lower.truncate(keep + 1);
                    self.upper = bump(&self.upper);
                    Some(v)
                } else {
                    None
                }
            }
            Family::Semi => {
                if dx >= 1 && dy == 1 - dx && dx <= y + 1 {
                    let i = dx as usize;
                    let v = self.upper[i - 1];
                    self.lower.extend_from_slice(&self.upper[..i]);
                    let mut up = vec![v + 1];
                    up.extend(bump(&self.upper[i..]));
                    self.upper = up;
                    Some(v)
                } else if dy == 1 && dx <= 0 && -dx <= x {
                    let keep = (x + dx) as usize;
                    let v = self.lower[keep];
                    self.lower.truncate(keep + 1);
                    let mut up = vec![v + 1];
                    up.extend(bump(&self.upper));
                    self.upper = up;
                    Some(v)
                } else {
                    None
                }
            }
        }
    }
}

/// Decodes a label path by tracking the active sites through the case
/// analysis of each increment.
pub fn walk_to_perm(labels: &[Label], family: Family) -> Result<Permutation> {
    walk_to_perm_traced(labels, family, |_, _| {})
}

/// Like [`walk_to_perm`], calling `visit(m, sites)` with the active sites of
/// every prefix of size `m`.
pub fn walk_to_perm_traced(
    labels: &[Label],
    family: Family,
    mut visit: impl FnMut(usize, &ActiveSites),
) -> Result<Permutation> {
    if labels.first() != Some(&Label::ROOT) {
        return Err(Error::WalkNotRooted);
    }
    let mut sites = ActiveSites::initial();
    let mut ranks = Vec::with_capacity(labels.len());
    ranks.push(1u32);
    visit(1, &sites);
    for (pos, w) in labels.windows(2).enumerate() {
        let (dx, dy) = w[0].step(w[1]);
        let v = sites.advance(family, dx, dy).ok_or(Error::InconsistentLabels { pos })?;
        ranks.push(v);
        visit(pos + 2, &sites);
    }
    Ok(crate::perm::from_last_ranks(&ranks))
}

// ---------------------------------------------------------------------------
// Dynamic programming over labels

/// Additive weights for the counting tables.
pub trait Weight: Clone {
    fn zero() -> Self;
    fn add(&mut self, other: &Self);
    fn is_zero(&self) -> bool;
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&mut self, other: &Self) {
        *self += *other;
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Dense table indexed by `(h,k)` with `h < rows`, `k < cols`.
#[derive(Clone, Debug)]
pub struct Grid<W> {
    rows: usize,
    cols: usize,
    data: Vec<W>,
}

impl<W: Weight> Grid<W> {
    fn new(rows: usize, cols: usize) -> Self {
        Grid { rows, cols, data: vec![W::zero(); rows * cols] }
    }

    pub fn get(&self, l: Label) -> Option<&W> {
        let (h, k) = (l.h as usize, l.k as usize);
        (h < self.rows && k < self.cols).then(|| &self.data[h * self.cols + k])
    }

    fn at(&self, h: usize, k: usize) -> &W {
        &self.data[h * self.cols + k]
    }

    fn at_mut(&mut self, h: usize, k: usize) -> &mut W {
        &mut self.data[h * self.cols + k]
    }

    fn value(&self, l: Label) -> W {
        self.get(l).cloned().unwrap_or_else(W::zero)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (Label, &W)> + '_ {
        self.data.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(move |(i, w)| {
            (Label::new((i / self.cols) as u32, (i % self.cols) as u32), w)
        })
    }
}

/// Level-`m+1` table from level `m` (`m ≥ 1`). At level `m` every label of the
/// built-in rules satisfies `h + k ≤ m − 1`, so a side of `m` suffices.
fn forward_level<W: Weight>(family: Family, old: &Grid<W>, m: usize) -> Grid<W> {
    let mut new: Grid<W> = Grid::new(m + 1, m + 1);
    match family {
        Family::Strong => {
            for k in 0..m {
                // children (j,k) for j < h: suffix sums along h
                let mut suf = W::zero();
                for h in (0..m - k).rev() {
                    new.at_mut(h, k).add(&suf);
                    suf.add(old.at(h, k));
                }
            }
            for h in 0..m {
                let mut suf = W::zero();
                for k in (0..m - h).rev() {
                    let w = old.at(h, k);
                    new.at_mut(h, k + 1).add(w);
                    suf.add(w);
                    new.at_mut(h + 1, k).add(&suf);
                }
            }
        }
        Family::Semi => {
            for k in 0..m {
                let mut suf = W::zero();
                for h in (0..m - k).rev() {
                    suf.add(old.at(h, k));
                    new.at_mut(h, k + 1).add(&suf);
                }
            }
            for d in 0..m {
                let mut suf = W::zero();
                for k in (0..=d).rev() {
                    suf.add(old.at(d - k, k));
                    new.at_mut(d + 1 - k, k).add(&suf);
                }
            }
        }
    }
    new
}

fn generic_level<W: Weight>(rule: &Rule, old: &BTreeMap<Label, W>) -> BTreeMap<Label, W> {
    let mut new: BTreeMap<Label, W> = BTreeMap::new();
    for (&l, w) in old {
        for c in rule.children(l) {
            new.entry(c).or_insert_with(W::zero).add(w);
        }
    }
    new
}

/// Exact multiplicities of the labels at level `n`: the number of root paths
/// of `n` labels ending at each label.
pub fn labels_at_level(rule: &Rule, n: usize) -> Result<BTreeMap<Label, BigUint>> {
    if n == 0 {
        return Err(Error::EmptySize);
    }
    match rule.family() {
        Some(f) => {
            let mut g: Grid<BigUint> = Grid::new(1, 1);
            *g.at_mut(0, 0) = BigUint::one();
            for m in 1..n {
                g = forward_level(f, &g, m);
            }
            Ok(g.nonzero().map(|(l, w)| (l, w.clone())).collect())
        }
        None => {
            let mut level = BTreeMap::new();
            level.insert(rule.root(), BigUint::one());
            for _ in 1..n {
                level = generic_level(rule, &level);
            }
            Ok(level)
        }
    }
}

/// Number of class members of size `n`, i.e. of root paths with `n` labels.
pub fn count(rule: &Rule, n: usize) -> Result<BigUint> {
    Ok(labels_at_level(rule, n)?.values().sum())
}

/// Counts for sizes `1..=n_max` in one forward pass.
pub fn counts_up_to(rule: &Rule, n_max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n_max);
    if n_max == 0 {
        return out;
    }
    match rule.family() {
        Some(f) => {
            let mut g: Grid<BigUint> = Grid::new(1, 1);
            *g.at_mut(0, 0) = BigUint::one();
            out.push(BigUint::one());
            for m in 1..n_max {
                g = forward_level(f, &g, m);
                out.push(g.data.iter().sum());
            }
        }
        None => {
            let mut level = BTreeMap::new();
            level.insert(rule.root(), BigUint::one());
            out.push(BigUint::one());
            for _ in 1..n_max {
                level = generic_level(rule, &level);
                out.push(level.values().sum());
            }
        }
    }
    out
}

/// Calls `visit` on every root path with at most `n_max` labels, in
/// depth-first order.
pub fn for_each_path(rule: &Rule, n_max: usize, mut visit: impl FnMut(&[Label])) {
    fn go(rule: &Rule, path: &mut Vec<Label>, n_max: usize, visit: &mut impl FnMut(&[Label])) {
        visit(path);
        if path.len() == n_max {
            return;
        }
        for c in rule.children(*path.last().unwrap()) {
            path.push(c);
            go(rule, path, n_max, visit);
            path.pop();
        }
    }
    if n_max == 0 {
        return;
    }
    let mut path = vec![rule.root()];
    go(rule, &mut path, n_max, &mut visit);
}

/// Every root path with exactly `n` labels.
pub fn all_paths(rule: &Rule, n: usize) -> Vec<LabelSequence> {
    let mut out = Vec::new();
    for_each_path(rule, n, |p| {
        if p.len() == n {
            out.push(p.to_vec());
        }
    });
    out
}

// ---------------------------------------------------------------------------
// Exact uniform sampling

/// Largest size for which completion counts are kept as exact integers.
pub const EXACT_COUNT_MAX: usize = 200;
/// Default size budget of [`ExactSampler`].
pub const DEFAULT_BUDGET: usize = 500;

enum Tables {
    Exact(Vec<Grid<BigUint>>),
    Float(Vec<Grid<f64>>),
}

/// Uniform sampler over root paths of `n` labels.
///
/// `tables[m]` holds, for every label reachable `n − m` labels deep, the
/// number of ways to extend it by `m` more labels. Paths are drawn forward,
/// each child picked with probability proportional to its completion count.
/// Above [`EXACT_COUNT_MAX`] the counts are floating point, each table
/// rescaled so that its largest entry is 1.
pub struct ExactSampler {
    rule: Rule,
    n: usize,
    tables: Tables,
}

impl ExactSampler {
    pub fn new(rule: Rule, n: usize) -> Result<Self> {
        Self::with_budget(rule, n, DEFAULT_BUDGET)
    }

    pub fn with_budget(rule: Rule, n: usize, budget: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySize);
        }
        if n > budget {
            return Err(Error::OverBudget { n, max: budget });
        }
        let tables = if n <= EXACT_COUNT_MAX {
            Tables::Exact(completion_tables::<BigUint>(&rule, n, false))
        } else {
            Tables::Float(completion_tables::<f64>(&rule, n, true))
        };
        Ok(ExactSampler { rule, n, tables })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.tables, Tables::Exact(_))
    }

    /// Number of paths, when counts are exact.
    pub fn total(&self) -> Option<BigUint> {
        match &self.tables {
            Tables::Exact(t) => Some(t[self.n - 1].value(self.rule.root())),
            Tables::Float(_) => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LabelSequence {
        let mut path = Vec::with_capacity(self.n);
        let mut cur = self.rule.root();
        path.push(cur);
        for step in 1..self.n {
            let m = self.n - step - 1;
            let kids = self.rule.children(cur);
            cur = match &self.tables {
                Tables::Exact(t) => {
                    let total: BigUint = kids.iter().map(|&c| t[m].value(c)).sum();
                    let mut r = rng.gen_biguint_below(&total);
                    let mut pick = *kids.last().unwrap();
                    for &c in &kids {
                        let w = t[m].value(c);
                        if r < w {
                            pick = c;
                            break;
                        }
                        r -= w;
                    }
                    pick
                }
                Tables::Float(t) => {
                    let total: f64 = kids.iter().map(|&c| t[m].value(c)).sum();
                    let mut r = rng.gen::<f64>() * total;
                    let mut pick = None;
                    for &c in &kids {
                        let w = t[m].value(c);
                        if w > 0.0 {
                            pick = Some(c);
                            if r < w {
                                break;
                            }
                            r -= w;
                        }
                    }
                    pick.expect("a reachable label has a completable child")
                }
            };
            path.push(cur);
        }
        path
    }
}

fn completion_tables<W: Weight + ScaleDown>(rule: &Rule, n: usize, rescale: bool) -> Vec<Grid<W>> {
    let mut tables: Vec<Grid<W>> = Vec::with_capacity(n);
    match rule.family() {
        Some(family) => {
            // m = 0: labels with h + k ≤ n − 1.
            let mut g = Grid::new(n, n);
            for h in 0..n {
                for k in 0..n - h {
                    *g.at_mut(h, k) = W::unit();
                }
            }
            tables.push(g);
            for m in 1..n {
                let prev = &tables[m - 1];
                let side = n - m;
                let mut g = backward_level(family, prev, side);
                if rescale {
                    W::rescale(&mut g.data);
                }
                tables.push(g);
            }
        }
        None => {
            let mut levels: Vec<BTreeSet<Label>> = Vec::with_capacity(n);
            levels.push([rule.root()].into_iter().collect());
            for i in 1..n {
                let next = levels[i - 1].iter().flat_map(|&l| rule.children(l)).collect();
                levels.push(next);
            }
            let rows = levels.iter().flatten().map(|l| l.h as usize + 1).max().unwrap();
            let cols = levels.iter().flatten().map(|l| l.k as usize + 1).max().unwrap();
            let mut g = Grid::new(rows, cols);
            for l in &levels[n - 1] {
                *g.at_mut(l.h as usize, l.k as usize) = W::unit();
            }
            tables.push(g);
            for m in 1..n {
                let mut g = Grid::new(rows, cols);
                for &l in &levels[n - 1 - m] {
                    let mut acc = W::zero();
                    for c in rule.children(l) {
                        acc.add(&tables[m - 1].value(c));
                    }
                    *g.at_mut(l.h as usize, l.k as usize) = acc;
                }
                if rescale {
                    W::rescale(&mut g.data);
                }
                tables.push(g);
            }
        }
    }
    tables
}

/// Completion counts for labels with `h + k ≤ side − 1` from the table one
/// level deeper (labels with `h + k ≤ side`).
fn backward_level<W: Weight>(family: Family, prev: &Grid<W>, side: usize) -> Grid<W> {
    let mut g: Grid<W> = Grid::new(side, side);
    match family {
        Family::Strong => {
            // c(h,k) = Σ_{j<h} c'(j,k) + c'(h,k+1) + Σ_{j≤k} c'(h+1,j)
            for k in 0..side {
                let mut pre = W::zero();
                for h in 0..side - k {
                    g.at_mut(h, k).add(&pre);
                    pre.add(prev.at(h, k));
                }
            }
            for h in 0..side {
                let mut pre = W::zero();
                for k in 0..side - h {
                    pre.add(prev.at(h + 1, k));
                    let up = prev.at(h, k + 1).clone();
                    let cell = g.at_mut(h, k);
                    cell.add(&up);
                    cell.add(&pre);
                }
            }
        }
        Family::Semi => {
            // c(h,k) = Σ_{j≤h} c'(j,k+1) + Σ_{j≤k} c'(h+k+1−j, j)
            for k in 0..side {
                let mut pre = W::zero();
                for h in 0..side - k {
                    pre.add(prev.at(h, k + 1));
                    g.at_mut(h, k).add(&pre);
                }
            }
            for d in 0..side {
                let mut pre = W::zero();
                for k in 0..=d {
                    pre.add(prev.at(d + 1 - k, k));
                    g.at_mut(d - k, k).add(&pre);
                }
            }
        }
    }
    g
}

trait ScaleDown: Weight {
    fn unit() -> Self;
    fn rescale(_data: &mut [Self]) {}
}

impl ScaleDown for BigUint {
    fn unit() -> Self {
        One::one()
    }
}

impl ScaleDown for f64 {
    fn unit() -> Self {
        1.0
    }
    fn rescale(data: &mut [f64]) {
        let max = data.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            data.iter_mut().for_each(|w| *w /= max);
        }
    }
}

/// One uniform path of `n` labels, seeded.
pub fn sample_uniform_exact(rule: Rule, n: usize, seed: u64) -> Result<LabelSequence> {
    let sampler = ExactSampler::new(rule, n)?;
    Ok(sampler.sample(&mut seed::rng(seed)))
}

/// Ratio of two big integers as a float, robust to both being huge.
pub fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}
