//! Permutations, standardization, patterns and vincular-avoidance oracles.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::{Error, Result};

/// A permutation of `1..=n` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![usize::MAX; n];
        for (i, &v) in values.iter().enumerate() {
            if v == 0 || v as usize > n {
                return Err(Error::NotPermutation {
                    n,
                    detail: format!("value {v} at position {i}"),
                });
            }
            let slot = &mut seen[v as usize - 1];
            if *slot != usize::MAX {
                return Err(Error::DuplicateValue(*slot, i));
            }
            *slot = i;
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { values: (1..=n as u32).collect() }
    }

    pub fn reverse(n: usize) -> Self {
        Permutation { values: (1..=n as u32).rev().collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// Value at 0-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.values[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { values: inv }
    }

    /// `σ^{*m}`: append the value `m` (1-based, `1 ≤ m ≤ n+1`) and shift every
    /// value `≥ m` up by one.
    pub fn append_at(&self, m: u32) -> Permutation {
        debug_assert!(m >= 1 && m as usize <= self.len() + 1);
        let mut values: Vec<u32> =
            self.values.iter().map(|&v| if v >= m { v + 1 } else { v }).collect();
        values.push(m);
        Permutation { values }
    }

    /// Standardized prefix of length `m`.
    pub fn prefix(&self, m: usize) -> Permutation {
        standardize(&self.values[..m]).expect("prefix of a permutation has distinct values")
    }

    /// Every permutation of size `n` in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations { next: Some((1..=n as u32).collect()) }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.len() >= 10;
        for (i, v) in self.values.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lexicographic enumeration of `S_n`.
pub struct AllPermutations {
    next: Option<Vec<u32>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let n = succ.len();
        if n > 1 {
            let mut i = n - 1;
            while i > 0 && succ[i - 1] > succ[i] {
                i -= 1;
            }
            if i > 0 {
                let mut j = n - 1;
                while succ[j] < succ[i - 1] {
                    j -= 1;
                }
                succ.swap(i - 1, j);
                succ[i..].reverse();
                self.next = Some(succ);
            }
        }
        Some(Permutation { values: cur })
    }
}

/// `std`: the permutation with the same relative order as `values`.
pub fn standardize<T: PartialOrd>(values: &[T]) -> Result<Permutation> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut clash = None;
    order.sort_by(|&a, &b| match values[a].partial_cmp(&values[b]) {
        Some(Ordering::Equal) | None => {
            clash.get_or_insert((a.min(b), a.max(b)));
            a.cmp(&b)
        }
        Some(o) => o,
    });
    if let Some((a, b)) = clash {
        return Err(Error::DuplicateValue(a, b));
    }
    let mut out = vec![0u32; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank as u32 + 1;
    }
    Ok(Permutation { values: out })
}

/// `pat_I(σ)`: the pattern induced on the 0-based positions in `indices`,
/// which must be strictly increasing.
pub fn pattern(sigma: &Permutation, indices: &[usize]) -> Result<Permutation> {
    if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadIndexSet);
    }
    let last = *indices.last().unwrap();
    if last >= sigma.len() {
        return Err(Error::IndexOutOfRange { index: last, n: sigma.len() });
    }
    let picked: Vec<u32> = indices.iter().map(|&i| sigma.values[i]).collect();
    standardize(&picked)
}

/// Rebuilds a permutation from the rank of each entry among its prefix:
/// `ranks[j]` is the value of entry `j` in the standardized prefix of length
/// `j + 1`. Runs in `O(n log n)`.
pub fn from_last_ranks(ranks: &[u32]) -> Permutation {
    let n = ranks.len();
    // Fenwick tree over values 1..=n marking those not yet assigned.
    let mut tree = vec![0u32; n + 1];
    for i in 1..=n {
        tree[i] += 1;
        let j = i + (i & i.wrapping_neg());
        if j <= n {
            tree[j] += tree[i];
        }
    }
    let top = if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) };
    let mut out = vec![0u32; n];
    for j in (0..n).rev() {
        // The ranks[j]-th smallest remaining value.
        let mut want = ranks[j];
        debug_assert!(want >= 1 && want as usize <= j + 1);
        let mut pos = 0usize;
        let mut step = top;
        while step > 0 {
            let next = pos + step;
            if next <= n && tree[next] < want {
                pos = next;
                want -= tree[next];
            }
            step >>= 1;
        }
        let v = pos + 1;
        out[j] = v as u32;
        let mut i = v;
        while i <= n {
            tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }
    Permutation::from_vec_unchecked(out)
}

/// A classical pattern in which the entries at positions `adjacent` and
/// `adjacent + 1` (0-based) must sit next to each other in the host.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VincularPattern {
    pattern: Permutation,
    adjacent: usize,
}

impl VincularPattern {
    pub fn new(pattern: Permutation, adjacent: usize) -> Result<Self> {
        if adjacent + 1 >= pattern.len() {
            return Err(Error::BadPattern(format!(
                "adjacency {adjacent} does not fit a pattern of size {}",
                pattern.len()
            )));
        }
        Ok(VincularPattern { pattern, adjacent })
    }

    /// Parses the dash notation, e.g. `"2-41-3"`. Exactly one block may have
    /// two letters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut adjacent = None;
        for block in s.split('-') {
            let digits: Vec<u32> = block
                .chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::BadPattern(s.to_string())))
                .collect::<Result<_>>()?;
            match digits.len() {
                1 => {}
                2 if adjacent.is_none() => adjacent = Some(values.len()),
                _ => return Err(Error::BadPattern(s.to_string())),
            }
            values.extend(digits);
        }
        let adjacent = adjacent.ok_or_else(|| Error::BadPattern(s.to_string()))?;
        VincularPattern::new(Permutation::new(values)?, adjacent)
    }

    pub fn pattern(&self) -> &Permutation {
        &self.pattern
    }

    pub fn adjacent(&self) -> usize {
        self.adjacent
    }
}

impl fmt::Display for VincularPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.pattern.values.iter().enumerate() {
            if i > 0 && i != self.adjacent + 1 {
                f.write_str("-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Brute-force occurrence test.
pub fn contains_vincular(sigma: &Permutation, p: &VincularPattern) -> bool {
    let k = p.pattern.len();
    if sigma.len() < k {
        return false;
    }
    let mut chosen = vec![0usize; k];
    search(sigma.values(), p, &mut chosen, 0)
}

fn search(host: &[u32], p: &VincularPattern, chosen: &mut [usize], depth: usize) -> bool {
    let k = chosen.len();
    if depth == k {
        return true;
    }
    let n = host.len();
    let lo = if depth == 0 { 0 } else { chosen[depth - 1] + 1 };
    // Leave room for the entries still to place.
    let hi = n - (k - depth);
    let range = if depth == p.adjacent + 1 { lo..=lo } else { lo..=hi };
    for pos in range {
        if pos > hi {
            break;
        }
        let v = host[pos];
        let ok = (0..depth).all(|d| {
            (host[chosen[d]] < v) == (p.pattern.values[d] < p.pattern.values[depth])
        });
        if ok {
            chosen[depth] = pos;
            if search(host, p, chosen, depth + 1) {
                return true;
            }
        }
    }
    false
}

/// A class defined by avoidance of a set of vincular patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternClass {
    patterns: Vec<VincularPattern>,
}

impl PatternClass {
    pub fn new(patterns: Vec<VincularPattern>) -> Self {
        PatternClass { patterns }
    }

    pub fn patterns(&self) -> &[VincularPattern] {
        &self.patterns
    }

    pub fn contains(&self, sigma: &Permutation) -> bool {
        self.patterns.iter().all(|p| !contains_vincular(sigma, p))
    }

    /// Values `m` in `1..=n+1` such that `σ^{*m}` stays in the class.
    pub fn active_sites(&self, sigma: &Permutation) -> Vec<u32> {
        (1..=sigma.len() as u32 + 1)
            .filter(|&m| self.contains(&sigma.append_at(m)))
            .collect()
    }

    /// Length of the shortest prefix of `σ` outside the class.
    pub fn first_bad_prefix(&self, sigma: &Permutation) -> Option<usize> {
        (1..=sigma.len()).find(|&m| !self.contains(&sigma.prefix(m)))
    }
}

/// The two classes treated by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Avoids 2-41-3, 3-14-2 and 3-41-2.
    Strong,
    /// Avoids 2-41-3.
    Semi,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Strong, Family::Semi];

    pub fn class(self) -> PatternClass {
        let names: &[&str] = match self {
            Family::Strong => &["2-41-3", "3-14-2", "3-41-2"],
            Family::Semi => &["2-41-3"],
        };
        PatternClass::new(names.iter().map(|s| VincularPattern::parse(s).unwrap()).collect())
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Strong => "strong",
            Family::Semi => "semi",
        }
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(Family::Strong),
            "semi" => Ok(Family::Semi),
            _ => Err(Error::Invalid(format!("unknown family {s:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn is_strong_baxter(sigma: &Permutation) -> bool {
    Family::Strong.class().contains(sigma)
}

pub fn is_semi_baxter(sigma: &Permutation) -> bool {
    Family::Semi.class().contains(sigma)
}
