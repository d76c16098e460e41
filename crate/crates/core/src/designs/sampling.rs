//! Uniform k-subsets and separated families.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `k`-subset of the 0-based ground set `{0, .., n-1}`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KSubset {
    n: usize,
    indices: Vec<u32>,
}

impl KSubset {
    pub fn new(n: usize, mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadRange("subset has repeated elements".into()));
        }
        if indices.last().is_some_and(|&i| i as usize >= n) {
            return Err(Error::BadRange(format!("subset element outside [0, {n})")));
        }
        Ok(KSubset { n, indices })
    }

    pub fn ground(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn contains(&self, i: u32) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// `|I ∩ J|` by a merge of the sorted index lists.
pub fn intersection_size(a: &KSubset, b: &KSubset) -> Result<usize> {
    if a.n != b.n {
        return Err(Error::MismatchedGround(a.n, b.n));
    }
    Ok(merge_count(&a.indices, &b.indices))
}

fn merge_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Ground sets up to this size use a dense scratch permutation; larger ones
/// a hash map holding only the displaced positions.
const DENSE_LIMIT: usize = 1 << 16;

enum Scratch {
    Dense(Vec<u32>),
    Sparse(HashMap<u32, u32>),
}

/// Partial Fisher–Yates over an implicit permutation of `{0..n-1}`.
///
/// The dense and sparse scratch variants perform identical swaps, so the
/// output depends only on `(n, k)` and the stream.
pub struct SubsetSampler {
    n: usize,
    k: usize,
    scratch: Scratch,
    out: Vec<u32>,
}

impl SubsetSampler {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::BadRange(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::BadRange(format!("ground set of size {n} is too large")));
        }
        let scratch = if n <= DENSE_LIMIT {
            Scratch::Dense((0..n as u32).collect())
        } else {
            Scratch::Sparse(HashMap::with_capacity(2 * k))
        };
        Ok(SubsetSampler { n, k, scratch, out: Vec::with_capacity(k) })
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> KSubset {
        let (n, k) = (self.n as u64, self.k as u64);
        self.out.clear();
        match &mut self.scratch {
            Scratch::Dense(perm) => {
                let mut swaps = Vec::with_capacity(self.k);
                for i in 0..k {
                    let j = rng.random_range(i..n) as usize;
                    perm.swap(i as usize, j);
                    swaps.push(j);
                    self.out.push(perm[i as usize]);
                }
                // undo in reverse to restore the identity
                for (i, j) in swaps.into_iter().enumerate().rev() {
                    perm.swap(i, j);
                }
            }
            Scratch::Sparse(map) => {
                map.clear();
                for i in 0..k {
                    let j = rng.random_range(i..n) as u32;
                    let i = i as u32;
                    let at_j = *map.get(&j).unwrap_or(&j);
                    let at_i = *map.get(&i).unwrap_or(&i);
                    map.insert(j, at_i);
                    map.insert(i, at_j);
                    self.out.push(at_j);
                }
            }
        }
        let mut indices = self.out.clone();
        indices.sort_unstable();
        KSubset { n: self.n, indices }
    }
}

/// One uniformly random `k`-subset of `{0..n-1}`.
pub fn sample_ksubset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<KSubset> {
    Ok(SubsetSampler::new(n, k)?.sample(rng))
}

/// Greedy rejection search for `m` subsets with pairwise `|I ∩ J| < k/2`.
///
/// Candidates are drawn one at a time and kept when they are separated from
/// everything kept so far. The search gives up after `max_attempts`
/// consecutive rejections.
pub fn find_separated_family<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    m: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Vec<KSubset>> {
    if m == 0 {
        return Err(Error::BadRange("family size must be at least 1".into()));
    }
    let mut sampler = SubsetSampler::new(n, k)?;
    let mut family: Vec<KSubset> = Vec::with_capacity(m);
    let mut rejections = 0usize;
    while family.len() < m {
        let cand = sampler.sample(rng);
        // |I ∩ J| < k/2  <=>  2 |I ∩ J| < k
        let ok = family.iter().all(|f| 2 * merge_count(&f.indices, &cand.indices) < k);
        if ok {
            family.push(cand);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= max_attempts {
                return Err(Error::FamilyNotFound {
                    wanted: m,
                    found: family.len(),
                    attempts: rejections,
                });
            }
        }
    }
    Ok(family)
}

/// Largest pairwise intersection in a family (0 for fewer than two sets).
pub fn max_pairwise_intersection(family: &[KSubset]) -> usize {
    let mut worst = 0;
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            worst = worst.max(merge_count(&a.indices, &b.indices));
        }
    }
    worst
}
