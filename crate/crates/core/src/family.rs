//! Monotone families stored as the antichain of their minimal sets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_GROUND};

/// A nontrivial monotone family on the ground set `{0, .., n-1}`.
///
/// The family is `{B : B ⊇ M for some minimal set M}`. The minimal sets form
/// a nonempty antichain that excludes the empty set, so neither `∅` nor `2^X`
/// can be represented. They are kept sorted by `(size, bitmask)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonotoneFamily {
    n: usize,
    minimal_sets: Vec<Subset>,
}

/// An arbitrary collection of distinct subsets (a candidate generator).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetFamily {
    n: usize,
    sets: Vec<Subset>,
}

/// Counts `a_k = |{A ∈ F : |A| = k}|` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub counts: Vec<u64>,
}

impl LevelProfile {
    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParameter("ground set must be nonempty".into()));
    }
    if n > MAX_GROUND {
        return Err(Error::GroundSetTooLarge { n, cap: MAX_GROUND });
    }
    Ok(())
}

fn check_within(n: usize, s: Subset, index: usize) -> Result<()> {
    if !s.is_subset_of(Subset::full(n)) {
        return Err(Error::Invalid {
            path: format!("sets[{index}]"),
            message: format!("element {} out of range for n = {n}", s.span() - 1),
        });
    }
    Ok(())
}

impl MonotoneFamily {
    /// Family generated by `sets`, reduced to its minimal members.
    pub fn from_sets<I: IntoIterator<Item = Subset>>(n: usize, sets: I) -> Result<Self> {
        Self::canonicalize(n, sets).map(|(f, _)| f)
    }

    /// Like [`from_sets`](Self::from_sets) but also returns the inputs that
    /// were dropped as duplicates or supersets of another input.
    pub fn canonicalize<I: IntoIterator<Item = Subset>>(
        n: usize,
        sets: I,
    ) -> Result<(Self, Vec<Subset>)> {
        check_ground(n)?;
        let mut all: Vec<Subset> = Vec::new();
        for (i, s) in sets.into_iter().enumerate() {
            check_within(n, s, i)?;
            if s.is_empty() {
                return Err(Error::TrivialFamily("empty set generates every subset"));
            }
            all.push(s);
        }
        if all.is_empty() {
            return Err(Error::TrivialFamily("no generating sets (empty family)"));
        }
        all.sort_by_key(|s| s.canonical_key());
        let mut minimal: Vec<Subset> = Vec::new();
        let mut removed = Vec::new();
        for s in all {
            if minimal.iter().any(|m| m.is_subset_of(s)) {
                removed.push(s);
            } else {
                minimal.push(s);
            }
        }
        Ok((
            MonotoneFamily {
                n,
                minimal_sets: minimal,
            },
            removed,
        ))
    }

    /// The upset `⟨G⟩` of a set family.
    pub fn upset_of(g: &SetFamily) -> Result<Self> {
        Self::from_sets(g.n, g.sets.iter().copied())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minimal_sets(&self) -> &[Subset] {
        &self.minimal_sets
    }

    /// Union of all minimal sets; elements outside it never matter.
    pub fn support(&self) -> Subset {
        self.minimal_sets
            .iter()
            .fold(Subset::EMPTY, |acc, &m| acc.union(m))
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.minimal_sets.iter().any(|m| m.is_subset_of(s))
    }

    /// True iff every member of `self` contains a member of `g`.
    pub fn is_covered_by(&self, g: &SetFamily) -> bool {
        self.minimal_sets
            .iter()
            .all(|m| g.sets.iter().any(|a| a.is_subset_of(*m)))
    }

    pub fn as_set_family(&self) -> SetFamily {
        SetFamily {
            n: self.n,
            sets: self.minimal_sets.clone(),
        }
    }

    /// Indicator bitmap of the family over all `2^n` subsets.
    pub fn membership(&self, caps: &Caps) -> Result<Membership> {
        caps.check_enum(self.n)?;
        Ok(Membership::build(self.n, &self.minimal_sets))
    }

    pub fn level_profile(&self, caps: &Caps) -> Result<LevelProfile> {
        Ok(self.membership(caps)?.level_profile())
    }

    /// The dual family `F* = {A : X \ A ∉ F}`.
    ///
    /// Its minimal sets are the minimal transversals of the minimal sets of
    /// `F`, found by a branch-and-bound hitting-set enumeration.
    pub fn dual(&self, caps: &Caps) -> Result<MonotoneFamily> {
        if self.n > caps.dual_cap {
            return Err(Error::GroundSetTooLarge {
                n: self.n,
                cap: caps.dual_cap,
            });
        }
        let transversals = minimal_transversals(self.n, &self.minimal_sets);
        MonotoneFamily::from_sets(self.n, transversals)
    }

    /// Image of the family under an element permutation.
    pub fn permuted(&self, perm: &[usize]) -> MonotoneFamily {
        let sets = self.minimal_sets.iter().map(|m| m.permute(perm));
        MonotoneFamily::from_sets(self.n, sets).expect("permutation preserves nontriviality")
    }
}

impl SetFamily {
    pub fn new<I: IntoIterator<Item = Subset>>(n: usize, sets: I) -> Result<Self> {
        check_ground(n)?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (i, s) in sets.into_iter().enumerate() {
            check_within(n, s, i)?;
            if !seen.insert(s.canonical_key()) {
                return Err(Error::Invalid {
                    path: format!("sets[{i}]"),
                    message: "duplicate set".into(),
                });
            }
            out.push(s);
        }
        out.sort_by_key(|s| s.canonical_key());
        Ok(SetFamily { n, sets: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Subset] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Bitmap of a monotone family over `2^n` subsets, indexed by bitmask.
#[derive(Debug, Clone)]
pub struct Membership {
    n: usize,
    words: Vec<u64>,
}

const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

impl Membership {
    fn build(n: usize, minimal: &[Subset]) -> Membership {
        let total = 1usize << n;
        let mut words = vec![0u64; total.div_ceil(64)];
        for m in minimal {
            let idx = m.bits() as usize;
            words[idx / 64] |= 1 << (idx % 64);
        }
        // Upward closure one coordinate at a time.
        for (i, mask) in LOW_MASKS.iter().enumerate().take(n) {
            let shift = 1u32 << i;
            for w in words.iter_mut() {
                *w |= (*w & mask) << shift;
            }
        }
        for i in 6..n {
            let stride = 1usize << (i - 6);
            for w in 0..words.len() {
                if w & stride != 0 {
                    words[w] |= words[w ^ stride];
                }
            }
        }
        if total < 64 {
            words[0] &= (1u64 << total) - 1;
        }
        Membership { n, words }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, s: u64) -> bool {
        let s = s as usize;
        self.words[s / 64] >> (s % 64) & 1 == 1
    }

    /// Iterates over the bitmasks of all members.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut x = w;
            std::iter::from_fn(move || {
                if x == 0 {
                    return None;
                }
                let b = x.trailing_zeros() as u64;
                x &= x - 1;
                Some(wi as u64 * 64 + b)
            })
        })
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn level_profile(&self) -> LevelProfile {
        let mut counts = vec![0u64; self.n + 1];
        for s in self.members() {
            counts[s.count_ones() as usize] += 1;
        }
        LevelProfile { counts }
    }
}

/// Minimal transversals (minimal hitting sets) of a family of nonempty sets.
///
/// Each minimal transversal is produced exactly once: the branching edge is
/// the uncovered set with the fewest live candidates, and candidates tried in
/// earlier branches are withheld from later siblings.
pub fn minimal_transversals(n: usize, edges: &[Subset]) -> Vec<Subset> {
    fn has_private_edges(current: Subset, edges: &[Subset]) -> bool {
        current.iter().all(|u| {
            edges
                .iter()
                .any(|e| e.intersection(current) == Subset::singleton(u))
        })
    }

    fn recurse(current: Subset, mut cand: Subset, edges: &[Subset], out: &mut Vec<Subset>) {
        let pick = edges
            .iter()
            .filter(|e| e.intersection(current).is_empty())
            .min_by_key(|e| e.intersection(cand).len());
        let Some(&edge) = pick else {
            out.push(current);
            return;
        };
        let branch = edge.intersection(cand);
        cand = cand.difference(branch);
        for v in branch.iter() {
            let next = current.insert(v);
            if has_private_edges(next, edges) {
                recurse(next, cand, edges, out);
            }
            cand = cand.insert(v);
        }
    }

    let mut out = Vec::new();
    recurse(Subset::EMPTY, Subset::full(n), edges, &mut out);
    out.sort_by_key(|s| s.canonical_key());
    out
}
