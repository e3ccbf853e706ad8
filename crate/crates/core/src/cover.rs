//! Cover thresholds: the largest `q` for which some family `G` with
//! `F ⊆ ⟨G⟩` has `Σ_{A ∈ G} q^|A| < 1/2`, and the variant restricted to
//! automorphism-invariant `G`.
//!
//! The search for `G` is restricted to intersections of nonempty collections
//! of minimal sets. Replacing any `A` by the intersection of the minimal sets
//! containing it keeps what `A` covers and can only shrink `q^|A|`, so an
//! optimal cover always exists among these candidates.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::family::{MonotoneFamily, SetFamily};
use crate::subset::Subset;

/// Up to this many minimal sets the solver runs a dense DP over all coverage
/// masks; above it a branch-and-bound search over the same state space.
pub const DENSE_DP_LIMIT: usize = 16;

/// Bisection steps for the cover threshold.
const Q_MAX_ITERS: usize = 80;

/// A cover `G` of `F` together with its weight at `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverWitness {
    pub q: f64,
    pub cost: f64,
    #[serde(rename = "G")]
    pub g: Vec<Subset>,
}

impl CoverWitness {
    pub fn set_family(&self, n: usize) -> SetFamily {
        SetFamily::new(n, self.g.iter().copied()).expect("witness sets are distinct")
    }
}

/// `q^|A|` with `0^0 = 1`.
pub fn weight(q: f64, a: Subset) -> f64 {
    q.powi(a.len() as i32)
}

fn check_cover_cap(f: &MonotoneFamily, caps: &Caps) -> Result<()> {
    let m = f.minimal_sets().len();
    let cap = caps.cover_cap.min(64);
    if m > cap {
        return Err(Error::TooManyMinimalSets { count: m, cap });
    }
    Ok(())
}

/// All intersections of nonempty collections of minimal sets, in canonical
/// order. Includes the empty set when some intersection is empty.
pub fn candidate_sets(f: &MonotoneFamily, caps: &Caps) -> Result<SetFamily> {
    check_cover_cap(f, caps)?;
    let minimal = f.minimal_sets();
    let mut seen: HashSet<Subset> = minimal.iter().copied().collect();
    let mut queue: VecDeque<Subset> = minimal.iter().copied().collect();
    while let Some(c) = queue.pop_front() {
        for &m in minimal {
            let i = c.intersection(m);
            if seen.insert(i) {
                queue.push_back(i);
            }
        }
    }
    SetFamily::new(f.n(), seen)
}

/// Which minimal sets (by index) contain `a`.
fn coverage(minimal: &[Subset], a: Subset) -> u64 {
    minimal
        .iter()
        .enumerate()
        .filter(|(_, m)| a.is_subset_of(**m))
        .fold(0u64, |acc, (i, _)| acc | 1 << i)
}

/// An option the solver may take as a whole: one candidate, or one orbit.
#[derive(Debug, Clone)]
struct CoverOption {
    members: Vec<Subset>,
    mask: u64,
}

impl CoverOption {
    fn cost(&self, q: f64) -> f64 {
        self.members.iter().map(|&a| weight(q, a)).sum()
    }
}

/// Exact minimum-weight cover of `m` elements by atomic options.
#[derive(Debug, Clone)]
struct CoverProblem {
    m: usize,
    options: Vec<CoverOption>,
    /// For each element, the options covering it.
    covering: Vec<Vec<usize>>,
}

impl CoverProblem {
    fn new(m: usize, options: Vec<CoverOption>) -> CoverProblem {
        let mut covering = vec![Vec::new(); m];
        for (oi, o) in options.iter().enumerate() {
            for e in Subset(o.mask).iter() {
                covering[e].push(oi);
            }
        }
        debug_assert!(covering.iter().all(|c| !c.is_empty()));
        CoverProblem {
            m,
            options,
            covering,
        }
    }

    fn full(&self) -> u64 {
        Subset::full(self.m).bits()
    }

    /// Cheapest cover with cost strictly below `bound`, if any.
    fn solve(&self, q: f64, bound: f64) -> Option<(f64, Vec<usize>)> {
        let costs: Vec<f64> = self.options.iter().map(|o| o.cost(q)).collect();
        let best = if self.m <= DENSE_DP_LIMIT {
            self.solve_dense(&costs)
        } else {
            self.solve_branch_and_bound(&costs, bound)
        }?;
        (best.0 < bound).then_some(best)
    }

    fn solve_dense(&self, costs: &[f64]) -> Option<(f64, Vec<usize>)> {
        let full = self.full() as usize;
        let mut value = vec![f64::INFINITY; full + 1];
        let mut choice = vec![usize::MAX; full + 1];
        value[full] = 0.0;
        for mask in (0..full).rev() {
            let pivot = (!mask).trailing_zeros() as usize;
            for &oi in &self.covering[pivot] {
                let next = mask | self.options[oi].mask as usize;
                let v = costs[oi] + value[next];
                if v < value[mask] {
                    value[mask] = v;
                    choice[mask] = oi;
                }
            }
        }
        let mut picks = Vec::new();
        let mut mask = 0usize;
        while mask != full {
            let oi = choice[mask];
            picks.push(oi);
            mask |= self.options[oi].mask as usize;
        }
        Some((value[0], picks))
    }

    fn solve_branch_and_bound(&self, costs: &[f64], bound: f64) -> Option<(f64, Vec<usize>)> {
        let cheapest: Vec<f64> = self
            .covering
            .iter()
            .map(|opts| opts.iter().map(|&o| costs[o]).fold(f64::INFINITY, f64::min))
            .collect();
        // Elements sharing some option with e (including e itself).
        let neighbours: Vec<u64> = self
            .covering
            .iter()
            .map(|opts| opts.iter().fold(0u64, |acc, &o| acc | self.options[o].mask))
            .collect();
        let mut sorted_covering = self.covering.clone();
        for opts in sorted_covering.iter_mut() {
            opts.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        }
        let mut search = Search {
            problem: self,
            costs,
            cheapest,
            neighbours,
            covering: sorted_covering,
            incumbent: bound,
            best: None,
            seen: HashMap::new(),
            stack: Vec::new(),
        };
        search.run(0, 0.0);
        search.best.map(|picks| (search.incumbent, picks))
    }
}

struct Search<'a> {
    problem: &'a CoverProblem,
    costs: &'a [f64],
    cheapest: Vec<f64>,
    neighbours: Vec<u64>,
    covering: Vec<Vec<usize>>,
    incumbent: f64,
    best: Option<Vec<usize>>,
    /// Cheapest accumulated cost with which each covered-mask was reached.
    seen: HashMap<u64, f64>,
    stack: Vec<usize>,
}

impl Search<'_> {
    /// Weight of a set of pairwise option-disjoint uncovered elements: every
    /// cover pays for each of them separately.
    fn lower_bound(&self, covered: u64) -> f64 {
        let mut packed = 0u64;
        let mut total = 0.0;
        let mut rest = !covered & self.problem.full();
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.neighbours[e] & packed == 0 {
                packed |= 1 << e;
                total += self.cheapest[e];
            }
        }
        total
    }

    fn run(&mut self, covered: u64, cost: f64) {
        let full = self.problem.full();
        if covered == full {
            if cost < self.incumbent {
                self.incumbent = cost;
                self.best = Some(self.stack.clone());
            }
            return;
        }
        if cost + self.lower_bound(covered) >= self.incumbent {
            return;
        }
        match self.seen.get(&covered) {
            Some(&c) if c <= cost => return,
            _ => {
                self.seen.insert(covered, cost);
            }
        }
        let pivot = Subset(!covered & full)
            .iter()
            .min_by_key(|&e| {
                self.covering[e]
                    .iter()
                    .filter(|&&o| self.problem.options[o].mask & !covered != 0)
                    .count()
            })
            .expect("uncovered element exists");
        for idx in 0..self.covering[pivot].len() {
            let oi = self.covering[pivot][idx];
            let next_cost = cost + self.costs[oi];
            if next_cost >= self.incumbent {
                // options are sorted by cost
                break;
            }
            self.stack.push(oi);
            self.run(covered | self.problem.options[oi].mask, next_cost);
            self.stack.pop();
        }
    }
}

fn single_options(f: &MonotoneFamily, candidates: &SetFamily) -> Vec<CoverOption> {
    candidates
        .sets()
        .iter()
        .map(|&a| CoverOption {
            members: vec![a],
            mask: coverage(f.minimal_sets(), a),
        })
        .collect()
}

fn orbit_options(f: &MonotoneFamily, orbits: &[Vec<Subset>]) -> Vec<CoverOption> {
    orbits
        .iter()
        .map(|orbit| CoverOption {
            members: orbit.clone(),
            mask: orbit
                .iter()
                .fold(0u64, |acc, &a| acc | coverage(f.minimal_sets(), a)),
        })
        .collect()
}

fn witness_from(problem: &CoverProblem, q: f64, cost: f64, picks: &[usize]) -> CoverWitness {
    let mut g: BTreeSet<(u32, u64)> = BTreeSet::new();
    for &oi in picks {
        for a in &problem.options[oi].members {
            g.insert(a.canonical_key());
        }
    }
    CoverWitness {
        q,
        cost,
        g: g.into_iter().map(|(_, bits)| Subset(bits)).collect(),
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::DomainError(format!("q = {q} not in [0, 1]")));
    }
    Ok(())
}

/// Minimum of `Σ_{A ∈ G} q^|A|` over all covers `G` of `F`.
pub fn min_cover_cost(f: &MonotoneFamily, q: f64, caps: &Caps) -> Result<CoverWitness> {
    check_q(q)?;
    let candidates = candidate_sets(f, caps)?;
    let problem = CoverProblem::new(f.minimal_sets().len(), single_options(f, &candidates));
    let (cost, picks) = problem
        .solve(q, f64::INFINITY)
        .expect("a cover always exists");
    Ok(witness_from(&problem, q, cost, &picks))
}

fn threshold(problem: &CoverProblem, tol: f64) -> CoverWitness {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..Q_MAX_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if problem.solve(mid, 0.5).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (cost, picks) = problem
        .solve(lo, f64::INFINITY)
        .expect("a cover always exists");
    witness_from(problem, lo, cost, &picks)
}

/// The cover threshold `q(F)` (within `tol`, from below) and a witness at it.
pub fn q_threshold(f: &MonotoneFamily, tol: f64, caps: &Caps) -> Result<CoverWitness> {
    let candidates = candidate_sets(f, caps)?;
    let problem = CoverProblem::new(f.minimal_sets().len(), single_options(f, &candidates));
    Ok(threshold(&problem, tol))
}

/// Permutations of the ground set mapping the family onto itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutomorphismGroup {
    pub n: usize,
    /// `elements[g][i]` is the image of element `i` under `g`.
    pub elements: Vec<Vec<usize>>,
}

impl AutomorphismGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Partition of `sets` into orbits; every image must lie in `sets`.
    pub fn orbits(&self, sets: &[Subset]) -> Vec<Vec<Subset>> {
        let mut orbit_of: HashMap<Subset, usize> = HashMap::new();
        let mut orbits: Vec<Vec<Subset>> = Vec::new();
        for &s in sets {
            if orbit_of.contains_key(&s) {
                continue;
            }
            let id = orbits.len();
            let mut orbit: BTreeSet<(u32, u64)> = BTreeSet::new();
            for perm in &self.elements {
                orbit.insert(s.permute(perm).canonical_key());
            }
            let members: Vec<Subset> = orbit.into_iter().map(|(_, b)| Subset(b)).collect();
            for &m in &members {
                orbit_of.insert(m, id);
            }
            orbits.push(members);
        }
        orbits
    }

    /// Map from set to orbit id for the given orbit partition.
    pub fn orbit_index(orbits: &[Vec<Subset>]) -> HashMap<Subset, usize> {
        orbits
            .iter()
            .enumerate()
            .flat_map(|(i, o)| o.iter().map(move |&s| (s, i)))
            .collect()
    }
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a ∘ b)(i) = a(b(i))
    b.iter().map(|&x| a[x]).collect()
}

/// All automorphisms by pruned backtracking over element images.
pub fn automorphisms(f: &MonotoneFamily, caps: &Caps) -> Result<AutomorphismGroup> {
    let n = f.n();
    if n > caps.aut_cap {
        return Err(Error::GroundSetTooLarge {
            n,
            cap: caps.aut_cap,
        });
    }
    let minimal = f.minimal_sets();
    let family: HashSet<Subset> = minimal.iter().copied().collect();
    // Element signature: sorted sizes of the minimal sets containing it.
    let signature: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut sizes: Vec<usize> = minimal
                .iter()
                .filter(|m| m.contains(i))
                .map(|m| m.len())
                .collect();
            sizes.sort_unstable();
            sizes
        })
        .collect();
    // Minimal sets whose largest element is i become checkable once i is mapped.
    let mut closing: Vec<Vec<Subset>> = vec![Vec::new(); n];
    for &m in minimal {
        closing[m.span() - 1].push(m);
    }

    struct Ctx<'a> {
        n: usize,
        signature: &'a [Vec<usize>],
        closing: &'a [Vec<Subset>],
        family: &'a HashSet<Subset>,
        perm: Vec<usize>,
        used: Vec<bool>,
        out: Vec<Vec<usize>>,
    }

    fn extend(ctx: &mut Ctx<'_>, i: usize) {
        if i == ctx.n {
            ctx.out.push(ctx.perm.clone());
            return;
        }
        for image in 0..ctx.n {
            if ctx.used[image] || ctx.signature[image] != ctx.signature[i] {
                continue;
            }
            ctx.perm[i] = image;
            let ok = ctx.closing[i]
                .iter()
                .all(|m| ctx.family.contains(&m.permute(&ctx.perm)));
            if ok {
                ctx.used[image] = true;
                extend(ctx, i + 1);
                ctx.used[image] = false;
            }
        }
    }

    let mut ctx = Ctx {
        n,
        signature: &signature,
        closing: &closing,
        family: &family,
        perm: vec![0; n],
        used: vec![false; n],
        out: Vec::new(),
    };
    extend(&mut ctx, 0);
    Ok(AutomorphismGroup {
        n,
        elements: ctx.out,
    })
}

/// The group generated by user-supplied permutations, each of which must
/// preserve the family.
pub fn automorphisms_from_generators(
    f: &MonotoneFamily,
    generators: &[Vec<usize>],
) -> Result<AutomorphismGroup> {
    let n = f.n();
    for (gi, g) in generators.iter().enumerate() {
        let mut sorted = g.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::Invalid {
                path: format!("generators[{gi}]"),
                message: "not a permutation of the ground set".into(),
            });
        }
        if &f.permuted(g) != f {
            return Err(Error::Invalid {
                path: format!("generators[{gi}]"),
                message: "permutation does not preserve the family".into(),
            });
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
    let mut elements = vec![identity];
    let mut frontier = 0;
    while frontier < elements.len() {
        let current = elements[frontier].clone();
        frontier += 1;
        for g in generators {
            let next = compose(g, &current);
            if seen.insert(next.clone()) {
                elements.push(next);
            }
        }
    }
    Ok(AutomorphismGroup { n, elements })
}

/// `q*(F)`: like [`q_threshold`] but `G` must be a union of orbits of the
/// automorphism group, each orbit taken whole.
pub fn q_star(f: &MonotoneFamily, tol: f64, caps: &Caps) -> Result<CoverWitness> {
    let group = automorphisms(f, caps)?;
    q_star_with_group(f, &group, tol, caps)
}

pub fn q_star_with_group(
    f: &MonotoneFamily,
    group: &AutomorphismGroup,
    tol: f64,
    caps: &Caps,
) -> Result<CoverWitness> {
    let candidates = candidate_sets(f, caps)?;
    let orbits = group.orbits(candidates.sets());
    let members: usize = orbits.iter().map(Vec::len).sum();
    if members != candidates.len() {
        return Err(Error::BadParameter(
            "group does not act on the candidate sets".into(),
        ));
    }
    let problem = CoverProblem::new(f.minimal_sets().len(), orbit_options(f, &orbits));
    Ok(threshold(&problem, tol))
}
