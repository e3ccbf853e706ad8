//! Monte Carlo estimation of `μ_p` and of empirical critical probabilities
//! for random graph and random hypergraph properties, with exact checkers.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graphs::{GraphSpec, AUT_VERTEX_CAP};
use crate::subset::Subset;

pub const HAMILTON_VERTEX_CAP: usize = 20;
pub const TRIANGLE_FACTOR_VERTEX_CAP: usize = 21;
pub const HYPER_MATCHING_VERTEX_CAP: usize = 24;

/// A `k`-uniform hypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph", into = "RawHypergraph")]
pub struct HypergraphSpec {
    n: usize,
    k: usize,
    edges: Vec<Subset>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<RawHypergraph> for HypergraphSpec {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<HypergraphSpec> {
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (i, e) in raw.edges.iter().enumerate() {
            let mut s = Subset::EMPTY;
            for &x in e {
                if x >= raw.n || x >= 64 {
                    return Err(Error::Invalid {
                        path: format!("edges[{i}]"),
                        message: format!("vertex {x} out of range for n = {}", raw.n),
                    });
                }
                if s.contains(x) {
                    return Err(Error::Invalid {
                        path: format!("edges[{i}]"),
                        message: format!("vertex {x} repeated"),
                    });
                }
                s = s.insert(x);
            }
            edges.push(s);
        }
        HypergraphSpec::new(raw.n, raw.k, edges)
    }
}

impl From<HypergraphSpec> for RawHypergraph {
    fn from(h: HypergraphSpec) -> RawHypergraph {
        RawHypergraph {
            n: h.n,
            k: h.k,
            edges: h.edges.iter().map(|e| e.iter().collect()).collect(),
        }
    }
}

impl HypergraphSpec {
    pub fn new<I: IntoIterator<Item = Subset>>(n: usize, k: usize, edges: I) -> Result<Self> {
        if n > 64 {
            return Err(Error::TooLarge(format!("{n} vertices exceed 64")));
        }
        if k == 0 || k > n {
            return Err(Error::BadParameter(format!(
                "uniformity k = {k} not in 1..={n}"
            )));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let path = format!("edges[{i}]");
            if e.len() != k {
                return Err(Error::Invalid {
                    path,
                    message: format!("edge has {} vertices, expected {k}", e.len()),
                });
            }
            if !e.is_subset_of(Subset::full(n)) {
                return Err(Error::Invalid {
                    path,
                    message: "vertex out of range".into(),
                });
            }
            if !seen.insert(e) {
                return Err(Error::Invalid {
                    path,
                    message: "duplicate edge".into(),
                });
            }
            out.push(e);
        }
        out.sort_by_key(|e| e.canonical_key());
        Ok(HypergraphSpec { n, k, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Subset] {
        &self.edges
    }
}

/// `k`-subsets of `{0..n-1}` in increasing bitmask order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Subset> {
    let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut next = if k == 0 || k > n {
        None
    } else {
        Some(Subset::full(k).bits())
    };
    std::iter::from_fn(move || {
        let cur = next?;
        // Gosper's hack
        let c = cur & cur.wrapping_neg();
        let r = cur.wrapping_add(c);
        next = if r == 0 || r > limit {
            None
        } else {
            let n2 = (((r ^ cur) >> 2) / c) | r;
            (n2 <= limit && n2 > cur).then_some(n2)
        };
        Some(Subset(cur))
    })
}

/// `G(n, p)`: each pair `i < j`, in lexicographic order, is an edge with
/// probability `p`.
pub fn sample_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> GraphSpec {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    GraphSpec::new(n, edges).expect("sampled edges are valid")
}

/// `H_k(n, p)`: each `k`-set is an edge with probability `p`.
pub fn sample_hypergraph<R: Rng>(
    n: usize,
    k: usize,
    p: f64,
    rng: &mut R,
) -> Result<HypergraphSpec> {
    if n > 64 {
        return Err(Error::TooLarge(format!("{n} vertices exceed 64")));
    }
    if k == 0 || k > n {
        return Err(Error::BadParameter(format!(
            "uniformity k = {k} not in 1..={n}"
        )));
    }
    let edges: Vec<Subset> = k_subsets(n, k)
        .filter(|_| rng.random::<f64>() < p)
        .collect();
    Ok(HypergraphSpec { n, k, edges })
}

/// Whether `g` contains a (not necessarily induced) copy of `h`.
pub fn has_subgraph(g: &GraphSpec, h: &GraphSpec) -> Result<bool> {
    let core = h.without_isolated();
    if core.vertices() > AUT_VERTEX_CAP {
        return Err(Error::GraphTooLarge(format!(
            "pattern has {} non-isolated vertices, cap is {AUT_VERTEX_CAP}",
            core.vertices()
        )));
    }
    if h.vertices() > g.vertices() {
        return Ok(false);
    }
    if core.edges().is_empty() {
        return Ok(true);
    }
    let gadj = g.adjacency();
    let gdeg = g.degrees();
    let hadj = core.adjacency_lists();
    let hdeg = core.degrees();
    // Map pattern vertices in an order where each (after the first of its
    // component) has an already-mapped neighbour.
    let mut order = Vec::with_capacity(core.vertices());
    let mut placed = vec![false; core.vertices()];
    while order.len() < core.vertices() {
        let next = (0..core.vertices())
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let linked = hadj[v].iter().filter(|&&u| placed[u]).count();
                (linked, hdeg[v], std::cmp::Reverse(v))
            })
            .expect("unplaced vertex");
        placed[next] = true;
        order.push(next);
    }

    struct Ctx<'a> {
        order: &'a [usize],
        hadj: &'a [Vec<usize>],
        hdeg: &'a [usize],
        gadj: &'a [Vec<bool>],
        gdeg: &'a [usize],
        map: Vec<usize>,
        used: Vec<bool>,
    }

    fn extend(ctx: &mut Ctx<'_>, depth: usize) -> bool {
        if depth == ctx.order.len() {
            return true;
        }
        let hv = ctx.order[depth];
        for gv in 0..ctx.gadj.len() {
            if ctx.used[gv] || ctx.gdeg[gv] < ctx.hdeg[hv] {
                continue;
            }
            let ok = ctx.hadj[hv]
                .iter()
                .all(|&hu| ctx.map[hu] == usize::MAX || ctx.gadj[gv][ctx.map[hu]]);
            if !ok {
                continue;
            }
            ctx.map[hv] = gv;
            ctx.used[gv] = true;
            if extend(ctx, depth + 1) {
                return true;
            }
            ctx.used[gv] = false;
            ctx.map[hv] = usize::MAX;
        }
        false
    }

    let mut ctx = Ctx {
        order: &order,
        hadj: &hadj,
        hdeg: &hdeg,
        gadj: &gadj,
        gdeg: &gdeg,
        map: vec![usize::MAX; core.vertices()],
        used: vec![false; g.vertices()],
    };
    Ok(extend(&mut ctx, 0))
}

/// Whether blocks from `by_low[v]` (blocks whose lowest vertex is `v`) can
/// partition `{0..n-1}`. Always extends by covering the lowest uncovered
/// vertex; dead ends are memoized.
fn partitionable(n: usize, by_low: &[Vec<u64>]) -> bool {
    fn go(covered: u64, full: u64, by_low: &[Vec<u64>], dead: &mut HashSet<u64>) -> bool {
        if covered == full {
            return true;
        }
        if dead.contains(&covered) {
            return false;
        }
        let v = (!covered).trailing_zeros() as usize;
        for &b in &by_low[v] {
            if b & covered == 0 && go(covered | b, full, by_low, dead) {
                return true;
            }
        }
        dead.insert(covered);
        false
    }
    go(0, Subset::full(n).bits(), by_low, &mut HashSet::new())
}

/// Blocks indexed by their lowest vertex, ignoring any that could never be
/// used because a vertex below the lowest one must be covered first.
fn index_by_low(n: usize, blocks: impl IntoIterator<Item = u64>) -> Vec<Vec<u64>> {
    let mut by_low = vec![Vec::new(); n];
    for b in blocks {
        by_low[b.trailing_zeros() as usize].push(b);
    }
    by_low
}

pub fn has_perfect_matching_hypergraph(hg: &HypergraphSpec) -> Result<bool> {
    if hg.n > HYPER_MATCHING_VERTEX_CAP {
        return Err(Error::TooLarge(format!(
            "{} vertices exceed the matching cap of {HYPER_MATCHING_VERTEX_CAP}",
            hg.n
        )));
    }
    if !hg.n.is_multiple_of(hg.k) {
        return Err(Error::NotDivisible { n: hg.n, k: hg.k });
    }
    let by_low = index_by_low(hg.n, hg.edges.iter().map(|e| e.bits()));
    Ok(partitionable(hg.n, &by_low))
}

/// Held-Karp reachability over (visited set, endpoint) from vertex 0.
pub fn has_hamilton_cycle(g: &GraphSpec) -> Result<bool> {
    let v = g.vertices();
    if v > HAMILTON_VERTEX_CAP {
        return Err(Error::TooLarge(format!(
            "{v} vertices exceed the Hamiltonicity cap of {HAMILTON_VERTEX_CAP}"
        )));
    }
    if v < 3 {
        return Ok(false);
    }
    let adj: Vec<u32> = g.adjacency_masks().iter().map(|&m| m as u32).collect();
    if adj.iter().any(|m| m.count_ones() < 2) {
        return Ok(false);
    }
    let full = (1u32 << v) - 1;
    // ends[mask] = endpoints of Hamilton paths of mask starting at 0
    let mut ends = vec![0u32; 1 << v];
    ends[1] = 1;
    for mask in 1..=full {
        if mask & 1 == 0 {
            continue;
        }
        let e = ends[mask as usize];
        if e == 0 {
            continue;
        }
        for u in Subset(e as u64).iter() {
            let mut out = adj[u] & !mask;
            while out != 0 {
                let w = out.trailing_zeros();
                out &= out - 1;
                ends[(mask | 1 << w) as usize] |= 1 << w;
            }
        }
    }
    Ok(ends[full as usize] & adj[0] != 0)
}

pub fn has_triangle_factor(g: &GraphSpec) -> Result<bool> {
    let v = g.vertices();
    if v > TRIANGLE_FACTOR_VERTEX_CAP {
        return Err(Error::TooLarge(format!(
            "{v} vertices exceed the triangle-factor cap of {TRIANGLE_FACTOR_VERTEX_CAP}"
        )));
    }
    if !v.is_multiple_of(3) {
        return Err(Error::NotDivisible { n: v, k: 3 });
    }
    let adj = g.adjacency_masks();
    let mut triangles = Vec::new();
    for a in 0..v {
        for b in Subset(adj[a] >> (a + 1) << (a + 1)).iter() {
            for c in Subset(adj[a] & adj[b] >> (b + 1) << (b + 1)).iter() {
                triangles.push(1u64 << a | 1 << b | 1 << c);
            }
        }
    }
    Ok(partitionable(v, &index_by_low(v, triangles)))
}

/// Random-structure properties available to the Monte Carlo layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Property {
    /// Holds for every sample; a calibration check.
    Always,
    /// `G(n, p)` contains the pattern.
    Subgraph {
        pattern: GraphSpec,
    },
    Hamilton,
    TriangleFactor,
    /// `H_k(n, p)` has a perfect matching.
    HyperMatching {
        k: usize,
    },
    /// `G(n, p)` has minimum degree at least `d`.
    MinDegree {
        d: usize,
    },
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Always => "always",
            Property::Subgraph { .. } => "subgraph",
            Property::Hamilton => "hamilton",
            Property::TriangleFactor => "trianglefactor",
            Property::HyperMatching { .. } => "hypermatching",
            Property::MinDegree { .. } => "mindegree",
        }
    }

    /// Rejects parameter combinations the checker cannot decide.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Property::Always | Property::MinDegree { .. } => Ok(()),
            Property::Subgraph { pattern } => {
                has_subgraph(&GraphSpec::empty(0), pattern).map(|_| ())
            }
            Property::Hamilton => has_hamilton_cycle(&GraphSpec::empty(n)).map(|_| ()),
            Property::TriangleFactor => has_triangle_factor(&GraphSpec::empty(n)).map(|_| ()),
            Property::HyperMatching { k } => {
                let hg = HypergraphSpec::new(n, *k, [])?;
                has_perfect_matching_hypergraph(&hg).map(|_| ())
            }
        }
    }

    /// Samples one structure at density `p` and tests the property.
    pub fn trial<R: Rng>(&self, n: usize, p: f64, rng: &mut R) -> Result<bool> {
        match self {
            Property::Always => Ok(true),
            Property::Subgraph { pattern } => has_subgraph(&sample_gnp(n, p, rng), pattern),
            Property::Hamilton => has_hamilton_cycle(&sample_gnp(n, p, rng)),
            Property::TriangleFactor => has_triangle_factor(&sample_gnp(n, p, rng)),
            Property::HyperMatching { k } => {
                has_perfect_matching_hypergraph(&sample_hypergraph(n, *k, p, rng)?)
            }
            Property::MinDegree { d } => Ok(sample_gnp(n, p, rng).min_degree() >= *d),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for `(seed, stream, trial)`.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let h = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ trial);
    ChaCha8Rng::seed_from_u64(h)
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let x = successes as f64;
    let z2 = z * z;
    let center = (x + z2 / 2.0) / (n + z2);
    let half = z / (n + z2) * (x * (n - x) / n + z2 / 4.0).sqrt();
    let est = x / n;
    (
        (center - half).clamp(0.0, est),
        (center + half).clamp(est, 1.0),
    )
}

/// Two-sided normal quantile for the given confidence level.
pub fn z_for_confidence(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub seed: u64,
    pub stream: u64,
}

fn count_successes(
    property: &Property,
    n: usize,
    p: f64,
    seed: u64,
    stream: u64,
    trials: std::ops::Range<u64>,
) -> Result<u64> {
    trials
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, stream, t);
            property.trial(n, p, &mut rng).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Estimates `μ_p` of a property with a 95% Wilson interval.
pub fn estimate_mu(
    property: &Property,
    n: usize,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    estimate_mu_stream(property, n, p, trials, seed, 0, 0.95)
}

pub fn estimate_mu_stream(
    property: &Property,
    n: usize,
    p: f64,
    trials: u64,
    seed: u64,
    stream: u64,
    confidence: f64,
) -> Result<MCEstimate> {
    if trials == 0 {
        return Err(Error::BadParameter("trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} not in [0, 1]")));
    }
    property.validate(n)?;
    let successes = count_successes(property, n, p, seed, stream, 0..trials)?;
    let (ci_low, ci_high) = wilson_interval(successes, trials, z_for_confidence(confidence));
    Ok(MCEstimate {
        p,
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        confidence,
        seed,
        stream,
    })
}

/// Controls for [`empirical_critical_p`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSearchOptions {
    /// Target bracket width.
    pub tol: f64,
    /// Confidence of the returned bracket. Probe `j` (from 0) spends
    /// `α·6/(π²(j+1)²)` of `α = 1 - confidence`, split evenly over its looks.
    pub confidence: f64,
    /// Trials in the first look at a probe point; doubled per look.
    pub initial_trials: u64,
    /// Trial cap per probe point.
    pub max_trials: u64,
    pub max_probes: usize,
}

impl Default for CriticalSearchOptions {
    fn default() -> Self {
        CriticalSearchOptions {
            tol: 0.01,
            confidence: 0.95,
            initial_trials: 100,
            max_trials: 100_000,
            max_probes: 200,
        }
    }
}

impl CriticalSearchOptions {
    /// Cumulative trial counts at which a probe is examined.
    pub fn looks(&self) -> Vec<u64> {
        let mut looks = Vec::new();
        let mut batch = self.initial_trials.max(1);
        let mut total = 0u64;
        while total < self.max_trials {
            total = (total + batch).min(self.max_trials);
            looks.push(total);
            batch *= 2;
        }
        looks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeOutcome {
    /// `μ_p > 1/2` with confidence: `p` lies above the critical point.
    Above,
    Below,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub outcome: ProbeOutcome,
    pub estimate: MCEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalEstimate {
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    /// False when the trial budget ran out before the bracket reached `tol`.
    pub converged: bool,
    pub seed: u64,
    pub probes: Vec<Probe>,
}

/// Error probability allotted to probe `index`; the budgets sum to
/// `1 - confidence`.
pub fn probe_error_budget(confidence: f64, index: u64) -> f64 {
    let j = (index + 1) as f64;
    (1.0 - confidence) * 6.0 / (std::f64::consts::PI.powi(2) * j * j)
}

fn probe(
    property: &Property,
    n: usize,
    p: f64,
    seed: u64,
    stream: u64,
    opts: &CriticalSearchOptions,
) -> Result<Probe> {
    let looks = opts.looks();
    let per_look = 1.0 - probe_error_budget(opts.confidence, stream) / looks.len() as f64;
    let z = z_for_confidence(per_look);
    let mut successes = 0u64;
    let mut done = 0u64;
    let mut outcome = ProbeOutcome::Ambiguous;
    let mut interval = (0.0, 1.0);
    for &target in &looks {
        successes += count_successes(property, n, p, seed, stream, done..target)?;
        done = target;
        interval = wilson_interval(successes, done, z);
        if interval.0 > 0.5 {
            outcome = ProbeOutcome::Above;
            break;
        }
        if interval.1 < 0.5 {
            outcome = ProbeOutcome::Below;
            break;
        }
    }
    Ok(Probe {
        outcome,
        estimate: MCEstimate {
            p,
            trials: done,
            successes,
            estimate: successes as f64 / done as f64,
            ci_low: interval.0,
            ci_high: interval.1,
            confidence: per_look,
            seed,
            stream,
        },
    })
}

/// Bisection for the `p` at which a monotone property has probability 1/2.
///
/// Each probe samples sequentially until its Wilson interval excludes 1/2.
/// When a probe exhausts its budget the bracket is narrowed from both sides
/// with probes a quarter-width away; if those are ambiguous too the search
/// stops and reports the residual bracket with `converged = false`.
pub fn empirical_critical_p(
    property: &Property,
    n: usize,
    opts: &CriticalSearchOptions,
    seed: u64,
) -> Result<CriticalEstimate> {
    let valid = opts.tol > 0.0 && opts.confidence > 0.0 && opts.confidence < 1.0;
    if !valid {
        return Err(Error::BadParameter(
            "tol must be positive and confidence in (0, 1)".into(),
        ));
    }
    property.validate(n)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut probes: Vec<Probe> = Vec::new();
    let mut converged = true;
    let run = |p: f64, probes: &mut Vec<Probe>| -> Result<ProbeOutcome> {
        let pr = probe(property, n, p, seed, probes.len() as u64, opts)?;
        let out = pr.outcome;
        probes.push(pr);
        Ok(out)
    };
    while hi - lo > opts.tol {
        if probes.len() >= opts.max_probes {
            converged = false;
            break;
        }
        let mid = 0.5 * (lo + hi);
        match run(mid, &mut probes)? {
            ProbeOutcome::Above => hi = mid,
            ProbeOutcome::Below => lo = mid,
            ProbeOutcome::Ambiguous => {
                let quarter = 0.25 * (hi - lo);
                let mut narrowed = false;
                let upper = mid + quarter;
                match run(upper, &mut probes)? {
                    ProbeOutcome::Above => {
                        hi = upper;
                        narrowed = true;
                    }
                    ProbeOutcome::Below => {
                        lo = upper;
                        narrowed = true;
                    }
                    ProbeOutcome::Ambiguous => {}
                }
                let lower = mid - quarter;
                if lower > lo {
                    match run(lower, &mut probes)? {
                        ProbeOutcome::Below => {
                            lo = lower;
                            narrowed = true;
                        }
                        ProbeOutcome::Above => {
                            hi = lower;
                            narrowed = true;
                        }
                        ProbeOutcome::Ambiguous => {}
                    }
                }
                if !narrowed {
                    converged = false;
                    break;
                }
            }
        }
    }
    Ok(CriticalEstimate {
        p_hat: 0.5 * (lo + hi),
        lo,
        hi,
        converged,
        seed,
        probes,
    })
}
