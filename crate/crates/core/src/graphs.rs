//! Subgraph-containment thresholds: automorphism counts, the expectation
//! threshold `p_E`, maximum density, and containment families over edge slots.

use std::collections::{BTreeSet, VecDeque};

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::cover::{self, AutomorphismGroup, CoverWitness};
use crate::error::{Error, Result};
use crate::family::MonotoneFamily;
use crate::measure::Analyzer;
use crate::subset::Subset;

/// Vertex cap for brute-force automorphism counting and `p_E`.
pub const AUT_VERTEX_CAP: usize = 10;
/// Edge cap for the spanning-subgraph enumeration in `p_E`.
pub const PE_EDGE_CAP: usize = 20;
/// Vertex cap for the max-density subset enumeration.
pub const DENSITY_VERTEX_CAP: usize = 16;

/// A simple undirected graph on vertices `0..v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct GraphSpec {
    v: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for GraphSpec {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<GraphSpec> {
        GraphSpec::new(raw.vertices, raw.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<GraphSpec> for RawGraph {
    fn from(g: GraphSpec) -> RawGraph {
        RawGraph {
            vertices: g.v,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl GraphSpec {
    /// Validates and canonicalizes: endpoints ordered, edges sorted, no loops
    /// or duplicates.
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(v: usize, edges: I) -> Result<GraphSpec> {
        let mut set = BTreeSet::new();
        for (i, (a, b)) in edges.into_iter().enumerate() {
            let path = format!("edges[{i}]");
            if a >= v || b >= v {
                return Err(Error::Invalid {
                    path,
                    message: format!("endpoint out of range for {v} vertices"),
                });
            }
            if a == b {
                return Err(Error::Invalid {
                    path,
                    message: "self-loop".into(),
                });
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::Invalid {
                    path,
                    message: "duplicate edge".into(),
                });
            }
        }
        Ok(GraphSpec {
            v,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(v: usize) -> GraphSpec {
        GraphSpec {
            v,
            edges: Vec::new(),
        }
    }

    pub fn complete(v: usize) -> GraphSpec {
        let edges = (0..v)
            .flat_map(|i| (i + 1..v).map(move |j| (i, j)))
            .collect();
        GraphSpec { v, edges }
    }

    pub fn path(v: usize) -> GraphSpec {
        GraphSpec {
            v,
            edges: (1..v).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn cycle(v: usize) -> GraphSpec {
        GraphSpec::new(v, (0..v).map(|i| (i, (i + 1) % v))).expect("cycle needs v >= 3")
    }

    pub fn star(v: usize) -> GraphSpec {
        GraphSpec {
            v,
            edges: (1..v).map(|i| (0, i)).collect(),
        }
    }

    pub fn vertices(&self) -> usize {
        self.v
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.v];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    /// Adjacency rows as bitmasks; requires `v <= 64`.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.v];
        for &(a, b) in &self.edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.v]; self.v];
        for &(a, b) in &self.edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        adj
    }

    /// Same graph with `extra` isolated vertices appended.
    pub fn padded(&self, total: usize) -> GraphSpec {
        GraphSpec {
            v: total.max(self.v),
            edges: self.edges.clone(),
        }
    }

    /// The graph induced on non-isolated vertices, relabeled in order.
    pub fn without_isolated(&self) -> GraphSpec {
        let degrees = self.degrees();
        let mut relabel = vec![usize::MAX; self.v];
        let mut next = 0;
        for (i, &d) in degrees.iter().enumerate() {
            if d > 0 {
                relabel[i] = next;
                next += 1;
            }
        }
        GraphSpec {
            v: next,
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (relabel[a], relabel[b]))
                .collect(),
        }
    }

    fn subgraph(&self, edge_mask: u64) -> GraphSpec {
        GraphSpec {
            v: self.v,
            edges: Subset(edge_mask).iter().map(|i| self.edges[i]).collect(),
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.v == 0 {
            return true;
        }
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.v];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.v];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Edge-slot index of the pair `{i, j}` in `K_n`.
pub fn edge_slot(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_slot`].
pub fn slot_pair(n: usize, slot: usize) -> (usize, usize) {
    let mut i = 0;
    let mut start = 0;
    while start + (n - i - 1) <= slot {
        start += n - i - 1;
        i += 1;
    }
    (i, i + 1 + slot - start)
}

/// Number of vertex permutations preserving the edge set.
pub fn automorphism_count(h: &GraphSpec) -> Result<u64> {
    if h.v > AUT_VERTEX_CAP {
        return Err(Error::GraphTooLarge(format!(
            "{} vertices exceed the automorphism cap of {AUT_VERTEX_CAP}",
            h.v
        )));
    }
    Ok(count_automorphisms(h))
}

fn count_automorphisms(h: &GraphSpec) -> u64 {
    // Isolated vertices permute freely among themselves.
    let isolated = h.degrees().iter().filter(|&&d| d == 0).count();
    let core = h.without_isolated();
    let adj = core.adjacency_masks();
    let deg = core.degrees();

    fn extend(i: usize, perm: &mut [usize], used: u64, adj: &[u64], deg: &[usize]) -> u64 {
        let v = adj.len();
        if i == v {
            return 1;
        }
        let mut total = 0;
        for image in 0..v {
            if used >> image & 1 == 1 || deg[image] != deg[i] {
                continue;
            }
            let consistent = (0..i).all(|j| {
                let a = adj[i] >> j & 1;
                let b = adj[image] >> perm[j] & 1;
                a == b
            });
            if consistent {
                perm[i] = image;
                total += extend(i + 1, perm, used | 1 << image, adj, deg);
            }
        }
        total
    }

    let mut perm = vec![0; core.v];
    extend(0, &mut perm, 0, &adj, &deg) * factorial(isolated)
}

/// One spanning-subgraph constraint `copies · p^|E'| ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgraphConstraint {
    pub edges: Vec<[usize; 2]>,
    pub automorphisms: u64,
    /// Labeled copies `v! / |Aut(H')|`.
    pub copies: u64,
    /// The bound `copies^(-1/|E'|)`.
    pub p_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationThresholdReport {
    pub p_e: f64,
    pub binding_subgraph: Vec<[usize; 2]>,
    pub constraints: Vec<SubgraphConstraint>,
}

/// `p_E(H)`: least `p` with `(v!/|Aut(H')|) p^|E(H')| ≥ 1` for every spanning
/// `H' ⊆ H` with at least one edge.
pub fn expectation_threshold(h: &GraphSpec) -> Result<ExpectationThresholdReport> {
    if h.v > AUT_VERTEX_CAP || h.edges.len() > PE_EDGE_CAP {
        return Err(Error::GraphTooLarge(format!(
            "p_E needs at most {AUT_VERTEX_CAP} vertices and {PE_EDGE_CAP} edges, got {} and {}",
            h.v,
            h.edges.len()
        )));
    }
    if h.edges.is_empty() {
        return Err(Error::BadParameter("graph has no edges".into()));
    }
    let vf = factorial(h.v);
    let mut constraints = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for mask in 1..(1u64 << h.edges.len()) {
        let sub = h.subgraph(mask);
        let aut = count_automorphisms(&sub);
        let copies = vf / aut;
        let p_bound = (copies as f64).powf(-1.0 / sub.edges.len() as f64);
        if p_bound > best.0 {
            best = (p_bound, constraints.len());
        }
        constraints.push(SubgraphConstraint {
            edges: sub.edges.iter().map(|&(a, b)| [a, b]).collect(),
            automorphisms: aut,
            copies,
            p_bound,
        });
    }
    Ok(ExpectationThresholdReport {
        p_e: best.0,
        binding_subgraph: constraints[best.1].edges.clone(),
        constraints,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    /// `max |E(H[W])| / |W|` as a reduced fraction `[num, den]`.
    pub density: [u64; 2],
    pub density_f64: f64,
    pub witness: Vec<usize>,
    /// Exponent `-1/m(H)` of the fixed-graph containment threshold `n^(-1/m)`.
    pub threshold_exponent: f64,
}

pub fn max_density(h: &GraphSpec) -> Result<DensityReport> {
    if h.v > DENSITY_VERTEX_CAP {
        return Err(Error::GraphTooLarge(format!(
            "{} vertices exceed the density cap of {DENSITY_VERTEX_CAP}",
            h.v
        )));
    }
    if h.edges.is_empty() {
        return Err(Error::BadParameter("graph has no edges".into()));
    }
    let adj = h.adjacency_masks();
    let mut best: Option<(Ratio<u64>, u64)> = None;
    for w in 1..(1u64 << h.v) {
        let twice: u32 = Subset(w).iter().map(|i| (adj[i] & w).count_ones()).sum();
        let e = (twice / 2) as u64;
        if e == 0 {
            continue;
        }
        let d = Ratio::new(e, w.count_ones() as u64);
        let better = match best {
            None => true,
            Some((b, bw)) => d > b || (d == b && w.count_ones() < bw.count_ones()),
        };
        if better {
            best = Some((d, w));
        }
    }
    let (d, w) = best.expect("graph has an edge");
    let f = *d.numer() as f64 / *d.denom() as f64;
    Ok(DensityReport {
        density: [*d.numer(), *d.denom()],
        density_f64: f,
        witness: Subset(w).iter().collect(),
        threshold_exponent: -1.0 / f,
    })
}

/// Injective maps of `pattern` into `K_n`, as edge-slot sets (deduplicated).
fn copies_in_complete(pattern: &GraphSpec, n: usize) -> Vec<Subset> {
    let adj = pattern.adjacency_lists();
    let v = pattern.v;
    let mut found: BTreeSet<(u32, u64)> = BTreeSet::new();

    fn extend(
        i: usize,
        v: usize,
        n: usize,
        adj: &[Vec<usize>],
        map: &mut Vec<usize>,
        used: u64,
        found: &mut BTreeSet<(u32, u64)>,
    ) {
        if i == v {
            let mut slots = Subset::EMPTY;
            for a in 0..v {
                for &b in &adj[a] {
                    if a < b {
                        slots = slots.insert(edge_slot(n, map[a], map[b]));
                    }
                }
            }
            found.insert(slots.canonical_key());
            return;
        }
        for image in 0..n {
            if used >> image & 1 == 0 {
                map.push(image);
                extend(i + 1, v, n, adj, map, used | 1 << image, found);
                map.pop();
            }
        }
    }

    extend(0, v, n, &adj, &mut Vec::new(), 0, &mut found);
    found.into_iter().map(|(_, b)| Subset(b)).collect()
}

/// Graphs on `[n]` containing a copy of `h`, as a family over the `C(n,2)`
/// edge slots.
pub fn containment_family(h: &GraphSpec, n: usize) -> Result<MonotoneFamily> {
    let slots = n * n.saturating_sub(1) / 2;
    if slots > 64 {
        return Err(Error::GraphTooLarge(format!(
            "K_{n} has {slots} edge slots, more than 64"
        )));
    }
    let core = h.without_isolated();
    if core.v > AUT_VERTEX_CAP {
        return Err(Error::GraphTooLarge(format!(
            "pattern has {} non-isolated vertices, cap is {AUT_VERTEX_CAP}",
            core.v
        )));
    }
    if h.v > n {
        return Err(Error::NoEmbedding {
            needed: h.v,
            available: n,
        });
    }
    if core.edges.is_empty() {
        return Err(Error::TrivialFamily(
            "every graph contains an edgeless pattern",
        ));
    }
    MonotoneFamily::from_sets(slots, copies_in_complete(&core, n))
}

/// Slot permutations induced by the symmetric group on `n` vertices.
pub fn vertex_symmetry_group(family: &MonotoneFamily, n: usize) -> Result<AutomorphismGroup> {
    if n < 2 {
        return Ok(AutomorphismGroup {
            n: family.n(),
            elements: vec![(0..family.n()).collect()],
        });
    }
    let induced = |vperm: &[usize]| -> Vec<usize> {
        (0..family.n())
            .map(|s| {
                let (a, b) = slot_pair(n, s);
                edge_slot(n, vperm[a], vperm[b])
            })
            .collect()
    };
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let rotate: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    cover::automorphisms_from_generators(family, &[induced(&swap), induced(&rotate)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphCoverReport {
    pub n: usize,
    pub q: f64,
    pub p_c: f64,
    /// `p_E` of the pattern padded to `n` vertices.
    pub p_e: f64,
    pub half_p_e: f64,
    pub q_over_p_e: f64,
    pub witness: CoverWitness,
    /// Optional vertex-symmetric variant.
    pub q_star: Option<f64>,
}

/// `q(H)` on `n` vertices alongside `p_E` and `p_c` of the same property.
pub fn q_of_graph(h: &GraphSpec, n: usize, tol: f64, caps: &Caps) -> Result<GraphCoverReport> {
    let family = containment_family(h, n)?;
    let witness = cover::q_threshold(&family, tol, caps)?;
    let p_e = expectation_threshold(&h.padded(n))?.p_e;
    let p_c = Analyzer::new(&family, caps)?.critical_probability(tol);
    Ok(GraphCoverReport {
        n,
        q: witness.q,
        p_c,
        p_e,
        half_p_e: p_e / 2.0,
        q_over_p_e: witness.q / p_e,
        witness,
        q_star: None,
    })
}

/// [`q_of_graph`] plus the vertex-symmetric `q*`.
pub fn q_of_graph_with_star(
    h: &GraphSpec,
    n: usize,
    tol: f64,
    caps: &Caps,
) -> Result<GraphCoverReport> {
    let mut report = q_of_graph(h, n, tol, caps)?;
    let family = containment_family(h, n)?;
    let group = vertex_symmetry_group(&family, n)?;
    report.q_star = Some(cover::q_star_with_group(&family, &group, tol, caps)?.q);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeBracket {
    pub lower: f64,
    pub upper: f64,
    pub max_degree: usize,
    pub n: usize,
}

/// `[K1·max(ln n/n, Δ/n), K2·max(ln n/n, Δ/n)]` for a tree.
pub fn tree_threshold_bracket(t: &GraphSpec, n: usize, k1: f64, k2: f64) -> Result<TreeBracket> {
    if t.v == 0 || t.edges.len() + 1 != t.v || !t.is_connected() {
        return Err(Error::NotATree(format!(
            "{} vertices, {} edges, connected = {}",
            t.v,
            t.edges.len(),
            t.is_connected()
        )));
    }
    if n < 2 {
        return Err(Error::BadParameter("n must be at least 2".into()));
    }
    let nf = n as f64;
    let delta = t.max_degree();
    let base = (nf.ln() / nf).max(delta as f64 / nf);
    Ok(TreeBracket {
        lower: k1 * base,
        upper: k2 * base,
        max_degree: delta,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: usize, e: &[(usize, usize)]) -> GraphSpec {
        GraphSpec::new(v, e.iter().copied()).unwrap()
    }

    fn triangle() -> GraphSpec {
        g(3, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn validation() {
        assert!(GraphSpec::new(3, [(0, 3)]).is_err());
        assert!(GraphSpec::new(3, [(1, 1)]).is_err());
        assert!(GraphSpec::new(3, [(0, 1), (1, 0)]).is_err());
        assert_eq!(g(3, &[(2, 0), (1, 0)]).edges(), &[(0, 1), (0, 2)]);
    }

    #[test]
    fn slots_roundtrip() {
        for n in 2..12 {
            let mut seen = vec![false; n * (n - 1) / 2];
            for i in 0..n {
                for j in i + 1..n {
                    let s = edge_slot(n, i, j);
                    assert!(!seen[s]);
                    seen[s] = true;
                    assert_eq!(slot_pair(n, s), (i, j));
                }
            }
        }
        assert_eq!(edge_slot(4, 0, 1), 0);
        assert_eq!(edge_slot(4, 2, 3), 5);
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(automorphism_count(&triangle()).unwrap(), 6);
        assert_eq!(automorphism_count(&GraphSpec::path(3)).unwrap(), 2);
        assert_eq!(automorphism_count(&triangle().padded(4)).unwrap(), 6);
        assert_eq!(automorphism_count(&GraphSpec::cycle(5)).unwrap(), 10);
        assert_eq!(automorphism_count(&GraphSpec::empty(4)).unwrap(), 24);
        assert!(automorphism_count(&GraphSpec::empty(11)).is_err());
    }

    #[test]
    fn expectation_threshold_examples() {
        let r = expectation_threshold(&triangle().padded(4)).unwrap();
        assert!((r.p_e - 4f64.powf(-1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(r.binding_subgraph, vec![[0, 1], [0, 2], [1, 2]]);
        assert_eq!(r.constraints.len(), 7);
        let matching = g(4, &[(0, 1), (2, 3)]);
        let r = expectation_threshold(&matching).unwrap();
        assert!((r.p_e - 3f64.powf(-0.5)).abs() < 1e-12);
        let edge = g(4, &[(0, 1)]);
        assert!((expectation_threshold(&edge).unwrap().p_e - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        assert_eq!(max_density(&triangle()).unwrap().density, [1, 1]);
        assert_eq!(max_density(&g(2, &[(0, 1)])).unwrap().density, [1, 2]);
        let k4 = max_density(&GraphSpec::complete(4)).unwrap();
        assert_eq!(k4.density, [3, 2]);
        assert!((k4.threshold_exponent + 2.0 / 3.0).abs() < 1e-15);
        assert!(max_density(&GraphSpec::empty(3)).is_err());
    }

    #[test]
    fn containment_examples() {
        let edge = g(2, &[(0, 1)]);
        let f = containment_family(&edge, 3).unwrap();
        assert_eq!(f.minimal_sets().len(), 3);
        assert!(f.minimal_sets().iter().all(|m| m.len() == 1));
        let f = containment_family(&triangle(), 4).unwrap();
        assert_eq!(f.minimal_sets().len(), 4);
        assert!(f.minimal_sets().iter().all(|m| m.len() == 3));
        let matching = g(4, &[(0, 1), (2, 3)]);
        assert_eq!(
            containment_family(&matching, 4)
                .unwrap()
                .minimal_sets()
                .len(),
            3
        );
        assert!(matches!(
            containment_family(&triangle(), 2),
            Err(Error::NoEmbedding { .. })
        ));
        assert!(matches!(
            containment_family(&edge, 12),
            Err(Error::GraphTooLarge(_))
        ));
    }

    #[test]
    fn q_of_single_edge() {
        let edge = g(2, &[(0, 1)]);
        let r = q_of_graph(&edge, 3, 1e-12, &Caps::default()).unwrap();
        assert!((r.q - 1.0 / 6.0).abs() < 1e-9);
        assert!((r.p_e - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_group_on_slots() {
        let f = containment_family(&triangle(), 5).unwrap();
        let group = vertex_symmetry_group(&f, 5).unwrap();
        assert_eq!(group.order(), 120);
    }

    #[test]
    fn tree_brackets() {
        let b = tree_threshold_bracket(&GraphSpec::path(8), 8, 1.0, 1.0).unwrap();
        assert!((b.lower - (8f64.ln() / 8.0)).abs() < 1e-15);
        assert!((b.lower - 0.259_930_192_709_979_46).abs() < 1e-12);
        assert_eq!(b.max_degree, 2);
        let b = tree_threshold_bracket(&GraphSpec::star(8), 8, 1.0, 1.0).unwrap();
        assert!((b.upper - 0.875).abs() < 1e-15);
        let b = tree_threshold_bracket(&GraphSpec::path(2), 2, 1.0, 1.0).unwrap();
        assert!((b.upper - 0.5).abs() < 1e-15);
        assert!(matches!(
            tree_threshold_bracket(&triangle(), 3, 1.0, 1.0),
            Err(Error::NotATree(_))
        ));
    }
}
