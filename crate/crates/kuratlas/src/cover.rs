//! Finite graph models of covered spaces: shrinking chains `T_i^k`, the
//! closed families `C_J`, and the membership sets `J_z`.
//!
//! Closure is one-step graph dilation and "open" means an arbitrary
//! vertex subset; erosion is the adjoint operation. The shrinking-chain
//! construction takes `T_i^k` to be the `(L+1−k)`-fold erosion of the
//! open `S_i`, which gives the nesting `T_i^k ⊆ closure(T_i^k) ⊆
//! T_i^{k+1} ⊆ S_i` for free and fails loudly (`CoverTooShallow`) when
//! the level-1 sets no longer cover.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("cover lacks depth {depth}: level-1 chain sets no longer cover the space")]
    CoverTooShallow { depth: usize },
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("open set index {0} unknown")]
    BadIndex(u32),
    #[error("chain depth must be at least 1")]
    BadDepth,
}

pub type VertexSet = BTreeSet<usize>;

/// Finite graph model of a topological space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSpace {
    n_vertices: usize,
    adjacency: Vec<BTreeSet<usize>>,
    /// Optional planar embedding, metadata only.
    pub coords: Option<Vec<(f64, f64)>>,
}

impl GraphSpace {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, CoverError> {
        let mut adjacency = vec![BTreeSet::new(); n_vertices];
        for &(a, b) in edges {
            if a >= n_vertices {
                return Err(CoverError::BadVertex(a));
            }
            if b >= n_vertices {
                return Err(CoverError::BadVertex(b));
            }
            if a != b {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        Ok(GraphSpace {
            n_vertices,
            adjacency,
            coords: None,
        })
    }

    /// The path graph 0 — 1 — … — (n−1).
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        GraphSpace::new(n, &edges).expect("path edges are in range")
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn all_vertices(&self) -> VertexSet {
        (0..self.n_vertices).collect()
    }

    /// One-step dilation: `A ∪ neighbors(A)`.
    pub fn closure(&self, set: &VertexSet) -> VertexSet {
        let mut out = set.clone();
        for &v in set {
            out.extend(self.adjacency[v].iter().copied());
        }
        out
    }

    /// The k-step closed ball around `v`.
    pub fn ball(&self, v: usize, k: usize) -> VertexSet {
        let mut out: VertexSet = [v].into_iter().collect();
        for _ in 0..k {
            out = self.closure(&out);
        }
        out
    }
}

/// `{v : ball_k(v) ⊆ set}` — the k-fold erosion.
pub fn erode(g: &GraphSpace, set: &VertexSet, k: usize) -> VertexSet {
    (0..g.n_vertices())
        .filter(|&v| g.ball(v, k).is_subset(set))
        .collect()
}

/// Shrinking chains `T_i^k` for `k = 1..=depth`.
#[derive(Clone, Debug)]
pub struct Chains {
    pub depth: usize,
    /// `chains[&i][k−1] = T_i^k`.
    pub per_open: BTreeMap<u32, Vec<VertexSet>>,
}

/// The closed family `C_J`, keyed by the sorted index set `J`.
pub type CFamily = BTreeMap<Vec<u32>, VertexSet>;

/// Build the chains `T_i^k := erode(S_i, depth+1−k)`; nesting
/// `closure(T_i^k) ⊆ T_i^{k+1}` holds by construction and is asserted.
/// Fails with [`CoverError::CoverTooShallow`] when `∪_i T_i^1` no longer
/// covers the vertex set.
pub fn build_chains(
    g: &GraphSpace,
    opens: &BTreeMap<u32, VertexSet>,
    depth: usize,
) -> Result<Chains, CoverError> {
    if depth == 0 {
        return Err(CoverError::BadDepth);
    }
    let mut per_open = BTreeMap::new();
    for (&i, s) in opens {
        let levels: Vec<VertexSet> = (1..=depth).map(|k| erode(g, s, depth + 1 - k)).collect();
        for k in 0..depth - 1 {
            debug_assert!(g.closure(&levels[k]).is_subset(&levels[k + 1]));
        }
        debug_assert!(levels.last().map(|t| t.is_subset(s)).unwrap_or(true));
        per_open.insert(i, levels);
    }
    let mut union = VertexSet::new();
    for levels in per_open.values() {
        union.extend(levels[0].iter().copied());
    }
    if union != g.all_vertices() {
        return Err(CoverError::CoverTooShallow { depth });
    }
    Ok(Chains { depth, per_open })
}

/// Build the closed family. With `literal_intersection = false` (the
/// default form) the complement side subtracts the union
/// `⋃_{i∉J} T_i^{|J|+1}`; the literal flag subtracts the intersection
/// instead, for side-by-side comparison. Only nonempty `C_J` are stored;
/// `|J|` ranges over `1..=depth−1` so that level `|J|+1` exists.
pub fn build_c_family(g: &GraphSpace, chains: &Chains, literal_intersection: bool) -> CFamily {
    let indices: Vec<u32> = chains.per_open.keys().copied().collect();
    let mut out = CFamily::new();
    let max_size = chains.depth.saturating_sub(1).min(indices.len());
    for size in 1..=max_size {
        for combo in combinations(&indices, size) {
            // ⋂_{j∈J} closure(T_j^{|J|})
            let mut core: Option<VertexSet> = None;
            for &j in &combo {
                let t = &chains.per_open[&j][size - 1];
                let cl = g.closure(t);
                core = Some(match core {
                    None => cl,
                    Some(acc) => acc.intersection(&cl).copied().collect(),
                });
            }
            let mut core = core.unwrap_or_default();
            // Subtract the complement side at level |J|+1.
            let others: Vec<u32> = indices
                .iter()
                .copied()
                .filter(|i| !combo.contains(i))
                .collect();
            if !others.is_empty() {
                let subtract: VertexSet = if literal_intersection {
                    let mut acc: Option<VertexSet> = None;
                    for &i in &others {
                        let t = &chains.per_open[&i][size];
                        acc = Some(match acc {
                            None => t.clone(),
                            Some(a) => a.intersection(t).copied().collect(),
                        });
                    }
                    acc.unwrap_or_default()
                } else {
                    let mut acc = VertexSet::new();
                    for &i in &others {
                        acc.extend(chains.per_open[&i][size].iter().copied());
                    }
                    acc
                };
                core = core.difference(&subtract).copied().collect();
            }
            if !core.is_empty() {
                out.insert(combo, core);
            }
        }
    }
    out
}

fn combinations(items: &[u32], size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut stack = vec![(0usize, Vec::new())];
    while let Some((start, partial)) = stack.pop() {
        if partial.len() == size {
            out.push(partial);
            continue;
        }
        for idx in (start..items.len()).rev() {
            let mut next = partial.clone();
            next.push(items[idx]);
            stack.push((idx + 1, next));
        }
    }
    out.sort();
    out
}

/// Verification report for the four cover properties.
#[derive(Clone, Debug)]
pub struct CoverReport {
    /// (i) every `C_J ⊆ ⋂_{i∈J} R_i`.
    pub containment_ok: bool,
    pub containment_failures: Vec<Vec<u32>>,
    /// (ii) local finiteness: trivially satisfied on finite models.
    pub local_finiteness_ok: bool,
    /// (iii) `C_J ∩ C_K ≠ ∅` only for nested `J, K`.
    pub nesting_ok: bool,
    pub nesting_failures: Vec<(Vec<u32>, Vec<u32>)>,
    /// (iv) `⋃_J C_J` is the whole vertex set.
    pub union_ok: bool,
    pub missing_vertices: VertexSet,
}

impl CoverReport {
    pub fn pass(&self) -> bool {
        self.containment_ok && self.local_finiteness_ok && self.nesting_ok && self.union_ok
    }
}

/// Check properties (i)–(iv) for a built family against the opens.
pub fn verify_cover_properties(
    g: &GraphSpace,
    opens: &BTreeMap<u32, VertexSet>,
    c_sets: &CFamily,
) -> CoverReport {
    let mut containment_failures = Vec::new();
    for (j_set, c) in c_sets {
        let ok = j_set
            .iter()
            .all(|i| opens.get(i).map(|r| c.is_subset(r)).unwrap_or(false));
        if !ok {
            containment_failures.push(j_set.clone());
        }
    }
    let keys: Vec<&Vec<u32>> = c_sets.keys().collect();
    let mut nesting_failures = Vec::new();
    for (a_idx, &j) in keys.iter().enumerate() {
        for &k in &keys[a_idx + 1..] {
            let j_in_k = j.iter().all(|x| k.contains(x));
            let k_in_j = k.iter().all(|x| j.contains(x));
            if j_in_k || k_in_j {
                continue;
            }
            if c_sets[j].intersection(&c_sets[k]).next().is_some() {
                nesting_failures.push((j.clone(), k.clone()));
            }
        }
    }
    let mut union = VertexSet::new();
    for c in c_sets.values() {
        union.extend(c.iter().copied());
    }
    let missing: VertexSet = g.all_vertices().difference(&union).copied().collect();
    CoverReport {
        containment_ok: containment_failures.is_empty(),
        containment_failures,
        local_finiteness_ok: true,
        nesting_ok: nesting_failures.is_empty(),
        nesting_failures,
        union_ok: missing.is_empty(),
        missing_vertices: missing,
    }
}

/// Precomputed `closure(T_i^k)` for every chain level.
struct ClosureTable {
    per_open: BTreeMap<u32, Vec<VertexSet>>,
}

impl ClosureTable {
    fn new(g: &GraphSpace, chains: &Chains) -> Self {
        let per_open = chains
            .per_open
            .iter()
            .map(|(&i, levels)| (i, levels.iter().map(|t| g.closure(t)).collect()))
            .collect();
        ClosureTable { per_open }
    }
}

fn j_of_point_with(
    chains: &Chains,
    closures: &ClosureTable,
    z: usize,
) -> Result<(Vec<u32>, bool), CoverError> {
    let indices: Vec<u32> = chains.per_open.keys().copied().collect();
    // Candidate indices: those whose deepest closure contains z at all.
    let candidates: Vec<u32> = indices
        .iter()
        .copied()
        .filter(|i| closures.per_open[i][chains.depth - 1].contains(&z))
        .collect();
    let mut j_z: BTreeSet<u32> = BTreeSet::new();
    for size in 1..=candidates.len() {
        if size > chains.depth {
            // Membership at level `size` cannot be evaluated.
            return Err(CoverError::CoverTooShallow {
                depth: chains.depth,
            });
        }
        for combo in combinations(&candidates, size) {
            let inside = combo
                .iter()
                .all(|j| closures.per_open[j][size - 1].contains(&z));
            if inside {
                j_z.extend(combo.iter().copied());
            }
        }
    }
    let j_z: Vec<u32> = j_z.into_iter().collect();
    if j_z.is_empty() || j_z.len() >= chains.depth {
        return Err(CoverError::CoverTooShallow {
            depth: chains.depth,
        });
    }
    // Verify z ∈ C_{J_z} by rebuilding that single set's membership test.
    let size = j_z.len();
    let in_core = j_z
        .iter()
        .all(|j| closures.per_open[j][size - 1].contains(&z))
        && indices
            .iter()
            .filter(|i| !j_z.contains(i))
            .all(|i| !chains.per_open[i][size].contains(&z));
    Ok((j_z, in_core))
}

/// `J_z`: the union of all index sets `J` with
/// `z ∈ ⋂_{j∈J} closure(T_j^{|J|})`, together with verification that
/// `z ∈ C_{J_z}`. Index sets larger than the available chain depth raise
/// [`CoverError::CoverTooShallow`].
pub fn j_of_point(
    g: &GraphSpace,
    chains: &Chains,
    z: usize,
) -> Result<(Vec<u32>, bool), CoverError> {
    if z >= g.n_vertices() {
        return Err(CoverError::BadVertex(z));
    }
    let closures = ClosureTable::new(g, chains);
    j_of_point_with(chains, &closures, z)
}

/// [`j_of_point`] for every vertex, sharing the closure computations.
pub fn j_of_point_all(
    g: &GraphSpace,
    chains: &Chains,
) -> Vec<Result<(Vec<u32>, bool), CoverError>> {
    let closures = ClosureTable::new(g, chains);
    (0..g.n_vertices())
        .map(|z| j_of_point_with(chains, &closures, z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: impl IntoIterator<Item = usize>) -> VertexSet {
        v.into_iter().collect()
    }

    /// The worked path example: 10 vertices, S₁ = {0..7}, S₂ = {2..9},
    /// depth 3.
    fn path_instance() -> (GraphSpace, BTreeMap<u32, VertexSet>) {
        let g = GraphSpace::path(10);
        let mut opens = BTreeMap::new();
        opens.insert(1u32, set(0..=7));
        opens.insert(2u32, set(2..=9));
        (g, opens)
    }

    #[test]
    fn erosion_on_the_path() {
        let g = GraphSpace::path(10);
        assert_eq!(erode(&g, &set(0..=7), 3), set(0..=4));
        assert_eq!(erode(&g, &g.all_vertices(), 5), g.all_vertices());
        assert_eq!(erode(&g, &VertexSet::new(), 1), VertexSet::new());
    }

    #[test]
    fn chains_on_the_path() {
        let (g, opens) = path_instance();
        let chains = build_chains(&g, &opens, 3).unwrap();
        assert_eq!(
            chains.per_open[&1],
            vec![set(0..=4), set(0..=5), set(0..=6)]
        );
        assert_eq!(
            chains.per_open[&2],
            vec![set(5..=9), set(4..=9), set(3..=9)]
        );
    }

    #[test]
    fn chains_fail_without_slack() {
        // Opens with no erosion slack: T¹ sets cannot cover.
        let g = GraphSpace::path(10);
        let mut opens = BTreeMap::new();
        opens.insert(1u32, set(0..=5));
        opens.insert(2u32, set(5..=9));
        assert!(matches!(
            build_chains(&g, &opens, 3),
            Err(CoverError::CoverTooShallow { .. })
        ));
    }

    #[test]
    fn single_open_whole_space() {
        let g = GraphSpace::path(6);
        let mut opens = BTreeMap::new();
        opens.insert(7u32, g.all_vertices());
        let chains = build_chains(&g, &opens, 3).unwrap();
        for level in &chains.per_open[&7] {
            assert_eq!(*level, g.all_vertices());
        }
        let c = build_c_family(&g, &chains, false);
        assert_eq!(c[&vec![7]], g.all_vertices());
    }

    #[test]
    fn c_family_on_the_path() {
        let (g, opens) = path_instance();
        let chains = build_chains(&g, &opens, 3).unwrap();
        let c = build_c_family(&g, &chains, false);
        assert_eq!(c[&vec![1]], set(0..=3));
        assert_eq!(c[&vec![2]], set(6..=9));
        assert_eq!(c[&vec![1, 2]], set(3..=6));
    }

    #[test]
    fn disjoint_components_have_no_joint_sets() {
        // Two path components, one open each: C_J = ∅ for |J| ≥ 2.
        let mut edges = Vec::new();
        for i in 0..4 {
            edges.push((i, i + 1));
        }
        for i in 6..10 {
            edges.push((i, i + 1));
        }
        let g = GraphSpace::new(11, &edges).unwrap();
        let mut opens = BTreeMap::new();
        opens.insert(1u32, set(0..=5));
        opens.insert(2u32, set(5..=10));
        let chains = build_chains(&g, &opens, 2).unwrap();
        let c = build_c_family(&g, &chains, false);
        assert!(!c.contains_key(&vec![1, 2]));
    }

    #[test]
    fn properties_pass_on_the_path() {
        let (g, opens) = path_instance();
        let chains = build_chains(&g, &opens, 3).unwrap();
        let c = build_c_family(&g, &chains, false);
        let report = verify_cover_properties(&g, &opens, &c);
        assert!(report.pass(), "{:?}", report);
        // C₁ ∩ C₂ = ∅, C₁ ∩ C₁₂ = {3}: nested overlap only.
        assert!(c[&vec![1]].intersection(&c[&vec![2]]).next().is_none());
        let inter: VertexSet = c[&vec![1]].intersection(&c[&vec![1, 2]]).copied().collect();
        assert_eq!(inter, set([3]));
    }

    #[test]
    fn corrupted_family_fails_properties() {
        let (g, opens) = path_instance();
        let chains = build_chains(&g, &opens, 3).unwrap();
        let mut c = build_c_family(&g, &chains, false);
        // Extend C₁ into the S₂-only region: (i) fails.
        c.get_mut(&vec![1]).unwrap().insert(9);
        let report = verify_cover_properties(&g, &opens, &c);
        assert!(!report.containment_ok);
        // Remove a vertex entirely: (iv) fails.
        let mut c2 = build_c_family(&g, &chains, false);
        c2.get_mut(&vec![2]).unwrap().remove(&9);
        let report2 = verify_cover_properties(&g, &opens, &c2);
        assert!(!report2.union_ok);
        assert!(report2.missing_vertices.contains(&9));
    }

    #[test]
    fn j_of_point_on_the_path() {
        let (g, opens) = path_instance();
        let chains = build_chains(&g, &opens, 3).unwrap();
        let (j5, ok5) = j_of_point(&g, &chains, 5).unwrap();
        assert_eq!(j5, vec![1, 2]);
        assert!(ok5);
        let (j0, ok0) = j_of_point(&g, &chains, 0).unwrap();
        assert_eq!(j0, vec![1]);
        assert!(ok0);
        let (j8, ok8) = j_of_point(&g, &chains, 8).unwrap();
        assert_eq!(j8, vec![2]);
        assert!(ok8);
    }

    #[test]
    fn literal_intersection_form_differs() {
        // With three opens the literal ⋂-form can leave vertices uncovered
        // where the ⋃-form covers; build both and compare reports.
        let g = GraphSpace::path(14);
        let mut opens = BTreeMap::new();
        opens.insert(1u32, set(0..=8));
        opens.insert(2u32, set(3..=11));
        opens.insert(3u32, set(6..=13));
        let chains = build_chains(&g, &opens, 3).unwrap();
        let union_form = build_c_family(&g, &chains, false);
        let literal_form = build_c_family(&g, &chains, true);
        let union_report = verify_cover_properties(&g, &opens, &union_form);
        assert!(union_report.pass(), "{:?}", union_report);
        let literal_report = verify_cover_properties(&g, &opens, &literal_form);
        // The literal form violates at least one property on this instance.
        assert!(!literal_report.pass(), "{:?}", literal_report);
    }
}
