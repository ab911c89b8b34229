//! Mappings `T:[n] -> [n]` and the decomposition of their functional digraphs.
//!
//! The digraph of a mapping has one out-edge `(v, T(v))` per vertex, so every
//! connected component is a directed cycle with rooted labeled trees hanging
//! off the cycle vertices. [`decompose`] recovers that structure in O(n), and
//! [`extremal_stats`] ranks components and trees by size so that "largest
//! component" and "s-th largest tree" are well defined even under ties.
//!
//! Vertex ids are 1-indexed everywhere in the public API; internal scratch
//! arrays are 0-indexed.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    /// The image array was empty.
    #[error("mapping must have at least one vertex")]
    Empty,
    /// An image fell outside `[1, n]`. `position` is the 1-indexed offender.
    #[error("image {value} at position {position} is outside [1, {n}]")]
    OutOfRange {
        position: usize,
        value: i64,
        n: usize,
    },
}

/// A mapping `T:[n] -> [n]`, stored as its image array.
///
/// Any of the `n^n` image arrays is valid; nothing else is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mapping {
    n: usize,
    /// 0-indexed internally; use [`Mapping::image`] / [`Mapping::images_one_indexed`].
    #[serde(skip)]
    images: Vec<u32>,
}

impl Mapping {
    /// Validates a 1-indexed image array. Fails on an empty array or any
    /// entry outside `[1, n]` where `n` is the array length.
    pub fn from_images(raw: &[i64]) -> Result<Self, MappingError> {
        if raw.is_empty() {
            return Err(MappingError::Empty);
        }
        let n = raw.len();
        let mut images = Vec::with_capacity(n);
        for (i, &value) in raw.iter().enumerate() {
            if value < 1 || value > n as i64 {
                return Err(MappingError::OutOfRange {
                    position: i + 1,
                    value,
                    n,
                });
            }
            images.push((value - 1) as u32);
        }
        Ok(Self { n, images })
    }

    /// Builds a mapping from 0-indexed images without validation overhead in
    /// release builds. Used by the samplers, which draw in-range by construction.
    pub(crate) fn from_internal(images: Vec<u32>) -> Self {
        debug_assert!(!images.is_empty());
        debug_assert!(images.iter().all(|&w| (w as usize) < images.len()));
        Self {
            n: images.len(),
            images,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `T(v)` for 1-indexed `v`.
    pub fn image(&self, v: usize) -> usize {
        self.images[v - 1] as usize + 1
    }

    /// The image array in 1-indexed form, for serialization.
    pub fn images_one_indexed(&self) -> Vec<usize> {
        self.images.iter().map(|&w| w as usize + 1).collect()
    }

    pub(crate) fn images_internal(&self) -> &[u32] {
        &self.images
    }
}

/// A rooted labeled tree of the digraph: one cycle vertex (the root) plus the
/// non-cyclic vertices whose forward orbit enters the cycle at that root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreePart {
    /// The cycle vertex this tree hangs from (1-indexed).
    pub root: usize,
    /// Vertex count, root included.
    pub size: usize,
    /// Smallest vertex label in the tree; used for deterministic tie-breaking.
    pub min_label: usize,
    /// Sorted member list, filled only by [`Decomposition::fill_members`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<usize>>,
}

/// One connected component: a directed cycle of trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentPart {
    /// The directed cycle, starting from its smallest cyclic vertex;
    /// `T` maps each entry to the next, wrapping around.
    pub cycle: Vec<usize>,
    /// One tree per cycle vertex, in cycle order.
    pub trees: Vec<TreePart>,
    /// Total vertex count of the component.
    pub size: usize,
    /// Smallest vertex label in the component.
    pub min_label: usize,
}

/// The full cycle-of-trees decomposition of a mapping's digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    n: usize,
    pub components: Vec<ComponentPart>,
    pub cyclic_vertex_count: usize,
    /// vertex (0-indexed) -> component index.
    #[serde(skip)]
    vertex_component: Vec<u32>,
    /// vertex (0-indexed) -> global tree index (component order, cycle order).
    #[serde(skip)]
    vertex_tree: Vec<u32>,
    /// global tree index -> (component index, tree index within component).
    #[serde(skip)]
    tree_locs: Vec<(u32, u32)>,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Component index of 1-indexed vertex `v`.
    pub fn component_of(&self, v: usize) -> usize {
        self.vertex_component[v - 1] as usize
    }

    /// Global tree index of 1-indexed vertex `v`.
    pub fn tree_of(&self, v: usize) -> usize {
        self.vertex_tree[v - 1] as usize
    }

    pub fn tree_count(&self) -> usize {
        self.tree_locs.len()
    }

    pub fn tree(&self, global_index: usize) -> &TreePart {
        let (c, t) = self.tree_locs[global_index];
        &self.components[c as usize].trees[t as usize]
    }

    /// Component index of a global tree index.
    pub fn tree_component(&self, global_index: usize) -> usize {
        self.tree_locs[global_index].0 as usize
    }

    /// Iterates `(global_tree_index, component_index, &TreePart)`.
    pub fn trees(&self) -> impl Iterator<Item = (usize, usize, &TreePart)> {
        self.tree_locs
            .iter()
            .enumerate()
            .map(move |(g, &(c, t))| (g, c as usize, &self.components[c as usize].trees[t as usize]))
    }

    /// Populates every tree's sorted member list in one O(n) pass.
    pub fn fill_members(&mut self) {
        for comp in &mut self.components {
            for tree in &mut comp.trees {
                tree.members = Some(Vec::with_capacity(tree.size));
            }
        }
        for v0 in 0..self.n {
            let (c, t) = self.tree_locs[self.vertex_tree[v0] as usize];
            self.components[c as usize].trees[t as usize]
                .members
                .as_mut()
                .unwrap()
                .push(v0 + 1);
        }
    }
}

/// Decomposes the functional digraph of `mapping` into components, cycles and
/// rooted trees.
///
/// Cyclic vertices are found by repeatedly peeling in-degree-0 vertices; each
/// non-cyclic vertex is then attached to the tree of the first cyclic vertex
/// on its forward orbit via one reverse traversal from the cycle. O(n) time
/// and space, no per-vertex orbit walks.
pub fn decompose(mapping: &Mapping) -> Decomposition {
    let n = mapping.n();
    let img = mapping.images_internal();

    let mut indeg = vec![0u32; n];
    for &w in img {
        indeg[w as usize] += 1;
    }

    // Peel: `peeled` ends up holding exactly the non-cyclic vertices.
    let mut peeled: Vec<u32> = Vec::with_capacity(n);
    for v in 0..n {
        if indeg[v] == 0 {
            peeled.push(v as u32);
        }
    }
    let mut head = 0;
    while head < peeled.len() {
        let v = peeled[head] as usize;
        head += 1;
        let w = img[v] as usize;
        indeg[w] -= 1;
        if indeg[w] == 0 {
            peeled.push(w as u32);
        }
    }
    let cyclic_vertex_count = n - peeled.len();

    // CSR reverse adjacency over tree edges only (edges out of peeled vertices).
    let mut offsets = vec![0u32; n + 1];
    for &v in &peeled {
        offsets[img[v as usize] as usize + 1] += 1;
    }
    for u in 0..n {
        offsets[u + 1] += offsets[u];
    }
    let mut rev = vec![0u32; peeled.len()];
    let mut cursor: Vec<u32> = offsets[..n].to_vec();
    for &v in &peeled {
        let u = img[v as usize] as usize;
        rev[cursor[u] as usize] = v;
        cursor[u] += 1;
    }

    const UNSET: u32 = u32::MAX;
    let mut vertex_component = vec![UNSET; n];
    let mut vertex_tree = vec![UNSET; n];
    let mut components = Vec::new();
    let mut tree_locs = Vec::with_capacity(cyclic_vertex_count);
    let mut stack: Vec<u32> = Vec::new();

    // Visit components in order of their smallest cyclic vertex.
    for v in 0..n {
        if indeg[v] == 0 || vertex_component[v] != UNSET {
            continue;
        }
        let comp_idx = components.len() as u32;
        let mut cycle = Vec::new();
        let mut w = v;
        loop {
            cycle.push(w + 1);
            vertex_component[w] = comp_idx;
            w = img[w] as usize;
            if w == v {
                break;
            }
        }

        let mut trees = Vec::with_capacity(cycle.len());
        let mut comp_size = 0usize;
        let mut comp_min = usize::MAX;
        for &root1 in &cycle {
            let root = root1 - 1;
            let tree_idx = tree_locs.len() as u32;
            vertex_tree[root] = tree_idx;
            let mut size = 1usize;
            let mut min_label = root1;
            stack.push(root as u32);
            while let Some(u) = stack.pop() {
                let u = u as usize;
                for &c in &rev[offsets[u] as usize..offsets[u + 1] as usize] {
                    let cu = c as usize;
                    vertex_tree[cu] = tree_idx;
                    vertex_component[cu] = comp_idx;
                    size += 1;
                    if cu + 1 < min_label {
                        min_label = cu + 1;
                    }
                    stack.push(c);
                }
            }
            tree_locs.push((comp_idx, trees.len() as u32));
            trees.push(TreePart {
                root: root1,
                size,
                min_label,
                members: None,
            });
            comp_size += size;
            comp_min = comp_min.min(min_label);
        }
        components.push(ComponentPart {
            cycle,
            trees,
            size: comp_size,
            min_label: comp_min,
        });
    }

    debug_assert_eq!(
        components.iter().map(|c| c.size).sum::<usize>(),
        n,
        "component sizes must partition [n]"
    );

    Decomposition {
        n,
        components,
        cyclic_vertex_count,
        vertex_component,
        vertex_tree,
        tree_locs,
    }
}

/// Ranked component and tree sizes of a decomposition.
///
/// Ranking is by (size descending, smallest vertex label ascending), which is
/// a total order, so "the largest component" and "the s-th largest tree" are
/// deterministic even under ties. Size queries beyond the number of
/// components or trees return 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalStats {
    /// Component sizes, largest first.
    pub component_sizes_desc: Vec<usize>,
    /// Tree sizes across the whole digraph, largest first.
    pub tree_sizes_desc: Vec<usize>,
    /// Index (into `Decomposition::components`) of the rank-1 component.
    pub largest_component_index: usize,
    /// For each tree rank (0-based), the index of its containing component.
    pub tree_rank_component: Vec<usize>,
    /// For each tree rank (0-based), whether that tree lies in the largest component.
    pub s_in_largest: Vec<bool>,
    /// component index -> rank (0-based).
    #[serde(skip)]
    pub component_rank: Vec<u32>,
    /// global tree index -> rank (0-based).
    #[serde(skip)]
    pub tree_rank: Vec<u32>,
}

impl ExtremalStats {
    /// Size of the r-th largest component (1-indexed rank); 0 beyond the count.
    pub fn mu(&self, r: usize) -> usize {
        self.component_sizes_desc.get(r - 1).copied().unwrap_or(0)
    }

    /// Size of the s-th largest tree (1-indexed rank); 0 beyond the count.
    pub fn tau(&self, s: usize) -> usize {
        self.tree_sizes_desc.get(s - 1).copied().unwrap_or(0)
    }

    /// Whether the s-th largest tree is a subgraph of the largest component.
    /// False when fewer than `s` trees exist.
    pub fn in_largest(&self, s: usize) -> bool {
        self.s_in_largest.get(s - 1).copied().unwrap_or(false)
    }
}

/// Ranks components and trees of a decomposition by (size desc, min label asc).
pub fn extremal_stats(d: &Decomposition) -> ExtremalStats {
    let mut comp_order: Vec<u32> = (0..d.components.len() as u32).collect();
    comp_order.sort_unstable_by(|&a, &b| {
        let ca = &d.components[a as usize];
        let cb = &d.components[b as usize];
        cb.size.cmp(&ca.size).then(ca.min_label.cmp(&cb.min_label))
    });
    let component_sizes_desc: Vec<usize> = comp_order
        .iter()
        .map(|&i| d.components[i as usize].size)
        .collect();
    let largest_component_index = comp_order[0] as usize;
    let mut component_rank = vec![0u32; comp_order.len()];
    for (rank, &idx) in comp_order.iter().enumerate() {
        component_rank[idx as usize] = rank as u32;
    }

    let mut tree_order: Vec<u32> = (0..d.tree_count() as u32).collect();
    tree_order.sort_unstable_by(|&a, &b| {
        let ta = d.tree(a as usize);
        let tb = d.tree(b as usize);
        tb.size.cmp(&ta.size).then(ta.min_label.cmp(&tb.min_label))
    });
    let tree_sizes_desc: Vec<usize> = tree_order
        .iter()
        .map(|&g| d.tree(g as usize).size)
        .collect();
    let tree_rank_component: Vec<usize> = tree_order
        .iter()
        .map(|&g| d.tree_component(g as usize))
        .collect();
    let s_in_largest: Vec<bool> = tree_rank_component
        .iter()
        .map(|&c| c == largest_component_index)
        .collect();
    let mut tree_rank = vec![0u32; tree_order.len()];
    for (rank, &g) in tree_order.iter().enumerate() {
        tree_rank[g as usize] = rank as u32;
    }

    debug_assert!(
        tree_sizes_desc
            .first()
            .map_or(true, |&t| t <= component_sizes_desc[0]),
        "largest tree cannot exceed largest component"
    );

    ExtremalStats {
        component_sizes_desc,
        tree_sizes_desc,
        largest_component_index,
        tree_rank_component,
        s_in_largest,
        component_rank,
        tree_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mapping(raw: &[i64]) -> Mapping {
        Mapping::from_images(raw).unwrap()
    }

    // Independent orbit-walking oracle: v is cyclic iff walking n steps from v
    // lands on a cycle containing v; the tree root of v is the first cyclic
    // vertex on its forward orbit.
    fn naive_cyclic_and_roots(m: &Mapping) -> (Vec<bool>, Vec<usize>) {
        let n = m.n();
        let mut cyclic = vec![false; n];
        for v in 1..=n {
            let mut w = v;
            for _ in 0..n {
                w = m.image(w);
            }
            // w is now on a cycle; check whether v is on that cycle.
            let mut u = w;
            loop {
                if u == v {
                    cyclic[v - 1] = true;
                    break;
                }
                u = m.image(u);
                if u == w {
                    break;
                }
            }
        }
        let mut roots = vec![0usize; n];
        for v in 1..=n {
            let mut w = v;
            while !cyclic[w - 1] {
                w = m.image(w);
            }
            roots[v - 1] = w;
        }
        (cyclic, roots)
    }

    fn naive_component_sizes(m: &Mapping) -> Vec<usize> {
        let n = m.n();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
        for v in 1..=n {
            uf.union(v - 1, m.image(v) - 1);
        }
        let mut counts = std::collections::HashMap::new();
        for v in 0..n {
            *counts.entry(uf.find(v)).or_insert(0usize) += 1;
        }
        let mut sizes: Vec<usize> = counts.into_values().collect();
        sizes.sort_unstable();
        sizes
    }

    fn check_against_naive(m: &Mapping) {
        let d = decompose(m);
        let (cyclic, roots) = naive_cyclic_and_roots(m);
        assert_eq!(
            d.cyclic_vertex_count,
            cyclic.iter().filter(|&&c| c).count()
        );
        for v in 1..=m.n() {
            assert_eq!(d.tree(d.tree_of(v)).root, roots[v - 1], "root of {v}");
        }
        let mut sizes: Vec<usize> = d.components.iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, naive_component_sizes(m));
        // Structural invariants.
        assert_eq!(d.components.iter().map(|c| c.size).sum::<usize>(), m.n());
        assert_eq!(
            d.trees().map(|(_, _, t)| t.size).sum::<usize>(),
            m.n()
        );
        assert_eq!(d.tree_count(), d.cyclic_vertex_count);
        for c in &d.components {
            assert_eq!(c.trees.len(), c.cycle.len());
            assert!(!c.cycle.is_empty());
            for (i, &v) in c.cycle.iter().enumerate() {
                assert_eq!(m.image(v), c.cycle[(i + 1) % c.cycle.len()]);
            }
        }
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert_eq!(mapping(&[1]).n(), 1);
        assert_eq!(mapping(&[2, 1]).image(1), 2);
        assert_eq!(
            Mapping::from_images(&[3, 1]),
            Err(MappingError::OutOfRange {
                position: 1,
                value: 3,
                n: 2
            })
        );
        assert_eq!(Mapping::from_images(&[]), Err(MappingError::Empty));
        assert_eq!(
            Mapping::from_images(&[1, 0]),
            Err(MappingError::OutOfRange {
                position: 2,
                value: 0,
                n: 2
            })
        );
    }

    #[test]
    fn identity_on_four_is_four_fixed_points() {
        let d = decompose(&mapping(&[1, 2, 3, 4]));
        assert_eq!(d.components.len(), 4);
        for c in &d.components {
            assert_eq!(c.cycle.len(), 1);
            assert_eq!(c.size, 1);
            assert_eq!(c.trees[0].size, 1);
        }
    }

    #[test]
    fn two_vertex_collapse() {
        // T = (1,1): vertex 2 hangs off the loop at 1.
        let d = decompose(&mapping(&[1, 1]));
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].cycle, vec![1]);
        assert_eq!(d.components[0].trees[0].root, 1);
        assert_eq!(d.components[0].trees[0].size, 2);
    }

    #[test]
    fn three_cycle_with_attachments() {
        // T = (2,3,1,1,1): cycle (1,2,3); vertices 4, 5 attach to root 1.
        let d = decompose(&mapping(&[2, 3, 1, 1, 1]));
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].cycle, vec![1, 2, 3]);
        let sizes: Vec<usize> = d.components[0].trees.iter().map(|t| t.size).collect();
        assert_eq!(sizes, vec![3, 1, 1]);
        assert_eq!(d.tree(d.tree_of(4)).root, 1);
        assert_eq!(d.tree(d.tree_of(5)).root, 1);
    }

    #[test]
    fn extremal_stats_two_cycle() {
        // T = (2,1): one component of size 2, two trees of size 1.
        let d = decompose(&mapping(&[2, 1]));
        let st = extremal_stats(&d);
        assert_eq!(st.component_sizes_desc, vec![2]);
        assert_eq!(st.tree_sizes_desc, vec![1, 1]);
        assert!(st.in_largest(1));
        assert!(st.in_largest(2));
    }

    #[test]
    fn extremal_stats_tie_rule_prefers_smaller_label() {
        // Identity on [2]: two size-1 components; the one holding vertex 1 ranks first.
        let d = decompose(&mapping(&[1, 2]));
        let st = extremal_stats(&d);
        assert_eq!(st.component_sizes_desc, vec![1, 1]);
        assert_eq!(st.tree_sizes_desc, vec![1, 1]);
        assert_eq!(
            d.components[st.largest_component_index].min_label,
            1,
            "tie must break toward the smaller minimum label"
        );
        assert!(st.in_largest(1));
        assert!(!st.in_largest(2));
    }

    #[test]
    fn single_vertex_ranks() {
        let st = extremal_stats(&decompose(&mapping(&[1])));
        assert_eq!(st.mu(1), 1);
        assert_eq!(st.tau(1), 1);
        assert_eq!(st.tau(2), 0);
        assert_eq!(st.mu(2), 0);
        assert!(!st.in_largest(2));
    }

    #[test]
    fn exhaustive_small_n_matches_naive_oracle() {
        for n in 1..=5usize {
            let total = (n as u64).pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let images: Vec<i64> = (0..n)
                    .map(|_| {
                        let digit = (c % n as u64) as i64 + 1;
                        c /= n as u64;
                        digit
                    })
                    .collect();
                check_against_naive(&mapping(&images));
            }
        }
    }

    #[test]
    fn members_partition_and_match_sizes() {
        let mut d = decompose(&mapping(&[2, 3, 1, 1, 3, 4, 4]));
        d.fill_members();
        let mut seen = vec![false; 7];
        for (_, _, t) in d.trees() {
            let members = t.members.as_ref().unwrap();
            assert_eq!(members.len(), t.size);
            assert_eq!(
                members.iter().copied().min().unwrap(),
                t.min_label
            );
            for &v in members {
                assert!(!seen[v - 1]);
                seen[v - 1] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn decompose_is_deterministic() {
        let m = mapping(&[4, 1, 1, 2, 7, 5, 6, 3, 9, 2]);
        assert_eq!(decompose(&m), decompose(&m));
    }

    proptest! {
        #[test]
        fn random_mappings_match_naive_oracle(
            images in proptest::collection::vec(1i64..=60, 1..=60)
        ) {
            let n = images.len() as i64;
            let images: Vec<i64> = images.into_iter().map(|x| ((x - 1) % n) + 1).collect();
            check_against_naive(&mapping(&images));
        }

        #[test]
        fn relabeling_preserves_size_multisets(
            images in proptest::collection::vec(1i64..=50, 2..=50),
            perm_seed in any::<u64>()
        ) {
            let n = images.len();
            let images: Vec<i64> = images.into_iter().map(|x| ((x - 1) % n as i64) + 1).collect();
            let m = mapping(&images);

            // Fisher-Yates with a simple LCG so the permutation is reproducible.
            let mut sigma: Vec<usize> = (1..=n).collect();
            let mut state = perm_seed | 1;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                sigma.swap(i, j);
            }
            // conjugate: T'(sigma(v)) = sigma(T(v))
            let mut relabeled = vec![0i64; n];
            for v in 1..=n {
                relabeled[sigma[v - 1] - 1] = sigma[m.image(v) - 1] as i64;
            }
            let st_a = extremal_stats(&decompose(&m));
            let st_b = extremal_stats(&decompose(&mapping(&relabeled)));
            prop_assert_eq!(st_a.component_sizes_desc, st_b.component_sizes_desc);
            prop_assert_eq!(st_a.tree_sizes_desc, st_b.tree_sizes_desc);
        }

        #[test]
        fn permutations_have_unit_trees(
            perm_seed in any::<u64>(),
            n in 1usize..=40
        ) {
            let mut sigma: Vec<i64> = (1..=n as i64).collect();
            let mut state = perm_seed | 1;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                sigma.swap(i, j);
            }
            let d = decompose(&mapping(&sigma));
            for (_, _, t) in d.trees() {
                prop_assert_eq!(t.size, 1);
            }
            for c in &d.components {
                prop_assert_eq!(c.size, c.cycle.len());
            }
        }

        #[test]
        fn tau_never_exceeds_mu(
            images in proptest::collection::vec(1i64..=80, 1..=80)
        ) {
            let n = images.len() as i64;
            let images: Vec<i64> = images.into_iter().map(|x| ((x - 1) % n) + 1).collect();
            let st = extremal_stats(&decompose(&mapping(&images)));
            for s in 1..=st.tree_sizes_desc.len() {
                prop_assert!(st.tau(s) <= st.mu(1));
            }
        }
    }
}
