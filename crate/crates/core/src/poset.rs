//! The non-crossing order on maps sharing a vertex permutation.
//!
//! `b' < b` covers when the two differ by one switch and `b'` has one more
//! component. Only down-sets are ever built.

use crate::error::{Error, Result};
use crate::map::CombMap;
use serde::Serialize;
use std::collections::HashMap;

/// Default bound on the number of nodes explored in a down-set.
pub const DEFAULT_DOWNSET_CAP: usize = 2_000_000;

/// The down-set of a map with its cover relation. Node 0 is the top.
#[derive(Clone, Debug)]
pub struct PosetView {
    pub nodes: Vec<CombMap>,
    /// `(child, parent)` pairs: child is covered by parent
    pub cover_edges: Vec<(usize, usize)>,
    pub gamma: Vec<usize>,
    above: Vec<BitSet>,
}

#[derive(Clone, Debug)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, o: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a |= b;
        }
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }
}

impl PosetView {
    pub fn build(top: &CombMap) -> Result<Self> {
        Self::build_with_cap(top, DEFAULT_DOWNSET_CAP)
    }

    pub fn build_with_cap(top: &CombMap, cap: usize) -> Result<Self> {
        let mut nodes = vec![top.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(top.alpha().to_vec(), 0);
        let mut cover_edges = Vec::new();
        let mut i = 0;
        // BFS visits nodes level by level since each cover adds one component
        while i < nodes.len() {
            let g = nodes[i].gamma();
            let mut seen_children = Vec::new();
            for child in nodes[i].all_switches() {
                if child.gamma() != g + 1 {
                    continue;
                }
                let j = match index.get(child.alpha()) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() >= cap {
                            return Err(Error::Resource(format!("down-set larger than {cap}")));
                        }
                        index.insert(child.alpha().to_vec(), nodes.len());
                        nodes.push(child);
                        nodes.len() - 1
                    }
                };
                if !seen_children.contains(&j) {
                    seen_children.push(j);
                    cover_edges.push((j, i));
                }
            }
            i += 1;
        }
        let gamma: Vec<usize> = nodes.iter().map(CombMap::gamma).collect();
        let mut parents = vec![Vec::new(); nodes.len()];
        for &(c, p) in &cover_edges {
            parents[c].push(p);
        }
        let mut above = vec![BitSet::new(nodes.len()); nodes.len()];
        // nodes are in non-decreasing γ order, so parents come first
        for c in 0..nodes.len() {
            let mut s = BitSet::new(nodes.len());
            for &p in &parents[c] {
                s.insert(p);
                s.union_with(&above[p]);
            }
            above[c] = s;
        }
        Ok(PosetView { nodes, cover_edges, gamma, above })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, map: &CombMap) -> Option<usize> {
        self.nodes.iter().position(|m| m.alpha() == map.alpha() && m.cycles() == map.cycles())
    }

    /// `nodes[a] ≤ nodes[b]`
    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.above[a].contains(b)
    }

    /// `μ(x, top)` for every node `x`.
    pub fn moebius_to_top(&self) -> Vec<i64> {
        let mut mu = vec![0i64; self.len()];
        mu[0] = 1;
        for x in 1..self.len() {
            mu[x] = -self.above[x].iter().map(|y| mu[y]).sum::<i64>();
        }
        mu
    }

    /// `μ(lower, y)` for every `y ≥ lower`, as `(y, value)` pairs.
    pub fn moebius_from(&self, lower: usize) -> Vec<(usize, i64)> {
        let mut interval: Vec<usize> = std::iter::once(lower).chain(self.above[lower].iter()).collect();
        // larger γ first: lower bound, then upwards
        interval.sort_by_key(|&y| std::cmp::Reverse(self.gamma[y]));
        let mut mu: HashMap<usize, i64> = HashMap::new();
        for &y in &interval {
            let v = if y == lower {
                1
            } else {
                -interval.iter().filter(|&&z| z != y && self.le(z, y)).map(|z| mu.get(z).copied().unwrap_or(0)).sum::<i64>()
            };
            mu.insert(y, v);
        }
        interval.into_iter().map(|y| (y, mu[&y])).collect()
    }

    /// Nodes with nothing below them.
    pub fn minimal(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.len()];
        for &(_, p) in &self.cover_edges {
            has_child[p] = true;
        }
        (0..self.len()).filter(|&i| !has_child[i]).collect()
    }

    /// Adjacency list for debugging dumps.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Node {
            id: usize,
            gamma: usize,
            pairing: Vec<(usize, usize)>,
            code: String,
            below: Vec<usize>,
        }
        let mut below = vec![Vec::new(); self.len()];
        for &(c, p) in &self.cover_edges {
            below[p].push(c);
        }
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, m)| Node { id: i, gamma: self.gamma[i], pairing: m.pairs_one_based(), code: m.canonical_code().to_hex(), below: below[i].clone() })
            .collect();
        serde_json::json!({ "cycles": self.nodes[0].cycles_one_based(), "nodes": nodes })
    }
}

/// All `b' ≤ map`, the map itself first.
pub fn down_set(map: &CombMap) -> Result<Vec<CombMap>> {
    Ok(PosetView::build(map)?.nodes)
}

/// Möbius value `μ(lower, upper)`.
pub fn moebius(lower: &CombMap, upper: &CombMap) -> Result<i64> {
    if lower.cycles() != upper.cycles() {
        return Err(Error::Domain("maps have different vertex permutations".into()));
    }
    let view = PosetView::build(upper)?;
    let l = view.index_of(lower).ok_or_else(|| Error::Domain("lower is not below upper".into()))?;
    Ok(view.moebius_from(l).into_iter().find(|&(y, _)| y == 0).map(|(_, v)| v).expect("top is above every node"))
}

pub fn minimal_elements(map: &CombMap) -> Result<Vec<CombMap>> {
    let view = PosetView::build(map)?;
    Ok(view.minimal().into_iter().map(|i| view.nodes[i].clone()).collect())
}

/// Whether some `b' ≤ map` is a disjoint union of melons.
pub fn is_melonic(map: &CombMap) -> Result<bool> {
    if map.vertex_count() % 2 == 1 {
        return Ok(false);
    }
    Ok(PosetView::build(map)?.nodes.iter().any(CombMap::is_melon_union))
}

/// Melonic test by repeatedly removing two vertices joined by `p-1`
/// edges and reconnecting their remaining ends. Only for p-regular maps.
pub fn is_melonic_by_reduction(map: &CombMap) -> bool {
    let Some(p) = map.regular_degree() else { return false };
    let n = map.vertex_count();
    // adjacency multiplicities; loops counted once per loop
    let mut adj = vec![vec![0usize; n]; n];
    for (a, b) in map.edges() {
        let (u, v) = (map.vertex_of(a), map.vertex_of(b));
        adj[u][v] += 1;
        if u != v {
            adj[v][u] += 1;
        }
    }
    let mut alive = vec![true; n];
    let mut left = n;
    while left > 0 {
        let mut progress = false;
        'search: for u in 0..n {
            if !alive[u] {
                continue;
            }
            for v in u + 1..n {
                if !alive[v] || adj[u][v] + 1 < p {
                    continue;
                }
                if adj[u][v] == p {
                    alive[u] = false;
                    alive[v] = false;
                    left -= 2;
                } else {
                    // exactly one dangling edge at u and at v
                    let x = (0..n).find(|&x| x != v && alive[x] && adj[u][x] > 0 && x != u);
                    let y = (0..n).find(|&y| y != u && alive[y] && adj[v][y] > 0 && y != v);
                    let (Some(x), Some(y)) = (x, y) else { continue };
                    adj[u][x] -= 1;
                    adj[x][u] -= 1;
                    adj[v][y] -= 1;
                    adj[y][v] -= 1;
                    adj[x][y] += 1;
                    if x != y {
                        adj[y][x] += 1;
                    }
                    alive[u] = false;
                    alive[v] = false;
                    left -= 2;
                }
                progress = true;
                break 'search;
            }
        }
        if !progress {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{build_map, enumerate_bn, melon, odd_multicycle};
    use crate::perm::Permutation;

    fn self_loop() -> CombMap {
        build_map(&[vec![1, 2]], &[(1, 2)]).unwrap()
    }

    #[test]
    fn small_down_sets() {
        assert_eq!(down_set(&self_loop()).unwrap(), vec![self_loop()]);
        let m = melon(2, &Permutation::identity(2)).unwrap();
        let ds = down_set(&m).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[1].pairs_one_based(), vec![(1, 2), (3, 4)]);
        assert_eq!(moebius(&ds[1], &m).unwrap(), -1);
        assert_eq!(moebius(&m, &m).unwrap(), 1);
        assert!(moebius(&m, &ds[1]).is_err());
        assert_eq!(minimal_elements(&m).unwrap(), vec![ds[1].clone()]);
        assert_eq!(minimal_elements(&self_loop()).unwrap(), vec![self_loop()]);
    }

    #[test]
    fn melonic_recognition() {
        for s in Permutation::all(3) {
            assert!(is_melonic(&melon(3, &s).unwrap()).unwrap());
        }
        assert!(!is_melonic(&self_loop()).unwrap());
        // the odd multicycle of length 2 reduces to two melons
        assert!(is_melonic(&odd_multicycle(3, 2).unwrap()).unwrap());
        let count = enumerate_bn(2, 4).unwrap().iter().filter(|m| is_melonic(m).unwrap()).count();
        assert_eq!(count, 1);
    }

    fn maps_up_to(max_vertices: usize) -> Vec<CombMap> {
        let mut out = Vec::new();
        for p in 1..=4 {
            for n in 1..=max_vertices {
                if p * n <= 12 {
                    out.extend(enumerate_bn(p, n).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn switches_change_gamma_by_at_most_one_and_invert() {
        for m in maps_up_to(4) {
            let sw = m.all_switches();
            for s in &sw {
                let d = s.gamma() as i64 - m.gamma() as i64;
                assert!(d.abs() <= 1);
                assert!(s.all_switches().iter().any(|b| b.alpha() == m.alpha()));
            }
        }
    }

    #[test]
    fn moebius_sum_rule_and_grading() {
        for m in maps_up_to(4) {
            let v = PosetView::build(&m).unwrap();
            for &(c, p) in &v.cover_edges {
                assert_eq!(v.gamma[c], v.gamma[p] + 1);
            }
            for lower in 0..v.len() {
                if lower == 0 {
                    continue;
                }
                let s: i64 = v.moebius_from(lower).iter().map(|&(_, x)| x).sum();
                assert_eq!(s, 0);
            }
            // column to the top agrees with the general recursion
            let col = v.moebius_to_top();
            for x in 0..v.len() {
                let direct = v.moebius_from(x).into_iter().find(|&(y, _)| y == 0).unwrap().1;
                assert_eq!(col[x], direct);
            }
        }
    }

    #[test]
    fn eulerian_maps_have_one_minimal_element() {
        for p in [2, 4] {
            for n in 1..=3 {
                for m in enumerate_bn(p, n).unwrap() {
                    assert_eq!(minimal_elements(&m).unwrap().len(), 1);
                }
            }
        }
    }

    #[test]
    fn moebius_is_bounded_by_fuss_catalan() {
        for (p, n, bound) in [(2usize, 4usize, 14i64), (4, 2, 4), (4, 3, 22)] {
            for m in enumerate_bn(p, n).unwrap() {
                let v = PosetView::build(&m).unwrap();
                assert!(v.moebius_to_top().iter().all(|x| x.abs() <= bound));
            }
        }
    }

    #[test]
    fn reduction_agrees_with_poset_search() {
        for (p, nmax) in [(2usize, 6usize), (3, 4), (4, 4)] {
            for n in (2..=nmax).step_by(2) {
                for m in enumerate_bn(p, n).unwrap() {
                    assert_eq!(is_melonic_by_reduction(&m), is_melonic(&m).unwrap(), "{m}");
                }
            }
        }
    }
}
