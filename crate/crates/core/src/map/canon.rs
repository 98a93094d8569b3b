//! Canonical codes for rooted maps.
//!
//! Equivalence: relabelings that keep half-edge 1 and its vertex fixed
//! (no rotation there), permute the other vertices and rotate their
//! cyclic orders. The code of a connected map is the lexicographically
//! smallest relabeled pairing; the walk that builds it is forced once
//! the root is fixed, so no search is needed. Components not containing
//! the root are coded on their own and sorted.

use super::CombMap;
use crate::error::{invalid, Result};
use std::fmt;

/// Bumped whenever the equivalence or encoding changes; part of atlas cache keys.
pub const CONVENTION_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    fn from_words(words: &[usize]) -> Self {
        let mut bytes = Vec::with_capacity(2 * words.len());
        for &w in words {
            let w = u16::try_from(w).expect("map too large for a code");
            bytes.extend_from_slice(&w.to_be_bytes());
        }
        CanonicalCode(bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    fn words(&self) -> Vec<usize> {
        self.0.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as usize).collect()
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if !s.len().is_multiple_of(4) || !s.chars().all(|c| c.is_ascii_hexdigit()) {
            return invalid(format!("bad code {s:?}"));
        }
        let bytes = (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect();
        Ok(CanonicalCode(bytes))
    }

    /// The canonical representative encoded by this code.
    pub fn to_map(&self) -> Result<CombMap> {
        let w = self.words();
        let n = *w.first().ok_or_else(|| crate::Error::Validation("empty code".into()))?;
        if w.len() < 1 + n {
            return invalid("truncated code");
        }
        let degrees = w[1..1 + n].to_vec();
        CombMap::from_blocks(&degrees, w[1 + n..].to_vec())
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Relabeling of one component, walked from a chosen start.
struct Walk {
    /// (old vertex, rotation) in new order
    order: Vec<(usize, usize)>,
    alpha: Vec<usize>,
}

fn walk(map: &CombMap, start: usize, rot: usize, slot: &mut [usize]) -> Walk {
    let mut order = vec![(start, rot)];
    let mut starts = vec![0];
    slot[start] = 0;
    let mut total = map.degree(start);
    let mut alpha = Vec::with_capacity(map.half_edges());
    let mut k = 0;
    let mut h = 0;
    while h < total {
        while h >= starts[k] + map.degree(order[k].0) {
            k += 1;
        }
        let (v, r) = order[k];
        let d = map.degree(v);
        let old = map.cycles()[v][(r + h - starts[k]) % d];
        let partner = map.alpha()[old];
        let w = map.vertex_of(partner);
        if slot[w] == usize::MAX {
            slot[w] = order.len();
            order.push((w, map.position(partner)));
            starts.push(total);
            total += map.degree(w);
        }
        let kw = slot[w];
        let dw = map.degree(w);
        alpha.push(starts[kw] + (map.position(partner) + dw - order[kw].1) % dw);
        h += 1;
    }
    for &(v, _) in &order {
        slot[v] = usize::MAX;
    }
    Walk { order, alpha }
}

/// Smallest walk over all starts in the component of `v0`.
fn best_free_walk(map: &CombMap, comp_vertices: &[usize], slot: &mut [usize]) -> Walk {
    let mut best: Option<Walk> = None;
    for &v in comp_vertices {
        for r in 0..map.degree(v) {
            let w = walk(map, v, r, slot);
            let better = match &best {
                None => true,
                Some(b) => key(map, &w) < key(map, b),
            };
            if better {
                best = Some(w);
            }
        }
    }
    best.expect("non-empty component")
}

fn key(map: &CombMap, w: &Walk) -> (Vec<usize>, Vec<usize>) {
    (w.alpha.clone(), w.order.iter().map(|&(v, _)| map.degree(v)).collect())
}

fn assemble(map: &CombMap, walks: Vec<Walk>) -> (CanonicalCode, CombMap) {
    let mut degrees = Vec::new();
    let mut alpha = Vec::with_capacity(map.half_edges());
    let mut offset = 0;
    for w in walks {
        degrees.extend(w.order.iter().map(|&(v, _)| map.degree(v)));
        alpha.extend(w.alpha.iter().map(|x| x + offset));
        offset += w.alpha.len();
    }
    let mut words = vec![degrees.len()];
    words.extend(&degrees);
    words.extend(&alpha);
    let canon = CombMap::from_blocks(&degrees, alpha).expect("relabeling of a valid map");
    (CanonicalCode::from_words(&words), canon)
}

fn component_lists(map: &CombMap) -> Vec<Vec<usize>> {
    let comp = map.component_of_vertices();
    let mut lists = vec![Vec::new(); map.gamma()];
    for (v, &c) in comp.iter().enumerate() {
        lists[c].push(v);
    }
    lists
}

impl CombMap {
    /// Code and canonical representative under the rooted convention.
    pub fn canonical(&self) -> (CanonicalCode, CombMap) {
        let mut slot = vec![usize::MAX; self.vertex_count()];
        let lists = component_lists(self);
        let root = walk(self, 0, 0, &mut slot);
        let mut rest: Vec<Walk> = lists[1..].iter().map(|l| best_free_walk(self, l, &mut slot)).collect();
        rest.sort_by_cached_key(|w| key(self, w));
        let mut walks = vec![root];
        walks.extend(rest);
        assemble(self, walks)
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        self.canonical().0
    }

    /// Code up to every relabeling, the root included.
    pub fn free_code(&self) -> CanonicalCode {
        let mut slot = vec![usize::MAX; self.vertex_count()];
        let mut walks: Vec<Walk> = component_lists(self).iter().map(|l| best_free_walk(self, l, &mut slot)).collect();
        walks.sort_by_cached_key(|w| key(self, w));
        assemble(self, walks).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{bouquet, build_map, melon};
    use crate::perm::Permutation;
    use proptest::prelude::*;

    /// Applies a relabeling from the equivalence group: `vperm` reorders the
    /// non-root vertices, `rots` rotates them.
    fn conjugate(map: &CombMap, vperm: &[usize], rots: &[usize]) -> CombMap {
        let n = map.vertex_count();
        let degs = map.degrees();
        let mut new_vertex = vec![0; n];
        new_vertex[1..].copy_from_slice(vperm);
        let new_degs: Vec<usize> = {
            let mut d = vec![0; n];
            for v in 0..n {
                d[new_vertex[v]] = degs[v];
            }
            d
        };
        let mut starts = vec![0; n];
        for v in 1..n {
            starts[v] = starts[v - 1] + new_degs[v - 1];
        }
        let label = |h: usize| {
            let v = map.vertex_of(h);
            let r = if v == 0 { 0 } else { rots[v] };
            starts[new_vertex[v]] + (map.position(h) + degs[v] - r) % degs[v]
        };
        let mut alpha = vec![0; map.half_edges()];
        for h in 0..map.half_edges() {
            alpha[label(h)] = label(map.alpha()[h]);
        }
        CombMap::from_blocks(&new_degs, alpha).unwrap()
    }

    fn orbit_min(map: &CombMap) -> Vec<usize> {
        let n = map.vertex_count();
        let p = map.degree(0);
        let mut best: Option<Vec<usize>> = None;
        for vp in Permutation::all(n - 1) {
            let vperm: Vec<usize> = vp.images().iter().map(|x| x + 1).collect();
            let total = p.pow((n - 1) as u32);
            for mut r in 0..total {
                let mut rots = vec![0; n];
                for v in 1..n {
                    rots[v] = r % p;
                    r /= p;
                }
                let c = conjugate(map, &vperm, &rots);
                let a = c.alpha().to_vec();
                if best.as_ref().is_none_or(|b| a < *b) {
                    best = Some(a);
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn melon_codes_coincide_for_p2() {
        let a = melon(2, &Permutation::identity(2)).unwrap();
        let b = melon(2, &Permutation::from_one_based(&[2, 1]).unwrap()).unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
    }

    #[test]
    fn bouquets_with_different_loops_differ() {
        let a = bouquet(4, &Permutation::identity(4)).unwrap();
        let b = build_map(&[vec![1, 2, 3, 4]], &[(1, 3), (2, 4)]).unwrap();
        assert_ne!(a.canonical_code(), b.canonical_code());
    }

    #[test]
    fn code_round_trips() {
        let m = melon(4, &Permutation::from_one_based(&[3, 1, 4, 2]).unwrap()).unwrap();
        let (code, canon) = m.canonical();
        assert_eq!(code.to_map().unwrap(), canon);
        assert_eq!(CanonicalCode::from_hex(&code.to_hex()).unwrap(), code);
        assert_eq!(canon.canonical_code(), code);
    }

    fn arb_connected(max_vertices: usize) -> impl Strategy<Value = CombMap> {
        (2usize..=4, 1usize..=max_vertices)
            .prop_filter("even half-edge count", |(p, n)| p * n % 2 == 0)
            .prop_flat_map(|(p, n)| (Just(p), Just(n), Just((0..p * n).collect::<Vec<_>>()).prop_shuffle()))
            .prop_filter_map("connected", |(p, n, order)| {
                let mut alpha = vec![0; p * n];
                for c in order.chunks(2) {
                    alpha[c[0]] = c[1];
                    alpha[c[1]] = c[0];
                }
                let m = CombMap::from_blocks(&vec![p; n], alpha).ok()?;
                m.is_connected().then_some(m)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn greedy_code_is_the_orbit_minimum(m in arb_connected(4)) {
            let (_, canon) = m.canonical();
            prop_assert_eq!(canon.alpha().to_vec(), orbit_min(&m));
        }

        #[test]
        fn code_is_invariant_under_the_group(m in arb_connected(4), seed in any::<u64>()) {
            let n = m.vertex_count();
            let p = m.degree(0);
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) as usize };
            let mut vperm: Vec<usize> = (1..n).collect();
            for i in (1..vperm.len()).rev() { vperm.swap(i, next() % (i + 1)); }
            let rots: Vec<usize> = (0..n).map(|_| next() % p).collect();
            let c = conjugate(&m, &vperm, &rots);
            prop_assert_eq!(c.canonical_code(), m.canonical_code());
        }
    }
}
