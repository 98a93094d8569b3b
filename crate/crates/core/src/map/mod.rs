//! Trace maps as permutation pairs `(π, α)` on half-edges.
//!
//! Half-edges are 0-based internally. Constructors taking cycles or pairs
//! from users (`build_map`) use 1-based labels.

mod canon;
mod enumerate;

pub use canon::{CanonicalCode, CONVENTION_VERSION};
pub use enumerate::{enumerate_bn, enumerate_bn_with_cap, Atlas, AtlasRecord, DEFAULT_ENUMERATION_CAP};

use crate::error::{invalid, Result};
use crate::perm::Permutation;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombMap {
    cycles: Vec<Vec<usize>>,
    alpha: Vec<usize>,
    vertex_of: Vec<usize>,
    position: Vec<usize>,
    gamma: usize,
}

/// One of the two ways to rewire two edges `{a,b}, {c,d}` with `a<b`, `c<d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchVariant {
    /// `{a,c}, {b,d}`
    A,
    /// `{a,d}, {c,b}`
    B,
}

impl CombMap {
    /// Builds a map from 0-based vertex cycles and a 0-based pairing.
    pub fn new(cycles: Vec<Vec<usize>>, alpha: Vec<usize>) -> Result<Self> {
        let m = alpha.len();
        let mut cycles: Vec<Vec<usize>> = cycles
            .into_iter()
            .map(|mut c| {
                if let Some(i) = c.iter().enumerate().min_by_key(|(_, &x)| x).map(|(i, _)| i) {
                    c.rotate_left(i);
                }
                c
            })
            .collect();
        if cycles.iter().any(|c| c.is_empty()) {
            return invalid("empty vertex cycle");
        }
        cycles.sort_by_key(|c| c[0]);
        let mut vertex_of = vec![usize::MAX; m];
        let mut position = vec![0; m];
        for (v, c) in cycles.iter().enumerate() {
            for (i, &h) in c.iter().enumerate() {
                if h >= m {
                    return invalid(format!("half-edge {} outside [1..{m}]", h + 1));
                }
                if vertex_of[h] != usize::MAX {
                    return invalid(format!("half-edge {} in two cycles", h + 1));
                }
                vertex_of[h] = v;
                position[h] = i;
            }
        }
        if let Some(h) = vertex_of.iter().position(|&v| v == usize::MAX) {
            return invalid(format!("half-edge {} not covered by cycles", h + 1));
        }
        for (h, &x) in alpha.iter().enumerate() {
            if x >= m {
                return invalid(format!("pairing sends {} outside [1..{m}]", h + 1));
            }
            if x == h {
                return invalid(format!("pairing fixes half-edge {}", h + 1));
            }
            if alpha[x] != h {
                return invalid("pairing is not an involution");
            }
        }
        let gamma = count_components(&cycles, &vertex_of, &alpha);
        Ok(CombMap { cycles, alpha, vertex_of, position, gamma })
    }

    /// Maps whose vertex `v` owns the consecutive block of `degrees[v]` half-edges.
    pub fn from_blocks(degrees: &[usize], alpha: Vec<usize>) -> Result<Self> {
        let mut cycles = Vec::with_capacity(degrees.len());
        let mut start = 0;
        for &d in degrees {
            cycles.push((start..start + d).collect());
            start += d;
        }
        if start != alpha.len() {
            return invalid("degrees do not sum to the number of half-edges");
        }
        Self::new(cycles, alpha)
    }

    pub(crate) fn with_alpha(&self, alpha: Vec<usize>) -> CombMap {
        let gamma = count_components(&self.cycles, &self.vertex_of, &alpha);
        CombMap {
            cycles: self.cycles.clone(),
            alpha,
            vertex_of: self.vertex_of.clone(),
            position: self.position.clone(),
            gamma,
        }
    }

    pub fn half_edges(&self) -> usize {
        self.alpha.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.cycles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.alpha.len() / 2
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn pairing(&self) -> Permutation {
        Permutation::from_images(self.alpha.clone()).expect("valid involution")
    }

    pub fn pi(&self) -> Permutation {
        Permutation::from_cycles(self.half_edges(), &self.cycles).expect("valid cycles")
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn position(&self, h: usize) -> usize {
        self.position[h]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.cycles[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    /// `Some(p)` when every vertex has degree `p`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        self.cycles.iter().all(|c| c.len() == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        self.gamma == 1
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.half_edges()).filter(|&h| h < self.alpha[h]).map(|h| (h, self.alpha[h])).collect()
    }

    /// Number of edges between vertices `u` and `v` (self-loops when equal).
    pub fn edges_between(&self, u: usize, v: usize) -> usize {
        self.edges()
            .into_iter()
            .filter(|&(a, b)| {
                let (x, y) = (self.vertex_of[a], self.vertex_of[b]);
                (x == u && y == v) || (x == v && y == u)
            })
            .count()
    }

    /// Component index of every vertex, numbered by first appearance.
    pub fn component_of_vertices(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &h in &self.cycles[v] {
                    let w = self.vertex_of[self.alpha[h]];
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Connected components as stand-alone maps in block layout,
    /// keeping the relative order of vertices and half-edges.
    pub fn components(&self) -> Vec<CombMap> {
        let comp = self.component_of_vertices();
        (0..self.gamma)
            .map(|c| {
                let verts: Vec<usize> = (0..self.vertex_count()).filter(|&v| comp[v] == c).collect();
                let mut new_label = vec![usize::MAX; self.half_edges()];
                let mut next = 0;
                for &v in &verts {
                    for &h in &self.cycles[v] {
                        new_label[h] = next;
                        next += 1;
                    }
                }
                let mut alpha = vec![0; next];
                for &v in &verts {
                    for &h in &self.cycles[v] {
                        alpha[new_label[h]] = new_label[self.alpha[h]];
                    }
                }
                let degrees: Vec<usize> = verts.iter().map(|&v| self.degree(v)).collect();
                CombMap::from_blocks(&degrees, alpha).expect("component of a valid map")
            })
            .collect()
    }

    /// Rewires two edges; each edge is given by either of its half-edges.
    pub fn switch(&self, e1: usize, e2: usize, variant: SwitchVariant) -> Result<CombMap> {
        let m = self.half_edges();
        if e1 >= m || e2 >= m {
            return invalid("unknown edge");
        }
        let (a, b) = ordered(e1, self.alpha[e1]);
        let (c, d) = ordered(e2, self.alpha[e2]);
        if a == c {
            return invalid("switch needs two distinct edges");
        }
        let mut alpha = self.alpha.clone();
        let (x1, x2) = match variant {
            SwitchVariant::A => ((a, c), (b, d)),
            SwitchVariant::B => ((a, d), (c, b)),
        };
        alpha[x1.0] = x1.1;
        alpha[x1.1] = x1.0;
        alpha[x2.0] = x2.1;
        alpha[x2.1] = x2.0;
        Ok(self.with_alpha(alpha))
    }

    /// Switch where the edges are given as 1-based pairs `{a,b}`, `{c,d}`.
    pub fn switch_edges(&self, e1: (usize, usize), e2: (usize, usize), variant: SwitchVariant) -> Result<CombMap> {
        for &(x, y) in &[e1, e2] {
            if x == 0 || y == 0 || x > self.half_edges() || y > self.half_edges() || self.alpha[x - 1] != y - 1 {
                return invalid(format!("{{{x},{y}}} is not an edge"));
            }
        }
        self.switch(e1.0 - 1, e2.0 - 1, variant)
    }

    /// All maps one switch away, in a fixed order (pairs of edges, then variant).
    pub fn all_switches(&self) -> Vec<CombMap> {
        let edges = self.edges();
        let mut out = Vec::with_capacity(edges.len() * edges.len());
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                for v in [SwitchVariant::A, SwitchVariant::B] {
                    out.push(self.switch(edges[i].0, edges[j].0, v).expect("edges of self"));
                }
            }
        }
        out
    }

    /// Vertex cycles as 1-based lists.
    pub fn cycles_one_based(&self) -> Vec<Vec<usize>> {
        self.cycles.iter().map(|c| c.iter().map(|x| x + 1).collect()).collect()
    }

    /// Edges as 1-based pairs.
    pub fn pairs_one_based(&self) -> Vec<(usize, usize)> {
        self.edges().into_iter().map(|(a, b)| (a + 1, b + 1)).collect()
    }

    /// Whether the map is a disjoint union of melons (two vertices joined by all their edges).
    pub fn is_melon_union(&self) -> bool {
        self.components().iter().all(|c| c.vertex_count() == 2 && c.edges_between(0, 1) == c.edge_count() && c.degree(0) == c.degree(1))
    }
}

fn ordered(x: usize, y: usize) -> (usize, usize) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

fn count_components(cycles: &[Vec<usize>], vertex_of: &[usize], alpha: &[usize]) -> usize {
    let n = cycles.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for (h, &x) in alpha.iter().enumerate() {
        let (a, b) = (find(&mut parent, vertex_of[h]), find(&mut parent, vertex_of[x]));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}

/// Builds a map from 1-based cycles and 1-based pairs.
pub fn build_map(cycles: &[Vec<usize>], pairs: &[(usize, usize)]) -> Result<CombMap> {
    let m: usize = cycles.iter().map(Vec::len).sum();
    let mut alpha = vec![usize::MAX; m];
    for &(a, b) in pairs {
        if a == 0 || b == 0 || a > m || b > m {
            return invalid(format!("pair ({a},{b}) outside [1..{m}]"));
        }
        if a == b {
            return invalid(format!("pair ({a},{b}) is a fixed point"));
        }
        if alpha[a - 1] != usize::MAX || alpha[b - 1] != usize::MAX {
            return invalid(format!("half-edge of ({a},{b}) paired twice"));
        }
        alpha[a - 1] = b - 1;
        alpha[b - 1] = a - 1;
    }
    if let Some(h) = alpha.iter().position(|&x| x == usize::MAX) {
        return invalid(format!("half-edge {} is unpaired", h + 1));
    }
    let cycles0: Vec<Vec<usize>> = cycles
        .iter()
        .map(|c| c.iter().map(|&x| x.wrapping_sub(1)).collect())
        .collect();
    if cycles.iter().flatten().any(|&x| x == 0) {
        return invalid("half-edge labels are 1-based");
    }
    CombMap::new(cycles0, alpha)
}

fn check_sigma(sigma: &Permutation, size: usize) -> Result<()> {
    if sigma.size() != size {
        return invalid(format!("permutation of size {} where {size} is needed", sigma.size()));
    }
    Ok(())
}

/// Two vertices of degree `p`, half-edge `i` of the first paired with `σ(i)` of the second.
pub fn melon(p: usize, sigma: &Permutation) -> Result<CombMap> {
    if p == 0 {
        return invalid("melon order must be positive");
    }
    check_sigma(sigma, p)?;
    let mut alpha = vec![0; 2 * p];
    for i in 0..p {
        let j = p + sigma.apply(i);
        alpha[i] = j;
        alpha[j] = i;
    }
    CombMap::from_blocks(&[p, p], alpha)
}

/// One vertex of even degree `p` with self-loops `(σ(1),σ(2)), (σ(3),σ(4)), …`.
pub fn bouquet(p: usize, sigma: &Permutation) -> Result<CombMap> {
    if p == 0 || p % 2 == 1 {
        return Err(crate::Error::Parity(format!("bouquet needs even positive order, got {p}")));
    }
    check_sigma(sigma, p)?;
    let mut alpha = vec![0; p];
    for i in (0..p).step_by(2) {
        let (a, b) = (sigma.apply(i), sigma.apply(i + 1));
        alpha[a] = b;
        alpha[b] = a;
    }
    CombMap::from_blocks(&[p], alpha)
}

/// Cyclic chain of `n` vertices of even degree `p`. The first `p/2`
/// half-edges of vertex `i` are its outputs, the last `p/2` its inputs;
/// output `j` of vertex `i` is paired with input `σ_i(j)` of vertex `i+1`.
pub fn multicycle(p: usize, n: usize, sigmas: &[Permutation]) -> Result<CombMap> {
    if p == 0 || p % 2 == 1 {
        return Err(crate::Error::Parity(format!("multicycle needs even positive order, got {p}")));
    }
    if n == 0 {
        return invalid("multicycle length must be positive");
    }
    if sigmas.len() != n {
        return invalid(format!("expected {n} permutations, got {}", sigmas.len()));
    }
    let h = p / 2;
    let mut alpha = vec![0; p * n];
    for (i, s) in sigmas.iter().enumerate() {
        check_sigma(s, h)?;
        let next = (i + 1) % n;
        for j in 0..h {
            let a = i * p + j;
            let b = next * p + h + s.apply(j);
            alpha[a] = b;
            alpha[b] = a;
        }
    }
    CombMap::from_blocks(&vec![p; n], alpha)
}

/// Multicycle with identity matchings.
pub fn multicycle_id(p: usize, n: usize) -> Result<CombMap> {
    multicycle(p, n, &vec![Permutation::identity(p / 2); n])
}

/// `2n` vertices of odd degree `p`; vertices `2i-1, 2i` share `(p+1)/2`
/// edges and vertices `2i, 2i+1` share `(p-1)/2` edges, cyclically.
pub fn odd_multicycle(p: usize, n: usize) -> Result<CombMap> {
    if p.is_multiple_of(2) {
        return Err(crate::Error::Parity(format!("odd multicycle needs odd order, got {p}")));
    }
    if n == 0 {
        return invalid("odd multicycle length must be positive");
    }
    let (big, small) = (p.div_ceil(2), (p - 1) / 2);
    let verts = 2 * n;
    let mut alpha = vec![0; p * verts];
    let mut link = |a: usize, b: usize| {
        alpha[a] = b;
        alpha[b] = a;
    };
    for i in 0..n {
        let (u, w) = (2 * i, 2 * i + 1);
        for j in 0..big {
            link(u * p + j, w * p + j);
        }
        // the tail of w feeds the tail of the next odd vertex
        let next = (2 * i + 2) % verts;
        for j in 0..small {
            link(w * p + big + j, next * p + big + j);
        }
    }
    CombMap::from_blocks(&vec![p; verts], alpha)
}

impl fmt::Display for CombMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "π=")?;
        for c in &self.cycles {
            let body: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", body.join(","))?;
        }
        write!(f, " α=")?;
        for (a, b) in self.edges() {
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        Ok(())
    }
}
