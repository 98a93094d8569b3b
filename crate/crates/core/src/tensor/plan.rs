//! Pairwise contraction plans for trace invariants.

use super::{permute_axes, DenseTensor};
use crate::error::{Error, Result};
use crate::map::CombMap;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// One vertex tensor with its self-loops traced out.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub vertex: usize,
    /// Leg positions joined by a self-loop.
    pub traces: Vec<(usize, usize)>,
    /// Surviving leg positions, in order.
    pub keep: Vec<usize>,
}

/// Merge of two intermediates over all the edges they share.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub left: usize,
    pub right: usize,
    /// Axis order of `left` as `[free…, shared…]`.
    pub left_perm: Vec<usize>,
    /// Axis order of `right` as `[shared…, free…]`.
    pub right_perm: Vec<usize>,
    pub free_left: usize,
    pub shared: usize,
    pub free_right: usize,
}

/// Intermediates are numbered leaves first, then one per step; the last one is the scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentPlan {
    pub leaves: Vec<Leaf>,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionPlan {
    pub components: Vec<ComponentPlan>,
    degrees: Vec<usize>,
    edges: usize,
}

impl ContractionPlan {
    /// Largest number of legs held by any tensor along the plan.
    pub fn width(&self) -> usize {
        self.components
            .iter()
            .flat_map(|c| c.leaves.iter().map(|l| l.traces.len() * 2 + l.keep.len()).chain(c.steps.iter().map(|s| s.free_left + s.free_right)))
            .max()
            .unwrap_or(0)
    }

    /// Entries of the largest intermediate, inputs included.
    pub fn peak_entries(&self, n: usize) -> f64 {
        (n as f64).powi(self.width() as i32)
    }

    /// Multiply-adds spent in traces and pairwise merges.
    pub fn flops(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.components
            .iter()
            .map(|c| {
                let traces: f64 = c.leaves.iter().filter(|l| !l.traces.is_empty()).map(|l| nf.powi((l.traces.len() * 2 + l.keep.len()) as i32)).sum();
                let merges: f64 = c.steps.iter().map(|s| nf.powi((s.free_left + s.shared + s.free_right) as i32)).sum();
                traces + merges
            })
            .sum()
    }

    /// Multiply-adds of the nested loop over all edge indices.
    pub fn naive_flops(&self, n: usize) -> f64 {
        (self.degrees.len().saturating_sub(1).max(1) as f64) * (n as f64).powi(self.edges as i32)
    }

    /// `N^{-γ} Σ_i Π_v T_v(i)`.
    pub fn execute(&self, tensors: &[&DenseTensor]) -> Result<f64> {
        check_inputs(&self.degrees, tensors)?;
        let n = tensors.first().map_or(1, |t| t.dim());
        let mut total = 1.0;
        for comp in &self.components {
            total *= execute_component(comp, tensors, n) / n as f64;
        }
        Ok(total)
    }
}

fn check_inputs(degrees: &[usize], tensors: &[&DenseTensor]) -> Result<()> {
    if tensors.len() != degrees.len() {
        return Err(Error::Validation(format!("{} vertices but {} tensors", degrees.len(), tensors.len())));
    }
    let n = tensors.first().map_or(1, |t| t.dim());
    for (v, (t, &d)) in tensors.iter().zip(degrees).enumerate() {
        if t.order() != d {
            return Err(Error::Validation(format!("vertex {} has degree {d} but its tensor has order {}", v + 1, t.order())));
        }
        if t.dim() != n {
            return Err(Error::Validation("tensors have different dimensions".into()));
        }
    }
    Ok(())
}

fn trace_leaf(t: &DenseTensor, leaf: &Leaf) -> Vec<f64> {
    if leaf.traces.is_empty() {
        return t.data().to_vec();
    }
    let (n, p) = (t.dim(), t.order());
    let mut out = vec![0.0; n.pow(leaf.keep.len() as u32)];
    let mut idx = vec![0; p];
    for &x in t.data() {
        if leaf.traces.iter().all(|&(a, b)| idx[a] == idx[b]) {
            let off = leaf.keep.iter().fold(0, |acc, &k| acc * n + idx[k]);
            out[off] += x;
        }
        super::odometer(&mut idx, n);
    }
    out
}

fn execute_component(comp: &ComponentPlan, tensors: &[&DenseTensor], n: usize) -> f64 {
    let mut inter: Vec<Option<Vec<f64>>> = comp.leaves.iter().map(|l| Some(trace_leaf(tensors[l.vertex], l))).collect();
    for s in &comp.steps {
        let a = inter[s.left].take().expect("intermediate used once");
        let b = inter[s.right].take().expect("intermediate used once");
        let a = permute_axes(&a, n, &s.left_perm);
        let b = permute_axes(&b, n, &s.right_perm);
        let (m, k, c) = (n.pow(s.free_left as u32), n.pow(s.shared as u32), n.pow(s.free_right as u32));
        let mut out = vec![0.0; m * c];
        // out (m × c) = a (m × k) · b (k × c), all row-major
        unsafe {
            matrixmultiply::dgemm(m, k, c, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), c as isize, 1, 0.0, out.as_mut_ptr(), c as isize, 1);
        }
        inter.push(Some(out));
    }
    let last = inter.pop().flatten().expect("component has a result");
    debug_assert_eq!(last.len(), 1);
    last[0]
}

/// Greedy plan: repeatedly merge the two intermediates sharing an edge whose
/// result has the fewest legs, ties to the lowest ids.
pub fn plan_contraction(map: &CombMap) -> ContractionPlan {
    let edge_of = |h: usize| h.min(map.alpha()[h]);
    let comp_of = map.component_of_vertices();
    let mut components = Vec::new();
    for c in 0..map.gamma() {
        let verts: Vec<usize> = (0..map.vertex_count()).filter(|&v| comp_of[v] == c).collect();
        let mut leaves = Vec::new();
        let mut legs: Vec<Option<Vec<usize>>> = Vec::new();
        for &v in &verts {
            let cyc = &map.cycles()[v];
            let mut traces = Vec::new();
            let mut keep = Vec::new();
            for (j, &h) in cyc.iter().enumerate() {
                let partner = map.alpha()[h];
                if map.vertex_of(partner) == v {
                    let pj = map.position(partner);
                    if j < pj {
                        traces.push((j, pj));
                    }
                } else {
                    keep.push(j);
                }
            }
            legs.push(Some(keep.iter().map(|&j| edge_of(cyc[j])).collect()));
            leaves.push(Leaf { vertex: v, traces, keep });
        }
        let mut steps = Vec::new();
        loop {
            let active: Vec<usize> = (0..legs.len()).filter(|&i| legs[i].is_some()).collect();
            if active.len() <= 1 {
                break;
            }
            let mut best: Option<(usize, usize, usize)> = None;
            for (x, &a) in active.iter().enumerate() {
                for &b in &active[x + 1..] {
                    let (la, lb) = (legs[a].as_ref().expect("active"), legs[b].as_ref().expect("active"));
                    let shared = la.iter().filter(|e| lb.contains(e)).count();
                    if shared == 0 {
                        continue;
                    }
                    let size = la.len() + lb.len() - 2 * shared;
                    if best.is_none_or(|(s, _, _)| size < s) {
                        best = Some((size, a, b));
                    }
                }
            }
            let (_, a, b) = best.expect("a connected component always has two adjacent intermediates");
            let la = legs[a].take().expect("active");
            let lb = legs[b].take().expect("active");
            let shared: Vec<usize> = la.iter().copied().filter(|e| lb.contains(e)).collect();
            let free_a: Vec<usize> = (0..la.len()).filter(|&i| !shared.contains(&la[i])).collect();
            let free_b: Vec<usize> = (0..lb.len()).filter(|&i| !shared.contains(&lb[i])).collect();
            let mut left_perm = free_a.clone();
            left_perm.extend(shared.iter().map(|e| la.iter().position(|x| x == e).expect("shared")));
            let mut right_perm: Vec<usize> = shared.iter().map(|e| lb.iter().position(|x| x == e).expect("shared")).collect();
            right_perm.extend(&free_b);
            let mut out: Vec<usize> = free_a.iter().map(|&i| la[i]).collect();
            out.extend(free_b.iter().map(|&i| lb[i]));
            steps.push(Step { left: a, right: b, left_perm, right_perm, free_left: free_a.len(), shared: shared.len(), free_right: free_b.len() });
            legs.push(Some(out));
        }
        components.push(ComponentPlan { leaves, steps });
    }
    ContractionPlan { components, degrees: map.degrees(), edges: map.edge_count() }
}

/// Vertex cycles and pairing.
type MapKey = (Vec<Vec<usize>>, Vec<usize>);

/// Plans keyed by the exact labeled map; plans do not depend on `N`.
#[derive(Default)]
pub struct PlanCache {
    plans: RwLock<HashMap<MapKey, Arc<ContractionPlan>>>,
}

impl PlanCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, map: &CombMap) -> Arc<ContractionPlan> {
        let key = (map.cycles().to_vec(), map.alpha().to_vec());
        if let Some(p) = self.plans.read().expect("plan lock").get(&key) {
            return p.clone();
        }
        let plan = Arc::new(plan_contraction(map));
        self.plans.write().expect("plan lock").insert(key, plan.clone());
        plan
    }

    pub fn len(&self) -> usize {
        self.plans.read().expect("plan lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Trace invariant of `map` with one tensor per vertex, via a fresh plan.
pub fn eval_trace_invariant(map: &CombMap, tensors: &[&DenseTensor]) -> Result<f64> {
    plan_contraction(map).execute(tensors)
}

/// Nested loop over every edge index; the reference for planned evaluation.
pub fn eval_naive(map: &CombMap, tensors: &[&DenseTensor]) -> Result<f64> {
    check_inputs(&map.degrees(), tensors)?;
    let n = tensors.first().map_or(1, |t| t.dim());
    let edges = map.edges();
    let mut slot = vec![0; map.half_edges()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        slot[a] = e;
        slot[b] = e;
    }
    let mut assign = vec![0; edges.len()];
    let mut total = 0.0;
    let mut idx = Vec::new();
    loop {
        let mut prod = 1.0;
        for (v, t) in tensors.iter().enumerate() {
            idx.clear();
            idx.extend(map.cycles()[v].iter().map(|&h| assign[slot[h]]));
            prod *= t.get(&idx);
        }
        total += prod;
        if !super::odometer(&mut assign, n) {
            break;
        }
    }
    Ok(total / (n as f64).powi(map.gamma() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{bouquet, build_map, enumerate_bn, melon, multicycle_id};
    use crate::perm::Permutation;
    use crate::tensor::random_orthogonal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn small_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = DenseTensor::gaussian(2, 5, &mut rng);
        let lp = build_map(&[vec![1, 2]], &[(1, 2)]).unwrap();
        let tr: f64 = (0..5).map(|i| m.get(&[i, i])).sum();
        assert!(close(eval_trace_invariant(&lp, &[&m]).unwrap(), tr / 5.0, 1e-14));
        let id = DenseTensor::identity_matrix(6);
        assert!(close(eval_trace_invariant(&melon(2, &Permutation::identity(2)).unwrap(), &[&id, &id]).unwrap(), 1.0, 1e-14));
        let n = 4;
        let e = DenseTensor::from_fn(4, n, |i| if i.iter().all(|&x| x == 0) { 1.0 } else { 0.0 }).unwrap();
        let b = bouquet(4, &Permutation::identity(4)).unwrap();
        assert!(close(eval_trace_invariant(&b, &[&e]).unwrap(), 1.0 / n as f64, 1e-14));
    }

    #[test]
    fn plan_shapes() {
        let melon_plan = plan_contraction(&melon(3, &Permutation::identity(3)).unwrap());
        assert_eq!(melon_plan.components[0].steps.len(), 1);
        let s = &melon_plan.components[0].steps[0];
        assert_eq!((s.free_left, s.free_right), (0, 0));
        let mc = plan_contraction(&multicycle_id(4, 3).unwrap());
        for n in [2, 4, 8, 16] {
            assert!(mc.flops(n) < mc.naive_flops(n));
            assert!(mc.peak_entries(n) <= (n as f64).powi(4));
        }
        assert_eq!(plan_contraction(&multicycle_id(4, 3).unwrap()), mc);
    }

    #[test]
    fn planned_equals_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, nv) in [(1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (4, 1), (4, 2), (4, 3)] {
            for map in enumerate_bn(p, nv).unwrap() {
                for n in [2, 3] {
                    let ts: Vec<DenseTensor> = (0..nv).map(|_| DenseTensor::gaussian(p, n, &mut rng)).collect();
                    let refs: Vec<&DenseTensor> = ts.iter().collect();
                    let a = eval_trace_invariant(&map, &refs).unwrap();
                    let b = eval_naive(&map, &refs).unwrap();
                    assert!(close(a, b, 1e-12), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn disconnected_maps_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let two = build_map(&[vec![1, 2], vec![3, 4], vec![5, 6]], &[(1, 3), (2, 4), (5, 6)]).unwrap();
        let ts: Vec<DenseTensor> = (0..3).map(|_| DenseTensor::gaussian(2, 4, &mut rng)).collect();
        let whole = eval_trace_invariant(&two, &[&ts[0], &ts[1], &ts[2]]).unwrap();
        let a = eval_trace_invariant(&melon(2, &Permutation::identity(2)).unwrap(), &[&ts[0], &ts[1]]).unwrap();
        let b = eval_trace_invariant(&build_map(&[vec![1, 2]], &[(1, 2)]).unwrap(), &[&ts[2]]).unwrap();
        assert!(close(whole, a * b, 1e-13));
    }

    #[test]
    fn orthogonal_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [2, 3] {
            let t = DenseTensor::gaussian(p, 6, &mut rng).symmetrize();
            let u = random_orthogonal(6, &mut rng);
            let tu = t.conjugate_orthogonal(&u).unwrap();
            for nv in 1..=3 {
                for map in enumerate_bn(p, nv).unwrap() {
                    let a = eval_trace_invariant(&map, &vec![&t; nv]).unwrap();
                    let b = eval_trace_invariant(&map, &vec![&tu; nv]).unwrap();
                    assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
                }
            }
        }
    }

    #[test]
    fn multilinear_in_each_vertex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let map = multicycle_id(2, 3).unwrap();
        let ts: Vec<DenseTensor> = (0..4).map(|_| DenseTensor::gaussian(2, 3, &mut rng)).collect();
        let mix = ts[0].scale(2.0).add(&ts[3].scale(-0.5)).unwrap();
        let lhs = eval_trace_invariant(&map, &[&mix, &ts[1], &ts[2]]).unwrap();
        let rhs = 2.0 * eval_trace_invariant(&map, &[&ts[0], &ts[1], &ts[2]]).unwrap() - 0.5 * eval_trace_invariant(&map, &[&ts[3], &ts[1], &ts[2]]).unwrap();
        assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn mismatched_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = melon(3, &Permutation::identity(3)).unwrap();
        let t3 = DenseTensor::gaussian(3, 2, &mut rng);
        let t2 = DenseTensor::gaussian(2, 2, &mut rng);
        let t3b = DenseTensor::gaussian(3, 3, &mut rng);
        assert!(eval_trace_invariant(&m, &[&t3]).is_err());
        assert!(eval_trace_invariant(&m, &[&t3, &t2]).is_err());
        assert!(eval_trace_invariant(&m, &[&t3, &t3b]).is_err());
    }
}
