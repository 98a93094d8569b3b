//! Dense real tensors with `N`-dimensional legs.

mod plan;

pub use plan::{eval_naive, eval_trace_invariant, plan_contraction, ContractionPlan, PlanCache, Step};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Row-major tensor of order `p`: the first leg is the slowest index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    p: usize,
    n: usize,
    data: Vec<f64>,
    symmetric: bool,
}

#[derive(Serialize, Deserialize)]
struct Header {
    p: usize,
    #[serde(rename = "N")]
    n: usize,
    symmetric: bool,
}

impl DenseTensor {
    pub fn new(p: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        let len = n.checked_pow(p as u32).ok_or_else(|| Error::Resource("tensor too large".into()))?;
        if data.len() != len {
            return Err(Error::Validation(format!("expected {len} entries, got {}", data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite entry".into()));
        }
        Ok(DenseTensor { p, n, data, symmetric: false })
    }

    pub fn zeros(p: usize, n: usize) -> Self {
        DenseTensor { p, n, data: vec![0.0; n.pow(p as u32)], symmetric: true }
    }

    pub fn from_fn(p: usize, n: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut idx = vec![0; p];
        let mut data = Vec::with_capacity(n.pow(p as u32));
        loop {
            data.push(f(&idx));
            if !odometer(&mut idx, n) {
                break;
            }
        }
        DenseTensor::new(p, n, data)
    }

    pub fn identity_matrix(n: usize) -> Self {
        let mut t = DenseTensor::from_fn(2, n, |i| if i[0] == i[1] { 1.0 } else { 0.0 }).expect("finite");
        t.symmetric = true;
        t
    }

    pub fn gaussian<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Self {
        let data = (0..n.pow(p as u32)).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        DenseTensor { p, n, data, symmetric: p <= 1 }
    }

    pub(crate) fn from_parts(p: usize, n: usize, data: Vec<f64>, symmetric: bool) -> Self {
        debug_assert_eq!(data.len(), n.pow(p as u32));
        DenseTensor { p, n, data, symmetric }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Whether the tensor was built symmetric (or declared so).
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Declares the tensor symmetric after checking every leg permutation.
    pub fn mark_symmetric(&mut self, tol: f64) -> Result<()> {
        for s in Permutation::all(self.p) {
            let d = self.permute_legs(&s)?.max_abs_diff(self);
            if d > tol {
                return Err(Error::Validation(format!("not symmetric: deviation {d:e}")));
            }
        }
        self.symmetric = true;
        Ok(())
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn max_abs_diff(&self, o: &DenseTensor) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseTensor { data: self.data.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    pub fn add(&self, o: &DenseTensor) -> Result<Self> {
        self.same_shape(o)?;
        Ok(DenseTensor { p: self.p, n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(), symmetric: self.symmetric && o.symmetric })
    }

    pub(crate) fn add_assign(&mut self, o: &DenseTensor) {
        self.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a += b);
        self.symmetric &= o.symmetric;
    }

    fn same_shape(&self, o: &DenseTensor) -> Result<()> {
        if self.p != o.p || self.n != o.n {
            return Err(Error::Validation(format!("shape mismatch: ({}, {}) vs ({}, {})", self.p, self.n, o.p, o.n)));
        }
        Ok(())
    }

    /// `T^σ_{i_1…i_p} = T_{i_σ(1)…i_σ(p)}`.
    pub fn permute_legs(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.size() != self.p {
            return Err(Error::Validation(format!("permutation of size {} on a tensor of order {}", sigma.size(), self.p)));
        }
        // input axis m carries output index σ(m), so output axis k reads input axis σ⁻¹(k)
        let data = permute_axes(&self.data, self.n, sigma.inverse().images());
        Ok(DenseTensor { data, ..self.clone() })
    }

    /// Average over all leg permutations.
    pub fn symmetrize(&self) -> Self {
        if self.symmetric {
            return self.clone();
        }
        let perms = Permutation::all(self.p);
        let mut acc = vec![0.0; self.data.len()];
        for s in &perms {
            for (a, x) in acc.iter_mut().zip(permute_axes(&self.data, self.n, s.images())) {
                *a += x;
            }
        }
        let k = perms.len() as f64;
        acc.iter_mut().for_each(|x| *x /= k);
        DenseTensor { p: self.p, n: self.n, data: acc, symmetric: true }
    }

    /// `(a ⊗ b)_{i j} = a_i b_j`.
    pub fn outer(&self, o: &DenseTensor) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::Validation("dimension mismatch".into()));
        }
        let mut data = Vec::with_capacity(self.data.len() * o.data.len());
        for a in &self.data {
            data.extend(o.data.iter().map(|b| a * b));
        }
        Ok(DenseTensor { p: self.p + o.p, n: self.n, data, symmetric: self.p + o.p <= 1 })
    }

    /// `a ⊗̲ b`: average of `a ⊗ b` over the placements of `a`'s legs among
    /// the combined legs. Inputs that are not symmetric get the full average
    /// over all leg permutations so the result is always symmetric.
    pub fn symmetrize_pair(&self, o: &DenseTensor) -> Result<Self> {
        let prod = self.outer(o)?;
        let (p1, p) = (self.p, self.p + o.p);
        if !(self.symmetric && o.symmetric) {
            return Ok(prod.symmetrize());
        }
        let mut acc = vec![0.0; prod.data.len()];
        let mut count = 0usize;
        for mask in 0u64..1 << p {
            if mask.count_ones() as usize != p1 {
                continue;
            }
            // legs of `a` go to the positions in `mask`, in order
            let mut src_of = Vec::with_capacity(p);
            let (mut ia, mut ib) = (0, p1);
            for k in 0..p {
                if mask >> k & 1 == 1 {
                    src_of.push(ia);
                    ia += 1;
                } else {
                    src_of.push(ib);
                    ib += 1;
                }
            }
            for (a, x) in acc.iter_mut().zip(permute_axes(&prod.data, self.n, &src_of)) {
                *a += x;
            }
            count += 1;
        }
        acc.iter_mut().for_each(|x| *x /= count as f64);
        Ok(DenseTensor { p, n: self.n, data: acc, symmetric: true })
    }

    /// `(T·U^p)_j = Σ_i T_i Π_k U_{j_k i_k}`.
    pub fn conjugate_orthogonal(&self, u: &DMatrix<f64>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() != self.n {
            return Err(Error::Validation(format!("U must be {0}×{0}", self.n)));
        }
        let n = self.n;
        // row-major copy of U
        let ur: Vec<f64> = (0..n * n).map(|k| u[(k / n, k % n)]).collect();
        let mut cur = self.data.clone();
        let mut next = vec![0.0; cur.len()];
        for leg in 0..self.p {
            let post = n.pow((self.p - leg - 1) as u32);
            let pre = cur.len() / (n * post);
            for a in 0..pre {
                let src = &cur[a * n * post..(a + 1) * n * post];
                let dst = &mut next[a * n * post..(a + 1) * n * post];
                // dst (n × post) = U (n × n) · src (n × post)
                unsafe {
                    matrixmultiply::dgemm(n, n, post, 1.0, ur.as_ptr(), n as isize, 1, src.as_ptr(), post as isize, 1, 0.0, dst.as_mut_ptr(), post as isize, 1);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(DenseTensor { p: self.p, n, data: cur, symmetric: self.symmetric })
    }

    /// JSON header line, then the entries as little-endian `f64`.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&Header { p: self.p, n: self.n, symmetric: self.symmetric })?;
        w.write_all(header.as_bytes())?;
        w.write_all(b"\n")?;
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Validation("missing header".into()))?;
        let h: Header = serde_json::from_slice(&bytes[..nl])?;
        let body = &bytes[nl + 1..];
        if body.len() % 8 != 0 {
            return Err(Error::Validation("truncated tensor body".into()));
        }
        let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let mut t = DenseTensor::new(h.p, h.n, data)?;
        t.symmetric = h.symmetric;
        Ok(t)
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Advances a base-`n` multi-index, last digit fastest. False on wrap-around.
pub(crate) fn odometer(idx: &mut [usize], n: usize) -> bool {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < n {
            return true;
        }
        idx[d] = 0;
    }
    false
}

/// Row-major axis permutation: output axis `k` is input axis `src[k]`.
pub(crate) fn permute_axes(data: &[f64], n: usize, src: &[usize]) -> Vec<f64> {
    let r = src.len();
    if src.iter().enumerate().all(|(k, &s)| k == s) {
        return data.to_vec();
    }
    let mut in_stride = vec![1usize; r];
    for k in (0..r.saturating_sub(1)).rev() {
        in_stride[k] = in_stride[k + 1] * n;
    }
    let strides: Vec<usize> = src.iter().map(|&s| in_stride[s]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; r];
    let mut off = 0usize;
    let last = strides[r - 1];
    loop {
        // innermost axis unrolled
        for i in 0..n {
            out.push(data[off + i * last]);
        }
        idx[r - 1] = n - 1;
        off += (n - 1) * last;
        let mut d = r - 1;
        loop {
            off -= idx[d] * strides[d];
            idx[d] = 0;
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            off += strides[d];
            if idx[d] < n {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn permuting_legs() {
        let t = DenseTensor::gaussian(3, 3, &mut rng());
        assert_eq!(t.permute_legs(&Permutation::identity(3)).unwrap(), t);
        let s = Permutation::from_images(vec![2, 0, 1]).unwrap();
        let u = t.permute_legs(&s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let idx = [i, j, k];
                    assert_eq!(u.get(&idx), t.get(&[idx[2], idx[0], idx[1]]));
                }
            }
        }
        let m = DenseTensor::gaussian(2, 4, &mut rng());
        let mt = m.permute_legs(&Permutation::from_images(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(mt.get(&[1, 3]), m.get(&[3, 1]));
        assert!(t.permute_legs(&Permutation::identity(2)).is_err());
    }

    #[test]
    fn symmetrized_tensors_are_symmetric() {
        let t = DenseTensor::gaussian(3, 4, &mut rng()).symmetrize();
        for s in Permutation::all(3) {
            assert!(t.permute_legs(&s).unwrap().max_abs_diff(&t) < 1e-14);
        }
    }

    #[test]
    fn pair_symmetrization() {
        let mut r = rng();
        let u = DenseTensor::gaussian(1, 5, &mut r);
        let v = DenseTensor::gaussian(1, 5, &mut r);
        let w = u.symmetrize_pair(&v).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let e = (u.data[i] * v.data[j] + u.data[j] * v.data[i]) / 2.0;
                assert!((w.get(&[i, j]) - e).abs() < 1e-15);
            }
        }
        let a = DenseTensor::gaussian(2, 3, &mut r).symmetrize();
        let aa = a.symmetrize_pair(&a).unwrap();
        assert!(aa.max_abs_diff(&a.outer(&a).unwrap().symmetrize()) < 1e-13);
        for s in Permutation::all(4) {
            assert!(aa.permute_legs(&s).unwrap().max_abs_diff(&aa) < 1e-13);
        }
        // non-symmetric halves still give a symmetric result
        let x = DenseTensor::gaussian(2, 3, &mut r);
        let xx = x.symmetrize_pair(&x).unwrap();
        for s in Permutation::all(4) {
            assert!(xx.permute_legs(&s).unwrap().max_abs_diff(&xx) < 1e-13);
        }
    }

    #[test]
    fn orthogonal_conjugation() {
        let mut r = rng();
        let m = DenseTensor::gaussian(2, 4, &mut r);
        assert!(m.conjugate_orthogonal(&DMatrix::identity(4, 4)).unwrap().max_abs_diff(&m) < 1e-15);
        let u = random_orthogonal(4, &mut r);
        assert!((u.transpose() * &u - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        let mm = DMatrix::from_row_slice(4, 4, m.data());
        let expect = &u * mm * u.transpose();
        let got = m.conjugate_orthogonal(&u).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((got.get(&[i, j]) - expect[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dump_and_load() {
        let t = DenseTensor::gaussian(3, 3, &mut rng()).symmetrize();
        let mut buf = Vec::new();
        t.dump(&mut buf).unwrap();
        assert!(buf.starts_with(br#"{"p":3,"N":3,"symmetric":true}"#));
        assert_eq!(DenseTensor::load(&buf[..]).unwrap(), t);
        assert!(DenseTensor::load(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn rejects_bad_data() {
        assert!(DenseTensor::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DenseTensor::new(1, 2, vec![0.0, f64::NAN]).is_err());
    }
}
