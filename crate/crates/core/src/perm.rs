//! Permutations of `{0, .., m-1}`; text forms use 1-based labels.

use crate::error::{invalid, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Permutation { images: (0..m).collect() }
    }

    /// From 0-based images.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || seen[x] {
                return invalid(format!("not a bijection of 0..{m}: {images:?}"));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// From 1-based images, as in `[2, 1, 3]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return invalid("1-based images must be positive");
        }
        Self::from_images(images.iter().map(|x| x - 1).collect())
    }

    pub fn from_cycles(m: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<Option<usize>> = vec![None; m];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                let y = c[(i + 1) % c.len()];
                if x >= m || y >= m || images[x].is_some() {
                    return invalid(format!("bad cycle {c:?} for size {m}"));
                }
                images[x] = Some(y);
            }
        }
        Self::from_images(images.into_iter().enumerate().map(|(i, x)| x.unwrap_or(i)).collect())
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|x| x + 1).collect()
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.size(), other.size());
        Permutation { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.size()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn is_involution(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| self.images[x] == i)
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.images[i] == i).collect()
    }

    /// Cycles, each starting at its minimum, ordered by minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for s in 0..self.size() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.images[s];
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.images[x];
            }
            out.push(c);
        }
        out
    }

    /// All permutations of `0..m` in lexicographic order.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..m).collect();
        loop {
            out.push(Permutation { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cs.is_empty() {
            return write!(f, "()");
        }
        for c in cs {
            let body: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cycles_and_display() {
        let p = Permutation::from_one_based(&[2, 1, 4, 5, 3]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(p.to_string(), "(1,2)(3,4,5)");
        assert!(Permutation::from_one_based(&[1, 1]).is_err());
    }

    #[test]
    fn enumerates_all() {
        assert_eq!(Permutation::all(4).len(), 24);
        assert!(Permutation::all(3)[0].is_identity());
    }

    proptest! {
        #[test]
        fn inverse_composes_to_identity(v in Just((0..7usize).collect::<Vec<_>>()).prop_shuffle()) {
            let p = Permutation::from_images(v).unwrap();
            prop_assert!(p.compose(&p.inverse()).is_identity());
            let back = Permutation::from_cycles(7, &p.cycles()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
