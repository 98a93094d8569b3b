//! Fuss-Catalan and Fuss-Narayana numbers and a brute-force enumerator of
//! non-crossing partitions with block sizes constrained to multiples of `q`.

use crate::error::{Error, Result};
use crate::rational::{binom, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

/// `F_p(k) = binom(pk+1, k)/(pk+1)`.
pub fn fuss_catalan(p: u64, k: u64) -> BigInt {
    let top = p * k + 1;
    binom(top, k) / BigInt::from(top)
}

/// `(twice q)` for an integer or half-integer `q > 0`.
fn doubled(q: &Q) -> Result<u64> {
    let d = q * Q::from_integer(2.into());
    if !d.is_integer() || d <= Q::zero() {
        return Err(Error::Validation(format!("q = {q} is not a positive integer or half-integer")));
    }
    d.to_integer().to_u64().ok_or_else(|| Error::Validation("q too large".into()))
}

fn narayana_int(q: u64, n: u64, b: u64) -> BigInt {
    if b == 0 || b > n {
        return BigInt::zero();
    }
    let num = binom(n - 1, b - 1) * binom(q * n, b - 1);
    let (quo, rem) = num.div_rem(&BigInt::from(b));
    debug_assert!(rem.is_zero());
    quo
}

/// Number of non-crossing partitions of `[qn]` into `b` blocks whose sizes
/// are multiples of `q`. For half-integer `q` this vanishes at odd `n` and
/// equals the integer count for `2q` at `n/2` otherwise.
pub fn fuss_narayana(q: &Q, n: u64, b: u64) -> Result<BigInt> {
    let q2 = doubled(q)?;
    if q2 % 2 == 0 {
        return Ok(narayana_int(q2 / 2, n, b));
    }
    if n % 2 == 1 {
        return Ok(BigInt::zero());
    }
    Ok(narayana_int(q2, n / 2, b))
}

/// `Σ_b F_q^b(n)` in closed form: `F_{q+1}(n)`, or `F_{2q+1}(n/2)` for half-integer `q`.
pub fn nc_total(q: &Q, n: u64) -> Result<BigInt> {
    let q2 = doubled(q)?;
    if q2 % 2 == 0 {
        return Ok(fuss_catalan(q2 / 2 + 1, n));
    }
    if n % 2 == 1 {
        return Ok(BigInt::zero());
    }
    Ok(fuss_catalan(q2 + 1, n / 2))
}

/// Every non-crossing partition of `[qn]` (1-based) whose block sizes are
/// multiples of `q`, in restricted-growth order.
pub fn enumerate_nc_multiple(q: &Q, n: u64) -> Result<Vec<Vec<Vec<usize>>>> {
    let q2 = doubled(q)?;
    if (q2 * n) % 2 == 1 {
        return Ok(Vec::new());
    }
    let size = (q2 * n / 2) as usize;
    // block sizes s with s/q integer: multiples of q, or of 2q when q is a half-integer
    let unit = if q2 % 2 == 0 { (q2 / 2) as usize } else { q2 as usize };
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut owner = vec![0usize; size];
    extend(0, size, unit, &mut blocks, &mut owner, &mut out);
    Ok(out)
}

fn extend(i: usize, size: usize, unit: usize, blocks: &mut Vec<Vec<usize>>, owner: &mut [usize], out: &mut Vec<Vec<Vec<usize>>>) {
    if i == size {
        if blocks.iter().all(|b| b.len() % unit == 0) {
            out.push(blocks.iter().map(|b| b.iter().map(|x| x + 1).collect()).collect());
        }
        return;
    }
    for k in 0..blocks.len() {
        let last = *blocks[k].last().expect("blocks are non-empty");
        // joining i to block k crosses a block that has points on both sides of `last`
        let crosses = (last + 1..i).any(|j| blocks[owner[j]][0] < last);
        if crosses {
            continue;
        }
        blocks[k].push(i);
        owner[i] = k;
        extend(i + 1, size, unit, blocks, owner, out);
        blocks[k].pop();
    }
    blocks.push(vec![i]);
    owner[i] = blocks.len() - 1;
    extend(i + 1, size, unit, blocks, owner, out);
    blocks.pop();
}

/// Whether a partition of `1..=s` is non-crossing (independent check).
#[cfg(test)]
pub(crate) fn is_non_crossing(blocks: &[Vec<usize>]) -> bool {
    for (x, a) in blocks.iter().enumerate() {
        for b in blocks.iter().skip(x + 1) {
            for &a1 in a {
                for &a2 in a {
                    for &b1 in b {
                        for &b2 in b {
                            if (a1 < b1 && b1 < a2 && a2 < b2) || (b1 < a1 && a1 < b2 && b2 < a2) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn small_values() {
        assert_eq!(fuss_catalan(3, 2), BigInt::from(3));
        assert_eq!(fuss_catalan(2, 4), BigInt::from(14));
        assert_eq!(fuss_narayana(&qi(1), 4, 2).unwrap(), BigInt::from(6));
        assert_eq!(fuss_narayana(&q(3, 2), 3, 1).unwrap(), BigInt::zero());
        assert_eq!(enumerate_nc_multiple(&qi(2), 3).unwrap().len(), 12);
    }

    #[test]
    fn narayana_sums_to_fuss_catalan() {
        for qq in 1..=4u64 {
            for n in 1..=4u64 {
                let s: BigInt = (1..=n).map(|b| fuss_narayana(&qi(qq as i64), n, b).unwrap()).sum();
                assert_eq!(s, fuss_catalan(qq + 1, n));
            }
        }
    }

    #[test]
    fn enumerated_partitions_are_valid() {
        for (qq, n) in [(qi(1), 5u64), (q(3, 2), 4), (qi(2), 4)] {
            let parts = enumerate_nc_multiple(&qq, n).unwrap();
            for p in &parts {
                assert!(is_non_crossing(p));
                let mut all: Vec<usize> = p.iter().flatten().copied().collect();
                all.sort();
                assert_eq!(all, (1..=all.len()).collect::<Vec<_>>());
            }
            let mut sorted = parts.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), parts.len());
        }
    }

    #[test]
    fn half_integer_counts_match_enumeration() {
        for n in 1..=6u64 {
            let parts = enumerate_nc_multiple(&q(3, 2), n).unwrap();
            for b in 1..=n {
                let c = parts.iter().filter(|p| p.len() as u64 == b).count();
                assert_eq!(BigInt::from(c), fuss_narayana(&q(3, 2), n, b).unwrap(), "n={n} b={b}");
            }
        }
    }
}
