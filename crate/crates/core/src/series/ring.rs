//! Coefficient rings for truncated series: exact rationals, polynomials in
//! a parameter `t`, quadratic surds `a + b√d`, and plain floats.

use crate::rational::{exact_sqrt, fmt_q, to_f64, Q};
use num_traits::{One, Signed, Zero};
use std::fmt;

pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn nil() -> Self;
    fn unit() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_q(q: &Q) -> Self;
    /// Multiplicative inverse when it exists in the ring.
    fn try_inv(&self) -> Option<Self>;
    fn is_nil(&self) -> bool {
        *self == Self::nil()
    }
    /// Zero up to the ring's notion of rounding.
    fn is_negligible(&self) -> bool {
        self.is_nil()
    }
    fn scale(&self, q: &Q) -> Self {
        self.times(&Self::from_q(q))
    }
    /// Nearest float, used for reporting and tolerance checks.
    fn approx(&self) -> f64;
    fn render(&self) -> String;
}

impl Ring for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn try_inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn approx(&self) -> f64 {
        to_f64(self)
    }
    fn render(&self) -> String {
        fmt_q(self)
    }
}

impl Ring for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_q(q: &Q) -> Self {
        to_f64(q)
    }
    fn try_inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-9
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self:e}")
    }
}

/// Polynomial in one parameter `t` with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    /// The indeterminate `t`.
    pub fn var() -> Self {
        Poly(vec![Q::zero(), Q::one()])
    }

    pub fn constant(q: Q) -> Self {
        Poly::new(vec![q])
    }

    pub fn monomial(c: Q, k: usize) -> Self {
        let mut v = vec![Q::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    /// Coefficient of `t^k`.
    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(Q::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }
}

impl From<Q> for Poly {
    fn from(q: Q) -> Self {
        Poly::constant(q)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Ring for Poly {
    fn nil() -> Self {
        Poly(Vec::new())
    }
    fn unit() -> Self {
        Poly(vec![Q::one()])
    }
    fn plus(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    fn times(&self, o: &Self) -> Self {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::nil();
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
    fn negated(&self) -> Self {
        Poly(self.0.iter().map(|c| -c).collect())
    }
    fn from_q(q: &Q) -> Self {
        Poly::constant(q.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        self.as_constant().and_then(|c| c.try_inv()).map(Poly::constant)
    }
    fn scale(&self, q: &Q) -> Self {
        Poly::new(self.0.iter().map(|c| c * q).collect())
    }
    fn approx(&self) -> f64 {
        self.as_constant().map_or(f64::NAN, |c| to_f64(&c))
    }
    fn render(&self) -> String {
        if self.0.is_empty() {
            return "0/1".into();
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => fmt_q(c),
                1 => format!("{}*t", fmt_q(c)),
                _ => format!("{}*t^{k}", fmt_q(c)),
            })
            .collect();
        terms.join(" + ")
    }
}

/// `a + b·√d` with a fixed positive non-square radicand `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    a: Q,
    b: Q,
    d: Option<Q>,
}

impl Surd {
    pub fn rational(a: Q) -> Self {
        Surd { a, b: Q::zero(), d: None }
    }

    /// `√r` for a positive rational `r`, folded to a rational when `r` is a square.
    pub fn sqrt(r: &Q) -> Self {
        assert!(r.is_positive(), "square root of a non-positive rational");
        match exact_sqrt(r) {
            Some(s) => Surd::rational(s),
            None => Surd { a: Q::zero(), b: Q::one(), d: Some(r.clone()) },
        }
    }

    fn norm(a: Q, b: Q, d: Option<Q>) -> Self {
        if b.is_zero() {
            Surd { a, b, d: None }
        } else {
            Surd { a, b, d }
        }
    }

    pub fn rational_part(&self) -> &Q {
        &self.a
    }

    pub fn surd_part(&self) -> &Q {
        &self.b
    }

    fn radicand(x: &Self, y: &Self) -> Option<Q> {
        match (&x.d, &y.d) {
            (Some(d1), Some(d2)) => {
                assert_eq!(d1, d2, "surds with different radicands");
                Some(d1.clone())
            }
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (None, None) => None,
        }
    }

    /// `r^e` for a rational `r > 0` and integer or half-integer exponent `e2/2`.
    pub fn pow_half(r: &Q, e2: i64) -> Self {
        let whole = crate::rational::pow_q(r, e2.div_euclid(2));
        if e2.rem_euclid(2) == 0 {
            Surd::rational(whole)
        } else {
            Surd::sqrt(r).scale(&whole)
        }
    }
}

impl Ring for Surd {
    fn nil() -> Self {
        Surd::rational(Q::zero())
    }
    fn unit() -> Self {
        Surd::rational(Q::one())
    }
    fn plus(&self, o: &Self) -> Self {
        let d = Surd::radicand(self, o);
        Surd::norm(&self.a + &o.a, &self.b + &o.b, d)
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    fn times(&self, o: &Self) -> Self {
        let d = Surd::radicand(self, o);
        let dd = d.clone().unwrap_or_else(Q::zero);
        Surd::norm(&self.a * &o.a + &self.b * &o.b * dd, &self.a * &o.b + &self.b * &o.a, d)
    }
    fn negated(&self) -> Self {
        Surd { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }
    fn from_q(q: &Q) -> Self {
        Surd::rational(q.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        let dd = self.d.clone().unwrap_or_else(Q::zero);
        let den = &self.a * &self.a - &self.b * &self.b * dd;
        if den.is_zero() {
            return None;
        }
        Some(Surd::norm(&self.a / &den, -&self.b / &den, self.d.clone()))
    }
    fn approx(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * self.d.as_ref().map_or(0.0, |d| to_f64(d).sqrt())
    }
    fn render(&self) -> String {
        match &self.d {
            None => fmt_q(&self.a),
            Some(d) => format!("{} + {}*sqrt({})", fmt_q(&self.a), fmt_q(&self.b), fmt_q(d)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn polynomial_arithmetic() {
        let t = Poly::var();
        let p = t.plus(&Poly::unit()).times(&t.minus(&Poly::unit()));
        assert_eq!(p, Poly::new(vec![qi(-1), qi(0), qi(1)]));
        assert_eq!(p.eval(&qi(3)), qi(8));
        assert_eq!(p.render(), "-1/1 + 1/1*t^2");
        assert_eq!(Poly::var().try_inv(), None);
    }

    #[test]
    fn surd_arithmetic() {
        let s = Surd::sqrt(&qi(10));
        assert_eq!(s.times(&s), Surd::rational(qi(10)));
        assert_eq!(s.times(&s.try_inv().unwrap()), Surd::unit());
        assert_eq!(Surd::sqrt(&q(1, 4)), Surd::rational(q(1, 2)));
        assert_eq!(Surd::pow_half(&qi(100), -1), Surd::rational(q(1, 10)));
        assert!((Surd::pow_half(&qi(10), -3).approx() - 10f64.powf(-1.5)).abs() < 1e-15);
    }
}
