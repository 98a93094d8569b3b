//! Closed-form moments and cumulants of the named laws.

use super::fuss::{fuss_catalan, fuss_narayana};
use super::{CumulantSeries, MomentSeries, Poly, Ring};
use crate::error::{Error, Result};
use crate::rational::{pow_q, q, qbig, Q};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Law {
    /// Semicircular law of order `p`: `m_{2k} = F_p(k)`.
    Semicircular { p: usize },
    /// Free Poisson law of order `p` and rate `t`: `κ_n = t` (even `n` only when `p` is odd).
    FreePoisson { p: usize, t: Q },
    /// Free Poisson law of rate `1/τ` dilated by `dilation`, by default `τ^{p/2}`.
    MarchenkoPastur { p: usize, tau: Q, dilation: Option<Q> },
    /// `Δ_t`, the law of `t` times the identity tensor: `m_n = F_{p/2}(n) t^n`.
    Delta { p: usize, t: Q },
    /// Push-forward of `base` under `x ↦ c x`.
    Dilate { base: Box<Law>, c: Q },
}

impl Law {
    pub fn order(&self) -> usize {
        match self {
            Law::Semicircular { p } | Law::FreePoisson { p, .. } | Law::MarchenkoPastur { p, .. } | Law::Delta { p, .. } => *p,
            Law::Dilate { base, .. } => base.order(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Law::Semicircular { .. } => "semicircular".into(),
            Law::FreePoisson { .. } => "free_poisson".into(),
            Law::MarchenkoPastur { .. } => "marchenko_pastur".into(),
            Law::Delta { .. } => "delta".into(),
            Law::Dilate { base, .. } => format!("dilated_{}", base.name()),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |x: &Q, what: &str| {
            if x.is_positive() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{what} must be positive")))
            }
        };
        if self.order() == 0 {
            return Err(Error::Validation("order must be positive".into()));
        }
        match self {
            Law::FreePoisson { t, .. } => positive(t, "t"),
            Law::Delta { p, t } => {
                if p % 2 == 1 {
                    return Err(Error::Parity(format!("Δ_t needs even order, got {p}")));
                }
                positive(t, "t")
            }
            Law::MarchenkoPastur { p, tau, dilation } => {
                positive(tau, "τ")?;
                if dilation.is_none() && p % 2 == 1 {
                    return Err(Error::Parity("odd order needs an explicit dilation factor".into()));
                }
                Ok(())
            }
            Law::Dilate { base, .. } => base.validate(),
            Law::Semicircular { .. } => Ok(()),
        }
    }

    fn mp_dilation(p: usize, tau: &Q, dilation: &Option<Q>) -> Q {
        dilation.clone().unwrap_or_else(|| pow_q(tau, (p / 2) as i64))
    }
}

/// `m_n(ν_{p,t})` as a polynomial in `t`.
fn free_poisson_moment(p: usize, n: usize) -> Poly {
    if n == 0 {
        return Poly::unit();
    }
    let half = q(p as i64, 2);
    Poly::new((0..=n).map(|b| if b == 0 { Q::zero() } else { qbig(fuss_narayana(&half, n as u64, b as u64).expect("valid order")) }).collect())
}

/// Moments of the free Poisson law of order `p` with symbolic rate `t`.
pub fn free_poisson_symbolic(p: usize, k: usize) -> Result<MomentSeries<Poly>> {
    MomentSeries::new(p, (0..=k).map(|n| free_poisson_moment(p, n)).collect())
}

pub fn law_moments(law: &Law, k: usize) -> Result<MomentSeries<Q>> {
    law.validate()?;
    let p = law.order();
    let c: Vec<Q> = match law {
        Law::Semicircular { p } => (0..=k).map(|n| if n % 2 == 0 { qbig(fuss_catalan(*p as u64, (n / 2) as u64)) } else { Q::zero() }).collect(),
        Law::FreePoisson { p, t } => (0..=k).map(|n| free_poisson_moment(*p, n).eval(t)).collect(),
        Law::MarchenkoPastur { p, tau, dilation } => {
            let base = law_moments(&Law::FreePoisson { p: *p, t: tau.recip() }, k)?;
            return Ok(base.dilate(&Law::mp_dilation(*p, tau, dilation)));
        }
        Law::Delta { p, t } => (0..=k).map(|n| qbig(fuss_catalan((p / 2) as u64, n as u64)) * pow_q(t, n as i64)).collect(),
        Law::Dilate { base, c } => return Ok(law_moments(base, k)?.dilate(c)),
    };
    MomentSeries::new(p, c)
}

/// Closed-form cumulants, independent of the moment recursion.
pub fn law_cumulants(law: &Law, k: usize) -> Result<CumulantSeries<Q>> {
    law.validate()?;
    let p = law.order();
    let c: Vec<Q> = match law {
        Law::Semicircular { .. } => (0..=k).map(|n| if n == 0 || n == 2 { Q::one() } else { Q::zero() }).collect(),
        Law::FreePoisson { p, t } => (0..=k).map(|n| if n == 0 { Q::one() } else if p % 2 == 1 && n % 2 == 1 { Q::zero() } else { t.clone() }).collect(),
        Law::MarchenkoPastur { p, tau, dilation } => {
            let base = law_cumulants(&Law::FreePoisson { p: *p, t: tau.recip() }, k)?;
            return Ok(dilate_cumulants(&base, &Law::mp_dilation(*p, tau, dilation)));
        }
        Law::Delta { t, .. } => (0..=k).map(|n| match n {
            0 => Q::one(),
            1 => t.clone(),
            _ => Q::zero(),
        })
        .collect(),
        Law::Dilate { base, c } => return Ok(dilate_cumulants(&law_cumulants(base, k)?, c)),
    };
    CumulantSeries::new(p, c)
}

fn dilate_cumulants(c: &CumulantSeries<Q>, f: &Q) -> CumulantSeries<Q> {
    let coeffs = c.coeffs().iter().enumerate().map(|(n, x)| x * pow_q(f, n as i64)).collect();
    CumulantSeries::new(c.p, coeffs).expect("dilation keeps the head")
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binom, qi};
    use crate::series::{cumulants_from_moments, moments_from_cumulants};

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn catalan_and_delta() {
        assert_eq!(law_moments(&Law::Semicircular { p: 2 }, 6).unwrap().coeffs(), &ints(&[1, 0, 1, 0, 2, 0, 5])[..]);
        let t = q(3, 2);
        let d = law_moments(&Law::Delta { p: 4, t: t.clone() }, 3).unwrap();
        assert_eq!(d.coeffs(), &[qi(1), t.clone(), qi(2) * &t * &t, qi(5) * &t * &t * &t][..]);
    }

    #[test]
    fn classical_free_poisson() {
        let t = q(2, 5);
        let m = law_moments(&Law::FreePoisson { p: 2, t: t.clone() }, 4).unwrap();
        assert_eq!(m.m(2), &t + &t * &t);
    }

    #[test]
    fn closed_forms_match_the_recursion() {
        let laws = [
            Law::Semicircular { p: 3 },
            Law::Semicircular { p: 5 },
            Law::FreePoisson { p: 3, t: q(1, 3) },
            Law::FreePoisson { p: 6, t: q(5, 2) },
            Law::MarchenkoPastur { p: 4, tau: q(2, 3), dilation: None },
            Law::Delta { p: 6, t: q(7, 3) },
            Law::Dilate { base: Box::new(Law::Semicircular { p: 4 }), c: q(-1, 2) },
        ];
        for law in laws {
            let m = law_moments(&law, 10).unwrap();
            let c = law_cumulants(&law, 10).unwrap();
            assert_eq!(moments_from_cumulants(&c).unwrap(), m, "{law:?}");
            assert_eq!(cumulants_from_moments(&m).unwrap(), c, "{law:?}");
        }
    }

    #[test]
    fn marchenko_pastur_matches_classical_at_order_two() {
        let tau = q(3, 7);
        let m = law_moments(&Law::MarchenkoPastur { p: 2, tau: tau.clone(), dilation: None }, 8).unwrap();
        for n in 1..=8u64 {
            let expect: Q = (0..n).map(|r| qbig(binom(n - 1, r) * binom(n, r)) / qi(r as i64 + 1) * pow_q(&tau, r as i64)).sum();
            assert_eq!(m.m(n as usize), expect);
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(law_moments(&Law::Delta { p: 3, t: qi(1) }, 4).is_err());
        assert!(law_moments(&Law::FreePoisson { p: 4, t: qi(0) }, 4).is_err());
        assert!(law_moments(&Law::MarchenkoPastur { p: 3, tau: qi(2), dilation: None }, 4).is_err());
    }
}
