//! Exact free central limit and Poisson-to-semicircular checks.

use super::fuss::fuss_catalan;
use super::laws::{law_moments, Law};
use super::{cumulants_from_moments, moments_from_cumulants, CumulantSeries, MomentSeries, Ring, Surd};
use crate::error::{Error, Result};
use crate::rational::{pow_q, qbig, qi, to_f64, Q};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Cumulants of `(T_1 + … + T_k)/√k` for free copies `T_i` with cumulants `c`: `κ_n ↦ k^{1−n/2} κ_n`.
pub fn clt_rescale(c: &CumulantSeries<Q>, k: u64) -> Result<CumulantSeries<Surd>> {
    if k == 0 {
        return Err(Error::Validation("k must be positive".into()));
    }
    if c.truncation() < 2 || !c.kappa(1).is_zero() || !c.kappa(2).is_one() {
        return Err(Error::Validation("CLT needs κ_1 = 0 and κ_2 = 1".into()));
    }
    let kq = qi(k as i64);
    let out = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, x)| if n == 0 { Surd::unit() } else { Surd::pow_half(&kq, 2 - n as i64).times(&Surd::from_q(x)) })
        .collect();
    CumulantSeries::new(c.p, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonLimitRow {
    pub t: String,
    /// Rescaled cumulants, rendered exactly.
    pub cumulants: Vec<String>,
    pub cumulants_exact: bool,
    pub kappa2_is_one: bool,
    pub moments: Vec<f64>,
    pub semicircular: Vec<f64>,
    pub max_moment_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonLimitReport {
    pub p: usize,
    pub n_max: usize,
    pub rows: Vec<PoissonLimitRow>,
}

impl PoissonLimitReport {
    pub fn exact(&self) -> bool {
        self.rows.iter().all(|r| r.cumulants_exact && r.kappa2_is_one)
    }
    pub fn within(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.max_moment_error <= tol)
    }
}

/// Follows `(b_{p,t} − t·1_p)/√t` through actual moment/cumulant conversions
/// and compares with the semicircular law of order `p`.
pub fn poisson_limit_check(p: usize, ts: &[Q], n_max: usize) -> Result<PoissonLimitReport> {
    if p % 2 == 1 {
        return Err(Error::Parity(format!("Poisson limit needs even order, got {p}")));
    }
    let semi: Vec<f64> = (0..=n_max)
        .map(|n| if n % 2 == 0 { to_f64(&qbig(fuss_catalan(p as u64, (n / 2) as u64))) } else { 0.0 })
        .collect();
    let mut rows = Vec::new();
    for t in ts {
        let m = law_moments(&Law::FreePoisson { p, t: t.clone() }, n_max)?;
        let mut kappa = cumulants_from_moments(&m)?.coeffs().to_vec();
        // subtracting t·1_p only moves κ_1
        if n_max >= 1 {
            kappa[1] = &kappa[1] - t;
        }
        let scale = Surd::pow_half(t, -1);
        let mut pw = Surd::unit();
        let mut resc = Vec::new();
        for x in &kappa {
            resc.push(Surd::from_q(x).times(&pw));
            pw = pw.times(&scale);
        }
        let resc = CumulantSeries::new(p, resc)?;
        let cumulants_exact = (3..=n_max).all(|n| resc.kappa(n) == Surd::pow_half(t, 2 - n as i64)) && (n_max < 1 || resc.kappa(1).is_nil());
        let kappa2_is_one = n_max < 2 || resc.kappa(2) == Surd::unit();
        let moments: Vec<f64> = moments_from_cumulants(&resc)?.coeffs().iter().map(Ring::approx).collect();
        let max_moment_error = moments.iter().zip(&semi).skip(1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.push(PoissonLimitRow {
            t: crate::rational::fmt_q(t),
            cumulants: resc.coeffs().iter().map(Ring::render).collect(),
            cumulants_exact,
            kappa2_is_one,
            moments,
            semicircular: semi.clone(),
            max_moment_error,
        });
    }
    Ok(PoissonLimitReport { p, n_max, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpBoundReport {
    /// `|κ_n| ≤ M^n` for all `n` up to truncation.
    pub cumulants_bounded: bool,
    /// `|m_n| ≤ (2^p M)^n`.
    pub moment_bound: bool,
    /// `|m_n| ≤ M^n`.
    pub moments_bounded: bool,
    /// `|κ_n| ≤ (4^p M)^n`.
    pub cumulant_bound: bool,
}

impl ExpBoundReport {
    /// Both implications hold wherever their hypothesis does.
    pub fn holds(&self) -> bool {
        (!self.cumulants_bounded || self.moment_bound) && (!self.moments_bounded || self.cumulant_bound)
    }
}

pub fn exp_bound_check(m: &MomentSeries<Q>, bound: &Q) -> Result<ExpBoundReport> {
    if !bound.is_positive() {
        return Err(Error::Validation("M must be positive".into()));
    }
    let c = cumulants_from_moments(m)?;
    let p = m.p as i64;
    let le = |xs: &[Q], base: &Q| xs.iter().enumerate().all(|(n, x)| x.abs() <= pow_q(base, n as i64));
    let two = pow_q(&qi(2), p) * bound;
    let four = pow_q(&qi(4), p) * bound;
    Ok(ExpBoundReport {
        cumulants_bounded: le(c.coeffs(), bound),
        moment_bound: le(m.coeffs(), &two),
        moments_bounded: le(m.coeffs(), bound),
        cumulant_bound: le(c.coeffs(), &four),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::series::law_cumulants;

    #[test]
    fn rescaled_cumulants() {
        let c = CumulantSeries::new(4, vec![qi(1), qi(0), qi(1), qi(1), qi(1), qi(1)]).unwrap();
        let s = clt_rescale(&c, 100).unwrap();
        assert_eq!(s.kappa(3), Surd::rational(q(1, 10)));
        assert_eq!(s.kappa(4), Surd::rational(q(1, 100)));
        let s = clt_rescale(&c, 10).unwrap();
        assert!((s.kappa(5).approx() - 10f64.powf(-1.5)).abs() < 1e-15);
        let bad = CumulantSeries::new(4, vec![qi(1), qi(1), qi(1)]).unwrap();
        assert!(clt_rescale(&bad, 4).is_err());
    }

    #[test]
    fn clt_moments_approach_fuss_catalan() {
        let c = CumulantSeries::new(4, vec![qi(1), qi(0), qi(1), qi(1), qi(1)]).unwrap();
        let errs: Vec<f64> = [10u64, 100, 1000]
            .iter()
            .map(|&k| (moments_from_cumulants(&clt_rescale(&c, k).unwrap()).unwrap().m(4).approx() - 4.0).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        assert!(errs[2] * 1000.0 < 10.0);
    }

    #[test]
    fn poisson_rescale_is_exact() {
        let r = poisson_limit_check(4, &[q(1, 2), qi(3), qi(400)], 8).unwrap();
        assert!(r.exact());
        assert!(r.rows[2].max_moment_error < r.rows[0].max_moment_error);
        assert!(poisson_limit_check(3, &[qi(1)], 4).is_err());
    }

    #[test]
    fn exponential_bounds() {
        let semi = law_moments(&Law::Semicircular { p: 2 }, 12).unwrap();
        let r = exp_bound_check(&semi, &qi(1)).unwrap();
        assert!(r.cumulants_bounded && r.moment_bound && r.holds());
        // support edge of μ_3 is √(27/4); take a rational bound above it
        let m3 = law_moments(&Law::Semicircular { p: 3 }, 12).unwrap();
        let r = exp_bound_check(&m3, &q(27, 10)).unwrap();
        assert!(r.moments_bounded && r.cumulant_bound);
        let c = law_cumulants(&Law::FreePoisson { p: 4, t: qi(2) }, 12).unwrap();
        let m = moments_from_cumulants(&c).unwrap();
        assert!(exp_bound_check(&m, &qi(2)).unwrap().holds());
    }
}
