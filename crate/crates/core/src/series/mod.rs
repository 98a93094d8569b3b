//! Truncated formal power series and the moment/cumulant machinery.

mod clt;
mod fuss;
mod laws;
mod ring;

pub use clt::{clt_rescale, exp_bound_check, poisson_limit_check, ExpBoundReport, PoissonLimitReport, PoissonLimitRow};
pub use fuss::{enumerate_nc_multiple, fuss_catalan, fuss_narayana, nc_total};
pub use laws::{free_poisson_symbolic, law_cumulants, law_moments, Law};
pub use ring::{Poly, Ring, Surd};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, qi, Q};

/// Coefficients `c_0..c_K` of a truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<R: Ring> {
    c: Vec<R>,
}

impl<R: Ring> Series<R> {
    pub fn new(c: Vec<R>) -> Self {
        assert!(!c.is_empty(), "series needs at least a constant term");
        Series { c }
    }

    pub fn zero(k: usize) -> Self {
        Series { c: vec![R::nil(); k + 1] }
    }

    pub fn one(k: usize) -> Self {
        let mut s = Self::zero(k);
        s.c[0] = R::unit();
        s
    }

    /// The series `z`.
    pub fn z(k: usize) -> Self {
        let mut s = Self::zero(k);
        if k >= 1 {
            s.c[1] = R::unit();
        }
        s
    }

    pub fn truncation(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> R {
        self.c.get(i).cloned().unwrap_or_else(R::nil)
    }

    pub fn truncate(&self, k: usize) -> Self {
        Series { c: (0..=k).map(|i| self.coeff(i)).collect() }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let k = self.truncation().min(o.truncation());
        Series { c: (0..=k).map(|i| self.c[i].plus(&o.c[i])).collect() }
    }

    pub fn minus(&self, o: &Self) -> Self {
        let k = self.truncation().min(o.truncation());
        Series { c: (0..=k).map(|i| self.c[i].minus(&o.c[i])).collect() }
    }

    pub fn scale(&self, q: &Q) -> Self {
        Series { c: self.c.iter().map(|x| x.scale(q)).collect() }
    }

    pub fn times(&self, o: &Self) -> Self {
        let k = self.truncation().min(o.truncation());
        let mut c = vec![R::nil(); k + 1];
        for i in 0..=k {
            if self.c[i].is_nil() {
                continue;
            }
            for j in 0..=k - i {
                c[i + j] = c[i + j].plus(&self.c[i].times(&o.c[j]));
            }
        }
        Series { c }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.truncation());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&base);
            }
            base = base.times(&base);
            e >>= 1;
        }
        acc
    }

    /// `self^e` for a rational exponent, constant term 1 required.
    pub fn pow_q(&self, e: &Q) -> Result<Self> {
        if self.c[0] != R::unit() {
            return Err(Error::Domain("rational powers need constant term 1".into()));
        }
        let mut p = PowerTable::new(vec![e.clone()]);
        for n in 1..=self.truncation() {
            p.extend(&self.c[..=n]);
        }
        Ok(Series { c: p.table.remove(0) })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv0 = self.c[0].try_inv().ok_or_else(|| Error::Domain("constant term not invertible".into()))?;
        let k = self.truncation();
        let mut b = vec![inv0.clone()];
        for n in 1..=k {
            let mut s = R::nil();
            for i in 1..=n {
                s = s.plus(&self.c[i].times(&b[n - i]));
            }
            b.push(s.times(&inv0).negated());
        }
        Ok(Series { c: b })
    }

    /// Square root with constant term 1 by Newton iteration `s ← (s + a/s)/2`.
    pub fn sqrt(&self) -> Result<Self> {
        if self.c[0] != R::unit() {
            return Err(Error::Domain("square root needs constant term 1".into()));
        }
        let k = self.truncation();
        let half = Q::new(1.into(), 2.into());
        let mut s = Self::one(k);
        let mut prec = 1;
        while prec <= k {
            prec = (2 * prec).min(k + 1);
            let a = self.truncate(prec - 1);
            let cur = s.truncate(prec - 1);
            s = cur.plus(&a.times(&cur.inverse()?)).scale(&half);
        }
        Ok(s.truncate(k))
    }

    /// `self(g)`; `g` must have zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if !g.c[0].is_nil() {
            return Err(Error::Domain("composition needs a zero constant term".into()));
        }
        let k = self.truncation().min(g.truncation());
        let g = g.truncate(k);
        let mut acc = Series::zero(k);
        for i in (0..=k).rev() {
            acc = acc.times(&g);
            acc.c[0] = acc.c[0].plus(&self.c[i]);
        }
        Ok(acc)
    }

    /// Multiply by `z`, keeping the truncation.
    pub fn shift_up(&self) -> Self {
        let k = self.truncation();
        let mut c = vec![R::nil()];
        c.extend(self.c[..k].iter().cloned());
        Series { c }
    }

    /// `(self - self(0)) / z`, one coefficient shorter.
    pub fn shift_down(&self) -> Self {
        if self.c.len() == 1 {
            return Series { c: vec![R::nil()] };
        }
        Series { c: self.c[1..].to_vec() }
    }
}

/// Coefficients of `f^e` for several exponents, grown one degree at a time
/// with Miller's recurrence (needs `f_0 = 1`).
struct PowerTable<R: Ring> {
    exps: Vec<Q>,
    table: Vec<Vec<R>>,
}

impl<R: Ring> PowerTable<R> {
    fn new(exps: Vec<Q>) -> Self {
        let table = exps.iter().map(|_| vec![R::unit()]).collect();
        PowerTable { exps, table }
    }

    /// `f` known to degree `j`; appends degree `j` to every power.
    fn extend(&mut self, f: &[R]) {
        let j = f.len() - 1;
        let jq = qi(j as i64);
        for (e, row) in self.exps.iter().zip(self.table.iter_mut()) {
            let mut s = R::nil();
            for i in 1..=j {
                if f[i].is_nil() || row[j - i].is_nil() {
                    continue;
                }
                let w = (e * qi(i as i64) - qi((j - i) as i64)) / &jq;
                s = s.plus(&f[i].times(&row[j - i]).scale(&w));
            }
            row.push(s);
        }
    }

    fn get(&self, idx: usize, deg: usize) -> &R {
        &self.table[idx][deg]
    }
}

/// Moments `m_0..m_K` of an order-`p` distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSeries<R: Ring = Q> {
    pub p: usize,
    pub series: Series<R>,
}

/// Free cumulants `κ_0..κ_K` of an order-`p` distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSeries<R: Ring = Q> {
    pub p: usize,
    pub series: Series<R>,
}

fn check_head<R: Ring>(p: usize, c: &[R], what: &str) -> Result<()> {
    if p == 0 {
        return Err(Error::Validation("order must be positive".into()));
    }
    if c.first() != Some(&R::unit()) {
        return Err(Error::Validation(format!("{what}_0 must be 1")));
    }
    if p % 2 == 1 {
        if let Some(n) = (1..c.len()).step_by(2).find(|&n| !c[n].is_negligible()) {
            return Err(Error::Parity(format!("odd order {p} needs {what}_{n} = 0")));
        }
    }
    Ok(())
}

impl<R: Ring> MomentSeries<R> {
    pub fn new(p: usize, c: Vec<R>) -> Result<Self> {
        check_head(p, &c, "m")?;
        Ok(MomentSeries { p, series: Series::new(c) })
    }
    pub fn coeffs(&self) -> &[R] {
        self.series.coeffs()
    }
    pub fn m(&self, n: usize) -> R {
        self.series.coeff(n)
    }
    pub fn truncation(&self) -> usize {
        self.series.truncation()
    }
    /// `m_n ↦ c^n m_n`
    pub fn dilate(&self, c: &R) -> Self {
        let mut pw = R::unit();
        let mut out = Vec::new();
        for x in self.coeffs() {
            out.push(x.times(&pw));
            pw = pw.times(c);
        }
        MomentSeries { p: self.p, series: Series::new(out) }
    }
}

impl<R: Ring> CumulantSeries<R> {
    pub fn new(p: usize, c: Vec<R>) -> Result<Self> {
        check_head(p, &c, "κ")?;
        Ok(CumulantSeries { p, series: Series::new(c) })
    }
    pub fn coeffs(&self) -> &[R] {
        self.series.coeffs()
    }
    pub fn kappa(&self, n: usize) -> R {
        self.series.coeff(n)
    }
    pub fn truncation(&self) -> usize {
        self.series.truncation()
    }
}

/// Exponents `s·p/2` for `s = 1..=k`.
fn half_exponents(p: usize, k: usize) -> Vec<Q> {
    (1..=k).map(|s| Q::new(((s * p) as i64).into(), 2.into())).collect()
}

/// `m_n = Σ_{s=1}^n κ_s [z^{n-s}] M(z)^{sp/2}`.
pub fn moments_from_cumulants<R: Ring>(c: &CumulantSeries<R>) -> Result<MomentSeries<R>> {
    let (p, k) = (c.p, c.truncation());
    check_head(p, c.coeffs(), "κ")?;
    let mut table = PowerTable::new(half_exponents(p, k));
    let mut m = vec![R::unit()];
    for n in 1..=k {
        let mut s_acc = R::nil();
        for s in 1..=n {
            let ks = &c.coeffs()[s];
            if ks.is_nil() {
                continue;
            }
            s_acc = s_acc.plus(&ks.times(table.get(s - 1, n - s)));
        }
        m.push(s_acc);
        table.extend(&m);
    }
    MomentSeries::new(p, m)
}

/// Triangular inverse of [`moments_from_cumulants`].
pub fn cumulants_from_moments<R: Ring>(m: &MomentSeries<R>) -> Result<CumulantSeries<R>> {
    let (p, k) = (m.p, m.truncation());
    check_head(p, m.coeffs(), "m")?;
    let mut table = PowerTable::new(half_exponents(p, k));
    for n in 1..=k {
        table.extend(&m.coeffs()[..=n]);
    }
    let mut kap = vec![R::unit()];
    for n in 1..=k {
        let mut acc = m.coeffs()[n].clone();
        for s in 1..n {
            if kap[s].is_nil() {
                continue;
            }
            acc = acc.minus(&kap[s].times(table.get(s - 1, n - s)));
        }
        if p % 2 == 1 && n % 2 == 1 && !acc.is_negligible() {
            return Err(Error::Parity(format!("moments of odd order {p} give a nonzero κ_{n}")));
        }
        kap.push(acc);
    }
    CumulantSeries::new(p, kap)
}

/// Checks `M(z) = C(z·M(z)^{p/2})` to the common truncation.
pub fn verify_functional<R: Ring>(m: &MomentSeries<R>, c: &CumulantSeries<R>) -> bool {
    if m.p != c.p {
        return false;
    }
    let p = m.p;
    let k = m.truncation().min(c.truncation());
    let ms = m.series.truncate(k);
    let power = if p.is_multiple_of(2) {
        ms.pow(p / 2)
    } else {
        match ms.sqrt() {
            Ok(s) => s.pow(p),
            Err(_) => return false,
        }
    };
    let arg = power.shift_up();
    match c.series.truncate(k).compose(&arg) {
        Ok(lhs) => lhs == ms,
        Err(_) => false,
    }
}

/// `R(z) = (C(z) - 1)/z`, coefficients `κ_1..κ_K`.
pub fn r_transform<R: Ring>(c: &CumulantSeries<R>) -> Series<R> {
    c.series.shift_down()
}

/// `Q(z) = (C(z)^{p/2} - 1)/z` for even `p`.
pub fn q_transform<R: Ring>(c: &CumulantSeries<R>) -> Result<Series<R>> {
    if c.p % 2 == 1 {
        return Err(Error::Parity(format!("Q-transform needs even order, got {}", c.p)));
    }
    Ok(c.series.pow(c.p / 2).shift_down())
}

/// Adds cumulants and converts back.
pub fn free_convolve<R: Ring>(a: &MomentSeries<R>, b: &MomentSeries<R>) -> Result<MomentSeries<R>> {
    if a.p != b.p {
        return Err(Error::Validation(format!("orders differ: {} vs {}", a.p, b.p)));
    }
    if a.p % 2 == 1 {
        return Err(Error::Parity(format!("free convolution needs even order, got {}", a.p)));
    }
    let (ca, cb) = (cumulants_from_moments(a)?, cumulants_from_moments(b)?);
    let k = ca.truncation().min(cb.truncation());
    let mut sum: Vec<R> = (0..=k).map(|i| ca.kappa(i).plus(&cb.kappa(i))).collect();
    sum[0] = R::unit();
    moments_from_cumulants(&CumulantSeries::new(a.p, sum)?)
}

/// `pole/z + Σ c_j z^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<R: Ring> {
    pub pole: R,
    pub regular: Series<R>,
}

impl<R: Ring> LaurentSeries<R> {
    /// `self(g(u))` as a Laurent series in `u`; `g` needs `g_0 = 0` and invertible `g_1`.
    pub fn compose(&self, g: &Series<R>) -> Result<LaurentSeries<R>> {
        if !g.coeff(0).is_nil() {
            return Err(Error::Domain("argument must have zero constant term".into()));
        }
        // g = u·h, 1/g = u^{-1}·(1/h)
        let h = g.shift_down();
        let hinv = h.inverse()?;
        let k = self.regular.truncation().min(hinv.truncation().saturating_sub(1));
        let inv_pole = hinv.coeff(0);
        let inv_regular = Series::new((0..=k).map(|j| hinv.coeff(j + 1)).collect());
        let reg = self.regular.truncate(k).compose(&g.truncate(k))?;
        Ok(LaurentSeries { pole: self.pole.times(&inv_pole), regular: inv_regular.times_ring(&self.pole).plus(&reg) })
    }
}

impl<R: Ring> Series<R> {
    fn times_ring(&self, r: &R) -> Self {
        Series { c: self.c.iter().map(|x| x.times(r)).collect() }
    }
}

/// Result of the Cauchy-transform identities `K(G(z)) = z` and `G(K(z)) = z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyCheck {
    pub kg: bool,
    pub gk: bool,
    pub truncation: usize,
}

impl CauchyCheck {
    pub fn holds(&self) -> bool {
        self.kg && self.gk
    }
}

/// Builds `G(z) = (1/z) M(1/z)^{p/2}` and `K(z) = 1/z + Q(z)` from the
/// cumulants of `m`, then composes both ways. `K∘G` is compared on the pole
/// and the coefficients of `u^0..u^{trunc-1}` (with `u = 1/z`), `G∘K` on
/// `z^0..z^{trunc}`. Needs moments to order `trunc + 1`.
pub fn cauchy_pair_check<R: Ring>(m: &MomentSeries<R>, trunc: usize) -> Result<CauchyCheck> {
    let c = cumulants_from_moments(m)?;
    cauchy_pair_check_with(m, &c, trunc)
}

/// As [`cauchy_pair_check`] with `K` built from the given cumulants.
pub fn cauchy_pair_check_with<R: Ring>(m: &MomentSeries<R>, c: &CumulantSeries<R>, trunc: usize) -> Result<CauchyCheck> {
    if m.p % 2 == 1 || c.p != m.p {
        return Err(Error::Parity(format!("Cauchy pair needs one even order, got {} and {}", m.p, c.p)));
    }
    if trunc == 0 || m.truncation() < trunc + 1 || c.truncation() < trunc + 1 {
        return Err(Error::Validation(format!("need positive truncation and series to order {}", trunc + 1)));
    }
    let h = m.p / 2;
    let ms = m.series.truncate(trunc + 1);
    let qt = q_transform(&CumulantSeries { p: c.p, series: c.series.truncate(trunc + 1) })?;
    let k_series = LaurentSeries { pole: R::unit(), regular: qt.clone() };
    // in u = 1/z: G(u) = u·M(u)^{p/2}
    let g = ms.pow(h).shift_up();
    let kg = k_series.compose(&g)?;
    let kg_ok = kg.pole == R::unit()
        && kg.regular.truncation() + 1 >= trunc
        && kg.regular.truncate(trunc - 1).coeffs().iter().all(Ring::is_nil);
    // v = 1/K(z) = z/(1 + zQ(z)); G(K(z)) = v·M(v)^{p/2}
    let denom = Series::one(trunc + 1).plus(&qt.shift_up());
    let v = Series::z(trunc + 1).times(&denom.inverse()?);
    let gk = ms.pow(h).compose(&v)?.times(&v);
    let gk_ok = gk.truncate(trunc) == Series::z(trunc);
    Ok(CauchyCheck { kg: kg_ok, gk: gk_ok, truncation: trunc })
}

/// Series as a JSON array of `num/den` strings.
pub fn series_to_json(c: &[Q]) -> serde_json::Value {
    serde_json::Value::Array(c.iter().map(|x| serde_json::Value::String(fmt_q(x))).collect())
}

pub fn series_from_json(v: &serde_json::Value) -> Result<Vec<Q>> {
    let arr = v.as_array().ok_or_else(|| Error::Validation("expected a JSON array".into()))?;
    arr.iter()
        .map(|x| match x {
            serde_json::Value::String(s) => parse_q(s),
            serde_json::Value::Number(n) => parse_q(&n.to_string()),
            _ => Err(Error::Validation(format!("bad coefficient {x}"))),
        })
        .collect()
}
