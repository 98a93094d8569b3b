//! Distributions on trace maps, their free cumulants and aggregated moments.

use crate::error::{Error, Result};
use crate::map::{Atlas, CanonicalCode, CombMap};
use crate::poset::PosetView;
use crate::rational::{binom, factorial, fmt_q, qbig, qi, Q};
use crate::series::{Poly, Ring};
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

/// Value of the cumulant rule on connected maps.
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    /// `a_p`: melons get `1/(p-1)!`, everything else `0`.
    Melonic,
    /// `b_{p,t}`: supported on maps whose half-edges split into in/out halves
    /// forming a single directed cycle.
    FreePoisson { t: Poly },
    /// `t·1_p`: one-vertex maps get `t/(p-1)!!`.
    Identity { t: Poly },
    /// `δ_0`: all cumulants vanish.
    Zero,
    Sum(Vec<Rule>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Cumulant,
    /// Direct evaluation on maps; used for odd orders.
    Moment,
}

/// A distribution on `p`-regular maps, multiplicative on components.
#[derive(Clone)]
pub struct MapDistribution {
    p: usize,
    rule: Rule,
    repr: Representation,
    cumulants: Arc<RwLock<HashMap<CanonicalCode, Poly>>>,
    values: Arc<RwLock<HashMap<CanonicalCode, Poly>>>,
}

impl fmt::Debug for MapDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapDistribution").field("p", &self.p).field("rule", &self.rule).field("repr", &self.repr).finish()
    }
}

impl MapDistribution {
    fn with_rule(p: usize, rule: Rule, repr: Representation) -> Self {
        MapDistribution { p, rule, repr, cumulants: Default::default(), values: Default::default() }
    }

    fn even(p: usize, what: &str) -> Result<()> {
        if p == 0 || p % 2 == 1 {
            return Err(Error::Parity(format!("{what} needs a positive even order, got {p}")));
        }
        Ok(())
    }

    /// `a_p`; odd orders are held in moment form.
    pub fn melonic(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Validation("order must be positive".into()));
        }
        let repr = if p.is_multiple_of(2) { Representation::Cumulant } else { Representation::Moment };
        Ok(Self::with_rule(p, Rule::Melonic, repr))
    }

    pub fn free_poisson(p: usize, t: Poly) -> Result<Self> {
        Self::even(p, "b_{p,t}")?;
        Ok(Self::with_rule(p, Rule::FreePoisson { t }, Representation::Cumulant))
    }

    pub fn identity(p: usize, t: Poly) -> Result<Self> {
        Self::even(p, "t·1_p")?;
        Ok(Self::with_rule(p, Rule::Identity { t }, Representation::Cumulant))
    }

    pub fn delta_zero(p: usize) -> Result<Self> {
        Self::even(p, "δ_0")?;
        Ok(Self::with_rule(p, Rule::Zero, Representation::Cumulant))
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    fn check_map(&self, map: &CombMap) -> Result<()> {
        if map.vertex_count() > 0 && map.regular_degree() != Some(self.p) {
            return Err(Error::Domain(format!("map is not {}-regular", self.p)));
        }
        Ok(())
    }

    /// Rule value on a connected map, memoized by class.
    fn connected_cumulant(&self, map: &CombMap) -> Poly {
        let code = map.free_code();
        if let Some(v) = self.cumulants.read().expect("memo lock").get(&code) {
            return v.clone();
        }
        let v = rule_value(&self.rule, self.p, map);
        self.cumulants.write().expect("memo lock").insert(code, v.clone());
        v
    }

    fn product_of_cumulants(&self, map: &CombMap) -> Poly {
        let mut acc = Poly::unit();
        for c in map.components() {
            let v = self.connected_cumulant(&c);
            if v.is_nil() {
                return v;
            }
            acc = acc.times(&v);
        }
        acc
    }

    fn connected_value(&self, map: &CombMap) -> Result<Poly> {
        let code = map.free_code();
        if let Some(v) = self.values.read().expect("memo lock").get(&code) {
            return Ok(v.clone());
        }
        let view = PosetView::build(map)?;
        let v = match self.repr {
            Representation::Cumulant => view.nodes.iter().fold(Poly::nil(), |acc, b| acc.plus(&self.product_of_cumulants(b))),
            Representation::Moment => moment_rule(&self.rule, self.p, &view),
        };
        self.values.write().expect("memo lock").insert(code, v.clone());
        Ok(v)
    }

    /// `a(b)`: the sum over the down-set of products of component cumulants.
    pub fn eval(&self, map: &CombMap) -> Result<Poly> {
        self.check_map(map)?;
        let mut acc = Poly::unit();
        for c in map.components() {
            acc = acc.times(&self.connected_value(&c)?);
            if acc.is_nil() {
                break;
            }
        }
        Ok(acc)
    }

    /// `κ_b(a)`, read directly off the rule.
    pub fn cumulant_of_map(&self, map: &CombMap) -> Result<Poly> {
        self.check_map(map)?;
        if self.p % 2 == 1 || self.repr == Representation::Moment {
            return Err(Error::Unsupported("free cumulants on maps are only defined for even orders".into()));
        }
        Ok(self.product_of_cumulants(map))
    }

    /// `κ_b(a) = Σ_{b' ≤ b} μ(b', b) a(b')`.
    pub fn cumulant_by_moebius(&self, map: &CombMap) -> Result<Poly> {
        self.check_map(map)?;
        let view = PosetView::build(map)?;
        let mu = view.moebius_to_top();
        let mut acc = Poly::nil();
        for (b, m) in view.nodes.iter().zip(mu) {
            if m != 0 {
                acc = acc.plus(&self.eval(b)?.scale(&qi(m)));
            }
        }
        Ok(acc)
    }

    pub fn moment_n(&self, n: usize) -> Result<Poly> {
        self.moment_n_with(n, &Atlas::from_env())
    }

    /// `m_n(a) = Σ_{b ∈ B_n} a(b)`.
    pub fn moment_n_with(&self, n: usize, atlas: &Atlas) -> Result<Poly> {
        if n == 0 {
            return Ok(Poly::unit());
        }
        let maps = atlas.get(self.p, n)?;
        let vals: Result<Vec<Poly>> = maps.par_iter().map(|m| self.eval(m)).collect();
        Ok(vals?.iter().fold(Poly::nil(), |a, b| a.plus(b)))
    }

    pub fn cumulant_n(&self, n: usize) -> Result<Poly> {
        self.cumulant_n_with(n, &Atlas::from_env())
    }

    /// `κ_n(a) = Σ_{b ∈ B_n} κ_b(a)`.
    pub fn cumulant_n_with(&self, n: usize, atlas: &Atlas) -> Result<Poly> {
        if n == 0 {
            return Ok(Poly::unit());
        }
        let maps = atlas.get(self.p, n)?;
        let vals: Result<Vec<Poly>> = maps.par_iter().map(|m| self.cumulant_of_map(m)).collect();
        Ok(vals?.iter().fold(Poly::nil(), |a, b| a.plus(b)))
    }

    /// Rows `(n, m_n, κ_n)` for `n = 0..=n_max`; `κ_n` is `None` for odd orders.
    pub fn table(&self, n_max: usize, atlas: &Atlas) -> Result<Vec<(usize, Poly, Option<Poly>)>> {
        (0..=n_max)
            .map(|n| {
                let k = if self.repr == Representation::Cumulant { Some(self.cumulant_n_with(n, atlas)?) } else { None };
                Ok((n, self.moment_n_with(n, atlas)?, k))
            })
            .collect()
    }

    pub fn table_csv(&self, n_max: usize, atlas: &Atlas) -> Result<String> {
        let mut out = String::from("n,m_n,kappa_n\n");
        for (n, m, k) in self.table(n_max, atlas)? {
            out += &format!("{n},{},{}\n", render_value(&m), k.as_ref().map_or(String::new(), render_value));
        }
        Ok(out)
    }
}

/// Constants as `num/den`, polynomials in `t` otherwise.
pub fn render_value(v: &Poly) -> String {
    match v.as_constant() {
        Some(c) => fmt_q(&c),
        None => v.render(),
    }
}

/// Free sum: cumulant rules add on connected maps.
pub fn free_sum(a: &MapDistribution, b: &MapDistribution) -> Result<MapDistribution> {
    if a.p != b.p {
        return Err(Error::Domain(format!("orders differ: {} and {}", a.p, b.p)));
    }
    if a.repr != Representation::Cumulant || b.repr != Representation::Cumulant {
        return Err(Error::Unsupported("free sum needs two cumulant-rule distributions".into()));
    }
    let mut parts = Vec::new();
    for r in [&a.rule, &b.rule] {
        match r {
            Rule::Sum(rs) => parts.extend(rs.iter().cloned()),
            Rule::Zero => {}
            other => parts.push(other.clone()),
        }
    }
    let rule = match parts.len() {
        0 => Rule::Zero,
        1 => parts.pop().expect("one part"),
        _ => Rule::Sum(parts),
    };
    Ok(MapDistribution::with_rule(a.p, rule, Representation::Cumulant))
}

fn is_melon(map: &CombMap) -> bool {
    map.vertex_count() == 2 && map.is_melon_union()
}

fn rule_value(rule: &Rule, p: usize, map: &CombMap) -> Poly {
    match rule {
        Rule::Melonic => {
            if is_melon(map) {
                Poly::constant(Q::one() / qbig(factorial(p as u64 - 1)))
            } else {
                Poly::nil()
            }
        }
        Rule::FreePoisson { t } => {
            let w = cycle_weight(p, map);
            if w.is_zero() {
                Poly::nil()
            } else {
                t.scale(&w)
            }
        }
        Rule::Identity { t } => {
            if map.vertex_count() == 1 {
                let dfact: u64 = (1..p as u64).step_by(2).product();
                t.scale(&Q::new(1.into(), dfact.into()))
            } else {
                Poly::nil()
            }
        }
        Rule::Zero => Poly::nil(),
        Rule::Sum(rs) => rs.iter().fold(Poly::nil(), |acc, r| acc.plus(&rule_value(r, p, map))),
    }
}

/// Direct moment rule: only the melonic rule has one, summing
/// `(1/(p-1)!)^{#melons}` over melon unions in the down-set.
fn moment_rule(rule: &Rule, p: usize, view: &PosetView) -> Poly {
    match rule {
        Rule::Melonic => {
            let w = Q::one() / qbig(factorial(p as u64 - 1));
            let total = view
                .nodes
                .iter()
                .filter(|b| b.is_melon_union())
                .map(|b| crate::rational::pow_q(&w, b.gamma() as i64))
                .fold(Q::zero(), |a, b| a + b);
            Poly::constant(total)
        }
        _ => unreachable!("moment form is only built for the melonic rule"),
    }
}

/// Weight of `b_{p,1}` on a connected map with `k` vertices:
/// `p^{k-1} / (h!)^k · V / C(p,h)^k` with `h = p/2`, where `V` counts the
/// out-sets at vertex 0 whose forced chain (every out half-edge lands in
/// the in-set of one common next vertex) closes into a single `k`-cycle.
pub fn cycle_weight(p: usize, map: &CombMap) -> Q {
    let k = map.vertex_count();
    let h = p / 2;
    let full: u64 = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let mut closed = 0u64;
    let mut out = vec![0u64; k];
    for s0 in 0..=full {
        if s0.count_ones() as usize != h {
            continue;
        }
        out.iter_mut().for_each(|x| *x = 0);
        out[0] = s0;
        let (mut v, mut visited) = (0usize, 1usize);
        loop {
            let mut next = None;
            let mut hit = 0u64;
            let mut ok = true;
            for j in 0..p {
                if out[v] >> j & 1 == 0 {
                    continue;
                }
                let partner = map.alpha()[map.cycles()[v][j]];
                let w = map.vertex_of(partner);
                if *next.get_or_insert(w) != w {
                    ok = false;
                    break;
                }
                hit |= 1 << map.position(partner);
            }
            if !ok {
                break;
            }
            let w = next.expect("h ≥ 1");
            let comp = full ^ hit;
            if w == 0 {
                if visited == k && comp == s0 {
                    closed += 1;
                }
                break;
            }
            if out[w] != 0 {
                break;
            }
            out[w] = comp;
            visited += 1;
            v = w;
        }
    }
    if closed == 0 {
        return Q::zero();
    }
    let num = qbig(num_bigint::BigInt::from(p).pow(k as u32 - 1)) * qi(closed as i64);
    let den = qbig(factorial(h as u64).pow(k as u32)) * qbig(binom(p as u64, h as u64).pow(k as u32));
    num / den
}
