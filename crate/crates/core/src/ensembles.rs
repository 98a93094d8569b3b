//! Seeded Wigner and Wishart tensor samplers and Monte Carlo estimators.
//!
//! Trial `i` of a run with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `i`, so every trial is reproducible on its own.

use crate::error::{Error, Result};
use crate::map::{Atlas, CombMap};
use crate::perm::Permutation;
use crate::tensor::{DenseTensor, PlanCache};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Wigner,
    Wishart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
}

/// How the Wishart rank follows `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankCoupling {
    /// `k = round(t·N^{p/2})`
    HalfPower,
    /// `k = round(t·N)`
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub family: Family,
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: EntryLaw,
    /// Wishart rank ratio.
    pub t: f64,
    pub coupling: RankCoupling,
    /// Explicit Wishart rank, overriding `t` and `coupling`.
    pub rank: Option<usize>,
    /// Odd Wishart split `(p1, p2)`; defaults to `((p+1)/2, (p-1)/2)`.
    pub split: Option<(usize, usize)>,
    /// Entry variance of the Wishart factors, overriding the default `1/η_p` rule.
    pub variance: Option<f64>,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn wigner(p: usize, n: usize, seed: u64) -> Self {
        EnsembleConfig { family: Family::Wigner, p, n, entries: EntryLaw::Gaussian, t: 1.0, coupling: RankCoupling::HalfPower, rank: None, split: None, variance: None, seed }
    }

    pub fn wishart(p: usize, n: usize, t: f64, seed: u64) -> Self {
        EnsembleConfig { family: Family::Wishart, ..Self::wigner(p, n, seed) }.with_t(t)
    }

    fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_entries(mut self, e: EntryLaw) -> Self {
        self.entries = e;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::Validation("p and N must be positive".into()));
        }
        if self.family == Family::Wishart {
            if self.rank() == 0 {
                return Err(Error::Validation("Wishart rank must be positive".into()));
            }
            if self.p % 2 == 1 {
                let (a, b) = self.split();
                if a == 0 || b == 0 || a + b != self.p {
                    return Err(Error::Validation(format!("invalid split ({a}, {b}) for p = {}", self.p)));
                }
            }
            if self.variance.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::Validation("variance must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank.unwrap_or_else(|| {
            let base = match self.coupling {
                RankCoupling::HalfPower => (self.n as f64).powf(self.p as f64 / 2.0),
                RankCoupling::Linear => self.n as f64,
            };
            (self.t * base).round() as usize
        })
    }

    pub fn split(&self) -> (usize, usize) {
        self.split.unwrap_or((self.p.div_ceil(2), self.p / 2))
    }

    /// Generator for trial `trial`.
    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(trial);
        r
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DenseTensor> {
        match self.family {
            Family::Wigner => sample_wigner(self, rng),
            Family::Wishart => sample_wishart(self, rng),
        }
    }
}

fn draw<R: Rng + ?Sized>(law: EntryLaw, sd: f64, rng: &mut R) -> f64 {
    match law {
        EntryLaw::Gaussian => sd * rng.sample::<f64, _>(StandardNormal),
        EntryLaw::Rademacher => {
            if rng.random::<bool>() {
                sd
            } else {
                -sd
            }
        }
    }
}

/// Number of distinct rearrangements of an index tuple.
pub fn class_size(idx: &[usize]) -> u64 {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &i in idx {
        *counts.entry(i).or_default() += 1;
    }
    let fact = |k: u64| (1..=k).product::<u64>();
    fact(idx.len() as u64) / counts.values().map(|&c| fact(c)).product::<u64>()
}

/// `X / N^{(p-1)/2}` with one draw of variance `p/P_i` per index class,
/// drawn in increasing order of the sorted index tuples.
pub fn sample_wigner<R: Rng + ?Sized>(cfg: &EnsembleConfig, rng: &mut R) -> Result<DenseTensor> {
    cfg.validate()?;
    let (p, n) = (cfg.p, cfg.n);
    let scale = (n as f64).powf(-((p as f64 - 1.0) / 2.0));
    let mut data = vec![0.0; n.pow(p as u32)];
    let mut idx = vec![0usize; p];
    let mut sorted = vec![0usize; p];
    for off in 0..data.len() {
        sorted.copy_from_slice(&idx);
        sorted.sort_unstable();
        if sorted == idx {
            let sd = (p as f64 / class_size(&idx) as f64).sqrt();
            data[off] = draw(cfg.entries, sd, rng) * scale;
        } else {
            // the sorted tuple has a smaller offset, so it is already drawn
            data[off] = data[sorted.iter().fold(0, |a, &i| a * n + i)];
        }
        crate::tensor::odometer(&mut idx, n);
    }
    Ok(DenseTensor::from_parts(p, n, data, true))
}

/// Default factor variances: `1/η_p` for even `p`, `1/[p_i!]^{1/p}` per factor for odd `p`.
pub fn wishart_variances(cfg: &EnsembleConfig) -> (f64, f64) {
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    if let Some(v) = cfg.variance {
        return (v, v);
    }
    let p = cfg.p as f64;
    if cfg.p.is_multiple_of(2) {
        let v = 1.0 / fact(cfg.p / 2).powf(2.0 / p);
        (v, v)
    } else {
        let (a, b) = cfg.split();
        (1.0 / fact(a).powf(1.0 / p), 1.0 / fact(b).powf(1.0 / p))
    }
}

/// `(x_1 ⊗̲ y_1 + … + x_k ⊗̲ y_k) / N^{p/2}` with `y = x` for even `p`.
/// The sum of plain outer products is one GEMM; it is symmetrized once.
pub fn sample_wishart<R: Rng + ?Sized>(cfg: &EnsembleConfig, rng: &mut R) -> Result<DenseTensor> {
    cfg.validate()?;
    let (p, n, k) = (cfg.p, cfg.n, cfg.rank());
    let (p1, p2) = if p % 2 == 0 { (p / 2, p / 2) } else { cfg.split() };
    let (vx, vy) = wishart_variances(cfg);
    let (d1, d2) = (n.pow(p1 as u32), n.pow(p2 as u32));
    let x: Vec<f64> = (0..k * d1).map(|_| draw(cfg.entries, vx.sqrt(), rng)).collect();
    let y: Vec<f64> = if p % 2 == 0 { x.clone() } else { (0..k * d2).map(|_| draw(cfg.entries, vy.sqrt(), rng)).collect() };
    let mut g = vec![0.0; d1 * d2];
    let scale = (n as f64).powf(-(p as f64) / 2.0);
    // g (d1 × d2) = Xᵀ (d1 × k) · Y (k × d2)
    unsafe {
        matrixmultiply::dgemm(d1, k, d2, scale, x.as_ptr(), 1, d1 as isize, y.as_ptr(), d2 as isize, 1, 0.0, g.as_mut_ptr(), d2 as isize, 1);
    }
    Ok(DenseTensor::from_parts(p, n, g, false).symmetrize())
}

/// `(T_1 + … + T_k)/√k` over fresh draws.
pub fn clt_superposition(k: usize, mut base: impl FnMut() -> Result<DenseTensor>) -> Result<DenseTensor> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    let mut acc = base()?;
    for _ in 1..k {
        let next = base()?;
        if next.order() != acc.order() || next.dim() != acc.dim() {
            return Err(Error::Validation("base sampler changed shape".into()));
        }
        acc.add_assign(&next);
    }
    Ok(acc.scale(1.0 / (k as f64).sqrt()))
}

/// Mean, variance and standard error of one statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Statistic {
    pub statistic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_code: Option<String>,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Statistic {
    fn from_samples(statistic: String, xs: &[f64], seed: u64) -> Self {
        let t = xs.len();
        let mean = pairwise_sum(xs) / t as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let variance = if t > 1 { pairwise_sum(&dev) / (t - 1) as f64 } else { 0.0 };
        Statistic { statistic, n: None, map_code: None, mean, variance, stderr: (variance / t as f64).sqrt(), trials: t, seed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloReport {
    pub config: EnsembleConfig,
    pub stats: Vec<Statistic>,
}

impl MonteCarloReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn get(&self, n: usize) -> Option<&Statistic> {
        self.stats.iter().find(|s| s.n == Some(n))
    }
}

/// `N,mean,stderr` rows for a convergence ladder.
pub fn ladder_csv(rows: &[(usize, &Statistic)]) -> String {
    let mut out = String::from("N,mean,stderr\n");
    for (n, s) in rows {
        out += &format!("{n},{:e},{:e}\n", s.mean, s.stderr);
    }
    out
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::Validation("at least two trials are needed".into()));
    }
    Ok(())
}

/// `b(T, …, T)` over independent draws.
pub fn estimate_map(map: &CombMap, cfg: &EnsembleConfig, trials: usize) -> Result<Statistic> {
    cfg.validate()?;
    check_trials(trials)?;
    if map.regular_degree() != Some(cfg.p) {
        return Err(Error::Domain(format!("map is not {}-regular", cfg.p)));
    }
    let plan = crate::tensor::plan_contraction(map);
    let xs: Result<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let t = cfg.sample(&mut cfg.rng(i))?;
            plan.execute(&vec![&t; map.vertex_count()])
        })
        .collect();
    let mut s = Statistic::from_samples("map".into(), &xs?, cfg.seed);
    s.map_code = Some(map.canonical_code().to_hex());
    Ok(s)
}

/// Adjacency multiplicities minimized over vertex relabelings. Symmetric
/// tensors give the same invariant on maps with equal keys.
pub fn multigraph_key(map: &CombMap) -> Vec<usize> {
    let n = map.vertex_count();
    let mut adj = vec![0usize; n * n];
    for (a, b) in map.edges() {
        let (u, v) = (map.vertex_of(a), map.vertex_of(b));
        adj[u * n + v] += 1;
        if u != v {
            adj[v * n + u] += 1;
        }
    }
    Permutation::all(n)
        .iter()
        .map(|s| {
            let img = s.images();
            (0..n * n).map(|k| adj[img[k / n] * n + img[k % n]]).collect::<Vec<usize>>()
        })
        .min()
        .unwrap_or_default()
}

/// Representatives of `B_n` grouped by multigraph, with multiplicities.
pub fn multigraph_classes(p: usize, n: usize, atlas: &Atlas) -> Result<Vec<(CombMap, usize)>> {
    let mut groups: BTreeMap<Vec<usize>, (CombMap, usize)> = BTreeMap::new();
    for m in atlas.get(p, n)? {
        groups.entry(multigraph_key(&m)).or_insert_with(|| (m, 0)).1 += 1;
    }
    Ok(groups.into_values().collect())
}

/// `m_n(T) = Σ_{b ∈ B_n} b(T, …, T)` for `n = 1..=n_max` over independent draws.
pub fn estimate_moments(cfg: &EnsembleConfig, n_max: usize, trials: usize, atlas: &Atlas) -> Result<MonteCarloReport> {
    cfg.validate()?;
    check_trials(trials)?;
    let groups: Vec<Vec<(CombMap, usize)>> = (1..=n_max).map(|n| multigraph_classes(cfg.p, n, atlas)).collect::<Result<_>>()?;
    let cache = PlanCache::new();
    let plans: Vec<Vec<_>> = groups.iter().map(|g| g.iter().map(|(m, _)| cache.get(m)).collect()).collect();
    let per_trial: Result<Vec<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let t = cfg.sample(&mut cfg.rng(i))?;
            groups
                .iter()
                .zip(&plans)
                .enumerate()
                .map(|(k, (g, ps))| {
                    let refs = vec![&t; k + 1];
                    let mut acc = 0.0;
                    for ((_, mult), plan) in g.iter().zip(ps) {
                        acc += *mult as f64 * plan.execute(&refs)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect();
    let per_trial = per_trial?;
    let stats = (1..=n_max)
        .map(|n| {
            let xs: Vec<f64> = per_trial.iter().map(|r| r[n - 1]).collect();
            let mut s = Statistic::from_samples(format!("m_{n}"), &xs, cfg.seed);
            s.n = Some(n);
            s
        })
        .collect();
    Ok(MonteCarloReport { config: cfg.clone(), stats })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{melon, multicycle_id, odd_multicycle};

    #[test]
    fn class_sizes() {
        assert_eq!(class_size(&[0, 1, 2]), 6);
        assert_eq!(class_size(&[0, 0, 1]), 3);
        assert_eq!(class_size(&[4, 4, 4]), 1);
    }

    #[test]
    fn wigner_is_symmetric_and_reproducible() {
        let cfg = EnsembleConfig::wigner(3, 5, 11);
        let a = cfg.sample(&mut cfg.rng(0)).unwrap();
        let b = cfg.sample(&mut cfg.rng(0)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, cfg.sample(&mut cfg.rng(1)).unwrap());
        for s in Permutation::all(3) {
            assert_eq!(a.permute_legs(&s).unwrap(), a);
        }
    }

    #[test]
    fn wigner_class_variances() {
        // entries are rescaled by N^{(p-1)/2} to recover the raw class variance
        let cfg = EnsembleConfig { n: 3, ..EnsembleConfig::wigner(3, 3, 5) };
        let draws = 10_000;
        let scale2 = 3f64.powi(2);
        let mut sums = [0.0f64; 3];
        let mut sq = [Vec::new(), Vec::new(), Vec::new()];
        for i in 0..draws {
            let t = cfg.sample(&mut cfg.rng(i)).unwrap();
            for (k, idx) in [[0, 1, 2], [0, 0, 1], [2, 2, 2]].iter().enumerate() {
                let x2 = t.get(idx).powi(2) * scale2;
                sums[k] += x2;
                sq[k].push(x2);
            }
        }
        for (k, expect) in [0.5, 1.0, 3.0].iter().enumerate() {
            let mean = sums[k] / draws as f64;
            let var: f64 = sq[k].iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!((mean - expect).abs() <= 5.0 * se, "class {k}: {mean} vs {expect} ± {se}");
        }
    }

    #[test]
    fn rademacher_entries_take_two_values() {
        let cfg = EnsembleConfig::wigner(2, 4, 3).with_entries(EntryLaw::Rademacher);
        let t = cfg.sample(&mut cfg.rng(0)).unwrap();
        let scale = 4f64.sqrt();
        for i in 0..4 {
            assert!(((t.get(&[i, i]) * scale).abs() - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn wishart_shapes_and_variances() {
        let cfg = EnsembleConfig::wishart(4, 3, 1.0, 1);
        assert_eq!(cfg.rank(), 9);
        assert!((wishart_variances(&cfg).0 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let t = cfg.sample(&mut cfg.rng(0)).unwrap();
        for s in Permutation::all(4) {
            assert!(t.permute_legs(&s).unwrap().max_abs_diff(&t) < 1e-12);
        }
        let odd = EnsembleConfig::wishart(3, 3, 1.0, 1);
        let (vx, vy) = wishart_variances(&odd);
        assert!((vx - 1.0 / 2f64.powf(1.0 / 3.0)).abs() < 1e-15 && (vy - 1.0).abs() < 1e-15);
        assert_eq!(odd.sample(&mut odd.rng(0)).unwrap().order(), 3);
        let bad = EnsembleConfig { split: Some((3, 1)), ..odd };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn classical_wishart_at_order_two() {
        let cfg = EnsembleConfig { rank: Some(6), variance: Some(1.0), ..EnsembleConfig::wishart(2, 4, 1.0, 9) };
        let t = cfg.sample(&mut cfg.rng(0)).unwrap();
        // same draws, rebuilt by hand as (1/N) Σ x xᵀ
        let mut r = cfg.rng(0);
        let x: Vec<f64> = (0..24).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let e: f64 = (0..6).map(|l| x[l * 4 + i] * x[l * 4 + j]).sum::<f64>() / 4.0;
                assert!((t.get(&[i, j]) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn superposition() {
        let cfg = EnsembleConfig::wigner(2, 3, 2);
        let mut r = cfg.rng(0);
        let one = clt_superposition(1, || cfg.sample(&mut r)).unwrap();
        assert_eq!(one, cfg.sample(&mut cfg.rng(0)).unwrap());
        assert!(clt_superposition(0, || cfg.sample(&mut r)).is_err());
        let mut r = cfg.rng(1);
        let four = clt_superposition(4, || cfg.sample(&mut r)).unwrap();
        assert!(four.is_symmetric());
    }

    #[test]
    fn multigraph_grouping_preserves_moments() {
        let atlas = Atlas::in_memory();
        let cfg = EnsembleConfig::wigner(3, 4, 3);
        let t = cfg.sample(&mut cfg.rng(0)).unwrap();
        for n in 1..=4 {
            let all: f64 = atlas.get(3, n).unwrap().iter().map(|m| crate::tensor::eval_trace_invariant(m, &vec![&t; n]).unwrap()).sum();
            let grouped: f64 = multigraph_classes(3, n, &atlas).unwrap().iter().map(|(m, k)| *k as f64 * crate::tensor::eval_trace_invariant(m, &vec![&t; n]).unwrap()).sum();
            assert!((all - grouped).abs() < 1e-10 * (1.0 + all.abs()));
        }
    }

    #[test]
    fn estimators_are_reproducible() {
        let cfg = EnsembleConfig::wigner(3, 6, 17);
        let a = estimate_moments(&cfg, 2, 8, &Atlas::in_memory()).unwrap();
        let b = estimate_moments(&cfg, 2, 8, &Atlas::in_memory()).unwrap();
        assert_eq!(a.stats, b.stats);
        assert!(a.get(1).unwrap().mean.abs() < 1e-12 || a.get(1).unwrap().mean.is_finite());
        let m = estimate_map(&melon(3, &Permutation::identity(3)).unwrap(), &cfg, 8).unwrap();
        assert_eq!(m, estimate_map(&melon(3, &Permutation::identity(3)).unwrap(), &cfg, 8).unwrap());
        assert!(estimate_map(&multicycle_id(4, 2).unwrap(), &cfg, 8).is_err());
        assert!(estimate_map(&odd_multicycle(3, 2).unwrap(), &cfg, 1).is_err());
        let json = a.to_json().unwrap();
        assert!(json.contains("\"N\": 6") && json.contains("\"statistic\": \"m_2\""));
        let csv = ladder_csv(&[(6, a.get(2).unwrap())]);
        assert!(csv.starts_with("N,mean,stderr\n6,"));
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.0)).collect();
        assert!((log_log_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }
}
