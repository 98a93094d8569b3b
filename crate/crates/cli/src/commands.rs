use crate::output::{emit, Artifact, RunConfig};
use crate::{Common, CouplingArg, EntryArg, Failure, LawArgs, MapArgs, SimArgs, SimFamily};
use freetensor::checks::{self, Criterion};
use freetensor::ensembles::{estimate_moments, EnsembleConfig, EntryLaw, RankCoupling};
use freetensor::map::{build_map, enumerate_bn, Atlas, AtlasRecord, CanonicalCode};
use freetensor::poset::{is_melonic, PosetView};
use freetensor::rational::{fmt_q, parse_q, Q};
use freetensor::series::{
    cauchy_pair_check, clt_rescale, cumulants_from_moments, free_convolve, law_cumulants, law_moments, poisson_limit_check, q_transform, r_transform, series_from_json,
    series_to_json, verify_functional, MomentSeries, Ring,
};
use freetensor::CombMap;
use sha2::{Digest, Sha256};
use std::path::Path;

fn atlas(common: &Common) -> Atlas {
    match &common.cache_dir {
        Some(d) => Atlas::with_dir(d),
        None => Atlas::in_memory(),
    }
}

pub fn enumerate(common: &Common, p: usize, n: usize) -> Result<(), Failure> {
    let mut cfg = RunConfig::new("enumerate", common);
    cfg.p = Some(p);
    cfg.n_max = Some(n);
    let maps = atlas(common).get(p, n)?;
    let records: Vec<AtlasRecord> = maps.iter().map(|m| AtlasRecord::from_map(p, n, m)).collect();
    let mut a = Artifact::new(&["index", "code", "gamma", "cycles", "pairing"]);
    for (i, r) in records.iter().enumerate() {
        a.row(vec![i.to_string(), r.code.clone(), r.gamma.to_string(), render_cycles(&r.cycles), render_pairs(&r.pairing)]);
    }
    a.set("count", records.len());
    a.set("classes", &records);
    emit(common, &cfg, a)
}

fn render_cycles(c: &[Vec<usize>]) -> String {
    c.iter().map(|v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";")
}

fn render_pairs(p: &[(usize, usize)]) -> String {
    p.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>, Failure> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| Failure::Usage(format!("bad {what}: {s:?}")))).collect()
}

fn parse_map(m: &MapArgs) -> Result<CombMap, Failure> {
    if let Some(code) = &m.code {
        return Ok(CanonicalCode::from_hex(code)?.to_map()?);
    }
    let (Some(cycles), Some(pairs)) = (&m.cycles, &m.pairs) else {
        return Err(Failure::Usage("give --code or both --cycles and --pairs".into()));
    };
    let cycles = cycles.split(';').map(|c| parse_list(c, "cycle")).collect::<Result<Vec<_>, _>>()?;
    let pairs = pairs
        .split(',')
        .map(|e| {
            let (a, b) = e.split_once('-').ok_or_else(|| Failure::Usage(format!("bad pair {e:?}")))?;
            let a = a.trim().parse().map_err(|_| Failure::Usage(format!("bad pair {e:?}")))?;
            let b = b.trim().parse().map_err(|_| Failure::Usage(format!("bad pair {e:?}")))?;
            Ok((a, b))
        })
        .collect::<Result<Vec<(usize, usize)>, Failure>>()?;
    Ok(build_map(&cycles, &pairs)?)
}

pub fn poset(common: &Common, m: &MapArgs) -> Result<(), Failure> {
    let map = parse_map(m)?;
    let cfg = RunConfig::new("poset", common).detail("cycles", map.cycles_one_based()).detail("pairing", map.pairs_one_based());
    let view = PosetView::build(&map)?;
    let mu = view.moebius_to_top();
    let dump = view.to_json();
    let mut a = Artifact::new(&["id", "code", "gamma", "moebius_to_top", "below"]);
    for (node, m) in dump["nodes"].as_array().expect("node list").iter().zip(&mu) {
        let below: Vec<String> = node["below"].as_array().expect("below list").iter().map(|b| b.to_string()).collect();
        a.row(vec![node["id"].to_string(), node["code"].as_str().unwrap_or_default().into(), node["gamma"].to_string(), m.to_string(), below.join(";")]);
    }
    a.set("code", map.canonical_code().to_hex());
    a.set("size", view.len());
    a.set("is_melonic", is_melonic(&map)?);
    a.set("moebius_to_top", &mu);
    a.set("poset", dump);
    emit(common, &cfg, a)
}

fn law_config(name: &str, common: &Common, l: &LawArgs) -> RunConfig {
    let mut cfg = RunConfig::new(name, common);
    cfg.p = Some(l.p);
    cfg.k = Some(l.k);
    cfg.t = Some(l.t.clone());
    cfg.tau = Some(l.tau.clone());
    cfg.detail("family", l.family).detail("dilation", &l.dilation).detail("scale", &l.scale)
}

fn cell<R: Ring>(c: &[R], n: usize) -> String {
    c.get(n).map(Ring::render).unwrap_or_default()
}

pub fn laws(common: &Common, l: &LawArgs) -> Result<(), Failure> {
    let law = l.law()?;
    let cfg = law_config("laws", common, l);
    let m = law_moments(&law, l.k)?;
    let c = law_cumulants(&law, l.k)?;
    let mut a = Artifact::new(&["n", "m_n", "kappa_n"]);
    for n in 0..=l.k {
        a.row(vec![n.to_string(), cell(m.coeffs(), n), cell(c.coeffs(), n)]);
    }
    a.set("law", law.name());
    a.set("moments", series_to_json(m.coeffs()));
    a.set("cumulants", series_to_json(c.coeffs()));
    emit(common, &cfg, a)
}

/// Accepts a bare array of coefficients or an object with a `moments` array.
fn read_moments(path: &Path, p: usize, k: Option<usize>) -> Result<MomentSeries<Q>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let arr = if v.is_array() { &v } else { &v["moments"] };
    let mut c = series_from_json(arr)?;
    if let Some(k) = k {
        if c.len() < k + 1 {
            return Err(Failure::Usage(format!("{} has moments only up to order {}", path.display(), c.len().saturating_sub(1))));
        }
        c.truncate(k + 1);
    }
    Ok(MomentSeries::new(p, c)?)
}

pub fn convolve(common: &Common, a_path: &Path, b_path: &Path, p: usize, k: Option<usize>) -> Result<(), Failure> {
    let mut ma = read_moments(a_path, p, k)?;
    let mut mb = read_moments(b_path, p, k)?;
    let trunc = ma.truncation().min(mb.truncation());
    ma = MomentSeries::new(p, ma.coeffs()[..=trunc].to_vec())?;
    mb = MomentSeries::new(p, mb.coeffs()[..=trunc].to_vec())?;
    let mut cfg = RunConfig::new("convolve", common).detail("inputs", [a_path.display().to_string(), b_path.display().to_string()]);
    cfg.p = Some(p);
    cfg.k = Some(trunc);
    let sum = free_convolve(&ma, &mb)?;
    let c = cumulants_from_moments(&sum)?;
    let mut a = Artifact::new(&["n", "m_n", "kappa_n"]);
    for n in 0..=trunc {
        a.row(vec![n.to_string(), cell(sum.coeffs(), n), cell(c.coeffs(), n)]);
    }
    a.set("moments", series_to_json(sum.coeffs()));
    a.set("cumulants", series_to_json(c.coeffs()));
    emit(common, &cfg, a)
}

pub fn transform(common: &Common, l: &LawArgs, input: Option<&Path>) -> Result<(), Failure> {
    let (m, cfg) = match input {
        Some(path) => {
            let m = read_moments(path, l.p, Some(l.k))?;
            let mut cfg = RunConfig::new("transform", common).detail("input", path.display().to_string());
            cfg.p = Some(l.p);
            cfg.k = Some(l.k);
            (m, cfg)
        }
        None => (law_moments(&l.law()?, l.k)?, law_config("transform", common, l)),
    };
    let c = cumulants_from_moments(&m)?;
    let r = r_transform(&c);
    let q = q_transform(&c)?;
    let functional = verify_functional(&m, &c);
    // the Cauchy pair is only defined for even order and needs one spare coefficient
    let cauchy = if m.p % 2 == 0 && l.k >= 2 { Some(cauchy_pair_check(&m, l.k - 1)?) } else { None };
    let mut a = Artifact::new(&["n", "m_n", "kappa_n", "r_n", "q_n"]);
    for n in 0..=l.k {
        a.row(vec![n.to_string(), cell(m.coeffs(), n), cell(c.coeffs(), n), cell(r.coeffs(), n), cell(q.coeffs(), n)]);
    }
    a.set("moments", series_to_json(m.coeffs()));
    a.set("cumulants", series_to_json(c.coeffs()));
    a.set("r_transform", series_to_json(r.coeffs()));
    a.set("q_transform", series_to_json(q.coeffs()));
    a.set("functional_relation", functional);
    a.set("cauchy", cauchy.as_ref().map(|x| serde_json::json!({ "kg": x.kg, "gk": x.gk, "truncation": x.truncation })));
    emit(common, &cfg, a)?;
    match cauchy {
        _ if !functional => Err(Failure::Check("moment/cumulant functional relation failed".into())),
        Some(x) if !x.holds() => Err(Failure::Check(format!("Cauchy identities failed: K(G(z)) = z {}, G(K(z)) = z {}", x.kg, x.gk))),
        _ => Ok(()),
    }
}

fn ensemble(family: &SimFamily) -> (&SimArgs, EnsembleConfig) {
    let (s, mut cfg) = match family {
        SimFamily::Wigner(s) => (s, EnsembleConfig::wigner(s.p, s.ns[0], s.seed)),
        SimFamily::Wishart(s) => {
            let mut c = EnsembleConfig::wishart(s.p, s.ns[0], s.t, s.seed);
            c.coupling = match s.coupling {
                CouplingArg::HalfPower => RankCoupling::HalfPower,
                CouplingArg::Linear => RankCoupling::Linear,
            };
            c.rank = s.rank;
            c.variance = s.variance;
            (s, c)
        }
    };
    cfg.entries = match s.entries {
        EntryArg::Gaussian => EntryLaw::Gaussian,
        EntryArg::Rademacher => EntryLaw::Rademacher,
    };
    (s, cfg)
}

pub fn simulate(common: &Common, family: &SimFamily) -> Result<(), Failure> {
    let (s, base) = ensemble(family);
    let mut cfg = RunConfig::new("simulate", common).detail("ensemble", &base);
    cfg.p = Some(s.p);
    cfg.n_max = Some(s.n_max);
    cfg.ladder = s.ns.clone();
    cfg.trials = Some(s.trials);
    cfg.seed = Some(s.seed);
    let atlas = atlas(common);
    let mut a = Artifact::new(&["N", "n", "mean", "stderr", "variance", "trials"]);
    let mut reports = Vec::new();
    for &n in &s.ns {
        let r = estimate_moments(&base.clone().with_n(n), s.n_max, s.trials, &atlas)?;
        for st in &r.stats {
            let order = st.n.map(|x| x.to_string()).unwrap_or_default();
            a.row(vec![n.to_string(), order, format!("{:e}", st.mean), format!("{:e}", st.stderr), format!("{:e}", st.variance), st.trials.to_string()]);
        }
        reports.push(r);
    }
    a.set("reports", &reports);
    emit(common, &cfg, a)
}

pub fn clt(common: &Common, l: &LawArgs, ks: &[u64], poisson_t: &[String]) -> Result<(), Failure> {
    if !poisson_t.is_empty() {
        let ts = poisson_t.iter().map(|t| parse_q(t)).collect::<Result<Vec<_>, _>>()?;
        let mut cfg = RunConfig::new("clt", common).detail("poisson_t", ts.iter().map(fmt_q).collect::<Vec<_>>());
        cfg.p = Some(l.p);
        cfg.k = Some(l.k);
        let report = poisson_limit_check(l.p, &ts, l.k)?;
        let mut a = Artifact::new(&["t", "n", "kappa_n", "m_n", "semicircular_m_n"]);
        for row in &report.rows {
            for n in 0..row.moments.len() {
                a.row(vec![row.t.clone(), n.to_string(), row.cumulants.get(n).cloned().unwrap_or_default(), format!("{:e}", row.moments[n]), format!("{:e}", row.semicircular[n])]);
            }
        }
        let exact = report.exact();
        a.set("cumulants_exact", exact);
        a.set("report", &report);
        emit(common, &cfg, a)?;
        return if exact { Ok(()) } else { Err(Failure::Check("rescaled cumulants differ from the semicircular ones".into())) };
    }
    let law = l.law()?;
    let cfg = law_config("clt", common, l).detail("k", ks);
    let c = law_cumulants(&law, l.k)?;
    let mut a = Artifact::new(&["k", "n", "kappa_n"]);
    let mut rows = Vec::new();
    for &k in ks {
        let r = clt_rescale(&c, k)?;
        let rendered: Vec<String> = r.coeffs().iter().map(Ring::render).collect();
        for (n, x) in rendered.iter().enumerate() {
            a.row(vec![k.to_string(), n.to_string(), x.clone()]);
        }
        rows.push(serde_json::json!({ "k": k, "cumulants": rendered }));
    }
    a.set("law", law.name());
    a.set("rescaled", rows);
    emit(common, &cfg, a)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fresh enumerations against the cache, by checksum.
fn cache_coherence(atlas: &Atlas) -> Result<Vec<serde_json::Value>, Failure> {
    let mut out = Vec::new();
    for (p, n) in [(2, 4), (3, 2), (3, 4), (4, 2)] {
        let fresh = Atlas::render(p, n, &enumerate_bn(p, n)?)?;
        atlas.get(p, n)?;
        let path = atlas.cache_path(p, n).expect("atlas with a directory");
        let cached = std::fs::read(&path)?;
        let (f, c) = (sha256_hex(fresh.as_bytes()), sha256_hex(&cached));
        out.push(serde_json::json!({ "p": p, "n": n, "fresh_sha256": f, "cached_sha256": c, "match": f == c }));
    }
    Ok(out)
}

pub fn selftest(common: &Common, only: &[String], ns: Vec<usize>, trials: usize, wishart_trials: usize) -> Result<(), Failure> {
    let ids: Vec<String> = only.iter().map(|s| s.trim_start_matches('0').to_string()).collect();
    let known = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "9b", "10", "10b", "11", "12", "13"];
    if let Some(bad) = ids.iter().find(|i| !known.contains(&i.as_str())) {
        return Err(Failure::Usage(format!("unknown criterion {bad:?}")));
    }
    let mut cfg = RunConfig::new("selftest", common).detail("only", &ids).detail("wishart_trials", wishart_trials);
    cfg.ladder = ns.clone();
    cfg.trials = Some(trials);
    cfg.seed = Some(checks::CHECK_SEED);
    let (atlas, scratch) = match &common.cache_dir {
        Some(d) => (Atlas::with_dir(d), None),
        None => {
            let d = std::env::temp_dir().join(format!("freetensor-selftest-{}", std::process::id()));
            (Atlas::with_dir(&d), Some(d))
        }
    };
    let wanted = |id: &str| ids.is_empty() || ids.iter().any(|i| i == id);
    let mut results: Vec<Criterion> = Vec::new();
    let run = |id: &str| -> freetensor::Result<Criterion> {
        match id {
            "1" => checks::law_tables(),
            "2" => checks::combinatorial_moments(&atlas),
            "3" => checks::round_trip(),
            "4" => checks::functional_relation(),
            "5" => checks::convolution(),
            "6" => checks::cauchy_identity(),
            "7" => checks::nc_oracle(),
            "8" => checks::wigner_monte_carlo(&ns, trials, &atlas),
            "9" => checks::wishart_monte_carlo(&ns, wishart_trials, &atlas),
            "9b" => checks::wishart_linear_rank(&ns, wishart_trials, &atlas),
            "10" => checks::per_map_convergence(&ns, trials),
            "10b" => checks::per_map_engine_values(&ns, trials),
            "11" => checks::exact_clt(),
            "12" => checks::poisson_limit(),
            _ => checks::tensor_invariants(),
        }
    };
    for id in known.iter().filter(|id| wanted(id)) {
        let c = run(id)?;
        eprintln!("{}", c.line());
        results.push(c);
    }
    let coherence = cache_coherence(&atlas);
    if let Some(d) = scratch {
        let _ = std::fs::remove_dir_all(d);
    }
    let coherence = coherence?;
    let cache_ok = coherence.iter().all(|c| c["match"] == true);
    eprintln!("[{}] cache coherence over {} atlases", if cache_ok { "PASS" } else { "FAIL" }, coherence.len());
    let mut a = Artifact::new(&["id", "name", "passed", "detail"]);
    for c in &results {
        a.row(vec![c.id.clone(), c.name.clone(), c.passed.to_string(), c.detail.clone()]);
    }
    a.row(vec!["cache".into(), "cache coherence".into(), cache_ok.to_string(), format!("{} atlases", coherence.len())]);
    let failed: Vec<String> = results.iter().filter(|c| !c.passed).map(|c| c.id.clone()).collect();
    a.set("criteria", &results);
    a.set("cache_coherence", &coherence);
    a.set("passed", failed.is_empty() && cache_ok);
    emit(common, &cfg, a)?;
    if failed.is_empty() && cache_ok {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", if cache_ok { failed.join(", ") } else { [failed, vec!["cache".into()]].concat().join(", ") })))
    }
}
