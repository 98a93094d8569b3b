//! Property tests through the public API.

use freetensor::ensembles::EnsembleConfig;
use freetensor::map::{enumerate_bn, melon};
use freetensor::poset::{down_set, is_melonic};
use freetensor::rational::{q, Q};
use freetensor::series::{cumulants_from_moments, law_cumulants, law_moments, moments_from_cumulants, verify_functional, CumulantSeries, Law, MomentSeries};
use freetensor::tensor::{eval_trace_invariant, PlanCache};
use freetensor::{CombMap, DenseTensor, Permutation};
use proptest::prelude::*;

/// Random fixed-point-free pairing on `m` half-edges, from a shuffle.
fn pairing_from(order: &[usize]) -> Vec<usize> {
    let mut alpha = vec![0; order.len()];
    for pair in order.chunks(2) {
        alpha[pair[0]] = pair[1];
        alpha[pair[1]] = pair[0];
    }
    alpha
}

fn arb_map(p: usize, max_vertices: usize) -> impl Strategy<Value = CombMap> {
    (1..=max_vertices)
        .prop_filter("even half-edge count", move |v| (v * p).is_multiple_of(2))
        .prop_flat_map(move |v| (Just(v), Just((0..v * p).collect::<Vec<_>>()).prop_shuffle()))
        .prop_map(move |(v, order)| CombMap::from_blocks(&vec![p; v], pairing_from(&order)).expect("valid map"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maps_are_well_formed(m in arb_map(3, 4)) {
        let alpha = m.pairing();
        prop_assert!(alpha.compose(&alpha).is_identity());
        prop_assert!(alpha.fixed_points().is_empty());
        prop_assert_eq!(m.degrees().iter().sum::<usize>(), m.half_edges());
        let parts = m.components();
        prop_assert_eq!(parts.len() == 1, m.is_connected());
        prop_assert_eq!(parts.iter().map(CombMap::vertex_count).sum::<usize>(), m.vertex_count());
    }

    #[test]
    fn switches_move_gamma_by_one_step(m in arb_map(4, 3)) {
        for s in m.all_switches() {
            prop_assert!(s.gamma().abs_diff(m.gamma()) <= 1);
        }
    }

    #[test]
    fn down_sets_start_at_the_map(m in arb_map(3, 4).prop_filter("connected", CombMap::is_connected)) {
        let ds = down_set(&m).unwrap();
        prop_assert_eq!(ds[0].canonical_code(), m.canonical_code());
        if is_melonic(&m).unwrap() {
            prop_assert_eq!(m.vertex_count() % 2, 0);
        }
    }

    #[test]
    fn perturbed_pairs_fail_the_functional_relation(vals in prop::collection::vec(-5i64..=5, 6), at in 1usize..=6, bump in 1i64..=3) {
        let mut c: Vec<Q> = vec![Q::from_integer(1.into())];
        c.extend(vals.iter().map(|&x| q(x, 2)));
        let cs = CumulantSeries::new(4, c).unwrap();
        let ms = moments_from_cumulants(&cs).unwrap();
        prop_assert!(verify_functional(&ms, &cs));
        prop_assert_eq!(&cumulants_from_moments(&ms).unwrap(), &cs);
        let mut bad = ms.coeffs().to_vec();
        bad[at] += Q::from_integer(bump.into());
        prop_assert!(!verify_functional(&MomentSeries::new(4, bad).unwrap(), &cs));
    }

    #[test]
    fn odd_order_laws_vanish_in_odd_degrees(p in prop::sample::select(vec![1usize, 3, 5]), t in 1i64..=9) {
        for law in [Law::Semicircular { p }, Law::FreePoisson { p, t: q(t, 3) }] {
            let m = law_moments(&law, 8).unwrap();
            let c = law_cumulants(&law, 8).unwrap();
            for n in (1..=8).step_by(2) {
                prop_assert_eq!(m.m(n), Q::from_integer(0.into()));
                prop_assert_eq!(c.kappa(n), Q::from_integer(0.into()));
            }
        }
    }

    #[test]
    fn tensors_survive_a_dump(data in prop::collection::vec(-1e3f64..1e3, 27)) {
        let t = DenseTensor::new(3, 3, data).unwrap();
        let mut buf = Vec::new();
        t.dump(&mut buf).unwrap();
        prop_assert_eq!(DenseTensor::load(&buf[..]).unwrap(), t);
    }

    #[test]
    fn invariants_are_linear_in_each_vertex(a in prop::collection::vec(-1f64..1.0, 27), b in prop::collection::vec(-1f64..1.0, 27), s in -2f64..2.0) {
        let m = melon(3, &Permutation::identity(3)).unwrap();
        let (ta, tb) = (DenseTensor::new(3, 3, a).unwrap(), DenseTensor::new(3, 3, b).unwrap());
        let mix = ta.scale(s).add(&tb).unwrap();
        let lhs = eval_trace_invariant(&m, &[&mix, &ta]).unwrap();
        let rhs = s * eval_trace_invariant(&m, &[&ta, &ta]).unwrap() + eval_trace_invariant(&m, &[&tb, &ta]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn samples_depend_only_on_seed_and_trial(seed in any::<u64>(), trial in 0u64..1000) {
        let cfg = EnsembleConfig::wigner(3, 4, seed);
        let x = cfg.sample(&mut cfg.rng(trial)).unwrap();
        let y = cfg.sample(&mut cfg.rng(trial)).unwrap();
        let z = cfg.sample(&mut cfg.rng(trial + 1)).unwrap();
        prop_assert!(x.is_symmetric());
        prop_assert_eq!(&x, &y);
        prop_assert_ne!(&x, &z);
    }
}

#[test]
fn plan_cache_reuses_plans() {
    let cache = PlanCache::new();
    let maps = enumerate_bn(3, 2).unwrap();
    for m in maps.iter().chain(&maps) {
        cache.get(m);
    }
    assert_eq!(cache.len(), maps.len());
}
