//! Property-based checks of the module invariants.

use proptest::prelude::*;

use schurlab::bench::{parse_params, ExperimentManifest};
use schurlab::besov::{besov_norm, dyadic_block, symbol_series, AnalyticSeries, Flavor};
use schurlab::hankel::{build_hankel, lattice::box_points, ClassTag, HankelSpec, IndexKind, TruncatedMatrix};
use schurlab::hankel::{shift_power, smoothed_shift, tau_transform, trace_product};
use schurlab::linalg::CMat;
use schurlab::medgraph::{product_graph, tree_ball};
use schurlab::mlab::{cb_norm_sdp, KernelMatrix};
use schurlab::symbolkit::{hoderiv, iterated_derivative, weighted_leibniz_check, TailPolicy};
use schurlab::{RadialSymbol, C64, Q};

fn rational_table(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((-60i128..60, 1i128..15).prop_map(|(a, b)| Q::new(a, b)), len)
}

fn complex_entry() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn catalog_symbol() -> impl Strategy<Value = RadialSymbol> {
    prop_oneof![
        (0.05f64..0.95).prop_map(RadialSymbol::geom),
        Just(RadialSymbol::parity()),
        (0.0f64..3.0).prop_map(RadialSymbol::alt_power),
        (0.0f64..3.0).prop_map(RadialSymbol::i_power),
        (0.0f64..3.0).prop_map(RadialSymbol::power),
        (1u32..4).prop_map(RadialSymbol::partial_sum),
        (0usize..8).prop_map(RadialSymbol::sphere),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn iterated_difference_matches_closed_form(a in rational_table(14..30), step in 1usize..=2, order in 0usize..=6) {
        let it = iterated_derivative(&a, step, order);
        for (n, v) in it.iter().enumerate() {
            prop_assert_eq!(hoderiv(&a, step, order, n).unwrap(), *v);
        }
    }

    #[test]
    fn step_two_difference_splits(a in rational_table(3..40)) {
        let d1 = iterated_derivative(&a, 1, 1);
        let d2 = iterated_derivative(&a, 2, 1);
        for n in 0..d2.len() {
            prop_assert_eq!(d2[n], d1[n] + d1[n + 1]);
        }
    }

    #[test]
    fn catalog_difference_identities(s in catalog_symbol(), order in 0usize..=6) {
        let a = s.sample(40).unwrap();
        let it = iterated_derivative(&a, 1, order);
        for (n, v) in it.iter().enumerate().take(20) {
            prop_assert!((hoderiv(&a, 1, order, n).unwrap() - v).norm() <= 1e-12 * (1.0 + v.norm()) * 64.0);
        }
    }

    #[test]
    fn weighted_leibniz_holds(a in rational_table(10..24), m in 0usize..6, seed in 0usize..1000) {
        let n = seed % (a.len() - m - 1);
        prop_assert!(weighted_leibniz_check(&a, n, m).unwrap());
    }

    #[test]
    fn sections_are_monotone(s in catalog_symbol(), level in 1usize..=3, class in 0usize..3, k in 2usize..40) {
        let tag = [ClassTag::A, ClassTag::B, ClassTag::C][class];
        let spec = HankelSpec::class(s, level, tag).unwrap();
        let big = build_hankel(&spec, k + 1).unwrap();
        let small = build_hankel(&spec, k).unwrap();
        prop_assert!(small.trace_norm() <= big.trace_norm() + 1e-9 * (1.0 + big.trace_norm()));
    }

    #[test]
    fn partition_of_unity(k in 1usize..4096) {
        let total: f64 = (0..=13).map(|n| dyadic_block(n).weight(k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn besov_subadditive(a in prop::collection::vec(complex_entry(), 65), b in prop::collection::vec(complex_entry(), 65)) {
        let sa = AnalyticSeries::new(a.clone(), "a").unwrap();
        let sb = AnalyticSeries::new(b.clone(), "b").unwrap();
        let sum = AnalyticSeries::new(a.iter().zip(&b).map(|(x, y)| x + y).collect(), "a+b").unwrap();
        let n = |s: &AnalyticSeries| besov_norm(s, 1.0, 5, 256).unwrap().partial;
        prop_assert!(n(&sum) <= n(&sa) + n(&sb) + 1e-9);
    }

    #[test]
    fn flavor_a_series_is_step_two_difference(a in rational_table(20..30), level in 1usize..=3) {
        // (z² - 1)^N Σ a_n z^n has coefficient 𝔡₂^N a(k - 2N) once k ≥ 2N
        let poly = Flavor::A.polynomial(level).unwrap();
        let series = schurlab::besov::multiply_truncated(&poly, &a);
        let d = iterated_derivative(&a, 2, level);
        for k in 2 * level..a.len() {
            let m = k - 2 * level;
            prop_assert_eq!(series[k], d[m]);
        }
    }

    #[test]
    fn tau_trace_identity(
        entries in prop::collection::vec(complex_entry(), 81),
        q in prop::collection::vec(2usize..=3, 2),
    ) {
        let (dim, side) = (2, 3);
        let t = TruncatedMatrix {
            entries: CMat::from_fn(9, 9, |a, b| entries[a * 9 + b]),
            index: IndexKind::Box { dim, side },
            provenance: "random".into(),
        };
        let tp = tau_transform(&t, &q).unwrap();
        let out = side + 1;
        let flat = |p: &[usize]| p.iter().fold(0usize, |acc, &c| acc * out + c);
        let pts = box_points(dim, side);
        let mut big = CMat::zeros(tp.size(), tp.size());
        for (a, pa) in pts.iter().enumerate() {
            for (b, pb) in pts.iter().enumerate() {
                big[(flat(pa), flat(pb))] = t.entries[(a, b)];
            }
        }
        for m in box_points(dim, 3) {
            for n in box_points(dim, 3) {
                let lhs = trace_product(&smoothed_shift(&m, &n, &q, out).unwrap().entries, &big);
                let rhs = trace_product(&shift_power(&m, &n, out).unwrap().entries, &tp.entries);
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
        let inflation: f64 = q.iter().map(|&x| (x as f64 + 1.0) / (x as f64 - 1.0)).product();
        prop_assert!(tp.trace_norm() <= inflation * t.trace_norm() + 1e-9);
    }

    #[test]
    fn product_distance_is_sum(q1 in 1usize..=3, r1 in 1usize..=2, q2 in 1usize..=3, r2 in 1usize..=2) {
        let a = tree_ball(q1, r1).unwrap();
        let b = tree_ball(q2, r2).unwrap();
        let p = product_graph(&[&a.graph, &b.graph]).unwrap();
        for x in 0..p.graph.len() {
            for y in 0..p.graph.len() {
                let (cx, cy) = (p.coords(x), p.coords(y));
                prop_assert_eq!(p.graph.d(x, y), a.graph.d(cx[0], cy[0]) + b.graph.d(cx[1], cy[1]));
                let sx = (p.graph.d(x, 0) + p.graph.d(y, 0)) % 2;
                prop_assert_eq!(sx, p.graph.d(x, y) % 2);
            }
        }
    }

    #[test]
    fn params_round_trip(r in 0.01f64..0.99, alpha in 0.0f64..5.0) {
        let p = parse_params(&format!("r={r}, α={alpha}")).unwrap();
        prop_assert_eq!(p["r"].as_f64().unwrap(), r);
        prop_assert_eq!(p["alpha"].as_f64().unwrap(), alpha);
    }

    #[test]
    fn symbol_json_round_trip(s in catalog_symbol()) {
        let back = RadialSymbol::from_json(&s.to_json_value().to_string()).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sdp_certificate_and_restriction(
        entries in prop::collection::vec(complex_entry(), 36),
        keep in prop::collection::vec(any::<bool>(), 6),
    ) {
        let full = KernelMatrix::raw(CMat::from_fn(6, 6, |a, b| entries[a * 6 + b]), "random").unwrap();
        let r = cb_norm_sdp(&full, 1e-6, 50_000).unwrap();
        prop_assert!(r.witness.reproduction_error < 1e-8);
        prop_assert!(r.lower <= r.upper + 1e-12);
        prop_assert!(r.upper >= full.max_modulus() - 1e-12);
        prop_assert!(r.witness.certified_bound >= r.lower - 1e-6);
        let mut rows: Vec<usize> = (0..6).filter(|&i| keep[i]).collect();
        if rows.is_empty() {
            rows.push(0);
        }
        let sub = cb_norm_sdp(&full.restrict(&rows).unwrap(), 1e-6, 50_000).unwrap();
        prop_assert!(sub.lower <= r.upper + 1e-6);
    }

    #[test]
    fn rank_one_cb_norm(u in prop::collection::vec(complex_entry(), 5), v in prop::collection::vec(complex_entry(), 5)) {
        let k = KernelMatrix::raw(CMat::from_fn(5, 5, |i, j| u[i] * v[j]), "rank one").unwrap();
        let want = u.iter().map(|z| z.norm()).fold(0.0, f64::max) * v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!(want > 1e-3);
        let r = cb_norm_sdp(&k, 1e-7, 50_000).unwrap();
        prop_assert!(r.lower <= want + 1e-6 && r.upper >= want - 1e-6);
        prop_assert!(r.upper <= want * (1.0 + 1e-5) + 1e-6);
    }

    #[test]
    fn manifest_rows_recomputable(r in 0.05f64..0.95, level in 1usize..=2) {
        let text = format!(r#"{{"id":"p","operation":"geom-norm","grid":{{"N":[{level}],"r":[{r}],"K":[120]}}}}"#);
        let m = ExperimentManifest::from_json(&text).unwrap();
        let a = schurlab::bench::run(&m, 1).unwrap();
        let row = &a.rows[0];
        // recompute from the recorded parameters only
        let n: usize = row.params["N"].parse().unwrap();
        let rr: f64 = row.params["r"].parse().unwrap();
        let g = schurlab::hankel::rank_one_geom(n, rr, 120).unwrap();
        prop_assert_eq!(row.values["truncated"].as_f64().unwrap(), g.truncated_norm);
    }
}

#[test]
fn table_series_flavor_matches_class_derivative() {
    let s = RadialSymbol::real_table(&[3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0], TailPolicy::Zero);
    let series = symbol_series(&s, 1, Flavor::A, 8).unwrap();
    let a = s.sample(8).unwrap();
    for k in 2..8 {
        assert_eq!(series.coefficients[k], a[k - 2] - a[k]);
    }
}
