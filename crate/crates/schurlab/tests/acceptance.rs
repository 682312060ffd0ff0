//! Acceptance criteria, one test each. Run with
//! `cargo test -p schurlab --test acceptance -- --nocapture` to see the
//! PASS/FAIL lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schurlab::besov::{catalog_family, peller_concordance};
use schurlab::hankel::{
    anti_diagonal, build_hankel, build_multiradial_t, class_membership, rank_one_geom, shift_power, smoothed_shift,
    sphere_indicator_bound, tau_transform, trace_product, ClassTag, HankelSpec, IndexKind, MultiSymbol, S1Policy,
    TruncatedMatrix, WeightScheme,
};
use schurlab::linalg::{singular_values, trace_norm, CMat};
use schurlab::medgraph::{
    cayley_ball, grid, serre_embedding, serre_shift, staircase, MedianComplex, MizutaVectors, TreeProduct,
};
use schurlab::mlab::{
    cb_norm_sdp, median_witness, radial_kernel, radial_kernel_on, sandwich_check, tree_product_witness, KernelMatrix,
};
use schurlab::symbolkit::{
    derivative_sequence, hoderiv, integral_derivative_oracle, iterated_derivative, weighted_leibniz_check,
    SmoothFunction,
};
use schurlab::{DerivativeSpec, RadialSymbol, Verdict, C64, Q};

fn report(id: u32, name: &str, failures: &[String], detail: String) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {status} {name}: {detail}");
    for f in failures {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {id} ({name}) failed");
}

const SIZES: [usize; 4] = [64, 128, 256, 512];

#[test]
fn c01_rank_one_geometric_norm() {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for level in 1..=3 {
        for r in [0.1, 0.5, 0.9] {
            let g = rank_one_geom(level, r, 400).unwrap();
            let diff = (g.truncated_norm - g.closed_form_norm).abs();
            worst = worst.max(diff);
            if diff > 1e-6 {
                fails.push(format!("N={level} r={r}: |{} - {}| = {diff:e}", g.truncated_norm, g.closed_form_norm));
            }
        }
    }
    report(1, "rank-one geometric norm", &fails, format!("max |truncated - closed form| = {worst:.3e}"));
}

#[test]
fn c02_anti_diagonal_and_sphere_bounds() {
    let mut fails = Vec::new();
    for l in 0..=50 {
        let sv = singular_values(&anti_diagonal(l));
        let rounded: Vec<f64> = sv.iter().map(|s| s.round()).collect();
        let exact = sv.iter().zip(&rounded).all(|(s, r)| (s - r).abs() < 1e-12);
        let total: f64 = rounded.iter().sum();
        if !exact || total != (l + 1) as f64 {
            fails.push(format!("l={l}: singular values {sv:?}"));
        }
    }
    let mut checked = 0;
    for level in 1..=3 {
        for n in level..=12 {
            let b = sphere_indicator_bound(level, n).unwrap();
            checked += 1;
            if b.norm > b.bound {
                fails.push(format!("N={level} n={n}: {} > {}", b.norm, b.bound));
            }
        }
    }
    report(2, "anti-diagonal norms and sphere bound", &fails, format!("51 anti-diagonals, {checked} sphere sections"));
}

fn nonzero_sorted(mut sv: Vec<f64>) -> Vec<f64> {
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.retain(|&s| s > 1e-9 * top.max(1e-300));
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[test]
fn c03_folding_unitary() {
    let symbols = [
        RadialSymbol::geom(0.5),
        RadialSymbol::alt_power(2.5),
        RadialSymbol::power(0.5),
        RadialSymbol::partial_sum(2),
        RadialSymbol::sphere(3),
    ];
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for level in [2, 3] {
        for s in &symbols {
            let lattice = build_multiradial_t(&MultiSymbol::Radial(s.clone()), level, 20, 2).unwrap();
            let hankel = build_hankel(&HankelSpec::binomial_class(s.clone(), level, ClassTag::A).unwrap(), 21).unwrap();
            let a = nonzero_sorted(lattice.singular_values());
            let b = nonzero_sorted(hankel.singular_values());
            if a.len() != b.len() {
                fails.push(format!("N={level} {}: {} vs {} nonzero singular values", s.label(), a.len(), b.len()));
                continue;
            }
            let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
            if d > 1e-10 {
                fails.push(format!("N={level} {}: max singular value gap {d:e}", s.label()));
            }
        }
    }
    report(3, "folding unitary", &fails, format!("10 symbol/level pairs, max gap {worst:.3e}"));
}

fn random_box_operator(rng: &mut ChaCha8Rng, dim: usize, side: usize) -> TruncatedMatrix {
    let n = side.pow(dim as u32);
    let density = rng.random_range(0.2..1.0);
    let entries = CMat::from_fn(n, n, |_, _| {
        if rng.random_bool(density) {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    TruncatedMatrix { entries, index: IndexKind::Box { dim, side }, provenance: "random".into() }
}

/// All lattice points with coordinates ≤ 2 in dimension `dim`.
fn small_points(dim: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|p| (0..=2).map(move |c| [p.clone(), vec![c]].concat())).collect();
    }
    out
}

#[test]
fn c04_tau_transform() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fails = Vec::new();
    let (mut worst_trace, mut worst_ratio) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let dim = 1 + case % 2;
        let side = if dim == 1 { rng.random_range(3..7) } else { 3 };
        let q: Vec<usize> = (0..dim).map(|_| rng.random_range(2..=3)).collect();
        let t = random_box_operator(&mut rng, dim, side);
        let tp = tau_transform(&t, &q).unwrap();
        let out_side = side + 1;
        // T embedded in the output box
        let flat = |p: &[usize], s: usize| p.iter().fold(0usize, |acc, &c| acc * s + c);
        let inner = schurlab::hankel::lattice::box_points(dim, side);
        let mut big = CMat::zeros(tp.size(), tp.size());
        for (a, pa) in inner.iter().enumerate() {
            for (b, pb) in inner.iter().enumerate() {
                big[(flat(pa, out_side), flat(pb, out_side))] = t.entries[(a, b)];
            }
        }
        for m in small_points(dim) {
            for n in small_points(dim) {
                let lhs = trace_product(&smoothed_shift(&m, &n, &q, out_side).unwrap().entries, &big);
                let rhs = trace_product(&shift_power(&m, &n, out_side).unwrap().entries, &tp.entries);
                let d = (lhs - rhs).norm();
                worst_trace = worst_trace.max(d);
                if d > 1e-12 {
                    fails.push(format!("case {case} m={m:?} n={n:?}: trace gap {d:e}"));
                }
            }
        }
        let inflation: f64 = q.iter().map(|&qi| (qi as f64 + 1.0) / (qi as f64 - 1.0)).product();
        let (nt, ntp) = (t.trace_norm(), tp.trace_norm());
        worst_ratio = worst_ratio.max(ntp / nt);
        if ntp > inflation * nt + 1e-9 {
            fails.push(format!("case {case}: ‖T'‖ = {ntp} > {inflation}·{nt}"));
        }
    }
    fails.truncate(10);
    report(
        4,
        "tau-transform",
        &fails,
        format!("200 operators, max trace gap {worst_trace:.3e}, max norm ratio {worst_ratio:.3}"),
    );
}

#[test]
fn c05_serre_embedding() {
    let ball = cayley_ball(4).unwrap();
    let (tree, check) = serre_embedding(&ball, 9).unwrap();
    let shift = serre_shift(&tree);
    let mut fails = Vec::new();
    if !check.passed() {
        fails.push(format!("{check:?}"));
    }
    if !shift.passed() {
        fails.push(format!("{shift:?}"));
    }
    report(
        5,
        "Serre embedding",
        &fails,
        format!(
            "{} words, {} pairs doubled exactly, shift overlap {}",
            ball.graph.len(),
            check.pairs_checked,
            shift.overlap
        ),
    );
}

/// Indicator check ⟨P_{k₁}(x), Q_{k₂}(y)⟩ over all pairs in `region`.
fn indicator_failures(c: &MedianComplex, region: &[usize], kmax: usize, fails: &mut Vec<String>) -> usize {
    let vectors: Vec<Vec<MizutaVectors>> =
        region.iter().map(|&x| (0..=kmax).map(|k| c.mizuta_vectors(x, k).unwrap()).collect()).collect();
    let mut pairs = 0;
    for (a, &x) in region.iter().enumerate() {
        for (b, &y) in region.iter().enumerate() {
            let m = c.stable_median(x, y).unwrap();
            let (l1, l2) = (c.graph.d(x, m), c.graph.d(y, m));
            for k1 in 0..=kmax {
                for k2 in 0..=kmax {
                    let want = i64::from(k1 >= l1 && k2 >= l2 && k1 - l1 == k2 - l2);
                    let got = MizutaVectors::inner(&vectors[a][k1].p, &vectors[b][k2].q);
                    pairs += 1;
                    if got != want && fails.len() < 10 {
                        fails.push(format!("{}: x={x} y={y} k=({k1},{k2}) got {got} want {want}", c.label));
                    }
                }
            }
        }
    }
    pairs
}

#[test]
fn c06_median_suite() {
    let kmax = 4;
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    let cases: Vec<(MedianComplex, Vec<usize>)> = vec![
        {
            let p = TreeProduct::uniform(2, 2, 2, 10).unwrap();
            let region = p.ball_vertices();
            (p.complex().unwrap(), region)
        },
        {
            let p = TreeProduct::uniform(1, 2, 3, 8).unwrap();
            let region = p.ball_vertices();
            (p.complex().unwrap(), region)
        },
        {
            let c = staircase(12).unwrap();
            let o = c.base_ray[0];
            let region: Vec<usize> = (0..c.len()).filter(|&v| c.graph.d(o, v) <= 3).collect();
            (c, region)
        },
        {
            let c = grid(12, 12).unwrap();
            let o = c.base_ray[0];
            let region: Vec<usize> = (0..c.len()).filter(|&v| c.graph.d(o, v) <= 3).collect();
            (c, region)
        },
    ];
    for (c, region) in &cases {
        let v = &c.validation;
        if !v.exhaustive && v.triples_checked < 100_000 {
            fails.push(format!("{}: only {} triples checked", c.label, v.triples_checked));
        }
        let mut bound_reports = 0;
        for &x in region {
            for k in 0..=kmax {
                let rep = c.polytopes(x, k).unwrap();
                bound_reports += 1;
                if rep.a_set.len() > rep.a_bound {
                    fails.push(format!("{}: |A({x},{k})| = {} > {}", c.label, rep.a_set.len(), rep.a_bound));
                }
                for b in &rep.b_sets {
                    if b.members.len() > c.dimension.max(1).pow(b.i as u32) {
                        fails.push(format!("{}: |B_{}({x},{})| = {}", c.label, b.i, b.y, b.members.len()));
                    }
                }
                if !rep.bounds_hold {
                    fails.push(format!("{}: cardinality bounds fail at x={x} k={k}", c.label));
                }
            }
        }
        let pairs = indicator_failures(c, region, kmax, &mut fails);
        summary.push(format!(
            "{} (n={}, dim {}, {} triples{}, {bound_reports} bound reports, {pairs} inner products)",
            c.label,
            c.len(),
            c.dimension,
            v.triples_checked,
            if v.exhaustive { " exhaustive" } else { " sampled" },
        ));
    }
    fails.truncate(10);
    report(6, "median suite", &fails, summary.join("; "));
}

#[test]
fn c07_witness_reproduction() {
    let sym = RadialSymbol::geom(0.5);
    let mut fails = Vec::new();
    let mut lines = Vec::new();
    for count in [1, 2] {
        let p = TreeProduct::uniform(2, 3, count, 17).unwrap();
        let region = p.ball_vertices();
        let tw = tree_product_witness(&p, &MultiSymbol::Radial(sym.clone()), 16, &region, 1e-6).unwrap();
        let mw = median_witness(&p.complex().unwrap(), &sym, 16, &region, 1e-6).unwrap();
        let kernel = radial_kernel_on(p.graph(), &region, &sym).unwrap();
        let sdp = cb_norm_sdp(&kernel, 1e-6, 20_000).unwrap();
        for (name, w) in [("tree", &tw), ("median", &mw)] {
            lines.push(format!(
                "N={count} {name}: error {:.3e} tail {:.3e} bound {:.6} sdp {:.6}",
                w.reproduction_error, w.tail_bound, w.certified_bound, sdp.upper
            ));
            if !(w.reproduction_error <= w.tail_bound && w.reproduction_error < 1e-6) {
                fails.push(format!("N={count} {name}: error {:e} vs tail {:e}", w.reproduction_error, w.tail_bound));
            }
            if w.certified_bound < sdp.lower - 1e-4 {
                fails.push(format!("N={count} {name}: bound {} below SDP {}", w.certified_bound, sdp.lower));
            }
        }
    }
    report(7, "witness reproduction", &fails, lines.join("; "));
}

#[test]
fn c08_sdp_sanity() {
    let mut fails = Vec::new();
    let ball = schurlab::medgraph::tree_ball(2, 2).unwrap();

    let ones = cb_norm_sdp(&radial_kernel(&ball.graph, &RadialSymbol::constant(1.0)).unwrap(), 1e-6, 20_000).unwrap();
    if (ones.upper - 1.0).abs() > 1e-6 || (ones.lower - 1.0).abs() > 1e-6 {
        fails.push(format!("all-ones: [{}, {}]", ones.lower, ones.upper));
    }
    let parity = cb_norm_sdp(&radial_kernel(&ball.graph, &RadialSymbol::parity()).unwrap(), 1e-6, 20_000).unwrap();
    if (parity.upper - 1.0).abs() > 1e-6 || (parity.lower - 1.0).abs() > 1e-6 {
        fails.push(format!("parity: [{}, {}]", parity.lower, parity.upper));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..5 {
        let n = 6 + case;
        let u: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let k = KernelMatrix::raw(CMat::from_fn(n, n, |i, j| u[i] * v[j]), "rank one").unwrap();
        let want = u.iter().map(|z| z.norm()).fold(0.0, f64::max) * v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let r = cb_norm_sdp(&k, 1e-7, 50_000).unwrap();
        if (r.upper - want).abs() > 1e-6 || (r.lower - want).abs() > 1e-6 {
            fails.push(format!("rank one n={n}: [{}, {}] want {want}", r.lower, r.upper));
        }
    }

    let mut nested = 0;
    for case in 0..50 {
        let n = rng.random_range(5..=9);
        let complex = case % 2 == 1;
        let m = CMat::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), if complex { rng.random_range(-1.0..1.0) } else { 0.0 })
        });
        let full = KernelMatrix::raw(m, "random").unwrap();
        let mut rows: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        if rows.is_empty() {
            rows.push(0);
        }
        let sub = full.restrict(&rows).unwrap();
        let a = cb_norm_sdp(&sub, 1e-6, 50_000).unwrap();
        let b = cb_norm_sdp(&full, 1e-6, 50_000).unwrap();
        nested += 1;
        if a.lower > b.upper + 1e-6 {
            fails.push(format!("case {case}: restriction [{}, {}] exceeds [{}, {}]", a.lower, a.upper, b.lower, b.upper));
        }
    }
    report(
        8,
        "SDP sanity",
        &fails,
        format!("all-ones {:.9}, parity {:.9}, 5 rank-one kernels, {nested} nested pairs", ones.upper, parity.upper),
    );
}

#[test]
fn c09_sandwich_upper_bound() {
    let mut fails = Vec::new();
    let mut lines = Vec::new();
    for sym in [RadialSymbol::geom(0.5), RadialSymbol::alt_power(2.5)] {
        for degrees in [vec![3], vec![3, 3]] {
            let r = sandwich_check(&sym, &degrees, &[1, 2, 3], &SIZES, 1e-4).unwrap();
            let last = r.rows.last().unwrap();
            lines.push(format!(
                "{} d={:?}: cb {:.6} ≤ {:.6}",
                r.symbol, r.degrees, last.cb_upper, last.upper_expression
            ));
            if !r.passed {
                fails.push(format!("{} d={:?}: {:?}", r.symbol, r.degrees, r.rows));
            }
        }
    }
    report(9, "sandwich upper bound", &fails, lines.join("; "));
}

fn verdict(symbol: &RadialSymbol, level: usize, class: ClassTag) -> Verdict {
    class_membership(symbol, level, class, &SIZES, &S1Policy::default(), None).unwrap().estimate.verdict
}

#[test]
fn c10_inclusion_separations() {
    let mut fails = Vec::new();
    let mut expect = |what: String, got: Verdict, want: Verdict| {
        if got != want {
            fails.push(format!("{what}: {got} (want {want})"));
        }
    };
    for level in [1, 2] {
        for alpha in [level as f64 + 0.5, level as f64 + 1.0] {
            let s = RadialSymbol::alt_power(alpha);
            expect(format!("ALT_POWER({alpha}) B at N={level}"), verdict(&s, level, ClassTag::B), Verdict::Convergent);
            expect(
                format!("ALT_POWER({alpha}) B at N={}", level + 2),
                verdict(&s, level + 2, ClassTag::B),
                Verdict::Divergent,
            );
        }
        let ps = RadialSymbol::partial_sum(level as u32);
        expect(format!("PARTIAL_SUM({level}) C at N={level}"), verdict(&ps, level, ClassTag::C), Verdict::Convergent);
        expect(
            format!("PARTIAL_SUM({level}) C at N={}", level + 1),
            verdict(&ps, level + 1, ClassTag::C),
            Verdict::Divergent,
        );
    }
    for (level, alpha, m) in [(2usize, 0.5, 2usize), (3, 0.5, 3), (3, 1.5, 2)] {
        let s = RadialSymbol::power(alpha);
        expect(format!("POWER({alpha}) C at N={level}"), verdict(&s, level, ClassTag::C), Verdict::Divergent);
        let spec = HankelSpec::raw(
            s.clone(),
            DerivativeSpec::new(2, m + 1).unwrap(),
            WeightScheme::PowerSum { s: level as f64 - 1.0 },
        );
        let e = schurlab::hankel::s1_estimate(&spec, &SIZES, &S1Policy::default()).unwrap();
        expect(format!("𝔡₂^{m} POWER({alpha}) C at N={level}"), e.verdict, Verdict::Convergent);
    }
    let parity = RadialSymbol::parity();
    for level in [1, 2, 3] {
        let c = build_hankel(&HankelSpec::class(parity.clone(), level, ClassTag::C).unwrap(), 512).unwrap();
        if c.entries.iter().any(|z| *z != C64::new(0.0, 0.0)) {
            fails.push(format!("PARITY class C at N={level} is not zero"));
        }
        let b = class_membership(&parity, level, ClassTag::B, &SIZES, &S1Policy::default(), None).unwrap();
        if b.estimate.diagonal != Some(Verdict::Divergent) || b.estimate.verdict != Verdict::Divergent {
            fails.push(format!("PARITY class B at N={level}: diagonal {:?}, {}", b.estimate.diagonal, b.estimate.verdict));
        }
    }
    let n = fails.len();
    report(10, "inclusion separations", &fails, format!("{} mismatches", n));
}

#[test]
fn c11_besov_peller_concordance() {
    let mut fails = Vec::new();
    let mut lines = Vec::new();
    for level in [1, 2] {
        let rep =
            peller_concordance(&catalog_family(level), level, &SIZES, 9, 1 << 14, &S1Policy::default()).unwrap();
        lines.push(format!(
            "N={level}: {} agree, {} undecided, {} contradictions",
            rep.agreements, rep.undecided, rep.contradictions
        ));
        for row in rep.rows.iter().filter(|r| r.agree == Some(false)) {
            fails.push(format!("N={level} {} {:?}: S1 {} vs Besov {}", row.symbol, row.class, row.s1, row.besov));
        }
    }
    report(11, "Besov-Peller concordance", &fails, lines.join("; "));
}

#[test]
fn c12_calculus_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut fails = Vec::new();
    let mut rational_checks = 0;
    for _ in 0..200 {
        let len = rng.random_range(16..30);
        let a: Vec<Q> = (0..len).map(|_| Q::new(rng.random_range(-50..50), rng.random_range(1..20))).collect();
        for step in [1, 2] {
            for order in 0..=6 {
                let it = iterated_derivative(&a, step, order);
                for (n, v) in it.iter().enumerate() {
                    rational_checks += 1;
                    if hoderiv(&a, step, order, n).unwrap() != *v {
                        fails.push(format!("hoderiv step {step} order {order} n={n}"));
                    }
                }
            }
        }
    }
    let mut leibniz = 0;
    for _ in 0..1000 {
        let len = rng.random_range(12..24);
        let a: Vec<Q> = (0..len).map(|_| Q::new(rng.random_range(-100..100), rng.random_range(1..12))).collect();
        let m = rng.random_range(0..6);
        let n = rng.random_range(0..len - m - 1);
        leibniz += 1;
        if !weighted_leibniz_check(&a, n, m).unwrap() {
            fails.push(format!("Leibniz identity fails at n={n} m={m}"));
        }
    }
    let mut worst = 0.0f64;
    for beta in [0.5, 1.0, 2.5] {
        let s = RadialSymbol::power(beta);
        let f = SmoothFunction::from_symbol(&s).unwrap();
        for m in 1..=3 {
            let d = derivative_sequence(&s, DerivativeSpec::new(2, m).unwrap(), 12).unwrap();
            for (n, dn) in d.iter().enumerate() {
                let oracle = integral_derivative_oracle(f, m, n, 24).unwrap();
                let gap = (oracle - dn).norm();
                worst = worst.max(gap);
                if gap > 1e-8 {
                    fails.push(format!("integral oracle β={beta} m={m} n={n}: gap {gap:e}"));
                }
            }
        }
    }
    fails.truncate(10);
    report(
        12,
        "calculus identities",
        &fails,
        format!("{rational_checks} exact derivative checks, {leibniz} Leibniz tables, oracle gap {worst:.2e}"),
    );
}

#[test]
fn rank_one_trace_norm_oracle() {
    // independent check of the dense trace norm used throughout
    let u = [1.0, -2.0, 0.5];
    let m = CMat::from_fn(3, 3, |i, j| C64::new(u[i] * u[j], 0.0));
    assert!((trace_norm(&m) - 5.25).abs() < 1e-12);
}
