//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Expected values are computed here from closed forms or brute force, not
//! through the library routines under test. Criteria listed in
//! `KNOWN_UNATTAINABLE` are evaluated and printed like every other one but do
//! not fail the test.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starcount::advantage::*;
use starcount::graph_core::*;
use starcount::models::{HSpec, PlantedModel};
use starcount::montecarlo::*;
use starcount::statistics::*;
use starcount::WorkLimit;

/// 10: the closed-form star bound evaluates to about 211 at t = 1.
/// 11: the maximum degree of G(10^4, 0.01) is about 140, outside ±20% of 100.
const KNOWN_UNATTAINABLE: &[usize] = &[10, 11];

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    secs: f64,
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, q: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < q {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Injective edge-preserving maps by exhaustive search.
fn brute_copies(pattern: &Graph, host: &Graph) -> u64 {
    fn rec(i: usize, img: &mut Vec<usize>, pattern: &Graph, host: &Graph, count: &mut u64) {
        if i == img.len() {
            if pattern.edges().all(|(u, v)| host.has_edge(img[u], img[v])) {
                *count += 1;
            }
            return;
        }
        for v in 0..host.n() {
            if !img[..i].contains(&v) {
                img[i] = v;
                rec(i + 1, img, pattern, host, count);
            }
        }
    }
    if pattern.n() > host.n() {
        return 0;
    }
    let mut count = 0;
    rec(0, &mut vec![0; pattern.n()], pattern, host, &mut count);
    count
}

fn falling(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64).product()
}

fn factorial(k: u64) -> f64 {
    falling(k, k)
}

fn within(x: f64, target: f64, se: f64, k: f64) -> bool {
    (x - target).abs() <= k * se
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn c1_exact_identities() -> (bool, String) {
    let shapes = enumerate_shapes(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    let mut bad = 0;
    for _ in 0..50 {
        let n = rng.random_range(3..=8);
        let q = rng.random_range(0.3..0.8);
        let host = random_graph(&mut rng, n, q);
        let brute: Vec<u64> = shapes.iter().map(|s| brute_copies(s.graph(), &host)).collect();
        let mut counter = CopyCounter::new(&host, WorkLimit::UNLIMITED);
        for (i, a) in shapes.iter().enumerate() {
            for (j, b) in shapes.iter().enumerate() {
                let lhs = BigUint::from(brute[i]) * brute[j];
                let mut rhs = BigUint::zero();
                for pat in enumerate_patterns(a, b) {
                    rhs += counter.count_graph(pat.union_graph()).unwrap();
                }
                checked += 1;
                bad += usize::from(lhs != rhs);
            }
        }
    }
    let mut star_bad = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=7);
        let q = rng.random_range(0.1..0.9);
        let h = random_graph(&mut rng, n, q);
        for t in 1..=4 {
            let star = Shape::star(t).unwrap();
            let formula: BigUint = h.degrees().iter().map(|&d| BigUint::from(falling(d as u64, t as u64) as u64)).sum();
            let brute = BigUint::from(brute_copies(star.graph(), &h));
            star_bad += usize::from(formula != brute || count_labelled_copies(&star, &h) != brute);
        }
    }
    (
        bad == 0 && star_bad == 0,
        format!("double counting {checked} products, {bad} mismatches; star formula 400 checks, {star_bad} mismatches"),
    )
}

fn c2_oracle_equivalence() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let n = rng.random_range(3..=7);
        let k = rng.random_range(2..=n);
        let h = random_graph(&mut rng, k, 0.6);
        let p = [0.3, 0.5, 0.7][i % 3];
        let d = rng.random_range(1..=3);
        let a = total_advantage(&h, n, p, d, WorkLimit::UNLIMITED).unwrap().value;
        let b = brute_force_advantage(&h, n, p, d, WorkLimit::UNLIMITED).unwrap();
        let r = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        worst = worst.max(r);
    }
    (worst <= 1e-9, format!("20 instances, max relative residual {worst:.3e}"))
}

fn c3_fast_star() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let t = rng.random_range(1..=4);
        let n = rng.random_range(t + 1..=9);
        let q = rng.random_range(0.1..0.9);
        let g = random_graph(&mut rng, n, q);
        let p = rng.random_range(0.05..0.95);
        let fast = signed_star_count(t, &g, p).unwrap();
        let naive = signed_count_naive(&Shape::star(t).unwrap(), &g, p, WorkLimit::UNLIMITED).unwrap();
        let scale = fast.abs().max(naive.abs()).max(1.0);
        worst = worst.max((fast - naive).abs() / scale);
    }
    (worst <= 1e-9, format!("200 instances, max relative residual {worst:.3e}"))
}

fn c4_moments() -> (bool, String) {
    let (n, k, p) = (200usize, 20u64, 0.5);
    let c: f64 = (1.0 - p) / p;
    let model = PlantedModel::new(n, p, HSpec::Clique(k as usize)).unwrap();
    // (shape, vertices, edges, |Aut|)
    let cases = [
        (Shape::edge(), 2u64, 1i32, 2.0),
        (Shape::star(2).unwrap(), 3, 2, 2.0),
        (Shape::star(3).unwrap(), 4, 3, 6.0),
        (Shape::clique(3).unwrap(), 3, 3, 6.0),
    ];
    let stats: Vec<TestStatistic> = cases.iter().map(|x| TestStatistic::SignedShapeCount(x.0.clone())).collect();
    let reports = estimate_many(&model, &stats, 10_000, 104, WorkLimit::default()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for ((_, v, e, aut), r) in cases.iter().zip(&reports) {
        let eq2 = falling(n as u64, *v) / aut;
        let ep = falling(k, *v) / aut * c.powf(*e as f64 / 2.0);
        let a = within(r.null.mean, 0.0, r.null.se_mean, 4.0);
        let b = within(r.null.second, eq2, r.null.se_second, 4.0);
        let d = within(r.planted.mean, ep, r.planted.se_mean, 4.0);
        ok &= a && b && d;
        parts.push(format!(
            "{}: z(EQf)={:.2} z(EQf2)={:.2} z(EPf)={:.2}",
            r.statistic,
            r.null.mean / r.null.se_mean,
            (r.null.second - eq2) / r.null.se_second,
            (r.planted.mean - ep) / r.planted.se_mean
        ));
    }
    (ok, parts.join("; "))
}

fn c5_planted_clique() -> (bool, String) {
    let (n, p) = (400usize, 0.5);
    let stat = TestStatistic::SignedStarCount(1);
    let run = |k: usize| {
        let model = PlantedModel::new(n, p, HSpec::Clique(k)).unwrap();
        estimate_separation(&model, &stat, 10_000, 105, WorkLimit::default()).unwrap()
    };
    let adv = |k: usize| (k * (k - 1)) as f64 * ((1.0 - p) / p).sqrt() / (2.0 * (n * (n - 1)) as f64).sqrt();
    let big = run(80);
    let small = run(20);
    let e_big = big.errors.unwrap().total();
    let e_small = small.errors.unwrap().total();
    let ok = big.separation_ratio >= 8.0 && e_big <= 0.05 && e_small >= 0.4;
    (
        ok,
        format!(
            "k=80: ratio {:.3} (closed form {:.3}), total error {e_big:.4}; k=20: ratio {:.3} (closed form {:.3}), total error {e_small:.4}",
            big.separation_ratio,
            adv(80),
            small.separation_ratio,
            adv(20)
        ),
    )
}

fn double_edge_swaps(g: &Graph, swaps: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    let mut done = 0;
    let mut attempts = 0;
    while done < swaps && attempts < 100 * swaps {
        attempts += 1;
        let i = rng.random_range(0..edges.len());
        let j = rng.random_range(0..edges.len());
        let ((a, b), (c, d)) = (edges[i], edges[j]);
        let (x, y) = if rng.random::<bool>() { ((a, d), (c, b)) } else { ((a, c), (b, d)) };
        let norm = |(u, v): (usize, usize)| (u.min(v), u.max(v));
        let (x, y) = (norm(x), norm(y));
        if x.0 == x.1 || y.0 == y.1 || x == y || edges.contains(&x) || edges.contains(&y) {
            continue;
        }
        edges[i] = x;
        edges[j] = y;
        done += 1;
    }
    Graph::from_edges(g.n(), edges).unwrap()
}

fn c6_profile_sufficiency() -> (bool, String) {
    let (n, p, d) = (100, 0.4, 6);
    let crit = |g: &Graph| {
        let prof = DegreeProfile::from_graph(g);
        let c = star_criterion(&prof, n, p, d).unwrap();
        let r = classify_with(&c, &prof, Margins::default());
        (c, r)
    };
    let c6 = Shape::cycle(6).unwrap().graph().clone();
    let two_c3 = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
    let mut ok = crit(&c6) == crit(&two_c3);
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut differing_graphs = 0;
    for _ in 0..5 {
        let g = random_graph(&mut rng, 12, 0.4);
        let h = double_edge_swaps(&g, 20, &mut rng);
        assert_eq!(DegreeProfile::from_graph(&g), DegreeProfile::from_graph(&h));
        differing_graphs += usize::from(g != h);
        ok &= crit(&g) == crit(&h);
    }
    (ok, format!("C6 vs 2C3 and 5 swapped pairs ({differing_graphs} distinct as labelled graphs)"))
}

fn c7_endpoint_convexity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut violations = 0;
    for _ in 0..1000 {
        let v = rng.random_range(2..=60);
        let mut deg: Vec<usize> = (0..v).map(|_| rng.random_range(1..v)).collect();
        if deg.iter().sum::<usize>() % 2 == 1 {
            if deg[0] > 1 { deg[0] -= 1 } else { deg[0] += 1 }
        }
        let prof = DegreeProfile::new(deg).unwrap();
        let n = rng.random_range(v..=10_000);
        let p = rng.random_range(0.01..0.99);
        let d = rng.random_range(2..=10);
        let crit = star_criterion(&prof, n, p, d).unwrap();
        // Independent argmax over the closed-form surrogate.
        let c: f64 = (1.0 - p) / p;
        let sur: Vec<f64> = (1..=d)
            .map(|t| {
                let t = t as f64;
                prof.degrees().iter().map(|&x| (x as f64).powf(t)).sum::<f64>() * c.powf(t / 2.0) / (n as f64).powf((1.0 + t) / 2.0)
            })
            .collect();
        let best = sur.iter().cloned().fold(f64::MIN, f64::max);
        let at_end = rel_close(sur[0], best, 1e-12) || rel_close(sur[d - 1], best, 1e-12);
        violations += usize::from(!at_end || !crit.argmax_at_endpoint());
    }
    (violations == 0, format!("1000 profiles, {violations} interior maxima"))
}

fn c8_pds_boundary() -> (bool, String) {
    let n = 1_000_000;
    let margins = Margins { tau: 1.0, ..Margins::default() };
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, gamma) in [(0.2, 0.0), (0.4, 0.3)] {
        let formula = (2.0 + 2.0 * alpha + gamma) / 4.0;
        let mut flip = None;
        let mut prev = None;
        for i in 0..=100 {
            let beta = i as f64 / 100.0;
            let cell = pds_cell(n, alpha, beta, gamma).unwrap();
            let sep = classify_regime(&cell.profile, n, cell.p, 4, margins).unwrap().label.separates();
            if prev == Some(false) && sep && flip.is_none() {
                flip = Some(beta);
            }
            prev = Some(sep);
        }
        let good = flip.is_some_and(|b| (b - formula).abs() <= 0.01 + 1e-9);
        ok &= good;
        parts.push(format!("alpha={alpha} gamma={gamma}: flip at {flip:?}, formula {formula:.4}"));
    }
    (ok, parts.join("; "))
}

fn c9_vanishing_p() -> (bool, String) {
    let k = 8u64;
    let mut worst: f64 = 0.0;
    let mut lib_ok = true;
    for e in 10..=14 {
        let n = 1u64 << e;
        let p = (n as f64).powf(-0.5);
        let c = (1.0 - p) / p;
        let prof = DegreeProfile::from_graph(&Graph::complete(k as usize));
        let crit = star_criterion(&prof, n as usize, p, 6).unwrap();
        for t in 1..=6u64 {
            let aut = if t == 1 { 2.0 } else { factorial(t) };
            let adv = k as f64 * falling(k - 1, t) * c.powf(t as f64 / 2.0) / (aut * falling(n, t + 1)).sqrt();
            lib_ok &= rel_close(crit.per_t[t as usize - 1].exact_adv, adv, 1e-9);
            worst = worst.max(adv);
        }
    }
    let n = 4096;
    let model = PlantedModel::new(n, (n as f64).powf(-0.5), HSpec::Clique(8)).unwrap();
    let r = estimate_separation(&model, &TestStatistic::UnsignedCliqueCount(8), 200, 109, WorkLimit::default()).unwrap();
    let err = r.errors.unwrap().total();
    (
        worst <= 1.0 && lib_ok && err <= 0.01,
        format!("max star advantage {worst:.3e} (library agrees: {lib_ok}); 8-clique test total error {err:.4}, mean_q {:.3}, mean_p {:.3}", r.null.mean, r.planted.mean),
    )
}

fn c10_growing_degree() -> (bool, String) {
    let (n, k, l, p) = (50usize, 21usize, 4usize, 0.5);
    let model = PlantedModel::new(n, p, HSpec::Clique(k)).unwrap();
    let r = estimate_separation(&model, &TestStatistic::ClosedPathTrace(l), 10_000, 110, WorkLimit::default()).unwrap();
    let ep = falling(k as u64, l as u64);
    let vq = 2.0 * l as f64 * falling(n as u64, l as u64);
    let mean_ok = within(r.planted.mean, ep, r.planted.se_mean, 4.0);
    let var_ok = rel_close(r.null.var, vq, 0.10);

    let prof = DegreeProfile::from_graph(&Graph::complete(k));
    let crit = star_criterion(&prof, n, p, 6).unwrap();
    let (nf, kf) = (n as f64, k as f64);
    let bounds: Vec<f64> = (1..=6).map(|t| kf * kf / nf * (std::f64::consts::E * kf * kf / (t as f64 * nf)).powi(t)).collect();
    let bound_ok = bounds.iter().all(|&b| b < 10.0);
    let dominated = crit.per_t.iter().zip(&bounds).all(|(s, b)| s.exact_adv <= *b);
    (
        mean_ok && var_ok && bound_ok && dominated,
        format!(
            "E_P trace {:.1} vs {ep} (z {:.2}); Var_Q {:.4e} vs {vq:.4e} ({:+.2}%); star bound at t=1..6 {:?} (< 10: {bound_ok}); exact star advantages {:?} (below bound: {dominated})",
            r.planted.mean,
            (r.planted.mean - ep) / r.planted.se_mean,
            r.null.var,
            100.0 * (r.null.var / vq - 1.0),
            bounds.iter().map(|b| format!("{b:.1}")).collect::<Vec<_>>(),
            crit.per_t.iter().map(|s| format!("{:.3}", s.exact_adv)).collect::<Vec<_>>()
        ),
    )
}

fn c11_concentration() -> (bool, String) {
    let r = degree_concentration_check(10_000, 0.01, 0.2, 100, 111).unwrap();
    (
        r.pass_rate >= 0.99,
        format!(
            "pass rate {:.2}; max degree range {:?} vs window [{:.1}, {:.1}]; edge range {:?} vs window [{:.0}, {:.0}]",
            r.pass_rate,
            r.max_degree_range,
            0.8 * r.expected_max_degree,
            1.2 * r.expected_max_degree,
            r.edge_count_range,
            0.8 * r.expected_edges,
            1.2 * r.expected_edges
        ),
    )
}

fn c12_reproducibility() -> (bool, String) {
    let model = PlantedModel::new(400, 0.5, HSpec::Clique(80)).unwrap();
    let stat = TestStatistic::SignedStarCount(1);
    let run = || {
        let r = estimate_separation(&model, &stat, 2_000, 112, WorkLimit::default()).unwrap();
        (r.to_value().render(), r.csv_row())
    };
    let first = run();
    let second = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let third = pool.install(run);
    let prof = DegreeProfile::from_graph(&Graph::complete(80));
    let analyze = || AdvantageReport::build(Some(&Graph::complete(80)), prof.clone(), 400, 0.5, 3, Margins::default(), WorkLimit::default()).unwrap().to_value().render();
    let ok = first == second && first == third && analyze() == analyze();
    (ok, format!("Monte Carlo report identical across reruns and 3 worker threads: {}", first == third))
}

fn main() {
    let criteria: Vec<(usize, &'static str, fn() -> (bool, String))> = vec![
        (1, "exact identities", c1_exact_identities),
        (2, "oracle equivalence", c2_oracle_equivalence),
        (3, "fast star evaluator", c3_fast_star),
        (4, "moment formulas", c4_moments),
        (5, "planted clique transition", c5_planted_clique),
        (6, "degree-profile sufficiency", c6_profile_sufficiency),
        (7, "endpoint convexity", c7_endpoint_convexity),
        (8, "PDS phase boundary", c8_pds_boundary),
        (9, "vanishing-p counterexample", c9_vanishing_p),
        (10, "growing-degree counterexample", c10_growing_degree),
        (11, "degree concentration", c11_concentration),
        (12, "reproducibility", c12_reproducibility),
    ];
    println!("\nrunning acceptance criteria");
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let (pass, detail) = f();
        let o = Outcome { id, name, pass, detail, secs: start.elapsed().as_secs_f64() };
        println!("{} C{} {} ({:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.secs, o.detail);
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&o.id) {
            unexpected.push(o.id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: ok (known unattainable: {KNOWN_UNATTAINABLE:?})\n");
    } else {
        println!("acceptance: criteria failed: {unexpected:?}\n");
        std::process::exit(1);
    }
}
