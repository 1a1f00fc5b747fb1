use starcount::graph_core::Graph;
use starcount::models::*;
use starcount::Error;

fn within(x: f64, target: f64, se: f64) -> bool {
    (x - target).abs() <= 4.0 * se
}

#[test]
fn gnp_edge_counts_are_binomial() {
    let n = 60;
    let pairs = (n * (n - 1) / 2) as f64;
    let trials = 3000;
    // 0.02 takes the geometric-skip path, 0.5 the dense scan.
    for &p in &[0.02, 0.5, 0.97] {
        let counts: Vec<f64> =
            (0..trials).map(|i| sample_gnp(n, p, &mut trial_rng(5, i, Arm::Null)).edge_count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let want = pairs * p * (1.0 - p);
        assert!(within(mean, pairs * p, (want / trials as f64).sqrt()), "p={p}: mean {mean}");
        // Var of the sample variance of a near-normal variable is about 2σ⁴/(T-1).
        assert!(within(var, want, want * (2.0 / (trials - 1) as f64).sqrt()), "p={p}: var {var} vs {want}");
    }
}

#[test]
fn sparse_sampler_hits_first_and_last_pairs_equally() {
    let (n, p, trials) = (40, 0.05, 20000);
    let (mut first, mut last) = (0usize, 0usize);
    for i in 0..trials {
        let g = sample_gnp(n, p, &mut trial_rng(6, i, Arm::Null));
        first += g.has_edge(0, 1) as usize;
        last += g.has_edge(n - 2, n - 1) as usize;
    }
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!(within(first as f64 / trials as f64, p, se));
    assert!(within(last as f64 / trials as f64, p, se));
}

#[test]
fn planted_edge_marginal() {
    // H is a path with 3 edges; a fixed pair lies in the planted copy with
    // probability 3 / C(8, 2).
    let (n, p, trials) = (8, 0.3, 40000);
    let model = PlantedModel::new(n, p, HSpec::Path(3)).unwrap();
    let hits = (0..trials)
        .filter(|&i| model.sample_planted_with(&mut trial_rng(7, i, Arm::Planted)).unwrap().graph.has_edge(2, 5))
        .count();
    let want = p + (1.0 - p) * 3.0 / 28.0;
    let got = hits as f64 / trials as f64;
    assert!(within(got, want, (want * (1.0 - want) / trials as f64).sqrt()), "{got} vs {want}");
}

#[test]
fn embeddings_are_uniform_injections() {
    let (n, trials) = (6, 30000);
    let model = PlantedModel::new(n, 0.5, HSpec::Star(2)).unwrap();
    let mut cells = vec![0usize; n * n];
    for i in 0..trials {
        let s = model.sample_planted_with(&mut trial_rng(8, i, Arm::Planted)).unwrap();
        let e = &s.embedding;
        assert_eq!(e.len(), 3);
        assert!(e[0] != e[1] && e[1] != e[2] && e[0] != e[2]);
        for (u, v) in s.realized_h.edges() {
            assert!(s.graph.has_edge(e[u], e[v]));
        }
        cells[e[0] * n + e[1]] += 1;
    }
    // Pearson statistic over the 30 ordered pairs (29 degrees of freedom).
    let expected = trials as f64 / 30.0;
    let chi2: f64 = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| (cells[a * n + b] as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 29.0 + 5.0 * 58f64.sqrt(), "chi2 = {chi2}");
    assert!((0..n).all(|a| cells[a * n + a] == 0));
}

#[test]
fn draws_are_reproducible_per_seed() {
    let model = PlantedModel::new(30, 0.2, HSpec::Clique(6)).unwrap();
    let a = sample_planted(&model, 3).unwrap();
    let b = sample_planted(&model, 3).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.embedding, b.embedding);
    assert_eq!(sample_null(&model, 3), sample_null(&model, 3));
    assert_ne!(sample_null(&model, 3), sample_null(&model, 4));
    let er = HSpec::ErdosRenyiSub { k: 20, q: 0.3 };
    assert_eq!(realize_h(&er, 9).unwrap(), realize_h(&er, 9).unwrap());
    assert_ne!(realize_h(&er, 9).unwrap(), realize_h(&er, 10).unwrap());
}

#[test]
fn frozen_random_h_is_reused() {
    let model = PlantedModel::new(50, 0.1, HSpec::ErdosRenyiSub { k: 12, q: 0.5 }).unwrap();
    assert!(model.fixed_h().is_none());
    let frozen = model.freeze_h(2).unwrap();
    let h = frozen.fixed_h().unwrap().clone();
    for i in 0..5 {
        assert_eq!(frozen.sample_planted_with(&mut trial_rng(1, i, Arm::Planted)).unwrap().realized_h, h);
    }
}

#[test]
fn specs_parse_and_print() {
    for text in ["clique:5", "star:3", "biclique:4,2", "cycle:6", "matching:3", "path:4", "er:10,0.25"] {
        assert_eq!(HSpec::parse(text).unwrap().to_string(), text);
    }
    let g = realize_h(&HSpec::parse("biclique:3,2").unwrap(), 0).unwrap();
    assert_eq!((g.n(), g.edge_count()), (5, 6));
    assert_eq!(HSpec::parse("1e3").ok(), None);
    assert_eq!(HSpec::parse("clique:1e2").unwrap(), HSpec::Clique(100));
    for bad in ["clique:0", "cycle:2", "biclique:2,3", "er:5,0", "er:5,1.5", "blob:3", "clique"] {
        assert!(HSpec::parse(bad).is_err(), "{bad} should be rejected");
    }
}

#[test]
fn oversized_h_and_bad_density_are_rejected() {
    assert!(matches!(PlantedModel::new(5, 0.5, HSpec::Clique(6)), Err(Error::Embedding { .. })));
    assert!(PlantedModel::new(5, 0.0, HSpec::Clique(2)).is_err());
    assert!(PlantedModel::new(5, 1.0, HSpec::Clique(2)).is_err());
    // Isolated vertices of an explicit H do not count towards its size.
    let h = Graph::from_edges(9, [(0, 1)]).unwrap();
    assert!(PlantedModel::new(4, 0.5, HSpec::Explicit(h)).is_ok());
}
