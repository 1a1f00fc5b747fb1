use starcount::advantage::exact_planted_second_moment;
use starcount::graph_core::{Graph, Shape};
use starcount::models::{HSpec, PlantedModel};
use starcount::montecarlo::*;
use starcount::statistics::TestStatistic;
use starcount::WorkLimit;

fn jackknife_se<F: Fn(&[f64]) -> f64>(xs: &[f64], stat: F) -> f64 {
    let n = xs.len();
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let rest: Vec<f64> = xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| *x).collect();
            stat(&rest)
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    ((n - 1) as f64 / n as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
}

#[test]
fn summary_errors_match_leave_one_out() {
    let xs: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64 - 3.0).powi(2) / 7.0).collect();
    let s = ArmSummary::from_samples(&xs);
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let second = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    assert!((s.var - var(&xs)).abs() < 1e-12);
    assert!((s.se_var - jackknife_se(&xs, var)).abs() < 1e-10, "{} vs {}", s.se_var, jackknife_se(&xs, var));
    assert!((s.second - second(&xs)).abs() < 1e-12);
    assert!((s.se_second - jackknife_se(&xs, second)).abs() < 1e-10);
}

#[test]
fn planted_second_moment_agrees_with_sampling() {
    let (n, p, trials) = (7, 0.5, 20_000);
    let h = Graph::complete(3);
    let model = PlantedModel::new(n, p, HSpec::Clique(3)).unwrap();
    for shape in [Shape::edge(), Shape::star(2).unwrap()] {
        let exact = exact_planted_second_moment(&shape, &h, n, p, WorkLimit::default()).unwrap();
        let report = estimate_separation(&model, &TestStatistic::SignedShapeCount(shape.clone()), trials, 3, WorkLimit::default()).unwrap();
        let z = (report.planted.second - exact) / report.planted.se_second;
        assert!(z.abs() <= 4.0, "{}: sampled {} exact {exact} z {z}", shape.describe(), report.planted.second);
    }
}

#[test]
fn empty_planting_cannot_be_detected() {
    let model = PlantedModel::new(30, 0.5, HSpec::Explicit(Graph::empty(3))).unwrap();
    let report = estimate_separation(&model, &TestStatistic::SignedStarCount(1), 2000, 4, WorkLimit::default()).unwrap();
    let errors = report.errors.unwrap();
    let se = (2.0 * 0.25 / 1000.0f64).sqrt();
    assert!((errors.total() - 1.0).abs() <= 4.0 * se, "type1 + type2 = {}", errors.total());
    assert!(!report.separating());
    let ratio = second_moment_ratio(&model, &Shape::edge(), 2000, 4, WorkLimit::default()).unwrap();
    assert!(ratio.unstable);
}

#[test]
fn edge_count_ratio_for_a_large_clique() {
    let model = PlantedModel::new(400, 0.5, HSpec::Clique(80)).unwrap();
    let r = second_moment_ratio(&model, &Shape::edge(), 3000, 5, WorkLimit::default()).unwrap();
    assert!(!r.unstable);
    assert!(r.ratio >= 1.0 && r.ratio <= 1.2, "ratio {} ± {}", r.ratio, r.se);
    // E_P f = C(80, 2) at p = 1/2.
    assert!((r.mean_p - 3160.0).abs() <= 4.0 * r.se_mean_p, "{} ± {}", r.mean_p, r.se_mean_p);
}

#[test]
fn complete_subgraphs_concentrate_trivially() {
    let r = degree_concentration_check(10_000, 1.0, 0.2, 3, 1).unwrap();
    assert_eq!(r.pass_rate, 1.0);
    assert_eq!(r.max_degree_range, (9999, 9999));
    assert_eq!(r.edge_count_range, (49_995_000, 49_995_000));
    assert!(degree_concentration_check(10, 0.0, 0.2, 3, 1).is_err());
}

#[test]
fn threshold_rules() {
    let null: Vec<f64> = (0..20).map(|i| i as f64 % 5.0).collect();
    let planted: Vec<f64> = null.iter().map(|x| x + 10.0).collect();
    let e = empirical_error(&null, &planted, ThresholdPolicy::Midpoint).unwrap();
    assert_eq!((e.threshold, e.planted_above, e.type1, e.type2, e.evaluated), (7.0, true, 0.0, 0.0, 20));
    let e = empirical_error(&planted, &null, ThresholdPolicy::Midpoint).unwrap();
    assert!(!e.planted_above && e.total() == 0.0);
    // A fixed threshold inside the null range misclassifies the values above it.
    let e = empirical_error(&null, &planted, ThresholdPolicy::Fixed(2.5)).unwrap();
    assert_eq!((e.type1, e.type2), (0.4, 0.0));
    let e = empirical_error(&null, &null, ThresholdPolicy::Midpoint).unwrap();
    assert!(e.degenerate);
    assert!(empirical_error(&[1.0], &planted, ThresholdPolicy::Midpoint).is_err());
}

#[test]
fn reports_are_reproducible() {
    let model = PlantedModel::new(60, 0.3, HSpec::Clique(10)).unwrap();
    let stat = TestStatistic::SignedStarCount(2);
    let run = |seed| estimate_separation(&model, &stat, 300, seed, WorkLimit::default()).unwrap();
    let (a, b, c) = (run(9), run(9), run(10));
    assert_eq!(a.to_value().render(), b.to_value().render());
    assert_eq!(a.csv_row(), b.csv_row());
    assert_ne!(a.csv_row(), c.csv_row());
    assert_eq!(a.csv_row().split(',').count(), MC_CSV_HEADER.split(',').count());
}

#[test]
fn budgets_stop_sampling() {
    let model = PlantedModel::new(200, 0.5, HSpec::Clique(20)).unwrap();
    let err = estimate_separation(&model, &TestStatistic::SignedStarCount(1), 50, 1, WorkLimit(1000)).unwrap_err();
    assert!(err.is_budget());
    // Sampling fits but the trace does not: no trial survives.
    let err = estimate_separation(&model, &TestStatistic::ClosedPathTrace(6), 50, 1, WorkLimit(100_000)).unwrap_err();
    assert!(err.is_budget(), "{err}");
    assert!(estimate_separation(&model, &TestStatistic::SignedStarCount(1), 1, 1, WorkLimit::default()).is_err());
}
