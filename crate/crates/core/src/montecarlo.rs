//! Deterministic Monte Carlo under `P` and `Q`.
//!
//! Every draw is addressed by `(master seed, trial index, arm)`, so results do
//! not depend on the number of worker threads. Trials run on the rayon pool
//! and are reduced in index order.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph_core::{Graph, Shape};
use crate::models::{keyed_rng, sample_gnp_degrees, trial_rng, Arm, PlantedModel};
use crate::report::{csv_field, fmt_f64, Obj, Value};
use crate::statistics::{pairwise_sum, Evaluator, TestStatistic};
use crate::work::WorkLimit;

/// A finite-`n` separation ratio at or above this counts as "separating at
/// this scale".
pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 5.0;

/// Sample moments of one arm with jackknife standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub samples: usize,
    pub mean: f64,
    pub se_mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub se_var: f64,
    /// Mean of the squared values.
    pub second: f64,
    pub se_second: f64,
}

impl ArmSummary {
    pub fn from_samples(xs: &[f64]) -> ArmSummary {
        let n = xs.len();
        if n == 0 {
            return ArmSummary { samples: 0, mean: f64::NAN, se_mean: f64::NAN, var: f64::NAN, se_var: f64::NAN, second: f64::NAN, se_second: f64::NAN };
        }
        let nf = n as f64;
        let mean = pairwise_sum(xs) / nf;
        let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
        let sq: Vec<f64> = dev.iter().map(|d| d * d).collect();
        let ss = pairwise_sum(&sq);
        let squares: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let second = pairwise_sum(&squares) / nf;
        if n < 2 {
            return ArmSummary { samples: n, mean, se_mean: f64::NAN, var: f64::NAN, se_var: f64::NAN, second, se_second: f64::NAN };
        }
        let var = ss / (nf - 1.0);
        // The jackknife SE of a sample mean is the usual sd / sqrt(n).
        let se_mean = (var / nf).sqrt();
        let sq_dev: Vec<f64> = squares.iter().map(|s| (s - second).powi(2)).collect();
        let se_second = (pairwise_sum(&sq_dev) / (nf - 1.0) / nf).sqrt();
        let se_var = if n < 3 {
            f64::NAN
        } else {
            // Leave-one-out variances in closed form.
            let loo: Vec<f64> = dev.iter().map(|d| (ss - d * d * nf / (nf - 1.0)) / (nf - 2.0)).collect();
            let loo_mean = pairwise_sum(&loo) / nf;
            let spread: Vec<f64> = loo.iter().map(|v| (v - loo_mean).powi(2)).collect();
            ((nf - 1.0) / nf * pairwise_sum(&spread)).sqrt()
        };
        ArmSummary { samples: n, mean, se_mean, var: var.max(0.0), se_var, second, se_second }
    }

    pub fn sd(&self) -> f64 {
        self.var.sqrt()
    }

    fn to_value(&self) -> Value {
        Obj::new()
            .with("samples", self.samples)
            .with("mean", self.mean)
            .with("se_mean", self.se_mean)
            .with("var", self.var)
            .with("se_var", self.se_var)
            .with("second_moment", self.second)
            .with("se_second_moment", self.se_second)
            .build()
    }
}

/// Raw statistic values for both arms; `values[arm][stat][trial]`.
#[derive(Debug, Clone)]
pub struct ArmSamples {
    pub null: Vec<Vec<f64>>,
    pub planted: Vec<Vec<f64>>,
    /// First failure, if a trial could not be evaluated. Samples are kept up
    /// to (not including) the failing trial index.
    pub abort: Option<Error>,
}

fn run_arm(
    trials: usize,
    evaluators: &[Evaluator],
    draw: impl Fn(u64) -> Result<Graph> + Sync,
) -> (Vec<Vec<f64>>, Option<Error>) {
    let rows: Vec<Result<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = draw(i as u64)?;
            evaluators.iter().map(|e| e.evaluate(&g)).collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(trials); evaluators.len()];
    for row in rows {
        match row {
            Ok(vals) => {
                for (col, v) in out.iter_mut().zip(vals) {
                    col.push(v);
                }
            }
            Err(e) => return (out, Some(e)),
        }
    }
    (out, None)
}

/// Fails when a single draw of the model would scan more pairs than `limit`.
pub fn check_sampling_cost(model: &PlantedModel, limit: WorkLimit) -> Result<()> {
    let n = model.n() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let scanned = if model.p() < 0.1 { pairs * model.p() + n } else { pairs };
    limit.check("graph sampling", scanned)
}

/// Samples `trials` graphs per arm and evaluates every statistic on each.
pub fn sample_arms(model: &PlantedModel, evaluators: &[Evaluator], trials: usize, seed: u64) -> ArmSamples {
    let (null, e1) = run_arm(trials, evaluators, |i| Ok(model.sample_null_with(&mut trial_rng(seed, i, Arm::Null))));
    if e1.is_some() {
        return ArmSamples { null, planted: vec![Vec::new(); evaluators.len()], abort: e1 };
    }
    let (planted, e2) = run_arm(trials, evaluators, |i| {
        model.sample_planted_with(&mut trial_rng(seed, i, Arm::Planted)).map(|s| s.graph)
    });
    ArmSamples { null, planted, abort: e1.or(e2) }
}

/// How the detection threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// `(mean_p + mean_q) / 2` on the calibration half.
    Midpoint,
    /// A fixed threshold; the orientation still comes from the calibration
    /// half.
    Fixed(f64),
}

/// Empirical error rates of a threshold test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub threshold: f64,
    /// `true` when large values indicate `P`.
    pub planted_above: bool,
    pub type1: f64,
    pub type2: f64,
    /// Calibration means were equal, so the orientation is arbitrary.
    pub degenerate: bool,
    pub evaluated: usize,
}

impl ErrorRates {
    pub fn total(&self) -> f64 {
        self.type1 + self.type2
    }
}

/// Calibrates a threshold on the first half of each arm and measures the
/// errors on the second half. A value strictly beyond the threshold on the
/// planted side is declared planted.
pub fn empirical_error(null: &[f64], planted: &[f64], policy: ThresholdPolicy) -> Result<ErrorRates> {
    if null.len() < 2 || planted.len() < 2 {
        return Err(Error::InvalidParameter("each arm needs at least two samples".into()));
    }
    let (cal_q, eval_q) = null.split_at(null.len() / 2);
    let (cal_p, eval_p) = planted.split_at(planted.len() / 2);
    let mq = pairwise_sum(cal_q) / cal_q.len() as f64;
    let mp = pairwise_sum(cal_p) / cal_p.len() as f64;
    let degenerate = mp == mq;
    let planted_above = mp >= mq;
    let threshold = match policy {
        ThresholdPolicy::Midpoint => (mp + mq) / 2.0,
        ThresholdPolicy::Fixed(t) => t,
    };
    let says_planted = |x: f64| if planted_above { x > threshold } else { x < threshold };
    let type1 = eval_q.iter().filter(|&&x| says_planted(x)).count() as f64 / eval_q.len() as f64;
    let type2 = eval_p.iter().filter(|&&x| !says_planted(x)).count() as f64 / eval_p.len() as f64;
    Ok(ErrorRates { threshold, planted_above, type1, type2, degenerate, evaluated: eval_q.len() + eval_p.len() })
}

/// Output of [`estimate_separation`].
#[derive(Debug, Clone)]
pub struct MCReport {
    pub statistic: String,
    pub model: String,
    pub trials: usize,
    pub seed: u64,
    pub null: ArmSummary,
    pub planted: ArmSummary,
    /// `|mean_p − mean_q| / max(sd_p, sd_q)`; 0 when both variances vanish.
    pub separation_ratio: f64,
    pub zero_variance: bool,
    pub separation_threshold: f64,
    pub errors: Option<ErrorRates>,
    /// Message of the failure that stopped an arm early.
    pub aborted: Option<String>,
    pub aborted_on_budget: bool,
    /// Not serialized, so reports stay reproducible.
    pub elapsed_secs: f64,
}

/// Column names of [`MCReport::csv_row`].
pub const MC_CSV_HEADER: &str = "statistic,model,trials,seed,mean_q,se_mean_q,var_q,se_var_q,mean_p,se_mean_p,var_p,se_var_p,separation_ratio,zero_variance,threshold,type1,type2,degenerate_threshold,aborted";

impl MCReport {
    fn from_samples(statistic: String, model: String, trials: usize, seed: u64, null: &[f64], planted: &[f64], abort: Option<&Error>, elapsed_secs: f64) -> MCReport {
        let q = ArmSummary::from_samples(null);
        let p = ArmSummary::from_samples(planted);
        let sd = q.sd().max(p.sd());
        let zero_variance = !(sd > 0.0);
        let separation_ratio = if zero_variance { 0.0 } else { (p.mean - q.mean).abs() / sd };
        let errors = empirical_error(null, planted, ThresholdPolicy::Midpoint).ok();
        MCReport {
            statistic,
            model,
            trials,
            seed,
            null: q,
            planted: p,
            separation_ratio,
            zero_variance,
            separation_threshold: DEFAULT_SEPARATION_THRESHOLD,
            errors,
            aborted: abort.map(|e| e.to_string()),
            aborted_on_budget: abort.is_some_and(Error::is_budget),
            elapsed_secs,
        }
    }

    pub fn separating(&self) -> bool {
        !self.zero_variance && self.separation_ratio >= self.separation_threshold
    }

    pub fn to_value(&self) -> Value {
        let errors = match &self.errors {
            None => Value::Null,
            Some(e) => Obj::new()
                .with("policy", "midpoint")
                .with("threshold", e.threshold)
                .with("planted_above", e.planted_above)
                .with("type1", e.type1)
                .with("type2", e.type2)
                .with("total", e.total())
                .with("degenerate_threshold", e.degenerate)
                .with("evaluated", e.evaluated)
                .build(),
        };
        Obj::new()
            .with("statistic", self.statistic.as_str())
            .with("model", self.model.as_str())
            .with("trials", self.trials)
            .with("seed", self.seed)
            .with("null", self.null.to_value())
            .with("planted", self.planted.to_value())
            .with("separation_ratio", self.separation_ratio)
            .with("zero_variance", self.zero_variance)
            .with("separation_threshold", self.separation_threshold)
            .with("separating", self.separating())
            .with("errors", errors)
            .with("aborted", self.aborted.clone())
            .build()
    }

    /// One CSV line matching [`MC_CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let e = self.errors;
        let fields = [
            csv_field(&self.statistic),
            csv_field(&self.model),
            self.trials.to_string(),
            self.seed.to_string(),
            fmt_f64(self.null.mean),
            fmt_f64(self.null.se_mean),
            fmt_f64(self.null.var),
            fmt_f64(self.null.se_var),
            fmt_f64(self.planted.mean),
            fmt_f64(self.planted.se_mean),
            fmt_f64(self.planted.var),
            fmt_f64(self.planted.se_var),
            fmt_f64(self.separation_ratio),
            self.zero_variance.to_string(),
            e.map_or(String::new(), |e| fmt_f64(e.threshold)),
            e.map_or(String::new(), |e| fmt_f64(e.type1)),
            e.map_or(String::new(), |e| fmt_f64(e.type2)),
            e.map_or(String::new(), |e| e.degenerate.to_string()),
            csv_field(self.aborted.as_deref().unwrap_or("")),
        ];
        fields.join(",")
    }
}

/// Moments, separation ratio and midpoint error rates of `stat` under both
/// arms. Fails if an arm aborts before two trials complete; a later abort
/// yields a partial report with `aborted` set.
pub fn estimate_separation(model: &PlantedModel, stat: &TestStatistic, trials: usize, seed: u64, limit: WorkLimit) -> Result<MCReport> {
    estimate_many(model, std::slice::from_ref(stat), trials, seed, limit).map(|mut v| v.remove(0))
}

/// [`estimate_separation`] for several statistics evaluated on the same draws.
pub fn estimate_many(model: &PlantedModel, stats: &[TestStatistic], trials: usize, seed: u64, limit: WorkLimit) -> Result<Vec<MCReport>> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("trials = {trials}, need at least 2")));
    }
    check_sampling_cost(model, limit)?;
    let evaluators = stats
        .iter()
        .map(|s| Evaluator::new(s.clone(), model.n(), model.p(), limit))
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let samples = sample_arms(model, &evaluators, trials, seed);
    let elapsed = start.elapsed().as_secs_f64();
    let shortest = samples.null.iter().chain(&samples.planted).map(Vec::len).min().unwrap_or(0);
    if let Some(e) = samples.abort.clone() {
        if shortest < 2 {
            return Err(e);
        }
    }
    Ok(stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            MCReport::from_samples(
                s.to_string(),
                model.describe(),
                trials,
                seed,
                &samples.null[i],
                &samples.planted[i],
                samples.abort.as_ref(),
                elapsed,
            )
        })
        .collect())
}

/// Estimate of `E_P[f²] / E_P[f]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimate {
    pub ratio: f64,
    /// Delta-method standard error.
    pub se: f64,
    pub mean_p: f64,
    pub se_mean_p: f64,
    pub second_p: f64,
    /// `|mean_p| < 4 · SE(mean_p)`: the ratio is not trustworthy.
    pub unstable: bool,
}

/// Estimates `E_P[f_S²] / E_P[f_S]²` from `trials` planted draws.
pub fn second_moment_ratio(model: &PlantedModel, shape: &Shape, trials: usize, seed: u64, limit: WorkLimit) -> Result<RatioEstimate> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("trials = {trials}, need at least 2")));
    }
    check_sampling_cost(model, limit)?;
    let eval = Evaluator::new(TestStatistic::SignedShapeCount(shape.clone()), model.n(), model.p(), limit)?;
    let (cols, abort) = run_arm(trials, std::slice::from_ref(&eval), |i| {
        model.sample_planted_with(&mut trial_rng(seed, i, Arm::Planted)).map(|s| s.graph)
    });
    if let Some(e) = abort {
        return Err(e);
    }
    let xs = &cols[0];
    let n = xs.len() as f64;
    let m1 = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let m2 = pairwise_sum(&sq) / n;
    let (mut s11, mut s12, mut s22) = (Vec::new(), Vec::new(), Vec::new());
    for (x, x2) in xs.iter().zip(&sq) {
        let (a, b) = (x - m1, x2 - m2);
        s11.push(a * a);
        s12.push(a * b);
        s22.push(b * b);
    }
    let (v11, v12, v22) = (pairwise_sum(&s11) / (n - 1.0) / n, pairwise_sum(&s12) / (n - 1.0) / n, pairwise_sum(&s22) / (n - 1.0) / n);
    let ratio = m2 / (m1 * m1);
    let (g1, g2) = (-2.0 * m2 / m1.powi(3), 1.0 / (m1 * m1));
    let se = (g1 * g1 * v11 + 2.0 * g1 * g2 * v12 + g2 * g2 * v22).max(0.0).sqrt();
    let se_mean_p = v11.sqrt();
    Ok(RatioEstimate { ratio, se, mean_p: m1, se_mean_p, second_p: m2, unstable: !(m1.abs() >= 4.0 * se_mean_p) || m1 == 0.0 })
}

/// Result of [`degree_concentration_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub k: usize,
    pub q: f64,
    pub delta: f64,
    pub trials: usize,
    pub passes: usize,
    pub pass_rate: f64,
    /// `(k − 1) q`.
    pub expected_max_degree: f64,
    /// `C(k, 2) q`.
    pub expected_edges: f64,
    pub max_degree_range: (usize, usize),
    pub edge_count_range: (usize, usize),
}

/// Fraction of `G(k, q)` draws whose maximum degree lies in
/// `(1 ± delta)(k − 1)q` and whose edge count lies in `(1 ± delta) C(k, 2) q`.
pub fn degree_concentration_check(k: usize, q: f64, delta: f64, trials: usize, seed: u64) -> Result<ConcentrationReport> {
    if !(q > 0.0 && q <= 1.0) || k < 2 {
        return Err(Error::InvalidParameter(format!("need k >= 2 and q in (0, 1], got k = {k}, q = {q}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let dmax = (k - 1) as f64 * q;
    let edges = (k * (k - 1) / 2) as f64 * q;
    let inside = |x: f64, centre: f64| x >= (1.0 - delta) * centre && x <= (1.0 + delta) * centre;
    let draws: Vec<(usize, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let (deg, m) = sample_gnp_degrees(k, q, &mut keyed_rng(seed, i));
            (deg.into_iter().max().unwrap_or(0), m)
        })
        .collect();
    let passes = draws.iter().filter(|&&(d, m)| inside(d as f64, dmax) && inside(m as f64, edges)).count();
    let range = |f: fn(&(usize, usize)) -> usize| {
        (draws.iter().map(f).min().unwrap_or(0), draws.iter().map(f).max().unwrap_or(0))
    };
    Ok(ConcentrationReport {
        k,
        q,
        delta,
        trials,
        passes,
        pass_rate: passes as f64 / trials as f64,
        expected_max_degree: dmax,
        expected_edges: edges,
        max_degree_range: range(|x| x.0),
        edge_count_range: range(|x| x.1),
    })
}
