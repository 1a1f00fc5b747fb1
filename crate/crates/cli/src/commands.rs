use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;

use starcount::advantage::{
    brute_force_advantage, classify_regime, exact_planted_second_moment, pbc_cell, pds_cell, total_advantage,
    AdvantageReport, ExponentCell, Margins, RegimeLabel,
};
use starcount::graph_core::{
    count_labelled_copies, enumerate_patterns, enumerate_shapes, CanonKey, CopyCounter, DegreeProfile, Graph, Shape,
};
use starcount::models::{keyed_rng, realize_h, sample_gnp, HSpec, PlantedModel};
use starcount::montecarlo::{estimate_separation, MC_CSV_HEADER};
use starcount::report::{csv_field, fmt_f64, Obj, Value};
use starcount::statistics::TestStatistic;
use starcount::{parse_count, Error, WorkLimit};

use crate::config::RunConfig;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;

/// A failed run: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_budget() { EXIT_BUDGET } else { EXIT_CONFIG };
        Failure { code, message: e.to_string() }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

type Run<T> = std::result::Result<T, Failure>;

/// What a command produced. `exit` is non-zero when the run completed but
/// must still signal failure (oracle residuals, aborted Monte Carlo arms).
pub struct Output {
    pub result: Value,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
    pub exit: u8,
}

pub fn work_limit(cfg: &RunConfig) -> Run<WorkLimit> {
    match cfg.work_limit {
        Some(l) => Ok(WorkLimit(l)),
        None => Ok(WorkLimit::from_env()?),
    }
}

fn margins(cfg: &RunConfig, default_tau: f64) -> Margins {
    let d = Margins::default();
    Margins {
        c_edge: cfg.c_edge.unwrap_or(d.c_edge),
        eps_min: cfg.eps_min.unwrap_or(d.eps_min),
        tau: cfg.tau.unwrap_or(default_tau),
    }
}

fn size(text: &str) -> Run<usize> {
    parse_count(text).map(|v| v as usize).ok_or_else(|| config_error(format!("`{text}` is not a size")))
}

fn number(key: &str, text: &str) -> Run<f64> {
    text.trim().parse().map_err(|_| config_error(format!("{key} = `{text}` is not a number")))
}

/// `(n, p, H spec text, default statistic)` after expanding presets.
pub struct ModelChoice {
    pub n: usize,
    pub p: f64,
    pub h: String,
    pub default_stat: Option<String>,
}

pub fn resolve_model(cfg: &RunConfig) -> Run<ModelChoice> {
    let need = |what: &str| config_error(format!("missing `{what}`"));
    let n = size(cfg.n.as_deref().ok_or_else(|| need("n"))?)?;
    let p = cfg.p;
    let choice = match cfg.preset.as_deref() {
        None => ModelChoice {
            n,
            p: p.ok_or_else(|| need("p"))?,
            h: cfg.h.clone().ok_or_else(|| need("h"))?,
            default_stat: None,
        },
        Some(preset) => {
            if cfg.h.is_some() {
                return Err(config_error("give either a preset or `h`, not both"));
            }
            let k = || cfg.k.ok_or_else(|| need("k"));
            match preset {
                "clique" => ModelChoice { n, p: p.ok_or_else(|| need("p"))?, h: format!("clique:{}", k()?), default_stat: Some("star:1".into()) },
                "independent-set" => {
                    // An independent set in G(n, p) is a clique in the complement G(n, 1 - p).
                    let p = p.ok_or_else(|| need("p"))?;
                    ModelChoice { n, p: 1.0 - p, h: format!("clique:{}", k()?), default_stat: Some("star:1".into()) }
                }
                "pds" => ModelChoice {
                    n,
                    p: p.ok_or_else(|| need("p"))?,
                    h: format!("er:{},{}", k()?, cfg.q.ok_or_else(|| need("q"))?),
                    default_stat: Some("star:1".into()),
                },
                "pbc" => {
                    let (a, b) = (cfg.a.ok_or_else(|| need("a"))?, cfg.b.ok_or_else(|| need("b"))?);
                    ModelChoice { n, p: p.ok_or_else(|| need("p"))?, h: format!("biclique:{},{}", a.max(b), a.min(b)), default_stat: Some("star:1".into()) }
                }
                "counterexample-small-p" => {
                    let gamma = number("gamma", cfg.gamma.as_deref().ok_or_else(|| need("gamma"))?)?;
                    if !(gamma > 0.0) {
                        return Err(config_error("gamma must be positive"));
                    }
                    let k = cfg.k.unwrap_or((4.0 / gamma).ceil() as usize);
                    ModelChoice { n, p: p.unwrap_or((n as f64).powf(-gamma)), h: format!("clique:{k}"), default_stat: Some(format!("clique-count:{k}")) }
                }
                "counterexample-trace" => {
                    let c = cfg.c.ok_or_else(|| need("c"))?;
                    let l = cfg.l.ok_or_else(|| need("l"))?;
                    let k = cfg.k.unwrap_or((c * (n as f64).sqrt()).round() as usize);
                    ModelChoice { n, p: p.unwrap_or(0.5), h: format!("clique:{k}"), default_stat: Some(format!("trace:{l}")) }
                }
                other => return Err(config_error(format!("unknown preset `{other}`"))),
            }
        }
    };
    Ok(choice)
}

pub fn analyze(cfg: &RunConfig) -> Run<Output> {
    let m = resolve_model(cfg)?;
    let limit = work_limit(cfg)?;
    let d = cfg.d.unwrap_or(3);
    let spec = HSpec::parse(&m.h)?;
    let h = realize_h(&spec, cfg.seed.unwrap_or(0))?.without_isolated();
    if h.n() > m.n {
        return Err(Error::Embedding { h_vertices: h.n(), n: m.n }.into());
    }
    let profile = DegreeProfile::from_graph(&h);
    let report = AdvantageReport::build(Some(&h), profile, m.n, m.p, d, margins(cfg, Margins::default().tau), limit)?;
    let result = Obj::new()
        .with("h", m.h.as_str())
        .with("h_vertices", h.n())
        .with("h_edges", h.edge_count())
        .with("analysis", report.to_value())
        .build();
    let total = report.total.as_ref().map(|t| fmt_f64(t.value)).unwrap_or_default();
    let rows = report
        .criterion
        .per_t
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{},{},{}",
                s.t,
                fmt_f64(s.exact_adv),
                fmt_f64(s.aut_rescaled),
                fmt_f64(s.falling_npower),
                fmt_f64(s.surrogate),
                report.criterion.t_star,
                report.regime.label,
                total
            )
        })
        .collect();
    Ok(Output {
        result,
        csv_header: "t,exact_adv,aut_rescaled_adv,falling_npower,surrogate,t_star,regime,total_adv".into(),
        csv_rows: rows,
        exit: 0,
    })
}

pub fn simulate(cfg: &RunConfig) -> Run<Output> {
    let m = resolve_model(cfg)?;
    let limit = work_limit(cfg)?;
    let stat_text = cfg.stat.clone().or(m.default_stat).ok_or_else(|| config_error("missing `stat`"))?;
    let stat = TestStatistic::parse(&stat_text)?;
    let model = PlantedModel::new(m.n, m.p, HSpec::parse(&m.h)?)?;
    let report = estimate_separation(&model, &stat, cfg.trials.unwrap_or(1000), cfg.seed.unwrap_or(0), limit)?;
    let exit = match (&report.aborted, report.aborted_on_budget) {
        (None, _) => 0,
        (Some(_), true) => EXIT_BUDGET,
        (Some(_), false) => EXIT_CONFIG,
    };
    Ok(Output { result: report.to_value(), csv_header: MC_CSV_HEADER.into(), csv_rows: vec![report.csv_row()], exit })
}

/// `start:stop:step` (inclusive), a comma-separated list, or one value.
pub fn parse_grid(text: &str) -> Run<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, s) = (number("grid", start)?, number("grid", stop)?, number("grid", step)?);
            if !(s > 0.0) || b < a {
                return Err(config_error(format!("grid `{text}` needs start <= stop and step > 0")));
            }
            let count = ((b - a) / s + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12).collect())
        }
        [_] => text.split(',').map(|v| number("grid", v)).collect(),
        _ => Err(config_error(format!("cannot read grid `{text}`"))),
    }
}

const SWEEP_HEADER: &str = "preset,n,alpha,beta,gamma,p,h,label,t_suggest,t_star,max_surrogate,surrogate_t1,exact_adv_t1,eps_hat,boundary,edge_separates,mc_ratio,error";

struct CellOut {
    value: Value,
    row: String,
}

fn sweep_cell(preset: &str, n: usize, alpha: f64, beta: f64, gamma: f64, cfg: &RunConfig, limit: WorkLimit) -> CellOut {
    let d = cfg.d.unwrap_or(4);
    let margins = margins(cfg, 1.0);
    let cell: starcount::Result<ExponentCell> = match preset {
        "pds" => pds_cell(n, alpha, beta, gamma),
        _ => pbc_cell(n, alpha, beta, gamma),
    };
    let coords = [preset.to_string(), n.to_string(), alpha.to_string(), beta.to_string(), gamma.to_string()];
    let fail = |e: String| {
        let mut row: Vec<String> = coords.to_vec();
        row.extend(std::iter::repeat_n(String::new(), 12));
        row.push(csv_field(&e));
        let value = Obj::new()
            .with("n", n)
            .with("alpha", alpha)
            .with("beta", beta)
            .with("gamma", gamma)
            .with("error", e.as_str())
            .build();
        CellOut { value, row: row.join(",") }
    };
    let cell = match cell {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let regime = match classify_regime(&cell.profile, n, cell.p, d, margins) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let crit = starcount::advantage::star_criterion(&cell.profile, n, cell.p, d).expect("classified above");
    let first = &crit.per_t[0];
    let edge_separates = first.surrogate > margins.tau;
    let (mc_ratio, mc_error) = match cfg.mc_trials {
        None => (None, None),
        Some(trials) => {
            let run = || -> starcount::Result<f64> {
                let model = PlantedModel::new(n, cell.p, HSpec::parse(&cell.h_spec)?)?;
                let stat = TestStatistic::parse(cfg.mc_stat.as_deref().unwrap_or("star:1"))?;
                Ok(estimate_separation(&model, &stat, trials, cfg.seed.unwrap_or(0), limit)?.separation_ratio)
            };
            match run() {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
    };
    let t_suggest = match regime.label {
        RegimeLabel::LargeStarsOptimal { t_suggest } => Some(t_suggest),
        _ => None,
    };
    let row = [
        coords.join(","),
        fmt_f64(cell.p),
        csv_field(&cell.h_spec),
        regime.label.name().to_string(),
        t_suggest.map(|t| t.to_string()).unwrap_or_default(),
        regime.t_star.to_string(),
        fmt_f64(regime.max_surrogate),
        fmt_f64(first.surrogate),
        fmt_f64(first.exact_adv),
        fmt_f64(regime.eps_hat),
        fmt_f64(cell.boundary),
        edge_separates.to_string(),
        mc_ratio.map(fmt_f64).unwrap_or_default(),
        csv_field(mc_error.as_deref().unwrap_or("")),
    ]
    .join(",");
    let value = Obj::new()
        .with("n", n)
        .with("alpha", alpha)
        .with("beta", beta)
        .with("gamma", gamma)
        .with("p", cell.p)
        .with("h", cell.h_spec.as_str())
        .with("label", regime.label.name())
        .with("t_suggest", t_suggest)
        .with("t_star", regime.t_star)
        .with("max_surrogate", regime.max_surrogate)
        .with("surrogate_t1", first.surrogate)
        .with("exact_adv_t1", first.exact_adv)
        .with("eps_hat", regime.eps_hat)
        .with("boundary", cell.boundary)
        .with("edge_separates", edge_separates)
        .with("mc_ratio", mc_ratio)
        .with("error", mc_error)
        .build();
    CellOut { value, row }
}

pub fn sweep(cfg: &RunConfig) -> Run<Output> {
    let preset = cfg.preset.as_deref().ok_or_else(|| config_error("sweep needs `preset` (pds or pbc)"))?;
    if preset != "pds" && preset != "pbc" {
        return Err(config_error(format!("sweep preset must be pds or pbc, got `{preset}`")));
    }
    let limit = work_limit(cfg)?;
    let ns: Vec<usize> = cfg.n.as_deref().unwrap_or("10^6").split(',').map(size).collect::<Run<_>>()?;
    let grid = |v: &Option<String>, default: &str| parse_grid(v.as_deref().unwrap_or(default));
    let (alphas, betas, gammas) = (grid(&cfg.alpha, "0")?, grid(&cfg.beta, "0.5")?, grid(&cfg.gamma, "0")?);
    let mut coords = Vec::new();
    for &n in &ns {
        for &a in &alphas {
            for &b in &betas {
                for &g in &gammas {
                    coords.push((n, a, b, g));
                }
            }
        }
    }
    let cells: Vec<CellOut> = coords.par_iter().map(|&(n, a, b, g)| sweep_cell(preset, n, a, b, g, cfg, limit)).collect();
    let (values, rows): (Vec<Value>, Vec<String>) = cells.into_iter().map(|c| (c.value, c.row)).unzip();
    Ok(Output {
        result: Obj::new().with("preset", preset).with("cells", Value::List(values)).build(),
        csv_header: SWEEP_HEADER.into(),
        csv_rows: rows,
        exit: 0,
    })
}

/// A shape from `H` spec syntax (`star:3`, `clique:4`, `file:x.el`, ...) or
/// `key:<hex>`.
pub fn parse_shape(text: &str) -> Run<Shape> {
    if let Some(hex) = text.strip_prefix("key:") {
        return Ok(Shape::from_key(&CanonKey::from_hex(hex)?)?);
    }
    let g = realize_h(&HSpec::parse(text)?, 0)?;
    Ok(Shape::from_graph(&g.without_isolated())?)
}

struct Check {
    name: String,
    pass: bool,
    residual: f64,
    tolerance: f64,
    detail: String,
}

fn random_graph(k: usize, q: f64, seed: u64, stream: u64) -> Graph {
    sample_gnp(k, q, &mut keyed_rng(seed, stream))
}

fn battery(cfg: &RunConfig, limit: WorkLimit) -> Run<Vec<Check>> {
    let seed = cfg.seed.unwrap_or(0);
    let instances = cfg.instances.unwrap_or(20);
    let mut checks = Vec::new();
    let mut rng = keyed_rng(seed, u64::MAX);
    for i in 0..instances {
        let n = rng.random_range(3..=7usize);
        let k = rng.random_range(2..=n);
        let d = rng.random_range(1..=3usize);
        let p = [0.3, 0.5, 0.7][i % 3];
        let h = random_graph(k, 0.6, seed, i as u64);
        let a = total_advantage(&h, n, p, d, limit)?.value;
        let b = brute_force_advantage(&h, n, p, d, limit)?;
        let residual = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        checks.push(Check {
            name: format!("total-vs-brute[{i}]"),
            pass: residual <= 1e-9,
            residual,
            tolerance: 1e-9,
            detail: format!("n={n} k={k} m={} D={d} p={p} total={a} brute={b}", h.edge_count()),
        });
    }

    let shape = Shape::star(2)?;
    let model = PlantedModel::new(7, 0.5, HSpec::Clique(3))?;
    let exact = exact_planted_second_moment(&shape, &Graph::complete(3), 7, 0.5, limit)?;
    let trials = cfg.trials.unwrap_or(20_000);
    let mc = estimate_separation(&model, &TestStatistic::SignedShapeCount(shape), trials, seed, limit)?;
    let z = (mc.planted.second - exact) / mc.planted.se_second;
    checks.push(Check {
        name: "planted-second-moment".into(),
        pass: z.abs() <= 4.0,
        residual: z.abs(),
        tolerance: 4.0,
        detail: format!("n=7 H=K3 shape=K1,2 p=0.5 exact={exact} mc={} se={} trials={trials}", mc.planted.second, mc.planted.se_second),
    });

    let shapes = enumerate_shapes(2)?;
    for i in 0..instances {
        let host = random_graph(rng.random_range(3..=7), 0.5, seed ^ 0x5eed, i as u64);
        let mut counter = CopyCounter::new(&host, limit);
        let mut worst = 0u64;
        for a in &shapes {
            for b in &shapes {
                let lhs = count_labelled_copies(a, &host) * count_labelled_copies(b, &host);
                let mut rhs = BigUint::ZERO;
                for pat in enumerate_patterns(a, b) {
                    rhs += counter.count_graph(pat.union_graph())?;
                }
                let diff = if lhs > rhs { lhs - rhs } else { rhs - lhs };
                worst = worst.max(u64::try_from(diff).unwrap_or(u64::MAX));
            }
        }
        checks.push(Check {
            name: format!("double-counting[{i}]"),
            pass: worst == 0,
            residual: worst as f64,
            tolerance: 0.0,
            detail: format!("host n={} m={}", host.n(), host.edge_count()),
        });
    }
    Ok(checks)
}

pub fn oracle(cfg: &RunConfig) -> Run<Output> {
    let limit = work_limit(cfg)?;
    let check = cfg.check.as_deref().unwrap_or("battery");
    match check {
        "battery" => {
            let checks = battery(cfg, limit)?;
            let all = checks.iter().all(|c| c.pass);
            let values: Vec<Value> = checks
                .iter()
                .map(|c| {
                    Obj::new()
                        .with("check", c.name.as_str())
                        .with("pass", c.pass)
                        .with("residual", c.residual)
                        .with("tolerance", c.tolerance)
                        .with("detail", c.detail.as_str())
                        .build()
                })
                .collect();
            let rows = checks
                .iter()
                .map(|c| format!("{},{},{},{},{}", c.name, c.pass, fmt_f64(c.residual), fmt_f64(c.tolerance), csv_field(&c.detail)))
                .collect();
            Ok(Output {
                result: Obj::new().with("check", "battery").with("all_pass", all).with("checks", Value::List(values)).build(),
                csv_header: "check,pass,residual,tolerance,detail".into(),
                csv_rows: rows,
                exit: if all { 0 } else { EXIT_ORACLE },
            })
        }
        "pattern-count" => {
            let s1 = parse_shape(cfg.s1.as_deref().ok_or_else(|| config_error("missing `s1`"))?)?;
            let s2 = parse_shape(cfg.s2.as_deref().ok_or_else(|| config_error("missing `s2`"))?)?;
            let count = enumerate_patterns(&s1, &s2).len();
            Ok(Output {
                result: Obj::new().with("check", "pattern-count").with("s1", s1.describe()).with("s2", s2.describe()).with("patterns", count).build(),
                csv_header: "check,s1,s2,patterns".into(),
                csv_rows: vec![format!("pattern-count,{},{},{count}", csv_field(&s1.describe()), csv_field(&s2.describe()))],
                exit: 0,
            })
        }
        "aut" => {
            let s = parse_shape(cfg.shape.as_deref().ok_or_else(|| config_error("missing `shape`"))?)?;
            let aut = s.automorphism_count();
            Ok(Output {
                result: Obj::new().with("check", "aut").with("shape", s.describe()).with("key", s.key().to_hex()).with("aut", aut).build(),
                csv_header: "check,shape,aut".into(),
                csv_rows: vec![format!("aut,{},{aut}", csv_field(&s.describe()))],
                exit: 0,
            })
        }
        other => Err(config_error(format!("unknown check `{other}` (battery, pattern-count, aut)"))),
    }
}

pub fn shapes(cfg: &RunConfig) -> Run<Output> {
    let list = enumerate_shapes(cfg.max_edges.unwrap_or(3))?;
    let values: Vec<Value> = list
        .iter()
        .map(|s| {
            Obj::new()
                .with("key", s.key().to_hex())
                .with("name", s.describe())
                .with("vertices", s.vertex_count())
                .with("edges", s.edge_count())
                .with("aut", s.automorphism_count())
                .build()
        })
        .collect();
    let rows = list
        .iter()
        .map(|s| format!("{},{},{},{},{}", s.key().to_hex(), csv_field(&s.describe()), s.vertex_count(), s.edge_count(), s.automorphism_count()))
        .collect();
    Ok(Output {
        result: Obj::new().with("count", list.len()).with("shapes", Value::List(values)).build(),
        csv_header: "key,name,vertices,edges,aut".into(),
        csv_rows: rows,
        exit: 0,
    })
}
