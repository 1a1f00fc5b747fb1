//! Closed-form advantages, the star criterion and regime classification.
//!
//! Throughout, `c = (1 - p) / p`. Counts are exact big integers; they are
//! turned into floats only in the final ratio, switching to logarithms when a
//! count exceeds `1e300`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph_core::{
    count_in_complete, enumerate_shapes, falling_factorial, CopyCounter, DegreeProfile, Graph,
    IntersectionPattern, Shape,
};
use crate::report::{Obj, Value};
use crate::statistics::pairwise_sum;
use crate::work::WorkLimit;

const LOG_SPACE_THRESHOLD: f64 = 1e300;

fn check_p(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok((1.0 - p) / p)
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")))
    }
}

/// Natural logarithm of a big integer (`-inf` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `num / sqrt(den)` times `c^{half_pow / 2}`, with a log-space fallback.
/// Returns the value and whether log space was needed.
fn scaled_ratio(num: &BigUint, den: &BigUint, c: f64, half_pow: f64) -> (f64, bool) {
    if num.is_zero() {
        return (0.0, false);
    }
    let (nf, df) = (num.to_f64().unwrap_or(f64::INFINITY), den.to_f64().unwrap_or(f64::INFINITY));
    if nf < LOG_SPACE_THRESHOLD && df < LOG_SPACE_THRESHOLD {
        (nf * c.powf(half_pow / 2.0) / df.sqrt(), false)
    } else {
        ((ln_big(num) + half_pow / 2.0 * c.ln() - 0.5 * ln_big(den)).exp(), true)
    }
}

/// `E_Q[f_S]`, `E_Q[f_S²]` and `E_P[f_S]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMoments {
    pub eq_mean: f64,
    pub eq_second: f64,
    pub ep_mean: f64,
}

/// Exact first and second moments of the signed count of `shape`.
pub fn shape_moments(shape: &Shape, h: &Graph, n: usize, p: f64, limit: WorkLimit) -> Result<ShapeMoments> {
    let c = check_p(p)?;
    let m_sh = CopyCounter::new(h, limit).count(shape)?;
    let m_s = count_in_complete(shape, n);
    let aut = shape.automorphism_count().to_f64().unwrap_or(f64::INFINITY);
    Ok(ShapeMoments {
        eq_mean: 0.0,
        eq_second: m_s.to_f64().unwrap_or(f64::INFINITY) / aut,
        ep_mean: m_sh.to_f64().unwrap_or(f64::INFINITY) / aut * c.powf(shape.edge_count() as f64 / 2.0),
    })
}

/// `Adv(f_S) = M_{S,H} c^{|S|/2} / sqrt(M_S |Aut S|)`.
pub fn shape_advantage(shape: &Shape, h: &Graph, n: usize, p: f64, limit: WorkLimit) -> Result<f64> {
    let c = check_p(p)?;
    let m_sh = CopyCounter::new(h, limit).count(shape)?;
    let den = count_in_complete(shape, n) * shape.automorphism_count();
    Ok(scaled_ratio(&m_sh, &den, c, shape.edge_count() as f64).0)
}

/// Star quantities for one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTerm {
    pub t: usize,
    /// `Adv(f_{K_{1,t}}) = Σ(d)_(t) c^{t/2} / sqrt(|Aut| n_(t+1))`.
    pub exact_adv: f64,
    /// `exact_adv · sqrt(|Aut|)`.
    pub aut_rescaled: f64,
    /// `Σ(d)_(t) c^{t/2} / n^{(1+t)/2}`.
    pub falling_npower: f64,
    /// `Σ d^t c^{t/2} / n^{(1+t)/2}`.
    pub surrogate: f64,
}

/// Output of [`star_criterion`]; a function of the degree multiset alone.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCriterion {
    pub n: usize,
    pub p: f64,
    pub d: usize,
    pub per_t: Vec<StarTerm>,
    /// Argmax of the surrogate over `1..=D`, smallest `t` on ties.
    pub t_star: usize,
    pub max_surrogate: f64,
    pub log_space: bool,
}

impl StarCriterion {
    pub fn argmax_at_endpoint(&self) -> bool {
        self.t_star == 1 || self.t_star == self.d
    }
}

fn star_aut(t: usize) -> BigUint {
    if t == 1 {
        BigUint::from(2u32)
    } else {
        falling_factorial(t as u64, t as u64)
    }
}

/// Per-`t` star advantages and surrogates for `t = 1..=D`.
pub fn star_criterion(profile: &DegreeProfile, n: usize, p: f64, d: usize) -> Result<StarCriterion> {
    let c = check_p(p)?;
    if d == 0 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    let mut per_t = Vec::with_capacity(d);
    let mut log_space = false;
    for t in 1..=d {
        let tf = t as f64;
        let falling = profile.falling_sum(t);
        let aut = star_aut(t);
        let m_s = falling_factorial(n as u64, t as u64 + 1);
        let (exact_adv, l1) = scaled_ratio(&falling, &(&m_s * &aut), c, tf);
        let (aut_rescaled, l2) = scaled_ratio(&falling, &m_s, c, tf);
        let scale = c.powf(tf / 2.0) / (n as f64).powf((1.0 + tf) / 2.0);
        let (falling_npower, l3) = match falling.to_f64() {
            Some(x) if x < LOG_SPACE_THRESHOLD => (x * scale, false),
            _ => ((ln_big(&falling) + scale.ln()).exp(), true),
        };
        let terms: Vec<f64> = profile.degrees().iter().filter(|&&x| x > 0).map(|&x| (x as f64).powf(tf)).collect();
        let surrogate = pairwise_sum(&terms) * scale;
        log_space |= l1 || l2 || l3;
        per_t.push(StarTerm { t, exact_adv, aut_rescaled, falling_npower, surrogate });
    }
    let mut t_star = 1;
    let mut best = per_t[0].surrogate;
    for term in &per_t[1..] {
        if term.surrogate > best {
            best = term.surrogate;
            t_star = term.t;
        }
    }
    Ok(StarCriterion { n, p, d, per_t, t_star, max_surrogate: best, log_space })
}

/// Constants of the two-sided bound
/// `C1 · surrogate − C2 <= falling_npower <= surrogate`, valid for `t <= D`.
///
/// For `d >= t`, `(d)_t >= d^t e^{-t²/2}`; vertices with `d < t` contribute
/// `0` on the left and less than `D^t` on the right.
pub fn sandwich_constants(profile: &DegreeProfile, n: usize, p: f64, d: usize) -> Result<(f64, f64)> {
    let c = check_p(p)?;
    let c1 = (-(d as f64).powi(2) / 2.0).exp();
    let v = profile.vertex_count() as f64;
    let worst = (1..=d)
        .map(|t| v * (d as f64).powi(t as i32) * c.powf(t as f64 / 2.0) / (n as f64).powf((1.0 + t as f64) / 2.0))
        .fold(0.0, f64::max);
    Ok((c1, c1 * worst))
}

/// Finite-size stand-ins for the asymptotic comparisons of the regime map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    /// Edges are optimal when `Δ <= c_edge · (np/(1-p))^{1/2}`.
    pub c_edge: f64,
    /// Smallest measured `ε̂` that counts as "large stars".
    pub eps_min: f64,
    /// The surrogate must exceed `tau` for any star to separate.
    pub tau: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Margins { c_edge: 1.0, eps_min: 0.05, tau: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeLabel {
    EdgesOptimal,
    LargeStarsOptimal { t_suggest: usize },
    Gray,
    NoConstantDegreeSeparation,
}

impl RegimeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeLabel::EdgesOptimal => "EdgesOptimal",
            RegimeLabel::LargeStarsOptimal { .. } => "LargeStarsOptimal",
            RegimeLabel::Gray => "Gray",
            RegimeLabel::NoConstantDegreeSeparation => "NoConstantDegreeSeparation",
        }
    }

    pub fn separates(&self) -> bool {
        !matches!(self, RegimeLabel::NoConstantDegreeSeparation)
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeLabel::LargeStarsOptimal { t_suggest } => write!(f, "LargeStarsOptimal(t={t_suggest})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A regime label with the raw quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub label: RegimeLabel,
    pub max_degree: usize,
    /// `(np/(1-p))^{1/2}`.
    pub degree_scale: f64,
    pub edge_count: usize,
    /// `n (p/(1-p))^{1/2}`.
    pub edge_count_scale: f64,
    /// `log Δ / log(np/(1-p)) − 1/2`; NaN when undefined.
    pub eps_hat: f64,
    pub max_surrogate: f64,
    pub t_star: usize,
    pub argmax_at_endpoint: bool,
    pub margins: Margins,
}

/// Places `(profile, n, p)` on the regime map.
pub fn classify_regime(profile: &DegreeProfile, n: usize, p: f64, d: usize, margins: Margins) -> Result<Regime> {
    let crit = star_criterion(profile, n, p, d)?;
    Ok(classify_with(&crit, profile, margins))
}

/// Same as [`classify_regime`] for an already computed criterion.
pub fn classify_with(crit: &StarCriterion, profile: &DegreeProfile, margins: Margins) -> Regime {
    let (n, p) = (crit.n as f64, crit.p);
    let base = n * p / (1.0 - p);
    let degree_scale = base.sqrt();
    let delta = profile.max_degree();
    let eps_hat = if delta > 0 && base > 1.0 { (delta as f64).ln() / base.ln() - 0.5 } else { f64::NAN };
    let label = if delta == 0 || crit.max_surrogate <= margins.tau {
        RegimeLabel::NoConstantDegreeSeparation
    } else if delta as f64 <= margins.c_edge * degree_scale {
        RegimeLabel::EdgesOptimal
    } else if eps_hat >= margins.eps_min {
        RegimeLabel::LargeStarsOptimal { t_suggest: (3.0 / (2.0 * eps_hat)).ceil() as usize + 1 }
    } else {
        RegimeLabel::Gray
    };
    Regime {
        label,
        max_degree: delta,
        degree_scale,
        edge_count: profile.edge_count(),
        edge_count_scale: n * (p / (1.0 - p)).sqrt(),
        eps_hat,
        max_surrogate: crit.max_surrogate,
        t_star: crit.t_star,
        argmax_at_endpoint: crit.argmax_at_endpoint(),
        margins,
    }
}

/// `Adv^{≤D}` and its per-shape contributions.
#[derive(Debug, Clone)]
pub struct TotalAdvantage {
    pub value: f64,
    pub squared: f64,
    /// `(shape, M_{S,H}² c^{|S|} / (M_S |Aut S|))` in canonical order.
    pub terms: Vec<(Shape, f64)>,
    pub log_space: bool,
}

/// `(Adv^{≤D})² = Σ_S M_{S,H}² c^{|S|} / (M_S |Aut S|)` over all shapes with
/// `1..=D` edges. Terms are computed in parallel and summed in canonical order.
pub fn total_advantage(h: &Graph, n: usize, p: f64, d: usize, limit: WorkLimit) -> Result<TotalAdvantage> {
    let c = check_p(p)?;
    if h.without_isolated().n() > n {
        return Err(Error::Embedding { h_vertices: h.without_isolated().n(), n });
    }
    let shapes = enumerate_shapes(d)?;
    if !h.is_complete() {
        // Backtracking visits at most |V(H)| Δ^(s-1) partial maps per
        // connected component with s vertices, and s <= D + 1.
        let h = h.without_isolated();
        let per_shape = h.n() as f64 * (h.max_degree().max(1) as f64).powi(d as i32);
        limit.check("total_advantage", per_shape * shapes.len() as f64)?;
    }
    let results: Vec<Result<(f64, bool)>> = shapes
        .par_iter()
        .map(|s| {
            let m_sh = CopyCounter::new(h, limit).count(s)?;
            let den = count_in_complete(s, n) * s.automorphism_count();
            let (root, log) = scaled_ratio(&m_sh, &den, c, s.edge_count() as f64);
            Ok((root * root, log))
        })
        .collect();
    let mut terms = Vec::with_capacity(shapes.len());
    let mut log_space = false;
    for (s, r) in shapes.into_iter().zip(results) {
        let (v, l) = r?;
        log_space |= l;
        terms.push((s, v));
    }
    let values: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let squared = pairwise_sum(&values);
    Ok(TotalAdvantage { value: squared.sqrt(), squared, terms, log_space })
}

/// `Adv^{≤D}` by enumerating every edge subset `S` of `K_n` with `1..=D`
/// edges and computing `E_P[χ_S] = P(S ⊆ embedded H) · c^{|S|/2}` over all
/// embeddings of `H`.
pub fn brute_force_advantage(h: &Graph, n: usize, p: f64, d: usize, limit: WorkLimit) -> Result<f64> {
    let c = check_p(p)?;
    let h = h.without_isolated();
    let k = h.n();
    if k > n {
        return Err(Error::Embedding { h_vertices: k, n });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    if pairs.len() > 128 {
        return Err(Error::Budget { what: "brute_force_advantage", limit: 128 });
    }
    let subsets: f64 = (1..=d).map(|j| binom_f64(pairs.len(), j)).sum();
    let embeddings = falling_factorial(n as u64, k as u64).to_f64().unwrap_or(f64::INFINITY);
    limit.check("brute_force_advantage", subsets * embeddings.max(1.0))?;

    let index = |u: usize, v: usize| pairs.binary_search(&(u.min(v), u.max(v))).expect("valid pair");
    let mut masks: HashMap<u128, u64> = HashMap::new();
    for_each_injection(k, n, &mut |img| {
        let mask = h.edges().fold(0u128, |m, (u, v)| m | 1u128 << index(img[u], img[v]));
        *masks.entry(mask).or_default() += 1;
    });
    let total_embeddings: u64 = masks.values().sum();
    let masks: Vec<(u128, u64)> = masks.into_iter().collect();

    let mut sum = Vec::new();
    let mut chosen = Vec::new();
    subsets_upto(pairs.len(), d, 0, &mut chosen, &mut |set| {
        let s: u128 = set.iter().fold(0, |m, &i| m | 1u128 << i);
        let hits: u64 = masks.iter().filter(|(m, _)| m & s == s).map(|(_, w)| w).sum();
        let prob = hits as f64 / total_embeddings as f64;
        let e = prob * c.powf(set.len() as f64 / 2.0);
        sum.push(e * e);
    });
    Ok(pairwise_sum(&sum).sqrt())
}

fn binom_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets_upto(m: usize, d: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if !chosen.is_empty() {
        f(chosen);
    }
    if chosen.len() == d {
        return;
    }
    for i in start..m {
        chosen.push(i);
        subsets_upto(m, d, i + 1, chosen, f);
        chosen.pop();
    }
}

fn for_each_injection(k: usize, n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(i: usize, n: usize, img: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
        if i == img.len() {
            f(img);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                img[i] = v;
                rec(i + 1, n, img, used, f);
                used[v] = false;
            }
        }
    }
    let mut img = vec![0; k];
    let mut used = vec![false; n];
    rec(0, n, &mut img, &mut used, f);
}

/// The ratio bounding one intersecting pair of `t`-stars:
///
/// `n^{|V(S1∪S2)| − |V(S1ΔS2)|} M_{S1ΔS2,H} c^{|S1ΔS2|/2} / (M_{K_{1,t},H}² c^t)`
///
/// with `M_{∅,H} = 1`.
pub fn intersection_ratio(
    pattern: &IntersectionPattern,
    h: &Graph,
    n: usize,
    p: f64,
    t: usize,
    limit: WorkLimit,
) -> Result<f64> {
    let c = check_p(p)?;
    if pattern.left().star_size() != Some(t) || pattern.right().star_size() != Some(t) {
        return Err(Error::InvalidParameter(format!("pattern is not a pair of {t}-stars")));
    }
    if pattern.overlap() == 0 {
        return Err(Error::InvalidParameter("the pattern must have a non-empty intersection".into()));
    }
    let mut counter = CopyCounter::new(h, limit);
    let star = counter.count(pattern.left())?;
    if star.is_zero() {
        return Err(Error::DivisionByZero(format!("H contains no {t}-star")));
    }
    let sym = if pattern.symdiff_edge_count() == 0 {
        BigUint::from(1u32)
    } else {
        counter.count_graph(pattern.symdiff_graph())?
    };
    if sym.is_zero() {
        return Ok(0.0);
    }
    let exponent = pattern.union_vertex_count() as f64 - pattern.symdiff_vertex_count() as f64;
    let log = exponent * (n as f64).ln() + ln_big(&sym) + pattern.symdiff_edge_count() as f64 / 2.0 * c.ln()
        - 2.0 * ln_big(&star)
        - t as f64 * c.ln();
    Ok(log.exp())
}

/// `E_P[f_S²]` exactly, by averaging the conditional second moment over every
/// embedding of `H`. Given the planted edge set `E_H`, a pair of copies
/// `(S, S')` contributes `1{SΔS' ⊆ E_H} c^{|SΔS'|/2} c^{|S∩S'∩E_H|}`.
pub fn exact_planted_second_moment(shape: &Shape, h: &Graph, n: usize, p: f64, limit: WorkLimit) -> Result<f64> {
    let c = check_p(p)?;
    let h = h.without_isolated();
    let (k, s) = (h.n(), shape.vertex_count());
    if k > n {
        return Err(Error::Embedding { h_vertices: k, n });
    }
    if s > n {
        return Err(Error::InvalidParameter(format!("shape has {s} vertices but n = {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    if pairs.len() > 128 {
        return Err(Error::Budget { what: "exact_planted_second_moment", limit: 128 });
    }
    let index = |u: usize, v: usize| pairs.binary_search(&(u.min(v), u.max(v))).expect("valid pair");

    let mut copies: HashMap<u128, ()> = HashMap::new();
    for_each_injection(s, n, &mut |img| {
        let mask = shape.graph().edges().fold(0u128, |m, (u, v)| m | 1u128 << index(img[u], img[v]));
        copies.insert(mask, ());
    });
    let mut copies: Vec<u128> = copies.into_keys().collect();
    copies.sort_unstable();

    let mut planted: HashMap<u128, u64> = HashMap::new();
    let emb = falling_factorial(n as u64, k as u64).to_f64().unwrap_or(f64::INFINITY);
    limit.check("exact_planted_second_moment", emb + (copies.len() as f64).powi(2))?;
    for_each_injection(k, n, &mut |img| {
        let mask = h.edges().fold(0u128, |m, (u, v)| m | 1u128 << index(img[u], img[v]));
        *planted.entry(mask).or_default() += 1;
    });
    let mut planted: Vec<(u128, u64)> = planted.into_iter().collect();
    planted.sort_unstable();
    let total: u64 = planted.iter().map(|x| x.1).sum();
    limit.check("exact_planted_second_moment", (copies.len() as f64).powi(2) * planted.len() as f64)?;

    let mut per_h = Vec::with_capacity(planted.len());
    for &(eh, weight) in &planted {
        let mut acc = Vec::with_capacity(copies.len());
        for &a in &copies {
            let mut row = 0.0;
            for &b in &copies {
                let sym = a ^ b;
                if sym & !eh != 0 {
                    continue;
                }
                let both = (a & b & eh).count_ones() as f64;
                row += c.powf(sym.count_ones() as f64 / 2.0 + both);
            }
            acc.push(row);
        }
        per_h.push(pairwise_sum(&acc) * weight as f64 / total as f64);
    }
    Ok(pairwise_sum(&per_h))
}

/// One analytic cell of an exponent sweep.
#[derive(Debug, Clone)]
pub struct ExponentCell {
    pub n: usize,
    pub p: f64,
    pub profile: DegreeProfile,
    /// The planted graph in `H` spec syntax, e.g. `er:1000,0.01`.
    pub h_spec: String,
    /// Sweep coordinate at which the edge statistic starts to separate.
    pub boundary: f64,
}

/// `p = 1 − n^{−γ}`, or `1/2` when `γ = 0`.
pub fn density_from_gamma(n: usize, gamma: f64) -> f64 {
    if gamma == 0.0 {
        0.5
    } else {
        1.0 - (n as f64).powf(-gamma)
    }
}

fn round_power(n: usize, e: f64) -> usize {
    ((n as f64).powf(e).round() as usize).clamp(1, n)
}

/// Planted dense subgraph: `k = round(n^β)`, `q = n^{−α}`, with the typical
/// degree profile of `G(k, q)` (every degree `round((k − 1) q)`, one vertex
/// lowered by one if the sum is odd).
pub fn pds_cell(n: usize, alpha: f64, beta: f64, gamma: f64) -> Result<ExponentCell> {
    let k = round_power(n, beta);
    let q = (n as f64).powf(-alpha);
    let d = (((k - 1) as f64) * q).round() as usize;
    let mut degrees = vec![d.min(k - 1); k];
    if k * degrees[0] % 2 == 1 {
        degrees[k - 1] -= 1;
    }
    Ok(ExponentCell {
        n,
        p: density_from_gamma(n, gamma),
        profile: DegreeProfile::new(degrees)?,
        h_spec: format!("er:{k},{q}"),
        boundary: (2.0 + 2.0 * alpha + gamma) / 4.0,
    })
}

/// Planted bipartite clique `K_{a,b}` with `a = round(n^α)`, `b = round(n^β)`.
pub fn pbc_cell(n: usize, alpha: f64, beta: f64, gamma: f64) -> Result<ExponentCell> {
    let (a, b) = (round_power(n, alpha), round_power(n, beta));
    if a + b > n {
        return Err(Error::Embedding { h_vertices: a + b, n });
    }
    let mut degrees = vec![b; a];
    degrees.extend(std::iter::repeat_n(a, b));
    Ok(ExponentCell {
        n,
        p: density_from_gamma(n, gamma),
        profile: DegreeProfile::new(degrees)?,
        h_spec: format!("biclique:{},{}", a.max(b), a.min(b)),
        boundary: 1.0 + gamma / 2.0 - alpha,
    })
}

/// Everything `analyze` reports for one model.
#[derive(Debug, Clone)]
pub struct AdvantageReport {
    pub n: usize,
    pub p: f64,
    pub d: usize,
    pub profile: DegreeProfile,
    pub criterion: StarCriterion,
    pub regime: Regime,
    /// `Ok(value)` or the reason the total could not be computed.
    pub total: std::result::Result<TotalAdvantage, String>,
}

impl AdvantageReport {
    /// Star criterion and regime from the profile; the total advantage is
    /// attempted only when `h` is supplied and `D` is within the enumeration
    /// bound.
    pub fn build(h: Option<&Graph>, profile: DegreeProfile, n: usize, p: f64, d: usize, margins: Margins, limit: WorkLimit) -> Result<Self> {
        let criterion = star_criterion(&profile, n, p, d)?;
        let regime = classify_with(&criterion, &profile, margins);
        let total = match h {
            None => Err("no explicit H".to_string()),
            Some(h) => total_advantage(h, n, p, d, limit).map_err(|e| e.to_string()),
        };
        Ok(AdvantageReport { n, p, d, profile, criterion, regime, total })
    }

    pub fn to_value(&self) -> Value {
        let per_t: Vec<Value> = self
            .criterion
            .per_t
            .iter()
            .map(|s| {
                Obj::new()
                    .with("t", s.t)
                    .with("exact_adv", s.exact_adv)
                    .with("aut_rescaled_adv", s.aut_rescaled)
                    .with("falling_npower", s.falling_npower)
                    .with("surrogate", s.surrogate)
                    .build()
            })
            .collect();
        let r = &self.regime;
        let regime = Obj::new()
            .with("label", r.label.name())
            .with("t_suggest", match r.label {
                RegimeLabel::LargeStarsOptimal { t_suggest } => Value::from(t_suggest),
                _ => Value::Null,
            })
            .with("max_degree", r.max_degree)
            .with("degree_scale", r.degree_scale)
            .with("edge_count", r.edge_count)
            .with("edge_count_scale", r.edge_count_scale)
            .with("eps_hat", r.eps_hat)
            .with("max_surrogate", r.max_surrogate)
            .with("argmax_at_endpoint", r.argmax_at_endpoint)
            .with("c_edge", r.margins.c_edge)
            .with("eps_min", r.margins.eps_min)
            .with("tau", r.margins.tau);
        let (total, sq, err) = match &self.total {
            Ok(t) => (Value::Num(t.value), Value::Num(t.squared), Value::Null),
            Err(e) => (Value::Null, Value::Null, Value::Str(e.clone())),
        };
        let log_space = self.criterion.log_space || self.total.as_ref().map(|t| t.log_space).unwrap_or(false);
        let profile = &self.profile;
        Obj::new()
            .with("n", self.n)
            .with("p", self.p)
            .with("D", self.d)
            .with(
                "degree_profile",
                Obj::new()
                    .with("vertices", profile.vertex_count())
                    .with("edges", profile.edge_count())
                    .with("max_degree", profile.max_degree())
                    .with("support", profile.support()),
            )
            .with("per_t", Value::List(per_t))
            .with("t_star", self.criterion.t_star)
            .with("total_adv", total)
            .with("total_sq_adv", sq)
            .with("total_adv_error", err)
            .with("regime", regime)
            .with("log_space", log_space)
            .build()
    }
}
