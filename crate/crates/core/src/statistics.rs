//! Test statistics evaluated on concrete graphs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::graph_core::{
    automorphism_count, falling_factorial, CanonKey, CopyCounter, Graph, Shape,
};
use crate::graph_core::AdjBits;
use crate::work::{Meter, WorkLimit};

/// Walsh-Fourier edge weights: `a` for a present edge, `b` for an absent pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeighting {
    pub a: f64,
    pub b: f64,
}

impl EdgeWeighting {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
        }
        Ok(EdgeWeighting { a: ((1.0 - p) / p).sqrt(), b: -(p / (1.0 - p)).sqrt() })
    }

    #[inline]
    pub fn weight(&self, present: bool) -> f64 {
        if present {
            self.a
        } else {
            self.b
        }
    }
}

/// `χ_S(G)`: product of edge weights over the pairs in `edge_set`.
pub fn chi(edge_set: &[(usize, usize)], graph: &Graph, p: f64) -> Result<f64> {
    let w = EdgeWeighting::new(p)?;
    let mut prod = 1.0;
    for &(u, v) in edge_set {
        if u == v || u >= graph.n() || v >= graph.n() {
            return Err(Error::InvalidParameter(format!("pair ({u}, {v}) is not a pair of distinct vertices")));
        }
        prod *= w.weight(graph.has_edge(u, v));
    }
    Ok(prod)
}

/// `f_S(G)` by brute force: the weighted sum over all injective maps
/// `V(S) → [n]`, divided by `|Aut(S)|`.
pub fn signed_count_naive(shape: &Shape, graph: &Graph, p: f64, limit: WorkLimit) -> Result<f64> {
    let w = EdgeWeighting::new(p)?;
    let (s, n) = (shape.vertex_count(), graph.n());
    if s > n {
        return Err(Error::InvalidParameter(format!("shape has {s} vertices but the graph only {n}")));
    }
    limit.check("signed_count_naive", (n as f64).powi(s as i32))?;
    let edges: Vec<(usize, usize)> = shape.graph().edges().collect();
    let mut img = vec![usize::MAX; s];
    let mut used = vec![false; n];
    let total = naive_rec(0, &edges, graph, &w, &mut img, &mut used);
    Ok(total / automorphism_count(shape).to_f64().unwrap_or(f64::INFINITY))
}

fn naive_rec(i: usize, edges: &[(usize, usize)], g: &Graph, w: &EdgeWeighting, img: &mut [usize], used: &mut [bool]) -> f64 {
    if i == img.len() {
        return edges.iter().map(|&(u, v)| w.weight(g.has_edge(img[u], img[v]))).product();
    }
    let mut acc = 0.0;
    for v in 0..g.n() {
        if !used[v] {
            used[v] = true;
            img[i] = v;
            acc += naive_rec(i + 1, edges, g, w, img, used);
            used[v] = false;
        }
    }
    acc
}

/// Sum of floating-point terms by recursive halving.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `f_{K_{1,t}}(G)` from the degree sequence in `O(n t)`.
///
/// Choosing a centre `v` and a `t`-set of other vertices, `j` of them
/// neighbours of `v`, contributes `a^j b^{t-j}`. A `t`-star edge set has a
/// unique centre when `t >= 2`; a single edge has two, hence the halving.
pub fn signed_star_count(t: usize, graph: &Graph, p: f64) -> Result<f64> {
    let w = EdgeWeighting::new(p)?;
    let n = graph.n();
    if t == 0 || t + 1 > n {
        return Err(Error::InvalidParameter(format!("star size t = {t} needs 1 <= t <= n - 1 = {}", n as i64 - 1)));
    }
    let mut by_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for d in graph.degrees() {
        *by_degree.entry(d).or_default() += 1;
    }
    let mut terms = Vec::new();
    for (&d, &mult) in &by_degree {
        let mut inner = Vec::with_capacity(t + 1);
        for j in 0..=t.min(d) {
            if t - j > n - 1 - d {
                continue;
            }
            let c = (binomial(d, j) * binomial(n - 1 - d, t - j)).to_f64().unwrap_or(f64::INFINITY);
            inner.push(c * w.a.powi(j as i32) * w.b.powi((t - j) as i32));
        }
        terms.push(mult as f64 * pairwise_sum(&inner));
    }
    let total = pairwise_sum(&terms);
    Ok(if t == 1 { total / 2.0 } else { total })
}

/// Signed count of a general shape through the edge-subset expansion
///
/// `f_S = (1/|Aut S|) Σ_{E' ⊆ E(S)} b^{|S|-|E'|} (a-b)^{|E'|} M_{E',G} (n-v')_(s-v')`
///
/// where `v'` is the number of vertices covered by `E'`. Subsets are grouped
/// by shape once, so each evaluation costs one copy count per sub-shape.
#[derive(Debug, Clone)]
pub struct SignedShapePlan {
    shape: Shape,
    n: usize,
    // (sub-shape, coefficient including the 1/|Aut| factor)
    terms: Vec<(Shape, f64)>,
    constant: f64,
}

impl SignedShapePlan {
    pub fn new(shape: &Shape, n: usize, p: f64) -> Result<Self> {
        let w = EdgeWeighting::new(p)?;
        let (s, m) = (shape.vertex_count(), shape.edge_count());
        if s > n {
            return Err(Error::InvalidParameter(format!("shape has {s} vertices but n = {n}")));
        }
        if m > 20 {
            return Err(Error::Budget { what: "signed shape expansion", limit: 20 });
        }
        let aut = automorphism_count(shape).to_f64().unwrap_or(f64::INFINITY);
        let edges: Vec<(usize, usize)> = shape.graph().edges().collect();
        let mut grouped: BTreeMap<CanonKey, (Shape, f64)> = BTreeMap::new();
        let mut constant = 0.0;
        for mask in 0u32..(1 << m) {
            let sub: Vec<(usize, usize)> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
            let k = sub.len();
            let weight = w.b.powi((m - k) as i32) * (w.a - w.b).powi(k as i32);
            if k == 0 {
                constant += weight * falling_factorial(n as u64, s as u64).to_f64().unwrap_or(f64::INFINITY) / aut;
                continue;
            }
            let sub_shape = Shape::from_edges(&sub)?;
            let v = sub_shape.vertex_count();
            let free = falling_factorial((n - v) as u64, (s - v) as u64).to_f64().unwrap_or(f64::INFINITY);
            let entry = grouped.entry(sub_shape.key().clone()).or_insert((sub_shape, 0.0));
            entry.1 += weight * free / aut;
        }
        Ok(SignedShapePlan { shape: shape.clone(), n, terms: grouped.into_values().collect(), constant })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn evaluate(&self, graph: &Graph, limit: WorkLimit) -> Result<f64> {
        if graph.n() != self.n {
            return Err(Error::InvalidParameter(format!("plan built for n = {} but graph has {}", self.n, graph.n())));
        }
        let mut counter = CopyCounter::new(graph, limit);
        let mut parts = vec![self.constant];
        for (sub, coef) in &self.terms {
            let c = counter.count(sub)?;
            parts.push(coef * c.to_f64().unwrap_or(f64::INFINITY));
        }
        Ok(pairwise_sum(&parts))
    }
}

/// Number of `k`-vertex cliques, by ordered extension along a degeneracy
/// ordering with sorted-list intersections.
pub fn unsigned_clique_count(k: usize, graph: &Graph, limit: WorkLimit) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("clique size {k} < 2")));
    }
    let n = graph.n();
    let rank = degeneracy_rank(graph);
    // Forward neighbours: later in the degeneracy order, sorted by label.
    let forward: Vec<Vec<usize>> =
        (0..n).map(|v| graph.neighbors(v).iter().copied().filter(|&u| rank[u] > rank[v]).collect()).collect();
    let mut meter = Meter::new(limit, "unsigned clique count");
    let mut total = 0u64;
    for v in 0..n {
        total += extend_clique(&forward, &forward[v], k - 1, &mut meter)?;
    }
    Ok(total)
}

fn extend_clique(forward: &[Vec<usize>], cand: &[usize], need: usize, meter: &mut Meter) -> Result<u64> {
    meter.charge(cand.len() as u64 + 1)?;
    if need == 1 {
        return Ok(cand.len() as u64);
    }
    if cand.len() < need {
        return Ok(0);
    }
    let mut total = 0;
    for &u in cand {
        let next = intersect_sorted(cand, &forward[u]);
        if next.len() + 1 >= need {
            total += extend_clique(forward, &next, need - 1, meter)?;
        }
    }
    Ok(total)
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Position of each vertex in a smallest-last (degeneracy) ordering.
fn degeneracy_rank(graph: &Graph) -> Vec<usize> {
    let n = graph.n();
    let mut deg = graph.degrees();
    let maxd = graph.max_degree();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); maxd + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut rank = vec![0; n];
    let mut d: usize = 0;
    for r in 0..n {
        d = d.saturating_sub(1);
        let v = loop {
            while buckets[d].is_empty() {
                d += 1;
            }
            let v = buckets[d].pop().expect("non-empty bucket");
            if !removed[v] && deg[v] == d {
                break v;
            }
        };
        removed[v] = true;
        rank[v] = r;
        for &u in graph.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
            }
        }
    }
    rank
}

/// How [`closed_path_trace`] enumerates tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// The raw sum over all ordered tuples of distinct vertices.
    #[default]
    Raw,
    /// One tuple per cycle (smallest vertex first, one direction), times `2l`.
    Reduced,
}

/// `Σ M_{i1 i2} M_{i2 i3} ... M_{il i1}` over ordered `l`-tuples of distinct
/// vertices, with `M` the `±1` adjacency matrix.
///
/// The raw mode walks simple paths on `l - 1` vertices and closes each one in
/// a single step using `(M²)_{i_{l-1} i_1}`, subtracting the terms whose
/// middle vertex already lies on the path.
pub fn closed_path_trace(l: usize, graph: &Graph, limit: WorkLimit, mode: TraceMode) -> Result<f64> {
    let n = graph.n();
    if l < 3 || l > n {
        return Err(Error::InvalidParameter(format!("path length l = {l} needs 3 <= l <= n = {n}")));
    }
    limit.check("closed_path_trace", falling_factorial(n as u64, l as u64).to_f64().unwrap_or(f64::INFINITY))?;
    let sign: Vec<Vec<i8>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0 } else if graph.has_edge(i, j) { 1 } else { -1 }).collect())
        .collect();
    let total: i128 = match mode {
        TraceMode::Raw => {
            let sq = signed_square(graph);
            let mut path = Vec::with_capacity(l);
            let mut used = vec![false; n];
            let mut acc = 0i128;
            for i in 0..n {
                path.push(i);
                used[i] = true;
                raw_rec(&sign, &sq, l, &mut path, &mut used, 1, &mut acc);
                used[i] = false;
                path.pop();
            }
            acc
        }
        TraceMode::Reduced => {
            let mut path = Vec::with_capacity(l);
            let mut used = vec![false; n];
            let mut acc = 0i128;
            for i in 0..n {
                path.push(i);
                used[i] = true;
                reduced_rec(&sign, l, &mut path, &mut used, 1, &mut acc);
                used[i] = false;
                path.pop();
            }
            acc * 2 * l as i128
        }
    };
    Ok(total as f64)
}

/// `(M²)_{ij}` for the `±1` adjacency matrix (zero diagonal), by popcounts:
/// over `k ∉ {i, j}` the product is `+1` unless exactly one of `ik`, `kj` is
/// an edge.
fn signed_square(graph: &Graph) -> Vec<Vec<i64>> {
    let n = graph.n();
    let bits = AdjBits::new(graph);
    let mut sq = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                sq[i][j] = n as i64 - 1;
                continue;
            }
            let differ: u32 = bits.row(i).iter().zip(bits.row(j)).map(|(a, b)| (a ^ b).count_ones()).sum();
            let differ = differ as i64 - if graph.has_edge(i, j) { 2 } else { 0 };
            sq[i][j] = (n as i64 - 2) - 2 * differ;
        }
    }
    sq
}

fn raw_rec(sign: &[Vec<i8>], sq: &[Vec<i64>], l: usize, path: &mut Vec<usize>, used: &mut [bool], prod: i64, acc: &mut i128) {
    let n = sign.len();
    let last = *path.last().expect("non-empty path");
    if path.len() == l - 1 {
        let first = path[0];
        let mut close = sq[last][first];
        for &j in &path[1..path.len() - 1] {
            close -= (sign[last][j] * sign[j][first]) as i64;
        }
        *acc += (prod * close) as i128;
        return;
    }
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            path.push(v);
            raw_rec(sign, sq, l, path, used, prod * sign[last][v] as i64, acc);
            path.pop();
            used[v] = false;
        }
    }
}

fn reduced_rec(sign: &[Vec<i8>], l: usize, path: &mut Vec<usize>, used: &mut [bool], prod: i64, acc: &mut i128) {
    let n = sign.len();
    let first = path[0];
    let last = *path.last().expect("non-empty path");
    if path.len() == l {
        // One direction per cycle: second vertex smaller than the last.
        if path[1] < last {
            *acc += (prod * sign[last][first] as i64) as i128;
        }
        return;
    }
    for v in first + 1..n {
        if !used[v] {
            used[v] = true;
            path.push(v);
            reduced_rec(sign, l, path, used, prod * sign[last][v] as i64, acc);
            path.pop();
            used[v] = false;
        }
    }
}

/// The statistics the Monte Carlo harness can evaluate.
#[derive(Debug, Clone)]
pub enum TestStatistic {
    SignedShapeCount(Shape),
    SignedStarCount(usize),
    UnsignedCliqueCount(usize),
    ClosedPathTrace(usize),
}

impl TestStatistic {
    /// Parses `star:t`, `shape:<hex key or edge-list file>`, `clique-count:k`
    /// or `trace:l`.
    pub fn parse(text: &str) -> Result<TestStatistic> {
        let text = text.trim();
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("statistic `{text}` has no `kind:` prefix")))?;
        let int = |s: &str| -> Result<usize> {
            s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("`{s}` is not an integer in `{text}`")))
        };
        let stat = match kind {
            "star" => TestStatistic::SignedStarCount(int(arg)?),
            "clique-count" => TestStatistic::UnsignedCliqueCount(int(arg)?),
            "trace" => TestStatistic::ClosedPathTrace(int(arg)?),
            "shape" => {
                let shape = match CanonKey::from_hex(arg) {
                    Ok(key) if !arg.is_empty() => Shape::from_key(&key)?,
                    _ => Shape::from_graph(&Graph::read_edge_list(arg)?)?,
                };
                if shape.is_empty() {
                    return Err(Error::InvalidShape("the empty shape is not a statistic".into()));
                }
                TestStatistic::SignedShapeCount(shape)
            }
            other => return Err(Error::Parse(format!("unknown statistic kind `{other}`"))),
        };
        stat.validate()?;
        Ok(stat)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            TestStatistic::SignedStarCount(0) => bad("star size must be at least 1".into()),
            TestStatistic::UnsignedCliqueCount(k) if k < 2 => bad(format!("clique size {k} < 2")),
            TestStatistic::ClosedPathTrace(l) if l < 3 => bad(format!("trace length {l} < 3")),
            _ => Ok(()),
        }
    }

    /// Whether the statistic needs `p` (signed statistics do).
    pub fn is_signed(&self) -> bool {
        matches!(self, TestStatistic::SignedShapeCount(_) | TestStatistic::SignedStarCount(_))
    }
}

impl fmt::Display for TestStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestStatistic::SignedShapeCount(s) => write!(f, "shape:{}", s.key()),
            TestStatistic::SignedStarCount(t) => write!(f, "star:{t}"),
            TestStatistic::UnsignedCliqueCount(k) => write!(f, "clique-count:{k}"),
            TestStatistic::ClosedPathTrace(l) => write!(f, "trace:{l}"),
        }
    }
}

/// A statistic bound to `(n, p)` with its precomputation done once, ready to
/// be evaluated concurrently on many graphs.
#[derive(Debug, Clone)]
pub struct Evaluator {
    stat: TestStatistic,
    p: f64,
    limit: WorkLimit,
    plan: Option<SignedShapePlan>,
}

impl Evaluator {
    pub fn new(stat: TestStatistic, n: usize, p: f64, limit: WorkLimit) -> Result<Self> {
        stat.validate()?;
        EdgeWeighting::new(p)?;
        let plan = match &stat {
            TestStatistic::SignedShapeCount(s) => Some(SignedShapePlan::new(s, n, p)?),
            _ => None,
        };
        Ok(Evaluator { stat, p, limit, plan })
    }

    pub fn statistic(&self) -> &TestStatistic {
        &self.stat
    }

    pub fn evaluate(&self, graph: &Graph) -> Result<f64> {
        match &self.stat {
            TestStatistic::SignedShapeCount(_) => self.plan.as_ref().expect("plan built in new").evaluate(graph, self.limit),
            TestStatistic::SignedStarCount(t) => signed_star_count(*t, graph, self.p),
            TestStatistic::UnsignedCliqueCount(k) => unsigned_clique_count(*k, graph, self.limit).map(|c| c as f64),
            TestStatistic::ClosedPathTrace(l) => closed_path_trace(*l, graph, self.limit, TraceMode::Raw),
        }
    }
}

/// One-off evaluation of `stat` on `graph`.
pub fn evaluate(stat: &TestStatistic, graph: &Graph, p: f64) -> Result<f64> {
    Evaluator::new(stat.clone(), graph.n(), p, WorkLimit::default())?.evaluate(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn chi_examples() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(chi(&[], &g, 0.3).unwrap(), 1.0);
        assert_eq!(chi(&[(0, 1)], &g, 0.5).unwrap(), 1.0);
        assert_eq!(chi(&[(0, 2)], &g, 0.5).unwrap(), -1.0);
        let w = EdgeWeighting::new(0.2).unwrap();
        assert!(close(w.a * w.b, -1.0));
    }

    #[test]
    fn naive_examples() {
        let lim = WorkLimit::default();
        let e3 = Graph::empty(3);
        let k3 = Graph::complete(3);
        assert!(close(signed_count_naive(&Shape::edge(), &e3, 0.5, lim).unwrap(), -3.0));
        assert!(close(signed_count_naive(&Shape::edge(), &k3, 0.5, lim).unwrap(), 3.0));
        assert!(close(signed_count_naive(&Shape::star(2).unwrap(), &k3, 0.5, lim).unwrap(), 3.0));
        let big = Graph::empty(40);
        assert!(signed_count_naive(&Shape::star(5).unwrap(), &big, 0.5, lim).unwrap_err().is_budget());
    }

    #[test]
    fn star_examples() {
        assert!(close(signed_star_count(1, &Graph::complete(3), 0.5).unwrap(), 3.0));
        assert!(close(signed_star_count(2, &Graph::empty(4), 0.5).unwrap(), 12.0));
        assert!(signed_star_count(4, &Graph::empty(4), 0.5).is_err());
    }

    #[test]
    fn clique_count_examples() {
        let k4 = Graph::complete(4);
        assert_eq!(unsigned_clique_count(3, &k4, WorkLimit::default()).unwrap(), 4);
        assert_eq!(unsigned_clique_count(4, &k4, WorkLimit::default()).unwrap(), 1);
        assert_eq!(unsigned_clique_count(2, &k4, WorkLimit::default()).unwrap(), 6);
        let k7 = Graph::complete(7);
        assert_eq!(unsigned_clique_count(3, &k7, WorkLimit::default()).unwrap(), 35);
    }

    #[test]
    fn trace_examples() {
        let lim = WorkLimit::default();
        for mode in [TraceMode::Raw, TraceMode::Reduced] {
            assert_eq!(closed_path_trace(3, &Graph::complete(3), lim, mode).unwrap(), 6.0);
            assert_eq!(closed_path_trace(3, &Graph::empty(3), lim, mode).unwrap(), -6.0);
        }
        assert!(closed_path_trace(2, &Graph::complete(3), lim, TraceMode::Raw).is_err());
    }

    #[test]
    fn evaluate_dispatch() {
        let k3 = Graph::complete(3);
        let k4 = Graph::complete(4);
        assert!(close(evaluate(&TestStatistic::SignedStarCount(1), &k3, 0.5).unwrap(), 3.0));
        assert_eq!(evaluate(&TestStatistic::UnsignedCliqueCount(3), &k4, 0.5).unwrap(), 4.0);
        let tri = TestStatistic::SignedShapeCount(Shape::clique(3).unwrap());
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (0, 5)]).unwrap();
        let naive = signed_count_naive(&Shape::clique(3).unwrap(), &g, 0.3, WorkLimit::default()).unwrap();
        assert!(close(evaluate(&tri, &g, 0.3).unwrap(), naive));
    }

    #[test]
    fn parse_statistics() {
        for s in ["star:3", "clique-count:8", "trace:4"] {
            assert_eq!(TestStatistic::parse(s).unwrap().to_string(), s);
        }
        let key = Shape::clique(3).unwrap().key().to_hex();
        let t = TestStatistic::parse(&format!("shape:{key}")).unwrap();
        assert_eq!(t.to_string(), format!("shape:{key}"));
        assert!(TestStatistic::parse("trace:2").is_err());
        assert!(TestStatistic::parse("bogus").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::from(0u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
    }
}
