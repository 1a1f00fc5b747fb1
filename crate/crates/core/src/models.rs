//! Null and planted random graph models.
//!
//! Randomness is addressed, not streamed: every draw is keyed by a master
//! seed, a trial index and an [`Arm`], so results do not depend on the order
//! in which trials run. The key expands the master seed with SplitMix64 into a
//! ChaCha8 key and selects the ChaCha stream `(trial << 1) | arm`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_core::Graph;

/// Which side of the experiment a draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Null = 0,
    Planted = 1,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha8 generator keyed by `master` on stream `stream`.
pub fn keyed_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut state = master;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for one arm of one trial.
pub fn trial_rng(master: u64, trial: u64, arm: Arm) -> ChaCha8Rng {
    keyed_rng(master, (trial << 1) | arm as u64)
}

/// Calls `f(u, v)` for each edge of a `G(n, p)` draw, in lexicographic order.
fn for_each_gnp_edge<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize, usize)) {
    if n < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for u in 0..n {
            for v in u + 1..n {
                f(u, v);
            }
        }
        return;
    }
    if p < 0.1 {
        // Geometric skipping over the pairs in lexicographic order; (u, v)
        // is the next candidate pair.
        let log_q = (-p).ln_1p();
        let (mut u, mut v) = (0usize, 1usize);
        loop {
            let r: f64 = 1.0 - rng.random::<f64>();
            let skip = (r.ln() / log_q).floor();
            if skip >= (n * n) as f64 {
                return;
            }
            v += skip as usize;
            while v >= n {
                let over = v - n;
                u += 1;
                if u + 1 >= n {
                    return;
                }
                v = u + 1 + over;
            }
            f(u, v);
            v += 1;
        }
    }
    let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_u64() < threshold {
                f(u, v);
            }
        }
    }
}

/// A `G(n, p)` sample.
pub fn sample_gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut adj = vec![Vec::new(); n];
    for_each_gnp_edge(n, p, rng, |u, v| {
        adj[u].push(v);
        adj[v].push(u);
    });
    Graph::from_sorted_adjacency(adj)
}

/// Degrees and edge count of a `G(n, p)` sample, without building the graph.
pub fn sample_gnp_degrees<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> (Vec<usize>, usize) {
    let mut deg = vec![0usize; n];
    let mut m = 0;
    for_each_gnp_edge(n, p, rng, |u, v| {
        deg[u] += 1;
        deg[v] += 1;
        m += 1;
    });
    (deg, m)
}

/// How the planted graph `H` is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum HSpec {
    Explicit(Graph),
    Clique(usize),
    Star(usize),
    /// `K_{a,b}` with `a >= b`.
    Biclique(usize, usize),
    Cycle(usize),
    /// `k` disjoint edges.
    Matching(usize),
    /// A path with `L` edges.
    Path(usize),
    /// `H ~ G(k, q)`, redrawn for every planted sample unless frozen.
    ErdosRenyiSub { k: usize, q: f64 },
}

impl HSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            HSpec::Clique(0) | HSpec::Star(0) | HSpec::Matching(0) | HSpec::Path(0) => {
                bad(format!("size parameter of `{self}` must be at least 1"))
            }
            HSpec::Cycle(l) if l < 3 => bad(format!("cycle length {l} < 3")),
            HSpec::Biclique(a, b) if b == 0 || a < b => bad(format!("biclique needs a >= b >= 1, got {a},{b}")),
            HSpec::ErdosRenyiSub { k, q } if k == 0 || !(q > 0.0 && q <= 1.0) => {
                bad(format!("er needs k >= 1 and q in (0, 1], got {k},{q}"))
            }
            _ => Ok(()),
        }
    }

    /// Vertex count of every realisation.
    pub fn vertex_count(&self) -> usize {
        match self {
            HSpec::Explicit(g) => g.n(),
            HSpec::Clique(k) => *k,
            HSpec::Star(t) => t + 1,
            HSpec::Biclique(a, b) => a + b,
            HSpec::Cycle(l) => *l,
            HSpec::Matching(k) => 2 * k,
            HSpec::Path(l) => l + 1,
            HSpec::ErdosRenyiSub { k, .. } => *k,
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, HSpec::ErdosRenyiSub { .. })
    }

    /// Parses `clique:k`, `star:t`, `biclique:a,b`, `cycle:L`, `matching:k`,
    /// `path:L`, `er:k,q` or `file:<path>`.
    pub fn parse(text: &str) -> Result<HSpec> {
        let text = text.trim();
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("H spec `{text}` has no `kind:` prefix")))?;
        let int = |s: &str| -> Result<usize> {
            crate::work::parse_count(s)
                .map(|v| v as usize)
                .ok_or_else(|| Error::Parse(format!("`{s}` is not a count in H spec `{text}`")))
        };
        let pair = || -> Result<(&str, &str)> {
            arg.split_once(',').ok_or_else(|| Error::Parse(format!("`{text}` needs two comma-separated values")))
        };
        let spec = match kind {
            "clique" => HSpec::Clique(int(arg)?),
            "star" => HSpec::Star(int(arg)?),
            "cycle" => HSpec::Cycle(int(arg)?),
            "matching" => HSpec::Matching(int(arg)?),
            "path" => HSpec::Path(int(arg)?),
            "biclique" => {
                let (a, b) = pair()?;
                HSpec::Biclique(int(a)?, int(b)?)
            }
            "er" => {
                let (k, q) = pair()?;
                let q = q.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad q in `{text}`")))?;
                HSpec::ErdosRenyiSub { k: int(k)?, q }
            }
            "file" => HSpec::Explicit(Graph::read_edge_list(arg)?),
            other => return Err(Error::Parse(format!("unknown H kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for HSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HSpec::parse(s)
    }
}

impl fmt::Display for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSpec::Explicit(g) => write!(f, "explicit(n={},m={})", g.n(), g.edge_count()),
            HSpec::Clique(k) => write!(f, "clique:{k}"),
            HSpec::Star(t) => write!(f, "star:{t}"),
            HSpec::Biclique(a, b) => write!(f, "biclique:{a},{b}"),
            HSpec::Cycle(l) => write!(f, "cycle:{l}"),
            HSpec::Matching(k) => write!(f, "matching:{k}"),
            HSpec::Path(l) => write!(f, "path:{l}"),
            HSpec::ErdosRenyiSub { k, q } => write!(f, "er:{k},{q}"),
        }
    }
}

/// The concrete `H` for a specification. Only `ErdosRenyiSub` uses the seed.
pub fn realize_h(h: &HSpec, seed: u64) -> Result<Graph> {
    realize_h_with(h, &mut keyed_rng(seed, 0))
}

fn realize_h_with<R: Rng + ?Sized>(h: &HSpec, rng: &mut R) -> Result<Graph> {
    h.validate()?;
    let g = match *h {
        HSpec::Explicit(ref g) => g.clone(),
        HSpec::Clique(k) => Graph::complete(k),
        HSpec::Star(t) => Graph::from_edges(t + 1, (1..=t).map(|i| (0, i)))?,
        HSpec::Biclique(a, b) => Graph::from_edges(a + b, (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))))?,
        HSpec::Cycle(l) => Graph::from_edges(l, (0..l).map(|i| (i, (i + 1) % l)))?,
        HSpec::Matching(k) => Graph::from_edges(2 * k, (0..k).map(|i| (2 * i, 2 * i + 1)))?,
        HSpec::Path(l) => Graph::from_edges(l + 1, (0..l).map(|i| (i, i + 1)))?,
        HSpec::ErdosRenyiSub { k, q } => sample_gnp(k, q, rng),
    };
    Ok(g)
}

/// `(n, p, H)`: the null model `G(n, p)` and the planted model
/// `G(n, p) ∪ (uniformly random labelled copy of H)`.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    n: usize,
    p: f64,
    h: HSpec,
    // Isolated-free H used for every draw; `None` when H is redrawn.
    fixed_h: Option<Graph>,
}

/// One planted draw.
#[derive(Debug, Clone)]
pub struct PlantedSample {
    pub graph: Graph,
    /// `embedding[i]` is the host vertex of vertex `i` of `realized_h`.
    pub embedding: Vec<usize>,
    /// The `H` used, with isolated vertices removed.
    pub realized_h: Graph,
}

impl PlantedModel {
    pub fn new(n: usize, p: f64, h: HSpec) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
        }
        h.validate()?;
        let fixed_h = if h.is_random() { None } else { Some(realize_h_with(&h, &mut keyed_rng(0, 0))?.without_isolated()) };
        let model = PlantedModel { n, p, h, fixed_h };
        model.check_fits(model.fixed_h.as_ref().map_or(model.h.vertex_count(), Graph::n))?;
        Ok(model)
    }

    /// Draws `H` once from `seed` and reuses it for every planted sample.
    pub fn freeze_h(mut self, seed: u64) -> Result<Self> {
        let g = realize_h(&self.h, seed)?.without_isolated();
        self.fixed_h = Some(g);
        Ok(self)
    }

    fn check_fits(&self, h_vertices: usize) -> Result<()> {
        if h_vertices > self.n {
            Err(Error::Embedding { h_vertices, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn h(&self) -> &HSpec {
        &self.h
    }

    /// The fixed `H` (isolated vertices removed), if `H` is not redrawn.
    pub fn fixed_h(&self) -> Option<&Graph> {
        self.fixed_h.as_ref()
    }

    pub fn describe(&self) -> String {
        let frozen = if self.h.is_random() && self.fixed_h.is_some() { " (frozen)" } else { "" };
        format!("n={} p={} H={}{}", self.n, self.p, self.h, frozen)
    }

    pub fn sample_null_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Graph {
        sample_gnp(self.n, self.p, rng)
    }

    pub fn sample_planted_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PlantedSample> {
        let h = match &self.fixed_h {
            Some(h) => h.clone(),
            None => realize_h_with(&self.h, rng)?.without_isolated(),
        };
        self.check_fits(h.n())?;
        let embedding = random_injection(h.n(), self.n, rng);
        let base = sample_gnp(self.n, self.p, rng);
        let mut adj: Vec<Vec<usize>> = (0..self.n).map(|v| base.neighbors(v).to_vec()).collect();
        for (u, v) in h.edges() {
            let (a, b) = (embedding[u], embedding[v]);
            if let Err(pos) = adj[a].binary_search(&b) {
                adj[a].insert(pos, b);
                let pos = adj[b].binary_search(&a).unwrap_err();
                adj[b].insert(pos, a);
            }
        }
        Ok(PlantedSample { graph: Graph::from_sorted_adjacency(adj), embedding, realized_h: h })
    }
}

/// `Q = G(n, p)`, deterministic in `seed`.
pub fn sample_null(model: &PlantedModel, seed: u64) -> Graph {
    model.sample_null_with(&mut trial_rng(seed, 0, Arm::Null))
}

/// `P`, deterministic in `seed`.
pub fn sample_planted(model: &PlantedModel, seed: u64) -> Result<PlantedSample> {
    model.sample_planted_with(&mut trial_rng(seed, 0, Arm::Planted))
}

/// Uniform injective map `0..k → 0..n` by a sparse partial Fisher-Yates shuffle.
fn random_injection<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut swapped: HashMap<usize, usize> = HashMap::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let j = rng.random_range(i..n);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, vi);
        out.push(vj);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_p() {
        let m = PlantedModel::new(30, 1e-12, HSpec::Clique(2)).unwrap();
        assert_eq!(sample_null(&m, 1).edge_count(), 0);
        let m = PlantedModel::new(30, 1.0 - 1e-12, HSpec::Clique(2)).unwrap();
        assert!(sample_null(&m, 1).is_complete());
    }

    #[test]
    fn edge_count_within_four_sd() {
        for p in [0.5, 0.05] {
            let m = PlantedModel::new(1000, p, HSpec::Clique(2)).unwrap();
            let pairs = 1000.0 * 999.0 / 2.0;
            let sd = (pairs * p * (1.0 - p)).sqrt();
            let e = sample_null(&m, 3).edge_count() as f64;
            assert!((e - pairs * p).abs() < 4.0 * sd, "p={p} edges={e}");
        }
    }

    #[test]
    fn skipping_sampler_stays_in_range_and_sorted() {
        let mut rng = keyed_rng(9, 0);
        for _ in 0..50 {
            let g = sample_gnp(17, 0.07, &mut rng);
            for v in 0..17 {
                assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
                assert!(!g.neighbors(v).contains(&v));
            }
        }
    }

    #[test]
    fn planted_clique_is_present() {
        let m = PlantedModel::new(50, 0.1, HSpec::Clique(8)).unwrap();
        for s in 0..20 {
            let smp = sample_planted(&m, s).unwrap();
            for (u, v) in smp.realized_h.edges() {
                assert!(smp.graph.has_edge(smp.embedding[u], smp.embedding[v]));
            }
            let mut e = smp.embedding.clone();
            e.sort_unstable();
            e.dedup();
            assert_eq!(e.len(), 8);
        }
    }

    #[test]
    fn realize_examples() {
        let k4 = realize_h(&HSpec::Clique(4), 0).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert!(k4.degrees().iter().all(|&d| d == 3));
        let b = realize_h(&HSpec::Biclique(3, 2), 0).unwrap();
        let mut d = b.degrees();
        d.sort_unstable();
        assert_eq!(d, vec![2, 2, 2, 3, 3]);
        assert_eq!(realize_h(&HSpec::ErdosRenyiSub { k: 30, q: 1.0 }, 5).unwrap().edge_count(), 435);
    }

    #[test]
    fn parse_and_display() {
        for s in ["clique:4", "star:3", "biclique:3,2", "cycle:5", "matching:2", "path:3", "er:100,0.25"] {
            assert_eq!(HSpec::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(HSpec::parse("clique:10^2").unwrap(), HSpec::Clique(100));
        assert!(HSpec::parse("biclique:2,3").is_err());
        assert!(HSpec::parse("cycle:2").is_err());
        assert!(HSpec::parse("er:10,0").is_err());
        assert!(HSpec::parse("blob:3").is_err());
    }

    #[test]
    fn oversized_h_is_rejected() {
        assert!(matches!(PlantedModel::new(3, 0.5, HSpec::Clique(4)), Err(Error::Embedding { .. })));
    }

    #[test]
    fn isolated_vertices_are_stripped() {
        let g = Graph::from_edges(5, [(0, 1)]).unwrap();
        let m = PlantedModel::new(4, 0.5, HSpec::Explicit(g)).unwrap();
        assert_eq!(m.fixed_h().unwrap().n(), 2);
    }

    #[test]
    fn streams_are_order_independent() {
        let m = PlantedModel::new(40, 0.3, HSpec::Clique(5)).unwrap();
        let a = m.sample_null_with(&mut trial_rng(7, 3, Arm::Null));
        let _ = m.sample_null_with(&mut trial_rng(7, 2, Arm::Null));
        let b = m.sample_null_with(&mut trial_rng(7, 3, Arm::Null));
        assert_eq!(a, b);
        assert_ne!(a, m.sample_null_with(&mut trial_rng(7, 4, Arm::Null)));
    }
}
