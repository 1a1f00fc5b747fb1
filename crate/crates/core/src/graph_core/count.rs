use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::graph::{AdjBits, Graph};
use super::shape::{canonicalize, CanonKey, Shape};
use crate::error::Result;
use crate::work::{Meter, WorkLimit};

/// `n (n-1) ... (n-k+1)`; 1 for `k = 0` and 0 for `k > n`.
pub fn falling_factorial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
    }
    acc
}

/// `M_S = M_{S, K_n}`, the number of labelled copies of `shape` in `K_n`.
pub fn count_in_complete(shape: &Shape, n: usize) -> BigUint {
    falling_factorial(n as u64, shape.vertex_count() as u64)
}

/// `|Aut(S)|`, cached on the shape at construction.
pub fn automorphism_count(shape: &Shape) -> BigUint {
    shape.automorphism_count().clone()
}

/// `Σ_v (d_v)_(t)`: labelled copies of the star `K_{1,t}` in a graph with the
/// given degrees. For `t = 1` this is `2m`.
pub fn star_copies(degrees: &[usize], t: usize) -> BigUint {
    degrees.iter().map(|&d| falling_factorial(d as u64, t as u64)).sum()
}

/// Number of injective maps `V(pattern) → V(host)` sending edges to edges.
///
/// Plain backtracking over pattern vertices in connectivity order, with
/// bitset candidate sets. Isolated pattern vertices are allowed; they range
/// over all unused host vertices.
pub fn count_injective_homs(pattern: &Graph, host: &Graph, limit: WorkLimit) -> Result<BigUint> {
    if pattern.n() > host.n() {
        return Ok(BigUint::zero());
    }
    if pattern.n() == 0 {
        return Ok(BigUint::one());
    }
    let bits = AdjBits::new(host);
    let mut meter = Meter::new(limit, "labelled copy count");
    Ok(BigUint::from(backtrack(pattern, &bits, host.n(), &mut meter)?))
}

fn search_order(pattern: &Graph) -> (Vec<usize>, Vec<Vec<usize>>) {
    let s = pattern.n();
    let mut placed = vec![false; s];
    let mut pos = vec![usize::MAX; s];
    let mut order = Vec::with_capacity(s);
    let mut back = Vec::with_capacity(s);
    for _ in 0..s {
        let next = (0..s)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let linked = pattern.neighbors(v).iter().filter(|&&u| placed[u]).count();
                (linked, pattern.degree(v), std::cmp::Reverse(v))
            })
            .expect("an unplaced vertex remains");
        placed[next] = true;
        pos[next] = order.len();
        back.push(pattern.neighbors(next).iter().filter(|&&u| placed[u] && u != next).map(|&u| pos[u]).collect());
        order.push(next);
    }
    (order, back)
}

struct Backtrack<'a> {
    bits: &'a AdjBits,
    back: Vec<Vec<usize>>,
    full: Vec<u64>,
    used: Vec<u64>,
    image: Vec<usize>,
    // Candidate sets, one block of `words` per depth.
    cand: Vec<u64>,
}

impl Backtrack<'_> {
    fn go(&mut self, depth: usize, meter: &mut Meter) -> Result<u128> {
        let words = self.full.len();
        meter.charge(words as u64 + 1)?;
        let base = depth * words;
        for w in 0..words {
            let mut c = self.full[w] & !self.used[w];
            for &j in &self.back[depth] {
                c &= self.bits.row(self.image[j])[w];
            }
            self.cand[base + w] = c;
        }
        if depth + 1 == self.back.len() {
            return Ok(self.cand[base..base + words].iter().map(|w| w.count_ones() as u128).sum());
        }
        let mut total = 0u128;
        for w in 0..words {
            let mut word = self.cand[base + w];
            while word != 0 {
                let b = word.trailing_zeros();
                word &= word - 1;
                self.image[depth] = w * 64 + b as usize;
                self.used[w] |= 1 << b;
                total += self.go(depth + 1, meter)?;
                self.used[w] &= !(1 << b);
            }
        }
        Ok(total)
    }
}

fn backtrack(pattern: &Graph, bits: &AdjBits, n: usize, meter: &mut Meter) -> Result<u128> {
    let (_, back) = search_order(pattern);
    let words = bits.words();
    let mut full = vec![0u64; words];
    for v in 0..n {
        full[v / 64] |= 1 << (v % 64);
    }
    let s = back.len();
    let mut state = Backtrack {
        bits,
        back,
        full,
        used: vec![0; words],
        image: vec![0; s],
        cand: vec![0; s * words],
    };
    state.go(0, meter)
}

/// Copy counter for shapes with connected components counted directly.
pub(crate) fn count_connected_unlimited(pattern: &Graph, host: &Graph) -> BigUint {
    let mut c = CopyCounter::new(host, WorkLimit::UNLIMITED);
    c.count_connected(pattern).expect("unlimited budget")
}

/// `M_{S,G}`: injective edge-preserving maps from `shape` into `host`.
///
/// Runs without a work limit; see [`CopyCounter`] for a bounded variant.
pub fn count_labelled_copies(shape: &Shape, host: &Graph) -> BigUint {
    CopyCounter::new(host, WorkLimit::UNLIMITED).count(shape).expect("unlimited budget")
}

/// Labelled copy counts of many shapes in one host, with a shared work
/// budget and a memo keyed by canonical form.
///
/// Fast paths: complete hosts use falling factorials, stars use the degree
/// sequence, and disconnected shapes are split with the double-counting
/// identity `M_A M_B = Σ_gluings M_{A ∪ B}` so that only connected shapes
/// ever reach the backtracking search.
pub struct CopyCounter<'h> {
    host: &'h Graph,
    degrees: Vec<usize>,
    bits: Option<AdjBits>,
    meter: Meter,
    memo: HashMap<CanonKey, BigUint>,
}

impl<'h> CopyCounter<'h> {
    pub fn new(host: &'h Graph, limit: WorkLimit) -> Self {
        CopyCounter {
            host,
            degrees: host.degrees(),
            bits: None,
            meter: Meter::new(limit, "labelled copy count"),
            memo: HashMap::new(),
        }
    }

    pub fn host(&self) -> &Graph {
        self.host
    }

    pub fn count(&mut self, shape: &Shape) -> Result<BigUint> {
        self.count_canonical(shape.key(), shape.graph())
    }

    /// Copies of the edge set of `g`, with isolated vertices of `g` ignored.
    pub fn count_graph(&mut self, g: &Graph) -> Result<BigUint> {
        match canonicalize(g) {
            Ok((key, canon)) => self.count_canonical(&key, &canon),
            // Components too large for canonical keys: count directly.
            Err(_) => self.backtrack_raw(&g.without_isolated()),
        }
    }

    fn count_canonical(&mut self, key: &CanonKey, g: &Graph) -> Result<BigUint> {
        if let Some(v) = self.memo.get(key) {
            return Ok(v.clone());
        }
        let comps = g.components();
        let value = if comps.len() <= 1 {
            self.count_connected(g)?
        } else {
            // Canonical graphs lay components out in key order, so the first
            // component occupies the lowest labels.
            let first = &comps[0];
            let rest: Vec<usize> = comps[1..].iter().flatten().copied().collect();
            let a = g.induced_relabel(first);
            let b = g.induced_relabel(&rest);
            let mut total = self.count_graph(&a)? * self.count_graph(&b)?;
            let mut overlap = BigUint::zero();
            let mut err = None;
            for_each_gluing(&a, &b, true, |glued| {
                if err.is_none() {
                    match self.count_graph(glued) {
                        Ok(v) => overlap += v,
                        Err(e) => err = Some(e),
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            total -= overlap;
            total
        };
        self.memo.insert(key.clone(), value.clone());
        Ok(value)
    }

    fn count_connected(&mut self, g: &Graph) -> Result<BigUint> {
        let (s, m, n) = (g.n(), g.edge_count(), self.host.n());
        if s > n {
            return Ok(BigUint::zero());
        }
        if m == 0 {
            return Ok(falling_factorial(n as u64, s as u64));
        }
        if self.host.is_complete() {
            return Ok(falling_factorial(n as u64, s as u64));
        }
        if s == m + 1 && g.max_degree() == m {
            self.meter.charge(n as u64)?;
            return Ok(star_copies(&self.degrees, m));
        }
        self.backtrack_raw(g)
    }

    fn backtrack_raw(&mut self, g: &Graph) -> Result<BigUint> {
        if g.n() > self.host.n() {
            return Ok(BigUint::zero());
        }
        if g.n() == 0 {
            return Ok(BigUint::one());
        }
        let bits = self.bits.get_or_insert_with(|| AdjBits::new(self.host));
        Ok(BigUint::from(backtrack(g, bits, self.host.n(), &mut self.meter)?))
    }
}

/// Calls `f` on the union graph of every gluing of `a` and `b`: every
/// injective partial map from `V(a)` to `V(b)`, with the empty map skipped
/// when `nonempty` is set. Vertices of `a` keep their labels; unmatched
/// vertices of `b` follow in order.
pub(crate) fn for_each_gluing(a: &Graph, b: &Graph, nonempty: bool, mut f: impl FnMut(&Graph)) {
    for_each_partial_map(a.n(), b.n(), |map| {
        if !(nonempty && map.iter().all(Option::is_none)) {
            f(&glue(a, b, map));
        }
    });
}

/// Every injective partial map `0..sa → 0..sb`, as `map[i] = Some(j)`.
pub(crate) fn for_each_partial_map(sa: usize, sb: usize, mut f: impl FnMut(&[Option<usize>])) {
    fn rec(i: usize, sb: usize, map: &mut Vec<Option<usize>>, taken: &mut Vec<bool>, f: &mut dyn FnMut(&[Option<usize>])) {
        if i == map.len() {
            f(map);
            return;
        }
        map[i] = None;
        rec(i + 1, sb, map, taken, f);
        for j in 0..sb {
            if !taken[j] {
                taken[j] = true;
                map[i] = Some(j);
                rec(i + 1, sb, map, taken, f);
                taken[j] = false;
            }
        }
        map[i] = None;
    }
    let mut map = vec![None; sa];
    let mut taken = vec![false; sb];
    rec(0, sb, &mut map, &mut taken, &mut f);
}

/// Union of `a` and `b` with `b`'s vertex `map[i]` identified with `a`'s `i`.
pub(crate) fn glue(a: &Graph, b: &Graph, map: &[Option<usize>]) -> Graph {
    let (index, n) = glue_index(a.n(), b.n(), map);
    Graph::from_edges_dedup(n, a.edges().chain(b.edges().map(|(u, v)| (index[u], index[v]))))
        .expect("glued edges are in range")
}

/// Label of each `b` vertex in the glued graph, and the glued vertex count.
pub(crate) fn glue_index(sa: usize, sb: usize, map: &[Option<usize>]) -> (Vec<usize>, usize) {
    let mut index = vec![usize::MAX; sb];
    for (i, m) in map.iter().enumerate() {
        if let Some(j) = m {
            index[*j] = i;
        }
    }
    let mut next = sa;
    for slot in index.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    (index, next)
}
