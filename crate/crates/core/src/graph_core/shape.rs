use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use super::canon::{component_code, decode_component};
use super::count::{self, falling_factorial};
use super::graph::Graph;
use crate::error::{Error, Result};

/// Largest edge count accepted by [`enumerate_shapes`].
pub const MAX_ENUMERATED_EDGES: usize = 8;

/// Canonical key of a shape: equal keys exactly for isomorphic shapes.
///
/// The key is the sorted concatenation of per-component codes, each framed as
/// `[length][vertex count][edge count][packed adjacency bits]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CanonKey(Vec<u8>);

impl CanonKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<CanonKey> {
        let s = s.trim();
        if s.len() % 2 != 0 {
            return Err(Error::Parse(format!("odd-length hex key `{s}`")));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map_err(|_| Error::Parse(format!("invalid hex key `{s}`")))?;
        let key = CanonKey(bytes);
        key.parts()?;
        Ok(key)
    }

    fn parts(&self) -> Result<Vec<&[u8]>> {
        let mut out = Vec::new();
        let mut rest = self.0.as_slice();
        while let Some((&len, tail)) = rest.split_first() {
            let len = len as usize;
            if tail.len() < len {
                return Err(Error::Parse("truncated canonical key".into()));
            }
            out.push(&tail[..len]);
            rest = &tail[len..];
        }
        Ok(out)
    }
}

impl fmt::Display for CanonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// An isomorphism class of edge-induced graphs (no isolated vertices).
///
/// The stored graph is the canonical representative, so two shapes are equal
/// exactly when their graphs are equal.
#[derive(Debug, Clone)]
pub struct Shape {
    graph: Graph,
    key: CanonKey,
    aut: BigUint,
}

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Shape {}

impl std::hash::Hash for Shape {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for Shape {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Shape {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.edge_count(), &self.key).cmp(&(other.edge_count(), &other.key))
    }
}

/// Canonical key and canonical representative of `g` with isolated vertices
/// dropped.
pub(crate) fn canonicalize(g: &Graph) -> Result<(CanonKey, Graph)> {
    let mut codes: Vec<Vec<u8>> = Vec::new();
    for comp in g.components() {
        let sub = g.induced_relabel(&comp);
        codes.push(component_code(&sub)?.1);
    }
    codes.sort();
    let mut key = Vec::new();
    for c in &codes {
        key.push(c.len() as u8);
        key.extend_from_slice(c);
    }
    let key = CanonKey(key);
    let graph = graph_from_parts(&key.parts()?)?;
    Ok((key, graph))
}

fn graph_from_parts(parts: &[&[u8]]) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut offset = 0;
    for part in parts {
        let (s, es) = decode_component(part)?;
        edges.extend(es.into_iter().map(|(u, v)| (u + offset, v + offset)));
        offset += s;
    }
    Graph::from_edges(offset, edges)
}

/// Canonical key of a loop-free edge list over arbitrary labels. Duplicate
/// edges are merged and isolated vertices play no role.
pub fn canonical_form(edges: &[(usize, usize)]) -> Result<CanonKey> {
    Ok(canonicalize(&edge_list_graph(edges)?)?.0)
}

fn edge_list_graph(edges: &[(usize, usize)]) -> Result<Graph> {
    if let Some(&(u, _)) = edges.iter().find(|(u, v)| u == v) {
        return Err(Error::InvalidShape(format!("self-loop at vertex {u}")));
    }
    let mut labels: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    let idx = |x: usize| labels.binary_search(&x).unwrap();
    Graph::from_edges_dedup(labels.len(), edges.iter().map(|&(u, v)| (idx(u), idx(v))))
}

impl Shape {
    /// Shape of the edge set of `g`; isolated vertices are ignored.
    pub fn from_graph(g: &Graph) -> Result<Shape> {
        let (key, graph) = canonicalize(g)?;
        Shape::from_canonical(key, graph)
    }

    pub fn from_edges(edges: &[(usize, usize)]) -> Result<Shape> {
        Shape::from_graph(&edge_list_graph(edges)?)
    }

    pub fn from_key(key: &CanonKey) -> Result<Shape> {
        let graph = graph_from_parts(&key.parts()?)?;
        let (k2, g2) = canonicalize(&graph)?;
        if &k2 != key {
            return Err(Error::Parse(format!("`{key}` is not a canonical key")));
        }
        Shape::from_canonical(k2, g2)
    }

    fn from_canonical(key: CanonKey, graph: Graph) -> Result<Shape> {
        // Aut of a disjoint union: product of component groups, times the
        // permutations of isomorphic components.
        let parts = key.parts()?;
        let mut aut = BigUint::one();
        let mut i = 0;
        while i < parts.len() {
            let mut j = i;
            while j < parts.len() && parts[j] == parts[i] {
                j += 1;
            }
            let comp = graph_from_parts(&parts[i..i + 1])?;
            let a = count::count_connected_unlimited(&comp, &comp);
            for _ in i..j {
                aut *= &a;
            }
            aut *= falling_factorial((j - i) as u64, (j - i) as u64);
            i = j;
        }
        Ok(Shape { graph, key, aut })
    }

    /// The shape with no edges; used for complete-overlap patterns.
    pub fn empty() -> Shape {
        Shape { graph: Graph::empty(0), key: CanonKey::default(), aut: BigUint::one() }
    }

    pub fn edge() -> Shape {
        Shape::star(1).expect("a single edge is canonicalisable")
    }

    pub fn star(t: usize) -> Result<Shape> {
        if t == 0 {
            return Err(Error::InvalidShape("a star needs at least one leaf".into()));
        }
        Shape::from_edges(&(1..=t).map(|i| (0, i)).collect::<Vec<_>>())
    }

    pub fn clique(k: usize) -> Result<Shape> {
        Shape::from_graph(&Graph::complete(k))
    }

    pub fn path(edges: usize) -> Result<Shape> {
        Shape::from_edges(&(0..edges).map(|i| (i, i + 1)).collect::<Vec<_>>())
    }

    pub fn cycle(len: usize) -> Result<Shape> {
        if len < 3 {
            return Err(Error::InvalidShape(format!("cycle length {len} < 3")));
        }
        Shape::from_edges(&(0..len).map(|i| (i, (i + 1) % len)).collect::<Vec<_>>())
    }

    pub fn matching(k: usize) -> Result<Shape> {
        Shape::from_edges(&(0..k).map(|i| (2 * i, 2 * i + 1)).collect::<Vec<_>>())
    }

    pub fn biclique(a: usize, b: usize) -> Result<Shape> {
        let edges: Vec<_> = (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect();
        Shape::from_edges(&edges)
    }

    /// Canonical representative on `0..vertex_count()`.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn key(&self) -> &CanonKey {
        &self.key
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.n()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn automorphism_count(&self) -> &BigUint {
        &self.aut
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count() == 0
    }

    pub fn is_connected(&self) -> bool {
        self.graph.components().len() <= 1
    }

    /// `Some(t)` when the shape is the star `K_{1,t}` (the edge counts as `t = 1`).
    pub fn star_size(&self) -> Option<usize> {
        let m = self.edge_count();
        (m >= 1 && self.vertex_count() == m + 1 && self.graph.max_degree() == m).then_some(m)
    }

    pub fn is_clique(&self) -> bool {
        self.edge_count() > 0 && self.graph.is_complete()
    }

    /// Connected components as shapes, in key order.
    pub fn components(&self) -> Vec<Shape> {
        self.graph
            .components()
            .iter()
            .map(|c| Shape::from_graph(&self.graph.induced_relabel(c)).expect("component of a shape"))
            .collect()
    }

    /// Short human-readable label: well-known names where they apply.
    pub fn describe(&self) -> String {
        let (s, m) = (self.vertex_count(), self.edge_count());
        if m == 0 {
            return "empty".into();
        }
        if let Some(t) = self.star_size() {
            return if t == 1 { "K2".into() } else { format!("K1,{t}") };
        }
        if self.is_clique() {
            return format!("K{s}");
        }
        if self.is_connected() && self.graph.degrees().iter().all(|&d| d == 2) {
            return format!("C{s}");
        }
        if self.is_connected() && m + 1 == s && self.graph.max_degree() == 2 {
            return format!("P{s}");
        }
        let comps = self.components();
        if comps.len() > 1 {
            return comps.iter().map(Shape::describe).collect::<Vec<_>>().join("+");
        }
        format!("G(s={s},m={m})")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Every shape with `1..=max_edges` edges, once per isomorphism class, sorted
/// by `(edge count, canonical key)`.
///
/// Level `m` is generated from level `m - 1` by adding one edge in each of
/// the three possible ways (between two present vertices, from a present
/// vertex to a new one, or between two new vertices). Deleting any edge of an
/// `m`-edge shape lands in level `m - 1`, so nothing is missed.
pub fn enumerate_shapes(max_edges: usize) -> Result<Vec<Shape>> {
    if max_edges == 0 {
        return Err(Error::InvalidParameter("max_edges must be at least 1".into()));
    }
    if max_edges > MAX_ENUMERATED_EDGES {
        return Err(Error::Budget { what: "enumerate_shapes", limit: MAX_ENUMERATED_EDGES as u64 });
    }
    let mut all = vec![Shape::edge()];
    let mut level: Vec<Graph> = vec![Shape::edge().graph.clone()];
    for _ in 2..=max_edges {
        let mut next: BTreeMap<CanonKey, Graph> = BTreeMap::new();
        for g in &level {
            let s = g.n();
            let base: Vec<(usize, usize)> = g.edges().collect();
            let mut extra: Vec<(usize, usize)> = Vec::new();
            for u in 0..s {
                for v in u + 1..s {
                    if !g.has_edge(u, v) {
                        extra.push((u, v));
                    }
                }
                extra.push((u, s));
            }
            extra.push((s, s + 1));
            for e in extra {
                let h = Graph::from_edges(s + 2, base.iter().copied().chain([e]))?;
                let (key, canon) = canonicalize(&h)?;
                next.entry(key).or_insert(canon);
            }
        }
        level = next.values().cloned().collect();
        for (key, graph) in next {
            all.push(Shape::from_canonical(key, graph)?);
        }
    }
    all.sort();
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts_per_level() {
        let expected = [1, 3, 8, 19, 45];
        for (d, &want) in expected.iter().enumerate() {
            assert_eq!(enumerate_shapes(d + 1).unwrap().len(), want);
        }
        assert!(enumerate_shapes(9).unwrap_err().is_budget());
    }

    #[test]
    fn automorphisms_of_standard_shapes() {
        let n = |x: u64| BigUint::from(x);
        assert_eq!(*Shape::star(3).unwrap().automorphism_count(), n(6));
        assert_eq!(*Shape::edge().automorphism_count(), n(2));
        assert_eq!(*Shape::clique(3).unwrap().automorphism_count(), n(6));
        assert_eq!(*Shape::matching(3).unwrap().automorphism_count(), n(48));
        assert_eq!(*Shape::cycle(5).unwrap().automorphism_count(), n(10));
        assert_eq!(*Shape::biclique(3, 2).unwrap().automorphism_count(), n(12));
    }

    #[test]
    fn hex_round_trip() {
        for s in enumerate_shapes(4).unwrap() {
            let back = Shape::from_key(&CanonKey::from_hex(&s.key().to_hex()).unwrap()).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.graph(), s.graph());
        }
        assert!(CanonKey::from_hex("zz").is_err());
    }

    #[test]
    fn form_examples() {
        assert_eq!(canonical_form(&[(0, 1), (1, 2)]).unwrap(), canonical_form(&[(7, 9), (9, 4)]).unwrap());
        assert_ne!(canonical_form(&[(0, 1), (1, 2)]).unwrap(), canonical_form(&[(0, 1), (2, 3)]).unwrap());
        assert_ne!(
            canonical_form(&[(0, 1), (0, 2), (0, 3)]).unwrap(),
            canonical_form(&[(0, 1), (1, 2), (2, 3)]).unwrap()
        );
        assert!(canonical_form(&[(2, 2)]).is_err());
    }

    #[test]
    fn descriptions() {
        assert_eq!(Shape::star(2).unwrap().describe(), "K1,2");
        assert_eq!(Shape::clique(3).unwrap().describe(), "K3");
        assert_eq!(Shape::path(3).unwrap().describe(), "P4");
        assert_eq!(Shape::matching(2).unwrap().describe(), "K2+K2");
    }
}
