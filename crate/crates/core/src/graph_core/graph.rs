use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A simple undirected graph on the vertices `0..n`.
///
/// Neighbour lists are kept sorted, which makes membership tests a binary
/// search and keeps iteration order deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// The empty graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
        Graph { adj, edge_count: n * n.saturating_sub(1) / 2 }
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicate edges
    /// and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            edge_count += 1;
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Graph { adj, edge_count })
    }

    /// Builds a graph from sorted, duplicate-free neighbour lists produced by
    /// the samplers. Symmetry is the caller's responsibility.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let degree_sum: usize = adj.iter().map(Vec::len).sum();
        debug_assert!(degree_sum % 2 == 0);
        Graph { adj, edge_count: degree_sum / 2 }
    }

    /// Same as [`Graph::from_edges`] but silently merges duplicate edges.
    pub fn from_edges_dedup<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        list.sort_unstable();
        list.dedup();
        Graph::from_edges(n, list)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.edge_count == n * n.saturating_sub(1) / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn isolated_count(&self) -> usize {
        self.adj.iter().filter(|l| l.is_empty()).count()
    }

    pub fn complement(&self) -> Graph {
        let n = self.n();
        let adj = (0..n)
            .map(|v| {
                let mut out = Vec::with_capacity(n - 1 - self.degree(v));
                let mut it = self.adj[v].iter().peekable();
                for u in 0..n {
                    if u == v {
                        continue;
                    }
                    if it.peek() == Some(&&u) {
                        it.next();
                    } else {
                        out.push(u);
                    }
                }
                out
            })
            .collect();
        Graph::from_sorted_adjacency(adj)
    }

    /// Drops isolated vertices, relabelling the rest in increasing order.
    pub fn without_isolated(&self) -> Graph {
        let keep: Vec<usize> = (0..self.n()).filter(|&v| self.degree(v) > 0).collect();
        self.induced_relabel(&keep)
    }

    /// Subgraph induced on `vertices` (which must be distinct), relabelled
    /// to `0..vertices.len()` in the given order.
    pub fn induced_relabel(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                let mut l: Vec<usize> =
                    self.adj[v].iter().map(|&u| index[u]).filter(|&u| u != usize::MAX).collect();
                l.sort_unstable();
                l
            })
            .collect();
        Graph::from_sorted_adjacency(adj)
    }

    /// Vertex sets of the connected components of non-isolated vertices,
    /// ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.adj[s].is_empty() {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for &u in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Plain-text edge list: `n <count>` then one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    /// Parses the edge-list format; blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap_or_default();
            let second = parts.next();
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: expected two fields", lineno + 1)));
            }
            let bad = || Error::Parse(format!("line {}: malformed `{line}`", lineno + 1));
            if n.is_none() {
                if first != "n" {
                    return Err(Error::Parse("edge list must start with `n <count>`".into()));
                }
                n = Some(second.ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?);
                continue;
            }
            let u = first.parse::<usize>().map_err(|_| bad())?;
            let v = second.ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
            edges.push((u, v));
        }
        let n = n.ok_or_else(|| Error::Parse("missing `n <count>` header".into()))?;
        Graph::from_edges(n, edges)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Graph::parse_edge_list(&text)
    }
}

/// Dense bitset adjacency used by the counting kernels.
pub(crate) struct AdjBits {
    words: usize,
    rows: Vec<u64>,
}

impl AdjBits {
    pub(crate) fn new(g: &Graph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        for v in 0..n {
            let row = &mut rows[v * words..(v + 1) * words];
            for &u in g.neighbors(v) {
                row[u / 64] |= 1 << (u % 64);
            }
        }
        AdjBits { words, rows }
    }

    #[inline]
    pub(crate) fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub(crate) fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_duplicates_and_range() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::from_edges_dedup(3, [(0, 1), (1, 0)]).unwrap().edge_count() == 1);
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 0), (3, 4)]).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        assert_eq!(g.components().len(), 2);
    }

    #[test]
    fn edge_list_round_trip_and_comments() {
        let text = "# a triangle\nn 4\n\n0 1\n1 2 # inline\n0 2\n";
        let g = Graph::parse_edge_list(text).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        assert!(Graph::parse_edge_list("0 1\n").is_err());
        assert!(Graph::parse_edge_list("n 2\n0 1 2\n").is_err());
    }

    #[test]
    fn complement_of_complete_is_empty() {
        let k = Graph::complete(5);
        assert!(k.is_complete());
        assert_eq!(k.complement(), Graph::empty(5));
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        assert_eq!(g.complement().edge_count(), 5);
    }
}
