use std::collections::BTreeSet;

use super::count::{for_each_partial_map, glue_index};
use super::graph::Graph;
use super::shape::Shape;
use crate::error::Result;

/// One gluing of two shapes: a bijection between a subset of the left
/// shape's vertices and an equally sized subset of the right shape's.
///
/// Union and symmetric-difference graphs are built on construction; their
/// canonical shapes are computed on request because they can exceed the
/// canonicalisation bound for large stars.
#[derive(Debug, Clone)]
pub struct IntersectionPattern {
    left: Shape,
    right: Shape,
    gluing: Vec<(usize, usize)>,
    union_graph: Graph,
    symdiff_graph: Graph,
}

/// The derived quantities of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternShapes {
    pub union: Shape,
    pub symdiff: Shape,
    pub union_vertex_count: usize,
    pub symdiff_vertex_count: usize,
    pub symdiff_edge_count: usize,
}

impl IntersectionPattern {
    /// Builds the pattern for an explicit gluing (pairs `(left, right)`).
    pub fn new(left: &Shape, right: &Shape, gluing: &[(usize, usize)]) -> Result<Self> {
        use crate::error::Error;
        let mut map = vec![None; left.vertex_count()];
        let mut seen = BTreeSet::new();
        for &(i, j) in gluing {
            if i >= left.vertex_count() || j >= right.vertex_count() {
                return Err(Error::InvalidParameter(format!("gluing pair ({i}, {j}) out of range")));
            }
            if map[i].is_some() || !seen.insert(j) {
                return Err(Error::InvalidParameter("gluing is not injective".into()));
            }
            map[i] = Some(j);
        }
        Ok(Self::from_map(left, right, &map))
    }

    fn from_map(left: &Shape, right: &Shape, map: &[Option<usize>]) -> Self {
        let (a, b) = (left.graph(), right.graph());
        let (index, n) = glue_index(a.n(), b.n(), map);
        let key = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };
        let ea: BTreeSet<(usize, usize)> = a.edges().collect();
        let eb: BTreeSet<(usize, usize)> = b.edges().map(|(u, v)| key(index[u], index[v])).collect();
        let union = Graph::from_edges(n, ea.union(&eb).copied()).expect("glued edges are valid");
        let symdiff = Graph::from_edges(n, ea.symmetric_difference(&eb).copied())
            .expect("glued edges are valid")
            .without_isolated();
        let gluing = map.iter().enumerate().filter_map(|(i, m)| m.map(|j| (i, j))).collect();
        IntersectionPattern {
            left: left.clone(),
            right: right.clone(),
            gluing,
            union_graph: union,
            symdiff_graph: symdiff,
        }
    }

    pub fn left(&self) -> &Shape {
        &self.left
    }

    pub fn right(&self) -> &Shape {
        &self.right
    }

    /// Glued vertex pairs `(left vertex, right vertex)`.
    pub fn gluing(&self) -> &[(usize, usize)] {
        &self.gluing
    }

    pub fn overlap(&self) -> usize {
        self.gluing.len()
    }

    /// Union graph on `|V(S1)| + |V(S2)| − overlap` vertices.
    pub fn union_graph(&self) -> &Graph {
        &self.union_graph
    }

    /// Symmetric difference with isolated vertices removed.
    pub fn symdiff_graph(&self) -> &Graph {
        &self.symdiff_graph
    }

    pub fn union_vertex_count(&self) -> usize {
        self.union_graph.n()
    }

    pub fn symdiff_vertex_count(&self) -> usize {
        self.symdiff_graph.n()
    }

    pub fn symdiff_edge_count(&self) -> usize {
        self.symdiff_graph.edge_count()
    }

    pub fn union_shape(&self) -> Result<Shape> {
        Shape::from_graph(&self.union_graph)
    }

    pub fn symdiff_shape(&self) -> Result<Shape> {
        if self.symdiff_graph.edge_count() == 0 {
            return Ok(Shape::empty());
        }
        Shape::from_graph(&self.symdiff_graph)
    }
}

/// One pattern per gluing; there are `Σ_k C(s1,k) C(s2,k) k!` of them.
pub fn enumerate_patterns(left: &Shape, right: &Shape) -> Vec<IntersectionPattern> {
    let mut out = Vec::new();
    for_each_partial_map(left.vertex_count(), right.vertex_count(), |map| {
        out.push(IntersectionPattern::from_map(left, right, map));
    });
    out
}

/// Union shape, symmetric-difference shape and the vertex/edge counts.
pub fn pattern_shapes(pattern: &IntersectionPattern) -> Result<PatternShapes> {
    Ok(PatternShapes {
        union: pattern.union_shape()?,
        symdiff: pattern.symdiff_shape()?,
        union_vertex_count: pattern.union_vertex_count(),
        symdiff_vertex_count: pattern.symdiff_vertex_count(),
        symdiff_edge_count: pattern.symdiff_edge_count(),
    })
}
