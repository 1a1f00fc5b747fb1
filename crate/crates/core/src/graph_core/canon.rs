//! Canonical labelling of small graphs.
//!
//! Vertices are first split into colour classes by iterated degree refinement;
//! the canonical code is the lexicographically largest adjacency code over all
//! labellings that list the classes in order. The refinement is invariant under
//! isomorphism, so the constrained maximum is still a complete invariant.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::graph::Graph;
use crate::error::{Error, Result};

/// Components larger than this are rejected by the canonicaliser.
pub const MAX_COMPONENT_VERTICES: usize = 12;

/// Stable colour classes from iterated neighbourhood refinement.
pub(crate) fn refine_colors(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut colors: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut classes = distinct(&colors);
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&u| colors[u]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let ids: BTreeMap<&(usize, Vec<usize>), usize> = {
            let mut m = BTreeMap::new();
            for s in &sigs {
                m.insert(s, 0);
            }
            for (i, v) in m.values_mut().enumerate() {
                *v = i;
            }
            m
        };
        let next: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
        let next_classes = distinct(&next);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

fn distinct(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Canonical ordering of the vertices of a graph with at most
/// [`MAX_COMPONENT_VERTICES`] vertices, together with its adjacency code rows.
pub(crate) fn canonical_order(g: &Graph) -> Result<(Vec<usize>, Vec<u16>)> {
    let s = g.n();
    if s > MAX_COMPONENT_VERTICES {
        return Err(Error::InvalidShape(format!(
            "component with {s} vertices exceeds the canonicalisation bound of {MAX_COMPONENT_VERTICES}"
        )));
    }
    let colors = refine_colors(g);
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by_key(|&v| colors[v]);
    let slot_colors: Vec<usize> = order.iter().map(|&v| colors[v]).collect();

    let mut adj = vec![0u16; s];
    for (v, row) in adj.iter_mut().enumerate() {
        for &u in g.neighbors(v) {
            *row |= 1 << u;
        }
    }

    let mut twin = vec![0u16; s];
    for u in 0..s {
        for v in 0..s {
            let strip = (1u16 << u) | (1u16 << v);
            if u != v && colors[u] == colors[v] && adj[u] & !strip == adj[v] & !strip {
                twin[v] |= 1 << u;
            }
        }
    }

    let mut search = Search {
        adj: &adj,
        twin: &twin,
        slot_colors: &slot_colors,
        colors: &colors,
        used: 0,
        perm: Vec::with_capacity(s),
        rows: Vec::with_capacity(s),
        best_perm: Vec::new(),
        best_rows: Vec::new(),
        have_best: false,
    };
    search.descend(0);
    Ok((search.best_perm, search.best_rows))
}

struct Search<'a> {
    adj: &'a [u16],
    // twin[v] has bit u set when swapping u and v is an automorphism.
    twin: &'a [u16],
    slot_colors: &'a [usize],
    colors: &'a [usize],
    used: u16,
    perm: Vec<usize>,
    rows: Vec<u16>,
    best_perm: Vec<usize>,
    best_rows: Vec<u16>,
    have_best: bool,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        let s = self.slot_colors.len();
        if depth == s {
            if !self.have_best || self.rows > self.best_rows {
                self.best_perm = self.perm.clone();
                self.best_rows = self.rows.clone();
                self.have_best = true;
            }
            return;
        }
        let want = self.slot_colors[depth];
        for v in 0..s {
            if self.colors[v] != want || self.used >> v & 1 == 1 {
                continue;
            }
            // An unused twin with a smaller label yields the same subtree.
            let lower_unused = !self.used & ((1u16 << v) - 1);
            if self.twin[v] & lower_unused != 0 {
                continue;
            }
            // Row value: bit for earlier slot j is at position depth-1-j.
            let mut row = 0u16;
            for (j, &u) in self.perm.iter().enumerate() {
                if self.adj[v] >> u & 1 == 1 {
                    row |= 1 << (depth - 1 - j);
                }
            }
            if self.have_best {
                let prefix = self.rows.iter().chain(std::iter::once(&row));
                if prefix.cmp(self.best_rows[..=depth].iter()) == Ordering::Less {
                    continue;
                }
            }
            self.used |= 1 << v;
            self.perm.push(v);
            self.rows.push(row);
            self.descend(depth + 1);
            self.used &= !(1 << v);
            self.perm.pop();
            self.rows.pop();
        }
    }
}

/// Encodes a connected component as `[s, m, packed code bits...]`.
pub(crate) fn component_code(g: &Graph) -> Result<(Vec<usize>, Vec<u8>)> {
    let (order, rows) = canonical_order(g)?;
    let s = g.n();
    let mut bytes = vec![s as u8, g.edge_count() as u8];
    let mut acc = 0u8;
    let mut nbits = 0;
    for (i, &row) in rows.iter().enumerate() {
        for b in (0..i).rev() {
            acc = (acc << 1) | ((row >> b) & 1) as u8;
            nbits += 1;
            if nbits == 8 {
                bytes.push(acc);
                acc = 0;
                nbits = 0;
            }
        }
    }
    if nbits > 0 {
        bytes.push(acc << (8 - nbits));
    }
    Ok((order, bytes))
}

/// Inverse of [`component_code`]: edges over `0..s` in canonical labels.
pub(crate) fn decode_component(bytes: &[u8]) -> Result<(usize, Vec<(usize, usize)>)> {
    let bad = || Error::Parse("malformed canonical key".into());
    let (&s, rest) = bytes.split_first().ok_or_else(bad)?;
    let (&m, bits) = rest.split_first().ok_or_else(bad)?;
    let s = s as usize;
    let nbits = s * s.saturating_sub(1) / 2;
    if bits.len() != nbits.div_ceil(8) || s > MAX_COMPONENT_VERTICES {
        return Err(bad());
    }
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..s {
        // Bits of row i were written from slot 0 up to slot i-1.
        for j in 0..i {
            if bits[k / 8] >> (7 - k % 8) & 1 == 1 {
                edges.push((j, i));
            }
            k += 1;
        }
    }
    if edges.len() != m as usize {
        return Err(bad());
    }
    Ok((s, edges))
}
