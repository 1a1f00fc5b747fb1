use num_bigint::BigUint;

use super::count::falling_factorial;
use super::graph::Graph;
use crate::error::{Error, Result};

/// The multiset of vertex degrees of `H`, stored in non-increasing order so
/// that every derived quantity depends on the multiset alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeProfile {
    degrees: Vec<usize>,
}

impl DegreeProfile {
    pub fn new(mut degrees: Vec<usize>) -> Result<Self> {
        let v = degrees.len();
        let sum: usize = degrees.iter().sum();
        if sum % 2 != 0 {
            return Err(Error::InvalidParameter(format!("degree sum {sum} is odd")));
        }
        if let Some(&d) = degrees.iter().find(|&&d| d >= v.max(1)) {
            return Err(Error::InvalidParameter(format!("degree {d} too large for {v} vertices")));
        }
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        Ok(DegreeProfile { degrees })
    }

    pub fn from_graph(g: &Graph) -> Self {
        let mut degrees = g.degrees();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        DegreeProfile { degrees }
    }

    /// Degrees in non-increasing order.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.first().copied().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.max_degree() == 0
    }

    /// Number of vertices with positive degree.
    pub fn support(&self) -> usize {
        self.degrees.iter().take_while(|&&d| d > 0).count()
    }

    /// `Σ_v d_v^t` in floating point, summed in a fixed order.
    pub fn power_sum(&self, t: f64) -> f64 {
        self.degrees.iter().filter(|&&d| d > 0).map(|&d| (d as f64).powf(t)).sum()
    }

    /// `Σ_v (d_v)_(t)` exactly; equal to the number of labelled `t`-stars.
    pub fn falling_sum(&self, t: usize) -> BigUint {
        self.degrees.iter().map(|&d| falling_factorial(d as u64, t as u64)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_and_sorts() {
        assert!(DegreeProfile::new(vec![1, 2]).is_err());
        assert!(DegreeProfile::new(vec![2, 2]).is_err());
        let p = DegreeProfile::new(vec![1, 2, 1]).unwrap();
        assert_eq!(p.degrees(), &[2, 1, 1]);
        assert_eq!(p.edge_count(), 2);
        assert_eq!(p.max_degree(), 2);
        assert_eq!(p.falling_sum(2), BigUint::from(2u32));
    }

    #[test]
    fn profile_of_graph() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        let p = DegreeProfile::from_graph(&g);
        assert_eq!(p.degrees(), &[2, 1, 1, 0, 0]);
        assert_eq!(p.support(), 3);
    }
}
