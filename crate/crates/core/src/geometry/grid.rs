use alloc::format;
use alloc::vec::Vec;

use super::Interval;
use crate::{Error, Result};

/// Minimum node count per axis.
pub const MIN_NODES: usize = 8;

/// Boundary treatment along the submanifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Closed axes stay periodic.
    Periodic,
    /// Every axis is cut open with Dirichlet ends.
    Dirichlet,
}

/// One uniformly spaced grid axis.
///
/// Periodic axes place `count` nodes at `lo + i·h`, `h = (hi − lo)/count`.
/// Non-periodic axes are cell-centred: nodes at `lo + (i + ½)h`, so the
/// domain ends sit on the outer faces where Dirichlet data lives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn new(count: usize, lo: f64, hi: f64, periodic: bool) -> Self {
        Axis { count, lo, hi, periodic }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        let h = self.spacing();
        if self.periodic {
            self.lo + i as f64 * h
        } else {
            self.lo + (i as f64 + 0.5) * h
        }
    }

    /// Face between node `i` and node `i + 1` (the upper face of node `i`).
    pub fn upper_face(&self, i: usize) -> f64 {
        self.node(i) + 0.5 * self.spacing()
    }

    /// Lower face of node `i`.
    pub fn lower_face(&self, i: usize) -> f64 {
        self.node(i) - 0.5 * self.spacing()
    }
}

/// Tensor-product sample grid; axis 0 varies fastest in the flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl SampleGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        let mut strides = Vec::with_capacity(axes.len());
        let mut len = 1usize;
        for (i, a) in axes.iter().enumerate() {
            if a.count < MIN_NODES {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has {} nodes, need at least {}",
                    i, a.count, MIN_NODES
                )));
            }
            if !(a.hi > a.lo) || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::InvalidGrid(format!("axis {} has an empty interval", i)));
            }
            strides.push(len);
            len *= a.count;
        }
        Ok(SampleGrid { axes, strides, len })
    }

    /// Grid over an embedding's domain. An axis is periodic when its domain is
    /// periodic and `boundary` is [`Boundary::Periodic`].
    pub fn on_domain(domain: &[Interval], counts: &[usize], boundary: Boundary) -> Result<Self> {
        if domain.len() != counts.len() {
            return Err(Error::InvalidGrid(format!(
                "{} node counts given for a {}-dimensional domain",
                counts.len(),
                domain.len()
            )));
        }
        if boundary == Boundary::Periodic && !domain.iter().any(|d| d.periodic) {
            return Err(Error::InvalidGrid("periodic boundary requested on an open domain".into()));
        }
        let axes = domain
            .iter()
            .zip(counts)
            .map(|(d, &n)| Axis::new(n, d.lo, d.hi, d.periodic && boundary == Boundary::Periodic))
            .collect();
        SampleGrid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing()
    }

    /// Product of spacings, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    pub fn coordinate(&self, idx: usize, a: usize) -> usize {
        (idx / self.strides[a]) % self.axes[a].count
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.coordinate(idx, a)).collect()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn params(&self, idx: usize) -> Vec<f64> {
        (0..self.dim()).map(|a| self.axes[a].node(self.coordinate(idx, a))).collect()
    }

    /// Neighbour one step along axis `a` (`forward` or backward), wrapping on
    /// periodic axes, `None` past a non-periodic end.
    pub fn neighbor(&self, idx: usize, a: usize, forward: bool) -> Option<usize> {
        let i = self.coordinate(idx, a);
        let n = self.axes[a].count;
        let s = self.strides[a];
        if forward {
            if i + 1 < n {
                Some(idx + s)
            } else if self.axes[a].periodic {
                Some(idx + s - n * s)
            } else {
                None
            }
        } else if i > 0 {
            Some(idx - s)
        } else if self.axes[a].periodic {
            Some(idx + (n - 1) * s)
        } else {
            None
        }
    }

    pub fn same_shape(&self, other: &SampleGrid) -> bool {
        self.axes.len() == other.axes.len()
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.count == b.count && a.periodic == b.periodic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_cell_centred_nodes() {
        let p = Axis::new(8, 0.0, 8.0, true);
        assert_eq!(p.node(0), 0.0);
        assert_eq!(p.node(7), 7.0);
        let d = Axis::new(8, 0.0, 8.0, false);
        assert_eq!(d.node(0), 0.5);
        assert_eq!(d.lower_face(0), 0.0);
        assert_eq!(d.upper_face(7), 8.0);
    }

    #[test]
    fn neighbours_wrap_only_when_periodic() {
        let g = SampleGrid::new(alloc::vec![Axis::new(8, 0.0, 1.0, true), Axis::new(10, 0.0, 1.0, false)]).unwrap();
        assert_eq!(g.len(), 80);
        let idx = g.index(&[7, 0]);
        assert_eq!(g.neighbor(idx, 0, true), Some(g.index(&[0, 0])));
        assert_eq!(g.neighbor(idx, 1, false), None);
        assert_eq!(g.neighbor(idx, 1, true), Some(g.index(&[7, 1])));
        assert_eq!(g.multi_index(idx), alloc::vec![7, 0]);
    }

    #[test]
    fn rejects_coarse_axes() {
        assert!(SampleGrid::new(alloc::vec![Axis::new(4, 0.0, 1.0, true)]).is_err());
    }

    #[test]
    fn periodic_boundary_needs_closed_domain() {
        let open = [Interval::new(0.0, 1.0, false)];
        assert!(SampleGrid::on_domain(&open, &[16], Boundary::Periodic).is_err());
        let g = SampleGrid::on_domain(&open, &[16], Boundary::Dirichlet).unwrap();
        assert!(!g.axis(0).periodic);
    }
}
