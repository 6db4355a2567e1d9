//! Rectangular-domain discretization: tensor grids in one to three
//! dimensions, Dirichlet-zero nodal functions, cell gradients and quadrature.
//!
//! Conventions, fixed bit-exactly for serialization and tests:
//! - nodes are indexed lexicographically, axis 0 fastest;
//! - node quadrature weights are the tensor product of per-axis trapezoid
//!   weights (h/2 at the two ends, h inside);
//! - cells are the boxes between adjacent nodes; a cell field carries one
//!   value per cell and integrates with the full cell volume (midpoint rule);
//! - the cell gradient component along axis k averages the forward
//!   differences over the 2^{d-1} cell edges parallel to k, which is exact for
//!   affine data and makes every cell energy a smooth function of the nodal
//!   values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

pub const MAX_DIMENSION: usize = 3;
pub const MIN_NODES_PER_AXIS: usize = 3;

/// Tensor-product grid over a box, dimension 1 to 3.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dimension: usize,
    /// Per-axis node counts; unused axes are 1 so flat indexing is uniform.
    nodes: [usize; MAX_DIMENSION],
    origin: [f64; MAX_DIMENSION],
    spacing: [f64; MAX_DIMENSION],
}

/// Nodal values on a grid. With `dirichlet_zero` set, boundary nodes are
/// exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub dirichlet_zero: bool,
}

/// One value per grid cell, e.g. a gradient magnitude field.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub values: Vec<f64>,
}

/// A nodal or cell field, for operations defined on either kind.
#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Node(&'a GridFunction),
    Cell(&'a CellField),
}

impl Grid {
    /// Builds a grid from per-axis extents and node counts. Both slices must
    /// have the same length d in 1..=3, every axis at least 3 nodes.
    pub fn new(extents: &[(f64, f64)], nodes_per_axis: &[usize]) -> Result<Grid, Error> {
        let dimension = extents.len();
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::Invalid(format!(
                "dimension must be 1..={MAX_DIMENSION}, got {dimension}"
            )));
        }
        if nodes_per_axis.len() != dimension {
            return Err(Error::Invalid(format!(
                "got {} extents but {} node counts",
                dimension,
                nodes_per_axis.len()
            )));
        }
        let mut nodes = [1usize; MAX_DIMENSION];
        let mut origin = [0.0f64; MAX_DIMENSION];
        let mut spacing = [0.0f64; MAX_DIMENSION];
        for k in 0..dimension {
            let (lo, hi) = extents[k];
            if !(hi - lo).is_finite() || hi <= lo {
                return Err(Error::Invalid(format!(
                    "axis {k}: extent [{lo}, {hi}] is empty or not finite"
                )));
            }
            if nodes_per_axis[k] < MIN_NODES_PER_AXIS {
                return Err(Error::Invalid(format!(
                    "axis {k}: need at least {MIN_NODES_PER_AXIS} nodes, got {}",
                    nodes_per_axis[k]
                )));
            }
            nodes[k] = nodes_per_axis[k];
            origin[k] = lo;
            spacing[k] = (hi - lo) / (nodes_per_axis[k] - 1) as f64;
        }
        Ok(Grid {
            dimension,
            nodes,
            origin,
            spacing,
        })
    }

    /// Unit interval/square/cube with the same node count per axis.
    pub fn unit_box(dimension: usize, nodes_per_axis: usize) -> Result<Grid, Error> {
        let extents = vec![(0.0, 1.0); dimension];
        let nodes = vec![nodes_per_axis; dimension];
        Grid::new(&extents, &nodes)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes[..self.dimension]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dimension]
    }

    pub fn node_count(&self) -> usize {
        self.nodes[..self.dimension].iter().product()
    }

    pub fn cell_count(&self) -> usize {
        self.nodes[..self.dimension].iter().map(|n| n - 1).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dimension].iter().product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dimension)
            .map(|k| self.spacing[k] * (self.nodes[k] - 1) as f64)
            .product()
    }

    /// Multi-index of a flat node index, axis 0 fastest.
    pub fn node_index(&self, flat: usize) -> [usize; MAX_DIMENSION] {
        let mut idx = [0usize; MAX_DIMENSION];
        let mut rest = flat;
        for k in 0..self.dimension {
            idx[k] = rest % self.nodes[k];
            rest /= self.nodes[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for k in (0..self.dimension).rev() {
            flat = flat * self.nodes[k] + idx[k];
        }
        flat
    }

    pub fn node_coords(&self, flat: usize) -> [f64; MAX_DIMENSION] {
        let idx = self.node_index(flat);
        let mut x = [0.0f64; MAX_DIMENSION];
        for k in 0..self.dimension {
            x[k] = self.origin[k] + idx[k] as f64 * self.spacing[k];
        }
        x
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.node_index(flat);
        (0..self.dimension).any(|k| idx[k] == 0 || idx[k] == self.nodes[k] - 1)
    }

    /// Trapezoid-type quadrature weight of a node.
    pub fn node_weight(&self, flat: usize) -> f64 {
        let idx = self.node_index(flat);
        let mut w = 1.0;
        for k in 0..self.dimension {
            let edge = idx[k] == 0 || idx[k] == self.nodes[k] - 1;
            w *= if edge {
                0.5 * self.spacing[k]
            } else {
                self.spacing[k]
            };
        }
        w
    }

    /// Builds a nodal function from explicit values. With `dirichlet_zero`
    /// set, boundary entries are forced to exact zero.
    pub fn function_from(
        &self,
        mut values: Vec<f64>,
        dirichlet_zero: bool,
    ) -> Result<GridFunction, Error> {
        if values.len() != self.node_count() {
            return Err(Error::Invalid(format!(
                "expected {} nodal values, got {}",
                self.node_count(),
                values.len()
            )));
        }
        if dirichlet_zero {
            for flat in 0..values.len() {
                if self.is_boundary(flat) {
                    values[flat] = 0.0;
                }
            }
        }
        Ok(GridFunction {
            values,
            dirichlet_zero,
        })
    }

    pub fn zero_function(&self, dirichlet_zero: bool) -> GridFunction {
        GridFunction {
            values: vec![0.0; self.node_count()],
            dirichlet_zero,
        }
    }

    /// Samples a closure of the node coordinates into a nodal function.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64, dirichlet_zero: bool) -> GridFunction {
        let values = (0..self.node_count())
            .map(|flat| {
                if dirichlet_zero && self.is_boundary(flat) {
                    0.0
                } else {
                    f(&self.node_coords(flat)[..self.dimension])
                }
            })
            .collect();
        GridFunction {
            values,
            dirichlet_zero,
        }
    }

    /// Product of coordinate sine half-waves: positive in the interior, zero
    /// on the boundary. The default first initial guess of the solvers.
    pub fn bump_function(&self) -> GridFunction {
        let spans: Vec<(f64, f64)> = (0..self.dimension)
            .map(|k| (self.origin[k], self.spacing[k] * (self.nodes[k] - 1) as f64))
            .collect();
        self.sample(
            |x| {
                let mut v = 1.0;
                for (k, &(lo, len)) in spans.iter().enumerate() {
                    v *= (core::f64::consts::PI * (x[k] - lo) / len).sin();
                }
                v
            },
            true,
        )
    }

    /// Deterministic pseudo-random Dirichlet-zero function with interior
    /// values uniform in [-1, 1].
    pub fn random_test_function(&self, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..self.node_count())
            .map(|flat| {
                if self.is_boundary(flat) {
                    0.0
                } else {
                    rng.gen_range(-1.0..=1.0)
                }
            })
            .collect();
        GridFunction {
            values,
            dirichlet_zero: true,
        }
    }

    /// Integral of a nodal field with trapezoid-type weights.
    pub fn integrate_nodal(&self, u: &GridFunction) -> f64 {
        debug_assert_eq!(u.values.len(), self.node_count());
        let mut acc = 0.0;
        for (flat, &v) in u.values.iter().enumerate() {
            acc += self.node_weight(flat) * v;
        }
        acc
    }

    /// Integral of a cell field: midpoint rule, value times cell volume.
    pub fn integrate_cells(&self, f: &CellField) -> f64 {
        debug_assert_eq!(f.values.len(), self.cell_count());
        let vol = self.cell_volume();
        let mut acc = 0.0;
        for &v in &f.values {
            acc += v;
        }
        acc * vol
    }

    pub fn integrate(&self, f: FieldRef<'_>) -> f64 {
        match f {
            FieldRef::Node(u) => self.integrate_nodal(u),
            FieldRef::Cell(c) => self.integrate_cells(c),
        }
    }

    /// Multi-index of a flat cell index, axis 0 fastest.
    pub fn cell_index(&self, flat: usize) -> [usize; MAX_DIMENSION] {
        let mut idx = [0usize; MAX_DIMENSION];
        let mut rest = flat;
        for k in 0..self.dimension {
            idx[k] = rest % (self.nodes[k] - 1);
            rest /= self.nodes[k] - 1;
        }
        idx
    }

    /// The 2^d corner node flat indices of a cell, in bit order of the offset
    /// pattern (bit k set means +1 along axis k).
    pub fn cell_corners(&self, cell_flat: usize) -> Vec<usize> {
        let base = self.cell_index(cell_flat);
        let corners = 1usize << self.dimension;
        (0..corners)
            .map(|mask| {
                let mut idx = base;
                for k in 0..self.dimension {
                    if mask & (1 << k) != 0 {
                        idx[k] += 1;
                    }
                }
                self.flat_index(&idx[..self.dimension])
            })
            .collect()
    }

    /// Cell gradient vector of a nodal function: each component averages the
    /// forward differences over the edges of the cell parallel to that axis.
    /// Writes the d components of every cell into `out` (cell-major layout).
    pub fn gradient_vectors(&self, u: &GridFunction, out: &mut Vec<[f64; MAX_DIMENSION]>) {
        debug_assert_eq!(u.values.len(), self.node_count());
        let d = self.dimension;
        let edge_pairs = 1usize << (d - 1);
        out.clear();
        out.reserve(self.cell_count());
        for cell in 0..self.cell_count() {
            let corners = self.cell_corners(cell);
            let mut g = [0.0f64; MAX_DIMENSION];
            for k in 0..d {
                let mut diff = 0.0;
                for (mask, &corner) in corners.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        diff += u.values[corner];
                    } else {
                        diff -= u.values[corner];
                    }
                }
                g[k] = diff / (edge_pairs as f64 * self.spacing[k]);
            }
            out.push(g);
        }
    }

    /// Euclidean magnitude of the cell gradient. Zero field for constant u,
    /// exact for affine data, absolutely 1-homogeneous in u.
    pub fn gradient_magnitude(&self, u: &GridFunction) -> CellField {
        let mut vectors = Vec::new();
        self.gradient_vectors(u, &mut vectors);
        let d = self.dimension;
        let values = vectors
            .iter()
            .map(|g| {
                let mut s = 0.0;
                for gk in g.iter().take(d) {
                    s += gk * gk;
                }
                s.sqrt()
            })
            .collect();
        CellField { values }
    }
}

impl GridFunction {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| c * v).collect(),
            dirichlet_zero: self.dirichlet_zero,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl CellField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl<'a> FieldRef<'a> {
    pub fn max_abs(&self) -> f64 {
        match self {
            FieldRef::Node(u) => u.max_abs(),
            FieldRef::Cell(c) => c.max_abs(),
        }
    }

    /// Integral of pointwise f(value) with the weights of the field kind.
    pub fn integrate_map(&self, grid: &Grid, f: impl Fn(f64) -> f64) -> f64 {
        match self {
            FieldRef::Node(u) => {
                let mut acc = 0.0;
                for (flat, &v) in u.values.iter().enumerate() {
                    acc += grid.node_weight(flat) * f(v);
                }
                acc
            }
            FieldRef::Cell(c) => {
                let vol = grid.cell_volume();
                let mut acc = 0.0;
                for &v in &c.values {
                    acc += f(v);
                }
                acc * vol
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(&[(0.0, 1.0)], &[3]).is_ok());
        assert!(Grid::new(&[(0.0, 1.0)], &[2]).is_err());
        assert!(Grid::new(&[(1.0, 0.0)], &[5]).is_err());
        assert!(Grid::new(&[], &[]).is_err());
        assert!(Grid::new(&[(0.0, 1.0); 4], &[5; 4]).is_err());
    }

    #[test]
    fn weights_sum_to_volume() {
        for (extents, nodes) in [
            (vec![(0.0, 1.0)], vec![7]),
            (vec![(0.0, 2.0), (-1.0, 1.0)], vec![5, 9]),
            (vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], vec![4, 5, 3]),
        ] {
            let grid = Grid::new(&extents, &nodes).unwrap();
            let total: f64 = (0..grid.node_count()).map(|i| grid.node_weight(i)).sum();
            assert!((total - grid.volume()).abs() < 1e-12);
        }
    }

    #[test]
    fn integrate_constant_and_linear() {
        let grid = Grid::unit_box(1, 5).unwrap();
        let one = grid.sample(|_| 1.0, false);
        assert!((grid.integrate_nodal(&one) - 1.0).abs() < 1e-12);

        let grid2 = Grid::new(&[(0.0, 2.0), (0.0, 3.0)], &[5, 7]).unwrap();
        let c = grid2.sample(|_| 2.5, false);
        assert!((grid2.integrate_nodal(&c) - 2.5 * 6.0).abs() < 1e-12);

        let grid129 = Grid::unit_box(1, 129).unwrap();
        let x = grid129.sample(|p| p[0], false);
        assert!((grid129.integrate_nodal(&x) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn integrate_is_linear() {
        let grid = Grid::unit_box(2, 9).unwrap();
        let f = grid.random_test_function(11);
        let g = grid.random_test_function(12);
        let combo = grid
            .function_from(
                f.values
                    .iter()
                    .zip(&g.values)
                    .map(|(a, b)| 2.0 * a - 3.0 * b)
                    .collect(),
                true,
            )
            .unwrap();
        let lhs = grid.integrate_nodal(&combo);
        let rhs = 2.0 * grid.integrate_nodal(&f) - 3.0 * grid.integrate_nodal(&g);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn integrate_second_order_on_x_squared() {
        let exact = 1.0 / 3.0;
        let mut errors = Vec::new();
        for nodes in [17, 33, 65] {
            let grid = Grid::unit_box(1, nodes).unwrap();
            let f = grid.sample(|p| p[0] * p[0], false);
            errors.push((grid.integrate_nodal(&f) - exact).abs());
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(order1 > 1.9, "order {order1}");
        assert!(order2 > 1.9, "order {order2}");
    }

    #[test]
    fn gradient_exact_on_affine() {
        let grid = Grid::unit_box(1, 9).unwrap();
        let zero = grid.zero_function(false);
        assert!(grid
            .gradient_magnitude(&zero)
            .values
            .iter()
            .all(|&v| v == 0.0));

        let x = grid.sample(|p| p[0], false);
        for v in grid.gradient_magnitude(&x).values {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let grid2 = Grid::unit_box(2, 6).unwrap();
        let plane = grid2.sample(|p| p[0] + 2.0 * p[1], false);
        let expect = 5.0f64.sqrt();
        for v in grid2.gradient_magnitude(&plane).values {
            assert!((v - expect).abs() < 1e-12);
        }

        let grid3 = Grid::unit_box(3, 4).unwrap();
        let plane3 = grid3.sample(|p| 2.0 * p[0] - p[1] + 0.5 * p[2], false);
        let expect3 = (4.0f64 + 1.0 + 0.25).sqrt();
        for v in grid3.gradient_magnitude(&plane3).values {
            assert!((v - expect3).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_absolutely_homogeneous() {
        let grid = Grid::unit_box(2, 8).unwrap();
        let u = grid.random_test_function(3);
        // Powers of two scale without rounding, so equality is bitwise.
        let g1 = grid.gradient_magnitude(&u);
        let g2 = grid.gradient_magnitude(&u.scale(-2.0));
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert_eq!(2.0 * a, *b);
        }
        // General factors are exact up to one rounding of each component.
        let g3 = grid.gradient_magnitude(&u.scale(2.5));
        for (a, b) in g1.values.iter().zip(&g3.values) {
            assert!((2.5 * a - b).abs() <= 1e-14 * b.abs());
        }
    }

    #[test]
    fn random_function_contract() {
        let grid = Grid::unit_box(2, 7).unwrap();
        let a = grid.random_test_function(0);
        let b = grid.random_test_function(0);
        assert_eq!(a, b);
        let c = grid.random_test_function(1);
        assert_ne!(a, c);
        for (flat, &v) in a.values.iter().enumerate() {
            if grid.is_boundary(flat) {
                assert_eq!(v, 0.0);
            } else {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn dirichlet_projection() {
        let grid = Grid::unit_box(1, 5).unwrap();
        let f = grid.function_from(vec![9.0; 5], true).unwrap();
        assert_eq!(f.values[0], 0.0);
        assert_eq!(f.values[4], 0.0);
        assert_eq!(f.values[2], 9.0);
        assert!(grid.function_from(vec![1.0; 4], false).is_err());
    }
}
