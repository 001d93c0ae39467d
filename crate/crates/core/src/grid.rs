//! Uniform cell-centered grid with one ghost layer and the finite-difference
//! operators acting on 3-vector fields.

use crate::error::GridError;
use crate::vec3::{self, Vec3};

/// Square cell grid of `n × n` interior cells of width `h = side / n`.
///
/// Interior cells are indexed `1..=n` in each direction; indices `0` and
/// `n + 1` address the ghost layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    side: f64,
    origin: [f64; 2],
    h: f64,
}

impl GridSpec {
    pub fn new(n: usize, side: f64, origin: [f64; 2]) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooFewCells(n));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(GridError::BadSideLength(side));
        }
        Ok(Self {
            n,
            side,
            origin,
            h: side / n as f64,
        })
    }

    /// One-cell grid, which `new` rejects; used to check element assembly on
    /// the two-triangle square.
    #[cfg(test)]
    pub(crate) fn single_cell_for_tests(side: f64, origin: [f64; 2]) -> Self {
        Self {
            n: 1,
            side,
            origin,
            h: side,
        }
    }

    /// Grid on the unit square `[-0.5, 0.5]²`.
    pub fn centered_unit(n: usize) -> Result<Self, GridError> {
        Self::new(n, 1.0, [-0.5, -0.5])
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn side_length(&self) -> f64 {
        self.side
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Row stride of the ghosted storage.
    pub fn stride(&self) -> usize {
        self.n + 2
    }

    /// Storage index of cell `(i, j)`, ghosts included.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.n + 2) + i
    }

    /// Center of interior cell `(i, j)`, `1 ≤ i, j ≤ n`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 - 0.5) * self.h,
            self.origin[1] + (j as f64 - 0.5) * self.h,
        ]
    }

    /// Corner point `(i, j)`, `0 ≤ i, j ≤ n`.
    pub fn corner(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (1..=n).flat_map(move |j| (1..=n).map(move |i| (i, j)))
    }
}

/// A 3-vector per cell, stored on the full `(n + 2)²` ghosted array.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: GridSpec,
    values: Vec<Vec3>,
}

impl CellField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::uniform(grid, [0.0; 3])
    }

    /// Every cell, ghosts included, set to `v`.
    pub fn uniform(grid: GridSpec, v: Vec3) -> Self {
        let len = grid.stride() * grid.stride();
        Self {
            grid,
            values: vec![v; len],
        }
    }

    /// Samples `f` at interior cell centers and fills the ghosts by the
    /// Neumann copy rule.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Vec3) -> Self {
        let mut field = Self::zeros(grid);
        for (i, j) in grid.interior() {
            let [x, y] = grid.cell_center(i, j);
            field[(i, j)] = f(x, y);
        }
        field.apply_neumann_ghosts();
        field
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn as_slice(&self) -> &[Vec3] {
        &self.values
    }

    pub fn interior_values(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.grid.interior().map(move |c| self[c])
    }

    /// Cellwise map over interior cells; ghosts of the result are zero.
    pub fn map_interior(&self, mut f: impl FnMut(Vec3) -> Vec3) -> Self {
        let mut out = Self::zeros(self.grid);
        for c in self.grid.interior() {
            out[c] = f(self[c]);
        }
        out
    }

    /// Cellwise combination of two fields on the same grid, ghosts included.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(Vec3, Vec3) -> Vec3) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Cellwise mean `(a + b) / 2`.
    pub fn midpoint(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| vec3::scale(vec3::add(a, b), 0.5))
    }

    /// Copies each boundary-adjacent interior value into the ghost cell
    /// across the boundary face. Corners copy the diagonal interior cell.
    pub fn apply_neumann_ghosts(&mut self) {
        let n = self.grid.n;
        let g = self.grid;
        for k in 1..=n {
            self.values[g.idx(0, k)] = self.values[g.idx(1, k)];
            self.values[g.idx(n + 1, k)] = self.values[g.idx(n, k)];
            self.values[g.idx(k, 0)] = self.values[g.idx(k, 1)];
            self.values[g.idx(k, n + 1)] = self.values[g.idx(k, n)];
        }
        self.values[g.idx(0, 0)] = self.values[g.idx(1, 1)];
        self.values[g.idx(n + 1, 0)] = self.values[g.idx(n, 1)];
        self.values[g.idx(0, n + 1)] = self.values[g.idx(1, n)];
        self.values[g.idx(n + 1, n + 1)] = self.values[g.idx(n, n)];
    }

    /// Five-point Laplacian on interior cells. Reads ghosts, so they must be
    /// current. Ghosts of the result are zero.
    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        let inv_h2 = 1.0 / (g.h * g.h);
        let mut out = Self::zeros(g);
        for (i, j) in g.interior() {
            let c = self[(i, j)];
            let sum = vec3::add(
                vec3::add(self[(i + 1, j)], self[(i - 1, j)]),
                vec3::add(self[(i, j + 1)], self[(i, j - 1)]),
            );
            out[(i, j)] = vec3::scale(vec3::sub(sum, vec3::scale(c, 4.0)), inv_h2);
        }
        out
    }

    /// `‖∇ₕ u‖²_{L²}`: `h²` times the sum of squared forward differences over
    /// interior faces.
    pub fn gradient_energy(&self) -> f64 {
        let g = self.grid;
        let n = g.n;
        // h² · |Δu / h|² = |Δu|²
        let mut sum = 0.0;
        for j in 1..=n {
            for i in 1..=n {
                let c = self[(i, j)];
                if i < n {
                    sum += vec3::norm_sq(vec3::sub(self[(i + 1, j)], c));
                }
                if j < n {
                    sum += vec3::norm_sq(vec3::sub(self[(i, j + 1)], c));
                }
            }
        }
        sum
    }

    /// `‖u‖²_{L²}` of the piecewise-constant interpolant.
    pub fn l2_norm_sq(&self) -> f64 {
        self.interior_values().map(vec3::norm_sq).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `‖u − v‖_{L²}`.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        let g = self.grid;
        let s: f64 = g
            .interior()
            .map(|c| vec3::norm_sq(vec3::sub(self[c], other[c])))
            .sum();
        (s * g.cell_area()).sqrt()
    }

    /// `‖∇ₕu − ∇ₕv‖_{L²}`; both fields need current ghosts.
    pub fn gradient_distance(&self, other: &Self) -> f64 {
        self.zip_with(other, vec3::sub).gradient_energy().sqrt()
    }

    /// Sum over interior cells of `u·v` times the cell area.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        let g = self.grid;
        g.interior()
            .map(|c| vec3::dot(self[c], other[c]))
            .sum::<f64>()
            * g.cell_area()
    }
}

impl std::ops::Index<(usize, usize)> for CellField {
    type Output = Vec3;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Vec3 {
        &self.values[self.grid.idx(i, j)]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CellField {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Vec3 {
        let k = self.grid.idx(i, j);
        &mut self.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 1.0, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(1, 1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(4, 0.0, [0.0, 0.0]).is_err());
        let g = GridSpec::centered_unit(64).unwrap();
        assert_eq!(g.h(), 1.0 / 64.0);
        assert_eq!(g.cell_center(1, 1), [-0.5 + 0.5 / 64.0, -0.5 + 0.5 / 64.0]);
    }

    #[test]
    fn constant_interior_gives_constant_ghosts() {
        let g = grid(5);
        let v = [0.3, -0.2, 0.9];
        let f = CellField::from_fn(g, |_, _| v);
        assert!(f.as_slice().iter().all(|&x| x == v));
    }

    #[test]
    fn ghost_copy_on_a_row() {
        let g = grid(4);
        let mut f = CellField::zeros(g);
        for j in 1..=4 {
            for i in 1..=4 {
                f[(i, j)] = [i as f64, 0.0, 0.0];
            }
        }
        f.apply_neumann_ghosts();
        for j in 1..=4 {
            assert_eq!(f[(0, j)][0], 1.0);
            assert_eq!(f[(5, j)][0], 4.0);
        }
    }

    #[test]
    fn single_corner_cell_spreads_only_to_its_ghosts() {
        let g = grid(4);
        let mut f = CellField::zeros(g);
        let v = [1.0, 2.0, 3.0];
        f[(1, 1)] = v;
        f.apply_neumann_ghosts();
        assert_eq!(f[(0, 1)], v);
        assert_eq!(f[(1, 0)], v);
        assert_eq!(f[(0, 0)], v);
        assert_eq!(f[(5, 1)], [0.0; 3]);
        assert_eq!(f[(1, 5)], [0.0; 3]);
        assert_eq!(f[(0, 2)], [0.0; 3]);
        assert_eq!(f[(5, 5)], [0.0; 3]);
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let f = CellField::from_fn(grid(7), |_, _| [0.1, 0.7, -0.2]);
        assert!(f.laplacian().interior_values().all(|v| v == [0.0; 3]));
    }

    #[test]
    fn laplacian_of_spike() {
        let g = grid(8);
        let h2 = g.h() * g.h();
        let mut f = CellField::zeros(g);
        f[(4, 4)] = [0.0, 0.0, 1.0];
        f.apply_neumann_ghosts();
        let lap = f.laplacian();
        assert!((lap[(4, 4)][2] + 4.0 / h2).abs() < 1e-9);
        for c in [(3, 4), (5, 4), (4, 3), (4, 5)] {
            assert!((lap[c][2] - 1.0 / h2).abs() < 1e-9);
        }
        assert_eq!(lap[(2, 2)], [0.0; 3]);
    }

    #[test]
    fn laplacian_of_ramp_with_neumann_ghosts() {
        let g = grid(4);
        let h2 = g.h() * g.h();
        let mut f = CellField::zeros(g);
        for (i, j) in g.interior() {
            f[(i, j)] = [i as f64, 0.0, 0.0];
        }
        f.apply_neumann_ghosts();
        let lap = f.laplacian();
        let expected = [1.0 / h2, 0.0, 0.0, -1.0 / h2];
        for j in 1..=4 {
            for i in 1..=4 {
                assert!((lap[(i, j)][0] - expected[i - 1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_energy_of_unit_slope_ramp() {
        for n in [2, 5, 16] {
            let g = grid(n);
            let h = g.h();
            let f = CellField::from_fn(g, |x, _| [0.25 + x, 0.0, 0.0]);
            let expected = h * h * (n * (n - 1)) as f64;
            assert!((f.gradient_energy() - expected).abs() < 1e-12, "n = {n}");
        }
        assert_eq!(
            CellField::from_fn(grid(6), |_, _| [1.0, 0.0, 0.0]).gradient_energy(),
            0.0
        );
    }

    fn random_field(n: usize, vals: &[f64]) -> CellField {
        let g = grid(n);
        let mut f = CellField::zeros(g);
        for (k, (i, j)) in g.interior().enumerate() {
            f[(i, j)] = [vals[3 * k], vals[3 * k + 1], vals[3 * k + 2]];
        }
        f.apply_neumann_ghosts();
        f
    }

    proptest! {
        #[test]
        fn summation_by_parts(vals in proptest::collection::vec(-1.0f64..1.0, 3 * 36)) {
            let f = random_field(6, &vals);
            let lhs = f.laplacian().l2_inner(&f);
            let rhs = -f.gradient_energy();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn ghost_fill_is_idempotent(vals in proptest::collection::vec(-1.0f64..1.0, 3 * 25)) {
            let f = random_field(5, &vals);
            let mut g = f.clone();
            g.apply_neumann_ghosts();
            prop_assert_eq!(f, g);
        }
    }
}
