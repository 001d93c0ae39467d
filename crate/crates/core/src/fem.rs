//! P1 finite elements for the anisotropic potential equation
//! `−div((I + ε₂ p pᵀ) ∇φ) = f`, `φ = g` on the boundary, where `p` is the
//! in-plane part of the director.
//!
//! The triangulation splits every grid cell along its lower-left to
//! upper-right diagonal, so the director is constant on each triangle and the
//! element integrals are exact.

use crate::error::FemError;
use crate::grid::{CellField, GridSpec};
use crate::sparse::{conjugate_gradient, CgOptions, CgReport, CsrMatrix};
use crate::vec3;

#[derive(Debug, Clone)]
pub struct Triangulation {
    grid: GridSpec,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_cell: Vec<(usize, usize)>,
    basis_grads: Vec<[[f64; 2]; 3]>,
    areas: Vec<f64>,
    boundary: Vec<bool>,
    unknown_of: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
    pattern: CsrMatrix,
    // Local (a, b) → slot in `pattern` when both nodes are interior.
    elem_slots: Vec<[[Option<usize>; 3]; 3]>,
}

impl Triangulation {
    /// Structured triangulation with nodes at cell corners and two
    /// counterclockwise triangles per cell.
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.cells_per_side();
        let np = n + 1;
        let node = |i: usize, j: usize| j * np + i;
        let mut nodes = Vec::with_capacity(np * np);
        let mut boundary = Vec::with_capacity(np * np);
        for j in 0..=n {
            for i in 0..=n {
                nodes.push(grid.corner(i, j));
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        let mut tri_cell = Vec::with_capacity(2 * n * n);
        for cj in 1..=n {
            for ci in 1..=n {
                let (i, j) = (ci - 1, cj - 1);
                let (n00, n10, n01, n11) = (
                    node(i, j),
                    node(i + 1, j),
                    node(i, j + 1),
                    node(i + 1, j + 1),
                );
                triangles.push([n00, n10, n11]);
                triangles.push([n00, n11, n01]);
                tri_cell.push((ci, cj));
                tri_cell.push((ci, cj));
            }
        }

        let mut basis_grads = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let [p0, p1, p2] = t.map(|k| nodes[k]);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            basis_grads.push([
                [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
                [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
                [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
            ]);
            areas.push(0.5 * det);
        }

        let mut unknown_of = vec![None; nodes.len()];
        let mut interior_nodes = Vec::new();
        for (k, &b) in boundary.iter().enumerate() {
            if !b {
                unknown_of[k] = Some(interior_nodes.len());
                interior_nodes.push(k);
            }
        }

        let mut triplets = Vec::new();
        for t in &triangles {
            for &a in t {
                for &b in t {
                    if let (Some(ia), Some(ib)) = (unknown_of[a], unknown_of[b]) {
                        triplets.push((ia, ib, 0.0));
                    }
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(interior_nodes.len(), &triplets);
        let elem_slots = triangles
            .iter()
            .map(|t| {
                let mut s = [[None; 3]; 3];
                for (la, &a) in t.iter().enumerate() {
                    for (lb, &b) in t.iter().enumerate() {
                        if let (Some(ia), Some(ib)) = (unknown_of[a], unknown_of[b]) {
                            s[la][lb] = pattern.slot(ia, ib);
                        }
                    }
                }
                s
            })
            .collect();

        Self {
            grid,
            nodes,
            triangles,
            tri_cell,
            basis_grads,
            areas,
            boundary,
            unknown_of,
            interior_nodes,
            pattern,
            elem_slots,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Grid cell `(i, j)` containing triangle `t`.
    pub fn cell_of(&self, t: usize) -> (usize, usize) {
        self.tri_cell[t]
    }

    /// The two triangles of interior cell `(i, j)`.
    pub fn triangles_of_cell(&self, i: usize, j: usize) -> [usize; 2] {
        let n = self.grid.cells_per_side();
        let k = 2 * ((j - 1) * n + (i - 1));
        [k, k + 1]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.basis_grads[t]
    }

    /// Element matrix `area · ∇bₐᵀ (I + ε₂ p pᵀ) ∇b_b` for triangle `t`.
    fn element_matrix(&self, t: usize, p: [f64; 2], eps2: f64) -> [[f64; 3]; 3] {
        let g = &self.basis_grads[t];
        let area = self.areas[t];
        let mut k = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let v = area
                    * (vec3::dot2(g[a], g[b]) + eps2 * vec3::dot2(p, g[a]) * vec3::dot2(p, g[b]));
                k[a][b] = v;
                k[b][a] = v;
            }
        }
        k
    }
}

/// A continuous piecewise-linear function given by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(tri: &Triangulation) -> Self {
        Self {
            values: vec![0.0; tri.num_nodes()],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(tri: &Triangulation, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: tri.nodes.iter().map(|&[x, y]| f(x, y)).collect(),
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Constant gradient of a P1 function on each triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleGradients {
    grads: Vec<[f64; 2]>,
}

impl TriangleGradients {
    pub fn zeros(tri: &Triangulation) -> Self {
        Self {
            grads: vec![[0.0; 2]; tri.num_triangles()],
        }
    }

    pub fn uniform(tri: &Triangulation, g: [f64; 2]) -> Self {
        Self {
            grads: vec![g; tri.num_triangles()],
        }
    }

    pub fn from_vec(grads: Vec<[f64; 2]>) -> Self {
        Self { grads }
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.grads
    }

    /// `‖∇u − ∇v‖_{L²}`.
    pub fn l2_distance(&self, other: &Self, tri: &Triangulation) -> f64 {
        self.grads
            .iter()
            .zip(&other.grads)
            .enumerate()
            .map(|(t, (a, b))| {
                let d = [a[0] - b[0], a[1] - b[1]];
                tri.area(t) * vec3::dot2(d, d)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `‖∇u‖²_{L²}`.
    pub fn l2_norm_sq(&self, tri: &Triangulation) -> f64 {
        self.grads
            .iter()
            .enumerate()
            .map(|(t, g)| tri.area(t) * vec3::dot2(*g, *g))
            .sum()
    }
}

impl std::ops::Index<usize> for TriangleGradients {
    type Output = [f64; 2];
    fn index(&self, t: usize) -> &[f64; 2] {
        &self.grads[t]
    }
}

/// Interior-node system `A u₀ = b` of the lifted Dirichlet problem.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

fn check_eps2(eps2: f64) -> Result<(), FemError> {
    if eps2 > -1.0 {
        Ok(())
    } else {
        Err(FemError::LossOfEllipticity(eps2))
    }
}

/// Assembles `aₕ(u₀, v) = F(v) − aₕ(g̃ₕ, v)` for all interior basis functions
/// `v`. The load uses one-point centroid quadrature per triangle.
pub fn assemble_system(
    tri: &Triangulation,
    d: &CellField,
    eps2: f64,
    g: &NodalField,
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<SparseSystem, FemError> {
    check_eps2(eps2)?;
    let mut matrix = tri.pattern.clone();
    let mut rhs = vec![0.0; tri.num_unknowns()];
    {
        let vals = matrix.values_mut();
        for (t, nodes) in tri.triangles.iter().enumerate() {
            let p = vec3::planar(d[tri.tri_cell[t]]);
            let k = tri.element_matrix(t, p, eps2);
            let slots = &tri.elem_slots[t];
            let [c0, c1, c2] = nodes.map(|n| tri.nodes[n]);
            let load = tri.areas[t] / 3.0
                * f((c0[0] + c1[0] + c2[0]) / 3.0, (c0[1] + c1[1] + c2[1]) / 3.0);
            for (a, &na) in nodes.iter().enumerate() {
                let Some(ia) = tri.unknown_of[na] else {
                    continue;
                };
                rhs[ia] += load;
                for (b, &nb) in nodes.iter().enumerate() {
                    match slots[a][b] {
                        Some(s) => vals[s] += k[a][b],
                        None => rhs[ia] -= k[a][b] * g.values[nb],
                    }
                }
            }
        }
    }
    // Lifting contribution of the interior nodal values of g̃ₕ.
    let mut gi = vec![0.0; tri.num_unknowns()];
    for (k, &node) in tri.interior_nodes.iter().enumerate() {
        gi[k] = g.values[node];
    }
    let ag = matrix.mul_vec(&gi);
    rhs.iter_mut().zip(&ag).for_each(|(r, a)| *r -= a);
    Ok(SparseSystem { matrix, rhs })
}

/// Stiffness matrix over all nodes, boundary included.
pub fn full_stiffness(
    tri: &Triangulation,
    d: &CellField,
    eps2: f64,
) -> Result<CsrMatrix, FemError> {
    check_eps2(eps2)?;
    let mut triplets = Vec::with_capacity(9 * tri.num_triangles());
    for (t, nodes) in tri.triangles.iter().enumerate() {
        let k = tri.element_matrix(t, vec3::planar(d[tri.tri_cell[t]]), eps2);
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((nodes[a], nodes[b], k[a][b]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(tri.num_nodes(), &triplets))
}

/// `aₕ(u, v) = ∫ ∇u·∇v + ε₂ (p·∇u)(p·∇v)` with `p` the in-plane director.
pub fn bilinear_form(
    tri: &Triangulation,
    d: &CellField,
    eps2: f64,
    u: &TriangleGradients,
    v: &TriangleGradients,
) -> f64 {
    (0..tri.num_triangles())
        .map(|t| {
            let p = vec3::planar(d[tri.tri_cell[t]]);
            let (gu, gv) = (u[t], v[t]);
            tri.areas[t] * (vec3::dot2(gu, gv) + eps2 * vec3::dot2(p, gu) * vec3::dot2(p, gv))
        })
        .sum()
}

/// Solves the lifted system and returns `φ = u₀ + g̃ₕ`. `warm` supplies an
/// initial guess for `φ` on interior nodes.
pub fn solve_potential(
    tri: &Triangulation,
    system: &SparseSystem,
    g: &NodalField,
    opts: &CgOptions,
    warm: Option<&NodalField>,
) -> Result<(NodalField, CgReport), FemError> {
    let mut u0: Vec<f64> = match warm {
        Some(w) => tri
            .interior_nodes
            .iter()
            .map(|&k| w.values[k] - g.values[k])
            .collect(),
        None => vec![0.0; tri.num_unknowns()],
    };
    let report = conjugate_gradient(&system.matrix, &system.rhs, &mut u0, opts)?;
    let mut phi = g.clone();
    for (k, &node) in tri.interior_nodes.iter().enumerate() {
        phi.values[node] += u0[k];
    }
    Ok((phi, report))
}

/// Exact per-triangle gradient of the P1 function with nodal values `phi`.
pub fn triangle_gradients(tri: &Triangulation, phi: &NodalField) -> TriangleGradients {
    let grads = tri
        .triangles
        .iter()
        .zip(&tri.basis_grads)
        .map(|(nodes, bg)| {
            let mut g = [0.0; 2];
            for (a, &n) in nodes.iter().enumerate() {
                g[0] += phi.values[n] * bg[a][0];
                g[1] += phi.values[n] * bg[a][1];
            }
            g
        })
        .collect();
    TriangleGradients { grads }
}

/// The two triangle gradients of interior cell `(i, j)`; each triangle
/// covers half the cell.
pub fn cell_gradient_pair(
    tri: &Triangulation,
    grads: &TriangleGradients,
    i: usize,
    j: usize,
) -> [[f64; 2]; 2] {
    let [a, b] = tri.triangles_of_cell(i, j);
    [grads[a], grads[b]]
}

/// Cell mean of the gradient, as an embedded 3-vector field `(gₓ, g_y, 0)`.
pub fn cell_average_gradients(tri: &Triangulation, grads: &TriangleGradients) -> CellField {
    let grid = *tri.grid();
    let mut out = CellField::zeros(grid);
    for (i, j) in grid.interior() {
        let [a, b] = cell_gradient_pair(tri, grads, i, j);
        out[(i, j)] = vec3::embed([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    out
}

/// Mean of the two triangle gradients of each cell as a plain 2-vector.
pub fn cell_average(
    tri: &Triangulation,
    grads: &TriangleGradients,
    i: usize,
    j: usize,
) -> [f64; 2] {
    let [a, b] = cell_gradient_pair(tri, grads, i, j);
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CgOptions;
    use rand::{Rng, SeedableRng};

    fn unit_square(n: usize) -> Triangulation {
        Triangulation::new(GridSpec::new(n, 1.0, [0.0, 0.0]).unwrap())
    }

    fn random_director(grid: GridSpec, seed: u64) -> CellField {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        CellField::from_fn(grid, |_, _| loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = vec3::norm(v);
            if n > 0.1 {
                break vec3::scale(v, 1.0 / n);
            }
        })
    }

    fn zero_source(_: f64, _: f64) -> f64 {
        0.0
    }

    #[test]
    fn node_and_triangle_counts() {
        let t = Triangulation::new(GridSpec::single_cell_for_tests(1.0, [0.0, 0.0]));
        assert_eq!((t.num_nodes(), t.num_triangles()), (4, 2));
        let t = unit_square(2);
        assert_eq!(t.num_nodes(), 9);
        assert_eq!(t.num_triangles(), 8);
        assert_eq!((0..9).filter(|&k| t.is_boundary(k)).count(), 8);
        assert_eq!(t.num_unknowns(), 1);
        let t = unit_square(64);
        assert_eq!(t.num_nodes(), 4225);
        assert_eq!(t.num_triangles(), 8192);
    }

    #[test]
    fn triangles_are_ccw_and_inside_their_cell() {
        let t = unit_square(5);
        let h = t.grid().h();
        for (k, nodes) in t.triangles().iter().enumerate() {
            assert!((t.area(k) - 0.5 * h * h).abs() < 1e-15);
            let (ci, cj) = t.cell_of(k);
            assert!(t.triangles_of_cell(ci, cj).contains(&k));
            for &n in nodes {
                let [x, y] = t.nodes()[n];
                assert!(x >= (ci - 1) as f64 * h - 1e-12 && x <= ci as f64 * h + 1e-12);
                assert!(y >= (cj - 1) as f64 * h - 1e-12 && y <= cj as f64 * h + 1e-12);
            }
        }
    }

    #[test]
    fn two_triangle_laplace_stiffness() {
        // Hand assembly on the unit square with nodes (0,0), (1,0), (0,1), (1,1).
        let expected = [
            [1.0, -0.5, -0.5, 0.0],
            [-0.5, 1.0, 0.0, -0.5],
            [-0.5, 0.0, 1.0, -0.5],
            [0.0, -0.5, -0.5, 1.0],
        ];
        let grid = GridSpec::single_cell_for_tests(1.0, [0.0, 0.0]);
        let t = Triangulation::new(grid);
        let d = CellField::uniform(grid, [0.6, 0.8, 0.0]);
        let k = full_stiffness(&t, &d, 0.0).unwrap().to_dense();
        for r in 0..4 {
            for c in 0..4 {
                assert!((k[r][c] - expected[r][c]).abs() < 1e-15, "({r}, {c})");
            }
        }
    }

    #[test]
    fn out_of_plane_director_decouples() {
        let t = unit_square(6);
        let g = NodalField::interpolate(&t, |x, y| x * x - y);
        let iso = assemble_system(
            &t,
            &CellField::uniform(*t.grid(), [1.0, 0.0, 0.0]),
            0.0,
            &g,
            &zero_source,
        )
        .unwrap();
        for sign in [1.0, -1.0] {
            let d = CellField::uniform(*t.grid(), [0.0, 0.0, sign]);
            let s = assemble_system(&t, &d, 0.7, &g, &zero_source).unwrap();
            assert_eq!(s.matrix, iso.matrix);
            assert_eq!(s.rhs, iso.rhs);
        }
    }

    #[test]
    fn anisotropic_matrix_is_symmetric_positive_definite() {
        let t = unit_square(4);
        let d = random_director(*t.grid(), 3);
        let g = NodalField::zeros(&t);
        let s = assemble_system(&t, &d, -0.5, &g, &zero_source).unwrap();
        assert!(s.matrix.asymmetry() <= 1e-14);
        let dense = s.matrix.to_dense();
        let m = nalgebra::DMatrix::from_fn(9, 9, |r, c| dense[r][c]);
        let eig = nalgebra::SymmetricEigen::new(m);
        assert!(eig.eigenvalues.min() > 0.0);
    }

    #[test]
    fn coercivity_against_isotropic_matrix() {
        let t = unit_square(8);
        let d = random_director(*t.grid(), 9);
        let g = NodalField::zeros(&t);
        let lap = assemble_system(&t, &d, 0.0, &g, &zero_source)
            .unwrap()
            .matrix;
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for eps2 in [-0.9, -0.5, 0.0, 0.5, 3.0] {
            let a = assemble_system(&t, &d, eps2, &g, &zero_source)
                .unwrap()
                .matrix;
            for _ in 0..20 {
                let v: Vec<f64> = (0..t.num_unknowns())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                let quad = |m: &CsrMatrix| {
                    m.mul_vec(&v)
                        .iter()
                        .zip(&v)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                };
                assert!(quad(&a) >= (1.0 + eps2.min(0.0)) * quad(&lap) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn rejects_loss_of_ellipticity() {
        let t = unit_square(3);
        let d = CellField::uniform(*t.grid(), [1.0, 0.0, 0.0]);
        let g = NodalField::zeros(&t);
        for eps2 in [-1.0, -1.5] {
            assert_eq!(
                assemble_system(&t, &d, eps2, &g, &zero_source).unwrap_err(),
                FemError::LossOfEllipticity(eps2)
            );
        }
    }

    #[test]
    fn homogeneous_data_gives_zero_potential() {
        let t = unit_square(5);
        let d = random_director(*t.grid(), 1);
        let g = NodalField::zeros(&t);
        let s = assemble_system(&t, &d, 0.4, &g, &zero_source).unwrap();
        let (phi, _) = solve_potential(&t, &s, &g, &CgOptions::default(), None).unwrap();
        assert!(phi.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn affine_boundary_data_is_reproduced() {
        let t = unit_square(10);
        let d = random_director(*t.grid(), 2);
        let exact = NodalField::interpolate(&t, |x, _| x);
        // Dirichlet data with garbage interior values for the lifting.
        let g = NodalField::interpolate(&t, |x, y| {
            if x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 {
                5.0 * y
            } else {
                x
            }
        });
        let s = assemble_system(&t, &d, 0.0, &g, &zero_source).unwrap();
        let opts = CgOptions {
            rel_tol: 1e-13,
            ..Default::default()
        };
        let (phi, _) = solve_potential(&t, &s, &g, &opts, None).unwrap();
        for (a, b) in phi.values().iter().zip(exact.values()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn discrete_weak_form_holds() {
        let t = unit_square(12);
        let grid = *t.grid();
        let d = random_director(grid, 4);
        let eps2 = 0.8;
        let g = NodalField::interpolate(&t, |x, y| (3.0 * x).sin() + y * y);
        let f = |x: f64, y: f64| 1.0 + x * y;
        let s = assemble_system(&t, &d, eps2, &g, &f).unwrap();
        let opts = CgOptions {
            rel_tol: 1e-12,
            ..Default::default()
        };
        let (phi, _) = solve_potential(&t, &s, &g, &opts, None).unwrap();
        let gphi = triangle_gradients(&t, &phi);
        let scale: f64 = s.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        for &node in t.interior_nodes() {
            let mut hat = vec![0.0; t.num_nodes()];
            hat[node] = 1.0;
            let gb = triangle_gradients(&t, &NodalField::from_values(hat));
            let lhs = bilinear_form(&t, &d, eps2, &gphi, &gb);
            // Centroid-quadrature load against the same basis function.
            let load: f64 = (0..t.num_triangles())
                .filter(|&k| t.triangles()[k].contains(&node))
                .map(|k| {
                    let c = t.triangles()[k].map(|n| t.nodes()[n]);
                    t.area(k) / 3.0
                        * f(
                            (c[0][0] + c[1][0] + c[2][0]) / 3.0,
                            (c[0][1] + c[1][1] + c[2][1]) / 3.0,
                        )
                })
                .sum();
            assert!((lhs - load).abs() <= 1e-11 * scale.max(1.0));
        }
    }

    #[test]
    fn gradients_of_affine_functions() {
        let t = unit_square(4);
        let c = triangle_gradients(&t, &NodalField::interpolate(&t, |_, _| 2.5));
        assert!(c
            .as_slice()
            .iter()
            .all(|g| g[0].abs() < 1e-13 && g[1].abs() < 1e-13));
        for (f, e) in [
            (
                Box::new(|x: f64, _: f64| x) as Box<dyn Fn(f64, f64) -> f64>,
                [1.0, 0.0],
            ),
            (Box::new(|x: f64, y: f64| 3.0 * x - 2.0 * y), [3.0, -2.0]),
        ] {
            let gr = triangle_gradients(&t, &NodalField::interpolate(&t, f));
            for g in gr.as_slice() {
                assert!((g[0] - e[0]).abs() < 1e-12 && (g[1] - e[1]).abs() < 1e-12);
            }
            let avg = cell_average_gradients(&t, &gr);
            for v in avg.interior_values() {
                assert!((v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12 && v[2] == 0.0);
            }
        }
    }

    #[test]
    fn cell_average_is_mean_of_pair() {
        let t = unit_square(2);
        let mut grads = vec![[0.0; 2]; t.num_triangles()];
        let [a, b] = t.triangles_of_cell(2, 1);
        grads[a] = [1.0, 0.0];
        grads[b] = [0.0, 1.0];
        let [c, e] = t.triangles_of_cell(1, 2);
        grads[c] = [4.0, -2.0];
        grads[e] = [4.0, -2.0];
        let g = TriangleGradients::from_vec(grads);
        assert_eq!(cell_average(&t, &g, 2, 1), [0.5, 0.5]);
        assert_eq!(cell_average(&t, &g, 1, 2), [4.0, -2.0]);
        assert_eq!(cell_average(&t, &g, 1, 1), [0.0, 0.0]);
    }
}
