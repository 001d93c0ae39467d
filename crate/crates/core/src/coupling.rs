//! Electric torque source coupling two potential time levels to the director.

use crate::fem::{cell_gradient_pair, TriangleGradients, Triangulation};
use crate::grid::CellField;
use crate::vec3;

/// Per-cell source
/// `Sᵢ = ε₁/(2|Cᵢ|) ∫_{Cᵢ} (∇φⁿᵉʷ·d̄) ∇φᵒˡᵈ + (∇φᵒˡᵈ·d̄) ∇φⁿᵉʷ`,
/// where `∇φ·d̄` pairs the gradient with the in-plane part of `d̄`. The cell
/// integral is the equal-weight mean over the cell's two triangles. The
/// result is embedded as `(Sₓ, S_y, 0)`.
pub fn source_term(
    tri: &Triangulation,
    grads_old: &TriangleGradients,
    grads_new: &TriangleGradients,
    d_half: &CellField,
    eps1: f64,
) -> CellField {
    let grid = *d_half.grid();
    let mut out = CellField::zeros(grid);
    for (i, j) in grid.interior() {
        let p = vec3::planar(d_half[(i, j)]);
        let old = cell_gradient_pair(tri, grads_old, i, j);
        let new = cell_gradient_pair(tri, grads_new, i, j);
        let mut s = [0.0; 2];
        for (go, gn) in old.iter().zip(&new) {
            let a = vec3::dot2(*gn, p);
            let b = vec3::dot2(*go, p);
            s[0] += a * go[0] + b * gn[0];
            s[1] += a * go[1] + b * gn[1];
        }
        // mean over two triangles, times ε₁/2
        let c = 0.25 * eps1;
        out[(i, j)] = [c * s[0], c * s[1], 0.0];
    }
    out
}
