//! Closed-form midpoint rotation of the director.
//!
//! The implicit midpoint rule for `d' = d × w̄` is a Cayley transform: the
//! update `d ↦ V(w̄) d` is exactly orthogonal and keeps `w̄` fixed, so the
//! unit-length constraint holds without renormalization.

use crate::grid::CellField;
use crate::vec3::{self, Mat3, Vec3};

/// `V(w̄)` for time step `dt`.
///
/// `V = [(1 − τ|w|²) I + (dt²/2) w⊗w + dt Q(w)] / (1 + τ|w|²)` with
/// `τ = dt²/4` and `Q(w) v = v × w`.
pub fn rotation_matrix(w_bar: Vec3, dt: f64) -> Mat3 {
    let [a, b, c] = w_bar;
    let tau = 0.25 * dt * dt * vec3::norm_sq(w_bar);
    let inv = 1.0 / (1.0 + tau);
    let diag = 1.0 - tau;
    let half = 0.5 * dt * dt;
    // Q(w) = [[0, c, -b], [-c, 0, a], [b, -a, 0]]
    [
        [
            (diag + half * a * a) * inv,
            (half * a * b + dt * c) * inv,
            (half * a * c - dt * b) * inv,
        ],
        [
            (half * b * a - dt * c) * inv,
            (diag + half * b * b) * inv,
            (half * b * c + dt * a) * inv,
        ],
        [
            (half * c * a + dt * b) * inv,
            (half * c * b - dt * a) * inv,
            (diag + half * c * c) * inv,
        ],
    ]
}

/// `|(d⁺ − d) − dt ((d⁺ + d)/2) × w̄|`, zero for an exact midpoint step.
pub fn midpoint_residual(d: Vec3, next: Vec3, w_bar: Vec3, dt: f64) -> f64 {
    let mid = vec3::scale(vec3::add(next, d), 0.5);
    vec3::norm(vec3::sub(
        vec3::sub(next, d),
        vec3::scale(vec3::cross(mid, w_bar), dt),
    ))
}

#[inline]
pub fn rotate(d: Vec3, w_bar: Vec3, dt: f64) -> Vec3 {
    vec3::mat_vec(&rotation_matrix(w_bar, dt), d)
}

/// Cellwise `d_i ↦ V(w̄_i) d_i` on interior cells; ghosts are refreshed.
pub fn advance_director(d: &CellField, w_bar: &CellField, dt: f64) -> CellField {
    let grid = *d.grid();
    let mut out = CellField::zeros(grid);
    for c in grid.interior() {
        out[c] = rotate(d[c], w_bar[c], dt);
    }
    out.apply_neumann_ghosts();
    out
}
