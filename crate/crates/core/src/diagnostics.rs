//! Energies, damping, and structural deviation metrics.

use crate::fem::{bilinear_form, cell_average, NodalField, TriangleGradients, Triangulation};
use crate::grid::CellField;
use crate::stepper::{Params, State, StepStats};
use crate::vec3;

/// Cells with `|∇φ|` below this are left out of the alignment mean.
pub const ALIGNMENT_THRESHOLD: f64 = 1e-8;

/// `E = ½ ∫ k |∇ₕd|² + α |w|²`.
pub fn reduced_energy(d: &CellField, w: &CellField, k: f64, alpha: f64) -> f64 {
    0.5 * (k * d.gradient_energy() + alpha * w.l2_norm_sq())
}

/// `Ẽ = E + ∫ |∇φ|² + ε₂ (d·∇φ)²`, the quantity balanced by damping alone
/// when the boundary data and load vanish.
pub fn total_energy(state: &State, tri: &Triangulation, params: &Params) -> f64 {
    reduced_energy(&state.d, &state.w, params.k, params.alpha)
        + bilinear_form(tri, &state.d, params.eps2, &state.grads, &state.grads)
}

/// `Ẽ − ∫ fφ − (1 + ε₁/(2ε₂)) ∫ (∇φ + ε₂ (d·∇φ) d)·∇g̃ₕ`, the energy including
/// data terms. `None` for `ε₂ = 0`, where the coefficient is undefined.
pub fn energy_with_data(
    state: &State,
    tri: &Triangulation,
    params: &Params,
    g: &NodalField,
    f: &dyn Fn(f64, f64) -> f64,
) -> Option<f64> {
    if params.eps2 == 0.0 {
        return None;
    }
    let g_grads = crate::fem::triangle_gradients(tri, g);
    let coupling = bilinear_form(tri, &state.d, params.eps2, &state.grads, &g_grads);
    let mut load = 0.0;
    for (t, nodes) in tri.triangles().iter().enumerate() {
        let c = nodes.map(|n| tri.nodes()[n]);
        let cx = (c[0][0] + c[1][0] + c[2][0]) / 3.0;
        let cy = (c[0][1] + c[1][1] + c[2][1]) / 3.0;
        let phi_c = nodes.iter().map(|&n| state.phi.values()[n]).sum::<f64>() / 3.0;
        load += tri.area(t) * f(cx, cy) * phi_c;
    }
    Some(
        total_energy(state, tri, params)
            - load
            - (1.0 + params.eps1 / (2.0 * params.eps2)) * coupling,
    )
}

/// `β dt ‖(w_old + w_new)/2‖²`.
pub fn damping_increment(w_old: &CellField, w_new: &CellField, beta: f64, dt: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    beta * dt * w_old.midpoint(w_new).l2_norm_sq()
}

/// `|Ẽᵐ⁺¹ − Ẽᵐ + β dt ‖ŵ‖²|` for a step taken with homogeneous data.
pub fn energy_balance_residual(
    old: &State,
    new: &State,
    tri: &Triangulation,
    params: &Params,
) -> f64 {
    let dt = new.time - old.time;
    (total_energy(new, tri, params) - total_energy(old, tri, params)
        + damping_increment(&old.w, &new.w, params.beta, dt))
    .abs()
}

/// `max | |dᵢ| − 1 |` over interior cells.
pub fn constraint_deviation(d: &CellField) -> f64 {
    d.interior_values()
        .map(|v| (vec3::norm(v) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `‖d·w‖_{L²}`.
pub fn orthogonality_deviation(d: &CellField, w: &CellField) -> f64 {
    let g = d.grid();
    let s: f64 = g.interior().map(|c| vec3::dot(d[c], w[c]).powi(2)).sum();
    (s * g.cell_area()).sqrt()
}

/// Mean of `(d·ê)²` with `ê` the embedded unit cell-average gradient, over
/// cells where `|∇φ| > ALIGNMENT_THRESHOLD`. 1 means parallel alignment, 0
/// perpendicular. NaN if no cell qualifies.
pub fn alignment_metric(d: &CellField, tri: &Triangulation, grads: &TriangleGradients) -> f64 {
    let grid = d.grid();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, j) in grid.interior() {
        let e = cell_average(tri, grads, i, j);
        let norm = vec3::dot2(e, e).sqrt();
        if norm > ALIGNMENT_THRESHOLD {
            let c = vec3::dot2(vec3::planar(d[(i, j)]), e) / norm;
            sum += c * c;
            count += 1;
        }
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Running `β ∫₀ᵗ ‖ŵ‖² ds`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DampingIntegral {
    value: f64,
}

impl DampingIntegral {
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Adds one step's contribution and returns the increment.
    pub fn accumulate(&mut self, w_old: &CellField, w_new: &CellField, beta: f64, dt: f64) -> f64 {
        let inc = damping_increment(w_old, w_new, beta, dt);
        self.value += inc;
        inc
    }
}

/// One row of the per-step energy log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub reduced_energy: f64,
    pub total_energy: f64,
    pub damping_integral: f64,
    pub constraint_dev: f64,
    pub ortho_dev: f64,
    pub alignment: f64,
    pub fp_iters: usize,
    pub fp_final_norm: f64,
}

/// Produces a [`DiagnosticsRecord`] per step and carries the damping
/// integral across steps.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    damping: DampingIntegral,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn damping_integral(&self) -> f64 {
        self.damping.value()
    }

    /// Record for the initial state.
    pub fn initial(
        &self,
        state: &State,
        tri: &Triangulation,
        params: &Params,
    ) -> DiagnosticsRecord {
        self.make(state, tri, params, 0, 0.0)
    }

    /// Adds the damping of one (sub)step `w_old → w_new` of length `dt`.
    pub fn accumulate_damping(
        &mut self,
        w_old: &CellField,
        w_new: &CellField,
        beta: f64,
        dt: f64,
    ) -> f64 {
        self.damping.accumulate(w_old, w_new, beta, dt)
    }

    /// Record for `state` with the damping accumulated so far.
    pub fn record(
        &self,
        state: &State,
        tri: &Triangulation,
        params: &Params,
        stats: &StepStats,
    ) -> DiagnosticsRecord {
        self.make(state, tri, params, stats.iterations, stats.final_norm)
    }

    /// Accumulates the damping of the step `prev → state` and records it.
    pub fn after_step(
        &mut self,
        prev: &State,
        state: &State,
        stats: &StepStats,
        tri: &Triangulation,
        params: &Params,
    ) -> DiagnosticsRecord {
        self.accumulate_damping(&prev.w, &state.w, params.beta, state.time - prev.time);
        self.record(state, tri, params, stats)
    }

    fn make(
        &self,
        state: &State,
        tri: &Triangulation,
        params: &Params,
        fp_iters: usize,
        fp_final_norm: f64,
    ) -> DiagnosticsRecord {
        DiagnosticsRecord {
            step: state.step,
            time: state.time,
            reduced_energy: reduced_energy(&state.d, &state.w, params.k, params.alpha),
            total_energy: total_energy(state, tri, params),
            damping_integral: self.damping.value(),
            constraint_dev: constraint_deviation(&state.d),
            ortho_dev: orthogonality_deviation(&state.d, &state.w),
            alignment: alignment_metric(&state.d, tri, &state.grads),
            fp_iters,
            fp_final_norm,
        }
    }
}
