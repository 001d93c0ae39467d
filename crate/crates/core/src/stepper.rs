//! Time stepping of the coupled director / angular momentum / potential
//! system by the implicit midpoint scheme, solved with a fixed-point
//! iteration on the angular momentum.

use std::fmt;
use std::sync::Arc;

use crate::coupling::source_term;
use crate::error::{ParamError, StepError};
use crate::fem::{
    assemble_system, solve_potential, triangle_gradients, NodalField, TriangleGradients,
    Triangulation,
};
use crate::grid::{CellField, GridSpec};
use crate::rotation::advance_director;
use crate::sparse::CgOptions;
use crate::vec3::{self, Vec3};

/// Space-time scalar function `(t, x, y) ↦ value`.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// What to do when `dt > κ h^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CflMode {
    Off,
    Warn,
    Fail,
}

impl fmt::Display for CflMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CflMode::Off => "off",
            CflMode::Warn => "warn",
            CflMode::Fail => "fail",
        })
    }
}

impl std::str::FromStr for CflMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(CflMode::Off),
            "warn" => Ok(CflMode::Warn),
            "fail" => Ok(CflMode::Fail),
            other => Err(format!(
                "unknown CFL mode {other:?} (expected off, warn or fail)"
            )),
        }
    }
}

/// Model and scheme constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Inertia coefficient in front of `d_tt`.
    pub alpha: f64,
    /// Damping coefficient.
    pub beta: f64,
    /// Elastic constant of the one-constant energy.
    pub k: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub dt: f64,
    /// Fixed-point stopping tolerance.
    pub fp_tol: f64,
    pub max_fp_iters: usize,
    pub cfl_kappa: f64,
    /// CFL exponent `max(1, n/2)`; 1 in two dimensions.
    pub theta: f64,
    pub cfl_mode: CflMode,
    pub final_time: f64,
    /// Relative CG tolerance; `None` means `min(1e-10, fp_tol / 100)`.
    pub solver_tol: Option<f64>,
}

impl Params {
    pub fn effective_solver_tol(&self) -> f64 {
        self.solver_tol
            .unwrap_or_else(|| (self.fp_tol / 100.0).min(1e-10))
    }

    /// Number of steps `⌈T / dt⌉` needed to reach the final time.
    pub fn num_steps(&self) -> usize {
        let r = self.final_time / self.dt;
        // Guard against T/dt landing a hair above an integer.
        let nearest = r.round();
        if (r - nearest).abs() <= 1e-9 * r.max(1.0) {
            nearest as usize
        } else {
            r.ceil() as usize
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<(), ParamError> {
        if self.eps2.is_nan() || self.eps2 <= -1.0 {
            return Err(ParamError::LossOfEllipticity(self.eps2));
        }
        if self.k.is_nan() || self.k <= 0.0 {
            return Err(ParamError::NonPositiveElastic(self.k));
        }
        let inertial = self.alpha > 0.0 && self.beta >= 0.0;
        let damped = self.beta > 0.0 && self.alpha >= 0.0;
        if !(inertial || damped) {
            return Err(ParamError::InertiaDamping {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        for (name, value) in [
            ("dt", self.dt),
            ("fp_tol", self.fp_tol),
            ("final_time", self.final_time),
            ("cfl_kappa", self.cfl_kappa),
            ("theta", self.theta),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        if self.max_fp_iters == 0 {
            return Err(ParamError::NotPositive {
                name: "max_fp_iters",
                value: 0.0,
            });
        }
        if let Some(tol) = self.solver_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(ParamError::NotPositive {
                    name: "solver_tol",
                    value: tol,
                });
            }
        }
        let report = cfl_check(self, grid);
        if self.cfl_mode == CflMode::Fail && !report.passed {
            return Err(ParamError::Cfl {
                dt: report.dt,
                bound: report.bound,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    pub dt: f64,
    /// `κ h^θ`.
    pub bound: f64,
    /// `bound − dt`; negative on violation.
    pub margin: f64,
    pub passed: bool,
}

/// Compares `dt` against `κ h^θ`. Reporting only; see [`Params::validate`]
/// for enforcement.
pub fn cfl_check(params: &Params, grid: &GridSpec) -> CflReport {
    let bound = params.cfl_kappa * grid.h().powf(params.theta);
    CflReport {
        dt: params.dt,
        bound,
        margin: bound - params.dt,
        passed: params.dt <= bound,
    }
}

/// Dirichlet data `g̃(t, x, y)` and load `f(t, x, y)` of the potential
/// equation.
#[derive(Clone)]
pub struct Forcing {
    pub boundary: SpaceTimeFn,
    pub source: SpaceTimeFn,
}

impl Forcing {
    pub fn homogeneous() -> Self {
        Self {
            boundary: Arc::new(|_, _, _| 0.0),
            source: Arc::new(|_, _, _| 0.0),
        }
    }

    pub fn with_boundary(boundary: SpaceTimeFn) -> Self {
        Self {
            boundary,
            source: Arc::new(|_, _, _| 0.0),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Forcing { .. }")
    }
}

/// Discrete solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub step: usize,
    pub time: f64,
    pub d: CellField,
    pub w: CellField,
    pub phi: NodalField,
    pub grads: TriangleGradients,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub final_norm: f64,
    /// Stopping norm after each iteration.
    pub norms: Vec<f64>,
    pub cg_iterations: usize,
}

impl StepStats {
    /// Ratios of successive stopping norms.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.norms.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Geometric-mean contraction ratio, `None` with fewer than two norms or
    /// when the iteration reached an exact fixed point.
    pub fn mean_ratio(&self) -> Option<f64> {
        let n = self.norms.len();
        if n < 2 || self.norms[0] <= 0.0 || self.norms[n - 1] <= 0.0 {
            return None;
        }
        Some((self.norms[n - 1] / self.norms[0]).powf(1.0 / (n - 1) as f64))
    }
}

/// Owns the discretization and advances states.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: GridSpec,
    tri: Arc<Triangulation>,
    params: Params,
    forcing: Forcing,
}

impl Stepper {
    pub fn new(grid: GridSpec, params: Params, forcing: Forcing) -> Result<Self, ParamError> {
        params.validate(&grid)?;
        Ok(Self {
            grid,
            tri: Arc::new(Triangulation::new(grid)),
            params,
            forcing,
        })
    }

    /// Same discretization with a different time step. Skips CFL
    /// enforcement, which only tightens with a smaller step.
    pub fn with_dt(&self, dt: f64) -> Self {
        let mut params = self.params.clone();
        params.dt = dt;
        Self {
            grid: self.grid,
            tri: Arc::clone(&self.tri),
            params,
            forcing: self.forcing.clone(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn boundary_at(&self, t: f64) -> NodalField {
        let g = &self.forcing.boundary;
        NodalField::interpolate(&self.tri, |x, y| g(t, x, y))
    }

    fn cg_options(&self) -> CgOptions {
        CgOptions {
            rel_tol: self.params.effective_solver_tol(),
            max_iter: (10 * self.tri.num_unknowns()).max(1000),
            jacobi: false,
        }
    }

    fn solve_phi(
        &self,
        d: &CellField,
        t: f64,
        warm: Option<&NodalField>,
    ) -> Result<(NodalField, TriangleGradients, usize), StepError> {
        let g = self.boundary_at(t);
        let f = &self.forcing.source;
        let system = assemble_system(&self.tri, d, self.params.eps2, &g, &|x, y| f(t, x, y))?;
        let (phi, report) = solve_potential(&self.tri, &system, &g, &self.cg_options(), warm)?;
        let grads = triangle_gradients(&self.tri, &phi);
        Ok((phi, grads, report.iterations))
    }

    /// Samples the initial director (normalized) and angular momentum at
    /// cell centers and solves for the initial potential.
    pub fn initialize(
        &self,
        d0: impl Fn(f64, f64) -> Vec3,
        w0: impl Fn(f64, f64) -> Vec3,
    ) -> Result<State, StepError> {
        let d = CellField::from_fn(self.grid, |x, y| {
            let v = d0(x, y);
            vec3::scale(v, 1.0 / vec3::norm(v))
        });
        let w = CellField::from_fn(self.grid, w0);
        self.state_from_fields(d, w, 0.0)
    }

    /// Builds a state from given cell fields by solving for the potential
    /// at time `t`.
    pub fn state_from_fields(
        &self,
        mut d: CellField,
        mut w: CellField,
        t: f64,
    ) -> Result<State, StepError> {
        d.apply_neumann_ghosts();
        w.apply_neumann_ghosts();
        let (phi, grads, _) = self.solve_phi(&d, t, None)?;
        Ok(State {
            step: 0,
            time: t,
            d,
            w,
            phi,
            grads,
        })
    }

    /// Advances one step by fixed-point iteration on the angular momentum.
    ///
    /// Iterate `s`: rotate `dᵐ` by the averaged momentum `(wᵐ + wˢ)/2`,
    /// solve for the potential with the rotated director and data at
    /// `tᵐ⁺¹`, then update `w` in closed form from the midpoint director,
    /// its Laplacian and the electric torque. Stops once
    /// `‖Δw‖ + ‖∇ₕΔd‖ + ‖Δ∇φ‖ < fp_tol` between consecutive iterates.
    pub fn step(&self, state: &State) -> Result<(State, StepStats), StepError> {
        let p = &self.params;
        let dt = p.dt;
        let t_next = state.time + dt;
        let lhs = p.alpha / dt + 0.5 * p.beta;
        let w_old_coeff = (p.alpha / dt - 0.5 * p.beta) / lhs;
        let inv_lhs = 1.0 / lhs;

        let mut w_iter = state.w.clone();
        let mut d_iter = state.d.clone();
        let mut phi_iter = state.phi.clone();
        let mut grads_iter = state.grads.clone();
        let mut stats = StepStats::default();

        for s in 0..p.max_fp_iters {
            let w_bar = state.w.midpoint(&w_iter);
            let d_new = advance_director(&state.d, &w_bar, dt);
            let (phi_new, grads_new, cg_its) = self.solve_phi(&d_new, t_next, Some(&phi_iter))?;
            stats.cg_iterations += cg_its;

            let d_half = state.d.midpoint(&d_new);
            let lap = d_half.laplacian();
            let source = source_term(&self.tri, &state.grads, &grads_new, &d_half, p.eps1);
            let mut w_new = CellField::zeros(self.grid);
            for c in self.grid.interior() {
                let dh = d_half[c];
                let torque = vec3::cross(vec3::add(vec3::scale(lap[c], p.k), source[c]), dh);
                w_new[c] = vec3::add(
                    vec3::scale(state.w[c], w_old_coeff),
                    vec3::scale(torque, inv_lhs),
                );
            }
            w_new.apply_neumann_ghosts();

            let norm = w_new.l2_distance(&w_iter)
                + d_new.gradient_distance(&d_iter)
                + grads_new.l2_distance(&grads_iter, &self.tri);
            if !norm.is_finite() {
                return Err(StepError::NonFinite(s + 1));
            }
            stats.norms.push(norm);
            stats.iterations = s + 1;
            stats.final_norm = norm;

            if norm < p.fp_tol {
                let next = State {
                    step: state.step + 1,
                    time: t_next,
                    d: d_new,
                    w: w_new,
                    phi: phi_new,
                    grads: grads_new,
                };
                return Ok((next, stats));
            }
            w_iter = w_new;
            d_iter = d_new;
            phi_iter = phi_new;
            grads_iter = grads_new;
        }
        Err(StepError::NotConverged {
            iterations: p.max_fp_iters,
            last_norm: stats.final_norm,
            tol: p.fp_tol,
        })
    }
}
