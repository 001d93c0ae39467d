//! The two reference experiments: alignment of a uniform in-plane director
//! with an oscillating field, and relaxation of a concentrated bubble
//! profile that develops steep gradients.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::GridError;
use crate::grid::GridSpec;
use crate::stepper::{CflMode, Forcing, Params};
use crate::vec3::Vec3;

pub const DEFAULT_CELLS: usize = 64;
pub const ALPHA: f64 = 0.5;
pub const K: f64 = 1.0;
/// CFL constant used by the presets; above the presets' `dt / h ≈ 0.0707`.
pub const DEFAULT_CFL_KAPPA: f64 = 0.1;
pub const DEFAULT_MAX_FP_ITERS: usize = 100;

/// Boundary potential `g̃(t, x, y) = 10 sin(2πt + 0.2)(x + 0.5) sin(πy)`.
pub fn boundary_potential(t: f64, x: f64, y: f64) -> f64 {
    10.0 * (2.0 * PI * t + 0.2).sin() * (x + 0.5) * (PI * y).sin()
}

/// Time step `h sqrt(βh² + α) / 10`.
pub fn preset_dt(h: f64, beta: f64, alpha: f64) -> f64 {
    h * (beta * h * h + alpha).sqrt() / 10.0
}

/// Parameters shared by all experiments on an `n × n` grid of `[-0.5, 0.5]²`:
/// `α = 1/2`, `k = 1`, fixed-point tolerance `h²/20`, `dt = h sqrt(βh² + α)/10`.
pub fn shared_params(n: usize, beta: f64, eps1: f64, eps2: f64, final_time: f64) -> Params {
    let h = 1.0 / n as f64;
    Params {
        alpha: ALPHA,
        beta,
        k: K,
        eps1,
        eps2,
        dt: preset_dt(h, beta, ALPHA),
        fp_tol: h * h / 20.0,
        max_fp_iters: DEFAULT_MAX_FP_ITERS,
        cfl_kappa: DEFAULT_CFL_KAPPA,
        theta: 1.0,
        cfl_mode: CflMode::Warn,
        final_time,
        solver_tol: None,
    }
}

/// Uniform in-plane director `(1, 1, 0)/√2`.
pub fn exp1_initial(_x: f64, _y: f64) -> Vec3 {
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]
}

/// Bubble profile: `(0, 0, −1)` for `r ≥ 1/2`, otherwise
/// `(2xa, 2ya, a² − r²)/(a² + r²)` with `a = (1 − 2r)⁴`.
pub fn exp2_initial(x: f64, y: f64) -> Vec3 {
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    if r >= 0.5 {
        return [0.0, 0.0, -1.0];
    }
    let a = (1.0 - 2.0 * r).powi(4);
    let denom = a * a + r2;
    [
        2.0 * x * a / denom,
        2.0 * y * a / denom,
        (a * a - r2) / denom,
    ]
}

pub fn zero_momentum(_x: f64, _y: f64) -> Vec3 {
    [0.0; 3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Exp1Pos,
    Exp1Neg,
    Exp2LowDamp,
    Exp2HighDamp,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Exp1Pos,
        Preset::Exp1Neg,
        Preset::Exp2LowDamp,
        Preset::Exp2HighDamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Exp1Pos => "exp1_pos",
            Preset::Exp1Neg => "exp1_neg",
            Preset::Exp2LowDamp => "exp2_lowdamp",
            Preset::Exp2HighDamp => "exp2_highdamp",
        }
    }

    /// `(β, ε₁, ε₂, T)`.
    fn constants(self) -> (f64, f64, f64, f64) {
        match self {
            Preset::Exp1Pos => (2.0, 5.0, 0.5, 2.0),
            Preset::Exp1Neg => (2.0, -5.0, -0.5, 2.0),
            Preset::Exp2LowDamp => (0.5, -5.0, -0.5, 1.0),
            Preset::Exp2HighDamp => (3.0, -5.0, -0.5, 1.0),
        }
    }

    pub fn params(self, n: usize) -> Params {
        let (beta, eps1, eps2, t) = self.constants();
        shared_params(n, beta, eps1, eps2, t)
    }

    pub fn grid(self, n: usize) -> Result<GridSpec, GridError> {
        GridSpec::centered_unit(n)
    }

    pub fn initial_director(self) -> fn(f64, f64) -> Vec3 {
        match self {
            Preset::Exp1Pos | Preset::Exp1Neg => exp1_initial,
            Preset::Exp2LowDamp | Preset::Exp2HighDamp => exp2_initial,
        }
    }

    pub fn initial_momentum(self) -> fn(f64, f64) -> Vec3 {
        zero_momentum
    }

    pub fn forcing(self) -> Forcing {
        Forcing::with_boundary(Arc::new(boundary_potential))
    }

    /// Figure times.
    pub fn snapshot_times(self) -> Vec<f64> {
        match self {
            Preset::Exp1Pos | Preset::Exp1Neg => vec![0.25, 0.5, 2.0],
            Preset::Exp2LowDamp | Preset::Exp2HighDamp => vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!("unknown preset {s:?}; expected one of {}", names.join(", "))
            })
    }
}
