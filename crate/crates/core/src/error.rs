use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 cells per side, got {0}")]
    TooFewCells(usize),
    #[error("side length must be positive and finite, got {0}")]
    BadSideLength(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite along a search direction (pᵀAp = {0:.3e})")]
    Breakdown(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("loss of ellipticity: eps2 = {0} must be greater than -1")]
    LossOfEllipticity(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("loss of ellipticity: eps2 = {0} must be greater than -1")]
    LossOfEllipticity(f64),
    #[error("elastic constant k must be positive, got {0}")]
    NonPositiveElastic(f64),
    #[error("need alpha > 0 with beta >= 0, or beta > 0 with alpha >= 0 (alpha = {alpha}, beta = {beta})")]
    InertiaDamping { alpha: f64, beta: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("CFL violation: dt = {dt:.6e} exceeds kappa * h^theta = {bound:.6e}")]
    Cfl { dt: f64, bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("fixed-point iteration did not meet tolerance {tol:.3e} in {iterations} iterations (last stopping norm {last_norm:.3e})")]
    NotConverged {
        iterations: usize,
        last_norm: f64,
        tol: f64,
    },
    #[error("non-finite values during fixed-point iteration {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Fem(#[from] FemError),
}
