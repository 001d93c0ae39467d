//! Simulation loop: stepping with one retry, diagnostics, and outputs.

use std::path::{Path, PathBuf};

use director_core::diagnostics::{DiagnosticsRecord, Recorder};
use director_core::stepper::cfl_check;
use director_core::{State, StepError, StepStats, Stepper};

use crate::config::RunConfig;
use crate::error::{ConfigError, RunError};
use crate::output::{io_err, snapshot_name, write_snapshot, EnergyLog};

pub const MANIFEST_FILE: &str = "manifest.cfg";
pub const ENERGY_FILE: &str = "energies.csv";

/// Advances one step of the stepper's `dt`. A failed step is retried once
/// as two substeps of `dt/2`. Damping is accumulated into `recorder` per
/// substep actually taken. Returns the new state, the statistics of the
/// last successful solve, and whether the retry was used.
pub fn advance(
    stepper: &Stepper,
    state: &State,
    recorder: &mut Recorder,
) -> Result<(State, StepStats, bool), StepError> {
    let beta = stepper.params().beta;
    match stepper.step(state) {
        Ok((next, stats)) => {
            recorder.accumulate_damping(&state.w, &next.w, beta, next.time - state.time);
            Ok((next, stats, false))
        }
        Err(_) => {
            let half = stepper.with_dt(stepper.params().dt / 2.0);
            let (mid, s1) = half.step(state)?;
            let (mut next, mut s2) = half.step(&mid)?;
            let mut trial = recorder.clone();
            trial.accumulate_damping(&state.w, &mid.w, beta, mid.time - state.time);
            trial.accumulate_damping(&mid.w, &next.w, beta, next.time - mid.time);
            *recorder = trial;
            next.step = state.step + 1;
            s2.iterations += s1.iterations;
            s2.cg_iterations += s1.cg_iterations;
            Ok((next, s2, true))
        }
    }
}

/// Runs `steps` steps from `init`, calling `observe` after each. Returns
/// the records of the initial state and of every step.
pub fn simulate<F>(
    stepper: &Stepper,
    init: State,
    steps: usize,
    mut observe: F,
) -> Result<Vec<DiagnosticsRecord>, RunError>
where
    F: FnMut(&State, &StepStats, &DiagnosticsRecord) -> Result<(), RunError>,
{
    let tri = stepper.triangulation();
    let params = stepper.params();
    let mut recorder = Recorder::new();
    let mut records = Vec::with_capacity(steps + 1);
    let first = recorder.initial(&init, tri, params);
    observe(&init, &StepStats::default(), &first)?;
    records.push(first);
    let mut state = init;
    for _ in 0..steps {
        let (next, stats, _) =
            advance(stepper, &state, &mut recorder).map_err(|source| RunError::Step {
                step: state.step + 1,
                time: state.time,
                source,
            })?;
        let rec = recorder.record(&next, tri, params, &stats);
        observe(&next, &stats, &rec)?;
        records.push(rec);
        state = next;
    }
    Ok(records)
}

/// Builds the stepper for a resolved configuration. Parameter violations
/// map to configuration errors.
pub fn build_stepper(config: &RunConfig) -> Result<Stepper, RunError> {
    let grid = config
        .preset
        .grid(config.n)
        .map_err(|_| ConfigError::BadValue {
            key: "n",
            value: config.n.to_string(),
        })?;
    Stepper::new(grid, config.params.clone(), config.preset.forcing())
        .map_err(|e| RunError::Config(ConfigError::Params(e)))
}

/// Message for a step above `κ h^θ`, if any.
pub fn cfl_warning(config: &RunConfig) -> Option<String> {
    let grid = config.preset.grid(config.n).ok()?;
    let cfl = cfl_check(&config.params, &grid);
    (!cfl.passed).then(|| {
        format!(
            "dt = {:e} exceeds the CFL bound {:e}; the fixed-point iteration may not contract",
            cfl.dt, cfl.bound
        )
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub steps: usize,
    pub final_time: f64,
    pub snapshots: Vec<PathBuf>,
    pub last: DiagnosticsRecord,
}

/// Full run: manifest, `energies.csv`, and snapshots at the first step
/// whose time reaches each scheduled time.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let stepper = build_stepper(config)?;

    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let manifest = out_dir.join(MANIFEST_FILE);
    std::fs::write(&manifest, config.to_manifest()).map_err(io_err(&manifest))?;

    let init = stepper
        .initialize(
            config.preset.initial_director(),
            config.preset.initial_momentum(),
        )
        .map_err(RunError::Init)?;
    let mut log = EnergyLog::create(out_dir.join(ENERGY_FILE))?;
    let dt = stepper.params().dt;
    let mut pending = config.snapshots.iter().copied().peekable();
    let mut written = Vec::new();
    let steps = stepper.params().num_steps();
    let tri = stepper.triangulation();

    let records = simulate(&stepper, init, steps, |state, _, rec| {
        log.push(rec)?;
        while let Some(&t) = pending.peek() {
            if state.time + 1e-9 * dt < t {
                break;
            }
            let path = out_dir.join(snapshot_name(t));
            write_snapshot(&path, state, tri)?;
            written.push(path);
            pending.next();
        }
        Ok(())
    })?;
    log.finish()?;
    let last = *records.last().expect("initial record is always present");
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        steps,
        final_time: last.time,
        snapshots: written,
        last,
    })
}
