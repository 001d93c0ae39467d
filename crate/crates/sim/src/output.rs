//! CSV writers for the energy log and field snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use director_core::diagnostics::DiagnosticsRecord;
use director_core::fem::{cell_average, Triangulation};
use director_core::State;

use crate::error::RunError;

pub const ENERGY_HEADER: &str =
    "step,time,reduced_energy,total_energy,damping_integral,constraint_dev,ortho_dev,alignment,fp_iters,fp_final_norm";
pub const CELL_HEADER: &str = "x,y,d1,d2,d3,w1,w2,w3,Ex_avg,Ey_avg";
pub const NODE_SEPARATOR: &str = "#nodes";
pub const NODE_HEADER: &str = "x,y,phi";

/// 17 significant digits, exact on re-parse.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn energy_row(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.step,
        fmt_f64(r.time),
        fmt_f64(r.reduced_energy),
        fmt_f64(r.total_energy),
        fmt_f64(r.damping_integral),
        fmt_f64(r.constraint_dev),
        fmt_f64(r.ortho_dev),
        fmt_f64(r.alignment),
        r.fp_iters,
        fmt_f64(r.fp_final_norm),
    )
}

/// Streams `energies.csv`, one row per step.
pub struct EnergyLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl EnergyLog {
    pub fn create(path: PathBuf) -> Result<Self, RunError> {
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{ENERGY_HEADER}").map_err(io_err(&path))?;
        Ok(Self { path, out })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> Result<(), RunError> {
        writeln!(self.out, "{}", energy_row(r)).map_err(io_err(&self.path))
    }

    pub fn finish(mut self) -> Result<(), RunError> {
        self.out.flush().map_err(io_err(&self.path))
    }
}

/// File name for the snapshot requested at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.4}.csv")
}

pub fn write_snapshot(path: &Path, state: &State, tri: &Triangulation) -> Result<(), RunError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_snapshot_to(&mut out, state, tri).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

fn write_snapshot_to(
    out: &mut impl Write,
    state: &State,
    tri: &Triangulation,
) -> std::io::Result<()> {
    writeln!(out, "{CELL_HEADER}")?;
    let grid = tri.grid();
    for (i, j) in grid.interior() {
        let [x, y] = grid.cell_center(i, j);
        let d = state.d[(i, j)];
        let w = state.w[(i, j)];
        let e = cell_average(tri, &state.grads, i, j);
        let cols = [x, y, d[0], d[1], d[2], w[0], w[1], w[2], e[0], e[1]].map(fmt_f64);
        writeln!(out, "{}", cols.join(","))?;
    }
    writeln!(out, "{NODE_SEPARATOR}")?;
    writeln!(out, "{NODE_HEADER}")?;
    for (node, phi) in tri.nodes().iter().zip(state.phi.values()) {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(node[0]),
            fmt_f64(node[1]),
            fmt_f64(*phi)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use director_core::experiments::exp2_initial;
    use director_core::{Forcing, GridSpec, Stepper};

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn snapshot_layout() {
        let grid = GridSpec::centered_unit(3).unwrap();
        let params = director_core::experiments::shared_params(3, 1.0, 1.0, 0.5, 1.0);
        let stepper = Stepper::new(grid, params, Forcing::homogeneous()).unwrap();
        let s = stepper.initialize(exp2_initial, |_, _| [0.0; 3]).unwrap();
        let mut buf = Vec::new();
        write_snapshot_to(&mut buf, &s, stepper.triangulation()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CELL_HEADER);
        assert_eq!(lines[10], NODE_SEPARATOR);
        assert_eq!(lines[11], NODE_HEADER);
        assert_eq!(lines.len(), 1 + 9 + 2 + 16);
        assert!(lines[1..10].iter().all(|l| l.split(',').count() == 10));
        assert!(lines[12..].iter().all(|l| l.split(',').count() == 3));
    }
}
