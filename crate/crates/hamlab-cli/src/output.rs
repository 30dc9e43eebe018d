//! Report emission: deterministic CSV and JSON bodies, written to a file or
//! standard output. All floating-point cells carry 17 significant digits so
//! a round trip through the text is exact.

use std::path::PathBuf;

use serde::Serialize;

use hamlab::integrate::Trajectory;
use hamlab::isochrony::PeriodTable;
use hamlab::probe::{CascadeCertificate, ProbeReport};

/// How a command failed, mapped onto the exit-status contract.
#[derive(Debug)]
pub enum Failure {
    /// Bad request: exits 2 with a message on standard error.
    Usage(String),
    /// The computation itself broke down: exits 3 with a JSON body.
    Numerical(String),
    /// Filesystem trouble: exits 1.
    Io(String),
}

impl From<hamlab::Error> for Failure {
    fn from(e: hamlab::Error) -> Self {
        use hamlab::Error::*;
        match e {
            UnknownSystem(_) | InvalidParameter(_) | DimensionMismatch { .. }
            | AmplitudeOutOfRange { .. } => Failure::Usage(e.to_string()),
            RootFinderDivergence { .. } | NoReturn { .. } | QuadratureFailure(_)
            | Numerical(_) | EarlyTermination(_) => Failure::Numerical(e.to_string()),
        }
    }
}

/// Serializes with stable field order and a trailing newline.
pub fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    s.push('\n');
    s
}

/// Writes the body to `out`, or to standard output when no path was given.
pub fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Header `t,q1,..,qn,p1,..,pn,H`, one row per stored step.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let dof = tr.states.first().map_or(0, |s| s.dof());
    let mut s = String::from("t");
    for i in 1..=dof {
        s.push_str(&format!(",q{i}"));
    }
    for i in 1..=dof {
        s.push_str(&format!(",p{i}"));
    }
    s.push_str(",H\n");
    for ((t, x), h) in tr.times.iter().zip(&tr.states).zip(&tr.energies) {
        s.push_str(&format!("{t:.16e}"));
        for c in &x.coords {
            s.push_str(&format!(",{c:.16e}"));
        }
        s.push_str(&format!(",{h:.16e}\n"));
    }
    s
}

/// One row per shrinking offset; the escape time is empty for bounded runs.
pub fn probe_csv(report: &ProbeReport) -> String {
    let mut s = String::from("epsilon,escaped,escape_time\n");
    for run in &report.runs {
        let time = run
            .escape_time
            .map(|t| format!("{t:.16e}"))
            .unwrap_or_default();
        s.push_str(&format!("{:.16e},{},{time}\n", run.epsilon, run.escaped));
    }
    s
}

/// One row per cascade stage.
pub fn certificate_csv(cert: &CascadeCertificate) -> String {
    let mut s = String::from("stage,pinned,max_residual,conserved\n");
    for stage in &cert.stages {
        let pinned = stage
            .pinned
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push_str(&format!(
            "{},{pinned},{:.16e},{}\n",
            stage.label, stage.max_residual, stage.conserved
        ));
    }
    s
}

/// Schema `amplitude,period,method`; the period is the return-time value.
pub fn period_csv(table: &PeriodTable) -> String {
    let mut s = String::from("amplitude,period,method\n");
    for (a, t) in table.amplitudes.iter().zip(&table.periods) {
        s.push_str(&format!("{a:.16e},{t:.16e},{}\n", table.method));
    }
    s
}
