//! Experiment drivers: efficiency benchmark, phase transition, noise sweep,
//! image deblurring and the property-check suite. Results are CSV tables with
//! a JSON sidecar describing the run.

pub mod check;
pub mod deblur;
pub mod image;
pub mod kernels;
pub mod pgm;
mod runs;
pub mod synthetic;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub use runs::{
    fitted_slope, run_bench, run_noise, run_phase, BenchRow, BenchSpec, NoiseRow, NoiseSpec, PhaseRow, PhaseSpec,
};
pub use synthetic::{parse_algorithms, solve_with, Algorithm, SyntheticProblem, TrialOutcome};

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Fixed-width scientific notation so output bytes do not depend on platform.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6e}")
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    pub sidecar: serde_json::Value,
}

impl Output {
    pub fn new<S: Serialize>(kind: &str, spec: &S, table: Table, extra: serde_json::Value) -> Result<Self> {
        let sidecar = serde_json::json!({
            "experiment": kind,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "spec": serde_json::to_value(spec).map_err(|e| crate::Error::Format(e.to_string()))?,
            "columns": table.header,
            "results": extra,
        });
        Ok(Self { table, sidecar })
    }

    /// Write `<out>` (CSV) and `<out>` with a `.json` extension.
    pub fn write(&self, out: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv = out.to_path_buf();
        let json = sidecar_path(out);
        if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&csv, self.table.to_csv())?;
        let text = serde_json::to_string_pretty(&self.sidecar).map_err(|e| crate::Error::Format(e.to_string()))?;
        std::fs::write(&json, text + "\n")?;
        Ok((csv, json))
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Map in parallel when the `parallel` feature is on; order is preserved.
pub(crate) fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
