//! Scenario runner and file utilities behind the `nhosc` binary.

// NaN must fail these checks, so `!(x > 0.0)` is kept over `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod runner;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use nhosc_core::io::{parse_wavefunction_csv, WavefunctionSidecar};
use nhosc_core::numeric::{l2_relative, linf_relative, phase_aligned_l2, WavefunctionGrid};
use nhosc_core::parameters::{pt_classify, ParameterSet, PtClass, VALIDATION_SAMPLES};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use error::{CliError, CliResult};
pub use runner::{run, run_file, RunReport};
pub use scenario::{parse_scenario, Scenario, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareMetrics {
    pub l2_rel: f64,
    pub linf_rel: f64,
    pub phase_aligned_l2: f64,
}

/// Reads a wavefunction dump, taking t from its JSON sidecar when present.
pub fn load_dump(path: &Path) -> CliResult<WavefunctionGrid> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let side = path.with_extension("json");
    let t = match fs::read_to_string(&side) {
        Ok(s) => {
            let meta: WavefunctionSidecar = serde_json::from_str(&s)
                .map_err(|e| CliError::Config(format!("{}: {e}", side.display())))?;
            meta.t
        }
        Err(_) => 0.0,
    };
    Ok(parse_wavefunction_csv(&text, t)?)
}

pub fn compare_dumps(a: &WavefunctionGrid, b: &WavefunctionGrid) -> CliResult<CompareMetrics> {
    if a.t != b.t {
        return Err(nhosc_core::Error::GridMismatch(format!("dumps at t = {} and t = {}", a.t, b.t)).into());
    }
    Ok(CompareMetrics {
        l2_rel: l2_relative(a, b)?,
        linf_rel: linf_relative(a, b)?,
        phase_aligned_l2: phase_aligned_l2(a, b)?,
    })
}

pub fn compare_files(a: &Path, b: &Path) -> CliResult<CompareMetrics> {
    compare_dumps(&load_dump(a)?, &load_dump(b)?)
}

pub fn parse_params(text: &str) -> CliResult<ParameterSet> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn pt_check_file(path: &Path, window: f64) -> CliResult<PtClass> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let params = parse_params(&text)?;
    if !(window > 0.0 && window.is_finite()) {
        return Err(CliError::Config(format!("window must be positive, got {window}")));
    }
    pt_classify(&params, window, VALIDATION_SAMPLES).map_err(|e| CliError::Config(e.to_string()))
}

/// Output directory for one of several scenarios: `out/<file stem>`, or
/// `out` itself when there is only one.
fn scenario_dir(out: &Path, path: &Path, many: bool) -> PathBuf {
    if many {
        out.join(path.file_stem().unwrap_or_default())
    } else {
        out.to_path_buf()
    }
}

/// Runs independent scenario files on up to `jobs` threads. Results come
/// back in input order.
pub fn run_many(paths: &[PathBuf], out: &Path, jobs: usize) -> Vec<CliResult<RunReport>> {
    let many = paths.len() > 1;
    let go = || {
        paths
            .par_iter()
            .map(|p| run_file(p, &scenario_dir(out, p, many)))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(go),
        Err(_) => go(),
    }
}
