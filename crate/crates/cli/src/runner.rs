//! Executes a scenario's tasks in order and writes their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nhosc_core::analytic::{kernel_apply, psi_n, PropagatorKernel};
use nhosc_core::auxiliary::{linear_drive_slope, solve_auxiliary, AuxiliarySolution, RESIDUAL_LIMITS};
use nhosc_core::io::{
    write_aux_csv, write_energy_csv, write_wavefunction_csv, AuxHeader, EnergySummary,
    WavefunctionSidecar,
};
use nhosc_core::numeric::{
    build_grid, evolve_with_snapshots, l2_relative, linf_relative, phase_aligned_l2, SpatialGrid,
    WavefunctionGrid,
};
use nhosc_core::observables::{printed_gamma, reality_scan, EnergyMethod, DEFAULT_DT_FD};
use nhosc_core::parameters::{pt_classify, ParameterSet};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::scenario::{parse_scenario, EvolveConfig, Scenario, Task};
use crate::CompareMetrics;

/// Margin added to both ends of the transformation window so that
/// finite-difference stencils at t0 and t1 stay inside it.
const AUX_PAD: f64 = 10.0 * DEFAULT_DT_FD;
const GAMMA_SAMPLES: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskStatus {
    pub index: usize,
    pub task: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tasks: Vec<TaskStatus>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &TaskStatus> {
        self.tasks.iter().filter(|t| !t.passed)
    }
}

pub fn params_sha256(params: &ParameterSet) -> String {
    let canonical = serde_json::to_string(params).expect("parameter sets serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn run_file(path: &Path, out_dir: &Path) -> CliResult<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let scenario = parse_scenario(&text)?;
    run(&scenario, out_dir)
}

struct Runner<'a> {
    scenario: &'a Scenario,
    out: &'a Path,
    sha: String,
    aux: Option<AuxiliarySolution>,
    snapshots: BTreeMap<usize, Vec<WavefunctionGrid>>,
}

/// Runs every task, recording failures rather than stopping at the first.
/// Only configuration and file-system problems abort the run.
pub fn run(scenario: &Scenario, out_dir: &Path) -> CliResult<RunReport> {
    scenario.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut runner = Runner {
        scenario,
        out: out_dir,
        sha: params_sha256(&scenario.params),
        aux: None,
        snapshots: BTreeMap::new(),
    };
    let mut statuses = Vec::new();
    for (index, task) in scenario.tasks.iter().enumerate() {
        let (passed, detail) = match runner.task(index, task) {
            Ok(outcome) => outcome,
            Err(CliError::Core(e)) => (false, e.to_string()),
            Err(CliError::TaskFailure { reason, .. }) => (false, reason),
            Err(e) => return Err(e),
        };
        statuses.push(TaskStatus {
            index,
            task: task.name(),
            passed,
            detail,
        });
    }
    let exit_code = if statuses.iter().all(|s| s.passed) { 0 } else { 1 };
    let report = RunReport {
        tasks: statuses,
        exit_code,
    };
    runner.write_validation(&report)?;
    Ok(report)
}

impl Runner<'_> {
    fn params(&self) -> &ParameterSet {
        &self.scenario.params
    }

    fn window(&self) -> EvolveConfig {
        self.scenario.evolve_config.expect("validated")
    }

    fn grid(&self) -> CliResult<SpatialGrid> {
        let g = self.scenario.grid_config.expect("validated");
        Ok(build_grid(g.center, g.half_width, g.n_points)?)
    }

    fn aux(&self) -> &AuxiliarySolution {
        self.aux.as_ref().expect("validated")
    }

    fn path(&self, index: usize, stem: &str, ext: &str) -> PathBuf {
        self.out.join(format!("{index:02}_{stem}.{ext}"))
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    fn write_json(&self, path: &Path, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(path, text.as_bytes())
    }

    fn write_state(&self, index: usize, stem: &str, psi: &WavefunctionGrid, n: usize, source: &str) -> CliResult<()> {
        let mut buf = Vec::new();
        write_wavefunction_csv(psi, &mut buf)?;
        self.write(&self.path(index, stem, "csv"), &buf)?;
        let sidecar = WavefunctionSidecar {
            t: psi.t,
            n: Some(n),
            params_sha256: self.sha.clone(),
            source: source.to_string(),
        };
        self.write_json(&self.path(index, stem, "json"), &sidecar)
    }

    fn mode(&self, n: usize, t: f64, grid: &SpatialGrid) -> CliResult<WavefunctionGrid> {
        let values = grid
            .nodes()
            .iter()
            .map(|&x| psi_n(n, x, t, self.aux(), self.params()))
            .collect::<nhosc_core::Result<Vec<_>>>()?;
        Ok(WavefunctionGrid::new(*grid, values, t)?)
    }

    fn task(&mut self, index: usize, task: &Task) -> CliResult<(bool, String)> {
        match task {
            Task::SolveAux => self.solve_aux(index),
            Task::Evolve { modes, max_norm_drift } => self.evolve(index, modes, *max_norm_drift),
            Task::Compare { modes, tolerance } => self.compare(index, modes, *tolerance),
            Task::Energy { times, method, tolerance } => self.energy(index, &times.times(), *method, *tolerance),
            Task::RealityScan { n_max, times, method } => self.reality(index, *n_max, &times.times(), *method),
            Task::PtCheck { window, samples, expect } => {
                let class = pt_classify(self.params(), *window, *samples)?;
                self.write_json(
                    &self.path(index, "pt_check", "json"),
                    &json!({ "window": window, "samples": samples, "class": class, "expect": expect }),
                )?;
                let passed = expect.is_none_or(|v| v == class.verdict);
                Ok((passed, format!("{:?} (evidence {:.3e})", class.verdict, class.evidence)))
            }
            Task::Kernel { modes, t_from, t_to, tolerance } => self.kernel(index, modes, *t_from, *t_to, *tolerance),
        }
    }

    fn solve_aux(&mut self, index: usize) -> CliResult<(bool, String)> {
        let w = self.window();
        let aux = solve_auxiliary(self.params(), &self.scenario.aux_config, (w.t0 - AUX_PAD, w.t1 + AUX_PAD))?;
        let mut buf = Vec::new();
        write_aux_csv(&aux, &mut buf)?;
        self.write(&self.path(index, "aux", "csv"), &buf)?;
        let r = aux.max_residuals(self.params())?;
        let passed = r.c1 < RESIDUAL_LIMITS.0 && r.c2 < RESIDUAL_LIMITS.1 && r.c3 < RESIDUAL_LIMITS.2;
        self.write_json(
            &self.path(index, "aux", "json"),
            &json!({
                "header": AuxHeader::of(&aux),
                "max_residuals": r,
                "limits": { "c1": RESIDUAL_LIMITS.0, "c2": RESIDUAL_LIMITS.1, "c3": RESIDUAL_LIMITS.2 },
                "passed": passed,
            }),
        )?;
        self.aux = Some(aux);
        Ok((passed, format!("residuals c1 {:.2e}, c2 {:.2e}, c3 {:.2e}", r.c1, r.c2, r.c3)))
    }

    fn evolve(&mut self, index: usize, modes: &[usize], max_drift: Option<f64>) -> CliResult<(bool, String)> {
        let w = self.window();
        let grid = self.grid()?;
        let mut passed = true;
        let mut details = Vec::new();
        let mut summary = Vec::new();
        for &n in modes {
            let psi0 = self.mode(n, w.t0, &grid)?;
            let mut snaps = vec![psi0.clone()];
            evolve_with_snapshots(&psi0, self.params(), w.t1, w.dt, w.snapshot_every, |s| {
                snaps.push(s.clone());
                Ok(())
            })?;
            let n0 = psi0.norm_sq();
            let mut drift: f64 = 0.0;
            let mut rows = Vec::new();
            for (k, s) in snaps.iter().enumerate() {
                self.write_state(index, &format!("evolve_n{n}_{k:04}"), s, n, "crank_nicolson")?;
                drift = drift.max((s.norm_sq() / n0 - 1.0).abs());
                rows.push(json!({ "t": s.t, "norm_sq": s.norm_sq(), "boundary_ratio": s.boundary_ratio() }));
            }
            if let Some(limit) = max_drift {
                passed &= drift < limit;
            }
            details.push(format!("n={n}: norm drift {drift:.3e}"));
            summary.push(json!({ "n": n, "max_norm_drift": drift, "snapshots": rows }));
            self.snapshots.insert(n, snaps);
        }
        self.write_json(
            &self.path(index, "evolve", "json"),
            &json!({ "dt": w.dt, "max_norm_drift_limit": max_drift, "modes": summary, "passed": passed }),
        )?;
        Ok((passed, details.join(", ")))
    }

    fn compare(&self, index: usize, modes: &[usize], tolerance: f64) -> CliResult<(bool, String)> {
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for &n in modes {
            let snaps = &self.snapshots[&n];
            for (k, s) in snaps.iter().enumerate().skip(1) {
                let exact = self.mode(n, s.t, &s.grid)?;
                self.write_state(index, &format!("analytic_n{n}_{k:04}"), &exact, n, "analytic")?;
                let m = CompareMetrics {
                    l2_rel: l2_relative(s, &exact)?,
                    linf_rel: linf_relative(s, &exact)?,
                    phase_aligned_l2: phase_aligned_l2(s, &exact)?,
                };
                worst = worst.max(m.l2_rel);
                rows.push(json!({ "n": n, "t": s.t, "metrics": m }));
            }
        }
        let passed = worst < tolerance;
        self.write_json(
            &self.path(index, "compare", "json"),
            &json!({ "tolerance": tolerance, "max_l2_rel": worst, "rows": rows, "passed": passed }),
        )?;
        Ok((passed, format!("max l2_rel {worst:.3e} (limit {tolerance:.1e})")))
    }

    fn energy(&self, index: usize, times: &[f64], method: EnergyMethod, tolerance: f64) -> CliResult<(bool, String)> {
        let report = reality_scan(1, times, self.params(), self.aux(), method)?;
        let mut buf = Vec::new();
        write_energy_csv(&report, &mut buf)?;
        self.write(&self.path(index, "energy", "csv"), &buf)?;
        let mut worst: f64 = 0.0;
        let mut worst_printed: f64 = 0.0;
        for r in &report.rows {
            let derived = r.closed_derived.ok_or_else(|| CliError::TaskFailure {
                task: "energy".into(),
                reason: "closed form unavailable".into(),
            })?;
            worst = worst.max((r.energy - derived).norm());
            if let Some(p) = r.closed_printed {
                worst_printed = worst_printed.max((r.energy.re - p).abs());
            }
        }
        let passed = worst < tolerance;
        self.write_json(
            &self.path(index, "energy", "json"),
            &json!({
                "method": method,
                "tolerance": tolerance,
                "max_abs_error_derived": worst,
                "max_abs_error_printed": worst_printed,
                "passed": passed,
            }),
        )?;
        Ok((passed, format!("max |E - E_closed| {worst:.3e} (limit {tolerance:.1e})")))
    }

    fn reality(&self, index: usize, n_max: usize, times: &[f64], method: EnergyMethod) -> CliResult<(bool, String)> {
        let report = reality_scan(n_max, times, self.params(), self.aux(), method)?;
        let mut buf = Vec::new();
        write_energy_csv(&report, &mut buf)?;
        self.write(&self.path(index, "reality", "csv"), &buf)?;
        let summary = EnergySummary::of(&report);
        self.write_json(&self.path(index, "reality", "json"), &summary)?;
        Ok((
            report.passes(),
            format!("max_imag_rel {:.3e} (limit {:.1e})", summary.max_imag_rel, summary.tolerance),
        ))
    }

    fn kernel(&self, index: usize, modes: &[usize], t_from: f64, t_to: f64, tolerance: f64) -> CliResult<(bool, String)> {
        let grid = self.grid()?;
        let k = PropagatorKernel::new(self.aux(), self.params());
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for &n in modes {
            let start = self.mode(n, t_from, &grid)?;
            let out = kernel_apply(&k, &start, t_to)?;
            self.write_state(index, &format!("kernel_n{n}"), &out, n, "kernel")?;
            let exact = self.mode(n, t_to, &grid)?;
            let err = l2_relative(&out, &exact)?;
            worst = worst.max(err);
            rows.push(json!({ "n": n, "l2_rel": err }));
        }
        let passed = worst < tolerance;
        self.write_json(
            &self.path(index, "kernel", "json"),
            &json!({ "t_from": t_from, "t_to": t_to, "tolerance": tolerance, "rows": rows, "passed": passed }),
        )?;
        Ok((passed, format!("max l2_rel {worst:.3e} (limit {tolerance:.1e})")))
    }

    /// Records which phase integral and kernel conventions were used, and
    /// whether the printed γ(t) reproduces the energy expectation.
    fn gamma_check(&self) -> CliResult<serde_json::Value> {
        let (Some(aux), Some((m, w, a))) = (&self.aux, linear_drive_slope(self.params())) else {
            return Ok(serde_json::Value::Null);
        };
        let win = self.window();
        let hbar = self.params().hbar;
        let mut gap: f64 = 0.0;
        for i in 0..GAMMA_SAMPLES {
            let t = win.t0 + (win.t1 - win.t0) * i as f64 / (GAMMA_SAMPLES - 1) as f64;
            let st = aux.state_at(self.params(), t)?;
            gap = gap.max((st.f_integral_dot + hbar * printed_gamma(t, m, w, a, hbar).1).abs());
        }
        Ok(json!({
            "resolution": "quadrature-derived phase integral",
            "phase_integral": "F(t) = -(a^2 t / (2 m w^4)) (1 + w^2 t^2 / 3)",
            "printed_gamma": "a^2 t / (2 hbar m w^4) (1 - w^2 t^2 / 3)",
            "max_abs_dF_plus_hbar_dgamma": gap,
            "printed_gamma_reproduces_energy": gap < 1e-12 * (1.0 + a * a),
        }))
    }

    fn write_validation(&self, report: &RunReport) -> CliResult<()> {
        let value = json!({
            "scenario": self.scenario.name,
            "params_sha256": self.sha,
            "exit_code": report.exit_code,
            "tasks": report.tasks,
            "gamma_sign": self.gamma_check().unwrap_or(serde_json::Value::Null),
            "conventions": {
                "eta_equation": "d/dt(m eta') = -(m omega^2 eta + lambda)",
                "wavefunction": "psi_n = exp(i f) s^(-1/2) sqrt(beta) phi_n(beta y) exp(-i (n + 1/2) omega0 tau), f unconjugated",
                "kernel": "K = exp(i f(y)) K_osc(y, y0) exp(-i f(y0)) / s0, Feynman form with Maslov phase exp(-i k pi / 2), k = floor(theta / pi)",
                "tau_origin": "tau(t_a) = t_a and F(t_a) = 0 at the start of the transformation window",
                "aux_window_pad": AUX_PAD,
            },
        });
        self.write_json(&self.out.join("validation.json"), &value)
    }
}
