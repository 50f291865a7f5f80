//! Scenario files: parameters, solver configuration and an ordered task list.

use nhosc_core::auxiliary::AuxConfig;
use nhosc_core::numeric::DT_PERIOD_FRACTION;
use nhosc_core::observables::EnergyMethod;
use nhosc_core::parameters::{ParameterSet, PtVerdict, VALIDATION_SAMPLES};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub params: ParameterSet,
    #[serde(default)]
    pub aux_config: AuxConfig,
    #[serde(default)]
    pub grid_config: Option<GridConfig>,
    #[serde(default)]
    pub evolve_config: Option<EvolveConfig>,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub center: f64,
    pub half_width: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Steps between written snapshots; 0 writes only the final state.
    #[serde(default)]
    pub snapshot_every: usize,
}

/// Sample times, either listed or as `count` equally spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::List(v) => v.clone(),
            TimeGrid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*count)
                    .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                    .collect(),
            },
        }
    }
}

fn default_modes() -> Vec<usize> {
    vec![0]
}
fn default_method() -> EnergyMethod {
    EnergyMethod::FiniteDifference
}
fn compare_tol() -> f64 {
    1e-5
}
fn energy_tol() -> f64 {
    1e-7
}
fn kernel_tol() -> f64 {
    1e-6
}
fn samples() -> usize {
    VALIDATION_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    SolveAux,
    /// Crank–Nicolson evolution of ψ_n(t0) over the evolve window.
    Evolve {
        #[serde(default = "default_modes")]
        modes: Vec<usize>,
        #[serde(default)]
        max_norm_drift: Option<f64>,
    },
    /// Closed-form ψ_n against the evolved snapshots of the same mode.
    Compare {
        #[serde(default = "default_modes")]
        modes: Vec<usize>,
        #[serde(default = "compare_tol")]
        tolerance: f64,
    },
    /// ⟨E⟩ of ψ_0, ψ_1 against the closed forms for a linear drive.
    Energy {
        times: TimeGrid,
        #[serde(default = "default_method")]
        method: EnergyMethod,
        #[serde(default = "energy_tol")]
        tolerance: f64,
    },
    RealityScan {
        n_max: usize,
        times: TimeGrid,
        #[serde(default = "default_method")]
        method: EnergyMethod,
    },
    PtCheck {
        window: f64,
        #[serde(default = "samples")]
        samples: usize,
        #[serde(default)]
        expect: Option<PtVerdict>,
    },
    /// Propagates ψ_n(t_from) with the exact kernel and compares with ψ_n(t_to).
    Kernel {
        #[serde(default = "default_modes")]
        modes: Vec<usize>,
        t_from: f64,
        t_to: f64,
        #[serde(default = "kernel_tol")]
        tolerance: f64,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::SolveAux => "solve_aux",
            Task::Evolve { .. } => "evolve",
            Task::Compare { .. } => "compare",
            Task::Energy { .. } => "energy",
            Task::RealityScan { .. } => "reality_scan",
            Task::PtCheck { .. } => "pt_check",
            Task::Kernel { .. } => "kernel",
        }
    }

    fn needs_aux(&self) -> bool {
        !matches!(self, Task::SolveAux | Task::PtCheck { .. })
    }

    fn needs_grid(&self) -> bool {
        matches!(self, Task::Evolve { .. } | Task::Compare { .. } | Task::Kernel { .. })
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn validate(&self) -> CliResult<()> {
        if self.tasks.is_empty() {
            return Err(config("task list is empty"));
        }
        let ev = self.evolve_config;
        if let Some(e) = ev {
            if !(e.t0.is_finite() && e.t1.is_finite() && e.t1 > e.t0) {
                return Err(config(format!("evolve_config needs t1 > t0, got [{}, {}]", e.t0, e.t1)));
            }
            if !(e.dt > 0.0 && e.dt.is_finite()) {
                return Err(config(format!("dt = {} must be positive", e.dt)));
            }
            self.params
                .validate_on((e.t0, e.t1), VALIDATION_SAMPLES)
                .map_err(|e| config(e.to_string()))?;
            let w = self.params.max_omega((e.t0, e.t1)).map_err(|e| config(e.to_string()))?;
            let limit = DT_PERIOD_FRACTION * 2.0 * std::f64::consts::PI / w;
            if e.dt > limit {
                return Err(config(format!("dt = {} exceeds {limit:.3e}", e.dt)));
            }
        }
        if let Some(g) = self.grid_config {
            if !(g.half_width > 0.0 && g.half_width.is_finite() && g.center.is_finite()) {
                return Err(config("grid_config needs a positive half_width"));
            }
            if g.n_points < nhosc_core::numeric::MIN_POINTS {
                return Err(config(format!(
                    "grid_config.n_points must be at least {}",
                    nhosc_core::numeric::MIN_POINTS
                )));
            }
        }

        let mut solved = false;
        let mut evolved: Vec<usize> = Vec::new();
        for (i, task) in self.tasks.iter().enumerate() {
            let at = |msg: &str| config(format!("task {i} ({}): {msg}", task.name()));
            if task.needs_aux() || matches!(task, Task::SolveAux) {
                if ev.is_none() {
                    return Err(at("requires evolve_config"));
                }
                if self.params.real_drive.is_some() {
                    return Err(at("the transformation does not support real_drive"));
                }
            }
            if task.needs_aux() && !solved {
                return Err(at("requires an earlier solve_aux task"));
            }
            if task.needs_grid() && self.grid_config.is_none() {
                return Err(at("requires grid_config"));
            }
            let modes = match task {
                Task::Evolve { modes, .. } | Task::Compare { modes, .. } | Task::Kernel { modes, .. } => modes.as_slice(),
                _ => &[],
            };
            if modes.iter().any(|&n| n > nhosc_core::analytic::MAX_INDEX) {
                return Err(at("mode index too large"));
            }
            let (t0, t1) = ev.map(|e| (e.t0, e.t1)).unwrap_or((0.0, 0.0));
            let inside = |t: f64| t.is_finite() && t >= t0 && t <= t1;
            match task {
                Task::SolveAux => solved = true,
                Task::Evolve { modes, max_norm_drift } => {
                    if modes.is_empty() {
                        return Err(at("modes is empty"));
                    }
                    if matches!(max_norm_drift, Some(d) if !(*d >= 0.0)) {
                        return Err(at("max_norm_drift must be non-negative"));
                    }
                    evolved.extend(modes);
                }
                Task::Compare { modes, tolerance } => {
                    if let Some(n) = modes.iter().find(|n| !evolved.contains(n)) {
                        return Err(at(&format!("mode {n} was not evolved by an earlier task")));
                    }
                    positive(*tolerance).map_err(&at)?;
                }
                Task::Energy { times, tolerance, .. } => {
                    if !times.times().iter().all(|&t| inside(t)) || times.times().is_empty() {
                        return Err(at("times must be non-empty and inside [t0, t1]"));
                    }
                    if nhosc_core::auxiliary::linear_drive_slope(&self.params).is_none() {
                        return Err(at("closed forms need constant m, omega_sq and lambda = a t"));
                    }
                    positive(*tolerance).map_err(&at)?;
                }
                Task::RealityScan { times, n_max, .. } => {
                    if !times.times().iter().all(|&t| inside(t)) || times.times().is_empty() {
                        return Err(at("times must be non-empty and inside [t0, t1]"));
                    }
                    if *n_max > nhosc_core::analytic::MAX_INDEX {
                        return Err(at("n_max too large"));
                    }
                }
                Task::PtCheck { window, samples, .. } => {
                    if !(*window > 0.0 && window.is_finite()) || *samples < 2 {
                        return Err(at("window must be positive and samples at least 2"));
                    }
                }
                Task::Kernel { modes, t_from, t_to, tolerance } => {
                    if !(inside(*t_from) && inside(*t_to)) || modes.is_empty() {
                        return Err(at("t_from and t_to must lie inside [t0, t1]"));
                    }
                    positive(*tolerance).map_err(&at)?;
                }
            }
        }
        Ok(())
    }
}

fn positive(tol: f64) -> Result<(), &'static str> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err("tolerance must be positive")
    }
}
