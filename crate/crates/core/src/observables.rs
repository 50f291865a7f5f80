//! Overlaps, norms and the energy expectation value
//! ⟨E⟩ = ∫ψ* iħ∂ₜψ dx / ∫ψ*ψ dx, kept complex.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{psi_n_at_state, psi_n_time_derivative};
use crate::auxiliary::{linear_drive_slope, AuxState, AuxiliarySolution};
use crate::error::{Error, Result};
use crate::numeric::{build_grid, evolve, SpatialGrid, WavefunctionGrid};
use crate::parameters::ParameterSet;

/// Reality criterion on max |Im E| / (|Re E| + ħω₀).
pub const REALITY_TOLERANCE: f64 = 1e-7;
/// Nodes of the quadrature window used for analytic energies.
pub const ENERGY_POINTS: usize = 2001;
/// Default finite-difference step for ∂ψ/∂t.
pub const DEFAULT_DT_FD: f64 = 1e-3;

/// ∫ conj(a) b dx by composite Simpson.
pub fn inner_product(a: &WavefunctionGrid, b: &WavefunctionGrid) -> Result<Complex64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch(format!(
            "[{}, {}]x{} vs [{}, {}]x{}",
            a.grid.x_min, a.grid.x_max, a.grid.n_points, b.grid.x_min, b.grid.x_max, b.grid.n_points
        )));
    }
    if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
        return Err(Error::GridMismatch(format!("times {} and {}", a.t, b.t)));
    }
    Ok(a.grid
        .weights()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(w, (x, y))| w * x.conj() * y)
        .sum())
}

/// dN/dt predicted by the continuity relation: (2λ(t)/ħ) ∫ x |ψ|² dx.
pub fn continuity_rate(psi: &WavefunctionGrid, params: &ParameterSet) -> Result<f64> {
    let c = params.coefficients(psi.t)?;
    let first_moment: f64 = psi
        .grid
        .weights()
        .iter()
        .enumerate()
        .map(|(j, w)| w * psi.grid.x(j) * psi.values[j].norm_sqr())
        .sum();
    Ok(2.0 * c.lambda / params.hbar * first_moment)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMethod {
    AnalyticDerivative,
    FiniteDifference,
}

/// Fourth-order central difference ∂ψ/∂t ≈ [−ψ(t+2δ) + 8ψ(t+δ) − 8ψ(t−δ) + ψ(t−2δ)]/(12δ),
/// then ⟨E⟩ = ⟨ψ|iħ∂ₜψ⟩/⟨ψ|ψ⟩. All five states must share one grid.
pub fn energy_expectation(
    state_at: impl Fn(f64) -> Result<WavefunctionGrid>,
    t: f64,
    dt_fd: f64,
    hbar: f64,
) -> Result<Complex64> {
    if !(dt_fd > 0.0) {
        return Err(Error::InvalidParameters(format!("dt_fd = {dt_fd}")));
    }
    let psi = state_at(t)?;
    let p1 = state_at(t + dt_fd)?;
    let m1 = state_at(t - dt_fd)?;
    let p2 = state_at(t + 2.0 * dt_fd)?;
    let m2 = state_at(t - 2.0 * dt_fd)?;
    for s in [&p1, &m1, &p2, &m2] {
        if !s.grid.same_as(&psi.grid) {
            return Err(Error::GridMismatch("stencil states on different grids".into()));
        }
    }
    let dpsi: Vec<Complex64> = (0..psi.values.len())
        .map(|j| {
            (-p2.values[j] + 8.0 * p1.values[j] - 8.0 * m1.values[j] + m2.values[j]) / (12.0 * dt_fd)
        })
        .collect();
    let deriv = WavefunctionGrid::new(psi.grid, dpsi, t)?;
    let num = inner_product(&psi, &deriv)?;
    let den = inner_product(&psi, &psi)?;
    Ok(Complex64::i() * hbar * num / den)
}

/// Quadrature window for ψ_n at one instant: centred on the peak of the
/// Gaussian envelope |e^{i f} e^{−m₀ω₀y²/2ħ}| and wide enough for the
/// Hermite factor.
pub fn energy_window(n: usize, st: &AuxState, aux: &AuxiliarySolution, hbar: f64) -> Result<SpatialGrid> {
    let m0w0 = aux.m0 * aux.omega0;
    // exponent A y² + B y, y = (x − iη)/s
    let a_re = -m0w0 / (2.0 * hbar);
    let a_im = st.mass * st.s * st.s_dot / (2.0 * hbar);
    let b = -st.mass * st.s * st.eta_dot / hbar;
    let center = -(b * st.s / 2.0 + a_im * st.eta) / a_re;
    let width = st.s * (hbar / m0w0).sqrt();
    let half = (8.0 + (2.0 * n as f64 + 1.0).sqrt()) * width + 2.0 * st.eta.abs();
    build_grid(center, half, ENERGY_POINTS)
}

/// ⟨E⟩ of the closed-form mode ψ_n at time t.
pub fn mode_energy(
    n: usize,
    t: f64,
    aux: &AuxiliarySolution,
    params: &ParameterSet,
    method: EnergyMethod,
    dt_fd: f64,
) -> Result<Complex64> {
    let hbar = params.hbar;
    let st = aux.state_at(params, t)?;
    let grid = energy_window(n, &st, aux, hbar)?;
    let xs = grid.nodes();
    match method {
        EnergyMethod::FiniteDifference => energy_expectation(
            |tt| {
                let s = aux.state_at(params, tt)?;
                let v = xs
                    .iter()
                    .map(|&x| psi_n_at_state(n, x, &s, aux, hbar))
                    .collect::<Result<Vec<_>>>()?;
                WavefunctionGrid::new(grid, v, tt)
            },
            t,
            dt_fd,
            hbar,
        ),
        EnergyMethod::AnalyticDerivative => {
            let mut psi = Vec::with_capacity(xs.len());
            let mut dpsi = Vec::with_capacity(xs.len());
            for &x in &xs {
                let (v, d) = psi_n_time_derivative(n, x, t, aux, params)?;
                psi.push(v);
                dpsi.push(d);
            }
            let a = WavefunctionGrid::new(grid, psi, t)?;
            let b = WavefunctionGrid::new(grid, dpsi, t)?;
            Ok(Complex64::i() * hbar * inner_product(&a, &b)? / inner_product(&a, &a)?)
        }
    }
}

/// The published γ(t) = a²t/(2ħmω⁴)(1 − ω²t²/3) and its derivative.
pub fn printed_gamma(t: f64, mass: f64, omega: f64, slope: f64, hbar: f64) -> (f64, f64) {
    let k = slope * slope / (2.0 * hbar * mass * omega.powi(4));
    let w2 = omega * omega;
    (k * t * (1.0 - w2 * t * t / 3.0), k * (1.0 - w2 * t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormEnergy {
    /// The printed n = 0, 1 displays with the printed γ.
    pub printed: f64,
    /// Exact ⟨E⟩ of the closed-form state, derived from the phase integral F.
    pub derived: Complex64,
}

/// Closed forms for constant m, ω and λ = a t, n ∈ {0, 1}.
///
/// Derived: with η = −at/(mω²), Ḟ = −(a²/(2mω⁴))(1 + ω²t²),
/// ⟨E₀⟩ = ½ħω − Ḟ + i mω η η̇ and
/// ⟨E₁⟩ = (3/2)ħω − Ḟ + i mω η η̇ (1 + 2v/D), v = ħ/(2mω),
/// D = x_c² + v + η², x_c = −η̇/ω.
pub fn closed_form_energy(n: usize, t: f64, params: &ParameterSet) -> Result<ClosedFormEnergy> {
    let (m, w, a) = linear_drive_slope(params).ok_or_else(|| {
        Error::UnsupportedCase("closed forms need constant m, ω and λ = a t".into())
    })?;
    if n > 1 {
        return Err(Error::UnsupportedCase(format!("no closed form for n = {n}")));
    }
    let hbar = params.hbar;
    let w2 = w * w;
    let eta = -a * t / (m * w2);
    let eta_dot = -a / (m * w2);
    let f_dot = -(a * a / (2.0 * m * w2 * w2)) * (1.0 + w2 * t * t);
    let (_, gamma_dot) = printed_gamma(t, m, w, a, hbar);
    let base = (n as f64 + 0.5) * hbar * w;
    let cross = m * w * eta * eta_dot;
    match n {
        0 => Ok(ClosedFormEnergy {
            printed: base - hbar * gamma_dot - (m * a / w) * eta_dot,
            derived: Complex64::new(base - f_dot, cross),
        }),
        _ => {
            let bracket = ((3.0 * hbar * hbar * w2 * w2 + 2.0 * a * a)
                - 2.0 * a * hbar.powf(1.5) * w.powf(1.5) / m.sqrt())
                / (hbar * hbar * w2 * w2 + 2.0 * a * a);
            let v = hbar / (2.0 * m * w);
            let xc = -eta_dot / w;
            let d = xc * xc + v + eta * eta;
            Ok(ClosedFormEnergy {
                printed: base - hbar * gamma_dot - m * w * eta_dot * bracket,
                derived: Complex64::new(base - f_dot, cross * (1.0 + 2.0 * v / d)),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub n: usize,
    pub energy: Complex64,
    pub closed_printed: Option<f64>,
    pub closed_derived: Option<Complex64>,
    /// ħγ̇ from the printed γ, when the closed forms apply.
    pub gamma_dot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub max_imag_rel: f64,
    pub method: EnergyMethod,
    pub hbar_omega0: f64,
}

impl EnergyReport {
    fn from_rows(rows: Vec<EnergyRow>, method: EnergyMethod, hbar_omega0: f64) -> Self {
        let max_imag_rel = rows
            .iter()
            .map(|r| r.energy.im.abs() / (r.energy.re.abs() + hbar_omega0))
            .fold(0.0, f64::max);
        Self {
            rows,
            max_imag_rel,
            method,
            hbar_omega0,
        }
    }

    pub fn passes(&self) -> bool {
        self.max_imag_rel < REALITY_TOLERANCE
    }

    pub fn verdict(&self) -> &'static str {
        if self.passes() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn t_samples(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn e_values(&self) -> Vec<Complex64> {
        self.rows.iter().map(|r| r.energy).collect()
    }
}

/// ⟨E⟩ of ψ_0 … ψ_{n_max} at every time of `t_grid`.
pub fn reality_scan(
    n_max: usize,
    t_grid: &[f64],
    params: &ParameterSet,
    aux: &AuxiliarySolution,
    method: EnergyMethod,
) -> Result<EnergyReport> {
    let pairs: Vec<(usize, f64)> = (0..=n_max)
        .flat_map(|n| t_grid.iter().map(move |&t| (n, t)))
        .collect();
    let closed_ok = linear_drive_slope(params).is_some();
    let rows = pairs
        .par_iter()
        .map(|&(n, t)| {
            let energy = mode_energy(n, t, aux, params, method, DEFAULT_DT_FD)?;
            let closed = if closed_ok && n <= 1 {
                Some(closed_form_energy(n, t, params)?)
            } else {
                None
            };
            let gamma_dot = linear_drive_slope(params)
                .map(|(m, w, a)| params.hbar * printed_gamma(t, m, w, a, params.hbar).1);
            Ok(EnergyRow {
                t,
                n,
                energy,
                closed_printed: closed.map(|c| c.printed),
                closed_derived: closed.map(|c| c.derived),
                gamma_dot,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyReport::from_rows(
        rows,
        method,
        params.hbar * aux.omega0,
    ))
}

/// Energy scan on Crank–Nicolson states started from `psi0`, with ∂ψ/∂t by
/// fourth-order differences of propagated snapshots spaced `dt_fd` apart.
/// Runs on parameter sets the transformation cannot handle (e.g. with a
/// real drive).
pub fn reality_scan_numeric(
    psi0: &WavefunctionGrid,
    params: &ParameterSet,
    t_grid: &[f64],
    dt: f64,
    dt_fd: f64,
    n_label: usize,
) -> Result<EnergyReport> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameters("t_grid must be increasing".into()));
    }
    if let Some(&first) = t_grid.first() {
        if first - 2.0 * dt_fd < psi0.t - 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "first scan time {first} needs states from {} but psi0 is at {}",
                first - 2.0 * dt_fd,
                psi0.t
            )));
        }
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut cur = psi0.clone();
    let omega0 = params.omega_sq.eval(psi0.t)?.sqrt();
    for &t in t_grid {
        let mut stencil = Vec::with_capacity(5);
        for k in -2i32..=2 {
            let tk = t + k as f64 * dt_fd;
            if tk < cur.t {
                return Err(Error::InvalidParameters(
                    "scan times closer than 4 dt_fd".into(),
                ));
            }
            cur = evolve(&cur, params, tk, dt)?;
            stencil.push(cur.clone());
        }
        let energy = energy_expectation(
            |tt| {
                let k = ((tt - t) / dt_fd).round() as i32 + 2;
                Ok(stencil[k as usize].clone())
            },
            t,
            dt_fd,
            params.hbar,
        )?;
        rows.push(EnergyRow {
            t,
            n: n_label,
            energy,
            closed_printed: None,
            closed_derived: None,
            gamma_dot: None,
        });
    }
    Ok(EnergyReport::from_rows(
        rows,
        EnergyMethod::FiniteDifference,
        params.hbar * omega0,
    ))
}
