//! Closed-form wavefunctions ψ_n = e^{i f(y,τ)} σ_n(y,τ) on the physical
//! x axis, their time derivatives, and the propagator.

pub mod hermite;
pub mod kernel;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{phase_f_without_log, AuxState, AuxiliarySolution};
use crate::error::{Error, Result};
use crate::parameters::ParameterSet;

pub use hermite::{hermite, hermite_function, hermite_functions, MAX_INDEX};
pub use kernel::{kernel_apply, kernel_apply_points, PropagatorKernel};

/// y = (x − iη)/s at the rescaled time τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedPoint {
    pub y: Complex64,
    pub tau: f64,
}

impl TransformedPoint {
    pub fn from_physical(x: f64, state: &AuxState) -> Self {
        let y = if state.is_identity() {
            Complex64::new(x, 0.0)
        } else {
            Complex64::new(x, -state.eta) / state.s
        };
        Self { y, tau: state.tau }
    }

    /// x = s y + iη.
    pub fn to_physical(&self, state: &AuxState) -> Complex64 {
        state.s * self.y + Complex64::new(0.0, state.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct EigenmodeIndex(usize);

impl EigenmodeIndex {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_INDEX {
            Err(Error::IndexTooLarge(n))
        } else {
            Ok(Self(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for EigenmodeIndex {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<EigenmodeIndex> for usize {
    fn from(n: EigenmodeIndex) -> usize {
        n.0
    }
}

/// Stationary mode of the constant oscillator (m₀, ω₀) at complex y:
/// σ_n = (2ⁿn!)^{−1/2} (m₀ω₀/πħ)^{1/4} e^{−m₀ω₀y²/2ħ} H_n(√(m₀ω₀/ħ) y) e^{−i(n+½)ω₀τ}.
pub fn sigma_n(
    n: usize,
    y: Complex64,
    tau: f64,
    m0: f64,
    omega0: f64,
    hbar: f64,
) -> Result<Complex64> {
    let beta = (m0 * omega0 / hbar).sqrt();
    let h = hermite::hermite_function_scaled(n, beta * y)?;
    let phase = Complex64::new(0.0, -(n as f64 + 0.5) * omega0 * tau);
    Ok(h.value * (h.log_scale + phase).exp() * beta.sqrt())
}

struct ModeParts {
    /// ψ_n = common · φ̂_n, ∂ψ_n/∂y-part uses common · φ̂_{n−1}.
    log_common: Complex64,
    phi: hermite::ScaledHermite,
    beta: f64,
    z: Complex64,
    y: Complex64,
}

fn mode_parts(
    n: usize,
    x: f64,
    st: &AuxState,
    aux: &AuxiliarySolution,
    hbar: f64,
) -> Result<ModeParts> {
    let p = TransformedPoint::from_physical(x, st);
    let beta = (aux.m0 * aux.omega0 / hbar).sqrt();
    let z = beta * p.y;
    let phi = hermite::hermite_function_scaled(n, z)?;
    let mut log_common = Complex64::new(
        0.5 * beta.ln(),
        -(n as f64 + 0.5) * aux.omega0 * st.tau,
    );
    if !st.is_identity() {
        log_common += Complex64::i() * phase_f_without_log(st, hbar, p.y) - 0.5 * st.s.ln();
    }
    Ok(ModeParts {
        log_common,
        phi,
        beta,
        z,
        y: p.y,
    })
}

/// ψ_n(x, t) = e^{i f(y,τ)} σ_n(y, τ) with y = (x − iη)/s. The factor
/// s^{−1/2} is applied as an amplitude.
pub fn psi_n(
    n: usize,
    x: f64,
    t: f64,
    aux: &AuxiliarySolution,
    params: &ParameterSet,
) -> Result<Complex64> {
    let st = aux.state_at(params, t)?;
    psi_n_at_state(n, x, &st, aux, params.hbar)
}

pub fn psi_n_at_state(
    n: usize,
    x: f64,
    st: &AuxState,
    aux: &AuxiliarySolution,
    hbar: f64,
) -> Result<Complex64> {
    let m = mode_parts(n, x, st, aux, hbar)?;
    Ok(m.phi.value * (m.log_common + m.phi.log_scale).exp())
}

/// ln ψ_n(x, t); −∞ real part at nodes of ψ_n.
pub fn log_psi_n(
    n: usize,
    x: f64,
    t: f64,
    aux: &AuxiliarySolution,
    params: &ParameterSet,
) -> Result<Complex64> {
    let st = aux.state_at(params, t)?;
    let m = mode_parts(n, x, &st, aux, params.hbar)?;
    Ok(m.log_common + m.phi.log_scale + m.phi.value.ln())
}

/// ∂ψ_n/∂t at fixed x, differentiated in closed form (Hermite derivative
/// φ_n′ = √(2n) φ_{n−1} − z φ_n, so no ratio H_{n−1}/H_n is formed).
pub fn psi_n_time_derivative(
    n: usize,
    x: f64,
    t: f64,
    aux: &AuxiliarySolution,
    params: &ParameterSet,
) -> Result<(Complex64, Complex64)> {
    let st = aux.state_at(params, t)?;
    let hbar = params.hbar;
    let m = mode_parts(n, x, &st, aux, hbar)?;
    let i = Complex64::i();
    let y = m.y;

    // ẏ at fixed x
    let y_dot = Complex64::new(0.0, -st.eta_dot) / st.s - y * st.s_dot / st.s;
    let mass = st.mass;
    let mass_dot = st.mass_dot;
    // ∂f/∂t at fixed y and ∂f/∂y, with f in units of ħ (log term excluded)
    let f_t = (0.5 * (mass_dot * st.s * st.s_dot + mass * st.s_dot * st.s_dot + mass * st.s * st.s_ddot) * y * y
        + i * (mass_dot * st.s * st.eta_dot + mass * st.s_dot * st.eta_dot + mass * st.s * st.eta_ddot) * y
        + st.f_integral_dot)
        / hbar;
    let f_y = (mass * st.s * st.s_dot * y + i * mass * st.s * st.eta_dot) / hbar;
    let along = i * (f_t + f_y * y_dot)
        - 0.5 * st.s_dot / st.s
        - i * (n as f64 + 0.5) * aux.omega0 * st.mu
        - m.beta * y_dot * m.z;
    let scale = (m.log_common + m.phi.log_scale).exp();
    let mut d = m.phi.value * along;
    if n > 0 {
        d += m.beta * y_dot * (2.0 * n as f64).sqrt() * m.phi.prev;
    }
    Ok((m.phi.value * scale, d * scale))
}
