//! Propagator K(x,t; x₀,t₀) = e^{i f(y,τ)} K₀(y,τ; y₀,τ₀) e^{−i f(y₀,τ₀)} / s₀
//! where K₀ is the oscillator kernel of mass m₀ and frequency ω₀:
//!
//! ```text
//! K₀ = √(m₀ω₀ / (2πiħ sin θ)) exp{ (i m₀ω₀ / (2ħ sin θ)) [(y² + y₀²) cos θ − 2 y y₀] },
//! θ = ω₀(τ − τ₀)
//! ```
//!
//! The square root is continued across caustics with the Maslov phase
//! e^{−ikπ/2}, k = ⌊θ/π⌋. The y₀ contour is the real x₀ axis shifted by
//! −iη₀/s₀, hence the Jacobian 1/s₀ and the unconjugated f at (y₀, τ₀).

use num_complex::Complex64;
use rayon::prelude::*;

use super::hermite::hermite_functions;
use crate::auxiliary::{AuxState, AuxiliarySolution};
use crate::error::{Error, Result};
use crate::numeric::WavefunctionGrid;
use crate::parameters::ParameterSet;

/// Minimum distance of θ from a multiple of π.
pub const CAUSTIC_GUARD: f64 = 1e-6;

const REANCHOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct PropagatorKernel<'a> {
    pub aux: &'a AuxiliarySolution,
    pub params: &'a ParameterSet,
}

/// K(x, x₀) = exp(A x² + B x x₀ + C x₀² + D x + E x₀ + G) for fixed (t, t₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelForm {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    pub g: Complex64,
}

impl KernelForm {
    pub fn eval(&self, x: f64, x0: f64) -> Complex64 {
        (self.a * x * x + self.b * x * x0 + self.c * x0 * x0 + self.d * x + self.e * x0 + self.g)
            .exp()
    }
}

fn check_caustic(theta: f64) -> Result<()> {
    let k = (theta / std::f64::consts::PI).round();
    if (theta - k * std::f64::consts::PI).abs() < CAUSTIC_GUARD {
        return Err(Error::Caustic(theta));
    }
    Ok(())
}

/// ln of √(m₀ω₀/(2πiħ sinθ)) continued through caustics; θ may carry a
/// negative imaginary part (damped propagation).
fn log_prefactor(theta: Complex64, m0w0: f64, hbar: f64) -> Complex64 {
    let pi = std::f64::consts::PI;
    let k = (theta.re / pi).floor();
    let reduced = theta - k * pi;
    let base = Complex64::i() * reduced.sin();
    Complex64::new(0.5 * (m0w0 / (2.0 * pi * hbar)).ln(), -k * pi / 2.0) - 0.5 * base.ln()
}

impl<'a> PropagatorKernel<'a> {
    pub fn new(aux: &'a AuxiliarySolution, params: &'a ParameterSet) -> Self {
        Self { aux, params }
    }

    fn states(&self, t: f64, t0: f64) -> Result<(AuxState, AuxState)> {
        Ok((self.aux.state_at(self.params, t)?, self.aux.state_at(self.params, t0)?))
    }

    /// θ = ω₀(τ(t) − τ(t₀)).
    pub fn theta(&self, t: f64, t0: f64) -> Result<f64> {
        let (st, st0) = self.states(t, t0)?;
        Ok(self.aux.omega0 * (st.tau - st0.tau))
    }

    /// Coefficients of the exponent of K. `damping` ε ≥ 0 evaluates the inner
    /// oscillator kernel at θ − iε.
    pub fn quadratic_form(&self, t: f64, t0: f64, damping: f64) -> Result<KernelForm> {
        let (st, st0) = self.states(t, t0)?;
        let hbar = self.params.hbar;
        let m0w0 = self.aux.m0 * self.aux.omega0;
        let theta_re = self.aux.omega0 * (st.tau - st0.tau);
        if damping == 0.0 {
            check_caustic(theta_re)?;
        }
        let theta = Complex64::new(theta_re, -damping);
        let i = Complex64::i();
        let kappa = m0w0 / (2.0 * hbar * theta.sin());
        let cos = theta.cos();

        // exponent in (y, y₀)
        let a_y = i * st.mass * st.s * st.s_dot / (2.0 * hbar) + i * kappa * cos;
        let b_y = Complex64::new(-st.mass * st.s * st.eta_dot / hbar, 0.0);
        let a_0 = -i * st0.mass * st0.s * st0.s_dot / (2.0 * hbar) + i * kappa * cos;
        let b_0 = Complex64::new(st0.mass * st0.s * st0.eta_dot / hbar, 0.0);
        let c_yy = -2.0 * i * kappa;
        let constant = i * (st.f_integral - st0.f_integral) / hbar
            - 0.5 * st.s.ln()
            - 0.5 * st0.s.ln()
            + log_prefactor(theta, m0w0, hbar);

        // y = u x + v, y₀ = u₀ x₀ + v₀
        let (u, v) = (1.0 / st.s, Complex64::new(0.0, -st.eta / st.s));
        let (u0, v0) = (1.0 / st0.s, Complex64::new(0.0, -st0.eta / st0.s));
        Ok(KernelForm {
            a: a_y * u * u,
            b: c_yy * u * u0,
            c: a_0 * u0 * u0,
            d: 2.0 * a_y * u * v + b_y * u + c_yy * u * v0,
            e: 2.0 * a_0 * u0 * v0 + b_0 * u0 + c_yy * v * u0,
            g: a_y * v * v + b_y * v + a_0 * v0 * v0 + b_0 * v0 + c_yy * v * v0 + constant,
        })
    }

    pub fn propagator(&self, x: f64, t: f64, x0: f64, t0: f64) -> Result<Complex64> {
        Ok(self.quadratic_form(t, t0, 0.0)?.eval(x, x0))
    }

    /// K with the inner oscillator evaluated at complex θ − iε.
    pub fn propagator_damped(
        &self,
        x: f64,
        t: f64,
        x0: f64,
        t0: f64,
        damping: f64,
    ) -> Result<Complex64> {
        Ok(self.quadratic_form(t, t0, damping)?.eval(x, x0))
    }

    /// Σ_{n=0}^{N} ψ_n(x,t) χ_n(x₀,t₀) with the partner
    /// χ_n(x₀,t₀) = e^{−i f(y₀,τ₀)} s₀^{−1/2} φ_n(y₀) e^{+i(n+½)ω₀τ₀}.
    pub fn mehler_partial_sum(&self, n: usize, x: f64, t: f64, x0: f64, t0: f64) -> Result<Complex64> {
        let theta = self.theta(t, t0)?;
        check_caustic(theta)?;
        self.mehler_sum(n, x, t, x0, t0, 0.0)
    }

    /// Partial sum with every mode phase e^{−i(n+½)θ} replaced by
    /// e^{−i(n+½)(θ − iε)}; converges geometrically to
    /// [`propagator_damped`](Self::propagator_damped).
    pub fn mehler_partial_sum_damped(
        &self,
        n: usize,
        x: f64,
        t: f64,
        x0: f64,
        t0: f64,
        damping: f64,
    ) -> Result<Complex64> {
        self.mehler_sum(n, x, t, x0, t0, damping)
    }

    fn mehler_sum(
        &self,
        n: usize,
        x: f64,
        t: f64,
        x0: f64,
        t0: f64,
        damping: f64,
    ) -> Result<Complex64> {
        let (st, st0) = self.states(t, t0)?;
        let hbar = self.params.hbar;
        let beta = (self.aux.m0 * self.aux.omega0 / hbar).sqrt();
        let y = Complex64::new(x, -st.eta) / st.s;
        let y0 = Complex64::new(x0, -st0.eta) / st0.s;
        let phi = hermite_functions(n, beta * y)?;
        let phi0 = hermite_functions(n, beta * y0)?;
        let theta = Complex64::new(self.aux.omega0 * (st.tau - st0.tau), -damping);
        let step = (-Complex64::i() * theta).exp();
        let mut phase = (-0.5 * Complex64::i() * theta).exp();
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, q) in phi.iter().zip(&phi0) {
            sum += p * q * phase;
            phase *= step;
        }
        let i = Complex64::i();
        let outer = i * crate::auxiliary::phase_f_without_log(&st, hbar, y)
            - i * crate::auxiliary::phase_f_without_log(&st0, hbar, y0)
            - 0.5 * st.s.ln()
            - 0.5 * st0.s.ln();
        Ok(beta * sum * outer.exp())
    }
}

/// ∫K(x,t; x₀,t₀) ψ₀(x₀) dx₀ (composite Simpson on the grid of `psi0`,
/// t₀ = psi0.t) at each of `xs`.
pub fn kernel_apply_points(
    kernel: &PropagatorKernel<'_>,
    psi0: &WavefunctionGrid,
    t: f64,
    xs: &[f64],
) -> Result<Vec<Complex64>> {
    psi0.check_boundary()?;
    let form = kernel.quadratic_form(t, psi0.t, 0.0)?;
    let grid = psi0.grid;
    let nodes = grid.nodes();
    let weights = grid.weights();
    let g: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .zip(&psi0.values)
        .map(|((&x0, &w), &v)| {
            if v == Complex64::new(0.0, 0.0) {
                v
            } else {
                w * v * (form.c * x0 * x0 + form.e * x0).exp()
            }
        })
        .collect();
    let h = grid.spacing;
    let out = xs
        .par_iter()
        .map(|&x| {
            let bx = form.b * x;
            let ratio = (bx * h).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut factor = Complex64::new(0.0, 0.0);
            for (j, gj) in g.iter().enumerate() {
                if j % REANCHOR_EVERY == 0 {
                    factor = (bx * nodes[j]).exp();
                }
                acc += gj * factor;
                factor *= ratio;
            }
            acc * (form.a * x * x + form.d * x + form.g).exp()
        })
        .collect();
    Ok(out)
}

/// [`kernel_apply_points`] on the grid of `psi0`.
pub fn kernel_apply(
    kernel: &PropagatorKernel<'_>,
    psi0: &WavefunctionGrid,
    t: f64,
) -> Result<WavefunctionGrid> {
    let values = kernel_apply_points(kernel, psi0, t, &psi0.grid.nodes())?;
    WavefunctionGrid::new(psi0.grid, values, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::psi_n;
    use crate::auxiliary::constant_case_solution;
    use crate::numeric::{build_grid, l2_relative, sample_state};
    use std::f64::consts::PI;

    fn textbook(x: f64, x0: f64, dt: f64) -> Complex64 {
        let s = dt.sin();
        let pref = Complex64::new(0.0, 2.0 * PI * s).inv().sqrt();
        pref * Complex64::new(0.0, ((x * x + x0 * x0) * dt.cos() - 2.0 * x * x0) / (2.0 * s)).exp()
    }

    fn setup(a: f64) -> (ParameterSet, AuxiliarySolution) {
        (
            ParameterSet::linear_drive(1.0, 1.0, a, 1.0),
            constant_case_solution(1.0, 1.0, a, (-1.0, 20.0), 11).unwrap(),
        )
    }

    #[test]
    fn hermitian_kernel_is_textbook() {
        let (p, aux) = setup(0.0);
        let k = PropagatorKernel::new(&aux, &p);
        let v = k.propagator(0.3, 0.7, -0.2, 0.0).unwrap();
        let expect = textbook(0.3, -0.2, 0.7);
        assert!((v - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn maslov_phase_across_half_period() {
        let (p, aux) = setup(0.0);
        let k = PropagatorKernel::new(&aux, &p);
        // Beyond θ = π the kernel keeps matching the damped spectral sum.
        let eps = 0.2;
        let exact = k.propagator_damped(0.4, 4.0, 0.1, 0.0, eps).unwrap();
        let sum = k.mehler_partial_sum_damped(200, 0.4, 4.0, 0.1, 0.0, eps).unwrap();
        assert!((exact - sum).norm() < 1e-10 * exact.norm(), "{exact} vs {sum}");
        let real = k.propagator(0.4, 4.0, 0.1, 0.0).unwrap();
        let limit = k.propagator_damped(0.4, 4.0, 0.1, 0.0, 1e-9).unwrap();
        assert!((real - limit).norm() < 1e-6 * real.norm());
    }

    #[test]
    fn caustics_are_rejected() {
        let (p, aux) = setup(0.1);
        let k = PropagatorKernel::new(&aux, &p);
        assert!(matches!(k.propagator(0.0, PI, 0.0, 0.0), Err(Error::Caustic(_))));
        assert!(matches!(k.propagator(0.0, 1.0, 0.0, 1.0), Err(Error::Caustic(_))));
    }

    #[test]
    fn single_term_mehler_sum() {
        let (p, aux) = setup(0.0);
        let k = PropagatorKernel::new(&aux, &p);
        let (x, t, x0, t0) = (0.3, 1.2, -0.4, 0.5);
        let v = k.mehler_partial_sum(0, x, t, x0, t0).unwrap();
        let expect = psi_n(0, x, t, &aux, &p).unwrap() * psi_n(0, x0, t0, &aux, &p).unwrap().conj();
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn damped_mehler_converges_for_linear_drive() {
        let (p, aux) = setup(0.1);
        let k = PropagatorKernel::new(&aux, &p);
        let eps = 0.35;
        let exact = k.propagator_damped(0.5, 1.0, 0.0, 0.0, eps).unwrap();
        let s60 = k.mehler_partial_sum_damped(60, 0.5, 1.0, 0.0, 0.0, eps).unwrap();
        let s120 = k.mehler_partial_sum_damped(120, 0.5, 1.0, 0.0, 0.0, eps).unwrap();
        assert!((s120 - exact).norm() < 1e-10 * exact.norm());
        assert!((s60 - s120).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn stationary_state_acquires_phase() {
        let (p, aux) = setup(0.0);
        let k = PropagatorKernel::new(&aux, &p);
        let g = build_grid(0.0, 10.0, 2001).unwrap();
        let psi0 = sample_state(|x| psi_n(0, x, 0.0, &aux, &p).unwrap(), &g, 0.0).unwrap();
        let dt = 0.6;
        let out = kernel_apply(&k, &psi0, dt).unwrap();
        let w = g.weights();
        let overlap: Complex64 =
            (0..g.n_points).map(|j| w[j] * psi0.values[j].conj() * out.values[j]).sum();
        let expect = Complex64::from_polar(1.0, -0.5 * dt);
        assert!((overlap.arg() - expect.arg()).abs() < 1e-8);
        assert!((overlap.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_reproduces_closed_form_state() {
        let (p, aux) = setup(0.1);
        let k = PropagatorKernel::new(&aux, &p);
        let g = build_grid(0.0, 10.0, 2001).unwrap();
        let psi0 = sample_state(|x| psi_n(0, x, 0.0, &aux, &p).unwrap(), &g, 0.0).unwrap();
        let out = kernel_apply(&k, &psi0, 0.5).unwrap();
        let exact = sample_state(|x| psi_n(0, x, 0.5, &aux, &p).unwrap(), &g, 0.5).unwrap();
        let err = l2_relative(&out, &exact).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn forward_then_backward_is_identity() {
        let (p, aux) = setup(0.1);
        let k = PropagatorKernel::new(&aux, &p);
        let g = build_grid(0.0, 10.0, 2001).unwrap();
        let psi0 = sample_state(|x| Complex64::new((-(x - 0.5) * (x - 0.5)).exp(), 0.0), &g, 0.2).unwrap();
        let fwd = kernel_apply(&k, &psi0, 0.9).unwrap();
        let back = kernel_apply(&k, &fwd, 0.2).unwrap();
        let err = l2_relative(&back, &psi0).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn composition_on_states() {
        let (p, aux) = setup(0.1);
        let k = PropagatorKernel::new(&aux, &p);
        let g = build_grid(0.0, 10.0, 2001).unwrap();
        let psi0 = sample_state(|x| psi_n(1, x, 0.0, &aux, &p).unwrap(), &g, 0.0).unwrap();
        let mid = kernel_apply(&k, &psi0, 0.4).unwrap();
        let two = kernel_apply(&k, &mid, 1.1).unwrap();
        let one = kernel_apply(&k, &psi0, 1.1).unwrap();
        let err = l2_relative(&two, &one).unwrap();
        assert!(err < 1e-5, "{err}");
    }
}
