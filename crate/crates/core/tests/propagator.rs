use num_complex::Complex64;
use nhosc_core::analytic::{kernel_apply, kernel_apply_points, psi_n, PropagatorKernel};
use nhosc_core::auxiliary::{constant_case_solution, solve_auxiliary, AuxConfig, AuxiliarySolution};
use nhosc_core::numeric::{build_grid, l2_relative, sample_state, WavefunctionGrid};
use nhosc_core::parameters::{ParameterSet, TimeProfile};

fn closed(a: f64) -> (ParameterSet, AuxiliarySolution) {
    (
        ParameterSet::linear_drive(1.0, 1.0, a, 1.0),
        constant_case_solution(1.0, 1.0, a, (0.0, 10.0), 11).unwrap(),
    )
}

/// L2 distance on an output sample spaced `dx` apart.
fn sampled_l2(a: &[Complex64], b: &[Complex64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr() * dx).sum::<f64>().sqrt()
}

fn delta_limit_error(p: &ParameterSet, aux: &AuxiliarySolution, t0: f64) -> f64 {
    let k = PropagatorKernel::new(aux, p);
    // The kernel oscillates on the scale √(ħΔt/m); 3·10⁶ nodes resolve it.
    let grid = build_grid(0.0, 7.5, 3_000_001).unwrap();
    let g = |x: f64| Complex64::new((-0.5 * x * x).exp(), 0.0);
    let psi0 = sample_state(g, &grid, t0).unwrap();
    let dx = 0.1;
    let xs: Vec<f64> = (0..=100).map(|i| -5.0 + i as f64 * dx).collect();
    let out = kernel_apply_points(&k, &psi0, t0 + 1e-4, &xs).unwrap();
    let expect: Vec<Complex64> = xs.iter().map(|&x| g(x)).collect();
    sampled_l2(&out, &expect, dx)
}

#[test]
fn delta_limit_hermitian() {
    let (p, aux) = closed(0.0);
    let err = delta_limit_error(&p, &aux, 0.5);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn delta_limit_linear_drive() {
    let (p, aux) = closed(0.1);
    let err = delta_limit_error(&p, &aux, 0.5);
    assert!(err < 1e-4, "{err}");
}

fn varying() -> (ParameterSet, AuxiliarySolution) {
    let p = ParameterSet {
        mass: TimeProfile::Polynomial(vec![1.0, 0.2]),
        omega_sq: TimeProfile::Polynomial(vec![1.0, 0.0, 0.3]),
        lambda: TimeProfile::Linear {
            slope: 0.2,
            intercept: 0.05,
        },
        hbar: 1.0,
        real_drive: None,
    };
    let aux = solve_auxiliary(&p, &AuxConfig::with_mesh(4001), (0.0, 2.0)).unwrap();
    (p, aux)
}

#[test]
fn kernel_propagates_closed_form_states_with_varying_parameters() {
    let (p, aux) = varying();
    let k = PropagatorKernel::new(&aux, &p);
    let g = build_grid(0.0, 10.0, 2001).unwrap();
    for n in [0usize, 2] {
        let psi0 = sample_state(|x| psi_n(n, x, 0.2, &aux, &p).unwrap(), &g, 0.2).unwrap();
        let out = kernel_apply(&k, &psi0, 1.4).unwrap();
        let exact = sample_state(|x| psi_n(n, x, 1.4, &aux, &p).unwrap(), &g, 1.4).unwrap();
        let err = l2_relative(&out, &exact).unwrap();
        assert!(err < 1e-6, "n={n}: {err}");
    }
}

#[test]
fn composition_and_inverse_with_varying_parameters() {
    let (p, aux) = varying();
    let k = PropagatorKernel::new(&aux, &p);
    let g = build_grid(0.0, 10.0, 2001).unwrap();
    let psi0 = sample_state(
        |x| Complex64::new((-(x + 0.3) * (x + 0.3)).exp(), 0.2 * x * (-x * x).exp()),
        &g,
        0.1,
    )
    .unwrap();
    let mid = kernel_apply(&k, &psi0, 0.8).unwrap();
    let two = kernel_apply(&k, &mid, 1.7).unwrap();
    let one = kernel_apply(&k, &psi0, 1.7).unwrap();
    assert!(l2_relative(&two, &one).unwrap() < 1e-5);
    let back = kernel_apply(&k, &one, 0.1).unwrap();
    let back = WavefunctionGrid { t: 0.1, ..back };
    assert!(l2_relative(&back, &psi0).unwrap() < 1e-6);
}

#[test]
fn kernel_agrees_with_crank_nicolson() {
    let (p, aux) = closed(0.1);
    let k = PropagatorKernel::new(&aux, &p);
    let g = build_grid(0.0, 10.0, 5001).unwrap();
    let psi0 = sample_state(
        |x| Complex64::new((-(x - 0.4) * (x - 0.4)).exp(), 0.0),
        &g,
        0.0,
    )
    .unwrap();
    let via_kernel = kernel_apply(&k, &psi0, 1.0).unwrap();
    let via_cn = nhosc_core::numeric::evolve(&psi0, &p, 1.0, 1e-4).unwrap();
    assert!(l2_relative(&via_cn, &via_kernel).unwrap() < 1e-5);
}
