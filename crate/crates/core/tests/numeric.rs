use nhosc_core::analytic::psi_n;
use nhosc_core::auxiliary::{constant_case_solution, solve_auxiliary, AuxConfig, AuxiliarySolution};
use nhosc_core::numeric::{
    build_grid, evolve, evolve_with_snapshots, l2_relative, phase_aligned_l2, sample_state,
    SpatialGrid, WavefunctionGrid,
};
use nhosc_core::observables::continuity_rate;
use nhosc_core::parameters::{ParameterSet, TimeProfile};

fn closed(a: f64) -> (ParameterSet, AuxiliarySolution) {
    (
        ParameterSet::linear_drive(1.0, 1.0, a, 1.0),
        constant_case_solution(1.0, 1.0, a, (0.0, 10.0), 11).unwrap(),
    )
}

fn mode(n: usize, t: f64, g: &SpatialGrid, aux: &AuxiliarySolution, p: &ParameterSet) -> WavefunctionGrid {
    sample_state(|x| psi_n(n, x, t, aux, p).unwrap(), g, t).unwrap()
}

#[test]
fn stationary_state_over_one_period() {
    let (p, aux) = closed(0.0);
    let g = build_grid(0.0, 10.0, 4096).unwrap();
    let psi0 = mode(0, 0.0, &g, &aux, &p);
    let period = 2.0 * std::f64::consts::PI;
    let out = evolve(&psi0, &p, period, 1e-4).unwrap();
    let shifted = WavefunctionGrid { t: period, ..psi0.clone() };
    let err = phase_aligned_l2(&out, &shifted).unwrap();
    assert!(err < 1e-6, "{err}");
    assert!((out.norm_sq() - psi0.norm_sq()).abs() < 1e-8);
}

#[test]
fn linear_drive_matches_closed_form() {
    let (p, aux) = closed(0.1);
    let g = build_grid(0.0, 8.0, 4096).unwrap();
    let psi0 = mode(0, 0.0, &g, &aux, &p);
    let out = evolve(&psi0, &p, 1.0, 1e-4).unwrap();
    let err = l2_relative(&out, &mode(0, 1.0, &g, &aux, &p)).unwrap();
    assert!(err < 1e-5, "{err}");
}

#[test]
fn time_step_convergence_is_second_order() {
    let (p, aux) = closed(0.1);
    let g = build_grid(0.0, 8.0, 2048).unwrap();
    let psi0 = mode(0, 0.0, &g, &aux, &p);
    let exact = mode(0, 1.0, &g, &aux, &p);
    let runs: Vec<WavefunctionGrid> =
        [4e-3, 2e-3, 1e-3].iter().map(|&dt| evolve(&psi0, &p, 1.0, dt).unwrap()).collect();
    // Differences between successive runs cancel the dt-independent spatial
    // error, which dominates the distance to the closed form at this grid.
    let self_ratio = l2_relative(&runs[0], &runs[1]).unwrap() / l2_relative(&runs[1], &runs[2]).unwrap();
    assert!((3.6..=4.4).contains(&self_ratio), "{self_ratio}");
    assert!(l2_relative(&runs[2], &exact).unwrap() < 1e-4);
}

#[test]
fn norm_follows_continuity_relation() {
    let (p, aux) = closed(0.3);
    let g = build_grid(0.0, 9.0, 2048).unwrap();
    let psi0 = mode(1, 0.0, &g, &aux, &p);
    let dt = 1e-4;
    let mut snaps = Vec::new();
    evolve_with_snapshots(&psi0, &p, 1.2, dt, 500, |s| {
        snaps.push(s.clone());
        Ok(())
    })
    .unwrap();
    // snapshots every 0.05: centred 4th-order difference of N at t = 0.6
    let h = 500.0 * dt;
    let n_at = |k: usize| snaps[k - 1].norm_sq();
    let k = 12;
    assert!((snaps[k - 1].t - 0.6).abs() < 1e-12);
    let dn = (-n_at(k + 2) + 8.0 * n_at(k + 1) - 8.0 * n_at(k - 1) + n_at(k - 2)) / (12.0 * h);
    let rate = continuity_rate(&snaps[k - 1], &p).unwrap();
    assert!(rate > 0.0);
    assert!(((dn - rate) / rate).abs() < 1e-6, "{dn} vs {rate}");
}

#[test]
fn grid_refinement_is_converged() {
    let (p, aux) = closed(0.1);
    let coarse_grid = build_grid(0.0, 8.0, 16384).unwrap();
    let fine_grid = build_grid(0.0, 8.0, 32767).unwrap();
    let coarse = evolve(&mode(0, 0.0, &coarse_grid, &aux, &p), &p, 1.0, 1e-3).unwrap();
    let fine = evolve(&mode(0, 0.0, &fine_grid, &aux, &p), &p, 1.0, 1e-3).unwrap();
    let restricted = WavefunctionGrid::new(
        coarse_grid,
        fine.values.iter().step_by(2).copied().collect(),
        1.0,
    )
    .unwrap();
    let change = l2_relative(&coarse, &restricted).unwrap();
    assert!(change < 1e-7, "{change}");
}

#[test]
fn varying_mass_and_frequency_match_closed_form() {
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
    let g = build_grid(0.0, 9.0, 4096).unwrap();
    for n in [0usize, 1] {
        let psi0 = mode(n, 0.0, &g, &aux, &p);
        let out = evolve(&psi0, &p, 1.5, 1e-4).unwrap();
        let err = l2_relative(&out, &mode(n, 1.5, &g, &aux, &p)).unwrap();
        assert!(err < 1e-5, "n={n}: {err}");
    }
}

#[test]
fn wrong_drive_sign_is_detected() {
    let (p, aux) = closed(0.1);
    let flipped = ParameterSet::linear_drive(1.0, 1.0, -0.1, 1.0);
    let g = build_grid(0.0, 8.0, 2048).unwrap();
    let psi0 = mode(0, 0.0, &g, &aux, &p);
    let out = evolve(&psi0, &flipped, 1.0, 1e-3).unwrap();
    assert!(l2_relative(&out, &mode(0, 1.0, &g, &aux, &p)).unwrap() > 1e-2);
}
