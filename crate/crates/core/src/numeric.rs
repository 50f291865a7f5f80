//! Finite-difference propagation of iħ∂ₜψ = Hψ with
//! H = −(ħ²/2m)∂ₓ² + ½mω²x² + iλx (+ κx when a real drive is present).
//!
//! The scheme is Crank–Nicolson on a uniform grid with zero Dirichlet
//! boundaries. The norm is never rescaled.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parameters::{Coefficients, ParameterSet};
use crate::quadrature::simpson_weights;

pub const MIN_POINTS: usize = 64;
/// Largest |ψ| allowed on the two outermost nodes, relative to max |ψ|.
pub const BOUNDARY_RATIO: f64 = 1e-10;
/// dt ≤ DT_PERIOD_FRACTION · 2π/ω_max.
pub const DT_PERIOD_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub spacing: f64,
}

pub fn build_grid(center: f64, half_width: f64, n_points: usize) -> Result<SpatialGrid> {
    if n_points < MIN_POINTS {
        return Err(Error::BadGridSpec(format!(
            "n_points = {n_points} is below the minimum of {MIN_POINTS}"
        )));
    }
    if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
        return Err(Error::BadGridSpec(format!(
            "center {center}, half_width {half_width}"
        )));
    }
    let x_min = center - half_width;
    let x_max = center + half_width;
    Ok(SpatialGrid {
        x_min,
        x_max,
        n_points,
        spacing: (x_max - x_min) / (n_points - 1) as f64,
    })
}

impl SpatialGrid {
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        simpson_weights(self.n_points, self.spacing)
    }

    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self.n_points == other.n_points
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.x_min.abs().max(1.0)
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.x_max.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl WavefunctionGrid {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, t: f64) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, values, t })
    }

    /// |ψ| on the two outermost nodes of each side relative to max |ψ|.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        let edge = [0, 1, n - 2, n - 1]
            .iter()
            .map(|&i| self.values[i].norm())
            .fold(0.0, f64::max);
        edge / max
    }

    pub fn check_boundary(&self) -> Result<()> {
        let ratio = self.boundary_ratio();
        if !(ratio < BOUNDARY_RATIO) {
            return Err(Error::BoundaryLeak { ratio });
        }
        Ok(())
    }

    /// ∫|ψ|² dx by composite Simpson.
    pub fn norm_sq(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum()
    }
}

pub fn sample_state(
    f: impl Fn(f64) -> Complex64,
    grid: &SpatialGrid,
    t: f64,
) -> Result<WavefunctionGrid> {
    let values: Vec<Complex64> = grid.nodes().into_iter().map(f).collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidParameters(
            "sampled function is not finite on the grid".into(),
        ));
    }
    let psi = WavefunctionGrid::new(*grid, values, t)?;
    psi.check_boundary()?;
    Ok(psi)
}

fn potential(c: &Coefficients, x: f64) -> Complex64 {
    Complex64::new(0.5 * c.mass * c.omega_sq * x * x + c.real_drive * x, c.lambda * x)
}

/// Hψ with a fourth-order five-point Laplacian. The two nodes nearest each
/// edge are set to zero.
pub fn apply_hamiltonian(
    psi: &WavefunctionGrid,
    params: &ParameterSet,
    t: f64,
) -> Result<WavefunctionGrid> {
    let c = params.coefficients(t)?;
    let n = psi.grid.n_points;
    let h = psi.grid.spacing;
    let kin = -params.hbar * params.hbar / (2.0 * c.mass) / (12.0 * h * h);
    let v = &psi.values;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        let lap = -v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2];
        out[i] = kin * lap + potential(&c, psi.grid.x(i)) * v[i];
    }
    WavefunctionGrid::new(psi.grid, out, psi.t)
}

/// Thomas algorithm for a complex tridiagonal system; `sub[0]` and
/// `sup[n-1]` are ignored. `scratch` must have length n.
fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    let tiny = 1e-300;
    if diag[0].norm() < tiny {
        return Err(Error::LinearSolveFailure(0));
    }
    scratch[0] = sup[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * scratch[i - 1];
        if !(denom.norm() >= tiny) {
            return Err(Error::LinearSolveFailure(i));
        }
        scratch[i] = if i + 1 < n { sup[i] / denom } else { Complex64::new(0.0, 0.0) };
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
    Ok(())
}

/// Crank–Nicolson propagation from `psi.t` to `t_final`.
pub fn evolve(
    psi: &WavefunctionGrid,
    params: &ParameterSet,
    t_final: f64,
    dt: f64,
) -> Result<WavefunctionGrid> {
    evolve_with_snapshots(psi, params, t_final, dt, 0, |_| Ok(()))
}

/// As [`evolve`], calling `on_snapshot` every `every` steps (never when
/// `every` is 0) and once more with the final state.
pub fn evolve_with_snapshots(
    psi: &WavefunctionGrid,
    params: &ParameterSet,
    t_final: f64,
    dt: f64,
    every: usize,
    mut on_snapshot: impl FnMut(&WavefunctionGrid) -> Result<()>,
) -> Result<WavefunctionGrid> {
    let t0 = psi.t;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameters(format!("dt = {dt} must be positive")));
    }
    if !(t_final >= t0 && t_final.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "t_final = {t_final} precedes the state time {t0}"
        )));
    }
    psi.check_boundary()?;
    if t_final == t0 {
        on_snapshot(psi)?;
        return Ok(psi.clone());
    }
    let omega_max = params.max_omega((t0, t_final))?;
    let dt_limit = DT_PERIOD_FRACTION * 2.0 * std::f64::consts::PI / omega_max;
    if dt > dt_limit * (1.0 + 1e-12) {
        return Err(Error::InvalidParameters(format!(
            "dt = {dt} exceeds {dt_limit:.3e} (1e-3 of the shortest period)"
        )));
    }

    let steps = ((t_final - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let dt = (t_final - t0) / steps as f64;
    let n = psi.grid.n_points;
    let h = psi.grid.spacing;
    let hbar = params.hbar;
    let xs = psi.grid.nodes();
    let i = Complex64::i();

    let mut cur = psi.values.clone();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    let mut off = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut t = t0;

    for step in 1..=steps {
        let c = params.coefficients(t + 0.5 * dt)?;
        // H = k(−ψ_{j−1} + 2ψ_j − ψ_{j+1}) + V_j ψ_j, k = ħ²/(2m h²)
        let k = hbar * hbar / (2.0 * c.mass * h * h);
        let r = i * dt / (2.0 * hbar);
        let off_val = -r * k;
        off.fill(off_val);
        for j in 0..n {
            let hjj = 2.0 * k + potential(&c, xs[j]);
            diag[j] = 1.0 + r * hjj;
            let mut hpsi = hjj * cur[j];
            if j > 0 {
                hpsi -= k * cur[j - 1];
            }
            if j + 1 < n {
                hpsi -= k * cur[j + 1];
            }
            rhs[j] = cur[j] - r * hpsi;
        }
        solve_tridiagonal(&off, &diag, &off, &mut rhs, &mut scratch)?;
        std::mem::swap(&mut cur, &mut rhs);
        t = if step == steps { t_final } else { t0 + step as f64 * dt };
        if every > 0 && step % every == 0 && step != steps {
            on_snapshot(&WavefunctionGrid::new(psi.grid, cur.clone(), t)?)?;
        }
    }

    let out = WavefunctionGrid::new(psi.grid, cur, t_final)?;
    out.check_boundary()?;
    on_snapshot(&out)?;
    Ok(out)
}

/// Relative L2 distance ‖a − b‖/‖b‖ (Simpson), without phase alignment.
pub fn l2_relative(a: &WavefunctionGrid, b: &WavefunctionGrid) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch("different grids".into()));
    }
    let w = a.grid.weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for ((wi, x), y) in w.iter().zip(&a.values).zip(&b.values) {
        num += wi * (x - y).norm_sqr();
        den += wi * y.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// max |a − b| / max |b|.
pub fn linf_relative(a: &WavefunctionGrid, b: &WavefunctionGrid) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch("different grids".into()));
    }
    let num = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.values.iter().map(|y| y.norm()).fold(0.0, f64::max);
    Ok(num / den)
}

/// Relative L2 distance after rotating `a` by the global phase of ⟨a|b⟩.
pub fn phase_aligned_l2(a: &WavefunctionGrid, b: &WavefunctionGrid) -> Result<f64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch("different grids".into()));
    }
    let w = a.grid.weights();
    let overlap: Complex64 = w
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(wi, (x, y))| wi * x.conj() * y)
        .sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let rotated = WavefunctionGrid::new(a.grid, a.values.iter().map(|x| x * phase).collect(), a.t)?;
    l2_relative(&rotated, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameters::{ParameterSet, TimeProfile};
    use std::f64::consts::PI;

    fn ground(x: f64) -> Complex64 {
        Complex64::new(PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0)
    }

    #[test]
    fn grid_examples() {
        let g = build_grid(0.0, 10.0, 1024).unwrap();
        assert!((g.spacing - 20.0 / 1023.0).abs() < 1e-15);
        assert!((g.spacing - 0.01955).abs() < 1e-5);
        let g = build_grid(-2.0, 8.0, 512).unwrap();
        assert_eq!((g.x_min, g.x_max), (-10.0, 6.0));
        assert_eq!(g.x(511), 6.0);
        assert!(matches!(build_grid(0.0, 1.0, 32), Err(Error::BadGridSpec(_))));
        assert!(matches!(build_grid(0.0, -1.0, 128), Err(Error::BadGridSpec(_))));
    }

    #[test]
    fn sampling_checks_boundary() {
        let g = build_grid(0.0, 10.0, 1001).unwrap();
        assert!(sample_state(ground, &g, 0.0).is_ok());
        assert!(matches!(
            sample_state(|_| Complex64::new(1.0, 0.0), &g, 0.0),
            Err(Error::BoundaryLeak { .. })
        ));
    }

    #[test]
    fn tridiagonal_solve_matches_dense_product() {
        let n = 6;
        let sub: Vec<Complex64> = (0..n).map(|k| Complex64::new(0.3, -0.1 * k as f64)).collect();
        let sup: Vec<Complex64> = (0..n).map(|k| Complex64::new(-0.2, 0.05 * k as f64)).collect();
        let diag: Vec<Complex64> = (0..n).map(|k| Complex64::new(2.0 + k as f64, 1.0)).collect();
        let x: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let mut b: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut v = diag[j] * x[j];
                if j > 0 {
                    v += sub[j] * x[j - 1];
                }
                if j + 1 < n {
                    v += sup[j] * x[j + 1];
                }
                v
            })
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        solve_tridiagonal(&sub, &diag, &sup, &mut b, &mut scratch).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn ground_state_is_a_hamiltonian_eigenvector() {
        let p = ParameterSet::linear_drive(1.0, 1.0, 0.0, 1.0);
        let g = build_grid(0.0, 10.0, 4001).unwrap();
        let psi = sample_state(ground, &g, 0.0).unwrap();
        let h = apply_hamiltonian(&psi, &p, 0.0).unwrap();
        let res: f64 = (2..g.n_points - 2)
            .map(|j| (h.values[j] - 0.5 * psi.values[j]).norm_sqr() * g.spacing)
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn potential_term_is_diagonal() {
        let a = 0.3;
        let p = ParameterSet::linear_drive(1.0, 1.0, a, 1.0);
        let p0 = ParameterSet::linear_drive(1.0, 1.0, 0.0, 1.0);
        let g = build_grid(0.0, 10.0, 501).unwrap();
        let psi = sample_state(ground, &g, 0.0).unwrap();
        let h = apply_hamiltonian(&psi, &p, 2.0).unwrap();
        let h0 = apply_hamiltonian(&psi, &p0, 2.0).unwrap();
        for j in 2..g.n_points - 2 {
            let expect = Complex64::new(0.0, 2.0 * a * g.x(j)) * psi.values[j];
            assert!((h.values[j] - h0.values[j] - expect).norm() <= 1e-15 * (1.0 + expect.norm()) * 10.0);
        }
    }

    #[test]
    fn hamiltonian_of_x_times_ground_state() {
        // x φ₀ ∝ φ₁, so H(xφ₀) = (3/2) xφ₀ for m = ω = ħ = 1.
        let p = ParameterSet::linear_drive(1.0, 1.0, 0.0, 1.0);
        let g = build_grid(0.0, 10.0, 4001).unwrap();
        let psi = sample_state(|x| x * ground(x), &g, 0.0).unwrap();
        let h = apply_hamiltonian(&psi, &p, 0.0).unwrap();
        let res: f64 = (2..g.n_points - 2)
            .map(|j| (h.values[j] - 1.5 * psi.values[j]).norm_sqr() * g.spacing)
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn rejects_coarse_time_step() {
        let p = ParameterSet::linear_drive(1.0, 1.0, 0.0, 1.0);
        let g = build_grid(0.0, 10.0, 256).unwrap();
        let psi = sample_state(ground, &g, 0.0).unwrap();
        assert!(matches!(
            evolve(&psi, &p, 1.0, 0.01),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn hermitian_evolution_conserves_norm() {
        let p = ParameterSet::linear_drive(1.0, 1.0, 0.0, 1.0);
        let g = build_grid(0.0, 8.0, 1024).unwrap();
        let psi = sample_state(|x| ground(x - 0.5), &g, 0.0).unwrap();
        let n0 = psi.norm_sq();
        let out = evolve(&psi, &p, 1.0, 1e-3).unwrap();
        assert!((out.norm_sq() - n0).abs() < 1e-10, "{}", out.norm_sq() - n0);
    }

    #[test]
    fn imaginary_drive_grows_norm() {
        let p = ParameterSet::linear_drive(1.0, 1.0, 0.5, 1.0);
        let g = build_grid(0.0, 8.0, 1024).unwrap();
        let psi = sample_state(|x| ground(x - 0.5), &g, 0.0).unwrap();
        let out = evolve(&psi, &p, 0.5, 1e-3).unwrap();
        assert!((out.norm_sq() - psi.norm_sq()).abs() > 1e-3);
    }

    #[test]
    fn snapshots_are_emitted() {
        let p = ParameterSet {
            mass: TimeProfile::Constant(1.0),
            omega_sq: TimeProfile::Constant(1.0),
            lambda: TimeProfile::Constant(0.0),
            hbar: 1.0,
            real_drive: None,
        };
        let g = build_grid(0.0, 8.0, 128).unwrap();
        let psi = sample_state(ground, &g, 0.0).unwrap();
        let mut times = Vec::new();
        evolve_with_snapshots(&psi, &p, 0.01, 1e-3, 4, |s| {
            times.push(s.t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 3);
        assert_eq!(*times.last().unwrap(), 0.01);
    }
}
