//! Dormand–Prince 5(4) integrator with step-size control and the
//! fourth-order continuous extension used for dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

/// Integrates `y' = f(t, y)` from `t_start` to the last entry of `t_out`
/// (which must be non-decreasing and start at `t_start`), returning the state
/// at every requested output time.
///
/// `f` may fail; the error aborts the integration. `check` runs after every
/// accepted step and may also abort.
pub fn integrate<F, C>(
    mut f: F,
    t_out: &[f64],
    y0: &[f64],
    tol: Tolerances,
    mut check: C,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]) -> Result<()>,
{
    let dim = y0.len();
    let Some(&t_end) = t_out.last() else {
        return Ok(Vec::new());
    };
    let t_start = t_out[0];
    if t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Integration("output times must be sorted".into()));
    }

    let mut out = Vec::with_capacity(t_out.len());
    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] <= t_start {
        out.push(y0.to_vec());
        next_out += 1;
    }

    let mut t = t_start;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut cont = vec![vec![0.0; dim]; 5];

    f(t, &y, &mut k[0])?;
    let span = t_end - t_start;
    let mut h = initial_step(&mut f, t, &y, &k[0], tol, span)?;
    let mut steps = 0;
    let mut facold: f64 = 1e-4;

    while t < t_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        if h <= f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }

        stage(&y, h, &[(A21, &k[0])], &mut ytmp);
        f(t + C2 * h, &ytmp, &mut k[1])?;
        stage(&y, h, &[(A31, &k[0]), (A32, &k[1])], &mut ytmp);
        f(t + C3 * h, &ytmp, &mut k[2])?;
        stage(&y, h, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], &mut ytmp);
        f(t + C4 * h, &ytmp, &mut k[3])?;
        stage(
            &y,
            h,
            &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
            &mut ytmp,
        );
        f(t + C5 * h, &ytmp, &mut k[4])?;
        stage(
            &y,
            h,
            &[
                (A61, &k[0]),
                (A62, &k[1]),
                (A63, &k[2]),
                (A64, &k[3]),
                (A65, &k[4]),
            ],
            &mut ytmp,
        );
        f(t + h, &ytmp, &mut k[5])?;
        stage(
            &y,
            h,
            &[
                (A71, &k[0]),
                (A73, &k[2]),
                (A74, &k[3]),
                (A75, &k[4]),
                (A76, &k[5]),
            ],
            &mut ynew,
        );
        f(t + h, &ynew, &mut k[6])?;

        let mut err_norm = 0.0;
        for i in 0..dim {
            err[i] = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            err_norm += (err[i] / sc).powi(2);
        }
        err_norm = (err_norm / dim as f64).sqrt();
        if !err_norm.is_finite() {
            h *= 0.1;
            continue;
        }

        // PI step-size control (Hairer's dopri5 defaults).
        let fac11 = err_norm.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / facold.powf(0.04);
        fac = (fac / 0.9).clamp(1.0 / 10.0, 5.0);
        let h_new = h / fac;

        if err_norm <= 1.0 {
            facold = err_norm.max(1e-4);
            for i in 0..dim {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k[6][i] - bspl;
                cont[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let t_old = t;
            t = if t + h >= t_end { t_end } else { t + h };
            while next_out < t_out.len() && t_out[next_out] <= t {
                let theta = (t_out[next_out] - t_old) / h;
                let theta1 = 1.0 - theta;
                let sample = (0..dim)
                    .map(|i| {
                        cont[0][i]
                            + theta
                                * (cont[1][i]
                                    + theta1
                                        * (cont[2][i]
                                            + theta * (cont[3][i] + theta1 * cont[4][i])))
                    })
                    .collect();
                out.push(sample);
                next_out += 1;
            }
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            check(t, &y)?;
            h = h_new;
        } else {
            h /= (fac11 / 0.9).min(5.0);
        }
    }

    // Exact endpoint values rather than the interpolant at θ = 1.
    if let Some(last) = out.last_mut() {
        if t_out[t_out.len() - 1] == t_end {
            last.copy_from_slice(&y);
        }
    }
    Ok(out)
}

fn stage(y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    tol: Tolerances,
    span: f64,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y.len();
    let sc: Vec<f64> = y.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let d0 = rms(y, &sc);
    let d1 = rms(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span.abs().max(f64::MIN_POSITIVE));
    let y1: Vec<f64> = (0..dim).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; dim];
    f(t + h0, &y1, &mut f1)?;
    let diff: Vec<f64> = (0..dim).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms(&diff, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span.abs()))
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(sc).map(|(a, b)| (a / b).powi(2)).sum();
    (s / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let t_out: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let ys = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            &t_out,
            &[1.0, 0.0],
            Tolerances::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert_eq!(ys.len(), t_out.len());
        for (t, y) in t_out.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t} y={}", y[0]);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_growth() {
        let ys = integrate(
            |_, y, dy| {
                dy[0] = 0.7 * y[0];
                Ok(())
            },
            &[0.0, 1.0, 3.0],
            &[2.0],
            Tolerances::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((ys[2][0] - 2.0 * (2.1f64).exp()).abs() < 1e-8);
        assert!((ys[1][0] - 2.0 * (0.7f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn check_hook_aborts() {
        let r = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            &[0.0, 5.0],
            &[1.0],
            Tolerances::default(),
            |t, _| {
                if t > 1.0 {
                    Err(Error::Integration("stop".into()))
                } else {
                    Ok(())
                }
            },
        );
        assert!(r.is_err());
    }
}
