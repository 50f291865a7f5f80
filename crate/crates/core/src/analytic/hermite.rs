//! Physicists' Hermite polynomials and normalized Hermite functions at
//! complex argument.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_INDEX: usize = 200;

const RESCALE_ABOVE: f64 = 1e150;

fn check_index(n: usize) -> Result<()> {
    if n > MAX_INDEX {
        Err(Error::IndexTooLarge(n))
    } else {
        Ok(())
    }
}

/// H_n(z) from H_{k+1} = 2z H_k − 2k H_{k−1}.
pub fn hermite(n: usize, z: Complex64) -> Result<Complex64> {
    check_index(n)?;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// φ_{n−1}(z) and φ_n(z) sharing a common scale: φ_k = value · e^{log_scale}
/// where φ_k(z) = (2ᵏ k! √π)^{−1/2} H_k(z) e^{−z²/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledHermite {
    pub log_scale: Complex64,
    pub prev: Complex64,
    pub value: Complex64,
}

impl ScaledHermite {
    pub fn value(&self) -> Complex64 {
        self.value * self.log_scale.exp()
    }

    pub fn prev(&self) -> Complex64 {
        self.prev * self.log_scale.exp()
    }
}

/// Normalized recurrence
/// p_{k+1} = √(2/(k+1)) z p_k − √(k/(k+1)) p_{k−1}, p₀ = π^{−1/4},
/// rescaled whenever |p_k| grows large, with the Gaussian folded into the
/// log scale.
pub fn hermite_function_scaled(n: usize, z: Complex64) -> Result<ScaledHermite> {
    check_index(n)?;
    let mut log_scale = -0.5 * z * z;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(std::f64::consts::PI.powf(-0.25), 0.0);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.norm();
        if mag > RESCALE_ABOVE {
            cur /= mag;
            prev /= mag;
            log_scale += mag.ln();
        }
    }
    Ok(ScaledHermite {
        log_scale,
        prev,
        value: cur,
    })
}

pub fn hermite_function(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(hermite_function_scaled(n, z)?.value())
}

/// φ_0(z), …, φ_{n_max}(z).
pub fn hermite_functions(n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_index(n_max)?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * z * z;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(std::f64::consts::PI.powf(-0.25), 0.0);
    out.push(cur * log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.norm();
        if mag > RESCALE_ABOVE {
            cur /= mag;
            prev /= mag;
            log_scale += mag.ln();
        }
        out.push(cur * log_scale.exp());
    }
    Ok(out)
}
