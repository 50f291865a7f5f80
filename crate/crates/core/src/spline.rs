//! Cubic splines on strictly increasing knots.

use crate::error::{Error, Result};

/// End conditions for [`CubicSpline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    /// Zero second derivative at both ends.
    Natural,
    /// Prescribed first derivative at the first and last knot.
    Clamped { start: f64, end: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: &[f64], values: &[f64], end: EndCondition) -> Result<Self> {
        let n = knots.len();
        if n < 2 {
            return Err(Error::InvalidProfile(
                "a spline needs at least two knots".into(),
            ));
        }
        if values.len() != n {
            return Err(Error::InvalidProfile(format!(
                "{} knots but {} values",
                n,
                values.len()
            )));
        }
        if knots.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite spline data".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "knots must be strictly increasing".into(),
            ));
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = values
            .windows(2)
            .zip(&h)
            .map(|(v, hi)| (v[1] - v[0]) / hi)
            .collect();

        // Tridiagonal system for the moments M_i.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        match end {
            EndCondition::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
            EndCondition::Clamped { start, end } => {
                diag[0] = 2.0 * h[0];
                sup[0] = h[0];
                rhs[0] = 6.0 * (slope[0] - start);
                sub[n - 1] = h[n - 2];
                diag[n - 1] = 2.0 * h[n - 2];
                rhs[n - 1] = 6.0 * (end - slope[n - 2]);
            }
        }
        let moments = solve_tridiagonal_real(&sub, &diag, &sup, &rhs);

        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            moments,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.start(), self.end());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let idx = self.knots.partition_point(|&k| k <= t);
        Ok(idx.saturating_sub(1).min(self.knots.len() - 2))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let (h, a, b) = self.local(i, t);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        Ok(a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0)
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let (h, a, b) = self.local(i, t);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        Ok((self.values[i + 1] - self.values[i]) / h
            + ((3.0 * b * b - 1.0) * m1 - (3.0 * a * a - 1.0) * m0) * h / 6.0)
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let (_, a, b) = self.local(i, t);
        Ok(a * self.moments[i] + b * self.moments[i + 1])
    }

    fn local(&self, i: usize, t: f64) -> (f64, f64, f64) {
        let h = self.knots[i + 1] - self.knots[i];
        let b = (t - self.knots[i]) / h;
        (h, 1.0 - b, b)
    }
}

/// Thomas algorithm for a diagonally dominant real tridiagonal system.
/// `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal_real(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Uniform-mesh slope estimate at an endpoint from the first five samples
/// (fourth-order one-sided difference). `values` are ordered away from the end.
pub(crate) fn one_sided_slope(values: &[f64], h: f64) -> f64 {
    if values.len() >= 5 {
        (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3]
            - 3.0 * values[4])
            / (12.0 * h)
    } else {
        (values[1] - values[0]) / h
    }
}

/// Clamped spline on a uniform mesh with endpoint slopes from one-sided
/// fourth-order differences; derivative error stays O(h⁴) up to the ends.
pub(crate) fn uniform_clamped(knots: &[f64], values: &[f64]) -> Result<CubicSpline> {
    if knots.len() < 2 {
        return CubicSpline::new(knots, values, EndCondition::Natural);
    }
    let h = knots[1] - knots[0];
    let start = one_sided_slope(values, h);
    let rev: Vec<f64> = values.iter().rev().take(5).copied().collect();
    let end = -one_sided_slope(&rev, h);
    CubicSpline::new(knots, values, EndCondition::Clamped { start, end })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_spline_reproduces_linear_data() {
        let knots = [0.0, 0.5, 1.5, 2.0, 4.0];
        let values: Vec<f64> = knots.iter().map(|t| 3.0 * t - 1.0).collect();
        let s = CubicSpline::new(&knots, &values, EndCondition::Natural).unwrap();
        for t in [0.0, 0.3, 1.0, 1.9, 3.3, 4.0] {
            assert!((s.eval(t).unwrap() - (3.0 * t - 1.0)).abs() < 1e-13);
            assert!((s.derivative(t).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolates_knots_exactly() {
        let knots: Vec<f64> = (0..12).map(|i| i as f64 * 0.37).collect();
        let values: Vec<f64> = knots.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(&knots, &values, EndCondition::Natural).unwrap();
        for (k, v) in knots.iter().zip(&values) {
            assert_eq!(s.eval(*k).unwrap(), *v);
        }
    }

    #[test]
    fn clamped_derivative_is_high_order() {
        let knots: Vec<f64> = (0..401).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = knots.iter().map(|t| (1.3 * t).cos()).collect();
        let s = uniform_clamped(&knots, &values).unwrap();
        let max_err = knots
            .iter()
            .map(|&t| (s.derivative(t).unwrap() + 1.3 * (1.3 * t).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-8, "max derivative error {max_err}");
    }

    #[test]
    fn rejects_extrapolation() {
        let s = CubicSpline::new(&[0.0, 1.0], &[0.0, 1.0], EndCondition::Natural).unwrap();
        assert!(matches!(s.eval(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.eval(f64::NAN), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(CubicSpline::new(&[0.0, 1.0, 1.0], &[0.0; 3], EndCondition::Natural).is_err());
    }
}
