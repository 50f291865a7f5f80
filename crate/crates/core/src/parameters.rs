//! Time profiles of the Hamiltonian coefficients and PT classification.
//!
//! The Hamiltonian is
//!
//! ```text
//! H(t) = p² / 2m(t) + m(t) ω²(t) x² / 2 + i λ(t) x  [+ κ(t) x]
//! ```
//!
//! where the optional real drive κ only exists so the numerical propagator
//! can run negative controls; the closed-form machinery rejects it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{CubicSpline, EndCondition};

/// Minimum number of samples used to validate positivity of m and ω².
pub const VALIDATION_SAMPLES: usize = 1000;

/// A scalar function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub enum TimeProfile {
    Constant(f64),
    Linear { slope: f64, intercept: f64 },
    /// Coefficients in ascending powers of t.
    Polynomial(Vec<f64>),
    /// Natural cubic spline through the samples.
    Tabulated(CubicSpline),
}

impl TimeProfile {
    pub fn tabulated(times: &[f64], values: &[f64]) -> Result<Self> {
        Ok(Self::Tabulated(CubicSpline::new(
            times,
            values,
            EndCondition::Natural,
        )?))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Self::Constant(v) => Ok(*v),
            Self::Linear { slope, intercept } => Ok(slope * t + intercept),
            Self::Polynomial(c) => Ok(c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)),
            Self::Tabulated(s) => s.eval(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            Self::Constant(_) => Ok(0.0),
            Self::Linear { slope, .. } => Ok(*slope),
            Self::Polynomial(c) => Ok(c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ci)| acc * t + k as f64 * ci)),
            Self::Tabulated(s) => s.derivative(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant(_) => true,
            Self::Linear { slope, .. } => *slope == 0.0,
            Self::Polynomial(c) => c.iter().skip(1).all(|&ci| ci == 0.0),
            Self::Tabulated(_) => false,
        }
    }

    /// Polynomial coefficients (ascending), if the profile is polynomial.
    pub fn as_polynomial(&self) -> Option<Vec<f64>> {
        match self {
            Self::Constant(v) => Some(vec![*v]),
            Self::Linear { slope, intercept } => Some(vec![*intercept, *slope]),
            Self::Polynomial(c) => Some(c.clone()),
            Self::Tabulated(_) => None,
        }
    }
}

/// Wire representation of [`TimeProfile`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "cubic")]
        interpolation: String,
    },
}

fn cubic() -> String {
    "cubic".to_string()
}

impl TryFrom<ProfileSpec> for TimeProfile {
    type Error = Error;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidProfile(format!("{what} must be finite")))
            }
        };
        match spec {
            ProfileSpec::Constant { value } => Ok(Self::Constant(finite(value, "value")?)),
            ProfileSpec::Linear { slope, intercept } => Ok(Self::Linear {
                slope: finite(slope, "slope")?,
                intercept: finite(intercept, "intercept")?,
            }),
            ProfileSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidProfile("empty coefficient list".into()));
                }
                for c in &coefficients {
                    finite(*c, "coefficient")?;
                }
                Ok(Self::Polynomial(coefficients))
            }
            ProfileSpec::Tabulated {
                times,
                values,
                interpolation,
            } => {
                if interpolation != "cubic" {
                    return Err(Error::InvalidProfile(format!(
                        "unsupported interpolation '{interpolation}'"
                    )));
                }
                Self::tabulated(&times, &values)
            }
        }
    }
}

impl From<TimeProfile> for ProfileSpec {
    fn from(p: TimeProfile) -> Self {
        match p {
            TimeProfile::Constant(value) => Self::Constant { value },
            TimeProfile::Linear { slope, intercept } => Self::Linear { slope, intercept },
            TimeProfile::Polynomial(coefficients) => Self::Polynomial { coefficients },
            TimeProfile::Tabulated(s) => Self::Tabulated {
                times: s.knots().to_vec(),
                values: s.values().to_vec(),
                interpolation: cubic(),
            },
        }
    }
}

/// Coefficient profiles of the oscillator plus ħ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub mass: TimeProfile,
    /// ω², not ω.
    pub omega_sq: TimeProfile,
    pub lambda: TimeProfile,
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_drive: Option<TimeProfile>,
}

/// Coefficient values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub mass: f64,
    pub mass_dot: f64,
    pub omega_sq: f64,
    pub lambda: f64,
    pub real_drive: f64,
}

impl ParameterSet {
    /// The constant-mass, constant-frequency oscillator with λ(t) = a t.
    pub fn linear_drive(mass: f64, omega: f64, slope: f64, hbar: f64) -> Self {
        Self {
            mass: TimeProfile::Constant(mass),
            omega_sq: TimeProfile::Constant(omega * omega),
            lambda: TimeProfile::Linear {
                slope,
                intercept: 0.0,
            },
            hbar,
            real_drive: None,
        }
    }

    pub fn coefficients(&self, t: f64) -> Result<Coefficients> {
        Ok(Coefficients {
            mass: self.mass.eval(t)?,
            mass_dot: self.mass.derivative(t)?,
            omega_sq: self.omega_sq.eval(t)?,
            lambda: self.lambda.eval(t)?,
            real_drive: match &self.real_drive {
                Some(p) => p.eval(t)?,
                None => 0.0,
            },
        })
    }

    /// Checks ħ > 0 and m(t), ω²(t) > 0 on a mesh of `samples` points
    /// (at least [`VALIDATION_SAMPLES`]) spanning `window`.
    pub fn validate_on(&self, window: (f64, f64), samples: usize) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        let (a, b) = window;
        if !(a.is_finite() && b.is_finite() && b >= a) {
            return Err(Error::InvalidParameters(format!(
                "bad window [{a}, {b}]"
            )));
        }
        let n = samples.max(VALIDATION_SAMPLES);
        for i in 0..n {
            let t = a + (b - a) * i as f64 / (n - 1) as f64;
            let m = self.mass.eval(t)?;
            let w2 = self.omega_sq.eval(t)?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "mass {m} not positive at t = {t}"
                )));
            }
            if !(w2 > 0.0 && w2.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "omega_sq {w2} not positive at t = {t}"
                )));
            }
            if !self.lambda.eval(t)?.is_finite() {
                return Err(Error::InvalidParameters(format!(
                    "lambda not finite at t = {t}"
                )));
            }
        }
        Ok(())
    }

    /// Largest √ω² seen on a sampling mesh of the window.
    pub fn max_omega(&self, window: (f64, f64)) -> Result<f64> {
        let n = VALIDATION_SAMPLES;
        let mut best: f64 = 0.0;
        for i in 0..n {
            let t = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
            best = best.max(self.omega_sq.eval(t)?.max(0.0).sqrt());
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PtVerdict {
    Hermitian,
    PTSymmetric,
    PTViolating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtClass {
    pub verdict: PtVerdict,
    /// Largest |g(t) − g(−t)| among the offending (or, if none, all) profiles.
    pub evidence: f64,
}

const EVEN_RTOL: f64 = 1e-10;
const HERMITIAN_ATOL: f64 = 1e-12;

fn asymmetry(p: &TimeProfile, ts: &[f64]) -> Result<(f64, f64)> {
    let mut asym: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &t in ts {
        let (fwd, bwd) = (p.eval(t)?, p.eval(-t)?);
        asym = asym.max((fwd - bwd).abs());
        scale = scale.max(fwd.abs()).max(bwd.abs());
    }
    Ok((asym, scale))
}

/// Classifies the PT symmetry of `params` on `[-half_window, half_window]`.
///
/// Under P (x → −x) combined with T (t → −t, i → −i), the term iλ(t)x maps to
/// iλ(−t)x, so with m and ω² even the Hamiltonian is PT symmetric exactly
/// when λ is even.
pub fn pt_classify(params: &ParameterSet, half_window: f64, n_samples: usize) -> Result<PtClass> {
    if !(half_window > 0.0) || n_samples < 2 {
        return Err(Error::InvalidParameters(
            "pt_classify needs T > 0 and at least two samples".into(),
        ));
    }
    let ts: Vec<f64> = (1..=n_samples)
        .map(|i| half_window * i as f64 / n_samples as f64)
        .collect();

    let mut worst: Option<f64> = None;
    for p in [&params.mass, &params.omega_sq] {
        let (asym, scale) = asymmetry(p, &ts)?;
        if asym >= EVEN_RTOL * (1.0 + scale) {
            worst = Some(worst.map_or(asym, |w: f64| w.max(asym)));
        }
    }
    if let Some(drive) = &params.real_drive {
        // A real linear drive breaks PT unless it is odd in t.
        let mut asym: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &t in &ts {
            let (fwd, bwd) = (drive.eval(t)?, drive.eval(-t)?);
            asym = asym.max((fwd + bwd).abs());
            scale = scale.max(fwd.abs()).max(bwd.abs());
        }
        if asym >= EVEN_RTOL * (1.0 + scale) {
            worst = Some(worst.map_or(asym, |w: f64| w.max(asym)));
        }
    }
    if let Some(evidence) = worst {
        return Ok(PtClass {
            verdict: PtVerdict::PTViolating,
            evidence,
        });
    }

    let (asym, scale) = asymmetry(&params.lambda, &ts)?;
    let at_zero = params.lambda.eval(0.0)?.abs();
    if scale.max(at_zero) < HERMITIAN_ATOL && params.real_drive.is_none() {
        return Ok(PtClass {
            verdict: PtVerdict::Hermitian,
            evidence: asym,
        });
    }
    let verdict = if asym < EVEN_RTOL * (1.0 + scale) {
        PtVerdict::PTSymmetric
    } else {
        PtVerdict::PTViolating
    };
    Ok(PtClass {
        verdict,
        evidence: asym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params_with_lambda(lambda: TimeProfile) -> ParameterSet {
        ParameterSet {
            mass: TimeProfile::Constant(1.0),
            omega_sq: TimeProfile::Constant(1.0),
            lambda,
            hbar: 1.0,
            real_drive: None,
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(TimeProfile::Constant(2.0).eval(37.5).unwrap(), 2.0);
        let lin = TimeProfile::Linear {
            slope: 0.5,
            intercept: 0.0,
        };
        assert_eq!(lin.eval(2.0).unwrap(), 1.0);
        assert_eq!(
            TimeProfile::Polynomial(vec![1.0, 0.0, -1.0]).eval(2.0).unwrap(),
            -3.0
        );
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(TimeProfile::Constant(2.0).derivative(-4.0).unwrap(), 0.0);
        let lin = TimeProfile::Linear {
            slope: 0.5,
            intercept: 3.0,
        };
        assert_eq!(lin.derivative(9.0).unwrap(), 0.5);
        assert_eq!(
            TimeProfile::Polynomial(vec![0.0, 0.0, 3.0])
                .derivative(2.0)
                .unwrap(),
            12.0
        );
    }

    #[test]
    fn tabulated_out_of_range() {
        let p = TimeProfile::tabulated(&[0.0, 1.0, 2.0], &[1.0, 2.0, 1.5]).unwrap();
        assert!(p.eval(1.5).is_ok());
        assert!(matches!(p.eval(2.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(p.derivative(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn json_round_trip_and_schema() {
        let json = r#"{
            "mass": {"kind": "constant", "value": 1.0},
            "omega_sq": {"kind": "polynomial", "coefficients": [1.0, 0.0, 0.25]},
            "lambda": {"kind": "linear", "slope": 0.1},
            "hbar": 1.0
        }"#;
        let p: ParameterSet = serde_json::from_str(json).unwrap();
        assert_eq!(
            p.lambda,
            TimeProfile::Linear {
                slope: 0.1,
                intercept: 0.0
            }
        );
        let back: ParameterSet =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);

        let tab = r#"{"kind": "tabulated", "times": [0, 1, 3], "values": [1, 2, 2]}"#;
        let prof: TimeProfile = serde_json::from_str(tab).unwrap();
        assert_eq!(prof.eval(3.0).unwrap(), 2.0);

        let bad = r#"{"kind": "tabulated", "times": [0, 2, 1], "values": [1, 2, 2]}"#;
        assert!(serde_json::from_str::<TimeProfile>(bad).is_err());
        let missing = r#"{"mass": {"kind": "constant", "value": 1.0},
            "lambda": {"kind": "constant", "value": 0.0}, "hbar": 1.0}"#;
        assert!(serde_json::from_str::<ParameterSet>(missing).is_err());
    }

    #[test]
    fn validation_rejects_nonpositive_frequency() {
        let mut p = params_with_lambda(TimeProfile::Constant(0.0));
        assert!(p.validate_on((0.0, 5.0), 1000).is_ok());
        p.omega_sq = TimeProfile::Linear {
            slope: -1.0,
            intercept: 2.0,
        };
        assert!(p.validate_on((0.0, 5.0), 1000).is_err());
        assert!(p.validate_on((0.0, 1.5), 1000).is_ok());
        p.hbar = 0.0;
        assert!(p.validate_on((0.0, 1.5), 1000).is_err());
    }

    #[test]
    fn classifier_examples() {
        let a = 0.3;
        let lin = params_with_lambda(TimeProfile::Linear {
            slope: a,
            intercept: 0.0,
        });
        assert_eq!(
            pt_classify(&lin, 2.0, 100).unwrap().verdict,
            PtVerdict::PTViolating
        );
        let quad = params_with_lambda(TimeProfile::Polynomial(vec![0.0, 0.0, a]));
        assert_eq!(
            pt_classify(&quad, 2.0, 100).unwrap().verdict,
            PtVerdict::PTSymmetric
        );
        let herm = params_with_lambda(TimeProfile::Constant(0.0));
        assert_eq!(
            pt_classify(&herm, 2.0, 100).unwrap().verdict,
            PtVerdict::Hermitian
        );
    }

    #[test]
    fn classifier_flags_odd_mass() {
        let mut p = params_with_lambda(TimeProfile::Polynomial(vec![0.0, 0.0, 1.0]));
        p.mass = TimeProfile::Linear {
            slope: 0.1,
            intercept: 2.0,
        };
        let c = pt_classify(&p, 1.0, 50).unwrap();
        assert_eq!(c.verdict, PtVerdict::PTViolating);
        assert!((c.evidence - 0.2).abs() < 1e-12);
    }

    fn reversed(p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 1 { -c } else { *c })
            .collect()
    }

    proptest! {
        #[test]
        fn evaluation_is_pure(coeffs in prop::collection::vec(-3.0f64..3.0, 1..6), t in -4.0f64..4.0) {
            let p = TimeProfile::Polynomial(coeffs);
            prop_assert_eq!(p.eval(t).unwrap().to_bits(), p.eval(t).unwrap().to_bits());
        }

        #[test]
        fn polynomial_derivative_matches_central_difference(
            coeffs in prop::collection::vec(-3.0f64..3.0, 1..6),
            t in -2.0f64..2.0,
        ) {
            let p = TimeProfile::Polynomial(coeffs);
            let h = 1e-5;
            let fd = (p.eval(t + h).unwrap() - p.eval(t - h).unwrap()) / (2.0 * h);
            let exact = p.derivative(t).unwrap();
            let scale = exact.abs().max(1.0);
            prop_assert!((fd - exact).abs() / scale < 1e-7, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn classifier_is_time_reversal_symmetric(coeffs in prop::collection::vec(-2.0f64..2.0, 1..5)) {
            let fwd = params_with_lambda(TimeProfile::Polynomial(coeffs.clone()));
            let bwd = params_with_lambda(TimeProfile::Polynomial(reversed(&coeffs)));
            prop_assert_eq!(
                pt_classify(&fwd, 1.5, 64).unwrap().verdict,
                pt_classify(&bwd, 1.5, 64).unwrap().verdict
            );
        }
    }
}
