//! CSV and JSON formats for wavefunctions, transformation tables and energy
//! reports. Floats are written in shortest round-trip form, so output is
//! byte-for-byte reproducible.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{AuxOrigin, AuxiliarySolution};
use crate::error::{Error, Result};
use crate::numeric::{SpatialGrid, WavefunctionGrid};
use crate::observables::{EnergyMethod, EnergyReport};

pub const WAVEFUNCTION_COLUMNS: [&str; 4] = ["x", "re_psi", "im_psi", "abs2_psi"];
pub const AUX_COLUMNS: [&str; 9] = [
    "t",
    "tau",
    "mu",
    "s",
    "s_dot",
    "eta",
    "eta_dot",
    "Omega_sq",
    "f_tau_integral",
];
pub const ENERGY_COLUMNS: [&str; 7] = [
    "t",
    "n",
    "re_E",
    "im_E",
    "E_closed_paper",
    "E_closed_derived",
    "im_E_closed_derived",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_wavefunction_csv<W: Write>(psi: &WavefunctionGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(WAVEFUNCTION_COLUMNS).map_err(csv_err)?;
    for (j, v) in psi.values.iter().enumerate() {
        w.write_record([
            psi.grid.x(j).to_string(),
            v.re.to_string(),
            v.im.to_string(),
            v.norm_sqr().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a wavefunction dump. The x column must be a uniform grid.
pub fn parse_wavefunction_csv(text: &str, t: f64) -> Result<WavefunctionGrid> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != WAVEFUNCTION_COLUMNS {
        return Err(Error::Parse(format!(
            "expected columns {WAVEFUNCTION_COLUMNS:?}, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!("row {}: {} fields", line + 1, rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            let v: f64 = rec[k]
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad number {:?}", line + 1, &rec[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("row {}: non-finite value", line + 1)))
            }
        };
        xs.push(num(0)?);
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    let grid = grid_from_nodes(&xs)?;
    WavefunctionGrid::new(grid, values, t)
}

fn grid_from_nodes(xs: &[f64]) -> Result<SpatialGrid> {
    let n = xs.len();
    if n < crate::numeric::MIN_POINTS {
        return Err(Error::BadGridSpec(format!("{n} rows")));
    }
    let (a, b) = (xs[0], xs[n - 1]);
    if !(b > a) {
        return Err(Error::BadGridSpec("x must increase".into()));
    }
    let grid = SpatialGrid {
        x_min: a,
        x_max: b,
        n_points: n,
        spacing: (b - a) / (n - 1) as f64,
    };
    let tol = 1e-9 * grid.spacing;
    for (j, &x) in xs.iter().enumerate() {
        if !((x - grid.x(j)).abs() <= tol) {
            return Err(Error::BadGridSpec(format!("row {} is off the uniform grid", j + 1)));
        }
    }
    Ok(grid)
}

/// JSON written next to every wavefunction dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionSidecar {
    pub t: f64,
    /// Mode index for closed-form states; absent for propagated data.
    #[serde(default)]
    pub n: Option<usize>,
    pub params_sha256: String,
    pub source: String,
}

pub fn write_aux_csv<W: Write>(aux: &AuxiliarySolution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AUX_COLUMNS).map_err(csv_err)?;
    for i in 0..aux.len() {
        w.write_record([
            aux.reparam.t_mesh[i].to_string(),
            aux.reparam.tau_values[i].to_string(),
            aux.reparam.mu_values[i].to_string(),
            aux.s_values[i].to_string(),
            aux.s_dot_values[i].to_string(),
            aux.eta_values[i].to_string(),
            aux.eta_dot_values[i].to_string(),
            aux.omega_sq_values[i].to_string(),
            aux.integral_part[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxHeader {
    pub m0: f64,
    pub omega0: f64,
    pub mesh_size: usize,
    pub t_span: (f64, f64),
    #[serde(flatten)]
    pub origin: AuxOrigin,
}

impl AuxHeader {
    pub fn of(aux: &AuxiliarySolution) -> Self {
        Self {
            m0: aux.m0,
            omega0: aux.omega0,
            mesh_size: aux.len(),
            t_span: aux.t_range(),
            origin: aux.origin,
        }
    }
}

pub fn write_energy_csv<W: Write>(report: &EnergyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENERGY_COLUMNS).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.t.to_string(),
            r.n.to_string(),
            r.energy.re.to_string(),
            r.energy.im.to_string(),
            opt(r.closed_printed),
            opt(r.closed_derived.map(|c| c.re)),
            opt(r.closed_derived.map(|c| c.im)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySummary {
    pub max_imag_rel: f64,
    pub verdict: &'static str,
    pub method: EnergyMethod,
    pub tolerance: f64,
}

impl EnergySummary {
    pub fn of(report: &EnergyReport) -> Self {
        Self {
            max_imag_rel: report.max_imag_rel,
            verdict: report.verdict(),
            method: report.method,
            tolerance: crate::observables::REALITY_TOLERANCE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{build_grid, sample_state};

    fn gaussian() -> WavefunctionGrid {
        let g = build_grid(0.5, 6.0, 101).unwrap();
        sample_state(|x| Complex64::new((-x * x).exp(), 0.1 * x * (-x * x).exp()), &g, 0.25).unwrap()
    }

    #[test]
    fn wavefunction_round_trip_is_exact() {
        let psi = gaussian();
        let mut buf = Vec::new();
        write_wavefunction_csv(&psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,re_psi,im_psi,abs2_psi\n"));
        let back = parse_wavefunction_csv(&text, 0.25).unwrap();
        assert_eq!(back.values, psi.values);
        assert!(back.grid.same_as(&psi.grid));
    }

    #[test]
    fn rejects_malformed_dumps() {
        assert!(parse_wavefunction_csv("", 0.0).is_err());
        assert!(parse_wavefunction_csv("a,b,c,d\n1,2,3,4\n", 0.0).is_err());
        let mut rows = String::from("x,re_psi,im_psi,abs2_psi\n");
        for j in 0..70 {
            let x = if j == 30 { 30.05 } else { j as f64 };
            rows.push_str(&format!("{x},0,0,0\n"));
        }
        assert!(matches!(parse_wavefunction_csv(&rows, 0.0), Err(Error::BadGridSpec(_))));
        assert!(parse_wavefunction_csv("x,re_psi,im_psi,abs2_psi\n1,NaN,0,0\n", 0.0).is_err());
    }
}
