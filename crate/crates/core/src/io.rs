//! CSV and JSON artifact formats, with readers for each.
//!
//! Floats go through the shortest round-trip decimal representation, so a
//! written file parses back to bit-identical values. Absent values are empty
//! CSV fields and `null` in JSON.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::dynamics::{OneExcitationSpectrum, PropagatorRecord};
use crate::error::{Error, Result};
use crate::oracle::ValidationReport;
use crate::transition::{Phase, PoleReport};
use crate::wigner::{evolve_state, GridSpec, InitialState, WignerGrid};

pub const MOMENTS_HEADER: &str = "t,re_u,im_u,abs_u,v,c_qq,c_qp,c_pp,occupation,purity";
pub const WIGNER_HEADER: &str = "q,p,w";
pub const SWEEP_HEADER: &str = "eta,eta_c,phase,e1,c0sq,p0_inf,p1_inf";
pub const SPECTRUM_HEADER: &str = "j,energy,weight";

/// One eigenvalue of the one-excitation sector with its system weight `c₀ⱼ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub j: usize,
    pub energy: f64,
    pub weight: f64,
}

pub fn spectrum_rows(spectrum: &OneExcitationSpectrum) -> Vec<SpectrumRow> {
    spectrum
        .energies
        .iter()
        .zip(&spectrum.weights)
        .enumerate()
        .map(|(j, (e, w))| SpectrumRow {
            j,
            energy: *e,
            weight: *w,
        })
        .collect()
}

/// One stored time of an evolved state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentsRow {
    pub t: f64,
    pub re_u: Option<f64>,
    pub im_u: Option<f64>,
    pub abs_u: Option<f64>,
    pub v: Option<f64>,
    pub c_qq: f64,
    pub c_qp: f64,
    pub c_pp: f64,
    pub occupation: f64,
    pub purity: f64,
}

/// Moments of `state` at every stored time of `record`. The `u` and `v`
/// columns are empty for the QBM model.
pub fn moments_rows(state: &InitialState, record: &PropagatorRecord) -> Result<Vec<MomentsRow>> {
    let params = *record.params();
    record
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let st = evolve_state(state, record, t)?;
            let c = st.covariance();
            let u: Option<Complex64> = record.u().map(|u| u[k]);
            Ok(MomentsRow {
                t,
                re_u: u.map(|u| u.re),
                im_u: u.map(|u| u.im),
                abs_u: u.map(|u| u.norm()),
                v: record.v().map(|v| v[k]),
                c_qq: c.c_qq,
                c_qp: c.c_qp,
                c_pp: c.c_pp,
                occupation: st.occupation(&params),
                purity: st.purity(),
            })
        })
        .collect()
}

/// Row of the transition sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub eta_c: f64,
    pub phase: Phase,
    pub e1: Option<f64>,
    pub c0sq: Option<f64>,
    pub p0_inf: f64,
    pub p1_inf: f64,
}

impl From<&PoleReport> for SweepRow {
    fn from(r: &PoleReport) -> Self {
        Self {
            eta: r.eta,
            eta_c: r.eta_c,
            phase: r.phase,
            e1: r.e1,
            c0sq: r.c0sq,
            p0_inf: r.rho_inf_diag.0,
            p1_inf: r.rho_inf_diag.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct WignerRow {
    q: f64,
    p: f64,
    w: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, header: &str, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: DeserializeOwned>(input: R, header: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Parse(format!(
            "expected header `{header}`, found `{found}`"
        )));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn write_moments_csv<W: Write>(out: W, rows: &[MomentsRow]) -> Result<()> {
    write_rows(out, MOMENTS_HEADER, rows)
}

pub fn read_moments_csv<R: Read>(input: R) -> Result<Vec<MomentsRow>> {
    read_rows(input, MOMENTS_HEADER)
}

pub fn write_spectrum_csv<W: Write>(out: W, rows: &[SpectrumRow]) -> Result<()> {
    write_rows(out, SPECTRUM_HEADER, rows)
}

pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Vec<SpectrumRow>> {
    read_rows(input, SPECTRUM_HEADER)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    write_rows(out, SWEEP_HEADER, rows)
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    read_rows(input, SWEEP_HEADER)
}

/// `q,p,w` rows, `p` varying fastest.
pub fn write_wigner_csv<W: Write>(out: W, grid: &WignerGrid) -> Result<()> {
    let s = &grid.spec;
    let rows: Vec<WignerRow> = (0..s.n_q)
        .flat_map(|i| (0..s.n_p).map(move |j| (i, j)))
        .map(|(i, j)| WignerRow {
            q: s.q(i),
            p: s.p(j),
            w: grid.at(i, j),
        })
        .collect();
    write_rows(out, WIGNER_HEADER, &rows)
}

/// Rebuilds the grid from the first and last `q` and `p` samples and
/// checks every row against it.
pub fn read_wigner_csv<R: Read>(input: R) -> Result<WignerGrid> {
    let rows: Vec<WignerRow> = read_rows(input, WIGNER_HEADER)?;
    let first = rows
        .first()
        .ok_or_else(|| Error::Parse("empty Wigner table".into()))?;
    let n_p = rows.iter().take_while(|r| r.q == first.q).count();
    if n_p < 2 || rows.len() % n_p != 0 {
        return Err(Error::Parse(format!(
            "{} rows do not form a q × p grid",
            rows.len()
        )));
    }
    let n_q = rows.len() / n_p;
    let last = rows[rows.len() - 1];
    let spec = GridSpec::new(first.q, last.q, first.p, last.p, n_q, n_p)?;
    let tol = 1e-9 * (spec.dq().abs() + spec.dp().abs());
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = (k / n_p, k % n_p);
        if (r.q - spec.q(i)).abs() > tol || (r.p - spec.p(j)).abs() > tol {
            return Err(Error::Parse(format!(
                "row {} is off the uniform grid",
                k + 2
            )));
        }
    }
    WignerGrid::new(spec, rows.iter().map(|r| r.w).collect())
}

/// `{"grid": {...}, "values": [...]}`.
pub fn write_wigner_json<W: Write>(out: W, grid: &WignerGrid) -> Result<()> {
    serde_json::to_writer(out, grid)?;
    Ok(())
}

pub fn read_wigner_json<R: Read>(input: R) -> Result<WignerGrid> {
    let g: WignerGrid = serde_json::from_reader(input)?;
    WignerGrid::new(g.spec, g.values)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(input: R) -> Result<T> {
    Ok(serde_json::from_reader(input)?)
}

pub fn read_validation_json<R: Read>(input: R) -> Result<ValidationReport> {
    read_json(input)
}

/// File name of the Wigner snapshot at stored-time index `k`.
pub fn wigner_file_name(k: usize, json: bool) -> String {
    format!("wigner_t{k}.{}", if json { "json" } else { "csv" })
}
