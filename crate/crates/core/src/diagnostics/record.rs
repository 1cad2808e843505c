use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::budget::budget_terms;
use super::checks::cancellation_check;
use crate::error::Result;
use crate::mhd25d::{w_functional, SimState25D};
use crate::mhd3d::{PhysicalParams, SimState3D};
use crate::sobolev::hs_norm;
use crate::spectral::VectorField;

/// Frozen CSV column order of [`DiagnosticsRecord`].
pub const COLUMNS: [&str; 29] = [
    "t",
    "u_l2",
    "b_l2",
    "u_h1",
    "b_h1",
    "u_h12",
    "b_h12",
    "v_h12",
    "u_h32",
    "b_h32",
    "v_h32",
    "triple_h12",
    "diss_energy",
    "diss_h32",
    "a1",
    "a2",
    "a3",
    "a4",
    "a5",
    "a6",
    "a7",
    "a8",
    "cancellation",
    "v_weight",
    "w",
    "e_residual",
    "v_drift",
    "div_max",
    "dim",
];

/// One sample of a run. Norms are of u, B and v = u − εJ; `triple_h12` is
/// the sum of the three squared Ḣ^{1/2} norms. `diss_energy` accumulates
/// ∫ μ‖∇u‖² + ν‖∇B‖² and `diss_h32` accumulates ∫ of the summed squared
/// Ḣ^{3/2} norms. `v_drift` is ‖v − (u − εJ)‖/‖v‖ for an evolved v.
/// Optional columns are empty when not computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub u_l2: f64,
    pub b_l2: f64,
    pub u_h1: f64,
    pub b_h1: f64,
    pub u_h12: f64,
    pub b_h12: f64,
    pub v_h12: f64,
    pub u_h32: f64,
    pub b_h32: f64,
    pub v_h32: f64,
    pub triple_h12: f64,
    pub diss_energy: f64,
    pub diss_h32: f64,
    pub a: Option<[f64; 8]>,
    pub cancellation: Option<f64>,
    pub v_weight: Option<f64>,
    pub w: Option<f64>,
    pub e_residual: Option<f64>,
    pub v_drift: Option<f64>,
    /// Largest |k·f̂| over u and B.
    pub div_max: f64,
    pub dim: u8,
}

/// Optional, more expensive columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecordOptions {
    pub budget: bool,
    pub cancellation: bool,
}

fn h(f: &VectorField, s: f64) -> f64 {
    hs_norm(f, s).expect("s ≥ 0")
}

fn base(t: f64, u: &VectorField, b: &VectorField, v: &VectorField, dim: u8) -> DiagnosticsRecord {
    let (u_h12, b_h12, v_h12) = (h(u, 0.5), h(b, 0.5), h(v, 0.5));
    DiagnosticsRecord {
        t,
        u_l2: u.l2(),
        b_l2: b.l2(),
        u_h1: h(u, 1.0),
        b_h1: h(b, 1.0),
        u_h12,
        b_h12,
        v_h12,
        u_h32: h(u, 1.5),
        b_h32: h(b, 1.5),
        v_h32: h(v, 1.5),
        triple_h12: u_h12 * u_h12 + b_h12 * b_h12 + v_h12 * v_h12,
        diss_energy: 0.0,
        diss_h32: 0.0,
        a: None,
        cancellation: None,
        v_weight: None,
        w: None,
        e_residual: None,
        v_drift: None,
        div_max: u.max_divergence().max(b.max_divergence()),
        dim,
    }
}

impl DiagnosticsRecord {
    pub fn from_state_3d(state: &SimState3D, params: &PhysicalParams, opts: RecordOptions) -> Result<Self> {
        let ve = state.electron_velocity(params.eps);
        let mut r = base(state.t, &state.u, &state.b, &ve, 3);
        if let Some(v) = &state.v {
            let scale = v.l2();
            r.v_drift = Some(if scale == 0.0 { 0.0 } else { (v - &ve).l2() / scale });
            r.div_max = r.div_max.max(v.max_divergence());
            if opts.budget {
                r.a = Some(budget_terms(&state.u, &state.b, v, params, 0.5)?);
            }
        }
        if opts.cancellation {
            r.cancellation = Some(cancellation_check(state.v.as_ref().unwrap_or(&ve), &state.b)?);
        }
        Ok(r)
    }

    pub fn from_state_25d(state: &SimState25D) -> Self {
        let mut r = base(state.t, state.u(), state.b(), &state.v(), 2);
        r.w = Some(w_functional(state.u()));
        r
    }

    /// Squared dissipation rates: μ‖∇u‖² + ν‖∇B‖² and Σ‖·‖²_{Ḣ^{3/2}}.
    pub fn rates(&self, params: &PhysicalParams) -> (f64, f64) {
        (
            params.mu * self.u_h1 * self.u_h1 + params.nu * self.b_h1 * self.b_h1,
            self.u_h32 * self.u_h32 + self.b_h32 * self.b_h32 + self.v_h32 * self.v_h32,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.map_or(true, f64::is_finite))
    }

    fn values(&self) -> Vec<Option<f64>> {
        let mut v = vec![
            Some(self.t),
            Some(self.u_l2),
            Some(self.b_l2),
            Some(self.u_h1),
            Some(self.b_h1),
            Some(self.u_h12),
            Some(self.b_h12),
            Some(self.v_h12),
            Some(self.u_h32),
            Some(self.b_h32),
            Some(self.v_h32),
            Some(self.triple_h12),
            Some(self.diss_energy),
            Some(self.diss_h32),
        ];
        for i in 0..8 {
            v.push(self.a.map(|a| a[i]));
        }
        v.extend([self.cancellation, self.v_weight, self.w, self.e_residual, self.v_drift, Some(self.div_max)]);
        v.push(Some(self.dim as f64));
        v
    }

    /// One CSV row; floats use the shortest representation that reads back
    /// to the same value.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.values().into_iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            if i == COLUMNS.len() - 1 {
                write!(s, "{}", self.dim).unwrap();
            } else if let Some(x) = v {
                write!(s, "{x:?}").unwrap();
            }
        }
        s
    }
}

/// Accumulates records and their running dissipation integrals.
#[derive(Clone, Debug, Default)]
pub struct Recorder {
    pub records: Vec<DiagnosticsRecord>,
    rates: Vec<(f64, f64)>,
}

impl Recorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, mut r: DiagnosticsRecord, params: &PhysicalParams) {
        let rate = r.rates(params);
        if let (Some(prev), Some(&pr)) = (self.records.last(), self.rates.last()) {
            let h = r.t - prev.t;
            r.diss_energy = prev.diss_energy + 0.5 * h * (pr.0 + rate.0);
            r.diss_h32 = prev.diss_h32 + 0.5 * h * (pr.1 + rate.1);
        }
        self.records.push(r);
        self.rates.push(rate);
    }

    pub fn last_mut(&mut self) -> Option<&mut DiagnosticsRecord> {
        self.records.last_mut()
    }

    pub fn to_csv(&self) -> String {
        to_csv(&self.records)
    }
}

pub fn csv_header() -> String {
    COLUMNS.join(",")
}

pub fn to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = csv_header();
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(to_csv(records).as_bytes())?;
    Ok(())
}
