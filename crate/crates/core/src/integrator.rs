//! Integrating-factor Heun scheme shared by the 3D and 2½D solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ops::leray_project, Grid, VectorField};

/// Nonlinear terms of one stage plus the grid maxima of |u| and |B| seen
/// while forming them.
pub(crate) struct Stage {
    pub terms: Vec<VectorField>,
    pub umax: f64,
    pub bmax: f64,
}

/// e^{-c |k|² dt} tabulated on the integer values of |k|².
fn decay_table(grid: &Grid, c: f64, dt: f64) -> Vec<f64> {
    let top = grid.ksq().iter().copied().fold(0.0, f64::max) as usize;
    (0..=top).map(|m| (-c * m as f64 * dt).exp()).collect()
}

fn combine(
    grid: &Grid,
    y: &VectorField,
    n1: &VectorField,
    n2: Option<&VectorField>,
    table: &[f64],
    dt: f64,
) -> VectorField {
    let ksq = grid.ksq();
    let comps = std::array::from_fn(|a| {
        let (yc, n1c) = (y.comp(a), n1.comp(a));
        match n2 {
            // L (y + dt n1)
            None => (0..grid.len()).map(|i| (yc[i] + n1c[i] * dt) * table[ksq[i] as usize]).collect(),
            // L (y + dt/2 n1) + dt/2 n2
            Some(n2) => {
                let n2c = n2.comp(a);
                (0..grid.len())
                    .map(|i| (yc[i] + n1c[i] * (0.5 * dt)) * table[ksq[i] as usize] + n2c[i] * (0.5 * dt))
                    .collect::<Vec<Complex64>>()
            }
        }
    });
    VectorField::from_coeffs(y.grid(), comps, false).expect("same lattice")
}

/// One step of integrating-factor Heun for `∂_t y_i = visc_i Δ y_i + N_i(y)`:
///
/// a = L(y + dt N(y)),  y' = L y + dt/2 (L N(y) + N(a)),  L = e^{visc Δ dt}.
///
/// `guard` sees the first-stage maxima before the second stage is formed.
/// Results are Leray-projected and mean-free.
pub(crate) fn if_rk2(
    fields: &[VectorField],
    visc: &[f64],
    dt: f64,
    mut nonlinear: impl FnMut(&[VectorField]) -> Result<Stage>,
    guard: impl FnOnce(&Stage) -> Result<()>,
) -> Result<Vec<VectorField>> {
    let grid = fields[0].grid().clone();
    let tables: Vec<Vec<f64>> = visc.iter().map(|&c| decay_table(&grid, c, dt)).collect();
    let s1 = nonlinear(fields)?;
    guard(&s1)?;
    let mid: Vec<VectorField> =
        fields.iter().enumerate().map(|(i, y)| combine(&grid, y, &s1.terms[i], None, &tables[i], dt)).collect();
    let s2 = nonlinear(&mid)?;
    let mut out = Vec::with_capacity(fields.len());
    for (i, y) in fields.iter().enumerate() {
        let mut next = leray_project(&combine(&grid, y, &s1.terms[i], Some(&s2.terms[i]), &tables[i], dt));
        next.remove_mean();
        if !next.is_finite() {
            return Err(Error::numeric(format!("time step of field {i}")));
        }
        out.push(next);
    }
    Ok(out)
}

/// Checks that every term of a stage is finite, naming the first bad one.
pub(crate) fn check_terms(terms: &[(&str, &VectorField)]) -> Result<()> {
    for (name, t) in terms {
        if !t.is_finite() {
            return Err(Error::numeric(*name));
        }
    }
    Ok(())
}
