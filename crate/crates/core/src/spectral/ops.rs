//! Fourier multipliers: fractional derivatives, curl, divergence, gradient,
//! Laplacian, Leray projection, inverse curl, frequency filters and the
//! two-thirds dealiasing mask.
//!
//! All multipliers are homogeneous and vanish at k = 0. On a 2D lattice
//! `k3 = 0`, so `curl` is the 2½D operator ∇̃× and `leray_project` acts on
//! the first two components only.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Direction of a grid/spectrum transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Isotropic scalar symbol `m(|k|²)` applied to every component.
pub(crate) fn map_isotropic(f: &VectorField, symbol: impl Fn(f64) -> f64) -> VectorField {
    let ksq = f.grid().ksq();
    let comps = f.comps().clone().map(|mut c| {
        for (v, &k2) in c.iter_mut().zip(ksq) {
            *v *= symbol(k2);
        }
        c
    });
    let mut out = VectorField::from_parts(f.grid(), comps, f.is_divfree());
    out.set_divfree(f.is_divfree());
    out
}

fn map_isotropic_scalar(f: &ScalarField, symbol: impl Fn(f64) -> f64) -> ScalarField {
    let ksq = f.grid().ksq();
    let coeffs = f.coeffs().iter().zip(ksq).map(|(v, &k2)| v * symbol(k2)).collect();
    ScalarField::from_coeffs(f.grid(), coeffs).expect("same lattice")
}

/// Symbol of Λ^s: |k|^s, zero at k = 0.
fn lambda_symbol(s: f64) -> impl Fn(f64) -> f64 {
    move |k2: f64| if k2 == 0.0 { 0.0 } else if s == 0.0 { 1.0 } else { k2.powf(0.5 * s) }
}

/// Λ^s f: multiplies the coefficient at k by |k|^s; the mean mode maps to 0.
pub fn apply_lambda(f: &VectorField, s: f64) -> Result<VectorField> {
    if s < 0.0 && !f.mean_is_zero() {
        return Err(Error::Domain("negative-order Λ^s needs a mean-free field".into()));
    }
    if s == 0.0 {
        let mut out = f.clone();
        out.remove_mean();
        out.set_divfree(f.is_divfree());
        return Ok(out);
    }
    Ok(map_isotropic(f, lambda_symbol(s)))
}

pub fn apply_lambda_scalar(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if s < 0.0 && !f.mean_is_zero() {
        return Err(Error::Domain("negative-order Λ^s needs a mean-free field".into()));
    }
    Ok(map_isotropic_scalar(f, lambda_symbol(s)))
}

/// Curl with symbol ik×. On 2D lattices this is ∇̃×:
/// (∂₂f³, −∂₁f³, ∂₁f² − ∂₂f¹).
pub fn curl(f: &VectorField) -> VectorField {
    let g = f.grid();
    let (kx, ky, kz) = (g.k(0), g.k(1), g.k(2));
    let [a, b, c] = f.comps();
    let len = g.len();
    let mut out = [vec![Complex64::default(); len], vec![Complex64::default(); len], vec![Complex64::default(); len]];
    for i in 0..len {
        out[0][i] = I * (ky[i] * c[i] - kz[i] * b[i]);
        out[1][i] = I * (kz[i] * a[i] - kx[i] * c[i]);
        out[2][i] = I * (kx[i] * b[i] - ky[i] * a[i]);
    }
    VectorField::from_parts(g, out, true)
}

/// Divergence ik·f̂ (first two components on 2D lattices).
pub fn divergence(f: &VectorField) -> ScalarField {
    let g = f.grid();
    let (kx, ky, kz) = (g.k(0), g.k(1), g.k(2));
    let [a, b, c] = f.comps();
    let coeffs = (0..g.len()).map(|i| I * (kx[i] * a[i] + ky[i] * b[i] + kz[i] * c[i])).collect();
    ScalarField::from_coeffs(g, coeffs).expect("same lattice")
}

/// Gradient ik f̂.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let c = f.coeffs();
    let comps = [0, 1, 2].map(|a| {
        let k = g.k(a);
        (0..g.len()).map(|i| I * k[i] * c[i]).collect::<Vec<_>>()
    });
    VectorField::from_parts(g, comps, false)
}

/// Partial derivative ∂_axis of a scalar.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    let k = g.k(axis);
    let coeffs = f.coeffs().iter().zip(k).map(|(c, &kk)| I * kk * c).collect();
    ScalarField::from_coeffs(g, coeffs).expect("same lattice")
}

/// Laplacian −|k|² f̂.
pub fn laplacian(f: &VectorField) -> VectorField {
    map_isotropic(f, |k2| -k2)
}

pub fn laplacian_scalar(f: &ScalarField) -> ScalarField {
    map_isotropic_scalar(f, |k2| -k2)
}

/// Leray projector I − kk*/|k|², fixing divergence-free fields.
pub fn leray_project(f: &VectorField) -> VectorField {
    let mut comps = f.comps().clone();
    leray_in_place(f.grid(), &mut comps);
    VectorField::from_parts(f.grid(), comps, true)
}

pub(crate) fn leray_in_place(g: &Grid, comps: &mut [Vec<Complex64>; 3]) {
    let (kx, ky, kz, ksq) = (g.k(0), g.k(1), g.k(2), g.ksq());
    let [a, b, c] = comps;
    for i in 0..g.len() {
        if ksq[i] == 0.0 {
            continue;
        }
        let d = (a[i] * kx[i] + b[i] * ky[i] + c[i] * kz[i]) / ksq[i];
        a[i] -= d * kx[i];
        b[i] -= d * ky[i];
        c[i] -= d * kz[i];
    }
}

/// Inverse curl: B̂(k) = i k × Ĵ(k) / |k|², inverting `curl` on mean-free
/// divergence-free fields.
pub fn curl_inverse(j: &VectorField) -> Result<VectorField> {
    if !j.mean_is_zero() {
        return Err(Error::Domain("inverse curl is undefined on the mean mode".into()));
    }
    let c = curl(j);
    let ksq = j.grid().ksq();
    let comps = c.into_comps().map(|mut v| {
        for (x, &k2) in v.iter_mut().zip(ksq) {
            *x = if k2 == 0.0 { Complex64::default() } else { *x / k2 };
        }
        v
    });
    Ok(VectorField::from_parts(j.grid(), comps, true))
}

/// Keeps coefficients with `lo <= |k| <= hi` (inclusive on both ends) and
/// zeroes the rest. `hi` may be infinite.
pub fn band_filter(f: &VectorField, lo: f64, hi: f64) -> Result<VectorField> {
    if lo.is_nan() || hi.is_nan() || lo < 0.0 || lo > hi {
        return Err(Error::Argument(format!("band filter needs 0 <= lo <= hi, got [{lo}, {hi}]")));
    }
    // |k|² is an integer; the slack keeps shells at a squared-root radius
    let (lo2, hi2) = (lo * lo * (1.0 - 1e-12), hi * hi * (1.0 + 1e-12));
    let mut out = map_isotropic(f, |k2| if k2 >= lo2 && k2 <= hi2 { 1.0 } else { 0.0 });
    out.set_divfree(f.is_divfree());
    Ok(out)
}

/// The smallest shell radius strictly above `rho` present on the lattice,
/// i.e. the lower bound of the complement of the ball of radius `rho`.
pub fn next_shell(grid: &Grid, rho: f64) -> f64 {
    let r2 = rho * rho;
    grid.ksq().iter().copied().filter(|&k2| k2 > r2).fold(f64::INFINITY, f64::min).sqrt()
}

/// Zeroes every coefficient outside the two-thirds mask.
pub fn dealias(f: &VectorField) -> VectorField {
    let mut comps = f.comps().clone();
    dealias_in_place(f.grid(), &mut comps);
    let mut out = VectorField::from_parts(f.grid(), comps, f.is_divfree());
    out.set_divfree(f.is_divfree());
    out
}

pub(crate) fn dealias_in_place(g: &Grid, comps: &mut [Vec<Complex64>]) {
    let mask = g.mask();
    for c in comps.iter_mut() {
        for (v, &m) in c.iter_mut().zip(mask) {
            if !m {
                *v = Complex64::default();
            }
        }
    }
}

pub fn dealias_scalar(f: &ScalarField) -> ScalarField {
    let mut c = vec![f.coeffs().to_vec()];
    dealias_in_place(f.grid(), &mut c);
    ScalarField::from_coeffs(f.grid(), c.pop().unwrap()).expect("same lattice")
}

/// Pointwise cross product of two grid vector fields.
pub fn cross_physical(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let len = a[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for i in 0..len {
        out[0][i] = a[1][i] * b[2][i] - a[2][i] * b[1][i];
        out[1][i] = a[2][i] * b[0][i] - a[0][i] * b[2][i];
        out[2][i] = a[0][i] * b[1][i] - a[1][i] * b[0][i];
    }
    out
}

/// Spectral cross product a × b formed on the grid. With `dealiased` the
/// result is truncated to the two-thirds band.
pub fn cross(a: &VectorField, b: &VectorField, dealiased: bool) -> Result<VectorField> {
    if **a.grid() != **b.grid() {
        return Err(Error::Shape("cross product of fields on different lattices".into()));
    }
    let p = cross_physical(&a.to_physical(), &b.to_physical());
    let mut out = VectorField::from_physical(a.grid(), [&p[0], &p[1], &p[2]])?;
    if dealiased {
        out = dealias(&out);
    }
    Ok(out)
}

/// `(a·∇)b` with the products formed on the grid and dealiased.
pub fn advect(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    let g = a.grid();
    let pa = a.to_physical();
    let mut acc = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
    for c in 0..3 {
        let bc = b.component(c);
        let grads: Vec<ScalarField> = (0..g.dim()).map(|ax| partial(&bc, ax)).collect();
        let refs: Vec<&[num_complex::Complex64]> = grads.iter().map(|s| s.coeffs()).collect();
        let phys = g.inverse_many(&refs)?;
        for (ax, d) in phys.iter().enumerate() {
            for i in 0..g.len() {
                acc[c][i] += pa[ax][i] * d[i];
            }
        }
    }
    Ok(dealias(&VectorField::from_physical(g, [&acc[0], &acc[1], &acc[2]])?))
}

/// Pointwise dot product a·b, dealiased.
pub fn dot(a: &VectorField, b: &VectorField) -> Result<ScalarField> {
    let g = a.grid();
    let (pa, pb) = (a.to_physical(), b.to_physical());
    let vals: Vec<f64> = (0..g.len()).map(|i| pa[0][i] * pb[0][i] + pa[1][i] * pb[1][i] + pa[2][i] * pb[2][i]).collect();
    Ok(dealias_scalar(&ScalarField::from_physical(g, &vals)?))
}

/// Transform a field between grid values and coefficients.
pub fn transform_scalar(grid: &Arc<Grid>, data: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    let mut buf = data.to_vec();
    match direction {
        Direction::Forward => grid.forward_complex(&mut buf)?,
        Direction::Inverse => grid.inverse_complex(&mut buf)?,
    }
    Ok(buf)
}

/// Single-mode field `amp * e^{ik·x}` + conjugate in component `comp`.
pub fn single_mode(grid: &Arc<Grid>, k: [i64; 3], comp: usize, amp: Complex64) -> Result<VectorField> {
    let pos = grid.index(k).ok_or_else(|| Error::Argument(format!("wavevector {k:?} not on lattice")))?;
    let neg = grid.index([-k[0], -k[1], -k[2]]).ok_or_else(|| Error::Argument(format!("wavevector {k:?} not on lattice")))?;
    let mut f = VectorField::zeros(grid);
    let comps = f.comps_mut();
    comps[comp][pos] += amp;
    comps[comp][neg] += amp.conj();
    Ok(f)
}
