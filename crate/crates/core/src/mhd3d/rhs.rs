use num_complex::Complex64;

use super::PhysicalParams;
use crate::error::{Error, Result};
use crate::integrator::{check_terms, Stage};
use crate::spectral::{curl, laplacian, ops::leray_in_place, Grid, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Index pairs of a symmetric 3x3 tensor stored as xx, xy, xz, yy, yz, zz.
const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn sym_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    SYM.iter().position(|&p| p == (a, b)).unwrap()
}

/// (div T)_i = Σ_j ∂_j T_ij for a symmetric tensor given by its six slots.
fn sym_divergence(g: &Grid, t: &[Vec<Complex64>]) -> [Vec<Complex64>; 3] {
    let k = [g.k(0), g.k(1), g.k(2)];
    std::array::from_fn(|i| {
        let (a, b, c) = (&t[sym_slot(i, 0)], &t[sym_slot(i, 1)], &t[sym_slot(i, 2)]);
        (0..g.len()).map(|m| I * (a[m] * k[0][m] + b[m] * k[1][m] + c[m] * k[2][m])).collect()
    })
}

/// (div P)_i = Σ_k ∂_k P_ki for a full tensor stored row-major (P_ki at 3k+i).
fn full_divergence(g: &Grid, p: &[Vec<Complex64>]) -> [Vec<Complex64>; 3] {
    let k = [g.k(0), g.k(1), g.k(2)];
    std::array::from_fn(|i| {
        let (a, b, c) = (&p[i], &p[3 + i], &p[6 + i]);
        (0..g.len()).map(|m| I * (a[m] * k[0][m] + b[m] * k[1][m] + c[m] * k[2][m])).collect()
    })
}

fn max_norm(p: &[Vec<f64>]) -> f64 {
    (0..p[0].len()).map(|i| p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i]).fold(0.0, f64::max).sqrt()
}

fn cross_into(a: &[Vec<f64>], b: &[Vec<f64>], out: &mut [Vec<f64>]) {
    for i in 0..a[0].len() {
        out[0][i] = a[1][i] * b[2][i] - a[2][i] * b[1][i];
        out[1][i] = a[2][i] * b[0][i] - a[0][i] * b[2][i];
        out[2][i] = a[0][i] * b[1][i] - a[1][i] * b[0][i];
    }
}

/// B_iB_j − u_iu_j in the six symmetric slots.
fn maxwell_minus_reynolds(u: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    SYM.iter()
        .map(|&(i, j)| (0..u[0].len()).map(|m| b[i][m] * b[j][m] - u[i][m] * u[j][m]).collect())
        .collect()
}

fn field(g: &std::sync::Arc<Grid>, comps: [Vec<Complex64>; 3]) -> VectorField {
    VectorField::from_coeffs(g, comps, false).expect("same lattice")
}

fn refs<'a>(fields: &[&'a VectorField]) -> Vec<&'a [Complex64]> {
    fields.iter().flat_map(|f| f.comps().iter().map(|c| c.as_slice())).collect()
}

/// Nonlinear terms of the (u, B) system:
/// N_u = P div(B⊗B − u⊗u), N_B = ∇×((u − εJ)×B).
pub(crate) fn nonlinear_physical(u: &VectorField, b: &VectorField, eps: f64) -> Result<Stage> {
    let g = u.grid();
    let j = curl(b);
    let p = g.inverse_many(&refs(&[u, b, &j]))?;
    let (pu, pb, pj) = (&p[0..3], &p[3..6], &p[6..9]);
    let mut prods = maxwell_minus_reynolds(pu, pb);
    let w: Vec<Vec<f64>> = (0..3).map(|a| pu[a].iter().zip(&pj[a]).map(|(x, y)| x - eps * y).collect()).collect();
    let mut emf = vec![vec![0.0; g.len()]; 3];
    cross_into(&w, pb, &mut emf);
    prods.extend(emf);
    let r: Vec<&[f64]> = prods.iter().map(|v| v.as_slice()).collect();
    let s = g.forward_many_dealiased(&r)?;
    let mut du = sym_divergence(g, &s[0..6]);
    leray_in_place(g, &mut du);
    let du = field(g, du);
    let db = curl(&field(g, [s[6].clone(), s[7].clone(), s[8].clone()]));
    check_terms(&[("momentum nonlinearity", &du), ("induction and Hall terms", &db)])?;
    Ok(Stage { terms: vec![du, db], umax: max_norm(pu), bmax: max_norm(pb) })
}

/// Nonlinear terms of the extended (u, B, v) system:
/// N_u = P div(B⊗B − u⊗u), N_B = ∇×(v×B),
/// N_v = N_u + ∇×(v×u − ε(∇×v)×B) + 2ε∇×(v·∇B), the last product taken
/// in divergence form ∂_k(v_k B).
pub(crate) fn nonlinear_extended(u: &VectorField, b: &VectorField, v: &VectorField, eps: f64) -> Result<Stage> {
    let g = u.grid();
    let cv = curl(v);
    let p = g.inverse_many(&refs(&[u, b, v, &cv]))?;
    let (pu, pb, pv, pc) = (&p[0..3], &p[3..6], &p[6..9], &p[9..12]);
    let mut prods = maxwell_minus_reynolds(pu, pb);
    let mut vb = vec![vec![0.0; g.len()]; 3];
    cross_into(pv, pb, &mut vb);
    let mut vu = vec![vec![0.0; g.len()]; 3];
    cross_into(pv, pu, &mut vu);
    let mut cb = vec![vec![0.0; g.len()]; 3];
    cross_into(pc, pb, &mut cb);
    for a in 0..3 {
        for (x, y) in vu[a].iter_mut().zip(&cb[a]) {
            *x -= eps * y;
        }
    }
    prods.extend(vb);
    prods.extend(vu);
    for kk in 0..3 {
        for i in 0..3 {
            prods.push(pv[kk].iter().zip(&pb[i]).map(|(x, y)| x * y).collect());
        }
    }
    let r: Vec<&[f64]> = prods.iter().map(|v| v.as_slice()).collect();
    let s = g.forward_many_dealiased(&r)?;
    let mut du = sym_divergence(g, &s[0..6]);
    leray_in_place(g, &mut du);
    let db = curl(&field(g, [s[6].clone(), s[7].clone(), s[8].clone()]));
    let mut inner = full_divergence(g, &s[12..21]);
    for a in 0..3 {
        for (x, y) in inner[a].iter_mut().zip(&s[9 + a]) {
            *x = *x * (2.0 * eps) + y;
        }
    }
    let rot = curl(&field(g, inner));
    let du = field(g, du);
    let dv = &du + &rot;
    check_terms(&[("momentum nonlinearity", &du), ("induction term", &db), ("electron velocity terms", &dv)])?;
    Ok(Stage { terms: vec![du, db, dv], umax: max_norm(pu), bmax: max_norm(pb) })
}

/// ε∇×((∇×B)×B) with the cross product formed on the grid and dealiased.
pub fn hall_term(b: &VectorField, eps: f64) -> Result<VectorField> {
    hall_term_with_current(&curl(b), b, eps)
}

/// ε∇×(J×B) for an independently supplied current J.
pub(crate) fn hall_term_with_current(j: &VectorField, b: &VectorField, eps: f64) -> Result<VectorField> {
    if eps == 0.0 {
        return Ok(VectorField::zeros(b.grid()));
    }
    let jb = crate::spectral::ops::cross(j, b, true)?;
    let out = curl(&jb).scale(eps);
    check_terms(&[("Hall term", &out)])?;
    Ok(out)
}

/// Full time derivative (du/dt, dB/dt) of the (u, B) system.
pub fn rhs_physical(state: &super::SimState3D, params: &PhysicalParams) -> Result<(VectorField, VectorField)> {
    params.validate()?;
    let s = nonlinear_physical(&state.u, &state.b, params.eps)?;
    let mut t = s.terms.into_iter();
    let du = t.next().unwrap().axpy(params.mu, &laplacian(&state.u))?;
    let db = t.next().unwrap().axpy(params.nu, &laplacian(&state.b))?;
    Ok((du, db))
}

/// Full time derivative (du/dt, dB/dt, dv/dt) of the extended system.
pub fn rhs_extended(
    state: &super::SimState3D,
    params: &PhysicalParams,
) -> Result<(VectorField, VectorField, VectorField)> {
    params.validate_extended()?;
    let v = state.v.as_ref().ok_or_else(|| Error::Config("extended right-hand side needs v".into()))?;
    let s = nonlinear_extended(&state.u, &state.b, v, params.eps)?;
    let mut t = s.terms.into_iter();
    let mu = params.mu;
    let du = t.next().unwrap().axpy(mu, &laplacian(&state.u))?;
    let db = t.next().unwrap().axpy(mu, &laplacian(&state.b))?;
    let dv = t.next().unwrap().axpy(mu, &laplacian(v))?;
    Ok((du, db, dv))
}

/// Pressure recovered from −Δπ = div(u·∇u − B·∇B), mean zero.
pub fn recover_pressure(u: &VectorField, b: &VectorField) -> Result<crate::spectral::ScalarField> {
    let g = u.grid();
    let p = g.inverse_many(&refs(&[u, b]))?;
    let prods = maxwell_minus_reynolds(&p[0..3], &p[3..6]);
    let r: Vec<&[f64]> = prods.iter().map(|v| v.as_slice()).collect();
    let s = g.forward_many_dealiased(&r)?;
    // div(B⊗B − u⊗u) = −F
    let f = sym_divergence(g, &s);
    let ksq = g.ksq();
    let (kx, ky, kz) = (g.k(0), g.k(1), g.k(2));
    let coeffs = (0..g.len())
        .map(|m| {
            if ksq[m] == 0.0 {
                Complex64::default()
            } else {
                -(I * (f[0][m] * kx[m] + f[1][m] * ky[m] + f[2][m] * kz[m])) / ksq[m]
            }
        })
        .collect();
    crate::spectral::ScalarField::from_coeffs(g, coeffs)
}
