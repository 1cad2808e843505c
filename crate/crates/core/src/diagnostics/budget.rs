use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mhd3d::{PhysicalParams, SimState3D};
use crate::sobolev::hs_norm;
use crate::spectral::{apply_lambda, curl, Grid, VectorField};

const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn cross_grid(a: &[Vec<f64>], b: &[Vec<f64>]) -> [Vec<f64>; 3] {
    let n = a[0].len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        out[0][i] = a[1][i] * b[2][i] - a[2][i] * b[1][i];
        out[1][i] = a[2][i] * b[0][i] - a[0][i] * b[2][i];
        out[2][i] = a[0][i] * b[1][i] - a[1][i] * b[0][i];
    }
    out
}

/// Σ_k |k|^{2s} Σ_ij Re(conj(T̂_ij) · i k_j f̂_i) for symmetric T in six slots:
/// the pairing (Λ^s T | ∇Λ^s f).
fn tensor_grad(g: &Grid, t: &[Vec<Complex64>], f: &VectorField, w2: &[f64]) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = 0.0;
    for (slot, &(a, b)) in SYM.iter().enumerate() {
        let kb = g.k(b);
        let ka = g.k(a);
        let (fa, fb) = (f.comp(a), f.comp(b));
        for m in 0..g.len() {
            if w2[m] == 0.0 {
                continue;
            }
            // T_ab pairs with ∂_b f_a and, off the diagonal, T_ba with ∂_a f_b
            let mut grad = i * kb[m] * fa[m];
            if a != b {
                grad += i * ka[m] * fb[m];
            }
            acc += w2[m] * (t[slot][m].conj() * grad).re;
        }
    }
    acc
}

/// Σ_k |k|^{2s} Re(conj(Ĝ)·(ik×f̂)): the pairing (Λ^s G | ∇×Λ^s f).
fn vector_curl(g: &Grid, gh: &[Vec<Complex64>], f: &VectorField, w2: &[f64]) -> f64 {
    let cf = curl(f);
    weighted(g, gh, cf.comps(), w2)
}

fn weighted(g: &Grid, a: &[Vec<Complex64>], b: &[Vec<Complex64>; 3], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for c in 0..3 {
        for m in 0..g.len() {
            acc += w[m] * (a[c][m].conj() * b[c][m]).re;
        }
    }
    acc
}

/// The eight budget terms at regularity s:
/// 1-2 from (Λ^s(u⊗u) − Λ^s(B⊗B) | ∇Λ^s u), 3 = (Λ^s(v×B) | ∇×Λ^s B),
/// 4-5 the tensor terms against ∇Λ^s v, 6 the commutator of the Hall
/// product, 7 = (Λ^s(v×u) | ∇×Λ^s v), 8 = 2ε(Λ^s(v·∇B) | ∇×Λ^s v).
pub fn budget_terms(u: &VectorField, b: &VectorField, v: &VectorField, params: &PhysicalParams, s: f64) -> Result<[f64; 8]> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Argument(format!("budget regularity must be nonnegative, got {s}")));
    }
    let g = u.grid();
    let eps = params.eps;
    let w = curl(v);
    let lw = apply_lambda(&w, s)?;
    let fields: Vec<&[Complex64]> =
        [u, b, v, &w, &lw].iter().flat_map(|f| f.comps().iter().map(|c| c.as_slice())).collect();
    let p = g.inverse_many(&fields)?;
    let (pu, pb, pv, pw, plw) = (&p[0..3], &p[3..6], &p[6..9], &p[9..12], &p[12..15]);
    let mut prods: Vec<Vec<f64>> = Vec::with_capacity(33);
    for src in [pu, pb] {
        for &(i, j) in &SYM {
            prods.push(src[i].iter().zip(&src[j]).map(|(x, y)| x * y).collect());
        }
    }
    prods.extend(cross_grid(pv, pb));
    prods.extend(cross_grid(pv, pu));
    prods.extend(cross_grid(pw, pb));
    prods.extend(cross_grid(plw, pb));
    for k in 0..3 {
        for i in 0..3 {
            prods.push(pv[k].iter().zip(&pb[i]).map(|(x, y)| x * y).collect());
        }
    }
    let r: Vec<&[f64]> = prods.iter().map(|x| x.as_slice()).collect();
    let sp = g.forward_many_dealiased(&r)?;
    let (uu, bb) = (&sp[0..6], &sp[6..12]);
    let (vxb, vxu, wxb, lwxb) = (&sp[12..15], &sp[15..18], &sp[18..21], &sp[21..24]);
    let vb = &sp[24..33];
    let ws: Vec<f64> = g.ksq().iter().map(|&q| if q == 0.0 { 0.0 } else { q.sqrt().powf(s) }).collect();
    let w2: Vec<f64> = ws.iter().map(|x| x * x).collect();
    let i = Complex64::new(0.0, 1.0);
    // v·∇B = Σ_k ∂_k(v_k B)
    let adv: Vec<Vec<Complex64>> = (0..3)
        .map(|c| (0..g.len()).map(|m| i * (g.k(0)[m] * vb[c][m] + g.k(1)[m] * vb[3 + c][m] + g.k(2)[m] * vb[6 + c][m])).collect())
        .collect();
    let a1 = tensor_grad(g, uu, u, &w2);
    let a2 = -tensor_grad(g, bb, u, &w2);
    let a3 = vector_curl(g, vxb, b, &w2);
    let a4 = tensor_grad(g, uu, v, &w2);
    let a5 = -tensor_grad(g, bb, v, &w2);
    let hall = weighted(g, wxb, w.comps(), &w2);
    let frozen = weighted(g, lwxb, w.comps(), &ws);
    let a6 = -eps * (hall - frozen);
    let a7 = vector_curl(g, vxu, v, &w2);
    let a8 = 2.0 * eps * vector_curl(g, &adv, v, &w2);
    Ok([a1, a2, a3, a4, a5, a6, a7, a8])
}

/// Centered-difference check of the three budget identities
/// ½ d/dt‖f‖²_{Ḣ^s} + μ‖f‖²_{Ḣ^{s+1}} = (terms) for f = u, B, v.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BudgetCheck {
    pub s: f64,
    /// Terms averaged over the two snapshots.
    pub terms: [f64; 8],
    /// |LHS − RHS| for u, B, v.
    pub residuals: [f64; 3],
    /// Residuals divided by the largest term of each identity.
    pub relative: [f64; 3],
}

fn extended_parts(state: &SimState3D) -> Result<[&VectorField; 3]> {
    let v = state
        .v
        .as_ref()
        .ok_or_else(|| Error::Config("budget identities need the extended formulation (v evolved)".into()))?;
    Ok([&state.u, &state.b, v])
}

pub fn budget_identities(
    before: &SimState3D,
    after: &SimState3D,
    params: &PhysicalParams,
    s: f64,
) -> Result<BudgetCheck> {
    params.validate_extended()?;
    let dt = after.t - before.t;
    if !(dt > 0.0) {
        return Err(Error::Argument("snapshots must be in increasing time order".into()));
    }
    let f0 = extended_parts(before)?;
    let f1 = extended_parts(after)?;
    let t0 = budget_terms(f0[0], f0[1], f0[2], params, s)?;
    let t1 = budget_terms(f1[0], f1[1], f1[2], params, s)?;
    let terms: [f64; 8] = std::array::from_fn(|i| 0.5 * (t0[i] + t1[i]));
    let rhs = [terms[0] + terms[1], terms[2], terms[3..8].iter().sum()];
    let mut residuals = [0.0; 3];
    let mut relative = [0.0; 3];
    for c in 0..3 {
        let (x0, x1) = (hs_norm(f0[c], s)?.powi(2), hs_norm(f1[c], s)?.powi(2));
        let d = 0.5 * (hs_norm(f0[c], s + 1.0)?.powi(2) + hs_norm(f1[c], s + 1.0)?.powi(2));
        let lhs = 0.5 * (x1 - x0) / dt + params.mu * d;
        residuals[c] = (lhs - rhs[c]).abs();
        let scale = (0.5 * (x1 - x0) / dt).abs().max(params.mu * d).max(rhs[c].abs());
        relative[c] = if scale == 0.0 { 0.0 } else { residuals[c] / scale };
    }
    Ok(BudgetCheck { s, terms, residuals, relative })
}

/// Ratio (dX²/dt + μD²)₊ / (X D²) between two snapshots, with X² and D² the
/// summed squared Ḣ^{1/2} and Ḣ^{3/2} norms of (u, B, v). Its maximum over
/// a run is the fitted constant of the critical differential inequality.
pub fn critical_constant_sample(before: &SimState3D, after: &SimState3D, params: &PhysicalParams) -> Result<f64> {
    let dt = after.t - before.t;
    if !(dt > 0.0) {
        return Err(Error::Argument("snapshots must be in increasing time order".into()));
    }
    let sums = |st: &SimState3D, s: f64| -> Result<f64> {
        let ve = st.electron_velocity(params.eps);
        let v = st.v.as_ref().unwrap_or(&ve);
        Ok(hs_norm(&st.u, s)?.powi(2) + hs_norm(&st.b, s)?.powi(2) + hs_norm(v, s)?.powi(2))
    };
    let (x0, x1) = (sums(before, 0.5)?, sums(after, 0.5)?);
    let d2 = 0.5 * (sums(before, 1.5)? + sums(after, 1.5)?);
    let lhs = (x1 - x0) / dt + params.mu * d2;
    let x = (0.5 * (x0 + x1)).sqrt();
    Ok(if x * d2 == 0.0 { 0.0 } else { lhs.max(0.0) / (x * d2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhd3d::{make_initial, step, InitialKind, StepControl};
    use crate::spectral::Grid;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_and_beltrami_terms_vanish() {
        let g = Grid::shared(3, 16).unwrap();
        let z = VectorField::zeros(&g);
        assert_eq!(budget_terms(&z, &z, &z, &params(), 0.5).unwrap(), [0.0; 8]);
        let (u, b) = make_initial(&g, InitialKind::Beltrami, 0.3).unwrap();
        let v = b.scale(-1.0);
        for s in [0.5, 1.0] {
            let t = budget_terms(&u, &b, &v, &params(), s).unwrap();
            assert!(t.iter().all(|x| x.abs() < 1e-13), "{t:?}");
        }
    }

    #[test]
    fn identities_converge_at_second_order() {
        let g = Grid::shared(3, 16).unwrap();
        let p = params();
        let (u, b) = make_initial(&g, InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 2 }, 0.02).unwrap();
        let s0 = SimState3D::extended(u, b, p.eps).unwrap();
        let check = |dt: f64, s: f64| {
            let s1 = step(&s0, &p, &StepControl::new(dt, 1.0).unwrap()).unwrap();
            budget_identities(&s0, &s1, &p, s).unwrap()
        };
        for s in [0.5, 1.0] {
            let (c1, c2) = (check(2e-3, s), check(1e-3, s));
            for i in 0..3 {
                assert!(c2.residuals[i] <= 1e-5, "{s} {c2:?}");
                let ratio = c1.residuals[i] / c2.residuals[i];
                assert!((3.0..5.0).contains(&ratio), "s={s} identity {i}: {ratio} {c1:?} {c2:?}");
            }
        }
    }

    #[test]
    fn physical_state_is_rejected() {
        let g = Grid::shared(3, 8).unwrap();
        let z = SimState3D::physical(VectorField::zeros(&g), VectorField::zeros(&g)).unwrap();
        let mut later = z.clone();
        later.t = 1e-3;
        assert!(matches!(budget_identities(&z, &later, &params(), 0.5), Err(Error::Config(_))));
    }
}
