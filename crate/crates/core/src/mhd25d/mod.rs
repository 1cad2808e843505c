//! The 2½D system: three-component fields depending on (x₁, x₂) only, with
//! the current j, the vorticity ω and the combined field E = εω + B.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{check_terms, if_rk2, Stage};
use crate::mhd3d::{stable_dt, PhysicalParams, StepControl};
use crate::spectral::ops::map_isotropic;
use crate::spectral::{advect, cross, curl, dot, gradient, laplacian, leray_project, Grid, VectorField};

/// State on a 2D lattice with cached derived fields.
#[derive(Clone, Debug)]
pub struct SimState25D {
    pub t: f64,
    eps: f64,
    u: VectorField,
    b: VectorField,
    j: VectorField,
    omega: VectorField,
    e: VectorField,
}

fn derived(u: &VectorField, b: &VectorField, eps: f64) -> (VectorField, VectorField, VectorField) {
    let j = curl(b);
    let omega = curl(u);
    let e = b.axpy(eps, &omega).expect("same lattice");
    (j, omega, e)
}

impl SimState25D {
    pub fn new(u: VectorField, b: VectorField, eps: f64) -> Result<Self> {
        if u.grid().dim() != 2 {
            return Err(Error::Shape("2½D fields live on a 2D lattice".into()));
        }
        if **u.grid() != **b.grid() {
            return Err(Error::Shape("u and B live on different lattices".into()));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("eps must be nonnegative, got {eps}")));
        }
        for (name, f) in [("u", &u), ("B", &b)] {
            if !f.is_finite() {
                return Err(Error::numeric(name));
            }
            if !f.satisfies_divfree(1e-12) {
                return Err(Error::Domain(format!("{name} is not divergence-free in (x₁, x₂)")));
            }
            if !f.mean_is_zero() {
                return Err(Error::Domain(format!("{name} has a nonzero mean")));
            }
        }
        Ok(Self::assemble(0.0, u, b, eps))
    }

    fn assemble(t: f64, u: VectorField, b: VectorField, eps: f64) -> Self {
        let (j, omega, e) = derived(&u, &b, eps);
        SimState25D { t, eps, u, b, j, omega, e }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn u(&self) -> &VectorField {
        &self.u
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    /// j = ∇̃×B.
    pub fn j(&self) -> &VectorField {
        &self.j
    }

    /// ω = ∇̃×u.
    pub fn omega(&self) -> &VectorField {
        &self.omega
    }

    /// E = εω + B.
    pub fn e(&self) -> &VectorField {
        &self.e
    }

    /// v = u − εj.
    pub fn v(&self) -> VectorField {
        self.u.axpy(-self.eps, &self.j).expect("same lattice")
    }

    /// Largest L² distance between the cached j, ω, E and their recomputed
    /// values.
    pub fn cache_defect(&self) -> f64 {
        let (j, omega, e) = derived(&self.u, &self.b, self.eps);
        [(&j - &self.j).l2(), (&omega - &self.omega).l2(), (&e - &self.e).l2()].into_iter().fold(0.0, f64::max)
    }
}

fn nonlinear(u: &VectorField, b: &VectorField, eps: f64) -> Result<Stage> {
    let j = curl(b);
    let bu = advect(b, u)?;
    let ub = advect(u, b)?;
    let du = leray_project(&(&advect(b, b)? - &advect(u, u)?));
    let mut db = &bu - &ub;
    if eps != 0.0 {
        let hall = &advect(&j, b)? - &advect(b, &j)?;
        db = db.axpy(eps, &hall)?;
    }
    check_terms(&[("momentum nonlinearity", &du), ("induction and Hall terms", &db)])?;
    Ok(Stage { terms: vec![du, db], umax: u.max_magnitude(), bmax: b.max_magnitude() })
}

/// (du/dt, dB/dt) in advective form:
/// du/dt = P(B̃·∇̃B − ũ·∇̃u) + μΔ̃u,
/// dB/dt = −ũ·∇̃B − εB̃·∇̃j + εj̃·∇̃B + νΔ̃B + B̃·∇̃u.
pub fn rhs_25d(state: &SimState25D, params: &PhysicalParams) -> Result<(VectorField, VectorField)> {
    params.validate()?;
    let s = nonlinear(&state.u, &state.b, params.eps)?;
    let mut t = s.terms.into_iter();
    let du = t.next().unwrap().axpy(params.mu, &laplacian(&state.u))?;
    let db = t.next().unwrap().axpy(params.nu, &laplacian(&state.b))?;
    Ok((du, db))
}

pub fn step_25d(state: &SimState25D, params: &PhysicalParams, control: &StepControl) -> Result<SimState25D> {
    control.validate()?;
    params.validate()?;
    if params.eps != state.eps {
        return Err(Error::Config(format!("state built with eps={} stepped with eps={}", state.eps, params.eps)));
    }
    let dt = control.dt;
    let grid = state.grid().clone();
    let guard = |s: &Stage| {
        let required = stable_dt(&grid, s.umax, s.bmax, params.eps, control.hall_cfl);
        if dt > required {
            return Err(Error::Cfl { dt, required });
        }
        Ok(())
    };
    let f = [state.u.clone(), state.b.clone()];
    let next = if_rk2(&f, &[params.mu, params.nu], dt, |y| nonlinear(&y[0], &y[1], params.eps), guard)?;
    let mut it = next.into_iter();
    Ok(SimState25D::assemble(state.t + dt, it.next().unwrap(), it.next().unwrap(), state.eps))
}

/// Ẽ·∇̃u − ũ·∇̃E + μΔ̃E, the right-hand side of the E equation.
fn e_transport(s: &SimState25D) -> Result<VectorField> {
    Ok(&advect(&s.e, &s.u)? - &advect(&s.u, &s.e)?)
}

/// Relative residual of ∂_t E − Ẽ·∇̃u + ũ·∇̃E = μΔ̃E between two consecutive
/// snapshots, taken in the frame of the heat semigroup: with
/// H = exp(μΔ̃ dt) and N the transport terms,
/// (E₁ − H E₀)/dt is compared with (N(E₁) + H N(E₀))/2 and the
/// difference is normalized by the mean of ‖E‖.
pub fn e_residual(before: &SimState25D, after: &SimState25D, params: &PhysicalParams, dt: f64) -> Result<f64> {
    params.validate()?;
    if params.mu != params.nu {
        return Err(Error::Config(format!(
            "the E equation needs mu == nu, got mu={} nu={}",
            params.mu, params.nu
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let heat = |f: &VectorField| map_isotropic(f, |k2| (-params.mu * k2 * dt).exp());
    let dedt = (&after.e - &heat(&before.e)).scale(1.0 / dt);
    let forcing = (&e_transport(after)? + &heat(&e_transport(before)?)).scale(0.5);
    let scale = 0.5 * (before.e.l2() + after.e.l2());
    let res = (&dedt - &forcing).l2();
    Ok(if scale == 0.0 { 0.0 } else { res / scale })
}

/// dB/dt from the rewritten form
/// −ũ·∇̃B + B̃·∇̃u + εΔ̃B×B + 2εj̃·∇̃B − ε∇̃(j·B) + νΔ̃B.
pub fn rewritten_b_rhs(state: &SimState25D, params: &PhysicalParams) -> Result<VectorField> {
    params.validate()?;
    let (u, b, j) = (&state.u, &state.b, &state.j);
    let eps = params.eps;
    let lap = laplacian(b);
    let mut out = (&advect(b, u)? - &advect(u, b)?).axpy(params.nu, &lap)?;
    if eps != 0.0 {
        let hall = cross(&lap, b, true)?.axpy(2.0, &advect(j, b)?)?;
        let hall = &hall - &gradient(&dot(j, b)?);
        out = out.axpy(eps, &hall)?;
    }
    Ok(out)
}

/// Relative residuals of the vector identities; `None` where a divergence
/// precondition fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// ∇̃×(y×z) = z̃·∇̃y − ỹ·∇̃z.
    pub curl_of_cross: Option<f64>,
    /// (a×b)·c = (c×a)·b = (b×c)·a, pointwise.
    pub triple_product: f64,
    /// ∇̃×(∇̃×y) + Δ̃y = 0.
    pub double_curl: Option<f64>,
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn identity_suite(
    y: &VectorField,
    z: &VectorField,
    a: &VectorField,
    b: &VectorField,
    c: &VectorField,
) -> Result<IdentityReport> {
    let divfree = |f: &VectorField| f.satisfies_divfree(1e-12);
    let curl_of_cross = if divfree(y) && divfree(z) {
        let lhs = curl(&cross(y, z, true)?);
        let rhs = &advect(z, y)? - &advect(y, z)?;
        Some(rel((&lhs - &rhs).l2(), lhs.l2().max(rhs.l2())))
    } else {
        None
    };
    let (pa, pb, pc) = (a.to_physical(), b.to_physical(), c.to_physical());
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..pa[0].len() {
        let at = |p: &[Vec<f64>; 3]| [p[0][i], p[1][i], p[2][i]];
        let (x, w, q) = (at(&pa), at(&pb), at(&pc));
        let cr = |l: [f64; 3], r: [f64; 3]| [l[1] * r[2] - l[2] * r[1], l[2] * r[0] - l[0] * r[2], l[0] * r[1] - l[1] * r[0]];
        let dt = |l: [f64; 3], r: [f64; 3]| l[0] * r[0] + l[1] * r[1] + l[2] * r[2];
        let t1 = dt(cr(x, w), q);
        let t2 = dt(cr(q, x), w);
        let t3 = dt(cr(w, q), x);
        worst = worst.max((t1 - t2).abs()).max((t1 - t3).abs());
        scale = scale.max(dt(x, x).sqrt() * dt(w, w).sqrt() * dt(q, q).sqrt());
    }
    let double_curl = divfree(y).then(|| {
        let lap = laplacian(y);
        rel((&curl(&curl(y)) + &lap).l2(), lap.l2())
    });
    Ok(IdentityReport { curl_of_cross, triple_product: rel(worst, scale), double_curl })
}

/// W = ‖u‖²‖∇̃u‖² + ‖∇̃u‖‖∇̃²u‖ with all norms in L².
pub fn w_functional(u: &VectorField) -> f64 {
    let l2 = u.l2();
    let grad = crate::sobolev::hs_norm(u, 1.0).expect("s ≥ 0");
    let hess = laplacian(u).l2();
    l2 * l2 * grad * grad + grad * hess
}
