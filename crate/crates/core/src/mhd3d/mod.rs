//! The 3D Hall-MHD system in the (u, B) and extended (u, B, v) formulations.

mod rhs;

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use rhs::{hall_term, recover_pressure, rhs_extended, rhs_physical};

use crate::error::{Error, Result};
use crate::integrator::if_rk2;
use crate::sobolev::hs_norm;
use crate::spectral::{curl, random_field, Grid, VectorField};

/// Viscosity `mu`, resistivity `nu` and Hall coefficient `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mu: f64,
    pub nu: f64,
    pub eps: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { mu: 1.0, nu: 1.0, eps: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(mu: f64, nu: f64, eps: f64) -> Result<Self> {
        let p = PhysicalParams { mu, nu, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) || !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("mu and nu must be positive, got mu={} nu={}", self.mu, self.nu)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be nonnegative, got {}", self.eps)));
        }
        Ok(())
    }

    /// The extended formulation additionally needs `mu == nu`.
    pub fn validate_extended(&self) -> Result<()> {
        self.validate()?;
        if self.mu != self.nu {
            return Err(Error::Config(format!(
                "the extended formulation needs mu == nu, got mu={} nu={}",
                self.mu, self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Physical,
    Extended,
}

impl FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Formulation::Physical),
            "extended" => Ok(Formulation::Extended),
            _ => Err(Error::Unknown(format!("formulation `{s}`"))),
        }
    }
}

/// Time plus the evolved fields. `v` is present exactly in the extended
/// formulation.
#[derive(Clone, Debug)]
pub struct SimState3D {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
    pub v: Option<VectorField>,
}

fn check_evolved(name: &str, f: &VectorField) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::numeric(name));
    }
    if !f.satisfies_divfree(1e-12) {
        return Err(Error::Domain(format!("{name} is not divergence-free")));
    }
    if !f.mean_is_zero() {
        return Err(Error::Domain(format!("{name} has a nonzero mean")));
    }
    Ok(())
}

impl SimState3D {
    /// State of the (u, B) formulation at t = 0.
    pub fn physical(u: VectorField, b: VectorField) -> Result<Self> {
        if **u.grid() != **b.grid() {
            return Err(Error::Shape("u and B live on different lattices".into()));
        }
        check_evolved("u", &u)?;
        check_evolved("B", &b)?;
        Ok(SimState3D { t: 0.0, u, b, v: None })
    }

    /// State of the extended formulation with v = u − ε∇×B.
    pub fn extended(u: VectorField, b: VectorField, eps: f64) -> Result<Self> {
        let mut s = Self::physical(u, b)?;
        s.v = Some(s.u.axpy(-eps, &curl(&s.b))?);
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn formulation(&self) -> Formulation {
        if self.v.is_some() {
            Formulation::Extended
        } else {
            Formulation::Physical
        }
    }

    /// The current J = ∇×B.
    pub fn current(&self) -> VectorField {
        curl(&self.b)
    }

    /// u − εJ computed from u and B.
    pub fn electron_velocity(&self, eps: f64) -> VectorField {
        self.u.axpy(-eps, &self.current()).expect("same lattice")
    }

    /// ‖u‖²_{Ḣ^{1/2}} + ‖B‖²_{Ḣ^{1/2}} + ‖u − εJ‖²_{Ḣ^{1/2}}.
    pub fn triple_norm_sq(&self, eps: f64) -> f64 {
        let h = |f: &VectorField| hs_norm(f, 0.5).expect("s ≥ 0").powi(2);
        h(&self.u) + h(&self.b) + h(&self.electron_velocity(eps))
    }

    /// ‖v − (u − ε∇×B)‖_{L²}, zero when v is absent.
    pub fn v_drift(&self, eps: f64) -> f64 {
        match &self.v {
            Some(v) => (v - &self.electron_velocity(eps)).l2(),
            None => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "if-rk2")]
    IfRk2,
}

/// Step size, end time and the safety factor of the explicit stability
/// guards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub hall_cfl: f64,
}

impl StepControl {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let c = StepControl { dt, t_end, scheme: Scheme::IfRk2, hall_cfl: 0.25 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.hall_cfl > 0.0 && self.hall_cfl <= 1.0) {
            return Err(Error::Config(format!("hall_cfl must lie in (0, 1], got {}", self.hall_cfl)));
        }
        Ok(())
    }

    /// Number of steps of size `dt` needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Largest step allowed by the explicit guards
/// dt ≤ c_h / (ε max|B| k_max²) and dt ≤ c_h / ((max|u| + max|B|) k_max),
/// with k_max the largest retained |k|.
pub fn stable_dt(grid: &Grid, umax: f64, bmax: f64, eps: f64, hall_cfl: f64) -> f64 {
    let kmax = grid.kmax();
    let mut dt = f64::INFINITY;
    if eps > 0.0 && bmax > 0.0 {
        dt = dt.min(hall_cfl / (eps * bmax * kmax * kmax));
    }
    if umax + bmax > 0.0 {
        dt = dt.min(hall_cfl / ((umax + bmax) * kmax));
    }
    dt
}

/// Stability bound for the current state.
pub fn state_stable_dt(state: &SimState3D, params: &PhysicalParams, hall_cfl: f64) -> f64 {
    stable_dt(state.grid(), state.u.max_magnitude(), state.b.max_magnitude(), params.eps, hall_cfl)
}

/// Advances every present field by one integrating-factor Heun step.
pub fn step(state: &SimState3D, params: &PhysicalParams, control: &StepControl) -> Result<SimState3D> {
    control.validate()?;
    let dt = control.dt;
    let grid = state.grid().clone();
    let guard = |s: &crate::integrator::Stage| {
        let required = stable_dt(&grid, s.umax, s.bmax, params.eps, control.hall_cfl);
        if dt > required {
            return Err(Error::Cfl { dt, required });
        }
        Ok(())
    };
    let eps = params.eps;
    let next = match &state.v {
        None => {
            params.validate()?;
            let f = [state.u.clone(), state.b.clone()];
            if_rk2(&f, &[params.mu, params.nu], dt, |y| rhs::nonlinear_physical(&y[0], &y[1], eps), guard)?
        }
        Some(v) => {
            params.validate_extended()?;
            let f = [state.u.clone(), state.b.clone(), v.clone()];
            if_rk2(&f, &[params.mu; 3], dt, |y| rhs::nonlinear_extended(&y[0], &y[1], &y[2], eps), guard)?
        }
    };
    let mut it = next.into_iter();
    Ok(SimState3D { t: state.t + dt, u: it.next().unwrap(), b: it.next().unwrap(), v: it.next() })
}

/// Initial data families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// u = 0, B = δ·ABC with the ABC field (sin z + cos y, sin x + cos z, sin y + cos x).
    Beltrami,
    /// Divergence-free random fields in the shell band `[lo, hi]`, each with
    /// L² norm δ.
    RandomBand { lo: f64, hi: f64, seed: u64 },
    /// Taylor–Green velocity and its magnetic counterpart, both scaled by δ.
    TaylorGreen,
    Zero,
}

impl FromStr for InitialKind {
    type Err = Error;
    /// Parses `beltrami`, `taylor-green`, `zero` or
    /// `random-band:lo:hi:seed` (band and seed optional, default 1:4:0).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or("");
        let kind = match head {
            "beltrami" => InitialKind::Beltrami,
            "taylor-green" => InitialKind::TaylorGreen,
            "zero" => InitialKind::Zero,
            "random-band" => {
                let rest: Vec<&str> = parts.by_ref().collect();
                let num = |i: usize, d: f64| -> Result<f64> {
                    rest.get(i).map_or(Ok(d), |v| v.parse().map_err(|_| Error::Config(format!("bad number `{v}` in `{s}`"))))
                };
                let seed = rest.get(2).map_or(Ok(0), |v| v.parse().map_err(|_| Error::Config(format!("bad seed in `{s}`"))))?;
                return Ok(InitialKind::RandomBand { lo: num(0, 1.0)?, hi: num(1, 4.0)?, seed });
            }
            _ => return Err(Error::Unknown(format!("initial-data kind `{s}`"))),
        };
        if parts.next().is_some() {
            return Err(Error::Config(format!("`{head}` takes no parameters")));
        }
        Ok(kind)
    }
}

/// ABC field with unit coefficients; a curl eigenfield with eigenvalue 1.
pub fn abc_field(grid: &Arc<Grid>) -> VectorField {
    let mut f = VectorField::from_fn(grid, |x| [x[2].sin() + x[1].cos(), x[0].sin() + x[2].cos(), x[1].sin() + x[0].cos()]);
    f.remove_mean();
    crate::spectral::leray_project(&f)
}

/// Builds (u0, B0): divergence-free, mean-free and Hermitian.
pub fn make_initial(grid: &Arc<Grid>, kind: InitialKind, amplitude: f64) -> Result<(VectorField, VectorField)> {
    if kind != InitialKind::Zero && !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::Argument(format!("amplitude must be positive, got {amplitude}")));
    }
    let (u, b) = match kind {
        InitialKind::Zero => (VectorField::zeros(grid), VectorField::zeros(grid)),
        InitialKind::Beltrami => (VectorField::zeros(grid), abc_field(grid).scale(amplitude)),
        InitialKind::TaylorGreen => {
            let d = amplitude;
            let mut u = VectorField::from_fn(grid, |x| {
                [d * x[0].sin() * x[1].cos() * x[2].cos(), -d * x[0].cos() * x[1].sin() * x[2].cos(), 0.0]
            });
            let mut b = VectorField::from_fn(grid, |x| {
                [d * x[0].cos() * x[1].sin() * x[2].cos(), -d * x[0].sin() * x[1].cos() * x[2].cos(), 0.0]
            });
            u.remove_mean();
            b.remove_mean();
            (crate::spectral::leray_project(&u), crate::spectral::leray_project(&b))
        }
        InitialKind::RandomBand { lo, hi, seed } => (
            random_field(grid, lo, hi, amplitude, seed.wrapping_mul(2), true)?,
            random_field(grid, lo, hi, amplitude, seed.wrapping_mul(2).wrapping_add(1), true)?,
        ),
    };
    Ok((u, b))
}

/// Relative residuals of the scaling covariance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingResiduals {
    /// Momentum right-hand side.
    pub momentum: f64,
    /// Induction right-hand side with ε = 0.
    pub induction: f64,
    /// Hall term with J and B both rescaled like a velocity.
    pub hall: f64,
}

/// S_λ f(x) = λ f(λx): on the torus the mode k moves to λk, scaled by λ.
pub fn rescale(f: &VectorField, lambda: u32) -> Result<VectorField> {
    let g = f.grid();
    let l = lambda as i64;
    let mut out = VectorField::zeros(g);
    let comps = out.comps_mut();
    for idx in 0..g.len() {
        let k = g.wavevector(idx);
        let any = (0..3).any(|a| f.comp(a)[idx].norm() != 0.0);
        if !any {
            continue;
        }
        let target = g
            .index([k[0] * l, k[1] * l, k[2] * l])
            .ok_or_else(|| Error::Argument(format!("mode {k:?} leaves the lattice under x ↦ {lambda}x")))?;
        for a in 0..3 {
            comps[a][target] += f.comp(a)[idx] * lambda as f64;
        }
    }
    Ok(out)
}

fn support_radius(f: &VectorField) -> i64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&i| (0..3).any(|a| f.comp(a)[i].norm() != 0.0))
        .map(|i| g.wavevector(i).iter().map(|k| k.abs()).max().unwrap())
        .max()
        .unwrap_or(0)
}

/// Zeroes every mode with some |k_i| above `r`.
fn truncate(f: &VectorField, r: i64) -> VectorField {
    let g = f.grid();
    let mut out = f.clone();
    let comps = out.comps_mut();
    for idx in 0..g.len() {
        if g.wavevector(idx).iter().any(|k| k.abs() > r) {
            for c in comps.iter_mut() {
                c[idx] = Default::default();
            }
        }
    }
    out
}

fn relative(a: &VectorField, b: &VectorField) -> f64 {
    let scale = a.l2().max(b.l2());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).l2() / scale
    }
}

/// Compares right-hand sides at rescaled data against the rescaled
/// right-hand side: rhs(S_λu, S_λB) = λ² S_λ(rhs(u, B)) for ε = 0, and the
/// same relation for the Hall term with J and B both treated as velocities.
pub fn scaling_covariance_check(
    u: &VectorField,
    b: &VectorField,
    params: &PhysicalParams,
    lambda: u32,
) -> Result<ScalingResiduals> {
    if lambda == 0 {
        return Err(Error::Argument("λ must be a positive integer".into()));
    }
    let g = u.grid();
    let band = support_radius(u).max(support_radius(b)) * 2;
    let reach = band * lambda as i64;
    if reach > g.kcut() {
        return Err(Error::Argument(format!(
            "data too rough for λ = {lambda}: products reach |k_i| = {reach} beyond the cutoff {}",
            g.kcut()
        )));
    }
    let l2 = (lambda * lambda) as f64;
    let mhd_params = PhysicalParams { eps: 0.0, ..*params };
    let base = SimState3D { t: 0.0, u: u.clone(), b: b.clone(), v: None };
    let scaled = SimState3D { t: 0.0, u: rescale(u, lambda)?, b: rescale(b, lambda)?, v: None };
    let (du0, db0) = rhs_physical(&base, &mhd_params)?;
    let (du0, db0) = (truncate(&du0, band), truncate(&db0, band));
    let (du1, db1) = rhs_physical(&scaled, &mhd_params)?;
    let (du1, db1) = (truncate(&du1, reach), truncate(&db1, reach));
    let momentum = relative(&du1, &rescale(&du0, lambda)?.scale(l2));
    let induction = relative(&db1, &rescale(&db0, lambda)?.scale(l2));
    let j = curl(b);
    let h0 = truncate(&rhs::hall_term_with_current(&j, b, params.eps.max(1.0))?, band);
    let h1 = truncate(&rhs::hall_term_with_current(&rescale(&j, lambda)?, &scaled.b, params.eps.max(1.0))?, reach);
    let hall = relative(&h1, &rescale(&h0, lambda)?.scale(l2));
    Ok(ScalingResiduals { momentum, induction, hall })
}
