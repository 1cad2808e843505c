use serde::Serialize;

use crate::error::{Error, Result};
use crate::mhd25d::{w_functional, SimState25D};
use crate::mhd3d::PhysicalParams;
use crate::sobolev::{cumulative_trapezoid, hs_norm};
use crate::spectral::VectorField;

/// Squared norms of a 2½D state used by the fitted-constant reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanarSample {
    pub t: f64,
    pub u_sq: f64,
    pub b_sq: f64,
    pub v_sq: f64,
    pub grad_v_sq: f64,
    /// ‖(u, B, v)‖².
    pub l2_sum: f64,
    /// ‖(∇̃u, ∇̃B, ∇̃v)‖².
    pub grad_sum: f64,
    pub grad_b: f64,
    pub lap_b: f64,
    pub w: f64,
    pub omega_sq: f64,
    pub grad_omega_sq: f64,
}

fn sq(f: &VectorField, s: f64) -> f64 {
    hs_norm(f, s).expect("s ≥ 0").powi(2)
}

impl PlanarSample {
    pub fn from_state(s: &SimState25D) -> Self {
        let (u, b, v) = (s.u(), s.b(), s.v());
        PlanarSample {
            t: s.t,
            u_sq: sq(u, 0.0),
            b_sq: sq(b, 0.0),
            v_sq: sq(&v, 0.0),
            grad_v_sq: sq(&v, 1.0),
            l2_sum: sq(u, 0.0) + sq(b, 0.0) + sq(&v, 0.0),
            grad_sum: sq(u, 1.0) + sq(b, 1.0) + sq(&v, 1.0),
            grad_b: sq(b, 1.0).sqrt(),
            lap_b: sq(b, 2.0).sqrt(),
            w: w_functional(u),
            omega_sq: sq(s.omega(), 0.0),
            grad_omega_sq: sq(s.omega(), 1.0),
        }
    }

    fn b_h1_sq(&self) -> f64 {
        self.b_sq + self.grad_b * self.grad_b
    }

    fn grad_b_h1_sq(&self) -> f64 {
        self.grad_b * self.grad_b + self.lap_b * self.lap_b
    }
}

/// The ω bound ‖ω‖² + ∫‖∇̃ω‖² ≤ 2‖(ω₀,B₀)‖²(1 + exp(C‖(u₀,B₀)‖⁴)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaBound {
    pub lhs_max: f64,
    /// Smallest C ≥ 0 for which the bound holds along the run.
    pub fitted_c: f64,
    /// Right-hand side at the fitted C.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanarConstants {
    /// C in d/dt‖v‖² + min(μ,ν)‖∇̃v‖² ≤ C‖(u,B,v)‖²‖(∇̃u,∇̃B,∇̃v)‖².
    pub v_inequality: f64,
    /// C in d/dt‖B‖²_{H¹} + ν‖∇̃B‖²_{H¹} ≤ C W ‖B‖²_{H¹} + C‖∇̃B‖‖Δ̃B‖².
    pub h1_inequality: f64,
    pub omega: OmegaBound,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

pub fn planar_constants(samples: &[PlanarSample], params: &PhysicalParams) -> Result<PlanarConstants> {
    params.validate()?;
    if samples.len() < 2 {
        return Err(Error::Argument("fitted constants need at least two samples".into()));
    }
    let nu_min = params.mu.min(params.nu);
    let mut v_c: f64 = 0.0;
    let mut h1_c: f64 = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            return Err(Error::Argument("samples must increase in time".into()));
        }
        let avg = |f: &dyn Fn(&PlanarSample) -> f64| 0.5 * (f(a) + f(b));
        let lhs = (b.v_sq - a.v_sq) / dt + nu_min * avg(&|s| s.grad_v_sq);
        v_c = v_c.max(ratio(lhs, avg(&|s| s.l2_sum * s.grad_sum)));
        let lhs = (b.b_h1_sq() - a.b_h1_sq()) / dt + params.nu * avg(&|s| s.grad_b_h1_sq());
        h1_c = h1_c.max(ratio(lhs, avg(&|s| s.w * s.b_h1_sq() + s.grad_b * s.lap_b * s.lap_b)));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let diss = cumulative_trapezoid(&t, &samples.iter().map(|s| s.grad_omega_sq).collect::<Vec<_>>());
    let lhs_max = samples.iter().zip(&diss).map(|(s, d)| s.omega_sq + d).fold(0.0, f64::max);
    let s0 = &samples[0];
    let base = 2.0 * (s0.omega_sq + s0.b_sq);
    let q = (s0.u_sq + s0.b_sq).powi(2);
    let (fitted_c, holds) = if lhs_max <= 2.0 * base {
        (0.0, true)
    } else if q > 0.0 {
        ((lhs_max / base - 1.0).ln() / q, true)
    } else {
        (f64::INFINITY, false)
    };
    let bound = if fitted_c.is_finite() { base * (1.0 + (fitted_c * q).exp()) } else { f64::INFINITY };
    Ok(PlanarConstants { v_inequality: v_c, h1_inequality: h1_c, omega: OmegaBound { lhs_max, fitted_c, bound, holds } })
}
