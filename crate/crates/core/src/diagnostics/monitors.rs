use serde::Serialize;

use super::energy::cumulative_integral;
use super::record::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::mhd3d::{PhysicalParams, SimState3D};
use crate::sobolev::{cumulative_trapezoid, hs_norm};
use crate::spectral::VectorField;

/// Upticks below this fraction of the initial triple norm count as
/// rounding.
pub const UPTICK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub nonincreasing: bool,
    /// Largest increase of the triple norm between consecutive samples,
    /// relative to its initial value.
    pub max_uptick: f64,
    /// X(t_j) + (μ/2)∫_{t_i}^{t_j} D² ≤ X(t_i) for consecutive samples.
    pub integrated_holds: bool,
    /// Largest violation of the integrated inequality relative to X(0);
    /// negative when it holds with room.
    pub integrated_excess: f64,
}

pub fn monotonicity_monitor(records: &[DiagnosticsRecord], params: &PhysicalParams) -> MonotonicityReport {
    let x0 = records.first().map_or(0.0, |r| r.triple_h12);
    let scale = if x0 > 0.0 { x0 } else { 1.0 };
    let mut max_uptick: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        max_uptick = max_uptick.max((b.triple_h12 - a.triple_h12) / scale);
        let (da, db) = (a.rates(params).1, b.rates(params).1);
        let diss = 0.5 * params.mu * 0.5 * (b.t - a.t) * (da + db);
        excess = excess.max((b.triple_h12 + diss - a.triple_h12) / scale);
    }
    if records.len() < 2 {
        excess = 0.0;
    }
    MonotonicityReport {
        nonincreasing: max_uptick <= UPTICK_TOLERANCE,
        max_uptick,
        integrated_holds: excess <= UPTICK_TOLERANCE,
        integrated_excess: excess,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// (t, triple norm) at evenly spaced checkpoints, last sample included.
    pub checkpoints: Vec<(f64, f64)>,
    /// Least-squares rate r of triple ≈ C e^{−rt}; `None` when a sample is 0.
    pub rate: Option<f64>,
    pub final_ratio: f64,
    pub passes: bool,
}

/// Fitted exponential decay of the triple norm; passes when the final
/// value is at most `fraction` of the initial one.
pub fn decay_monitor(records: &[DiagnosticsRecord], checkpoints: usize, fraction: f64) -> Result<DecayReport> {
    if records.len() < 2 {
        return Err(Error::Argument("decay monitor needs at least two samples".into()));
    }
    let n = records.len();
    let k = checkpoints.clamp(1, n);
    let mut cps: Vec<(f64, f64)> = (0..k).map(|i| i * (n - 1) / k.max(1)).map(|i| (records[i].t, records[i].triple_h12)).collect();
    cps.push((records[n - 1].t, records[n - 1].triple_h12));
    cps.dedup_by(|a, b| a.0 == b.0);
    let rate = if records.iter().all(|r| r.triple_h12 > 0.0) {
        let (ts, ys): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.t, r.triple_h12.ln())).unzip();
        let tm = ts.iter().sum::<f64>() / n as f64;
        let ym = ys.iter().sum::<f64>() / n as f64;
        let cov: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
        let var: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
        Some(-cov / var)
    } else {
        None
    };
    let x0 = records[0].triple_h12;
    let final_ratio = if x0 == 0.0 { 0.0 } else { records[n - 1].triple_h12 / x0 };
    Ok(DecayReport { checkpoints: cps, rate, final_ratio, passes: final_ratio <= fraction })
}

/// Per-sample quantities of a twin run: run A is the reference solution,
/// run B the perturbed one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwinSample {
    pub t: f64,
    pub du_l2: f64,
    pub db_l2: f64,
    pub dv_l2: f64,
    pub grad_du_sq: f64,
    pub grad_db_sq: f64,
    /// ‖(u, B, J)‖⁴_{Ḣ¹} of run A.
    pub weight: f64,
    /// ‖(u₁,u₂,B₁,B₂,v₁,v₂)‖⁴_{Ḣ¹} + ‖v₁‖²_{Ḣ^{3/2}}.
    pub v_weight: f64,
}

fn h(f: &VectorField, s: f64) -> f64 {
    hs_norm(f, s).expect("s ≥ 0")
}

pub fn twin_sample(a: &SimState3D, b: &SimState3D, eps: f64) -> Result<TwinSample> {
    if **a.grid() != **b.grid() {
        return Err(Error::Shape("twin runs on different lattices".into()));
    }
    if a.t != b.t {
        return Err(Error::Argument(format!("twin samples at different times {} and {}", a.t, b.t)));
    }
    let (du, db) = (&a.u - &b.u, &a.b - &b.b);
    let (va, vb) = (a.electron_velocity(eps), b.electron_velocity(eps));
    let dv = &va - &vb;
    let ja = a.current();
    let w2 = h(&a.u, 1.0).powi(2) + h(&a.b, 1.0).powi(2) + h(&ja, 1.0).powi(2);
    let six: f64 = [&a.u, &b.u, &a.b, &b.b, &va, &vb].iter().map(|f| h(f, 1.0).powi(2)).sum();
    Ok(TwinSample {
        t: a.t,
        du_l2: du.l2(),
        db_l2: db.l2(),
        dv_l2: dv.l2(),
        grad_du_sq: h(&du, 1.0).powi(2),
        grad_db_sq: h(&db, 1.0).powi(2),
        weight: w2 * w2,
        v_weight: six * six + h(&va, 1.5).powi(2),
    })
}

/// Deltas with their running integrals and the bound evaluated at the
/// fitted constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwinRunDelta {
    pub t: f64,
    pub du_l2: f64,
    pub db_l2: f64,
    pub dv_l2: f64,
    /// ∫ ‖∇δu‖².
    pub int_grad_du: f64,
    /// ∫ ‖∇δB‖².
    pub int_grad_db: f64,
    /// ‖(δu,δB)‖² + μ∫‖∇δu‖² + ν∫‖∇δB‖².
    pub lhs: f64,
    /// ‖(δu,δB)(0)‖² + C K ∫ ‖(δu,δB)‖² ‖(u,B,J)‖⁴_{Ḣ¹} at the fitted C.
    pub gronwall_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakStrongReport {
    pub deltas: Vec<TwinRunDelta>,
    /// Prefactor K = (1 + ε⁴)/min(μ, ν)³.
    pub prefactor: f64,
    /// Smallest C ≥ 0 making the bound hold at every sample.
    pub fitted_c: f64,
    pub max_delta: f64,
    pub bound_holds: bool,
}

pub fn weakstrong_monitor(samples: &[TwinSample], params: &PhysicalParams) -> Result<WeakStrongReport> {
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::Argument("twin monitor needs at least one sample".into()));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let col = |f: &dyn Fn(&TwinSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let int_gu = cumulative_integral(&t, &col(&|s| s.grad_du_sq));
    let int_gb = cumulative_integral(&t, &col(&|s| s.grad_db_sq));
    let forcing = cumulative_trapezoid(&t, &col(&|s| (s.du_l2 * s.du_l2 + s.db_l2 * s.db_l2) * s.weight));
    let k = (1.0 + params.eps.powi(4)) / params.mu.min(params.nu).powi(3);
    let d0 = samples[0].du_l2.powi(2) + samples[0].db_l2.powi(2);
    let lhs: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| s.du_l2.powi(2) + s.db_l2.powi(2) + params.mu * int_gu[i] + params.nu * int_gb[i])
        .collect();
    let mut fitted_c: f64 = 0.0;
    let mut bound_holds = true;
    for i in 1..samples.len() {
        let excess = lhs[i] - d0;
        if excess > 0.0 {
            if forcing[i] > 0.0 {
                fitted_c = fitted_c.max(excess / (k * forcing[i]));
            } else if excess > 1e-13 * d0.max(f64::MIN_POSITIVE) {
                bound_holds = false;
            }
        }
    }
    let deltas = samples
        .iter()
        .enumerate()
        .map(|(i, s)| TwinRunDelta {
            t: s.t,
            du_l2: s.du_l2,
            db_l2: s.db_l2,
            dv_l2: s.dv_l2,
            int_grad_du: int_gu[i],
            int_grad_db: int_gb[i],
            lhs: lhs[i],
            gronwall_rhs: d0 + fitted_c * k * forcing[i],
        })
        .collect();
    let max_delta = samples.iter().map(|s| s.du_l2.hypot(s.db_l2)).fold(0.0, f64::max);
    Ok(WeakStrongReport { deltas, prefactor: k, fitted_c, max_delta, bound_holds })
}
