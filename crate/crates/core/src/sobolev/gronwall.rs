use serde::Serialize;

use crate::error::{Error, Result};

/// Sampled functions for the Gronwall bootstrap
/// d/dt X² + D² ≤ C W X² + C X^α D².
#[derive(Clone, Debug)]
pub struct GronwallTrace {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub w: Vec<f64>,
    pub c: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GronwallVerdict {
    /// Smallness hypothesis 2 C X(0)^α exp((Cα/2) ∫W) < 1.
    pub condition: bool,
    /// X²(t) + ½∫D² ≤ X²(0) exp(C∫W) at every sample; `None` when the
    /// hypothesis fails and the bound is not asserted.
    pub bound_holds: Option<bool>,
    /// Minimum over samples after the first of RHS − LHS of the bound.
    pub margin: f64,
}

impl GronwallTrace {
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::Argument("empty Gronwall trace".into()));
        }
        if self.x.len() != n || self.d.len() != n || self.w.len() != n {
            return Err(Error::Shape("Gronwall trace columns differ in length".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("Gronwall trace times must increase strictly".into()));
        }
        let cols = [&self.times, &self.x, &self.d, &self.w];
        if cols.iter().any(|c| c.iter().any(|v| !v.is_finite())) || !self.c.is_finite() || !self.alpha.is_finite() {
            return Err(Error::numeric("Gronwall trace"));
        }
        if self.x.iter().chain(&self.d).chain(&self.w).any(|&v| v < 0.0) || self.c < 0.0 || self.alpha < 0.0 {
            return Err(Error::Domain("Gronwall trace entries must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Cumulative trapezoid integral of `y` sampled at `t`.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn gronwall_verify(trace: &GronwallTrace) -> Result<GronwallVerdict> {
    trace.validate()?;
    let (c, alpha) = (trace.c, trace.alpha);
    let int_w = cumulative_trapezoid(&trace.times, &trace.w);
    let d2: Vec<f64> = trace.d.iter().map(|d| d * d).collect();
    let int_d2 = cumulative_trapezoid(&trace.times, &d2);
    let x0 = trace.x[0];
    let total_w = *int_w.last().unwrap();
    let condition = 2.0 * c * x0.powf(alpha) * (0.5 * c * alpha * total_w).exp() < 1.0;
    let mut margin = f64::INFINITY;
    for i in 1..trace.times.len() {
        let lhs = trace.x[i] * trace.x[i] + 0.5 * int_d2[i];
        let rhs = x0 * x0 * (c * int_w[i]).exp();
        margin = margin.min(rhs - lhs);
    }
    if trace.times.len() == 1 {
        margin = 0.0;
    }
    let scale = (x0 * x0).max(f64::MIN_POSITIVE);
    let bound_holds = condition.then_some(margin >= -1e-12 * scale);
    Ok(GronwallVerdict { condition, bound_holds, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(n: usize, t_end: f64) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn exponential_decay_trace() {
        let t = times(400, 3.0);
        let x: Vec<f64> = t.iter().map(|s| 0.8 * (-s).exp()).collect();
        let d: Vec<f64> = x.iter().map(|v| (2.0f64).sqrt() * v).collect();
        let tr = GronwallTrace { w: vec![0.0; t.len()], times: t, x, d, c: 0.5, alpha: 1.0 };
        let v = gronwall_verify(&tr).unwrap();
        assert!(v.condition);
        assert_eq!(v.bound_holds, Some(true));
        assert!(v.margin > 0.0);
    }

    #[test]
    fn dissipative_trace_without_weight() {
        // X² decreases by exactly the dissipated amount of ½∫D²
        let t = times(100, 1.0);
        let x: Vec<f64> = t.iter().map(|s| (1.0 - 0.25 * s).sqrt()).collect();
        let d = vec![(0.5f64).sqrt(); t.len()];
        let tr = GronwallTrace { w: vec![0.0; t.len()], times: t, x, d, c: 0.1, alpha: 2.0 };
        assert_eq!(gronwall_verify(&tr).unwrap().bound_holds, Some(true));
    }

    #[test]
    fn violated_smallness() {
        let t = times(10, 1.0);
        let tr = GronwallTrace { x: vec![1.0; t.len()], d: vec![0.0; t.len()], w: vec![0.0; t.len()], times: t, c: 0.5, alpha: 1.0 };
        let v = gronwall_verify(&tr).unwrap();
        assert!(!v.condition);
        assert_eq!(v.bound_holds, None);
    }

    #[test]
    fn malformed_traces() {
        let empty = GronwallTrace { times: vec![], x: vec![], d: vec![], w: vec![], c: 1.0, alpha: 1.0 };
        assert!(gronwall_verify(&empty).is_err());
        let unordered = GronwallTrace { times: vec![0.0, 0.0], x: vec![1.0; 2], d: vec![0.0; 2], w: vec![0.0; 2], c: 1.0, alpha: 1.0 };
        assert!(gronwall_verify(&unordered).is_err());
    }
}
