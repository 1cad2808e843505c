use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::{adjointness_check, cancellation_check, leray_check};
use crate::error::Result;
use crate::mhd25d::identity_suite;
use crate::sobolev::{
    gronwall_verify, hs_norm, inequality_probe, interpolation_check, kato_ponce_probe, GronwallTrace, InequalityId,
    KatoPonceExponents, ProbeOptions,
};
use crate::spectral::{curl, curl_inverse, random_field, Grid};

/// One named check with its worst value over all samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckLine {
    fn at_most(name: &str, samples: usize, worst: f64, tolerance: f64) -> Self {
        CheckLine { name: name.into(), samples, worst, tolerance, passed: worst <= tolerance }
    }
}

/// Sampled maximum of one inequality at two resolutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeLine {
    pub name: String,
    pub coarse_n: usize,
    pub coarse_max: f64,
    pub fine_max: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub n: usize,
    pub fields: usize,
    pub pairs: usize,
    pub interpolation_samples: usize,
    pub probe_samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { n: 32, fields: 200, pairs: 100, interpolation_samples: 500, probe_samples: 16, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub identities: Vec<CheckLine>,
    pub cancellation: CheckLine,
    pub interpolation: CheckLine,
    pub probes: Vec<ProbeLine>,
    pub gronwall: Vec<CheckLine>,
    pub passed: bool,
}

const IDENTITY_TOL: f64 = 1e-11;

fn band_top(n: usize) -> f64 {
    // products of two fields stay alias-free
    ((n as f64 - 1.0) / 3.0).floor().min(6.0)
}

/// Operator identities on seeded random fields, on the 3D and the planar
/// lattice.
pub fn identity_checks(opts: &CheckOptions) -> Result<Vec<CheckLine>> {
    let names = [
        "curl-inverse-of-curl",
        "leray-symmetry",
        "leray-idempotence",
        "curl-adjointness",
        "triple-product",
        "curl-of-cross",
        "double-curl",
        "curl-norm-equivalence",
    ];
    let mut worst = [0.0f64; 8];
    let mut count = 0;
    for dim in [3, 2] {
        let g = Grid::shared(dim, opts.n)?;
        let top = band_top(opts.n);
        let per_dim = if dim == 3 { opts.fields } else { opts.fields.div_ceil(4) };
        for i in 0..per_dim {
            let s = opts.seed.wrapping_mul(7919).wrapping_add(10 * i as u64 + dim as u64 * 1_000_000);
            let y = random_field(&g, 1.0, top, 1.0, s, true)?;
            let z = random_field(&g, 1.0, top, 1.0, s + 1, true)?;
            let a = random_field(&g, 1.0, top, 1.0, s + 2, false)?;
            let b = random_field(&g, 1.0, top, 1.0, s + 3, false)?;
            let c = random_field(&g, 1.0, top, 1.0, s + 4, false)?;
            let back = curl_inverse(&curl(&y))?;
            worst[0] = worst[0].max((&back - &y).l2() / y.l2());
            let (sym, idem) = leray_check(&a, &b)?;
            worst[1] = worst[1].max(sym);
            worst[2] = worst[2].max(idem);
            worst[3] = worst[3].max(adjointness_check(&a, &b)?);
            let r = identity_suite(&y, &z, &a, &b, &c)?;
            worst[4] = worst[4].max(r.triple_product);
            worst[5] = worst[5].max(r.curl_of_cross.unwrap_or(f64::INFINITY));
            worst[6] = worst[6].max(r.double_curl.unwrap_or(f64::INFINITY));
            let w = curl(&y);
            for sv in [0.0, 0.5, 1.0, 1.5] {
                let (lhs, rhs) = (hs_norm(&y, sv + 1.0)?, hs_norm(&w, sv)?);
                worst[7] = worst[7].max((lhs - rhs).abs() / lhs);
            }
            count += 1;
        }
    }
    Ok(names.iter().zip(worst).map(|(n, w)| CheckLine::at_most(n, count, w, IDENTITY_TOL)).collect())
}

/// Hall cancellation on random divergence-free pairs.
pub fn cancellation_checks(opts: &CheckOptions) -> Result<CheckLine> {
    let g = Grid::shared(3, opts.n)?;
    let top = band_top(opts.n);
    let mut worst: f64 = 0.0;
    for i in 0..opts.pairs {
        let s = opts.seed.wrapping_mul(104_729).wrapping_add(2 * i as u64);
        let v = random_field(&g, 1.0, top, 1.0, s, true)?;
        let b = random_field(&g, 1.0, top, 1.0, s + 1, true)?;
        worst = worst.max(cancellation_check(&v, &b)?);
    }
    Ok(CheckLine::at_most("hall-cancellation", opts.pairs, worst, 1e-12))
}

/// Interpolation inequality on random fields and random admissible
/// exponents; the worst value is the largest lhs/rhs − 1.
pub fn interpolation_checks(opts: &CheckOptions) -> Result<CheckLine> {
    let g = Grid::shared(3, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x1f3d);
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for i in 0..opts.interpolation_samples {
        let top = rng.gen_range(1.5..5.0);
        let f = random_field(&g, 1.0, top, 1.0, opts.seed.wrapping_add(i as u64), i % 2 == 0)?;
        let s0 = rng.gen_range(0.0..2.0);
        let s1 = s0 + rng.gen_range(0.0..2.0);
        let theta = rng.gen_range(0.0..=1.0);
        let r = interpolation_check(&f, s0, s1, theta)?;
        all &= r.holds;
        worst = worst.max(r.lhs / r.rhs - 1.0);
    }
    let mut line = CheckLine::at_most("interpolation", opts.interpolation_samples, worst, 1e-10);
    line.passed &= all;
    Ok(line)
}

/// Embedding, Gagliardo–Nirenberg, product and Kato–Ponce maxima at `n`
/// and `2n`; each must be finite and agree within a factor 2.
pub fn probe_checks(opts: &CheckOptions) -> Result<Vec<ProbeLine>> {
    let base = ProbeOptions { samples: opts.probe_samples, n: opts.n, band: (1.0, 4.0), seed: opts.seed };
    let fine = ProbeOptions { n: 2 * opts.n, ..base };
    let line = |name: &str, a: f64, b: f64| ProbeLine {
        name: name.into(),
        coarse_n: opts.n,
        coarse_max: a,
        fine_max: b,
        passed: a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 && a.max(b) <= 2.0 * a.min(b),
    };
    let mut out = Vec::new();
    for id in InequalityId::ALL {
        let (a, b) = (inequality_probe(id, &base)?, inequality_probe(id, &fine)?);
        out.push(line(id.as_str(), a.max_ratio, b.max_ratio));
    }
    let e = KatoPonceExponents { s: 1.0, p: 2.0, p1: 4.0, p2: 4.0, p3: 4.0, p4: 4.0 };
    let (a, b) = (kato_ponce_probe(&e, 2, &base)?, kato_ponce_probe(&e, 2, &fine)?);
    out.push(line(&a.commutator.id, a.commutator.max_ratio, b.commutator.max_ratio));
    out.push(line(&a.product.id, a.product.max_ratio, b.product.max_ratio));
    Ok(out)
}

/// The verifier on three traces whose outcome is known in closed form.
pub fn gronwall_checks() -> Result<Vec<CheckLine>> {
    let times = |n: usize, t_end: f64| -> Vec<f64> { (0..=n).map(|i| t_end * i as f64 / n as f64).collect() };
    let mut out = Vec::new();

    let t = times(400, 3.0);
    let x: Vec<f64> = t.iter().map(|s| 0.8 * (-s).exp()).collect();
    let d: Vec<f64> = x.iter().map(|v| 2f64.sqrt() * v).collect();
    let tr = GronwallTrace { w: vec![0.0; t.len()], times: t, x, d, c: 0.5, alpha: 1.0 };
    let v = gronwall_verify(&tr)?;
    out.push(CheckLine {
        name: "gronwall-exponential".into(),
        samples: tr.times.len(),
        worst: -v.margin,
        tolerance: 0.0,
        passed: v.condition && v.bound_holds == Some(true) && v.margin > 0.0,
    });

    let t = times(100, 1.0);
    let x: Vec<f64> = t.iter().map(|s| (1.0 - 0.25 * s).sqrt()).collect();
    let d = vec![0.5f64.sqrt(); t.len()];
    let tr = GronwallTrace { w: vec![0.0; t.len()], times: t, x, d, c: 0.1, alpha: 2.0 };
    let v = gronwall_verify(&tr)?;
    out.push(CheckLine {
        name: "gronwall-dissipative".into(),
        samples: tr.times.len(),
        worst: -v.margin,
        tolerance: 1e-12,
        passed: v.bound_holds == Some(true),
    });

    let t = times(10, 1.0);
    let tr = GronwallTrace { x: vec![1.0; t.len()], d: vec![0.0; t.len()], w: vec![0.0; t.len()], times: t, c: 0.5, alpha: 1.0 };
    let v = gronwall_verify(&tr)?;
    out.push(CheckLine {
        name: "gronwall-violated-smallness".into(),
        samples: tr.times.len(),
        worst: 2.0 * tr.c * tr.x[0],
        tolerance: 1.0,
        passed: !v.condition && v.bound_holds.is_none(),
    });
    Ok(out)
}

/// All identity and probe suites; no time stepping.
pub fn run_checks(opts: &CheckOptions) -> Result<CheckReport> {
    let identities = identity_checks(opts)?;
    let cancellation = cancellation_checks(opts)?;
    let interpolation = interpolation_checks(opts)?;
    let probes = probe_checks(opts)?;
    let gronwall = gronwall_checks()?;
    let passed = identities.iter().all(|l| l.passed)
        && cancellation.passed
        && interpolation.passed
        && probes.iter().all(|p| p.passed)
        && gronwall.iter().all(|l| l.passed);
    Ok(CheckReport { identities, cancellation, interpolation, probes, gronwall, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let opts = CheckOptions { n: 16, fields: 4, pairs: 4, interpolation_samples: 20, probe_samples: 2, seed: 3 };
        let r = run_checks(&opts).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.identities.len(), 8);
        assert_eq!(r.gronwall.len(), 3);
    }
}
