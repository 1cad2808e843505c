use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::norms::{hs_norm_scalar, lp_norm, oversampled};
use crate::error::{Error, Result};
use crate::spectral::{apply_lambda_scalar, ops::partial, random_scalar, Grid, ScalarField};

/// Registered inequalities whose constant is estimated by sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InequalityId {
    /// ‖f‖_{L³} ≲ ‖f‖_{Ḣ^{1/2}} in 3D.
    Em3dHalf,
    /// ‖f‖_{L⁶} ≲ ‖f‖_{Ḣ¹} in 3D.
    Em3dOne,
    /// ‖f‖_{L⁴} ≲ ‖f‖_{Ḣ^{1/2}} in 2D.
    Em2dHalf,
    /// ‖f‖_{L⁴} ≲ ‖f‖_{L²}^{1/2} ‖∇f‖_{L²}^{1/2} in 2D.
    Gn1_2dP4,
    /// ‖f‖_{L^∞} ≲ ‖f‖_{Ḣ¹}^{1/2} ‖f‖_{Ḣ²}^{1/2} in 3D.
    Gn2_3d,
    /// ‖fg‖_{L²} ≲ ‖f‖_{Ḣ^{1/2}} ‖g‖_{Ḣ¹} in 3D.
    Product3d,
}

impl InequalityId {
    pub const ALL: [InequalityId; 6] = [
        InequalityId::Em3dHalf,
        InequalityId::Em3dOne,
        InequalityId::Em2dHalf,
        InequalityId::Gn1_2dP4,
        InequalityId::Gn2_3d,
        InequalityId::Product3d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::Em3dHalf => "em-3d-half",
            InequalityId::Em3dOne => "em-3d-one",
            InequalityId::Em2dHalf => "em-2d-half",
            InequalityId::Gn1_2dP4 => "gn1-2d-p4",
            InequalityId::Gn2_3d => "gn2-3d",
            InequalityId::Product3d => "product-3d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InequalityId::Em2dHalf | InequalityId::Gn1_2dP4 => 2,
            _ => 3,
        }
    }

    /// LHS / RHS with the constant stripped; `None` when the right-hand side
    /// vanishes (degenerate sample). `g` is only read by the product law.
    pub fn ratio(&self, f: &ScalarField, g: &ScalarField) -> Result<Option<f64>> {
        let (lhs, rhs) = match self {
            InequalityId::Em3dHalf => (lp_norm(f, 3.0)?, hs_norm_scalar(f, 0.5)?),
            InequalityId::Em3dOne => (lp_norm(f, 6.0)?, hs_norm_scalar(f, 1.0)?),
            InequalityId::Em2dHalf => (lp_norm(f, 4.0)?, hs_norm_scalar(f, 0.5)?),
            InequalityId::Gn1_2dP4 => {
                let rhs = hs_norm_scalar(f, 0.0)?.sqrt() * hs_norm_scalar(f, 1.0)?.sqrt();
                (lp_norm(f, 4.0)?, rhs)
            }
            InequalityId::Gn2_3d => {
                let rhs = hs_norm_scalar(f, 1.0)?.sqrt() * hs_norm_scalar(f, 2.0)?.sqrt();
                (lp_norm(f, f64::INFINITY)?, rhs)
            }
            InequalityId::Product3d => {
                let v = oversampled(f.grid(), &[f.coeffs(), g.coeffs()])?;
                let ms = v[0].iter().zip(&v[1]).map(|(a, b)| (a * b).powi(2)).sum::<f64>() / v[0].len() as f64;
                (ms.sqrt(), hs_norm_scalar(f, 0.5)? * hs_norm_scalar(g, 1.0)?)
            }
        };
        Ok(guarded_ratio(lhs, rhs))
    }
}

fn guarded_ratio(lhs: f64, rhs: f64) -> Option<f64> {
    (rhs > 0.0 && rhs.is_finite()).then_some(lhs / rhs)
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Unknown(format!("inequality `{s}`")))
    }
}

/// Sampled ratios for one inequality.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub id: String,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub resolution: usize,
    pub ratios: Vec<f64>,
}

impl ProbeReport {
    fn from_ratios(id: String, resolution: usize, raw: Vec<Option<f64>>) -> Self {
        let skipped = raw.iter().filter(|r| r.is_none()).count();
        let ratios: Vec<f64> = raw.into_iter().flatten().collect();
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        ProbeReport { id, samples: ratios.len(), skipped, max_ratio, resolution, ratios }
    }

    /// Rows `inequality_id,sample_index,ratio` followed by a `max` summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("inequality_id,sample_index,ratio\n");
        for (i, r) in self.ratios.iter().enumerate() {
            out.push_str(&format!("{},{},{:?}\n", self.id, i, r));
        }
        out.push_str(&format!("{},max,{:?}\n", self.id, self.max_ratio));
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Sampling setup shared by the probes. Fields are drawn in the shell band
/// `[band.0, band.1]`, which is kept fixed so that samples at different
/// resolutions are the same trigonometric polynomials.
#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    pub samples: usize,
    pub n: usize,
    pub band: (f64, f64),
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { samples: 100, n: 32, band: (1.0, 4.0), seed: 0 }
    }
}

/// Sample `i` uses a random upper band edge in `[lo, hi]` so that both
/// smooth and rough polynomials appear.
fn sample_fields(grid: &std::sync::Arc<Grid>, opts: &ProbeOptions, i: usize) -> Result<(ScalarField, ScalarField)> {
    let (lo, hi) = opts.band;
    let seed = opts.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
    let top = lo + (hi - lo) * ((i % 4) as f64 + 1.0) / 4.0;
    let f = random_scalar(grid, lo, top, 1.0, 2 * seed)?;
    let g = random_scalar(grid, lo, hi, 1.0, 2 * seed + 1)?;
    Ok((f, g))
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::Argument("a probe needs at least one sample".into()));
    }
    Ok(())
}

/// Draws seeded random band-limited fields and records LHS/RHS ratios.
pub fn inequality_probe(id: InequalityId, opts: &ProbeOptions) -> Result<ProbeReport> {
    check_samples(opts.samples)?;
    let grid = Grid::shared(id.dim(), opts.n)?;
    let mut raw = Vec::with_capacity(opts.samples);
    for i in 0..opts.samples {
        let (f, g) = sample_fields(&grid, opts, i)?;
        raw.push(id.ratio(&f, &g)?);
    }
    Ok(ProbeReport::from_ratios(id.as_str().to_string(), opts.n, raw))
}

/// Exponents for the Kato–Ponce commutator and product estimates, with
/// `f64::INFINITY` standing for ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KatoPonceExponents {
    pub s: f64,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl KatoPonceExponents {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::Argument(format!("Kato–Ponce needs s > 0, got {}", self.s)));
        }
        for (name, q) in [("p", self.p), ("p1", self.p1), ("p2", self.p2), ("p3", self.p3), ("p4", self.p4)] {
            if !(q > 1.0 && q.is_finite()) {
                return Err(Error::Argument(format!("Kato–Ponce exponent {name} = {q} must lie in (1, ∞)")));
            }
        }
        let inv = 1.0 / self.p;
        let tol = 1e-12;
        if (inv - 1.0 / self.p1 - 1.0 / self.p2).abs() > tol || (inv - 1.0 / self.p3 - 1.0 / self.p4).abs() > tol {
            return Err(Error::Argument("Kato–Ponce exponents need 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4".into()));
        }
        Ok(())
    }
}

/// Commutator and product ratios for one pair of scalar fields, as
/// `(commutator, product)`.
pub fn kato_ponce_ratios(f: &ScalarField, g: &ScalarField, e: &KatoPonceExponents) -> Result<(Option<f64>, Option<f64>)> {
    e.validate()?;
    if !g.mean_is_zero() || !f.mean_is_zero() {
        return Err(Error::Domain("Kato–Ponce probes take mean-free f and g".into()));
    }
    let grid = f.grid();
    let fine = Grid::shared(grid.dim(), 2 * grid.n())?;
    let up = |h: &ScalarField| -> Result<ScalarField> {
        ScalarField::from_coeffs(&fine, super::norms::zero_pad(grid, h.coeffs(), &fine))
    };
    // products are exact on the doubled lattice for band-limited inputs
    let (ff, gg) = (up(f)?, up(g)?);
    let (pf, pg) = (ff.to_physical(), gg.to_physical());
    let fg: Vec<f64> = pf.iter().zip(&pg).map(|(a, b)| a * b).collect();
    let fg = ScalarField::from_physical(&fine, &fg)?;
    let lam_fg = apply_lambda_scalar(&fg, e.s)?;
    let lam_g = apply_lambda_scalar(&gg, e.s)?;
    let lam_f = apply_lambda_scalar(&ff, e.s)?;
    let lam_g_phys = lam_g.to_physical();
    let comm: Vec<f64> = lam_fg.to_physical().iter().zip(pf.iter().zip(&lam_g_phys)).map(|(a, (x, y))| a - x * y).collect();

    let lp = |vals: &[f64], p: f64| -> f64 {
        (vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() / vals.len() as f64).powf(1.0 / p)
    };
    let grad_mag: Vec<f64> = {
        let parts: Vec<Vec<f64>> = (0..grid.dim()).map(|a| partial(&ff, a).to_physical()).collect();
        (0..fine.len()).map(|i| parts.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt()).collect()
    };
    let lam_g_minus = apply_lambda_scalar(&gg, e.s - 1.0)?.to_physical();
    let comm_rhs = lp(&grad_mag, e.p1) * lp(&lam_g_minus, e.p2) + lp(&lam_f.to_physical(), e.p3) * lp(&pg, e.p4);
    let prod_rhs = lp(&lam_f.to_physical(), e.p1) * lp(&pg, e.p2) + lp(&pf, e.p3) * lp(&lam_g_phys, e.p4);
    let comm_lhs = lp(&comm, e.p);
    let prod_lhs = lp(&lam_fg.to_physical(), e.p);
    Ok((guarded_ratio(comm_lhs, comm_rhs), guarded_ratio(prod_lhs, prod_rhs)))
}

/// Sampled maxima of the two Kato–Ponce ratios.
#[derive(Clone, Debug, Serialize)]
pub struct KatoPonceReport {
    pub commutator: ProbeReport,
    pub product: ProbeReport,
}

pub fn kato_ponce_probe(e: &KatoPonceExponents, dim: usize, opts: &ProbeOptions) -> Result<KatoPonceReport> {
    e.validate()?;
    check_samples(opts.samples)?;
    let grid = Grid::shared(dim, opts.n)?;
    let (mut comm, mut prod) = (Vec::new(), Vec::new());
    for i in 0..opts.samples {
        let (f, g) = sample_fields(&grid, opts, i)?;
        let (c, p) = kato_ponce_ratios(&f, &g, e)?;
        comm.push(c);
        prod.push(p);
    }
    Ok(KatoPonceReport {
        commutator: ProbeReport::from_ratios("kato-ponce-commutator".into(), opts.n, comm),
        product: ProbeReport::from_ratios("kato-ponce-product".into(), opts.n, prod),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in InequalityId::ALL {
            assert_eq!(id.as_str().parse::<InequalityId>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<InequalityId>(), Err(Error::Unknown(_))));
    }

    #[test]
    fn single_mode_embedding_constant() {
        let g = Grid::new(3, 16).unwrap();
        for k in [[1i64, 0, 0], [1, 2, 0], [2, 1, 2]] {
            let f = ScalarField::from_fn(&g, |x| (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]).cos());
            let r = InequalityId::Em3dOne.ratio(&f, &f).unwrap().unwrap();
            let kk = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            let exact = (5.0f64 / 16.0).powf(1.0 / 6.0) * 2f64.sqrt() / kk;
            assert!((r - exact).abs() < 1e-12, "{r} vs {exact}");
        }
    }

    #[test]
    fn zero_sample_is_skipped() {
        let g = Grid::new(3, 8).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(InequalityId::Em3dHalf.ratio(&z, &z).unwrap(), None);
    }

    #[test]
    fn csv_layout() {
        let rep = inequality_probe(InequalityId::Gn1_2dP4, &ProbeOptions { samples: 3, n: 16, ..Default::default() }).unwrap();
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "inequality_id,sample_index,ratio");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("gn1-2d-p4,max,"));
    }

    #[test]
    fn kato_ponce_preconditions() {
        let bad = KatoPonceExponents { s: 1.0, p: 2.0, p1: f64::INFINITY, p2: 2.0, p3: f64::INFINITY, p4: 2.0 };
        assert!(matches!(bad.validate(), Err(Error::Argument(_))));
        let bad = KatoPonceExponents { s: 1.0, p: 2.0, p1: 4.0, p2: 3.0, p3: 4.0, p4: 4.0 };
        assert!(bad.validate().is_err());
        let ok = KatoPonceExponents { s: 1.0, p: 2.0, p1: 4.0, p2: 4.0, p3: 4.0, p4: 4.0 };
        let g = Grid::new(3, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let mut c = ScalarField::from_fn(&g, |_| 1.0);
        assert!(matches!(kato_ponce_ratios(&f, &c, &ok), Err(Error::Domain(_))));
        c = ScalarField::from_fn(&g, |x| x[1].cos());
        let (a, b) = kato_ponce_ratios(&f, &c, &ok).unwrap();
        assert!(a.unwrap().is_finite() && b.unwrap().is_finite());
    }

    #[test]
    fn kato_ponce_two_modes_closed_form() {
        // f = sin x1, g = cos x2, s = 2: Λ²(fg) = 2fg and fΛ²g = fg, so the
        // commutator is exactly fg.
        let e = KatoPonceExponents { s: 2.0, p: 2.0, p1: 4.0, p2: 4.0, p3: 4.0, p4: 4.0 };
        let g = Grid::new(3, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let h = ScalarField::from_fn(&g, |x| x[1].cos());
        let (c, _) = kato_ponce_ratios(&f, &h, &e).unwrap();
        // ‖fg‖₂ = 1/2; ‖∇f‖₄ = ‖Λf‖₄ = ‖Λg‖₄ = ‖g‖₄ = (3/8)^{1/4}
        let q = 0.375f64.sqrt();
        assert!((c.unwrap() - 0.5 / (2.0 * q)).abs() < 1e-13);
    }
}
