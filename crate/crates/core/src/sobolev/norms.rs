use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, ScalarField, VectorField};

/// Which norm a [`NormRequest`] asks for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    HomogeneousHs,
    InhomogeneousHs,
    Lp,
}

/// A norm of a field: Ḣ^s, H^s (value is `s`) or L^p (value is `p`, with
/// `f64::INFINITY` for the sup norm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRequest {
    pub kind: NormKind,
    pub value: f64,
}

impl NormRequest {
    pub fn hs(s: f64) -> Self {
        NormRequest { kind: NormKind::HomogeneousHs, value: s }
    }

    pub fn inhomogeneous(s: f64) -> Self {
        NormRequest { kind: NormKind::InhomogeneousHs, value: s }
    }

    pub fn lp(p: f64) -> Self {
        NormRequest { kind: NormKind::Lp, value: p }
    }

    pub fn eval(&self, f: &VectorField) -> Result<f64> {
        match self.kind {
            NormKind::HomogeneousHs => hs_norm(f, self.value),
            NormKind::InhomogeneousHs => inhomogeneous_hs_norm(f, self.value),
            NormKind::Lp => lp_norm_vector(f, self.value),
        }
    }
}

fn weighted_sum(grid: &Grid, comps: &[&[Complex64]], weight: impl Fn(f64) -> f64) -> f64 {
    let ksq = grid.ksq();
    let mut acc = 0.0;
    for c in comps {
        for (v, &k2) in c.iter().zip(ksq) {
            let m = v.norm_sqr();
            if m != 0.0 {
                acc += weight(k2) * m;
            }
        }
    }
    acc
}

fn hs_weight(s: f64) -> impl Fn(f64) -> f64 {
    move |k2| {
        if k2 == 0.0 {
            0.0
        } else if s == 0.0 {
            1.0
        } else if s == 0.5 {
            k2.sqrt()
        } else if s == 1.0 {
            k2
        } else if s == 1.5 {
            k2 * k2.sqrt()
        } else {
            k2.powf(s)
        }
    }
}

/// Homogeneous Sobolev norm (Σ_{k≠0} |k|^{2s} Σ_c |f̂_c(k)|²)^{1/2}.
pub fn hs_norm(f: &VectorField, s: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::numeric("Ḣ^s norm input"));
    }
    let c = f.comps();
    Ok(weighted_sum(f.grid(), &[&c[0], &c[1], &c[2]], hs_weight(s)).sqrt())
}

pub fn hs_norm_scalar(f: &ScalarField, s: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::numeric("Ḣ^s norm input"));
    }
    Ok(weighted_sum(f.grid(), &[f.coeffs()], hs_weight(s)).sqrt())
}

/// Inhomogeneous norm (Σ_k (1+|k|²)^s Σ_c |f̂_c(k)|²)^{1/2}.
pub fn inhomogeneous_hs_norm(f: &VectorField, s: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::numeric("H^s norm input"));
    }
    let c = f.comps();
    Ok(weighted_sum(f.grid(), &[&c[0], &c[1], &c[2]], |k2| (1.0 + k2).powf(s)).sqrt())
}

/// Copies a spectrum onto a finer lattice. Nyquist coefficients are split
/// evenly between ±n/2 so the padded spectrum stays Hermitian.
pub(crate) fn zero_pad(src: &Grid, coeffs: &[Complex64], dst: &Grid) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); dst.len()];
    let half = (src.n() / 2) as i64;
    for (idx, &c) in coeffs.iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let k = src.wavevector(idx);
        let nyq: Vec<usize> = (0..src.dim()).filter(|&a| k[a] == -half).collect();
        let share = c / f64::from(1u32 << nyq.len());
        for flips in 0..(1usize << nyq.len()) {
            let mut kk = k;
            for (bit, &a) in nyq.iter().enumerate() {
                if flips >> bit & 1 == 1 {
                    kk[a] = half;
                }
            }
            let j = dst.index(kk).expect("finer lattice contains the coarse one");
            out[j] += share;
        }
    }
    out
}

/// Grid values of a field on the 2x oversampled lattice.
pub(crate) fn oversampled(grid: &Arc<Grid>, comps: &[&[Complex64]]) -> Result<Vec<Vec<f64>>> {
    let fine = Grid::shared(grid.dim(), 2 * grid.n())?;
    let padded: Vec<Vec<Complex64>> = comps.iter().map(|c| zero_pad(grid, c, &fine)).collect();
    let refs: Vec<&[Complex64]> = padded.iter().map(|v| v.as_slice()).collect();
    fine.inverse_many(&refs)
}

fn lp_of_values(values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Argument(format!("L^p norm needs p in [1, ∞], got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let mean = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// Mean-normalized L^p norm (mean of |f|^p)^{1/p} by quadrature on the 2x
/// oversampled lattice; `p = ∞` gives the maximum over that lattice.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::numeric("L^p norm input"));
    }
    let vals = oversampled(f.grid(), &[f.coeffs()])?;
    lp_of_values(&vals[0], p)
}

/// L^p norm of the pointwise Euclidean magnitude of a vector field.
pub fn lp_norm_vector(f: &VectorField, p: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::numeric("L^p norm input"));
    }
    let c = f.comps();
    let vals = oversampled(f.grid(), &[&c[0], &c[1], &c[2]])?;
    let mag: Vec<f64> = (0..vals[0].len())
        .map(|i| (vals[0][i] * vals[0][i] + vals[1][i] * vals[1][i] + vals[2][i] * vals[2][i]).sqrt())
        .collect();
    lp_of_values(&mag, p)
}

/// Both sides of the interpolation inequality
/// ‖u‖_{Ḣ^s} ≤ ‖u‖_{Ḣ^{s0}}^{1-θ} ‖u‖_{Ḣ^{s1}}^θ with s = (1-θ)s0 + θs1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn interpolation_check(f: &VectorField, s0: f64, s1: f64, theta: f64) -> Result<InterpolationCheck> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Argument(format!("θ must lie in [0, 1], got {theta}")));
    }
    let s = (1.0 - theta) * s0 + theta * s1;
    let lhs = hs_norm(f, s)?;
    let rhs = hs_norm(f, s0)?.powf(1.0 - theta) * hs_norm(f, s1)?.powf(theta);
    Ok(InterpolationCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-10) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{curl, random_field};

    #[test]
    fn cosine_has_same_norm_for_every_s() {
        let g = Grid::new(3, 16).unwrap();
        let f = VectorField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        for s in [-1.0, 0.0, 0.5, 1.5, 3.0] {
            assert!((hs_norm(&f, s).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        }
        assert_eq!(hs_norm(&VectorField::zeros(&g), 0.7).unwrap(), 0.0);
    }

    #[test]
    fn plancherel() {
        let g = Grid::new(3, 16).unwrap();
        let f = random_field(&g, 1.0, 5.0, 0.8, 11, true).unwrap();
        let p = f.to_physical();
        let ms: f64 = (0..g.len()).map(|i| p[0][i].powi(2) + p[1][i].powi(2) + p[2][i].powi(2)).sum::<f64>() / g.len() as f64;
        assert!((hs_norm(&f, 0.0).unwrap().powi(2) - ms).abs() < 1e-12 * ms);
        assert!((lp_norm_vector(&f, 2.0).unwrap().powi(2) - ms).abs() < 1e-12 * ms);
    }

    #[test]
    fn lp_of_single_cosine() {
        let g = Grid::new(2, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0] + x[1]).cos());
        // mean of cos^4 is 3/8, of cos^6 is 5/16
        assert!((lp_norm(&f, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-13);
        assert!((lp_norm(&f, 6.0).unwrap() - (5.0f64 / 16.0).powf(1.0 / 6.0)).abs() < 1e-13);
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-13);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn nyquist_padding_stays_real() {
        let g = Grid::new(2, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| (4.0 * x[0]).cos() + (4.0 * x[1]).sin() * 0.0);
        let fine = Grid::new(2, 16).unwrap();
        let padded = zero_pad(&g, f.coeffs(), &fine);
        let pf = ScalarField::from_coeffs(&fine, padded).unwrap();
        assert!(pf.hermitian_defect() < 1e-15);
        // grid samples are preserved at the coarse points
        let coarse = f.to_physical();
        let fine_vals = pf.to_physical();
        for i in 0..8 {
            for j in 0..8 {
                assert!((coarse[i * 8 + j] - fine_vals[2 * i * 16 + 2 * j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interpolation_cases() {
        let g = Grid::new(3, 16).unwrap();
        let f = random_field(&g, 1.0, 3.0, 1.0, 2, true).unwrap();
        let c = interpolation_check(&f, 0.0, 1.0, 0.0).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-14 && c.holds);
        let c = interpolation_check(&f, 0.0, 1.0, 0.5).unwrap();
        assert!(c.lhs < c.rhs && c.holds);
        assert!(interpolation_check(&f, 0.0, 1.0, 1.5).is_err());
        let m = VectorField::from_fn(&g, |x| [0.0, (2.0 * x[0]).sin(), 0.0]);
        for theta in [0.1, 0.4, 0.9] {
            let c = interpolation_check(&m, -0.5, 2.0, theta).unwrap();
            assert!((c.lhs - c.rhs).abs() < 1e-12 * c.rhs);
        }
    }

    #[test]
    fn curl_norm_equivalence_is_exact() {
        let g = Grid::new(3, 16).unwrap();
        let b = random_field(&g, 1.0, 5.0, 1.0, 4, true).unwrap();
        for s in [0.0, 0.5, 1.5] {
            let grad = hs_norm(&b, s + 1.0).unwrap();
            let j = hs_norm(&curl(&b), s).unwrap();
            assert!((grad - j).abs() < 1e-12 * grad);
        }
    }
}
