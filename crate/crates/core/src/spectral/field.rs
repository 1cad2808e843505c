use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Scalar field stored as Fourier coefficients on a periodic lattice.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

/// Three-component field stored as Fourier coefficients.
///
/// On a 2D lattice this is a 2½D field: three components depending on two
/// variables. `is_divfree` records that the field was built or projected to
/// be solenoidal (using only the first two components on 2D lattices).
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Arc<Grid>,
    comps: [Vec<Complex64>; 3],
    divfree: bool,
}

fn check_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if **a != **b {
        return Err(Error::Shape(format!("fields live on different lattices ({a:?} vs {b:?})")));
    }
    Ok(())
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField { grid: grid.clone(), coeffs: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape(format!("{} coefficients for {} modes", coeffs.len(), grid.len())));
        }
        Ok(ScalarField { grid: grid.clone(), coeffs })
    }

    pub fn from_physical(grid: &Arc<Grid>, values: &[f64]) -> Result<Self> {
        Ok(ScalarField { grid: grid.clone(), coeffs: grid.forward(values)? })
    }

    /// Samples `f` at the grid points and transforms.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let vals: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_physical(grid, &vals).expect("sizes agree by construction")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.coeffs).expect("sizes agree by construction")
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn mean_is_zero(&self) -> bool {
        self.coeffs[0].norm() <= 1e-13 * self.l2()
    }

    /// Σ_k |f̂(k)|², the mean square over the box.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Spectral inner product Σ_k Re(conj(f̂)ĝ), equal to the grid mean of f·g.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a.conj() * b).re).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        ScalarField { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest deviation from Hermitian symmetry, max_k |f̂(-k) - conj f̂(k)|.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.grid, &self.coeffs)
    }
}

fn hermitian_defect(grid: &Grid, c: &[Complex64]) -> f64 {
    let neg = grid.neg();
    let half = (grid.n() / 2) as i64;
    (0..c.len())
        .filter(|&i| grid.wavevector(i).iter().all(|&k| k != -half))
        .map(|i| (c[neg[i]] - c[i].conj()).norm())
        .fold(0.0, f64::max)
}

impl VectorField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        VectorField { grid: grid.clone(), comps: [z.clone(), z.clone(), z], divfree: true }
    }

    /// Builds a field from coefficients; `divfree` is the caller's claim and
    /// is checked against the divergence tolerance.
    pub fn from_coeffs(grid: &Arc<Grid>, comps: [Vec<Complex64>; 3], divfree: bool) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::Shape(format!("{} coefficients for {} modes", c.len(), grid.len())));
            }
        }
        let f = VectorField { grid: grid.clone(), comps, divfree: false };
        if divfree && !f.satisfies_divfree(1e-12) {
            return Err(Error::Domain("field claimed divergence-free is not".into()));
        }
        Ok(VectorField { divfree, ..f })
    }

    pub(crate) fn from_parts(grid: &Arc<Grid>, comps: [Vec<Complex64>; 3], divfree: bool) -> Self {
        VectorField { grid: grid.clone(), comps, divfree }
    }

    pub fn from_components(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self> {
        check_grid(&x.grid, &y.grid)?;
        check_grid(&x.grid, &z.grid)?;
        let grid = x.grid.clone();
        Ok(VectorField { grid, comps: [x.coeffs, y.coeffs, z.coeffs], divfree: false })
    }

    pub fn from_physical(grid: &Arc<Grid>, values: [&[f64]; 3]) -> Result<Self> {
        let mut c = grid.forward_many(&values)?.into_iter();
        let comps = [c.next().unwrap(), c.next().unwrap(), c.next().unwrap()];
        Ok(VectorField { grid: grid.clone(), comps, divfree: false })
    }

    /// Samples a vector function at the grid points and transforms.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut vals = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
        for i in 0..grid.len() {
            let v = f(grid.point(i));
            for a in 0..3 {
                vals[a][i] = v[a];
            }
        }
        Self::from_physical(grid, [&vals[0], &vals[1], &vals[2]]).expect("sizes agree by construction")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn comp(&self, a: usize) -> &[Complex64] {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        self.divfree = false;
        &mut self.comps
    }

    pub fn into_comps(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    pub fn component(&self, a: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), coeffs: self.comps[a].clone() }
    }

    pub fn is_divfree(&self) -> bool {
        self.divfree
    }

    pub(crate) fn set_divfree(&mut self, flag: bool) {
        self.divfree = flag;
    }

    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let mut it = self
            .grid
            .inverse_many(&[&self.comps[0], &self.comps[1], &self.comps[2]])
            .expect("sizes agree by construction")
            .into_iter();
        [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
    }

    pub fn mean_square(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).map(|c| c.norm_sqr()).sum()
    }

    pub fn l2(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Σ_k Σ_c Re(conj(f̂_c) ĝ_c), the grid mean of f·g.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        let mut s = 0.0;
        for a in 0..3 {
            s += self.comps[a].iter().zip(&other.comps[a]).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        }
        Ok(s)
    }

    pub fn scale(&self, s: f64) -> Self {
        let comps = self.comps.clone().map(|c| c.into_iter().map(|v| v * s).collect());
        VectorField { grid: self.grid.clone(), comps, divfree: self.divfree }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &VectorField) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        let mut out = self.clone();
        for a in 0..3 {
            for (x, y) in out.comps[a].iter_mut().zip(&other.comps[a]) {
                *x += y * s;
            }
        }
        out.divfree = self.divfree && other.divfree;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flat_map(|c| c.iter()).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Mean mode vanishes up to rounding relative to the field norm.
    pub fn mean_is_zero(&self) -> bool {
        let tol = 1e-13 * self.l2();
        self.comps.iter().all(|c| c[0].norm() <= tol)
    }

    /// Zeroes the k = 0 coefficient of every component.
    pub fn remove_mean(&mut self) {
        for c in &mut self.comps {
            c[0] = Complex64::default();
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps.iter().map(|c| hermitian_defect(&self.grid, c)).fold(0.0, f64::max)
    }

    /// max_k |k·f̂(k)| (first two components on a 2D lattice).
    pub fn max_divergence(&self) -> f64 {
        let g = &self.grid;
        let (kx, ky, kz) = (g.k(0), g.k(1), g.k(2));
        (0..g.len())
            .map(|i| (self.comps[0][i] * kx[i] + self.comps[1][i] * ky[i] + self.comps[2][i] * kz[i]).norm())
            .fold(0.0, f64::max)
    }

    /// Divergence invariant: |k·f̂(k)| <= tol * ‖f̂‖ for every mode.
    pub fn satisfies_divfree(&self, tol: f64) -> bool {
        let norm = self.l2();
        self.max_divergence() <= tol * norm.max(f64::MIN_POSITIVE)
    }

    /// Grid maximum of the pointwise magnitude |f(x)|.
    pub fn max_magnitude(&self) -> f64 {
        let p = self.to_physical();
        (0..self.grid.len())
            .map(|i| (p[0][i] * p[0][i] + p[1][i] * p[1][i] + p[2][i] * p[2][i]).sqrt())
            .fold(0.0, f64::max)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.axpy(1.0, rhs).expect("fields share a lattice")
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.axpy(-1.0, rhs).expect("fields share a lattice")
    }
}

impl Mul<&VectorField> for f64 {
    type Output = VectorField;
    fn mul(self, rhs: &VectorField) -> VectorField {
        rhs.scale(self)
    }
}

/// Integer wavevectors with `lo <= |k| <= hi` and every |k_i| <= `reach`,
/// listed once per ±k pair in a lattice-independent canonical order.
pub(crate) fn half_shell_modes(dim: usize, lo: f64, hi: f64) -> Vec<[i64; 3]> {
    let reach = hi.floor() as i64;
    let r3 = if dim == 3 { reach } else { 0 };
    let mut out = Vec::new();
    for k0 in -reach..=reach {
        for k1 in -reach..=reach {
            for k2 in -r3..=r3 {
                let k = [k0, k1, k2];
                // keep the lexicographically positive representative
                if k <= [0, 0, 0] {
                    continue;
                }
                let m2 = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                if m2 >= lo * lo && m2 <= hi * hi {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Seeded random band-limited field, reproducible across resolutions: the
/// same seed and band give the same trigonometric polynomial on every lattice
/// that resolves the band. Scaled to L² (root-mean-square) norm `amplitude`
/// after optional Leray projection.
pub fn random_field(grid: &Arc<Grid>, lo: f64, hi: f64, amplitude: f64, seed: u64, divfree: bool) -> Result<VectorField> {
    if !(0.0..=hi).contains(&lo) {
        return Err(Error::Argument(format!("band [{lo}, {hi}] is empty or negative")));
    }
    if hi.floor() as i64 > grid.kcut() {
        return Err(Error::Argument(format!("band edge {hi} exceeds the dealiased cutoff {}", grid.kcut())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps = [
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
    ];
    for k in half_shell_modes(grid.dim(), lo.max(1.0), hi) {
        let pos = grid.index(k).expect("band inside lattice");
        let neg = grid.index([-k[0], -k[1], -k[2]]).expect("band inside lattice");
        for c in comps.iter_mut() {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            c[pos] = z;
            c[neg] = z.conj();
        }
    }
    let mut f = VectorField::from_parts(grid, comps, false);
    if divfree {
        f = super::ops::leray_project(&f);
    }
    let norm = f.l2();
    if norm > 0.0 {
        f = f.scale(amplitude / norm);
    }
    Ok(f)
}

/// Seeded random band-limited scalar field with L² norm `amplitude`.
pub fn random_scalar(grid: &Arc<Grid>, lo: f64, hi: f64, amplitude: f64, seed: u64) -> Result<ScalarField> {
    let v = random_field(grid, lo, hi, 1.0, seed, false)?;
    let s = v.component(0);
    let norm = s.l2();
    Ok(if norm > 0.0 { s.scale(amplitude / norm) } else { s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_field_is_resolution_independent() {
        let g1 = Grid::new(3, 16).unwrap();
        let g2 = Grid::new(3, 32).unwrap();
        let a = random_field(&g1, 1.0, 3.0, 0.5, 7, true).unwrap();
        let b = random_field(&g2, 1.0, 3.0, 0.5, 7, true).unwrap();
        for idx in 0..g1.len() {
            let k = g1.wavevector(idx);
            if let Some(j) = g2.index(k) {
                for c in 0..3 {
                    assert!((a.comp(c)[idx] - b.comp(c)[j]).norm() < 1e-15);
                }
            }
        }
        assert!((a.l2() - 0.5).abs() < 1e-14);
        assert!(a.hermitian_defect() < 1e-16);
        assert!(a.mean_is_zero());
    }

    #[test]
    fn band_beyond_cutoff_rejected() {
        let g = Grid::new(3, 16).unwrap();
        assert!(random_field(&g, 1.0, 6.0, 1.0, 0, true).is_err());
    }

    #[test]
    fn claimed_divfree_is_checked() {
        let g = Grid::new(2, 16).unwrap();
        let grad = VectorField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        let comps = grad.into_comps();
        assert!(VectorField::from_coeffs(&g, comps, true).is_err());
    }
}
