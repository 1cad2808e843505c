use std::cell::RefCell;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Number of strided lines gathered per batch when transforming a
/// non-contiguous axis.
const LINE_BATCH: usize = 8;

thread_local! {
    static SCRATCH: RefCell<(Vec<Complex64>, Vec<Complex64>)> = RefCell::new((Vec::new(), Vec::new()));
}

/// Spectra of 64³ lattices are 4 MiB; glibc would hand such blocks back to
/// the kernel on every free and fault them in again on the next step.
fn tune_allocator() {
    #[cfg(all(target_os = "linux", target_env = "gnu"))]
    {
        static ONCE: std::sync::Once = std::sync::Once::new();
        ONCE.call_once(|| unsafe {
            libc::mallopt(libc::M_MMAP_THRESHOLD, 32 << 20);
            libc::mallopt(libc::M_TRIM_THRESHOLD, 512 << 20);
        });
    }
}

/// Periodic lattice on `[0, 2π)^dim` with `n` modes per axis.
///
/// Modes are stored in FFT order along every axis: index `i` carries the
/// wavenumber `i` for `i < n/2` and `i - n` otherwise. The flat index of
/// `(i0, i1, i2)` is `(i0 * n + i1) * n + i2` (row-major); on a 2D lattice
/// the last index is absent and `k3 = 0`.
pub struct Grid {
    dim: usize,
    n: usize,
    kcut: i64,
    len: usize,
    kvec: [Vec<f64>; 3],
    ksq: Vec<f64>,
    mask: Vec<bool>,
    keep: Vec<bool>,
    neg: Vec<usize>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("kcut", &self.kcut)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

/// Signed wavenumber of FFT index `i` on an `n`-point axis.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of the signed wavenumber `k`, if representable.
pub fn index_of(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k >= -half && k < half {
        Some(k.rem_euclid(n as i64) as usize)
    } else {
        None
    }
}

impl Grid {
    /// Builds a `dim`-dimensional lattice (`dim` ∈ {2, 3}) with `n` modes per
    /// axis (even, at least 8).
    pub fn new(dim: usize, n: usize) -> Result<Arc<Self>> {
        tune_allocator();
        if dim != 2 && dim != 3 {
            return Err(Error::Argument(format!("lattice dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Argument(format!("modes per axis must be even and >= 8, got {n}")));
        }
        let len = n.pow(dim as u32);
        // Largest |k_i| kept by the two-thirds rule such that aliases of
        // quadratic products land outside the retained band.
        let kcut = ((n - 1) / 3) as i64;
        let mut kvec = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut ksq = vec![0.0; len];
        let mut mask = vec![false; len];
        let mut neg = vec![0; len];
        let nyq = (n / 2) as i64;
        for idx in 0..len {
            let ii = Self::unflatten(dim, n, idx);
            let mut k = [0i64; 3];
            let mut negi = [0usize; 3];
            for a in 0..dim {
                k[a] = wavenumber(ii[a], n);
                negi[a] = (n - ii[a]) % n;
            }
            for a in 0..3 {
                kvec[a][idx] = k[a] as f64;
            }
            ksq[idx] = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            mask[idx] = k.iter().all(|&c| c.abs() <= kcut && c != -nyq);
            neg[idx] = Self::flatten(dim, n, negi);
        }
        let keep = (0..n).map(|i| wavenumber(i, n).abs() <= kcut && wavenumber(i, n) != -nyq).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Grid { dim, n, kcut, len, kvec, ksq, mask, keep, neg, fwd, inv }))
    }

    /// Process-wide cached lattice, for auxiliary grids (oversampled
    /// quadrature) that are rebuilt often.
    pub fn shared(dim: usize, n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Grid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(g) = map.get(&(dim, n)) {
            return Ok(g.clone());
        }
        let g = Grid::new(dim, n)?;
        map.insert((dim, n), g.clone());
        Ok(g)
    }

    fn unflatten(dim: usize, n: usize, idx: usize) -> [usize; 3] {
        if dim == 3 {
            [idx / (n * n), (idx / n) % n, idx % n]
        } else {
            [idx / n, idx % n, 0]
        }
    }

    fn flatten(dim: usize, n: usize, i: [usize; 3]) -> usize {
        if dim == 3 {
            (i[0] * n + i[1]) * n + i[2]
        } else {
            i[0] * n + i[1]
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest retained |k_i| under the two-thirds rule.
    pub fn kcut(&self) -> i64 {
        self.kcut
    }

    /// Largest retained wavevector magnitude, `kcut * sqrt(dim)`.
    pub fn kmax(&self) -> f64 {
        self.kcut as f64 * (self.dim as f64).sqrt()
    }

    /// Component `axis` of the wavevector at every flat index.
    pub fn k(&self, axis: usize) -> &[f64] {
        &self.kvec[axis]
    }

    /// |k|² at every flat index.
    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    /// Two-thirds dealiasing mask.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Flat index of `-k` for every flat index `k`.
    pub fn neg(&self) -> &[usize] {
        &self.neg
    }

    /// Flat index of a signed integer wavevector (k3 ignored on 2D lattices).
    pub fn index(&self, k: [i64; 3]) -> Option<usize> {
        let mut ii = [0usize; 3];
        for a in 0..self.dim {
            ii[a] = index_of(k[a], self.n)?;
        }
        if self.dim == 2 && k[2] != 0 {
            return None;
        }
        Some(Self::flatten(self.dim, self.n, ii))
    }

    /// Signed integer wavevector at a flat index.
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        [self.kvec[0][idx] as i64, self.kvec[1][idx] as i64, self.kvec[2][idx] as i64]
    }

    /// Physical coordinate of grid point `idx` (x3 = 0 on 2D lattices).
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ii = Self::unflatten(self.dim, self.n, idx);
        let h = std::f64::consts::TAU / self.n as f64;
        [ii[0] as f64 * h, ii[1] as f64 * h, if self.dim == 3 { ii[2] as f64 * h } else { 0.0 }]
    }

    /// Unnormalized in-place multi-dimensional transform.
    ///
    /// Inverse transforms skip rows and planes that are entirely zero, which
    /// is most of a dealiased spectrum. With `band` a forward transform only
    /// computes the coefficients inside the two-thirds mask and zeroes the
    /// rest.
    fn transform(&self, data: &mut [Complex64], forward: bool, band: bool) {
        let fft = if forward { &self.fwd } else { &self.inv };
        let n = self.n;
        let keep = &self.keep;
        SCRATCH.with(|cell| {
            let mut guard = cell.borrow_mut();
            let (scratch, lines) = &mut *guard;
            let need = fft.get_inplace_scratch_len();
            if scratch.len() < need {
                scratch.resize(need, Complex64::default());
            }
            if lines.len() < LINE_BATCH * n {
                lines.resize(LINE_BATCH * n, Complex64::default());
            }
            let scratch = &mut scratch[..need];
            let fft = fft.as_ref();
            match (self.dim, forward && band) {
                (3, false) => {
                    let mut live = vec![false; n];
                    for (r, row) in data.chunks_exact_mut(n).enumerate() {
                        if row.iter().any(|c| *c != Complex64::default()) {
                            fft.process_with_scratch(row, scratch);
                            live[r / n] = true;
                        }
                    }
                    for (i, plane) in data.chunks_exact_mut(n * n).enumerate() {
                        if live[i] {
                            strided_lines(fft, plane, n, n, lines, scratch);
                        }
                    }
                    strided_lines(fft, data, n, n * n, lines, scratch);
                }
                (3, true) => {
                    strided_lines(fft, data, n, n * n, lines, scratch);
                    for (i, plane) in data.chunks_exact_mut(n * n).enumerate() {
                        if !keep[i] {
                            plane.fill(Complex64::default());
                            continue;
                        }
                        strided_lines(fft, plane, n, n, lines, scratch);
                        for (j, row) in plane.chunks_exact_mut(n).enumerate() {
                            if keep[j] {
                                fft.process_with_scratch(row, scratch);
                            } else {
                                row.fill(Complex64::default());
                            }
                        }
                    }
                }
                (_, false) => {
                    for row in data.chunks_exact_mut(n) {
                        if row.iter().any(|c| *c != Complex64::default()) {
                            fft.process_with_scratch(row, scratch);
                        }
                    }
                    strided_lines(fft, data, n, n, lines, scratch);
                }
                (_, true) => {
                    strided_lines(fft, data, n, n, lines, scratch);
                    for (i, row) in data.chunks_exact_mut(n).enumerate() {
                        if keep[i] {
                            fft.process_with_scratch(row, scratch);
                        } else {
                            row.fill(Complex64::default());
                        }
                    }
                }
            }
            if forward && band {
                for (v, &m) in data.iter_mut().zip(&self.mask) {
                    if !m {
                        *v = Complex64::default();
                    }
                }
            }
        });
    }

    /// Forward transform of one real grid function: `û_k = N^{-d} Σ_j f(x_j) e^{-ik·x_j}`.
    pub fn forward(&self, f: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = self.forward_many(&[f])?;
        Ok(out.pop().unwrap())
    }

    /// Inverse transform of one Hermitian spectrum to a real grid function.
    pub fn inverse(&self, c: &[Complex64]) -> Result<Vec<f64>> {
        let mut out = self.inverse_many(&[c])?;
        Ok(out.pop().unwrap())
    }

    /// Forward transforms of several real grid functions. Two real inputs
    /// share one complex transform.
    pub fn forward_many(&self, fields: &[&[f64]]) -> Result<Vec<Vec<Complex64>>> {
        self.forward_impl(fields, false)
    }

    /// Forward transforms keeping only the coefficients inside the
    /// two-thirds mask; equivalent to `forward_many` followed by dealiasing.
    pub fn forward_many_dealiased(&self, fields: &[&[f64]]) -> Result<Vec<Vec<Complex64>>> {
        self.forward_impl(fields, true)
    }

    fn forward_impl(&self, fields: &[&[f64]], band: bool) -> Result<Vec<Vec<Complex64>>> {
        for f in fields {
            if f.len() != self.len {
                return Err(Error::Shape(format!("grid function has {} points, lattice has {}", f.len(), self.len)));
            }
        }
        let scale = 1.0 / self.len as f64;
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            self.transform(&mut buf, true, band);
            if pair.len() == 1 {
                buf.iter_mut().for_each(|c| *c *= scale);
                out.push(buf);
            } else {
                let (a, b) = self.split_pair(&buf, 0.5 * scale);
                out.push(a);
                out.push(b);
            }
        }
        Ok(out)
    }

    /// Separates the spectra of two real functions packed as `f + i g`.
    /// Rows are visited in order; the mirrored row of `k` is the reversed
    /// row at `-k`, which keeps the access pattern contiguous.
    fn split_pair(&self, buf: &[Complex64], half: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.n;
        let mut a = vec![Complex64::default(); self.len];
        let mut b = vec![Complex64::default(); self.len];
        let rows = self.len / n;
        let mirror_row = |r: usize| -> usize {
            if self.dim == 3 {
                let (i, j) = (r / n, r % n);
                ((n - i) % n) * n + (n - j) % n
            } else {
                (n - r) % n
            }
        };
        for r in 0..rows {
            let m = mirror_row(r);
            let row = &buf[r * n..(r + 1) * n];
            let mrow = &buf[m * n..(m + 1) * n];
            let (ar, br) = (&mut a[r * n..(r + 1) * n], &mut b[r * n..(r + 1) * n]);
            for c in 0..n {
                let h = row[c];
                let hc = mrow[if c == 0 { 0 } else { n - c }].conj();
                ar[c] = (h + hc) * half;
                // (h - hc) / (2i)
                let d = h - hc;
                br[c] = Complex64::new(d.im, -d.re) * half;
            }
        }
        (a, b)
    }

    /// Inverse transforms of several Hermitian spectra to real grid functions.
    pub fn inverse_many(&self, spectra: &[&[Complex64]]) -> Result<Vec<Vec<f64>>> {
        for c in spectra {
            if c.len() != self.len {
                return Err(Error::Shape(format!("spectrum has {} modes, lattice has {}", c.len(), self.len)));
            }
        }
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| Complex64::new(x.re - y.im, x.im + y.re))
                    .collect(),
                [a] => a.to_vec(),
                _ => unreachable!(),
            };
            self.transform(&mut buf, false, false);
            out.push(buf.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|c| c.im).collect());
            }
        }
        Ok(out)
    }

    /// Complex forward transform without Hermitian assumptions (normalized).
    pub fn forward_complex(&self, data: &mut [Complex64]) -> Result<()> {
        if data.len() != self.len {
            return Err(Error::Shape(format!("array has {} entries, lattice has {}", data.len(), self.len)));
        }
        self.transform(data, true, false);
        let scale = 1.0 / self.len as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    /// Complex inverse transform without Hermitian assumptions.
    pub fn inverse_complex(&self, data: &mut [Complex64]) -> Result<()> {
        if data.len() != self.len {
            return Err(Error::Shape(format!("array has {} entries, lattice has {}", data.len(), self.len)));
        }
        self.transform(data, false, false);
        Ok(())
    }
}

/// Transforms the `rows`-long columns of a row-major `rows x cols` matrix.
fn strided_lines(
    fft: &dyn Fft<f64>,
    mat: &mut [Complex64],
    rows: usize,
    cols: usize,
    lines: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let mut c0 = 0;
    while c0 < cols {
        let b = LINE_BATCH.min(cols - c0);
        for r in 0..rows {
            let row = &mat[r * cols + c0..r * cols + c0 + b];
            for (j, &v) in row.iter().enumerate() {
                lines[j * rows + r] = v;
            }
        }
        fft.process_with_scratch(&mut lines[..b * rows], scratch);
        for r in 0..rows {
            let row = &mut mat[r * cols + c0..r * cols + c0 + b];
            for (j, v) in row.iter_mut().enumerate() {
                *v = lines[j * rows + r];
            }
        }
        c0 += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(3, 7).is_err());
        assert!(Grid::new(3, 6).is_err());
        assert!(Grid::new(4, 16).is_err());
        assert!(Grid::new(2, 8).is_ok());
    }

    #[test]
    fn two_thirds_cutoff() {
        assert_eq!(Grid::new(3, 32).unwrap().kcut(), 10);
        assert_eq!(Grid::new(3, 64).unwrap().kcut(), 21);
        // n divisible by three keeps aliases out of the band
        assert_eq!(Grid::new(2, 48).unwrap().kcut(), 15);
    }

    #[test]
    fn negative_index_roundtrip() {
        let g = Grid::new(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.neg()[g.neg()[idx]], idx);
            let k = g.wavevector(idx);
            if k.iter().all(|&c| c != -4) {
                let m = g.wavevector(g.neg()[idx]);
                assert_eq!([-k[0], -k[1], -k[2]], m);
            }
        }
    }

    #[test]
    fn cosine_single_mode() {
        let g = Grid::new(3, 16).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|i| g.point(i)[0].cos()).collect();
        let c = g.forward(&f).unwrap();
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            let want = if k == [1, 0, 0] || k == [-1, 0, 0] { 0.5 } else { 0.0 };
            assert!((c[idx].re - want).abs() < 1e-14 && c[idx].im.abs() < 1e-14, "{k:?} {}", c[idx]);
        }
    }

    #[test]
    fn paired_transforms_match_single() {
        let g = Grid::new(2, 16).unwrap();
        let a: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.11).cos() + 0.3).collect();
        let both = g.forward_many(&[&a, &b]).unwrap();
        let ca = g.forward(&a).unwrap();
        let cb = g.forward(&b).unwrap();
        for idx in 0..g.len() {
            assert!((both[0][idx] - ca[idx]).norm() < 1e-14);
            assert!((both[1][idx] - cb[idx]).norm() < 1e-14);
        }
        let back = g.inverse_many(&[&both[0], &both[1]]).unwrap();
        for idx in 0..g.len() {
            assert!((back[0][idx] - a[idx]).abs() < 1e-13);
            assert!((back[1][idx] - b[idx]).abs() < 1e-13);
        }
    }

    #[test]
    fn size_mismatch_is_shape_error() {
        let g = Grid::new(2, 8).unwrap();
        assert!(matches!(g.forward(&[0.0; 10]), Err(Error::Shape(_))));
    }
}
