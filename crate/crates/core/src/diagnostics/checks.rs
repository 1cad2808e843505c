use crate::error::Result;
use crate::spectral::{cross, curl, VectorField};

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num.abs()
    } else {
        num.abs() / den
    }
}

/// |(∇×((∇×v)×B) | v)| / (‖(∇×v)×B‖‖∇×v‖) with the product transformed
/// without truncation, so the discrete pairing vanishes to rounding.
pub fn cancellation_check(v: &VectorField, b: &VectorField) -> Result<f64> {
    let w = curl(v);
    let g = cross(&w, b, false)?;
    let lhs = curl(&g).inner(v)?;
    Ok(ratio(lhs, g.l2() * w.l2()))
}

/// |(∇×w | v) − (w | ∇×v)| normalized by the two pairings' Cauchy-Schwarz
/// bounds.
pub fn adjointness_check(w: &VectorField, v: &VectorField) -> Result<f64> {
    let (cw, cv) = (curl(w), curl(v));
    let lhs = cw.inner(v)?;
    let rhs = w.inner(&cv)?;
    Ok(ratio(lhs - rhs, cw.l2() * v.l2() + w.l2() * cv.l2()))
}

/// |(Pf | g) − (f | Pg)| and ‖P(Pf) − Pf‖, both relative.
pub fn leray_check(f: &VectorField, g: &VectorField) -> Result<(f64, f64)> {
    use crate::spectral::leray_project;
    let (pf, pg) = (leray_project(f), leray_project(g));
    let sym = ratio(pf.inner(g)? - f.inner(&pg)?, f.l2() * g.l2());
    let idem = ratio((&leray_project(&pf) - &pf).l2(), pf.l2());
    Ok((sym, idem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, Grid};

    #[test]
    fn hall_cancellation_on_random_pairs() {
        let g = Grid::shared(3, 16).unwrap();
        for seed in 0..5 {
            let v = random_field(&g, 1.0, 5.0, 1.0, 2 * seed, true).unwrap();
            let b = random_field(&g, 1.0, 5.0, 1.0, 2 * seed + 1, true).unwrap();
            assert!(cancellation_check(&v, &b).unwrap() <= 1e-12);
            assert!(cancellation_check(&v, &v).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn curl_is_self_adjoint() {
        let g = Grid::shared(3, 16).unwrap();
        let w = random_field(&g, 0.0, 5.0, 1.0, 1, false).unwrap();
        let v = random_field(&g, 0.0, 5.0, 1.0, 2, false).unwrap();
        assert!(adjointness_check(&w, &v).unwrap() <= 1e-13);
        let (sym, idem) = leray_check(&w, &v).unwrap();
        assert!(sym <= 1e-13 && idem <= 1e-13);
    }

    #[test]
    fn zero_fields() {
        let g = Grid::shared(3, 8).unwrap();
        let z = VectorField::zeros(&g);
        assert_eq!(cancellation_check(&z, &z).unwrap(), 0.0);
        assert_eq!(adjointness_check(&z, &z).unwrap(), 0.0);
    }
}
