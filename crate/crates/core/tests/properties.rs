use proptest::prelude::*;

use hallmhd::diagnostics::cancellation_check;
use hallmhd::harness::{snapshot_read, snapshot_write, Dimension, Filter, RunConfig, Snapshot};
use hallmhd::mhd3d::{Formulation, InitialKind};
use hallmhd::sobolev::{hs_norm, interpolation_check};
use hallmhd::spectral::{band_filter, curl, curl_inverse, leray_project, next_shell, random_field, Grid, VectorField};

fn field(dim: usize, top: f64, seed: u64, divfree: bool) -> VectorField {
    let g = Grid::shared(dim, 16).unwrap();
    random_field(&g, 1.0, top, 1.0, seed, divfree).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hs_norm_is_homogeneous(seed in 0u64..1000, s in 0.0f64..2.5, c in -10.0f64..10.0, dim in 2usize..=3) {
        let f = field(dim, 5.0, seed, false);
        let lhs = hs_norm(&f.scale(c), s).unwrap();
        prop_assert!(close(lhs, c.abs() * hs_norm(&f, s).unwrap(), 1e-13));
    }

    #[test]
    fn hs_norm_triangle(seed in 0u64..1000, s in 0.0f64..2.5) {
        let (f, g) = (field(3, 4.0, seed, false), field(3, 4.0, seed + 5000, false));
        let sum = hs_norm(&(&f + &g), s).unwrap();
        prop_assert!(sum <= (hs_norm(&f, s).unwrap() + hs_norm(&g, s).unwrap()) * (1.0 + 1e-14));
    }

    #[test]
    fn interpolation_holds(seed in 0u64..1000, s0 in 0.0f64..2.0, gap in 0.0f64..2.0, theta in 0.0f64..=1.0) {
        let f = field(3, 5.0, seed, seed % 2 == 0);
        let r = interpolation_check(&f, s0, s0 + gap, theta).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }

    #[test]
    fn leray_is_idempotent(seed in 0u64..1000, dim in 2usize..=3) {
        let f = field(dim, 5.0, seed, false);
        let p = leray_project(&f);
        let pp = leray_project(&p);
        prop_assert!((&pp - &p).l2() <= 1e-14 * f.l2());
        prop_assert!(p.satisfies_divfree(1e-12));
        prop_assert!(p.l2() <= f.l2() * (1.0 + 1e-14));
    }

    #[test]
    fn curl_inverse_undoes_curl(seed in 0u64..1000, dim in 2usize..=3) {
        let y = field(dim, 5.0, seed, true);
        let back = curl_inverse(&curl(&y)).unwrap();
        prop_assert!((&back - &y).l2() <= 1e-13 * y.l2());
    }

    #[test]
    fn band_split_partitions(seed in 0u64..1000, rho in 0.5f64..5.0) {
        let f = field(3, 5.0, seed, true);
        let g = f.grid().clone();
        let low = band_filter(&f, 0.0, rho).unwrap();
        let high = band_filter(&f, next_shell(&g, rho), g.kmax()).unwrap();
        prop_assert!((&(&low + &high) - &f).l2() <= 1e-13 * f.l2());
        let overlap = low.l2().powi(2) + high.l2().powi(2) - f.l2().powi(2);
        prop_assert!(overlap.abs() <= 1e-13 * f.l2().powi(2));
    }

    #[test]
    fn hall_term_cancels(seed in 0u64..1000, top in 1.5f64..5.0) {
        let v = field(3, top, seed, true);
        let b = field(3, top, seed + 7000, true);
        prop_assert!(cancellation_check(&v, &b).unwrap() <= 1e-12);
    }

    #[test]
    fn snapshot_round_trip(seed in 0u64..1000, dim in 2u32..=3, time in 0.0f64..100.0, comps in 1usize..=9) {
        let f = field(dim as usize, 4.0, seed, false);
        let components: Vec<_> = (0..comps).map(|i| f.comp(i % 3).to_vec()).collect();
        let snap = Snapshot { dim, n: 16, time, components };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.hmhd");
        snapshot_write(&path, &snap).unwrap();
        prop_assert_eq!(snapshot_read(&path).unwrap(), snap);
    }

    #[test]
    fn config_text_round_trip(
        n in prop::sample::select(vec![8usize, 16, 32, 64]),
        mu in 0.01f64..2.0,
        eps in 0.0f64..2.0,
        dt in 1e-5f64..1e-2,
        planar in any::<bool>(),
        extended in any::<bool>(),
        seed in any::<u64>(),
        lo in 0.5f64..3.0,
        width in 0.5f64..3.0,
        ball in prop::option::of(1.0f64..5.0),
        snaps in prop::collection::vec(0.0f64..1.0, 0..4),
    ) {
        let c = RunConfig {
            dimension: if planar { Dimension::TwoHalf } else { Dimension::Three },
            formulation: if extended && !planar { Formulation::Extended } else { Formulation::Physical },
            n,
            mu,
            nu: mu,
            eps,
            dt,
            initial: InitialKind::RandomBand { lo, hi: lo + width, seed },
            filter: ball.map_or(Filter::None, Filter::Ball),
            snapshots: snaps,
            seed,
            ..RunConfig::default()
        };
        let back = RunConfig::from_text(&c.to_text()).unwrap();
        prop_assert_eq!(back, c);
    }
}
