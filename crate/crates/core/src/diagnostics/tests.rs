use std::sync::Arc;

use super::*;
use crate::mhd25d::{step_25d, SimState25D};
use crate::mhd3d::{make_initial, step, InitialKind, PhysicalParams, SimState3D, StepControl};
use crate::spectral::{single_mode, Grid};

fn run3d(g: &Arc<Grid>, kind: InitialKind, amp: f64, p: &PhysicalParams, dt: f64, t_end: f64, extended: bool) -> Vec<DiagnosticsRecord> {
    let (u, b) = make_initial(g, kind, amp).unwrap();
    let mut s = if extended { SimState3D::extended(u, b, p.eps).unwrap() } else { SimState3D::physical(u, b).unwrap() };
    let c = StepControl::new(dt, t_end).unwrap();
    let mut rec = Recorder::new();
    rec.push(DiagnosticsRecord::from_state_3d(&s, p, RecordOptions::default()).unwrap(), p);
    for _ in 0..c.steps() {
        s = step(&s, p, &c).unwrap();
        rec.push(DiagnosticsRecord::from_state_3d(&s, p, RecordOptions::default()).unwrap(), p);
    }
    rec.records
}

#[test]
fn beltrami_energy_and_decay() {
    let g = Grid::shared(3, 16).unwrap();
    let p = PhysicalParams::new(0.5, 0.5, 1.0).unwrap();
    let recs = run3d(&g, InitialKind::Beltrami, 0.1, &p, 1e-3, 0.2, false);
    assert!(energy_budget(&recs, &p).unwrap().max_drift <= 1e-8);
    let m = monotonicity_monitor(&recs, &p);
    assert!(m.nonincreasing && m.integrated_holds, "{m:?}");
    assert!(recs.windows(2).all(|w| w[1].triple_h12 < w[0].triple_h12));
    let d = decay_monitor(&recs, 4, 1.0).unwrap();
    assert!((d.rate.unwrap() - 2.0 * p.mu).abs() <= 0.01 * 2.0 * p.mu, "{d:?}");
}

#[test]
fn zero_run_is_trivial() {
    let g = Grid::shared(3, 8).unwrap();
    let p = PhysicalParams::default();
    let recs = run3d(&g, InitialKind::Zero, 0.0, &p, 1e-2, 0.05, true);
    assert_eq!(energy_budget(&recs, &p).unwrap().max_drift, 0.0);
    assert!(monotonicity_monitor(&recs, &p).nonincreasing);
    let d = decay_monitor(&recs, 3, 0.5).unwrap();
    assert!(d.checkpoints.iter().all(|c| c.1 == 0.0));
    assert_eq!(d.rate, None);
}

#[test]
fn energy_drift_is_second_order() {
    let g = Grid::shared(3, 16).unwrap();
    let p = PhysicalParams::new(0.2, 0.2, 1.0).unwrap();
    let kind = InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 4 };
    let drift = |dt: f64| energy_budget(&run3d(&g, kind, 0.3, &p, dt, 0.2, false), &p).unwrap().max_drift;
    let (a, b) = (drift(4e-3), drift(2e-3));
    assert!((3.5..4.5).contains(&(a / b)), "{a} {b}");
}

#[test]
fn small_data_monotone() {
    let g = Grid::shared(3, 16).unwrap();
    let p = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
    let recs = run3d(&g, InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 1 }, 0.01, &p, 1e-3, 0.1, true);
    let m = monotonicity_monitor(&recs, &p);
    assert!(m.nonincreasing && m.integrated_holds, "{m:?}");
    assert!(recs.iter().all(|r| r.v_drift.unwrap() <= 1e-10));
}

#[test]
fn twin_runs() {
    let g = Grid::shared(3, 16).unwrap();
    let p = PhysicalParams::new(0.5, 0.5, 1.0).unwrap();
    let (u, b) = make_initial(&g, InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 6 }, 0.3).unwrap();
    let c = StepControl::new(2e-3, 0.1).unwrap();
    let twin = |pert: f64| {
        let bump = single_mode(&g, [1, 2, 0], 2, num_complex::Complex64::new(pert, 0.0)).unwrap();
        let mut a = SimState3D::physical(u.clone(), b.clone()).unwrap();
        let mut bb = SimState3D::physical(&u + &bump, b.clone()).unwrap();
        let mut out = vec![twin_sample(&a, &bb, p.eps).unwrap()];
        for _ in 0..c.steps() {
            a = step(&a, &p, &c).unwrap();
            bb = step(&bb, &p, &c).unwrap();
            out.push(twin_sample(&a, &bb, p.eps).unwrap());
        }
        weakstrong_monitor(&out, &p).unwrap()
    };
    let same = twin(0.0);
    assert_eq!(same.max_delta, 0.0);
    assert_eq!(same.fitted_c, 0.0);
    let pert = twin(1e-6);
    assert!(pert.bound_holds && pert.fitted_c.is_finite());
    assert!(pert.deltas.iter().all(|d| d.lhs <= d.gronwall_rhs * (1.0 + 1e-12)));
}

#[test]
fn csv_layout() {
    let g = Grid::shared(3, 8).unwrap();
    let p = PhysicalParams::default();
    let recs = run3d(&g, InitialKind::Beltrami, 0.01, &p, 1e-3, 2e-3, true);
    let csv = to_csv(&recs);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), COLUMNS.len());
    assert_eq!(row[1].parse::<f64>().unwrap(), recs[0].u_l2);
    assert_eq!(row[3].parse::<f64>().unwrap().to_bits(), recs[0].u_h1.to_bits());
    // budget columns are empty unless requested
    assert_eq!(row[14], "");
    assert_eq!(*row.last().unwrap(), "3");
    assert!(recs.iter().all(|r| r.is_finite()));
    assert!(recs.windows(2).all(|w| w[1].diss_energy >= w[0].diss_energy));
}

#[test]
fn planar_constants_are_finite() {
    let g = Grid::shared(2, 32).unwrap();
    let p = PhysicalParams::new(0.5, 0.5, 1.0).unwrap();
    let (u, b) = make_initial(&g, InitialKind::RandomBand { lo: 1.0, hi: 4.0, seed: 2 }, 0.2).unwrap();
    let mut s = SimState25D::new(u, b, p.eps).unwrap();
    let c = StepControl::new(1e-3, 0.05).unwrap();
    let mut samples = vec![PlanarSample::from_state(&s)];
    let mut recs = Recorder::new();
    recs.push(DiagnosticsRecord::from_state_25d(&s), &p);
    for _ in 0..c.steps() {
        s = step_25d(&s, &p, &c).unwrap();
        samples.push(PlanarSample::from_state(&s));
        recs.push(DiagnosticsRecord::from_state_25d(&s), &p);
    }
    let k = planar_constants(&samples, &p).unwrap();
    assert!(k.v_inequality.is_finite() && k.h1_inequality.is_finite());
    assert!(k.omega.holds);
    assert!(energy_budget(&recs.records, &p).unwrap().max_drift <= 1e-6);
}
