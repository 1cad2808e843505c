use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::config::{Dimension, Filter, Monitor, RunConfig};
use super::snapshot::{snapshot_write, Snapshot};
use crate::diagnostics::{
    decay_monitor, energy_budget, monotonicity_monitor, write_csv, DiagnosticsRecord, RecordOptions, Recorder,
};
use crate::error::{Error, Result};
use crate::mhd25d::{e_residual, step_25d, SimState25D};
use crate::mhd3d::{make_initial, stable_dt, step, Formulation, PhysicalParams, SimState3D, StepControl};
use crate::spectral::{band_filter, Grid, VectorField};

/// A 3D or 2½D state.
#[derive(Clone, Debug)]
pub enum AnyState {
    D3(SimState3D),
    D25(SimState25D),
}

impl AnyState {
    pub fn t(&self) -> f64 {
        match self {
            AnyState::D3(s) => s.t,
            AnyState::D25(s) => s.t,
        }
    }

    pub fn u(&self) -> &VectorField {
        match self {
            AnyState::D3(s) => &s.u,
            AnyState::D25(s) => s.u(),
        }
    }

    pub fn b(&self) -> &VectorField {
        match self {
            AnyState::D3(s) => &s.b,
            AnyState::D25(s) => s.b(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u().grid()
    }

    pub fn snapshot(&self) -> Snapshot {
        match self {
            AnyState::D3(s) => Snapshot::from_state_3d(s),
            AnyState::D25(s) => Snapshot::from_state_25d(s),
        }
    }

    pub fn stable_dt(&self, params: &PhysicalParams, hall_cfl: f64) -> f64 {
        stable_dt(self.grid(), self.u().max_magnitude(), self.b().max_magnitude(), params.eps, hall_cfl)
    }
}

fn filtered(f: &VectorField, filter: Filter) -> Result<VectorField> {
    match filter {
        Filter::None => Ok(f.clone()),
        Filter::Ball(r) => band_filter(f, 0.0, r),
        Filter::Annulus(lo, hi) => band_filter(f, lo, hi),
    }
}

/// Initial (u₀, B₀) of a configuration, filtered and with B rescaled when
/// `b_amplitude` is set.
pub fn initial_fields(cfg: &RunConfig) -> Result<(VectorField, VectorField)> {
    let grid = Grid::shared(cfg.dimension.lattice(), cfg.n)?;
    let (u, mut b) = make_initial(&grid, cfg.initial, cfg.amplitude)?;
    if let Some(ba) = cfg.b_amplitude {
        b = b.scale(ba / cfg.amplitude);
    }
    Ok((filtered(&u, cfg.filter)?, filtered(&b, cfg.filter)?))
}

/// Builds the state at t = 0 and checks the stability bound unless the
/// step is adaptive.
pub fn initial_state(cfg: &RunConfig) -> Result<AnyState> {
    cfg.validate()?;
    let params = cfg.params()?;
    let (u, b) = initial_fields(cfg)?;
    let state = match (cfg.dimension, cfg.formulation) {
        (Dimension::Three, Formulation::Physical) => AnyState::D3(SimState3D::physical(u, b)?),
        (Dimension::Three, Formulation::Extended) => AnyState::D3(SimState3D::extended(u, b, params.eps)?),
        (Dimension::TwoHalf, _) => AnyState::D25(SimState25D::new(u, b, params.eps)?),
    };
    if !cfg.adaptive_dt {
        let required = state.stable_dt(&params, cfg.hall_cfl);
        if cfg.dt > required {
            return Err(Error::Config(format!("dt = {} exceeds the stability bound {required:e} at t = 0", cfg.dt)));
        }
    }
    Ok(state)
}

/// Drives one trajectory step by step.
pub struct Stepper {
    pub params: PhysicalParams,
    control: StepControl,
    adaptive: bool,
    state: AnyState,
    steps: usize,
    total: usize,
    t_end: f64,
}

impl Stepper {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let state = initial_state(cfg)?;
        Self::from_state(cfg, state)
    }

    pub fn from_state(cfg: &RunConfig, state: AnyState) -> Result<Self> {
        let control = cfg.control()?;
        Ok(Stepper {
            params: cfg.params()?,
            total: control.steps(),
            control,
            adaptive: cfg.adaptive_dt,
            state,
            steps: 0,
            t_end: cfg.t_end,
        })
    }

    pub fn state(&self) -> &AnyState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done(&self) -> bool {
        if self.adaptive {
            self.state.t() >= self.t_end * (1.0 - 1e-12)
        } else {
            self.steps >= self.total
        }
    }

    /// Advances one step and returns the step size used.
    pub fn advance(&mut self) -> Result<f64> {
        let mut c = self.control;
        if self.adaptive {
            let bound = 0.9 * self.state.stable_dt(&self.params, c.hall_cfl);
            c.dt = c.dt.min(bound).min(self.t_end - self.state.t());
        }
        self.state = match &self.state {
            AnyState::D3(s) => AnyState::D3(step(s, &self.params, &c)?),
            AnyState::D25(s) => AnyState::D25(step_25d(s, &self.params, &c)?),
        };
        self.steps += 1;
        Ok(c.dt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Absent for checks that are a yes/no condition on `value`.
    pub tolerance: Option<f64>,
}

impl MonitorResult {
    pub fn new(name: &str, value: f64, tolerance: Option<f64>, passed: bool) -> Self {
        MonitorResult { name: name.to_string(), passed, value, tolerance }
    }

    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Some(tolerance), value <= tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub passed: bool,
    pub steps: usize,
    pub final_time: f64,
    pub monitors: Vec<MonitorResult>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub last: AnyState,
}

fn record(state: &AnyState, prev: Option<(&AnyState, f64)>, params: &PhysicalParams, opts: RecordOptions) -> Result<DiagnosticsRecord> {
    match state {
        AnyState::D3(s) => DiagnosticsRecord::from_state_3d(s, params, opts),
        AnyState::D25(s) => {
            let mut r = DiagnosticsRecord::from_state_25d(s);
            if let Some((AnyState::D25(p), dt)) = prev {
                if params.mu == params.nu {
                    r.e_residual = Some(e_residual(p, s, params, dt)?);
                }
            }
            Ok(r)
        }
    }
}

/// Pass/fail of the configured monitors on a finished record series.
pub fn evaluate_monitors(cfg: &RunConfig, params: &PhysicalParams, records: &[DiagnosticsRecord]) -> Result<Vec<MonitorResult>> {
    let mut out = Vec::new();
    for m in &cfg.monitors {
        out.push(match m {
            Monitor::Energy => MonitorResult::at_most("energy", energy_budget(records, params)?.max_drift, cfg.energy_tol),
            Monitor::Monotonicity => {
                let r = monotonicity_monitor(records, params);
                let ok = r.max_uptick <= cfg.uptick_tol && r.integrated_excess <= cfg.uptick_tol;
                MonitorResult::new("monotonicity", r.max_uptick.max(r.integrated_excess), Some(cfg.uptick_tol), ok)
            }
            Monitor::Decay => {
                let r = decay_monitor(records, 5, cfg.decay_fraction)?;
                MonitorResult::new("decay", r.final_ratio, Some(cfg.decay_fraction), r.passes)
            }
            Monitor::ERes => {
                let v = records.iter().filter_map(|r| r.e_residual).fold(0.0, f64::max);
                MonitorResult::at_most("e-residual", v, cfg.e_residual_tol)
            }
            Monitor::Drift => {
                let v = records.iter().filter_map(|r| r.v_drift).fold(0.0, f64::max);
                MonitorResult::at_most("drift", v, cfg.drift_tol)
            }
        });
    }
    Ok(out)
}

/// Called after every accepted step with the previous and the new state.
pub type Observer<'a> = &'a mut dyn FnMut(&AnyState, &AnyState) -> Result<()>;

fn execute(cfg: &RunConfig, out: Option<&Path>, observer: Option<Observer>) -> Result<RunOutcome> {
    let mut observer = observer;
    if cfg.monitors.contains(&Monitor::ERes) && (cfg.dimension != Dimension::TwoHalf || cfg.mu != cfg.nu) {
        return Err(Error::Config("the e-residual monitor needs dimension = 2.5 and mu == nu".into()));
    }
    let mut st = Stepper::new(cfg)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let params = st.params;
    let opts = RecordOptions { budget: cfg.budget, cancellation: cfg.cancellation };
    let mut rec = Recorder::new();
    rec.push(record(st.state(), None, &params, opts)?, &params);
    let mut pending: Vec<(usize, f64)> = cfg.snapshots.iter().copied().enumerate().collect();
    let write_due = |state: &AnyState, pending: &mut Vec<(usize, f64)>| -> Result<()> {
        let t = state.t();
        while let Some(&(i, ts)) = pending.first() {
            if ts > t + 1e-12 {
                break;
            }
            if let Some(dir) = out {
                snapshot_write(&dir.join(format!("snapshot_{i:03}.hmhd")), &state.snapshot())?;
            }
            pending.remove(0);
        }
        Ok(())
    };
    pending.sort_by(|a, b| a.1.total_cmp(&b.1));
    write_due(st.state(), &mut pending)?;
    while !st.done() {
        let prev = st.state().clone();
        let dt = match st.advance() {
            Ok(dt) => dt,
            Err(e) => {
                if let Some(dir) = out {
                    snapshot_write(&dir.join("last_good.hmhd"), &prev.snapshot())?;
                    write_csv(&rec.records, &dir.join("timeseries.csv"))?;
                }
                return Err(match e {
                    Error::Cfl { .. } => Error::numeric(format!("step at t = {}: {e}", prev.t())),
                    other => other,
                });
            }
        };
        write_due(st.state(), &mut pending)?;
        if let Some(obs) = observer.as_mut() {
            obs(&prev, st.state())?;
        }
        if st.steps() % cfg.sample_every == 0 || st.done() {
            let r = record(st.state(), Some((&prev, dt)), &params, opts)?;
            if !r.is_finite() {
                return Err(Error::numeric("diagnostics record"));
            }
            rec.push(r, &params);
        }
    }
    let monitors = evaluate_monitors(cfg, &params, &rec.records)?;
    let summary = RunSummary {
        passed: monitors.iter().all(|m| m.passed),
        steps: st.steps(),
        final_time: st.state().t(),
        monitors,
    };
    if let Some(dir) = out {
        write_csv(&rec.records, &dir.join("timeseries.csv"))?;
        snapshot_write(&dir.join("final.hmhd"), &st.state().snapshot())?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("plain data"))?;
        std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    }
    Ok(RunOutcome { summary, records: rec.records, last: st.state().clone() })
}

/// Runs a configuration and writes `timeseries.csv`, `summary.json`,
/// `config.txt`, the configured snapshots and `final.hmhd` into `cfg.out`.
/// On a numeric failure the last good state goes to `last_good.hmhd`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    execute(cfg, Some(&cfg.out), None)
}

/// Same as [`run`] without touching the filesystem.
pub fn run_in_memory(cfg: &RunConfig) -> Result<RunOutcome> {
    execute(cfg, None, None)
}

/// [`run_in_memory`] with a per-step observer.
pub fn run_observed(cfg: &RunConfig, observer: Observer) -> Result<RunOutcome> {
    execute(cfg, None, Some(observer))
}

/// Process exit code for a run or experiment result: 0 pass, 1 monitor
/// failure, 2 configuration or input error, 3 numeric failure.
pub fn exit_code(result: &Result<bool>) -> i32 {
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Numeric { .. } | Error::Cfl { .. }) => 3,
        Err(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhd3d::InitialKind;

    fn small() -> RunConfig {
        let mut c = RunConfig { n: 16, t_end: 0.01, ..RunConfig::default() };
        c.monitors = vec![Monitor::Energy, Monitor::Monotonicity];
        c
    }

    #[test]
    fn zero_run_passes() {
        let mut c = small();
        c.initial = InitialKind::Zero;
        let o = run_in_memory(&c).unwrap();
        assert!(o.summary.passed);
        assert!(o.records.iter().all(|r| r.u_l2 == 0.0 && r.b_l2 == 0.0 && r.triple_h12 == 0.0));
    }

    #[test]
    fn runs_are_deterministic_on_disk() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let mut c = small();
        c.snapshots = vec![0.005];
        c.out = d1.path().to_path_buf();
        run(&c).unwrap();
        c.out = d2.path().to_path_buf();
        run(&c).unwrap();
        for f in ["timeseries.csv", "final.hmhd", "snapshot_000.hmhd", "summary.json"] {
            assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn unstable_start_is_a_config_error() {
        let mut c = small();
        c.amplitude = 50.0;
        c.dt = 0.05;
        let r = run_in_memory(&c).map(|o| o.summary.passed);
        assert_eq!(exit_code(&r), 2);
        c.adaptive_dt = true;
        assert!(run_in_memory(&c).is_ok());
    }

    #[test]
    fn planar_run_tracks_e_residual() {
        let mut c = small();
        c.dimension = Dimension::TwoHalf;
        c.n = 16;
        c.monitors = vec![Monitor::Energy, Monitor::ERes];
        let o = run_in_memory(&c).unwrap();
        assert!(o.summary.passed, "{:?}", o.summary);
        assert!(o.records[1..].iter().all(|r| r.e_residual.is_some()));
    }
}
