use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Dimension, Filter, Monitor, RunConfig};
use super::run::{initial_fields, run_in_memory, run_observed, AnyState, MonitorResult, Stepper};
use crate::diagnostics::{
    critical_constant_sample, decay_monitor, planar_constants, twin_sample, weakstrong_monitor, PlanarSample,
    WeakStrongReport,
};
use crate::error::{Error, Result};
use crate::mhd3d::{Formulation, InitialKind, SimState3D};
use crate::sobolev::hs_norm;
use crate::spectral::{band_filter, next_shell, single_mode, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    FujitaKato3d,
    Decay3d,
    FreqSplit3d,
    WeakStrong3d,
    SmallData2p5d,
    SmallB2p5d,
    ThresholdBisect,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::FujitaKato3d,
        Preset::Decay3d,
        Preset::FreqSplit3d,
        Preset::WeakStrong3d,
        Preset::SmallData2p5d,
        Preset::SmallB2p5d,
        Preset::ThresholdBisect,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::FujitaKato3d => "fujita-kato-3d",
            Preset::Decay3d => "decay-3d",
            Preset::FreqSplit3d => "freq-split-3d",
            Preset::WeakStrong3d => "weak-strong-3d",
            Preset::SmallData2p5d => "small-data-2p5d",
            Preset::SmallB2p5d => "small-B-2p5d",
            Preset::ThresholdBisect => "threshold-bisect",
        }
    }

    /// The statement the preset exercises.
    pub fn theorem(&self) -> &'static str {
        match self {
            Preset::FujitaKato3d => {
                "global well-posedness for small critical data: the Ḣ^{1/2} norm of (u, B, u − εJ) is nonincreasing"
            }
            Preset::Decay3d => "small critical data: energy balance holds and the Ḣ^{1/2} triple norm decays to zero",
            Preset::FreqSplit3d => {
                "frequency splitting: data small at low frequencies plus a high-frequency part that is damped by dissipation"
            }
            Preset::WeakStrong3d => "weak-strong uniqueness: a Leray-Hopf solution coincides with the strong solution",
            Preset::SmallData2p5d => "2½D global regularity for data small in L² and Ḣ¹",
            Preset::SmallB2p5d => "2½D global regularity when only the magnetic field is small",
            Preset::ThresholdBisect => "the smallness constant c of ‖u₀‖ + ‖B₀‖ + ‖u₀ − εJ₀‖ in Ḣ^{1/2} below cμ",
        }
    }

    /// Base configuration; CLI flags and config files override it.
    pub fn config(&self) -> RunConfig {
        let band = |lo: f64, hi: f64| InitialKind::RandomBand { lo, hi, seed: 0 };
        let mut c = RunConfig { out: format!("out/{}", self.as_str()).into(), ..RunConfig::default() };
        match self {
            Preset::FujitaKato3d => {
                c.formulation = Formulation::Extended;
                c.n = 16;
                c.initial = band(1.0, 3.0);
                c.amplitude = 1e-2;
                c.t_end = 1.0;
                c.monitors = vec![Monitor::Energy, Monitor::Monotonicity, Monitor::Decay, Monitor::Drift];
                c.decay_fraction = 0.5;
            }
            Preset::Decay3d => {
                c.n = 16;
                c.initial = band(1.0, 3.0);
                c.amplitude = 1e-2;
                c.dt = 2e-3;
                c.t_end = 10.0;
                c.monitors = vec![Monitor::Energy, Monitor::Monotonicity, Monitor::Decay];
            }
            Preset::FreqSplit3d => {
                c.n = 32;
                c.initial = band(1.0, 6.0);
                c.amplitude = 1e-2;
                c.t_end = 0.2;
                c.filter = Filter::Ball(3.0);
                c.monitors = vec![Monitor::Energy];
            }
            Preset::WeakStrong3d => {
                c.n = 16;
                c.mu = 0.05;
                c.nu = 0.05;
                c.eps = 0.1;
                c.initial = band(1.0, 2.0);
                c.amplitude = 1.0;
                c.t_end = 0.5;
                c.monitors = Vec::new();
            }
            Preset::SmallData2p5d => {
                c.dimension = Dimension::TwoHalf;
                c.n = 64;
                c.initial = band(1.0, 4.0);
                c.amplitude = 0.05;
                c.t_end = 0.5;
                c.monitors = vec![Monitor::Energy, Monitor::ERes];
            }
            Preset::SmallB2p5d => {
                c.dimension = Dimension::TwoHalf;
                c.n = 64;
                c.initial = band(1.0, 4.0);
                c.amplitude = 0.5;
                c.b_amplitude = Some(1e-3);
                c.t_end = 0.5;
                c.monitors = vec![Monitor::Energy, Monitor::ERes];
            }
            Preset::ThresholdBisect => {
                c.formulation = Formulation::Extended;
                c.n = 16;
                c.initial = band(1.0, 3.0);
                c.amplitude = 1e-2;
                c.t_end = 0.1;
                c.adaptive_dt = true;
                c.monitors = vec![Monitor::Monotonicity];
            }
        }
        c
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Unknown(format!("preset `{s}`")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Machine-readable outcome of an experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub preset: &'static str,
    pub theorem: &'static str,
    pub passed: bool,
    pub monitors: Vec<MonitorResult>,
    pub fitted: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
}

impl ExperimentReport {
    fn new(preset: Preset, monitors: Vec<MonitorResult>) -> Self {
        ExperimentReport {
            preset: preset.as_str(),
            theorem: preset.theorem(),
            passed: monitors.iter().all(|m| m.passed),
            monitors,
            fitted: BTreeMap::new(),
            thresholds: BTreeMap::new(),
        }
    }

    fn add(&mut self, m: MonitorResult) {
        self.passed &= m.passed;
        self.monitors.push(m);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Runs a preset with `cfg` as its configuration, normally
/// `preset.config()` with overrides applied.
pub fn experiment(preset: Preset, cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match preset {
        Preset::FujitaKato3d => fujita_kato(cfg),
        Preset::Decay3d => decay(cfg),
        Preset::FreqSplit3d => freq_split(cfg),
        Preset::WeakStrong3d => weak_strong(cfg),
        Preset::SmallData2p5d | Preset::SmallB2p5d => planar(preset, cfg),
        Preset::ThresholdBisect => threshold_bisect(cfg).map(|b| b.report),
    }
}

fn need_3d(cfg: &RunConfig, what: &str) -> Result<()> {
    if cfg.dimension != Dimension::Three {
        return Err(Error::Config(format!("{what} runs in three dimensions")));
    }
    Ok(())
}

/// ‖u₀‖ + ‖B₀‖ + ‖u₀ − εJ₀‖ in Ḣ^{1/2}.
pub fn critical_size(cfg: &RunConfig) -> Result<f64> {
    let (u, b) = initial_fields(cfg)?;
    let s = SimState3D::physical(u, b)?;
    let v = s.electron_velocity(cfg.eps);
    Ok(hs_norm(&s.u, 0.5)? + hs_norm(&s.b, 0.5)? + hs_norm(&v, 0.5)?)
}

fn fujita_kato(cfg: &RunConfig) -> Result<ExperimentReport> {
    need_3d(cfg, "fujita-kato-3d")?;
    let params = cfg.params()?;
    let mut c_fit: f64 = 0.0;
    let mut obs = |a: &AnyState, b: &AnyState| -> Result<()> {
        if let (AnyState::D3(a), AnyState::D3(b)) = (a, b) {
            c_fit = c_fit.max(critical_constant_sample(a, b, &params)?);
        }
        Ok(())
    };
    let o = run_observed(cfg, &mut obs)?;
    let mut r = ExperimentReport::new(Preset::FujitaKato3d, o.summary.monitors);
    r.fitted.insert("critical_c".into(), c_fit);
    r.thresholds.insert("critical_size".into(), critical_size(cfg)?);
    Ok(r)
}

fn decay(cfg: &RunConfig) -> Result<ExperimentReport> {
    need_3d(cfg, "decay-3d")?;
    let o = run_in_memory(cfg)?;
    let d = decay_monitor(&o.records, 10, cfg.decay_fraction)?;
    let mut r = ExperimentReport::new(Preset::Decay3d, o.summary.monitors);
    if let Some(rate) = d.rate {
        r.fitted.insert("decay_rate".into(), rate);
    }
    r.fitted.insert("final_ratio".into(), d.final_ratio);
    Ok(r)
}

fn split_radius(cfg: &RunConfig) -> f64 {
    match cfg.filter {
        Filter::Ball(r) => r,
        _ => 3.0,
    }
}

/// Relative L² defect of ball(ρ) + annulus(>ρ) against the field.
pub fn split_residual(f: &VectorField, rho: f64) -> Result<f64> {
    let g = f.grid();
    let low = band_filter(f, 0.0, rho)?;
    let high = band_filter(f, next_shell(g, rho), g.kmax())?;
    let scale = f.l2();
    let d = (&(&low + &high) - f).l2();
    Ok(if scale == 0.0 { d } else { d / scale })
}

fn high_part(s: &AnyState, rho: f64) -> Result<f64> {
    let g = s.grid();
    let lo = next_shell(g, rho);
    Ok(band_filter(s.u(), lo, g.kmax())?.l2().hypot(band_filter(s.b(), lo, g.kmax())?.l2()))
}

fn freq_split(cfg: &RunConfig) -> Result<ExperimentReport> {
    need_3d(cfg, "freq-split-3d")?;
    let rho = split_radius(cfg);
    let full = RunConfig { filter: Filter::None, ..cfg.clone() };
    let (u, b) = initial_fields(&full)?;
    let partition = split_residual(&u, rho)?.max(split_residual(&b, rho)?);
    let mut high = Vec::new();
    let mut count = 0usize;
    let mut obs = |_: &AnyState, s: &AnyState| -> Result<()> {
        count += 1;
        if count % full.sample_every == 0 {
            high.push(high_part(s, rho)?);
        }
        Ok(())
    };
    let first = high_part(&super::run::initial_state(&full)?, rho)?;
    let o = run_observed(&full, &mut obs)?;
    let mut series = vec![first];
    series.extend(high);
    // the first sample interval is a transient window
    let worst_rise = series
        .windows(2)
        .skip(1)
        .map(|w| (w[1] - w[0]) / series[0].max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut r = ExperimentReport::new(Preset::FreqSplit3d, o.summary.monitors);
    r.add(MonitorResult::at_most("partition", partition, 1e-13));
    r.add(MonitorResult::at_most("high-frequency-monotone", worst_rise.max(0.0), 0.0));
    r.fitted.insert("high_initial".into(), series[0]);
    r.fitted.insert("high_final".into(), *series.last().unwrap());
    r.thresholds.insert("rho".into(), rho);
    Ok(r)
}

/// Run A from the configured data and run B with u perturbed by a single
/// divergence-free mode of L² size `cfg.perturbation`.
pub fn twin_run(cfg: &RunConfig) -> Result<WeakStrongReport> {
    need_3d(cfg, "a twin run")?;
    if cfg.formulation != Formulation::Physical {
        return Err(Error::Config("twin runs use the physical formulation".into()));
    }
    let params = cfg.params()?;
    let mut a = Stepper::new(cfg)?;
    let (u, b) = initial_fields(cfg)?;
    let amp = Complex64::new(cfg.perturbation / 2f64.sqrt(), 0.0);
    let du = single_mode(u.grid(), [1, 0, 0], 2, amp)?;
    let sb = SimState3D::physical(&u + &du, b)?;
    let mut bst = Stepper::from_state(cfg, AnyState::D3(sb))?;
    let sample = |a: &Stepper, b: &Stepper| match (a.state(), b.state()) {
        (AnyState::D3(x), AnyState::D3(y)) => twin_sample(x, y, params.eps),
        _ => unreachable!("three-dimensional twins"),
    };
    let mut samples = vec![sample(&a, &bst)?];
    while !a.done() {
        a.advance()?;
        bst.advance()?;
        if a.steps() % cfg.sample_every == 0 || a.done() {
            samples.push(sample(&a, &bst)?);
        }
    }
    weakstrong_monitor(&samples, &params)
}

fn weak_strong(cfg: &RunConfig) -> Result<ExperimentReport> {
    let fine_cfg = RunConfig { n: 2 * cfg.n, ..cfg.clone() };
    let (coarse, fine) = std::thread::scope(|sc| {
        let fine = (cfg.perturbation != 0.0).then(|| sc.spawn(|| twin_run(&fine_cfg)));
        let coarse = twin_run(cfg);
        (coarse, fine.map(|h| h.join().expect("twin run thread")))
    });
    let coarse = coarse?;
    let mut r = ExperimentReport::new(Preset::WeakStrong3d, Vec::new());
    r.add(MonitorResult::new("gronwall-bound", coarse.fitted_c, None, coarse.bound_holds));
    r.fitted.insert("fitted_c".into(), coarse.fitted_c);
    r.fitted.insert("prefactor".into(), coarse.prefactor);
    r.fitted.insert("max_delta".into(), coarse.max_delta);
    if cfg.perturbation == 0.0 {
        r.add(MonitorResult::at_most("identical-data", coarse.max_delta, 1e-13));
    } else if let Some(fine) = fine {
        let fine = fine?;
        r.fitted.insert("fitted_c_fine".into(), fine.fitted_c);
        let (lo, hi) = (coarse.fitted_c.min(fine.fitted_c), coarse.fitted_c.max(fine.fitted_c));
        let ratio = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
        r.add(MonitorResult::new("gronwall-bound-fine", fine.fitted_c, None, fine.bound_holds));
        r.add(MonitorResult::at_most("resolution-stability", ratio, 2.0));
    }
    Ok(r)
}

fn planar(preset: Preset, cfg: &RunConfig) -> Result<ExperimentReport> {
    if cfg.dimension != Dimension::TwoHalf {
        return Err(Error::Config(format!("{preset} runs in 2½D")));
    }
    let params = cfg.params()?;
    let mut samples = Vec::new();
    let mut count = 0usize;
    let mut obs = |_: &AnyState, s: &AnyState| -> Result<()> {
        count += 1;
        if count % cfg.sample_every == 0 {
            if let AnyState::D25(s) = s {
                samples.push(PlanarSample::from_state(s));
            }
        }
        Ok(())
    };
    let first = match super::run::initial_state(cfg)? {
        AnyState::D25(s0) => PlanarSample::from_state(&s0),
        AnyState::D3(_) => unreachable!("checked above"),
    };
    let o = run_observed(cfg, &mut obs)?;
    samples.insert(0, first);
    let pc = planar_constants(&samples, &params)?;
    let mut r = ExperimentReport::new(preset, o.summary.monitors);
    r.add(MonitorResult::new("omega-bound", pc.omega.lhs_max, Some(pc.omega.bound), pc.omega.holds));
    let finite = pc.v_inequality.is_finite() && pc.h1_inequality.is_finite();
    r.add(MonitorResult::new("fitted-constants-finite", pc.v_inequality.max(pc.h1_inequality), None, finite));
    r.fitted.insert("v_inequality".into(), pc.v_inequality);
    r.fitted.insert("h1_inequality".into(), pc.h1_inequality);
    r.fitted.insert("omega_c".into(), pc.omega.fitted_c);
    let s0 = &samples[0];
    r.thresholds.insert("l2_initial".into(), (s0.u_sq + s0.b_sq).sqrt());
    r.thresholds.insert("b_h1_initial".into(), (s0.b_sq + s0.grad_b * s0.grad_b).sqrt());
    Ok(r)
}

/// Result of the amplitude bisection.
#[derive(Clone, Debug)]
pub struct Bisection {
    /// Largest amplitude whose run kept the triple norm nonincreasing.
    pub threshold: f64,
    /// Smallest amplitude found to break monotonicity.
    pub failing: f64,
    pub report: ExperimentReport,
}

fn monotone_at(cfg: &RunConfig, amplitude: f64) -> Result<bool> {
    let c = RunConfig { amplitude, monitors: vec![Monitor::Monotonicity], ..cfg.clone() };
    match run_in_memory(&c) {
        Ok(o) => Ok(o.summary.passed),
        Err(Error::Numeric { .. } | Error::Cfl { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Brackets the amplitude at which the monotonicity monitor first fails,
/// starting from `cfg.amplitude`, then bisects geometrically.
pub fn threshold_bisect(cfg: &RunConfig) -> Result<Bisection> {
    need_3d(cfg, "threshold-bisect")?;
    let mut lo = cfg.amplitude;
    if !monotone_at(cfg, lo)? {
        return Err(Error::Config(format!("starting amplitude {lo} already breaks monotonicity")));
    }
    let mut hi = lo * 4.0;
    while monotone_at(cfg, hi)? {
        lo = hi;
        hi *= 4.0;
        if hi > 1e4 {
            return Err(Error::Config("no failing amplitude below 1e4".into()));
        }
    }
    for _ in 0..8 {
        let mid = (lo * hi).sqrt();
        if monotone_at(cfg, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let size = critical_size(&RunConfig { amplitude: lo, ..cfg.clone() })?;
    let mut report = ExperimentReport::new(Preset::ThresholdBisect, Vec::new());
    report.add(MonitorResult::new("bracket", hi / lo, None, hi > lo));
    report.thresholds.insert("amplitude".into(), lo);
    report.thresholds.insert("failing_amplitude".into(), hi);
    report.thresholds.insert("critical_size".into(), size);
    report.fitted.insert("c".into(), size / cfg.mu);
    Ok(Bisection { threshold: lo, failing: hi, report })
}
