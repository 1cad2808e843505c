use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mhd3d::{Formulation, InitialKind, PhysicalParams, StepControl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Dimension {
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "2.5")]
    TwoHalf,
}

impl Dimension {
    /// Lattice dimension.
    pub fn lattice(&self) -> usize {
        match self {
            Dimension::Three => 3,
            Dimension::TwoHalf => 2,
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3" => Ok(Dimension::Three),
            "2.5" => Ok(Dimension::TwoHalf),
            _ => Err(Error::Config(format!("dimension must be 3 or 2.5, got `{s}`"))),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Three => "3",
            Dimension::TwoHalf => "2.5",
        })
    }
}

/// Spectral filter applied to the initial data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    None,
    /// Keep |k| ≤ ρ.
    Ball(f64),
    /// Keep lo ≤ |k| ≤ hi.
    Annulus(f64, f64),
}

impl FromStr for Filter {
    type Err = Error;
    /// `none`, `ball:ρ` or `annulus:lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{v}` in filter `{s}`")));
        match parts.as_slice() {
            ["none"] => Ok(Filter::None),
            ["ball", r] => Ok(Filter::Ball(num(r)?)),
            ["annulus", lo, hi] => Ok(Filter::Annulus(num(lo)?, num(hi)?)),
            _ => Err(Error::Config(format!("filter must be none, ball:ρ or annulus:lo:hi, got `{s}`"))),
        }
    }
}

/// Monitors that decide pass/fail of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monitor {
    Energy,
    Monotonicity,
    Decay,
    ERes,
    Drift,
}

impl FromStr for Monitor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(Monitor::Energy),
            "monotonicity" => Ok(Monitor::Monotonicity),
            "decay" => Ok(Monitor::Decay),
            "e-residual" => Ok(Monitor::ERes),
            "drift" => Ok(Monitor::Drift),
            _ => Err(Error::Unknown(format!("monitor `{s}`"))),
        }
    }
}

/// Everything a run needs. Parsed from a flat `key = value` file; see
/// [`RunConfig::KEYS`] for the accepted keys.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub dimension: Dimension,
    pub formulation: Formulation,
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub hall_cfl: f64,
    /// Shrink dt below the stability bound instead of failing.
    pub adaptive_dt: bool,
    pub initial: InitialKind,
    pub amplitude: f64,
    /// Optional separate amplitude for B (defaults to `amplitude`).
    pub b_amplitude: Option<f64>,
    pub seed: u64,
    pub filter: Filter,
    pub out: PathBuf,
    /// Times at which snapshots are written; the final state is always
    /// written.
    pub snapshots: Vec<f64>,
    pub budget: bool,
    pub cancellation: bool,
    pub monitors: Vec<Monitor>,
    pub energy_tol: f64,
    pub uptick_tol: f64,
    pub decay_fraction: f64,
    pub e_residual_tol: f64,
    pub drift_tol: f64,
    /// Size of the single-mode perturbation of the second run in twin-run
    /// experiments.
    pub perturbation: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: Dimension::Three,
            formulation: Formulation::Physical,
            n: 32,
            mu: 1.0,
            nu: 1.0,
            eps: 1.0,
            dt: 1e-3,
            t_end: 0.1,
            sample_every: 1,
            hall_cfl: 0.25,
            adaptive_dt: false,
            initial: InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 0 },
            amplitude: 0.01,
            b_amplitude: None,
            seed: 0,
            filter: Filter::None,
            out: PathBuf::from("out"),
            snapshots: Vec::new(),
            budget: false,
            cancellation: false,
            monitors: vec![Monitor::Energy],
            energy_tol: 1e-6,
            uptick_tol: 1e-8,
            decay_fraction: 1e-4,
            e_residual_tol: 1e-5,
            drift_tol: 1e-6,
            perturbation: 1e-6,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean `{v}` for `{key}`"))),
    }
}

impl RunConfig {
    /// Accepted keys in the order they are documented.
    pub const KEYS: [&'static str; 29] = [
        "dimension",
        "formulation",
        "n",
        "mu",
        "nu",
        "eps",
        "dt",
        "t_end",
        "sample_every",
        "hall_cfl",
        "adaptive_dt",
        "initial",
        "amplitude",
        "b_amplitude",
        "seed",
        "band_lo",
        "band_hi",
        "filter",
        "out",
        "snapshots",
        "budget",
        "cancellation",
        "monitors",
        "energy_tol",
        "uptick_tol",
        "decay_fraction",
        "e_residual_tol",
        "drift_tol",
        "perturbation",
    ];

    /// Sets one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "dimension" => self.dimension = v.parse()?,
            "formulation" => self.formulation = v.parse().map_err(|_| Error::Config(format!("bad formulation `{v}`")))?,
            "n" => self.n = parse(key, v)?,
            "mu" => self.mu = parse(key, v)?,
            "nu" => self.nu = parse(key, v)?,
            "eps" => self.eps = parse(key, v)?,
            "dt" => self.dt = parse(key, v)?,
            "t_end" => self.t_end = parse(key, v)?,
            "sample_every" => self.sample_every = parse(key, v)?,
            "hall_cfl" => self.hall_cfl = parse(key, v)?,
            "adaptive_dt" => self.adaptive_dt = parse_bool(key, v)?,
            "initial" => {
                self.initial = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
                match self.initial {
                    InitialKind::RandomBand { seed, .. } if v.split(':').count() == 4 => self.seed = seed,
                    _ => self.set_seed(self.seed),
                }
            }
            "amplitude" => self.amplitude = parse(key, v)?,
            "b_amplitude" => self.b_amplitude = Some(parse(key, v)?),
            "seed" => self.set_seed(parse(key, v)?),
            "band_lo" | "band_hi" => {
                let x: f64 = parse(key, v)?;
                match &mut self.initial {
                    InitialKind::RandomBand { lo, hi, .. } => {
                        if key == "band_lo" {
                            *lo = x
                        } else {
                            *hi = x
                        }
                    }
                    _ => return Err(Error::Config(format!("`{key}` needs initial = random-band"))),
                }
            }
            "filter" => self.filter = v.parse()?,
            "out" => self.out = PathBuf::from(v),
            "snapshots" => {
                self.snapshots = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| parse(key, s.trim())).collect::<Result<_>>()?
                }
            }
            "budget" => self.budget = parse_bool(key, v)?,
            "cancellation" => self.cancellation = parse_bool(key, v)?,
            "monitors" => {
                self.monitors = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|e: Error| Error::Config(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "energy_tol" => self.energy_tol = parse(key, v)?,
            "uptick_tol" => self.uptick_tol = parse(key, v)?,
            "decay_fraction" => self.decay_fraction = parse(key, v)?,
            "e_residual_tol" => self.e_residual_tol = parse(key, v)?,
            "drift_tol" => self.drift_tol = parse(key, v)?,
            "perturbation" => self.perturbation = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn set_seed(&mut self, s: u64) {
        self.seed = s;
        if let InitialKind::RandomBand { seed, .. } = &mut self.initial {
            *seed = s;
        }
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Serializes back to the key-value format.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("dimension = {}", self.dimension),
            format!("formulation = {}", match self.formulation {
                Formulation::Physical => "physical",
                Formulation::Extended => "extended",
            }),
            format!("n = {}", self.n),
            format!("mu = {:?}", self.mu),
            format!("nu = {:?}", self.nu),
            format!("eps = {:?}", self.eps),
            format!("dt = {:?}", self.dt),
            format!("t_end = {:?}", self.t_end),
            format!("sample_every = {}", self.sample_every),
            format!("hall_cfl = {:?}", self.hall_cfl),
            format!("adaptive_dt = {}", self.adaptive_dt),
        ];
        lines.push(format!("initial = {}", match self.initial {
            InitialKind::Beltrami => "beltrami".to_string(),
            InitialKind::TaylorGreen => "taylor-green".to_string(),
            InitialKind::Zero => "zero".to_string(),
            InitialKind::RandomBand { lo, hi, seed } => format!("random-band:{lo:?}:{hi:?}:{seed}"),
        }));
        lines.push(format!("amplitude = {:?}", self.amplitude));
        if let Some(b) = self.b_amplitude {
            lines.push(format!("b_amplitude = {b:?}"));
        }
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("filter = {}", match self.filter {
            Filter::None => "none".to_string(),
            Filter::Ball(r) => format!("ball:{r:?}"),
            Filter::Annulus(lo, hi) => format!("annulus:{lo:?}:{hi:?}"),
        }));
        lines.push(format!("out = {}", self.out.display()));
        let snaps: Vec<String> = self.snapshots.iter().map(|t| format!("{t:?}")).collect();
        lines.push(format!("snapshots = {}", snaps.join(",")));
        lines.push(format!("budget = {}", self.budget));
        lines.push(format!("cancellation = {}", self.cancellation));
        let mons: Vec<&str> = self
            .monitors
            .iter()
            .map(|m| match m {
                Monitor::Energy => "energy",
                Monitor::Monotonicity => "monotonicity",
                Monitor::Decay => "decay",
                Monitor::ERes => "e-residual",
                Monitor::Drift => "drift",
            })
            .collect();
        lines.push(format!("monitors = {}", mons.join(",")));
        lines.push(format!("energy_tol = {:?}", self.energy_tol));
        lines.push(format!("uptick_tol = {:?}", self.uptick_tol));
        lines.push(format!("decay_fraction = {:?}", self.decay_fraction));
        lines.push(format!("e_residual_tol = {:?}", self.e_residual_tol));
        lines.push(format!("drift_tol = {:?}", self.drift_tol));
        lines.push(format!("perturbation = {:?}", self.perturbation));
        lines.join("\n") + "\n"
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let p = PhysicalParams::new(self.mu, self.nu, self.eps)?;
        if self.formulation == Formulation::Extended {
            p.validate_extended()?;
        }
        Ok(p)
    }

    pub fn control(&self) -> Result<StepControl> {
        let mut c = StepControl::new(self.dt, self.t_end)?;
        c.hall_cfl = self.hall_cfl;
        c.validate()?;
        Ok(c)
    }

    /// Static checks; the stability bound at t = 0 is checked when the
    /// initial state is built.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.control()?;
        if self.n < 4 {
            return Err(Error::Config(format!("n must be at least 4, got {}", self.n)));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be positive".into()));
        }
        if self.dimension == Dimension::TwoHalf && self.formulation == Formulation::Extended {
            return Err(Error::Config("the extended formulation is three-dimensional".into()));
        }
        if self.initial != InitialKind::Zero && !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        if let Some(b) = self.b_amplitude {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::Config(format!("b_amplitude must be nonnegative, got {b}")));
            }
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::Config(format!("perturbation must be nonnegative, got {}", self.perturbation)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.apply_text("dimension = 2.5\nn = 16\nfilter = annulus:1:3\nsnapshots = 0.5, 1\nmonitors = energy,e-residual\nseed = 7\n# comment\n")
            .unwrap();
        c.validate().unwrap();
        assert_eq!(c.dimension, Dimension::TwoHalf);
        assert_eq!(c.initial, InitialKind::RandomBand { lo: 1.0, hi: 3.0, seed: 7 });
        let back = RunConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::from_text("colour = red"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("n = many"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("formulation = extended\nnu = 0.5"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("just words"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("monitors = vibes"), Err(Error::Config(_))));
    }
}
