//! Flat `key = value` scenario files.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `xi`, `omega`, `sweep_rate_A` | model constants | required |
//! | `envelope.variant` | `zero`, `constant`, `gaussian`, `twin_gaussian` | required |
//! | `envelope.omega0` | amplitude (`constant`, `gaussian`) | required |
//! | `envelope.width` | Gaussian width | required for `gaussian` |
//! | `envelope.center` | Gaussian center | `t_a` |
//! | `envelope.a.omega0`, `.width`, `.center` | first twin pulse | center `t_a` |
//! | `envelope.b.omega0`, `.width`, `.center` | second twin pulse | center `t_b` |
//! | `t0`, `t1` | time window | derived from the envelope |
//! | `dt` | RK4 step | `1e-3` |
//! | `frame` | `rotating` or `lab` | `rotating` |
//! | `initial_state` | label 1, 2 or 3 whose populations are written | `1` |
//! | `method` | `ode`, `eigenbasis` or `both` | `ode` |
//! | `checkpoint_stride` | RK4 steps between recorded rows | `10` |
//! | `dim` | `3` (triplet) or `4` (with singlet) | `3` |
//! | `null_tol` | smallest overlap with a defined phase | `1e-6` |
//! | `permutation_threshold` | fidelity needed to call a permutation | `0.99` |
//! | `sweep.omega0_min`, `_max`, `_n` | sweep axis | `0.2`, `2.5`, `40` |
//! | `sweep.A_min`, `_max`, `_n` | sweep axis | `0.02`, `0.3`, `40` |
//! | `sweep.arg_tol` | `|product_arg - pi|` allowed in the adiabatic flag | `0.1` |
//! | `workers` | sweep threads | available parallelism |
//! | `eigen.xi_list` | comma-separated `xi` values for the gap study | empty |
//!
//! Times are in units of `1/xi` when `xi = 1`; in general every time and
//! energy is taken literally in the same (`hbar = 1`) units.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{crossing_times, DimMode, Envelope, Frame, ModelParams, Pulse};

/// Tail factor `sqrt(ln 1000)`: a Gaussian is at `1e-3` of its peak this
/// many widths away from its center. A small margin keeps the tail strictly
/// under the limit after rounding.
const TAIL_WIDTHS: f64 = 2.628_260_4 * 1.001;
/// Widths after the first twin pulse at which a twin run ends.
const TWIN_TRAILING_WIDTHS: f64 = 6.0;

const KNOWN_KEYS: &[&str] = &[
    "xi",
    "omega",
    "sweep_rate_A",
    "envelope.variant",
    "envelope.omega0",
    "envelope.width",
    "envelope.center",
    "envelope.a.omega0",
    "envelope.a.width",
    "envelope.a.center",
    "envelope.b.omega0",
    "envelope.b.width",
    "envelope.b.center",
    "t0",
    "t1",
    "dt",
    "frame",
    "initial_state",
    "method",
    "checkpoint_stride",
    "dim",
    "null_tol",
    "permutation_threshold",
    "sweep.omega0_min",
    "sweep.omega0_max",
    "sweep.omega0_n",
    "sweep.A_min",
    "sweep.A_max",
    "sweep.A_n",
    "sweep.arg_tol",
    "workers",
    "eigen.xi_list",
];

/// Parsed but unresolved key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1)));
            }
            if value.is_empty() {
                return Err(Error::Config(format!("line {}: empty value for '{key}'", n + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets or replaces a key (command-line overrides, sweep points).
    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("cannot parse '{v}' for '{key}'")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

/// Which transporter(s) a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ode,
    Eigenbasis,
    Both,
}

impl Method {
    pub fn uses_ode(self) -> bool {
        matches!(self, Method::Ode | Method::Both)
    }

    pub fn uses_eigenbasis(self) -> bool {
        matches!(self, Method::Eigenbasis | Method::Both)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(Method::Ode),
            "eigenbasis" => Ok(Method::Eigenbasis),
            "both" => Ok(Method::Both),
            _ => Err(Error::Config(format!("method must be ode|eigenbasis|both, got '{s}'"))),
        }
    }
}

pub fn parse_frame(s: &str) -> Result<Frame> {
    match s {
        "rotating" => Ok(Frame::Rotating),
        "lab" => Ok(Frame::Lab),
        _ => Err(Error::Config(format!("frame must be rotating|lab, got '{s}'"))),
    }
}

pub fn parse_dim(s: &str) -> Result<DimMode> {
    match s {
        "3" => Ok(DimMode::Triplet),
        "4" => Ok(DimMode::Full),
        _ => Err(Error::Config(format!("dim must be 3 or 4, got '{s}'"))),
    }
}

/// A fully resolved single-scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub frame: Frame,
    /// Zero-based label whose populations are written.
    pub initial_state: usize,
    pub method: Method,
    pub checkpoint_stride: usize,
    pub null_tol: f64,
    pub permutation_threshold: f64,
}

impl ScenarioConfig {
    /// Scenario with every optional setting at its default and the window
    /// chosen from the envelope.
    pub fn with_defaults(model: ModelParams) -> Result<Self> {
        model.validate()?;
        let (t0, t1) = default_window(&model);
        let cfg = Self {
            model,
            t0,
            t1,
            dt: 1e-3,
            frame: Frame::Rotating,
            initial_state: 0,
            method: Method::Ode,
            checkpoint_stride: 10,
            null_tol: crate::phase::DEFAULT_NULL_TOL,
            permutation_threshold: crate::phase::DEFAULT_PERMUTATION_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let model = model_from_map(map)?;
        model.validate()?;
        let (dt0, dt1) = default_window(&model);
        let frame = match map.get::<String>("frame")? {
            Some(s) => parse_frame(&s)?,
            None => Frame::Rotating,
        };
        let method = map.get_or("method", Method::Ode)?;
        let label: usize = map.get_or("initial_state", 1)?;
        if !(1..=3).contains(&label) {
            return Err(Error::Config(format!("initial_state must be 1, 2 or 3, got {label}")));
        }
        let cfg = Self {
            model,
            t0: map.get_or("t0", dt0)?,
            t1: map.get_or("t1", dt1)?,
            dt: map.get_or("dt", 1e-3)?,
            frame,
            initial_state: label - 1,
            method,
            checkpoint_stride: map.get_or("checkpoint_stride", 10)?,
            null_tol: map.get_or("null_tol", crate::phase::DEFAULT_NULL_TOL)?,
            permutation_threshold: map
                .get_or("permutation_threshold", crate::phase::DEFAULT_PERMUTATION_THRESHOLD)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the window, the step size and the envelope tails.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::Config(format!(
                "need t1 > t0, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        let dt_max = self.max_dt();
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} exceeds 1e-2 / (largest rate) = {dt_max:e}",
                self.dt
            )));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::Config("checkpoint_stride must be >= 1".into()));
        }
        if !(self.null_tol > 0.0 && self.null_tol < 1.0) {
            return Err(Error::Config("null_tol must lie in (0, 1)".into()));
        }
        if !(self.permutation_threshold > 0.0 && self.permutation_threshold <= 1.0) {
            return Err(Error::Config("permutation_threshold must lie in (0, 1]".into()));
        }
        let env = &self.model.envelope;
        if !env.pulses().is_empty() {
            let limit = 1e-3 * env.peak();
            for t in [self.t0, self.t1] {
                if env.value(t) > limit {
                    return Err(Error::Config(format!(
                        "envelope at t = {t} is {:e}, above 1e-3 of its peak; widen the window",
                        env.value(t)
                    )));
                }
            }
        }
        if self.method.uses_eigenbasis() && self.frame == Frame::Lab {
            return Err(Error::Config(
                "eigenbasis transport needs the rotating frame; the lab-frame Hamiltonian is not slowly varying".into(),
            ));
        }
        Ok(())
    }

    /// `1e-2 / max(xi, Omega0, |A t - omega|)` with the last term taken at
    /// both ends of the window.
    pub fn max_dt(&self) -> f64 {
        let m = &self.model;
        let rate = [
            m.xi,
            m.envelope.peak(),
            (m.sweep_rate * self.t0 - m.omega).abs(),
            (m.sweep_rate * self.t1 - m.omega).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        1e-2 / rate
    }

    /// Spacing of the eigenframe and adiabaticity grids.
    pub fn checkpoint_spacing(&self) -> f64 {
        (self.dt * self.checkpoint_stride as f64).min(self.t1 - self.t0)
    }

    pub fn transport_options(&self) -> crate::transport::TransportOptions {
        crate::transport::TransportOptions {
            dt: self.dt,
            checkpoint_stride: self.checkpoint_stride,
            frame: self.frame,
        }
    }
}

fn pulse_from_map(map: &ConfigMap, prefix: &str, default_center: f64) -> Result<Pulse> {
    Ok(Pulse::new(
        map.require(&format!("{prefix}.omega0"))?,
        map.get_or(&format!("{prefix}.center"), default_center)?,
        map.require(&format!("{prefix}.width"))?,
    ))
}

fn model_from_map(map: &ConfigMap) -> Result<ModelParams> {
    let xi: f64 = map.require("xi")?;
    let omega: f64 = map.require("omega")?;
    let a: f64 = map.require("sweep_rate_A")?;
    let mut model = ModelParams::new(xi, omega, a, Envelope::Zero);
    model.validate()?;
    let ct = crossing_times(&model);
    let variant: String = map.require("envelope.variant")?;
    model.envelope = match variant.as_str() {
        "zero" => Envelope::Zero,
        "constant" => Envelope::Constant {
            omega0: map.require("envelope.omega0")?,
        },
        "gaussian" => Envelope::Gaussian(pulse_from_map(map, "envelope", ct.t_a)?),
        "twin_gaussian" => Envelope::TwinGaussian {
            a: pulse_from_map(map, "envelope.a", ct.t_a)?,
            b: pulse_from_map(map, "envelope.b", ct.t_b)?,
        },
        other => {
            return Err(Error::Config(format!(
                "envelope.variant must be zero|constant|gaussian|twin_gaussian, got '{other}'"
            )))
        }
    };
    if let Some(d) = map.get::<String>("dim")? {
        model.dim_mode = parse_dim(&d)?;
    }
    Ok(model)
}

/// Window used when `t0`/`t1` are not given.
///
/// * no pulse: `[0, 2 t_a]`;
/// * one pulse at `c` with width `T`: `c -/+ max(c, 2.63 T)`, which is
///   `[0, 2 t_a]` for a pulse at `t_a` unless the pulse is too wide for its
///   tails to vanish there;
/// * twin pulses: from `min(0, c_b - 2.63 T_b, c_a - 2.63 T_a)` to
///   `max(c_a + 6 T_a, c_b + 2.63 T_b)`.
pub fn default_window(model: &ModelParams) -> (f64, f64) {
    let ct = crossing_times(model);
    match model.envelope {
        Envelope::Zero | Envelope::Constant { .. } => (0.0, 2.0 * ct.t_a),
        Envelope::Gaussian(p) => {
            let half = p.center.max(TAIL_WIDTHS * p.width);
            (p.center - half, p.center + half)
        }
        Envelope::TwinGaussian { a, b } => {
            let t0 = 0f64
                .min(b.center - TAIL_WIDTHS * b.width)
                .min(a.center - TAIL_WIDTHS * a.width);
            let t1 = (a.center + TWIN_TRAILING_WIDTHS * a.width).max(b.center + TAIL_WIDTHS * b.width);
            (t0, t1)
        }
    }
}

/// Evenly spaced axis `min, ..., max` with `n >= 2` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("sweep axes need n >= 2, got {n}")));
        }
        if !(min > 0.0 && max > min && max.is_finite()) {
            return Err(Error::Config(format!(
                "sweep range must satisfy 0 < min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max, n })
    }

    pub fn value(&self, i: usize) -> f64 {
        let f = i as f64 / (self.n - 1) as f64;
        self.min * (1.0 - f) + self.max * f
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

/// `(Omega0, A)` grid over a template scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub omega0: AxisRange,
    pub sweep_rate: AxisRange,
    /// The parsed file; every grid point overrides `envelope.omega0` and
    /// `sweep_rate_A` on a copy and resolves it as a scenario.
    pub template: ConfigMap,
    pub workers: usize,
    /// `|product_arg - pi|` allowed for a point to be flagged adiabatic.
    pub arg_tol: f64,
}

impl SweepConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let variant: String = map.require("envelope.variant")?;
        if variant != "gaussian" {
            return Err(Error::Config("sweeps need envelope.variant = gaussian".into()));
        }
        let mut template = map.clone();
        // axis values replace these; a placeholder lets the template resolve
        for key in ["envelope.omega0", "sweep_rate_A"] {
            if !template.contains(key) {
                template.set(key, 1.0)?;
            }
        }
        let cfg = Self {
            omega0: AxisRange::new(
                map.get_or("sweep.omega0_min", 0.2)?,
                map.get_or("sweep.omega0_max", 2.5)?,
                map.get_or("sweep.omega0_n", 40)?,
            )?,
            sweep_rate: AxisRange::new(
                map.get_or("sweep.A_min", 0.02)?,
                map.get_or("sweep.A_max", 0.3)?,
                map.get_or("sweep.A_n", 40)?,
            )?,
            template,
            workers: map.get_or("workers", default_workers())?,
            arg_tol: map.get_or("sweep.arg_tol", 0.1)?,
        };
        if cfg.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if !(cfg.arg_tol > 0.0) {
            return Err(Error::Config("sweep.arg_tol must be > 0".into()));
        }
        // resolve the corners up front so a bad template fails before the run
        for (o, a) in [
            (cfg.omega0.min, cfg.sweep_rate.min),
            (cfg.omega0.max, cfg.sweep_rate.max),
            (cfg.omega0.min, cfg.sweep_rate.max),
            (cfg.omega0.max, cfg.sweep_rate.min),
        ] {
            cfg.point(o, a)?;
        }
        Ok(cfg)
    }

    /// Scenario at one grid point.
    pub fn point(&self, omega0: f64, sweep_rate: f64) -> Result<ScenarioConfig> {
        let mut m = self.template.clone();
        m.set("envelope.omega0", omega0)?;
        m.set("sweep_rate_A", sweep_rate)?;
        ScenarioConfig::from_map(&m)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `eigen.xi_list`, empty when absent.
pub fn xi_list(map: &ConfigMap) -> Result<Vec<f64>> {
    match map.get::<String>("eigen.xi_list")? {
        None => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(|v| {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad xi in eigen.xi_list: '{v}'")))?;
                if x > 0.0 && x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::Config(format!("eigen.xi_list entries must be > 0, got {x}")))
                }
            })
            .collect(),
    }
}
