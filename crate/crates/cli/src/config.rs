//! Run configuration: a flat `section.key = value` text format.
//!
//! ```text
//! # cold-gas operating point with a drive sweep
//! params.gamma_o = 1000.0
//! params.omega_rabi = 4.5e8+0.0i
//! sweep.parameter = rabi_sq
//! sweep.scale = log
//! sweep.start = 2e16
//! sweep.stop = 2e18
//! sweep.n_points = 41
//! ```
//!
//! Every key is optional; parameters default to [`SystemParams::reference`]
//! and the thermal settings to [`ThermalConfig::default`]. A `sweep` or
//! `montecarlo` section exists as soon as one of its keys appears. Unknown
//! keys, repeated keys and malformed values are errors that name the line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eitforce::dynamics::{McSettings, SdeScheme};
use eitforce::{BeamGeometry, Complex64, SystemParams, ThermalConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Self { line, key: key.to_owned(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepScale {
    #[default]
    Linear,
    Log,
}

impl FromStr for SweepScale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(SweepScale::Linear),
            "log" => Ok(SweepScale::Log),
            other => Err(format!("unknown scale {other:?} (expected linear or log)")),
        }
    }
}

impl fmt::Display for SweepScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepScale::Linear => "linear",
            SweepScale::Log => "log",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// A [`SystemParams`] field, or `rabi_sq` / `input_power`. Complex
    /// fields are swept in magnitude with their phase kept.
    pub parameter: String,
    pub scale: SweepScale,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl SweepConfig {
    /// Grid values: arithmetic for linear sweeps, geometric for log sweeps,
    /// with both end points exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let u = i as f64 / (n - 1) as f64;
                match self.scale {
                    SweepScale::Linear => self.start + (self.stop - self.start) * u,
                    SweepScale::Log => self.start * (self.stop / self.start).powf(u),
                }
            })
            .collect()
    }
}

/// Monte-Carlo section. Unset step, horizon and warm-up follow
/// [`McSettings::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: SdeScheme,
    pub n_freq: usize,
    /// Top of the frequency grid, rad/s; defaults to ζ.
    pub omega_max: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub warmup: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_traj: 10_000,
            seed: 2024,
            scheme: SdeScheme::Exact,
            n_freq: 16,
            omega_max: None,
            dt: None,
            t_end: None,
            warmup: None,
        }
    }
}

impl McConfig {
    pub fn settings(&self, p: &SystemParams) -> McSettings {
        let omega_max = self.omega_max.unwrap_or(p.zeta);
        let mut s = McSettings::new(p, omega_max, self.n_freq, self.n_traj, self.seed);
        s.scheme = self.scheme;
        if let Some(w) = self.warmup {
            s.warmup = w;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        s.t_end = self.t_end.unwrap_or(s.warmup + McSettings::RECORD_STEPS as f64 * s.dt);
        let record = s.t_end - s.warmup;
        if record > 0.0 {
            s.omega_grid = eitforce::dynamics::bin_aligned_grid(record, omega_max, self.n_freq);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub format: Format,
    /// Destination file; standard output when unset.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub thermal: ThermalConfig,
    pub sweep: Option<SweepConfig>,
    pub montecarlo: Option<McConfig>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::reference(),
            thermal: ThermalConfig::default(),
            sweep: None,
            montecarlo: None,
            output: OutputConfig::default(),
        }
    }
}

/// Value of a parameter field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Count(u64),
    Real(f64),
    Complex(Complex64),
}

/// Names accepted under `params.`, in serialization order.
pub const PARAM_FIELDS: [&str; 17] = [
    "n_atoms",
    "g",
    "omega_rabi",
    "gamma",
    "gamma_o",
    "zeta",
    "k_wavevector",
    "mass",
    "t_m",
    "a_in",
    "force",
    "omega_ab",
    "omega_ac",
    "temperature",
    "density",
    "c_light",
    "k_boltzmann",
];

/// Derived quantities that can be swept besides the fields.
pub const DERIVED_SWEEPS: [&str; 2] = ["rabi_sq", "input_power"];

pub fn param_value(p: &SystemParams, name: &str) -> Option<ParamValue> {
    use ParamValue::*;
    let mut q = *p;
    Some(match name {
        "n_atoms" => Count(p.n_atoms),
        "g" => Complex(p.g),
        "omega_rabi" => Complex(p.omega_rabi),
        "a_in" => Complex(p.a_in),
        _ => Real(*real_field(&mut q, name)?),
    })
}

fn real_field<'a>(p: &'a mut SystemParams, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "gamma" => &mut p.gamma,
        "gamma_o" => &mut p.gamma_o,
        "zeta" => &mut p.zeta,
        "k_wavevector" => &mut p.k_wavevector,
        "mass" => &mut p.mass,
        "t_m" => &mut p.t_m,
        "force" => &mut p.force,
        "omega_ab" => &mut p.omega_ab,
        "omega_ac" => &mut p.omega_ac,
        "temperature" => &mut p.temperature,
        "density" => &mut p.density,
        "c_light" => &mut p.c_light,
        "k_boltzmann" => &mut p.k_boltzmann,
        _ => return None,
    })
}

fn complex_field<'a>(p: &'a mut SystemParams, name: &str) -> Option<&'a mut Complex64> {
    Some(match name {
        "g" => &mut p.g,
        "omega_rabi" => &mut p.omega_rabi,
        "a_in" => &mut p.a_in,
        _ => return None,
    })
}

/// Whether `name` can be swept.
pub fn is_sweepable(name: &str) -> bool {
    PARAM_FIELDS.contains(&name) || DERIVED_SWEEPS.contains(&name)
}

/// Copy of `p` with the swept quantity set to `value`. Complex fields take
/// `value` as their magnitude; `rabi_sq` and `input_power` set |Ω|^2 and
/// |ā_in|^2.
pub fn apply_sweep(p: &SystemParams, name: &str, value: f64) -> Result<SystemParams, String> {
    let mut q = *p;
    let rescale = |z: Complex64, magnitude: f64| {
        let phase = if z.norm() > 0.0 { z.arg() } else { 0.0 };
        Complex64::from_polar(magnitude, phase)
    };
    match name {
        "n_atoms" => {
            if !(value >= 1.0) || value > u64::MAX as f64 {
                return Err(format!("n_atoms = {value} is not a positive count"));
            }
            q.n_atoms = value.round() as u64;
        }
        "rabi_sq" => q = q.with_rabi_sq(value),
        "input_power" => q.a_in = rescale(q.a_in, value.sqrt()),
        _ => {
            if let Some(z) = complex_field(&mut q, name) {
                *z = rescale(*z, value);
            } else if let Some(x) = real_field(&mut q, name) {
                *x = value;
            } else {
                return Err(format!("unknown sweep parameter {name:?}"));
            }
        }
    }
    Ok(q)
}

fn format_real(x: f64) -> String {
    format!("{x:?}")
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{sign}{:?}i", z.re, z.im.abs())
}

fn parse_real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::new(Some(line), key, format!("expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(ConfigError::new(Some(line), key, "must be finite"));
    }
    Ok(x)
}

fn parse_count<N: FromStr>(line: usize, key: &str, v: &str) -> Result<N, ConfigError> {
    v.parse().map_err(|_| ConfigError::new(Some(line), key, format!("expected a non-negative integer, got {v:?}")))
}

fn parse_complex(line: usize, key: &str, v: &str) -> Result<Complex64, ConfigError> {
    let z = Complex64::from_str(v).map_err(|_| {
        ConfigError::new(Some(line), key, format!("expected a complex number like 1e6+2e3i, got {v:?}"))
    })?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(ConfigError::new(Some(line), key, "must be finite"));
    }
    Ok(z)
}

fn parse_enum<E: FromStr<Err = String>>(line: usize, key: &str, v: &str) -> Result<E, ConfigError> {
    v.parse().map_err(|e| ConfigError::new(Some(line), key, e))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(None, &path.display().to_string(), format!("cannot read: {e}")))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut sweep: Option<(usize, PartialSweep)> = None;
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(line), content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(ConfigError::new(Some(line), key, "given more than once"));
            }
            let (section, name) = key.split_once('.').unwrap_or(("", key));
            match section {
                "params" => set_param(&mut cfg.params, line, key, name, value)?,
                "thermal" => match name {
                    "quadrature_order" => cfg.thermal.quadrature_order = parse_count(line, key, value)?,
                    "condition_margin" => cfg.thermal.condition_margin = parse_real(line, key, value)?,
                    "geometry" => {
                        cfg.thermal.geometry = value
                            .parse::<BeamGeometry>()
                            .map_err(|e| ConfigError::new(Some(line), key, e.to_string()))?
                    }
                    _ => return Err(ConfigError::new(Some(line), key, "unknown key")),
                },
                "sweep" => {
                    let (_, s) = sweep.get_or_insert((line, PartialSweep::default()));
                    match name {
                        "parameter" => s.parameter = Some(value.to_owned()),
                        "scale" => s.scale = parse_enum(line, key, value)?,
                        "start" => s.start = Some(parse_real(line, key, value)?),
                        "stop" => s.stop = Some(parse_real(line, key, value)?),
                        "n_points" => s.n_points = Some(parse_count(line, key, value)?),
                        _ => return Err(ConfigError::new(Some(line), key, "unknown key")),
                    }
                }
                "montecarlo" => {
                    let mc = cfg.montecarlo.get_or_insert_with(McConfig::default);
                    match name {
                        "n_traj" => mc.n_traj = parse_count(line, key, value)?,
                        "seed" => mc.seed = parse_count(line, key, value)?,
                        "scheme" => mc.scheme = parse_enum(line, key, value)?,
                        "n_freq" => mc.n_freq = parse_count(line, key, value)?,
                        "omega_max" => mc.omega_max = Some(parse_real(line, key, value)?),
                        "dt" => mc.dt = Some(parse_real(line, key, value)?),
                        "t_end" => mc.t_end = Some(parse_real(line, key, value)?),
                        "warmup" => mc.warmup = Some(parse_real(line, key, value)?),
                        _ => return Err(ConfigError::new(Some(line), key, "unknown key")),
                    }
                }
                "output" => match name {
                    "format" => cfg.output.format = parse_enum(line, key, value)?,
                    "path" => cfg.output.path = Some(PathBuf::from(value)),
                    _ => return Err(ConfigError::new(Some(line), key, "unknown key")),
                },
                _ => return Err(ConfigError::new(Some(line), key, "unknown key")),
            }
        }
        if let Some((line, s)) = sweep {
            cfg.sweep = Some(s.finish(line)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Err(e) = self.params.validate() {
            let field = match &e {
                eitforce::Error::InvalidParameter { field, .. } => format!("params.{field}"),
                _ => "params".into(),
            };
            return Err(ConfigError::new(None, &field, e.to_string()));
        }
        self.thermal.validate().map_err(|e| ConfigError::new(None, "thermal", e.to_string()))?;
        if let Some(s) = &self.sweep {
            if !is_sweepable(&s.parameter) {
                return Err(ConfigError::new(
                    None,
                    "sweep.parameter",
                    format!("{:?} is not a parameter field, rabi_sq or input_power", s.parameter),
                ));
            }
            if s.n_points < 2 {
                return Err(ConfigError::new(None, "sweep.n_points", "must be at least 2"));
            }
            if !(s.start < s.stop) {
                return Err(ConfigError::new(None, "sweep.start", "must be below sweep.stop"));
            }
            if s.scale == SweepScale::Log && !(s.start > 0.0) {
                return Err(ConfigError::new(None, "sweep.start", "must be positive for a log sweep"));
            }
        }
        if let Some(mc) = &self.montecarlo {
            if mc.n_freq == 0 {
                return Err(ConfigError::new(None, "montecarlo.n_freq", "must be at least 1"));
            }
            for (key, v) in [("montecarlo.omega_max", mc.omega_max), ("montecarlo.dt", mc.dt)] {
                if matches!(v, Some(x) if !(x > 0.0)) {
                    return Err(ConfigError::new(None, key, "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; [`RunConfig::parse`] reads it back to an equal
    /// value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        for name in PARAM_FIELDS {
            let v = match param_value(&self.params, name).expect("listed field") {
                ParamValue::Count(n) => n.to_string(),
                ParamValue::Real(x) => format_real(x),
                ParamValue::Complex(z) => format_complex(z),
            };
            put(&format!("params.{name}"), v);
        }
        put("thermal.quadrature_order", self.thermal.quadrature_order.to_string());
        put("thermal.condition_margin", format_real(self.thermal.condition_margin));
        put("thermal.geometry", self.thermal.geometry.name().to_owned());
        if let Some(s) = &self.sweep {
            put("sweep.parameter", s.parameter.clone());
            put("sweep.scale", s.scale.to_string());
            put("sweep.start", format_real(s.start));
            put("sweep.stop", format_real(s.stop));
            put("sweep.n_points", s.n_points.to_string());
        }
        if let Some(mc) = &self.montecarlo {
            put("montecarlo.n_traj", mc.n_traj.to_string());
            put("montecarlo.seed", mc.seed.to_string());
            put("montecarlo.scheme", mc.scheme.name().to_owned());
            put("montecarlo.n_freq", mc.n_freq.to_string());
            for (k, v) in [
                ("montecarlo.omega_max", mc.omega_max),
                ("montecarlo.dt", mc.dt),
                ("montecarlo.t_end", mc.t_end),
                ("montecarlo.warmup", mc.warmup),
            ] {
                if let Some(x) = v {
                    put(k, format_real(x));
                }
            }
        }
        put("output.format", self.output.format.to_string());
        if let Some(path) = &self.output.path {
            put("output.path", path.display().to_string());
        }
        out
    }
}

fn set_param(p: &mut SystemParams, line: usize, key: &str, name: &str, value: &str) -> Result<(), ConfigError> {
    if name == "n_atoms" {
        p.n_atoms = parse_count(line, key, value)?;
    } else if let Some(z) = complex_field(p, name) {
        *z = parse_complex(line, key, value)?;
    } else if let Some(x) = real_field(p, name) {
        *x = parse_real(line, key, value)?;
    } else {
        return Err(ConfigError::new(Some(line), key, "unknown key"));
    }
    Ok(())
}

#[derive(Default)]
struct PartialSweep {
    parameter: Option<String>,
    scale: SweepScale,
    start: Option<f64>,
    stop: Option<f64>,
    n_points: Option<usize>,
}

impl PartialSweep {
    fn finish(self, line: usize) -> Result<SweepConfig, ConfigError> {
        let missing = |k: &str| ConfigError::new(Some(line), k, "required once the sweep section is present");
        Ok(SweepConfig {
            parameter: self.parameter.ok_or_else(|| missing("sweep.parameter"))?,
            scale: self.scale,
            start: self.start.ok_or_else(|| missing("sweep.start"))?,
            stop: self.stop.ok_or_else(|| missing("sweep.stop"))?,
            n_points: self.n_points.ok_or_else(|| missing("sweep.n_points"))?,
        })
    }
}
