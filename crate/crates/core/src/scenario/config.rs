//! Scenario definition and its flat `key = value` file format.
//!
//! Grammar (one entry per line, UTF-8, `\n` or `\r\n` line endings):
//!
//! ```text
//! line    := blank | comment | entry
//! comment := optional spaces, '#', anything
//! entry   := key spaces? '=' spaces? value spaces? comment?
//! key     := [A-Za-z0-9_]+ ('.' [A-Za-z0-9_]+)*
//! value   := number | bool | word | pairs
//! pairs   := '' | pair (',' pair)*        pair := number ':' number
//! ```
//!
//! `schema_version = 1` is mandatory. Keys not present in a file keep the
//! values of the default scenario; a key may appear only once.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::ifoc_controller::{FluxCommand, RegulationMode};
use crate::integrator::IntegratorConfig;
use crate::motor_model::MotorParams;
use crate::mras_adaptation::AdaptationGains;

pub const SCHEMA_VERSION: u32 = 1;

/// Speed regulator settings shared by every scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedLoopConfig {
    pub kp: f64,
    pub ki: f64,
    pub iqs_max: f64,
}

impl Default for SpeedLoopConfig {
    fn default() -> Self {
        Self {
            kp: 10.0,
            ki: 60.0,
            iqs_max: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    /// Machine constants. `motor.rr` is ignored; the plant uses `true_rr`.
    pub motor: MotorParams<f64>,
    /// Rotor resistance of the simulated machine, ohm.
    pub true_rr: f64,
    /// Rotor resistance assumed by the controller and observer at start, ohm.
    pub cmd_rr: f64,
    pub adaptation_enabled: bool,
    pub gains: AdaptationGains<f64>,
    pub speed: SpeedLoopConfig,
    /// Rated rotor flux, V s. The flux current command is `rated_flux / Lm`.
    pub rated_flux: f64,
    /// Magnetizing ramp duration, s.
    pub flux_ramp: f64,
    /// `(time s, mechanical rpm)` steps.
    pub speed_profile: Vec<(f64, f64)>,
    /// `(time s, N m)` steps.
    pub load_profile: Vec<(f64, f64)>,
    pub duration: f64,
    pub integrator: IntegratorConfig<f64>,
    pub regulation: RegulationMode,
    /// Hysteresis comparator half band, A.
    pub hysteresis_band: f64,
    /// Keep every n-th integration step in the time series.
    pub decimation: usize,
    pub output: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let motor = MotorParams::<f64>::default();
        Self {
            name: "tuned".to_string(),
            motor,
            true_rr: motor.rr,
            cmd_rr: motor.rr,
            adaptation_enabled: false,
            gains: AdaptationGains::default(),
            speed: SpeedLoopConfig::default(),
            rated_flux: 0.5,
            flux_ramp: 0.1,
            speed_profile: vec![(0.1, 250.0)],
            // 20 % of the 100 N m rating assumed for the default machine.
            load_profile: vec![(1.0, 20.0)],
            duration: 4.0,
            integrator: IntegratorConfig::default(),
            regulation: RegulationMode::Ideal,
            hysteresis_band: 0.5,
            decimation: 20,
            output: None,
        }
    }
}

/// Value of a step profile at time `t` (zero before the first step).
pub fn profile_at(profile: &[(f64, f64)], t: f64) -> f64 {
    profile
        .iter()
        .take_while(|(ts, _)| *ts <= t)
        .last()
        .map_or(0.0, |(_, v)| *v)
}

impl ScenarioConfig {
    /// Machine constants of the simulated plant.
    pub fn plant(&self) -> MotorParams<f64> {
        self.motor.with_rotor_resistance(self.true_rr)
    }

    pub fn flux_command(&self) -> FluxCommand<f64> {
        FluxCommand {
            ids_rated: self.rated_flux / self.motor.lm(),
            ramp_time: self.flux_ramp,
        }
    }

    /// Number of integration steps per adaptation period.
    pub fn adaptation_stride(&self) -> Result<u64> {
        let ratio = self.gains.period / self.integrator.h;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 * n {
            return Err(Error::Config(format!(
                "gains.T ({}) must be a positive integer multiple of integrator.h ({})",
                self.gains.period, self.integrator.h
            )));
        }
        Ok(n as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let plant = self.plant();
        plant.validate()?;
        self.gains.validate()?;
        self.integrator.validate(&plant)?;
        self.adaptation_stride()?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.true_rr.is_finite() && self.true_rr > 0.0) {
            return Err(Error::Config(format!("true_rr must be > 0, got {}", self.true_rr)));
        }
        if !(self.cmd_rr >= self.gains.rr_min && self.cmd_rr <= self.gains.rr_max) {
            return Err(Error::Config(format!(
                "cmd_rr ({}) must lie within [gains.rr_min, gains.rr_max] = [{}, {}]",
                self.cmd_rr, self.gains.rr_min, self.gains.rr_max
            )));
        }
        if !(self.rated_flux.is_finite() && self.rated_flux > 0.0) {
            return Err(Error::Config(format!(
                "flux.rated must be > 0, got {}",
                self.rated_flux
            )));
        }
        if !(self.flux_ramp.is_finite() && self.flux_ramp >= 0.0) {
            return Err(Error::Config(format!(
                "flux.ramp_time must be >= 0, got {}",
                self.flux_ramp
            )));
        }
        if !(self.speed.iqs_max > 0.0 && self.speed.kp >= 0.0 && self.speed.ki >= 0.0) {
            return Err(Error::Config("speed gains must be >= 0 and speed.iqs_max > 0".into()));
        }
        if self.decimation == 0 {
            return Err(Error::Config("output.decimation must be >= 1".into()));
        }
        if !(self.hysteresis_band.is_finite() && self.hysteresis_band >= 0.0) {
            return Err(Error::Config(format!(
                "regulation.band must be >= 0, got {}",
                self.hysteresis_band
            )));
        }
        for (name, profile) in [
            ("speed_profile", &self.speed_profile),
            ("load_profile", &self.load_profile),
        ] {
            if profile.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                return Err(Error::Config(format!("{name} entries must be finite")));
            }
            if profile.windows(2).any(|w| w[1].0 < w[0].0) {
                return Err(Error::Config(format!("{name} must be sorted by time")));
            }
        }
        Ok(())
    }

    /// Sets one field from its dotted config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "schema_version" => {
                let version: u32 = parse_num(key, v)?;
                if version != SCHEMA_VERSION {
                    return Err(Error::Config(format!("unsupported schema_version {version}")));
                }
            }
            "name" => self.name = v.to_string(),
            "true_rr" => self.true_rr = parse_num(key, v)?,
            "cmd_rr" => self.cmd_rr = parse_num(key, v)?,
            "adaptation" => self.adaptation_enabled = parse_bool(key, v)?,
            "duration" => self.duration = parse_num(key, v)?,
            "speed_profile" => self.speed_profile = parse_pairs(key, v)?,
            "load_profile" => self.load_profile = parse_pairs(key, v)?,
            "motor.rs" => self.motor.rs = parse_num(key, v)?,
            "motor.xls" => self.motor.xls = parse_num(key, v)?,
            "motor.xlr" => self.motor.xlr = parse_num(key, v)?,
            "motor.xm" => self.motor.xm = parse_num(key, v)?,
            "motor.poles" => self.motor.poles = parse_num(key, v)?,
            "motor.inertia" => self.motor.inertia = parse_num(key, v)?,
            "motor.omega_b" => self.motor.omega_b = parse_num(key, v)?,
            "motor.vdc" => self.motor.vdc = parse_num(key, v)?,
            "gains.kp" | "gains.Kp" => self.gains.kp = parse_num(key, v)?,
            "gains.ki" | "gains.Ki" => self.gains.ki = parse_num(key, v)?,
            "gains.T" => self.gains.period = parse_num(key, v)?,
            "gains.rr_min" => self.gains.rr_min = parse_num(key, v)?,
            "gains.rr_max" => self.gains.rr_max = parse_num(key, v)?,
            "gains.form" => self.gains.form = v.parse()?,
            "gains.iqs_deadband" => self.gains.iqs_deadband = parse_num(key, v)?,
            "gains.flux_gate" => self.gains.flux_gate = parse_num(key, v)?,
            "speed.kp" => self.speed.kp = parse_num(key, v)?,
            "speed.ki" => self.speed.ki = parse_num(key, v)?,
            "speed.iqs_max" => self.speed.iqs_max = parse_num(key, v)?,
            "flux.rated" => self.rated_flux = parse_num(key, v)?,
            "flux.ramp_time" => self.flux_ramp = parse_num(key, v)?,
            "integrator.h" => self.integrator.h = parse_num(key, v)?,
            "integrator.method" => self.integrator.method = v.parse()?,
            "regulation.mode" => self.regulation = v.parse()?,
            "regulation.band" => self.hysteresis_band = parse_num(key, v)?,
            "output.decimation" => self.decimation = parse_num(key, v)?,
            "output.path" => self.output = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses a config file body on top of the default scenario.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            if !valid_key(key) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("malformed key `{key}`"),
                });
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::UnknownKey(k) => Error::Parse {
                    line: line_no,
                    msg: format!("unknown key `{k}`"),
                },
                Error::Config(msg) => Error::Parse { line: line_no, msg },
                other => other,
            })?;
        }
        if !seen.contains("schema_version") {
            return Err(Error::Parse {
                line: 0,
                msg: "missing schema_version".into(),
            });
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Renders every key, in a form [`ScenarioConfig::parse`] reads back exactly.
    pub fn to_config_string(&self) -> String {
        let m = &self.motor;
        let g = &self.gains;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("schema_version", SCHEMA_VERSION.to_string());
        put("name", self.name.clone());
        put("true_rr", num(self.true_rr));
        put("cmd_rr", num(self.cmd_rr));
        put("adaptation", self.adaptation_enabled.to_string());
        put("duration", num(self.duration));
        put("speed_profile", pairs(&self.speed_profile));
        put("load_profile", pairs(&self.load_profile));
        put("motor.rs", num(m.rs));
        put("motor.xls", num(m.xls));
        put("motor.xlr", num(m.xlr));
        put("motor.xm", num(m.xm));
        put("motor.poles", m.poles.to_string());
        put("motor.inertia", num(m.inertia));
        put("motor.omega_b", num(m.omega_b));
        put("motor.vdc", num(m.vdc));
        put("gains.kp", num(g.kp));
        put("gains.ki", num(g.ki));
        put("gains.T", num(g.period));
        put("gains.rr_min", num(g.rr_min));
        put("gains.rr_max", num(g.rr_max));
        put("gains.form", g.form.to_string());
        put("gains.iqs_deadband", num(g.iqs_deadband));
        put("gains.flux_gate", num(g.flux_gate));
        put("speed.kp", num(self.speed.kp));
        put("speed.ki", num(self.speed.ki));
        put("speed.iqs_max", num(self.speed.iqs_max));
        put("flux.rated", num(self.rated_flux));
        put("flux.ramp_time", num(self.flux_ramp));
        put("integrator.h", num(self.integrator.h));
        put("integrator.method", self.integrator.method.to_string());
        put("regulation.mode", self.regulation.to_string());
        put("regulation.band", num(self.hysteresis_band));
        put("output.decimation", self.decimation.to_string());
        if let Some(p) = &self.output {
            put("output.path", p.display().to_string());
        }
        out
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .split('.')
            .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

// Shortest representation that parses back to the same f64.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn pairs(p: &[(f64, f64)]) -> String {
    p.iter()
        .map(|(a, b)| format!("{}:{}", num(*a), num(*b)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_num<N: std::str::FromStr>(key: &str, v: &str) -> Result<N> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}` as a number")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn parse_pairs(key: &str, v: &str) -> Result<Vec<(f64, f64)>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("`{key}`: expected `time:value`, got `{}`", item.trim())))?;
            Ok((parse_num(key, a.trim())?, parse_num(key, b.trim())?))
        })
        .collect()
}
