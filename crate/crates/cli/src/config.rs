//! Run configuration: JSON file plus command-line overrides.
//!
//! Exact mode only accepts rational parameter values (`[num, den]` pairs or
//! `"num/den"` strings); plain floating-point numbers and the `degrees` form
//! of the preparation angle force float mode.

use serde::Deserialize;

use focksim::detection::{CascadeSpec, YModePolicy};
use focksim::experiment::ExperimentConfig;
use focksim::scalar::Scalar;

/// A numeric parameter as parsed, before committing to a coefficient ring.
#[derive(Clone, Copy, Debug)]
pub enum Value {
    Ratio(i64, i64),
    Float(f64),
}

impl Value {
    pub fn parse(key: &str, s: &str) -> Result<Value, String> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| format!("`{key}`: bad numerator in `{s}`"))?;
            let den: i64 = den
                .trim()
                .parse()
                .map_err(|_| format!("`{key}`: bad denominator in `{s}`"))?;
            if den == 0 {
                return Err(format!("`{key}`: zero denominator"));
            }
            return Ok(Value::Ratio(num, den));
        }
        if let Ok(int) = s.parse::<i64>() {
            return Ok(Value::Ratio(int, 1));
        }
        s.parse::<f64>()
            .map(Value::Float)
            .map_err(|_| format!("`{key}`: `{s}` is neither a rational nor a number"))
    }

    pub fn to_scalar<S: Scalar>(self, key: &str) -> Result<S, String> {
        match self {
            Value::Ratio(n, d) => Ok(S::from_ratio(n, d)),
            Value::Float(x) => S::from_f64(x)
                .ok_or_else(|| format!("`{key}`: exact mode needs a rational value, got {x}")),
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, Value::Float(_))
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ThetaSetting {
    /// Exact (cos, sin) pair.
    Pair(Value, Value),
    /// Angle in degrees; float mode only.
    Degrees(f64),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Exact,
    Float,
}

/// Fully resolved run settings with defaults applied.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub p1: Value,
    pub p2: Value,
    pub theta: ThetaSetting,
    pub eta_u_sq: Value,
    pub eta_v_sq: Value,
    pub eta_c_sq: Value,
    pub cascade_n: usize,
    pub y_policy: YModePolicy,
    pub order: u32,
    pub mode: Mode,
}

impl Default for Resolved {
    fn default() -> Self {
        Resolved {
            p1: Value::Ratio(1, 100),
            p2: Value::Ratio(1, 100),
            theta: ThetaSetting::Pair(Value::Ratio(1, 1), Value::Ratio(0, 1)),
            eta_u_sq: Value::Ratio(1, 10),
            eta_v_sq: Value::Ratio(1, 10),
            eta_c_sq: Value::Ratio(1, 10),
            cascade_n: 1,
            y_policy: YModePolicy::TraceOut,
            order: 2,
            mode: Mode::Exact,
        }
    }
}

impl Resolved {
    pub fn to_experiment<S: Scalar>(&self) -> Result<ExperimentConfig<S>, String> {
        let (cos, sin): (S, S) = match self.theta {
            ThetaSetting::Pair(c, s) => (c.to_scalar("theta")?, s.to_scalar("theta")?),
            ThetaSetting::Degrees(deg) => {
                let rad = deg.to_radians();
                let c = S::from_f64(rad.cos())
                    .ok_or_else(|| "`theta`: degrees input requires float mode".to_string())?;
                let s = S::from_f64(rad.sin())
                    .ok_or_else(|| "`theta`: degrees input requires float mode".to_string())?;
                (c, s)
            }
        };
        let cascade = CascadeSpec::new(
            self.cascade_n,
            self.eta_c_sq.to_scalar("eta_c_sq")?,
            self.y_policy,
        )
        .map_err(|e| e.to_string())?;
        let config = ExperimentConfig {
            p1: self.p1.to_scalar("p1")?,
            p2: self.p2.to_scalar("p2")?,
            theta_cos: cos,
            theta_sin: sin,
            eta_u_sq: self.eta_u_sq.to_scalar("eta_u_sq")?,
            eta_v_sq: self.eta_v_sq.to_scalar("eta_v_sq")?,
            cascade,
            truncation_order: self.order,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

/// Raw JSON config file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub p1: Option<RawValue>,
    pub p2: Option<RawValue>,
    pub theta: Option<RawTheta>,
    pub eta_u_sq: Option<RawValue>,
    pub eta_v_sq: Option<RawValue>,
    pub eta_c_sq: Option<RawValue>,
    pub cascade_n: Option<usize>,
    pub y_policy: Option<String>,
    pub order: Option<u32>,
    pub mode: Option<String>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum RawValue {
    Pair([i64; 2]),
    Text(String),
    Number(f64),
}

impl RawValue {
    pub fn to_value(&self, key: &str) -> Result<Value, String> {
        match self {
            RawValue::Pair([n, d]) => {
                if *d == 0 {
                    Err(format!("`{key}`: zero denominator"))
                } else {
                    Ok(Value::Ratio(*n, *d))
                }
            }
            RawValue::Text(s) => Value::parse(key, s),
            RawValue::Number(x) => Ok(Value::Float(*x)),
        }
    }
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum RawTheta {
    Pair {
        cos_num: i64,
        cos_den: i64,
        sin_num: i64,
        sin_den: i64,
    },
    Degrees {
        degrees: f64,
    },
}

pub fn parse_y_policy(s: &str) -> Result<YModePolicy, String> {
    match s {
        "no-click" => Ok(YModePolicy::ConditionNoClick),
        "trace" => Ok(YModePolicy::TraceOut),
        other => Err(format!(
            "`y_policy`: expected \"no-click\" or \"trace\", got \"{other}\""
        )),
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "exact" => Ok(Mode::Exact),
        "float" => Ok(Mode::Float),
        other => Err(format!("`mode`: expected \"exact\" or \"float\", got \"{other}\"")),
    }
}

/// Merges file values and flag overrides into a resolved configuration.
pub struct Overrides {
    pub p1: Option<String>,
    pub p2: Option<String>,
    pub theta_cos: Option<String>,
    pub theta_sin: Option<String>,
    pub theta_degrees: Option<f64>,
    pub eta_u_sq: Option<String>,
    pub eta_v_sq: Option<String>,
    pub eta_c_sq: Option<String>,
    pub cascade_n: Option<usize>,
    pub y_policy: Option<String>,
    pub order: Option<u32>,
    pub mode: Option<String>,
}

pub fn resolve(file: Option<&RawConfig>, flags: &Overrides) -> Result<Resolved, String> {
    let mut out = Resolved::default();
    let mut mode_explicit = None;

    if let Some(raw) = file {
        if let Some(v) = &raw.p1 {
            out.p1 = v.to_value("p1")?;
        }
        if let Some(v) = &raw.p2 {
            out.p2 = v.to_value("p2")?;
        }
        if let Some(t) = &raw.theta {
            out.theta = match t {
                RawTheta::Pair {
                    cos_num,
                    cos_den,
                    sin_num,
                    sin_den,
                } => {
                    if *cos_den == 0 || *sin_den == 0 {
                        return Err("`theta`: zero denominator".into());
                    }
                    ThetaSetting::Pair(
                        Value::Ratio(*cos_num, *cos_den),
                        Value::Ratio(*sin_num, *sin_den),
                    )
                }
                RawTheta::Degrees { degrees } => ThetaSetting::Degrees(*degrees),
            };
        }
        if let Some(v) = &raw.eta_u_sq {
            out.eta_u_sq = v.to_value("eta_u_sq")?;
        }
        if let Some(v) = &raw.eta_v_sq {
            out.eta_v_sq = v.to_value("eta_v_sq")?;
        }
        if let Some(v) = &raw.eta_c_sq {
            out.eta_c_sq = v.to_value("eta_c_sq")?;
        }
        if let Some(n) = raw.cascade_n {
            out.cascade_n = n;
        }
        if let Some(p) = &raw.y_policy {
            out.y_policy = parse_y_policy(p)?;
        }
        if let Some(o) = raw.order {
            out.order = o;
        }
        if let Some(m) = &raw.mode {
            mode_explicit = Some(parse_mode(m)?);
        }
    }

    if let Some(s) = &flags.p1 {
        out.p1 = Value::parse("p1", s)?;
    }
    if let Some(s) = &flags.p2 {
        out.p2 = Value::parse("p2", s)?;
    }
    match (&flags.theta_cos, &flags.theta_sin, flags.theta_degrees) {
        (None, None, None) => {}
        (Some(c), Some(s), None) => {
            out.theta = ThetaSetting::Pair(Value::parse("theta_cos", c)?, Value::parse("theta_sin", s)?);
        }
        (None, None, Some(deg)) => {
            out.theta = ThetaSetting::Degrees(deg);
        }
        _ => {
            return Err(
                "`theta`: give both --theta-cos and --theta-sin, or --theta-degrees alone".into(),
            )
        }
    }
    if let Some(s) = &flags.eta_u_sq {
        out.eta_u_sq = Value::parse("eta_u_sq", s)?;
    }
    if let Some(s) = &flags.eta_v_sq {
        out.eta_v_sq = Value::parse("eta_v_sq", s)?;
    }
    if let Some(s) = &flags.eta_c_sq {
        out.eta_c_sq = Value::parse("eta_c_sq", s)?;
    }
    if let Some(n) = flags.cascade_n {
        out.cascade_n = n;
    }
    if let Some(p) = &flags.y_policy {
        out.y_policy = parse_y_policy(p)?;
    }
    if let Some(o) = flags.order {
        out.order = o;
    }
    if let Some(m) = &flags.mode {
        mode_explicit = Some(parse_mode(m)?);
    }

    let needs_float = matches!(out.theta, ThetaSetting::Degrees(_))
        || [out.p1, out.p2, out.eta_u_sq, out.eta_v_sq, out.eta_c_sq]
            .iter()
            .any(|v| v.is_float());
    out.mode = match mode_explicit {
        Some(Mode::Exact) if needs_float => {
            return Err(
                "`mode`: exact mode requires rational parameters (and a (cos, sin) angle)".into(),
            )
        }
        Some(m) => m,
        None if needs_float => Mode::Float,
        None => Mode::Exact,
    };
    Ok(out)
}
