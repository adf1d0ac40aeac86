//! Scenario specifications, the three benchmark presets and the line-oriented
//! config format.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::baselines::{ControllerKind, ControllerParams};
use crate::error::{Error, Result};
use crate::excitation::DEFAULT_MU;
use crate::plant::{plant_by_name, DisturbanceSpec, PlantModel};

/// Piecewise input `r(t)` of a reference model.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    /// `(start time, value)` pairs in increasing time order; zero before the first.
    Steps(Vec<(f64, f64)>),
    Sinusoid { amplitude: f64, frequency: f64 },
}

impl InputSignal {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            InputSignal::Steps(steps) => steps
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .map_or(0.0, |(_, v)| *v),
            InputSignal::Sinusoid { amplitude, frequency } => amplitude * (frequency * t).sin(),
        }
    }
}

impl fmt::Display for InputSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSignal::Steps(steps) => {
                let parts: Vec<String> = steps.iter().map(|(t, v)| format!("{t}@{v}")).collect();
                write!(f, "steps:{}", parts.join(","))
            }
            InputSignal::Sinusoid { amplitude, frequency } => write!(f, "sin:{amplitude}:{frequency}"),
        }
    }
}

impl FromStr for InputSignal {
    type Err = Error;

    /// `steps:<t>@<value>,...` or `sin:<amplitude>:<frequency>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("steps:") {
            let mut steps = Vec::new();
            for item in body.split(',') {
                let (t, v) = item
                    .split_once('@')
                    .ok_or_else(|| Error::invalid(format!("step '{item}' is not <time>@<value>")))?;
                steps.push((parse_f64(t)?, parse_f64(v)?));
            }
            if steps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::invalid("step times must increase"));
            }
            return Ok(InputSignal::Steps(steps));
        }
        if let Some(body) = s.strip_prefix("sin:") {
            let (a, w) = body
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("sinusoid '{s}' is not sin:<amplitude>:<frequency>")))?;
            return Ok(InputSignal::Sinusoid {
                amplitude: parse_f64(a)?,
                frequency: parse_f64(w)?,
            });
        }
        Err(Error::invalid(format!("unrecognized reference input '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    /// `y_r = amplitude sin(frequency t)` with analytic derivatives.
    Sinusoid { amplitude: f64, frequency: f64 },
    /// `y_r = gain / a(s) [r]`, `denominator` monic and highest power first.
    Model {
        gain: f64,
        denominator: Vec<f64>,
        input: InputSignal,
    },
}

impl ReferenceSpec {
    /// `[y_r, y_r', ..., y_r^(order)]` of a direct sinusoid.
    pub fn sinusoid_taps(amplitude: f64, frequency: f64, t: f64, order: usize) -> Vec<f64> {
        (0..=order)
            .map(|k| amplitude * frequency.powi(k as i32) * (frequency * t + k as f64 * FRAC_PI_2).sin())
            .collect()
    }
}

impl fmt::Display for ReferenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSpec::Sinusoid { amplitude, frequency } => write!(f, "sin:{amplitude}:{frequency}"),
            ReferenceSpec::Model { gain, denominator, .. } => write!(f, "model:{gain}:{}", join(denominator)),
        }
    }
}

/// Tail window, checkpoints and threshold used by the summary metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsConfig {
    /// Length of the final window for the tracking RMS (s).
    pub tail: f64,
    pub checkpoints: Vec<f64>,
    /// Level for the time-to-threshold metric on `||theta_err||`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub plant: String,
    pub controller: ControllerKind,
    pub kc: Vec<f64>,
    pub kd: Vec<f64>,
    /// Diagonal of `Gamma`.
    pub gamma: Vec<f64>,
    pub kappa: f64,
    pub tau_d: f64,
    pub sigma: f64,
    pub mu: f64,
    pub poles: Vec<f64>,
    pub dt: f64,
    pub ts: f64,
    pub duration: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub reference: ReferenceSpec,
    pub disturbance: DisturbanceSpec,
    pub x0: Vec<f64>,
    pub theta0: Vec<f64>,
    pub theta: Vec<f64>,
    /// `false` freezes `theta_hat` at `theta0` with zero derivatives.
    pub adaptation: bool,
    pub metrics: MetricsConfig,
}

/// The damping sweep of the second-order study, `0.01, 0.04, ..., 0.19`.
pub fn case3_kd_sweep() -> Vec<f64> {
    parse_range("0.01:0.03:0.19").expect("valid literal range")
}

/// Inclusive `start:step:end` range, tolerant to rounding at the end point.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid(format!("range '{s}' is not start:step:end")));
    }
    let (start, step, end) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
    if !(step > 0.0) || end < start {
        return Err(Error::invalid(format!("range '{s}' needs step > 0 and end >= start")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    // round to 12 decimals so 0.01 + 6 * 0.03 prints as 0.19
    Ok((0..=count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn builtin_case1() -> ScenarioSpec {
    ScenarioSpec {
        plant: "msd".into(),
        controller: ControllerKind::Clbc,
        kc: vec![1.0; 3],
        kd: vec![0.0; 3],
        gamma: vec![3.0; 3],
        kappa: 1.0,
        tau_d: 3.0,
        sigma: 1e-4,
        mu: DEFAULT_MU,
        poles: vec![5.0, 5.0],
        dt: 1e-3,
        ts: 1e-2,
        duration: 60.0,
        noise_std: 0.001,
        seed: 1,
        reference: ReferenceSpec::Sinusoid {
            amplitude: 1.5,
            frequency: 0.5,
        },
        disturbance: DisturbanceSpec::None,
        x0: vec![0.6, 0.0, 0.0],
        theta0: vec![0.0; 3],
        theta: vec![0.1, 0.5, 1.5],
        adaptation: true,
        metrics: MetricsConfig {
            tail: 10.0,
            checkpoints: vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            threshold: 0.1,
        },
    }
}

pub fn builtin_case2() -> ScenarioSpec {
    ScenarioSpec {
        duration: 120.0,
        reference: ReferenceSpec::Model {
            gain: 16.0,
            denominator: vec![1.0, 8.0, 24.0, 32.0, 16.0],
            input: InputSignal::Steps(vec![(0.0, -0.3), (60.0, -1.5), (100.0, 0.0)]),
        },
        x0: vec![0.0; 3],
        theta: vec![0.4, 0.5, 0.1],
        metrics: MetricsConfig {
            tail: 10.0,
            checkpoints: vec![50.0, 60.0, 100.0, 120.0],
            threshold: 0.1,
        },
        ..builtin_case1()
    }
}

/// Second-order study with damping gain `kd` on every virtual control.
pub fn builtin_case3(kd: f64) -> Result<ScenarioSpec> {
    if !(0.0..1.0).contains(&kd) {
        return Err(Error::invalid(format!("damping gain {kd} outside [0, 1)")));
    }
    Ok(ScenarioSpec {
        plant: "second_order".into(),
        controller: ControllerKind::Clbc,
        kc: vec![1.0; 2],
        kd: vec![kd; 2],
        gamma: vec![1.0],
        kappa: 1.0,
        tau_d: 1.0,
        sigma: 1e-4,
        mu: DEFAULT_MU,
        poles: vec![25.0],
        dt: 1e-3,
        ts: 1e-2,
        duration: 30.0,
        noise_std: 0.0,
        seed: 1,
        reference: ReferenceSpec::Model {
            gain: 1.0,
            denominator: vec![1.0, 3.0, 3.0, 1.0],
            input: InputSignal::Sinusoid {
                amplitude: 1.0,
                frequency: 2.0,
            },
        },
        disturbance: DisturbanceSpec::None,
        x0: vec![0.6, 0.0],
        theta0: vec![0.0],
        theta: vec![2.0],
        adaptation: true,
        metrics: MetricsConfig {
            tail: 5.0,
            checkpoints: vec![5.0, 10.0, 20.0, 30.0],
            threshold: 0.1,
        },
    })
}

pub fn builtin(name: &str) -> Result<ScenarioSpec> {
    match name {
        "case1" => Ok(builtin_case1()),
        "case2" => Ok(builtin_case2()),
        "case3" => builtin_case3(0.0),
        other => Err(Error::invalid(format!("unknown scenario '{other}'"))),
    }
}

impl ScenarioSpec {
    pub fn plant_model(&self) -> Result<PlantModel> {
        let base = plant_by_name(&self.plant)?;
        base.with_theta(DVector::from_vec(self.theta.clone()))
    }

    pub fn controller_params(&self) -> ControllerParams {
        ControllerParams {
            kc: self.kc.clone(),
            kd: self.kd.clone(),
            gamma: DVector::from_vec(self.gamma.clone()),
            kappa: self.kappa,
            poles: self.poles.clone(),
        }
    }

    /// Number of integration steps per sampling period.
    pub fn steps_per_sample(&self) -> usize {
        (self.ts / self.dt).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.plant_model()?;
        let (n, np) = (model.order(), model.n_params());
        if n < 2 {
            return Err(Error::invalid("closed-loop simulation needs plant order n >= 2"));
        }
        let lens: [(&str, usize, usize); 7] = [
            ("kc", self.kc.len(), n),
            ("kd", self.kd.len(), n),
            ("x0", self.x0.len(), n),
            ("poles", self.poles.len(), n - 1),
            ("gamma", self.gamma.len(), np),
            ("theta0", self.theta0.len(), np),
            ("theta", self.theta.len(), np),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::invalid(format!("{name} has {got} entries, plant needs {want}")));
            }
        }
        if !(self.dt > 0.0 && self.ts > self.dt && self.tau_d > self.ts) {
            return Err(Error::invalid(format!(
                "need tau_d > ts > dt > 0, got tau_d = {}, ts = {}, dt = {}",
                self.tau_d, self.ts, self.dt
            )));
        }
        let ratio = self.ts / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::invalid("ts must be an integer multiple of dt"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::invalid("duration must be positive"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::invalid("noise_std must be >= 0"));
        }
        if !(self.sigma > 0.0) || !(self.mu >= 0.0) {
            return Err(Error::invalid("need sigma > 0 and mu >= 0"));
        }
        if !(self.metrics.tail > 0.0) || !(self.metrics.threshold >= 0.0) {
            return Err(Error::invalid("metrics_tail must be positive and metrics_threshold >= 0"));
        }
        self.disturbance.validate(n)?;
        if let ReferenceSpec::Model { denominator, .. } = &self.reference {
            if denominator.len() < n + 1 {
                return Err(Error::invalid(format!(
                    "reference model degree {} is below the plant order {n}",
                    denominator.len().saturating_sub(1)
                )));
            }
        }
        Ok(())
    }

    /// Serializes to the `key = value` config format. Parsing the result
    /// reproduces `self` exactly.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("plant", self.plant.clone());
        put("controller", self.controller.to_string());
        put("kc", join(&self.kc));
        put("kd", join(&self.kd));
        put("gamma", join(&self.gamma));
        put("kappa", self.kappa.to_string());
        put("tau_d", self.tau_d.to_string());
        put("sigma", self.sigma.to_string());
        put("mu", self.mu.to_string());
        put("poles", join(&self.poles));
        put("dt", self.dt.to_string());
        put("ts", self.ts.to_string());
        put("duration", self.duration.to_string());
        put("noise_std", self.noise_std.to_string());
        put("seed", self.seed.to_string());
        put("reference", self.reference.to_string());
        if let ReferenceSpec::Model { input, .. } = &self.reference {
            put("reference_input", input.to_string());
        }
        put("disturbance", self.disturbance.to_string());
        put("x0", join(&self.x0));
        put("theta0", join(&self.theta0));
        put("theta", join(&self.theta));
        put("adaptation", self.adaptation.to_string());
        put("metrics_tail", self.metrics.tail.to_string());
        put("metrics_checkpoints", join(&self.metrics.checkpoints));
        put("metrics_threshold", self.metrics.threshold.to_string());
        out
    }

    /// Parses the config format. Blank lines and `#` comments are ignored.
    /// Optional keys: controller (clbc), kd (zeros), theta0 (zeros), mu,
    /// noise_std (0), seed (0), disturbance (none), adaptation (true) and the
    /// metrics keys.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut map: HashMap<String, (usize, String)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: "expected key = value".into(),
            })?;
            let key = k.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key '{key}'"),
                });
            }
            if map.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        let cfg = ConfigMap(map);

        let plant: String = cfg.required("plant", |s| Ok(s.to_string()))?;
        let model = plant_by_name(&plant).map_err(|e| cfg.error("plant", e))?;
        let (n, np) = (model.order(), model.n_params());
        let duration = cfg.required("duration", parse_f64)?;
        let reference = cfg.required("reference", |s| parse_reference(s, &cfg))?;
        let spec = ScenarioSpec {
            controller: cfg.optional("controller", |s| s.parse(), ControllerKind::Clbc)?,
            kc: cfg.required("kc", parse_list)?,
            kd: cfg.optional("kd", parse_list, vec![0.0; n])?,
            gamma: cfg.required("gamma", parse_list)?,
            kappa: cfg.required("kappa", parse_f64)?,
            tau_d: cfg.required("tau_d", parse_f64)?,
            sigma: cfg.required("sigma", parse_f64)?,
            mu: cfg.optional("mu", parse_f64, DEFAULT_MU)?,
            poles: cfg.required("poles", parse_list)?,
            dt: cfg.required("dt", parse_f64)?,
            ts: cfg.required("ts", parse_f64)?,
            duration,
            noise_std: cfg.optional("noise_std", parse_f64, 0.0)?,
            seed: cfg.optional("seed", |s| s.parse::<u64>().map_err(|e| Error::invalid(e.to_string())), 0)?,
            reference,
            disturbance: cfg.optional("disturbance", |s| s.parse(), DisturbanceSpec::None)?,
            x0: cfg.required("x0", parse_list)?,
            theta0: cfg.optional("theta0", parse_list, vec![0.0; np])?,
            theta: cfg.required("theta", parse_list)?,
            adaptation: cfg.optional(
                "adaptation",
                |s| s.parse::<bool>().map_err(|e| Error::invalid(e.to_string())),
                true,
            )?,
            metrics: MetricsConfig {
                tail: cfg.optional("metrics_tail", parse_f64, (duration / 6.0).min(10.0))?,
                checkpoints: cfg.optional("metrics_checkpoints", parse_list, vec![duration])?,
                threshold: cfg.optional("metrics_threshold", parse_f64, 0.1)?,
            },
            plant,
        };
        spec.validate()?;
        Ok(spec)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "plant",
    "controller",
    "kc",
    "kd",
    "gamma",
    "kappa",
    "tau_d",
    "sigma",
    "mu",
    "poles",
    "dt",
    "ts",
    "duration",
    "noise_std",
    "seed",
    "reference",
    "reference_input",
    "disturbance",
    "x0",
    "theta0",
    "theta",
    "adaptation",
    "metrics_tail",
    "metrics_checkpoints",
    "metrics_threshold",
];

struct ConfigMap(HashMap<String, (usize, String)>);

impl ConfigMap {
    fn error(&self, key: &str, e: Error) -> Error {
        let line = self.0.get(key).map_or(0, |(l, _)| *l);
        let message = match e {
            Error::InvalidParameter(m) => m,
            other => other.to_string(),
        };
        Error::Config {
            line,
            message: format!("{key}: {message}"),
        }
    }

    fn required<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        match self.0.get(key) {
            Some((_, v)) => parse(v).map_err(|e| self.error(key, e)),
            None => Err(Error::Config {
                line: 0,
                message: format!("missing key '{key}'"),
            }),
        }
    }

    fn optional<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T>, default: T) -> Result<T> {
        match self.0.get(key) {
            Some((_, v)) => parse(v).map_err(|e| self.error(key, e)),
            None => Ok(default),
        }
    }
}

fn parse_reference(s: &str, cfg: &ConfigMap) -> Result<ReferenceSpec> {
    let parts: Vec<&str> = s.splitn(3, ':').collect();
    match parts.as_slice() {
        ["sin", a, w] => Ok(ReferenceSpec::Sinusoid {
            amplitude: parse_f64(a)?,
            frequency: parse_f64(w)?,
        }),
        ["model", gain, den] => {
            let denominator = parse_list(den)?;
            if denominator.first() != Some(&1.0) || denominator.len() < 2 {
                return Err(Error::invalid("reference model denominator must be monic of degree >= 1"));
            }
            Ok(ReferenceSpec::Model {
                gain: parse_f64(gain)?,
                denominator,
                input: cfg.required("reference_input", |v| v.parse())?,
            })
        }
        _ => Err(Error::invalid(format!(
            "reference '{s}' is not sin:<amplitude>:<frequency> or model:<gain>:<coefficients>"
        ))),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| Error::invalid(format!("'{}' is not a number: {e}", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_fields() {
        let s = builtin_case1();
        assert_eq!(s.gamma, vec![3.0; 3]);
        assert_eq!(s.theta, vec![0.1, 0.5, 1.5]);
        assert_eq!(
            s.reference,
            ReferenceSpec::Sinusoid {
                amplitude: 1.5,
                frequency: 0.5
            }
        );
        let yr = ReferenceSpec::sinusoid_taps(1.5, 0.5, std::f64::consts::PI, 0)[0];
        assert!((yr - 1.5).abs() < 1e-15);
        s.validate().unwrap();
    }

    #[test]
    fn sinusoid_taps_are_derivatives() {
        let taps = ReferenceSpec::sinusoid_taps(1.5, 0.5, 0.3, 3);
        let t = 0.3f64;
        assert!((taps[1] - 0.75 * (0.5 * t).cos()).abs() < 1e-15);
        assert!((taps[2] + 0.375 * (0.5 * t).sin()).abs() < 1e-15);
        assert!((taps[3] + 0.1875 * (0.5 * t).cos()).abs() < 1e-15);
    }

    #[test]
    fn case2_fields() {
        let s = builtin_case2();
        assert_eq!(s.theta, vec![0.4, 0.5, 0.1]);
        let ReferenceSpec::Model { gain, denominator, input } = &s.reference else {
            panic!("case 2 uses a reference model");
        };
        assert_eq!(*gain, 16.0);
        assert_eq!(denominator, &vec![1.0, 8.0, 24.0, 32.0, 16.0]);
        assert_eq!(input.value(75.0), -1.5);
        assert_eq!(input.value(10.0), -0.3);
        assert_eq!(input.value(100.0), 0.0);
        assert_eq!(s.duration, 120.0);
        s.validate().unwrap();
    }

    #[test]
    fn case3_fields_and_sweep() {
        let s = builtin_case3(0.04).unwrap();
        assert_eq!(s.poles, vec![25.0]);
        assert_eq!(s.x0, vec![0.6, 0.0]);
        assert_eq!(s.kd, vec![0.04, 0.04]);
        s.validate().unwrap();
        assert_eq!(case3_kd_sweep(), vec![0.01, 0.04, 0.07, 0.1, 0.13, 0.16, 0.19]);
        assert!(builtin_case3(1.0).is_err());
        assert!(builtin_case3(-0.01).is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut specs = vec![builtin_case1(), builtin_case2(), builtin_case3(0.07).unwrap()];
        let mut odd = builtin_case1();
        odd.disturbance = DisturbanceSpec::Sinusoid {
            bound: 0.1,
            frequency: 1.0,
            channel: 1,
        };
        odd.noise_std = 0.0;
        odd.seed = u64::MAX;
        odd.tau_d = 0.1 + 0.2;
        odd.adaptation = false;
        specs.push(odd);
        for s in specs {
            let text = s.to_config();
            let back = ScenarioSpec::from_config(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_config(), text);
        }
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let text = builtin_case1().to_config().replace("kappa = 1", "kappa = one");
        match ScenarioSpec::from_config(&text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{}bogus = 1\n", builtin_case1().to_config());
        assert!(matches!(ScenarioSpec::from_config(&text), Err(Error::Config { .. })));
        let text = builtin_case1().to_config().replace("ts = 0.01", "ts = 5");
        assert!(ScenarioSpec::from_config(&text).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(parse_range("1:0:2").is_err());
        assert!(parse_range("1:2").is_err());
    }
}
