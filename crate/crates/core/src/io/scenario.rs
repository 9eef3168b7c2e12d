//! Scenario documents: one JSON object with a `model` discriminator.
//!
//! ```json
//! {"model":"stochastic","alpha":0.8,"beta":0.8,"x0":0,"x1":1,"y0":0,"y1":1,
//!  "sigma_x":0.3,"sigma_y":0.3,"distribution":"gaussian","steps":10,"seed":7}
//! ```
//!
//! Every field the model kind needs must be present and no other field is
//! accepted. `trajectories` is optional and only meaningful for stochastic
//! scenarios.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::dynamics::{ModelParams, PressureState};
use crate::lanchester::LanchesterState;
use crate::stochastic::{NoiseDistribution, NoiseSpec, StochasticParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct ScenarioError {
    pub field: String,
    pub message: String,
}

impl ScenarioError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Deterministic,
    Stochastic,
    Lanchester,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Deterministic => "deterministic",
            ModelKind::Stochastic => "stochastic",
            ModelKind::Lanchester => "lanchester",
        }
    }

    fn fields(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Deterministic => &["model", "alpha", "beta", "x0", "x1", "y0", "y1", "steps"],
            ModelKind::Stochastic => &[
                "model", "alpha", "beta", "x0", "x1", "y0", "y1", "sigma_x", "sigma_y",
                "distribution", "steps", "seed", "trajectories",
            ],
            ModelKind::Lanchester => &["model", "alpha", "beta", "r0", "g0", "dt", "steps"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Deterministic {
        params: ModelParams,
        initial: PressureState,
        steps: u64,
    },
    Stochastic {
        params: StochasticParams,
        initial: PressureState,
        steps: u64,
        seed: u64,
        trajectories: Option<u64>,
    },
    Lanchester {
        params: ModelParams,
        initial: LanchesterState,
        steps: u64,
    },
}

impl Scenario {
    pub fn kind(&self) -> ModelKind {
        match self {
            Scenario::Deterministic { .. } => ModelKind::Deterministic,
            Scenario::Stochastic { .. } => ModelKind::Stochastic,
            Scenario::Lanchester { .. } => ModelKind::Lanchester,
        }
    }

    pub fn model_params(&self) -> &ModelParams {
        match self {
            Scenario::Deterministic { params, .. } | Scenario::Lanchester { params, .. } => params,
            Scenario::Stochastic { params, .. } => &params.base,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            Scenario::Deterministic { steps, .. }
            | Scenario::Stochastic { steps, .. }
            | Scenario::Lanchester { steps, .. } => *steps,
        }
    }

    /// The scenario as a JSON object; parsing it back yields the same scenario.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("model".into(), self.kind().as_str().into());
        let p = self.model_params();
        m.insert("alpha".into(), p.alpha().into());
        m.insert("beta".into(), p.beta().into());
        m.insert("steps".into(), self.steps().into());
        let pressures = |m: &mut Map<String, Value>, s: &PressureState| {
            m.insert("x0".into(), s.x_prev.into());
            m.insert("x1".into(), s.x_curr.into());
            m.insert("y0".into(), s.y_prev.into());
            m.insert("y1".into(), s.y_curr.into());
        };
        match self {
            Scenario::Deterministic { initial, .. } => pressures(&mut m, initial),
            Scenario::Stochastic {
                params,
                initial,
                seed,
                trajectories,
                ..
            } => {
                pressures(&mut m, initial);
                m.insert("sigma_x".into(), params.noise.sigma_x().into());
                m.insert("sigma_y".into(), params.noise.sigma_y().into());
                m.insert("distribution".into(), params.noise.distribution().as_str().into());
                m.insert("seed".into(), (*seed).into());
                if let Some(t) = trajectories {
                    m.insert("trajectories".into(), (*t).into());
                }
            }
            Scenario::Lanchester { initial, .. } => {
                m.insert("r0".into(), initial.r.into());
                m.insert("g0".into(), initial.g.into());
                m.insert("dt".into(), initial.dt.into());
            }
        }
        Value::Object(m)
    }
}

pub fn parse_scenario(text: &[u8]) -> Result<Scenario, ScenarioError> {
    parse_scenario_with_overrides(text, &[])
}

/// Parse, then replace top-level fields with `overrides` before validation.
pub fn parse_scenario_with_overrides(
    text: &[u8],
    overrides: &[(String, Value)],
) -> Result<Scenario, ScenarioError> {
    let text = std::str::from_utf8(text)
        .map_err(|e| ScenarioError::new("<document>", format!("not UTF-8: {e}")))?;
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| ScenarioError::new("<document>", format!("malformed JSON: {e}")))?;
    let Value::Object(mut obj) = doc else {
        return Err(ScenarioError::new("<document>", "expected a JSON object"));
    };
    for (k, v) in overrides {
        obj.insert(k.clone(), v.clone());
    }
    from_object(&obj)
}

fn from_object(obj: &Map<String, Value>) -> Result<Scenario, ScenarioError> {
    let kind = match obj.get("model") {
        None => return Err(ScenarioError::new("model", "missing required field")),
        Some(Value::String(s)) => match s.as_str() {
            "deterministic" => ModelKind::Deterministic,
            "stochastic" => ModelKind::Stochastic,
            "lanchester" => ModelKind::Lanchester,
            other => {
                return Err(ScenarioError::new(
                    "model",
                    format!("unknown model `{other}` (expected deterministic, stochastic or lanchester)"),
                ))
            }
        },
        Some(_) => return Err(ScenarioError::new("model", "must be a string")),
    };

    let allowed = kind.fields();
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ScenarioError::new(
            extra.as_str(),
            format!("unknown field for model `{}`", kind.as_str()),
        ));
    }

    let fields = Fields(obj);
    let alpha = fields.real("alpha")?;
    let beta = fields.real("beta")?;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if v <= 0.0 {
            return Err(ScenarioError::new(name, "cross-gain must be > 0"));
        }
    }
    let params = ModelParams::new(alpha, beta)
        .map_err(|_| ScenarioError::new("beta", "total gain alpha*beta must be finite"))?;
    let steps = fields.count("steps")?;
    if steps == 0 {
        return Err(ScenarioError::new("steps", "must be a positive integer"));
    }

    let pressures = |f: &Fields| -> Result<PressureState, ScenarioError> {
        let (x0, x1, y0, y1) = (f.real("x0")?, f.real("x1")?, f.real("y0")?, f.real("y1")?);
        Ok(PressureState::initial(x0, x1, y0, y1).expect("finite reals checked"))
    };

    Ok(match kind {
        ModelKind::Deterministic => Scenario::Deterministic {
            params,
            initial: pressures(&fields)?,
            steps,
        },
        ModelKind::Stochastic => {
            let initial = pressures(&fields)?;
            let sigma_x = fields.non_negative("sigma_x")?;
            let sigma_y = fields.non_negative("sigma_y")?;
            let distribution = match obj.get("distribution") {
                None => return Err(ScenarioError::new("distribution", "missing required field")),
                Some(Value::String(s)) => s
                    .parse::<NoiseDistribution>()
                    .map_err(|m| ScenarioError::new("distribution", m))?,
                Some(_) => return Err(ScenarioError::new("distribution", "must be a string")),
            };
            let noise = NoiseSpec::new(sigma_x, sigma_y, distribution).expect("sigmas checked");
            let seed = fields.count("seed")?;
            let trajectories = match obj.get("trajectories") {
                None => None,
                Some(_) => {
                    let t = fields.count("trajectories")?;
                    if t == 0 {
                        return Err(ScenarioError::new("trajectories", "must be a positive integer"));
                    }
                    Some(t)
                }
            };
            Scenario::Stochastic {
                params: StochasticParams::new(params, noise),
                initial,
                steps,
                seed,
                trajectories,
            }
        }
        ModelKind::Lanchester => {
            let (r0, g0) = (fields.real("r0")?, fields.real("g0")?);
            let dt = fields.real("dt")?;
            if dt <= 0.0 {
                return Err(ScenarioError::new("dt", "sampling interval must be > 0"));
            }
            Scenario::Lanchester {
                params,
                initial: LanchesterState::new(r0, g0, dt).expect("checked"),
                steps,
            }
        }
    })
}

struct Fields<'a>(&'a Map<String, Value>);

impl Fields<'_> {
    fn get(&self, name: &str) -> Result<&Value, ScenarioError> {
        self.0
            .get(name)
            .ok_or_else(|| ScenarioError::new(name, "missing required field"))
    }

    fn real(&self, name: &str) -> Result<f64, ScenarioError> {
        match self.get(name)? {
            Value::Number(n) => n
                .as_f64()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ScenarioError::new(name, "must be a finite number")),
            _ => Err(ScenarioError::new(name, "must be a number")),
        }
    }

    fn non_negative(&self, name: &str) -> Result<f64, ScenarioError> {
        let v = self.real(name)?;
        if v < 0.0 {
            return Err(ScenarioError::new(name, "standard deviation must be >= 0"));
        }
        Ok(v)
    }

    fn count(&self, name: &str) -> Result<u64, ScenarioError> {
        match self.get(name)? {
            Value::Number(n) => n
                .as_u64()
                .ok_or_else(|| ScenarioError::new(name, "must be a non-negative integer")),
            _ => Err(ScenarioError::new(name, "must be an integer")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_deterministic() {
        let s = parse_scenario(
            br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":1,"y0":0,"y1":1,"steps":10}"#,
        )
        .unwrap();
        match s {
            Scenario::Deterministic { params, initial, steps } => {
                assert_eq!((params.alpha(), params.beta()), (0.5, 0.5));
                assert_eq!((initial.x_prev, initial.x_curr, initial.y_prev, initial.y_curr), (0.0, 1.0, 0.0, 1.0));
                assert_eq!(steps, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_alpha_names_field() {
        let e = parse_scenario(
            br#"{"model":"deterministic","alpha":-1,"beta":0.5,"x0":0,"x1":1,"y0":0,"y1":1,"steps":10}"#,
        )
        .unwrap_err();
        assert_eq!(e.field, "alpha");
        assert!(e.message.contains("> 0"));
    }

    #[test]
    fn missing_seed_names_field() {
        let e = parse_scenario(
            br#"{"model":"stochastic","alpha":0.8,"beta":0.8,"x0":0,"x1":1,"y0":0,"y1":1,
                "sigma_x":0.3,"sigma_y":0.3,"distribution":"gaussian","steps":10}"#,
        )
        .unwrap_err();
        assert_eq!(e.field, "seed");
    }

    #[test]
    fn other_errors() {
        let cases: &[(&[u8], &str)] = &[
            (b"{not json", "<document>"),
            (b"[1,2]", "<document>"),
            (br#"{"alpha":1}"#, "model"),
            (br#"{"model":"chaotic"}"#, "model"),
            (
                br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":1,"y0":0,"y1":1,"steps":10,"r0":3}"#,
                "r0",
            ),
            (
                br#"{"model":"deterministic","alpha":0.5,"beta":0,"x0":0,"x1":1,"y0":0,"y1":1,"steps":10}"#,
                "beta",
            ),
            (
                br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":1,"y0":0,"y1":1,"steps":0}"#,
                "steps",
            ),
            (
                br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":"1","y0":0,"y1":1,"steps":3}"#,
                "x1",
            ),
            (
                br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":1,"y0":0,"steps":3}"#,
                "y1",
            ),
            (
                br#"{"model":"stochastic","alpha":0.8,"beta":0.8,"x0":0,"x1":1,"y0":0,"y1":1,
                    "sigma_x":-0.3,"sigma_y":0.3,"distribution":"gaussian","steps":10,"seed":1}"#,
                "sigma_x",
            ),
            (
                br#"{"model":"stochastic","alpha":0.8,"beta":0.8,"x0":0,"x1":1,"y0":0,"y1":1,
                    "sigma_x":0.3,"sigma_y":0.3,"distribution":"cauchy","steps":10,"seed":1}"#,
                "distribution",
            ),
            (br#"{"model":"lanchester","alpha":0.1,"beta":0.1,"r0":1,"g0":1,"dt":0,"steps":3}"#, "dt"),
            (br#"{"model":"lanchester","alpha":0.1,"beta":0.1,"r0":1,"g0":1,"dt":1,"steps":3,"x0":1}"#, "x0"),
        ];
        for (doc, field) in cases {
            let e = parse_scenario(doc).unwrap_err();
            assert_eq!(&e.field, field, "{}", String::from_utf8_lossy(doc));
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let doc = br#"{"model":"deterministic","alpha":0.5,"beta":0.5,"x0":0,"x1":1,"y0":0,"y1":1,"steps":10}"#;
        let s = parse_scenario_with_overrides(doc, &[("steps".into(), 42.into())]).unwrap();
        assert_eq!(s.steps(), 42);
        let e = parse_scenario_with_overrides(doc, &[("seed".into(), 1.into())]).unwrap_err();
        assert_eq!(e.field, "seed");
    }

    fn arb_scenario() -> impl Strategy<Value = Scenario> {
        let gain = 1e-3f64..10.0;
        let real = -1e6f64..1e6;
        prop_oneof![
            (gain.clone(), gain.clone(), real.clone(), real.clone(), real.clone(), real.clone(), 1u64..10_000)
                .prop_map(|(a, b, x0, x1, y0, y1, steps)| Scenario::Deterministic {
                    params: ModelParams::new(a, b).unwrap(),
                    initial: PressureState::initial(x0, x1, y0, y1).unwrap(),
                    steps,
                }),
            (
                (gain.clone(), gain.clone(), real.clone(), real.clone(), real.clone(), real.clone()),
                (0.0f64..3.0, 0.0f64..3.0, any::<bool>(), 1u64..10_000, any::<u64>(), proptest::option::of(1u64..1_000_000)),
            )
                .prop_map(|((a, b, x0, x1, y0, y1), (sx, sy, uni, steps, seed, trajectories))| {
                    let dist = if uni { NoiseDistribution::Uniform } else { NoiseDistribution::Gaussian };
                    Scenario::Stochastic {
                        params: StochasticParams::new(
                            ModelParams::new(a, b).unwrap(),
                            NoiseSpec::new(sx, sy, dist).unwrap(),
                        ),
                        initial: PressureState::initial(x0, x1, y0, y1).unwrap(),
                        steps,
                        seed,
                        trajectories,
                    }
                }),
            (gain.clone(), gain, real.clone(), real, 1e-6f64..10.0, 1u64..10_000).prop_map(
                |(a, b, r0, g0, dt, steps)| Scenario::Lanchester {
                    params: ModelParams::new(a, b).unwrap(),
                    initial: LanchesterState::new(r0, g0, dt).unwrap(),
                    steps,
                }
            ),
        ]
    }

    proptest! {
        #[test]
        fn serialized_scenarios_parse_back(s in arb_scenario()) {
            let text = serde_json::to_string(&s.to_json()).unwrap();
            prop_assert_eq!(parse_scenario(text.as_bytes()).unwrap(), s);
        }
    }
}
