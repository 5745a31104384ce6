//! Machine-readable verification reports: serializable result types, a
//! schema document for them, and a validator for the schema subset the
//! reports use. Every floating-point field is emitted with seventeen
//! significant digits so repeated runs diff cleanly.

use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;
use serde_json::value::RawValue;
use serde_json::Value;

/// A float wrapper that serializes as a raw JSON number with seventeen
/// significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "f64")]
pub struct F17(pub f64);

impl From<f64> for F17 {
    fn from(v: f64) -> F17 {
        F17(v)
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite value in report"));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialInfo {
    pub alphabet: u8,
    pub range: usize,
    pub values: std::collections::BTreeMap<String, F17>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub id: String,
    pub residual: F17,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsCheck {
    pub max_len: usize,
    pub conjugators: usize,
    pub residuals: Vec<ResidualEntry>,
    pub max_residual: F17,
    pub bar_move_max_residual: F17,
    pub k_bound: F17,
    pub osc: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BowenCheck {
    pub max_len: usize,
    pub ratio_min: F17,
    pub ratio_max: F17,
    pub envelope_lo: F17,
    pub envelope_hi: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceCheck {
    pub max_len: usize,
    pub max_shift: i64,
    pub max_deviation: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarRatioCheck {
    pub max_len: usize,
    pub ratio_min: F17,
    pub ratio_max: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessCheck {
    pub depth: usize,
    pub rank_deficiency: usize,
    pub max_deviation: F17,
    pub lsq_residual: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmsCheck {
    pub samples: usize,
    pub max_residual: F17,
    pub max_boundary_defect: F17,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Checks {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bowen: Option<BowenCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bar_ratio: Option<BarRatioCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kms: Option<KmsCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: F17,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub potential: PotentialInfo,
    pub beta: F17,
    pub seed: u64,
    pub checks: Checks,
    pub tolerances: Tolerances,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn pass(&self) -> bool {
        let c = &self.checks;
        c.gibbs.iter().all(|x| x.pass)
            && c.bowen.iter().all(|x| x.pass)
            && c.invariance.iter().all(|x| x.pass)
            && c.bar_ratio.iter().all(|x| x.pass)
            && c.uniqueness.iter().all(|x| x.pass)
            && c.kms.iter().all(|x| x.pass)
    }
}

fn nonneg() -> Value {
    json!({"type": "number", "minimum": 0.0})
}

/// The schema document for verification reports.
pub fn report_schema() -> Value {
    let residual_entry = json!({
        "type": "object",
        "required": ["id", "residual"],
        "additionalProperties": false,
        "properties": {
            "id": {"type": "string"},
            "residual": nonneg(),
        }
    });
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "verification-report",
        "type": "object",
        "required": ["potential", "beta", "seed", "checks", "tolerances"],
        "additionalProperties": false,
        "properties": {
            "potential": {
                "type": "object",
                "required": ["alphabet", "range", "values"],
                "additionalProperties": false,
                "properties": {
                    "alphabet": {"type": "integer", "minimum": 1.0},
                    "range": {"type": "integer", "minimum": 1.0},
                    "values": {"type": "object", "additionalProperties": {"type": "number"}}
                }
            },
            "beta": {"type": "number"},
            "seed": {"type": "integer", "minimum": 0.0},
            "tolerances": {
                "type": "object",
                "required": ["tol"],
                "additionalProperties": false,
                "properties": {"tol": {"type": "number", "exclusiveMinimum": 0.0}}
            },
            "checks": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "gibbs": {
                        "type": "object",
                        "required": ["max_len", "conjugators", "residuals", "max_residual",
                                     "bar_move_max_residual", "k_bound", "osc", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "max_len": {"type": "integer", "minimum": 1.0},
                            "conjugators": {"type": "integer", "minimum": 0.0},
                            "residuals": {"type": "array", "items": residual_entry},
                            "max_residual": nonneg(),
                            "bar_move_max_residual": nonneg(),
                            "k_bound": nonneg(),
                            "osc": nonneg(),
                            "pass": {"type": "boolean"}
                        }
                    },
                    "bowen": {
                        "type": "object",
                        "required": ["max_len", "ratio_min", "ratio_max",
                                     "envelope_lo", "envelope_hi", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "max_len": {"type": "integer", "minimum": 1.0},
                            "ratio_min": {"type": "number", "exclusiveMinimum": 0.0},
                            "ratio_max": {"type": "number", "exclusiveMinimum": 0.0},
                            "envelope_lo": {"type": "number"},
                            "envelope_hi": {"type": "number"},
                            "pass": {"type": "boolean"}
                        }
                    },
                    "invariance": {
                        "type": "object",
                        "required": ["max_len", "max_shift", "max_deviation", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "max_len": {"type": "integer", "minimum": 1.0},
                            "max_shift": {"type": "integer", "minimum": 0.0},
                            "max_deviation": nonneg(),
                            "pass": {"type": "boolean"}
                        }
                    },
                    "bar_ratio": {
                        "type": "object",
                        "required": ["max_len", "ratio_min", "ratio_max", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "max_len": {"type": "integer", "minimum": 1.0},
                            "ratio_min": {"type": "number", "exclusiveMinimum": 0.0},
                            "ratio_max": {"type": "number", "exclusiveMinimum": 0.0},
                            "pass": {"type": "boolean"}
                        }
                    },
                    "uniqueness": {
                        "type": "object",
                        "required": ["depth", "rank_deficiency", "max_deviation",
                                     "lsq_residual", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "depth": {"type": "integer", "minimum": 1.0},
                            "rank_deficiency": {"type": "integer", "minimum": 0.0},
                            "max_deviation": nonneg(),
                            "lsq_residual": nonneg(),
                            "pass": {"type": "boolean"}
                        }
                    },
                    "kms": {
                        "type": "object",
                        "required": ["samples", "max_residual", "max_boundary_defect", "pass"],
                        "additionalProperties": false,
                        "properties": {
                            "samples": {"type": "integer", "minimum": 0.0},
                            "max_residual": nonneg(),
                            "max_boundary_defect": nonneg(),
                            "pass": {"type": "boolean"}
                        }
                    }
                }
            }
        }
    })
}

/// Validates a value against the schema subset used by `report_schema`:
/// `type`, `required`, `properties`, `additionalProperties`, `items`,
/// `minimum` and `exclusiveMinimum`.
pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    validate_at(schema, value, "$")
}

fn validate_at(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "number" => value.is_number(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            other => return Err(format!("{path}: unsupported schema type {other:?}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        let v = value
            .as_f64()
            .ok_or_else(|| format!("{path}: minimum applies to numbers"))?;
        if v < min {
            return Err(format!("{path}: {v} below minimum {min}"));
        }
    }
    if let Some(min) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
        let v = value
            .as_f64()
            .ok_or_else(|| format!("{path}: exclusiveMinimum applies to numbers"))?;
        if v <= min {
            return Err(format!("{path}: {v} not above {min}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        let obj = value
            .as_object()
            .ok_or_else(|| format!("{path}: required applies to objects"))?;
        for key in req {
            let key = key.as_str().expect("schema keys are strings");
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing required key {key:?}"));
            }
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        let additional = schema.get("additionalProperties");
        for (key, item) in obj {
            let sub = props.and_then(|p| p.get(key));
            match (sub, additional) {
                (Some(s), _) => validate_at(s, item, &format!("{path}.{key}"))?,
                (None, Some(Value::Bool(false))) => {
                    return Err(format!("{path}: unexpected key {key:?}"))
                }
                (None, Some(Value::Bool(true))) | (None, None) => {}
                (None, Some(s)) => validate_at(s, item, &format!("{path}.{key}"))?,
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, item) in arr.iter().enumerate() {
                validate_at(items, item, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        let mut values = std::collections::BTreeMap::new();
        values.insert("1".to_string(), F17(0.0));
        values.insert("2".to_string(), F17(0.5));
        Report {
            potential: PotentialInfo {
                alphabet: 2,
                range: 1,
                values,
            },
            beta: F17(1.0),
            seed: 7,
            checks: Checks {
                gibbs: Some(GibbsCheck {
                    max_len: 4,
                    conjugators: 100,
                    residuals: vec![ResidualEntry {
                        id: "12|->21|".into(),
                        residual: F17(1e-15),
                    }],
                    max_residual: F17(1e-15),
                    bar_move_max_residual: F17(2e-16),
                    k_bound: F17(0.0),
                    osc: F17(0.5),
                    pass: true,
                }),
                ..Checks::default()
            },
            tolerances: Tolerances { tol: F17(1e-10) },
        }
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let text = serde_json::to_string(&F17(std::f64::consts::LN_2)).unwrap();
        assert_eq!(text, "6.9314718055994529e-1");
        let parsed: f64 = text.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::LN_2, "17 digits round-trip");
        let text = serde_json::to_string(&F17(0.0)).unwrap();
        assert_eq!(text, "0.0000000000000000e0");
        assert!(serde_json::to_string(&F17(f64::NAN)).is_err());
    }

    #[test]
    fn schema_mentions_the_check_families() {
        let schema = report_schema();
        let checks = &schema["properties"]["checks"]["properties"];
        for key in [
            "gibbs",
            "bowen",
            "kms",
            "invariance",
            "bar_ratio",
            "uniqueness",
        ] {
            assert!(checks.get(key).is_some(), "schema lacks {key}");
        }
    }

    #[test]
    fn schema_accepts_generated_report() {
        let report = sample_report();
        let value: Value = serde_json::from_str(&report.to_json()).unwrap();
        validate(&report_schema(), &value).unwrap();
    }

    #[test]
    fn schema_rejects_negative_residual() {
        let report = sample_report();
        let mut value: Value = serde_json::from_str(&report.to_json()).unwrap();
        value["checks"]["gibbs"]["residuals"][0]["residual"] = json!(-1e-3);
        let err = validate(&report_schema(), &value).unwrap_err();
        assert!(err.contains("below minimum"), "got: {err}");
        let mut value: Value = serde_json::from_str(&report.to_json()).unwrap();
        value["checks"]["gibbs"]["max_residual"] = json!(-0.5);
        assert!(validate(&report_schema(), &value).is_err());
    }

    #[test]
    fn schema_rejects_unknown_keys() {
        let report = sample_report();
        let mut value: Value = serde_json::from_str(&report.to_json()).unwrap();
        value["extra"] = json!(1);
        assert!(validate(&report_schema(), &value).is_err());
    }

    #[test]
    fn report_serialization_is_stable() {
        let a = sample_report().to_json();
        let b = sample_report().to_json();
        assert_eq!(a, b);
    }
}
