//! JSON reports written by the command line tool and the schema they follow.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Bumped whenever a report changes shape.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    pub module: String,
    pub pass: bool,
    pub skipped: bool,
    /// largest observed discrepancy (0 for exact checks that hold)
    pub max_error: f64,
    /// the discrepancy allowed: a certified bound or a fixed tolerance
    pub error_bound: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: String,
    pub kind: String,
    pub suite: String,
    pub seed: u64,
    pub map: crate::henon::MapSpec,
    pub checks: Vec<SuiteCheck>,
    pub pass: bool,
}

fn num() -> Value {
    json!({"type": "number"})
}

fn num_or_null() -> Value {
    json!({"type": ["number", "null"]})
}

fn complex() -> Value {
    json!({"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2})
}

fn envelope(kind: &str, props: Value, required: &[&str]) -> Value {
    let mut p = props.as_object().cloned().unwrap_or_default();
    p.insert("schema_version".into(), json!({"const": SCHEMA_VERSION}));
    p.insert("kind".into(), json!({"const": kind}));
    let mut req: Vec<&str> = vec!["schema_version", "kind"];
    req.extend_from_slice(required);
    json!({"type": "object", "properties": p, "required": req})
}

/// The versioned JSON schema covering every report kind.
pub fn report_schema() -> Value {
    let map = json!({
        "type": "object",
        "properties": {
            "d": {"type": "integer", "minimum": 2},
            "a": complex(),
            "q": {"type": "array", "items": complex()}
        },
        "required": ["d", "a", "q"]
    });
    let point = json!({"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4});
    let tag = json!({"enum": ["K_plus", "Omega_prime_interior", "boundary_unresolved", "outside"]});
    let dyadic = json!({
        "type": "object",
        "properties": {"k": {"type": "integer"}, "n": {"type": "integer", "minimum": 0}},
        "required": ["k", "n"]
    });
    let model_point = json!({
        "type": "object",
        "properties": {"z": complex(), "zeta": complex(), "c": num()},
        "required": ["z", "zeta", "c"]
    });
    let check = json!({
        "type": "object",
        "properties": {
            "name": {"type": "string"},
            "module": {"type": "string"},
            "pass": {"type": "boolean"},
            "skipped": {"type": "boolean"},
            "max_error": num_or_null(),
            "error_bound": num_or_null(),
            "samples": {"type": "integer", "minimum": 0},
            "detail": {"type": "string"}
        },
        "required": ["name", "module", "pass", "skipped", "max_error", "error_bound", "samples", "detail"]
    });

    let kinds = vec![
        envelope(
            "green",
            json!({
                "point": point, "direction": {"enum": ["plus", "minus"]},
                "value": num(), "error_bound": num(),
                "iterations": {"type": "integer", "minimum": 0}, "escaped": {"type": "boolean"}
            }),
            &["point", "direction", "value", "error_bound", "iterations", "escaped"],
        ),
        envelope(
            "member",
            json!({
                "point": point, "level": num(), "tag": tag,
                "value": num_or_null(), "error_bound": num_or_null()
            }),
            &["point", "level", "tag", "value", "error_bound"],
        ),
        envelope(
            "loop-class",
            json!({
                "d": {"type": "integer"}, "class": dyadic, "display": {"type": "string"},
                "turns": num(), "error_bound": num(), "depth": {"type": "integer"},
                "samples": {"type": "integer"}
            }),
            &["d", "class", "display", "turns", "error_bound", "samples"],
        ),
        envelope(
            "connect",
            json!({
                "from": point, "to": point, "level": num(), "path_file": {"type": "string"},
                "samples": {"type": "integer"}, "max_green": num(), "error_bound": num(),
                "info": {"type": "object"}
            }),
            &["from", "to", "level", "path_file", "samples", "max_green", "error_bound"],
        ),
        envelope(
            "affine-group",
            json!({
                "d": {"type": "integer"},
                "order": {"type": "integer", "minimum": 1},
                "generator_exponent": {"type": "integer", "minimum": 0},
                "modulus": {"type": "integer"},
                "elements": {"type": "array", "items": {
                    "type": "object",
                    "properties": {"d": {"type": "integer"}, "eta_exponent": {"type": "integer"}},
                    "required": ["eta_exponent"]
                }}
            }),
            &["order", "generator_exponent", "elements"],
        ),
        envelope(
            "deck",
            json!({
                "class": dyadic, "m": {"type": "integer"}, "input": model_point,
                "output": model_point, "error_bound": num()
            }),
            &["class", "input", "output", "error_bound"],
        ),
        envelope(
            "bihol",
            json!({
                "c1": {"type": "string"}, "c2": {"type": "string"}, "d": {"type": "integer"},
                "n": {"type": ["integer", "null"]}
            }),
            &["c1", "c2", "d", "n"],
        ),
        envelope(
            "verify",
            json!({
                "suite": {"type": "string"}, "seed": {"type": "integer"}, "map": map,
                "checks": {"type": "array", "items": check}, "pass": {"type": "boolean"}
            }),
            &["suite", "seed", "map", "checks", "pass"],
        ),
        envelope(
            "render",
            json!({
                "pgm": {"type": "string"}, "csv": {"type": "string"},
                "width": {"type": "integer"}, "height": {"type": "integer"},
                "maxval": {"const": 255}, "gray_map": {"type": "object"}, "map": map
            }),
            &["pgm", "csv", "width", "height", "maxval", "gray_map"],
        ),
        envelope(
            "error",
            json!({"code": {"type": "string"}, "message": {"type": "string"}}),
            &["code", "message"],
        ),
    ];
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "$id": format!("https://shortc2.invalid/report/{SCHEMA_VERSION}"),
        "title": "shortc2 report",
        "version": SCHEMA_VERSION,
        "oneOf": kinds
    })
}

/// The `{"kind": "error"}` report for a failure.
pub fn error_report(e: &crate::Error) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": "error",
        "code": e.code(),
        "message": e.to_string(),
    })
}
