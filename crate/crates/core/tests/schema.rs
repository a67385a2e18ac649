use jsonschema::JSONSchema;
use proptest::prelude::*;
use serde_json::{json, Value};

use shortc2_core::henon::HenonMap;
use shortc2_core::report::{report_schema, SuiteCheck, VerifyReport, SCHEMA_VERSION};
use shortc2_core::verify::{run_suite, VerifyOptions};

fn compiled() -> JSONSchema {
    JSONSchema::compile(&report_schema()).expect("schema compiles")
}

fn sample_report() -> Value {
    let h = HenonMap::quadratic_standard();
    let opts = VerifyOptions {
        samples: 20,
        ..Default::default()
    };
    serde_json::to_value(run_suite(&h, "biholo", &opts).unwrap()).unwrap()
}

#[test]
fn validates_verify_report() {
    let s = compiled();
    let v = sample_report();
    assert!(s.is_valid(&v), "{v}");
}

#[test]
fn rejects_missing_error_bound() {
    let s = compiled();
    let mut v = sample_report();
    v["checks"][0].as_object_mut().unwrap().remove("error_bound");
    assert!(!s.is_valid(&v));
    let green = json!({
        "schema_version": SCHEMA_VERSION, "kind": "green", "point": [0.0, 0.0, 0.0, 0.0],
        "direction": "plus", "value": 0.0, "iterations": 3, "escaped": false
    });
    assert!(!s.is_valid(&green));
}

#[test]
fn rejects_wrong_version() {
    let s = compiled();
    let mut v = sample_report();
    v["schema_version"] = json!("0.0.1");
    assert!(!s.is_valid(&v));
}

#[test]
fn cli_outputs_validate() {
    let s = compiled();
    let bin = env!("CARGO_BIN_EXE_shortc2");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let runs: [&[&str]; 7] = [
        &["green", "1", "0", "5", "0"],
        &["member", "0", "0", "3", "0", "--level", "5"],
        &["bihol", "4", "1", "2"],
        &["affine-group"],
        &["deck", "--point", "0.5", "0", "1.5", "0.5", "--class", "3/8"],
        &["render", "--nx", "4", "--ny", "3", "--out", out],
        &["bihol", "-1", "1", "2"],
    ];
    for args in runs {
        let o = std::process::Command::new(bin).args(args).output().unwrap();
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(s.is_valid(&v), "{args:?}: {v}");
    }
}

fn check_strategy() -> impl Strategy<Value = SuiteCheck> {
    (
        "[a-z_]{1,12}",
        "[a-z]{1,8}",
        any::<bool>(),
        any::<bool>(),
        0.0f64..1e3,
        1e-16f64..1.0,
        0usize..5000,
        "[ -~]{0,30}",
    )
        .prop_map(|(name, module, pass, skipped, max_error, error_bound, samples, detail)| SuiteCheck {
            name,
            module,
            pass,
            skipped,
            max_error,
            error_bound,
            samples,
            detail,
        })
}

proptest! {
    #[test]
    fn roundtrip(checks in prop::collection::vec(check_strategy(), 0..8), seed in any::<u64>(), pass in any::<bool>(),
                 a_re in -5.0f64..5.0, a_im in -5.0f64..5.0) {
        prop_assume!(a_re.abs() + a_im.abs() > 1e-3);
        let map = HenonMap::pure(2, num_complex::Complex64::new(a_re, a_im)).unwrap().to_spec();
        let r = VerifyReport {
            schema_version: SCHEMA_VERSION.into(),
            kind: "verify".into(),
            suite: "all".into(),
            seed,
            map,
            checks,
            pass,
        };
        let text = serde_json::to_string(&r).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        prop_assert!(compiled().is_valid(&v));
        let back: VerifyReport = serde_json::from_value(v).unwrap();
        prop_assert_eq!(back, r);
    }
}
