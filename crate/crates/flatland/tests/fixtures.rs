#[path = "../examples/write_fixtures.rs"]
mod generator;

use std::path::PathBuf;

use serde_json::Value;

/// Structural equality with numbers compared to 1e-12, which absorbs last-bit
/// differences of libm between build profiles.
fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= 1e-12,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w)))
        }
        _ => a == b,
    }
}

#[test]
fn shipped_fixtures_match_generator() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (rel, body) in generator::fixtures() {
        let shipped = std::fs::read_to_string(dir.join(&rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
        let (a, b): (Value, Value) = (serde_json::from_str(&shipped).unwrap(), serde_json::from_str(&body).unwrap());
        assert!(close(&a, &b), "{rel} is stale; rerun the write_fixtures example");
    }
}
