use std::path::Path;

use latsym::{LatticePoint, ShapeClass, SparseFunction};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Machine-readable record of one invocation. Keys serialize in sorted
/// order, so identical runs produce identical bytes.
pub struct Report {
    command: Vec<String>,
    seed: u64,
    inputs: Map<String, Value>,
    results: Map<String, Value>,
    pass: bool,
    wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Report {
            command,
            seed,
            inputs: Map::new(),
            results: Map::new(),
            pass: true,
            wall_time: None,
        }
    }

    /// Records the sha256 of the file at `path` under `role`.
    pub fn input(&mut self, role: &str, path: &Path, bytes: &[u8]) {
        self.inputs.insert(
            role.to_string(),
            json!({ "path": path.display().to_string(), "sha256": sha256_hex(bytes) }),
        );
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn fail_unless(&mut self, ok: bool) {
        self.pass &= ok;
    }

    pub fn pass(&self) -> bool {
        self.pass
    }

    pub fn set_wall_time(&mut self, seconds: f64) {
        self.wall_time = Some(seconds);
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), json!(self.command));
        root.insert("inputs".into(), Value::Object(self.inputs.clone()));
        root.insert("pass".into(), json!(self.pass));
        root.insert("results".into(), Value::Object(self.results.clone()));
        root.insert("seed".into(), json!(self.seed));
        root.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        if let Some(t) = self.wall_time {
            root.insert("wall_time_seconds".into(), json!(t));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn point_json(x: &LatticePoint) -> Value {
    json!(x.coords())
}

pub fn shape_json(s: &ShapeClass) -> Value {
    Value::Array(s.points().iter().map(point_json).collect())
}

/// `[[x1, ..., xd, value], ...]` in lexicographic point order.
pub fn function_json(u: &SparseFunction) -> Value {
    Value::Array(
        u.iter()
            .map(|(x, v)| {
                let mut row: Vec<Value> = x.coords().iter().map(|&c| json!(c)).collect();
                row.push(json!(v));
                Value::Array(row)
            })
            .collect(),
    )
}
