//! Run manifest: config echo, software version, wall time and per-operation
//! results. The `report` summary is the manifest minus anything
//! non-reproducible, so re-running `report` is byte-stable.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub subcritical: bool,
    pub wall_time_s: f64,
    pub config: RunConfig,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Value>,
}

impl RunManifest {
    pub fn to_pretty_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    /// Deterministic extract: everything except wall time.
    pub fn summary(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), Value::String(self.command.clone()));
        map.insert("version".into(), Value::String(self.version.clone()));
        map.insert("config_hash".into(), Value::String(self.config_hash.clone()));
        map.insert("seed".into(), Value::from(self.seed));
        map.insert("subcritical".into(), Value::from(self.subcritical));
        map.insert("results".into(), self.results.clone());
        if let Some(cert) = &self.certificate {
            map.insert("certificate".into(), cert.clone());
        }
        Value::Object(map)
    }
}

pub fn load_manifest(path: &std::path::Path) -> Result<RunManifest, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed manifest {}: {e}", path.display()))
}
