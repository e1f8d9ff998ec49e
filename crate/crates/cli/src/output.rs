//! Artifacts: every file carries the run configuration and a SHA-256 of
//! its data, and contains no timestamps, so identical runs give identical
//! bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One table row; `None` prints as an empty field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub s: f64,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub lndet: Option<f64>,
}

/// A run that stopped early: rows before `s` are valid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub s: f64,
    pub message: String,
}

pub struct Table {
    pub rows: Vec<Row>,
    pub metadata: Value,
    pub failure: Option<Failure>,
}

fn field(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.17e}"))
}

/// CSV body: header, rows and a trailing `FAILED,s,message` marker row.
fn csv_body(t: &Table) -> String {
    let mut out = String::from("s,F,lndet\n");
    for r in &t.rows {
        out.push_str(&format!("{:.17e},{},{}\n", r.s, field(r.f), field(r.lndet)));
    }
    if let Some(f) = &t.failure {
        out.push_str(&format!("FAILED,{:.17e},\"{}\"\n", f.s, f.message.replace('"', "'")));
    }
    out
}

/// Renders `table`; the hash covers everything after the `# sha256` line
/// (CSV) or the `metadata`, `rows` and `failure` members (JSON).
pub fn render_table(config: &impl Serialize, t: &Table, json_format: bool) -> Result<String, CliError> {
    let config = serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?;
    if json_format {
        let payload = json!({ "metadata": t.metadata, "rows": t.rows, "failure": t.failure });
        let hash = sha256_hex(payload.to_string().as_bytes());
        let doc = json!({
            "config": config,
            "sha256": hash,
            "metadata": t.metadata,
            "rows": t.rows,
            "failure": t.failure,
        });
        return serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()));
    }
    let body = format!("# metadata: {}\n{}", t.metadata, csv_body(t));
    Ok(format!("# config: {config}\n# sha256: {}\n{body}", sha256_hex(body.as_bytes())))
}

/// A JSON report with `config` and a hash of `payload`.
pub fn render_report(config: &impl Serialize, payload: Value) -> Result<String, CliError> {
    let config = serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?;
    let hash = sha256_hex(payload.to_string().as_bytes());
    let mut doc = json!({ "config": config, "sha256": hash });
    if let (Some(d), Value::Object(p)) = (doc.as_object_mut(), payload) {
        d.extend(p);
    }
    serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_hash_covers_the_body() {
        let t = Table {
            rows: vec![Row { s: -1.0, f: Some(0.5), lndet: None }],
            metadata: json!({"method": "x"}),
            failure: Some(Failure { s: 0.0, message: "said \"no\"".into() }),
        };
        let text = render_table(&json!({"k": 0}), &t, false).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# config: {\"k\":0}");
        let hash = lines.next().unwrap().strip_prefix("# sha256: ").unwrap().to_string();
        let body: String = text.splitn(3, '\n').nth(2).unwrap().to_string();
        assert_eq!(hash, sha256_hex(body.as_bytes()));
        assert!(body.contains("-1.00000000000000000e0,5.00000000000000000e-1,\n"));
        assert!(body.ends_with("FAILED,0.00000000000000000e0,\"said 'no'\"\n"));
    }

    #[test]
    fn json_report_merges_payload() {
        let text = render_report(&json!({"k": 1}), json!({"a": 1})).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"], 1);
        assert_eq!(v["sha256"].as_str().unwrap(), sha256_hex(b"{\"a\":1}"));
    }
}
