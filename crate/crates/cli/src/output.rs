use serde::Serialize;
use serde_json::{json, Map, Value};

pub const CLI_SCHEMA: &str = "maassnorm-cli/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One emitted document: `result` plus whether every asserted bound held.
pub struct Document {
    pub command: String,
    pub result: Value,
    pub pass: bool,
    /// Key of an array of records rendered as CSV rows.
    pub table: Option<&'static str>,
}

impl Document {
    pub fn new(command: &str, result: impl Serialize, pass: bool) -> Self {
        Self {
            command: command.into(),
            result: serde_json::to_value(result).unwrap_or(Value::Null),
            pass,
            table: None,
        }
    }

    pub fn with_table(mut self, key: &'static str) -> Self {
        self.table = Some(key);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "schema": CLI_SCHEMA,
                    "command": self.command,
                    "pass": self.pass,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> String {
        let rows: Vec<Vec<(String, String)>> = match self.table.and_then(|k| self.result.get(k)) {
            Some(Value::Array(items)) => items.iter().map(flatten).collect(),
            _ => {
                let mut row = flatten(&self.result);
                row.push(("pass".into(), self.pass.to_string()));
                vec![row]
            }
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(first) = rows.first() {
            let _ = w.write_record(first.iter().map(|(k, _)| k.as_str()));
        }
        for row in &rows {
            let _ = w.write_record(row.iter().map(|(_, v)| v.as_str()));
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

/// Dotted-key flattening; scalar arrays are joined with ';'.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into(v, String::new(), &mut out);
    out
}

fn flatten_into(v: &Value, prefix: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => flatten_object(m, &prefix, out),
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix, joined.join(";")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten_into(x, join_key(&prefix, &i.to_string()), out);
            }
        }
        _ => out.push((prefix, scalar(v))),
    }
}

fn flatten_object(m: &Map<String, Value>, prefix: &str, out: &mut Vec<(String, String)>) {
    for (k, x) in m {
        flatten_into(x, join_key(prefix, k), out);
    }
}

fn join_key(prefix: &str, k: &str) -> String {
    if prefix.is_empty() {
        k.to_string()
    } else {
        format!("{prefix}.{k}")
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Machine-readable error line for stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    let doc = json!({ "schema": CLI_SCHEMA, "error": kind, "message": message });
    format!("{doc}\n")
}
