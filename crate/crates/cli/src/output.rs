//! CSV and JSON writers. Numbers carry 12 significant digits, every file
//! starts with the effective configuration, and lines end in `\n`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const SIG_DIGITS: usize = 12;

/// Fixed notation between `1e-5` and `1e12`, scientific outside; trailing
/// zeros are dropped.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to the digits `num` prints, for JSON.
pub fn round(x: f64) -> Value {
    if x.is_finite() {
        json!(num(x).parse::<f64>().expect("own format parses"))
    } else {
        Value::String(num(x))
    }
}

pub fn header_lines(command: &str, cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("# moyal {command}")];
    lines.extend(cfg.entries().into_iter().map(|(k, v)| format!("# {k} = {v}")));
    lines
}

/// A CSV table with its config header.
pub struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, command: &str, cfg: &RunConfig) -> String {
        let mut out = header_lines(command, cfg).join("\n");
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, command: &str, cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
        write_file(cfg, name, &self.render(command, cfg))
    }
}

pub fn config_json(cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    for (k, v) in cfg.entries() {
        m.insert(k.to_string(), Value::String(v));
    }
    Value::Object(m)
}

/// `{"command", "config", "result"}`, pretty-printed.
pub fn write_json(command: &str, cfg: &RunConfig, name: &str, result: Value) -> Result<PathBuf, CliError> {
    let doc = json!({ "command": command, "config": config_json(cfg), "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    text.push('\n');
    write_file(cfg, name, &text)
}

pub fn write_file(cfg: &RunConfig, name: &str, text: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

/// True when the file opens with the config block for `cfg`.
pub fn has_header(path: &Path, cfg: &RunConfig) -> bool {
    let Ok(text) = fs::read_to_string(path) else {
        return false;
    };
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str::<Value>(&text).is_ok_and(|v| v.get("config") == Some(&config_json(cfg)));
    }
    let want = cfg.entries().len() + 1;
    let got: Vec<&str> = text.lines().take(want).collect();
    let expected = header_lines("", cfg);
    got.len() == want && got[0].starts_with("# moyal ") && got[1..] == expected[1..]
}
