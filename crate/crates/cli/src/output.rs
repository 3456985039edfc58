//! Serialization helpers. Every float is written with 17 significant digits
//! so that files round-trip exactly; data files carry no timestamps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rewrite every non-integer JSON number with 17 significant digits.
fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                if let Some(x) = n.as_f64() {
                    *v = serde_json::from_str(&num(x)).unwrap_or(Value::Null);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    normalize(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Destination of the primary output and of its sidecar files.
pub struct Sink {
    path: Option<PathBuf>,
    pub written: Vec<String>,
}

impl Sink {
    pub fn new(path: &str) -> Self {
        let path = (path != "-").then(|| PathBuf::from(path));
        Self { path, written: vec![] }
    }

    pub fn is_stdout(&self) -> bool {
        self.path.is_none()
    }

    pub fn primary(&mut self, content: &str) -> Result<(), CliError> {
        match self.path.clone() {
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
            Some(p) => self.write(&p, content),
        }
    }

    /// `<stem>.<suffix>` next to the primary output; skipped for stdout.
    pub fn sidecar(&mut self, suffix: &str, content: &str) -> Result<(), CliError> {
        match self.sidecar_path(suffix) {
            Some(p) => self.write(&p, content),
            None => Ok(()),
        }
    }

    pub fn sidecar_path(&self, suffix: &str) -> Option<PathBuf> {
        let p = self.path.as_ref()?;
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Some(p.with_file_name(format!("{stem}.{suffix}")))
    }

    fn write(&mut self, p: &Path, content: &str) -> Result<(), CliError> {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        fs::write(p, content).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.written.push(p.display().to_string());
        Ok(())
    }
}
