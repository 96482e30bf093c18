//! CSV writers and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{BcError, Result};
use crate::wave::{Control, WaveField};

/// 17 significant digits, the format used by every CSV writer.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equally long columns under a header row.
pub fn write_columns(mut out: impl Write, headers: &[&str], cols: &[&[f64]]) -> Result<()> {
    if headers.len() != cols.len() {
        return Err(BcError::GridMismatch(format!("{} headers for {} columns", headers.len(), cols.len())));
    }
    let n = cols.first().map_or(0, |c| c.len());
    if cols.iter().any(|c| c.len() != n) {
        return Err(BcError::GridMismatch("columns of unequal length".into()));
    }
    writeln!(out, "{}", headers.join(","))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (k, c) in cols.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(c[i]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes preformatted rows under a header row.
pub fn write_rows(mut out: impl Write, headers: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        if row.len() != headers.len() {
            return Err(BcError::GridMismatch(format!("row has {} fields, header {}", row.len(), headers.len())));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// One row per time level: `t, u(x_0,t), u(x_1,t), ...`.
pub fn write_wave_field(mut out: impl Write, u: &WaveField) -> Result<()> {
    let mut header = String::from("t\\x");
    for i in 0..u.nx {
        header.push(',');
        header.push_str(&fmt_f64(i as f64 * u.h));
    }
    writeln!(out, "{header}")?;
    for n in 0..u.nt {
        let mut line = fmt_f64(n as f64 * u.h);
        for v in u.time_slice(n) {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_control(out: impl Write, f: &Control) -> Result<()> {
    let t: Vec<f64> = (0..f.samples.len()).map(|j| j as f64 * f.h).collect();
    write_columns(out, &["t", "f"], &[&t, &f.samples])
}

/// Reads a numeric CSV with a header row; returns the header and the columns.
pub fn read_columns(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| BcError::Parse("empty CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(BcError::Parse(format!(
                "CSV row {}: {} fields, header has {}",
                k + 2,
                fields.len(),
                header.len()
            )));
        }
        for (c, s) in cols.iter_mut().zip(fields) {
            c.push(s.parse::<f64>().map_err(|e| BcError::Parse(format!("CSV row {}: `{s}`: {e}", k + 2)))?);
        }
    }
    Ok((header, cols))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub input_hashes: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    pub diagnostics: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), diagnostics: serde_json::json!({}), ..Default::default() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.input_hashes.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Pretty JSON; keys come out sorted because `serde_json::Value` maps are ordered.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("manifest is plain data");
        serde_json::to_string_pretty(&v).expect("manifest is plain data")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn columns_roundtrip() {
        let mut buf = Vec::new();
        write_columns(&mut buf, &["a", "b"], &[&[1.0, 2.0], &[3.0, -4.5]]).unwrap();
        let (h, c) = read_columns(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(h, ["a", "b"]);
        assert_eq!(c, vec![vec![1.0, 2.0], vec![3.0, -4.5]]);
        assert!(write_columns(&mut buf, &["a"], &[&[1.0], &[2.0]]).is_err());
    }

    #[test]
    fn manifest_keys_sorted() {
        let mut m = RunManifest::new("invert");
        m.set("zeta", 1);
        m.set("alpha", 2);
        let s = m.to_json();
        let keys: Vec<usize> = ["command", "config", "diagnostics", "input_hashes", "output_paths"]
            .iter()
            .map(|k| s.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(s.find("\"alpha\"").unwrap() < s.find("\"zeta\"").unwrap());
    }

    #[test]
    fn sha_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
