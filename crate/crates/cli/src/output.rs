//! CSV emission and the per-directory run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// `v` rounded to `digits` significant digits, in plain notation for
/// moderate magnitudes and scientific notation otherwise, without trailing
/// zeros. Non-finite values map to `inf`, `-inf` and `nan`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // the exponent after rounding, so 9.9999999996 lands on 1e1
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Comma-separated table with a header row and LF line endings.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// Output directory that remembers the hash of every CSV it wrote.
pub struct OutDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    nondimensional: bool,
    config_sha256: String,
    files: &'a BTreeMap<String, String>,
    config: &'a RunConfig,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> anyhow::Result<()> {
        let bytes = table.to_bytes()?;
        let path = self.root.join(name);
        std::fs::write(&path, &bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.insert(name.to_string(), hex::encode(Sha256::digest(&bytes)));
        log::info!("wrote {} ({} rows)", path.display(), table.len());
        Ok(())
    }

    /// `manifest.toml` with the resolved configuration and the CSV hashes.
    pub fn finish(self, command: &str, cfg: &RunConfig, nondimensional: bool) -> anyhow::Result<PathBuf> {
        let config_text = toml::to_string(cfg)?;
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            nondimensional,
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            files: &self.files,
            config: cfg,
        };
        let path = self.root.join("manifest.toml");
        std::fs::write(&path, toml::to_string(&manifest)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(-0.0, 9), "0");
        assert_eq!(format_sig(60.0, 9), "60");
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(-2.0 / 3.0 * 100.0, 9), "-66.6666667");
        assert_eq!(format_sig(123456789.4, 9), "123456789");
        assert_eq!(format_sig(1234567890.0, 9), "1.23456789e9");
        assert_eq!(format_sig(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_sig(0.000012345, 9), "0.000012345");
        assert_eq!(format_sig(9.9999999996, 9), "10");
        assert_eq!(format_sig(f64::INFINITY, 9), "inf");
        assert_eq!(format_sig(10.7, 3), "10.7");
    }

    #[test]
    fn formatted_values_parse_back_within_precision() {
        for v in [1.0e-12, 1.234567891234, -2.5e5, 7.0e12, 0.1 + 0.2] {
            let back: f64 = format_sig(v, 9).parse().unwrap();
            assert!((back - v).abs() <= 5e-9 * v.abs(), "{v} -> {back}");
        }
    }

    #[test]
    fn table_uses_lf_and_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), String::new()]);
        assert_eq!(t.to_bytes().unwrap(), b"a,b\n1,\n");
    }
}
