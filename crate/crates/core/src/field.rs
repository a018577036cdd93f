//! Lattice fields and their on-disk formats.
//!
//! CSV layout:
//!
//! ```text
//! n,model,params,seed
//! 20,br-truncated,hurst=0.5;scale=2;mode=isotropic;terms=1000,42
//! <n rows of n comma-separated values, 17 significant digits>
//! ```
//!
//! Binary layout: 8-byte magic `LATFLD01`, `n` as little-endian `u64`, then
//! `n²` little-endian `f64` values in row-major order.

use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"LATFLD01";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub model: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
}

impl Provenance {
    pub fn new(model: impl Into<String>, seed: u64) -> Self {
        Self {
            model: model.into(),
            params: Vec::new(),
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn parse_params(s: &str) -> Result<Vec<(String, String)>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(';')
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Parse(format!("bad parameter entry `{kv}`")))
            })
            .collect()
    }
}

/// An `n × n` grid of positive values, row-major: entry `(i, j)` is site
/// `(i + 1, j + 1)` of `{1, …, n}²`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    n: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl LatticeField {
    pub fn new(n: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "field of side {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "field values must be positive and finite, found {bad}"
            )));
        }
        Ok(Self { n, values, provenance })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "n,model,params,seed");
        let _ = writeln!(out, "{},{},{},{}", self.n, p.model, p.params_string(), p.seed);
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of field file".into()))?
                .map_err(Error::from)
        };
        let header = next()?;
        if header.trim() != "n,model,params,seed" {
            return Err(Error::Parse(format!("unexpected header `{header}`")));
        }
        let meta = next()?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("bad metadata line `{meta}`")));
        }
        let n: usize = parts[0].parse().map_err(|_| Error::Parse(format!("bad n `{}`", parts[0])))?;
        let seed: u64 = parts[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad seed `{}`", parts[3])))?;
        let provenance = Provenance {
            model: parts[1].to_string(),
            params: Provenance::parse_params(parts[2])?,
            seed,
        };
        let mut values = Vec::with_capacity(n * n);
        for _ in 0..n {
            let line = next()?;
            for tok in line.trim().split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad value `{tok}`")))?,
                );
            }
        }
        LatticeField::new(n, values, provenance)
    }

    /// Magic, `n` as little-endian u64, then row-major little-endian f64 values.
    /// Provenance is not stored.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != BINARY_MAGIC {
            return Err(Error::Parse("bad magic in binary field file".into()));
        }
        let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
        let mut buf = vec![0u8; n * n * 8];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        LatticeField::new(n, values, Provenance::default())
    }

    /// Reads either format, sniffing the binary magic.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::read_binary(bytes.as_slice())
        } else {
            Self::from_csv_reader(bytes.as_slice())
        }
    }

    /// Writes binary when the extension is `bin`, CSV otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e == "bin") {
            let f = std::io::BufWriter::new(std::fs::File::create(path)?);
            self.write_binary(f)
        } else {
            std::fs::write(path, self.to_csv_string())?;
            Ok(())
        }
    }
}

/// Full-precision float formatting (17 significant digits).
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> LatticeField {
        let prov = Provenance::new("mma", 42).with("phi", 0.5).with("k0", 5);
        LatticeField::new(2, vec![1.0, 0.1 + 0.2, 3.5e10, std::f64::consts::PI], prov).unwrap()
    }

    #[test]
    fn rejects_bad_values() {
        assert!(LatticeField::new(2, vec![1.0; 3], Provenance::default()).is_err());
        assert!(LatticeField::new(1, vec![0.0], Provenance::default()).is_err());
        assert!(LatticeField::new(1, vec![f64::INFINITY], Provenance::default()).is_err());
    }

    #[test]
    fn csv_is_lossless() {
        let f = sample_field();
        let text = f.to_csv_string();
        assert!(text.starts_with("n,model,params,seed\n2,mma,phi=0.5;k0=5,42\n"));
        let back = LatticeField::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn binary_layout() {
        let f = sample_field();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 8);
        assert_eq!(&buf[..8], BINARY_MAGIC);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        let back = LatticeField::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
    }
}
