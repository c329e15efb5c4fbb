//! Field files: a one-line JSON header followed by the node values.
//!
//! Binary encoding (`"f64le"`): header line, `\n`, then `n_theta · n_phi`
//! little-endian `f64` values with θ outer and φ inner. JSON encoding
//! (`"json"`): one JSON object on one line carrying the header fields and a
//! `values` array. Either way `content_hash` is the SHA-256 of the
//! little-endian payload bytes, so the two encodings of a field share a hash.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::to_json_line;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("unknown encoding {0:?}")]
    Encoding(String),
    #[error("payload holds {got} values, header promises {expected}")]
    Length { expected: usize, got: usize },
    #[error("content hash mismatch: header {header}, payload {payload}")]
    Hash { header: String, payload: String },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    F64le,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format_version: u32,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Spectral degree, for fields that are band-limited by construction.
    pub l_max: Option<usize>,
    /// Parameters the field was created with.
    pub params: serde_json::Value,
    pub content_hash: String,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub header: FieldHeader,
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonField {
    #[serde(flatten)]
    header: FieldHeader,
    values: Vec<f64>,
}

fn payload_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn content_hash(values: &[f64]) -> String {
    hex::encode(Sha256::digest(payload_bytes(values)))
}

impl FieldFile {
    pub fn new(
        n_theta: usize,
        n_phi: usize,
        l_max: Option<usize>,
        params: serde_json::Value,
        values: Vec<f64>,
        encoding: Encoding,
    ) -> Self {
        Self {
            header: FieldHeader {
                format_version: FORMAT_VERSION,
                n_theta,
                n_phi,
                l_max,
                params,
                content_hash: content_hash(&values),
                encoding,
            },
            values,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self.header.encoding {
            Encoding::F64le => {
                let mut out = to_json_line(&self.header).into_bytes();
                out.push(b'\n');
                out.extend(payload_bytes(&self.values));
                out
            }
            Encoding::Json => {
                let doc = JsonField {
                    header: self.header.clone(),
                    values: self.values.clone(),
                };
                let mut out = to_json_line(&doc).into_bytes();
                out.push(b'\n');
                out
            }
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let split = bytes.iter().position(|&b| b == b'\n').unwrap_or(bytes.len());
        let (line, rest) = bytes.split_at(split);
        let head: serde_json::Value = serde_json::from_slice(line)
            .or_else(|_| serde_json::from_slice(bytes))
            .map_err(|e| FormatError::Header(e.to_string()))?;
        let encoding = head
            .get("encoding")
            .and_then(|e| e.as_str())
            .ok_or_else(|| FormatError::Header("missing encoding".into()))?
            .to_owned();
        let file = match encoding.as_str() {
            "f64le" => {
                let header: FieldHeader = serde_json::from_value(head)
                    .map_err(|e| FormatError::Header(e.to_string()))?;
                let payload = rest.get(1..).unwrap_or(&[]);
                if payload.len() % 8 != 0 {
                    return Err(FormatError::Length {
                        expected: header.n_theta * header.n_phi,
                        got: payload.len() / 8,
                    });
                }
                let values = payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                    .collect();
                Self { header, values }
            }
            "json" => {
                let doc: JsonField = serde_json::from_value(head)
                    .map_err(|e| FormatError::Header(e.to_string()))?;
                Self {
                    header: doc.header,
                    values: doc.values,
                }
            }
            other => return Err(FormatError::Encoding(other.into())),
        };
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), FormatError> {
        let h = &self.header;
        if h.format_version != FORMAT_VERSION {
            return Err(FormatError::Version(h.format_version));
        }
        let expected = h.n_theta * h.n_phi;
        if self.values.len() != expected {
            return Err(FormatError::Length {
                expected,
                got: self.values.len(),
            });
        }
        let payload = content_hash(&self.values);
        if payload != h.content_hash {
            return Err(FormatError::Hash {
                header: h.content_hash.clone(),
                payload,
            });
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(FormatError::NonFinite(i));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        let bytes = fs::read(path).map_err(|source| FormatError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        let err = |source| FormatError::Write {
            path: path.display().to_string(),
            source,
        };
        let mut f = fs::File::create(path).map_err(err)?;
        f.write_all(&self.to_bytes()).map_err(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(encoding: Encoding) -> FieldFile {
        let values = vec![0.1, -2.5e-300, 1.0 / 3.0, f64::MIN_POSITIVE, 7.0, -0.0, 1e308, 42.0];
        FieldFile::new(2, 4, None, serde_json::json!({"kind": "test"}), values, encoding)
    }

    #[test]
    fn both_encodings_round_trip_bit_exactly() {
        for enc in [Encoding::F64le, Encoding::Json] {
            let f = sample(enc);
            let back = FieldFile::from_bytes(&f.to_bytes()).unwrap();
            assert_eq!(back.header, f.header);
            let a: Vec<u64> = f.values.iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.values.iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
        assert_eq!(
            sample(Encoding::F64le).header.content_hash,
            sample(Encoding::Json).header.content_hash
        );
    }

    #[test]
    fn random_bit_patterns_survive_json() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let values: Vec<f64> = std::iter::repeat_with(|| f64::from_bits(rng.gen()))
            .filter(|v| v.is_finite())
            .take(4096)
            .collect();
        let f = FieldFile::new(64, 64, None, serde_json::Value::Null, values, Encoding::Json);
        let back = FieldFile::from_bytes(&f.to_bytes()).unwrap();
        assert!(f.values.iter().zip(&back.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = sample(Encoding::F64le).to_bytes();
        let n = bytes.len();
        bytes[n - 3] ^= 0x40;
        assert!(matches!(FieldFile::from_bytes(&bytes), Err(FormatError::Hash { .. })));
        let bytes = sample(Encoding::F64le).to_bytes();
        assert!(matches!(
            FieldFile::from_bytes(&bytes[..bytes.len() - 8]),
            Err(FormatError::Length { .. })
        ));
        assert!(matches!(FieldFile::from_bytes(b"not json\n"), Err(FormatError::Header(_))));
    }

    #[test]
    fn version_is_checked() {
        let mut f = sample(Encoding::Json);
        f.header.format_version = 2;
        assert!(matches!(
            FieldFile::from_bytes(&f.to_bytes()),
            Err(FormatError::Version(2))
        ));
    }
}
