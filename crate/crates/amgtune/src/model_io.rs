//! Versioned little-endian binary model files.
//!
//! Layout: magic `AMGTMLP\0`, `u32` version, `u64` space fingerprint,
//! `f64` dropout, target mean, target std and training MSE, `u32` layer
//! count, `u32` widths (layers + 1 of them), then every parameter as `f64`
//! in [`MlpModel::parameters`] order.

use std::fs;
use std::path::Path;

use amgtune_core::MlpModel;

pub const MAGIC: &[u8; 8] = b"AMGTMLP\0";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a model file")]
    BadMagic,
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("model file truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after the model")]
    Trailing(usize),
    #[error("invalid model: {0}")]
    Invalid(String),
}

pub fn encode(m: &MlpModel) -> Vec<u8> {
    let widths = m.widths();
    let mut out = Vec::with_capacity(64 + 4 * widths.len() + 8 * m.n_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&m.fingerprint.to_le_bytes());
    for x in [m.dropout, m.target_mean, m.target_std, m.train_mse] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(m.layers.len() as u32).to_le_bytes());
    for w in widths {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    for p in m.parameters() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ModelFileError> {
        let end = self.at + N;
        let chunk = self.bytes.get(self.at..end).ok_or(ModelFileError::Truncated(self.bytes.len()))?;
        self.at = end;
        Ok(chunk.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, ModelFileError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<MlpModel, ModelFileError> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelFileError::Version(version));
    }
    let fingerprint = r.u64()?;
    let dropout = r.f64()?;
    let target_mean = r.f64()?;
    let target_std = r.f64()?;
    let train_mse = r.f64()?;
    let n_layers = r.u32()? as usize;
    if n_layers == 0 || n_layers > 64 {
        return Err(ModelFileError::Invalid(format!("{n_layers} layers")));
    }
    let widths = (0..=n_layers)
        .map(|_| r.u32().map(|w| w as usize))
        .collect::<Result<Vec<_>, _>>()?;
    if widths.contains(&0) || *widths.last().unwrap() != 1 {
        return Err(ModelFileError::Invalid(format!("widths {widths:?}")));
    }
    if !(0.0..1.0).contains(&dropout) || !target_std.is_finite() || target_std < 0.0 || !target_mean.is_finite() {
        return Err(ModelFileError::Invalid("bad normalization statistics".into()));
    }
    let n_params: usize = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if bytes.len().saturating_sub(r.at) < 8 * n_params {
        return Err(ModelFileError::Truncated(bytes.len()));
    }
    let params = (0..n_params).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    if r.at != bytes.len() {
        return Err(ModelFileError::Trailing(bytes.len() - r.at));
    }
    let mut m = MlpModel::new(&widths, dropout, fingerprint, 0);
    m.set_parameters(&params);
    m.target_mean = target_mean;
    m.target_std = target_std;
    m.train_mse = train_mse;
    Ok(m)
}

pub fn read_model(path: &Path) -> Result<MlpModel, ModelFileError> {
    let bytes = fs::read(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

pub fn write_model(path: &Path, m: &MlpModel) -> Result<(), ModelFileError> {
    fs::write(path, encode(m)).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MlpModel {
        let mut m = MlpModel::new(&[3, 5, 4, 1], 0.25, 0xabcd, 7);
        m.target_mean = 12.5;
        m.target_std = 3.25;
        m.train_mse = 0.1;
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        assert_eq!(decode(&encode(&m)).unwrap(), m);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = encode(&model());
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(ModelFileError::Truncated(_))));
        assert!(matches!(decode(&bytes[..20]), Err(ModelFileError::Truncated(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode(&extra), Err(ModelFileError::Trailing(1))));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(ModelFileError::BadMagic)));
        let mut ver = bytes;
        ver[8] = 9;
        assert!(matches!(decode(&ver), Err(ModelFileError::Version(9))));
    }
}
