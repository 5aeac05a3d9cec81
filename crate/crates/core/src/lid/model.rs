//! Trained model and its binary container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "LMAPLID\0"
//! version    u32
//! dim        u32
//! hash_seed  u64
//! normalize  u8
//! labels     u32 count, then per label u16 byte length + UTF-8 bytes
//! layers     u32 count, then per layer u32 inputs + u32 outputs
//! blocks     per layer: inputs*outputs f32 weights (row-major), outputs f32 biases
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::features::{FeatureVector, Featurizer};
use super::mlp::Mlp;
use super::window::Window50;
use crate::error::IoContext;
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"LMAPLID\0";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LidModel {
    pub featurizer: Featurizer,
    /// ISO 639-3 codes, one per output unit.
    pub labels: Vec<String>,
    pub mlp: Mlp<f32>,
}

impl LidModel {
    pub fn new(featurizer: Featurizer, labels: Vec<String>, mlp: Mlp<f32>) -> Result<Self> {
        if mlp.dim() != featurizer.dim || mlp.outputs() != labels.len() {
            return Err(Error::contract(format!(
                "model shape {}->{} does not match dim {} and {} labels",
                mlp.dim(),
                mlp.outputs(),
                featurizer.dim,
                labels.len()
            )));
        }
        Ok(LidModel {
            featurizer,
            labels,
            mlp,
        })
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn features(&self, window: &Window50) -> FeatureVector {
        self.featurizer.featurize(window.as_str())
    }

    /// Probabilities for one window.
    pub fn predict_window(&self, window: &Window50) -> Vec<f64> {
        self.mlp
            .predict(&self.features(window))
            .expect("featurizer matches model dimension")
    }

    /// Index of the most probable label, lowest index on ties.
    pub fn argmax(p: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        best
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(self.featurizer.dim as u32).to_le_bytes())?;
        w.write_all(&self.featurizer.hash_seed.to_le_bytes())?;
        w.write_all(&[self.featurizer.normalize as u8])?;
        w.write_all(&(self.labels.len() as u32).to_le_bytes())?;
        for l in &self.labels {
            w.write_all(&(l.len() as u16).to_le_bytes())?;
            w.write_all(l.as_bytes())?;
        }
        w.write_all(&(self.mlp.layers.len() as u32).to_le_bytes())?;
        for l in &self.mlp.layers {
            w.write_all(&(l.inputs as u32).to_le_bytes())?;
            w.write_all(&(l.outputs as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(1 << 16);
        for l in &self.mlp.layers {
            for chunk in l.weights.chunks(1 << 14).chain(std::iter::once(&l.bias[..])) {
                buf.clear();
                for v in chunk {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
                w.write_all(&buf)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Format("not a model file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {version}")));
        }
        let dim = read_u32(r)? as usize;
        let mut seed = [0u8; 8];
        r.read_exact(&mut seed)?;
        let mut normalize = [0u8; 1];
        r.read_exact(&mut normalize)?;
        let featurizer = Featurizer {
            dim,
            hash_seed: u64::from_le_bytes(seed),
            normalize: normalize[0] != 0,
        };
        let n_labels = read_u32(r)? as usize;
        let mut labels = Vec::with_capacity(n_labels.min(1 << 16));
        for _ in 0..n_labels {
            let mut len = [0u8; 2];
            r.read_exact(&mut len)?;
            let mut bytes = vec![0u8; u16::from_le_bytes(len) as usize];
            r.read_exact(&mut bytes)?;
            labels.push(String::from_utf8(bytes).map_err(|_| Error::Format("label is not UTF-8".into()))?);
        }
        let n_layers = read_u32(r)? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(Error::Format(format!("implausible layer count {n_layers}")));
        }
        let mut shapes = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            shapes.push((read_u32(r)? as usize, read_u32(r)? as usize));
        }
        if shapes[0].0 != dim || shapes.windows(2).any(|w| w[0].1 != w[1].0) || shapes[n_layers - 1].1 != n_labels {
            return Err(Error::Format(format!("inconsistent layer shapes {shapes:?}")));
        }
        let mut mlp = Mlp::<f32>::zeros(
            dim,
            &shapes[..n_layers - 1].iter().map(|s| s.1).collect::<Vec<_>>(),
            n_labels,
        );
        for l in &mut mlp.layers {
            read_f32s(r, &mut l.weights)?;
            read_f32s(r, &mut l.bias)?;
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after model".into()));
        }
        LidModel::new(featurizer, labels, mlp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).at(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w).at(path)?;
        w.flush().at(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).at(path)?;
        Self::read_from(&mut std::io::BufReader::new(f)).map_err(|e| match e {
            Error::Stream(io) => Error::io(path, io),
            other => other,
        })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32s(r: &mut impl Read, out: &mut [f32]) -> Result<()> {
    let mut buf = vec![0u8; 4 * (1 << 14)];
    for chunk in out.chunks_mut(1 << 14) {
        let bytes = &mut buf[..chunk.len() * 4];
        r.read_exact(bytes)?;
        for (v, b) in chunk.iter_mut().zip(bytes.chunks_exact(4)) {
            *v = f32::from_le_bytes(b.try_into().unwrap());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lid::windows;

    fn model() -> LidModel {
        let fz = Featurizer::new(257, 99);
        LidModel::new(
            fz,
            vec!["eng".into(), "fra".into(), "ελλ".into()],
            Mlp::new(257, &[6, 5, 4], 3, 1.0, 5),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let m = model();
        let mut bytes = Vec::new();
        m.write_to(&mut bytes).unwrap();
        let back = LidModel::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, m);
        let w = &windows("the quick brown fox jumps over the lazy dog again and again")[0];
        let (a, b) = (m.predict_window(w), back.predict_window(w));
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let m = model();
        let mut bytes = Vec::new();
        m.write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            LidModel::read_from(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        let short = &bytes[..bytes.len() - 3];
        assert!(LidModel::read_from(&mut &short[..]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(LidModel::read_from(&mut long.as_slice()).is_err());
    }

    #[test]
    fn shape_mismatch() {
        let fz = Featurizer::new(10, 0);
        assert!(LidModel::new(fz, vec!["a".into()], Mlp::new(10, &[2], 2, 1.0, 0)).is_err());
    }
}
