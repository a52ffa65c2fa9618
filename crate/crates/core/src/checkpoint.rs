//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"GNNXCKPT"  u32 version  u64 header_len  header_json  f64 payload...
//! ```
//!
//! The JSON header carries the model kind, free-form metadata (config, seed,
//! dimensions) and the name and shape of each tensor. The payload is every
//! tensor in header order, row-major, as raw `f64` bits, so a write/read
//! round trip is exact.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{GcnModel, Mlp, TrainConfig};

const MAGIC: &[u8; 8] = b"GNNXCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: serde_json::Value,
    pub tensors: Vec<(String, Array2<f64>)>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: serde_json::Value,
    tensors: Vec<TensorHeader>,
}

#[derive(Serialize, Deserialize)]
struct TensorHeader {
    name: String,
    rows: usize,
    cols: usize,
}

impl Checkpoint {
    pub fn new(kind: impl Into<String>, meta: serde_json::Value) -> Self {
        Self {
            kind: kind.into(),
            meta,
            tensors: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Array2<f64>) {
        self.tensors.push((name.into(), tensor));
    }

    pub fn tensor(&self, name: &str) -> Result<&Array2<f64>> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name:?}")))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|(name, t)| TensorHeader {
                    name: name.clone(),
                    rows: t.nrows(),
                    cols: t.ncols(),
                })
                .collect(),
        };
        let header = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(20 + header.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for (_, t) in &self.tensors {
            for v in t.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let body = &bytes[20..];
        if body.len() < header_len {
            return Err(bad("truncated header"));
        }
        let header: Header = serde_json::from_slice(&body[..header_len])?;
        let mut payload = &body[header_len..];
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for th in header.tensors {
            let count = th.rows * th.cols;
            if payload.len() < count * 8 {
                return Err(Error::Checkpoint(format!("truncated tensor {:?}", th.name)));
            }
            let data = payload[..count * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            payload = &payload[count * 8..];
            let t = Array2::from_shape_vec((th.rows, th.cols), data)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            tensors.push((th.name, t));
        }
        if !payload.is_empty() {
            return Err(bad("trailing bytes after payload"));
        }
        Ok(Self {
            kind: header.kind,
            meta: header.meta,
            tensors,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub(crate) fn row(v: &Array1<f64>) -> Array2<f64> {
    v.clone().insert_axis(ndarray::Axis(0))
}

pub(crate) fn unrow(t: &Array2<f64>) -> Array1<f64> {
    t.row(0).to_owned()
}

impl GcnModel {
    /// Checkpoint holding both weight matrices, the dropout rate and the
    /// training config (including its seed).
    pub fn to_checkpoint(&self, cfg: &TrainConfig, extra: serde_json::Value) -> Checkpoint {
        let meta = serde_json::json!({
            "feature_dim": self.feature_dim(),
            "hidden_dim": self.hidden_dim(),
            "num_classes": self.num_classes(),
            "dropout_rate": self.dropout_rate(),
            "trained": self.is_trained(),
            "config": cfg,
            "seed": cfg.seed,
            "extra": extra,
        });
        let mut ck = Checkpoint::new("gcn", meta);
        self.push_into(&mut ck, "");
        ck
    }

    pub(crate) fn push_into(&self, ck: &mut Checkpoint, prefix: &str) {
        ck.push(format!("{prefix}w0"), self.w0().clone());
        ck.push(format!("{prefix}w1"), self.w1().clone());
        ck.push(
            format!("{prefix}hyper"),
            Array2::from_shape_vec(
                (1, 2),
                vec![self.dropout_rate(), if self.is_trained() { 1.0 } else { 0.0 }],
            )
            .unwrap(),
        );
    }

    pub(crate) fn pull_from(ck: &Checkpoint, prefix: &str) -> Result<Self> {
        let hyper = ck.tensor(&format!("{prefix}hyper"))?;
        let mut m = GcnModel::new(
            ck.tensor(&format!("{prefix}w0"))?.clone(),
            ck.tensor(&format!("{prefix}w1"))?.clone(),
            hyper[[0, 0]],
        )?;
        if hyper[[0, 1]] != 0.0 {
            m.mark_trained();
        }
        Ok(m)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<(Self, TrainConfig)> {
        if ck.kind != "gcn" {
            return Err(Error::Checkpoint(format!("expected gcn, found {}", ck.kind)));
        }
        let cfg: TrainConfig = serde_json::from_value(ck.meta["config"].clone())?;
        Ok((Self::pull_from(ck, "")?, cfg))
    }
}

impl Mlp {
    pub fn to_checkpoint(&self, meta: serde_json::Value) -> Checkpoint {
        let mut ck = Checkpoint::new("mlp", serde_json::json!({ "meta": meta }));
        self.push_into(&mut ck, "");
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != "mlp" {
            return Err(Error::Checkpoint(format!("expected mlp, found {}", ck.kind)));
        }
        Self::pull_from(ck, "")
    }

    pub(crate) fn push_into(&self, ck: &mut Checkpoint, prefix: &str) {
        ck.push(format!("{prefix}w0"), self.w0.clone());
        ck.push(format!("{prefix}b0"), row(&self.b0));
        ck.push(format!("{prefix}w1"), self.w1.clone());
        ck.push(format!("{prefix}b1"), row(&self.b1));
        ck.push(
            format!("{prefix}hyper"),
            Array2::from_elem((1, 1), self.dropout_rate()),
        );
    }

    pub(crate) fn pull_from(ck: &Checkpoint, prefix: &str) -> Result<Self> {
        Mlp::from_parts(
            ck.tensor(&format!("{prefix}w0"))?.clone(),
            unrow(ck.tensor(&format!("{prefix}b0"))?),
            ck.tensor(&format!("{prefix}w1"))?.clone(),
            unrow(ck.tensor(&format!("{prefix}b1"))?),
            ck.tensor(&format!("{prefix}hyper"))?[[0, 0]],
        )
    }
}
