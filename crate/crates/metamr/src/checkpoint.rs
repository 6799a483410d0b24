//! Binary model checkpoints.
//!
//! Layout, all integers little-endian `u32` unless noted:
//!
//! ```text
//! "MAMR" version
//! source vocab:  count, then count × (len, utf-8 bytes)
//! languages:     count, then count × (len, utf-8 bytes)
//! target vocab:  count, then count × (len, utf-8 bytes)
//! embed_dim hidden_dim
//! registry:      count, then count × (len, utf-8 name, rows, cols)
//! data:          u64 count, then count × f32
//! ```
//!
//! Parameters are stored as 32-bit floats, so a loaded model equals the saved
//! one after rounding each value to `f32`.

use std::fs;
use std::path::{Path, PathBuf};

use metamr_core::model::{ModelConfig, ModelError, Seq2Seq, Vocab};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"MAMR";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated")]
    Truncated,
    #[error("checkpoint has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid utf-8 in checkpoint string")]
    Utf8,
    #[error("shape registry does not match the architecture: {0}")]
    Registry(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
    pub model: Seq2Seq,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(src_vocab: Vocab, tgt_vocab: Vocab, model: Seq2Seq, params: Vec<f64>) -> Self {
        Checkpoint {
            src_vocab,
            tgt_vocab,
            model,
            params,
        }
    }

    /// The parameters as they will read back after a save/load cycle.
    pub fn quantized(&self) -> Vec<f64> {
        self.params.iter().map(|&v| v as f32 as f64).collect()
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn put_strs(out: &mut Vec<u8>, items: &[String]) {
    put_u32(out, items.len() as u32);
    for s in items {
        put_str(out, s);
    }
}

pub fn encode(ck: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + ck.params.len() * 4);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_strs(&mut out, ck.src_vocab.tokens());
    put_strs(&mut out, ck.src_vocab.languages());
    put_strs(&mut out, ck.tgt_vocab.tokens());
    put_u32(&mut out, ck.model.config.embed_dim as u32);
    put_u32(&mut out, ck.model.config.hidden_dim as u32);
    put_u32(&mut out, ck.model.blocks.len() as u32);
    for b in &ck.model.blocks {
        put_str(&mut out, &b.name);
        put_u32(&mut out, b.shape[0] as u32);
        put_u32(&mut out, b.shape[1] as u32);
    }
    out.extend_from_slice(&(ck.params.len() as u64).to_le_bytes());
    for &v in &ck.params {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.bytes.len() < n {
            return Err(CheckpointError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| CheckpointError::Utf8)
    }

    fn strings(&mut self) -> Result<Vec<String>, CheckpointError> {
        let n = self.u32()? as usize;
        (0..n).map(|_| self.string()).collect()
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    let mut r = Reader { bytes };
    if r.take(4).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let src_tokens = r.strings()?;
    let languages = r.strings()?;
    let tgt_tokens = r.strings()?;
    let src_vocab = Vocab::from_tokens(src_tokens, languages)?;
    let tgt_vocab = Vocab::from_tokens(tgt_tokens, Vec::new())?;
    let embed_dim = r.u32()? as usize;
    let hidden_dim = r.u32()? as usize;
    let model = Seq2Seq::new(ModelConfig {
        src_vocab: src_vocab.len(),
        tgt_vocab: tgt_vocab.len(),
        embed_dim,
        hidden_dim,
    })?;
    let count = r.u32()? as usize;
    if count != model.blocks.len() {
        return Err(CheckpointError::Registry(format!(
            "{count} blocks stored, {} expected",
            model.blocks.len()
        )));
    }
    for b in &model.blocks {
        let name = r.string()?;
        let shape = [r.u32()? as usize, r.u32()? as usize];
        if name != b.name || shape != b.shape {
            return Err(CheckpointError::Registry(format!(
                "found {name} {shape:?}, expected {} {:?}",
                b.name, b.shape
            )));
        }
    }
    let n = r.u64()? as usize;
    if n != model.num_params() {
        return Err(CheckpointError::Registry(format!(
            "{n} values stored, {} expected",
            model.num_params()
        )));
    }
    let data = r.take(n.checked_mul(4).ok_or(CheckpointError::Truncated)?)?;
    let params = data
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    if !r.bytes.is_empty() {
        return Err(CheckpointError::TrailingBytes(r.bytes.len()));
    }
    Ok(Checkpoint {
        src_vocab,
        tgt_vocab,
        model,
        params,
    })
}

pub fn save(path: &Path, ck: &Checkpoint) -> Result<(), CheckpointError> {
    fs::write(path, encode(ck)).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}
