//! Binary checkpoint: magic, format version, a JSON header with the
//! vocabulary and configuration, parameter arrays as little-endian f64 with
//! their names and shapes, and a trailing SHA-256 of everything before it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GenerativeModel, TrainConfig, TrainHistory};
use crate::codec::VocabSpec;
use crate::error::{Error, Result};
use crate::neural::{AdamState, Network, Param};
use crate::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"GRAPHGEN";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

/// Optimizer and bookkeeping state needed to continue a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResumeState<T> {
    /// Parameters after the last completed epoch (not necessarily the best).
    pub network: Network<T>,
    pub adam: AdamState<T>,
    pub history: TrainHistory,
    pub best_valid: f64,
    pub reference: f64,
    pub stale: usize,
    pub stopped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    /// Best parameters.
    pub model: GenerativeModel<T>,
    pub resume: Option<ResumeState<T>>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    vocab: VocabSpec,
    config: TrainConfig,
    max_len: usize,
    resume: Option<ResumeHeader>,
}

#[derive(Serialize, Deserialize)]
struct ResumeHeader {
    history: TrainHistory,
    best_valid: Option<f64>,
    reference: Option<f64>,
    stale: usize,
    stopped: bool,
    adam_step: u64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn put_u32(buf: &mut Vec<u8>, x: usize) {
    buf.extend_from_slice(&u32::try_from(x).expect("fits in u32").to_le_bytes());
}

fn put_params<T: Scalar>(buf: &mut Vec<u8>, params: &[&Param<T>]) {
    put_u32(buf, params.len());
    for p in params {
        put_u32(buf, p.name.len());
        buf.extend_from_slice(p.name.as_bytes());
        put_u32(buf, p.value.rows());
        put_u32(buf, p.value.cols());
        for v in p.value.as_slice() {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
}

fn put_moments<T: Scalar>(buf: &mut Vec<u8>, moments: &[Vec<T>]) {
    put_u32(buf, moments.len());
    for m in moments {
        put_u32(buf, m.len());
        for v in m {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

fn malformed(what: &str) -> Error {
    Error::Precondition(format!("malformed checkpoint: {what}"))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(|| malformed("unexpected end"))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s<T: Scalar>(&mut self, n: usize) -> Result<Vec<T>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| malformed("array size"))?)?;
        Ok(bytes.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes")))).collect())
    }

    fn params_into<T: Scalar>(&mut self, net: &mut Network<T>) -> Result<()> {
        let mut params = net.params_mut();
        if self.u32()? != params.len() {
            return Err(malformed("parameter count"));
        }
        for p in params.iter_mut() {
            let len = self.u32()?;
            let name = std::str::from_utf8(self.take(len)?).map_err(|_| malformed("parameter name"))?;
            let (rows, cols) = (self.u32()?, self.u32()?);
            if name != p.name || (rows, cols) != p.value.shape() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} {:?}", p.name, p.value.shape()),
                    got: format!("{name} {:?}", (rows, cols)),
                });
            }
            let values = self.f64s::<T>(rows * cols)?;
            p.value.as_mut_slice().copy_from_slice(&values);
        }
        Ok(())
    }

    fn moments<T: Scalar>(&mut self, like: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        if self.u32()? != like.len() {
            return Err(malformed("optimizer buffer count"));
        }
        like.iter()
            .map(|m| {
                if self.u32()? != m.len() {
                    return Err(malformed("optimizer buffer size"));
                }
                self.f64s(m.len())
            })
            .collect()
    }
}

impl<T: Scalar> Checkpoint<T> {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            vocab: self.model.vocab.clone(),
            config: self.model.config.clone(),
            max_len: self.model.max_len,
            resume: self.resume.as_ref().map(|r| ResumeHeader {
                history: r.history.clone(),
                best_valid: finite(r.best_valid),
                reference: finite(r.reference),
                stale: r.stale,
                stopped: r.stopped,
                adam_step: r.adam.step,
            }),
        };
        let json = serde_json::to_vec(&header)?;
        let mut buf = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
        buf.extend_from_slice(&json);
        put_params(&mut buf, &self.model.network.params());
        if let Some(r) = &self.resume {
            put_params(&mut buf, &r.network.params());
            put_moments(&mut buf, &r.adam.m);
            put_moments(&mut buf, &r.adam.v);
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        Ok(buf)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < CHECKPOINT_MAGIC.len() || &data[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
            return Err(Error::BadMagic);
        }
        if data.len() < CHECKPOINT_MAGIC.len() + 4 + DIGEST_LEN {
            return Err(Error::ChecksumMismatch);
        }
        let (body, digest) = data.split_at(data.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::ChecksumMismatch);
        }
        let mut r = Reader { data: body, pos: CHECKPOINT_MAGIC.len() };
        let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
        }
        let json_len = usize::try_from(r.u64()?).map_err(|_| malformed("header length"))?;
        let header: Header = serde_json::from_slice(r.take(json_len)?)?;
        let vocab = header.vocab;
        let mut model = GenerativeModel::<T>::new(vocab, header.config, header.max_len)?;
        r.params_into(&mut model.network)?;
        let resume = match header.resume {
            None => None,
            Some(h) => {
                let mut network = model.network.clone();
                r.params_into(&mut network)?;
                let mut adam = AdamState::new(model.config.optimizer, &network.params());
                adam.m = r.moments(&adam.m)?;
                adam.v = r.moments(&adam.v)?;
                adam.step = h.adam_step;
                Some(ResumeState {
                    network,
                    adam,
                    history: h.history,
                    best_valid: h.best_valid.unwrap_or(f64::INFINITY),
                    reference: h.reference.unwrap_or(f64::INFINITY),
                    stale: h.stale,
                    stopped: h.stopped,
                })
            }
        };
        if r.pos != body.len() {
            return Err(malformed("trailing bytes"));
        }
        Ok(Checkpoint { model, resume })
    }
}

pub fn save_checkpoint<T: Scalar>(checkpoint: &Checkpoint<T>, path: &Path) -> Result<()> {
    let bytes = checkpoint.to_bytes()?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Checkpoint<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

impl<T: Scalar> GenerativeModel<T> {
    /// Writes the model alone, without training state.
    pub fn save(&self, path: &Path) -> Result<()> {
        save_checkpoint(&Checkpoint { model: self.clone(), resume: None }, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(load_checkpoint(path)?.model)
    }
}
