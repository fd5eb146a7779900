//! Binary model container.
//!
//! All integers and floats are little-endian; strings are a `u32` byte length
//! followed by UTF-8; `opt<u32>` is a `u8` flag (0 or 1) followed by the value
//! when present.
//!
//! ```text
//! magic            4 bytes  "LDAM"
//! version          u32      currently 1
//! k                u32
//! alpha, beta      f64, f64
//! iterations       u32
//! seed             u64
//! average_last     u32
//! corpus_id        str
//! granularity      u8       0 volume, 1 page, 2 sentence
//! vocab_hash       u64      FNV-1a over the word list
//! V                u32, then V × str
//! D                u32, then D × { doc_id str, volume_id str,
//!                                  page_index opt<u32>, sentence_index opt<u32>,
//!                                  label str, n u32, n × u32 topic assignment }
//! n_tw             k × V × u32 (row-major)
//! phi              k × V × f64 (row-major)
//! theta            D × k × f64 (row-major)
//! checksum         u64      FNV-1a of every preceding byte
//! ```
//!
//! Document-topic and topic totals are recomputed from the assignments and
//! `n_tw` on load, then cross-checked.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Granularity, Provenance};
use crate::fingerprint::{fnv64, Fnv64};
use crate::lda::{DocMeta, LdaModel, LdaParams, Matrix};

pub const MAGIC: &[u8; 4] = b"LDAM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt model: {0}")]
    CorruptModel(&'static str),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn opt(&mut self, v: Option<u32>) {
        match v {
            Some(x) => {
                self.u8(1);
                self.u32(x);
            }
            None => self.u8(0),
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

const TRUNCATED: CodecError = CodecError::CorruptModel("truncated");

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(TRUNCATED)?;
        let out = self.buf.get(self.pos..end).ok_or(TRUNCATED)?;
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().map_err(|_| TRUNCATED)?,
        ))
    }
    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().map_err(|_| TRUNCATED)?,
        ))
    }
    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn str(&mut self) -> Result<String, CodecError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        core::str::from_utf8(bytes)
            .map(String::from)
            .map_err(|_| CodecError::CorruptModel("invalid utf-8"))
    }
    fn opt(&mut self) -> Result<Option<u32>, CodecError> {
        match self.u8()? {
            0 => Ok(None),
            1 => Ok(Some(self.u32()?)),
            _ => Err(CodecError::CorruptModel("invalid option flag")),
        }
    }
    /// Guards allocations driven by length fields.
    fn expect_at_least(&self, items: usize, item_size: usize) -> Result<(), CodecError> {
        let need = items.checked_mul(item_size).ok_or(TRUNCATED)?;
        if self.buf.len() - self.pos < need {
            return Err(TRUNCATED);
        }
        Ok(())
    }
}

fn granularity_tag(g: Granularity) -> u8 {
    match g {
        Granularity::Volume => 0,
        Granularity::Page => 1,
        Granularity::Sentence => 2,
    }
}

pub fn save(model: &LdaModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    let p = &model.params;
    w.u32(p.k);
    w.f64(p.alpha);
    w.f64(p.beta);
    w.u32(p.iterations);
    w.u64(p.seed);
    w.u32(p.average_last);
    w.str(&model.corpus_id);
    w.u8(granularity_tag(model.granularity));
    w.u64(model.vocab_hash);
    w.u32(model.vocab.len() as u32);
    for word in &model.vocab {
        w.str(word);
    }
    w.u32(model.docs.len() as u32);
    for (meta, z) in model.docs.iter().zip(&model.assignments) {
        w.str(&meta.doc_id);
        w.str(&meta.provenance.volume_id);
        w.opt(meta.provenance.page_index);
        w.opt(meta.provenance.sentence_index);
        w.str(&meta.label);
        w.u32(z.len() as u32);
        for &t in z {
            w.u32(t);
        }
    }
    for &c in model.n_tw.as_slice() {
        w.u32(c);
    }
    for &x in model.phi.as_slice() {
        w.f64(x);
    }
    for &x in model.theta.as_slice() {
        w.f64(x);
    }
    let sum = fnv64(&w.0);
    w.u64(sum);
    w.0
}

pub fn load(bytes: &[u8]) -> Result<LdaModel, CodecError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CodecError::CorruptModel("bad magic"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    if bytes.len() < 16 {
        return Err(TRUNCATED);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().map_err(|_| TRUNCATED)?);
    if fnv64(body) != stored {
        return Err(CodecError::CorruptModel("checksum mismatch"));
    }
    let mut r = Reader {
        buf: body,
        pos: r.pos,
    };

    let params = LdaParams {
        k: r.u32()?,
        alpha: r.f64()?,
        beta: r.f64()?,
        iterations: r.u32()?,
        seed: r.u64()?,
        average_last: r.u32()?,
    };
    if params.validate().is_err() {
        return Err(CodecError::CorruptModel("invalid parameters"));
    }
    let k = params.k as usize;
    let corpus_id = r.str()?;
    let granularity = match r.u8()? {
        0 => Granularity::Volume,
        1 => Granularity::Page,
        2 => Granularity::Sentence,
        _ => return Err(CodecError::CorruptModel("invalid granularity")),
    };
    let vocab_hash = r.u64()?;
    let v = r.u32()? as usize;
    r.expect_at_least(v, 4)?;
    let vocab = (0..v).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let mut h = Fnv64::new();
    h.write_u64(vocab.len() as u64);
    for word in &vocab {
        h.write_str(word);
    }
    if h.finish() != vocab_hash {
        return Err(CodecError::CorruptModel("vocabulary hash mismatch"));
    }
    if vocab.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CodecError::CorruptModel("vocabulary not sorted"));
    }

    let d = r.u32()? as usize;
    r.expect_at_least(d, 4)?;
    let mut docs = Vec::with_capacity(d);
    let mut assignments = Vec::with_capacity(d);
    let mut n_dt = Matrix::zeros(d, k);
    for di in 0..d {
        let doc_id = r.str()?;
        let volume_id = r.str()?;
        let page_index = r.opt()?;
        let sentence_index = r.opt()?;
        let label = r.str()?;
        let n = r.u32()? as usize;
        r.expect_at_least(n, 4)?;
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let t = r.u32()?;
            if t as usize >= k {
                return Err(CodecError::CorruptModel("topic id out of range"));
            }
            n_dt[(di, t as usize)] += 1;
            z.push(t);
        }
        docs.push(DocMeta {
            doc_id,
            provenance: Provenance {
                volume_id,
                page_index,
                sentence_index,
            },
            label,
        });
        assignments.push(z);
    }

    r.expect_at_least(k * v, 4 + 8)?;
    let n_tw_data = (0..k * v).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let n_tw = Matrix::from_vec(k, v, n_tw_data).ok_or(TRUNCATED)?;
    let phi_data = (0..k * v).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let phi = Matrix::from_vec(k, v, phi_data).ok_or(TRUNCATED)?;
    r.expect_at_least(d * k, 8)?;
    let theta_data = (0..d * k).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let theta = Matrix::from_vec(d, k, theta_data).ok_or(TRUNCATED)?;
    if r.pos != body.len() {
        return Err(CodecError::CorruptModel("trailing bytes"));
    }

    let mut n_t = vec![0u32; k];
    for (t, row) in n_tw.iter_rows().enumerate() {
        n_t[t] = row.iter().sum();
    }
    let model = LdaModel {
        params,
        corpus_id,
        granularity,
        vocab,
        vocab_hash,
        docs,
        phi,
        theta,
        assignments,
        n_dt,
        n_tw,
        n_t,
    };
    if !model.counts_consistent() {
        return Err(CodecError::CorruptModel(
            "count tables disagree with assignments",
        ));
    }
    Ok(model)
}

/// Content address of a saved model.
pub fn model_id(bytes: &[u8]) -> String {
    alloc::format!("m{:016x}", fnv64(bytes))
}
