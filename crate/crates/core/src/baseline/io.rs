//! `JMSVM1` binary model files. All integers are little-endian u64 unless
//! noted, all reals little-endian f64.
//!
//! ```text
//! magic "JMSVM1"
//! n_docs, lambda (f64), epochs
//! n_terms, then per term: u32 byte length + UTF-8 bytes
//! idf[n_terms]
//! n_classes, dim, then per class: weights[dim], bias
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::svm::{BinaryLinear, LinearSvm, SvmConfig};
use super::tfidf::TfIdfVectorizer;
use super::TextSvm;
use crate::error::{Error, Result};

pub const SVM_MAGIC: &[u8; 6] = b"JMSVM1";

pub(crate) struct ByteWriter<W: Write> {
    inner: W,
}

impl<W: Write> ByteWriter<W> {
    pub(crate) fn new(inner: W) -> Self {
        Self { inner }
    }

    pub(crate) fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.inner.write_all(b)?;
        Ok(())
    }

    pub(crate) fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    pub(crate) fn usize(&mut self, v: usize) -> Result<()> {
        self.u64(v as u64)
    }

    pub(crate) fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    pub(crate) fn f64s(&mut self, v: &[f64]) -> Result<()> {
        v.iter().try_for_each(|&x| self.f64(x))
    }

    pub(crate) fn string(&mut self, s: &str) -> Result<()> {
        let len = u32::try_from(s.len())
            .map_err(|_| Error::Format(format!("string of {} bytes is too long", s.len())))?;
        self.bytes(&len.to_le_bytes())?;
        self.bytes(s.as_bytes())
    }

    pub(crate) fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Format(format!(
                "truncated file: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, magic: &[u8]) -> Result<()> {
        let got = self.take(magic.len())?;
        if got != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(())
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A length or count, sanity-bounded by the bytes left in the file.
    pub(crate) fn count(&mut self, min_item_bytes: usize) -> Result<usize> {
        let v = self.u64()?;
        let left = (self.data.len() - self.pos) as u64;
        if v.saturating_mul(min_item_bytes.max(1) as u64) > left {
            return Err(Error::Format(format!("count {v} exceeds remaining file size")));
        }
        Ok(v as usize)
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        let len = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
        let b = self.take(len)?;
        String::from_utf8(b.to_vec()).map_err(|e| Error::Format(format!("invalid utf-8: {e}")))
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn encode_text_svm(model: &TextSvm) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new(Vec::new());
    w.bytes(SVM_MAGIC)?;
    let v = &model.vectorizer;
    let svm = &model.svm;
    w.usize(v.n_docs())?;
    w.f64(svm.config().lambda)?;
    w.usize(svm.config().epochs)?;
    w.usize(v.dim())?;
    for t in v.terms() {
        w.string(t)?;
    }
    w.f64s(v.idf())?;
    w.usize(svm.n_classes())?;
    w.usize(svm.dim())?;
    for c in svm.classes() {
        w.f64s(&c.weights)?;
        w.f64(c.bias)?;
    }
    w.finish()
}

pub fn decode_text_svm(bytes: &[u8]) -> Result<TextSvm> {
    let mut r = ByteReader::new(bytes);
    r.magic(SVM_MAGIC)?;
    let n_docs = r.u64()? as usize;
    let lambda = r.f64()?;
    let epochs = r.u64()? as usize;
    let n_terms = r.count(4)?;
    let terms = (0..n_terms).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let idf = r.f64s(n_terms)?;
    let n_classes = r.count(8)?;
    let dim = r.count(8)?;
    let mut classes = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        let weights = r.f64s(dim)?;
        let bias = r.f64()?;
        classes.push(BinaryLinear {
            weights,
            bias,
            objective: Vec::new(),
        });
    }
    r.finish()?;
    let vectorizer = TfIdfVectorizer::from_parts(terms, idf, n_docs)?;
    if vectorizer.dim() != dim {
        return Err(Error::Format(format!(
            "vocabulary of {} terms but svm dimension {dim}",
            vectorizer.dim()
        )));
    }
    let svm = LinearSvm::from_parts(dim, SvmConfig { lambda, epochs }, classes)?;
    Ok(TextSvm { vectorizer, svm })
}

pub fn save_text_svm(path: &Path, model: &TextSvm) -> Result<()> {
    fs::write(path, encode_text_svm(model)?)?;
    Ok(())
}

pub fn load_text_svm(path: &Path) -> Result<TextSvm> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_text_svm(&buf)
}
