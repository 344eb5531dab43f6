//! `JMAP1` checkpoints. Integers are little-endian u64, reals little-endian
//! f64, strings a u32 byte length followed by UTF-8.
//!
//! ```text
//! magic "JMAP1"
//! vocab_size, embed_dim, query_len, n_categories, n_intents, heads
//! gamma, n_alpha, alpha[n_alpha], beta1, beta2, dropout
//! n_thresholds, thresholds[..], default_threshold, gate_bias_init
//! n_tokens, tokens
//! n_params, then per parameter: name, rows, cols, values[rows*cols]
//! ```

use std::fs;
use std::path::Path;

use super::network::param_shapes;
use super::{JointMap, ModelConfig, Vocab};
use crate::baseline::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"JMAP1";

pub fn encode_checkpoint<T: Scalar>(model: &JointMap<T>) -> Result<Vec<u8>> {
    let c = model.config();
    let mut w = ByteWriter::new(Vec::new());
    w.bytes(CHECKPOINT_MAGIC)?;
    for v in [c.vocab_size, c.embed_dim, c.query_len, c.n_categories, c.n_intents, c.heads] {
        w.usize(v)?;
    }
    w.f64(c.gamma)?;
    w.usize(c.alpha.len())?;
    w.f64s(&c.alpha)?;
    w.f64s(&[c.beta1, c.beta2, c.dropout])?;
    w.usize(c.thresholds.len())?;
    w.f64s(&c.thresholds)?;
    w.f64s(&[c.default_threshold, c.gate_bias_init])?;
    w.usize(model.vocab().len())?;
    for t in model.vocab().tokens() {
        w.string(t)?;
    }
    let store = model.params();
    w.usize(store.len())?;
    for id in store.ids() {
        let m = store.value(id);
        w.string(store.name(id))?;
        w.usize(m.rows())?;
        w.usize(m.cols())?;
        for &x in m.as_slice() {
            w.f64(x.to_f64_lossless())?;
        }
    }
    w.finish()
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<JointMap<T>> {
    let mut r = ByteReader::new(bytes);
    r.magic(CHECKPOINT_MAGIC)?;
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = r.u64()? as usize;
    }
    let gamma = r.f64()?;
    let n_alpha = r.count(8)?;
    let alpha = r.f64s(n_alpha)?;
    let [beta1, beta2, dropout] = [r.f64()?, r.f64()?, r.f64()?];
    let n_thr = r.count(8)?;
    let thresholds = r.f64s(n_thr)?;
    let default_threshold = r.f64()?;
    let gate_bias_init = r.f64()?;
    let config = ModelConfig {
        vocab_size: dims[0],
        embed_dim: dims[1],
        query_len: dims[2],
        n_categories: dims[3],
        n_intents: dims[4],
        heads: dims[5],
        gamma,
        alpha,
        beta1,
        beta2,
        dropout,
        thresholds,
        default_threshold,
        gate_bias_init,
    };
    config.validate()?;
    let n_tokens = r.count(4)?;
    let tokens = (0..n_tokens).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let vocab = Vocab::from_tokens(tokens)?;

    let expected = param_shapes(&config);
    let n_params = r.count(20)?;
    if n_params != expected.len() {
        return Err(Error::Format(format!(
            "{n_params} parameters, expected {}",
            expected.len()
        )));
    }
    let mut values = Vec::with_capacity(n_params);
    for (name, rows, cols) in expected {
        let got = r.string()?;
        let (gr, gc) = (r.u64()? as usize, r.u64()? as usize);
        if got != name || (gr, gc) != (rows, cols) {
            return Err(Error::Format(format!(
                "parameter '{got}' {gr}x{gc}, expected '{name}' {rows}x{cols}"
            )));
        }
        let data = r.f64s(rows * cols)?.into_iter().map(T::of).collect();
        values.push(Matrix::from_vec(rows, cols, data)?);
    }
    r.finish()?;
    JointMap::from_parts(config, vocab, values)
}

pub fn save_checkpoint<T: Scalar>(path: &Path, model: &JointMap<T>) -> Result<()> {
    fs::write(path, encode_checkpoint(model)?)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<JointMap<T>> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{tiny_config, tiny_vocab};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> JointMap<f64> {
        let cfg = ModelConfig {
            alpha: vec![1.0, 2.0, 0.5],
            thresholds: vec![0.4, 0.5, 0.6],
            ..tiny_config()
        };
        JointMap::new(cfg, tiny_vocab(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let m = model();
        let bytes = encode_checkpoint(&m).unwrap();
        assert_eq!(&bytes[..5], b"JMAP1");
        let back: JointMap<f64> = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back.config(), m.config());
        assert_eq!(back.vocab(), m.vocab());
        assert_eq!(back.params().values(), m.params().values());
        let ids = [1, 2, 3];
        assert_eq!(
            back.infer(&ids).unwrap().category_logits(),
            m.infer(&ids).unwrap().category_logits()
        );
        assert_eq!(encode_checkpoint(&back).unwrap(), bytes);
    }

    #[test]
    fn file_roundtrip_and_f32_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jmap");
        save_checkpoint(&p, &model()).unwrap();
        let m: JointMap<f32> = load_checkpoint(&p).unwrap();
        assert_eq!(m.config().n_categories, 3);
    }

    #[test]
    fn corrupt_files_rejected() {
        let bytes = encode_checkpoint(&model()).unwrap();
        assert!(decode_checkpoint::<f64>(&bytes[..bytes.len() - 3]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_checkpoint::<f64>(&extra).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(matches!(decode_checkpoint::<f64>(&bad), Err(Error::Format(_))));
    }
}
