//! Parameter layout, forward pass with a full trace, and the hand-written
//! reverse pass.

use rand::Rng;

use super::config::ModelConfig;
use super::loss::{focal_loss, focal_loss_grad, loss_i, loss_i_grad};
use crate::error::{Error, Result};
use crate::numerics::{
    cosine_rows, cosine_rows_backward, dot, dropout_with_mask, matmul, matmul_acc, matmul_nt,
    matmul_tn_acc, row_softmax, row_softmax_backward, softmax_backward_slice, softmax_in_place,
    sigmoid_scalar, Gradients, Matrix, ParamId, ParamStore,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct HighwayIds {
    pub wh: ParamId,
    pub bh: ParamId,
    pub wt: ParamId,
    pub bt: ParamId,
}

/// Where every parameter lives in the store. Index 0 of `highway`, `out_w`
/// and `out_b` is the category path, index 1 the intent path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub word: ParamId,
    pub cat: ParamId,
    pub intent: ParamId,
    pub wq: ParamId,
    pub wk: ParamId,
    pub wv: ParamId,
    pub highway: [HighwayIds; 2],
    pub out_w: [ParamId; 2],
    pub out_b: [ParamId; 2],
}

/// Parameter names and shapes in declaration order.
pub(crate) fn param_shapes(cfg: &ModelConfig) -> Vec<(String, usize, usize)> {
    let v = cfg.embed_dim;
    let n = cfg.query_len;
    let mut out = vec![
        ("word_embedding".to_string(), cfg.vocab_size, v),
        ("category_embedding".to_string(), cfg.n_categories, v),
        ("intent_embedding".to_string(), cfg.n_intents, v),
        ("attention_query".to_string(), n, n),
        ("attention_key".to_string(), n, n),
        ("attention_value".to_string(), n, n),
    ];
    for path in ["category", "intent"] {
        out.push((format!("{path}_highway_wh"), v, v));
        out.push((format!("{path}_highway_bh"), 1, v));
        out.push((format!("{path}_highway_wt"), v, v));
        out.push((format!("{path}_highway_bt"), 1, v));
    }
    out.push(("category_out_w".to_string(), v, cfg.n_categories));
    out.push(("category_out_b".to_string(), 1, cfg.n_categories));
    out.push(("intent_out_w".to_string(), v, cfg.n_intents));
    out.push(("intent_out_b".to_string(), 1, cfg.n_intents));
    out
}

impl Layout {
    /// Registers zero-valued parameters in declaration order.
    pub fn register<T: Scalar>(cfg: &ModelConfig, store: &mut ParamStore<T>) -> Self {
        let ids: Vec<ParamId> = param_shapes(cfg)
            .into_iter()
            .map(|(name, r, c)| store.add(name, Matrix::zeros(r, c)))
            .collect();
        let hw = |k: usize| HighwayIds {
            wh: ids[k],
            bh: ids[k + 1],
            wt: ids[k + 2],
            bt: ids[k + 3],
        };
        Self {
            word: ids[0],
            cat: ids[1],
            intent: ids[2],
            wq: ids[3],
            wk: ids[4],
            wv: ids[5],
            highway: [hw(6), hw(10)],
            out_w: [ids[14], ids[16]],
            out_b: [ids[15], ids[17]],
        }
    }

    /// Random initial values: uniform embeddings, Xavier-uniform weights,
    /// zero biases and a constant highway gate bias.
    pub fn initialize<T: Scalar, R: Rng + ?Sized>(
        &self,
        cfg: &ModelConfig,
        store: &mut ParamStore<T>,
        rng: &mut R,
    ) {
        let uniform = |m: &mut Matrix<T>, a: f64, rng: &mut R| {
            for x in m.as_mut_slice() {
                *x = T::of(rng.gen_range(-a..a));
            }
        };
        let xavier = |m: &Matrix<T>| (6.0 / (m.rows() + m.cols()) as f64).sqrt();
        let emb_scale = (3.0 / cfg.embed_dim as f64).sqrt();
        for id in [self.word, self.cat, self.intent] {
            uniform(store.value_mut(id), emb_scale, rng);
        }
        let weights = [self.wq, self.wk, self.wv]
            .into_iter()
            .chain(self.highway.iter().flat_map(|h| [h.wh, h.wt]))
            .chain(self.out_w);
        for id in weights {
            let a = xavier(store.value(id));
            uniform(store.value_mut(id), a, rng);
        }
        for h in &self.highway {
            store.value_mut(h.bt).fill(T::of(cfg.gate_bias_init));
        }
    }
}

/// Per-path intermediates of one record.
#[derive(Debug, Clone)]
pub struct PathTrace<T> {
    pub a_h: Matrix<T>,
    pub h_mask: Option<Matrix<T>>,
    pub h_d: Matrix<T>,
    pub t: Matrix<T>,
    /// Highway output, one row per non-pad token.
    pub alpha: Matrix<T>,
    /// Label row holding the maximum of each token column.
    pub argmax: Vec<usize>,
    /// Token attention weights over non-pad positions.
    pub beta: Vec<T>,
    pub z_mask: Option<Matrix<T>>,
    pub z_d: Matrix<T>,
    pub logits: Vec<T>,
}

/// Every intermediate of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub ids: Vec<usize>,
    /// Padded query embeddings, `query_len x embed_dim`.
    pub e: Matrix<T>,
    /// Non-pad rows of `e`.
    pub x: Matrix<T>,
    /// Stacked label embeddings `[C; U]`.
    pub labels: Matrix<T>,
    /// Label-word cosine compatibility, `labels x query_len`.
    pub h: Matrix<T>,
    pub q: Matrix<T>,
    pub k: Matrix<T>,
    pub v: Matrix<T>,
    /// Attention weights per head, each `labels x labels`.
    pub attn: Vec<Matrix<T>>,
    pub g: Matrix<T>,
    /// Category path then intent path.
    pub paths: [PathTrace<T>; 2],
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn category_logits(&self) -> &[T] {
        &self.paths[0].logits
    }

    pub fn intent_logits(&self) -> &[T] {
        &self.paths[1].logits
    }
}

/// Loss parts of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordLoss<T> {
    pub focal: T,
    pub intent: T,
    pub total: T,
}

/// A record ready for the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub ids: Vec<usize>,
    pub intent: usize,
    pub categories: Vec<usize>,
}

impl Example {
    /// Category loss applies only to commercial records.
    pub fn has_category_target(&self) -> bool {
        self.intent == crate::corpus::Intent::Commercial.index()
    }
}

impl Layout {
    pub fn forward<T: Scalar, R: Rng + ?Sized>(
        &self,
        cfg: &ModelConfig,
        store: &ParamStore<T>,
        ids: &[usize],
        training: bool,
        rng: &mut R,
    ) -> Result<ForwardTrace<T>> {
        let n = cfg.query_len;
        let dim = cfg.embed_dim;
        if ids.is_empty() || ids.len() > n {
            return Err(Error::Input(format!(
                "query has {} tokens, expected 1..={n}",
                ids.len()
            )));
        }
        let word = store.value(self.word);
        let mut e = Matrix::zeros(n, dim);
        for (j, &id) in ids.iter().enumerate() {
            if id >= word.rows() {
                return Err(Error::Input(format!("token id {id} outside vocabulary")));
            }
            e.row_mut(j).copy_from_slice(word.row(id));
        }
        let x = e.slice_rows(0..ids.len());
        let labels = store.value(self.cat).vstack(store.value(self.intent))?;
        let h = cosine_rows(&labels, &e)?;

        let q = matmul(&h, store.value(self.wq))?;
        let k = matmul(&h, store.value(self.wk))?;
        let v = matmul(&h, store.value(self.wv))?;
        let d = cfg.head_dim();
        let inv_sqrt_d = T::of(1.0 / (d as f64).sqrt());
        let m = labels.rows();
        let mut g = Matrix::zeros(m, n);
        let mut attn = Vec::with_capacity(cfg.heads);
        for head in 0..cfg.heads {
            let cols = head * d..(head + 1) * d;
            let qi = q.slice_cols(cols.clone());
            let ki = k.slice_cols(cols.clone());
            let vi = v.slice_cols(cols);
            let a = row_softmax(&matmul_nt(&qi, &ki).scale(inv_sqrt_d));
            g.set_cols(head * d, &matmul(&a, &vi)?);
            attn.push(a);
        }

        let c = cfg.n_categories;
        let cat_path = self.path_forward(cfg, store, 0, &x, &g, 0..c, training, rng)?;
        let int_path = self.path_forward(cfg, store, 1, &x, &g, c..m, training, rng)?;
        Ok(ForwardTrace {
            ids: ids.to_vec(),
            e,
            x,
            labels,
            h,
            q,
            k,
            v,
            attn,
            g,
            paths: [cat_path, int_path],
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn path_forward<T: Scalar, R: Rng + ?Sized>(
        &self,
        cfg: &ModelConfig,
        store: &ParamStore<T>,
        path: usize,
        x: &Matrix<T>,
        g: &Matrix<T>,
        rows: std::ops::Range<usize>,
        training: bool,
        rng: &mut R,
    ) -> Result<PathTrace<T>> {
        let hw = self.highway[path];
        let len = x.rows();
        let mut a_h = matmul(x, store.value(hw.wh))?;
        a_h.add_row_broadcast(store.value(hw.bh));
        let relu = a_h.map(|v| v.max(T::zero()));
        let (h_d, h_mask) = dropout_with_mask(&relu, cfg.dropout, training, rng)?;
        let mut a_t = matmul(x, store.value(hw.wt))?;
        a_t.add_row_broadcast(store.value(hw.bt));
        let t = a_t.map(sigmoid_scalar);
        let mut alpha = Matrix::zeros(len, x.cols());
        for ((o, (&ti, &hi)), &xi) in alpha
            .as_mut_slice()
            .iter_mut()
            .zip(t.as_slice().iter().zip(h_d.as_slice()))
            .zip(x.as_slice())
        {
            *o = ti * hi + (T::one() - ti) * xi;
        }

        let mut argmax = Vec::with_capacity(len);
        let mut beta = Vec::with_capacity(len);
        for j in 0..len {
            let mut best = rows.start;
            for r in rows.clone() {
                if g[(r, j)] > g[(best, j)] {
                    best = r;
                }
            }
            argmax.push(best);
            beta.push(g[(best, j)]);
        }
        softmax_in_place(&mut beta);

        let mut z = Matrix::zeros(1, x.cols());
        for (j, &b) in beta.iter().enumerate() {
            for (o, &a) in z.as_mut_slice().iter_mut().zip(alpha.row(j)) {
                *o += b * a;
            }
        }
        let (z_d, z_mask) = dropout_with_mask(&z, cfg.dropout, training, rng)?;
        let mut s = matmul(&z_d, store.value(self.out_w[path]))?;
        s.add_row_broadcast(store.value(self.out_b[path]));
        Ok(PathTrace {
            a_h,
            h_mask,
            h_d,
            t,
            alpha,
            argmax,
            beta,
            z_mask,
            z_d,
            logits: s.into_vec(),
        })
    }

    /// Loss of one record and, when `grads` is given, its gradient scaled
    /// by `scale` accumulated into `grads`.
    #[allow(clippy::too_many_arguments)]
    pub fn record_loss<T: Scalar, R: Rng + ?Sized>(
        &self,
        cfg: &ModelConfig,
        store: &ParamStore<T>,
        ex: &Example,
        training: bool,
        rng: &mut R,
        scale: T,
        grads: Option<&mut Gradients<T>>,
    ) -> Result<RecordLoss<T>> {
        let trace = self.forward(cfg, store, &ex.ids, training, rng)?;
        let c = cfg.n_categories;
        let mut targets = vec![false; c];
        for &k in &ex.categories {
            if k >= c {
                return Err(Error::Input(format!("category {k} outside {c} categories")));
            }
            targets[k] = true;
        }
        let alpha: Vec<f64> = (0..c).map(|k| cfg.alpha_of(k)).collect();
        let masked = ex.has_category_target();
        let focal = if masked {
            focal_loss(trace.category_logits(), &targets, &alpha, cfg.gamma)?
        } else {
            T::zero()
        };
        let intent = loss_i(trace.intent_logits(), ex.intent)?;
        let b1 = T::of(cfg.beta1);
        let b2 = T::of(cfg.beta2);
        let total = b1 * focal + b2 * intent;

        if let Some(grads) = grads {
            let d_cat: Vec<T> = if masked {
                focal_loss_grad(trace.category_logits(), &targets, &alpha, cfg.gamma)?
                    .into_iter()
                    .map(|d| d * b1 * scale)
                    .collect()
            } else {
                vec![T::zero(); c]
            };
            let d_int: Vec<T> = loss_i_grad(trace.intent_logits(), ex.intent)
                .into_iter()
                .map(|d| d * b2 * scale)
                .collect();
            self.backward(cfg, store, &trace, &d_cat, &d_int, grads)?;
        }
        Ok(RecordLoss { focal, intent, total })
    }

    /// Accumulates parameter gradients given logit gradients.
    pub fn backward<T: Scalar>(
        &self,
        cfg: &ModelConfig,
        store: &ParamStore<T>,
        tr: &ForwardTrace<T>,
        d_cat: &[T],
        d_int: &[T],
        grads: &mut Gradients<T>,
    ) -> Result<()> {
        if d_cat.len() != cfg.n_categories || d_int.len() != cfg.n_intents {
            return Err(Error::Shape("logit gradient length".into()));
        }
        let n = cfg.query_len;
        let len = tr.x.rows();
        let mut dx = Matrix::zeros(len, tr.x.cols());
        let mut dg = Matrix::zeros(tr.g.rows(), n);
        for (path, ds) in [(0, d_cat), (1, d_int)] {
            self.path_backward(store, path, &tr.paths[path], &tr.x, ds, grads, &mut dx, &mut dg)?;
        }

        let d = cfg.head_dim();
        let inv_sqrt_d = T::of(1.0 / (d as f64).sqrt());
        let m = tr.g.rows();
        let mut dq = Matrix::zeros(m, n);
        let mut dk = Matrix::zeros(m, n);
        let mut dv = Matrix::zeros(m, n);
        for (head, a) in tr.attn.iter().enumerate() {
            let cols = head * d..(head + 1) * d;
            let qi = tr.q.slice_cols(cols.clone());
            let ki = tr.k.slice_cols(cols.clone());
            let vi = tr.v.slice_cols(cols.clone());
            let dgi = dg.slice_cols(cols);
            let da = matmul_nt(&dgi, &vi);
            let mut dvi = Matrix::zeros(m, d);
            matmul_tn_acc(a, &dgi, &mut dvi);
            let ds = row_softmax_backward(a, &da).scale(inv_sqrt_d);
            let mut dqi = Matrix::zeros(m, d);
            matmul_acc(&ds, &ki, &mut dqi);
            let mut dki = Matrix::zeros(m, d);
            matmul_tn_acc(&ds, &qi, &mut dki);
            dq.set_cols(head * d, &dqi);
            dk.set_cols(head * d, &dki);
            dv.set_cols(head * d, &dvi);
        }
        let mut dh = Matrix::zeros(m, n);
        for (w, dproj) in [(self.wq, &dq), (self.wk, &dk), (self.wv, &dv)] {
            matmul_tn_acc(&tr.h, dproj, grads.get_mut(w));
            dh.add_assign(&matmul_nt(dproj, store.value(w)));
        }
        let (dlabels, de) = cosine_rows_backward(&tr.labels, &tr.e, &dh);
        let c = cfg.n_categories;
        grads.get_mut(self.cat).add_assign(&dlabels.slice_rows(0..c));
        grads.get_mut(self.intent).add_assign(&dlabels.slice_rows(c..m));

        let gw = grads.get_mut(self.word);
        for (j, &id) in tr.ids.iter().enumerate() {
            for ((o, &a), &b) in gw.row_mut(id).iter_mut().zip(de.row(j)).zip(dx.row(j)) {
                *o += a + b;
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn path_backward<T: Scalar>(
        &self,
        store: &ParamStore<T>,
        path: usize,
        p: &PathTrace<T>,
        x: &Matrix<T>,
        ds: &[T],
        grads: &mut Gradients<T>,
        dx: &mut Matrix<T>,
        dg: &mut Matrix<T>,
    ) -> Result<()> {
        let ds = Matrix::from_vec(1, ds.len(), ds.to_vec())?;
        matmul_tn_acc(&p.z_d, &ds, grads.get_mut(self.out_w[path]));
        grads.get_mut(self.out_b[path]).add_assign(&ds);
        let mut dz = matmul_nt(&ds, store.value(self.out_w[path]));
        if let Some(mask) = &p.z_mask {
            dz = dz.hadamard(mask);
        }

        let len = x.rows();
        let mut dalpha = Matrix::zeros(len, x.cols());
        let mut dbeta = vec![T::zero(); len];
        for j in 0..len {
            dbeta[j] = dot(p.alpha.row(j), dz.as_slice());
            for (o, &v) in dalpha.row_mut(j).iter_mut().zip(dz.as_slice()) {
                *o = p.beta[j] * v;
            }
        }
        let mut du = vec![T::zero(); len];
        softmax_backward_slice(&p.beta, &dbeta, &mut du);
        for (j, &d) in du.iter().enumerate() {
            dg[(p.argmax[j], j)] += d;
        }

        let hw = self.highway[path];
        let mut da_h = Matrix::zeros(len, x.cols());
        let mut da_t = Matrix::zeros(len, x.cols());
        for i in 0..len * x.cols() {
            let da = dalpha.as_slice()[i];
            let t = p.t.as_slice()[i];
            let hd = p.h_d.as_slice()[i];
            let xi = x.as_slice()[i];
            dx.as_mut_slice()[i] += da * (T::one() - t);
            let dt = da * (hd - xi);
            da_t.as_mut_slice()[i] = dt * t * (T::one() - t);
            let mut dh = da * t;
            if let Some(mask) = &p.h_mask {
                dh *= mask.as_slice()[i];
            }
            if p.a_h.as_slice()[i] > T::zero() {
                da_h.as_mut_slice()[i] = dh;
            }
        }
        for (w, b, da) in [(hw.wh, hw.bh, &da_h), (hw.wt, hw.bt, &da_t)] {
            matmul_tn_acc(x, da, grads.get_mut(w));
            grads.get_mut(b).add_assign(&da.col_sums());
            dx.add_assign(&matmul_nt(da, store.value(w)));
        }
        Ok(())
    }
}
