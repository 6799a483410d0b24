//! Tiny attention-based recurrent encoder-decoder.
//!
//! A gated recurrent encoder reads the language-tagged source; a gated
//! recurrent decoder, initialized from the final encoder state, attends over
//! all encoder states with dot-product attention and predicts the next target
//! token from its state and the attention context.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::autodiff::{AutodiffError, Tape, Tensor, Var};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const SPECIAL_TOKENS: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

const MASKED: f64 = -1e9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("empty batch")]
    EmptyBatch,
    #[error("example has an empty source or a target shorter than two tokens")]
    EmptySequence,
    #[error("token id {id} outside vocabulary of {size}")]
    IdOutOfRange { id: usize, size: usize },
    #[error("parameter vector has {got} values, architecture needs {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("invalid vocabulary: {0}")]
    BadVocab(String),
}

/// Language tag token for `code`, prepended to every source sentence.
pub fn language_tag(code: &str) -> String {
    format!("<2{code}>")
}

/// Token/id bijection with fixed special ids and language-tag tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    languages: Vec<String>,
}

impl Default for Vocab {
    fn default() -> Self {
        let tokens: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab {
            tokens,
            index,
            languages: Vec::new(),
        }
    }
}

impl Vocab {
    pub fn new() -> Self {
        Vocab::default()
    }

    /// Rebuilds a vocabulary from its id-ordered token list.
    pub fn from_tokens(tokens: Vec<String>, languages: Vec<String>) -> Result<Self, ModelError> {
        if tokens.len() < SPECIAL_TOKENS.len()
            || tokens.iter().zip(SPECIAL_TOKENS).any(|(a, b)| a != b)
        {
            return Err(ModelError::BadVocab("special tokens missing".into()));
        }
        let mut index = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(ModelError::BadVocab(format!("duplicate token `{t}`")));
            }
        }
        for l in &languages {
            if !index.contains_key(&language_tag(l)) {
                return Err(ModelError::BadVocab(format!("missing tag for `{l}`")));
            }
        }
        Ok(Vocab {
            tokens,
            index,
            languages,
        })
    }

    /// Adds `token` if new; returns its id.
    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn add_language(&mut self, code: &str) -> usize {
        if !self.languages.iter().any(|l| l == code) {
            self.languages.push(code.to_string());
        }
        self.insert(&language_tag(code))
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map_or(SPECIAL_TOKENS[UNK], String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_string()).collect()
    }
}

/// One training pair in id space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub language: String,
    /// Language tag first, EOS last.
    pub source: Vec<usize>,
    /// BOS first, EOS last.
    pub target: Vec<usize>,
}

impl Example {
    /// Wraps raw token sequences with the language tag, BOS and EOS.
    pub fn encode<S: AsRef<str>>(
        language: &str,
        source: &[S],
        target: &[S],
        src_vocab: &Vocab,
        tgt_vocab: &Vocab,
    ) -> Self {
        let mut s = Vec::with_capacity(source.len() + 2);
        s.push(src_vocab.id(&language_tag(language)));
        s.extend(src_vocab.encode(source));
        s.push(EOS);
        let mut t = Vec::with_capacity(target.len() + 2);
        t.push(BOS);
        t.extend(tgt_vocab.encode(target));
        t.push(EOS);
        Example {
            language: language.to_string(),
            source: s,
            target: t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Embedding,
    Weight,
    Zero,
}

/// A named slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub shape: [usize; 2],
    pub offset: usize,
    pub init: Init,
}

impl Block {
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

const GATES: [&str; 3] = ["z", "r", "n"];

/// The shape registry of the encoder-decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seq2Seq {
    pub config: ModelConfig,
    pub blocks: Vec<Block>,
    index: BTreeMap<String, usize>,
}

/// Parameter handles on a tape, in registry order.
struct Bound {
    vars: Vec<Var>,
}

impl Seq2Seq {
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        let ModelConfig {
            src_vocab,
            tgt_vocab,
            embed_dim: e,
            hidden_dim: h,
        } = config;
        if [src_vocab, tgt_vocab, e, h].contains(&0) {
            return Err(ModelError::BadVocab("dimensions must be at least 1".into()));
        }
        let mut spec: Vec<(String, [usize; 2], Init)> = vec![
            ("src_embed".into(), [src_vocab, e], Init::Embedding),
            ("tgt_embed".into(), [tgt_vocab, e], Init::Embedding),
        ];
        for side in ["enc", "dec"] {
            for g in GATES {
                spec.push((format!("{side}.w{g}"), [e, h], Init::Weight));
            }
            for g in GATES {
                spec.push((format!("{side}.u{g}"), [h, h], Init::Weight));
            }
            for g in GATES {
                spec.push((format!("{side}.b{g}"), [1, h], Init::Zero));
            }
        }
        spec.push(("out.state".into(), [h, tgt_vocab], Init::Weight));
        spec.push(("out.context".into(), [h, tgt_vocab], Init::Weight));
        spec.push(("out.bias".into(), [1, tgt_vocab], Init::Zero));
        Ok(Self::from_registry(config, spec))
    }

    fn from_registry(config: ModelConfig, spec: Vec<(String, [usize; 2], Init)>) -> Self {
        let mut blocks = Vec::with_capacity(spec.len());
        let mut offset = 0;
        for (name, shape, init) in spec {
            let b = Block {
                name,
                shape,
                offset,
                init,
            };
            offset += b.len();
            blocks.push(b);
        }
        let index = blocks.iter().enumerate().map(|(i, b)| (b.name.clone(), i)).collect();
        Seq2Seq {
            config,
            blocks,
            index,
        }
    }

    pub fn num_params(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.index.get(name).map(|&i| &self.blocks[i])
    }

    /// Seeded initialization: embeddings uniform in `[-0.1, 0.1]`, weights
    /// uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.num_params());
        for b in &self.blocks {
            let s = match b.init {
                Init::Embedding => 0.1,
                Init::Weight => 1.0 / libm::sqrt(b.shape[0] as f64),
                Init::Zero => 0.0,
            };
            for _ in 0..b.len() {
                out.push(if s == 0.0 { 0.0 } else { rng.gen_range(-s..=s) });
            }
        }
        out
    }

    fn check_len(&self, params: &[f64]) -> Result<(), ModelError> {
        if params.len() != self.num_params() {
            return Err(ModelError::ParamLength {
                expected: self.num_params(),
                got: params.len(),
            });
        }
        Ok(())
    }

    fn bind(&self, tape: &mut Tape, params: &[f64], trainable: bool) -> Bound {
        let vars = self
            .blocks
            .iter()
            .map(|b| {
                let t = Tensor::matrix(b.shape[0], b.shape[1], params[b.range()].to_vec());
                if trainable {
                    tape.leaf(t)
                } else {
                    tape.constant(t)
                }
            })
            .collect();
        Bound { vars }
    }

    fn v(&self, bound: &Bound, name: &str) -> Var {
        bound.vars[self.index[name]]
    }

    fn gru(&self, tape: &mut Tape, p: &Bound, side: &str, x: Var, h: Var) -> Result<Var, AutodiffError> {
        let gate = |tape: &mut Tape, g: &str, hidden: Var| -> Result<Var, AutodiffError> {
            let a = tape.matmul(x, self.v(p, &format!("{side}.w{g}")))?;
            let b = tape.matmul(hidden, self.v(p, &format!("{side}.u{g}")))?;
            let s = tape.add(a, b)?;
            tape.add_bias(s, self.v(p, &format!("{side}.b{g}")))
        };
        let z = gate(tape, "z", h)?;
        let z = tape.sigmoid(z)?;
        let r = gate(tape, "r", h)?;
        let r = tape.sigmoid(r)?;
        let xn = tape.matmul(x, self.v(p, &format!("{side}.wn")))?;
        let hn = tape.matmul(h, self.v(p, &format!("{side}.un")))?;
        let rh = tape.mul(r, hn)?;
        let n = tape.add(xn, rh)?;
        let n = tape.add_bias(n, self.v(p, &format!("{side}.bn")))?;
        let n = tape.tanh(n)?;
        // h' = (1 - z) * n + z * h = n + z * (h - n)
        let d = tape.sub(h, n)?;
        let zd = tape.mul(z, d)?;
        tape.add(n, zd)
    }

    fn check_ids(&self, batch: &[&Example]) -> Result<(), ModelError> {
        for ex in batch {
            if ex.source.is_empty() || ex.target.len() < 2 {
                return Err(ModelError::EmptySequence);
            }
            for &id in &ex.source {
                if id >= self.config.src_vocab {
                    return Err(ModelError::IdOutOfRange {
                        id,
                        size: self.config.src_vocab,
                    });
                }
            }
            for &id in &ex.target {
                if id >= self.config.tgt_vocab {
                    return Err(ModelError::IdOutOfRange {
                        id,
                        size: self.config.tgt_vocab,
                    });
                }
            }
        }
        Ok(())
    }

    /// Runs the encoder; returns the final state, the stacked states
    /// (row `t * batch + b`) and the additive attention mask.
    fn encode(&self, tape: &mut Tape, p: &Bound, sources: &[&[usize]]) -> Result<(Var, Var, Var), ModelError> {
        let bsz = sources.len();
        let hdim = self.config.hidden_dim;
        let steps = sources.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut h = tape.constant(Tensor::zeros(&[bsz, hdim]));
        let mut states = Vec::with_capacity(steps);
        let src_embed = self.v(p, "src_embed");
        for t in 0..steps {
            let ids: Vec<usize> = sources.iter().map(|s| s.get(t).copied().unwrap_or(PAD)).collect();
            let x = tape.embedding(src_embed, &ids)?;
            let next = self.gru(tape, p, "enc", x, h)?;
            if sources.iter().all(|s| t < s.len()) {
                h = next;
            } else {
                let mut mask = vec![0.0; bsz * hdim];
                for (b, s) in sources.iter().enumerate() {
                    if t < s.len() {
                        mask[b * hdim..(b + 1) * hdim].fill(1.0);
                    }
                }
                let m = tape.constant(Tensor::matrix(bsz, hdim, mask));
                let d = tape.sub(next, h)?;
                let md = tape.mul(m, d)?;
                h = tape.add(h, md)?;
            }
            states.push(h);
        }
        let memory = tape.concat_rows(&states)?;
        let cols = steps * bsz;
        let mut mask = vec![MASKED; bsz * cols];
        for (b, s) in sources.iter().enumerate() {
            for t in 0..s.len() {
                mask[b * cols + t * bsz + b] = 0.0;
            }
        }
        let mask = tape.constant(Tensor::matrix(bsz, cols, mask));
        Ok((h, memory, mask))
    }

    /// One decoder step from `prev` token ids; returns logits and the new state.
    fn decode_step(
        &self,
        tape: &mut Tape,
        p: &Bound,
        prev: &[usize],
        h: Var,
        memory: Var,
        mask: Var,
    ) -> Result<(Var, Var), AutodiffError> {
        let x = tape.embedding(self.v(p, "tgt_embed"), prev)?;
        let h = self.gru(tape, p, "dec", x, h)?;
        let scores = tape.matmul_t(h, memory)?;
        let scores = tape.add(scores, mask)?;
        let attn = tape.softmax_rows(scores)?;
        let ctx = tape.matmul(attn, memory)?;
        let a = tape.matmul(h, self.v(p, "out.state"))?;
        let c = tape.matmul(ctx, self.v(p, "out.context"))?;
        let logits = tape.add(a, c)?;
        let logits = tape.add_bias(logits, self.v(p, "out.bias"))?;
        Ok((logits, h))
    }

    /// Teacher-forced mean cross-entropy over all non-PAD target positions,
    /// recorded on `tape` with parameter handles `params` in registry order.
    pub fn loss_on(&self, tape: &mut Tape, params: &[Var], batch: &[&Example]) -> Result<Var, ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        self.check_ids(batch)?;
        let p = Bound {
            vars: params.to_vec(),
        };
        let sources: Vec<&[usize]> = batch.iter().map(|e| e.source.as_slice()).collect();
        let (mut h, memory, mask) = self.encode(tape, &p, &sources)?;
        let steps = batch.iter().map(|e| e.target.len() - 1).max().unwrap_or(0);
        let mut all_logits = Vec::with_capacity(steps);
        let mut gold = Vec::with_capacity(steps * batch.len());
        for s in 0..steps {
            let prev: Vec<usize> = batch
                .iter()
                .map(|e| if s + 1 < e.target.len() { e.target[s] } else { PAD })
                .collect();
            let (logits, next) = self.decode_step(tape, &p, &prev, h, memory, mask)?;
            h = next;
            all_logits.push(logits);
            gold.extend(batch.iter().map(|e| e.target.get(s + 1).copied().unwrap_or(PAD)));
        }
        let stacked = tape.concat_rows(&all_logits)?;
        Ok(tape.cross_entropy(stacked, &gold, Some(PAD))?)
    }

    /// Records the loss on a fresh tape. Returns the tape, the loss handle
    /// and the parameter handles.
    pub fn loss_tape(&self, params: &[f64], batch: &[&Example]) -> Result<(Tape, Var, Vec<Var>), ModelError> {
        self.check_len(params)?;
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, params, true);
        let loss = self.loss_on(&mut tape, &p.vars, batch)?;
        Ok((tape, loss, p.vars))
    }

    /// Parameter blocks as tensors, in registry order.
    pub fn block_tensors(&self, params: &[f64]) -> Vec<Tensor> {
        self.blocks
            .iter()
            .map(|b| Tensor::matrix(b.shape[0], b.shape[1], params[b.range()].to_vec()))
            .collect()
    }

    pub fn loss(&self, params: &[f64], batch: &[&Example]) -> Result<f64, ModelError> {
        let (tape, loss, _) = self.loss_tape(params, batch)?;
        Ok(tape.value(loss).item())
    }

    /// Loss and its gradient as a flat vector in registry order.
    pub fn loss_and_grad(&self, params: &[f64], batch: &[&Example]) -> Result<(f64, Vec<f64>), ModelError> {
        let (tape, loss, vars) = self.loss_tape(params, batch)?;
        let grads = tape.backward(loss)?;
        let mut flat = vec![0.0; params.len()];
        for (b, v) in self.blocks.iter().zip(&vars) {
            if let Some(g) = grads.raw(*v) {
                flat[b.range()].copy_from_slice(g);
            }
        }
        Ok((tape.value(loss).item(), flat))
    }

    /// Greedy argmax decoding from BOS until EOS or `max_len` tokens. The
    /// output excludes BOS and EOS; ties go to the lowest token id.
    pub fn generate_greedy(&self, params: &[f64], source: &[usize], max_len: usize) -> Result<Vec<usize>, ModelError> {
        self.check_len(params)?;
        if source.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        if let Some(&id) = source.iter().find(|&&id| id >= self.config.src_vocab) {
            return Err(ModelError::IdOutOfRange {
                id,
                size: self.config.src_vocab,
            });
        }
        let mut tape = Tape::new();
        let p = self.bind(&mut tape, params, false);
        let (mut h, memory, mask) = self.encode(&mut tape, &p, &[source])?;
        let mut out = Vec::new();
        let mut prev = BOS;
        while out.len() < max_len {
            let (logits, next) = self.decode_step(&mut tape, &p, &[prev], h, memory, mask)?;
            h = next;
            let row = tape.value(logits).data();
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            if best == EOS {
                break;
            }
            out.push(best);
            prev = best;
        }
        Ok(out)
    }
}

/// An architecture plus its parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub arch: Seq2Seq,
    pub values: Vec<f64>,
}

impl ModelParams {
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        let arch = Seq2Seq::new(config)?;
        let values = arch.init_params(seed);
        Ok(ModelParams { arch, values })
    }

    pub fn with_values(arch: Seq2Seq, values: Vec<f64>) -> Result<Self, ModelError> {
        arch.check_len(&values)?;
        Ok(ModelParams { arch, values })
    }

    pub fn block_values(&self, name: &str) -> Option<&[f64]> {
        self.arch.block(name).map(|b| &self.values[b.range()])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::grad_check;

    fn tiny() -> Seq2Seq {
        Seq2Seq::new(ModelConfig {
            src_vocab: 9,
            tgt_vocab: 8,
            embed_dim: 3,
            hidden_dim: 4,
        })
        .unwrap()
    }

    fn ex(src: &[usize], tgt: &[usize]) -> Example {
        Example {
            language: "xx".into(),
            source: src.to_vec(),
            target: tgt.to_vec(),
        }
    }

    #[test]
    fn vocab_specials_and_tags() {
        let mut v = Vocab::new();
        assert_eq!(v.id("<pad>"), PAD);
        assert_eq!(v.id("</s>"), EOS);
        let tag = v.add_language("ko");
        assert_eq!(v.token(tag), "<2ko>");
        assert_eq!(v.id("never-seen"), UNK);
        let again = Vocab::from_tokens(v.tokens().to_vec(), v.languages().to_vec()).unwrap();
        assert_eq!(again, v);
        assert!(Vocab::from_tokens(vec!["a".into()], vec![]).is_err());
    }

    #[test]
    fn init_is_seeded_and_registry_consistent() {
        let m = tiny();
        assert_eq!(m.init_params(1), m.init_params(1));
        assert_ne!(m.init_params(1), m.init_params(2));
        let total: usize = m.blocks.iter().map(Block::len).sum();
        assert_eq!(total, m.init_params(0).len());
        let p = m.init_params(3);
        let emb = &p[m.block("src_embed").unwrap().range()];
        assert!(emb.iter().all(|x| x.abs() <= 0.1));
        let w = &p[m.block("enc.uz").unwrap().range()];
        assert!(w.iter().all(|x| x.abs() <= 0.5));
    }

    #[test]
    fn uniform_logits_give_log_vocab_loss() {
        let m = tiny();
        let mut p = m.init_params(0);
        for name in ["out.state", "out.context", "out.bias"] {
            let r = m.block(name).unwrap().range();
            p[r].fill(0.0);
        }
        let a = ex(&[4, 5, EOS], &[BOS, 4, 5, EOS]);
        let loss = m.loss(&p, &[&a]).unwrap();
        assert!((loss - libm::log(8.0)).abs() < 1e-12);
    }

    #[test]
    fn loss_mean_and_order_invariance() {
        let m = tiny();
        let p = m.init_params(4);
        let a = ex(&[4, 5, EOS], &[BOS, 4, 5, 6, EOS]);
        let b = ex(&[6, EOS], &[BOS, 7, EOS]);
        let one = m.loss(&p, &[&a]).unwrap();
        let twice = m.loss(&p, &[&a, &a]).unwrap();
        assert!((one - twice).abs() < 1e-12);
        let ab = m.loss(&p, &[&a, &b]).unwrap();
        let ba = m.loss(&p, &[&b, &a]).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert_eq!(m.loss(&p, &[]), Err(ModelError::EmptyBatch));
        assert!(matches!(
            m.loss(&p, &[&ex(&[40], &[BOS, EOS])]),
            Err(ModelError::IdOutOfRange { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences_per_block() {
        let m = tiny();
        let p = m.init_params(5);
        let batch = [ex(&[4, 5, 6, EOS], &[BOS, 3, 4, EOS]), ex(&[7, EOS], &[BOS, 5, 6, 7, EOS])];
        let refs: Vec<&Example> = batch.iter().collect();
        let err = grad_check(
            |tape, vars| {
                m.loss_on(tape, vars, &refs).map_err(|e| match e {
                    ModelError::Autodiff(a) => a,
                    other => panic!("{other}"),
                })
            },
            &m.block_tensors(&p),
        )
        .unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn greedy_tie_breaks_to_lowest_id_and_respects_max_len() {
        let m = tiny();
        let mut p = m.init_params(0);
        for name in ["out.state", "out.context", "out.bias"] {
            let r = m.block(name).unwrap().range();
            p[r].fill(0.0);
        }
        // all logits equal: argmax is PAD (id 0), never EOS
        assert_eq!(m.generate_greedy(&p, &[4, EOS], 1).unwrap(), vec![PAD]);
        assert_eq!(m.generate_greedy(&p, &[4, EOS], 3).unwrap(), vec![PAD; 3]);

        let bias = m.block("out.bias").unwrap().range();
        p[bias.start + EOS] = 1.0;
        assert!(m.generate_greedy(&p, &[4, EOS], 5).unwrap().is_empty());
    }
}
