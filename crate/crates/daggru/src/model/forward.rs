use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::config::{CombineVariant, ModelConfig, ModelKind};
use super::params::{init_params, validate_params, CombineWeights, GruWeights, ModelParams};
use super::ModelError;
use crate::corpus::{LabelId, LabelVocab, Sentence};
use crate::graph::{build_dags, EdgeTypeId, EdgeVocab, TEMPORAL_ID};
use crate::numeric::Gradients;
use crate::{Tape, Tensor, Var};

/// Whether a forward pass samples dropout masks.
pub enum PassMode<'r> {
    Eval,
    Train { rng: &'r mut ChaCha12Rng },
}

/// Tape handles for one direction's GRU weights.
#[derive(Debug, Clone, Copy)]
pub struct GruVars {
    pub w_r: Var,
    pub w_z: Var,
    pub w_h: Var,
    pub u_r: Var,
    pub u_z: Var,
    pub u_h: Var,
    pub b_r: Var,
    pub b_z: Var,
    pub b_h: Var,
}

#[derive(Debug, Clone)]
pub enum CombineVars {
    Shared { u_a: Var, v_e: Var },
    PerEdgeType { u_e: Vec<Var> },
}

#[derive(Debug, Clone)]
pub struct AttnVars {
    pub combine: CombineVars,
    pub w_a: Var,
}

/// Every parameter's tape handle for one forward pass. `ordered` matches
/// [`ModelParams::visit`] order exactly; gradient extraction depends on it.
#[derive(Debug, Clone)]
pub struct ParamVars {
    pub fwd: GruVars,
    pub bwd: GruVars,
    pub attn: Option<AttnVars>,
    pub w_out: Var,
    pub b_out: Var,
}

impl ParamVars {
    pub fn ordered(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for g in [&self.fwd, &self.bwd] {
            out.extend([g.w_r, g.w_z, g.w_h, g.u_r, g.u_z, g.u_h, g.b_r, g.b_z, g.b_h]);
        }
        if let Some(attn) = &self.attn {
            match &attn.combine {
                CombineVars::Shared { u_a, v_e } => out.extend([*u_a, *v_e]),
                CombineVars::PerEdgeType { u_e } => out.extend(u_e.iter().copied()),
            }
            out.push(attn.w_a);
        }
        out.extend([self.w_out, self.b_out]);
        out
    }
}

fn register_gru(tape: &mut Tape, g: &GruWeights) -> GruVars {
    GruVars {
        w_r: tape.leaf(g.w_r.clone()),
        w_z: tape.leaf(g.w_z.clone()),
        w_h: tape.leaf(g.w_h.clone()),
        u_r: tape.leaf(g.u_r.clone()),
        u_z: tape.leaf(g.u_z.clone()),
        u_h: tape.leaf(g.u_h.clone()),
        b_r: tape.leaf(g.b_r.clone()),
        b_z: tape.leaf(g.b_z.clone()),
        b_h: tape.leaf(g.b_h.clone()),
    }
}

/// Put every parameter on the tape as a leaf, in canonical order.
pub fn register_params(tape: &mut Tape, p: &ModelParams) -> ParamVars {
    let fwd = register_gru(tape, &p.fwd);
    let bwd = register_gru(tape, &p.bwd);
    let attn = p.attn.as_ref().map(|a| {
        let combine = match &a.combine {
            CombineWeights::Shared { u_a, v_e } => CombineVars::Shared {
                u_a: tape.leaf(u_a.clone()),
                v_e: tape.leaf(v_e.clone()),
            },
            CombineWeights::PerEdgeType { u_e } => CombineVars::PerEdgeType {
                u_e: u_e.iter().map(|t| tape.leaf(t.clone())).collect(),
            },
        };
        AttnVars {
            combine,
            w_a: tape.leaf(a.w_a.clone()),
        }
    });
    ParamVars {
        fwd,
        bwd,
        attn,
        w_out: tape.leaf(p.w_out.clone()),
        b_out: tape.leaf(p.b_out.clone()),
    }
}

/// Copy the gradient of every parameter out of a backward pass, in
/// canonical order.
pub fn ordered_grads(vars: &ParamVars, grads: &Gradients<f64>) -> Vec<Tensor> {
    vars.ordered().iter().map(|&v| grads.get(v).clone()).collect()
}

/// One gated recurrence step:
/// r = sigmoid(W_r x + U_r h + b_r), z likewise,
/// candidate = tanh(W_h x + r * (U_h h) + b_h),
/// h' = (1 - z) * h + z * candidate.
/// `ones` is a constant all-ones state used for (1 - z).
pub fn gru_cell(
    tape: &mut Tape,
    g: &GruVars,
    x: Var,
    h_prev: Var,
    ones: Var,
) -> Result<Var, ModelError> {
    let gate = |tape: &mut Tape, w: Var, u: Var, b: Var| -> Result<Var, ModelError> {
        let wx = tape.matmul(w, x)?;
        let uh = tape.matmul(u, h_prev)?;
        let s = tape.add(wx, uh)?;
        Ok(tape.add(s, b)?)
    };
    let r_pre = gate(tape, g.w_r, g.u_r, g.b_r)?;
    let r = tape.sigmoid(r_pre);
    let z_pre = gate(tape, g.w_z, g.u_z, g.b_z)?;
    let z = tape.sigmoid(z_pre);

    let wx = tape.matmul(g.w_h, x)?;
    let uh = tape.matmul(g.u_h, h_prev)?;
    let ruh = tape.mul(r, uh)?;
    let pre = tape.add(wx, ruh)?;
    let pre_b = tape.add(pre, g.b_h)?;
    let candidate = tape.tanh(pre_b);

    let one_minus_z = tape.sub(ones, z)?;
    let keep = tape.mul(one_minus_z, h_prev)?;
    let update = tape.mul(z, candidate)?;
    Ok(tape.add(keep, update)?)
}

/// Merge a token's incoming DAG states into one input state.
///
/// Every incoming `(state, edge_type)` pair is transformed to a row:
/// `tanh(U_a concat(state, v[edge_type]))` for the shared combine, or
/// `tanh(U_e[edge_type] state)` with per-edge weights. Then either the
/// attention-weighted sum (`alpha = softmax(tanh(row . w_a))`) or the
/// unweighted mean of the rows. Duplicate pairs get their own weights.
pub fn combine(
    tape: &mut Tape,
    attn: &AttnVars,
    variant: CombineVariant,
    incoming: &[(Var, EdgeTypeId)],
) -> Result<Var, ModelError> {
    Ok(combine_with_weights(tape, attn, variant, incoming)?.0)
}

/// Like [`combine`], but also returns the attention weight vector — one
/// entry per incoming pair — when the attention variant computed one
/// (`None` for the unweighted average).
pub fn combine_with_weights(
    tape: &mut Tape,
    attn: &AttnVars,
    variant: CombineVariant,
    incoming: &[(Var, EdgeTypeId)],
) -> Result<(Var, Option<Var>), ModelError> {
    if incoming.is_empty() {
        return Err(ModelError::EmptyCombine);
    }
    let mut rows = Vec::with_capacity(incoming.len());
    for &(state, et) in incoming {
        let pre = match &attn.combine {
            CombineVars::Shared { u_a, v_e } => {
                let edge_vec = tape.row(*v_e, et)?;
                let cat = tape.concat(state, edge_vec)?;
                tape.matmul(*u_a, cat)?
            }
            CombineVars::PerEdgeType { u_e } => {
                let u = u_e.get(et).copied().ok_or_else(|| {
                    ModelError::BadConfig(format!(
                        "edge type {et} outside the {} per-edge matrices",
                        u_e.len()
                    ))
                })?;
                tape.matmul(u, state)?
            }
        };
        rows.push(tape.tanh(pre));
    }

    match variant {
        CombineVariant::Average => {
            let mut acc = rows[0];
            for &r in &rows[1..] {
                acc = tape.add(acc, r)?;
            }
            Ok((tape.scale(acc, 1.0 / rows.len() as f64), None))
        }
        CombineVariant::Attention => {
            let mut scores: Option<Var> = None;
            for &r in &rows {
                let s = tape.dot(r, attn.w_a)?;
                scores = Some(match scores {
                    None => s,
                    Some(acc) => tape.concat(acc, s)?,
                });
            }
            let squashed = tape.tanh(scores.expect("non-empty"));
            let alpha = tape.softmax(squashed)?;
            let mut out: Option<Var> = None;
            for (i, &r) in rows.iter().enumerate() {
                let a_i = tape.select(alpha, i)?;
                let term = tape.scale_by(r, a_i)?;
                out = Some(match out {
                    None => term,
                    Some(acc) => tape.add(acc, term)?,
                });
            }
            Ok((out.expect("non-empty"), Some(alpha)))
        }
    }
}

/// Per-token logits plus the parameter handles of the pass.
pub struct ForwardPass {
    pub logits: Vec<Var>,
    pub params: ParamVars,
}

/// Summed cross-entropy over a sentence (trainer divides by batch tokens).
pub struct SentenceLoss {
    pub loss: Var,
    pub n_tokens: usize,
    pub params: ParamVars,
}

/// A trained (or initialized) model: config, vocabularies it was built
/// against, and the parameters.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub embedding_dim: usize,
    pub edge_vocab: EdgeVocab,
    pub labels: LabelVocab,
    pub params: ModelParams,
}

impl Model {
    /// Fresh model with seeded initialization.
    pub fn new(
        config: ModelConfig,
        embedding_dim: usize,
        edge_vocab: EdgeVocab,
        labels: LabelVocab,
        seed: u64,
    ) -> Result<Model, ModelError> {
        config.validate()?;
        if embedding_dim == 0 {
            return Err(ModelError::Unembedded);
        }
        let params = init_params(&config, embedding_dim, edge_vocab.len(), labels.len(), seed);
        Ok(Model {
            config,
            embedding_dim,
            edge_vocab,
            labels,
            params,
        })
    }

    /// Assemble from existing parts (checkpoint loading); validates shapes.
    pub fn from_parts(
        config: ModelConfig,
        embedding_dim: usize,
        edge_vocab: EdgeVocab,
        labels: LabelVocab,
        params: ModelParams,
    ) -> Result<Model, ModelError> {
        config.validate()?;
        if embedding_dim == 0 {
            return Err(ModelError::Unembedded);
        }
        validate_params(&params, &config, embedding_dim, edge_vocab.len(), labels.len())?;
        Ok(Model {
            config,
            embedding_dim,
            edge_vocab,
            labels,
            params,
        })
    }

    fn run_dag_direction(
        &self,
        tape: &mut Tape,
        gru: &GruVars,
        attn: &AttnVars,
        xs: &[Var],
        incoming: &[Vec<(usize, EdgeTypeId)>],
        order: impl Iterator<Item = usize>,
        zero_h: Var,
        ones: Var,
    ) -> Result<Vec<Var>, ModelError> {
        let mut states: Vec<Option<Var>> = vec![None; xs.len()];
        for t in order {
            // Direction-initial tokens have no incoming edges; they read a
            // synthetic temporal edge from the zero state so every token
            // goes through the same combine-then-recur path.
            let rows: Vec<(Var, EdgeTypeId)> = if incoming[t].is_empty() {
                vec![(zero_h, TEMPORAL_ID)]
            } else {
                incoming[t]
                    .iter()
                    .map(|&(src, et)| (states[src].expect("topological order"), et))
                    .collect()
            };
            let h_in = combine(tape, attn, self.config.combine, &rows)?;
            states[t] = Some(gru_cell(tape, gru, xs[t], h_in, ones)?);
        }
        Ok(states.into_iter().map(|s| s.expect("visited")).collect())
    }

    fn run_seq_direction(
        &self,
        tape: &mut Tape,
        gru: &GruVars,
        xs: &[Var],
        order: impl Iterator<Item = usize>,
        zero_h: Var,
        ones: Var,
    ) -> Result<Vec<Var>, ModelError> {
        let mut states: Vec<Option<Var>> = vec![None; xs.len()];
        let mut prev = zero_h;
        for t in order {
            let h = gru_cell(tape, gru, xs[t], prev, ones)?;
            states[t] = Some(h);
            prev = h;
        }
        Ok(states.into_iter().map(|s| s.expect("visited")).collect())
    }

    /// Run the model over one sentence, producing per-token logits.
    pub fn forward(
        &self,
        tape: &mut Tape,
        sentence: &Sentence,
        mode: PassMode,
    ) -> Result<ForwardPass, ModelError> {
        let n = sentence.tokens.len();
        for tok in &sentence.tokens {
            if tok.embedding.len() != self.embedding_dim {
                return Err(ModelError::EmbeddingWidth {
                    expected: self.embedding_dim,
                    got: tok.embedding.len(),
                });
            }
        }
        let pv = register_params(tape, &self.params);
        let xs: Vec<Var> = sentence
            .tokens
            .iter()
            .map(|t| tape.leaf(Tensor::vector(t.embedding.clone())))
            .collect();
        let h = self.config.hidden;
        let zero_h = tape.leaf(Tensor::zeros(&[h]));
        let ones = tape.leaf(Tensor::filled(&[h], 1.0));

        let (h_fwd, h_bwd) = match self.config.kind {
            ModelKind::DagGru => {
                let dag = build_dags(sentence, &self.edge_vocab);
                let attn = pv.attn.as_ref().expect("DAG model has combine weights");
                let f = self.run_dag_direction(
                    tape, &pv.fwd, attn, &xs, &dag.forward, 0..n, zero_h, ones,
                )?;
                let b = self.run_dag_direction(
                    tape, &pv.bwd, attn, &xs, &dag.backward, (0..n).rev(), zero_h, ones,
                )?;
                (f, b)
            }
            ModelKind::PlainBigru => {
                let f = self.run_seq_direction(tape, &pv.fwd, &xs, 0..n, zero_h, ones)?;
                let b = self.run_seq_direction(tape, &pv.bwd, &xs, (0..n).rev(), zero_h, ones)?;
                (f, b)
            }
        };

        let mut logits = Vec::with_capacity(n);
        let mut mode = mode;
        for t in 0..n {
            let both = tape.concat(h_fwd[t], h_bwd[t])?;
            let rep = match self.config.kind {
                ModelKind::DagGru => both,
                ModelKind::PlainBigru => {
                    // Sentence-final context of each direction rides along.
                    let ends = tape.concat(h_fwd[n - 1], h_bwd[0])?;
                    tape.concat(both, ends)?
                }
            };
            let rep = match (&mut mode, self.config.dropout) {
                (PassMode::Train { rng }, p) if p > 0.0 => {
                    let width = self.config.representation_width();
                    let keep = 1.0 - p;
                    let mask: Vec<f64> = (0..width)
                        .map(|_| if rng.random_bool(keep) { 1.0 / keep } else { 0.0 })
                        .collect();
                    let mask = tape.leaf(Tensor::vector(mask));
                    tape.mul(rep, mask)?
                }
                _ => rep,
            };
            let wr = tape.matmul(pv.w_out, rep)?;
            logits.push(tape.add(wr, pv.b_out)?);
        }
        Ok(ForwardPass { logits, params: pv })
    }

    /// Summed token cross-entropy against model-space gold label ids.
    pub fn sentence_loss(
        &self,
        tape: &mut Tape,
        sentence: &Sentence,
        golds: &[LabelId],
        mode: PassMode,
    ) -> Result<SentenceLoss, ModelError> {
        if golds.len() != sentence.tokens.len() {
            return Err(ModelError::BadConfig(format!(
                "{} gold labels for {} tokens",
                golds.len(),
                sentence.tokens.len()
            )));
        }
        for &g in golds {
            if g >= self.labels.len() {
                return Err(ModelError::LabelOutOfRange {
                    id: g,
                    n_labels: self.labels.len(),
                });
            }
        }
        let pass = self.forward(tape, sentence, mode)?;
        let mut total: Option<Var> = None;
        for (logit, &gold) in pass.logits.iter().zip(golds) {
            let ce = tape.cross_entropy(*logit, gold)?;
            total = Some(match total {
                None => ce,
                Some(acc) => tape.add(acc, ce)?,
            });
        }
        Ok(SentenceLoss {
            loss: total.expect("validated non-empty sentence"),
            n_tokens: sentence.tokens.len(),
            params: pass.params,
        })
    }

    /// Evaluation-mode argmax labels; ties resolve to the lowest label id,
    /// so an all-tied token predicts NIL.
    pub fn predict(&self, sentence: &Sentence) -> Result<Vec<LabelId>, ModelError> {
        let mut tape = Tape::new();
        let pass = self.forward(&mut tape, sentence, PassMode::Eval)?;
        Ok(pass
            .logits
            .iter()
            .map(|&l| {
                let data = tape.value(l).data();
                let mut best = 0usize;
                for (i, &v) in data.iter().enumerate() {
                    if v > data[best] {
                        best = i;
                    }
                }
                best
            })
            .collect())
    }
}
