use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, ModelKind};
use super::ModelError;
use crate::Tensor;

/// One direction's GRU weights: reset gate r, update gate z, candidate h.
/// `w_*` act on the k-wide token embedding, `u_*` on the h-wide state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruWeights {
    pub w_r: Tensor,
    pub w_z: Tensor,
    pub w_h: Tensor,
    pub u_r: Tensor,
    pub u_z: Tensor,
    pub u_h: Tensor,
    pub b_r: Tensor,
    pub b_z: Tensor,
    pub b_h: Tensor,
}

/// The transform applied to each incoming state before scoring/averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CombineWeights {
    /// One shared transform over `concat(state, edge_vector)` plus a
    /// learned vector per edge type.
    Shared { u_a: Tensor, v_e: Tensor },
    /// One transform matrix per edge type, no edge vectors.
    PerEdgeType { u_e: Vec<Tensor> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionWeights {
    pub combine: CombineWeights,
    /// Scoring vector; unused (zero-gradient) under the averaging variant
    /// but kept so the two variants share a parameter inventory.
    pub w_a: Tensor,
}

/// All trainable tensors. The combine weights are shared by the forward
/// and backward directions, like the classifier; only the GRU weights are
/// per-direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub fwd: GruWeights,
    pub bwd: GruWeights,
    /// `None` for the plain sequential baseline.
    pub attn: Option<AttentionWeights>,
    pub w_out: Tensor,
    pub b_out: Tensor,
}

impl GruWeights {
    fn visit<'a>(&'a self, prefix: &str, f: &mut impl FnMut(String, &'a Tensor)) {
        f(format!("{prefix}.w_r"), &self.w_r);
        f(format!("{prefix}.w_z"), &self.w_z);
        f(format!("{prefix}.w_h"), &self.w_h);
        f(format!("{prefix}.u_r"), &self.u_r);
        f(format!("{prefix}.u_z"), &self.u_z);
        f(format!("{prefix}.u_h"), &self.u_h);
        f(format!("{prefix}.b_r"), &self.b_r);
        f(format!("{prefix}.b_z"), &self.b_z);
        f(format!("{prefix}.b_h"), &self.b_h);
    }

    fn visit_mut(&mut self, prefix: &str, f: &mut impl FnMut(String, &mut Tensor)) {
        f(format!("{prefix}.w_r"), &mut self.w_r);
        f(format!("{prefix}.w_z"), &mut self.w_z);
        f(format!("{prefix}.w_h"), &mut self.w_h);
        f(format!("{prefix}.u_r"), &mut self.u_r);
        f(format!("{prefix}.u_z"), &mut self.u_z);
        f(format!("{prefix}.u_h"), &mut self.u_h);
        f(format!("{prefix}.b_r"), &mut self.b_r);
        f(format!("{prefix}.b_z"), &mut self.b_z);
        f(format!("{prefix}.b_h"), &mut self.b_h);
    }
}

impl ModelParams {
    /// Visit every tensor in canonical order. Gradient extraction, Adam
    /// state, and parameter registration all rely on this order being
    /// identical everywhere.
    pub fn visit<'a>(&'a self, mut f: impl FnMut(String, &'a Tensor)) {
        self.fwd.visit("fwd", &mut f);
        self.bwd.visit("bwd", &mut f);
        if let Some(attn) = &self.attn {
            match &attn.combine {
                CombineWeights::Shared { u_a, v_e } => {
                    f("attn.u_a".into(), u_a);
                    f("attn.v_e".into(), v_e);
                }
                CombineWeights::PerEdgeType { u_e } => {
                    for (i, t) in u_e.iter().enumerate() {
                        f(format!("attn.u_e[{i}]"), t);
                    }
                }
            }
            f("attn.w_a".into(), &attn.w_a);
        }
        f("w_out".into(), &self.w_out);
        f("b_out".into(), &self.b_out);
    }

    /// Mutable counterpart of [`visit`](Self::visit), same order.
    pub fn visit_mut(&mut self, mut f: impl FnMut(String, &mut Tensor)) {
        self.fwd.visit_mut("fwd", &mut f);
        self.bwd.visit_mut("bwd", &mut f);
        if let Some(attn) = &mut self.attn {
            match &mut attn.combine {
                CombineWeights::Shared { u_a, v_e } => {
                    f("attn.u_a".into(), u_a);
                    f("attn.v_e".into(), v_e);
                }
                CombineWeights::PerEdgeType { u_e } => {
                    for (i, t) in u_e.iter_mut().enumerate() {
                        f(format!("attn.u_e[{i}]"), t);
                    }
                }
            }
            f("attn.w_a".into(), &mut attn.w_a);
        }
        f("w_out".into(), &mut self.w_out);
        f("b_out".into(), &mut self.b_out);
    }

    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        self.visit(|name, t| out.push((name, t)));
        out
    }

    pub fn n_tensors(&self) -> usize {
        let mut n = 0;
        self.visit(|_, _| n += 1);
        n
    }

    pub fn n_scalars(&self) -> usize {
        let mut n = 0;
        self.visit(|_, t| n += t.len());
        n
    }

    /// Zero tensors shaped like the parameters, for gradient accumulators.
    pub fn zeros_like(&self) -> Vec<Tensor> {
        let mut out = Vec::new();
        self.visit(|_, t| out.push(Tensor::zeros(t.shape())));
        out
    }

    /// Overwrite every parameter from a canonical-order slice (shapes must
    /// match pairwise; the inventory length must match exactly).
    pub fn assign_ordered(&mut self, tensors: &[Tensor]) -> Result<(), ModelError> {
        if tensors.len() != self.n_tensors() {
            return Err(ModelError::BadConfig(format!(
                "assigning {} tensors onto {} parameters",
                tensors.len(),
                self.n_tensors()
            )));
        }
        let mut mismatch: Option<String> = None;
        let mut i = 0;
        self.visit_mut(|name, t| {
            if t.shape() != tensors[i].shape() && mismatch.is_none() {
                mismatch = Some(name);
            } else {
                *t = tensors[i].clone();
            }
            i += 1;
        });
        match mismatch {
            Some(name) => Err(ModelError::BadConfig(format!(
                "shape mismatch assigning parameter {name}"
            ))),
            None => Ok(()),
        }
    }
}

fn glorot(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> Tensor {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-limit..limit))
        .collect();
    Tensor::matrix(rows, cols, data).expect("length matches")
}

fn gru_weights(rng: &mut ChaCha12Rng, hidden: usize, k: usize) -> GruWeights {
    GruWeights {
        w_r: glorot(rng, hidden, k),
        w_z: glorot(rng, hidden, k),
        w_h: glorot(rng, hidden, k),
        u_r: glorot(rng, hidden, hidden),
        u_z: glorot(rng, hidden, hidden),
        u_h: glorot(rng, hidden, hidden),
        b_r: Tensor::zeros(&[hidden]),
        b_z: Tensor::zeros(&[hidden]),
        b_h: Tensor::zeros(&[hidden]),
    }
}

/// Seeded initialization: Glorot-uniform matrices (fan-in + fan-out
/// bounds), zero biases, small-uniform edge vectors. The draw order is the
/// canonical visit order, so identical (config, sizes, seed) give identical
/// parameters.
pub fn init_params(
    config: &ModelConfig,
    k: usize,
    n_edge_types: usize,
    n_labels: usize,
    seed: u64,
) -> ModelParams {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let h = config.hidden;
    let fwd = gru_weights(&mut rng, h, k);
    let bwd = gru_weights(&mut rng, h, k);
    let attn = match config.kind {
        ModelKind::PlainBigru => None,
        ModelKind::DagGru => {
            let combine = if config.per_edge_weights {
                CombineWeights::PerEdgeType {
                    u_e: (0..n_edge_types).map(|_| glorot(&mut rng, h, h)).collect(),
                }
            } else {
                let u_a = glorot(&mut rng, h, h + config.edge_dim);
                let v_e = {
                    let data = (0..n_edge_types * config.edge_dim)
                        .map(|_| rng.random_range(-0.1..0.1))
                        .collect();
                    Tensor::matrix(n_edge_types, config.edge_dim, data).expect("length matches")
                };
                CombineWeights::Shared { u_a, v_e }
            };
            let w_a = {
                let limit = (6.0 / (h + 1) as f64).sqrt();
                Tensor::vector((0..h).map(|_| rng.random_range(-limit..limit)).collect())
            };
            Some(AttentionWeights { combine, w_a })
        }
    };
    let rep = config.representation_width();
    ModelParams {
        fwd,
        bwd,
        attn,
        w_out: glorot(&mut rng, n_labels, rep),
        b_out: Tensor::zeros(&[n_labels]),
    }
}

fn check_shape(name: &str, t: &Tensor, want: &[usize]) -> Result<(), ModelError> {
    if t.shape() != want {
        return Err(ModelError::Checkpoint(format!(
            "parameter {name} has shape [{}], wants [{}]",
            t.fmt_shape(),
            want.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
        )));
    }
    if !t.all_finite() {
        return Err(ModelError::Checkpoint(format!(
            "parameter {name} contains non-finite values"
        )));
    }
    Ok(())
}

/// Validate every tensor's shape against (config, k, vocabulary sizes);
/// used after loading a checkpoint.
pub fn validate_params(
    params: &ModelParams,
    config: &ModelConfig,
    k: usize,
    n_edge_types: usize,
    n_labels: usize,
) -> Result<(), ModelError> {
    let h = config.hidden;
    for (dir, g) in [("fwd", &params.fwd), ("bwd", &params.bwd)] {
        for (n, t) in [("w_r", &g.w_r), ("w_z", &g.w_z), ("w_h", &g.w_h)] {
            check_shape(&format!("{dir}.{n}"), t, &[h, k])?;
        }
        for (n, t) in [("u_r", &g.u_r), ("u_z", &g.u_z), ("u_h", &g.u_h)] {
            check_shape(&format!("{dir}.{n}"), t, &[h, h])?;
        }
        for (n, t) in [("b_r", &g.b_r), ("b_z", &g.b_z), ("b_h", &g.b_h)] {
            check_shape(&format!("{dir}.{n}"), t, &[h])?;
        }
    }
    match (config.kind, &params.attn) {
        (ModelKind::PlainBigru, None) => {}
        (ModelKind::PlainBigru, Some(_)) => {
            return Err(ModelError::Checkpoint(
                "plain baseline must not carry combine weights".into(),
            ))
        }
        (ModelKind::DagGru, None) => {
            return Err(ModelError::Checkpoint("missing combine weights".into()))
        }
        (ModelKind::DagGru, Some(attn)) => {
            match (&attn.combine, config.per_edge_weights) {
                (CombineWeights::Shared { u_a, v_e }, false) => {
                    check_shape("attn.u_a", u_a, &[h, h + config.edge_dim])?;
                    check_shape("attn.v_e", v_e, &[n_edge_types, config.edge_dim])?;
                }
                (CombineWeights::PerEdgeType { u_e }, true) => {
                    if u_e.len() != n_edge_types {
                        return Err(ModelError::Checkpoint(format!(
                            "{} per-edge matrices for {} edge types",
                            u_e.len(),
                            n_edge_types
                        )));
                    }
                    for (i, t) in u_e.iter().enumerate() {
                        check_shape(&format!("attn.u_e[{i}]"), t, &[h, h])?;
                    }
                }
                _ => {
                    return Err(ModelError::Checkpoint(
                        "combine weight kind disagrees with per_edge_weights".into(),
                    ))
                }
            }
            check_shape("attn.w_a", &attn.w_a, &[h])?;
        }
    }
    check_shape("w_out", &params.w_out, &[n_labels, config.representation_width()])?;
    check_shape("b_out", &params.b_out, &[n_labels])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(h: usize) -> ModelConfig {
        ModelConfig {
            hidden: h,
            edge_dim: 3,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = init_params(&cfg(4), 5, 6, 3, 42);
        let b = init_params(&cfg(4), 5, 6, 3, 42);
        assert_eq!(a, b);
        let c = init_params(&cfg(4), 5, 6, 3, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn init_respects_glorot_bounds_and_zero_biases() {
        let p = init_params(&cfg(8), 4, 5, 3, 7);
        let limit_w = (6.0 / (8 + 4) as f64).sqrt();
        assert!(p.fwd.w_r.data().iter().all(|v| v.abs() < limit_w));
        assert!(p.fwd.b_r.data().iter().all(|&v| v == 0.0));
        assert!(p.b_out.data().iter().all(|&v| v == 0.0));
        if let Some(AttentionWeights {
            combine: CombineWeights::Shared { v_e, .. },
            ..
        }) = &p.attn
        {
            assert!(v_e.data().iter().all(|v| v.abs() < 0.1));
            assert!(v_e.data().iter().any(|&v| v != 0.0));
        } else {
            panic!("expected shared combine");
        }
        // Spread check: draws should cover a decent part of the range.
        let spread = p.fwd.u_r.data().iter().cloned().fold(f64::MIN, f64::max)
            - p.fwd.u_r.data().iter().cloned().fold(f64::MAX, f64::min);
        let limit_u = (6.0 / 16.0_f64).sqrt();
        assert!(spread > limit_u, "spread {spread} too narrow");
    }

    #[test]
    fn visit_orders_match_and_cover_everything() {
        let p = init_params(&cfg(4), 5, 6, 3, 1);
        let names: Vec<String> = p.named().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names[0], "fwd.w_r");
        assert_eq!(names[9], "bwd.w_r");
        assert!(names.contains(&"attn.u_a".to_string()));
        assert!(names.contains(&"attn.w_a".to_string()));
        assert_eq!(names.last().unwrap(), "b_out");

        let mut mut_names = Vec::new();
        let mut p2 = p.clone();
        p2.visit_mut(|n, _| mut_names.push(n));
        assert_eq!(names, mut_names);

        // 2 directions x 9 + u_a + v_e + w_a + w_out + b_out
        assert_eq!(p.n_tensors(), 23);
    }

    #[test]
    fn per_edge_variant_has_one_matrix_per_type() {
        let config = ModelConfig {
            per_edge_weights: true,
            hidden: 4,
            ..ModelConfig::default()
        };
        let p = init_params(&config, 5, 6, 3, 1);
        match &p.attn.as_ref().unwrap().combine {
            CombineWeights::PerEdgeType { u_e } => assert_eq!(u_e.len(), 6),
            _ => panic!("expected per-edge combine"),
        }
        validate_params(&p, &config, 5, 6, 3).unwrap();
    }

    #[test]
    fn validate_catches_shape_drift() {
        let config = cfg(4);
        let mut p = init_params(&config, 5, 6, 3, 1);
        validate_params(&p, &config, 5, 6, 3).unwrap();
        p.w_out = Tensor::zeros(&[3, 7]);
        let err = validate_params(&p, &config, 5, 6, 3).unwrap_err();
        assert!(err.to_string().contains("w_out"), "{err}");
    }

    #[test]
    fn plain_baseline_carries_no_combine_weights() {
        let config = ModelConfig {
            kind: ModelKind::PlainBigru,
            hidden: 4,
            ..ModelConfig::default()
        };
        let p = init_params(&config, 5, 6, 3, 1);
        assert!(p.attn.is_none());
        assert_eq!(p.w_out.shape(), &[3, 16]);
        validate_params(&p, &config, 5, 6, 3).unwrap();
    }
}
