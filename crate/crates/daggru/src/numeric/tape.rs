use super::{NumericError, Scalar, Tensor};

/// Handle to a node on a [`Tape`]. Only valid for the tape that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// Recorded operation. Inputs are stored as node handles; values needed by
/// the backward pass (e.g. activation outputs) are read from the nodes
/// themselves, so the enum stays small.
#[derive(Debug, Clone)]
enum Op<S> {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    Softmax(Var),
    Concat(Var, Var),
    Dot(Var, Var),
    Select(Var, usize),
    Row(Var, usize),
    Scale(Var, S),
    ScaleBy(Var, Var),
    Sum(Var),
    CrossEntropy(Var, usize),
}

#[derive(Debug, Clone)]
struct Node<S> {
    op: Op<S>,
    value: Tensor<S>,
}

/// Wengert list: every operation appends a node holding its output value,
/// so node indices are already a topological order. `backward` replays the
/// list in reverse, applying each op's vector-Jacobian product.
#[derive(Debug, Default)]
pub struct Tape<S> {
    nodes: Vec<Node<S>>,
}

/// Per-node gradients produced by [`Tape::backward`]. Nodes the loss never
/// touched hold zeros, so callers can read every parameter unconditionally.
#[derive(Debug)]
pub struct Gradients<S> {
    grads: Vec<Tensor<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn get(&self, var: Var) -> &Tensor<S> {
        &self.grads[var.0]
    }
}

/// Two-branch logistic that never exponentiates a positive argument.
fn sigmoid_stable<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// Softmax with max subtraction; input must be non-empty rank 1.
fn softmax_raw<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits.iter().cloned().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: S = exps.iter().cloned().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor<S> {
        &self.nodes[var.0].value
    }

    fn push(&mut self, op: Op<S>, value: Tensor<S>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Enter a tensor (parameter, input, or constant) onto the tape.
    pub fn leaf(&mut self, value: Tensor<S>) -> Var {
        self.push(Op::Leaf, value)
    }

    /// Matrix product. Accepts `[m,n] x [n]` -> `[m]` and `[m,n] x [n,p]`
    /// -> `[m,p]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let (av, bv) = (self.value(a), self.value(b));
        if !av.is_matrix() || av.shape()[1] != bv.shape()[0] || bv.rank() > 2 {
            return Err(NumericError::ShapeMismatch {
                op: "matmul",
                lhs: av.fmt_shape(),
                rhs: bv.fmt_shape(),
            });
        }
        let (m, n) = (av.shape()[0], av.shape()[1]);
        let p = if bv.is_vector() { 1 } else { bv.shape()[1] };
        let mut out = vec![S::zero(); m * p];
        for i in 0..m {
            for k in 0..n {
                let aik = av.data()[i * n + k];
                for j in 0..p {
                    out[i * p + j] += aik * bv.data()[k * p + j];
                }
            }
        }
        let value = if bv.is_vector() {
            Tensor::vector(out)
        } else {
            Tensor::from_shape(vec![m, p], out)?
        };
        Ok(self.push(Op::MatMul(a, b), value))
    }

    fn elementwise(
        &mut self,
        opname: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(S, S) -> S,
        op: Op<S>,
    ) -> Result<Var, NumericError> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(NumericError::ShapeMismatch {
                op: opname,
                lhs: av.fmt_shape(),
                rhs: bv.fmt_shape(),
            });
        }
        let data = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::from_shape(av.shape().to_vec(), data)?;
        Ok(self.push(op, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.elementwise("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.elementwise("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        self.elementwise("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let data = self.value(x).data().iter().map(|&v| sigmoid_stable(v)).collect();
        let shape = self.value(x).shape().to_vec();
        let value = Tensor::from_shape(shape, data).expect("same shape");
        self.push(Op::Sigmoid(x), value)
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let data = self.value(x).data().iter().map(|&v| v.tanh()).collect();
        let shape = self.value(x).shape().to_vec();
        let value = Tensor::from_shape(shape, data).expect("same shape");
        self.push(Op::Tanh(x), value)
    }

    /// Softmax over a non-empty rank-1 tensor.
    pub fn softmax(&mut self, x: Var) -> Result<Var, NumericError> {
        let xv = self.value(x);
        if !xv.is_vector() || xv.is_empty() {
            return Err(NumericError::InvalidShape {
                op: "softmax",
                shape: xv.fmt_shape(),
                detail: "wants a non-empty rank-1 tensor".into(),
            });
        }
        let value = Tensor::vector(softmax_raw(xv.data()));
        Ok(self.push(Op::Softmax(x), value))
    }

    /// Concatenation of two rank-1 tensors.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let (av, bv) = (self.value(a), self.value(b));
        if !av.is_vector() || !bv.is_vector() {
            return Err(NumericError::ShapeMismatch {
                op: "concat",
                lhs: av.fmt_shape(),
                rhs: bv.fmt_shape(),
            });
        }
        let mut data = av.data().to_vec();
        data.extend_from_slice(bv.data());
        Ok(self.push(Op::Concat(a, b), Tensor::vector(data)))
    }

    /// Inner product of two equal-length rank-1 tensors; yields `[1]`.
    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let (av, bv) = (self.value(a), self.value(b));
        if !av.is_vector() || av.shape() != bv.shape() {
            return Err(NumericError::ShapeMismatch {
                op: "dot",
                lhs: av.fmt_shape(),
                rhs: bv.fmt_shape(),
            });
        }
        let s: S = av.data().iter().zip(bv.data()).map(|(&x, &y)| x * y).sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(s)))
    }

    /// Element `i` of a rank-1 tensor as a `[1]` tensor.
    pub fn select(&mut self, x: Var, i: usize) -> Result<Var, NumericError> {
        let xv = self.value(x);
        if !xv.is_vector() || i >= xv.len() {
            return Err(NumericError::IndexOutOfRange {
                op: "select",
                index: i,
                len: xv.len(),
            });
        }
        let v = xv.data()[i];
        Ok(self.push(Op::Select(x, i), Tensor::scalar(v)))
    }

    /// Row `r` of a rank-2 tensor as a rank-1 tensor. Gradients scatter-add
    /// back into the source row, which is what embedding-style lookups need.
    pub fn row(&mut self, m: Var, r: usize) -> Result<Var, NumericError> {
        let mv = self.value(m);
        if !mv.is_matrix() || r >= mv.shape()[0] {
            return Err(NumericError::IndexOutOfRange {
                op: "row",
                index: r,
                len: if mv.is_matrix() { mv.shape()[0] } else { 0 },
            });
        }
        let cols = mv.shape()[1];
        let data = mv.data()[r * cols..(r + 1) * cols].to_vec();
        Ok(self.push(Op::Row(m, r), Tensor::vector(data)))
    }

    /// Multiply by a compile-time constant (not a tape node).
    pub fn scale(&mut self, x: Var, factor: S) -> Var {
        let data = self.value(x).data().iter().map(|&v| v * factor).collect();
        let shape = self.value(x).shape().to_vec();
        let value = Tensor::from_shape(shape, data).expect("same shape");
        self.push(Op::Scale(x, factor), value)
    }

    /// Multiply every element of `x` by the `[1]` tensor `s` (a broadcast
    /// product where the scalar factor is itself differentiable).
    pub fn scale_by(&mut self, x: Var, s: Var) -> Result<Var, NumericError> {
        let sv = self.value(s);
        if sv.len() != 1 {
            return Err(NumericError::ShapeMismatch {
                op: "scale_by",
                lhs: self.value(x).fmt_shape(),
                rhs: sv.fmt_shape(),
            });
        }
        let factor = sv.data()[0];
        let data = self.value(x).data().iter().map(|&v| v * factor).collect();
        let shape = self.value(x).shape().to_vec();
        let value = Tensor::from_shape(shape, data)?;
        Ok(self.push(Op::ScaleBy(x, s), value))
    }

    /// Sum of all elements as a `[1]` tensor.
    pub fn sum(&mut self, x: Var) -> Var {
        let s: S = self.value(x).data().iter().cloned().sum();
        self.push(Op::Sum(x), Tensor::scalar(s))
    }

    /// Softmax cross-entropy against a gold class index, fused for
    /// numerical stability: `logsumexp(logits) - logits[gold]`.
    pub fn cross_entropy(&mut self, logits: Var, gold: usize) -> Result<Var, NumericError> {
        let lv = self.value(logits);
        if !lv.is_vector() || lv.is_empty() {
            return Err(NumericError::InvalidShape {
                op: "cross_entropy",
                shape: lv.fmt_shape(),
                detail: "wants a non-empty rank-1 tensor".into(),
            });
        }
        if gold >= lv.len() {
            return Err(NumericError::IndexOutOfRange {
                op: "cross_entropy",
                index: gold,
                len: lv.len(),
            });
        }
        let max = lv.data().iter().cloned().fold(S::neg_infinity(), S::max);
        let sum_exp: S = lv.data().iter().map(|&l| (l - max).exp()).sum();
        let loss = max + sum_exp.ln() - lv.data()[gold];
        Ok(self.push(Op::CrossEntropy(logits, gold), Tensor::scalar(loss)))
    }

    /// Reverse pass from a scalar loss. Returns one gradient tensor per
    /// node; multiple uses of a node accumulate, unused nodes stay zero.
    pub fn backward(&self, loss: Var) -> Result<Gradients<S>, NumericError> {
        if loss.0 >= self.nodes.len() {
            return Err(NumericError::IndexOutOfRange {
                op: "backward",
                index: loss.0,
                len: self.nodes.len(),
            });
        }
        if self.value(loss).len() != 1 {
            return Err(NumericError::LossNotScalar {
                len: self.value(loss).len(),
            });
        }
        let mut grads: Vec<Tensor<S>> = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros(n.value.shape()))
            .collect();
        grads[loss.0].data_mut()[0] = S::one();

        for i in (0..=loss.0).rev() {
            // The output gradient of node i is final once we reach it:
            // every consumer has a higher index and was already replayed.
            let g = grads[i].clone();
            if g.data().iter().all(|v| *v == S::zero()) {
                continue;
            }
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let av = self.value(*a).clone();
                    let bv = self.value(*b).clone();
                    let (m, n) = (av.shape()[0], av.shape()[1]);
                    let p = if bv.is_vector() { 1 } else { bv.shape()[1] };
                    {
                        let da = grads[a.0].data_mut();
                        for i2 in 0..m {
                            for k in 0..n {
                                let mut acc = S::zero();
                                for j in 0..p {
                                    acc += g.data()[i2 * p + j] * bv.data()[k * p + j];
                                }
                                da[i2 * n + k] += acc;
                            }
                        }
                    }
                    {
                        let db = grads[b.0].data_mut();
                        for k in 0..n {
                            for j in 0..p {
                                let mut acc = S::zero();
                                for i2 in 0..m {
                                    acc += av.data()[i2 * n + k] * g.data()[i2 * p + j];
                                }
                                db[k * p + j] += acc;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    grads[a.0].add_assign(&g).expect("shape fixed at forward");
                    grads[b.0].add_assign(&g).expect("shape fixed at forward");
                }
                Op::Sub(a, b) => {
                    grads[a.0].add_assign(&g).expect("shape fixed at forward");
                    let db = grads[b.0].data_mut();
                    for (d, gv) in db.iter_mut().zip(g.data()) {
                        *d -= *gv;
                    }
                }
                Op::Mul(a, b) => {
                    let av = self.value(*a).clone();
                    let bv = self.value(*b).clone();
                    for ((d, gv), ov) in grads[a.0].data_mut().iter_mut().zip(g.data()).zip(bv.data()) {
                        *d += *gv * *ov;
                    }
                    for ((d, gv), ov) in grads[b.0].data_mut().iter_mut().zip(g.data()).zip(av.data()) {
                        *d += *gv * *ov;
                    }
                }
                Op::Sigmoid(x) => {
                    let y = self.nodes[i].value.clone();
                    for ((d, gv), yv) in grads[x.0].data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *d += *gv * *yv * (S::one() - *yv);
                    }
                }
                Op::Tanh(x) => {
                    let y = self.nodes[i].value.clone();
                    for ((d, gv), yv) in grads[x.0].data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *d += *gv * (S::one() - *yv * *yv);
                    }
                }
                Op::Softmax(x) => {
                    let y = self.nodes[i].value.clone();
                    let inner: S = g.data().iter().zip(y.data()).map(|(&gv, &yv)| gv * yv).sum();
                    for ((d, gv), yv) in grads[x.0].data_mut().iter_mut().zip(g.data()).zip(y.data()) {
                        *d += *yv * (*gv - inner);
                    }
                }
                Op::Concat(a, b) => {
                    let na = self.value(*a).len();
                    for (d, gv) in grads[a.0].data_mut().iter_mut().zip(&g.data()[..na]) {
                        *d += *gv;
                    }
                    for (d, gv) in grads[b.0].data_mut().iter_mut().zip(&g.data()[na..]) {
                        *d += *gv;
                    }
                }
                Op::Dot(a, b) => {
                    let g0 = g.data()[0];
                    let av = self.value(*a).clone();
                    let bv = self.value(*b).clone();
                    for (d, ov) in grads[a.0].data_mut().iter_mut().zip(bv.data()) {
                        *d += g0 * *ov;
                    }
                    for (d, ov) in grads[b.0].data_mut().iter_mut().zip(av.data()) {
                        *d += g0 * *ov;
                    }
                }
                Op::Select(x, idx) => {
                    grads[x.0].data_mut()[*idx] += g.data()[0];
                }
                Op::Row(m, r) => {
                    let cols = g.len();
                    let dm = grads[m.0].data_mut();
                    for (c, gv) in g.data().iter().enumerate() {
                        dm[r * cols + c] += *gv;
                    }
                }
                Op::Scale(x, factor) => {
                    let f = *factor;
                    for (d, gv) in grads[x.0].data_mut().iter_mut().zip(g.data()) {
                        *d += *gv * f;
                    }
                }
                Op::ScaleBy(x, s) => {
                    let factor = self.value(*s).data()[0];
                    let xv = self.value(*x).clone();
                    for (d, gv) in grads[x.0].data_mut().iter_mut().zip(g.data()) {
                        *d += *gv * factor;
                    }
                    let ds: S = xv.data().iter().zip(g.data()).map(|(&xi, &gi)| xi * gi).sum();
                    grads[s.0].data_mut()[0] += ds;
                }
                Op::Sum(x) => {
                    let g0 = g.data()[0];
                    for d in grads[x.0].data_mut() {
                        *d += g0;
                    }
                }
                Op::CrossEntropy(logits, gold) => {
                    let g0 = g.data()[0];
                    let p = softmax_raw(self.value(*logits).data());
                    let dl = grads[logits.0].data_mut();
                    for (j, pj) in p.iter().enumerate() {
                        let indicator = if j == *gold { S::one() } else { S::zero() };
                        dl[j] += g0 * (*pj - indicator);
                    }
                }
            }
        }
        Ok(Gradients { grads })
    }
}
