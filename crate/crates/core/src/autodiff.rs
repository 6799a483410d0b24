//! Minimal reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records every primitive in execution order, which is already a
//! topological order, so the backward pass is a single reverse sweep. Tensors
//! are at most two-dimensional; a one-dimensional tensor of length `n` is
//! treated as a `1 x n` row. The only broadcasting is the row-wise bias add.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("loss must be a scalar, got shape {0:?}")]
    NotScalarLoss(Vec<usize>),
    #[error("index {index} out of range for {op} with {len} rows")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        len: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// # Panics
    /// If `data.len()` differs from the product of `shape` or a dimension is zero.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "dimensions must be positive");
        assert_eq!(shape.iter().product::<usize>(), data.len(), "data length");
        Tensor { shape, data }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn scalar(x: f64) -> Self {
        Tensor::new(vec![1], vec![x])
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Tensor::new(shape.to_vec(), vec![0.0; shape.iter().product()])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor::matrix(rows, cols, vec![value; rows * cols])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Matrix view of the shape, if the tensor has at most two dimensions.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match self.shape.as_slice() {
            [n] => Some((1, *n)),
            [r, c] => Some((*r, *c)),
            _ => None,
        }
    }

    pub fn item(&self) -> f64 {
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn like(&self, data: Vec<f64>) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data,
        }
    }
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Constant,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    MatMul(Var, Var),
    MatMulT(Var, Var),
    AddBias(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    SoftmaxRows(Var),
    Embedding(Var, Vec<usize>),
    ConcatRows(Vec<Var>),
    CrossEntropy {
        logits: Var,
        targets: Vec<usize>,
        ignore: Option<usize>,
        count: usize,
    },
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn dims_of(t: &Tensor, op: &'static str) -> Result<(usize, usize), AutodiffError> {
    t.dims().ok_or_else(|| AutodiffError::ShapeMismatch {
        op,
        left: t.shape.clone(),
        right: Vec::new(),
    })
}

/// `out[m x n] += a[m x k] * b[k x n]`
fn gemm_nn(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = a[i * k + p];
            if x == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, y) in row.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
}

/// `out[m x n] += a[m x k] * b[n x k]^T`
fn gemm_nt(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            out[i * n + j] += arow.iter().zip(brow).map(|(x, y)| x * y).sum::<f64>();
        }
    }
}

/// `out[k x n] += a[m x k]^T * b[m x n]`
fn gemm_tn(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let brow = &b[i * n..(i + 1) * n];
        for p in 0..k {
            let x = a[i * k + p];
            if x == 0.0 {
                continue;
            }
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, y) in orow.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Records a differentiable input.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value: t,
            needs_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records an input that never receives a gradient.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Constant,
            value: t,
            needs_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, op: Op, value: Tensor, inputs: &[Var], name: &'static str) -> Result<Var, AutodiffError> {
        if !value.is_finite() {
            return Err(AutodiffError::NonFinite { op: name });
        }
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn same_shape(&self, a: Var, b: Var, op: &'static str) -> Result<(), AutodiffError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.dims() != y.dims() || x.dims().is_none() {
            return Err(AutodiffError::ShapeMismatch {
                op,
                left: x.shape.clone(),
                right: y.shape.clone(),
            });
        }
        Ok(())
    }

    fn zip_map(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (x, y) = (self.value(a), self.value(b));
        x.like(x.data.iter().zip(&y.data).map(|(p, q)| f(*p, *q)).collect())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.same_shape(a, b, "add")?;
        let v = self.zip_map(a, b, |p, q| p + q);
        self.push(Op::Add(a, b), v, &[a, b], "add")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.same_shape(a, b, "sub")?;
        let v = self.zip_map(a, b, |p, q| p - q);
        self.push(Op::Sub(a, b), v, &[a, b], "sub")
    }

    /// Element-wise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        self.same_shape(a, b, "mul")?;
        let v = self.zip_map(a, b, |p, q| p * q);
        self.push(Op::Mul(a, b), v, &[a, b], "mul")
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        let v = x.like(x.data.iter().map(|p| p * factor).collect());
        self.push(Op::Scale(a, factor), v, &[a], "scale")
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (m, k) = dims_of(self.value(a), "matmul")?;
        let (k2, n) = dims_of(self.value(b), "matmul")?;
        if k != k2 {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul",
                left: self.value(a).shape.clone(),
                right: self.value(b).shape.clone(),
            });
        }
        let mut out = vec![0.0; m * n];
        gemm_nn(&self.value(a).data, &self.value(b).data, &mut out, m, k, n);
        self.push(Op::MatMul(a, b), Tensor::matrix(m, n, out), &[a, b], "matmul")
    }

    /// `a * b^T`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (m, k) = dims_of(self.value(a), "matmul_t")?;
        let (n, k2) = dims_of(self.value(b), "matmul_t")?;
        if k != k2 {
            return Err(AutodiffError::ShapeMismatch {
                op: "matmul_t",
                left: self.value(a).shape.clone(),
                right: self.value(b).shape.clone(),
            });
        }
        let mut out = vec![0.0; m * n];
        gemm_nt(&self.value(a).data, &self.value(b).data, &mut out, m, k, n);
        self.push(Op::MatMulT(a, b), Tensor::matrix(m, n, out), &[a, b], "matmul_t")
    }

    /// Adds a `1 x n` (or length-`n`) bias to every row of an `m x n` matrix.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var, AutodiffError> {
        let (m, n) = dims_of(self.value(x), "add_bias")?;
        let (br, bn) = dims_of(self.value(bias), "add_bias")?;
        if br != 1 || bn != n {
            return Err(AutodiffError::ShapeMismatch {
                op: "add_bias",
                left: self.value(x).shape.clone(),
                right: self.value(bias).shape.clone(),
            });
        }
        let b = &self.value(bias).data;
        let mut out = self.value(x).data.clone();
        for i in 0..m {
            for (o, bb) in out[i * n..(i + 1) * n].iter_mut().zip(b) {
                *o += bb;
            }
        }
        self.push(Op::AddBias(x, bias), Tensor::matrix(m, n, out), &[x, bias], "add_bias")
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        let v = x.like(x.data.iter().map(|p| libm::tanh(*p)).collect());
        self.push(Op::Tanh(a), v, &[a], "tanh")
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let x = self.value(a);
        let v = x.like(x.data.iter().map(|p| sigmoid(*p)).collect());
        self.push(Op::Sigmoid(a), v, &[a], "sigmoid")
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var, AutodiffError> {
        let (m, n) = dims_of(self.value(a), "softmax_rows")?;
        let x = &self.value(a).data;
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let row = &x[i * n..(i + 1) * n];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (o, v) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                *o = libm::exp(v - max);
                z += *o;
            }
            for o in &mut out[i * n..(i + 1) * n] {
                *o /= z;
            }
        }
        self.push(Op::SoftmaxRows(a), Tensor::matrix(m, n, out), &[a], "softmax_rows")
    }

    /// Gathers rows of `table` (one per id) into an `ids.len() x dim` matrix.
    pub fn embedding(&mut self, table: Var, ids: &[usize]) -> Result<Var, AutodiffError> {
        let (rows, dim) = dims_of(self.value(table), "embedding")?;
        if ids.is_empty() {
            return Err(AutodiffError::ShapeMismatch {
                op: "embedding",
                left: self.value(table).shape.clone(),
                right: vec![0],
            });
        }
        let t = &self.value(table).data;
        let mut out = Vec::with_capacity(ids.len() * dim);
        for &id in ids {
            if id >= rows {
                return Err(AutodiffError::IndexOutOfRange {
                    op: "embedding",
                    index: id,
                    len: rows,
                });
            }
            out.extend_from_slice(&t[id * dim..(id + 1) * dim]);
        }
        let v = Tensor::matrix(ids.len(), dim, out);
        self.push(Op::Embedding(table, ids.to_vec()), v, &[table], "embedding")
    }

    /// Stacks matrices with equal column counts vertically.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, AutodiffError> {
        let first = parts.first().ok_or(AutodiffError::ShapeMismatch {
            op: "concat_rows",
            left: Vec::new(),
            right: Vec::new(),
        })?;
        let (_, n) = dims_of(self.value(*first), "concat_rows")?;
        let mut rows = 0;
        let mut out = Vec::new();
        for p in parts {
            let (r, c) = dims_of(self.value(*p), "concat_rows")?;
            if c != n {
                return Err(AutodiffError::ShapeMismatch {
                    op: "concat_rows",
                    left: self.value(*first).shape.clone(),
                    right: self.value(*p).shape.clone(),
                });
            }
            rows += r;
            out.extend_from_slice(&self.value(*p).data);
        }
        let v = Tensor::matrix(rows, n, out);
        self.push(Op::ConcatRows(parts.to_vec()), v, parts, "concat_rows")
    }

    /// Mean negative log-likelihood of `targets` under row-wise softmax of
    /// `logits`. Rows whose target equals `ignore` are excluded from the mean;
    /// if every row is ignored the loss is zero.
    pub fn cross_entropy(
        &mut self,
        logits: Var,
        targets: &[usize],
        ignore: Option<usize>,
    ) -> Result<Var, AutodiffError> {
        let (m, n) = dims_of(self.value(logits), "cross_entropy")?;
        if targets.len() != m {
            return Err(AutodiffError::ShapeMismatch {
                op: "cross_entropy",
                left: self.value(logits).shape.clone(),
                right: vec![targets.len()],
            });
        }
        let x = &self.value(logits).data;
        let mut total = 0.0;
        let mut count = 0;
        for (i, &t) in targets.iter().enumerate() {
            if Some(t) == ignore {
                continue;
            }
            if t >= n {
                return Err(AutodiffError::IndexOutOfRange {
                    op: "cross_entropy",
                    index: t,
                    len: n,
                });
            }
            let row = &x[i * n..(i + 1) * n];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + libm::log(row.iter().map(|v| libm::exp(v - max)).sum::<f64>());
            total += lse - row[t];
            count += 1;
        }
        let loss = if count == 0 { 0.0 } else { total / count as f64 };
        let op = Op::CrossEntropy {
            logits,
            targets: targets.to_vec(),
            ignore,
            count,
        };
        self.push(op, Tensor::scalar(loss), &[logits], "cross_entropy")
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients, AutodiffError> {
        if self.value(loss).len() != 1 {
            return Err(AutodiffError::NotScalarLoss(self.value(loss).shape.clone()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            let needs = |v: &Var| self.nodes[v.0].needs_grad;
            match &node.op {
                Op::Leaf | Op::Constant => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::Add(a, b) => {
                    if needs(a) {
                        accumulate(&mut grads, *a, &g, self);
                    }
                    if needs(b) {
                        accumulate(&mut grads, *b, &g, self);
                    }
                }
                Op::Sub(a, b) => {
                    if needs(a) {
                        accumulate(&mut grads, *a, &g, self);
                    }
                    if needs(b) {
                        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
                        accumulate(&mut grads, *b, &neg, self);
                    }
                }
                Op::Mul(a, b) => {
                    if needs(a) {
                        let d: Vec<f64> = g.iter().zip(&self.value(*b).data).map(|(x, y)| x * y).collect();
                        accumulate(&mut grads, *a, &d, self);
                    }
                    if needs(b) {
                        let d: Vec<f64> = g.iter().zip(&self.value(*a).data).map(|(x, y)| x * y).collect();
                        accumulate(&mut grads, *b, &d, self);
                    }
                }
                Op::Scale(a, f) => {
                    let d: Vec<f64> = g.iter().map(|x| x * f).collect();
                    accumulate(&mut grads, *a, &d, self);
                }
                Op::MatMul(a, b) => {
                    let (m, k) = self.value(*a).dims().unwrap();
                    let n = self.value(*b).dims().unwrap().1;
                    if needs(a) {
                        let d = slot(&mut grads, *a, self);
                        gemm_nt(&g, &self.value(*b).data, d, m, n, k);
                    }
                    if needs(b) {
                        let d = slot(&mut grads, *b, self);
                        gemm_tn(&self.value(*a).data, &g, d, m, k, n);
                    }
                }
                Op::MatMulT(a, b) => {
                    let (m, k) = self.value(*a).dims().unwrap();
                    let n = self.value(*b).dims().unwrap().0;
                    if needs(a) {
                        let d = slot(&mut grads, *a, self);
                        gemm_nn(&g, &self.value(*b).data, d, m, n, k);
                    }
                    if needs(b) {
                        let d = slot(&mut grads, *b, self);
                        gemm_tn(&g, &self.value(*a).data, d, m, n, k);
                    }
                }
                Op::AddBias(x, bias) => {
                    if needs(x) {
                        accumulate(&mut grads, *x, &g, self);
                    }
                    if needs(bias) {
                        let n = self.value(*bias).len();
                        let d = slot(&mut grads, *bias, self);
                        for row in g.chunks(n) {
                            for (o, v) in d.iter_mut().zip(row) {
                                *o += v;
                            }
                        }
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value.data;
                    let d: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect();
                    accumulate(&mut grads, *a, &d, self);
                }
                Op::Sigmoid(a) => {
                    let y = &node.value.data;
                    let d: Vec<f64> = g.iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect();
                    accumulate(&mut grads, *a, &d, self);
                }
                Op::SoftmaxRows(a) => {
                    let (m, n) = node.value.dims().unwrap();
                    let y = &node.value.data;
                    let mut d = vec![0.0; m * n];
                    for i in 0..m {
                        let r = i * n..(i + 1) * n;
                        let dot: f64 = g[r.clone()].iter().zip(&y[r.clone()]).map(|(a, b)| a * b).sum();
                        for j in r {
                            d[j] = y[j] * (g[j] - dot);
                        }
                    }
                    accumulate(&mut grads, *a, &d, self);
                }
                Op::Embedding(table, ids) => {
                    let dim = self.value(*table).dims().unwrap().1;
                    let d = slot(&mut grads, *table, self);
                    for (row, &id) in g.chunks(dim).zip(ids) {
                        for (o, v) in d[id * dim..(id + 1) * dim].iter_mut().zip(row) {
                            *o += v;
                        }
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.value(*p).len();
                        if needs(p) {
                            accumulate(&mut grads, *p, &g[offset..offset + len], self);
                        }
                        offset += len;
                    }
                }
                Op::CrossEntropy {
                    logits,
                    targets,
                    ignore,
                    count,
                } => {
                    if *count == 0 {
                        continue;
                    }
                    let (_, n) = self.value(*logits).dims().unwrap();
                    let x = &self.value(*logits).data;
                    let scale = g[0] / *count as f64;
                    let d = slot(&mut grads, *logits, self);
                    for (i, &t) in targets.iter().enumerate() {
                        if Some(t) == *ignore {
                            continue;
                        }
                        let row = &x[i * n..(i + 1) * n];
                        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let z: f64 = row.iter().map(|v| libm::exp(v - max)).sum();
                        for j in 0..n {
                            let p = libm::exp(row[j] - max) / z;
                            d[i * n + j] += scale * (p - if j == t { 1.0 } else { 0.0 });
                        }
                    }
                }
            }
        }
        Ok(Gradients { grads })
    }
}

fn slot<'a>(grads: &'a mut [Option<Vec<f64>>], v: Var, tape: &Tape) -> &'a mut [f64] {
    grads[v.0].get_or_insert_with(|| vec![0.0; tape.value(v).len()])
}

fn accumulate(grads: &mut [Option<Vec<f64>>], v: Var, g: &[f64], tape: &Tape) {
    match &mut grads[v.0] {
        Some(d) => {
            for (o, x) in d.iter_mut().zip(g) {
                *o += x;
            }
        }
        slot @ None => {
            debug_assert_eq!(g.len(), tape.value(v).len());
            *slot = Some(g.to_vec());
        }
    }
}

/// Result of [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    /// Gradient with respect to `v`; zeros if the loss does not depend on it.
    pub fn of(&self, tape: &Tape, v: Var) -> Tensor {
        let value = tape.value(v);
        match &self.grads[v.0] {
            Some(g) => value.like(g.clone()),
            None => value.like(vec![0.0; value.len()]),
        }
    }

    /// Raw gradient storage, `None` if untouched.
    pub fn raw(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }
}

/// Smallest denominator used by [`grad_check`]; below it errors are absolute.
pub const GRAD_CHECK_FLOOR: f64 = 1e-5;
pub const GRAD_CHECK_STEP: f64 = 1e-5;

/// Largest component-wise relative error between backward gradients of `f`
/// and central finite differences at `point`.
///
/// The relative error is `|a - n| / max(|a|, |n|, GRAD_CHECK_FLOOR)`.
pub fn grad_check<F>(f: F, point: &[Tensor]) -> Result<f64, AutodiffError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, AutodiffError>,
{
    let eval = |inputs: &[Tensor]| -> Result<f64, AutodiffError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        Ok(tape.value(out).item())
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = point.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    let grads = tape.backward(out)?;

    let mut worst: f64 = 0.0;
    let mut probe: Vec<Tensor> = point.to_vec();
    for (i, v) in vars.iter().enumerate() {
        let analytic = grads.of(&tape, *v);
        for j in 0..point[i].len() {
            let orig = point[i].data[j];
            probe[i].data[j] = orig + GRAD_CHECK_STEP;
            let up = eval(&probe)?;
            probe[i].data[j] = orig - GRAD_CHECK_STEP;
            let down = eval(&probe)?;
            probe[i].data[j] = orig;
            let numeric = (up - down) / (2.0 * GRAD_CHECK_STEP);
            let a = analytic.data[j];
            let denom = a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}
