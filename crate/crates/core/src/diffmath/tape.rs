//! Reverse-mode automatic differentiation over a linear operation tape.
//!
//! Operations record their inputs and output value in execution order;
//! [`Tape::backward`] replays the records in reverse, accumulating
//! vector-Jacobian products. A tape is a single-threaded unit of work:
//! workers that need gradients each build their own.

use crate::error::{Error, Result};

use super::tensor::{matmul_nt_raw, matmul_raw, matmul_tn_raw, Tensor};

/// Index of a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    /// a[m,k] * b[k,n]
    MatMul { a: VarId, b: VarId },
    /// a[m,k] * b[n,k]^T
    MatMulNT { a: VarId, b: VarId },
    Add { a: VarId, b: VarId },
    /// a[m,n] + row vector b[n] broadcast over rows
    AddRow { a: VarId, b: VarId },
    Sub { a: VarId, b: VarId },
    Mul { a: VarId, b: VarId },
    Scale { a: VarId, k: f64 },
    Tanh { a: VarId },
    Sigmoid { a: VarId },
    /// Softmax along the last axis of a rank-2 tensor.
    SoftmaxRows { a: VarId },
    Log { a: VarId },
    Clamp { a: VarId, lo: f64, hi: f64 },
    Sum { a: VarId },
    Mean { a: VarId },
    ConcatCols { parts: Vec<VarId> },
    SliceCols { a: VarId, start: usize, end: usize },
    /// Mean over the batch of -log softmax(logits)[label].
    CrossEntropy { logits: VarId, labels: Vec<usize>, probs: Vec<f64> },
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Gradients produced by [`Tape::backward`], indexed by [`VarId`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: VarId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, id: VarId) -> Option<Tensor> {
        self.grads.get_mut(id.0).and_then(|g| g.take())
    }
}

/// Ordered record of executed operations with their values.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Place a tensor on the tape as a leaf.
    pub fn input(&mut self, t: Tensor) -> VarId {
        let needs_grad = t.requires_grad;
        self.push(t, Op::Leaf, needs_grad)
    }

    pub fn value(&self, id: VarId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> VarId {
        self.nodes.push(Node { value, op, needs_grad });
        VarId(self.nodes.len() - 1)
    }

    fn needs(&self, id: VarId) -> bool {
        self.nodes[id.0].needs_grad
    }

    fn mat_dims(&self, id: VarId, what: &str) -> Result<(usize, usize)> {
        let t = self.value(id);
        if t.shape.len() != 2 {
            return Err(Error::config(format!(
                "{what} expects a rank-2 tensor, got shape {:?}",
                t.shape
            )));
        }
        Ok((t.shape[0], t.shape[1]))
    }

    pub fn matmul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let (m, ka) = self.mat_dims(a, "matmul lhs")?;
        let (kb, n) = self.mat_dims(b, "matmul rhs")?;
        if ka != kb {
            return Err(Error::config(format!(
                "matmul inner dims differ: {ka} vs {kb}"
            )));
        }
        let data = matmul_raw(&self.value(a).data, &self.value(b).data, m, ka, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor { shape: vec![m, n], data, requires_grad: false }, Op::MatMul { a, b }, needs))
    }

    /// a[m,k] times the transpose of b[n,k]; avoids materializing b^T.
    pub fn matmul_nt(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let (m, ka) = self.mat_dims(a, "matmul_nt lhs")?;
        let (n, kb) = self.mat_dims(b, "matmul_nt rhs")?;
        if ka != kb {
            return Err(Error::config(format!(
                "matmul_nt inner dims differ: {ka} vs {kb}"
            )));
        }
        let data = matmul_nt_raw(&self.value(a).data, &self.value(b).data, m, ka, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor { shape: vec![m, n], data, requires_grad: false }, Op::MatMulNT { a, b }, needs))
    }

    fn same_shape(&self, a: VarId, b: VarId, what: &str) -> Result<()> {
        if self.value(a).shape != self.value(b).shape {
            return Err(Error::config(format!(
                "{what} shape mismatch: {:?} vs {:?}",
                self.value(a).shape,
                self.value(b).shape
            )));
        }
        Ok(())
    }

    fn binary_elementwise(
        &mut self,
        a: VarId,
        b: VarId,
        what: &str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<VarId> {
        self.same_shape(a, b, what)?;
        let data: Vec<f64> = self
            .value(a)
            .data
            .iter()
            .zip(&self.value(b).data)
            .map(|(&x, &y)| f(x, y))
            .collect();
        let shape = self.value(a).shape.clone();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor { shape, data, requires_grad: false }, op, needs))
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary_elementwise(a, b, "add", |x, y| x + y, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary_elementwise(a, b, "sub", |x, y| x - y, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.binary_elementwise(a, b, "mul", |x, y| x * y, Op::Mul { a, b })
    }

    /// Broadcast-add a row vector b[n] to every row of a[m,n].
    pub fn add_row(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let (m, n) = self.mat_dims(a, "add_row lhs")?;
        let bt = self.value(b);
        if bt.shape != [n] && bt.shape != [1, n] {
            return Err(Error::config(format!(
                "add_row rhs must be a length-{n} vector, got {:?}",
                bt.shape
            )));
        }
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                data.push(self.value(a).data[i * n + j] + self.value(b).data[j]);
            }
        }
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor { shape: vec![m, n], data, requires_grad: false }, Op::AddRow { a, b }, needs))
    }

    pub fn scale(&mut self, a: VarId, k: f64) -> VarId {
        let data: Vec<f64> = self.value(a).data.iter().map(|&x| x * k).collect();
        let shape = self.value(a).shape.clone();
        let needs = self.needs(a);
        self.push(Tensor { shape, data, requires_grad: false }, Op::Scale { a, k }, needs)
    }

    fn unary(&mut self, a: VarId, f: impl Fn(f64) -> f64, op: Op) -> VarId {
        let data: Vec<f64> = self.value(a).data.iter().map(|&x| f(x)).collect();
        let shape = self.value(a).shape.clone();
        let needs = self.needs(a);
        self.push(Tensor { shape, data, requires_grad: false }, op, needs)
    }

    pub fn tanh(&mut self, a: VarId) -> VarId {
        self.unary(a, f64::tanh, Op::Tanh { a })
    }

    pub fn sigmoid(&mut self, a: VarId) -> VarId {
        self.unary(a, stable_sigmoid, Op::Sigmoid { a })
    }

    pub fn log(&mut self, a: VarId) -> Result<VarId> {
        if let Some(bad) = self.value(a).data.iter().find(|v| **v <= 0.0) {
            return Err(Error::numeric(format!("log of non-positive value {bad}")));
        }
        Ok(self.unary(a, f64::ln, Op::Log { a }))
    }

    pub fn clamp(&mut self, a: VarId, lo: f64, hi: f64) -> VarId {
        self.unary(a, |x| x.clamp(lo, hi), Op::Clamp { a, lo, hi })
    }

    /// Softmax along the last axis, computed with max-subtraction.
    pub fn softmax_rows(&mut self, a: VarId) -> Result<VarId> {
        let (m, n) = self.mat_dims(a, "softmax")?;
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let row = &self.value(a).data[i * n..(i + 1) * n];
            data.extend_from_slice(&softmax_row(row));
        }
        let needs = self.needs(a);
        Ok(self.push(Tensor { shape: vec![m, n], data, requires_grad: false }, Op::SoftmaxRows { a }, needs))
    }

    pub fn sum(&mut self, a: VarId) -> VarId {
        let s: f64 = self.value(a).data.iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s), Op::Sum { a }, needs)
    }

    pub fn mean(&mut self, a: VarId) -> VarId {
        let n = self.value(a).numel() as f64;
        let s: f64 = self.value(a).data.iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s / n), Op::Mean { a }, needs)
    }

    /// Concatenate rank-2 tensors with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::config("concat of zero tensors"));
        }
        let (m, _) = self.mat_dims(parts[0], "concat")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (mp, np) = self.mat_dims(p, "concat")?;
            if mp != m {
                return Err(Error::config(format!(
                    "concat row counts differ: {m} vs {mp}"
                )));
            }
            widths.push(np);
        }
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(m * total);
        for i in 0..m {
            for (&p, &w) in parts.iter().zip(&widths) {
                let row = &self.value(p).data[i * w..(i + 1) * w];
                data.extend_from_slice(row);
            }
        }
        let needs = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(
            Tensor { shape: vec![m, total], data, requires_grad: false },
            Op::ConcatCols { parts: parts.to_vec() },
            needs,
        ))
    }

    /// Columns start..end of a rank-2 tensor.
    pub fn slice_cols(&mut self, a: VarId, start: usize, end: usize) -> Result<VarId> {
        let (m, n) = self.mat_dims(a, "slice")?;
        if start >= end || end > n {
            return Err(Error::config(format!(
                "slice [{start}..{end}) out of range for {n} columns"
            )));
        }
        let w = end - start;
        let mut data = Vec::with_capacity(m * w);
        for i in 0..m {
            data.extend_from_slice(&self.value(a).data[i * n + start..i * n + end]);
        }
        let needs = self.needs(a);
        Ok(self.push(Tensor { shape: vec![m, w], data, requires_grad: false }, Op::SliceCols { a, start, end }, needs))
    }

    /// Mean over the batch of -log softmax(logits)[label].
    pub fn cross_entropy(&mut self, logits: VarId, labels: &[usize]) -> Result<VarId> {
        let (m, n) = self.mat_dims(logits, "cross_entropy logits")?;
        if labels.len() != m {
            return Err(Error::config(format!(
                "cross_entropy: {m} logit rows but {} labels",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= n) {
            return Err(Error::config(format!(
                "cross_entropy: label {bad} out of range for {n} classes"
            )));
        }
        let mut probs = Vec::with_capacity(m * n);
        let mut loss = 0.0;
        for i in 0..m {
            let row = &self.value(logits).data[i * n..(i + 1) * n];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&z| (z - max).exp()).collect();
            let denom: f64 = exps.iter().sum();
            loss += denom.ln() - (row[labels[i]] - max);
            for e in exps {
                probs.push(e / denom);
            }
        }
        loss /= m as f64;
        let needs = self.needs(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy { logits, labels: labels.to_vec(), probs },
            needs,
        ))
    }

    /// Reverse sweep from a scalar loss. Returns a gradient for every
    /// recorded value that (transitively) requires one.
    pub fn backward(&mut self, loss: VarId) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::config(format!(
                "backward requires a scalar loss, got shape {:?}",
                self.value(loss).shape
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }

        let out = grads
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                g.map(|data| Tensor {
                    shape: self.nodes[i].value.shape.clone(),
                    data,
                    requires_grad: false,
                })
            })
            .collect();
        Ok(Gradients { grads: out })
    }

    fn accumulate(
        &self,
        grads: &mut [Option<Vec<f64>>],
        target: VarId,
        contribution: impl Iterator<Item = f64>,
    ) {
        if !self.needs(target) {
            return;
        }
        let slot = &mut grads[target.0];
        match slot {
            Some(existing) => {
                for (e, c) in existing.iter_mut().zip(contribution) {
                    *e += c;
                }
            }
            None => {
                let mut fresh = vec![0.0; self.nodes[target.0].value.numel()];
                for (e, c) in fresh.iter_mut().zip(contribution) {
                    *e = c;
                }
                *slot = Some(fresh);
            }
        }
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul { a, b } => {
                let (m, k) = (self.value(*a).shape[0], self.value(*a).shape[1]);
                let n = self.value(*b).shape[1];
                if self.needs(*a) {
                    // dA = dC * B^T
                    let da = matmul_nt_raw(g, &self.value(*b).data, m, n, k);
                    self.accumulate(grads, *a, da.into_iter());
                }
                if self.needs(*b) {
                    // dB = A^T * dC
                    let db = matmul_tn_raw(&self.value(*a).data, g, k, m, n);
                    self.accumulate(grads, *b, db.into_iter());
                }
            }
            Op::MatMulNT { a, b } => {
                // C = A * B^T with A[m,k], B[n,k].
                let (m, k) = (self.value(*a).shape[0], self.value(*a).shape[1]);
                let n = self.value(*b).shape[0];
                if self.needs(*a) {
                    // dA = dC * B
                    let da = matmul_raw(g, &self.value(*b).data, m, n, k);
                    self.accumulate(grads, *a, da.into_iter());
                }
                if self.needs(*b) {
                    // dB = dC^T * A
                    let db = matmul_tn_raw(g, &self.value(*a).data, n, m, k);
                    self.accumulate(grads, *b, db.into_iter());
                }
            }
            Op::Add { a, b } => {
                self.accumulate(grads, *a, g.iter().cloned());
                self.accumulate(grads, *b, g.iter().cloned());
            }
            Op::AddRow { a, b } => {
                self.accumulate(grads, *a, g.iter().cloned());
                if self.needs(*b) {
                    let n = self.value(*b).numel();
                    let mut db = vec![0.0; n];
                    for (i, &gv) in g.iter().enumerate() {
                        db[i % n] += gv;
                    }
                    self.accumulate(grads, *b, db.into_iter());
                }
            }
            Op::Sub { a, b } => {
                self.accumulate(grads, *a, g.iter().cloned());
                self.accumulate(grads, *b, g.iter().map(|v| -v));
            }
            Op::Mul { a, b } => {
                if self.needs(*a) {
                    let bv = &self.value(*b).data;
                    self.accumulate(grads, *a, g.iter().zip(bv).map(|(gv, x)| gv * x));
                }
                if self.needs(*b) {
                    let av = &self.value(*a).data;
                    self.accumulate(grads, *b, g.iter().zip(av).map(|(gv, x)| gv * x));
                }
            }
            Op::Scale { a, k } => {
                self.accumulate(grads, *a, g.iter().map(|v| v * k));
            }
            Op::Tanh { a } => {
                let y = &node.value.data;
                self.accumulate(grads, *a, g.iter().zip(y).map(|(gv, yv)| gv * (1.0 - yv * yv)));
            }
            Op::Sigmoid { a } => {
                let y = &node.value.data;
                self.accumulate(grads, *a, g.iter().zip(y).map(|(gv, yv)| gv * yv * (1.0 - yv)));
            }
            Op::SoftmaxRows { a } => {
                let (m, n) = (node.value.shape[0], node.value.shape[1]);
                let y = &node.value.data;
                let mut da = vec![0.0; m * n];
                for i in 0..m {
                    let yr = &y[i * n..(i + 1) * n];
                    let gr = &g[i * n..(i + 1) * n];
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for j in 0..n {
                        da[i * n + j] = yr[j] * (gr[j] - dot);
                    }
                }
                self.accumulate(grads, *a, da.into_iter());
            }
            Op::Log { a } => {
                let x = &self.value(*a).data;
                self.accumulate(grads, *a, g.iter().zip(x).map(|(gv, xv)| gv / xv));
            }
            Op::Clamp { a, lo, hi } => {
                let x = &self.value(*a).data;
                self.accumulate(
                    grads,
                    *a,
                    g.iter()
                        .zip(x)
                        .map(|(gv, xv)| if *xv >= *lo && *xv <= *hi { *gv } else { 0.0 }),
                );
            }
            Op::Sum { a } => {
                let n = self.value(*a).numel();
                self.accumulate(grads, *a, std::iter::repeat(g[0]).take(n));
            }
            Op::Mean { a } => {
                let n = self.value(*a).numel();
                let gv = g[0] / n as f64;
                self.accumulate(grads, *a, std::iter::repeat(gv).take(n));
            }
            Op::ConcatCols { parts } => {
                let m = node.value.shape[0];
                let total = node.value.shape[1];
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).shape[1];
                    if self.needs(p) {
                        let mut dp = Vec::with_capacity(m * w);
                        for i in 0..m {
                            dp.extend_from_slice(&g[i * total + offset..i * total + offset + w]);
                        }
                        self.accumulate(grads, p, dp.into_iter());
                    }
                    offset += w;
                }
            }
            Op::SliceCols { a, start, end } => {
                let (m, n) = (self.value(*a).shape[0], self.value(*a).shape[1]);
                let w = end - start;
                let mut da = vec![0.0; m * n];
                for i in 0..m {
                    da[i * n + start..i * n + end].copy_from_slice(&g[i * w..(i + 1) * w]);
                }
                self.accumulate(grads, *a, da.into_iter());
            }
            Op::CrossEntropy { logits, labels, probs } => {
                let (m, n) = (self.value(*logits).shape[0], self.value(*logits).shape[1]);
                let scale = g[0] / m as f64;
                let mut dz = Vec::with_capacity(m * n);
                for i in 0..m {
                    for j in 0..n {
                        let onehot = if labels[i] == j { 1.0 } else { 0.0 };
                        dz.push(scale * (probs[i * n + j] - onehot));
                    }
                }
                self.accumulate(grads, *logits, dz.into_iter());
            }
        }
    }
}

pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax of one row with max-subtraction.
pub(crate) fn softmax_row(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&z| (z - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / denom).collect()
}
