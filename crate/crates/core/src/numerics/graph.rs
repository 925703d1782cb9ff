//! Define-by-run reverse-mode differentiation.
//!
//! A [`Graph`] is an append-only tape. Every operation evaluates eagerly and
//! records its inputs, so node ids are already in topological order and the
//! backward sweep is a single reverse pass.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::tensor::{gemm_nn, gemm_nt, gemm_tn, Tensor};
use crate::math;
use crate::{Error, Result};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
    /// Softmax along the last axis, row by row.
    Softmax,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRowBias(Var, Var),
    Scale(Var, f64),
    Act(Var, Activation),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    GatherRows(Var, Vec<usize>),
    RowSum(Var),
    Sum(Var),
    NormalizeRows(Var),
    Mixture { experts: Var, gates: Var },
    BceWithLogits(Var, Vec<f64>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// The tape.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Result of [`Graph::backward`]: one optional gradient per node.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zeros when `v` does not
    /// reach the loss.
    pub fn get(&self, v: Var) -> Tensor {
        let (r, c) = self.shapes[v.0];
        match &self.grads[v.0] {
            Some(g) => Tensor::matrix(r, c, g.clone()).expect("gradient shape"),
            None => Tensor::zeros(r, c),
        }
    }

    pub fn is_reached(&self, v: Var) -> bool {
        self.grads[v.0].is_some()
    }
}

fn shape_err(what: &str, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::InvalidShape(format!("{what}: [{}x{}] vs [{}x{}]", a.0, a.1, b.0, b.1))
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
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

    pub fn dims(&self, v: Var) -> (usize, usize) {
        let s = self.nodes[v.0].value.shape();
        (s[0], s[1])
    }

    /// Scalar value of a `[1 × 1]` node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn check_rank2(t: &Tensor) -> Result<()> {
        t.dims2().map(|_| ())
    }

    /// A differentiable input (a parameter).
    pub fn param(&mut self, value: Tensor) -> Result<Var> {
        Self::check_rank2(&value)?;
        Ok(self.push(value, Op::Leaf, true))
    }

    /// A constant input; never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Result<Var> {
        Self::check_rank2(&value)?;
        Ok(self.push(value, Op::Leaf, false))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims(a);
        let (k2, n) = self.dims(b);
        if k != k2 {
            return Err(shape_err("matmul", (m, k), (k2, n)));
        }
        let mut out = vec![0.0; m * n];
        gemm_nn(m, k, n, self.data(a), self.data(b), &mut out);
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::MatMul(a, b), rg))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a).transpose()?;
        let rg = self.rg(&[a]);
        Ok(self.push(t, Op::Transpose(a), rg))
    }

    fn zip(&mut self, a: Var, b: Var, what: &str, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        let (da, db) = (self.dims(a), self.dims(b));
        if da != db {
            return Err(shape_err(what, da, db));
        }
        let out: Vec<f64> = self.data(a).iter().zip(self.data(b)).map(|(&x, &y)| f(x, y)).collect();
        let rg = self.rg(&[a, b]);
        Ok(self.push(Tensor::matrix(da.0, da.1, out)?, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    /// `a[m×n] + bias[1×n]` broadcast over rows; the only broadcast supported.
    pub fn add_row_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (m, n) = self.dims(a);
        let db = self.dims(bias);
        if db != (1, n) {
            return Err(shape_err("add_row_bias", (m, n), db));
        }
        let b = self.data(bias);
        let out: Vec<f64> = self.data(a).chunks(n).flat_map(|r| r.iter().zip(b).map(|(x, y)| x + y)).collect();
        let rg = self.rg(&[a, bias]);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::AddRowBias(a, bias), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let (m, n) = self.dims(a);
        let out: Vec<f64> = self.data(a).iter().map(|x| x * c).collect();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::Scale(a, c), rg))
    }

    pub fn activation(&mut self, a: Var, kind: Activation) -> Result<Var> {
        let (m, n) = self.dims(a);
        let x = self.data(a);
        let out: Vec<f64> = match kind {
            Activation::Sigmoid => x.iter().map(|&v| math::sigmoid(v)).collect(),
            Activation::Tanh => x.iter().map(|&v| math::tanh(v)).collect(),
            Activation::Relu => x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect(),
            Activation::Softmax => {
                let mut out = Vec::with_capacity(x.len());
                for row in x.chunks(n) {
                    let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let start = out.len();
                    let mut s = 0.0;
                    for &v in row {
                        let e = math::exp(v - mx);
                        s += e;
                        out.push(e);
                    }
                    for e in &mut out[start..] {
                        *e /= s;
                    }
                }
                out
            }
        };
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::Act(a, kind), rg))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.activation(a, Activation::Sigmoid)
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.activation(a, Activation::Tanh)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.activation(a, Activation::Relu)
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        self.activation(a, Activation::Softmax)
    }

    /// Horizontal concatenation; all parts share the row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::EmptySequence("concat_cols"))?;
        let m = self.dims(first).0;
        let mut n = 0;
        for &p in parts {
            let d = self.dims(p);
            if d.0 != m {
                return Err(shape_err("concat_cols", (m, n), d));
            }
            n += d.1;
        }
        let mut out = Vec::with_capacity(m * n);
        for r in 0..m {
            for &p in parts {
                out.extend_from_slice(self.value(p).row_slice(r));
            }
        }
        let rg = self.rg(parts);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::ConcatCols(parts.to_vec()), rg))
    }

    /// Vertical stacking; all parts share the column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(Error::EmptySequence("concat_rows"))?;
        let n = self.dims(first).1;
        let mut m = 0;
        let mut out = Vec::new();
        for &p in parts {
            let d = self.dims(p);
            if d.1 != n {
                return Err(shape_err("concat_rows", (m, n), d));
            }
            m += d.0;
            out.extend_from_slice(self.data(p));
        }
        let rg = self.rg(parts);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::ConcatRows(parts.to_vec()), rg))
    }

    /// Columns `start..start + len`.
    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let (m, n) = self.dims(a);
        if len == 0 || start + len > n {
            return Err(Error::InvalidShape(format!("slice {start}..{} of {n} columns", start + len)));
        }
        let out: Vec<f64> = self.data(a).chunks(n).flat_map(|r| r[start..start + len].iter().copied()).collect();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::matrix(m, len, out)?, Op::SliceCols(a, start), rg))
    }

    /// Rows of `table` in the order given by `ids`; repeats allowed.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (vocab, n) = self.dims(table);
        if ids.is_empty() {
            return Err(Error::EmptySequence("gather_rows"));
        }
        let mut out = Vec::with_capacity(ids.len() * n);
        for &i in ids {
            if i >= vocab {
                return Err(Error::Lookup { index: i, vocab });
            }
            out.extend_from_slice(self.value(table).row_slice(i));
        }
        let rg = self.rg(&[table]);
        Ok(self.push(Tensor::matrix(ids.len(), n, out)?, Op::GatherRows(table, ids.to_vec()), rg))
    }

    /// Sum of every row: `[m×n] → [m×1]`.
    pub fn row_sum(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.dims(a);
        let out: Vec<f64> = self.data(a).chunks(n).map(|r| r.iter().sum()).collect();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::matrix(m, 1, out)?, Op::RowSum(a), rg))
    }

    /// Sum of all entries: `[m×n] → [1×1]`.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s: f64 = self.data(a).iter().sum();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::scalar(s), Op::Sum(a), rg))
    }

    /// Each row divided by its Euclidean norm; zero rows stay zero.
    pub fn normalize_rows(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.dims(a);
        let mut out = Vec::with_capacity(m * n);
        for r in self.data(a).chunks(n) {
            let norm = math::sqrt(r.iter().map(|x| x * x).sum());
            if norm > 0.0 {
                out.extend(r.iter().map(|x| x / norm));
            } else {
                out.extend(core::iter::repeat_n(0.0, n));
            }
        }
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::NormalizeRows(a), rg))
    }

    /// Per-row gated mixture of expert blocks.
    ///
    /// `experts` is `[m × (e·d)]` with expert `j` in columns `j·d..(j+1)·d`,
    /// `gates` is `[m × e]`; the result is `[m × d]` with
    /// `out[r] = Σ_j gates[r, j] · experts[r, j·d..(j+1)·d]`.
    pub fn mixture(&mut self, experts: Var, gates: Var) -> Result<Var> {
        let (m, ed) = self.dims(experts);
        let (mg, e) = self.dims(gates);
        if m != mg || ed % e != 0 {
            return Err(shape_err("mixture", (m, ed), (mg, e)));
        }
        let d = ed / e;
        let x = self.data(experts);
        let g = self.data(gates);
        let mut out = vec![0.0; m * d];
        for r in 0..m {
            let o = &mut out[r * d..(r + 1) * d];
            for j in 0..e {
                let w = g[r * e + j];
                let block = &x[r * ed + j * d..r * ed + (j + 1) * d];
                for (ov, &xv) in o.iter_mut().zip(block) {
                    *ov += w * xv;
                }
            }
        }
        let rg = self.rg(&[experts, gates]);
        Ok(self.push(Tensor::matrix(m, d, out)?, Op::Mixture { experts, gates }, rg))
    }

    /// Summed binary cross-entropy of `logits` (any shape) against `labels`
    /// in `[0, 1]`, computed from the logits for stability.
    pub fn bce_with_logits(&mut self, logits: Var, labels: &[f64]) -> Result<Var> {
        let z = self.data(logits);
        if z.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "bce logits vs labels",
                left: z.len(),
                right: labels.len(),
            });
        }
        let loss: f64 = z.iter().zip(labels).map(|(&z, &y)| bce_with_logits(z, y)).sum();
        let rg = self.rg(&[logits]);
        Ok(self.push(Tensor::scalar(loss), Op::BceWithLogits(logits, labels.to_vec()), rg))
    }

    /// Signs of every relu input on the tape. Finite-difference checks use
    /// this to detect when a perturbation crosses a kink.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Op::Act(a, Activation::Relu) = node.op {
                out.extend(self.data(a).iter().map(|&v| v > 0.0));
            }
        }
        out
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let ld = self.dims(loss);
        if ld != (1, 1) {
            return Err(Error::Contract(format!("loss must be a scalar, got [{}x{}]", ld.0, ld.1)));
        }
        let n = loss.0 + 1;
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        let shapes: Vec<(usize, usize)> = self.nodes.iter().map(|nd| {
            let s = nd.value.shape();
            (s[0], s[1])
        }).collect();
        if self.nodes[loss.0].requires_grad {
            grads[loss.0] = Some(vec![1.0]);
        }
        for id in (0..n).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            self.propagate(node, &g, &mut grads);
            grads[id] = Some(g);
        }
        // Only differentiable nodes carry gradients.
        for (id, g) in grads.iter_mut().enumerate() {
            if !self.nodes[id].requires_grad {
                *g = None;
            }
        }
        Ok(Gradients { grads, shapes })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let out = node.value.data();
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul(a, b) => {
                let (m, k) = self.dims(a);
                let n = self.dims(b).1;
                if self.requires_grad(a) {
                    let ga = acc(grads, a, m * k);
                    gemm_nt(m, n, k, g, self.data(b), ga);
                }
                if self.requires_grad(b) {
                    let gb = acc(grads, b, k * n);
                    gemm_tn(k, m, n, self.data(a), g, gb);
                }
            }
            &Op::Transpose(a) => {
                if self.requires_grad(a) {
                    let (r, c) = self.dims(a);
                    let ga = acc(grads, a, r * c);
                    for i in 0..r {
                        for j in 0..c {
                            ga[i * c + j] += g[j * r + i];
                        }
                    }
                }
            }
            &Op::Add(a, b) => {
                self.acc_scaled(grads, a, g, 1.0);
                self.acc_scaled(grads, b, g, 1.0);
            }
            &Op::Sub(a, b) => {
                self.acc_scaled(grads, a, g, 1.0);
                self.acc_scaled(grads, b, g, -1.0);
            }
            &Op::Mul(a, b) => {
                if self.requires_grad(a) {
                    let bv = self.data(b);
                    let ga = acc(grads, a, g.len());
                    for ((o, &gi), &bi) in ga.iter_mut().zip(g).zip(bv) {
                        *o += gi * bi;
                    }
                }
                if self.requires_grad(b) {
                    let av = self.data(a);
                    let gb = acc(grads, b, g.len());
                    for ((o, &gi), &ai) in gb.iter_mut().zip(g).zip(av) {
                        *o += gi * ai;
                    }
                }
            }
            &Op::AddRowBias(a, bias) => {
                self.acc_scaled(grads, a, g, 1.0);
                if self.requires_grad(bias) {
                    let n = self.dims(bias).1;
                    let gb = acc(grads, bias, n);
                    for row in g.chunks(n) {
                        for (o, &v) in gb.iter_mut().zip(row) {
                            *o += v;
                        }
                    }
                }
            }
            &Op::Scale(a, c) => self.acc_scaled(grads, a, g, c),
            &Op::Act(a, kind) => {
                if !self.requires_grad(a) {
                    return;
                }
                let x = self.data(a);
                let n = self.dims(a).1;
                let ga = acc(grads, a, g.len());
                match kind {
                    Activation::Sigmoid => {
                        for ((o, &gi), &y) in ga.iter_mut().zip(g).zip(out) {
                            *o += gi * y * (1.0 - y);
                        }
                    }
                    Activation::Tanh => {
                        for ((o, &gi), &y) in ga.iter_mut().zip(g).zip(out) {
                            *o += gi * (1.0 - y * y);
                        }
                    }
                    Activation::Relu => {
                        for ((o, &gi), &xi) in ga.iter_mut().zip(g).zip(x) {
                            if xi > 0.0 {
                                *o += gi;
                            }
                        }
                    }
                    Activation::Softmax => {
                        for ((orow, grow), yrow) in ga.chunks_mut(n).zip(g.chunks(n)).zip(out.chunks(n)) {
                            let dot: f64 = grow.iter().zip(yrow).map(|(a, b)| a * b).sum();
                            for ((o, &gi), &y) in orow.iter_mut().zip(grow).zip(yrow) {
                                *o += y * (gi - dot);
                            }
                        }
                    }
                }
            }
            Op::ConcatCols(parts) => {
                let (m, n) = (node.value.rows(), node.value.cols());
                let mut offset = 0;
                for &p in parts {
                    let w = self.dims(p).1;
                    if self.requires_grad(p) {
                        let gp = acc(grads, p, m * w);
                        for r in 0..m {
                            for (o, &v) in gp[r * w..(r + 1) * w].iter_mut().zip(&g[r * n + offset..r * n + offset + w]) {
                                *o += v;
                            }
                        }
                    }
                    offset += w;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    if self.requires_grad(p) {
                        let gp = acc(grads, p, len);
                        for (o, &v) in gp.iter_mut().zip(&g[offset..offset + len]) {
                            *o += v;
                        }
                    }
                    offset += len;
                }
            }
            &Op::SliceCols(a, start) => {
                if self.requires_grad(a) {
                    let (m, n) = self.dims(a);
                    let w = node.value.cols();
                    let ga = acc(grads, a, m * n);
                    for r in 0..m {
                        for (o, &v) in ga[r * n + start..r * n + start + w].iter_mut().zip(&g[r * w..(r + 1) * w]) {
                            *o += v;
                        }
                    }
                }
            }
            Op::GatherRows(table, ids) => {
                if self.requires_grad(*table) {
                    let (vocab, n) = self.dims(*table);
                    let gt = acc(grads, *table, vocab * n);
                    for (k, &i) in ids.iter().enumerate() {
                        for (o, &v) in gt[i * n..(i + 1) * n].iter_mut().zip(&g[k * n..(k + 1) * n]) {
                            *o += v;
                        }
                    }
                }
            }
            &Op::RowSum(a) => {
                if self.requires_grad(a) {
                    let (m, n) = self.dims(a);
                    let ga = acc(grads, a, m * n);
                    for r in 0..m {
                        for o in &mut ga[r * n..(r + 1) * n] {
                            *o += g[r];
                        }
                    }
                }
            }
            &Op::Sum(a) => {
                if self.requires_grad(a) {
                    let len = self.value(a).len();
                    let ga = acc(grads, a, len);
                    for o in ga.iter_mut() {
                        *o += g[0];
                    }
                }
            }
            &Op::NormalizeRows(a) => {
                if self.requires_grad(a) {
                    let (m, n) = self.dims(a);
                    let x = self.data(a);
                    let ga = acc(grads, a, m * n);
                    for r in 0..m {
                        let xr = &x[r * n..(r + 1) * n];
                        let norm = math::sqrt(xr.iter().map(|v| v * v).sum());
                        if norm == 0.0 {
                            continue;
                        }
                        let yr = &out[r * n..(r + 1) * n];
                        let gr = &g[r * n..(r + 1) * n];
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for ((o, &gi), &yi) in ga[r * n..(r + 1) * n].iter_mut().zip(gr).zip(yr) {
                            *o += (gi - yi * dot) / norm;
                        }
                    }
                }
            }
            &Op::Mixture { experts, gates } => {
                let (m, ed) = self.dims(experts);
                let e = self.dims(gates).1;
                let d = ed / e;
                if self.requires_grad(experts) {
                    let gv = self.data(gates);
                    let gx = acc(grads, experts, m * ed);
                    for r in 0..m {
                        for j in 0..e {
                            let w = gv[r * e + j];
                            for c in 0..d {
                                gx[r * ed + j * d + c] += w * g[r * d + c];
                            }
                        }
                    }
                }
                if self.requires_grad(gates) {
                    let xv = self.data(experts);
                    let gg = acc(grads, gates, m * e);
                    for r in 0..m {
                        for j in 0..e {
                            let block = &xv[r * ed + j * d..r * ed + (j + 1) * d];
                            let s: f64 = block.iter().zip(&g[r * d..(r + 1) * d]).map(|(a, b)| a * b).sum();
                            gg[r * e + j] += s;
                        }
                    }
                }
            }
            Op::BceWithLogits(logits, labels) => {
                if self.requires_grad(*logits) {
                    let z = self.data(*logits);
                    let gl = acc(grads, *logits, z.len());
                    for ((o, &zi), &y) in gl.iter_mut().zip(z).zip(labels) {
                        *o += g[0] * (math::sigmoid(zi) - y);
                    }
                }
            }
        }
    }

    fn acc_scaled(&self, grads: &mut [Option<Vec<f64>>], a: Var, g: &[f64], c: f64) {
        if !self.requires_grad(a) {
            return;
        }
        let ga = acc(grads, a, g.len());
        if c == 1.0 {
            for (o, &v) in ga.iter_mut().zip(g) {
                *o += v;
            }
        } else {
            for (o, &v) in ga.iter_mut().zip(g) {
                *o += c * v;
            }
        }
    }
}

fn acc(grads: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
    grads[v.0].get_or_insert_with(|| vec![0.0; len])
}

/// `max(z, 0) − z·y + ln(1 + e^{−|z|})`.
pub fn bce_with_logits(z: f64, y: f64) -> f64 {
    let pos = if z > 0.0 { z } else { 0.0 };
    let abs = if z < 0.0 { -z } else { z };
    pos - z * y + math::ln_1p(math::exp(-abs))
}
