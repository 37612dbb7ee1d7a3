//! Reverse-mode autodiff on a recorded tape.
//!
//! Forward values are computed eagerly as nodes are appended; `backward`
//! replays the tape in reverse creation order (which is a reverse
//! topological order, since parents always precede children) and visits
//! each node exactly once. The primitive set is exactly what the model
//! layers need: matmul, 1-D/2-D convolution, pooling, pointwise
//! nonlinearities, softmax, concatenation, dropout, reductions, embedding
//! gather, and a fused softmax cross-entropy.

pub mod gradcheck;
pub mod kernels;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Scalar type used throughout. Double precision keeps the finite-difference
/// oracle meaningful and training bit-reproducible.
pub type Real = f64;

/// Logit offset used to mask padded positions before a softmax.
pub const MASK_LOGIT: Real = -1e30;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(NodeId, NodeId),
    Transpose(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Abs(NodeId),
    /// X[m,n] + b[n], broadcast over rows.
    AddRow(NodeId, NodeId),
    /// X[m,n] + u[m], broadcast over columns.
    AddCol(NodeId, NodeId),
    /// X[m,n] * r[n], broadcast over rows.
    MulRow(NodeId, NodeId),
    Scale(NodeId, Real),
    Relu(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Softmax {
        x: NodeId,
        axis: usize,
    },
    Concat {
        parts: Vec<NodeId>,
        axis: usize,
    },
    Reshape(NodeId),
    Conv1dValid {
        x: NodeId,
        kernel: NodeId,
    },
    Conv2dSame {
        x: NodeId,
        kernel: NodeId,
    },
    /// 2x2 max pool, stride 2, ceil semantics at the border.
    MaxPool2x2 {
        x: NodeId,
        argmax: Vec<usize>,
    },
    /// Column-wise max over the first axis of [rows, cols].
    MaxOverRows {
        x: NodeId,
        argmax: Vec<usize>,
    },
    /// Inverted dropout; `mask` holds 0 or 1/keep multipliers.
    Dropout {
        x: NodeId,
        mask: Arc<Vec<Real>>,
    },
    SumAll(NodeId),
    MeanAll(NodeId),
    /// Row gather from a [vocab, dim] table.
    Gather {
        table: NodeId,
        ids: Vec<usize>,
    },
    /// I[i,j,k] = P[i,k] * H[j,k] for P[p,d], H[h,d].
    OuterMul(NodeId, NodeId),
    /// Mean softmax cross-entropy over rows of [batch, classes].
    SoftmaxCrossEntropy {
        logits: NodeId,
        labels: Vec<usize>,
        probs: Arc<Vec<Real>>,
    },
}

struct Node {
    shape: Vec<usize>,
    values: Arc<Vec<Real>>,
    op: Op,
    requires_grad: bool,
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Attribute map for the string-keyed [`Tape::apply`] surface.
#[derive(Debug, Clone, Default)]
pub struct Attrs {
    pub axis: Option<usize>,
    pub keep_rate: Option<Real>,
    pub scale: Option<Real>,
    pub new_shape: Option<Vec<usize>>,
    pub ids: Option<Vec<usize>>,
    pub labels: Option<Vec<usize>>,
    /// Seed for the dropout mask when invoked through `apply`.
    pub seed: Option<u64>,
}

/// Per-node gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Vec<Real>>>,
}

impl Gradients {
    /// Gradient for `id`, if the node required one and was reached.
    pub fn get(&self, id: NodeId) -> Option<&[Real]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }
}

/// Recorded computation graph with eager forward evaluation.
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

    pub fn shape(&self, id: NodeId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    pub fn values(&self, id: NodeId) -> &[Real] {
        &self.nodes[id.0].values
    }

    /// Scalar value of a one-element node.
    pub fn scalar(&self, id: NodeId) -> Real {
        debug_assert_eq!(numel(&self.nodes[id.0].shape), 1);
        self.nodes[id.0].values[0]
    }

    fn push(&mut self, shape: Vec<usize>, values: Vec<Real>, op: Op, requires_grad: bool) -> NodeId {
        debug_assert_eq!(numel(&shape), values.len());
        self.nodes.push(Node {
            shape,
            values: Arc::new(values),
            op,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn requires(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    /// Trainable leaf sharing `values` storage.
    pub fn leaf(&mut self, values: Arc<Vec<Real>>, shape: Vec<usize>) -> NodeId {
        debug_assert_eq!(numel(&shape), values.len());
        self.nodes.push(Node {
            shape,
            values,
            op: Op::Leaf,
            requires_grad: true,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Non-trainable constant leaf (masks, one-hots, feature bits).
    pub fn constant(&mut self, values: Vec<Real>, shape: Vec<usize>) -> NodeId {
        self.push(shape, values, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::shape("matmul", format!("{sa:?} x {sb:?}")));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        kernels::matmul(self.values(a), self.values(b), m, k, n, &mut out);
        let rg = self.requires(a) || self.requires(b);
        Ok(self.push(vec![m, n], out, Op::Matmul(a, b), rg))
    }

    pub fn transpose(&mut self, x: NodeId) -> Result<NodeId> {
        let s = self.shape(x).to_vec();
        if s.len() != 2 {
            return Err(Error::shape("transpose", format!("expected rank 2, got {s:?}")));
        }
        let mut out = vec![0.0; s[0] * s[1]];
        kernels::transpose(self.values(x), s[0], s[1], &mut out);
        let rg = self.requires(x);
        Ok(self.push(vec![s[1], s[0]], out, Op::Transpose(x), rg))
    }

    fn elementwise2(
        &mut self,
        name: &'static str,
        a: NodeId,
        b: NodeId,
        f: impl Fn(Real, Real) -> Real,
        op: Op,
    ) -> Result<NodeId> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(
                name,
                format!("{:?} vs {:?}", self.shape(a), self.shape(b)),
            ));
        }
        let out: Vec<Real> = self
            .values(a)
            .iter()
            .zip(self.values(b).iter())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let rg = self.requires(a) || self.requires(b);
        Ok(self.push(self.shape(a).to_vec(), out, op, rg))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.elementwise2("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.elementwise2("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.elementwise2("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn abs(&mut self, x: NodeId) -> Result<NodeId> {
        let out: Vec<Real> = self.values(x).iter().map(|&v| v.abs()).collect();
        let rg = self.requires(x);
        Ok(self.push(self.shape(x).to_vec(), out, Op::Abs(x), rg))
    }

    fn check_broadcast(
        &self,
        name: &'static str,
        x: NodeId,
        v: NodeId,
        want: usize,
    ) -> Result<(usize, usize)> {
        let sx = self.shape(x);
        let sv = self.shape(v);
        if sx.len() != 2 || sv.len() != 1 || sv[0] != sx[want] {
            return Err(Error::shape(name, format!("{sx:?} with {sv:?}")));
        }
        Ok((sx[0], sx[1]))
    }

    /// X[m,n] + b[n].
    pub fn add_row(&mut self, x: NodeId, b: NodeId) -> Result<NodeId> {
        let (m, n) = self.check_broadcast("add_row", x, b, 1)?;
        let bv = self.values(b).to_vec();
        let out: Vec<Real> = self
            .values(x)
            .iter()
            .enumerate()
            .map(|(i, &v)| v + bv[i % n])
            .collect();
        let rg = self.requires(x) || self.requires(b);
        Ok(self.push(vec![m, n], out, Op::AddRow(x, b), rg))
    }

    /// X[m,n] + u[m].
    pub fn add_col(&mut self, x: NodeId, u: NodeId) -> Result<NodeId> {
        let (m, n) = self.check_broadcast("add_col", x, u, 0)?;
        let uv = self.values(u).to_vec();
        let out: Vec<Real> = self
            .values(x)
            .iter()
            .enumerate()
            .map(|(i, &v)| v + uv[i / n])
            .collect();
        let rg = self.requires(x) || self.requires(u);
        Ok(self.push(vec![m, n], out, Op::AddCol(x, u), rg))
    }

    /// X[m,n] * r[n].
    pub fn mul_row(&mut self, x: NodeId, r: NodeId) -> Result<NodeId> {
        let (m, n) = self.check_broadcast("mul_row", x, r, 1)?;
        let rv = self.values(r).to_vec();
        let out: Vec<Real> = self
            .values(x)
            .iter()
            .enumerate()
            .map(|(i, &v)| v * rv[i % n])
            .collect();
        let rg = self.requires(x) || self.requires(r);
        Ok(self.push(vec![m, n], out, Op::MulRow(x, r), rg))
    }

    pub fn scale(&mut self, x: NodeId, c: Real) -> Result<NodeId> {
        let out: Vec<Real> = self.values(x).iter().map(|&v| v * c).collect();
        let rg = self.requires(x);
        Ok(self.push(self.shape(x).to_vec(), out, Op::Scale(x, c), rg))
    }

    fn unary(
        &mut self,
        x: NodeId,
        f: impl Fn(Real) -> Real,
        op: Op,
    ) -> NodeId {
        let out: Vec<Real> = self.values(x).iter().map(|&v| f(v)).collect();
        let rg = self.requires(x);
        self.push(self.shape(x).to_vec(), out, op, rg)
    }

    pub fn relu(&mut self, x: NodeId) -> Result<NodeId> {
        Ok(self.unary(x, |v| v.max(0.0), Op::Relu(x)))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> Result<NodeId> {
        Ok(self.unary(x, sigmoid, Op::Sigmoid(x)))
    }

    pub fn tanh(&mut self, x: NodeId) -> Result<NodeId> {
        Ok(self.unary(x, Real::tanh, Op::Tanh(x)))
    }

    pub fn softmax(&mut self, x: NodeId, axis: usize) -> Result<NodeId> {
        let s = self.shape(x).to_vec();
        if axis >= s.len() {
            return Err(Error::shape(
                "softmax",
                format!("axis {axis} out of range for {s:?}"),
            ));
        }
        let mut out = vec![0.0; numel(&s)];
        kernels::softmax_axis(self.values(x), &s, axis, &mut out);
        let rg = self.requires(x);
        Ok(self.push(s, out, Op::Softmax { x, axis }, rg))
    }

    pub fn concat(&mut self, parts: &[NodeId], axis: usize) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::shape("concat", "no inputs".to_string()));
        }
        let first = self.shape(parts[0]).to_vec();
        if axis >= first.len() {
            return Err(Error::shape(
                "concat",
                format!("axis {axis} out of range for {first:?}"),
            ));
        }
        let mut total_axis = 0usize;
        for &p in parts {
            let s = self.shape(p);
            if s.len() != first.len()
                || s.iter()
                    .zip(first.iter())
                    .enumerate()
                    .any(|(i, (a, b))| i != axis && a != b)
            {
                return Err(Error::shape(
                    "concat",
                    format!("{s:?} incompatible with {first:?} along axis {axis}"),
                ));
            }
            total_axis += s[axis];
        }
        let mut shape = first.clone();
        shape[axis] = total_axis;
        let inner: usize = first[axis + 1..].iter().product();
        let outer: usize = first[..axis].iter().product();
        let mut out = vec![0.0; numel(&shape)];
        let out_stride = total_axis * inner;
        let mut offset = 0usize;
        for &p in parts {
            let s_axis = self.shape(p)[axis];
            let vals = self.values(p);
            let in_stride = s_axis * inner;
            for o in 0..outer {
                let src = &vals[o * in_stride..(o + 1) * in_stride];
                let dst = &mut out[o * out_stride + offset * inner..];
                dst[..in_stride].copy_from_slice(src);
            }
            offset += s_axis;
        }
        let rg = parts.iter().any(|&p| self.requires(p));
        Ok(self.push(
            shape,
            out,
            Op::Concat {
                parts: parts.to_vec(),
                axis,
            },
            rg,
        ))
    }

    pub fn reshape(&mut self, x: NodeId, new_shape: Vec<usize>) -> Result<NodeId> {
        if numel(&new_shape) != numel(self.shape(x)) {
            return Err(Error::shape(
                "reshape",
                format!("{:?} -> {:?}", self.shape(x), new_shape),
            ));
        }
        let vals = self.values(x).to_vec();
        let rg = self.requires(x);
        Ok(self.push(new_shape, vals, Op::Reshape(x), rg))
    }

    /// Reshape to a rank-1 vector.
    pub fn flatten(&mut self, x: NodeId) -> Result<NodeId> {
        let n = numel(self.shape(x));
        self.reshape(x, vec![n])
    }

    /// x [len,ci] convolved with kernel [k,ci,co] -> [len-k+1, co].
    pub fn conv1d_valid(&mut self, x: NodeId, kernel: NodeId) -> Result<NodeId> {
        let sx = self.shape(x).to_vec();
        let sk = self.shape(kernel).to_vec();
        if sx.len() != 2 || sk.len() != 3 || sx[1] != sk[1] || sx[0] < sk[0] {
            return Err(Error::shape("conv1d_valid", format!("x {sx:?}, kernel {sk:?}")));
        }
        let (len, ci, k, co) = (sx[0], sx[1], sk[0], sk[2]);
        let mut out = vec![0.0; (len + 1 - k) * co];
        kernels::conv1d_valid(self.values(x), self.values(kernel), len, ci, k, co, &mut out);
        let rg = self.requires(x) || self.requires(kernel);
        Ok(self.push(vec![len + 1 - k, co], out, Op::Conv1dValid { x, kernel }, rg))
    }

    /// x [h,w,ci] or [b,h,w,ci] convolved with kernel [kh,kw,ci,co],
    /// stride 1, zero padding, spatial extents preserved.
    pub fn conv2d_same(&mut self, x: NodeId, kernel: NodeId) -> Result<NodeId> {
        let sx = self.shape(x).to_vec();
        let sk = self.shape(kernel).to_vec();
        if sk.len() != 4 || sk[0] % 2 == 0 || sk[1] % 2 == 0 {
            return Err(Error::shape("conv2d_same", format!("kernel {sk:?}")));
        }
        let (batched, b, h, w, ci) = match sx.len() {
            3 => (false, 1, sx[0], sx[1], sx[2]),
            4 => (true, sx[0], sx[1], sx[2], sx[3]),
            _ => return Err(Error::shape("conv2d_same", format!("x {sx:?}"))),
        };
        if ci != sk[2] {
            return Err(Error::shape(
                "conv2d_same",
                format!("input channels {ci} vs kernel {:?}", sk),
            ));
        }
        let (kh, kw, co) = (sk[0], sk[1], sk[3]);
        let plane_in = h * w * ci;
        let plane_out = h * w * co;
        let mut out = vec![0.0; b * plane_out];
        for i in 0..b {
            kernels::conv2d_same(
                &self.values(x)[i * plane_in..(i + 1) * plane_in],
                self.values(kernel),
                h,
                w,
                ci,
                kh,
                kw,
                co,
                &mut out[i * plane_out..(i + 1) * plane_out],
            );
        }
        let shape = if batched {
            vec![b, h, w, co]
        } else {
            vec![h, w, co]
        };
        let rg = self.requires(x) || self.requires(kernel);
        Ok(self.push(shape, out, Op::Conv2dSame { x, kernel }, rg))
    }

    /// 2x2 max pool with stride 2 on [h,w,c]; border windows shrink, so the
    /// output is [ceil(h/2), ceil(w/2), c]. Ties go to the lowest index.
    pub fn maxpool2x2(&mut self, x: NodeId) -> Result<NodeId> {
        let s = self.shape(x).to_vec();
        if s.len() != 3 {
            return Err(Error::shape("maxpool2x2", format!("x {s:?}")));
        }
        let (h, w, c) = (s[0], s[1], s[2]);
        let (oh, ow) = (kernels::pooled_extent(h), kernels::pooled_extent(w));
        let vals = self.values(x).to_vec();
        let mut out = vec![0.0; oh * ow * c];
        let mut argmax = vec![0usize; oh * ow * c];
        for i in 0..oh {
            for j in 0..ow {
                for ch in 0..c {
                    let mut best = Real::NEG_INFINITY;
                    let mut best_idx = 0usize;
                    for di in 0..2usize {
                        let si = 2 * i + di;
                        if si >= h {
                            continue;
                        }
                        for dj in 0..2usize {
                            let sj = 2 * j + dj;
                            if sj >= w {
                                continue;
                            }
                            let idx = (si * w + sj) * c + ch;
                            if vals[idx] > best {
                                best = vals[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    let oidx = (i * ow + j) * c + ch;
                    out[oidx] = best;
                    argmax[oidx] = best_idx;
                }
            }
        }
        let rg = self.requires(x);
        Ok(self.push(vec![oh, ow, c], out, Op::MaxPool2x2 { x, argmax }, rg))
    }

    /// Column-wise max over rows: [rows, cols] -> [cols]. Ties go to the
    /// lowest row. A single-row input passes through unchanged.
    pub fn max_over_rows(&mut self, x: NodeId) -> Result<NodeId> {
        let s = self.shape(x).to_vec();
        if s.len() != 2 || s[0] == 0 {
            return Err(Error::shape("max_over_rows", format!("x {s:?}")));
        }
        let (rows, cols) = (s[0], s[1]);
        let vals = self.values(x).to_vec();
        let mut out = vec![0.0; cols];
        let mut argmax = vec![0usize; cols];
        for c in 0..cols {
            let mut best = vals[c];
            let mut best_row = 0usize;
            for r in 1..rows {
                let v = vals[r * cols + c];
                if v > best {
                    best = v;
                    best_row = r;
                }
            }
            out[c] = best;
            argmax[c] = best_row * cols + c;
        }
        let rg = self.requires(x);
        Ok(self.push(vec![cols], out, Op::MaxOverRows { x, argmax }, rg))
    }

    /// Inverted dropout: kept entries are scaled by 1/keep at train time so
    /// the evaluation forward needs no rescaling. `keep == 1.0` is exactly
    /// the identity and draws nothing from the generator.
    pub fn dropout(&mut self, x: NodeId, keep: Real, rng: &mut ChaCha8Rng) -> Result<NodeId> {
        if !(0.0 < keep && keep <= 1.0) {
            return Err(Error::shape("dropout", format!("keep rate {keep} outside (0,1]")));
        }
        if keep == 1.0 {
            let vals = self.values(x).to_vec();
            let rg = self.requires(x);
            let mask = Arc::new(vec![1.0; vals.len()]);
            return Ok(self.push(self.shape(x).to_vec(), vals, Op::Dropout { x, mask }, rg));
        }
        let n = numel(self.shape(x));
        let inv = 1.0 / keep;
        let mask: Vec<Real> = (0..n)
            .map(|_| if rng.gen::<Real>() < keep { inv } else { 0.0 })
            .collect();
        let out: Vec<Real> = self
            .values(x)
            .iter()
            .zip(mask.iter())
            .map(|(&v, &m)| v * m)
            .collect();
        let rg = self.requires(x);
        let mask = Arc::new(mask);
        Ok(self.push(self.shape(x).to_vec(), out, Op::Dropout { x, mask }, rg))
    }

    pub fn sum_all(&mut self, x: NodeId) -> Result<NodeId> {
        let s: Real = self.values(x).iter().sum();
        let rg = self.requires(x);
        Ok(self.push(vec![], vec![s], Op::SumAll(x), rg))
    }

    pub fn mean_all(&mut self, x: NodeId) -> Result<NodeId> {
        let n = numel(self.shape(x)) as Real;
        let s: Real = self.values(x).iter().sum::<Real>() / n;
        let rg = self.requires(x);
        Ok(self.push(vec![], vec![s], Op::MeanAll(x), rg))
    }

    /// Rows of `table` [vocab, dim] selected by `ids` -> [ids.len(), dim].
    pub fn gather(&mut self, table: NodeId, ids: &[usize]) -> Result<NodeId> {
        let s = self.shape(table).to_vec();
        if s.len() != 2 {
            return Err(Error::shape("gather", format!("table {s:?}")));
        }
        let (vocab, dim) = (s[0], s[1]);
        if let Some(&bad) = ids.iter().find(|&&i| i >= vocab) {
            return Err(Error::shape(
                "gather",
                format!("id {bad} out of range for table with {vocab} rows"),
            ));
        }
        let vals = self.values(table);
        let mut out = vec![0.0; ids.len() * dim];
        for (r, &id) in ids.iter().enumerate() {
            out[r * dim..(r + 1) * dim].copy_from_slice(&vals[id * dim..(id + 1) * dim]);
        }
        let rg = self.requires(table);
        Ok(self.push(
            vec![ids.len(), dim],
            out,
            Op::Gather {
                table,
                ids: ids.to_vec(),
            },
            rg,
        ))
    }

    /// Dense pairwise elementwise product: P[p,d], H[h,d] -> [p,h,d].
    pub fn outer_mul(&mut self, p: NodeId, h: NodeId) -> Result<NodeId> {
        let sp = self.shape(p).to_vec();
        let sh = self.shape(h).to_vec();
        if sp.len() != 2 || sh.len() != 2 || sp[1] != sh[1] {
            return Err(Error::shape("outer_mul", format!("{sp:?} with {sh:?}")));
        }
        let (np, nh, d) = (sp[0], sh[0], sp[1]);
        let pv = self.values(p);
        let hv = self.values(h);
        let mut out = vec![0.0; np * nh * d];
        for i in 0..np {
            let prow = &pv[i * d..(i + 1) * d];
            for j in 0..nh {
                let hrow = &hv[j * d..(j + 1) * d];
                let orow = &mut out[(i * nh + j) * d..(i * nh + j + 1) * d];
                for k in 0..d {
                    orow[k] = prow[k] * hrow[k];
                }
            }
        }
        let rg = self.requires(p) || self.requires(h);
        Ok(self.push(vec![np, nh, d], out, Op::OuterMul(p, h), rg))
    }

    /// Mean cross-entropy of softmax(logits[b,c]) against integer labels.
    pub fn softmax_cross_entropy(&mut self, logits: NodeId, labels: &[usize]) -> Result<NodeId> {
        let s = self.shape(logits).to_vec();
        if s.len() != 2 || s[0] != labels.len() {
            return Err(Error::shape(
                "softmax_cross_entropy",
                format!("logits {s:?} with {} labels", labels.len()),
            ));
        }
        let (b, c) = (s[0], s[1]);
        if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
            return Err(Error::shape(
                "softmax_cross_entropy",
                format!("label {bad} out of range for {c} classes"),
            ));
        }
        let vals = self.values(logits);
        let mut probs = vec![0.0; b * c];
        let mut loss = 0.0;
        for r in 0..b {
            let row = &vals[r * c..(r + 1) * c];
            let max = row.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
            let mut sum = 0.0;
            for j in 0..c {
                let e = (row[j] - max).exp();
                probs[r * c + j] = e;
                sum += e;
            }
            for j in 0..c {
                probs[r * c + j] /= sum;
            }
            loss += max + sum.ln() - row[labels[r]];
        }
        loss /= b as Real;
        let rg = self.requires(logits);
        let probs = Arc::new(probs);
        Ok(self.push(
            vec![],
            vec![loss],
            Op::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// String-keyed dispatch over the primitive set. Typed builders are the
    /// preferred surface; this exists so the full inventory is reachable by
    /// name with explicit attributes.
    pub fn apply(&mut self, kind: &str, inputs: &[NodeId], attrs: &Attrs) -> Result<NodeId> {
        let need = |n: usize| -> Result<()> {
            if inputs.len() != n {
                Err(Error::shape(
                    "apply",
                    format!("`{kind}` expects {n} inputs, got {}", inputs.len()),
                ))
            } else {
                Ok(())
            }
        };
        match kind {
            "matmul" => {
                need(2)?;
                self.matmul(inputs[0], inputs[1])
            }
            "transpose" => {
                need(1)?;
                self.transpose(inputs[0])
            }
            "add" => {
                need(2)?;
                self.add(inputs[0], inputs[1])
            }
            "sub" => {
                need(2)?;
                self.sub(inputs[0], inputs[1])
            }
            "mul" => {
                need(2)?;
                self.mul(inputs[0], inputs[1])
            }
            "abs" => {
                need(1)?;
                self.abs(inputs[0])
            }
            "add_row" => {
                need(2)?;
                self.add_row(inputs[0], inputs[1])
            }
            "add_col" => {
                need(2)?;
                self.add_col(inputs[0], inputs[1])
            }
            "mul_row" => {
                need(2)?;
                self.mul_row(inputs[0], inputs[1])
            }
            "scale" => {
                need(1)?;
                let c = attrs
                    .scale
                    .ok_or_else(|| Error::Config("scale: missing `scale` attr".into()))?;
                self.scale(inputs[0], c)
            }
            "relu" => {
                need(1)?;
                self.relu(inputs[0])
            }
            "sigmoid" => {
                need(1)?;
                self.sigmoid(inputs[0])
            }
            "tanh" => {
                need(1)?;
                self.tanh(inputs[0])
            }
            "softmax" => {
                need(1)?;
                let axis = attrs
                    .axis
                    .ok_or_else(|| Error::Config("softmax: missing `axis` attr".into()))?;
                self.softmax(inputs[0], axis)
            }
            "concat" => {
                let axis = attrs
                    .axis
                    .ok_or_else(|| Error::Config("concat: missing `axis` attr".into()))?;
                self.concat(inputs, axis)
            }
            "reshape" => {
                need(1)?;
                let shape = attrs
                    .new_shape
                    .clone()
                    .ok_or_else(|| Error::Config("reshape: missing `new_shape` attr".into()))?;
                self.reshape(inputs[0], shape)
            }
            "flatten" => {
                need(1)?;
                self.flatten(inputs[0])
            }
            "conv1d_valid" => {
                need(2)?;
                self.conv1d_valid(inputs[0], inputs[1])
            }
            "conv2d_same" => {
                need(2)?;
                self.conv2d_same(inputs[0], inputs[1])
            }
            "maxpool2x2" => {
                need(1)?;
                self.maxpool2x2(inputs[0])
            }
            "max_over_rows" => {
                need(1)?;
                self.max_over_rows(inputs[0])
            }
            "dropout" => {
                need(1)?;
                let keep = attrs
                    .keep_rate
                    .ok_or_else(|| Error::Config("dropout: missing `keep_rate` attr".into()))?;
                let mut rng = {
                    use rand::SeedableRng;
                    ChaCha8Rng::seed_from_u64(attrs.seed.unwrap_or(0))
                };
                self.dropout(inputs[0], keep, &mut rng)
            }
            "sum" => {
                need(1)?;
                self.sum_all(inputs[0])
            }
            "mean" => {
                need(1)?;
                self.mean_all(inputs[0])
            }
            "gather" => {
                need(1)?;
                let ids = attrs
                    .ids
                    .as_deref()
                    .ok_or_else(|| Error::Config("gather: missing `ids` attr".into()))?;
                self.gather(inputs[0], ids)
            }
            "outer_mul" => {
                need(2)?;
                self.outer_mul(inputs[0], inputs[1])
            }
            "softmax_cross_entropy" => {
                need(1)?;
                let labels = attrs
                    .labels
                    .as_deref()
                    .ok_or_else(|| Error::Config("softmax_cross_entropy: missing `labels`".into()))?;
                self.softmax_cross_entropy(inputs[0], labels)
            }
            other => Err(Error::UnknownPrimitive(other.to_string())),
        }
    }

    /// Reverse pass from a scalar loss. Every reachable gradient-requiring
    /// node gets a gradient; each node is visited once, in reverse creation
    /// order.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        if numel(&self.nodes[loss.0].shape) != 1 {
            return Err(Error::shape(
                "backward",
                format!("loss must be scalar, got {:?}", self.nodes[loss.0].shape),
            ));
        }
        let mut grads: Vec<Option<Vec<Real>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for idx in (0..=loss.0).rev() {
            if grads[idx].is_none() || !self.nodes[idx].requires_grad {
                continue;
            }
            let g = grads[idx].take().unwrap();
            self.accumulate_parents(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn add_into(&self, grads: &mut Vec<Option<Vec<Real>>>, id: NodeId, delta: &[Real]) {
        if !self.nodes[id.0].requires_grad {
            return;
        }
        let slot = grads[id.0].get_or_insert_with(|| vec![0.0; numel(&self.nodes[id.0].shape)]);
        for (s, d) in slot.iter_mut().zip(delta.iter()) {
            *s += d;
        }
    }

    fn accumulate_parents(&self, idx: usize, g: &[Real], grads: &mut Vec<Option<Vec<Real>>>) {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf => {}
            Op::Matmul(a, b) => {
                let (m, k) = (self.nodes[a.0].shape[0], self.nodes[a.0].shape[1]);
                let n = self.nodes[b.0].shape[1];
                if self.requires(*a) {
                    // dA = g * B^T
                    let bv = self.values(*b);
                    let mut da = vec![0.0; m * k];
                    for i in 0..m {
                        for p in 0..k {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += g[i * n + j] * bv[p * n + j];
                            }
                            da[i * k + p] = acc;
                        }
                    }
                    self.add_into(grads, *a, &da);
                }
                if self.requires(*b) {
                    // dB = A^T * g
                    let av = self.values(*a);
                    let mut db = vec![0.0; k * n];
                    for i in 0..m {
                        for p in 0..k {
                            let avv = av[i * k + p];
                            if avv == 0.0 {
                                continue;
                            }
                            for j in 0..n {
                                db[p * n + j] += avv * g[i * n + j];
                            }
                        }
                    }
                    self.add_into(grads, *b, &db);
                }
            }
            Op::Transpose(x) => {
                let (r, c) = (node.shape[0], node.shape[1]);
                let mut dx = vec![0.0; r * c];
                kernels::transpose(g, r, c, &mut dx);
                self.add_into(grads, *x, &dx);
            }
            Op::Add(a, b) => {
                self.add_into(grads, *a, g);
                self.add_into(grads, *b, g);
            }
            Op::Sub(a, b) => {
                self.add_into(grads, *a, g);
                let neg: Vec<Real> = g.iter().map(|&v| -v).collect();
                self.add_into(grads, *b, &neg);
            }
            Op::Mul(a, b) => {
                if self.requires(*a) {
                    let d: Vec<Real> = g
                        .iter()
                        .zip(self.values(*b).iter())
                        .map(|(&gv, &bv)| gv * bv)
                        .collect();
                    self.add_into(grads, *a, &d);
                }
                if self.requires(*b) {
                    let d: Vec<Real> = g
                        .iter()
                        .zip(self.values(*a).iter())
                        .map(|(&gv, &av)| gv * av)
                        .collect();
                    self.add_into(grads, *b, &d);
                }
            }
            Op::Abs(x) => {
                let d: Vec<Real> = g
                    .iter()
                    .zip(self.values(*x).iter())
                    .map(|(&gv, &xv)| {
                        // subgradient 0 at the kink
                        if xv > 0.0 {
                            gv
                        } else if xv < 0.0 {
                            -gv
                        } else {
                            0.0
                        }
                    })
                    .collect();
                self.add_into(grads, *x, &d);
            }
            Op::AddRow(x, b) => {
                self.add_into(grads, *x, g);
                if self.requires(*b) {
                    let n = self.nodes[b.0].shape[0];
                    let mut db = vec![0.0; n];
                    for (i, &gv) in g.iter().enumerate() {
                        db[i % n] += gv;
                    }
                    self.add_into(grads, *b, &db);
                }
            }
            Op::AddCol(x, u) => {
                self.add_into(grads, *x, g);
                if self.requires(*u) {
                    let m = self.nodes[u.0].shape[0];
                    let n = g.len() / m;
                    let mut du = vec![0.0; m];
                    for (i, &gv) in g.iter().enumerate() {
                        du[i / n] += gv;
                    }
                    self.add_into(grads, *u, &du);
                }
            }
            Op::MulRow(x, r) => {
                let n = self.nodes[r.0].shape[0];
                if self.requires(*x) {
                    let rv = self.values(*r);
                    let d: Vec<Real> = g
                        .iter()
                        .enumerate()
                        .map(|(i, &gv)| gv * rv[i % n])
                        .collect();
                    self.add_into(grads, *x, &d);
                }
                if self.requires(*r) {
                    let xv = self.values(*x);
                    let mut dr = vec![0.0; n];
                    for (i, &gv) in g.iter().enumerate() {
                        dr[i % n] += gv * xv[i];
                    }
                    self.add_into(grads, *r, &dr);
                }
            }
            Op::Scale(x, c) => {
                let d: Vec<Real> = g.iter().map(|&v| v * c).collect();
                self.add_into(grads, *x, &d);
            }
            Op::Relu(x) => {
                // subgradient 0 at exactly 0
                let d: Vec<Real> = g
                    .iter()
                    .zip(self.values(*x).iter())
                    .map(|(&gv, &xv)| if xv > 0.0 { gv } else { 0.0 })
                    .collect();
                self.add_into(grads, *x, &d);
            }
            Op::Sigmoid(x) => {
                let d: Vec<Real> = g
                    .iter()
                    .zip(node.values.iter())
                    .map(|(&gv, &s)| gv * s * (1.0 - s))
                    .collect();
                self.add_into(grads, *x, &d);
            }
            Op::Tanh(x) => {
                let d: Vec<Real> = g
                    .iter()
                    .zip(node.values.iter())
                    .map(|(&gv, &t)| gv * (1.0 - t * t))
                    .collect();
                self.add_into(grads, *x, &d);
            }
            Op::Softmax { x, axis } => {
                let mut dx = vec![0.0; g.len()];
                kernels::softmax_axis_backward(&node.values, g, &node.shape, *axis, &mut dx);
                self.add_into(grads, *x, &dx);
            }
            Op::Concat { parts, axis } => {
                let inner: usize = node.shape[*axis + 1..].iter().product();
                let outer: usize = node.shape[..*axis].iter().product();
                let total = node.shape[*axis];
                let out_stride = total * inner;
                let mut offset = 0usize;
                for &p in parts {
                    let s_axis = self.nodes[p.0].shape[*axis];
                    let in_stride = s_axis * inner;
                    if self.requires(p) {
                        let mut dp = vec![0.0; numel(&self.nodes[p.0].shape)];
                        for o in 0..outer {
                            let src = &g[o * out_stride + offset * inner..];
                            dp[o * in_stride..(o + 1) * in_stride]
                                .copy_from_slice(&src[..in_stride]);
                        }
                        self.add_into(grads, p, &dp);
                    }
                    offset += s_axis;
                }
            }
            Op::Reshape(x) => {
                self.add_into(grads, *x, g);
            }
            Op::Conv1dValid { x, kernel } => {
                let sx = &self.nodes[x.0].shape;
                let sk = &self.nodes[kernel.0].shape;
                let (len, ci, k, co) = (sx[0], sx[1], sk[0], sk[2]);
                if self.requires(*x) {
                    let mut dx = vec![0.0; len * ci];
                    kernels::conv1d_valid_dx(g, self.values(*kernel), len, ci, k, co, &mut dx);
                    self.add_into(grads, *x, &dx);
                }
                if self.requires(*kernel) {
                    let mut dk = vec![0.0; k * ci * co];
                    kernels::conv1d_valid_dk(g, self.values(*x), len, ci, k, co, &mut dk);
                    self.add_into(grads, *kernel, &dk);
                }
            }
            Op::Conv2dSame { x, kernel } => {
                let sx = &self.nodes[x.0].shape;
                let sk = &self.nodes[kernel.0].shape;
                let (b, h, w, ci) = match sx.len() {
                    3 => (1, sx[0], sx[1], sx[2]),
                    _ => (sx[0], sx[1], sx[2], sx[3]),
                };
                let (kh, kw, co) = (sk[0], sk[1], sk[3]);
                let plane_in = h * w * ci;
                let plane_out = h * w * co;
                if self.requires(*x) {
                    let mut dx = vec![0.0; b * plane_in];
                    for i in 0..b {
                        kernels::conv2d_same_dx(
                            &g[i * plane_out..(i + 1) * plane_out],
                            self.values(*kernel),
                            h,
                            w,
                            ci,
                            kh,
                            kw,
                            co,
                            &mut dx[i * plane_in..(i + 1) * plane_in],
                        );
                    }
                    self.add_into(grads, *x, &dx);
                }
                if self.requires(*kernel) {
                    let mut dk = vec![0.0; kh * kw * ci * co];
                    for i in 0..b {
                        kernels::conv2d_same_dk(
                            &g[i * plane_out..(i + 1) * plane_out],
                            &self.values(*x)[i * plane_in..(i + 1) * plane_in],
                            h,
                            w,
                            ci,
                            kh,
                            kw,
                            co,
                            &mut dk,
                        );
                    }
                    self.add_into(grads, *kernel, &dk);
                }
            }
            Op::MaxPool2x2 { x, argmax } | Op::MaxOverRows { x, argmax } => {
                let mut dx = vec![0.0; numel(&self.nodes[x.0].shape)];
                for (o, &src) in argmax.iter().enumerate() {
                    dx[src] += g[o];
                }
                self.add_into(grads, *x, &dx);
            }
            Op::Dropout { x, mask } => {
                let d: Vec<Real> = g
                    .iter()
                    .zip(mask.iter())
                    .map(|(&gv, &m)| gv * m)
                    .collect();
                self.add_into(grads, *x, &d);
            }
            Op::SumAll(x) => {
                let d = vec![g[0]; numel(&self.nodes[x.0].shape)];
                self.add_into(grads, *x, &d);
            }
            Op::MeanAll(x) => {
                let n = numel(&self.nodes[x.0].shape);
                let d = vec![g[0] / n as Real; n];
                self.add_into(grads, *x, &d);
            }
            Op::Gather { table, ids } => {
                if self.requires(*table) {
                    let dim = self.nodes[table.0].shape[1];
                    let mut dt = vec![0.0; numel(&self.nodes[table.0].shape)];
                    for (r, &id) in ids.iter().enumerate() {
                        for j in 0..dim {
                            dt[id * dim + j] += g[r * dim + j];
                        }
                    }
                    self.add_into(grads, *table, &dt);
                }
            }
            Op::OuterMul(p, h) => {
                let (np, d) = (self.nodes[p.0].shape[0], self.nodes[p.0].shape[1]);
                let nh = self.nodes[h.0].shape[0];
                if self.requires(*p) {
                    let hv = self.values(*h);
                    let mut dp = vec![0.0; np * d];
                    for i in 0..np {
                        for j in 0..nh {
                            let grow = &g[(i * nh + j) * d..(i * nh + j + 1) * d];
                            let hrow = &hv[j * d..(j + 1) * d];
                            let drow = &mut dp[i * d..(i + 1) * d];
                            for k in 0..d {
                                drow[k] += grow[k] * hrow[k];
                            }
                        }
                    }
                    self.add_into(grads, *p, &dp);
                }
                if self.requires(*h) {
                    let pv = self.values(*p);
                    let mut dh = vec![0.0; nh * d];
                    for i in 0..np {
                        let prow = &pv[i * d..(i + 1) * d];
                        for j in 0..nh {
                            let grow = &g[(i * nh + j) * d..(i * nh + j + 1) * d];
                            let drow = &mut dh[j * d..(j + 1) * d];
                            for k in 0..d {
                                drow[k] += grow[k] * prow[k];
                            }
                        }
                    }
                    self.add_into(grads, *h, &dh);
                }
            }
            Op::SoftmaxCrossEntropy {
                logits,
                labels,
                probs,
            } => {
                if self.requires(*logits) {
                    let b = labels.len();
                    let c = probs.len() / b;
                    let scale = g[0] / b as Real;
                    let mut d = vec![0.0; b * c];
                    for (r, &y) in labels.iter().enumerate() {
                        for j in 0..c {
                            let p = probs[r * c + j];
                            d[r * c + j] = scale * (p - if j == y { 1.0 } else { 0.0 });
                        }
                    }
                    self.add_into(grads, *logits, &d);
                }
            }
        }
    }
}

pub fn sigmoid(x: Real) -> Real {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn softmax_uniform_logits() {
        let mut t = Tape::new();
        let x = t.constant(vec![0.0, 0.0, 0.0], vec![3]);
        let s = t.softmax(x, 0).unwrap();
        for &v in t.values(s) {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_shift_invariance() {
        let mut t = Tape::new();
        let a = t.constant(vec![1.0, 2.0, 3.0], vec![3]);
        let b = t.constant(vec![101.0, 102.0, 103.0], vec![3]);
        let sa = t.softmax(a, 0).unwrap();
        let sb = t.softmax(b, 0).unwrap();
        for (x, y) in t.values(sa).iter().zip(t.values(sb).iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn conv2d_shape_with_batch_dim() {
        let mut t = Tape::new();
        let x = t.constant(vec![0.5; 48 * 48 * 134], vec![1, 48, 48, 134]);
        let k = t.constant(vec![0.01; 3 * 3 * 134 * 20], vec![3, 3, 134, 20]);
        let y = t.conv2d_same(x, k).unwrap();
        assert_eq!(t.shape(y), &[1, 48, 48, 20]);
    }

    #[test]
    fn backward_sum_of_squares() {
        let mut t = Tape::new();
        let x = t.leaf(Arc::new(vec![1.0, 2.0]), vec![2]);
        let sq = t.mul(x, x).unwrap();
        let loss = t.sum_all(sq).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &[2.0, 4.0]);
    }

    #[test]
    fn backward_sigmoid_at_zero() {
        let mut t = Tape::new();
        let x = t.leaf(Arc::new(vec![0.0]), vec![1]);
        let s = t.sigmoid(x).unwrap();
        let loss = t.sum_all(s).unwrap();
        let g = t.backward(loss).unwrap();
        assert!((g.get(x).unwrap()[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let mut t = Tape::new();
        let x = t.leaf(Arc::new(vec![1.0, 2.0]), vec![2]);
        assert!(t.backward(x).is_err());
    }

    #[test]
    fn dropout_keep_one_is_identity() {
        let mut t = Tape::new();
        let mut r = rng(7);
        let x = t.leaf(Arc::new(vec![1.0, -2.0, 3.0]), vec![3]);
        let y = t.dropout(x, 1.0, &mut r).unwrap();
        assert_eq!(t.values(y), t.values(x));
        let loss = t.sum_all(y).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn maxpool_over_time_single_row_identity() {
        let mut t = Tape::new();
        let x = t.constant(vec![0.3, -1.5, 2.0], vec![1, 3]);
        let y = t.max_over_rows(x).unwrap();
        assert_eq!(t.values(y), &[0.3, -1.5, 2.0]);
    }

    #[test]
    fn maxpool_ties_break_to_lowest_index() {
        let mut t = Tape::new();
        let x = t.leaf(Arc::new(vec![1.0, 1.0, 1.0, 1.0]), vec![2, 2, 1]);
        let y = t.maxpool2x2(x).unwrap();
        let loss = t.sum_all(y).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(x).unwrap(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn same_seed_same_values() {
        let run = |seed: u64| -> Vec<Real> {
            let mut t = Tape::new();
            let mut r = rng(seed);
            let x = t.constant(vec![0.5; 12], vec![3, 4]);
            let d = t.dropout(x, 0.6, &mut r).unwrap();
            t.values(d).to_vec()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn shape_mismatch_names_primitive_and_extents() {
        let mut t = Tape::new();
        let a = t.constant(vec![0.0; 6], vec![2, 3]);
        let b = t.constant(vec![0.0; 6], vec![2, 3]);
        let err = t.matmul(a, b).unwrap_err().to_string();
        assert!(err.contains("matmul"), "{err}");
        assert!(err.contains("[2, 3]"), "{err}");
    }

    #[test]
    fn apply_unknown_primitive_rejected() {
        let mut t = Tape::new();
        let x = t.constant(vec![1.0], vec![1]);
        match t.apply("frobnicate", &[x], &Attrs::default()) {
            Err(Error::UnknownPrimitive(name)) => assert_eq!(name, "frobnicate"),
            other => panic!("expected unknown-primitive error, got {other:?}"),
        }
    }

    #[test]
    fn apply_matches_typed_builders() {
        let mut t = Tape::new();
        let a = t.constant(vec![1.0, 2.0, 3.0, 4.0], vec![2, 2]);
        let b = t.constant(vec![5.0, 6.0, 7.0, 8.0], vec![2, 2]);
        let via_apply = t.apply("matmul", &[a, b], &Attrs::default()).unwrap();
        let typed = t.matmul(a, b).unwrap();
        assert_eq!(t.values(via_apply), t.values(typed));
    }

    #[test]
    fn cross_entropy_uniform_logits_is_ln3() {
        let mut t = Tape::new();
        let logits = t.constant(vec![0.0; 6], vec![2, 3]);
        let loss = t.softmax_cross_entropy(logits, &[0, 2]).unwrap();
        assert!((t.scalar(loss) - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn concat_axis1_and_backward_split() {
        let mut t = Tape::new();
        let a = t.leaf(Arc::new(vec![1.0, 2.0, 3.0, 4.0]), vec![2, 2]);
        let b = t.leaf(Arc::new(vec![5.0, 6.0]), vec![2, 1]);
        let c = t.concat(&[a, b], 1).unwrap();
        assert_eq!(t.shape(c), &[2, 3]);
        assert_eq!(t.values(c), &[1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
        let w = t.constant(vec![1.0, 10.0, 100.0, 1.0, 10.0, 100.0], vec![2, 3]);
        let prod = t.mul(c, w).unwrap();
        let loss = t.sum_all(prod).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(a).unwrap(), &[1.0, 10.0, 1.0, 10.0]);
        assert_eq!(g.get(b).unwrap(), &[100.0, 100.0]);
    }

    #[test]
    fn outer_mul_matches_triple_loop() {
        let mut t = Tape::new();
        let p = t.constant(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![2, 3]);
        let h = t.constant(vec![0.5, -1.0, 2.0], vec![1, 3]);
        let i = t.outer_mul(p, h).unwrap();
        assert_eq!(t.shape(i), &[2, 1, 3]);
        assert_eq!(t.values(i), &[0.5, -2.0, 6.0, 2.0, -5.0, 12.0]);
    }
}
