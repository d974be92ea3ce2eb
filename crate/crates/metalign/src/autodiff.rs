//! Reverse-mode differentiation over dense f64 matrices.
//!
//! A [`Tape`] records an eager computation as a flat list of nodes; each
//! op computes its value immediately and [`Tape::backward`] walks the
//! list in reverse to accumulate gradients. The op set is exactly what
//! the structure encoder and the ranking losses need: dense and sparse
//! matrix products, elementwise nonlinearities, row gather/scatter,
//! per-row Manhattan distances, a hinge reduction, and a fused
//! neighbor-attention aggregation.
//!
//! Everything is single-threaded and evaluation order is fixed, so for a
//! given input the computed values and gradients are bit-identical
//! across runs.

use ndarray::Array2;
use std::rc::Rc;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

/// Negative-side slope of the attention logit rectifier.
pub const ATTENTION_SLOPE: f64 = 0.2;

/// Sparse matrix in CSR form. Rows and columns index the same vertex
/// set; the encoder only builds symmetric matrices, so the transpose
/// needed by backward is the matrix itself.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Build from per-row adjacency lists.
    pub fn from_rows(rows: &[Vec<(u32, f64)>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for &(j, w) in row {
                col.push(j);
                val.push(w);
            }
            row_ptr.push(col.len());
        }
        Csr { n, row_ptr, col, val }
    }

    pub fn matmul(&self, x: &Array2<f64>) -> Array2<f64> {
        let d = x.ncols();
        let mut out = Array2::zeros((self.n, d));
        for i in 0..self.n {
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[e] as usize;
                let w = self.val[e];
                let src = x.row(j);
                let mut dst = out.row_mut(i);
                dst.scaled_add(w, &src);
            }
        }
        out
    }
}

enum Op {
    Leaf,
    MatMul,
    Spmm(Rc<Csr>),
    Add,
    Sub,
    Mul,
    Scale(f64),
    Sigmoid,
    Softplus,
    ConcatCols,
    GatherRows(Rc<Vec<usize>>),
    ScatterRows(Rc<Vec<usize>>),
    RowL1,
    HingePairs(f64),
    GatAttention(Rc<Vec<Vec<u32>>>),
}

struct Node {
    value: Array2<f64>,
    op: Op,
    parents: Vec<TensorId>,
    needs_grad: bool,
}

/// Gradients keyed by tape node.
pub struct Grads {
    slots: Vec<Option<Array2<f64>>>,
}

impl Grads {
    pub fn get(&self, id: TensorId) -> Option<&Array2<f64>> {
        self.slots[id.0].as_ref()
    }

    /// Gradient of a node, or zeros if it never received one.
    pub fn get_or_zeros(&self, id: TensorId, shape: (usize, usize)) -> Array2<f64> {
        match &self.slots[id.0] {
            Some(g) => g.clone(),
            None => Array2::zeros(shape),
        }
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus_scalar(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn value(&self, id: TensorId) -> &Array2<f64> {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: TensorId) -> f64 {
        let v = &self.nodes[id.0].value;
        assert_eq!(v.dim(), (1, 1), "scalar() on non-scalar node");
        v[(0, 0)]
    }

    fn push(&mut self, value: Array2<f64>, op: Op, parents: Vec<TensorId>) -> TensorId {
        let needs_grad = match op {
            Op::Leaf => false,
            _ => parents.iter().any(|p| self.nodes[p.0].needs_grad),
        };
        self.nodes.push(Node { value, op, parents, needs_grad });
        TensorId(self.nodes.len() - 1)
    }

    /// Constant input; gradients are not tracked through it.
    pub fn constant(&mut self, value: Array2<f64>) -> TensorId {
        self.push(value, Op::Leaf, vec![])
    }

    /// Trainable input; `backward` will produce its gradient.
    pub fn param(&mut self, value: Array2<f64>) -> TensorId {
        let id = self.push(value, Op::Leaf, vec![]);
        self.nodes[id.0].needs_grad = true;
        id
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = self.nodes[a.0].value.dot(&self.nodes[b.0].value);
        self.push(value, Op::MatMul, vec![a, b])
    }

    /// Constant sparse matrix times dense node. The matrix must be
    /// symmetric (the backward pass reuses it as its own transpose).
    pub fn spmm(&mut self, m: Rc<Csr>, x: TensorId) -> TensorId {
        let value = m.matmul(&self.nodes[x.0].value);
        self.push(value, Op::Spmm(m), vec![x])
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = &self.nodes[a.0].value + &self.nodes[b.0].value;
        self.push(value, Op::Add, vec![a, b])
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = &self.nodes[a.0].value - &self.nodes[b.0].value;
        self.push(value, Op::Sub, vec![a, b])
    }

    pub fn mul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = &self.nodes[a.0].value * &self.nodes[b.0].value;
        self.push(value, Op::Mul, vec![a, b])
    }

    pub fn scale(&mut self, a: TensorId, c: f64) -> TensorId {
        let value = self.nodes[a.0].value.mapv(|x| c * x);
        self.push(value, Op::Scale(c), vec![a])
    }

    pub fn sigmoid(&mut self, a: TensorId) -> TensorId {
        let value = self.nodes[a.0].value.mapv(sigmoid_scalar);
        self.push(value, Op::Sigmoid, vec![a])
    }

    pub fn softplus(&mut self, a: TensorId) -> TensorId {
        let value = self.nodes[a.0].value.mapv(softplus_scalar);
        self.push(value, Op::Softplus, vec![a])
    }

    pub fn concat_cols(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.nrows(), vb.nrows(), "concat_cols row mismatch");
        let mut value = Array2::zeros((va.nrows(), va.ncols() + vb.ncols()));
        value.slice_mut(ndarray::s![.., ..va.ncols()]).assign(va);
        value.slice_mut(ndarray::s![.., va.ncols()..]).assign(vb);
        self.push(value, Op::ConcatCols, vec![a, b])
    }

    pub fn gather_rows(&mut self, a: TensorId, rows: Rc<Vec<usize>>) -> TensorId {
        let va = &self.nodes[a.0].value;
        let mut value = Array2::zeros((rows.len(), va.ncols()));
        for (k, &r) in rows.iter().enumerate() {
            value.row_mut(k).assign(&va.row(r));
        }
        self.push(value, Op::GatherRows(rows), vec![a])
    }

    /// Place the rows of `a` at `rows` inside an `n_rows`-row zero
    /// matrix. Destination rows must be distinct.
    pub fn scatter_rows(&mut self, a: TensorId, rows: Rc<Vec<usize>>, n_rows: usize) -> TensorId {
        let va = &self.nodes[a.0].value;
        assert_eq!(va.nrows(), rows.len(), "scatter_rows count mismatch");
        let mut value = Array2::zeros((n_rows, va.ncols()));
        for (k, &r) in rows.iter().enumerate() {
            value.row_mut(r).assign(&va.row(k));
        }
        self.push(value, Op::ScatterRows(rows), vec![a])
    }

    /// Per-row Manhattan distance between two equally shaped matrices;
    /// result is a column vector.
    pub fn row_l1(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.dim(), vb.dim(), "row_l1 shape mismatch");
        let mut value = Array2::zeros((va.nrows(), 1));
        for i in 0..va.nrows() {
            let mut s = 0.0;
            for j in 0..va.ncols() {
                s += (va[(i, j)] - vb[(i, j)]).abs();
            }
            value[(i, 0)] = s;
        }
        self.push(value, Op::RowL1, vec![a, b])
    }

    /// `sum_i max(0, pos_i - neg_i + margin)` over paired column
    /// vectors. Terms at exactly zero are inactive.
    pub fn hinge_pairs(&mut self, pos: TensorId, neg: TensorId, margin: f64) -> TensorId {
        let (vp, vn) = (&self.nodes[pos.0].value, &self.nodes[neg.0].value);
        assert_eq!(vp.dim(), vn.dim(), "hinge_pairs shape mismatch");
        let mut total = 0.0;
        for i in 0..vp.nrows() {
            let term = vp[(i, 0)] - vn[(i, 0)] + margin;
            if term > 0.0 {
                total += term;
            }
        }
        let value = Array2::from_elem((1, 1), total);
        self.push(value, Op::HingePairs(margin), vec![pos, neg])
    }

    /// Attention-weighted neighbor aggregation. For each vertex `i`
    /// with neighbor list `J`, logits are
    /// `lrelu(a_src . h_i + a_dst . h_j)`, normalized by softmax over
    /// `J`; the output row is the weighted sum of neighbor rows.
    /// Vertices without neighbors produce a zero row.
    pub fn gat_attention(
        &mut self,
        h: TensorId,
        a_src: TensorId,
        a_dst: TensorId,
        nbrs: Rc<Vec<Vec<u32>>>,
    ) -> TensorId {
        let vh = &self.nodes[h.0].value;
        let vsrc = &self.nodes[a_src.0].value;
        let vdst = &self.nodes[a_dst.0].value;
        assert_eq!(vsrc.dim(), (vh.ncols(), 1), "a_src shape");
        assert_eq!(vdst.dim(), (vh.ncols(), 1), "a_dst shape");
        let (s, t) = gat_keys(vh, vsrc, vdst);
        let mut value = Array2::zeros(vh.dim());
        for (i, js) in nbrs.iter().enumerate() {
            if js.is_empty() {
                continue;
            }
            let alpha = gat_alpha(i, js, &s, &t);
            for (&j, &a) in js.iter().zip(alpha.iter()) {
                let src = vh.row(j as usize);
                value.row_mut(i).scaled_add(a, &src);
            }
        }
        self.push(value, Op::GatAttention(nbrs), vec![h, a_src, a_dst])
    }

    /// Accumulate gradients of every grad-requiring node w.r.t. the
    /// scalar at `loss`.
    pub fn backward(&self, loss: TensorId) -> Grads {
        assert_eq!(self.nodes[loss.0].value.dim(), (1, 1), "loss must be scalar");
        let mut slots: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        slots[loss.0] = Some(Array2::from_elem((1, 1), 1.0));
        for idx in (0..self.nodes.len()).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(dout) = slots[idx].take() else { continue };
            self.accumulate(idx, &dout, &mut slots);
            slots[idx] = Some(dout);
        }
        Grads { slots }
    }

    fn accumulate(&self, idx: usize, dout: &Array2<f64>, slots: &mut [Option<Array2<f64>>]) {
        let node = &self.nodes[idx];
        let parent_value = |k: usize| &self.nodes[node.parents[k].0].value;
        let mut add_to = |k: usize, delta: Array2<f64>| {
            let pid = node.parents[k].0;
            if !self.nodes[pid].needs_grad {
                return;
            }
            match &mut slots[pid] {
                Some(g) => *g += &delta,
                slot => *slot = Some(delta),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul => {
                let (a, b) = (parent_value(0), parent_value(1));
                add_to(0, dout.dot(&b.t()));
                add_to(1, a.t().dot(dout));
            }
            Op::Spmm(m) => {
                add_to(0, m.matmul(dout));
            }
            Op::Add => {
                add_to(0, dout.clone());
                add_to(1, dout.clone());
            }
            Op::Sub => {
                add_to(0, dout.clone());
                add_to(1, dout.mapv(|x| -x));
            }
            Op::Mul => {
                add_to(0, dout * parent_value(1));
                add_to(1, dout * parent_value(0));
            }
            Op::Scale(c) => {
                add_to(0, dout.mapv(|x| c * x));
            }
            Op::Sigmoid => {
                let y = &node.value;
                add_to(0, dout * &y.mapv(|v| v * (1.0 - v)));
            }
            Op::Softplus => {
                let x = parent_value(0);
                add_to(0, dout * &x.mapv(sigmoid_scalar));
            }
            Op::ConcatCols => {
                let ca = parent_value(0).ncols();
                add_to(0, dout.slice(ndarray::s![.., ..ca]).to_owned());
                add_to(1, dout.slice(ndarray::s![.., ca..]).to_owned());
            }
            Op::GatherRows(rows) => {
                let a = parent_value(0);
                let mut da = Array2::zeros(a.dim());
                for (k, &r) in rows.iter().enumerate() {
                    let src = dout.row(k);
                    da.row_mut(r).scaled_add(1.0, &src);
                }
                add_to(0, da);
            }
            Op::ScatterRows(rows) => {
                let a = parent_value(0);
                let mut da = Array2::zeros(a.dim());
                for (k, &r) in rows.iter().enumerate() {
                    da.row_mut(k).assign(&dout.row(r));
                }
                add_to(0, da);
            }
            Op::RowL1 => {
                let (a, b) = (parent_value(0), parent_value(1));
                let mut da = Array2::zeros(a.dim());
                for i in 0..a.nrows() {
                    let g = dout[(i, 0)];
                    for j in 0..a.ncols() {
                        let diff = a[(i, j)] - b[(i, j)];
                        let sign = if diff > 0.0 {
                            1.0
                        } else if diff < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        da[(i, j)] = g * sign;
                    }
                }
                add_to(1, da.mapv(|x| -x));
                add_to(0, da);
            }
            Op::HingePairs(margin) => {
                let (p, n) = (parent_value(0), parent_value(1));
                let g = dout[(0, 0)];
                let mut dp = Array2::zeros(p.dim());
                let mut dn = Array2::zeros(n.dim());
                for i in 0..p.nrows() {
                    if p[(i, 0)] - n[(i, 0)] + margin > 0.0 {
                        dp[(i, 0)] = g;
                        dn[(i, 0)] = -g;
                    }
                }
                add_to(0, dp);
                add_to(1, dn);
            }
            Op::GatAttention(nbrs) => {
                let h = parent_value(0);
                let a_src = parent_value(1);
                let a_dst = parent_value(2);
                let (s, t) = gat_keys(h, a_src, a_dst);
                let d = h.ncols();
                let mut dh = Array2::zeros(h.dim());
                let mut dsrc = Array2::zeros(a_src.dim());
                let mut ddst = Array2::zeros(a_dst.dim());
                let mut ds = vec![0.0; h.nrows()];
                let mut dt = vec![0.0; h.nrows()];
                for (i, js) in nbrs.iter().enumerate() {
                    if js.is_empty() {
                        continue;
                    }
                    let alpha = gat_alpha(i, js, &s, &t);
                    // d loss / d alpha_j, and the softmax pullback.
                    let mut g = Vec::with_capacity(js.len());
                    for &j in js {
                        let mut dot = 0.0;
                        for c in 0..d {
                            dot += dout[(i, c)] * h[(j as usize, c)];
                        }
                        g.push(dot);
                    }
                    let avg: f64 = alpha.iter().zip(g.iter()).map(|(a, x)| a * x).sum();
                    for ((&j, &a), &gj) in js.iter().zip(alpha.iter()).zip(g.iter()) {
                        let de = a * (gj - avg);
                        let pre = s[i] + t[j as usize];
                        let dpre = de * if pre >= 0.0 { 1.0 } else { ATTENTION_SLOPE };
                        ds[i] += dpre;
                        dt[j as usize] += dpre;
                        // Value path: out_i += alpha_j h_j.
                        let src = dout.row(i);
                        dh.row_mut(j as usize).scaled_add(a, &src);
                    }
                }
                for i in 0..h.nrows() {
                    if ds[i] != 0.0 {
                        for c in 0..d {
                            dh[(i, c)] += ds[i] * a_src[(c, 0)];
                            dsrc[(c, 0)] += ds[i] * h[(i, c)];
                        }
                    }
                    if dt[i] != 0.0 {
                        for c in 0..d {
                            dh[(i, c)] += dt[i] * a_dst[(c, 0)];
                            ddst[(c, 0)] += dt[i] * h[(i, c)];
                        }
                    }
                }
                add_to(0, dh);
                add_to(1, dsrc);
                add_to(2, ddst);
            }
        }
    }
}

fn gat_keys(h: &Array2<f64>, a_src: &Array2<f64>, a_dst: &Array2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = h.nrows();
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for i in 0..n {
        let mut acc_s = 0.0;
        let mut acc_t = 0.0;
        for c in 0..h.ncols() {
            acc_s += h[(i, c)] * a_src[(c, 0)];
            acc_t += h[(i, c)] * a_dst[(c, 0)];
        }
        s[i] = acc_s;
        t[i] = acc_t;
    }
    (s, t)
}

fn lrelu(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        ATTENTION_SLOPE * x
    }
}

fn gat_alpha(i: usize, js: &[u32], s: &[f64], t: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = js.iter().map(|&j| lrelu(s[i] + t[j as usize])).collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&e| (e - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0))
    }

    /// Central-difference check of d loss / d `target` where `build`
    /// recomputes the loss from the current parameter values.
    fn check_grad<F>(params: &mut [Array2<f64>], target: usize, build: F, tol: f64)
    where
        F: Fn(&mut Tape, &[Array2<f64>]) -> (Vec<TensorId>, TensorId),
    {
        let eps = 1e-6;
        let mut tape = Tape::new();
        let (ids, loss) = build(&mut tape, params);
        let grads = tape.backward(loss);
        let analytic = grads.get_or_zeros(ids[target], params[target].dim());
        for i in 0..params[target].nrows() {
            for j in 0..params[target].ncols() {
                let orig = params[target][(i, j)];
                params[target][(i, j)] = orig + eps;
                let mut tp = Tape::new();
                let (_, lp) = build(&mut tp, params);
                let up = tp.scalar(lp);
                params[target][(i, j)] = orig - eps;
                let mut tm = Tape::new();
                let (_, lm) = build(&mut tm, params);
                let down = tm.scalar(lm);
                params[target][(i, j)] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let denom = analytic[(i, j)].abs().max(numeric.abs()).max(1e-8);
                let rel = (analytic[(i, j)] - numeric).abs() / denom;
                assert!(
                    rel < tol,
                    "param {target} entry ({i},{j}): analytic {} vs numeric {numeric}",
                    analytic[(i, j)]
                );
            }
        }
    }

    /// Reduce any matrix node to a scalar through fixed random-ish
    /// weights so a gradient check can run on non-scalar outputs.
    fn to_scalar(tape: &mut Tape, x: TensorId) -> TensorId {
        let (r, c) = tape.value(x).dim();
        let w = Array2::from_shape_fn((c, 1), |(i, _)| 0.3 + 0.1 * i as f64);
        let ones = Array2::from_shape_fn((1, r), |(_, j)| 1.0 - 0.05 * j as f64);
        let wc = tape.constant(w);
        let oc = tape.constant(ones);
        let col = tape.matmul(x, wc);
        tape.matmul(oc, col)
    }

    #[test]
    fn matmul_chain_gradients() {
        let mut rng = stream(10, "ad-matmul");
        let mut params = vec![random_matrix(&mut rng, 3, 4), random_matrix(&mut rng, 4, 2)];
        let build = |tape: &mut Tape, p: &[Array2<f64>]| {
            let a = tape.param(p[0].clone());
            let b = tape.param(p[1].clone());
            let y = tape.matmul(a, b);
            let z = tape.softplus(y);
            (vec![a, b], to_scalar(tape, z))
        };
        check_grad(&mut params, 0, build, 1e-6);
        check_grad(&mut params, 1, build, 1e-6);
    }

    #[test]
    fn elementwise_and_gate_gradients() {
        let mut rng = stream(11, "ad-gate");
        let mut params = vec![
            random_matrix(&mut rng, 3, 3),
            random_matrix(&mut rng, 3, 3),
            random_matrix(&mut rng, 3, 3),
        ];
        // Highway-style interpolation: in + sigmoid(in W) * (agg - in).
        let build = |tape: &mut Tape, p: &[Array2<f64>]| {
            let vin = tape.param(p[0].clone());
            let agg = tape.param(p[1].clone());
            let w = tape.param(p[2].clone());
            let pre = tape.matmul(vin, w);
            let gate = tape.sigmoid(pre);
            let diff = tape.sub(agg, vin);
            let gated = tape.mul(gate, diff);
            let out = tape.add(vin, gated);
            (vec![vin, agg, w], to_scalar(tape, out))
        };
        for t in 0..3 {
            check_grad(&mut params, t, build, 1e-6);
        }
    }

    #[test]
    fn gather_scatter_concat_gradients() {
        let mut rng = stream(12, "ad-rows");
        let mut params = vec![random_matrix(&mut rng, 4, 3), random_matrix(&mut rng, 2, 3)];
        let build = |tape: &mut Tape, p: &[Array2<f64>]| {
            let a = tape.param(p[0].clone());
            let b = tape.param(p[1].clone());
            let picked = tape.gather_rows(a, Rc::new(vec![2, 0]));
            let joined = tape.concat_cols(picked, b);
            let spread = tape.scatter_rows(joined, Rc::new(vec![1, 3]), 5);
            (vec![a, b], to_scalar(tape, spread))
        };
        check_grad(&mut params, 0, build, 1e-6);
        check_grad(&mut params, 1, build, 1e-6);
    }

    #[test]
    fn spmm_gradients() {
        let mut rng = stream(13, "ad-spmm");
        let mut params = vec![random_matrix(&mut rng, 4, 3)];
        let csr = Rc::new(Csr::from_rows(&[
            vec![(0, 0.5), (1, 0.5)],
            vec![(0, 0.5), (1, 0.5)],
            vec![(2, 1.0), (3, 0.2)],
            vec![(2, 0.2), (3, 1.0)],
        ]));
        let build = move |tape: &mut Tape, p: &[Array2<f64>]| {
            let x = tape.param(p[0].clone());
            let y = tape.spmm(Rc::clone(&csr), x);
            let z = tape.softplus(y);
            (vec![x], to_scalar(tape, z))
        };
        check_grad(&mut params, 0, build, 1e-6);
    }

    #[test]
    fn distance_hinge_gradients() {
        let mut rng = stream(14, "ad-hinge");
        let mut params = vec![random_matrix(&mut rng, 6, 4)];
        let build = |tape: &mut Tape, p: &[Array2<f64>]| {
            let e = tape.param(p[0].clone());
            let pos_l = tape.gather_rows(e, Rc::new(vec![0, 1]));
            let pos_r = tape.gather_rows(e, Rc::new(vec![2, 3]));
            let neg_l = tape.gather_rows(e, Rc::new(vec![0, 1]));
            let neg_r = tape.gather_rows(e, Rc::new(vec![4, 5]));
            let dp = tape.row_l1(pos_l, pos_r);
            let dn = tape.row_l1(neg_l, neg_r);
            let loss = tape.hinge_pairs(dp, dn, 1.0);
            (vec![e], loss)
        };
        check_grad(&mut params, 0, build, 1e-6);
    }

    #[test]
    fn gat_attention_gradients() {
        let mut rng = stream(15, "ad-gat");
        let mut params = vec![
            random_matrix(&mut rng, 5, 3),
            random_matrix(&mut rng, 3, 1),
            random_matrix(&mut rng, 3, 1),
        ];
        let nbrs = Rc::new(vec![vec![1u32, 2, 4], vec![0, 3], vec![], vec![2], vec![0, 1, 3]]);
        let build = move |tape: &mut Tape, p: &[Array2<f64>]| {
            let h = tape.param(p[0].clone());
            let a_src = tape.param(p[1].clone());
            let a_dst = tape.param(p[2].clone());
            let agg = tape.gat_attention(h, a_src, a_dst, Rc::clone(&nbrs));
            let out = tape.concat_cols(h, agg);
            (vec![h, a_src, a_dst], to_scalar(tape, out))
        };
        for t in 0..3 {
            check_grad(&mut params, t, build, 1e-5);
        }
    }

    #[test]
    fn attention_coefficients_normalize() {
        let s = vec![0.3, -0.2, 0.8, 0.0];
        let t = vec![0.1, 0.5, -0.7, 0.2];
        let alpha = gat_alpha(0, &[1, 2, 3], &s, &t);
        let sum: f64 = alpha.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hinge_is_nonnegative_and_clips() {
        let mut tape = Tape::new();
        let pos = tape.constant(Array2::from_shape_vec((2, 1), vec![0.0, 3.0]).unwrap());
        let neg = tape.constant(Array2::from_shape_vec((2, 1), vec![10.0, 1.0]).unwrap());
        let loss = tape.hinge_pairs(pos, neg, 5.0);
        // First pair satisfied (0 - 10 + 5 < 0), second contributes 3 - 1 + 5.
        assert_eq!(tape.scalar(loss), 7.0);
    }
}
