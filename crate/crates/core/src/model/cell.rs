//! Single-gate recurrent layer (minimal gated unit):
//!
//! ```text
//! f  = σ(W_f x + U_f h₋ + b_f)
//! g  = tanh(W_c x + U_c (f ⊙ h₋) + b_c)
//! h  = (1 − f) ⊙ h₋ + f ⊙ g
//! ```

use super::linalg::{matvec, matvec_t_add, outer_add, sigmoid};

pub(crate) const W_GATE: usize = 0;
pub(crate) const U_GATE: usize = 1;
pub(crate) const B_GATE: usize = 2;
pub(crate) const W_CAND: usize = 3;
pub(crate) const U_CAND: usize = 4;
pub(crate) const B_CAND: usize = 5;

pub(crate) const TENSOR_NAMES: [&str; 6] = ["w_gate", "u_gate", "b_gate", "w_cand", "u_cand", "b_cand"];

pub(crate) fn tensor_shapes(in_dim: usize, out_dim: usize) -> [Vec<usize>; 6] {
    [
        vec![out_dim, in_dim],
        vec![out_dim, out_dim],
        vec![out_dim],
        vec![out_dim, in_dim],
        vec![out_dim, out_dim],
        vec![out_dim],
    ]
}

pub(crate) struct CellParams<'a> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub tensors: [&'a [f64]; 6],
}

/// Activations of one layer over one sequence.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub(crate) xs: Vec<Vec<f64>>,
    /// `hs[0]` is the zero initial state; `hs[t + 1]` is the output at t.
    pub(crate) hs: Vec<Vec<f64>>,
    pub(crate) gates: Vec<Vec<f64>>,
    pub(crate) cands: Vec<Vec<f64>>,
}

impl LayerTrace {
    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.hs[1..]
    }
}

pub(crate) fn forward(p: &CellParams<'_>, xs: Vec<Vec<f64>>) -> LayerTrace {
    let (n_in, n_out) = (p.in_dim, p.out_dim);
    let t_len = xs.len();
    let mut hs = Vec::with_capacity(t_len + 1);
    hs.push(vec![0.0; n_out]);
    let mut gates = Vec::with_capacity(t_len);
    let mut cands = Vec::with_capacity(t_len);
    let mut tmp = vec![0.0; n_out];
    for x in &xs {
        let h_prev = hs.last().unwrap();
        let mut f = vec![0.0; n_out];
        matvec(p.tensors[W_GATE], n_out, n_in, x, &mut f);
        matvec(p.tensors[U_GATE], n_out, n_out, h_prev, &mut tmp);
        for i in 0..n_out {
            f[i] = sigmoid(f[i] + tmp[i] + p.tensors[B_GATE][i]);
        }
        let reset: Vec<f64> = f.iter().zip(h_prev).map(|(a, b)| a * b).collect();
        let mut g = vec![0.0; n_out];
        matvec(p.tensors[W_CAND], n_out, n_in, x, &mut g);
        matvec(p.tensors[U_CAND], n_out, n_out, &reset, &mut tmp);
        for i in 0..n_out {
            g[i] = (g[i] + tmp[i] + p.tensors[B_CAND][i]).tanh();
        }
        let h: Vec<f64> = (0..n_out).map(|i| (1.0 - f[i]) * h_prev[i] + f[i] * g[i]).collect();
        gates.push(f);
        cands.push(g);
        hs.push(h);
    }
    LayerTrace { xs, hs, gates, cands }
}

/// Backpropagation through time. `dh_out[t]` is the loss gradient w.r.t. the
/// output at t. Parameter gradients are accumulated into `grads` when given;
/// input gradients are returned when `need_dx`.
pub(crate) fn backward(
    p: &CellParams<'_>,
    trace: &LayerTrace,
    dh_out: &[Vec<f64>],
    mut grads: Option<&mut [Vec<f64>]>,
    need_dx: bool,
) -> Option<Vec<Vec<f64>>> {
    let (n_in, n_out) = (p.in_dim, p.out_dim);
    let t_len = trace.xs.len();
    let mut dxs = need_dx.then(|| vec![vec![0.0; n_in]; t_len]);
    let mut carry = vec![0.0; n_out];
    for t in (0..t_len).rev() {
        let x = &trace.xs[t];
        let h_prev = &trace.hs[t];
        let f = &trace.gates[t];
        let g = &trace.cands[t];
        let dh: Vec<f64> = dh_out[t].iter().zip(&carry).map(|(a, b)| a + b).collect();

        let mut df: Vec<f64> = (0..n_out).map(|i| dh[i] * (g[i] - h_prev[i])).collect();
        let mut dh_prev: Vec<f64> = (0..n_out).map(|i| dh[i] * (1.0 - f[i])).collect();
        let da_cand: Vec<f64> = (0..n_out).map(|i| dh[i] * f[i] * (1.0 - g[i] * g[i])).collect();
        let reset: Vec<f64> = f.iter().zip(h_prev).map(|(a, b)| a * b).collect();

        let mut dreset = vec![0.0; n_out];
        matvec_t_add(p.tensors[U_CAND], n_out, n_out, &da_cand, &mut dreset);
        for i in 0..n_out {
            df[i] += dreset[i] * h_prev[i];
            dh_prev[i] += dreset[i] * f[i];
        }
        let da_gate: Vec<f64> = (0..n_out).map(|i| df[i] * f[i] * (1.0 - f[i])).collect();
        matvec_t_add(p.tensors[U_GATE], n_out, n_out, &da_gate, &mut dh_prev);

        if let Some(gr) = grads.as_deref_mut() {
            outer_add(&mut gr[W_CAND], n_out, n_in, &da_cand, x);
            outer_add(&mut gr[U_CAND], n_out, n_out, &da_cand, &reset);
            for i in 0..n_out {
                gr[B_CAND][i] += da_cand[i];
                gr[B_GATE][i] += da_gate[i];
            }
            outer_add(&mut gr[W_GATE], n_out, n_in, &da_gate, x);
            outer_add(&mut gr[U_GATE], n_out, n_out, &da_gate, h_prev);
        }
        if let Some(dxs) = dxs.as_mut() {
            let dx = &mut dxs[t];
            matvec_t_add(p.tensors[W_CAND], n_out, n_in, &da_cand, dx);
            matvec_t_add(p.tensors[W_GATE], n_out, n_in, &da_gate, dx);
        }
        carry = dh_prev;
    }
    dxs
}
