//! Weighted binary cross-entropy and its exact gradient through the unrolled DAG.

use super::data::{BatchItem, MiniBatch};
use crate::derivation::NodeId;
use crate::rvnn::{forward_dag_with, sigmoid, DagForward, Mode, ModelParams, Op};

/// `w · BCE(y, σ(logit))` evaluated without forming `σ`.
pub fn bce_with_logit(logit: f64, positive: bool, weight: f64) -> f64 {
    let y = if positive { 1.0 } else { 0.0 };
    weight * (logit.max(0.0) - logit * y + (-logit.abs()).exp().ln_1p())
}

/// Derivative of [`bce_with_logit`] in the logit.
pub fn bce_grad(logit: f64, positive: bool, weight: f64) -> f64 {
    weight * (sigmoid(logit) - if positive { 1.0 } else { 0.0 })
}

/// Dropout seed for one derivation read in one step, derived from the step seed.
fn item_seed(seed: u64, item: usize) -> u64 {
    seed ^ (item as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn item_mode(mode: Mode, item: usize) -> Mode {
    match mode {
        Mode::Train { dropout, seed } => Mode::Train { dropout, seed: item_seed(seed, item) },
        Mode::Infer => Mode::Infer,
    }
}

fn forward_item(params: &ModelParams, item: &BatchItem, mode: Mode) -> DagForward {
    let nodes: Vec<NodeId> = item.examples.iter().map(|e| e.node).collect();
    forward_dag_with(params, &item.derivation, mode, &nodes)
}

/// Weighted loss of a batch.
pub fn loss(params: &ModelParams, batch: &MiniBatch, mode: Mode) -> f64 {
    batch
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let f = forward_item(params, item, item_mode(mode, i));
            item.examples
                .iter()
                .zip(&f.evals)
                .map(|(e, r)| bce_with_logit(r.trace.logit, e.positive, e.weight))
                .sum::<f64>()
        })
        .sum()
}

/// `acc += a ⊗ b` for a row-major `a.len() × b.len()` block.
fn add_outer(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for (row, &x) in acc.chunks_exact_mut(b.len()).zip(a) {
        if x != 0.0 {
            for (r, &y) in row.iter_mut().zip(b) {
                *r += x * y;
            }
        }
    }
}

/// `wᵀ · d` for a row-major matrix with `d.len()` rows.
fn transpose_mul(w: &[f64], d: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &x) in w.chunks_exact(cols).zip(d) {
        if x != 0.0 {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += x * v;
            }
        }
    }
    out
}

fn add_masked(acc: &mut [f64], d: &[f64], mask: Option<&Vec<f64>>) {
    match mask {
        Some(m) => acc.iter_mut().zip(d).zip(m).for_each(|((a, x), k)| *a += x * k),
        None => acc.iter_mut().zip(d).for_each(|(a, x)| *a += x),
    }
}

/// Accumulates into `grad` the gradient of the weighted loss of one derivation given
/// its forward trace; returns the loss.
fn backward_item(params: &ModelParams, item: &BatchItem, f: &DagForward, grad: &mut [f64]) -> f64 {
    let n = params.dim();
    let d = params.data();
    let layout = params.layout();
    let e = &layout.eval;
    let mut d_out: Vec<Vec<f64>> = vec![Vec::new(); f.program.ops.len()];
    let mut total = 0.0;
    for (ex, read) in item.examples.iter().zip(&f.evals) {
        let t = &read.trace;
        total += bce_with_logit(t.logit, ex.positive, ex.weight);
        let g = bce_grad(t.logit, ex.positive, ex.weight);
        if g == 0.0 {
            continue;
        }
        grad[e.c] += g;
        for (gw, h) in grad[e.w2.clone()].iter_mut().zip(&t.hidden) {
            *gw += g * h;
        }
        let dpre: Vec<f64> =
            d[e.w2.clone()].iter().zip(&t.pre).map(|(w, &p)| if p > 0.0 { g * w } else { 0.0 }).collect();
        add_outer(&mut grad[e.w1.clone()], &dpre, &t.input);
        grad[e.b.clone()].iter_mut().zip(&dpre).for_each(|(a, x)| *a += x);
        let dx = transpose_mul(&d[e.w1.clone()], &dpre, n);
        let slot = &mut d_out[read.op];
        if slot.is_empty() {
            slot.resize(n, 0.0);
        }
        add_masked(slot, &dx, read.mask.as_ref());
    }
    for (op_idx, op) in f.program.ops.iter().enumerate().rev() {
        let dy_out = std::mem::take(&mut d_out[op_idx]);
        if dy_out.is_empty() {
            continue;
        }
        match op {
            Op::Init(slot) => {
                grad[layout.init(*slot)].iter_mut().zip(&dy_out).for_each(|(a, x)| *a += x);
            }
            Op::Apply { rule, args } => {
                let r = &layout.rules[*rule];
                let t = f.derivs[op_idx].as_ref().expect("apply ops keep a trace");
                let gamma = &d[r.gamma.clone()];
                grad[r.beta.clone()].iter_mut().zip(&dy_out).for_each(|(a, x)| *a += x);
                for ((a, x), z) in grad[r.gamma.clone()].iter_mut().zip(&dy_out).zip(&t.normalized) {
                    *a += x * z;
                }
                let dz: Vec<f64> = dy_out.iter().zip(gamma).map(|(x, g)| x * g).collect();
                let mean_dz = dz.iter().sum::<f64>() / n as f64;
                let mean_dzz = dz.iter().zip(&t.normalized).map(|(a, b)| a * b).sum::<f64>() / n as f64;
                let dy: Vec<f64> =
                    dz.iter().zip(&t.normalized).map(|(g, z)| t.inv_std * (g - mean_dz - z * mean_dzz)).collect();
                add_outer(&mut grad[r.w2.clone()], &dy, &t.hidden);
                grad[r.b2.clone()].iter_mut().zip(&dy).for_each(|(a, x)| *a += x);
                let dh = transpose_mul(&d[r.w2.clone()], &dy, 2 * n);
                let dpre: Vec<f64> = dh.iter().zip(&t.pre).map(|(g, &p)| if p > 0.0 { *g } else { 0.0 }).collect();
                add_outer(&mut grad[r.w1.clone()], &dpre, &t.input);
                grad[r.b1.clone()].iter_mut().zip(&dpre).for_each(|(a, x)| *a += x);
                let dinput = transpose_mul(&d[r.w1.clone()], &dpre, args.len() * n);
                let masks = &f.read_masks[op_idx];
                for (k, &arg) in args.iter().enumerate() {
                    let slot = &mut d_out[arg];
                    if slot.is_empty() {
                        slot.resize(n, 0.0);
                    }
                    add_masked(slot, &dinput[k * n..(k + 1) * n], masks[k].as_ref());
                }
            }
        }
    }
    total
}

/// Loss of a batch and its gradient with respect to every parameter.
pub fn loss_and_grad(params: &ModelParams, batch: &MiniBatch, mode: Mode) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; params.len()];
    let mut total = 0.0;
    for (i, item) in batch.items.iter().enumerate() {
        let f = forward_item(params, item, item_mode(mode, i));
        total += backward_item(params, item, &f, &mut grad);
    }
    (total, grad)
}

/// Logits of every example in a batch, inference mode.
pub fn batch_logits(params: &ModelParams, batch: &MiniBatch) -> Vec<(f64, bool)> {
    batch
        .items
        .iter()
        .flat_map(|item| {
            let f = forward_item(params, item, Mode::Infer);
            item.examples.iter().zip(f.evals).map(|(e, r)| (r.trace.logit, e.positive)).collect::<Vec<_>>()
        })
        .collect()
}
