//! The network's building blocks. Every forward computation in the crate, cached or
//! not, training or inference, goes through these functions so results agree bitwise.

use super::params::ModelParams;

/// `out = w · x + b` for a row-major `rows × x.len()` matrix.
pub(crate) fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    b.iter()
        .enumerate()
        .map(|(r, &bias)| {
            let row = &w[r * cols..(r + 1) * cols];
            bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}

pub(crate) fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

/// Intermediate values of one deriv application, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct DerivTrace {
    /// Concatenated (possibly dropped-out) premise embeddings.
    pub input: Vec<f64>,
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub normalized: Vec<f64>,
    pub inv_std: f64,
    pub out: Vec<f64>,
}

/// `LayerNorm(W2 · ReLU(W1 · [v1,..,vk] + b1) + b2)` with the rule's gain and bias.
pub fn deriv_forward(params: &ModelParams, rule: usize, input: Vec<f64>) -> DerivTrace {
    let r = &params.layout.rules[rule];
    let d = &params.data;
    debug_assert_eq!(input.len(), r.arity * params.dim());
    let pre = affine(&d[r.w1.clone()], &d[r.b1.clone()], &input);
    let hidden = relu(&pre);
    let y = affine(&d[r.w2.clone()], &d[r.b2.clone()], &hidden);
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv_std = 1.0 / (var + params.ln_eps).sqrt();
    let normalized: Vec<f64> = y.iter().map(|v| (v - mean) * inv_std).collect();
    let out = normalized.iter().zip(&d[r.gamma.clone()]).zip(&d[r.beta.clone()]).map(|((z, g), b)| g * z + b).collect();
    DerivTrace { input, pre, hidden, normalized, inv_std, out }
}

#[derive(Clone, Debug)]
pub struct EvalTrace {
    pub input: Vec<f64>,
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logit: f64,
}

/// `W2 · ReLU(W1 · v + b) + c`.
pub fn eval_forward(params: &ModelParams, input: Vec<f64>) -> EvalTrace {
    let e = &params.layout.eval;
    let d = &params.data;
    let pre = affine(&d[e.w1.clone()], &d[e.b.clone()], &input);
    let hidden = relu(&pre);
    let logit = d[e.c] + d[e.w2.clone()].iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>();
    EvalTrace { input, pre, hidden, logit }
}

/// Deriv embedding of an application of `rule` to `children` (no dropout).
pub fn deriv_embed(params: &ModelParams, rule: usize, children: &[&[f64]]) -> Vec<f64> {
    deriv_forward(params, rule, children.concat()).out
}

pub fn eval_logit(params: &ModelParams, v: &[f64]) -> f64 {
    eval_forward(params, v.to_vec()).logit
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The embedding of a derived node given its premise embeddings. Rules of arity > 2
/// are bracketed left-associatively into binary applications; rules missing from the
/// vocabulary yield the unknown-origin vector. Returns the embedding and the number
/// of deriv blocks applied.
pub fn apply_rule(params: &ModelParams, rule: &str, children: &[&[f64]]) -> (Vec<f64>, usize) {
    match children.len() {
        0 => (params.init_vector(params.unknown_slot()).to_vec(), 0),
        1 => match params.rule_slot(rule, 1) {
            Some(r) => (deriv_embed(params, r, children), 1),
            None => (params.init_vector(params.unknown_slot()).to_vec(), 0),
        },
        _ => match params.rule_slot(rule, 2) {
            Some(r) => {
                let mut acc = deriv_embed(params, r, &children[..2]);
                let mut count = 1;
                for c in &children[2..] {
                    acc = deriv_embed(params, r, &[&acc, c]);
                    count += 1;
                }
                (acc, count)
            }
            None => (params.init_vector(params.unknown_slot()).to_vec(), 0),
        },
    }
}
