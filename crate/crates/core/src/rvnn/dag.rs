//! Bottom-up evaluation of a whole derivation DAG, with optional dropout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{deriv_forward, eval_forward, DerivTrace, EvalTrace};
use super::params::ModelParams;
use crate::derivation::{DerivationStore, Label, NodeId};

/// One step of the network unrolled over a DAG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Init(usize),
    /// Deriv block `rule` applied to the outputs of earlier ops (one or two).
    Apply {
        rule: usize,
        args: Vec<usize>,
    },
}

/// The network unrolled over a derivation: ops in topological order plus the op that
/// produces each node's embedding. Wide rules add intermediate bracketing ops.
#[derive(Clone, Debug)]
pub struct Program {
    pub ops: Vec<Op>,
    pub node_op: Vec<usize>,
}

impl Program {
    pub fn build(params: &ModelParams, store: &DerivationStore) -> Self {
        let mut ops = Vec::with_capacity(store.len());
        let mut node_op = Vec::with_capacity(store.len());
        for node in store.nodes() {
            let unknown = Op::Init(params.unknown_slot());
            let op = match &node.label {
                Label::Origin(o) => Op::Init(params.origin_slot(o)),
                Label::Rule(r) => {
                    let args: Vec<usize> = node.premises.iter().map(|p| node_op[p.index()]).collect();
                    if args.len() == 1 {
                        match params.rule_slot(r, 1) {
                            Some(rule) => Op::Apply { rule, args },
                            None => unknown,
                        }
                    } else {
                        match params.rule_slot(r, 2) {
                            Some(rule) => {
                                let mut acc = args[0];
                                for &next in &args[1..args.len() - 1] {
                                    ops.push(Op::Apply { rule, args: vec![acc, next] });
                                    acc = ops.len() - 1;
                                }
                                Op::Apply { rule, args: vec![acc, args[args.len() - 1]] }
                            }
                            None => unknown,
                        }
                    }
                }
            };
            ops.push(op);
            node_op.push(ops.len() - 1);
        }
        Self { ops, node_op }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// Deterministic, no dropout.
    Infer,
    /// Inverted dropout with probability `dropout`, masks drawn from `seed`.
    Train { dropout: f64, seed: u64 },
}

/// One read of a node embedding by the eval head.
#[derive(Clone, Debug)]
pub struct EvalRead {
    pub node: NodeId,
    pub op: usize,
    pub mask: Option<Vec<f64>>,
    pub trace: EvalTrace,
}

/// Everything computed by a forward pass, retained for backpropagation.
#[derive(Clone, Debug)]
pub struct DagForward {
    pub program: Program,
    pub outputs: Vec<Vec<f64>>,
    pub derivs: Vec<Option<DerivTrace>>,
    /// Per op, per argument: the dropout mask applied to that read.
    pub read_masks: Vec<Vec<Option<Vec<f64>>>>,
    pub evals: Vec<EvalRead>,
    pub deriv_evals: usize,
}

impl DagForward {
    pub fn embedding(&self, node: NodeId) -> &[f64] {
        &self.outputs[self.program.node_op[node.index()]]
    }

    pub fn logits(&self) -> Vec<(NodeId, f64)> {
        self.evals.iter().map(|e| (e.node, e.trace.logit)).collect()
    }
}

struct Dropout {
    keep_scale: f64,
    p: f64,
    rng: ChaCha8Rng,
}

impl Dropout {
    fn mask(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| if self.rng.gen::<f64>() < self.p { 0.0 } else { self.keep_scale }).collect()
    }
}

fn read(v: &[f64], mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        Some(m) => v.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => v.to_vec(),
    }
}

/// Evaluates every node and the logits of the selected nodes.
pub fn forward_dag(params: &ModelParams, store: &DerivationStore, mode: Mode) -> DagForward {
    let eval_nodes: Vec<NodeId> = store.nodes().iter().filter(|n| n.selected).map(|n| n.id).collect();
    forward_dag_with(params, store, mode, &eval_nodes)
}

/// As [`forward_dag`] but with an explicit list of nodes read by the eval head.
pub fn forward_dag_with(
    params: &ModelParams,
    store: &DerivationStore,
    mode: Mode,
    eval_nodes: &[NodeId],
) -> DagForward {
    let program = Program::build(params, store);
    let n = params.dim();
    let mut dropout = match mode {
        Mode::Train { dropout, seed } if dropout > 0.0 => {
            Some(Dropout { keep_scale: 1.0 / (1.0 - dropout), p: dropout, rng: ChaCha8Rng::seed_from_u64(seed) })
        }
        _ => None,
    };
    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(program.ops.len());
    let mut derivs = Vec::with_capacity(program.ops.len());
    let mut read_masks = Vec::with_capacity(program.ops.len());
    let mut deriv_evals = 0;
    for op in &program.ops {
        match op {
            Op::Init(slot) => {
                outputs.push(params.init_vector(*slot).to_vec());
                derivs.push(None);
                read_masks.push(Vec::new());
            }
            Op::Apply { rule, args } => {
                let masks: Vec<Option<Vec<f64>>> = args.iter().map(|_| dropout.as_mut().map(|d| d.mask(n))).collect();
                let mut input = Vec::with_capacity(args.len() * n);
                for (a, m) in args.iter().zip(&masks) {
                    input.extend(read(&outputs[*a], m));
                }
                let trace = deriv_forward(params, *rule, input);
                deriv_evals += 1;
                outputs.push(trace.out.clone());
                derivs.push(Some(trace));
                read_masks.push(masks);
            }
        }
    }
    let evals = eval_nodes
        .iter()
        .map(|&node| {
            let op = program.node_op[node.index()];
            let mask = dropout.as_mut().map(|d| d.mask(n));
            let trace = eval_forward(params, read(&outputs[op], &mask));
            EvalRead { node, op, mask, trace }
        })
        .collect();
    DagForward { program, outputs, derivs, read_masks, evals, deriv_evals }
}
