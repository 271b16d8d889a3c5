//! Classification rates, ROC sweeps and per-problem logit statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::data::MiniBatch;
use crate::derivation::DerivationStore;
use crate::guidance::{classify_logit, Class};
use crate::rvnn::{forward_dag, Mode, ModelParams};

/// True-positive and true-negative rates at threshold `t`. An empty class has rate 0.
pub fn confusion_rates(logits: &[(f64, bool)], t: f64) -> (f64, f64) {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for &(l, positive) in logits {
        let predicted = classify_logit(l, t) == Class::Positive;
        if positive {
            pos += 1;
            tp += predicted as usize;
        } else {
            neg += 1;
            tn += !predicted as usize;
        }
    }
    let rate = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (rate(tp, pos), rate(tn, neg))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub tnr: f64,
}

impl RocPoint {
    pub fn fpr(&self) -> f64 {
        1.0 - self.tnr
    }
}

/// Rates at every threshold, in the given order.
pub fn roc(logits: &[(f64, bool)], thresholds: &[f64]) -> Vec<RocPoint> {
    thresholds
        .iter()
        .map(|&threshold| {
            let (tpr, tnr) = confusion_rates(logits, threshold);
            RocPoint { threshold, tpr, tnr }
        })
        .collect()
}

/// `−∞`, every distinct logit in increasing order, then `+∞`.
pub fn roc_thresholds(logits: &[(f64, bool)]) -> Vec<f64> {
    let mut ts: Vec<f64> = logits.iter().map(|l| l.0).filter(|l| l.is_finite()).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut out = vec![f64::NEG_INFINITY];
    out.extend(ts);
    out.push(f64::INFINITY);
    out
}

/// `threshold,tpr,tnr,fpr` rows.
pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("threshold,tpr,tnr,fpr\n");
    for p in points {
        out += &format!("{},{},{},{}\n", p.threshold, p.tpr, p.tnr, p.fpr());
    }
    out
}

/// Inference-mode logits of every example in the batches.
pub fn collect_logits(params: &ModelParams, batches: &[MiniBatch]) -> Vec<(f64, bool)> {
    batches.iter().flat_map(|b| super::backprop::batch_logits(params, b)).collect()
}

/// Smallest logit over positive (proof) nodes of each derivation, keyed by problem.
/// Problems without proof nodes are absent.
pub fn min_positive_logits<'a>(
    params: &ModelParams,
    derivations: impl IntoIterator<Item = &'a DerivationStore>,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for d in derivations {
        if d.positive_count() == 0 {
            continue;
        }
        let f = forward_dag(params, d, Mode::Infer);
        let min = f
            .logits()
            .into_iter()
            .filter(|(id, _)| d.node(*id).is_positive())
            .map(|(_, l)| l)
            .fold(f64::INFINITY, f64::min);
        let e = out.entry(d.problem().to_string()).or_insert(f64::INFINITY);
        *e = e.min(min);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_on_a_small_set() {
        let l = [(2.0, true), (-1.0, true), (0.5, false), (-3.0, false)];
        assert_eq!(confusion_rates(&l, 0.0), (0.5, 0.5));
        assert_eq!(confusion_rates(&l, -1.0), (1.0, 0.5));
        assert_eq!(confusion_rates(&l, 3.0), (0.0, 1.0));
    }

    #[test]
    fn empty_class_has_rate_zero() {
        assert_eq!(confusion_rates(&[(1.0, true)], 0.0), (1.0, 0.0));
        assert_eq!(confusion_rates(&[], 0.0), (0.0, 0.0));
    }

    #[test]
    fn roc_endpoints_and_monotonicity() {
        let l = [(0.3, true), (0.3, false), (-2.0, true), (1.5, false), (4.0, true)];
        let ts = roc_thresholds(&l);
        let pts = roc(&l, &ts);
        assert_eq!((pts[0].tpr, pts[0].tnr), (1.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.tpr, last.tnr), (0.0, 1.0));
        for w in pts.windows(2) {
            assert!(w[1].tpr <= w[0].tpr && w[1].tnr >= w[0].tnr);
        }
        assert!(roc_csv(&pts).starts_with("threshold,tpr,tnr,fpr\n-inf,1,0,1\n"));
    }
}
