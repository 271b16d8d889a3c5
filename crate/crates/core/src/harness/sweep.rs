use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bench::{bench, diff, BenchmarkReport, Corpus, KeepLogs};
use super::HarnessError;
use crate::guidance::SelectionScheme;
use crate::rvnn::ModelParams;
use crate::saturation::Limits;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub solved: usize,
    /// Percent of the baseline's solved count, with gained/lost against it.
    pub percent: Option<f64>,
    pub gained: Option<usize>,
    pub lost: Option<usize>,
    pub model_evals: usize,
}

/// One bench of `scheme` per threshold, each overriding the scheme's threshold.
pub fn sweep_threshold(
    corpus: &Corpus,
    scheme: &SelectionScheme,
    model: Arc<ModelParams>,
    thresholds: &[f64],
    limits: Limits,
    baseline: Option<&BenchmarkReport>,
) -> Result<Vec<SweepRow>, HarnessError> {
    thresholds
        .iter()
        .map(|&t| {
            let s = scheme.clone().with_threshold(t);
            let report = bench(corpus, &s, Some(model.clone()), limits, KeepLogs::None).report;
            let d = baseline.map(|b| diff(&report, b)).transpose()?;
            Ok(SweepRow {
                threshold: t,
                solved: report.solved(),
                percent: d.as_ref().map(|d| d.percent),
                gained: d.as_ref().map(|d| d.gained.len()),
                lost: d.as_ref().map(|d| d.lost.len()),
                model_evals: report.model_evals(),
            })
        })
        .collect()
}

/// `threshold,solved,percent,gained,lost,model_evals` rows; missing baseline columns
/// are empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut out = String::from("threshold,solved,percent,gained,lost,model_evals\n");
    for r in rows {
        out += &format!(
            "{},{},{},{},{},{}\n",
            r.threshold,
            r.solved,
            opt(r.percent.map(|p| format!("{p:.1}"))),
            opt(r.gained.map(|g| g.to_string())),
            opt(r.lost.map(|l| l.to_string())),
            r.model_evals
        );
    }
    out
}
