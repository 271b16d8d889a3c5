//! Corpus runs, per-problem outcome reports and gained/lost accounting.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::derivation::{write_log_file, DerivationStore};
use crate::guidance::SelectionScheme;
use crate::logic::{parse_problem, InputClause, Signature};
use crate::rvnn::ModelParams;
use crate::saturation::{saturate, Limits, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusProblem {
    pub name: String,
    /// `None` when the file could not be read.
    pub text: Option<String>,
}

/// Problem texts plus an optional theory library prepended to every problem.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub theory: Option<String>,
    pub problems: Vec<CorpusProblem>,
}

impl Corpus {
    pub fn from_texts(theory: Option<String>, problems: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut problems: Vec<CorpusProblem> =
            problems.into_iter().map(|(name, text)| CorpusProblem { name, text: Some(text) }).collect();
        problems.sort_by(|a, b| a.name.cmp(&b.name));
        Self { theory, problems }
    }

    /// Every `*.p` file in `dir`, named by file stem. Unreadable files are kept as
    /// error entries.
    pub fn load(dir: impl AsRef<Path>, theory: Option<&Path>) -> Result<Self, HarnessError> {
        let theory = match theory {
            Some(p) => Some(fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?),
            None => None,
        };
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| HarnessError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "p"))
            .collect();
        paths.sort();
        let problems = paths
            .iter()
            .map(|p| CorpusProblem {
                name: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                text: fs::read_to_string(p).ok(),
            })
            .collect();
        Ok(Self { theory, problems })
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.problems.iter().map(|p| p.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CorpusProblem> {
        self.problems.iter().find(|p| p.name == name)
    }

    /// The sub-corpus of the named problems.
    pub fn subset(&self, names: &BTreeSet<String>) -> Self {
        Self {
            theory: self.theory.clone(),
            problems: self.problems.iter().filter(|p| names.contains(&p.name)).cloned().collect(),
        }
    }

    /// Theory clauses followed by the problem's own clauses, in one signature.
    pub fn parse(&self, problem: &CorpusProblem) -> Result<(Signature, Vec<InputClause>), String> {
        let text = problem.text.as_ref().ok_or_else(|| "unreadable problem file".to_string())?;
        let sig = Signature::new();
        let mut input = match &self.theory {
            Some(t) => parse_problem(t, &sig).map_err(|e| format!("theory: {e}"))?,
            None => Vec::new(),
        };
        input.extend(parse_problem(text, &sig).map_err(|e| e.to_string())?);
        Ok((sig, input))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub problem: String,
    /// `refutation`, `saturated`, `limit` or `error`.
    pub status: String,
    pub selections: usize,
    pub generated: usize,
    pub model_evals: usize,
    pub cache_hits: usize,
    pub eval_time_fraction: f64,
    pub elapsed_ms: f64,
    pub model_time_ms: f64,
    #[serde(default)]
    pub error: String,
}

impl ProblemResult {
    pub fn solved(&self) -> bool {
        self.status == Status::Refutation.as_str()
    }

    fn error(problem: &str, msg: String) -> Self {
        Self {
            problem: problem.to_string(),
            status: "error".into(),
            selections: 0,
            generated: 0,
            model_evals: 0,
            cache_hits: 0,
            eval_time_fraction: 0.0,
            elapsed_ms: 0.0,
            model_time_ms: 0.0,
            error: msg,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchmarkReport {
    /// Sorted by problem name.
    pub results: Vec<ProblemResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub problems: usize,
    pub solved: usize,
    pub errors: usize,
    pub model_evals: usize,
    pub eval_time_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<Diff>,
}

impl BenchmarkReport {
    pub fn solved(&self) -> usize {
        self.results.iter().filter(|r| r.solved()).count()
    }

    pub fn solved_set(&self) -> BTreeSet<String> {
        self.results.iter().filter(|r| r.solved()).map(|r| r.problem.clone()).collect()
    }

    pub fn problems(&self) -> BTreeSet<String> {
        self.results.iter().map(|r| r.problem.clone()).collect()
    }

    pub fn get(&self, problem: &str) -> Option<&ProblemResult> {
        self.results.iter().find(|r| r.problem == problem)
    }

    pub fn model_evals(&self) -> usize {
        self.results.iter().map(|r| r.model_evals).sum()
    }

    /// Model time over total run time across all problems.
    pub fn eval_time_fraction(&self) -> f64 {
        let total: f64 = self.results.iter().map(|r| r.elapsed_ms).sum();
        let model: f64 = self.results.iter().map(|r| r.model_time_ms).sum();
        if total > 0.0 {
            model / total
        } else {
            0.0
        }
    }

    pub fn summary(&self, baseline: Option<&BenchmarkReport>) -> Result<ReportSummary, HarnessError> {
        Ok(ReportSummary {
            problems: self.results.len(),
            solved: self.solved(),
            errors: self.results.iter().filter(|r| r.status == "error").count(),
            model_evals: self.model_evals(),
            eval_time_fraction: self.eval_time_fraction(),
            diff: baseline.map(|b| diff(self, b)).transpose()?,
        })
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.results {
            w.serialize(r).map_err(HarnessError::csv)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Format(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut results: Vec<ProblemResult> = r.deserialize().collect::<Result<_, _>>().map_err(HarnessError::csv)?;
        results.sort_by(|a, b| a.problem.cmp(&b.problem));
        Ok(Self { results })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| HarnessError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        Self::from_csv(&fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?)
    }
}

/// Problems gained and lost relative to a baseline on the same corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diff {
    pub solved: usize,
    pub baseline_solved: usize,
    pub gained: BTreeSet<String>,
    pub lost: BTreeSet<String>,
    /// `100 · solved / baseline_solved`; infinite when the baseline solved nothing.
    pub percent: f64,
}

pub fn diff(report: &BenchmarkReport, baseline: &BenchmarkReport) -> Result<Diff, HarnessError> {
    if report.problems() != baseline.problems() {
        return Err(HarnessError::CorpusMismatch);
    }
    let a = report.solved_set();
    let b = baseline.solved_set();
    let percent = match (a.len(), b.len()) {
        (0, 0) => 100.0,
        (_, 0) => f64::INFINITY,
        (x, y) => 100.0 * x as f64 / y as f64,
    };
    Ok(Diff {
        solved: a.len(),
        baseline_solved: b.len(),
        gained: a.difference(&b).cloned().collect(),
        lost: b.difference(&a).cloned().collect(),
        percent,
    })
}

/// Which derivations a bench keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeepLogs {
    None,
    Solved,
    All,
}

#[derive(Clone, Debug, Default)]
pub struct BenchRun {
    pub report: BenchmarkReport,
    /// `(problem, derivation, solved)`, in problem order.
    pub logs: Vec<(String, DerivationStore, bool)>,
}

fn run_one(
    corpus: &Corpus,
    problem: &CorpusProblem,
    scheme: &SelectionScheme,
    model: Option<&Arc<ModelParams>>,
    limits: Limits,
) -> (ProblemResult, Option<DerivationStore>) {
    let (_, input) = match corpus.parse(problem) {
        Ok(x) => x,
        Err(e) => return (ProblemResult::error(&problem.name, e), None),
    };
    match saturate(&problem.name, &input, scheme, model.cloned(), limits) {
        Err(e) => (ProblemResult::error(&problem.name, e.to_string()), None),
        Ok(out) => {
            let s = &out.stats;
            let ms = |d: Duration| d.as_secs_f64() * 1e3;
            let r = ProblemResult {
                problem: problem.name.clone(),
                status: out.status.as_str().to_string(),
                selections: s.selections,
                generated: s.generated,
                model_evals: s.model_evals,
                cache_hits: s.model_cache_hits,
                eval_time_fraction: s.model_eval_time_fraction,
                elapsed_ms: ms(s.elapsed),
                model_time_ms: ms(s.model_eval_time),
                error: String::new(),
            };
            (r, Some(out.store))
        }
    }
}

/// Runs every problem of the corpus, in parallel across problems.
pub fn bench(
    corpus: &Corpus,
    scheme: &SelectionScheme,
    model: Option<Arc<ModelParams>>,
    limits: Limits,
    keep: KeepLogs,
) -> BenchRun {
    let mut runs: Vec<(ProblemResult, Option<DerivationStore>)> =
        corpus.problems.par_iter().map(|p| run_one(corpus, p, scheme, model.as_ref(), limits)).collect();
    runs.sort_by(|a, b| a.0.problem.cmp(&b.0.problem));
    let mut report = BenchmarkReport::default();
    let mut logs = Vec::new();
    for (r, store) in runs {
        let solved = r.solved();
        if let Some(s) = store {
            if keep == KeepLogs::All || (keep == KeepLogs::Solved && solved) {
                logs.push((r.problem.clone(), s, solved));
            }
        }
        report.results.push(r);
    }
    BenchRun { report, logs }
}

/// Writes each kept derivation as `<dir>/<problem>.dlog`.
pub fn write_logs(run: &BenchRun, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (name, store, _) in &run.logs {
        let path = dir.join(format!("{name}.dlog"));
        write_log_file(store, &path).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(())
}
