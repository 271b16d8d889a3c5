use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use guided_prover::derivation::{read_log_file, write_log_file, DerivationStore};
use guided_prover::guidance::SelectionScheme;
use guided_prover::harness::{
    bench, generate_family, loop_iteration, negative_mine, sweep_csv, sweep_threshold, write_logs, BenchmarkReport,
    Corpus, FamilyConfig, KeepLogs, LoopConfig, LoopState,
};
use guided_prover::rvnn::{load_model, read_model_header, save_model, ModelParams};
use guided_prover::saturation::{saturate, Limits, DEFAULT_MAX_SELECTIONS};
use guided_prover::training::{build_batches, reports_csv, train, PreparedData, TrainConfig};

#[derive(Parser)]
#[command(name = "guided-prover", version, about = "Resolution prover with learned clause selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// Selection scheme JSON; defaults to the base age/weight scheme.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Model file, overriding the scheme's `model` field.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    theory: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_SELECTIONS)]
    max_selections: usize,
}

impl RunOpts {
    fn scheme(&self) -> Result<SelectionScheme> {
        Ok(match &self.scheme {
            Some(p) => SelectionScheme::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => SelectionScheme::base(),
        })
    }

    fn model(&self, scheme: &SelectionScheme) -> Result<Option<Arc<ModelParams>>> {
        match self.model.as_ref().or(scheme.model.as_ref()) {
            Some(p) => Ok(Some(Arc::new(load_model(p).with_context(|| format!("loading {}", p.display()))?))),
            None => Ok(None),
        }
    }

    fn limits(&self) -> Limits {
        Limits::selections(self.max_selections)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Prove one problem.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        run: RunOpts,
        /// Write the derivation log here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the proof here instead of stdout.
        #[arg(long)]
        proof: Option<PathBuf>,
    },
    /// Print a model file's header as JSON.
    InspectModel { model: PathBuf },
    /// Turn derivation logs into packed, split training data.
    Prepare {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        target_nodes: usize,
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a model on prepared data.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a scheme over a corpus directory.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        log_dir: Option<PathBuf>,
        /// Also keep logs of failed runs.
        #[arg(long)]
        log_failures: bool,
    },
    /// Bench a model-guided scheme at several thresholds.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        run: RunOpts,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.5,-0.25,0,0.25,0.5")]
        thresholds: Vec<f64>,
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log failing baseline runs on problems solved only with guidance.
    Mine {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Alternate proof collection, training and evaluation.
    Loop {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        eval_corpus: Option<PathBuf>,
        #[arg(long)]
        theory: Option<PathBuf>,
        /// Schemes used to collect proofs, in priority order.
        #[arg(long = "collect", required = true)]
        schemes: Vec<PathBuf>,
        /// Scheme used to evaluate each new model.
        #[arg(long)]
        evaluate: PathBuf,
        /// Baseline scheme for negative mining.
        #[arg(long)]
        mine: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_SELECTIONS)]
        max_selections: usize,
        /// Directory for the models and reports of each iteration.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated problem family with its theory library.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        problems: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn train_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => Ok(TrainConfig::load(p)?),
        None => Ok(TrainConfig::default()),
    }
}

fn read_logs(dir: &Path) -> Result<Vec<DerivationStore>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "dlog"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_log_file(p).with_context(|| format!("reading {}", p.display()))).collect()
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Solve { problem, run, log, proof } => {
            let scheme = run.scheme()?;
            let model = run.model(&scheme)?;
            let text = fs::read_to_string(&problem).with_context(|| format!("reading {}", problem.display()))?;
            let name = problem.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let theory = run.theory.as_ref().map(fs::read_to_string).transpose()?;
            let corpus = Corpus::from_texts(theory, [(name.clone(), text)]);
            let (sig, input) = corpus.parse(&corpus.problems[0]).map_err(anyhow::Error::msg)?;
            let out = saturate(&name, &input, &scheme, model, run.limits())?;
            println!("% status: {}", out.status.as_str());
            println!(
                "% selections: {}, generated: {}, model evals: {}",
                out.stats.selections, out.stats.generated, out.stats.model_evals
            );
            if let Some(path) = log {
                write_log_file(&out.store, &path)?;
            }
            if out.is_refutation() {
                let text = out.format_proof(&sig);
                match proof {
                    Some(path) => fs::write(path, text)?,
                    None => print!("{text}"),
                }
            }
        }
        Command::InspectModel { model } => {
            println!("{}", serde_json::to_string_pretty(&read_model_header(&model)?)?);
        }
        Command::Prepare { logs, out, target_nodes, split, seed } => {
            let derivs = read_logs(&logs)?;
            let compressed = derivs.iter().map(|d| d.selected_closure().compress()).collect();
            let (train_set, val) = build_batches(compressed, target_nodes, split, seed)?;
            log::info!("{} training and {} validation batches", train_set.len(), val.len());
            PreparedData::new(&train_set, &val).save(&out)?;
        }
        Command::Train { data, config, out, report } => {
            let config = train_config(config.as_deref())?;
            let (train_set, val) = PreparedData::load(&data)?.batches()?;
            let result = train(&config, &train_set, &val)?;
            log::info!("best epoch {} of {}", result.best_epoch, result.reports.len());
            save_model(&result.best, &out)?;
            if let Some(path) = report {
                fs::write(path, reports_csv(&result.reports))?;
            }
        }
        Command::Bench { corpus, run, out, baseline, log_dir, log_failures } => {
            let scheme = run.scheme()?;
            let model = run.model(&scheme)?;
            let c = Corpus::load(&corpus, run.theory.as_deref())?;
            let keep = match (&log_dir, log_failures) {
                (None, _) => KeepLogs::None,
                (Some(_), false) => KeepLogs::Solved,
                (Some(_), true) => KeepLogs::All,
            };
            let result = bench(&c, &scheme, model, run.limits(), keep);
            if let Some(dir) = log_dir {
                write_logs(&result, dir)?;
            }
            result.report.save(&out)?;
            let base = baseline.map(BenchmarkReport::load).transpose()?;
            let summary = result.report.summary(base.as_ref())?;
            let json = serde_json::to_string_pretty(&summary)?;
            fs::write(out.with_extension("summary.json"), &json)?;
            println!("{json}");
        }
        Command::Sweep { corpus, run, thresholds, baseline, out } => {
            let scheme = run.scheme()?;
            let Some(model) = run.model(&scheme)? else { bail!("sweep needs a model") };
            let c = Corpus::load(&corpus, run.theory.as_deref())?;
            let base = baseline.map(BenchmarkReport::load).transpose()?;
            let rows = sweep_threshold(&c, &scheme, model, &thresholds, run.limits(), base.as_ref())?;
            let csv = sweep_csv(&rows);
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Mine { state, corpus, run, out } => {
            let scheme = run.scheme()?;
            let st = LoopState::load(&state)?;
            let c = Corpus::load(&corpus, run.theory.as_deref())?;
            let logs = negative_mine(&st, &c, &scheme, run.limits());
            fs::create_dir_all(&out)?;
            for store in &logs {
                write_log_file(store, out.join(format!("{}.dlog", store.problem())))?;
            }
            log::info!("mined {} derivations", logs.len());
        }
        Command::Loop {
            state,
            corpus,
            eval_corpus,
            theory,
            schemes,
            evaluate,
            mine,
            model,
            config,
            iterations,
            max_selections,
            out,
        } => {
            let limits = Limits::selections(max_selections);
            let c = Corpus::load(&corpus, theory.as_deref())?;
            let eval = eval_corpus.map(|d| Corpus::load(d, theory.as_deref())).transpose()?;
            let mut st = if state.exists() {
                LoopState::load(&state)?
            } else {
                let base = SelectionScheme::base();
                LoopState::from_baseline(&bench(&c, &base, None, limits, KeepLogs::Solved))
            };
            let cfg = LoopConfig {
                schemes: schemes.iter().map(SelectionScheme::load).collect::<Result<_, _>>()?,
                train: train_config(config.as_deref())?,
                limits,
                mine: mine.map(SelectionScheme::load).transpose()?,
                evaluate: SelectionScheme::load(&evaluate)?,
            };
            let mut current = model.map(|p| load_model(p).map(Arc::new)).transpose()?;
            fs::create_dir_all(&out)?;
            for _ in 0..iterations {
                let outcome = loop_iteration(&mut st, &c, eval.as_ref(), current.clone(), &cfg)?;
                let i = st.iteration;
                save_model(&outcome.model, out.join(format!("model_{i}.bin")))?;
                fs::write(out.join(format!("train_{i}.csv")), reports_csv(&outcome.training.reports))?;
                if let Some(run) = &outcome.evaluation {
                    run.report.save(out.join(format!("eval_{i}.csv")))?;
                }
                log::info!(
                    "iteration {i}: {} new proofs, {} solved, {} mined, held-out solved {}",
                    outcome.new_proofs,
                    st.proofs.len(),
                    outcome.mined,
                    outcome.evaluation.as_ref().map_or(0, |r| r.report.solved())
                );
                current = Some(outcome.model);
                st.save(&state)?;
            }
        }
        Command::Generate { out, problems, seed } => {
            let family = generate_family(&FamilyConfig { problems, seed, ..FamilyConfig::default() });
            family.write(&out)?;
            println!(
                "wrote {} training and {} held-out problems to {}",
                family.train.len(),
                family.heldout.len(),
                out.display()
            );
        }
    }
    Ok(())
}
