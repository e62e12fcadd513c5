use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::ice::{KeepRatio, Selection};
use crate::phy::SymbolBudget;
use crate::recover::Backend;
use crate::seed::combine;

use super::stats::mean_stderr;
use super::{Arm, Experiment, Pipeline, RunConfig, RunnerError, Status, TransmissionPoint, TrialResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Trials handed to the worker pool at a time; records are written after each batch.
const BATCH: usize = 256;

/// One grid point of either experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Transmission(TransmissionPoint),
    Omission { word_ratio: f64 },
}

impl GridPoint {
    pub fn arms(&self) -> [Arm; 2] {
        match self {
            GridPoint::Transmission(_) => [Arm::Proposed, Arm::Random],
            GridPoint::Omission { .. } => [Arm::Word, Arm::Character],
        }
    }
}

/// The cartesian product of the configured lists, in a fixed order.
pub fn grid(cfg: &RunConfig) -> Result<Vec<GridPoint>, RunnerError> {
    let mut points = Vec::new();
    match cfg.experiment {
        Experiment::Transmission => {
            for &k in &cfg.keep_ratio {
                let keep = KeepRatio::new(k).map_err(|e| RunnerError::Config(e.to_string()))?;
                for &filters in &cfg.filters {
                    for &snr_db in &cfg.snr_db {
                        for &budget in &cfg.budget {
                            points.push(GridPoint::Transmission(TransmissionPoint {
                                filters,
                                keep,
                                snr_db,
                                budget,
                            }));
                        }
                    }
                }
            }
        }
        Experiment::Omission => {
            points.extend(cfg.word_ratio.iter().map(|&word_ratio| GridPoint::Omission { word_ratio }));
        }
    }
    Ok(points)
}

/// `hash(run seed, grid point, trial)`; both arms of a trial share it.
pub fn trial_seed(run_seed: u64, point: usize, trial: usize) -> u64 {
    combine(&[run_seed, point as u64, trial as u64])
}

/// One line of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema: u32,
    pub experiment: String,
    pub point: usize,
    pub trial: usize,
    pub arm: Arm,
    pub backend: Backend,
    pub sentence: usize,
    pub filters: Option<usize>,
    pub keep_ratio: Option<f64>,
    /// `None` for a noiseless channel.
    pub snr_db: Option<f64>,
    /// `None` for whole codewords.
    pub symbols_per_char_budget: Option<f64>,
    pub word_ratio: Option<f64>,
    pub status: Status,
    pub omitted: usize,
    pub symbols: Option<usize>,
    pub symbols_per_character: Option<f64>,
    pub bleu: f64,
    pub similarity: Option<f64>,
    pub char_accuracy: f64,
    pub word_accuracy: f64,
    pub fallback: bool,
    pub recovered: String,
    pub error: Option<String>,
}

impl TrialRecord {
    fn new(point_index: usize, point: &GridPoint, trial: usize, sentence: usize, arm: Arm, backend: Backend, r: TrialResult) -> Self {
        let (experiment, filters, keep_ratio, snr_db, budget, word_ratio) = match *point {
            GridPoint::Transmission(p) => (
                Experiment::Transmission,
                Some(p.filters),
                Some(p.keep.value()),
                p.snr_db.is_finite().then_some(p.snr_db),
                match p.budget {
                    SymbolBudget::Natural => None,
                    SymbolBudget::PerCharacter(v) => Some(v),
                },
                None,
            ),
            GridPoint::Omission { word_ratio } => (Experiment::Omission, None, None, None, None, Some(word_ratio)),
        };
        Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.as_str().to_string(),
            point: point_index,
            trial,
            arm,
            backend,
            sentence,
            filters,
            keep_ratio,
            snr_db,
            symbols_per_char_budget: budget,
            word_ratio,
            status: r.status,
            omitted: r.omitted,
            symbols: r.symbols,
            symbols_per_character: r.symbols_per_character,
            bleu: r.eval.bleu,
            similarity: r.eval.similarity,
            char_accuracy: r.eval.char_accuracy,
            word_accuracy: r.eval.word_accuracy,
            fallback: r.fallback,
            recovered: r.recovered,
            error: r.error,
        }
    }
}

/// Both arms of one trial.
fn run_trial(cfg: &RunConfig, pipeline: &Pipeline, sentences: &[String], points: &[GridPoint], point: usize, trial: usize) -> Vec<TrialRecord> {
    let seed = trial_seed(cfg.seed, point, trial);
    let sentence = trial % sentences.len();
    let s = sentences[sentence].as_str();
    let gp = &points[point];
    let backend = pipeline.recoverer().backend();
    let record = |arm, r| TrialRecord::new(point, gp, trial, sentence, arm, backend, r);
    match *gp {
        GridPoint::Transmission(p) => {
            let noise = combine(&[seed, 1]);
            let proposed = pipeline.transmit(s, &p, Selection::Proposed, noise);
            let random = pipeline.transmit(s, &p, Selection::Random(combine(&[seed, 2])), noise);
            vec![record(Arm::Proposed, proposed), record(Arm::Random, random)]
        }
        GridPoint::Omission { word_ratio } => {
            let word = pipeline.word_omission(s, word_ratio, seed);
            let character = pipeline.character_omission(s, word.omitted);
            vec![record(Arm::Word, word), record(Arm::Character, character)]
        }
    }
}

/// Runs every grid point for `cfg.trials` trials, writing one JSON line per
/// record to `out` in grid, trial, arm order regardless of scheduling.
pub fn run_sweep<W: Write>(
    cfg: &RunConfig,
    pipeline: &Pipeline,
    sentences: &[String],
    out: &mut W,
) -> Result<Vec<TrialRecord>, RunnerError> {
    if sentences.is_empty() {
        return Err(RunnerError::Setup("no sentences to run".into()));
    }
    let points = grid(cfg)?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let mut threads = cfg.threads;
    if cfg.backend == Backend::Llm {
        let cap = cfg.llm.max_concurrency.max(1);
        threads = if threads == 0 { cap } else { threads.min(cap) };
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunnerError::Setup(e.to_string()))?;
    let mut all = Vec::with_capacity(jobs.len() * 2);
    for batch in jobs.chunks(BATCH) {
        let records: Vec<TrialRecord> = pool.install(|| {
            batch
                .par_iter()
                .flat_map_iter(|&(p, t)| run_trial(cfg, pipeline, sentences, &points, p, t))
                .collect()
        });
        for r in &records {
            serde_json::to_writer(&mut *out, r).map_err(|e| RunnerError::Io(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| RunnerError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| RunnerError::Io(e.to_string()))?;
        all.extend(records);
    }
    Ok(all)
}

/// Mean and standard error of each metric per grid point and arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub experiment: String,
    pub point: usize,
    pub arm: Arm,
    pub filters: Option<usize>,
    pub keep_ratio: Option<f64>,
    pub snr_db: Option<f64>,
    pub symbols_per_char_budget: Option<f64>,
    pub word_ratio: Option<f64>,
    pub trials: usize,
    pub ok: usize,
    pub frame_lost: usize,
    pub failed: usize,
    pub bleu_mean: f64,
    pub bleu_stderr: f64,
    pub char_accuracy_mean: f64,
    pub char_accuracy_stderr: f64,
    pub word_accuracy_mean: f64,
    pub word_accuracy_stderr: f64,
    /// Over records that have a similarity score.
    pub similarity_mean: Option<f64>,
    pub symbols_per_character_mean: Option<f64>,
    pub omitted_mean: f64,
}

/// Groups by (point, arm). Failed trials are counted but left out of the
/// means; lost frames count with zero scores.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, &str), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.point, r.arm.as_str())).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let first = rs[0];
            let scored: Vec<&TrialRecord> = rs.iter().copied().filter(|r| r.status != Status::Failed).collect();
            let col = |f: fn(&TrialRecord) -> f64| mean_stderr(&scored.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (bleu_mean, bleu_stderr) = col(|r| r.bleu);
            let (char_accuracy_mean, char_accuracy_stderr) = col(|r| r.char_accuracy);
            let (word_accuracy_mean, word_accuracy_stderr) = col(|r| r.word_accuracy);
            let (omitted_mean, _) = col(|r| r.omitted as f64);
            let opt_mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| mean_stderr(&xs).0);
            let count = |s: Status| rs.iter().filter(|r| r.status == s).count();
            Aggregate {
                experiment: first.experiment.clone(),
                point: first.point,
                arm: first.arm,
                filters: first.filters,
                keep_ratio: first.keep_ratio,
                snr_db: first.snr_db,
                symbols_per_char_budget: first.symbols_per_char_budget,
                word_ratio: first.word_ratio,
                trials: rs.len(),
                ok: count(Status::Ok),
                frame_lost: count(Status::FrameLost),
                failed: count(Status::Failed),
                bleu_mean,
                bleu_stderr,
                char_accuracy_mean,
                char_accuracy_stderr,
                word_accuracy_mean,
                word_accuracy_stderr,
                similarity_mean: opt_mean(scored.iter().filter_map(|r| r.similarity).collect()),
                symbols_per_character_mean: opt_mean(scored.iter().filter_map(|r| r.symbols_per_character).collect()),
                omitted_mean,
            }
        })
        .collect()
}

pub fn write_aggregates<W: Write>(rows: &[Aggregate], out: W) -> Result<(), RunnerError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| RunnerError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| RunnerError::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub records: usize,
    pub frame_lost: usize,
    pub failed: usize,
    pub results: PathBuf,
    pub aggregate: PathBuf,
}

/// Loads the corpus, runs the sweep into `cfg.output` and writes the
/// aggregate table next to it.
pub fn sweep(cfg: &RunConfig) -> Result<SweepSummary, RunnerError> {
    cfg.validate()?;
    let corpus = match &cfg.corpus {
        Some(p) => Corpus::from_path(p).map_err(|e| RunnerError::Setup(format!("{}: {e}", p.display())))?,
        None => Corpus::bundled(),
    };
    let mut sentences = corpus.sentences;
    if let Some(n) = cfg.sentences {
        sentences.truncate(n);
    }
    let pipeline = Pipeline::from_config(cfg)?;
    let file = File::create(&cfg.output).map_err(|e| RunnerError::Io(format!("{}: {e}", cfg.output.display())))?;
    let mut out = BufWriter::new(file);
    let records = run_sweep(cfg, &pipeline, &sentences, &mut out)?;
    let agg_path = cfg.aggregate_path();
    let agg = File::create(&agg_path).map_err(|e| RunnerError::Io(format!("{}: {e}", agg_path.display())))?;
    write_aggregates(&aggregate(&records), agg)?;
    Ok(SweepSummary {
        records: records.len(),
        frame_lost: records.iter().filter(|r| r.status == Status::FrameLost).count(),
        failed: records.iter().filter(|r| r.status == Status::Failed).count(),
        results: cfg.output.clone(),
        aggregate: agg_path,
    })
}
