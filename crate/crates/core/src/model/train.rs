use std::fmt::Write as _;

use log::{debug, info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GenerativeModel, ResumeState, TrainConfig, Checkpoint};
use crate::canonize::min_dfs_code;
use crate::codec::{build_vocab, encode_sequence, Step, VocabSpec};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::neural::{adam_step, AdamState, Network};
use crate::{DfsCode, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters are kept (lowest validation loss).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,valid_loss\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{}", r.epoch, r.train_loss, r.valid_loss);
        }
        s
    }

    pub fn last_epoch(&self) -> usize {
        self.records.last().map_or(0, |r| r.epoch)
    }
}

/// Canonizes in parallel; the first failure in input order is reported.
fn canonize_all(graphs: &[LabeledGraph]) -> Result<Vec<DfsCode>> {
    let codes: Vec<Result<DfsCode>> = graphs.par_iter().map(min_dfs_code).collect();
    codes.into_iter().collect()
}

fn encode_all(codes: &[DfsCode], vocab: &VocabSpec) -> Result<Vec<Vec<Step>>> {
    codes.iter().map(|c| encode_sequence(c, vocab).map(|s| s.steps)).collect()
}

/// Encodes validation graphs, skipping those outside the training vocabulary.
fn encode_validation(graphs: &[LabeledGraph], vocab: &VocabSpec) -> Result<Vec<Vec<Step>>> {
    let codes = canonize_all(graphs)?;
    let mut out = Vec::with_capacity(codes.len());
    for (i, code) in codes.iter().enumerate() {
        match encode_sequence(code, vocab) {
            Ok(seq) => out.push(seq.steps),
            Err(Error::OutOfVocab(what)) => warn!("validation graph {i} skipped: {what} not in training vocabulary"),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn mean_loss<T: Scalar>(net: &Network<T>, seqs: &[Vec<Step>]) -> Result<f64> {
    let losses: Vec<Result<T>> = seqs.par_iter().map(|s| net.sequence_loss(s)).collect();
    let mut total = 0.0;
    for l in losses {
        total += l?.as_f64();
    }
    Ok(total / seqs.len() as f64)
}

/// Mini-batch training loop with validation-loss early stopping.
pub struct Trainer<T> {
    pub model: GenerativeModel<T>,
    pub adam: AdamState<T>,
    pub history: TrainHistory,
    best: Network<T>,
    best_valid: f64,
    /// Loss level the next epoch must undercut by the relative threshold.
    reference: f64,
    stale: usize,
    done: bool,
    train: Vec<Vec<Step>>,
    valid: Vec<Vec<Step>>,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(train_set: &[LabeledGraph], valid_set: &[LabeledGraph], cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if train_set.is_empty() {
            return Err(Error::EmptyDataset("training set is empty"));
        }
        let codes = canonize_all(train_set)?;
        let vocab = build_vocab(train_set)?;
        let max_len = cfg.max_len.unwrap_or_else(|| train_set.iter().map(LabeledGraph::edge_count).max().unwrap_or(0) + 1);
        let model = GenerativeModel::new(vocab, cfg.clone(), max_len)?;
        let adam = AdamState::new(cfg.optimizer, &model.network.params());
        Self::assemble(model, adam, None, &codes, valid_set)
    }

    /// Continues a run from a checkpoint that carries resume state. The
    /// epoch cap and patience of `cfg` replace the stored ones.
    pub fn resume(checkpoint: Checkpoint<T>, train_set: &[LabeledGraph], valid_set: &[LabeledGraph], cfg: &TrainConfig) -> Result<Self> {
        let Checkpoint { model: best_model, resume } = checkpoint;
        let resume = resume.ok_or_else(|| Error::Precondition("checkpoint has no training state to resume".into()))?;
        let mut model = GenerativeModel { network: resume.network.clone(), ..best_model.clone() };
        model.config.epochs = cfg.epochs;
        model.config.patience = cfg.patience;
        let codes = canonize_all(train_set)?;
        let mut t = Self::assemble(model, resume.adam.clone(), Some(best_model.network), &codes, valid_set)?;
        t.history = resume.history.clone();
        t.best_valid = resume.best_valid;
        t.reference = resume.reference;
        t.stale = resume.stale;
        t.done = resume.stopped;
        Ok(t)
    }

    fn assemble(
        model: GenerativeModel<T>,
        adam: AdamState<T>,
        best: Option<Network<T>>,
        codes: &[DfsCode],
        valid_set: &[LabeledGraph],
    ) -> Result<Self> {
        let train = encode_all(codes, &model.vocab)?;
        let valid = encode_validation(valid_set, &model.vocab)?;
        if valid.is_empty() {
            warn!("no usable validation graphs; early stopping monitors the training loss");
        }
        Ok(Trainer {
            best: best.unwrap_or_else(|| model.network.clone()),
            model,
            adam,
            history: TrainHistory::default(),
            best_valid: f64::INFINITY,
            reference: f64::INFINITY,
            stale: 0,
            done: false,
            train,
            valid,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done || self.history.last_epoch() >= self.model.config.epochs
    }

    /// One pass over the training sequences followed by validation.
    pub fn run_epoch(&mut self) -> Result<EpochRecord> {
        let cfg = &self.model.config;
        let epoch = self.history.last_epoch() + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);

        let mut order: Vec<usize> = (0..self.train.len()).collect();
        order.shuffle(&mut rng);
        order.sort_by_key(|&i| self.train[i].len());
        let mut batches: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
        batches.shuffle(&mut rng);

        let dropout = cfg.dropout > 0.0;
        let net = &mut self.model.network;
        let mut total = 0.0;
        for batch in batches {
            net.zero_grad();
            let scale = T::one() / T::of(batch.len() as f64);
            for &i in batch {
                let r = if dropout { Some(&mut rng) } else { None };
                total += net.accumulate_gradients(&self.train[i], r, scale)?.as_f64();
            }
            adam_step(&mut net.params_mut(), &mut self.adam);
            net.check_finite()?;
        }
        let train_loss = total / self.train.len() as f64;
        let valid_loss = if self.valid.is_empty() { mean_loss(net, &self.train)? } else { mean_loss(net, &self.valid)? };
        if !valid_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss at epoch {epoch}")));
        }

        if valid_loss < self.best_valid {
            self.best_valid = valid_loss;
            self.best = net.clone();
            self.history.best_epoch = epoch;
        }
        if valid_loss < self.reference * (1.0 - cfg.min_rel_improvement) || !self.reference.is_finite() {
            self.reference = valid_loss;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        let record = EpochRecord { epoch, train_loss, valid_loss };
        self.history.records.push(record);
        debug!("epoch {epoch}: train {train_loss:.6} valid {valid_loss:.6}");
        if self.stale >= cfg.patience {
            info!("early stop at epoch {epoch}; best epoch {}", self.history.best_epoch);
            self.done = true;
            self.history.stopped_early = true;
        }
        Ok(record)
    }

    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.run_epoch()?;
        }
        Ok(())
    }

    /// Best model so far plus everything needed to continue training.
    pub fn checkpoint(&self) -> Checkpoint<T> {
        let mut best = self.best.clone();
        best.zero_grad();
        let mut current = self.model.network.clone();
        current.zero_grad();
        Checkpoint {
            model: GenerativeModel { network: best, ..self.model.clone() },
            resume: Some(ResumeState {
                network: current,
                adam: self.adam.clone(),
                history: self.history.clone(),
                best_valid: self.best_valid,
                reference: self.reference,
                stale: self.stale,
                stopped: self.done,
            }),
        }
    }

    /// The parameters with the lowest validation loss, and the history.
    pub fn finish(mut self) -> (GenerativeModel<T>, TrainHistory) {
        self.best.zero_grad();
        (GenerativeModel { network: self.best, ..self.model }, self.history)
    }
}

/// Trains a model from scratch and returns the best-validation parameters.
pub fn train<T: Scalar>(train_set: &[LabeledGraph], valid_set: &[LabeledGraph], cfg: &TrainConfig) -> Result<(GenerativeModel<T>, TrainHistory)> {
    let mut t = Trainer::new(train_set, valid_set, cfg)?;
    t.run()?;
    Ok(t.finish())
}

pub fn resume_training<T: Scalar>(
    checkpoint: Checkpoint<T>,
    train_set: &[LabeledGraph],
    valid_set: &[LabeledGraph],
    cfg: &TrainConfig,
) -> Result<(GenerativeModel<T>, TrainHistory)> {
    let mut t = Trainer::resume(checkpoint, train_set, valid_set, cfg)?;
    t.run()?;
    Ok(t.finish())
}

/// Teacher-forced argmax accuracy over every step, the terminal EOS step
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub per_head: [f64; 5],
    /// Fraction of steps where all five heads are right at once.
    pub tuple: f64,
    pub steps: usize,
}

impl Accuracy {
    pub fn min_head(&self) -> f64 {
        self.per_head.iter().copied().fold(1.0, f64::min)
    }
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn teacher_forced_accuracy<T: Scalar>(model: &GenerativeModel<T>, codes: &[DfsCode]) -> Result<Accuracy> {
    let per_code: Vec<Result<([usize; 5], usize, usize)>> = codes
        .par_iter()
        .map(|code| {
            let steps = encode_sequence(code, &model.vocab)?.steps;
            let net = &model.network;
            let mut state = net.initial_state();
            let (mut heads, mut whole) = ([0usize; 5], 0usize);
            for (s, target) in steps.iter().enumerate() {
                let input = if s == 0 { None } else { Some(&steps[s - 1]) };
                let (next, outs) = net.forward_step(&state, input)?;
                let mut all = true;
                for c in 0..5 {
                    if argmax(&outs[c]) == target[c] {
                        heads[c] += 1;
                    } else {
                        all = false;
                    }
                }
                whole += usize::from(all);
                state = next;
            }
            Ok((heads, whole, steps.len()))
        })
        .collect();
    let (mut heads, mut whole, mut steps) = ([0usize; 5], 0, 0);
    for r in per_code {
        let (h, w, n) = r?;
        for c in 0..5 {
            heads[c] += h[c];
        }
        whole += w;
        steps += n;
    }
    if steps == 0 {
        return Err(Error::EmptyDataset("no sequences to score"));
    }
    let n = steps as f64;
    Ok(Accuracy { per_head: heads.map(|h| h as f64 / n), tuple: whole as f64 / n, steps })
}
