//! Link-prediction harness: Hamming scoring, Mann-Whitney AUC, and the
//! split -> embed -> score -> rank pipeline.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{split_edges, AttributedGraph, LinkSplit};
use crate::sketch::{embed, EmbedConfig, EmbeddingMatrix};

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

/// Fraction of dimensions at which two rows agree.
pub fn hamming_score(row1: &[u32], row2: &[u32]) -> Result<f64> {
    if row1.len() != row2.len() {
        return Err(Error::LengthMismatch {
            left: row1.len(),
            right: row2.len(),
        });
    }
    if row1.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot score zero-length rows".into(),
        ));
    }
    let equal = row1.iter().zip(row2).filter(|(a, b)| a == b).count();
    Ok(equal as f64 / row1.len() as f64)
}

/// Node pairs with their Hamming similarity scores.
#[derive(Debug, Clone)]
pub struct ScoredPairs {
    pub positives: Vec<((u32, u32), f64)>,
    pub negatives: Vec<((u32, u32), f64)>,
}

impl ScoredPairs {
    pub fn positive_scores(&self) -> Vec<f64> {
        self.positives.iter().map(|&(_, s)| s).collect()
    }

    pub fn negative_scores(&self) -> Vec<f64> {
        self.negatives.iter().map(|&(_, s)| s).collect()
    }
}

/// Scores every test pair of a split against an embedding of its train
/// graph.
pub fn score_split(matrix: &EmbeddingMatrix, split: &LinkSplit) -> Result<ScoredPairs> {
    let score = |pairs: &[(u32, u32)]| -> Result<Vec<((u32, u32), f64)>> {
        pairs
            .iter()
            .map(|&(u, v)| Ok(((u, v), hamming_score(matrix.row(u), matrix.row(v))?)))
            .collect()
    };
    Ok(ScoredPairs {
        positives: score(&split.test_positives)?,
        negatives: score(&split.test_negatives)?,
    })
}

// ---------------------------------------------------------------------------
// AUC
// ---------------------------------------------------------------------------

/// Mann-Whitney AUC: the probability that a random positive outranks a
/// random negative, ties credited 0.5. Computed in `O(n log n)` by average
/// ranks over the pooled sample.
pub fn auc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::InvalidParameter(
            "AUC needs at least one positive and one negative score".into(),
        ));
    }
    if pos_scores.iter().chain(neg_scores).any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores must not be NaN".into()));
    }

    let mut pooled: Vec<(f64, bool)> = pos_scores
        .iter()
        .map(|&s| (s, true))
        .chain(neg_scores.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Average ranks across tie groups, accumulate the positives' rank sum.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0; // ranks are 1-based
        for item in &pooled[i..j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let np = pos_scores.len() as f64;
    let nn = neg_scores.len() as f64;
    let u = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

// ---------------------------------------------------------------------------
// The experiment pipeline
// ---------------------------------------------------------------------------

/// Parameters of one link-prediction experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub train_ratio: f64,
    pub iterations: usize,
    pub dimensions: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Results of a link-prediction experiment (per-trial AUCs plus mean
/// timings).
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub auc_mean: f64,
    pub auc_per_trial: Vec<f64>,
    pub embed_seconds_mean: f64,
    pub score_seconds_mean: f64,
    pub config: EvalConfig,
}

impl EvalReport {
    /// Emits the structured-text report document.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "auc_mean = {:.6}", self.auc_mean)?;
        let trials: Vec<String> = self
            .auc_per_trial
            .iter()
            .map(|a| format!("{a:.6}"))
            .collect();
        writeln!(out, "auc_per_trial = [{}]", trials.join(", "))?;
        writeln!(out, "embed_seconds_mean = {:.6}", self.embed_seconds_mean)?;
        writeln!(out, "score_seconds_mean = {:.6}", self.score_seconds_mean)?;
        writeln!(
            out,
            "config = {{ T = {}, K = {}, seed = {}, train_ratio = {}, trials = {} }}",
            self.config.iterations,
            self.config.dimensions,
            self.config.seed,
            self.config.train_ratio,
            self.config.trials
        )?;
        Ok(())
    }
}

/// Runs the full experiment: per trial, split the edges, embed the train
/// graph, score held-out positives against sampled negatives, and rank.
///
/// Trial `i` uses seed `seed + i` for both its split (fresh negatives every
/// trial) and its hash families, so a report is reproducible from its
/// config. Only the timing fields vary between identical runs.
pub fn run_link_prediction(g: &AttributedGraph, config: &EvalConfig) -> Result<EvalReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut auc_per_trial = Vec::with_capacity(config.trials);
    let mut embed_seconds = 0.0f64;
    let mut score_seconds = 0.0f64;

    for trial in 0..config.trials {
        let trial_seed = config.seed.wrapping_add(trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let split = split_edges(g, config.train_ratio, &mut rng)?;

        let embed_start = Instant::now();
        let matrix = embed(
            &split.train_graph,
            &EmbedConfig {
                iterations: config.iterations,
                dimensions: config.dimensions,
                seed: trial_seed,
            },
        )?;
        embed_seconds += embed_start.elapsed().as_secs_f64();

        let score_start = Instant::now();
        let scored = score_split(&matrix, &split)?;
        let trial_auc = auc(&scored.positive_scores(), &scored.negative_scores())?;
        score_seconds += score_start.elapsed().as_secs_f64();

        auc_per_trial.push(trial_auc);
    }

    let trials = config.trials as f64;
    Ok(EvalReport {
        auc_mean: auc_per_trial.iter().sum::<f64>() / trials,
        auc_per_trial,
        embed_seconds_mean: embed_seconds / trials,
        score_seconds_mean: score_seconds / trials,
        config: *config,
    })
}
