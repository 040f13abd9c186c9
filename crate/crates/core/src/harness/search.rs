use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Benchmark;
use crate::beta::{BetaKind, BetaSpec};
use crate::booster::{train_with_metric, BoostParams};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::objective::LossKind;
use crate::parallel;
use crate::rng;
use crate::tree::TreeParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Width and β kind are searched along with the tree settings.
    Wb,
    /// `q = d`, `β = I`.
    Gb,
    /// Standard boosting with rounds scaled to match a wide model's tree count.
    BudgetedGb,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Wb => "wb",
            SearchMode::Gb => "gb",
            SearchMode::BudgetedGb => "budgeted_gb",
        })
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wb" => Ok(SearchMode::Wb),
            "gb" => Ok(SearchMode::Gb),
            "budgeted" | "budgeted_gb" => Ok(SearchMode::BudgetedGb),
            other => Err(Error::InvalidParam(format!("unknown search mode '{other}'"))),
        }
    }
}

/// Sampling ranges for the random search. Bounds are inclusive; the learning
/// rate is drawn log-uniformly, λ and γ uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub max_depth: (usize, usize),
    pub learning_rate: (f64, f64),
    pub lambda: (f64, f64),
    pub gamma: (f64, f64),
    /// `q` is drawn from `[d, max_width_factor · d]`.
    pub max_width_factor: usize,
    pub beta_kinds: Vec<BetaKind>,
    pub rounds: usize,
    pub min_child_weight: f64,
    pub min_samples_leaf: usize,
    /// Tuning objective; the task's comparison metric when unset.
    pub metric: Option<MetricKind>,
}

impl SearchSpace {
    pub fn with_rounds(rounds: usize) -> Self {
        SearchSpace {
            max_depth: (2, 8),
            learning_rate: (0.01, 0.5),
            lambda: (0.0, 10.0),
            gamma: (0.0, 5.0),
            max_width_factor: 3,
            beta_kinds: BetaKind::ALL.to_vec(),
            rounds,
            min_child_weight: 1.0,
            min_samples_leaf: 1,
            metric: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParam(format!("empty search range for {what}")));
        if self.max_depth.0 < 1 || self.max_depth.0 > self.max_depth.1 {
            return bad("max_depth");
        }
        let (lo, hi) = self.learning_rate;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return bad("learning_rate");
        }
        if !(self.lambda.0 >= 0.0 && self.lambda.0 <= self.lambda.1) {
            return bad("lambda");
        }
        if !(self.gamma.0 >= 0.0 && self.gamma.0 <= self.gamma.1) {
            return bad("gamma");
        }
        if self.max_width_factor < 1 {
            return bad("q");
        }
        if self.beta_kinds.is_empty() {
            return bad("beta_kind");
        }
        Ok(())
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace::with_rounds(100)
    }
}

/// One sampled hyperparameter configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub index: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub q: usize,
    pub beta_kind: BetaKind,
    pub beta_seed: u64,
    pub rounds: usize,
    pub min_child_weight: f64,
    pub min_samples_leaf: usize,
}

impl TrialConfig {
    pub fn boost_params(&self, loss: LossKind, d: usize) -> BoostParams {
        BoostParams {
            rounds: self.rounds,
            learning_rate: self.learning_rate,
            tree: TreeParams {
                max_depth: self.max_depth,
                min_child_weight: self.min_child_weight,
                lambda: self.lambda,
                gamma: self.gamma,
                min_samples_leaf: self.min_samples_leaf,
            },
            beta: BetaSpec::new(self.beta_kind, self.q, d, self.beta_seed),
            loss,
            base_score: 0.0,
        }
    }

    pub fn tree_count(&self) -> usize {
        self.rounds * self.q
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: TrialConfig,
    /// Best test metric over all rounds.
    pub best_metric: Option<f64>,
    /// 1-based round at which `best_metric` was reached.
    pub best_round: Option<usize>,
    pub final_metric: Option<f64>,
    /// `rounds × q`.
    pub tree_count: usize,
    pub wall_time: f64,
    pub train_loss_non_increasing: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub mode: SearchMode,
    pub metric: MetricKind,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub best: Option<TrialRecord>,
    /// `(baseline − this) / baseline × 100` for a wide search, or
    /// `(this − wide) / this × 100` for a baseline measured against a wide winner.
    pub pct_improvement: Option<f64>,
    /// Winner of the opposing search, when one was run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_best: Option<TrialRecord>,
}

impl ExperimentReport {
    pub fn best_metric(&self) -> Option<f64> {
        self.best.as_ref().and_then(|b| b.best_metric)
    }
}

/// Relative improvement of `wide` over `standard`, in percent.
pub fn pct_improvement(wide: f64, standard: f64) -> Option<f64> {
    if standard == 0.0 {
        None
    } else {
        Some((standard - wide) / standard * 100.0)
    }
}

/// Draws `n_trials` configurations. Every trial consumes the same draws in
/// the same order whatever the mode, so trial `i` of a standard search shares
/// its tree settings with trial `i` of a wide search under the same seed.
pub fn sample_configs(
    space: &SearchSpace,
    d: usize,
    n_trials: usize,
    seed: u64,
    mode: SearchMode,
) -> Vec<TrialConfig> {
    let mut gen = rng::seeded(seed);
    (0..n_trials)
        .map(|index| {
            let max_depth = rng::uniform_int(&mut gen, space.max_depth.0, space.max_depth.1);
            let learning_rate =
                rng::log_uniform(&mut gen, space.learning_rate.0, space.learning_rate.1);
            let lambda = rng::uniform_range(&mut gen, space.lambda.0, space.lambda.1);
            let gamma = rng::uniform_range(&mut gen, space.gamma.0, space.gamma.1);
            let q = rng::uniform_int(&mut gen, d, space.max_width_factor * d);
            let kind = space.beta_kinds[rng::uniform_int(&mut gen, 0, space.beta_kinds.len() - 1)];
            let beta_seed = gen.next_u64();
            let (q, beta_kind) = match mode {
                SearchMode::Wb => (q, kind),
                SearchMode::Gb | SearchMode::BudgetedGb => (d, BetaKind::I),
            };
            TrialConfig {
                index,
                max_depth,
                learning_rate,
                lambda,
                gamma,
                q,
                beta_kind,
                beta_seed,
                rounds: space.rounds,
                min_child_weight: space.min_child_weight,
                min_samples_leaf: space.min_samples_leaf,
            }
        })
        .collect()
}

fn run_trial(bench: &Benchmark, config: TrialConfig, metric: MetricKind) -> TrialRecord {
    let start = Instant::now();
    let loss = LossKind::for_task(bench.train.task());
    let params = config.boost_params(loss, bench.label_dim());
    let outcome = train_with_metric(&bench.train, &params, Some(&bench.test), metric);
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok((_, trace)) => {
            let best = trace.best();
            TrialRecord {
                config,
                best_metric: best.map(|b| b.0),
                best_round: best.map(|b| b.1),
                final_metric: trace.final_value(),
                tree_count: config.tree_count(),
                wall_time,
                train_loss_non_increasing: trace.train_loss_non_increasing(),
                error: None,
            }
        }
        Err(e) => TrialRecord {
            config,
            best_metric: None,
            best_round: None,
            final_metric: None,
            tree_count: config.tree_count(),
            wall_time,
            train_loss_non_increasing: false,
            error: Some(e.to_string()),
        },
    }
}

fn argmin(trials: &[TrialRecord]) -> Option<TrialRecord> {
    trials
        .iter()
        .filter(|t| t.best_metric.is_some())
        .fold(None, |acc: Option<&TrialRecord>, t| match acc {
            Some(b) if b.best_metric <= t.best_metric => Some(b),
            _ => Some(t),
        })
        .cloned()
}

/// Random search over `space`. Trials run on the shared worker pool and are
/// reported in sampling order; a failing trial is recorded, not fatal.
pub fn random_search(
    bench: &Benchmark,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    mode: SearchMode,
) -> Result<ExperimentReport> {
    if n_trials == 0 {
        return Err(Error::InvalidParam("n_trials must be >= 1".into()));
    }
    space.validate()?;
    let d = bench.label_dim();
    let metric = space.metric.unwrap_or_else(|| MetricKind::for_task(bench.train.task()));
    let configs = sample_configs(space, d, n_trials, seed, mode);
    let trials: Vec<TrialRecord> = parallel::pool().install(|| {
        configs
            .par_iter()
            .map(|&c| run_trial(bench, c, metric))
            .collect()
    });
    let best = argmin(&trials);
    Ok(ExperimentReport {
        dataset: bench.name.clone(),
        mode,
        metric,
        seed,
        trials,
        best,
        pct_improvement: None,
        reference_best: None,
    })
}

/// Runs the wide and the standard search with the same seed. The wide report
/// carries the improvement over the standard winner.
pub fn compare(
    bench: &Benchmark,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
) -> Result<(ExperimentReport, ExperimentReport)> {
    let mut wb = random_search(bench, space, n_trials, seed, SearchMode::Wb)?;
    let gb = random_search(bench, space, n_trials, seed, SearchMode::Gb)?;
    if let (Some(w), Some(g)) = (wb.best_metric(), gb.best_metric()) {
        wb.pct_improvement = pct_improvement(w, g);
    }
    wb.reference_best = gb.best.clone();
    Ok((wb, gb))
}

/// Rounds a standard model needs to fit as many trees as `wb_best`:
/// `tree_count / d`, rounded down.
pub fn budgeted_rounds(wb_best: &TrialRecord, d: usize) -> usize {
    wb_best.tree_count / d
}

/// Standard-boosting search with its round count raised so its maximum tree
/// count matches the wide winner's.
pub fn budgeted_gb(
    bench: &Benchmark,
    wb_best: &TrialRecord,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let d = bench.label_dim();
    let budget_space = SearchSpace {
        rounds: budgeted_rounds(wb_best, d),
        ..space.clone()
    };
    let mut report = random_search(bench, &budget_space, n_trials, seed, SearchMode::BudgetedGb)?;
    report.mode = SearchMode::BudgetedGb;
    if let (Some(w), Some(g)) = (wb_best.best_metric, report.best_metric()) {
        report.pct_improvement = pct_improvement(w, g);
    }
    report.reference_best = Some(wb_best.clone());
    Ok(report)
}

/// Best metrics of the same search repeated with seeds `seed..seed+repeats`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub dataset: String,
    pub mode: SearchMode,
    pub seeds: Vec<u64>,
    pub best_metrics: Vec<Option<f64>>,
    pub min: Option<f64>,
    pub mean: Option<f64>,
}

pub fn repeat_search(
    bench: &Benchmark,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    mode: SearchMode,
    repeats: usize,
) -> Result<RepeatSummary> {
    if repeats == 0 {
        return Err(Error::InvalidParam("repeats must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..repeats as u64).map(|r| seed.wrapping_add(r)).collect();
    let mut best_metrics = Vec::with_capacity(repeats);
    for &s in &seeds {
        best_metrics.push(random_search(bench, space, n_trials, s, mode)?.best_metric());
    }
    let ok: Vec<f64> = best_metrics.iter().flatten().copied().collect();
    Ok(RepeatSummary {
        dataset: bench.name.clone(),
        mode,
        seeds,
        min: ok.iter().copied().reduce(f64::min),
        mean: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
        best_metrics,
    })
}
