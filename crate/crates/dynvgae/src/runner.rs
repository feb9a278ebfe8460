//! Training with wall-clock timing, the threaded epoch runner, evaluation
//! and γ sweeps.

use std::time::Instant;

use dynvgae_core::eval::{link_prediction_eval, node_classification_eval, recommend_eval, MetricReport};
use dynvgae_core::graph::gen_dynamic_sbm;
use dynvgae_core::trainer::{train_single, JointTrainer, TrainOutput, TrainingConfig};
use dynvgae_core::{DenseMatrix, TemporalGraphDataset};

use crate::config::{DataSource, RunConfig, Task};
use crate::error::{AppError, Result};
use crate::formats::{apply_features, load_snapshots};

/// Wall-clock seconds for the whole run and spent on each snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub total: f64,
    pub per_snapshot: Vec<f64>,
}

pub fn load_dataset(cfg: &RunConfig) -> Result<TemporalGraphDataset> {
    let mut ds = match &cfg.data {
        DataSource::EdgeFile {
            path,
            labels,
            window,
            cumulative,
        } => load_snapshots(path, *window, *cumulative, labels.as_deref())?,
        DataSource::Synthetic(sbm) => gen_dynamic_sbm(sbm)?,
    };
    if let Some(path) = &cfg.features {
        apply_features(path, &mut ds)?;
    }
    Ok(ds)
}

/// Trains all snapshots jointly. With `parallel`, each epoch runs one
/// thread per snapshot and exchanges anchors at the epoch boundary, which
/// requires the fixed strategy and reproduces its sequential results.
pub fn train(ds: &TemporalGraphDataset, config: &TrainingConfig, parallel: bool) -> Result<(TrainOutput, Timing)> {
    let start = Instant::now();
    let mut trainer = JointTrainer::new(ds, config.clone())?;
    let mut per_snapshot = vec![0.0; ds.len()];
    for _ in 0..config.epochs {
        trainer.begin_epoch();
        if parallel {
            let results = std::thread::scope(|scope| {
                let handles: Vec<_> = trainer
                    .fixed_jobs()?
                    .into_iter()
                    .map(|job| {
                        let t = job.t;
                        scope.spawn(move || {
                            let clock = Instant::now();
                            let loss = job.run();
                            (t, loss, clock.elapsed().as_secs_f64())
                        })
                    })
                    .collect();
                Ok::<_, dynvgae_core::Error>(
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("snapshot worker panicked"))
                        .collect::<Vec<_>>(),
                )
            })?;
            for (t, loss, secs) in results {
                per_snapshot[t] += secs;
                trainer.record(t, loss?);
            }
        } else {
            for (t, secs) in per_snapshot.iter_mut().enumerate() {
                let clock = Instant::now();
                trainer.step_snapshot(t)?;
                *secs += clock.elapsed().as_secs_f64();
            }
        }
        trainer.end_epoch();
    }
    let out = trainer.finish();
    Ok((
        out,
        Timing {
            total: start.elapsed().as_secs_f64(),
            per_snapshot,
        },
    ))
}

/// Trains snapshot `t` alone with the random stream it has in a joint run.
pub fn train_one(ds: &TemporalGraphDataset, t: usize, config: &TrainingConfig) -> Result<(TrainOutput, Timing)> {
    if t >= ds.len() {
        return Err(AppError::invalid(format!(
            "snapshot {t} out of range (T = {})",
            ds.len()
        )));
    }
    let start = Instant::now();
    let out = train_single(ds, t, config)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        out,
        Timing {
            total: secs,
            per_snapshot: vec![secs],
        },
    ))
}

pub fn evaluate(
    task: Task,
    mus: &[DenseMatrix],
    ds: &TemporalGraphDataset,
    cfg: &RunConfig,
    echo: &str,
) -> Result<MetricReport> {
    let seed = cfg.training.seed;
    let mut report = match task {
        Task::LinkPrediction => link_prediction_eval(mus, ds, seed)?,
        Task::NodeClassification => node_classification_eval(mus, ds, seed)?,
        Task::Recommendation => recommend_eval(mus, ds, cfg.k_range.clone())?,
    };
    report.echo = format!(
        "{echo} | eval_seed={seed} k={}..{}",
        cfg.k_range.start(),
        cfg.k_range.end()
    );
    Ok(report)
}

/// Mean of every metric per γ, in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub task: Task,
    pub metric: String,
    pub mean: f64,
}

pub fn sweep(ds: &TemporalGraphDataset, cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &gamma in &cfg.gammas {
        let training = TrainingConfig {
            gamma,
            ..cfg.training.clone()
        };
        let (out, _) = train(ds, &training, cfg.parallel)?;
        let mus: Vec<DenseMatrix> = out.latents.into_iter().map(|l| l.mu).collect();
        for &task in &cfg.tasks {
            let report = evaluate(task, &mus, ds, cfg, &training.echo())?;
            for s in &report.series {
                if let Some(mean) = s.mean() {
                    rows.push(SweepRow {
                        gamma,
                        task,
                        metric: s.metric.clone(),
                        mean,
                    });
                }
            }
        }
        log::info!("gamma {gamma} done");
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynvgae_core::graph::SbmConfig;
    use dynvgae_core::trainer::{train_joint, UpdateStrategy};

    fn small() -> (TemporalGraphDataset, TrainingConfig) {
        let ds = gen_dynamic_sbm(&SbmConfig {
            nodes: 40,
            communities: 2,
            p_in: 0.4,
            p_out: 0.05,
            snapshots: 4,
            churn: 0.1,
            seed: 3,
        })
        .unwrap();
        let cfg = TrainingConfig {
            epochs: 6,
            hidden_dim: 8,
            latent_dim: 4,
            window: 2,
            update_strategy: UpdateStrategy::Fixed,
            ..TrainingConfig::default()
        };
        (ds, cfg)
    }

    #[test]
    fn threaded_epochs_match_sequential_fixed() {
        let (ds, cfg) = small();
        let (seq, _) = train(&ds, &cfg, false).unwrap();
        let (par, timing) = train(&ds, &cfg, true).unwrap();
        assert_eq!(seq, par);
        assert_eq!(par, train_joint(&ds, &cfg).unwrap());
        assert_eq!(timing.per_snapshot.len(), 4);
        assert!(timing.total >= 0.0 && timing.per_snapshot.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn threaded_epochs_reject_fresh() {
        let (ds, cfg) = small();
        let cfg = TrainingConfig {
            update_strategy: UpdateStrategy::Fresh,
            ..cfg
        };
        assert!(train(&ds, &cfg, true).is_err());
    }
}
