use std::fmt::Write as _;
use std::path::PathBuf;

use dynvgae_core::trainer::EpochRecord;
use dynvgae_core::DenseMatrix;

use crate::config::{DataSource, RunConfig};
use crate::error::{AppError, Result};
use crate::formats::{
    embedding_path, read_embedding, write, write_edge_file, write_embedding, write_labels, write_loss_log,
    write_objective, write_report, write_timing,
};
use crate::runner::{evaluate, load_dataset, sweep, train, train_one};

/// Writes `edges.txt` and `labels.txt` for the synthetic dataset.
pub fn cmd_gen(cfg: &RunConfig) -> Result<String> {
    if !matches!(cfg.data, DataSource::Synthetic(_)) {
        return Err(AppError::invalid("gen needs synthetic dataset parameters"));
    }
    let ds = load_dataset(cfg)?;
    write_edge_file(&cfg.out.join("edges.txt"), &ds)?;
    write_labels(&cfg.out.join("labels.txt"), &ds)?;
    let mut summary = format!("T = {}\n", ds.len());
    for (t, s) in ds.snapshots().iter().enumerate() {
        let _ = writeln!(summary, "t = {t}: N = {}, |E| = {}", s.num_nodes(), s.num_edges());
    }
    Ok(summary)
}

/// Trains and writes embeddings, the loss log, the per-epoch objective and
/// timings into the output directory.
pub fn cmd_train(cfg: &RunConfig) -> Result<String> {
    let ds = load_dataset(cfg)?;
    let echo = cfg.echo();
    let (out, timing, snapshots) = match cfg.snapshot {
        Some(t) => {
            let (mut out, timing) = train_one(&ds, t, &cfg.training)?;
            for r in &mut out.log {
                r.t = t;
            }
            (out, timing, vec![t])
        }
        None => {
            let (out, timing) = train(&ds, &cfg.training, cfg.parallel)?;
            (out, timing, (0..ds.len()).collect())
        }
    };
    for (latent, &t) in out.latents.iter().zip(&snapshots) {
        write_embedding(&embedding_path(&cfg.out, t), &ds, t, &latent.mu, &echo)?;
    }
    write_loss_log(&cfg.out.join("loss.tsv"), &out.log, &echo)?;
    write_objective(&cfg.out.join("objective.tsv"), &out.epoch_totals, &echo)?;
    write_timing(&cfg.out.join("timing.tsv"), timing.total, &timing.per_snapshot, &echo)?;

    let last: Vec<&EpochRecord> = out.log.iter().filter(|r| r.epoch == cfg.training.epochs).collect();
    let mut summary = format!(
        "trained {} snapshot(s) for {} epochs in {:.2}s\n",
        snapshots.len(),
        cfg.training.epochs,
        timing.total
    );
    for r in last {
        let _ = writeln!(
            summary,
            "t = {}: recon {:.4}  kl_prior {:.4}  kl_smooth {:.4}  total {:.4}",
            r.t, r.loss.recon, r.loss.kl_prior, r.loss.kl_smooth, r.loss.total
        );
    }
    let _ = writeln!(summary, "outputs in {}", cfg.out.display());
    Ok(summary)
}

/// Reads embeddings of every snapshot from the output directory and writes
/// one `report_<task>.tsv` per requested task.
pub fn cmd_eval(cfg: &RunConfig) -> Result<String> {
    let ds = load_dataset(cfg)?;
    let mut mus: Vec<DenseMatrix> = Vec::with_capacity(ds.len());
    let mut echo = String::new();
    for t in 0..ds.len() {
        let (mu, e) = read_embedding(&embedding_path(&cfg.out, t), &ds, t)?;
        if t == 0 {
            echo = e;
        }
        mus.push(mu);
    }
    let mut summary = String::new();
    for &task in &cfg.tasks {
        let report = evaluate(task, &mus, &ds, cfg, &echo)?;
        let path: PathBuf = cfg.out.join(format!("report_{}.tsv", task.name()));
        write_report(&path, &report)?;
        for s in &report.series {
            match s.mean() {
                Some(m) => {
                    let _ = writeln!(summary, "{}\t{}\tmean {m:.4}", task.name(), s.metric);
                }
                None => {
                    let _ = writeln!(summary, "{}\t{}\tno eligible snapshots", task.name(), s.metric);
                }
            }
        }
    }
    Ok(summary)
}

/// Trains and evaluates once per γ and writes `sweep.tsv`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    let ds = load_dataset(cfg)?;
    let rows = sweep(&ds, cfg)?;
    let mut out = format!(
        "# {} | gammas={:?} k={}..{}\ngamma\ttask\tmetric\tmean\n",
        cfg.echo(),
        cfg.gammas,
        cfg.k_range.start(),
        cfg.k_range.end()
    );
    for r in &rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.gamma, r.task.name(), r.metric, r.mean);
    }
    write(&cfg.out.join("sweep.tsv"), &out)?;
    Ok(out)
}
