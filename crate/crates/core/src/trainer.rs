//! Joint training of one autoencoder per snapshot.
//!
//! Each epoch visits snapshots in order. Snapshot `t` minimizes
//! `recon + kl_prior + gamma * kl_smooth`, where the smoothness term anchors
//! its posterior on the latents of snapshots `t-1 … t-l` (held constant), then
//! takes one Adam step on its own weights. Under [`UpdateStrategy::Fresh`] the
//! anchors are the predecessors' current latents, already updated this epoch;
//! under [`UpdateStrategy::Fixed`] they are frozen at the start of the epoch,
//! which makes snapshots independent within an epoch.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::{common_nodes, normalize_adjacency, AlignmentMap, Snapshot, TemporalGraphDataset};
use crate::loss::{kl_prior, kl_smooth, recon_loss, recon_loss_latent, recon_weights, LossBreakdown, PriorAnchor};
use crate::model::{
    decode_logits, encode, encode_pass, encoder_backward, reparameterize_with_noise, EncoderParams, Features,
    LatentState,
};
use crate::tensor::{derive_seed, rng_from_seed, AdamConfig, AdamState, DenseMatrix, SparseMatrix};

const INIT_STREAM: u64 = 0x1417;
const NOISE_STREAM: u64 = 0x4015e;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStrategy {
    /// Anchors frozen at epoch start.
    Fixed,
    /// Anchors taken from predecessors right after their update this epoch.
    Fresh,
}

/// What the random-walk prior is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorMode {
    Mean,
    Sample,
}

/// Scale of both KL terms relative to the reconstruction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlNormalization {
    /// Per-node average.
    Nodes,
    /// Per-node average divided by `N` again, matching the per-entry mean
    /// of the reconstruction term.
    Entries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Weight of the smoothness term.
    pub gamma: f64,
    /// Number of prior snapshots each snapshot is anchored on.
    pub window: usize,
    pub sigma_rw: f64,
    pub hidden_dim: usize,
    pub latent_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub update_strategy: UpdateStrategy,
    pub anchor_mode: AnchorMode,
    /// Add self-loops before normalizing the adjacency.
    pub self_loops: bool,
    /// Largest snapshot for which the full `N × N` logit matrix is built.
    pub decoder_cap: usize,
    pub kl_normalization: KlNormalization,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            window: 1,
            sigma_rw: 1.0,
            hidden_dim: 32,
            latent_dim: 16,
            epochs: 200,
            learning_rate: 0.01,
            seed: 0,
            update_strategy: UpdateStrategy::Fresh,
            anchor_mode: AnchorMode::Mean,
            self_loops: true,
            decoder_cap: 5000,
            kl_normalization: KlNormalization::Entries,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid(format!(
                "gamma must be finite and nonnegative, got {}",
                self.gamma
            )));
        }
        if !(self.sigma_rw > 0.0 && self.sigma_rw.is_finite()) {
            return Err(invalid(format!("sigma_rw must be positive, got {}", self.sigma_rw)));
        }
        if self.hidden_dim == 0 || self.latent_dim == 0 {
            return Err(invalid("hidden and latent dimensions must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!(
                "learning rate must be nonnegative, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }

    /// One-line `key=value` summary for output headers.
    pub fn echo(&self) -> String {
        format!(
            "gamma={} l={} sigma_rw={} hidden={} latent={} epochs={} lr={} seed={} strategy={} anchor={} self_loops={} kl_norm={}",
            self.gamma,
            self.window,
            self.sigma_rw,
            self.hidden_dim,
            self.latent_dim,
            self.epochs,
            self.learning_rate,
            self.seed,
            match self.update_strategy {
                UpdateStrategy::Fixed => "fixed",
                UpdateStrategy::Fresh => "fresh",
            },
            match self.anchor_mode {
                AnchorMode::Mean => "mean",
                AnchorMode::Sample => "sample",
            },
            self.self_loops,
            match self.kl_normalization {
                KlNormalization::Nodes => "nodes",
                KlNormalization::Entries => "entries",
            },
        )
    }
}

/// Immutable per-snapshot inputs to training.
#[derive(Debug, Clone)]
pub struct SnapshotContext {
    pub t: usize,
    pub a_hat: SparseMatrix,
    pub adjacency: SparseMatrix,
    pub features: Option<DenseMatrix>,
}

impl SnapshotContext {
    pub fn new(snapshot: &Snapshot, position: usize, self_loops: bool) -> Self {
        Self {
            t: position,
            a_hat: normalize_adjacency(snapshot, self_loops),
            adjacency: snapshot.adjacency().clone(),
            features: snapshot.features().cloned(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn features(&self) -> Features<'_> {
        match &self.features {
            Some(x) => Features::Dense(x),
            None => Features::Identity,
        }
    }

    fn input_dim(&self) -> usize {
        self.features().input_dim(self.num_nodes())
    }
}

/// Loss, weight gradients and the latent state of one forward pass.
#[derive(Debug, Clone)]
pub struct SnapshotLoss {
    pub breakdown: LossBreakdown,
    pub grads: EncoderParams,
    pub latent: LatentState,
}

/// One encode → reparameterize → decode pass of snapshot `ctx` with noise
/// drawn from `seed`. Anchors are constants: no gradient reaches the
/// snapshots they came from.
pub fn snapshot_loss(
    ctx: &SnapshotContext,
    params: &EncoderParams,
    anchors: &[PriorAnchor],
    config: &TrainingConfig,
    seed: u64,
) -> Result<SnapshotLoss> {
    let n = ctx.num_nodes();
    let x = ctx.features();
    let pass = encode_pass(params, &ctx.a_hat, x)?;
    let (z, eps) = reparameterize_with_noise(&pass.mu, &pass.log_sigma, seed)?;

    let (recon, d_z) = if n <= config.decoder_cap {
        let mut label = ctx.adjacency.to_dense();
        for i in 0..n {
            label.set(i, i, 1.0);
        }
        let (pos_weight, norm) = recon_weights(n, ctx.adjacency.nnz() + n)?;
        let (loss, g) = recon_loss(&decode_logits(&z), &label, pos_weight, norm)?;
        // Logits and label are symmetric, so (G + Gᵀ) z = 2 G z.
        let d_z = g.matmul(&z)?.map(|v| 2.0 * v);
        (loss, d_z)
    } else {
        recon_loss_latent(&z, &ctx.adjacency)?
    };

    let (mut kl_p, mut d_mu, mut d_ls) = kl_prior(&pass.mu, &pass.log_sigma)?;
    let (mut kl_s, mut d_mu_s, mut d_ls_s) = kl_smooth(&pass.mu, &pass.log_sigma, anchors, config.sigma_rw)?;
    if config.kl_normalization == KlNormalization::Entries {
        let s = 1.0 / n as f64;
        kl_p *= s;
        kl_s *= s;
        for m in [&mut d_mu, &mut d_ls, &mut d_mu_s, &mut d_ls_s] {
            m.as_mut_slice().iter_mut().for_each(|v| *v *= s);
        }
    }

    // z = mu + exp(log_sigma) ⊙ ε
    d_mu.add_scaled(1.0, &d_z)?;
    for (((g, &dz), &e), &ls) in d_ls
        .as_mut_slice()
        .iter_mut()
        .zip(d_z.as_slice())
        .zip(eps.as_slice())
        .zip(pass.log_sigma.as_slice())
    {
        *g += dz * e * libm::exp(ls);
    }
    if config.gamma != 0.0 {
        d_mu.add_scaled(config.gamma, &d_mu_s)?;
        d_ls.add_scaled(config.gamma, &d_ls_s)?;
    }

    let grads = encoder_backward(params, &ctx.a_hat, x, &pass, &d_mu, &d_ls)?;
    Ok(SnapshotLoss {
        breakdown: LossBreakdown::new(recon, kl_p, kl_s, config.gamma),
        grads,
        latent: LatentState {
            mu: pass.mu,
            log_sigma: pass.log_sigma,
            z,
        },
    })
}

/// Trainable state of one snapshot's autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotModel {
    pub params: EncoderParams,
    pub latent: LatentState,
    adam: [AdamState; 3],
    stream: u64,
}

impl SnapshotModel {
    /// Glorot-initialized weights seeded by `(config.seed, stream)`.
    pub fn init(ctx: &SnapshotContext, config: &TrainingConfig, stream: u64) -> Result<Self> {
        let mut rng = rng_from_seed(derive_seed(config.seed, &[stream, INIT_STREAM]));
        let params = EncoderParams::glorot(&mut rng, ctx.input_dim(), config.hidden_dim, config.latent_dim);
        let adam = [
            AdamState::for_param(&params.w0, config.adam()),
            AdamState::for_param(&params.w_mu, config.adam()),
            AdamState::for_param(&params.w_sigma, config.adam()),
        ];
        let (mu, log_sigma) = encode(&params, &ctx.a_hat, ctx.features())?;
        let (z, _) = reparameterize_with_noise(&mu, &log_sigma, noise_seed(config.seed, stream, 0))?;
        Ok(Self {
            params,
            latent: LatentState { mu, log_sigma, z },
            adam,
            stream,
        })
    }

    fn anchor_source(&self, mode: AnchorMode) -> &DenseMatrix {
        match mode {
            AnchorMode::Mean => &self.latent.mu,
            AnchorMode::Sample => &self.latent.z,
        }
    }
}

fn noise_seed(seed: u64, stream: u64, epoch: usize) -> u64 {
    derive_seed(seed, &[stream, epoch as u64, NOISE_STREAM])
}

/// Forward, backward and one Adam step for one snapshot; afterwards the
/// model's `mu`/`log_sigma` reflect the updated weights and `z` holds the
/// sample used in this step. Empty snapshots are skipped.
pub fn train_step(
    ctx: &SnapshotContext,
    model: &mut SnapshotModel,
    anchors: &[PriorAnchor],
    config: &TrainingConfig,
    epoch: usize,
) -> Result<LossBreakdown> {
    if ctx.num_nodes() == 0 {
        return Ok(LossBreakdown::default());
    }
    let out = snapshot_loss(
        ctx,
        &model.params,
        anchors,
        config,
        noise_seed(config.seed, model.stream, epoch),
    )?;
    if let Some((term, value)) = out.breakdown.first_non_finite() {
        return Err(Error::NonFiniteLoss {
            epoch,
            snapshot: ctx.t,
            term,
            value,
        });
    }
    if !out.grads.is_finite() {
        return Err(Error::NonFiniteLoss {
            epoch,
            snapshot: ctx.t,
            term: "gradient",
            value: f64::NAN,
        });
    }
    for ((param, grad), adam) in model
        .params
        .matrices_mut()
        .into_iter()
        .zip(out.grads.matrices())
        .zip(model.adam.iter_mut())
    {
        adam.step(param, grad)?;
    }
    let (mu, log_sigma) = encode(&model.params, &ctx.a_hat, ctx.features())?;
    model.latent = LatentState {
        mu,
        log_sigma,
        z: out.latent.z,
    };
    Ok(out.breakdown)
}

/// Loss of snapshot `t` at `epoch` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub t: usize,
    pub loss: LossBreakdown,
}

/// Final weights, latents and loss history of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub params: Vec<EncoderParams>,
    pub latents: Vec<LatentState>,
    pub log: Vec<EpochRecord>,
    /// `Σ_t total_t` per epoch.
    pub epoch_totals: Vec<f64>,
}

/// A snapshot update that can run on any thread. Only produced for the
/// `Fixed` strategy, where updates within an epoch are independent.
pub struct SnapshotJob<'a> {
    pub t: usize,
    epoch: usize,
    ctx: &'a SnapshotContext,
    model: &'a mut SnapshotModel,
    anchors: Vec<PriorAnchor>,
    config: &'a TrainingConfig,
}

impl SnapshotJob<'_> {
    pub fn run(self) -> Result<LossBreakdown> {
        train_step(self.ctx, self.model, &self.anchors, self.config, self.epoch)
    }
}

/// Round-robin trainer over all snapshots of a dataset.
#[derive(Debug, Clone)]
pub struct JointTrainer {
    config: TrainingConfig,
    contexts: Vec<SnapshotContext>,
    alignments: Vec<Vec<AlignmentMap>>,
    models: Vec<SnapshotModel>,
    frozen: Vec<DenseMatrix>,
    epoch: usize,
    log: Vec<EpochRecord>,
    epoch_totals: Vec<f64>,
    pending: Vec<Option<LossBreakdown>>,
}

impl JointTrainer {
    /// Snapshot `t` draws its initialization and noise from stream `t`.
    pub fn new(ds: &TemporalGraphDataset, config: TrainingConfig) -> Result<Self> {
        let streams: Vec<u64> = (0..ds.len() as u64).collect();
        Self::with_streams(ds, config, &streams)
    }

    /// Like [`new`](Self::new) with explicit per-snapshot random streams, so a
    /// snapshot trained alone can reproduce its run inside a joint training.
    pub fn with_streams(ds: &TemporalGraphDataset, config: TrainingConfig, streams: &[u64]) -> Result<Self> {
        config.validate()?;
        if streams.len() != ds.len() {
            return Err(invalid("one random stream per snapshot required"));
        }
        let contexts: Vec<SnapshotContext> = ds
            .snapshots()
            .iter()
            .enumerate()
            .map(|(t, s)| SnapshotContext::new(s, t, config.self_loops))
            .collect();
        let alignments: Vec<Vec<AlignmentMap>> = (0..ds.len())
            .map(|t| {
                let maps = common_nodes(ds, t, config.window);
                for m in maps.iter().filter(|m| m.is_empty()) {
                    log::warn!(
                        "snapshots {} and {} share no nodes; no smoothness coupling",
                        m.target,
                        m.source
                    );
                }
                maps.into_iter().filter(|m| !m.is_empty()).collect()
            })
            .collect();
        let models = contexts
            .iter()
            .zip(streams)
            .map(|(ctx, &stream)| SnapshotModel::init(ctx, &config, stream))
            .collect::<Result<Vec<_>>>()?;
        let pending = alloc::vec![None; contexts.len()];
        Ok(Self {
            config,
            contexts,
            alignments,
            models,
            frozen: Vec::new(),
            epoch: 0,
            log: Vec::new(),
            epoch_totals: Vec::new(),
            pending,
        })
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn models(&self) -> &[SnapshotModel] {
        &self.models
    }

    pub fn num_snapshots(&self) -> usize {
        self.contexts.len()
    }

    /// Number of epochs started so far.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn log(&self) -> &[EpochRecord] {
        &self.log
    }

    pub fn epoch_totals(&self) -> &[f64] {
        &self.epoch_totals
    }

    pub fn begin_epoch(&mut self) {
        self.epoch += 1;
        if self.config.update_strategy == UpdateStrategy::Fixed {
            let mode = self.config.anchor_mode;
            self.frozen = self.models.iter().map(|m| m.anchor_source(mode).clone()).collect();
        }
        self.pending.iter_mut().for_each(|p| *p = None);
    }

    /// Anchors of snapshot `t` under the configured strategy.
    pub fn anchors_for(&self, t: usize) -> Vec<PriorAnchor> {
        let mode = self.config.anchor_mode;
        self.alignments[t]
            .iter()
            .map(|map| {
                let source = match self.config.update_strategy {
                    UpdateStrategy::Fixed if !self.frozen.is_empty() => &self.frozen[map.source],
                    _ => self.models[map.source].anchor_source(mode),
                };
                PriorAnchor::from_alignment(map, source)
            })
            .collect()
    }

    /// Updates snapshot `t` within the current epoch.
    pub fn step_snapshot(&mut self, t: usize) -> Result<LossBreakdown> {
        let anchors = self.anchors_for(t);
        let loss = train_step(
            &self.contexts[t],
            &mut self.models[t],
            &anchors,
            &self.config,
            self.epoch,
        )?;
        self.pending[t] = Some(loss);
        Ok(loss)
    }

    /// Independent updates for every snapshot of the current epoch. Requires
    /// the `Fixed` strategy; results must be passed back via [`record`](Self::record).
    pub fn fixed_jobs(&mut self) -> Result<Vec<SnapshotJob<'_>>> {
        if self.config.update_strategy != UpdateStrategy::Fixed {
            return Err(invalid("parallel snapshot updates require the fixed strategy"));
        }
        let anchors: Vec<Vec<PriorAnchor>> = (0..self.contexts.len()).map(|t| self.anchors_for(t)).collect();
        let epoch = self.epoch;
        let config = &self.config;
        Ok(self
            .contexts
            .iter()
            .zip(self.models.iter_mut())
            .zip(anchors)
            .enumerate()
            .map(|(t, ((ctx, model), anchors))| SnapshotJob {
                t,
                epoch,
                ctx,
                model,
                anchors,
                config,
            })
            .collect())
    }

    pub fn record(&mut self, t: usize, loss: LossBreakdown) {
        self.pending[t] = Some(loss);
    }

    /// Closes the epoch: appends per-snapshot records in snapshot order and
    /// returns the joint objective `Σ_t total_t`.
    pub fn end_epoch(&mut self) -> f64 {
        let mut total = 0.0;
        for (t, p) in self.pending.iter_mut().enumerate() {
            if let Some(loss) = p.take() {
                total += loss.total;
                self.log.push(EpochRecord {
                    epoch: self.epoch,
                    t,
                    loss,
                });
            }
        }
        self.epoch_totals.push(total);
        total
    }

    /// One sequential epoch over `t = 0 … T-1`.
    pub fn run_epoch(&mut self) -> Result<f64> {
        self.begin_epoch();
        for t in 0..self.contexts.len() {
            self.step_snapshot(t)?;
        }
        Ok(self.end_epoch())
    }

    pub fn finish(self) -> TrainOutput {
        let (params, latents) = self.models.into_iter().map(|m| (m.params, m.latent)).unzip();
        TrainOutput {
            params,
            latents,
            log: self.log,
            epoch_totals: self.epoch_totals,
        }
    }

    /// Runs all configured epochs sequentially.
    pub fn train(mut self) -> Result<TrainOutput> {
        for _ in 0..self.config.epochs {
            self.run_epoch()?;
        }
        Ok(self.finish())
    }
}

/// Trains all snapshots jointly with the sequential reference loop.
pub fn train_joint(ds: &TemporalGraphDataset, config: &TrainingConfig) -> Result<TrainOutput> {
    JointTrainer::new(ds, config.clone())?.train()
}

/// Trains snapshot `t` alone, with the random stream it would use in a joint run.
pub fn train_single(ds: &TemporalGraphDataset, t: usize, config: &TrainingConfig) -> Result<TrainOutput> {
    JointTrainer::with_streams(&ds.single(t), config.clone(), &[t as u64])?.train()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_dynamic_sbm, NodeRegistry, SbmConfig};
    use crate::tensor::{finite_difference_check, glorot_uniform, CoordinateSample};
    use alloc::vec;

    fn six_node() -> Snapshot {
        Snapshot::new(0, (0..6).collect(), &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)]).unwrap()
    }

    fn small_config() -> TrainingConfig {
        TrainingConfig {
            hidden_dim: 4,
            latent_dim: 3,
            epochs: 5,
            ..TrainingConfig::default()
        }
    }

    fn gradient_error(gamma: f64, decoder_cap: usize, kl_normalization: KlNormalization) -> f64 {
        let s = six_node();
        let ctx = SnapshotContext::new(&s, 1, true);
        let config = TrainingConfig {
            gamma,
            decoder_cap,
            kl_normalization,
            sigma_rw: 0.8,
            ..small_config()
        };
        let mut rng = rng_from_seed(99);
        let params = EncoderParams::glorot(&mut rng, 6, 4, 3);
        let anchors = vec![PriorAnchor {
            source: 0,
            pairs: vec![(0, 1), (2, 0), (5, 3)],
            mean: glorot_uniform(&mut rng, 3, 3),
        }];
        let out = snapshot_loss(&ctx, &params, &anchors, &config, 42).unwrap();
        let f = |flat: &[f64]| {
            let p = params.with_flat(flat).unwrap();
            snapshot_loss(&ctx, &p, &anchors, &config, 42).unwrap().breakdown.total
        };
        finite_difference_check(f, &params.to_flat(), &out.grads.to_flat(), 1e-6, CoordinateSample::All)
            .unwrap()
            .max_relative_error
    }

    #[test]
    fn full_snapshot_gradient_matches_finite_differences() {
        for kl in [KlNormalization::Entries, KlNormalization::Nodes] {
            assert!(gradient_error(0.7, 5000, kl) < 1e-4);
            assert!(gradient_error(0.0, 5000, kl) < 1e-4);
            // Blockwise route above the decoder cap.
            assert!(gradient_error(1.3, 2, kl) < 1e-4);
        }
    }

    #[test]
    fn gamma_zero_total_equals_static_loss() {
        let s = six_node();
        let ctx = SnapshotContext::new(&s, 1, true);
        let params = EncoderParams::glorot(&mut rng_from_seed(1), 6, 4, 3);
        let anchors = vec![PriorAnchor {
            source: 0,
            pairs: vec![(0, 0)],
            mean: DenseMatrix::filled(1, 3, 5.0),
        }];
        let cfg = TrainingConfig {
            gamma: 0.0,
            ..small_config()
        };
        let joint = snapshot_loss(&ctx, &params, &anchors, &cfg, 3).unwrap();
        let alone = snapshot_loss(&ctx, &params, &[], &cfg, 3).unwrap();
        assert!(joint.breakdown.kl_smooth > 0.0);
        assert_eq!(joint.breakdown.total.to_bits(), alone.breakdown.total.to_bits());
        assert_eq!(joint.grads, alone.grads);
    }

    #[test]
    fn entry_normalization_divides_kl_terms_by_node_count() {
        let s = six_node();
        let ctx = SnapshotContext::new(&s, 1, true);
        let params = EncoderParams::glorot(&mut rng_from_seed(6), 6, 4, 3);
        let anchors = vec![PriorAnchor {
            source: 0,
            pairs: vec![(2, 0), (3, 1)],
            mean: DenseMatrix::filled(2, 3, 0.4),
        }];
        let at = |kl_normalization| {
            let cfg = TrainingConfig {
                kl_normalization,
                ..small_config()
            };
            snapshot_loss(&ctx, &params, &anchors, &cfg, 2).unwrap().breakdown
        };
        let (nodes, entries) = (at(KlNormalization::Nodes), at(KlNormalization::Entries));
        assert_eq!(nodes.recon, entries.recon);
        assert!((nodes.kl_prior / 6.0 - entries.kl_prior).abs() < 1e-15);
        assert!((nodes.kl_smooth / 6.0 - entries.kl_smooth).abs() < 1e-15);
    }

    #[test]
    fn total_grows_linearly_in_gamma() {
        let s = six_node();
        let ctx = SnapshotContext::new(&s, 1, true);
        let params = EncoderParams::glorot(&mut rng_from_seed(1), 6, 4, 3);
        let anchors = vec![PriorAnchor {
            source: 0,
            pairs: vec![(1, 0), (4, 1)],
            mean: DenseMatrix::filled(2, 3, -0.5),
        }];
        let at = |gamma| {
            let cfg = TrainingConfig {
                gamma,
                ..small_config()
            };
            snapshot_loss(&ctx, &params, &anchors, &cfg, 8).unwrap().breakdown
        };
        let (lo, hi) = (at(0.5), at(2.0));
        assert!(hi.total >= lo.total);
        assert!((hi.total - lo.total - 1.5 * lo.kl_smooth).abs() < 1e-12);
    }

    #[test]
    fn first_snapshot_has_no_smoothness() {
        let ds = gen_dynamic_sbm(&SbmConfig {
            nodes: 30,
            communities: 2,
            p_in: 0.4,
            p_out: 0.05,
            snapshots: 3,
            churn: 0.1,
            seed: 2,
        })
        .unwrap();
        let mut tr = JointTrainer::new(
            &ds,
            TrainingConfig {
                gamma: 5.0,
                ..small_config()
            },
        )
        .unwrap();
        tr.run_epoch().unwrap();
        assert!(tr.anchors_for(0).is_empty());
        assert_eq!(tr.log()[0].loss.kl_smooth, 0.0);
        assert!(tr.log()[1].loss.kl_smooth > 0.0);
        for r in tr.log() {
            assert!(r.loss.kl_prior >= -1e-9 && r.loss.kl_smooth >= -1e-9);
        }
    }

    #[test]
    fn empty_snapshots_are_skipped() {
        let mut reg = NodeRegistry::new();
        let (a, b, c) = (reg.intern("a"), reg.intern("b"), reg.intern("c"));
        let snaps = vec![
            Snapshot::new(0, vec![a, b, c], &[(0, 1)]).unwrap(),
            Snapshot::new(1, vec![], &[]).unwrap(),
            Snapshot::new(2, vec![a, b, c], &[(1, 2)]).unwrap(),
        ];
        let ds = TemporalGraphDataset::new(snaps, reg, None).unwrap();
        let out = train_joint(&ds, &small_config()).unwrap();
        assert_eq!(out.latents[1].mu.rows(), 0);
        assert_eq!(out.latents[2].mu.shape(), (3, 3));
    }

    #[test]
    fn complete_graph_is_rejected_as_degenerate() {
        let mut reg = NodeRegistry::new();
        let nodes = vec![reg.intern("a"), reg.intern("b")];
        let ds = TemporalGraphDataset::new(vec![Snapshot::new(0, nodes, &[(0, 1)]).unwrap()], reg, None).unwrap();
        assert!(matches!(
            train_joint(&ds, &small_config()),
            Err(Error::DegenerateGraph(_))
        ));
    }

    #[test]
    fn strategies_agree_without_coupling() {
        let ds = gen_dynamic_sbm(&SbmConfig {
            nodes: 24,
            communities: 2,
            p_in: 0.5,
            p_out: 0.05,
            snapshots: 3,
            churn: 0.1,
            seed: 4,
        })
        .unwrap();
        for (ds, gamma) in [(ds.clone(), 0.0), (ds.single(1), 1.0)] {
            let run = |strategy| {
                let cfg = TrainingConfig {
                    gamma,
                    update_strategy: strategy,
                    ..small_config()
                };
                train_joint(&ds, &cfg).unwrap().params
            };
            assert_eq!(run(UpdateStrategy::Fixed), run(UpdateStrategy::Fresh));
        }
    }

    #[test]
    fn fixed_jobs_match_sequential_fixed_epochs() {
        let ds = gen_dynamic_sbm(&SbmConfig {
            nodes: 24,
            communities: 2,
            p_in: 0.5,
            p_out: 0.05,
            snapshots: 4,
            churn: 0.1,
            seed: 9,
        })
        .unwrap();
        let cfg = TrainingConfig {
            window: 2,
            update_strategy: UpdateStrategy::Fixed,
            ..small_config()
        };
        let mut seq = JointTrainer::new(&ds, cfg.clone()).unwrap();
        let mut jobs = JointTrainer::new(&ds, cfg).unwrap();
        for _ in 0..3 {
            seq.run_epoch().unwrap();
            jobs.begin_epoch();
            let mut results: Vec<_> = jobs
                .fixed_jobs()
                .unwrap()
                .into_iter()
                .rev()
                .map(|j| (j.t, j.run()))
                .collect();
            results.sort_by_key(|r| r.0);
            for (t, r) in results {
                jobs.record(t, r.unwrap());
            }
            jobs.end_epoch();
        }
        assert_eq!(seq.models(), jobs.models());
        assert_eq!(seq.log(), jobs.log());

        let mut fresh = JointTrainer::new(&ds, small_config()).unwrap();
        assert!(fresh.fixed_jobs().is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            TrainingConfig {
                gamma: -1.0,
                ..small_config()
            },
            TrainingConfig {
                sigma_rw: 0.0,
                ..small_config()
            },
            TrainingConfig {
                latent_dim: 0,
                ..small_config()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
