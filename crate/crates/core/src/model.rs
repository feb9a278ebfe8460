//! Per-snapshot variational graph autoencoder.
//!
//! Encoder: `H = ReLU(Â X W0)`, `mu = Â H W_mu`, `log_sigma = clamp(Â H W_sigma)`,
//! with `W0` shared by both heads. Decoder: `p(A_ij = 1) = sigmoid(z_i · z_j)`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{dot, glorot_uniform, sample_standard_normal, DenseMatrix, SparseMatrix};

/// `log_sigma` is clamped to `[-LOG_SIGMA_BOUND, LOG_SIGMA_BOUND]` before use.
pub const LOG_SIGMA_BOUND: f64 = 10.0;

/// Node features. `Identity` stands for `X = I` without materializing it, so
/// `X W0` is just `W0`.
#[derive(Debug, Clone, Copy)]
pub enum Features<'a> {
    Identity,
    Dense(&'a DenseMatrix),
}

impl Features<'_> {
    pub fn input_dim(&self, nodes: usize) -> usize {
        match self {
            Features::Identity => nodes,
            Features::Dense(x) => x.cols(),
        }
    }

    fn project(&self, w0: &DenseMatrix, nodes: usize) -> Result<DenseMatrix> {
        match self {
            Features::Identity => {
                if w0.rows() != nodes {
                    return Err(Error::ShapeMismatch {
                        op: "encode (identity features)",
                        left: (nodes, nodes),
                        right: w0.shape(),
                    });
                }
                Ok(w0.clone())
            }
            Features::Dense(x) => {
                if x.rows() != nodes {
                    return Err(Error::ShapeMismatch {
                        op: "encode (features)",
                        left: x.shape(),
                        right: (nodes, nodes),
                    });
                }
                x.matmul(w0)
            }
        }
    }

    /// `Xᵀ g`
    fn project_back(&self, g: DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Features::Identity => Ok(g),
            Features::Dense(x) => x.t_matmul(&g),
        }
    }
}

/// Weights of one snapshot's encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub w0: DenseMatrix,
    pub w_mu: DenseMatrix,
    pub w_sigma: DenseMatrix,
}

impl EncoderParams {
    pub fn zeros(input_dim: usize, hidden: usize, latent: usize) -> Self {
        Self {
            w0: DenseMatrix::zeros(input_dim, hidden),
            w_mu: DenseMatrix::zeros(hidden, latent),
            w_sigma: DenseMatrix::zeros(hidden, latent),
        }
    }

    /// Glorot-uniform initialization of all three matrices.
    pub fn glorot<R: Rng>(rng: &mut R, input_dim: usize, hidden: usize, latent: usize) -> Self {
        let w0 = glorot_uniform(rng, input_dim, hidden);
        let w_mu = glorot_uniform(rng, hidden, latent);
        let w_sigma = glorot_uniform(rng, hidden, latent);
        Self { w0, w_mu, w_sigma }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.cols()
    }

    pub fn latent_dim(&self) -> usize {
        self.w_mu.cols()
    }

    pub fn matrices(&self) -> [&DenseMatrix; 3] {
        [&self.w0, &self.w_mu, &self.w_sigma]
    }

    pub fn matrices_mut(&mut self) -> [&mut DenseMatrix; 3] {
        [&mut self.w0, &mut self.w_mu, &mut self.w_sigma]
    }

    pub fn num_parameters(&self) -> usize {
        self.matrices().iter().map(|m| m.as_slice().len()).sum()
    }

    /// All weights concatenated as `W0, W_mu, W_sigma`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for m in self.matrices() {
            out.extend_from_slice(m.as_slice());
        }
        out
    }

    /// Inverse of [`to_flat`](Self::to_flat), keeping this value's shapes.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.num_parameters() {
            return Err(Error::ShapeMismatch {
                op: "with_flat",
                left: (self.num_parameters(), 1),
                right: (flat.len(), 1),
            });
        }
        let mut out = self.clone();
        let mut offset = 0;
        for m in out.matrices_mut() {
            let len = m.as_slice().len();
            m.as_mut_slice().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.is_finite())
    }
}

/// Posterior parameters and the latest sample of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub mu: DenseMatrix,
    pub log_sigma: DenseMatrix,
    pub z: DenseMatrix,
}

/// Forward-pass intermediates needed by [`encoder_backward`].
#[derive(Debug, Clone)]
pub struct EncoderPass {
    pub mu: DenseMatrix,
    pub log_sigma: DenseMatrix,
    /// `Â X W0` before the ReLU.
    pre_activation: DenseMatrix,
    /// `Â H`
    aggregated: DenseMatrix,
    /// `Â H W_sigma` before clamping.
    raw_log_sigma: DenseMatrix,
}

fn check_adjacency(a_hat: &SparseMatrix) -> Result<usize> {
    if a_hat.rows() != a_hat.cols() {
        return Err(Error::ShapeMismatch {
            op: "encode (adjacency)",
            left: a_hat.shape(),
            right: (a_hat.rows(), a_hat.rows()),
        });
    }
    Ok(a_hat.rows())
}

/// Runs the two-layer GCN encoder and keeps what the backward pass needs.
pub fn encode_pass(params: &EncoderParams, a_hat: &SparseMatrix, x: Features<'_>) -> Result<EncoderPass> {
    let n = check_adjacency(a_hat)?;
    if params.w_mu.shape() != params.w_sigma.shape() || params.w_mu.rows() != params.w0.cols() {
        return Err(Error::ShapeMismatch {
            op: "encode (heads)",
            left: params.w_mu.shape(),
            right: params.w_sigma.shape(),
        });
    }
    let pre_activation = a_hat.spmm(&x.project(&params.w0, n)?)?;
    let hidden = pre_activation.map(|v| if v > 0.0 { v } else { 0.0 });
    let aggregated = a_hat.spmm(&hidden)?;
    let mu = aggregated.matmul(&params.w_mu)?;
    let raw_log_sigma = aggregated.matmul(&params.w_sigma)?;
    let log_sigma = raw_log_sigma.map(|v| v.clamp(-LOG_SIGMA_BOUND, LOG_SIGMA_BOUND));
    Ok(EncoderPass {
        mu,
        log_sigma,
        pre_activation,
        aggregated,
        raw_log_sigma,
    })
}

/// `(mu, log_sigma)` of the variational posterior.
pub fn encode(params: &EncoderParams, a_hat: &SparseMatrix, x: Features<'_>) -> Result<(DenseMatrix, DenseMatrix)> {
    let pass = encode_pass(params, a_hat, x)?;
    Ok((pass.mu, pass.log_sigma))
}

/// Back-propagates `∂L/∂mu` and `∂L/∂log_sigma` (w.r.t. the clamped value)
/// into the three weight matrices.
pub fn encoder_backward(
    params: &EncoderParams,
    a_hat: &SparseMatrix,
    x: Features<'_>,
    pass: &EncoderPass,
    d_mu: &DenseMatrix,
    d_log_sigma: &DenseMatrix,
) -> Result<EncoderParams> {
    pass.mu.same_shape(d_mu, "encoder_backward (mu)")?;
    pass.log_sigma.same_shape(d_log_sigma, "encoder_backward (log_sigma)")?;

    // Clamp passes gradient only strictly inside the bounds.
    let mut d_raw = d_log_sigma.clone();
    for (g, &raw) in d_raw.as_mut_slice().iter_mut().zip(pass.raw_log_sigma.as_slice()) {
        if !(-LOG_SIGMA_BOUND..=LOG_SIGMA_BOUND).contains(&raw) {
            *g = 0.0;
        }
    }

    let w_mu = pass.aggregated.t_matmul(d_mu)?;
    let w_sigma = pass.aggregated.t_matmul(&d_raw)?;

    let mut d_aggregated = d_mu.matmul_t(&params.w_mu)?;
    d_aggregated.add_scaled(1.0, &d_raw.matmul_t(&params.w_sigma)?)?;
    let mut d_hidden = a_hat.spmm_transposed(&d_aggregated)?;
    for (g, &pre) in d_hidden.as_mut_slice().iter_mut().zip(pass.pre_activation.as_slice()) {
        if pre <= 0.0 {
            *g = 0.0;
        }
    }
    let w0 = x.project_back(a_hat.spmm_transposed(&d_hidden)?)?;
    Ok(EncoderParams { w0, w_mu, w_sigma })
}

/// `z = mu + exp(log_sigma) ⊙ ε` together with the noise `ε` that was used.
pub fn reparameterize_with_noise(
    mu: &DenseMatrix,
    log_sigma: &DenseMatrix,
    seed: u64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    mu.same_shape(log_sigma, "reparameterize")?;
    let (rows, cols) = mu.shape();
    if rows == 0 || cols == 0 {
        return Ok((mu.clone(), DenseMatrix::zeros(rows, cols)));
    }
    let eps = sample_standard_normal(rows, cols, seed)?;
    let mut z = mu.clone();
    for ((z, &ls), &e) in z
        .as_mut_slice()
        .iter_mut()
        .zip(log_sigma.as_slice())
        .zip(eps.as_slice())
    {
        *z += libm::exp(ls) * e;
    }
    Ok((z, eps))
}

pub fn reparameterize(mu: &DenseMatrix, log_sigma: &DenseMatrix, seed: u64) -> Result<DenseMatrix> {
    reparameterize_with_noise(mu, log_sigma, seed).map(|(z, _)| z)
}

/// `Z Zᵀ`
pub fn decode_logits(z: &DenseMatrix) -> DenseMatrix {
    let n = z.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(z.row(i), z.row(j));
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// Reconstruction probability `sigmoid(z_i · z_j)`.
pub fn edge_score(z: &DenseMatrix, i: usize, j: usize) -> Result<f64> {
    if i >= z.rows() || j >= z.rows() {
        return Err(Error::IndexOutOfBounds {
            row: i,
            col: j,
            rows: z.rows(),
            cols: z.rows(),
        });
    }
    Ok(sigmoid(dot(z.row(i), z.row(j))))
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    libm::fmax(x, 0.0) + libm::log1p(libm::exp(-libm::fabs(x)))
}
