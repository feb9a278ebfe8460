//! Downstream evaluation of per-snapshot embeddings.
//!
//! All protocols predict snapshot `t` from the embeddings of snapshot `t-1`
//! and only consider nodes present in both.

mod logistic;
mod metrics;
mod report;
mod tasks;

pub use logistic::{fit_logistic, LogisticConfig, LogisticModel};
pub use metrics::{auc, cosine_similarity, f1_scores};
pub use report::{MetricReport, MetricSeries};
pub use tasks::{latent_drift, link_prediction_eval, node_classification_eval, rank_by_cosine, recommend_eval};
