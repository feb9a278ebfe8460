//! Run configuration from a flat `key = value` file and command-line flags.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dynvgae_core::graph::SbmConfig;
use dynvgae_core::trainer::{AnchorMode, KlNormalization, TrainingConfig, UpdateStrategy};

use crate::error::{AppError, Result};

const KEYS: &[&str] = &[
    "anchor",
    "churn",
    "communities",
    "cumulative",
    "data_seed",
    "decoder_cap",
    "edge_file",
    "epochs",
    "features",
    "gamma",
    "gammas",
    "hidden",
    "k",
    "kl_norm",
    "l",
    "labels",
    "latent",
    "lr",
    "n",
    "out",
    "p_in",
    "p_out",
    "parallel",
    "seed",
    "self_loops",
    "sigma_rw",
    "snapshot",
    "strategy",
    "T",
    "tasks",
    "window",
];

const SYNTHETIC_KEYS: &[&str] = &["n", "communities", "p_in", "p_out", "T", "churn", "data_seed"];

pub const DEFAULT_GAMMAS: &[f64] = &[0.0, 0.1, 0.5, 1.0, 1.5, 2.5];

/// Raw `key → value` settings; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn canonical_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut s = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AppError::parse(path, i + 1, "expected 'key = value'"))?;
            let key = canonical_key(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(AppError::parse(path, i + 1, format!("unknown key '{key}'")));
            }
            s.values.insert(key, value.trim().to_string());
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let key = canonical_key(key);
        debug_assert!(KEYS.contains(&key.as_str()), "unknown key {key}");
        self.values.insert(key, value.to_string());
    }

    /// Sets `key` only when `value` is present.
    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn merge(&mut self, overrides: &Settings) {
        self.values
            .extend(overrides.values.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| AppError::invalid(format!("invalid value '{v}' for {key}")))
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get_str(key) {
            None => Ok(default),
            Some("true" | "1" | "yes" | "on") => Ok(true),
            Some("false" | "0" | "no" | "off") => Ok(false),
            Some(v) => Err(AppError::invalid(format!(
                "invalid value '{v}' for {key}: expected true or false"
            ))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| AppError::invalid(format!("synthetic dataset needs '{key}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    LinkPrediction,
    NodeClassification,
    Recommendation,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::LinkPrediction => "lp",
            Task::NodeClassification => "nc",
            Task::Recommendation => "rec",
        }
    }
}

impl FromStr for Task {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lp" => Ok(Task::LinkPrediction),
            "nc" => Ok(Task::NodeClassification),
            "rec" => Ok(Task::Recommendation),
            other => Err(AppError::invalid(format!(
                "unknown task '{other}' (expected lp, nc or rec)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    EdgeFile {
        path: PathBuf,
        labels: Option<PathBuf>,
        window: u64,
        cumulative: bool,
    },
    Synthetic(SbmConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub training: TrainingConfig,
    pub data: DataSource,
    pub features: Option<PathBuf>,
    pub out: PathBuf,
    pub tasks: Vec<Task>,
    pub k_range: RangeInclusive<usize>,
    pub parallel: bool,
    /// Train only this snapshot, independently of the others.
    pub snapshot: Option<usize>,
    pub gammas: Vec<f64>,
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single `k`.
pub fn parse_k_range(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || AppError::invalid(format!("invalid k range '{text}' (expected e.g. 2..10)"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo < 2 || hi > 10 || lo > hi {
        return Err(AppError::invalid(format!("k range {lo}..{hi} must lie within 2..10")));
    }
    Ok(lo..=hi)
}

fn parse_list<T: FromStr>(key: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| AppError::invalid(format!("invalid entry '{s}' in {key}")))
        })
        .collect()
}

fn parse_strategy(s: &str) -> Result<UpdateStrategy> {
    match s {
        "fixed" => Ok(UpdateStrategy::Fixed),
        "fresh" => Ok(UpdateStrategy::Fresh),
        _ => Err(AppError::invalid(format!(
            "unknown strategy '{s}' (expected fixed or fresh)"
        ))),
    }
}

fn parse_anchor(s: &str) -> Result<AnchorMode> {
    match s {
        "mean" => Ok(AnchorMode::Mean),
        "sample" => Ok(AnchorMode::Sample),
        _ => Err(AppError::invalid(format!(
            "unknown anchor '{s}' (expected mean or sample)"
        ))),
    }
}

fn parse_kl_norm(s: &str) -> Result<KlNormalization> {
    match s {
        "entries" => Ok(KlNormalization::Entries),
        "nodes" => Ok(KlNormalization::Nodes),
        _ => Err(AppError::invalid(format!(
            "unknown kl_norm '{s}' (expected entries or nodes)"
        ))),
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let defaults = TrainingConfig::default();
        let seed = s.get_or("seed", defaults.seed)?;
        let parallel = s.get_bool("parallel", false)?;
        let update_strategy = match (s.get_str("strategy"), parallel) {
            (Some(v), _) => parse_strategy(v)?,
            (None, true) => UpdateStrategy::Fixed,
            (None, false) => defaults.update_strategy,
        };
        if parallel && update_strategy == UpdateStrategy::Fresh {
            return Err(AppError::invalid(
                "parallel training requires the fixed strategy; fresh updates are sequential by definition",
            ));
        }
        let training = TrainingConfig {
            gamma: s.get_or("gamma", defaults.gamma)?,
            window: s.get_or("l", defaults.window)?,
            sigma_rw: s.get_or("sigma_rw", defaults.sigma_rw)?,
            hidden_dim: s.get_or("hidden", defaults.hidden_dim)?,
            latent_dim: s.get_or("latent", defaults.latent_dim)?,
            epochs: s.get_or("epochs", defaults.epochs)?,
            learning_rate: s.get_or("lr", defaults.learning_rate)?,
            seed,
            update_strategy,
            anchor_mode: s
                .get_str("anchor")
                .map(parse_anchor)
                .transpose()?
                .unwrap_or(defaults.anchor_mode),
            self_loops: s.get_bool("self_loops", defaults.self_loops)?,
            decoder_cap: s.get_or("decoder_cap", defaults.decoder_cap)?,
            kl_normalization: s
                .get_str("kl_norm")
                .map(parse_kl_norm)
                .transpose()?
                .unwrap_or(defaults.kl_normalization),
        };
        training.validate()?;

        let synthetic = SYNTHETIC_KEYS.iter().any(|k| s.contains(k));
        let data = match (s.get_str("edge_file"), synthetic) {
            (Some(_), true) => {
                return Err(AppError::invalid(
                    "give either an edge file or synthetic dataset parameters, not both",
                ))
            }
            (Some(path), false) => {
                let window: u64 = s.get_or("window", 1)?;
                if window == 0 {
                    return Err(AppError::invalid("window must be positive"));
                }
                DataSource::EdgeFile {
                    path: PathBuf::from(path),
                    labels: s.get_str("labels").map(PathBuf::from),
                    window,
                    cumulative: s.get_bool("cumulative", false)?,
                }
            }
            (None, true) => {
                if s.contains("labels") {
                    return Err(AppError::invalid(
                        "synthetic datasets carry their own labels; drop --labels",
                    ));
                }
                let cfg = SbmConfig {
                    nodes: s.require("n")?,
                    communities: s.require("communities")?,
                    p_in: s.require("p_in")?,
                    p_out: s.require("p_out")?,
                    snapshots: s.require("T")?,
                    churn: s.get_or("churn", 0.0)?,
                    seed: s.get_or("data_seed", seed)?,
                };
                cfg.validate()?;
                DataSource::Synthetic(cfg)
            }
            (None, false) => return Err(AppError::invalid(
                "no dataset: pass --edge-file or the synthetic parameters (--n, --communities, --p-in, --p-out, --T)",
            )),
        };

        let tasks = {
            let mut t: Vec<Task> = parse_list("tasks", s.get_str("tasks").unwrap_or("lp"))?;
            t.sort();
            t.dedup();
            if t.is_empty() {
                return Err(AppError::invalid("no tasks given"));
            }
            t
        };
        let gammas: Vec<f64> = match s.get_str("gammas") {
            Some(v) => parse_list("gammas", v)?,
            None => DEFAULT_GAMMAS.to_vec(),
        };
        if gammas.is_empty() || gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(AppError::invalid(
                "gammas must be a nonempty list of nonnegative numbers",
            ));
        }

        Ok(Self {
            training,
            data,
            features: s.get_str("features").map(PathBuf::from),
            out: PathBuf::from(s.get_str("out").unwrap_or("out")),
            tasks,
            k_range: parse_k_range(s.get_str("k").unwrap_or("2..10"))?,
            parallel,
            snapshot: s.get("snapshot")?,
            gammas,
        })
    }

    /// Settings summary embedded in output headers.
    pub fn echo(&self) -> String {
        self.training.echo()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> Settings {
        let mut s = Settings::new();
        for (k, v) in [
            ("n", "30"),
            ("communities", "2"),
            ("p_in", "0.3"),
            ("p_out", "0.05"),
            ("T", "3"),
        ] {
            s.set(k, v);
        }
        s
    }

    #[test]
    fn file_values_are_overridden_by_flags() {
        let text = "gamma = 0.5  # weight\nlr=0.02\n\nstrategy = fixed\nn = 30\ncommunities=2\np-in = 0.3\np_out = 0.05\nT = 3\n";
        let mut s = Settings::parse(text, Path::new("c.cfg")).unwrap();
        let mut flags = Settings::new();
        flags.set("gamma", 2.0);
        s.merge(&flags);
        let cfg = RunConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.training.gamma, 2.0);
        assert_eq!(cfg.training.learning_rate, 0.02);
        assert_eq!(cfg.training.update_strategy, UpdateStrategy::Fixed);
        assert!(matches!(cfg.data, DataSource::Synthetic(SbmConfig { nodes: 30, .. })));
    }

    #[test]
    fn config_file_errors_are_located() {
        let err = Settings::parse("gamma = 1\nbogus = 2\n", Path::new("c.cfg")).unwrap_err();
        assert!(err.to_string().contains("c.cfg:2: unknown key 'bogus'"));
        assert!(Settings::parse("gamma 1\n", Path::new("c.cfg")).is_err());
    }

    #[test]
    fn defaults_follow_training_defaults() {
        let cfg = RunConfig::from_settings(&synthetic()).unwrap();
        assert_eq!(cfg.training, TrainingConfig::default());
        assert_eq!(cfg.k_range, 2..=10);
        assert_eq!(cfg.tasks, vec![Task::LinkPrediction]);
        assert_eq!(cfg.gammas, DEFAULT_GAMMAS);
    }

    #[test]
    fn data_sources_are_exclusive() {
        let mut s = synthetic();
        s.set("edge_file", "e.txt");
        assert!(RunConfig::from_settings(&s).is_err());
        assert!(RunConfig::from_settings(&Settings::new()).is_err());
        let mut s = Settings::new();
        s.set("edge_file", "e.txt");
        s.set("window", 5);
        assert!(matches!(
            RunConfig::from_settings(&s).unwrap().data,
            DataSource::EdgeFile { window: 5, .. }
        ));
    }

    #[test]
    fn parallel_implies_fixed_and_rejects_fresh() {
        let mut s = synthetic();
        s.set("parallel", true);
        assert_eq!(
            RunConfig::from_settings(&s).unwrap().training.update_strategy,
            UpdateStrategy::Fixed
        );
        s.set("strategy", "fresh");
        assert!(RunConfig::from_settings(&s).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        for (k, v) in [
            ("gamma", "-1"),
            ("sigma_rw", "0"),
            ("p_in", "0.01"),
            ("k", "1..4"),
            ("k", "3..11"),
            ("tasks", "lp,xx"),
            ("anchor", "median"),
            ("self_loops", "maybe"),
            ("gammas", "0,-1"),
            ("epochs", "many"),
        ] {
            let mut s = synthetic();
            s.set(k, v);
            assert!(RunConfig::from_settings(&s).is_err(), "{k}={v}");
        }
    }

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("2..10").unwrap(), 2..=10);
        assert_eq!(parse_k_range("3..=5").unwrap(), 3..=5);
        assert_eq!(parse_k_range("4").unwrap(), 4..=4);
        assert!(parse_k_range("5..3").is_err());
    }
}
