//! Plain-text dataset, embedding and report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dynvgae_core::eval::MetricReport;
use dynvgae_core::graph::Event;
use dynvgae_core::trainer::EpochRecord;
use dynvgae_core::{DenseMatrix, NodeLabels, NodeRegistry, TemporalGraphDataset};

use crate::error::{AppError, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| AppError::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: FromStr>(path: &Path, line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| AppError::parse(path, line, format!("invalid {what} '{token}'")))
}

/// Reads `src dst timestamp` lines, registering nodes on first sight.
pub fn read_events(path: &Path) -> Result<(NodeRegistry, Vec<Event>)> {
    let text = read(path)?;
    let mut registry = NodeRegistry::new();
    let mut events = Vec::new();
    for (line, content) in content_lines(&text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [src, dst, time] = tokens[..] else {
            return Err(AppError::parse(
                path,
                line,
                format!("expected 'src dst timestamp', got {} fields", tokens.len()),
            ));
        };
        let time = field(path, line, time, "timestamp")?;
        events.push(Event {
            src: registry.intern(src),
            dst: registry.intern(dst),
            time,
        });
    }
    if events.is_empty() {
        return Err(AppError::invalid(format!("{}: no edges", path.display())));
    }
    Ok((registry, events))
}

/// Reads `node label [t]` lines. A third column restricts the label to
/// snapshot `t`. Nodes absent from the graph are skipped with a warning.
pub fn read_labels(path: &Path, registry: &NodeRegistry) -> Result<NodeLabels> {
    let text = read(path)?;
    let mut labels = NodeLabels::new();
    let mut unknown = 0usize;
    for (line, content) in content_lines(&text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let (node, class, t) = match tokens[..] {
            [node, class] => (node, class, None),
            [node, class, t] => (node, class, Some(field(path, line, t, "snapshot index")?)),
            _ => return Err(AppError::parse(path, line, "expected 'node label [t]'")),
        };
        match registry.id(node) {
            Some(id) => labels.assign(id, class, t),
            None => unknown += 1,
        }
    }
    if unknown > 0 {
        log::warn!(
            "{}: {unknown} labels for nodes not in the graph ignored",
            path.display()
        );
    }
    Ok(labels)
}

/// Loads an edge file into windows of `window` time units, optionally with
/// labels.
pub fn load_snapshots(
    edge_file: &Path,
    window: u64,
    cumulative: bool,
    labels_file: Option<&Path>,
) -> Result<TemporalGraphDataset> {
    let (registry, events) = read_events(edge_file)?;
    let labels = labels_file.map(|p| read_labels(p, &registry)).transpose()?;
    Ok(TemporalGraphDataset::from_events(
        registry, &events, window, cumulative, labels,
    )?)
}

/// Reads an `N d` header followed by `id f1 … fd` lines and attaches the
/// rows to every snapshot. Every node of the dataset needs a row.
pub fn apply_features(path: &Path, ds: &mut TemporalGraphDataset) -> Result<()> {
    let text = read(path)?;
    let mut lines = content_lines(&text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| AppError::invalid(format!("{}: empty feature file", path.display())))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [n, d] = dims[..] else {
        return Err(AppError::parse(path, hline, "expected header 'N d'"));
    };
    let n: usize = field(path, hline, n, "row count")?;
    let d: usize = field(path, hline, d, "dimension")?;
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut count = 0usize;
    for (line, content) in lines {
        count += 1;
        let mut tokens = content.split_whitespace();
        let id = tokens.next().unwrap_or_default();
        let values = tokens
            .map(|tok| field::<f64>(path, line, tok, "feature value"))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != d {
            return Err(AppError::parse(
                path,
                line,
                format!("expected {d} values, got {}", values.len()),
            ));
        }
        if let Some(global) = ds.registry().id(id) {
            rows.insert(global, values);
        }
    }
    if count != n {
        return Err(AppError::invalid(format!(
            "{}: header promises {n} rows, found {count}",
            path.display()
        )));
    }
    for t in 0..ds.len() {
        let s = ds.snapshot(t);
        let mut x = DenseMatrix::zeros(s.num_nodes(), d);
        for (local, &global) in s.nodes().iter().enumerate() {
            let row = rows.get(&global).ok_or_else(|| {
                AppError::invalid(format!(
                    "{}: no features for node '{}'",
                    path.display(),
                    ds.registry().name(global).unwrap_or("?")
                ))
            })?;
            x.row_mut(local).copy_from_slice(row);
        }
        ds.set_features(t, x)?;
    }
    Ok(())
}

fn node_name(ds: &TemporalGraphDataset, global: usize) -> &str {
    ds.registry().name(global).expect("snapshot nodes are registered")
}

/// One `src dst t` line per edge, snapshots in order.
pub fn write_edge_file(path: &Path, ds: &TemporalGraphDataset) -> Result<()> {
    let mut out = String::new();
    for (t, s) in ds.snapshots().iter().enumerate() {
        for (u, v) in s.edges() {
            let _ = writeln!(
                out,
                "{} {} {t}",
                node_name(ds, s.global_id(u)),
                node_name(ds, s.global_id(v))
            );
        }
    }
    write(path, &out)
}

/// Base labels as `node label`, then per-snapshot overrides as `node label t`.
pub fn write_labels(path: &Path, ds: &TemporalGraphDataset) -> Result<()> {
    let labels = ds
        .labels()
        .ok_or_else(|| AppError::invalid("dataset has no labels to write"))?;
    let class = |c: usize| labels.class_name(c).expect("registered class");
    let mut out = String::new();
    for (node, c) in labels.base_labels() {
        let _ = writeln!(out, "{} {}", node_name(ds, node), class(c));
    }
    for (t, node, c) in labels.overrides() {
        let _ = writeln!(out, "{} {} {t}", node_name(ds, node), class(c));
    }
    write(path, &out)
}

pub fn embedding_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("embedding_t{t}.txt"))
}

/// Header `N d t`, a `# ` config echo line, then `node v1 … vd` rows in
/// snapshot order.
pub fn write_embedding(path: &Path, ds: &TemporalGraphDataset, t: usize, mu: &DenseMatrix, echo: &str) -> Result<()> {
    let s = ds.snapshot(t);
    let mut out = format!("{} {} {t}\n# {echo}\n", mu.rows(), mu.cols());
    for local in 0..mu.rows() {
        out.push_str(node_name(ds, s.global_id(local)));
        for v in mu.row(local) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    write(path, &out)
}

/// Reads the embedding of snapshot `t`, rows reordered to the snapshot's
/// local order. Returns the matrix and the echo line.
pub fn read_embedding(path: &Path, ds: &TemporalGraphDataset, t: usize) -> Result<(DenseMatrix, String)> {
    if !path.exists() {
        return Err(AppError::MissingEmbedding {
            t,
            path: path.to_path_buf(),
        });
    }
    let text = read(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| AppError::parse(path, 1, "empty embedding file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [n, d, file_t] = dims[..] else {
        return Err(AppError::parse(path, hline, "expected header 'N d t'"));
    };
    let n: usize = field(path, hline, n, "row count")?;
    let d: usize = field(path, hline, d, "dimension")?;
    let file_t: usize = field(path, hline, file_t, "snapshot index")?;
    let s = ds.snapshot(t);
    if file_t != t || n != s.num_nodes() {
        return Err(AppError::parse(
            path,
            hline,
            format!(
                "header ({n} nodes, t={file_t}) does not match snapshot {t} with {} nodes",
                s.num_nodes()
            ),
        ));
    }
    let mut echo = String::new();
    let mut mu = DenseMatrix::zeros(n, d);
    let mut seen = vec![false; n];
    for (line, content) in lines {
        if let Some(rest) = content.strip_prefix('#') {
            echo = rest.trim().to_string();
            continue;
        }
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let name = tokens.next().unwrap_or_default();
        let local = ds
            .registry()
            .id(name)
            .and_then(|g| s.local_id(g))
            .ok_or_else(|| AppError::parse(path, line, format!("node '{name}' is not in snapshot {t}")))?;
        if std::mem::replace(&mut seen[local], true) {
            return Err(AppError::parse(path, line, format!("duplicate row for node '{name}'")));
        }
        let values = tokens
            .map(|tok| field::<f64>(path, line, tok, "embedding value"))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != d {
            return Err(AppError::parse(
                path,
                line,
                format!("expected {d} values, got {}", values.len()),
            ));
        }
        mu.row_mut(local).copy_from_slice(&values);
    }
    if let Some(missing) = seen.iter().position(|&v| !v) {
        return Err(AppError::invalid(format!(
            "{}: no row for node '{}'",
            path.display(),
            node_name(ds, s.global_id(missing))
        )));
    }
    Ok((mu, echo))
}

pub fn write_loss_log(path: &Path, log: &[EpochRecord], echo: &str) -> Result<()> {
    let mut out = format!("# {echo}\nepoch\tt\trecon\tkl_prior\tkl_smooth\ttotal\n");
    for r in log {
        let l = &r.loss;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.epoch, r.t, l.recon, l.kl_prior, l.kl_smooth, l.total
        );
    }
    write(path, &out)
}

/// Joint objective per epoch.
pub fn write_objective(path: &Path, totals: &[f64], echo: &str) -> Result<()> {
    let mut out = format!("# {echo}\nepoch\tobjective\n");
    for (e, v) in totals.iter().enumerate() {
        let _ = writeln!(out, "{}\t{v}", e + 1);
    }
    write(path, &out)
}

/// `total` wall-clock seconds, then one line per snapshot.
pub fn write_timing(path: &Path, total: f64, per_snapshot: &[f64], echo: &str) -> Result<()> {
    let mut out = format!("# {echo}\nsnapshot\tseconds\ntotal\t{total:.6}\n");
    for (t, s) in per_snapshot.iter().enumerate() {
        let _ = writeln!(out, "{t}\t{s:.6}");
    }
    write(path, &out)
}

/// `task t metric value` rows, then one `task mean metric value` row per metric.
pub fn format_report(report: &MetricReport) -> String {
    let mut out = format!("# {}\ntask\tt\tmetric\tvalue\n", report.echo);
    for s in &report.series {
        for (t, v) in &s.values {
            let _ = writeln!(out, "{}\t{t}\t{}\t{v}", report.task, s.metric);
        }
    }
    for s in &report.series {
        if let Some(m) = s.mean() {
            let _ = writeln!(out, "{}\tmean\t{}\t{m}", report.task, s.metric);
        }
    }
    out
}

pub fn write_report(path: &Path, report: &MetricReport) -> Result<()> {
    write(path, &format_report(report))
}
