//! Parameter sweeps over the spin models.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use ttno::build::{build_hss_compressed, build_unstructured, relative_operator_error, PairwiseHamiltonianSpec};
use ttno::hss::HssMatrix;
use ttno::models::{closed_system_spec, open_system_spec, synthetic_spec, SpinModelParams};
use ttno::ttn::Ttno;

use crate::config::{dense_entries, ExperimentConfig, ExperimentKind, OracleMode, TreeKind};
use crate::BenchError;

/// One sweep point. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub d: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub tree: String,
    pub representation_rank: Option<usize>,
    /// `hss_rank + 3` for the single-family models with single-site terms.
    pub expected_rank: Option<usize>,
    /// Largest HSS rank over the interaction families.
    pub hss_rank: Option<usize>,
    pub parameter_count: Option<usize>,
    pub memory_bytes: Option<usize>,
    /// Against the unstructured construction, when the dense oracle ran.
    pub rel_error_frobenius: Option<f64>,
    /// Compression plus assembly; only with `timing` enabled.
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
}

/// Per-node ranks of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTableRow {
    pub experiment: String,
    pub d: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub tree: String,
    /// 1-based leaf range, e.g. `1-4`.
    pub node: String,
    pub leaves: usize,
    /// `k_τ` summed over the interaction families.
    pub k: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub nodes: Vec<RankTableRow>,
}

#[derive(Debug, Clone)]
struct Point {
    d: usize,
    alpha: f64,
    eps: f64,
    tree: TreeKind,
}

fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    let trees = match cfg.experiment {
        ExperimentKind::CompareTrees => vec![TreeKind::Balanced, TreeKind::Degenerate],
        _ => vec![cfg.tree.clone()],
    };
    let mut out = Vec::new();
    for &d in &cfg.d {
        for &alpha in &cfg.alpha {
            for &eps in &cfg.epsilon {
                for tree in &trees {
                    out.push(Point { d, alpha, eps, tree: tree.clone() });
                }
            }
        }
    }
    out
}

/// The Hamiltonian of experiment `kind`; `compare-trees` and `verify` use the closed system.
pub fn model_spec(kind: ExperimentKind, cfg: &ExperimentConfig, d: usize, alpha: f64) -> ttno::Result<PairwiseHamiltonianSpec> {
    let p = SpinModelParams { d, alpha, omega: cfg.omega, delta: cfg.delta, nu: cfg.nu, gamma: cfg.gamma, eps: 0.0 };
    match kind {
        ExperimentKind::Open => open_system_spec(&p),
        ExperimentKind::Synthetic => synthetic_spec(&p),
        ExperimentKind::Closed | ExperimentKind::CompareTrees | ExperimentKind::Verify => closed_system_spec(&p),
    }
}

fn expected_rank(kind: ExperimentKind, spec: &PairwiseHamiltonianSpec, hss_rank: usize) -> Option<usize> {
    let single_family = spec.families().len() == 1 && spec.single_site().is_some();
    (kind != ExperimentKind::Open && single_family && spec.d() >= 3 && !spec.families()[0].beta.is_zero()).then_some(hss_rank + 3)
}

fn file_stem(kind: ExperimentKind, p: &Point) -> String {
    let tree = match p.tree {
        TreeKind::Custom(_) => "custom".to_string(),
        ref t => t.to_string(),
    };
    format!("{kind}_d{}_a{}_e{:e}_{tree}", p.d, p.alpha, p.eps)
}

fn write_side_outputs(cfg: &ExperimentConfig, p: &Point, h: &Ttno, hss: &[HssMatrix]) -> Result<(), BenchError> {
    let stem = file_stem(cfg.experiment, p);
    if let Some(dir) = &cfg.diagnostics_dir {
        std::fs::create_dir_all(dir)?;
        for (f, m) in hss.iter().enumerate() {
            let mut out = BufWriter::new(File::create(dir.join(format!("{stem}_f{}.csv", f + 1)))?);
            m.write_diagnostics_csv(&mut out)?;
            out.flush()?;
        }
    }
    if let Some(dir) = &cfg.save_dir {
        std::fs::create_dir_all(dir)?;
        ttno::io::save_ttno(h, dir.join(format!("{stem}.json")))?;
    }
    Ok(())
}

fn run_point(cfg: &ExperimentConfig, p: &Point) -> (ResultRow, Vec<RankTableRow>) {
    let mut row = ResultRow {
        experiment: cfg.experiment.to_string(),
        d: p.d,
        alpha: p.alpha,
        epsilon: p.eps,
        tree: p.tree.to_string(),
        representation_rank: None,
        expected_rank: None,
        hss_rank: None,
        parameter_count: None,
        memory_bytes: None,
        rel_error_frobenius: None,
        wall_time_ms: None,
        error: None,
    };
    let nodes = match fill_row(cfg, p, &mut row) {
        Ok(nodes) => nodes,
        Err(e) => {
            row.error = Some(e.to_string());
            Vec::new()
        }
    };
    (row, nodes)
}

fn fill_row(cfg: &ExperimentConfig, p: &Point, row: &mut ResultRow) -> Result<Vec<RankTableRow>, BenchError> {
    let tree = p.tree.build(p.d)?;
    let spec = model_spec(cfg.experiment, cfg, p.d, p.alpha)?;
    let start = Instant::now();
    let (h, hss) = build_hss_compressed(&spec, &tree, p.eps)?;
    let elapsed = start.elapsed();

    let report = h.rank_report();
    let hss_rank = hss.iter().map(HssMatrix::hss_rank).max().unwrap_or(0);
    row.representation_rank = Some(report.representation_rank);
    row.expected_rank = expected_rank(cfg.experiment, &spec, hss_rank);
    row.hss_rank = Some(hss_rank);
    row.parameter_count = Some(report.parameter_count);
    row.memory_bytes = Some(report.memory_bytes);
    if cfg.timing {
        row.wall_time_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    let nodes = (0..tree.len())
        .map(|idx| {
            let id = tree.node(idx).id();
            RankTableRow {
                experiment: row.experiment.clone(),
                d: p.d,
                alpha: p.alpha,
                epsilon: p.eps,
                tree: row.tree.clone(),
                node: id.to_string(),
                leaves: id.len(),
                k: hss.iter().map(|m| m.rank_at(idx)).sum(),
                r: h.network().rank_at(idx),
            }
        })
        .collect();

    let mut problems = Vec::new();
    if let Err(e) = write_side_outputs(cfg, p, &h, &hss) {
        problems.push(e.to_string());
    }
    let entries = dense_entries(spec.site_dims()[0], p.d);
    let fits = entries.is_some_and(|n| n <= cfg.dense_cap);
    match (cfg.oracle, fits) {
        (OracleMode::Never, _) | (OracleMode::Auto, false) => {}
        (_, true) => {
            match build_unstructured(&spec, &tree).and_then(|reference| relative_operator_error(&h, &reference, cfg.dense_cap)) {
                Ok(err) => row.rel_error_frobenius = Some(err),
                Err(e) => problems.push(e.to_string()),
            }
        }
        (OracleMode::Always, false) => problems.push(
            ttno::Error::DenseTooLarge { entries: entries.unwrap_or(usize::MAX), cap: cfg.dense_cap }.to_string(),
        ),
    }
    if !problems.is_empty() {
        row.error = Some(problems.join("; "));
    }
    Ok(nodes)
}

/// Runs every sweep point of `cfg`. Points are evaluated in parallel and
/// returned in sweep order (d, then α, then ε, then tree); failures are
/// reported in the row's `error` field.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    if cfg.experiment == ExperimentKind::Verify {
        return Err(BenchError::Usage("verify produces a check report, not sweep rows".into()));
    }
    let results: Vec<_> = points(cfg).par_iter().map(|p| run_point(cfg, p)).collect();
    let (rows, nodes): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(RunOutput { rows, nodes: nodes.concat() })
}

/// Per-node `k_τ` and `r_τ` over the sweep of `cfg`.
pub fn rank_table(cfg: &ExperimentConfig) -> Result<Vec<RankTableRow>, BenchError> {
    Ok(run_experiment(cfg)?.nodes)
}

/// Points where the representation rank grows with α at fixed d, ε and tree.
pub fn alpha_trend_notes(rows: &[ResultRow]) -> Vec<String> {
    let mut notes = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        let next = rows[i + 1..]
            .iter()
            .filter(|b| b.d == a.d && b.epsilon == a.epsilon && b.tree == a.tree && b.alpha > a.alpha)
            .min_by(|x, y| x.alpha.total_cmp(&y.alpha));
        if let (Some(b), Some(ra)) = (next, a.representation_rank) {
            if let Some(rb) = b.representation_rank.filter(|&rb| rb > ra) {
                notes.push(format!(
                    "d={} epsilon={:e} tree={}: rank {ra} at alpha={} rises to {rb} at alpha={}",
                    a.d, a.epsilon, a.tree, a.alpha, b.alpha
                ));
            }
        }
    }
    notes
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(rows: &[T], path: &Path) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(rows, BufWriter::new(File::create(path)?))
}

/// Run description written next to the CSV.
pub fn metadata(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&cfg.to_json()).expect("valid JSON"),
        "dense_cap": cfg.dense_cap,
        "rel_error_frobenius": match cfg.oracle {
            OracleMode::Never => "not computed".to_string(),
            _ => format!(
                "relative Frobenius distance to the unstructured construction; computed only where the dense operator has at most {} entries",
                cfg.dense_cap
            ),
        },
        "memory_bytes": "16 bytes per stored complex scalar, tree structure excluded",
    })
}
