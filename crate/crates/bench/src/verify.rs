//! Invariant checks against the dense oracles.
//!
//! Every sweep point runs the network, construction and HSS checks on the
//! closed-system model and on seeded random instances over the configured
//! tree. The HSS error-scaling check does not depend on the sweep and runs
//! once.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use ttno::build::oracle::{dense_hamiltonian, h_from_children, operator_tensor, oracle_h_tau, split_matricization};
use ttno::build::{build_hss_compressed, build_unstructured_mary, predicted_matricization_rank, PairwiseHamiltonianSpec};
use ttno::dimtree::{DimensionTree, NodeId};
use ttno::hss::{hss_block_row_ranks, hss_compress, hss_reconstruct, InteractionMatrix};
use ttno::linalg::relative_frobenius;
use ttno::models::beta_power_law;
use ttno::tensor::{DenseTensor, ModeSet};
use ttno::ttn::{TreeTensorNetwork, Ttno};
use ttno::{CMatrix, C64};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::model_spec;
use crate::fixtures::{random_beta, random_network, random_spec};
use crate::BenchError;

/// Relative tolerance of every dense equality check.
pub const DENSE_TOL: f64 = 1e-12;
/// Singular value cut used for numerical ranks of dense matricizations.
pub const RANK_TOL: f64 = 1e-10;

const SCALING_ALPHAS: [f64; 3] = [1.0, 3.0, 6.0];
const SCALING_EPS: [f64; 5] = [1e-4, 1e-6, 1e-8, 1e-10, 1e-12];
const SCALING_D: usize = 256;
const SCALING_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Skipped => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub d: usize,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub tree: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<4}  {:<32} d={}", self.status, self.check, self.d)?;
        if let Some(a) = self.alpha {
            write!(f, " alpha={a}")?;
        }
        if let Some(e) = self.epsilon {
            write!(f, " eps={e:e}")?;
        }
        write!(f, " tree={}", self.tree)?;
        if let Some(m) = self.measured {
            write!(f, " measured={}", number(m))?;
        }
        if let Some(t) = self.threshold {
            write!(f, " threshold={}", number(t))?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e6 {
        format!("{x}")
    } else {
        format!("{x:.3e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        write!(
            f,
            "{} checks: {} passed, {} failed, {} skipped",
            self.checks.len(),
            count(CheckStatus::Pass),
            count(CheckStatus::Fail),
            count(CheckStatus::Skipped)
        )
    }
}

/// Outcome of one check before labelling.
struct Outcome {
    ok: bool,
    measured: Option<f64>,
    threshold: Option<f64>,
    detail: String,
}

impl Outcome {
    fn below(measured: f64, threshold: f64) -> Self {
        Self { ok: measured <= threshold, measured: Some(measured), threshold: Some(threshold), detail: String::new() }
    }

    fn mismatches(bad: usize, total: usize, what: &str) -> Self {
        Self {
            ok: bad == 0,
            measured: Some(bad as f64),
            threshold: Some(0.0),
            detail: format!("{bad} of {total} {what} disagree"),
        }
    }
}

type CheckFn<'a> = Box<dyn FnOnce() -> Result<Outcome, ttno::Error> + 'a>;

struct Point<'a> {
    d: usize,
    alpha: Option<f64>,
    epsilon: Option<f64>,
    tree: &'a str,
}

fn record(out: &mut Vec<CheckResult>, point: &Point, name: &str, check: Option<CheckFn>) {
    let (status, measured, threshold, detail) = match check.map(|f| f()) {
        None => (CheckStatus::Skipped, None, None, "HSS requires a binary tree".to_string()),
        Some(Ok(o)) => (if o.ok { CheckStatus::Pass } else { CheckStatus::Fail }, o.measured, o.threshold, o.detail),
        Some(Err(e)) => (CheckStatus::Fail, None, None, e.to_string()),
    };
    out.push(CheckResult {
        check: name.into(),
        d: point.d,
        alpha: point.alpha,
        epsilon: point.epsilon,
        tree: point.tree.into(),
        status,
        measured,
        threshold,
        detail,
    });
}

fn vec_rel(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let base: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if base == 0.0 {
        diff
    } else {
        diff / base
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64, ttno::Error>>) -> Result<f64, ttno::Error> {
    values.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn rebuild(x: &TreeTensorNetwork) -> Result<TreeTensorNetwork, ttno::Error> {
    let tree = x.tree().clone();
    let leaves = (0..tree.leaf_count()).map(|m| x.leaf_basis(m).clone()).collect();
    let transfers: Vec<DenseTensor> = tree.internal_nodes().map(|idx| x.transfer_at(idx).clone()).collect();
    TreeTensorNetwork::new(tree, leaves, transfers)
}

fn apply_error(h: &Ttno, x: &TreeTensorNetwork, cap: usize) -> Result<f64, ttno::Error> {
    let lhs = h.apply(x)?.contract_to_dense(cap)?.vectorize();
    let xv = x.contract_to_dense(cap)?.vectorize();
    let rhs = h.to_dense_matrix(cap)? * CMatrix::from_column_slice(xv.len(), 1, &xv);
    Ok(vec_rel(&lhs, rhs.as_slice()))
}

fn rank_bound_violations(h: &Ttno, cap: usize) -> Result<(usize, usize), ttno::Error> {
    let ranks = h.network().matricization_ranks(RANK_TOL, cap)?;
    let bad = ranks.iter().enumerate().filter(|&(idx, &(_, r))| r > h.network().rank_at(idx)).count();
    Ok((bad, ranks.len()))
}

fn dense_error(h: &Ttno, spec: &PairwiseHamiltonianSpec, cap: usize) -> Result<f64, ttno::Error> {
    Ok(relative_frobenius(&h.to_dense_matrix(cap)?, &dense_hamiltonian(spec, cap)?))
}

fn below_diagonal(beta: &InteractionMatrix) -> f64 {
    let m = beta.as_matrix();
    (0..m.nrows())
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max)
}

/// Runs the suite.
pub fn verify(cfg: &ExperimentConfig) -> Result<VerifyReport, BenchError> {
    verify_with(cfg, |_| {})
}

/// Runs the suite with `tamper` applied to each exact closed-system operator
/// before it is checked; used to confirm that the checks can fail.
pub fn verify_with(cfg: &ExperimentConfig, tamper: impl Fn(&mut Ttno)) -> Result<VerifyReport, BenchError> {
    let cfg = ExperimentConfig { experiment: ExperimentKind::Verify, ..cfg.clone() };
    cfg.validate()?;
    let mut checks = Vec::new();
    for &d in &cfg.d {
        let tree = cfg.tree.build(d)?;
        for &alpha in &cfg.alpha {
            for &eps in &cfg.epsilon {
                point_checks(&cfg, &tree, d, alpha, eps, &tamper, &mut checks)?;
            }
        }
    }
    scaling_check(&mut checks);
    Ok(VerifyReport { checks })
}

fn point_checks(
    cfg: &ExperimentConfig,
    tree: &DimensionTree,
    d: usize,
    alpha: f64,
    eps: f64,
    tamper: &impl Fn(&mut Ttno),
    out: &mut Vec<CheckResult>,
) -> Result<(), BenchError> {
    let cap = cfg.dense_cap;
    let label = cfg.tree.to_string();
    let point = Point { d, alpha: Some(alpha), epsilon: Some(eps), tree: &label };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((d as u64) << 32));
    let binary = tree.is_binary();

    let model = model_spec(ExperimentKind::Verify, cfg, d, alpha)?;
    let mut h_model = build_unstructured_mary(&model, tree)?;
    tamper(&mut h_model);
    // two families with single-site terms
    let full = random_spec(&mut rng, &vec![2; d], 2, true);
    let h_full = build_unstructured_mary(&full, tree)?;
    // one family without single-site terms
    let plain = random_spec(&mut rng, &vec![2; d], 1, false);
    let h_plain = build_unstructured_mary(&plain, tree)?;
    let x = random_network(&mut rng, tree, &vec![2; d], 2);
    let beta_random = random_beta(&mut rng, d);

    record(out, &point, "ttn.shape-consistency", Some(Box::new(|| {
        for h in [&h_model, &h_full, &h_plain] {
            if &rebuild(h.network())? != h.network() {
                return Ok(Outcome { ok: false, measured: None, threshold: None, detail: "rebuilt network differs".into() });
            }
        }
        Ok(Outcome { ok: true, measured: None, threshold: None, detail: String::new() })
    })));
    record(out, &point, "ttn.apply-matches-dense", Some(Box::new(|| {
        Ok(Outcome::below(max_of([apply_error(&h_full, &x, cap), apply_error(&h_model, &x, cap)])?, DENSE_TOL))
    })));
    record(out, &point, "ttn.matricization-rank-bound", Some(Box::new(|| {
        let (a, n) = rank_bound_violations(&h_model, cap)?;
        let (b, m) = rank_bound_violations(&h_full, cap)?;
        Ok(Outcome::mismatches(a + b, n + m, "nodes"))
    })));
    record(out, &point, "ttn.direct-sum-dense", Some(Box::new(|| {
        let sum = h_model.direct_sum(&h_full)?.to_dense_matrix(cap)?;
        let expected = h_model.to_dense_matrix(cap)? + h_full.to_dense_matrix(cap)?;
        Ok(Outcome::below(relative_frobenius(&sum, &expected), DENSE_TOL))
    })));

    record(out, &point, "build.exactness.model", Some(Box::new(|| Ok(Outcome::below(dense_error(&h_model, &model, cap)?, DENSE_TOL)))));
    record(out, &point, "build.exactness.random", Some(Box::new(|| Ok(Outcome::below(dense_error(&h_full, &full, cap)?, DENSE_TOL)))));
    record(out, &point, "build.rank-law", Some(Box::new(|| {
        let ranks = h_plain.network().matricization_ranks(RANK_TOL, cap)?;
        let beta = &plain.families()[0].beta;
        let mut bad = 0;
        for &(id, r) in &ranks {
            if r != predicted_matricization_rank(beta, id, RANK_TOL)? {
                bad += 1;
            }
        }
        Ok(Outcome::mismatches(bad, ranks.len(), "node ranks"))
    })));
    record(out, &point, "build.child-recursion", Some(Box::new(|| {
        let errs = tree.internal_nodes().map(|idx| {
            let node = tree.node(idx);
            let kids: Vec<NodeId> = node.children().iter().map(|&c| tree.node(c).id()).collect();
            Ok(vec_rel(&h_from_children(&full, &kids, cap)?, &oracle_h_tau(&full, node.id(), cap)?))
        });
        Ok(Outcome::below(max_of(errs)?, DENSE_TOL))
    })));
    record(out, &point, "build.complement-split", Some(Box::new(|| {
        let tensor = operator_tensor(&dense_hamiltonian(&full, cap)?, full.site_dims())?;
        let errs = (0..tree.len()).filter(|&idx| !tree.is_root(idx)).map(|idx| {
            let id = tree.node(idx).id();
            let lhs = tensor.matricize(&ModeSet::new(id.modes(), d)?)?;
            Ok(relative_frobenius(&split_matricization(&full, id, cap)?, &lhs))
        });
        Ok(Outcome::below(max_of(errs)?, DENSE_TOL))
    })));
    record(out, &point, "build.compressed-consistency", binary.then(|| -> CheckFn {
        Box::new(|| {
            let errs = [(&model, &h_model), (&full, &h_full)].map(|(spec, h)| {
                let (compressed, _) = build_hss_compressed(spec, tree, 0.0)?;
                Ok(relative_frobenius(&compressed.to_dense_matrix(cap)?, &h.to_dense_matrix(cap)?))
            });
            Ok(Outcome::below(max_of(errs)?, DENSE_TOL))
        })
    }));
    record(out, &point, "build.compressed-rank-bound", binary.then(|| -> CheckFn {
        Box::new(|| {
            let mut excess = 0usize;
            for spec in [&model, &full] {
                let (h, hss) = build_hss_compressed(spec, tree, eps)?;
                let bound = 2 + hss.iter().map(|m| m.hss_rank()).sum::<usize>() + usize::from(spec.single_site().is_some());
                excess += h.rank_report().representation_rank.saturating_sub(bound);
            }
            Ok(Outcome { ok: excess == 0, measured: Some(excess as f64), threshold: Some(0.0), detail: "rank above 2 + hss rank (+1)".into() })
        })
    }));

    let model_beta = &model.families()[0].beta;
    record(out, &point, "hss.strictly-upper", binary.then(|| -> CheckFn {
        Box::new(|| {
            let errs = [model_beta, &beta_random].map(|b| Ok(below_diagonal(&hss_reconstruct(&hss_compress(b, tree, eps)?))));
            Ok(Outcome::below(max_of(errs)?, 0.0))
        })
    }));
    record(out, &point, "hss.rank-matches-block-rows", binary.then(|| -> CheckFn {
        Box::new(|| {
            let mut bad = 0;
            for b in [model_beta, &beta_random] {
                let exact = hss_block_row_ranks(b, tree, eps)?.into_iter().map(|(_, k)| k).max().unwrap_or(0);
                bad += usize::from(hss_compress(b, tree, eps)?.hss_rank() != exact);
            }
            Ok(Outcome::mismatches(bad, 2, "matrices"))
        })
    }));
    record(out, &point, "hss.monotone-in-tolerance", binary.then(|| -> CheckFn {
        Box::new(|| {
            let beta = beta_power_law(d, alpha, C64::new(1.0, 0.0));
            let ranks = (1..=7)
                .map(|p| Ok(hss_compress(&beta, tree, 10f64.powi(-2 * p))?.hss_rank()))
                .collect::<Result<Vec<_>, ttno::Error>>()?;
            let drops = ranks.windows(2).filter(|w| w[1] < w[0]).count();
            Ok(Outcome { detail: format!("ranks {ranks:?} for eps 1e-2 … 1e-14"), ..Outcome::mismatches(drops, ranks.len() - 1, "steps") })
        })
    }));
    Ok(())
}

fn scaling_check(out: &mut Vec<CheckResult>) {
    let point = Point { d: SCALING_D, alpha: None, epsilon: None, tree: "balanced" };
    record(out, &point, "hss.error-scaling", Some(Box::new(|| {
        let tree = DimensionTree::balanced_binary(SCALING_D)?;
        let mut worst = 0.0f64;
        for alpha in SCALING_ALPHAS {
            let beta = beta_power_law(SCALING_D, alpha, C64::new(1.0, 0.0));
            for eps in SCALING_EPS {
                let approx = hss_reconstruct(&hss_compress(&beta, &tree, eps)?);
                let rel = (beta.as_matrix() - approx.as_matrix()).norm() / beta.frobenius_norm();
                worst = worst.max(rel / eps);
            }
        }
        Ok(Outcome {
            detail: "max relative error / eps over alpha in {1,3,6}, eps in 1e-4 … 1e-12".into(),
            ..Outcome::below(worst, SCALING_FACTOR)
        })
    })));
}
