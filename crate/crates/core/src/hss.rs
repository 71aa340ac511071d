//! HSS compression of strictly upper-triangular interaction matrices.
//!
//! Row and column bases are shared: they are computed from the block rows of
//! `β_s = β + βᵀ`, so one nested family `V_τ` serves both sides. Off-diagonal
//! blocks are stored as `β(τ₁, τ₂) ≈ V_{τ₁} S_{τ₁,τ₂} V_{τ₂}ᵀ`.

use std::io::Write;
use std::ops::RangeInclusive;

use crate::dimtree::{DimensionTree, NodeId};
use crate::linalg::{block_diag, numerical_rank, spectral_norm, truncated_svd, Truncation};
use crate::{CMatrix, Error, Result, C64};

/// A `d × d` matrix with nonzero entries only strictly above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    dense: CMatrix,
}

impl InteractionMatrix {
    pub fn zeros(d: usize) -> Self {
        Self { dense: CMatrix::zeros(d, d) }
    }

    /// `β(i, j) = f(i, j)` for `i < j` (0-based).
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            dense: CMatrix::from_fn(d, d, |i, j| if i < j { f(i, j) } else { C64::new(0.0, 0.0) }),
        }
    }

    /// Rejects matrices with nonzero entries on or below the diagonal.
    pub fn from_dense(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("interaction matrix is {}×{}", m.nrows(), m.ncols())));
        }
        for j in 0..m.ncols() {
            for i in j..m.nrows() {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "interaction matrix entry ({}, {}) is not strictly upper triangular",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dense: m })
    }

    pub fn d(&self) -> usize {
        self.dense.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.dense[(i, j)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.dense
    }

    /// `β_s = β + βᵀ` (plain transpose).
    pub fn symmetrized(&self) -> CMatrix {
        &self.dense + self.dense.transpose()
    }

    /// The submatrix `β(rows, cols)`.
    pub fn block(&self, rows: RangeInclusive<usize>, cols: RangeInclusive<usize>) -> CMatrix {
        let (r0, c0) = (*rows.start(), *cols.start());
        self.dense
            .view((r0, c0), (rows.end() + 1 - r0, cols.end() + 1 - c0))
            .into_owned()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dense.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.dense.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { dense: &self.dense * factor }
    }
}

/// `β_s(τ, τ̄ ∖ τ)`: rows in `L(τ)`, columns in the complement.
pub fn block_row(beta_s: &CMatrix, id: NodeId) -> CMatrix {
    let d = beta_s.nrows();
    let cols: Vec<usize> = (0..d).filter(|&j| !id.contains(j)).collect();
    CMatrix::from_fn(id.len(), cols.len(), |i, j| beta_s[(id.first + i, cols[j])])
}

/// How `hss_compress` picks `k_τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HssThreshold {
    /// Keep `σ_i > ε · σ₁` of each (projected) block row.
    BlockRow(f64),
    /// Keep `σ_i > ε · ‖β_s‖₂` everywhere.
    Global(f64),
}

/// Per-node singular value diagnostics from compression.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDiagnostics {
    pub node: NodeId,
    pub k: usize,
    /// Largest singular value of the block row seen by the builder.
    pub sigma_first: f64,
    /// `σ_{k+1}` of that block row, zero when nothing was cut.
    pub sigma_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HssMatrix {
    tree: DimensionTree,
    ranks: Vec<usize>,
    leaf_bases: Vec<CMatrix>,
    translations: Vec<Option<CMatrix>>,
    couplings: Vec<Option<CMatrix>>,
    diagnostics: Vec<NodeDiagnostics>,
}

impl HssMatrix {
    pub fn tree(&self) -> &DimensionTree {
        &self.tree
    }

    pub fn d(&self) -> usize {
        self.tree.leaf_count()
    }

    /// `k_τ` at arena index `idx`; zero at the root, which has no basis.
    pub fn rank_at(&self, idx: usize) -> usize {
        self.ranks[idx]
    }

    pub fn rank(&self, id: NodeId) -> Result<usize> {
        Ok(self.ranks[self.tree.find(id).ok_or(Error::UnknownNode(id))?])
    }

    /// `max_τ k_τ`.
    pub fn hss_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// `V_ℓ`, a `1 × k_ℓ` row equal to `[1]` or empty.
    pub fn leaf_basis(&self, mode: usize) -> &CMatrix {
        &self.leaf_bases[mode]
    }

    /// `R_τ` of size `(k_{τ₁} + k_{τ₂}) × k_τ` at internal non-root nodes.
    pub fn translation(&self, idx: usize) -> Option<&CMatrix> {
        self.translations[idx].as_ref()
    }

    /// `S_{τ₁,τ₂}` for the two children of internal node `idx`.
    pub fn coupling(&self, idx: usize) -> Option<&CMatrix> {
        self.couplings[idx].as_ref()
    }

    pub fn diagnostics(&self) -> &[NodeDiagnostics] {
        &self.diagnostics
    }

    /// Explicit `V_τ` (`d_τ × k_τ`), expanded through the translations.
    pub fn basis(&self, idx: usize) -> CMatrix {
        let node = self.tree.node(idx);
        if node.is_leaf() {
            return self.leaf_bases[node.id().first].clone();
        }
        let ch = node.children();
        let stacked = block_diag(&self.basis(ch[0]), &self.basis(ch[1]));
        match &self.translations[idx] {
            Some(r) => stacked * r,
            None => CMatrix::zeros(node.id().len(), 0),
        }
    }

    /// `h(τ̄) · √k · ‖β‖_F`, the ε-free factor of the Frobenius error bound.
    pub fn error_bound_scale(&self, beta: &InteractionMatrix) -> f64 {
        self.tree.height() as f64 * (self.hss_rank() as f64).sqrt() * beta.frobenius_norm()
    }

    /// CSV with one row per node: leaf range, `k_τ`, `σ₁`, `σ_{k+1}`.
    pub fn write_diagnostics_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "node,k,sigma_first,sigma_next")?;
        for d in &self.diagnostics {
            writeln!(out, "{},{},{:e},{:e}", d.node, d.k, d.sigma_first, d.sigma_next)?;
        }
        Ok(())
    }
}

pub fn hss_compress(beta: &InteractionMatrix, tree: &DimensionTree, eps: f64) -> Result<HssMatrix> {
    hss_compress_with(beta, tree, HssThreshold::BlockRow(eps))
}

pub fn hss_compress_with(beta: &InteractionMatrix, tree: &DimensionTree, threshold: HssThreshold) -> Result<HssMatrix> {
    if !tree.is_binary() {
        return Err(Error::NonBinaryTree);
    }
    let d = tree.leaf_count();
    if beta.d() != d {
        return Err(Error::Shape(format!("interaction matrix is {0}×{0}, tree has {d} leaves", beta.d())));
    }
    let eps = match threshold {
        HssThreshold::BlockRow(e) | HssThreshold::Global(e) => e,
    };
    if !(eps >= 0.0) {
        return Err(Error::InvalidSpec(format!("HSS tolerance must be nonnegative, got {eps}")));
    }
    let beta_s = beta.symmetrized();
    let mode = match threshold {
        HssThreshold::BlockRow(e) => Truncation::Relative(e),
        HssThreshold::Global(e) => Truncation::Absolute(e * spectral_norm(&beta_s)?),
    };

    let n = tree.len();
    let mut ranks = vec![0; n];
    let mut bases: Vec<CMatrix> = vec![CMatrix::zeros(0, 0); n];
    let mut leaf_bases = vec![CMatrix::zeros(1, 0); d];
    let mut translations = vec![None; n];
    let mut couplings = vec![None; n];
    let mut diagnostics = Vec::with_capacity(n);

    for idx in tree.post_order() {
        let node = tree.node(idx);
        let id = node.id();
        if !node.is_leaf() {
            let ch = node.children();
            let (v1, v2) = (&bases[ch[0]], &bases[ch[1]]);
            let (l1, l2) = (tree.node(ch[0]).id(), tree.node(ch[1]).id());
            let b12 = beta.block(l1.modes(), l2.modes());
            couplings[idx] = Some(v1.adjoint() * b12 * v2.map(|z| z.conj()));
        }
        if tree.is_root(idx) {
            continue;
        }
        let row = block_row(&beta_s, id);
        if node.is_leaf() {
            let svd = truncated_svd(&row, mode)?;
            let k = svd.rank;
            let basis = if k == 1 {
                CMatrix::from_element(1, 1, C64::new(1.0, 0.0))
            } else {
                CMatrix::zeros(1, 0)
            };
            diagnostics.push(NodeDiagnostics {
                node: id,
                k,
                sigma_first: svd.spectrum.first().copied().unwrap_or(0.0),
                sigma_next: svd.first_discarded(),
            });
            ranks[idx] = k;
            leaf_bases[id.first] = basis.clone();
            bases[idx] = basis;
        } else {
            let ch = node.children();
            let stacked = block_diag(&bases[ch[0]], &bases[ch[1]]);
            let projected = stacked.adjoint() * row;
            let svd = truncated_svd(&projected, mode)?;
            diagnostics.push(NodeDiagnostics {
                node: id,
                k: svd.rank,
                sigma_first: svd.spectrum.first().copied().unwrap_or(0.0),
                sigma_next: svd.first_discarded(),
            });
            ranks[idx] = svd.rank;
            bases[idx] = &stacked * &svd.u;
            translations[idx] = Some(svd.u);
        }
    }
    diagnostics.sort_by_key(|dg| tree.find(dg.node));

    Ok(HssMatrix {
        tree: tree.clone(),
        ranks,
        leaf_bases,
        translations,
        couplings,
        diagnostics,
    })
}

/// The strictly upper-triangular `β_k` assembled from `V_{τ₁} S V_{τ₂}ᵀ` blocks.
pub fn hss_reconstruct(h: &HssMatrix) -> InteractionMatrix {
    let tree = &h.tree;
    let mut dense = CMatrix::zeros(h.d(), h.d());
    let bases: Vec<CMatrix> = (0..tree.len()).map(|idx| h.basis(idx)).collect();
    for idx in tree.internal_nodes() {
        let ch = tree.node(idx).children();
        let (l1, l2) = (tree.node(ch[0]).id(), tree.node(ch[1]).id());
        let s = h.couplings[idx].as_ref().expect("internal nodes carry couplings");
        let block = &bases[ch[0]] * s * bases[ch[1]].transpose();
        dense.view_mut((l1.first, l2.first), (l1.len(), l2.len())).copy_from(&block);
    }
    InteractionMatrix { dense }
}

/// Numerical rank at relative tolerance `eps` of every non-root block row
/// `β_s(τ, τ̄ ∖ τ)`, in arena order.
pub fn hss_block_row_ranks(beta: &InteractionMatrix, tree: &DimensionTree, eps: f64) -> Result<Vec<(NodeId, usize)>> {
    if beta.d() != tree.leaf_count() {
        return Err(Error::Shape(format!("interaction matrix is {0}×{0}, tree has {1} leaves", beta.d(), tree.leaf_count())));
    }
    let beta_s = beta.symmetrized();
    (0..tree.len())
        .filter(|&idx| !tree.is_root(idx))
        .map(|idx| {
            let id = tree.node(idx).id();
            Ok((id, numerical_rank(&block_row(&beta_s, id), eps)?))
        })
        .collect()
}

/// `max_τ rank(β_s(τ, τ̄ ∖ τ))`.
pub fn hss_rank(beta: &InteractionMatrix, tree: &DimensionTree, eps: f64) -> Result<usize> {
    Ok(hss_block_row_ranks(beta, tree, eps)?.into_iter().map(|(_, k)| k).max().unwrap_or(0))
}
