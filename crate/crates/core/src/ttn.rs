//! Tree tensor networks and tree tensor network operators.
//!
//! A network stores one basis matrix `U_ℓ` (`n_ℓ × r_ℓ`) per leaf and one
//! transfer tensor `C_τ` of shape `(r_{τ₁}, …, r_{τ_m}, r_τ)` per internal
//! node. The root keeps its trailing singleton `r_{τ̄} = 1` explicitly.

use crate::dimtree::{DimensionTree, NodeId};
use crate::linalg::numerical_rank;
use crate::tensor::{tensor_kronecker, unvec_square, DenseTensor, ModeSet};
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
enum Core {
    Basis(CMatrix),
    Transfer(DenseTensor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeTensorNetwork {
    tree: DimensionTree,
    mode_dims: Vec<usize>,
    // aligned with the tree's node arena
    cores: Vec<Core>,
}

/// Ranks and storage of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    /// `r_τ` for every node in arena order.
    pub ranks: Vec<(NodeId, usize)>,
    pub representation_rank: usize,
    pub parameter_count: usize,
    pub memory_bytes: usize,
}

impl TreeTensorNetwork {
    /// `leaf_bases[ℓ]` is `U_ℓ`; `transfers` follow
    /// [`DimensionTree::internal_nodes`] order.
    pub fn new(tree: DimensionTree, leaf_bases: Vec<CMatrix>, transfers: Vec<DenseTensor>) -> Result<Self> {
        let d = tree.leaf_count();
        if leaf_bases.len() != d {
            return Err(Error::Shape(format!("{} leaf bases for {d} leaves", leaf_bases.len())));
        }
        let internal: Vec<usize> = tree.internal_nodes().collect();
        if transfers.len() != internal.len() {
            return Err(Error::Shape(format!(
                "{} transfer tensors for {} internal nodes",
                transfers.len(),
                internal.len()
            )));
        }
        let mode_dims = leaf_bases.iter().map(|u| u.nrows()).collect();
        let mut cores: Vec<Option<Core>> = vec![None; tree.len()];
        for (mode, u) in leaf_bases.into_iter().enumerate() {
            cores[tree.leaf_node(mode)] = Some(Core::Basis(u));
        }
        for (idx, c) in internal.into_iter().zip(transfers) {
            cores[idx] = Some(Core::Transfer(c));
        }
        let net = Self {
            tree,
            mode_dims,
            cores: cores.into_iter().map(|c| c.expect("every node has a core")).collect(),
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        for idx in self.tree.internal_nodes() {
            let node = self.tree.node(idx);
            let c = self.transfer_at(idx);
            let mut expected: Vec<usize> = node.children().iter().map(|&ch| self.rank_at(ch)).collect();
            if self.tree.is_root(idx) {
                expected.push(1);
            } else if c.order() == expected.len() + 1 {
                expected.push(c.shape()[expected.len()]);
            }
            if c.shape() != expected.as_slice() {
                return Err(Error::Shape(format!(
                    "transfer tensor at {} has shape {:?}, expected {:?}",
                    node.id(),
                    c.shape(),
                    expected
                )));
            }
        }
        if self.tree.len() == 1 && self.rank_at(0) != 1 {
            return Err(Error::Shape("single-leaf network must have rank 1".into()));
        }
        Ok(())
    }

    /// All-zero network with every rank 0 (the root keeps `r = 1`).
    pub fn zero(tree: DimensionTree, mode_dims: &[usize]) -> Result<Self> {
        let d = tree.leaf_count();
        if mode_dims.len() != d {
            return Err(Error::Shape(format!("{} mode dims for {d} leaves", mode_dims.len())));
        }
        if d == 1 {
            return Self::new(tree, vec![CMatrix::zeros(mode_dims[0], 1)], Vec::new());
        }
        let leaves = mode_dims.iter().map(|&n| CMatrix::zeros(n, 0)).collect();
        let transfers = tree
            .internal_nodes()
            .map(|idx| {
                let node = tree.node(idx);
                let mut shape = vec![0; node.children().len()];
                shape.push(usize::from(tree.is_root(idx)));
                DenseTensor::zeros(shape)
            })
            .collect();
        Self::new(tree, leaves, transfers)
    }

    /// Rank-one network `u₁ ∘ … ∘ u_d` with all transfer tensors equal to 1.
    pub fn rank_one(tree: DimensionTree, columns: &[Vec<C64>]) -> Result<Self> {
        let leaves = columns
            .iter()
            .map(|c| CMatrix::from_column_slice(c.len(), 1, c))
            .collect();
        let transfers = tree
            .internal_nodes()
            .map(|idx| DenseTensor::new(vec![1; tree.node(idx).children().len() + 1], vec![C64::new(1.0, 0.0)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tree, leaves, transfers)
    }

    pub fn tree(&self) -> &DimensionTree {
        &self.tree
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn leaf_basis(&self, mode: usize) -> &CMatrix {
        match &self.cores[self.tree.leaf_node(mode)] {
            Core::Basis(u) => u,
            Core::Transfer(_) => unreachable!("leaf holds a basis"),
        }
    }

    /// Transfer tensor at arena index `idx` (must be internal).
    pub fn transfer_at(&self, idx: usize) -> &DenseTensor {
        match &self.cores[idx] {
            Core::Transfer(c) => c,
            Core::Basis(_) => panic!("node {} is a leaf", self.tree.node(idx).id()),
        }
    }

    pub fn transfer(&self, id: NodeId) -> Result<&DenseTensor> {
        let idx = self.tree.find(id).ok_or(Error::UnknownNode(id))?;
        match &self.cores[idx] {
            Core::Transfer(c) => Ok(c),
            Core::Basis(_) => Err(Error::Shape(format!("node {id} is a leaf"))),
        }
    }

    /// Mutable access for tests and fixtures that corrupt a network on purpose.
    pub fn transfer_at_mut(&mut self, idx: usize) -> &mut DenseTensor {
        match &mut self.cores[idx] {
            Core::Transfer(c) => c,
            Core::Basis(_) => panic!("node is a leaf"),
        }
    }

    /// `r_τ` at arena index `idx`.
    pub fn rank_at(&self, idx: usize) -> usize {
        match &self.cores[idx] {
            Core::Basis(u) => u.ncols(),
            Core::Transfer(c) => *c.shape().last().expect("transfer tensors have a rank mode"),
        }
    }

    pub fn rank(&self, id: NodeId) -> Result<usize> {
        Ok(self.rank_at(self.tree.find(id).ok_or(Error::UnknownNode(id))?))
    }

    pub fn dense_len(&self) -> usize {
        self.mode_dims.iter().product()
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        let entries = self
            .mode_dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if entries > cap {
            Err(Error::DenseTooLarge { entries, cap })
        } else {
            Ok(())
        }
    }

    /// `U_τ = (U_{τ_m} ⊗ … ⊗ U_{τ₁}) mat_{1..m}(C_τ)`, as an `n_τ × r_τ` matrix.
    fn subtree_basis(&self, idx: usize) -> Result<CMatrix> {
        let node = self.tree.node(idx);
        match &self.cores[idx] {
            Core::Basis(u) => Ok(u.clone()),
            Core::Transfer(c) => {
                let mut x = c.clone();
                for (k, &child) in node.children().iter().enumerate() {
                    x = x.mode_product(k, &self.subtree_basis(child)?)?;
                }
                let r = *x.shape().last().expect("rank mode");
                let n = node.id().modes().map(|m| self.mode_dims[m]).product();
                Ok(CMatrix::from_column_slice(n, r, x.data()))
            }
        }
    }

    /// The full order-`d` tensor represented by the network.
    pub fn contract_to_dense(&self, cap: usize) -> Result<DenseTensor> {
        self.check_cap(cap)?;
        let u = self.subtree_basis(self.tree.root())?;
        debug_assert_eq!(u.ncols(), 1);
        DenseTensor::new(self.mode_dims.clone(), u.as_slice().to_vec())
    }

    pub fn rank_report(&self) -> RankReport {
        let ranks: Vec<(NodeId, usize)> = (0..self.tree.len())
            .map(|idx| (self.tree.node(idx).id(), self.rank_at(idx)))
            .collect();
        let representation_rank = ranks.iter().map(|&(_, r)| r).max().unwrap_or(0);
        let parameter_count = self
            .cores
            .iter()
            .map(|c| match c {
                Core::Basis(u) => u.len(),
                Core::Transfer(t) => t.len(),
            })
            .sum();
        RankReport {
            ranks,
            representation_rank,
            parameter_count,
            memory_bytes: 16 * parameter_count,
        }
    }

    /// `rank(mat_{L(τ)}(X))` for every node, from the dense tensor.
    pub fn matricization_ranks(&self, tol: f64, cap: usize) -> Result<Vec<(NodeId, usize)>> {
        let dense = self.contract_to_dense(cap)?;
        let d = self.tree.leaf_count();
        self.tree
            .nodes()
            .iter()
            .map(|node| {
                let m = dense.matricize(&ModeSet::new(node.id().modes(), d)?)?;
                Ok((node.id(), numerical_rank(&m, tol)?))
            })
            .collect()
    }

    /// Network whose tensor is the sum of `self` and `other`: leaf bases are
    /// concatenated and transfer tensors are block diagonal in every rank mode.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.tree != other.tree {
            return Err(Error::TreeMismatch);
        }
        if self.mode_dims != other.mode_dims {
            return Err(Error::Shape(format!(
                "mode dims {:?} vs {:?}",
                self.mode_dims, other.mode_dims
            )));
        }
        let tree = &self.tree;
        if tree.len() == 1 {
            let sum = self.leaf_basis(0) + other.leaf_basis(0);
            return Self::new(tree.clone(), vec![sum], Vec::new());
        }
        let leaves = (0..tree.leaf_count())
            .map(|m| {
                let (a, b) = (self.leaf_basis(m), other.leaf_basis(m));
                let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
                out.columns_mut(0, a.ncols()).copy_from(a);
                out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
                out
            })
            .collect();
        let transfers = tree
            .internal_nodes()
            .map(|idx| {
                let (a, b) = (self.transfer_at(idx), other.transfer_at(idx));
                let root = tree.is_root(idx);
                let order = a.order();
                let shape: Vec<usize> = (0..order)
                    .map(|k| if root && k == order - 1 { 1 } else { a.shape()[k] + b.shape()[k] })
                    .collect();
                let mut out = DenseTensor::zeros(shape);
                copy_block(&mut out, a, &vec![0; order]);
                let mut offset: Vec<usize> = a.shape().to_vec();
                if root {
                    offset[order - 1] = 0;
                }
                copy_block(&mut out, b, &offset);
                out
            })
            .collect();
        Self::new(tree.clone(), leaves, transfers)
    }

    /// Same network with the root transfer tensor multiplied by `factor`.
    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        match &mut out.cores[0] {
            Core::Basis(u) => *u *= factor,
            Core::Transfer(c) => c.data_mut().iter_mut().for_each(|z| *z *= factor),
        }
        out
    }
}

fn copy_block(dst: &mut DenseTensor, src: &DenseTensor, offset: &[usize]) {
    let mut idx = vec![0usize; src.order()];
    let mut target = vec![0usize; src.order()];
    for &v in src.data() {
        for k in 0..idx.len() {
            target[k] = idx[k] + offset[k];
        }
        dst.set(&target, v);
        for (i, &n) in idx.iter_mut().zip(src.shape()) {
            *i += 1;
            if *i < n {
                break;
            }
            *i = 0;
        }
    }
}

/// A tree tensor network operator: a network over squared site dimensions.
///
/// Mode `i` of the network merges the pair `(row_i, col_i)` of the operator's
/// site-`i` indices as `row_i + n_i · col_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ttno {
    network: TreeTensorNetwork,
    site_dims: Vec<usize>,
}

impl Ttno {
    pub fn new(network: TreeTensorNetwork, site_dims: Vec<usize>) -> Result<Self> {
        if network.mode_dims().len() != site_dims.len()
            || network.mode_dims().iter().zip(&site_dims).any(|(&m, &n)| m != n * n)
        {
            return Err(Error::Shape(format!(
                "operator mode dims {:?} are not the squares of site dims {site_dims:?}",
                network.mode_dims()
            )));
        }
        Ok(Self { network, site_dims })
    }

    /// Rank-one Tucker operator `X ↦ X ×₁ A₁ ⋯ ×_d A_d`.
    pub fn rank_one(tree: DimensionTree, ops: &[CMatrix]) -> Result<Self> {
        let site_dims: Vec<usize> = ops.iter().map(|a| a.nrows()).collect();
        if ops.iter().any(|a| !a.is_square()) {
            return Err(Error::Shape("site operators must be square".into()));
        }
        let columns: Vec<Vec<C64>> = ops.iter().map(|a| a.as_slice().to_vec()).collect();
        Self::new(TreeTensorNetwork::rank_one(tree, &columns)?, site_dims)
    }

    pub fn identity(tree: DimensionTree, site_dims: &[usize]) -> Result<Self> {
        let ops: Vec<CMatrix> = site_dims.iter().map(|&n| CMatrix::identity(n, n)).collect();
        Self::rank_one(tree, &ops)
    }

    pub fn zero(tree: DimensionTree, site_dims: &[usize]) -> Result<Self> {
        let modes: Vec<usize> = site_dims.iter().map(|n| n * n).collect();
        Self::new(TreeTensorNetwork::zero(tree, &modes)?, site_dims.to_vec())
    }

    pub fn network(&self) -> &TreeTensorNetwork {
        &self.network
    }

    pub fn network_mut(&mut self) -> &mut TreeTensorNetwork {
        &mut self.network
    }

    pub fn into_network(self) -> TreeTensorNetwork {
        self.network
    }

    pub fn tree(&self) -> &DimensionTree {
        self.network.tree()
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn rank_report(&self) -> RankReport {
        self.network.rank_report()
    }

    /// The matrix `Ĥ` with `Ĥ · vec(X) = vec(H(X))`.
    pub fn to_dense_matrix(&self, cap: usize) -> Result<CMatrix> {
        let h = self.network.contract_to_dense(cap)?;
        let n: usize = self.site_dims.iter().product();
        let mut out = CMatrix::zeros(n, n);
        let d = self.site_dims.len();
        let mut idx = vec![0usize; d];
        for &value in h.data() {
            let (mut row, mut col, mut stride) = (0, 0, 1);
            for (k, &nk) in self.site_dims.iter().enumerate() {
                row += (idx[k] % nk) * stride;
                col += (idx[k] / nk) * stride;
                stride *= nk;
            }
            out[(row, col)] = value;
            for (i, &m) in idx.iter_mut().zip(h.shape()) {
                *i += 1;
                if *i < m {
                    break;
                }
                *i = 0;
            }
        }
        Ok(out)
    }

    /// Operator sum; ranks add.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.site_dims != other.site_dims {
            return Err(Error::Shape("site dims differ".into()));
        }
        Self::new(self.network.direct_sum(&other.network)?, self.site_dims.clone())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            network: self.network.scaled(factor),
            site_dims: self.site_dims.clone(),
        }
    }

    /// `H(X)` as a network on the same tree; every rank becomes
    /// `r_τ^H · r_τ^X`.
    pub fn apply(&self, x: &TreeTensorNetwork) -> Result<TreeTensorNetwork> {
        if self.tree() != x.tree() {
            return Err(Error::TreeMismatch);
        }
        if x.mode_dims() != self.site_dims.as_slice() {
            return Err(Error::Shape(format!(
                "state mode dims {:?} differ from operator site dims {:?}",
                x.mode_dims(),
                self.site_dims
            )));
        }
        let tree = self.tree().clone();
        let leaves = (0..tree.leaf_count())
            .map(|m| {
                let n = self.site_dims[m];
                let h = self.network.leaf_basis(m);
                let u = x.leaf_basis(m);
                let rx = u.ncols();
                let mut out = CMatrix::zeros(n, h.ncols() * rx);
                for j in 0..h.ncols() {
                    let a = unvec_square(h.column(j).as_slice(), n);
                    out.columns_mut(j * rx, rx).copy_from(&(a * u));
                }
                out
            })
            .collect();
        let transfers = tree
            .internal_nodes()
            .map(|idx| tensor_kronecker(self.network.transfer_at(idx), x.transfer_at(idx)))
            .collect::<Result<Vec<_>>>()?;
        TreeTensorNetwork::new(tree, leaves, transfers)
    }
}

/// Free-function form of [`Ttno::apply`].
pub fn apply_ttno(h: &Ttno, x: &TreeTensorNetwork) -> Result<TreeTensorNetwork> {
    h.apply(x)
}

/// Free-function form of [`Ttno::direct_sum`].
pub fn ttno_direct_sum(a: &Ttno, b: &Ttno) -> Result<Ttno> {
    a.direct_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_frobenius;
    use crate::DEFAULT_DENSE_CAP as CAP;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rand_c(rng: &mut impl Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn random_matrix(rng: &mut impl Rng, r: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(r, cols, |_, _| rand_c(rng))
    }

    fn random_network(rng: &mut impl Rng, tree: &DimensionTree, n: usize, max_rank: usize) -> TreeTensorNetwork {
        let ranks: Vec<usize> = (0..tree.len())
            .map(|i| if tree.is_root(i) { 1 } else { rng.random_range(1..=max_rank) })
            .collect();
        let leaves = (0..tree.leaf_count())
            .map(|m| random_matrix(rng, n, ranks[tree.leaf_node(m)]))
            .collect();
        let transfers = tree
            .internal_nodes()
            .map(|idx| {
                let mut shape: Vec<usize> = tree.node(idx).children().iter().map(|&ch| ranks[ch]).collect();
                shape.push(ranks[idx]);
                DenseTensor::from_fn(shape, |_| rand_c(rng))
            })
            .collect();
        TreeTensorNetwork::new(tree.clone(), leaves, transfers).unwrap()
    }

    /// Recursive contraction written directly against the definition, with
    /// explicit index loops instead of mode products.
    fn hand_contract(x: &TreeTensorNetwork) -> Vec<C64> {
        fn basis(x: &TreeTensorNetwork, idx: usize) -> CMatrix {
            let node = x.tree().node(idx);
            if node.is_leaf() {
                return x.leaf_basis(node.id().first).clone();
            }
            let kids: Vec<CMatrix> = node.children().iter().map(|&ch| basis(x, ch)).collect();
            // (U_m ⊗ … ⊗ U_1)
            let mut kron = kids[0].clone();
            for u in &kids[1..] {
                kron = u.kronecker(&kron);
            }
            let c = x.transfer_at(idx);
            let r = *c.shape().last().unwrap();
            let cm = CMatrix::from_column_slice(c.len() / r, r, c.data());
            kron * cm
        }
        basis(x, 0).as_slice().to_vec()
    }

    #[test]
    fn rank_one_network_is_outer_product() {
        let tree = DimensionTree::balanced_binary(3).unwrap();
        let cols = vec![vec![c(1.0), c(2.0)], vec![c(0.5), c(-1.0), c(3.0)], vec![C64::new(0.0, 1.0), c(1.0)]];
        let net = TreeTensorNetwork::rank_one(tree, &cols).unwrap();
        let dense = net.contract_to_dense(CAP).unwrap();
        let expect = DenseTensor::outer(&[&cols[0], &cols[1], &cols[2]]);
        assert_eq!(dense, expect);
    }

    #[test]
    fn two_site_network_is_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (u1, u2, core) = (random_matrix(&mut rng, 3, 2), random_matrix(&mut rng, 4, 2), random_matrix(&mut rng, 2, 2));
        let tree = DimensionTree::balanced_binary(2).unwrap();
        let c = DenseTensor::new(vec![2, 2, 1], core.as_slice().to_vec()).unwrap();
        let net = TreeTensorNetwork::new(tree, vec![u1.clone(), u2.clone()], vec![c]).unwrap();
        let dense = net.contract_to_dense(CAP).unwrap();
        let expect = &u1 * core * u2.transpose();
        let m = dense.matricize(&ModeSet::new([0], 2).unwrap()).unwrap();
        assert!(relative_frobenius(&m, &expect) < 1e-14);
    }

    #[test]
    fn contraction_matches_hand_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for tree in [
            DimensionTree::balanced_binary(4).unwrap(),
            DimensionTree::degenerate(4).unwrap(),
            "((1,2),(3,4),5)".parse().unwrap(),
        ] {
            let net = random_network(&mut rng, &tree, 2, 2);
            let dense = net.contract_to_dense(CAP).unwrap();
            let hand = hand_contract(&net);
            let err: f64 = dense.data().iter().zip(&hand).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn shape_inconsistencies_are_rejected() {
        let tree = DimensionTree::balanced_binary(2).unwrap();
        let bad = DenseTensor::zeros(vec![2, 3, 1]);
        let leaves = vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
        assert!(matches!(TreeTensorNetwork::new(tree.clone(), leaves.clone(), vec![bad]), Err(Error::Shape(_))));
        let non_unit_root = DenseTensor::zeros(vec![2, 2, 2]);
        assert!(matches!(TreeTensorNetwork::new(tree, leaves, vec![non_unit_root]), Err(Error::Shape(_))));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let tree = DimensionTree::balanced_binary(4).unwrap();
        let net = TreeTensorNetwork::rank_one(tree, &vec![vec![c(1.0); 4]; 4]).unwrap();
        assert_eq!(net.contract_to_dense(100).unwrap_err(), Error::DenseTooLarge { entries: 256, cap: 100 });
    }

    #[test]
    fn rank_one_operator_is_kronecker_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ops: Vec<CMatrix> = vec![random_matrix(&mut rng, 2, 2), random_matrix(&mut rng, 3, 3), random_matrix(&mut rng, 2, 2)];
        let h = Ttno::rank_one(DimensionTree::balanced_binary(3).unwrap(), &ops).unwrap();
        let expect = ops[2].kronecker(&ops[1]).kronecker(&ops[0]);
        assert!(relative_frobenius(&h.to_dense_matrix(CAP).unwrap(), &expect) < 1e-15);
    }

    #[test]
    fn identity_operator_is_identity_matrix() {
        let h = Ttno::identity(DimensionTree::balanced_binary(4).unwrap(), &[2, 2, 2, 2]).unwrap();
        assert_eq!(h.to_dense_matrix(CAP).unwrap(), CMatrix::identity(16, 16));
        assert_eq!(h.rank_report().representation_rank, 1);
    }

    #[test]
    fn apply_identity_and_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let tree = DimensionTree::balanced_binary(4).unwrap();
        let x = random_network(&mut rng, &tree, 2, 2);
        let id = Ttno::identity(tree.clone(), &[2; 4]).unwrap();
        let y = id.apply(&x).unwrap();
        let err = relative_frobenius(
            &crate::linalg::column(y.contract_to_dense(CAP).unwrap().data()),
            &crate::linalg::column(x.contract_to_dense(CAP).unwrap().data()),
        );
        assert!(err < 1e-14);

        let ops: Vec<CMatrix> = (0..4).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let cols: Vec<Vec<C64>> = (0..4).map(|_| (0..2).map(|_| rand_c(&mut rng)).collect()).collect();
        let x1 = TreeTensorNetwork::rank_one(tree.clone(), &cols).unwrap();
        let y1 = Ttno::rank_one(tree, &ops).unwrap().apply(&x1).unwrap();
        assert_eq!(y1.rank_report().representation_rank, 1);
        let mapped: Vec<Vec<C64>> = ops.iter().zip(&cols).map(|(a, v)| (a * crate::linalg::column(v)).as_slice().to_vec()).collect();
        let refs: Vec<&[C64]> = mapped.iter().map(|v| v.as_slice()).collect();
        let expect = DenseTensor::outer(&refs);
        let got = y1.contract_to_dense(CAP).unwrap();
        assert!(got.data().iter().zip(expect.data()).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn apply_rejects_mismatched_trees() {
        let h = Ttno::identity(DimensionTree::balanced_binary(4).unwrap(), &[2; 4]).unwrap();
        let x = TreeTensorNetwork::rank_one(DimensionTree::degenerate(4).unwrap(), &vec![vec![c(1.0); 2]; 4]).unwrap();
        assert_eq!(h.apply(&x).unwrap_err(), Error::TreeMismatch);
    }

    #[test]
    fn parameter_count_of_two_site_network() {
        let tree = DimensionTree::balanced_binary(2).unwrap();
        let net = TreeTensorNetwork::new(
            tree,
            vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
            vec![DenseTensor::zeros(vec![2, 2, 1])],
        )
        .unwrap();
        let rep = net.rank_report();
        assert_eq!(rep.parameter_count, 12);
        assert_eq!(rep.memory_bytes, 192);
        assert_eq!(rep.representation_rank, 2);
    }

    #[test]
    fn matricization_ranks_of_trivial_networks() {
        let tree = DimensionTree::balanced_binary(4).unwrap();
        let x = TreeTensorNetwork::rank_one(tree.clone(), &vec![vec![c(1.0), c(2.0)]; 4]).unwrap();
        assert!(x.matricization_ranks(1e-12, CAP).unwrap().iter().all(|&(_, r)| r == 1));
        let z = TreeTensorNetwork::zero(tree, &[2; 4]).unwrap();
        assert!(z.matricization_ranks(1e-12, CAP).unwrap().iter().all(|&(_, r)| r == 0));
        assert_eq!(z.contract_to_dense(CAP).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn direct_sums_add_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let tree = DimensionTree::balanced_binary(4).unwrap();
        let id = Ttno::identity(tree.clone(), &[2; 4]).unwrap();
        let two = id.direct_sum(&id).unwrap().to_dense_matrix(CAP).unwrap();
        assert_eq!(two, CMatrix::identity(16, 16) * c(2.0));

        let zero = Ttno::zero(tree.clone(), &[2; 4]).unwrap();
        let a_ops: Vec<CMatrix> = (0..4).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let b_ops: Vec<CMatrix> = (0..4).map(|_| random_matrix(&mut rng, 2, 2)).collect();
        let a = Ttno::rank_one(tree.clone(), &a_ops).unwrap();
        let b = Ttno::rank_one(tree, &b_ops).unwrap();
        let da = a.to_dense_matrix(CAP).unwrap();
        assert!(relative_frobenius(&a.direct_sum(&zero).unwrap().to_dense_matrix(CAP).unwrap(), &da) < 1e-15);
        let sum = a.direct_sum(&b).unwrap();
        let expect = &da + b.to_dense_matrix(CAP).unwrap();
        assert!(relative_frobenius(&sum.to_dense_matrix(CAP).unwrap(), &expect) < 1e-13);
        assert_eq!(sum.rank_report().representation_rank, 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn apply_matches_dense_matrix_vector(seed in any::<u64>(), degenerate in any::<bool>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let tree = if degenerate { DimensionTree::degenerate(4) } else { DimensionTree::balanced_binary(4) }.unwrap();
                let h = Ttno::new(random_network(&mut rng, &tree, 4, 2), vec![2; 4]).unwrap();
                let x = random_network(&mut rng, &tree, 2, 2);
                let y = h.apply(&x).unwrap().contract_to_dense(CAP).unwrap();
                let expect = h.to_dense_matrix(CAP).unwrap() * crate::linalg::column(x.contract_to_dense(CAP).unwrap().data());
                prop_assert!(relative_frobenius(&crate::linalg::column(y.data()), &expect) < 1e-12);
            }

            #[test]
            fn matricization_ranks_bounded_by_stored_ranks(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let tree = DimensionTree::balanced_binary(5).unwrap();
                let x = random_network(&mut rng, &tree, 2, 3);
                let rep = x.rank_report();
                for ((id, r), (id2, stored)) in x.matricization_ranks(1e-10, CAP).unwrap().into_iter().zip(rep.ranks) {
                    prop_assert_eq!(id, id2);
                    prop_assert!(r <= stored);
                }
            }
        }
    }
}
