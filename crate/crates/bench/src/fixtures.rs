//! Random instances for the verification suite and tests. Entries are
//! uniform in the unit square of the complex plane.

use rand::Rng;
use ttno::build::{InteractionFamily, PairwiseHamiltonianSpec};
use ttno::dimtree::DimensionTree;
use ttno::hss::InteractionMatrix;
use ttno::tensor::DenseTensor;
use ttno::ttn::{TreeTensorNetwork, Ttno};
use ttno::{CMatrix, C64};

pub fn random_scalar(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_scalar(rng))
}

pub fn random_beta(rng: &mut impl Rng, d: usize) -> InteractionMatrix {
    InteractionMatrix::from_fn(d, |_, _| random_scalar(rng))
}

/// Dense random interaction matrices and operators on sites of dimension `dims`.
pub fn random_spec(rng: &mut impl Rng, dims: &[usize], families: usize, single_site: bool) -> PairwiseHamiltonianSpec {
    let d = dims.len();
    let fams = (0..families)
        .map(|_| InteractionFamily {
            beta: random_beta(rng, d),
            ops: dims.iter().map(|&n| random_matrix(rng, n, n)).collect(),
        })
        .collect();
    let ss = single_site.then(|| dims.iter().map(|&n| random_matrix(rng, n, n)).collect());
    PairwiseHamiltonianSpec::new(dims.to_vec(), fams, ss).expect("shapes are consistent by construction")
}

/// Random network with leaf ranks `min(n_ℓ, max_rank)` and interior ranks `max_rank`.
pub fn random_network(rng: &mut impl Rng, tree: &DimensionTree, mode_dims: &[usize], max_rank: usize) -> TreeTensorNetwork {
    let rank = |idx: usize| {
        let node = tree.node(idx);
        if tree.is_root(idx) {
            1
        } else if node.is_leaf() {
            mode_dims[node.id().first].min(max_rank)
        } else {
            max_rank
        }
    };
    let leaves = mode_dims
        .iter()
        .enumerate()
        .map(|(m, &n)| random_matrix(rng, n, rank(tree.leaf_node(m))))
        .collect();
    let transfers = tree
        .internal_nodes()
        .map(|idx| {
            let mut shape: Vec<usize> = tree.node(idx).children().iter().map(|&c| rank(c)).collect();
            shape.push(rank(idx));
            let len = shape.iter().product();
            DenseTensor::new(shape, (0..len).map(|_| random_scalar(rng)).collect()).expect("length matches shape")
        })
        .collect();
    TreeTensorNetwork::new(tree.clone(), leaves, transfers).expect("ranks are consistent by construction")
}

pub fn random_ttno(rng: &mut impl Rng, tree: &DimensionTree, site_dims: &[usize], max_rank: usize) -> Ttno {
    let squared: Vec<usize> = site_dims.iter().map(|n| n * n).collect();
    Ttno::new(random_network(rng, tree, &squared, max_rank), site_dims.to_vec()).expect("squared mode dims")
}
