//! JSON form of networks and operators.
//!
//! A document holds the tree in its nested-list text form, the mode
//! dimensions and one core per node in arena (pre-order) order, with real
//! and imaginary parts stored as separate arrays. Floats are written with
//! shortest round-trip formatting, so save/load is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimtree::DimensionTree;
use crate::tensor::DenseTensor;
use crate::ttn::{TreeTensorNetwork, Ttno};
use crate::{CMatrix, Error, Result, C64};

const FORMAT: &str = "ttn-json-1";

#[derive(Debug, Serialize, Deserialize)]
struct CoreDoc {
    node: String,
    shape: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkDoc {
    format: String,
    tree: String,
    mode_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    site_dims: Option<Vec<usize>>,
    cores: Vec<CoreDoc>,
}

fn core_doc(node: String, shape: Vec<usize>, data: &[C64]) -> Result<CoreDoc> {
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CoreDoc {
        node,
        shape,
        re: data.iter().map(|z| z.re).collect(),
        im: data.iter().map(|z| z.im).collect(),
    })
}

fn network_doc(x: &TreeTensorNetwork, site_dims: Option<Vec<usize>>) -> Result<NetworkDoc> {
    let tree = x.tree();
    let cores = (0..tree.len())
        .map(|idx| {
            let node = tree.node(idx);
            let label = node.id().to_string();
            if node.is_leaf() {
                let u = x.leaf_basis(node.id().first);
                core_doc(label, vec![u.nrows(), u.ncols()], u.as_slice())
            } else {
                let c = x.transfer_at(idx);
                core_doc(label, c.shape().to_vec(), c.data())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkDoc {
        format: FORMAT.into(),
        tree: tree.to_string(),
        mode_dims: x.mode_dims().to_vec(),
        site_dims,
        cores,
    })
}

fn network_from_doc(doc: &NetworkDoc) -> Result<TreeTensorNetwork> {
    if doc.format != FORMAT {
        return Err(Error::Serialization(format!("unknown format {:?}", doc.format)));
    }
    let tree: DimensionTree = doc.tree.parse()?;
    if doc.cores.len() != tree.len() {
        return Err(Error::Serialization(format!("{} cores for {} nodes", doc.cores.len(), tree.len())));
    }
    let mut leaves = vec![None; tree.leaf_count()];
    let mut transfers = Vec::new();
    for (idx, core) in doc.cores.iter().enumerate() {
        let node = tree.node(idx);
        if core.node != node.id().to_string() {
            return Err(Error::Serialization(format!("core {} labelled {}, expected {}", idx, core.node, node.id())));
        }
        if core.re.len() != core.im.len() {
            return Err(Error::Serialization(format!("core {} has mismatched re/im lengths", core.node)));
        }
        let data: Vec<C64> = core.re.iter().zip(&core.im).map(|(&re, &im)| C64::new(re, im)).collect();
        if node.is_leaf() {
            let [rows, cols] = core.shape[..] else {
                return Err(Error::Serialization(format!("leaf core {} is not a matrix", core.node)));
            };
            if rows * cols != data.len() {
                return Err(Error::Serialization(format!("leaf core {} has {} entries", core.node, data.len())));
            }
            leaves[node.id().first] = Some(CMatrix::from_vec(rows, cols, data));
        } else {
            transfers.push(DenseTensor::new(core.shape.clone(), data)?);
        }
    }
    let leaves: Vec<CMatrix> = leaves.into_iter().map(|u| u.expect("every leaf appears once")).collect();
    let net = TreeTensorNetwork::new(tree, leaves, transfers)?;
    if net.mode_dims() != doc.mode_dims.as_slice() {
        return Err(Error::Serialization(format!(
            "mode dims {:?} disagree with leaf bases {:?}",
            doc.mode_dims,
            net.mode_dims()
        )));
    }
    Ok(net)
}

fn to_string(doc: &NetworkDoc) -> Result<String> {
    serde_json::to_string(doc).map_err(|e| Error::Serialization(e.to_string()))
}

fn parse(text: &str) -> Result<NetworkDoc> {
    serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn network_to_json(x: &TreeTensorNetwork) -> Result<String> {
    to_string(&network_doc(x, None)?)
}

pub fn network_from_json(text: &str) -> Result<TreeTensorNetwork> {
    network_from_doc(&parse(text)?)
}

pub fn ttno_to_json(h: &Ttno) -> Result<String> {
    to_string(&network_doc(h.network(), Some(h.site_dims().to_vec()))?)
}

pub fn ttno_from_json(text: &str) -> Result<Ttno> {
    let doc = parse(text)?;
    let site_dims = doc
        .site_dims
        .clone()
        .ok_or_else(|| Error::Serialization("document has no site dims; it is not an operator".into()))?;
    Ttno::new(network_from_doc(&doc)?, site_dims)
}

pub fn save_ttno(h: &Ttno, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, ttno_to_json(h)?).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn load_ttno(path: impl AsRef<Path>) -> Result<Ttno> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Serialization(e.to_string()))?;
    ttno_from_json(&text)
}
