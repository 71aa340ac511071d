//! Dimension trees: recursive ordered partitions of the modes `0..d` into
//! consecutive leaf ranges.
//!
//! Nodes live in a pre-order arena (index 0 is the root) and are identified
//! by their leaf range, which is unique within a tree.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::{Error, Result};

/// Leaf range `[first, last]` of a node (0-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub first: usize,
    pub last: usize,
}

impl NodeId {
    pub fn leaf(mode: usize) -> Self {
        Self { first: mode, last: mode }
    }

    pub fn range(first: usize, last: usize) -> Self {
        Self { first, last }
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_leaf(&self) -> bool {
        self.first == self.last
    }

    pub fn modes(&self) -> RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.modes().contains(&mode)
    }
}

/// 1-based, e.g. `3` for a leaf or `1-4` for a range.
impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            write!(f, "{}", self.first + 1)
        } else {
            write!(f, "{}-{}", self.first + 1, self.last + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    id: NodeId,
    children: Vec<usize>,
    parent: Option<usize>,
}

impl Node {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of leaves `d_τ`.
    pub fn leaf_count(&self) -> usize {
        self.id.len()
    }
}

/// Shape of a tree without leaf labels; leaves are numbered left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeShape {
    Leaf,
    Internal(Vec<TreeShape>),
}

impl TreeShape {
    fn leaf_count(&self) -> usize {
        match self {
            TreeShape::Leaf => 1,
            TreeShape::Internal(ch) => ch.iter().map(TreeShape::leaf_count).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionTree {
    nodes: Vec<Node>,
    leaf_index: Vec<usize>,
}

impl DimensionTree {
    pub fn from_shape(shape: &TreeShape) -> Result<Self> {
        let mut tree = Self {
            nodes: Vec::new(),
            leaf_index: Vec::new(),
        };
        tree.push(shape, None, 0)?;
        Ok(tree)
    }

    fn push(&mut self, shape: &TreeShape, parent: Option<usize>, first: usize) -> Result<usize> {
        let idx = self.nodes.len();
        let count = shape.leaf_count();
        self.nodes.push(Node {
            id: NodeId::range(first, first + count - 1),
            children: Vec::new(),
            parent,
        });
        match shape {
            TreeShape::Leaf => self.leaf_index.push(idx),
            TreeShape::Internal(children) => {
                if children.len() < 2 {
                    return Err(Error::InvalidTree(format!(
                        "internal node over {} has fewer than two children",
                        self.nodes[idx].id
                    )));
                }
                let mut offset = first;
                for child in children {
                    let c = self.push(child, Some(idx), offset)?;
                    offset += child.leaf_count();
                    self.nodes[idx].children.push(c);
                }
            }
        }
        Ok(idx)
    }

    /// Balanced binary tree; a range `[a, b]` splits after `⌈(b−a+1)/2⌉`
    /// leaves, so the left child gets the extra leaf.
    pub fn balanced_binary(d: usize) -> Result<Self> {
        fn shape(n: usize) -> TreeShape {
            if n == 1 {
                TreeShape::Leaf
            } else {
                let left = n.div_ceil(2);
                TreeShape::Internal(vec![shape(left), shape(n - left)])
            }
        }
        if d == 0 {
            return Err(Error::InvalidTree("need at least one leaf".into()));
        }
        Self::from_shape(&shape(d))
    }

    /// Right comb `(1, (2, (3, …)))`, the tensor-train tree.
    pub fn degenerate(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidTree("need at least one leaf".into()));
        }
        let mut shape = TreeShape::Leaf;
        for _ in 1..d {
            shape = TreeShape::Internal(vec![TreeShape::Leaf, shape]);
        }
        Self::from_shape(&shape)
    }

    /// Height-one tree `(1, 2, …, d)`.
    pub fn flat(d: usize) -> Result<Self> {
        match d {
            0 => Err(Error::InvalidTree("need at least one leaf".into())),
            1 => Self::from_shape(&TreeShape::Leaf),
            _ => Self::from_shape(&TreeShape::Internal(vec![TreeShape::Leaf; d])),
        }
    }

    /// Balanced tree with up to `m` children per node.
    pub fn balanced_mary(d: usize, m: usize) -> Result<Self> {
        fn shape(n: usize, m: usize) -> TreeShape {
            if n == 1 {
                return TreeShape::Leaf;
            }
            let parts = m.min(n);
            let (q, r) = (n / parts, n % parts);
            TreeShape::Internal((0..parts).map(|i| shape(q + usize::from(i < r), m)).collect())
        }
        if d == 0 || m < 2 {
            return Err(Error::InvalidTree(format!("cannot build {m}-ary tree on {d} leaves")));
        }
        Self::from_shape(&shape(d, m))
    }

    /// Number of leaves `d`.
    pub fn leaf_count(&self) -> usize {
        self.leaf_index.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_root(&self, idx: usize) -> bool {
        idx == 0
    }

    /// Arena index of the leaf for `mode`.
    pub fn leaf_node(&self, mode: usize) -> usize {
        self.leaf_index[mode]
    }

    /// Internal nodes `𝒯(τ̄)` in pre-order.
    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].is_leaf())
    }

    /// All nodes with children before parents.
    pub fn post_order(&self) -> Vec<usize> {
        // in a pre-order arena every child has a larger index than its parent
        (0..self.nodes.len()).rev().collect()
    }

    pub fn find(&self, id: NodeId) -> Option<usize> {
        let mut idx = 0;
        loop {
            let node = &self.nodes[idx];
            if node.id == id {
                return Some(idx);
            }
            idx = *node
                .children
                .iter()
                .find(|&&c| self.nodes[c].id.first <= id.first && id.last <= self.nodes[c].id.last)?;
        }
    }

    pub fn height(&self) -> usize {
        fn h(t: &DimensionTree, idx: usize) -> usize {
            t.nodes[idx].children.iter().map(|&c| 1 + h(t, c)).max().unwrap_or(0)
        }
        h(self, 0)
    }

    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|n| n.is_leaf() || n.children.len() == 2)
    }

    /// `L(τ̄ ∖ τ)` in increasing order.
    pub fn complement_leaves(&self, id: NodeId) -> Result<Vec<usize>> {
        self.find(id).ok_or(Error::UnknownNode(id))?;
        Ok((0..self.leaf_count()).filter(|&m| !id.contains(m)).collect())
    }

    pub fn shape(&self) -> TreeShape {
        fn s(t: &DimensionTree, idx: usize) -> TreeShape {
            let node = &t.nodes[idx];
            if node.is_leaf() {
                TreeShape::Leaf
            } else {
                TreeShape::Internal(node.children.iter().map(|&c| s(t, c)).collect())
            }
        }
        s(self, 0)
    }
}

/// Nested-list form with 1-based leaves, e.g. `((1,2,3),(4,5,6))`.
impl fmt::Display for DimensionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn w(t: &DimensionTree, idx: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let node = &t.nodes[idx];
            if node.is_leaf() {
                return write!(f, "{}", node.id.first + 1);
            }
            f.write_str("(")?;
            for (k, &c) in node.children.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                w(t, c, f)?;
            }
            f.write_str(")")
        }
        w(self, 0, f)
    }
}

enum Parsed {
    Leaf(usize),
    Internal(Vec<Parsed>),
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::InvalidTree(format!("{msg} at byte {}", self.pos))
    }

    fn node(&mut self) -> Result<Parsed> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            Some(b'(') => {
                self.pos += 1;
                let mut children = vec![self.node()?];
                loop {
                    self.skip_ws();
                    match self.bytes.get(self.pos) {
                        Some(b',') => {
                            self.pos += 1;
                            children.push(self.node()?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.err("expected ',' or ')'")),
                    }
                }
                Ok(Parsed::Internal(children))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
                text.parse().map(Parsed::Leaf).map_err(|_| self.err("leaf label overflow"))
            }
            _ => Err(self.err("expected '(' or a leaf number")),
        }
    }
}

impl FromStr for DimensionTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            bytes: s.as_bytes(),
            pos: 0,
        };
        let parsed = p.node()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(p.err("trailing input"));
        }

        // leaves must read 1, 2, …, d from left to right
        fn convert(node: Parsed, next: &mut usize) -> Result<TreeShape> {
            match node {
                Parsed::Leaf(label) => {
                    if label != *next + 1 {
                        return Err(Error::InvalidTree(format!(
                            "leaf {label} found where {} was expected",
                            *next + 1
                        )));
                    }
                    *next += 1;
                    Ok(TreeShape::Leaf)
                }
                Parsed::Internal(children) => {
                    if children.len() < 2 {
                        return Err(Error::InvalidTree("internal node with a single child".into()));
                    }
                    children
                        .into_iter()
                        .map(|c| convert(c, next))
                        .collect::<Result<Vec<_>>>()
                        .map(TreeShape::Internal)
                }
            }
        }
        let mut next = 0;
        Self::from_shape(&convert(parsed, &mut next)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_six_matches_figure_partition() {
        let t = DimensionTree::balanced_binary(6).unwrap();
        assert_eq!(t.to_string(), "(((1,2),3),((4,5),6))");
        let root = t.node(t.root());
        assert_eq!(t.node(root.children()[0]).id(), NodeId::range(0, 2));
        assert_eq!(t.node(root.children()[1]).id(), NodeId::range(3, 5));
    }

    #[test]
    fn balanced_edge_sizes() {
        let one = DimensionTree::balanced_binary(1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.node(0).is_leaf());
        let eight = DimensionTree::balanced_binary(8).unwrap();
        assert_eq!(eight.height(), 3);
        assert_eq!(eight.internal_nodes().count(), 7);
        assert!(DimensionTree::balanced_binary(0).is_err());
    }

    #[test]
    fn degenerate_is_right_comb() {
        assert_eq!(DimensionTree::degenerate(3).unwrap().to_string(), "(1,(2,3))");
        assert_eq!(DimensionTree::degenerate(2).unwrap().to_string(), "(1,2)");
        assert_eq!(DimensionTree::degenerate(8).unwrap().height(), 7);
        assert!(DimensionTree::degenerate(0).is_err());
    }

    #[test]
    fn internal_node_counts() {
        assert_eq!(DimensionTree::balanced_binary(4).unwrap().internal_nodes().count(), 3);
        assert_eq!(DimensionTree::degenerate(4).unwrap().internal_nodes().count(), 3);
        assert_eq!(DimensionTree::balanced_binary(1).unwrap().internal_nodes().count(), 0);
    }

    #[test]
    fn complement_leaves_examples() {
        let t = DimensionTree::balanced_binary(6).unwrap();
        assert_eq!(t.complement_leaves(NodeId::range(3, 5)).unwrap(), vec![0, 1, 2]);
        assert!(t.complement_leaves(NodeId::range(0, 5)).unwrap().is_empty());
        let t5 = DimensionTree::balanced_binary(5).unwrap();
        assert_eq!(t5.complement_leaves(NodeId::leaf(2)).unwrap(), vec![0, 1, 3, 4]);
        assert_eq!(
            t.complement_leaves(NodeId::range(1, 3)).unwrap_err(),
            Error::UnknownNode(NodeId::range(1, 3))
        );
    }

    #[test]
    fn parse_and_print_round_trip() {
        for text in ["((1,2,3),(4,5,6))", "(1,(2,3))", "1", "((1,2),(3,4),(5,6))", "(1,2,3,4,5)"] {
            let t: DimensionTree = text.parse().unwrap();
            assert_eq!(t.to_string(), text);
        }
        let spaced: DimensionTree = " ( (1, 2) , 3 ) ".parse().unwrap();
        assert_eq!(spaced.to_string(), "((1,2),3)");
    }

    #[test]
    fn parse_rejects_invalid_trees() {
        for bad in ["((1,3),(2,4))", "((1))", "(1,2", "(0,1)", "(1,2)x", "", "(2,1)"] {
            assert!(matches!(bad.parse::<DimensionTree>(), Err(Error::InvalidTree(_))), "{bad}");
        }
    }

    #[test]
    fn find_locates_every_node() {
        let t: DimensionTree = "((1,2),(3,4),(5,6))".parse().unwrap();
        for (idx, node) in t.nodes().iter().enumerate() {
            assert_eq!(t.find(node.id()), Some(idx));
        }
        assert_eq!(t.find(NodeId::range(1, 2)), None);
        assert!(!t.is_binary());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn shape(max_leaves: usize) -> impl Strategy<Value = TreeShape> {
            let leaf = Just(TreeShape::Leaf);
            leaf.prop_recursive(4, max_leaves as u32, 4, |inner| {
                prop::collection::vec(inner, 2..=4).prop_map(TreeShape::Internal)
            })
        }

        fn check_node(t: &DimensionTree, idx: usize) {
            let node = t.node(idx);
            if node.is_leaf() {
                assert_eq!(node.id().len(), 1);
                return;
            }
            let ch = node.children();
            assert!(ch.len() >= 2);
            // children partition the parent in order
            assert_eq!(t.node(ch[0]).id().first, node.id().first);
            assert_eq!(t.node(*ch.last().unwrap()).id().last, node.id().last);
            for w in ch.windows(2) {
                assert_eq!(t.node(w[0]).id().last + 1, t.node(w[1]).id().first);
            }
            for &c in ch {
                assert_eq!(t.node(c).parent(), Some(idx));
                check_node(t, c);
            }
        }

        proptest! {
            #[test]
            fn random_trees_satisfy_definition(s in shape(16)) {
                let t = DimensionTree::from_shape(&s).unwrap();
                let d = t.leaf_count();
                prop_assert_eq!(t.node(0).id(), NodeId::range(0, d - 1));
                check_node(&t, 0);
                let reparsed: DimensionTree = t.to_string().parse().unwrap();
                prop_assert_eq!(reparsed, t);
            }

            #[test]
            fn standard_tree_heights(d in 1usize..64) {
                let b = DimensionTree::balanced_binary(d).unwrap();
                prop_assert_eq!(b.height(), (d as f64).log2().ceil() as usize);
                prop_assert!(b.is_binary());
                prop_assert_eq!(DimensionTree::degenerate(d).unwrap().height(), d - 1);
            }
        }
    }
}
