use serde::{Deserialize, Serialize};

use super::c_factor;
use super::split::SplitPlane;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalNode {
    pub plane: SplitPlane,
    /// Training points that reached this node.
    pub size: usize,
    pub left_size: usize,
    pub right_size: usize,
    /// Arena index of the left child.
    pub left: usize,
    /// Arena index of the right child.
    pub right: usize,
    pub depth: usize,
}

impl InternalNode {
    /// Child index and training count of the side `x` falls on.
    pub fn side(&self, x: &[f64]) -> (usize, usize) {
        if self.plane.goes_right(x) {
            (self.right, self.right_size)
        } else {
            (self.left, self.left_size)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafNode {
    pub size: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Internal(InternalNode),
    Leaf(LeafNode),
}

impl TreeNode {
    pub fn size(&self) -> usize {
        match self {
            TreeNode::Internal(n) => n.size,
            TreeNode::Leaf(l) => l.size,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Internal(n) => n.depth,
            TreeNode::Leaf(l) => l.depth,
        }
    }
}

/// One isolation tree stored as a pre-order node arena; the root is index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    /// Size of the subsample this tree was grown on.
    pub psi: usize,
    pub nodes: Vec<TreeNode>,
}

impl IsolationTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Internal nodes visited by `x` from the root, and the leaf it ends in.
    pub fn path<'a>(&'a self, x: &'a [f64]) -> PathIter<'a> {
        PathIter {
            tree: self,
            x,
            cursor: Some(0),
        }
    }

    pub fn leaf_of(&self, x: &[f64]) -> &LeafNode {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Internal(n) => i = n.side(x).0,
                TreeNode::Leaf(l) => return l,
            }
        }
    }

    /// Path length of `x`: internal nodes traversed plus `c(leaf size)`.
    pub fn depth_h(&self, x: &[f64]) -> f64 {
        let leaf = self.leaf_of(x);
        leaf.depth as f64 + c_factor(leaf.size)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &InternalNode> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Internal(i) => Some(i),
            TreeNode::Leaf(_) => None,
        })
    }

    pub fn max_leaf_depth(&self) -> usize {
        self.nodes.iter().map(TreeNode::depth).max().unwrap_or(0)
    }
}

/// Iterator over the internal nodes on a root-to-leaf path.
pub struct PathIter<'a> {
    tree: &'a IsolationTree,
    x: &'a [f64],
    cursor: Option<usize>,
}

impl<'a> Iterator for PathIter<'a> {
    type Item = &'a InternalNode;

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.cursor?;
        match &self.tree.nodes[i] {
            TreeNode::Internal(n) => {
                self.cursor = Some(n.side(self.x).0);
                Some(n)
            }
            TreeNode::Leaf(_) => {
                self.cursor = None;
                None
            }
        }
    }
}
