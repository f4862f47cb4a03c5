//! Single regression trees: exhaustive squared-error splits, cost-complexity
//! pruning and one-standard-error subtree selection.

mod grow;
mod prune;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetError, FeatureMatrix};
use crate::math;

pub use grow::{best_split, grow_tree, SplitCandidate};
pub(crate) use grow::{all_rows, grow_rows, GrowParams};
pub use prune::{cost_complexity_path, prune_one_se, CpRow, PruneResult, PruneStep};

#[derive(Debug, thiserror::Error)]
pub enum TreeError {
    #[error("invalid tree config: {0}")]
    InvalidConfig(String),
    #[error("{rows} rows cannot fill {folds} folds")]
    InsufficientRows { rows: usize, folds: usize },
    #[error(transparent)]
    Data(#[from] DatasetError),
}

/// Stopping rules for a single tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub min_split: usize,
    pub min_leaf: usize,
    pub cp: f64,
    pub max_depth: Option<usize>,
    /// Leaf budget; growth is best-first when set.
    pub max_leaves: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_split: 10,
            min_leaf: 5,
            cp: 0.01,
            max_depth: None,
            max_leaves: None,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.min_leaf < 1 {
            return Err(TreeError::InvalidConfig("min_leaf must be at least 1".into()));
        }
        if self.min_split < 2 * self.min_leaf {
            return Err(TreeError::InvalidConfig(format!(
                "min_split {} is below 2 x min_leaf {}",
                self.min_split, self.min_leaf
            )));
        }
        if !(self.cp >= 0.0 && self.cp.is_finite()) {
            return Err(TreeError::InvalidConfig(format!("cp must be >= 0, got {}", self.cp)));
        }
        if self.max_leaves == Some(0) {
            return Err(TreeError::InvalidConfig("max_leaves must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        prediction: f64,
        n_node: usize,
        deviance: f64,
    },
    Internal {
        split_col: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        /// Mean response of the node before splitting.
        prediction: f64,
        n_node: usize,
        deviance: f64,
        gain: f64,
    },
}

impl TreeNode {
    pub fn prediction(&self) -> f64 {
        match self {
            TreeNode::Leaf { prediction, .. } | TreeNode::Internal { prediction, .. } => *prediction,
        }
    }

    pub fn n_node(&self) -> usize {
        match self {
            TreeNode::Leaf { n_node, .. } | TreeNode::Internal { n_node, .. } => *n_node,
        }
    }

    pub fn deviance(&self) -> f64 {
        match self {
            TreeNode::Leaf { deviance, .. } | TreeNode::Internal { deviance, .. } => *deviance,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Sum of leaf deviances below this node.
    pub fn leaf_deviance(&self) -> f64 {
        match self {
            TreeNode::Leaf { deviance, .. } => *deviance,
            TreeNode::Internal { left, right, .. } => left.leaf_deviance() + right.leaf_deviance(),
        }
    }

    fn route(&self, row: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Internal {
            split_col,
            threshold,
            left,
            right,
            ..
        } = node
        {
            node = if row[*split_col] <= *threshold { left } else { right };
        }
        node
    }

    fn collapse(&mut self) {
        if let TreeNode::Internal {
            prediction,
            n_node,
            deviance,
            ..
        } = *self
        {
            *self = TreeNode::Leaf {
                prediction,
                n_node,
                deviance,
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: TreeNode,
    pub column_names: Vec<String>,
    pub config: TreeConfig,
}

impl RegressionTree {
    /// Tree size, counted in leaves.
    pub fn n_leaves(&self) -> usize {
        self.root.n_leaves()
    }

    pub fn n_splits(&self) -> usize {
        self.n_leaves() - 1
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Prediction for a single row, without column checks.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.root.route(row).prediction()
    }

    /// Leaf values in left-to-right order.
    pub fn leaf_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each_leaf(|n| out.push(n.prediction()));
        out
    }

    fn for_each_leaf(&self, mut f: impl FnMut(&TreeNode)) {
        fn walk(n: &TreeNode, f: &mut dyn FnMut(&TreeNode)) {
            match n {
                TreeNode::Leaf { .. } => f(n),
                TreeNode::Internal { left, right, .. } => {
                    walk(left, f);
                    walk(right, f);
                }
            }
        }
        walk(&self.root, &mut f);
    }

    /// Index of the leaf (left-to-right order) a row lands in.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut node = &self.root;
        let mut offset = 0;
        while let TreeNode::Internal {
            split_col,
            threshold,
            left,
            right,
            ..
        } = node
        {
            if row[*split_col] <= *threshold {
                node = left;
            } else {
                offset += left.n_leaves();
                node = right;
            }
        }
        offset
    }

    /// Replace leaf values, visited left to right.
    pub fn map_leaves(&mut self, mut f: impl FnMut(usize, f64) -> f64) {
        fn walk(n: &mut TreeNode, idx: &mut usize, f: &mut dyn FnMut(usize, f64) -> f64) {
            match n {
                TreeNode::Leaf { prediction, .. } => {
                    *prediction = f(*idx, *prediction);
                    *idx += 1;
                }
                TreeNode::Internal { left, right, .. } => {
                    walk(left, idx, f);
                    walk(right, idx, f);
                }
            }
        }
        let mut idx = 0;
        walk(&mut self.root, &mut idx, &mut f);
    }

    /// Total split gain per column.
    pub fn split_gains(&self, n_cols: usize) -> Vec<f64> {
        fn walk(n: &TreeNode, out: &mut [f64]) {
            if let TreeNode::Internal {
                split_col,
                left,
                right,
                gain,
                ..
            } = n
            {
                out[*split_col] += *gain;
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = alloc::vec![0.0; n_cols];
        walk(&self.root, &mut out);
        out
    }

    /// Text rendering, one node per line, indented by depth.
    pub fn render(&self) -> String {
        fn walk(n: &TreeNode, names: &[String], label: &str, id: usize, depth: usize, out: &mut String) {
            let indent = "  ".repeat(depth);
            let star = if n.is_leaf() { " *" } else { "" };
            let _ = writeln!(
                out,
                "{indent}{id}) {label} {} {:.4} {:.4}{star}",
                n.n_node(),
                n.deviance(),
                n.prediction()
            );
            if let TreeNode::Internal {
                split_col,
                threshold,
                left,
                right,
                ..
            } = n
            {
                let name = names.get(*split_col).map(String::as_str).unwrap_or("?");
                walk(left, names, &format!("{name}<={threshold:.6}"), 2 * id, depth + 1, out);
                walk(right, names, &format!("{name}>{threshold:.6}"), 2 * id + 1, depth + 1, out);
            }
        }
        let mut out = String::from("node), split, n, deviance, yval\n      * denotes terminal node\n\n");
        walk(&self.root, &self.column_names, "root", 1, 0, &mut out);
        out
    }
}

/// Sum of squared deviations from the mean.
pub fn node_deviance(y: &[f64]) -> f64 {
    math::sum_sq_dev(y)
}

/// Predictions for every row of `x`; `≤ threshold` goes left.
pub fn predict_tree(tree: &RegressionTree, x: &FeatureMatrix) -> Result<Vec<f64>, TreeError> {
    x.check_columns(&tree.column_names)?;
    Ok((0..x.n_rows()).map(|i| tree.predict_row(x.row(i))).collect())
}

/// Deviance of a fitted tree on `x`, via the Gaussian working likelihood, and
/// the raw residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeDeviance {
    pub deviance: f64,
    pub rss: f64,
}

pub fn tree_deviance_lr(tree: &RegressionTree, x: &FeatureMatrix) -> Result<TreeDeviance, TreeError> {
    let fitted = predict_tree(tree, x)?;
    let y = x.response();
    let half_ln_2pi = 0.5 * math::ln(2.0 * core::f64::consts::PI);
    let gaussian = |mu: f64, yi: f64| -0.5 * (yi - mu) * (yi - mu) - half_ln_2pi;
    let l_sat = math::fsum(y.iter().map(|&yi| gaussian(yi, yi)));
    let l_fit = math::fsum(y.iter().zip(&fitted).map(|(&yi, &mu)| gaussian(mu, yi)));
    let rss = math::fsum(y.iter().zip(&fitted).map(|(&yi, &mu)| (yi - mu) * (yi - mu)));
    Ok(TreeDeviance {
        deviance: 2.0 * (l_sat - l_fit),
        rss,
    })
}
