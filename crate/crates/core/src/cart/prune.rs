//! Weakest-link pruning and cross-validated one-SE subtree choice.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{grow_tree, RegressionTree, TreeError, TreeNode};
use crate::dataset::FeatureMatrix;
use crate::rng::{self, stream};
use crate::{exec, math};

/// One subtree of the nested pruning sequence and the complexity penalty at
/// which it becomes optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneStep {
    pub alpha: f64,
    pub tree: RegressionTree,
}

/// Weakest-link sequence from the full tree down to the root leaf, with
/// nondecreasing `alpha`. The first entry is the unpruned tree at `alpha = 0`.
pub fn cost_complexity_path(tree: &RegressionTree) -> Vec<PruneStep> {
    let mut steps = alloc::vec![PruneStep {
        alpha: 0.0,
        tree: tree.clone(),
    }];
    let mut current = tree.clone();
    while !current.root.is_leaf() {
        let g_min = weakest_link(&current.root);
        let cut = g_min + 1e-10 * g_min.abs().max(f64::MIN_POSITIVE);
        collapse_below(&mut current.root, cut);
        let alpha = g_min.max(0.0).max(steps.last().map_or(0.0, |s| s.alpha));
        steps.push(PruneStep {
            alpha,
            tree: current.clone(),
        });
    }
    steps
}

/// Per-leaf deviance improvement `(R(t) − R(T_t)) / (|T_t| − 1)` of a branch.
fn link_strength(node: &TreeNode) -> f64 {
    (node.deviance() - node.leaf_deviance()) / (node.n_leaves() - 1) as f64
}

fn weakest_link(node: &TreeNode) -> f64 {
    match node {
        TreeNode::Leaf { .. } => f64::INFINITY,
        TreeNode::Internal { left, right, .. } => link_strength(node)
            .min(weakest_link(left))
            .min(weakest_link(right)),
    }
}

fn collapse_below(node: &mut TreeNode, cut: f64) {
    if node.is_leaf() {
        return;
    }
    if link_strength(node) <= cut {
        node.collapse();
        return;
    }
    if let TreeNode::Internal { left, right, .. } = node {
        collapse_below(left, cut);
        collapse_below(right, cut);
    }
}

/// Cross-validation summary for one subtree of the pruning sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpRow {
    pub alpha: f64,
    /// `alpha` relative to the root deviance.
    pub cp: f64,
    pub n_leaves: usize,
    /// Mean held-out squared error.
    pub xerror: f64,
    /// Standard error of `xerror`.
    pub xstd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneResult {
    pub tree: RegressionTree,
    pub cp_selected: f64,
    pub table: Vec<CpRow>,
    pub selected: usize,
}

/// Select the smallest subtree whose cross-validated error is within one
/// standard error of the minimum. `x` must be the training matrix.
pub fn prune_one_se(
    tree: &RegressionTree,
    x: &FeatureMatrix,
    folds: usize,
    seed: u64,
) -> Result<PruneResult, TreeError> {
    x.check_columns(&tree.column_names)?;
    if folds < 2 {
        return Err(TreeError::InvalidConfig("pruning needs at least 2 folds".into()));
    }
    let n = x.n_rows();
    if n < folds {
        return Err(TreeError::InsufficientRows { rows: n, folds });
    }
    let path = cost_complexity_path(tree);
    let root_dev = tree.root.deviance();
    let cp_of = |alpha: f64| if root_dev > 0.0 { alpha / root_dev } else { 0.0 };
    if path.len() == 1 {
        return Ok(PruneResult {
            tree: tree.clone(),
            cp_selected: tree.config.cp,
            table: alloc::vec![CpRow {
                alpha: 0.0,
                cp: tree.config.cp,
                n_leaves: 1,
                xerror: f64::NAN,
                xstd: f64::NAN,
            }],
            selected: 0,
        });
    }

    // Representative penalty per interval: geometric midpoint of its ends.
    let reps: Vec<f64> = (0..path.len())
        .map(|k| match path.get(k + 1) {
            Some(next) => math::sqrt(path[k].alpha * next.alpha),
            None => f64::INFINITY,
        })
        .collect();

    let mut rng = rng::stream_rng(seed, stream::PRUNE_CV);
    let fold_rows = rng::balanced_folds(&mut rng, n, folds);
    let y = x.response();
    let per_fold: Vec<Vec<(usize, Vec<f64>)>> = exec::map_indexed(folds, |f| {
        let held = &fold_rows[f];
        let train: Vec<usize> = (0..n).filter(|i| held.binary_search(i).is_err()).collect();
        let fold_tree = grow_tree(&x.select_rows(&train), &tree.config);
        let fold_path = cost_complexity_path(&fold_tree);
        let chosen: Vec<&RegressionTree> = reps
            .iter()
            .map(|&beta| {
                let j = fold_path.iter().rposition(|s| s.alpha <= beta).unwrap_or(0);
                &fold_path[j].tree
            })
            .collect();
        held.iter()
            .map(|&i| {
                let errs = chosen
                    .iter()
                    .map(|t| {
                        let e = y[i] - t.predict_row(x.row(i));
                        e * e
                    })
                    .collect();
                (i, errs)
            })
            .collect()
    });
    let mut errors: Vec<Vec<f64>> = alloc::vec![Vec::new(); path.len()];
    let mut by_row: Vec<(usize, Vec<f64>)> = per_fold.into_iter().flatten().collect();
    by_row.sort_by_key(|(i, _)| *i);
    for (_, errs) in by_row {
        for (k, e) in errs.into_iter().enumerate() {
            errors[k].push(e);
        }
    }
    let table: Vec<CpRow> = path
        .iter()
        .zip(&errors)
        .map(|(step, e)| CpRow {
            alpha: step.alpha,
            cp: cp_of(step.alpha),
            n_leaves: step.tree.n_leaves(),
            xerror: math::mean(e),
            xstd: math::sample_sd(e) / math::sqrt(n as f64),
        })
        .collect();

    let mut best = 0;
    for (k, row) in table.iter().enumerate() {
        if row.xerror < table[best].xerror {
            best = k;
        }
    }
    let limit = table[best].xerror + table[best].xstd;
    let selected = (0..table.len())
        .rev()
        .find(|&k| table[k].xerror <= limit)
        .unwrap_or(best);
    let mut chosen = path[selected].tree.clone();
    let cp_selected = table[selected].cp.max(tree.config.cp);
    chosen.config.cp = cp_selected;
    Ok(PruneResult {
        tree: chosen,
        cp_selected,
        table,
        selected,
    })
}
