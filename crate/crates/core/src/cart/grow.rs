//! Split search and tree growth.
//!
//! Rows are pre-sorted once per column; each node keeps its rows in that
//! order for every column, so a split scan is linear in the node size.
//! Growth is best-first: the frontier leaf with the largest gain is expanded
//! next, which lets a global leaf budget be enforced deterministically.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{RegressionTree, TreeConfig, TreeNode};
use crate::dataset::FeatureMatrix;
use crate::math;

/// A candidate split: rows with `x[col] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub col: usize,
    pub threshold: f64,
    /// Deviance reduction `D(parent) − D(left) − D(right)`.
    pub gain: f64,
}

/// Relative tolerance under which two gains count as tied.
const TIE_RTOL: f64 = 1e-12;

/// `true` when `gain` beats `best` by more than the tie tolerance.
#[inline]
pub(crate) fn strictly_better(gain: f64, best: f64) -> bool {
    gain > best + TIE_RTOL * gain.abs().max(best.abs())
}

/// Midpoint of two consecutive distinct sorted values, kept strictly below `hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = 0.5 * (lo + hi);
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Node statistics: count, mean and deviance, independent of row order.
pub(crate) fn node_stats(y: &[f64], rows: &[u32]) -> (usize, f64, f64) {
    let n = rows.len();
    let mean = math::fsum(rows.iter().map(|&r| y[r as usize])) / n as f64;
    let dev = math::fsum(rows.iter().map(|&r| {
        let d = y[r as usize] - mean;
        d * d
    }));
    (n, mean, dev)
}

/// Best split of one column given the node's rows sorted by that column.
fn scan_column(
    x: &FeatureMatrix,
    y: &[f64],
    sorted: &[u32],
    col: usize,
    center: f64,
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let n = sorted.len();
    let total: f64 = sorted.iter().map(|&r| y[r as usize] - center).sum();
    let base = total * total / n as f64;
    let mut left = 0.0;
    let mut best: Option<SplitCandidate> = None;
    for k in 0..n - 1 {
        let r = sorted[k] as usize;
        left += y[r] - center;
        let n_left = k + 1;
        let n_right = n - n_left;
        if n_left < min_leaf {
            continue;
        }
        if n_right < min_leaf {
            break;
        }
        let lo = x.get(r, col);
        let hi = x.get(sorted[k + 1] as usize, col);
        if !(lo < hi) {
            continue;
        }
        let right = total - left;
        let gain = left * left / n_left as f64 + right * right / n_right as f64 - base;
        if best.is_none_or(|b| strictly_better(gain, b.gain)) {
            best = Some(SplitCandidate {
                col,
                threshold: midpoint(lo, hi),
                gain,
            });
        }
    }
    best
}

fn best_over_columns(
    x: &FeatureMatrix,
    y: &[f64],
    sorted: &[Vec<u32>],
    allowed: &[usize],
    center: f64,
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let mut cols = allowed.to_vec();
    cols.sort_unstable();
    cols.dedup();
    let mut best: Option<SplitCandidate> = None;
    for col in cols {
        if let Some(c) = scan_column(x, y, &sorted[col], col, center, min_leaf) {
            if best.is_none_or(|b| strictly_better(c.gain, b.gain)) {
                best = Some(c);
            }
        }
    }
    best
}

fn sorted_by_column(x: &FeatureMatrix, rows: &[u32], col: usize) -> Vec<u32> {
    let mut v = rows.to_vec();
    v.sort_by(|&a, &b| {
        x.get(a as usize, col)
            .total_cmp(&x.get(b as usize, col))
            .then(a.cmp(&b))
    });
    v
}

/// Best split over `allowed_cols` for the rows in `rows` (duplicates allowed),
/// using the matrix response. Ties in gain go to the lower column index, then
/// the lower threshold. `None` when no split leaves `min_leaf` rows on both
/// sides with positive gain, or when the node is smaller than `min_split`.
pub fn best_split(
    x: &FeatureMatrix,
    rows: &[usize],
    allowed_cols: &[usize],
    cfg: &TreeConfig,
) -> Option<SplitCandidate> {
    if rows.len() < cfg.min_split.max(2) {
        return None;
    }
    let rows: Vec<u32> = rows.iter().map(|&r| r as u32).collect();
    let y = x.response();
    let (_, mean, _) = node_stats(y, &rows);
    let sorted: Vec<Vec<u32>> = (0..x.n_cols())
        .map(|c| {
            if allowed_cols.contains(&c) {
                sorted_by_column(x, &rows, c)
            } else {
                Vec::new()
            }
        })
        .collect();
    best_over_columns(x, y, &sorted, allowed_cols, mean, cfg.min_leaf.max(1))
        .filter(|c| c.gain > 0.0)
}

/// Stopping rules for the growth engine.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub min_split: usize,
    pub min_leaf: usize,
    /// A split is kept only if its gain exceeds `cp · D(root)`.
    pub cp: f64,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
}

impl From<&TreeConfig> for GrowParams {
    fn from(c: &TreeConfig) -> Self {
        GrowParams {
            min_split: c.min_split,
            min_leaf: c.min_leaf,
            cp: c.cp,
            max_depth: c.max_depth,
            max_leaves: c.max_leaves,
        }
    }
}

struct BuildNode {
    sorted: Vec<Vec<u32>>,
    depth: usize,
    n: usize,
    mean: f64,
    deviance: f64,
    candidate: Option<SplitCandidate>,
    children: Option<(usize, usize)>,
}

/// Grow a tree on `rows` of `x` against `y`. `allowed_cols` is called once per
/// node, in node-creation order, to pick the columns that node may split on.
pub(crate) fn grow_rows(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[u32],
    params: &GrowParams,
    allowed_cols: &mut dyn FnMut() -> Vec<usize>,
) -> TreeNode {
    assert!(!rows.is_empty(), "cannot grow a tree on zero rows");
    let p = x.n_cols();
    let min_leaf = params.min_leaf.max(1);
    let min_split = params.min_split.max(2 * min_leaf).max(2);
    let root_sorted: Vec<Vec<u32>> = (0..p).map(|c| sorted_by_column(x, rows, c)).collect();
    let (n, mean, deviance) = node_stats(y, rows);
    let min_gain = (params.cp * deviance).max(0.0);

    let mut nodes: Vec<BuildNode> = Vec::new();
    let mut evaluate = |sorted: Vec<Vec<u32>>, depth: usize, n: usize, mean: f64, deviance: f64| {
        let splittable = n >= min_split
            && deviance > 0.0
            && params.max_depth.is_none_or(|d| depth < d);
        let candidate = if splittable {
            let allowed = allowed_cols();
            best_over_columns(x, y, &sorted, &allowed, mean, min_leaf)
                .filter(|c| c.gain > min_gain && c.gain > 0.0)
        } else {
            None
        };
        BuildNode {
            sorted,
            depth,
            n,
            mean,
            deviance,
            candidate,
            children: None,
        }
    };
    nodes.push(evaluate(root_sorted, 0, n, mean, deviance));

    let mut leaves = 1usize;
    loop {
        if params.max_leaves.is_some_and(|m| leaves >= m) {
            break;
        }
        // Frontier leaf with the largest gain; ties go to the earliest node.
        let mut pick: Option<usize> = None;
        for (id, node) in nodes.iter().enumerate() {
            if node.children.is_some() {
                continue;
            }
            if let Some(c) = node.candidate {
                if pick.is_none_or(|b| strictly_better(c.gain, nodes[b].candidate.unwrap().gain)) {
                    pick = Some(id);
                }
            }
        }
        let Some(id) = pick else { break };
        let cand = nodes[id].candidate.unwrap();
        let sorted = core::mem::take(&mut nodes[id].sorted);
        let mut left_sorted = Vec::with_capacity(p);
        let mut right_sorted = Vec::with_capacity(p);
        for col_rows in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = col_rows
                .into_iter()
                .partition(|&row| x.get(row as usize, cand.col) <= cand.threshold);
            left_sorted.push(l);
            right_sorted.push(r);
        }
        let depth = nodes[id].depth + 1;
        let (ln, lmean, ldev) = node_stats(y, &left_sorted[0]);
        let (rn, rmean, rdev) = node_stats(y, &right_sorted[0]);
        let left = evaluate(left_sorted, depth, ln, lmean, ldev);
        let right = evaluate(right_sorted, depth, rn, rmean, rdev);
        let li = nodes.len();
        nodes.push(left);
        nodes.push(right);
        nodes[id].children = Some((li, li + 1));
        leaves += 1;
    }
    into_tree(&nodes, 0)
}

fn into_tree(nodes: &[BuildNode], id: usize) -> TreeNode {
    let node = &nodes[id];
    match (node.children, node.candidate) {
        (Some((l, r)), Some(c)) => {
            let gain = node.deviance - nodes[l].deviance - nodes[r].deviance;
            TreeNode::Internal {
                split_col: c.col,
                threshold: c.threshold,
                left: Box::new(into_tree(nodes, l)),
                right: Box::new(into_tree(nodes, r)),
                prediction: node.mean,
                n_node: node.n,
                deviance: node.deviance,
                gain,
            }
        }
        _ => TreeNode::Leaf {
            prediction: node.mean,
            n_node: node.n,
            deviance: node.deviance,
        },
    }
}

/// Grow a regression tree on every row of `x`.
pub fn grow_tree(x: &FeatureMatrix, cfg: &TreeConfig) -> RegressionTree {
    let rows: Vec<u32> = (0..x.n_rows() as u32).collect();
    let all: Vec<usize> = (0..x.n_cols()).collect();
    let root = grow_rows(x, x.response(), &rows, &GrowParams::from(cfg), &mut || all.clone());
    RegressionTree {
        root,
        column_names: x.column_names().to_vec(),
        config: *cfg,
    }
}

/// Rows of `x` as `u32` indices, for callers of [`grow_rows`].
pub(crate) fn all_rows(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}
