//! Regression trees: histogram split search and leaf-wise growth.
//!
//! Gradients are quantized to integers before accumulation (see
//! [`Gradients`]) so histogram sums are exact. Split gains therefore do
//! not depend on row order, thread count, or whether a histogram was built
//! directly or by subtracting a sibling from its parent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gbdt::bins::BinnedData;
use crate::gbdt::params::GbdtParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        /// Rows with a regular bin `<= threshold` go left.
        threshold: u16,
        /// Direction taken by missing values.
        default_left: bool,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        /// Training rows (of the bag) that reached this leaf.
        count: usize,
    },
}

/// A regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Follows bins from the root to a leaf. `bin_of(feature)` returns the
    /// row's bin and whether it is the missing bin.
    pub fn route(&self, bin_of: impl Fn(usize) -> (u16, bool)) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let (bin, missing) = bin_of(*feature);
                    let go_left = if missing {
                        *default_left
                    } else {
                        bin <= *threshold
                    };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_binned(&self, data: &BinnedData, row: usize) -> f64 {
        self.route(|f| {
            let b = data.columns[f][row];
            (b, b == data.missing_bin(f))
        })
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Depth of the deepest leaf; a lone root leaf has depth 0.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, count } => Some((*value, *count)),
            _ => None,
        })
    }
}

/// Gradients as fixed-point integers: `q = round(g · 2^k)` with `k` chosen
/// so the largest |g| uses about 52 bits. Sums are exact in `i128`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub quantized: Vec<i64>,
    pub scale: f64,
}

impl Gradients {
    pub fn new(grads: &[f64]) -> Gradients {
        let max_abs = grads.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let exp = if max_abs > 0.0 {
            (52 - max_abs.log2().ceil() as i32).clamp(-1000, 1000)
        } else {
            0
        };
        let scale = 2f64.powi(exp);
        Gradients {
            quantized: grads.iter().map(|g| (g * scale).round() as i64).collect(),
            scale,
        }
    }

    pub fn to_f64(&self, sum: i128) -> f64 {
        sum as f64 / self.scale
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct BinStat {
    grad: i128,
    count: u32,
}

/// Histograms of the allowed features for one leaf.
#[derive(Debug, Clone)]
struct Histogram {
    per_feature: Vec<Vec<BinStat>>,
}

impl Histogram {
    fn build(data: &BinnedData, rows: &[u32], grads: &Gradients, allowed: &[usize]) -> Histogram {
        let per_feature = allowed
            .par_iter()
            .map(|&f| {
                let mut h = vec![BinStat::default(); data.num_bins[f] + 1];
                let col = &data.columns[f];
                for &r in rows {
                    let s = &mut h[col[r as usize] as usize];
                    s.grad += grads.quantized[r as usize] as i128;
                    s.count += 1;
                }
                h
            })
            .collect();
        Histogram { per_feature }
    }

    fn subtract(&self, other: &Histogram) -> Histogram {
        Histogram {
            per_feature: self
                .per_feature
                .iter()
                .zip(&other.per_feature)
                .map(|(a, b)| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| BinStat {
                            grad: x.grad - y.grad,
                            count: x.count - y.count,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// A chosen split of one leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: u16,
    pub default_left: bool,
    pub gain: f64,
    pub left_count: usize,
    pub right_count: usize,
}

fn leaf_score(grad: f64, count: u32, lambda: f64) -> f64 {
    grad * grad / (count as f64 + lambda)
}

/// Best threshold for one feature's histogram, scanning thresholds upward
/// and trying missing rows on each side (left first). Only strictly larger
/// gains replace the incumbent.
fn best_for_feature(
    feature: usize,
    hist: &[BinStat],
    grads: &Gradients,
    parent_score: f64,
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    let min_rows = params.min_leaf_rows() as u32;
    let lambda = params.lambda_l2;
    let (regular, missing) = hist.split_at(hist.len() - 1);
    let missing = missing[0];
    let total = regular.iter().fold(BinStat::default(), |acc, s| BinStat {
        grad: acc.grad + s.grad,
        count: acc.count + s.count,
    });

    let mut best: Option<SplitCandidate> = None;
    let mut left = BinStat::default();
    for (t, s) in regular.iter().enumerate() {
        left.grad += s.grad;
        left.count += s.count;
        let right = BinStat {
            grad: total.grad - left.grad,
            count: total.count - left.count,
        };
        let directions: &[bool] = if missing.count > 0 {
            &[true, false]
        } else {
            &[true]
        };
        for &default_left in directions {
            let (l, r) = if default_left {
                (
                    BinStat {
                        grad: left.grad + missing.grad,
                        count: left.count + missing.count,
                    },
                    right,
                )
            } else {
                (
                    left,
                    BinStat {
                        grad: right.grad + missing.grad,
                        count: right.count + missing.count,
                    },
                )
            };
            if l.count < min_rows || r.count < min_rows {
                continue;
            }
            let gain = leaf_score(grads.to_f64(l.grad), l.count, lambda)
                + leaf_score(grads.to_f64(r.grad), r.count, lambda)
                - parent_score;
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: t as u16,
                    default_left,
                    gain,
                    left_count: l.count as usize,
                    right_count: r.count as usize,
                });
            }
        }
    }
    best
}

fn best_split(
    hist: &Histogram,
    allowed: &[usize],
    grads: &Gradients,
    sum: i128,
    count: usize,
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    if count < 2 * params.min_leaf_rows() {
        return None;
    }
    let parent_score = leaf_score(grads.to_f64(sum), count as u32, params.lambda_l2);
    let per_feature: Vec<Option<SplitCandidate>> = allowed
        .par_iter()
        .zip(&hist.per_feature)
        .map(|(&f, h)| best_for_feature(f, h, grads, parent_score, params))
        .collect();
    // allowed is ascending, so the first strict maximum is the lowest feature
    per_feature
        .into_iter()
        .flatten()
        .fold(None, |best: Option<SplitCandidate>, c| match best {
            Some(b) if c.gain <= b.gain => Some(b),
            _ => Some(c),
        })
}

/// Best split of the rows `rows` given per-row gradients (prediction minus
/// target, unit curvature), considering only `allowed` features.
///
/// Gain is `G_L²/(H_L+λ) + G_R²/(H_R+λ) − G_P²/(H_P+λ)` with `H` the row
/// count. Returns `None` when the leaf is too small or no split has
/// positive gain. Ties go to the lowest feature, then the lowest threshold
/// bin, then missing-left.
pub fn find_best_split(
    data: &BinnedData,
    rows: &[u32],
    gradients: &[f64],
    allowed: &[usize],
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    let mut allowed = allowed.to_vec();
    allowed.sort_unstable();
    allowed.dedup();
    let grads = Gradients::new(gradients);
    let hist = Histogram::build(data, rows, &grads, &allowed);
    let sum = rows
        .iter()
        .map(|&r| grads.quantized[r as usize] as i128)
        .sum();
    best_split(&hist, &allowed, &grads, sum, rows.len(), params)
}

struct LeafState {
    node: usize,
    depth: usize,
    rows: Vec<u32>,
    sum: i128,
    hist: Histogram,
    split: Option<SplitCandidate>,
}

/// Grows one tree leaf-wise over the bagged `rows`: repeatedly splits the
/// leaf with the largest gain (earliest-created on ties) until
/// `num_leaves` leaves exist or no leaf can split. Leaf values are
/// `−G/(H+λ)` scaled by the learning rate.
pub fn grow_tree(
    data: &BinnedData,
    rows: Vec<u32>,
    grads: &Gradients,
    allowed: &[usize],
    params: &GbdtParams,
) -> Tree {
    let sum_of = |rows: &[u32]| -> i128 {
        rows.iter()
            .map(|&r| grads.quantized[r as usize] as i128)
            .sum()
    };
    let make_leaf = |node, depth, rows: Vec<u32>, hist: Histogram| {
        let sum = sum_of(&rows);
        let split = if params.depth_allows_split(depth) {
            best_split(&hist, allowed, grads, sum, rows.len(), params)
        } else {
            None
        };
        LeafState {
            node,
            depth,
            rows,
            sum,
            hist,
            split,
        }
    };

    let mut nodes = vec![Node::Leaf {
        value: 0.0,
        count: 0,
    }];
    let root_hist = Histogram::build(data, &rows, grads, allowed);
    let mut leaves = vec![make_leaf(0, 0, rows, root_hist)];

    while leaves.len() < params.num_leaves {
        let mut pick: Option<usize> = None;
        for (i, leaf) in leaves.iter().enumerate() {
            if let Some(s) = leaf.split {
                if pick.is_none_or(|p| s.gain > leaves[p].split.unwrap().gain) {
                    pick = Some(i);
                }
            }
        }
        let Some(i) = pick else { break };
        let split = leaves[i].split.unwrap();
        let parent = &leaves[i];

        let col = &data.columns[split.feature];
        let missing = data.missing_bin(split.feature);
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = parent.rows.iter().partition(|&&r| {
            let b = col[r as usize];
            if b == missing {
                split.default_left
            } else {
                b <= split.threshold
            }
        });
        debug_assert_eq!(left_rows.len(), split.left_count);
        debug_assert_eq!(right_rows.len(), split.right_count);

        let (left_hist, right_hist) = if left_rows.len() <= right_rows.len() {
            let small = Histogram::build(data, &left_rows, grads, allowed);
            let large = parent.hist.subtract(&small);
            (small, large)
        } else {
            let small = Histogram::build(data, &right_rows, grads, allowed);
            let large = parent.hist.subtract(&small);
            (large, small)
        };

        let depth = parent.depth + 1;
        let left_node = nodes.len();
        let right_node = left_node + 1;
        nodes[parent.node] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            default_left: split.default_left,
            gain: split.gain,
            left: left_node,
            right: right_node,
        };
        nodes.push(Node::Leaf {
            value: 0.0,
            count: 0,
        });
        nodes.push(Node::Leaf {
            value: 0.0,
            count: 0,
        });

        let left = make_leaf(left_node, depth, left_rows, left_hist);
        let right = make_leaf(right_node, depth, right_rows, right_hist);
        leaves[i] = left;
        leaves.push(right);
    }

    for leaf in &leaves {
        assert!(
            leaf.rows.len() >= params.min_leaf_rows(),
            "leaf with {} rows violates min_data_in_leaf {}",
            leaf.rows.len(),
            params.min_leaf_rows()
        );
        let g = grads.to_f64(leaf.sum);
        nodes[leaf.node] = Node::Leaf {
            value: -g / (leaf.rows.len() as f64 + params.lambda_l2) * params.learning_rate,
            count: leaf.rows.len(),
        };
    }
    Tree { nodes }
}
