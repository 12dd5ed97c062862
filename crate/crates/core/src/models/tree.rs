//! Regression trees grown best-first on presorted feature orders.
//!
//! Every split rule scores a candidate from the `(count, sum)` statistics of
//! the two children, so one grower serves the forest, the gradient booster and
//! the second-order booster. The grower keeps, per feature, the node's rows in
//! ascending feature order and partitions those lists stably on each split.
//! Rows may appear more than once (bootstrap samples).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Sum-of-squares reduction; leaf value is the mean.
    SquaredError,
    /// Friedman's improvement `n_l n_r / n (mean_l - mean_r)^2`; leaf is the mean.
    FriedmanMse,
    /// Half Poisson deviance reduction; leaf is the mean. Children must have a
    /// positive target sum.
    Poisson,
    /// Second-order gain on gradients with unit hessians and L2 penalty
    /// `lambda`; leaf weight `-G / (H + lambda)` clamped to `max_delta_step`
    /// when that is positive.
    Newton { lambda: f64, max_delta_step: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    n: f64,
    sum: f64,
}

impl SplitRule {
    fn gain(&self, left: Stats, right: Stats, parent: Stats) -> Option<f64> {
        let g = match *self {
            SplitRule::SquaredError => {
                left.sum * left.sum / left.n + right.sum * right.sum / right.n
                    - parent.sum * parent.sum / parent.n
            }
            SplitRule::FriedmanMse => {
                let diff = left.sum / left.n - right.sum / right.n;
                left.n * right.n / parent.n * diff * diff
            }
            SplitRule::Poisson => {
                if left.sum <= 0.0 || right.sum <= 0.0 {
                    return None;
                }
                let term = |s: Stats| s.sum * libm::log(s.sum / s.n);
                term(left) + term(right) - term(parent)
            }
            SplitRule::Newton { lambda, .. } => newton_gain(
                left.sum,
                left.n,
                right.sum,
                right.n,
                lambda,
            ),
        };
        Some(g)
    }

    fn leaf_value(&self, stats: Stats) -> f64 {
        match *self {
            SplitRule::Newton {
                lambda,
                max_delta_step,
            } => newton_weight(stats.sum, stats.n, lambda, max_delta_step),
            _ => stats.sum / stats.n,
        }
    }
}

/// Leaf weight `-G / (H + lambda)`, clamped to `[-max_delta_step, max_delta_step]`
/// when `max_delta_step > 0`.
pub fn newton_weight(grad_sum: f64, hess_sum: f64, lambda: f64, max_delta_step: f64) -> f64 {
    let w = -grad_sum / (hess_sum + lambda);
    if max_delta_step > 0.0 {
        w.clamp(-max_delta_step, max_delta_step)
    } else {
        w
    }
}

/// `1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)]`.
pub fn newton_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64) -> f64 {
    let g = g_left + g_right;
    let h = h_left + h_right;
    0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
        - g * g / (h + lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub max_leaf_nodes: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features drawn (without replacement) at each node; `None` = all.
    pub max_features: Option<usize>,
}

impl Default for GrowParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            max_leaf_nodes: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn scale_leaves(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { value } = node {
                *value *= factor;
            }
        }
    }

    /// Depth of the deepest leaf (0 for a stump-less single leaf).
    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(t, left as usize).max(walk(t, right as usize))
                }
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    n_left: usize,
}

struct Pending {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
    stats: Stats,
    split: Option<SplitChoice>,
}

/// Feature orders of a training matrix, computed once and reused across
/// trees that share the same rows.
#[derive(Debug, Clone)]
pub struct Presorted {
    /// `order[f]` lists row indices by ascending `x[row][f]`.
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let order = (0..x.cols())
            .map(|f| {
                let mut rows: Vec<u32> = (0..x.rows() as u32).collect();
                rows.sort_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)));
                rows
            })
            .collect();
        Self { order }
    }
}

/// Splits accepted while growing, for inspection in tests.
#[derive(Debug, Clone, Default)]
pub struct GrowthLog {
    pub gains: Vec<f64>,
}

pub struct TreeGrower<'a> {
    x: &'a Matrix,
    presorted: &'a Presorted,
}

impl<'a> TreeGrower<'a> {
    pub fn new(x: &'a Matrix, presorted: &'a Presorted) -> Self {
        Self { x, presorted }
    }

    /// Grow one tree on `targets` (indexed by row). `multiplicity[row]` gives
    /// how often each row enters the sample (1 everywhere for no bagging).
    pub fn grow<R: Rng + ?Sized>(
        &self,
        targets: &[f64],
        multiplicity: Option<&[u32]>,
        rule: SplitRule,
        params: &GrowParams,
        rng: &mut R,
        log: Option<&mut GrowthLog>,
    ) -> Tree {
        let p = self.x.cols();
        let mut order: Vec<Vec<u32>> = match multiplicity {
            None => self.presorted.order.clone(),
            Some(m) => self
                .presorted
                .order
                .iter()
                .map(|rows| {
                    rows.iter()
                        .flat_map(|&r| core::iter::repeat_n(r, m[r as usize] as usize))
                        .collect()
                })
                .collect(),
        };
        let m = order.first().map_or_else(
            || match multiplicity {
                None => self.x.rows(),
                Some(mult) => mult.iter().map(|&c| c as usize).sum(),
            },
            Vec::len,
        );
        let mut nodes: Vec<Node> = Vec::new();
        if m == 0 {
            nodes.push(Node::Leaf { value: 0.0 });
            return Tree { nodes };
        }
        let root_stats = match order.first() {
            Some(rows) => stats_of(rows, targets),
            None => {
                // No features: a single leaf over every sampled row.
                let mut s = Stats::default();
                for r in 0..self.x.rows() {
                    let c = multiplicity.map_or(1.0, |mm| f64::from(mm[r]));
                    s.n += c;
                    s.sum += c * targets[r];
                }
                nodes.push(Node::Leaf {
                    value: rule.leaf_value(s),
                });
                return Tree { nodes };
            }
        };

        let mut log = log;
        let mut scratch: Vec<u32> = vec![0; m];
        let mut goes_left: Vec<bool> = vec![false; self.x.rows()];
        let mut features: Vec<usize> = (0..p).collect();

        nodes.push(Node::Leaf { value: 0.0 });
        let mut pending = Vec::new();
        let root_split = self.best_split(&order, 0, m, root_stats, 0, targets, rule, params, &mut features, rng);
        pending.push(Pending {
            node: 0,
            start: 0,
            end: m,
            depth: 0,
            stats: root_stats,
            split: root_split,
        });
        let mut finished: BTreeMap<usize, Stats> = BTreeMap::new();
        let max_leaves = params.max_leaf_nodes.unwrap_or(usize::MAX);
        let mut n_leaves = 1usize;

        loop {
            if n_leaves >= max_leaves {
                break;
            }
            // Highest gain first; equal gains go to the earliest node.
            let mut pick: Option<usize> = None;
            for (k, item) in pending.iter().enumerate() {
                if let Some(s) = item.split {
                    let better = match pick {
                        None => true,
                        Some(b) => {
                            let bs = pending[b].split.unwrap();
                            s.gain > bs.gain || (s.gain == bs.gain && item.node < pending[b].node)
                        }
                    };
                    if better {
                        pick = Some(k);
                    }
                }
            }
            let Some(k) = pick else { break };
            let item = pending.swap_remove(k);
            let split = item.split.unwrap();
            if let Some(log) = log.as_deref_mut() {
                log.gains.push(split.gain);
            }

            for &r in &order[split.feature][item.start..item.end] {
                goes_left[r as usize] = self.x.get(r as usize, split.feature) <= split.threshold;
            }
            for rows in order.iter_mut() {
                let seg = &mut rows[item.start..item.end];
                let mut l = 0;
                let mut rr = 0;
                let right_buf = &mut scratch[..seg.len()];
                for i in 0..seg.len() {
                    let r = seg[i];
                    if goes_left[r as usize] {
                        seg[l] = r;
                        l += 1;
                    } else {
                        right_buf[rr] = r;
                        rr += 1;
                    }
                }
                seg[l..].copy_from_slice(&right_buf[..rr]);
                debug_assert_eq!(l, split.n_left);
            }

            let mid = item.start + split.n_left;
            let left_id = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[item.node] = Node::Split {
                feature: split.feature as u32,
                threshold: split.threshold,
                left: left_id as u32,
                right: left_id as u32 + 1,
            };
            n_leaves += 1;
            for (node, start, end) in [(left_id, item.start, mid), (left_id + 1, mid, item.end)] {
                let stats = stats_of(&order[0][start..end], targets);
                let depth = item.depth + 1;
                let split = self.best_split(&order, start, end, stats, depth, targets, rule, params, &mut features, rng);
                pending.push(Pending {
                    node,
                    start,
                    end,
                    depth,
                    stats,
                    split,
                });
            }
        }
        for item in pending {
            finished.insert(item.node, item.stats);
        }
        for (node, stats) in finished {
            nodes[node] = Node::Leaf {
                value: rule.leaf_value(stats),
            };
        }
        Tree { nodes }
    }

    #[allow(clippy::too_many_arguments)]
    fn best_split<R: Rng + ?Sized>(
        &self,
        order: &[Vec<u32>],
        start: usize,
        end: usize,
        parent: Stats,
        depth: usize,
        targets: &[f64],
        rule: SplitRule,
        params: &GrowParams,
        features: &mut [usize],
        rng: &mut R,
    ) -> Option<SplitChoice> {
        let n = end - start;
        let min_leaf = params.min_samples_leaf.max(1);
        if params.max_depth.is_some_and(|d| depth >= d) || n < 2 * min_leaf {
            return None;
        }
        let p = features.len();
        let k = params.max_features.map_or(p, |k| k.clamp(1, p));
        if k < p {
            for i in 0..p - 1 {
                let j = rng.random_range(i..p);
                features.swap(i, j);
            }
        }
        let mut best: Option<SplitChoice> = None;
        // Past the first `k` draws, keep looking only until some valid split turns up.
        for (drawn, &f) in features.iter().enumerate() {
            if drawn >= k && best.is_some() {
                break;
            }
            let rows = &order[f][start..end];
            let mut left = Stats::default();
            for pos in 0..n - 1 {
                let r = rows[pos] as usize;
                left.n += 1.0;
                left.sum += targets[r];
                let n_left = pos + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let v = self.x.get(r, f);
                let next = self.x.get(rows[pos + 1] as usize, f);
                if !(v < next) {
                    continue;
                }
                let right = Stats {
                    n: parent.n - left.n,
                    sum: parent.sum - left.sum,
                };
                let Some(gain) = rule.gain(left, right, parent) else {
                    continue;
                };
                if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                    let mut threshold = v + (next - v) / 2.0;
                    if !(threshold < next) {
                        threshold = v;
                    }
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        gain,
                        n_left,
                    });
                }
            }
        }
        if k < p {
            features.sort_unstable();
        }
        best
    }
}

fn stats_of(rows: &[u32], targets: &[f64]) -> Stats {
    let mut s = Stats::default();
    for &r in rows {
        s.n += 1.0;
        s.sum += targets[r as usize];
    }
    s
}
