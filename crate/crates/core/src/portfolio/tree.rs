use rand::seq::index::sample;
use rand::Rng;

use super::encode::{majority, Encoded, FeatureKind};
use super::Classifier;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Test {
    /// Numeric `x <= threshold`.
    Le(f64),
    /// Categorical `x == level`.
    Eq(f64),
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        test: Test,
        yes: Box<Node>,
        no: Box<Node>,
    },
}

/// CART classification tree with Gini impurity; categorical attributes split one level against the rest.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    root: Node,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Best {
    impurity: f64,
    feature: usize,
    test: Test,
}

fn best_split(data: &Encoded, idx: &[usize], features: &[usize]) -> Option<Best> {
    let k = data.n_classes;
    let n = idx.len();
    let mut total = vec![0usize; k];
    for &i in idx {
        total[data.labels[i]] += 1;
    }
    let parent = gini(&total, n);
    let mut best: Option<Best> = None;
    let mut consider = |imp: f64, feature: usize, test: Test| {
        if imp < parent - 1e-12 && best.as_ref().map_or(true, |b| imp < b.impurity - 1e-15) {
            best = Some(Best { impurity: imp, feature, test });
        }
    };
    for &f in features {
        match data.kinds[f] {
            FeatureKind::Numeric => {
                let mut order: Vec<usize> = idx.to_vec();
                order.sort_by(|&a, &b| data.rows[a][f].total_cmp(&data.rows[b][f]));
                let mut left = vec![0usize; k];
                for p in 0..n - 1 {
                    left[data.labels[order[p]]] += 1;
                    let (x, next) = (data.rows[order[p]][f], data.rows[order[p + 1]][f]);
                    if x == next {
                        continue;
                    }
                    let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                    let nl = p + 1;
                    let imp = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
                    consider(imp, f, Test::Le(x + (next - x) / 2.0));
                }
            }
            FeatureKind::Categorical { levels } => {
                let mut by_level = vec![vec![0usize; k]; levels];
                for &i in idx {
                    by_level[data.rows[i][f] as usize][data.labels[i]] += 1;
                }
                for (level, yes) in by_level.iter().enumerate() {
                    let ny: usize = yes.iter().sum();
                    if ny == 0 || ny == n {
                        continue;
                    }
                    let no: Vec<usize> = total.iter().zip(yes).map(|(t, y)| t - y).collect();
                    let imp = (ny as f64 * gini(yes, ny) + (n - ny) as f64 * gini(&no, n - ny)) / n as f64;
                    consider(imp, f, Test::Eq(level as f64));
                }
            }
        }
    }
    best
}

fn passes(test: Test, x: f64) -> bool {
    match test {
        Test::Le(t) => x <= t,
        Test::Eq(l) => x == l,
    }
}

fn grow(data: &Encoded, idx: Vec<usize>, depth: usize, params: &TreeParams, rng: &mut impl Rng) -> Node {
    let mut counts = vec![0usize; data.n_classes];
    for &i in &idx {
        counts[data.labels[i]] += 1;
    }
    let leaf = majority(&counts);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || idx.len() < params.min_samples_split {
        return Node::Leaf(leaf);
    }
    let d = data.n_features();
    let features: Vec<usize> = match params.max_features {
        Some(m) if m < d => {
            let mut f = sample(rng, d, m.max(1)).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..d).collect(),
    };
    let Some(split) = best_split(data, &idx, &features) else {
        return Node::Leaf(leaf);
    };
    let (yes, no): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| passes(split.test, data.rows[i][split.feature]));
    Node::Split {
        feature: split.feature,
        test: split.test,
        yes: Box::new(grow(data, yes, depth + 1, params, rng)),
        no: Box::new(grow(data, no, depth + 1, params, rng)),
    }
}

impl DecisionTree {
    pub fn fit(data: &Encoded, params: &TreeParams, rng: &mut impl Rng) -> Self {
        Self::fit_rows(data, (0..data.n_rows()).collect(), params, rng)
    }

    /// Fits on the given row indices (repeats allowed, as in a bootstrap sample).
    pub fn fit_rows(data: &Encoded, rows: Vec<usize>, params: &TreeParams, rng: &mut impl Rng) -> Self {
        DecisionTree {
            root: grow(data, rows, 0, params, rng),
        }
    }

    pub fn depth(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { yes, no, .. } => 1 + go(yes).max(go(no)),
            }
        }
        go(&self.root)
    }
}

impl Classifier for DecisionTree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Split { feature, test, yes, no } => {
                    node = if passes(*test, row[*feature]) { yes } else { no };
                }
            }
        }
    }
}

/// Bagged trees with per-split feature subsampling; majority vote, ties to the lowest class.
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn fit(data: &Encoded, n_trees: usize, params: &TreeParams, rng: &mut impl Rng) -> Self {
        let n = data.n_rows();
        let trees = (0..n_trees)
            .map(|_| {
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                DecisionTree::fit_rows(data, rows, params, rng)
            })
            .collect();
        RandomForest {
            trees,
            n_classes: data.n_classes,
        }
    }
}

impl Classifier for RandomForest {
    fn predict(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        majority(&votes)
    }
}
