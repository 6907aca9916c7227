//! The 23 dataset meta-features used to describe a classification task.
//!
//! | id | meaning |
//! |----|---------|
//! | f1 | number of target classes |
//! | f2 | entropy (bits) of the target |
//! | f3, f4 | largest / smallest class proportion |
//! | f5, f6 | numeric / categorical common-attribute counts |
//! | f7 | numeric proportion of the common attributes |
//! | f8, f9 | common-attribute count n, record count m |
//! | f10–f13 | level count, entropy, max and min level proportion of the categorical attribute with the fewest levels |
//! | f14–f17 | the same for the categorical attribute with the most levels |
//! | f18, f19 | min / max of the numeric attribute means |
//! | f20, f21 | min / max of the numeric attribute variances |
//! | f22, f23 | variance of the means / of the variances |
//!
//! The target is never a common attribute. Variances are population
//! variances. Groups that do not exist (no categorical or no numeric common
//! attribute) yield zeros; ties between equally-sized categorical attributes
//! go to the lowest column index.

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FEATURE_COUNT: usize = 23;

/// `"f1"` .. `"f23"`.
pub fn feature_name(index: usize) -> String {
    format!("f{}", index + 1)
}

/// Parses `"f7"` into index 6.
pub fn parse_feature(name: &str) -> Result<usize> {
    name.strip_prefix('f')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| (1..=FEATURE_COUNT).contains(n))
        .map(|n| n - 1)
        .ok_or_else(|| Error::range("feature", name, "f1..f23"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct MetaFeatureVector<T: Scalar> {
    values: [T; FEATURE_COUNT],
}

impl<T: Scalar> MetaFeatureVector<T> {
    pub fn from_array(values: [T; FEATURE_COUNT]) -> Self {
        MetaFeatureVector { values }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// Feature by 1-based id, so `get(7)` is f7.
    pub fn get(&self, id: usize) -> T {
        self.values[id - 1]
    }

    /// Values at the given 0-based indices.
    pub fn select(&self, indices: &[usize]) -> Vec<T> {
        indices.iter().map(|&i| self.values[i]).collect()
    }
}

impl<T: Scalar> std::ops::Index<usize> for MetaFeatureVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

fn entropy_bits<T: Scalar>(counts: &[usize], total: usize) -> T {
    let m = T::from_count(total);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::from_count(c) / m;
            -p * p.log2()
        })
        .sum()
}

fn mean_var<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    (mean, var)
}

fn fold_min<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::infinity(), T::min)
}

fn fold_max<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::neg_infinity(), T::max)
}

/// (level count, entropy, max proportion, min proportion) of one categorical column.
fn categorical_stats<T: Scalar>(counts: &[usize], m: usize) -> [T; 4] {
    let mt = T::from_count(m);
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    [
        T::from_count(counts.len()),
        entropy_bits(counts, m),
        T::from_count(max) / mt,
        T::from_count(min) / mt,
    ]
}

/// Computes the full meta-feature vector of a dataset.
pub fn extract<T: Scalar>(dataset: &Dataset) -> MetaFeatureVector<T> {
    let zero = T::zero();
    let mut f = [zero; FEATURE_COUNT];
    let m = dataset.n_rows();
    let mt = T::from_count(m);

    let class_counts = dataset.class_counts();
    f[0] = T::from_count(class_counts.len());
    f[1] = entropy_bits(&class_counts, m);
    f[2] = T::from_count(*class_counts.iter().max().unwrap()) / mt;
    f[3] = T::from_count(*class_counts.iter().min().unwrap()) / mt;

    // Per-attribute statistics over the common attributes, in column order.
    let mut categorical: Vec<Vec<usize>> = Vec::new();
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for i in dataset.common_indices() {
        match dataset.column(i) {
            Column::Numeric(xs) => {
                let xs: Vec<T> = xs.iter().map(|&x| T::lit(x)).collect();
                let (mean, var) = mean_var(&xs);
                means.push(mean);
                vars.push(var);
            }
            col @ Column::Categorical { .. } => categorical.push(col.level_counts().unwrap()),
        }
    }
    let n_numeric = means.len();
    let n = n_numeric + categorical.len();
    f[4] = T::from_count(n_numeric);
    f[5] = T::from_count(categorical.len());
    f[6] = if n == 0 { zero } else { T::from_count(n_numeric) / T::from_count(n) };
    f[7] = T::from_count(n);
    f[8] = mt;

    if !categorical.is_empty() {
        // first index wins ties
        let fewest = categorical
            .iter()
            .enumerate()
            .min_by_key(|(i, c)| (c.len(), *i))
            .map(|(i, _)| i)
            .unwrap();
        let most = categorical
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap();
        f[9..13].copy_from_slice(&categorical_stats::<T>(&categorical[fewest], m));
        f[13..17].copy_from_slice(&categorical_stats::<T>(&categorical[most], m));
    }

    if n_numeric > 0 {
        f[17] = fold_min(&means);
        f[18] = fold_max(&means);
        f[19] = fold_min(&vars);
        f[20] = fold_max(&vars);
        f[21] = mean_var(&means).1;
        f[22] = mean_var(&vars).1;
    }

    MetaFeatureVector { values: f }
}
