mod common;

use cash_forge::dataset::{AttributeKind, Dataset, Value};
use cash_forge::meta_features::{extract, FEATURE_COUNT};
use cash_forge::synthetic::planted_datasets;
use common::{six_row_fixture, SIX_ROW_EXPECTED};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn features(ds: &Dataset) -> Vec<f64> {
    extract::<f64>(ds).as_slice().to_vec()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{what}: f{} = {x}, expected {y}", i + 1);
    }
}

fn rebuild(ds: &Dataset, columns: &[usize], rows: &[usize]) -> Dataset {
    let attributes = columns.iter().map(|&c| ds.attributes()[c].clone()).collect();
    let target = columns.iter().position(|&c| c == ds.target_index()).unwrap();
    let data = rows.iter().map(|&r| columns.iter().map(|&c| ds.value(r, c)).collect()).collect();
    Dataset::new(ds.name(), attributes, target, data).unwrap()
}

#[test]
fn six_row_fixture_matches_hand_computation() {
    let got = features(&six_row_fixture());
    assert_eq!(got.len(), FEATURE_COUNT);
    for (i, (g, e)) in got.iter().zip(SIX_ROW_EXPECTED).enumerate() {
        assert!((g - e).abs() <= 1e-9, "f{}: {g} vs {e}", i + 1);
    }
}

#[test]
fn invariants_hold_on_random_datasets() {
    for (ds, _) in planted_datasets("mf", 50, 17).unwrap() {
        let f = features(&ds);
        for i in [2, 3, 6, 11, 12, 15, 16] {
            assert!((0.0..=1.0).contains(&f[i]), "f{} = {}", i + 1, f[i]);
        }
        assert!(f[3] <= f[2] && f[12] <= f[11] && f[16] <= f[15]);
        assert!(f[0] >= 2.0 && f[4] + f[5] == f[7] && f[8] == ds.n_rows() as f64);
        assert!(f[1] >= 0.0 && f[1] <= f[0].log2() + 1e-12);
        if f[4] >= 1.0 {
            assert!(f[17] <= f[18] && f[19] <= f[20]);
        }
    }
}

#[test]
fn row_permutation_and_duplication() {
    let mut rng = cash_forge::rng::rng_from_seed(3);
    for (ds, _) in planted_datasets("perm", 50, 4).unwrap() {
        let base = features(&ds);
        let cols: Vec<usize> = (0..ds.attributes().len()).collect();
        let mut rows: Vec<usize> = (0..ds.n_rows()).collect();
        rows.shuffle(&mut rng);
        assert_close(&features(&rebuild(&ds, &cols, &rows)), &base, 1e-9, "row permutation");

        let doubled: Vec<usize> = (0..ds.n_rows()).chain(0..ds.n_rows()).collect();
        let mut dup = features(&rebuild(&ds, &cols, &doubled));
        assert_eq!(dup[8], 2.0 * base[8]);
        dup[8] = base[8];
        assert_close(&dup, &base, 1e-9, "duplication");
    }
}

#[test]
fn column_permutation_keeping_categorical_order() {
    let mut rng = cash_forge::rng::rng_from_seed(5);
    for (ds, _) in planted_datasets("cols", 50, 6).unwrap() {
        let base = features(&ds);
        let n = ds.attributes().len();
        // shuffle positions, then put categorical columns back in their original relative order
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let cats: Vec<usize> = (0..n).filter(|&c| ds.attributes()[c].kind == AttributeKind::Categorical && c != ds.target_index()).collect();
        let mut next_cat = cats.iter();
        let columns: Vec<usize> = order.iter().map(|&c| if cats.contains(&c) { *next_cat.next().unwrap() } else { c }).collect();
        let rows: Vec<usize> = (0..ds.n_rows()).collect();
        assert_close(&features(&rebuild(&ds, &columns, &rows)), &base, 1e-9, "column permutation");
    }
}

proptest! {
    #[test]
    fn scaling_a_lone_numeric_attribute(c in -5.0f64..5.0, xs in prop::collection::vec(-10.0f64..10.0, 4..20)) {
        let build = |scale: f64| {
            let rows = xs.iter().enumerate().map(|(i, x)| vec![Value::Num(x * scale), Value::Cat(format!("c{}", i % 2))]).collect();
            Dataset::new("s", vec![
                cash_forge::dataset::Attribute { name: "x".into(), kind: AttributeKind::Numeric },
                cash_forge::dataset::Attribute { name: "y".into(), kind: AttributeKind::Categorical },
            ], 1, rows).unwrap()
        };
        let (a, b) = (features(&build(1.0)), features(&build(c)));
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        prop_assert!((b[17] - c * a[17]).abs() <= tol(c * a[17]));
        prop_assert!((b[18] - c * a[18]).abs() <= tol(c * a[18]));
        prop_assert!((b[19] - c * c * a[19]).abs() <= tol(c * c * a[19]));
        prop_assert!((b[20] - c * c * a[20]).abs() <= tol(c * c * a[20]));
        prop_assert_eq!(b[21], 0.0);
        prop_assert_eq!(b[22], 0.0);
    }
}
