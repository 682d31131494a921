use dynapool::fusion_eval::{multi_fuse, pair_fuse, product_fuse, recognition_rate, ScoreVector};
use proptest::prelude::*;

fn sv(v: Vec<f64>) -> ScoreVector {
    ScoreVector::new(v).unwrap()
}

fn scores(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..10.0, n)
}

#[test]
fn worked_pair_example() {
    let f = pair_fuse(&sv(vec![0.6, 0.4]), &sv(vec![0.8, 0.2])).unwrap();
    assert!((f.scores.as_slice()[0] - 6.0 / 7.0).abs() < 1e-15);
    assert!((f.scores.as_slice()[1] - 1.0 / 7.0).abs() < 1e-15);
}

#[test]
fn disjoint_support_is_degenerate() {
    let f = pair_fuse(&sv(vec![1.0, 0.0]), &sv(vec![0.0, 1.0])).unwrap();
    assert!(f.degenerate);
    assert_eq!(f.scores.as_slice(), &[0.5, 0.5]);
}

#[test]
fn ties_go_to_the_lowest_class() {
    let u = sv(vec![0.25; 4]);
    let (p, _) = multi_fuse("t", &u, &u, &u).unwrap();
    assert_eq!(p.predicted_label, 0);
    assert_eq!(p.confidence, 0.25);
}

#[test]
fn length_mismatch_is_an_error() {
    assert!(pair_fuse(&sv(vec![0.5, 0.5]), &sv(vec![1.0])).is_err());
    assert!(ScoreVector::new(vec![0.5, -0.1]).is_err());
    assert!(ScoreVector::new(vec![f64::NAN]).is_err());
}

#[test]
fn single_class_rate_is_one() {
    let r = recognition_rate(&[0; 7], &[0; 7], Some(1)).unwrap();
    assert_eq!(r.recognition_rate, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_fuse_commutes(a in scores(5), b in scores(5)) {
        let (a, b) = (sv(a), sv(b));
        prop_assert_eq!(pair_fuse(&a, &b).unwrap(), pair_fuse(&b, &a).unwrap());
    }

    #[test]
    fn unnormalized_product_associates(a in scores(4), b in scores(4), c in scores(4)) {
        let (a, b, c) = (sv(a), sv(b), sv(c));
        let left = product_fuse(&[&pair_fuse(&a, &b).unwrap().scores, &c]).unwrap();
        let right = product_fuse(&[&a, &pair_fuse(&b, &c).unwrap().scores]).unwrap();
        let flat = product_fuse(&[&a, &b, &c]).unwrap();
        prop_assert_eq!(left.degenerate, flat.degenerate);
        prop_assert_eq!(right.degenerate, flat.degenerate);
        for i in 0..4 {
            prop_assert!((left.scores.as_slice()[i] - flat.scores.as_slice()[i]).abs() < 1e-12);
            prop_assert!((right.scores.as_slice()[i] - flat.scores.as_slice()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn output_is_a_distribution(a in scores(6), b in scores(6), c in scores(6)) {
        let (_, f) = multi_fuse("p", &sv(a), &sv(b), &sv(c)).unwrap();
        let s: f64 = f.scores.as_slice().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
        prop_assert!(f.scores.as_slice().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn scaling_an_input_keeps_the_label(a in scores(5), b in scores(5), c in scores(5), k in 1e-3f64..1e3) {
        let (p, _) = multi_fuse("p", &sv(a.clone()), &sv(b.clone()), &sv(c.clone())).unwrap();
        let a2 = sv(a.iter().map(|x| x * k).collect());
        let (q, _) = multi_fuse("p", &a2, &sv(b), &sv(c)).unwrap();
        prop_assert_eq!(p.predicted_label, q.predicted_label);
    }

    #[test]
    fn rate_matches_counting(pairs in proptest::collection::vec((0usize..6, 0usize..6), 1..100)) {
        let (pred, truth): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let hits = pairs.iter().filter(|(p, t)| p == t).count();
        let r = recognition_rate(&pred, &truth, Some(6)).unwrap();
        prop_assert_eq!(r.correct, hits);
        prop_assert_eq!(r.recognition_rate, hits as f64 / pairs.len() as f64);
        for c in &r.per_class {
            let n = truth.iter().filter(|&&t| t == c.class).count();
            prop_assert_eq!(c.n, n);
        }
    }
}
