use std::collections::HashMap;

use proptest::prelude::*;

use hebb_constraints::oracle::{enumerate_with, fixed_point_scan, Classification, EnumerationConfig, WaitingTimes};
use hebb_constraints::Execution;

/// Without leak the waiting times do not matter: the potential after `a`
/// spikes on the first channel and `b` on the second is `a w1 + b w2`, and
/// each spike is equally likely to come from either channel.
fn exact_p1(w1: f64, threshold: f64, max_len: usize) -> (f64, f64) {
    fn go(a: usize, b: usize, w: [f64; 2], th: f64, left: usize, memo: &mut HashMap<(usize, usize), (f64, f64)>) -> (f64, f64) {
        if let Some(&r) = memo.get(&(a, b)) {
            return r;
        }
        let v = a as f64 * w[0] + b as f64 * w[1];
        let mut hit = 0.0;
        let mut crossed = 0.0;
        if left > 0 {
            for c in 0..2 {
                let next = if c == 0 { v + w[0] } else { v + w[1] };
                if next >= th {
                    crossed += 0.5;
                    hit += if c == 0 { 0.5 } else { 0.0 };
                } else {
                    let (h, x) = go(a + (c == 0) as usize, b + (c == 1) as usize, w, th, left - 1, memo);
                    hit += 0.5 * h;
                    crossed += 0.5 * x;
                }
            }
        }
        memo.insert((a, b), (hit, crossed));
        (hit, crossed)
    }
    // Memo keys are unique per (a, b) because a + b fixes the depth.
    go(0, 0, [w1, 1.0 - w1], threshold, max_len, &mut HashMap::new())
}

#[test]
fn recursion_sanity() {
    let (h, x) = exact_p1(0.5, 0.94, 13);
    assert_eq!((h, x), (0.5, 1.0));
    let (h, x) = exact_p1(0.55, 0.94, 13);
    assert!((h / x - 0.625).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_equals_recursion_without_leak(w1 in 0.08f64..0.92, seed in 0u64..1000) {
        let table = WaitingTimes::sample(13, 1.8, seed);
        let e = enumerate_with(&table, w1, 0.94, 0.0, 1e-3).unwrap();
        let (hit, crossed) = exact_p1(w1, 0.94, 13);
        prop_assert_eq!(e.untruncated, 0);
        prop_assert!((crossed - 1.0).abs() < 1e-12);
        prop_assert!((e.p1 - hit).abs() < 1e-12, "{} vs {}", e.p1, hit);
    }

    #[test]
    fn mirror_symmetry_without_leak(w1 in 0.08f64..0.92) {
        let table = WaitingTimes::sample(13, 1.8, 3);
        let a = enumerate_with(&table, w1, 0.94, 0.0, 1e-3).unwrap().p1;
        let b = enumerate_with(&table, 1.0 - w1, 0.94, 0.0, 1e-3).unwrap().p1;
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn no_leak_fixed_points() {
    let scan = fixed_point_scan(&EnumerationConfig::default(), 2001, Execution::Parallel).unwrap();
    let upper: Vec<_> = scan.crossings.iter().filter(|c| c.w1 >= 0.5).collect();
    let near = |w: f64, class: Classification| upper.iter().any(|c| (c.w1 - w).abs() < 1e-3 && c.classification == class);
    assert!(near(0.625, Classification::Stable), "{upper:?}");
    assert!(near(0.6870, Classification::Unstable), "{upper:?}");
    assert!(near(1.0, Classification::Absorbing), "{upper:?}");
    let (hit, _) = exact_p1(0.6875, 0.94, 13);
    assert!((hit - 0.6875).abs() < 1e-12);
    assert_eq!(scan.monotonicity_violation(), 0.0);
}

#[test]
fn two_point_grid_is_endpoints() {
    let scan = fixed_point_scan(&EnumerationConfig { tolerance: 0.5, ..Default::default() }, 2, Execution::Sequential);
    let scan = scan.unwrap();
    assert_eq!(scan.curve.len(), 2);
    assert!(scan.crossings.iter().all(|c| c.classification == Classification::Absorbing));
    assert_eq!(scan.crossings.len(), 2);
}
