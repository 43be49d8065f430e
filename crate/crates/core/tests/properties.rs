use std::cmp::Ordering;

use permuton_lab_core::coalescent::*;
use permuton_lab_core::gentree::{perm_to_walk, walk_to_perm, ExactSampler, Rule};
use permuton_lab_core::limit_sim::Simulator;
use permuton_lab_core::perm::{is_semi_baxter, is_strong_baxter, pattern, standardize, Family, Permutation};
use permuton_lab_core::seed;
use permuton_lab_core::walks::{params, Step, StepDistribution};
use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::Rng;

fn perm_strategy(max: usize) -> impl Strategy<Value = Permutation> {
    (1..=max)
        .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Strong), Just(Family::Semi)]
}

/// Unconditioned steps of a family; the process does not need the quadrant.
fn random_process(family: Family, n: usize, seed_: u64) -> CoalescentProcess {
    let sim = Simulator::new(family);
    let mut rng = seed::rng(seed_);
    let steps: Vec<Step> = (1..n).map(|_| sim.step(&mut rng)).collect();
    CoalescentProcess::from_steps(family, steps).unwrap()
}

proptest! {
    #[test]
    fn standardize_is_idempotent(s in perm_strategy(12)) {
        prop_assert_eq!(standardize(s.values()).unwrap(), s.clone());
        let shifted: Vec<i64> = s.values().iter().map(|&v| 3 * v as i64 - 100).collect();
        prop_assert_eq!(standardize(&shifted).unwrap(), s);
    }

    #[test]
    fn patterns_compose(s in perm_strategy(12), mask in any::<u16>(), inner in any::<u16>()) {
        let idx: Vec<usize> = (0..s.len()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!idx.is_empty());
        let sub: Vec<usize> = (0..idx.len()).filter(|j| inner >> j & 1 == 1).collect();
        prop_assume!(!sub.is_empty());
        let outer = pattern(&s, &idx).unwrap();
        let composed: Vec<usize> = sub.iter().map(|&j| idx[j]).collect();
        prop_assert_eq!(pattern(&outer, &sub).unwrap(), pattern(&s, &composed).unwrap());
    }

    #[test]
    fn strong_is_inside_semi(s in perm_strategy(9)) {
        if is_strong_baxter(&s) {
            prop_assert!(is_semi_baxter(&s));
        }
    }

    #[test]
    fn classes_are_closed_under_prefixes(s in perm_strategy(9), m in 1usize..=9) {
        let m = m.min(s.len());
        let pre = s.prefix(m);
        for f in Family::ALL {
            if f.class().contains(&s) {
                prop_assert!(f.class().contains(&pre));
            }
        }
    }

    #[test]
    fn walks_round_trip(f in family_strategy(), n in 1usize..40, seed_ in any::<u64>()) {
        let sampler = ExactSampler::new(Rule::from(f), n).unwrap();
        let path = sampler.sample(&mut seed::rng(seed_));
        let s = walk_to_perm(&path, f).unwrap();
        prop_assert!(f.class().contains(&s));
        prop_assert_eq!(perm_to_walk(&s, f).unwrap(), path);
    }

    #[test]
    fn order_is_the_permutation_order(f in family_strategy(), n in 1usize..50, seed_ in any::<u64>()) {
        let p = random_process(f, n, seed_);
        let s = cp(&p);
        let v = s.values();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(order_relation(&p, i, j), v[i].cmp(&v[j]));
            }
        }
    }

    #[test]
    fn subset_patterns_match(f in family_strategy(), n in 1usize..=40, seed_ in any::<u64>(), pick in subsequence((0..40usize).collect::<Vec<_>>(), 1..8)) {
        let p = random_process(f, n, seed_);
        let idx: Vec<usize> = pick.into_iter().filter(|&i| i < n).collect();
        prop_assume!(!idx.is_empty());
        prop_assert_eq!(pattern_from_subset(&p, &idx).unwrap(), pattern(&cp(&p), &idx).unwrap());
    }
}

#[test]
fn order_is_total_on_triples() {
    for f in Family::ALL {
        for r in 0..20 {
            let n = 30;
            let p = random_process(f, n, r);
            for i in 0..n {
                for j in 0..n {
                    let ij = order_relation(&p, i, j);
                    assert_eq!(ij.reverse(), order_relation(&p, j, i));
                    assert_eq!(ij == Ordering::Equal, i == j);
                    for k in 0..n {
                        if ij == Ordering::Less && order_relation(&p, j, k) == Ordering::Less {
                            assert_eq!(order_relation(&p, i, k), Ordering::Less);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn pairs_read_off_one_value() {
    let two_one = Permutation::new(vec![2, 1]).unwrap();
    for f in Family::ALL {
        let p = random_process(f, 60, 4);
        for i in 0..60 {
            for j in i + 1..60 {
                let z = p.value(i, j);
                let got = pattern_from_subset(&p, &[i, j]).unwrap();
                assert_eq!(got == two_one, z >= 0);
                if f == Family::Semi {
                    // Semi trajectories never come back to 0.
                    assert_eq!(got == two_one, z > 0);
                }
            }
        }
    }
}

#[test]
fn update_forms_agree() {
    let mut rng = seed::rng(5);
    for f in Family::ALL {
        let sim = Simulator::new(f);
        for _ in 0..1_000_000 {
            let z: i64 = rng.gen_range(-40..=40);
            let s = sim.step(&mut rng);
            let cases = match f {
                Family::Strong => update_strong_cases(z, s),
                Family::Semi => update_semi_cases(z, s),
            };
            let direct = match f {
                Family::Strong => update_strong(z, s),
                Family::Semi => update_semi(z, s),
            };
            assert_eq!(cases, Some(direct), "{f} z={z} step={s:?}");
        }
    }
    assert_eq!(update_strong_cases(0, (1, 1)), None);
    assert_eq!(update_semi_cases(0, (0, 0)), None);
}

#[test]
fn coupling_is_monotone_and_merges_stick() {
    for f in Family::ALL {
        for r in 0..4 {
            let n = 500;
            let p = random_process(f, n, 100 + r);
            let cols: Vec<Vec<i64>> = (0..n).map(|s| p.column(s)).collect();
            for s in 1..n - 1 {
                let (a, b) = (&cols[s], &cols[s + 1]);
                for t in 0..=s {
                    for u in t + 1..=s {
                        if a[t] == a[u] {
                            assert_eq!(b[t], b[u]);
                        }
                        if a[t] < a[u] {
                            assert!(b[t] <= b[u]);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn coalescent_levels() {
    for f in Family::ALL {
        assert!(coalescent_point_levels(&random_process(f, 1, 0)).is_empty());
        for r in 0..10 {
            let p = random_process(f, 500, r);
            let levels = coalescent_point_levels(&p);
            assert!(!levels.is_empty());
            match f {
                Family::Strong => assert!(levels.iter().all(|&v| v == 0 || v == -1)),
                Family::Semi => assert!(levels.iter().all(|&v| v == 1)),
            }
        }
    }
}

#[test]
fn commute_on_uniform_walks_of_size_50() {
    for f in Family::ALL {
        let sampler = ExactSampler::new(Rule::from(f), 50).unwrap();
        let mut rng = seed::rng(6);
        for _ in 0..10_000 {
            let path = sampler.sample(&mut rng);
            assert!(check_commute(&path, f).unwrap());
        }
    }
}

#[test]
fn large_processes_use_the_front() {
    for f in Family::ALL {
        let p = random_process(f, MATERIALIZE_MAX + 500, 7);
        assert!(!p.is_materialized());
        let s = cp(&p);
        let t = random_process(f, 300, 7);
        assert!(t.is_materialized());
        // The lazy path and the triangle agree where both exist.
        assert_eq!(cp_from_steps(f, t.steps()), cp(&t));
        assert_eq!(s.len(), MATERIALIZE_MAX + 500);
        for j in [0, 1, 100, 2100] {
            assert_eq!(p.column(j).len(), j + 1);
        }
    }
}

#[test]
fn step_moments_by_simulation() {
    for f in Family::ALL {
        let d = StepDistribution::for_family(f);
        let pr = params(f);
        let mut rng = seed::rng(8);
        let n = 1_000_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y) = d.sample(&mut rng);
            let (x, y) = (x as f64, y as f64);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let (mx, my) = (sx / nf, sy / nf);
        let (vx, vy, c) = (sxx / nf - mx * mx, syy / nf - my * my, sxy / nf - mx * my);
        assert!(mx.abs() < 5.0 * (pr.sigma2 / nf).sqrt(), "{f} mean x {mx}");
        assert!(my.abs() < 5.0 * (pr.sigma2_prime / nf).sqrt(), "{f} mean y {my}");
        assert!((vx / pr.sigma2 - 1.0).abs() < 0.03, "{f} var x {vx}");
        assert!((vy / pr.sigma2_prime - 1.0).abs() < 0.03, "{f} var y {vy}");
        assert!((c / pr.cov - 1.0).abs() < 0.05, "{f} cov {c}");
    }
}
