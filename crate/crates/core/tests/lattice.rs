use proptest::prelude::*;

use trispec::lattice::r2_count;
use trispec::{TorusConfig, TwistedTorus};

fn tori() -> Vec<TwistedTorus> {
    vec![TwistedTorus::identity(), TwistedTorus::hexagonal(), TwistedTorus::skew()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shells_are_complete_and_symmetric(level in 0u64..400) {
        for t in tori() {
            let sh = t.shell(level);
            prop_assert!(sh.points.iter().all(|&n| t.level(n) == level));
            prop_assert!(sh.is_symmetric());
            prop_assert!(sh.points.windows(2).all(|w| w[0] < w[1]));
            let (b1, b2) = t.form().bounding_box(level);
            let brute = (-b1..=b1)
                .flat_map(|a| (-b2..=b2).map(move |b| [a, b]))
                .filter(|&n| t.level(n) == level)
                .count();
            prop_assert_eq!(brute, sh.len());
        }
    }

    #[test]
    fn eigenvalue_is_gamma_times_level(n1 in -30i64..30, n2 in -30i64..30) {
        for t in tori() {
            let lam = t.eigenvalue([n1, n2]);
            let want = t.gamma_f64() * t.level([n1, n2]) as f64;
            prop_assert!((lam - want).abs() <= 1e-12 * (1.0 + want));
            let m = t.dual_f64([n1, n2]);
            let direct = 4.0 * std::f64::consts::PI.powi(2) * (m[0] * m[0] + m[1] * m[1]);
            prop_assert!((direct - lam).abs() <= 1e-10 * (1.0 + lam));
            prop_assert!((t.eigenvalue_exact([n1, n2]).to_f64() - lam).abs() <= 1e-12 * (1.0 + lam));
        }
    }

    #[test]
    fn square_shells_match_r2(n in 1u64..5000) {
        prop_assert_eq!(TwistedTorus::identity().shell(n).len() as u64, r2_count(n));
    }
}

#[test]
fn enumeration_agrees_with_shells() {
    for t in tori() {
        for sh in t.enumerate_levels(150) {
            assert_eq!(sh.points, t.shell(sh.level).points, "{} level {}", t.name(), sh.level);
        }
    }
}

#[test]
fn lowest_levels_are_ordered() {
    let t = TwistedTorus::hexagonal();
    let idx = t.lowest_levels(6);
    let levels: Vec<u64> = idx.iter().map(|&n| t.level(n)).collect();
    assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    let mut distinct = levels.clone();
    distinct.dedup();
    assert_eq!(distinct, vec![0, 1, 3, 4, 7, 9]);
}

#[test]
fn config_round_trip() {
    for t in tori() {
        let json = serde_json::to_string(&TorusConfig::from(&t)).unwrap();
        let back = TorusConfig::from_json(&json).unwrap().build().unwrap();
        assert_eq!(back.matrix(), t.matrix());
        assert_eq!(back.gamma_coeff(), t.gamma_coeff());
    }
    assert!(TorusConfig::from_json(r#"{"A": [["1","sqrt(2)"],["0","1"]]}"#).unwrap().build().is_err());
    assert!(TorusConfig::from_json(r#"{"A": [["1","2"],["2","4"]]}"#).unwrap().build().is_err());
    assert!(TorusConfig::from_json(r#"{"A": [["0","1"],["1","0"]]}"#).unwrap().build().is_err());
}
