use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trispec::propagator::{
    evolve, evolve_triangle, forced_profile_grid, strichartz_check, time_l2_profile, time_l2_profile_grid, SourcePiece,
    SourceTerm,
};
use trispec::triangle::lowest_modes;
use trispec::{BoundaryCondition, SpectralField, TriangleField, TwistedTorus};

fn torus(k: u8) -> Arc<TwistedTorus> {
    Arc::new(match k % 3 {
        0 => TwistedTorus::identity(),
        1 => TwistedTorus::hexagonal(),
        _ => TwistedTorus::skew(),
    })
}

fn field(t: &Arc<TwistedTorus>, seed: u64, terms: usize) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<_> = t.enumerate_levels(40).into_iter().flat_map(|s| s.points).collect();
    let support: Vec<_> = pool.choose_multiple(&mut rng, terms).copied().collect();
    SpectralField::random_on(t.clone(), &support, &mut rng)
}

fn source(t: &Arc<TwistedTorus>, seed: u64) -> SourceTerm<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p = t.period();
    let a = rng.random_range(0.0..0.5 * p);
    let b = rng.random_range(a..p);
    SourceTerm::new(vec![
        SourcePiece { start: 0.0, end: a, field: field(t, seed + 1, 3) },
        SourcePiece { start: b, end: p, field: field(t, seed + 2, 2) },
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_flow_is_unitary(k in 0u8..3, seed in any::<u64>(), t in -5.0f64..5.0) {
        let tor = torus(k);
        let u = field(&tor, seed, 6);
        let v = evolve(&u, t, None).unwrap();
        prop_assert!((v.norm_sq() - u.norm_sq()).abs() < 1e-13);
    }

    #[test]
    fn group_law(k in 0u8..3, seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let tor = torus(k);
        let u = field(&tor, seed, 6);
        let a = evolve(&evolve(&u, s, None).unwrap(), t, None).unwrap();
        let b = evolve(&u, s + t, None).unwrap();
        prop_assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn duhamel_is_linear(k in 0u8..3, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let tor = torus(k);
        let u = field(&tor, seed, 4);
        let f = source(&tor, seed);
        let t = frac * tor.period();
        let full = evolve(&u, t, Some(&f)).unwrap();
        let free = evolve(&u, t, None).unwrap();
        let forced = evolve(&SpectralField::zero(tor.clone()), t, Some(&f)).unwrap();
        prop_assert!(full.max_diff(&free.plus(&forced).unwrap()) < 1e-10);
    }

    #[test]
    fn strichartz_bound_holds(k in 0u8..3, seed in any::<u64>(), forced in any::<bool>()) {
        let tor = torus(k);
        let u = field(&tor, seed, 5);
        let f = forced.then(|| source(&tor, seed));
        let c = strichartz_check(&u, f.as_ref()).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }
}

/// Composite Simpson in time at a fixed point, against the shell formula.
#[test]
fn profile_matches_time_quadrature() {
    for k in 0..3 {
        let tor = torus(k);
        let u = field(&tor, 40 + k as u64, 6);
        let prof = time_l2_profile(&u);
        let period = tor.period();
        let steps = 4000;
        let h = period / steps as f64;
        for x in [[0.1, 0.2], [0.37, 0.81], [0.9, 0.05]] {
            let at = |t: f64| evolve(&u, t, None).unwrap().eval(x).norm_sqr();
            let mut s = at(0.0) + at(period);
            for i in 1..steps {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * at(i as f64 * h);
            }
            let simpson = s * h / 3.0;
            assert!((simpson - prof(x)).abs() < 1e-7 * prof(x).max(1.0), "{simpson} {}", prof(x));
        }
    }
}

#[test]
fn forced_profile_reduces_to_free_profile() {
    let tor = torus(1);
    let u = field(&tor, 3, 5);
    let m = 4 * u.max_abs_index() as usize + 1;
    let a = time_l2_profile_grid(&u, m);
    let b = forced_profile_grid(&u, None, tor.period(), m).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
    }
}

#[test]
fn triangle_flow_matches_torus_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        let f = TriangleField::new(
            bc,
            lowest_modes(bc, 5).iter().map(|m| (m.class, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))),
        )
        .unwrap();
        let t = 0.37;
        let a = trispec::tiling::extend_hex(&evolve_triangle(&f, t, None).unwrap());
        let b = evolve(&trispec::tiling::extend_hex(&f), t, None).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
    }
}

#[test]
fn sources_must_be_ordered() {
    let tor = torus(0);
    let piece = |s, e| SourcePiece { start: s, end: e, field: field(&tor, 1, 1) };
    assert!(SourceTerm::new(vec![piece(0.5, 0.2)]).is_err());
    assert!(SourceTerm::new(vec![piece(0.0, 0.5), piece(0.4, 0.6)]).is_err());
    assert!(SourceTerm::new(vec![piece(0.0, 0.5), piece(0.5, 0.6)]).is_ok());
}
