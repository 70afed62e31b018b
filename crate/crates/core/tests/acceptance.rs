//! Acceptance criteria 1-9. Each prints one PASS/FAIL line with the measured
//! quantities and the runtime. The test then asserts that the set of failing
//! criteria is exactly the documented one, so any regression (or an
//! unexpected pass) fails the run. Runs without the libtest harness so the
//! lines are always shown.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use trispec::observability::{
    gramian, max_wavenumber, observability_profile, triangle_torus_transfer_check, Basis, ObservabilityProblem, Sampling,
    TorusPreset, TrianglePreset,
};
use trispec::propagator::{
    evolve, strichartz_check, triangle_constant_identity, triangle_strichartz_check, SourcePiece, SourceTerm,
};
use trispec::quadrature::TriangleRule;
use trispec::reduction::{conjugation_constants, q0_for_periodicity, verify_conjugated_flow};
use trispec::resonance::{l4_fourth_power, lemma_exhaustiveness, sharpness_sequence, zygmund_check};
use trispec::tiling::{group, intertwining_check, lp_identity, symmetry_defect};
use trispec::triangle::{lowest_modes, modes_up_to, mode_admissibility, Admissibility, TriangleMode};
use trispec::{BoundaryCondition, SpectralField, TriangleField, TwistedTorus};

/// Criteria known to fail; the analysis is in the README.
const EXPECTED_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(n: u32, limit_s: u64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(limit_s);
    let pass = out.pass && in_time;
    println!(
        "criterion {n}: {} ({:.2} s, limit {limit_s} s) {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        out.detail
    );
    pass
}

fn gauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_field(torus: &Arc<TwistedTorus>, max_level: u64, terms: usize, rng: &mut ChaCha8Rng) -> SpectralField {
    let pool: Vec<_> = torus.enumerate_levels(max_level).into_iter().flat_map(|s| s.points).collect();
    let support: Vec<_> = pool.choose_multiple(rng, terms).copied().collect();
    SpectralField::random_on(torus.clone(), &support, rng)
}

fn random_triangle_field(bc: BoundaryCondition, levels: usize, rng: &mut ChaCha8Rng) -> TriangleField {
    let modes = lowest_modes(bc, levels);
    let k = rng.random_range(1..=modes.len().min(5));
    let pick: Vec<_> = modes.choose_multiple(rng, k).map(|m| (m.class, gauss(rng))).collect();
    TriangleField::new(bc, pick).unwrap()
}

fn criterion_1() -> Outcome {
    let rows = sharpness_sequence(6, Some(2));
    let mut ok = true;
    for r in &rows {
        let n = r.n as f64;
        let closed = 3.0 - 3.0 / (4.0 * (n + 1.0));
        ok &= r.verified
            && r.shell_size == 4 * (r.n as u64 + 1)
            && (r.fourth_power_f64 - closed).abs() <= 1e-12
            && r.quadruple_count == r.closed_form_count
            && (r.n > 2 || r.brute_count == Some(r.quadruple_count));
    }
    let last = rows.last().unwrap();
    Outcome {
        pass: ok,
        detail: format!(
            "n=0..6 shell sizes {:?}; n=6 fourth power {} (exact), {} quadruples",
            rows.iter().map(|r| r.shell_size).collect::<Vec<_>>(),
            last.fourth_power,
            last.quadruple_count
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_agree: f64 = 0.0;
    let mut runs = 0;
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        let levels = torus.nonempty_levels(100);
        for _ in 0..1000 {
            let level = *levels.choose(&mut rng).unwrap();
            let shell = torus.shell(level);
            let k = rng.random_range(1..=shell.points.len());
            let support: Vec<_> = shell.points.choose_multiple(&mut rng, k).copied().collect();
            let u = SpectralField::random_on(torus.clone(), &support, &mut rng).scale(Complex64::new(rng.random_range(0.1..10.0), 0.0));
            let z = zygmund_check(&u).unwrap();
            worst_ratio = worst_ratio.max(z.ratio);
            let res = l4_fourth_power(&u).unwrap();
            let spatial = u.lp_norm_pow(4);
            worst_agree = worst_agree.max((res - spatial).abs() / spatial);
            runs += 1;
        }
    }
    Outcome {
        pass: worst_ratio <= 1.0 + 1e-12 && worst_agree <= 1e-7,
        detail: format!("{runs} fields, max lhs/bound {worst_ratio:.6}, resonance vs quadrature rel diff {worst_agree:.2e}"),
    }
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for torus in [TwistedTorus::identity(), TwistedTorus::hexagonal()] {
        let r = lemma_exhaustiveness(&torus, 200);
        ok &= r.unclassified == 0 && r.count_mismatches == 0 && r.quadruples > 0;
        parts.push(format!(
            "{}: {} shells, {} quadruples, {} unclassified",
            torus.name(),
            r.shells,
            r.quadruples,
            r.unclassified
        ));
    }
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_lp: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    let mut worst_int: f64 = 0.0;
    let mut ok = true;
    for i in 0..50 {
        let bc = if i % 2 == 0 { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let f = random_triangle_field(bc, 6, &mut rng);
        for p in [2, 4] {
            let c = lp_identity(&f, p);
            worst_lp = worst_lp.max(c.ratio.map(|r| (r - 18.0).abs()).unwrap_or(0.0));
            ok &= c.passes(18.0, 1e-5);
        }
        match intertwining_check(&f) {
            Ok(d) => worst_int = worst_int.max(d),
            Err(_) => ok = false,
        }
        for (mode, _) in f.modes() {
            for _ in 0..20 {
                let a: f64 = rng.random_range(0.0..1.0);
                let b: f64 = rng.random_range(0.0..1.0 - a);
                for g in group().iter() {
                    for p in 0..3u8 {
                        worst_sym = worst_sym.max(symmetry_defect(&mode, g, p, [a, b]));
                    }
                }
            }
        }
    }
    ok &= worst_sym <= 1e-11 && worst_int <= 1e-12;
    Outcome {
        pass: ok,
        detail: format!(
            "50 fields: max |ratio-18| {worst_lp:.2e} (p=2,4), max symmetry defect {worst_sym:.2e}, intertwining mismatch {worst_int:.2e}"
        ),
    }
}

fn criterion_5() -> Outcome {
    let s3 = 3f64.sqrt();
    let edges: [([f64; 2], [f64; 2], [f64; 2]); 3] = [
        ([0.0, 0.0], [1.0, 0.0], [0.0, -1.0]),
        ([1.0, 0.0], [0.5, s3 / 2.0], [s3 / 2.0, 0.5]),
        ([0.5, s3 / 2.0], [0.0, 0.0], [-s3 / 2.0, 0.5]),
    ];
    let interior: Vec<[f64; 2]> = (1..12)
        .flat_map(|i| (1..12 - i).map(move |j| [i as f64 / 12.0, j as f64 / 12.0]))
        .map(|[a, b]| [a + 0.5 * b, s3 / 2.0 * b])
        .collect();
    let hex = TwistedTorus::hexagonal();
    let mut pde: f64 = 0.0;
    let mut bcr: f64 = 0.0;
    let mut count = 0;
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        for shell in hex.enumerate_levels(60) {
            for &[m, n] in &shell.points {
                if !matches!(mode_admissibility(m, n, bc), Admissibility::Admissible { .. }) {
                    continue;
                }
                let u = TriangleMode::new(m, n, bc).unwrap();
                count += 1;
                for &x in &interior {
                    pde = pde.max((u.laplacian(x) + u.eval_plane(x) * u.eigenvalue).norm());
                }
                for (p, q, nrm) in edges {
                    for k in 0..=20 {
                        let t = k as f64 / 20.0;
                        let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                        let r = match bc {
                            BoundaryCondition::Dirichlet => u.eval_plane(x).norm(),
                            BoundaryCondition::Neumann => {
                                let g = u.gradient(x);
                                (g[0] * nrm[0] + g[1] * nrm[1]).norm()
                            }
                        };
                        bcr = bcr.max(r);
                    }
                }
            }
        }
    }
    let mut gram: f64 = 0.0;
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        let modes = modes_up_to(bc, 60);
        let kmax = modes.iter().map(|m| m.wavenumber()).fold(0.0, f64::max);
        let rule = TriangleRule::for_wavenumber(2.0 * kmax);
        let vals: Vec<Vec<Complex64>> = modes.iter().map(|m| rule.nodes().iter().map(|&x| m.eval_plane(x)).collect()).collect();
        for (j, vj) in vals.iter().enumerate() {
            for (k, vk) in vals.iter().enumerate() {
                let s: Complex64 = vj.iter().zip(vk).zip(rule.weights()).map(|((a, b), w)| a.conj() * b * w).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                gram = gram.max((s - want).norm());
            }
        }
    }
    Outcome {
        pass: pde < 1e-9 && bcr < 1e-9 && gram < 1e-7,
        detail: format!("{count} (m,n,bc): PDE residual {pde:.2e}, boundary residual {bcr:.2e}, Gram defect {gram:.2e}"),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parts = Vec::new();
    let mut ok = true;
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        let period = torus.period();
        let mut worst: f64 = 0.0;
        for run in 0..1000 {
            let u0 = random_field(&torus, 10, rng.random_range(1..6), &mut rng);
            let src = if run % 2 == 1 {
                let k = rng.random_range(1..=3);
                let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..period)).collect();
                cuts.sort_by(f64::total_cmp);
                let pieces = cuts
                    .chunks(2)
                    .map(|c| SourcePiece {
                        start: c[0],
                        end: c[1],
                        field: random_field(&torus, 10, rng.random_range(1..4), &mut rng),
                    })
                    .collect();
                Some(SourceTerm::new(pieces).unwrap())
            } else {
                None
            };
            let c = strichartz_check(&u0, src.as_ref()).unwrap();
            worst = worst.max(c.ratio);
        }
        let single = strichartz_check(&SpectralField::single(torus.clone(), [1, 0], Complex64::new(1.0, 0.0)), None).unwrap();
        let single_ok = (single.ratio - 3f64.powf(-0.25)).abs() <= 1e-10;
        ok &= worst <= 1.0 + 1e-9 && single_ok;
        parts.push(format!("{}: max ratio {worst:.6}, single mode {:.12}", torus.name(), single.ratio));
    }
    let mut worst_stated: f64 = 0.0;
    let mut worst_tiling: f64 = 0.0;
    let window = trispec::propagator::triangle_window();
    for run in 0..1000 {
        let bc = if run % 4 < 2 { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let f = random_triangle_field(bc, 4, &mut rng);
        let src = if run % 2 == 1 {
            let a = rng.random_range(0.0..window);
            let b = rng.random_range(a..window);
            Some(SourceTerm::new(vec![SourcePiece {
                start: a,
                end: b,
                field: random_triangle_field(bc, 4, &mut rng),
            }])
            .unwrap())
        } else {
            None
        };
        let c = triangle_strichartz_check(&f, src.as_ref()).unwrap();
        worst_stated = worst_stated.max(c.ratio_stated);
        worst_tiling = worst_tiling.max(c.ratio_tiling);
    }
    ok &= worst_stated <= 1.0 + 1e-9;
    let id = triangle_constant_identity();
    ok &= id.holds;
    parts.push(format!(
        "triangle: max ratio {worst_stated:.6} with the stated constant (81 sqrt3/32 pi^2)^(1/4), {worst_tiling:.6} with the tiling constant 18^(1/4) times it"
    ));
    parts.push(format!("prefactor/window identity exact: {}", id.holds));
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let hex = TwistedTorus::hexagonal();
    let id = TwistedTorus::identity();
    let h = conjugation_constants(&hex);
    let i = conjugation_constants(&id);
    let mut ok = h.lambda == q(4, 27) && h.alpha == q(1, 2) && h.beta == q(1, 9) && h.mu == 2.into() && h.q0 == 1.into();
    ok &= i.lambda == q(1, 1) && i.alpha == q(0, 1) && i.beta == q(1, 1) && i.mu == 1.into() && i.q0 == 1.into();
    let skew_q0 = q0_for_periodicity(&TwistedTorus::skew());
    ok &= skew_q0 == 10.into();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data: Vec<(i64, Complex64)> = (-2..=2).map(|j| (j, gauss(&mut rng))).collect();
    let r = verify_conjugated_flow(&hex, 2.0 * std::f64::consts::PI, &data, 256, None).unwrap();
    ok &= r.residual < 1e-9 && r.periodicity_defect < 1e-9;
    Outcome {
        pass: ok,
        detail: format!(
            "hex {:?}; identity {:?}; skew q0 {skew_q0}; flow residual {:.2e}, x-period {} defect {:.2e}",
            h.report(),
            i.report(),
            r.residual,
            r.mu,
            r.periodicity_defect
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let levels = [4usize, 8, 16];

    // a = 1
    let id = Arc::new(TwistedTorus::identity());
    let t = 1.3;
    let basis = Basis::torus_lowest(id.clone(), 16);
    let m = 2 * basis.labels().iter().map(|n| n[0].abs().max(n[1].abs())).max().unwrap() as usize + 2;
    let one = gramian(&ObservabilityProblem::new(basis.clone(), Sampling::torus_grid(&id, m, |_| 1.0), t).unwrap());
    let one_dev = (one.lambda_min - t).abs() / t;
    ok &= one_dev <= 1e-13 && one.certified();
    parts.push(format!("a=1: lambdaMin-T rel {one_dev:.1e}"));

    // presets
    let hex = Arc::new(TwistedTorus::hexagonal());
    let hb = Basis::torus_lowest(hex.clone(), 16);
    let hs = TorusPreset::Hexagon.sampling(&hex, 0, 2.0 * max_wavenumber(&hb)).unwrap();
    let hp = observability_profile(&ObservabilityProblem::new(hb, hs, trispec::propagator::triangle_window()).unwrap(), &levels).unwrap();
    let cs = TorusPreset::FatCantor.sampling(&id, 256, 0.0).unwrap();
    let cp = observability_profile(&ObservabilityProblem::new(basis, cs.clone(), 1.0).unwrap(), &levels).unwrap();
    let tb = Basis::triangle_lowest(BoundaryCondition::Neumann, 16);
    let rule = TriangleRule::for_wavenumber(2.0 * max_wavenumber(&tb));
    let tp = observability_profile(&ObservabilityProblem::new(tb, TrianglePreset::Subtriangle.sampling(&rule), 1.0).unwrap(), &levels).unwrap();
    for (name, prof) in [("hexagon", &hp), ("fat-Cantor", &cp), ("subtriangle", &tp)] {
        ok &= prof.iter().all(|r| r.lambda_min > 0.0);
        let vals: Vec<String> = prof.iter().map(|r| format!("{:.3e}", r.lambda_min)).collect();
        parts.push(format!("{name} N=4,8,16: [{}]", vals.join(", ")));
    }

    // transfer, random (f, a)
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let bc = if i % 2 == 0 { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let f = random_triangle_field(bc, 5, &mut rng);
        let kmax = (trispec::triangle::gamma_hex() * f.max_level() as f64).sqrt();
        let rule = TriangleRule::for_wavenumber(2.0 * kmax);
        let a: Vec<f64> = (0..rule.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let c = triangle_torus_transfer_check(&f, &rule, &a, rng.random_range(0.1..2.0)).unwrap();
        worst = worst.max(c.ratio.map(|r| (r - 18.0).abs() / 18.0).unwrap_or(f64::INFINITY));
    }
    ok &= worst <= 1e-5;
    parts.push(format!("transfer max |ratio/18-1| {worst:.2e}"));

    // scaling
    let small = Basis::torus_lowest(id.clone(), 8);
    let base = gramian(&ObservabilityProblem::new(small.clone(), cs.clone(), 1.0).unwrap());
    let mut scale_ok = true;
    for c in [0.25, 4.0, 1024.0] {
        let r = gramian(&ObservabilityProblem::new(small.clone(), cs.scaled(c), 1.0).unwrap());
        scale_ok &= r.matrix == base.matrix.map(|z| z * c) && r.lambda_min == c * base.lambda_min;
    }
    ok &= scale_ok;
    parts.push(format!("scaling exact: {scale_ok}"));
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        for _ in 0..100 {
            let u0 = random_field(&torus, 400, 12, &mut rng);
            let u = evolve(&u0, torus.period(), None).unwrap();
            worst = worst.max(u.max_diff(&u0));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("200 fields: max amplitude drift {worst:.1e}"),
    }
}

fn main() -> ExitCode {
    let results = [
        (1, run(1, 10, criterion_1)),
        (2, run(2, 60, criterion_2)),
        (3, run(3, 120, criterion_3)),
        (4, run(4, 60, criterion_4)),
        (5, run(5, 60, criterion_5)),
        (6, run(6, 120, criterion_6)),
        (7, run(7, 30, criterion_7)),
        (8, run(8, 120, criterion_8)),
        (9, run(9, 10, criterion_9)),
    ];
    let failed: Vec<u32> = results.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    println!("failing criteria: {failed:?} (documented: {EXPECTED_FAILURES:?})");
    if failed == EXPECTED_FAILURES {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: the failing set differs from the documented one");
        ExitCode::FAILURE
    }
}
