//! Subcommand implementations. Every command returns a JSON result, its
//! verdicts and optional CSV; `main` wraps them in a report.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use trispec::observability::{
    gramian, max_wavenumber, observability_profile, Basis, ObservabilityProblem, Sampling, TorusPreset, TrianglePreset,
};
use trispec::propagator::{
    evolve, strichartz_check, strichartz_constant, strichartz_constant_fourth_exact, triangle_constant_identity,
    triangle_constant_stated, triangle_constant_tiling, triangle_strichartz_check, triangle_window, SourcePiece,
    SourceTerm,
};
use trispec::quadrature::TriangleRule;
use trispec::reduction::{conjugation_constants, q0_is_minimal, verify_conjugated_flow};
use trispec::resonance::{l4_fourth_power, lemma_exhaustiveness, sharpness_sequence, zygmund_check};
use trispec::tiling::{fold_point, group, intertwining_check, lp_identity, symmetry_defect, to_cartesian, torus_distance, unfold};
use trispec::triangle::{lowest_modes, mode_admissibility, mode_table_csv, modes_up_to, Admissibility, TriangleSamples};
use trispec::{
    BoundaryCondition, Complex64, SpectralField, TorusConfig, TriangleField, TriangleMode, TwistedTorus,
};

use crate::report::{digest, Output, Verdict};
use crate::{
    Command, Domain, ObserveArgs, ReduceCmd, SelftestArgs, SpectrumCmd, StrichartzCmd, TileCmd, ZygmundCmd,
};

type Res<T> = Result<T, String>;

trait Context<T> {
    fn ctx(self) -> Res<T>;
}

impl<T> Context<T> for trispec::Result<T> {
    fn ctx(self) -> Res<T> {
        self.map_err(|e| e.to_string())
    }
}

fn output(config: Value, seed: Option<u64>, result: Value, verdicts: Vec<Verdict>, csv: Option<String>) -> Output<Value> {
    Output {
        config_digest: digest(&config),
        result,
        verdicts,
        seed,
        csv,
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// A preset name or the path of a JSON torus config.
fn load_torus(name: &str) -> Res<TwistedTorus> {
    if let Some(t) = TwistedTorus::preset(name) {
        return Ok(t);
    }
    let text = fs::read_to_string(name).map_err(|e| format!("torus {name:?} is neither a preset nor a readable file: {e}"))?;
    TorusConfig::from_json(&text).and_then(TorusConfig::build).ctx()
}

fn torus_config(t: &TwistedTorus) -> Value {
    to_value(&TorusConfig::from(t))
}

fn parse_bc(s: &str) -> Res<BoundaryCondition> {
    s.parse().ctx()
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
    TriangleField::new(bc, pick).expect("modes from the admissible list")
}

fn alternate_bc(i: usize) -> BoundaryCondition {
    if i % 2 == 0 {
        BoundaryCondition::Neumann
    } else {
        BoundaryCondition::Dirichlet
    }
}

pub fn dispatch(cmd: Command) -> Res<Output<Value>> {
    match cmd {
        Command::Spectrum(SpectrumCmd::Torus { torus, max_level }) => spectrum_torus(&torus, max_level),
        Command::Spectrum(SpectrumCmd::Triangle { bc, max_level }) => spectrum_triangle(&bc, max_level),
        Command::Tile(TileCmd::Fold { point }) => tile_fold(point),
        Command::Tile(TileCmd::Check { trials, seed, levels }) => tile_check(trials, seed, levels),
        Command::Zygmund(ZygmundCmd::Sharpness { n, brute_force_max }) => zygmund_sharpness(n, brute_force_max),
        Command::Zygmund(ZygmundCmd::Bound {
            torus,
            level,
            trials,
            seed,
        }) => zygmund_bound(&torus, level, trials, seed),
        Command::Strichartz(StrichartzCmd::Check {
            domain,
            torus,
            trials,
            seed,
            levels,
        }) => match domain {
            Domain::Torus => strichartz_torus(&torus, trials, seed, levels),
            Domain::Triangle => strichartz_triangle(trials, seed, levels as usize, true),
        },
        Command::Strichartz(StrichartzCmd::Constants { torus }) => strichartz_constants(&torus),
        Command::Reduce(ReduceCmd::Constants { torus }) => reduce_constants(&torus),
        Command::Reduce(ReduceCmd::Flow {
            torus,
            k,
            grid,
            modes,
            seed,
        }) => reduce_flow(&torus, k, grid, modes, seed),
        Command::Observe(args) => observe(&args),
        Command::Selftest(args) => selftest(&args),
    }
}

fn spectrum_torus(name: &str, max_level: u64) -> Res<Output<Value>> {
    let torus = load_torus(name)?;
    let shells: Vec<_> = torus.enumerate_levels(max_level).into_iter().filter(|s| !s.is_empty()).collect();
    let mut csv = String::from("n1,n2,level\n");
    for s in &shells {
        csv.push_str(&s.to_csv());
    }
    let rows: Vec<Value> = shells
        .iter()
        .map(|s| json!({"level": s.level, "size": s.len(), "eigenvalue": torus.gamma_f64() * s.level as f64}))
        .collect();
    let mut verdicts = vec![Verdict::assert(
        "shells symmetric under n -> -n",
        shells.iter().all(|s| s.is_symmetric()),
        format!("{} nonempty shells up to level {max_level}", shells.len()),
    )];
    if torus.matrix() == TwistedTorus::identity().matrix() {
        let bad = shells.iter().filter(|s| s.level > 0 && s.len() as u64 != trispec::lattice::r2_count(s.level)).count();
        verdicts.push(Verdict::assert("shell sizes equal r2", bad == 0, format!("{bad} mismatches")));
    }
    let result = json!({
        "torus": torus_config(&torus),
        "gamma": torus.gamma().to_string(),
        "det": torus.det().to_string(),
        "shells": rows,
    });
    Ok(output(json!({"cmd": "spectrum torus", "torus": torus_config(&torus), "maxLevel": max_level}), None, result, verdicts, Some(csv)))
}

/// Worst PDE residual, boundary residual and Gram defect of the admissible
/// modes up to `max_level`, and the number of modes checked.
fn eigenbasis_residuals(bc: BoundaryCondition, max_level: u64) -> (f64, f64, f64, usize) {
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
    let (mut pde, mut bcr, mut count) = (0f64, 0f64, 0);
    for shell in TwistedTorus::hexagonal().enumerate_levels(max_level) {
        for &[m, n] in &shell.points {
            if !matches!(mode_admissibility(m, n, bc), Admissibility::Admissible { .. }) {
                continue;
            }
            let u = TriangleMode::new(m, n, bc).expect("admissible");
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
    let modes = modes_up_to(bc, max_level);
    let kmax = modes.iter().map(|m| m.wavenumber()).fold(0.0, f64::max);
    let rule = TriangleRule::for_wavenumber(2.0 * kmax);
    let vals: Vec<Vec<Complex64>> = modes.iter().map(|m| rule.nodes().iter().map(|&x| m.eval_plane(x)).collect()).collect();
    let mut gram: f64 = 0.0;
    for (j, vj) in vals.iter().enumerate() {
        for (k, vk) in vals.iter().enumerate() {
            let s: Complex64 = vj.iter().zip(vk).zip(rule.weights()).map(|((a, b), w)| a.conj() * b * w).sum();
            gram = gram.max((s - if j == k { 1.0 } else { 0.0 }).norm());
        }
    }
    (pde, bcr, gram, count)
}

fn eigenbasis_verdicts(bc: BoundaryCondition, max_level: u64) -> Vec<Verdict> {
    let (pde, bcr, gram, count) = eigenbasis_residuals(bc, max_level);
    vec![
        Verdict::assert(format!("{bc} PDE residual"), pde < 1e-9, format!("{pde:.2e} over {count} modes")),
        Verdict::assert(format!("{bc} boundary residual"), bcr < 1e-9, format!("{bcr:.2e}")),
        Verdict::assert(format!("{bc} Gram defect"), gram < 1e-7, format!("{gram:.2e}")),
    ]
}

fn spectrum_triangle(bc: &str, max_level: u64) -> Res<Output<Value>> {
    let bc = parse_bc(bc)?;
    let modes = modes_up_to(bc, max_level);
    let rows: Vec<Value> = modes
        .iter()
        .map(|m| {
            json!({"m": m.index.m, "n": m.index.n, "level": m.level, "eigenvalue": m.eigenvalue,
                   "kappaSq": m.kappa_sq.to_string()})
        })
        .collect();
    let verdicts = eigenbasis_verdicts(bc, max_level);
    Ok(output(
        json!({"cmd": "spectrum triangle", "bc": bc, "maxLevel": max_level}),
        None,
        json!({"bc": bc, "modes": rows}),
        verdicts,
        Some(mode_table_csv(&modes)),
    ))
}

fn tile_fold(point: [f64; 2]) -> Res<Output<Value>> {
    if !point.iter().all(|v| v.is_finite()) {
        return Err(format!("point must be finite, got {point:?}"));
    }
    let f = fold_point(point);
    let back = unfold(f.g, f.p, f.xt);
    let err = torus_distance(back, point);
    let result = json!({
        "point": point,
        "group": f.g,
        "translate": f.p,
        "preimage": f.xt,
        "preimageCartesian": to_cartesian(f.xt),
        "roundTrip": err,
    });
    let v = Verdict::assert("unfold inverts fold", err <= 1e-12, format!("{err:.2e}"));
    Ok(output(json!({"cmd": "tile fold", "point": point}), None, result, vec![v], None))
}

fn tile_check(trials: usize, seed: u64, levels: usize) -> Res<Output<Value>> {
    if trials == 0 || levels == 0 {
        return Err("trials and levels must be positive".into());
    }
    let (result, verdicts) = tile_battery(trials, seed, levels)?;
    Ok(output(
        json!({"cmd": "tile check", "trials": trials, "levels": levels}),
        Some(seed),
        result,
        verdicts,
        None,
    ))
}

fn tile_battery(trials: usize, seed: u64, levels: usize) -> Res<(Value, Vec<Verdict>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lp, mut sym, mut int) = (0f64, 0f64, 0f64);
    let mut lp_ok = true;
    for i in 0..trials {
        let f = random_triangle_field(alternate_bc(i), levels, &mut rng);
        for p in [2, 4] {
            let c = lp_identity(&f, p);
            lp = lp.max(c.ratio.map(|r| (r - 18.0).abs()).unwrap_or(0.0));
            lp_ok &= c.passes(18.0, 1e-5);
        }
        int = int.max(intertwining_check(&f).ctx()?);
        for (mode, _) in f.modes() {
            for _ in 0..20 {
                let a: f64 = rng.random_range(0.0..1.0);
                let b: f64 = rng.random_range(0.0..1.0 - a);
                for g in group() {
                    for p in 0..3u8 {
                        sym = sym.max(symmetry_defect(&mode, g, p, [a, b]));
                    }
                }
            }
        }
    }
    let result = json!({"fields": trials, "maxRatioDeviation": lp, "maxSymmetryDefect": sym, "maxIntertwining": int});
    let verdicts = vec![
        Verdict::assert("Lp norms scale by 18 (p=2,4)", lp_ok, format!("max |ratio-18| {lp:.2e}")),
        Verdict::assert("extension is symmetric on every tile", sym <= 1e-11, format!("{sym:.2e}")),
        Verdict::assert("extension intertwines the Laplacians", int <= 1e-12, format!("{int:.2e}")),
    ];
    Ok((result, verdicts))
}

fn zygmund_sharpness(n: u32, brute_force_max: u32) -> Res<Output<Value>> {
    if n > 12 {
        return Err(format!("n = {n} is too large (at most 12)"));
    }
    let rows = sharpness_sequence(n, Some(brute_force_max));
    let mut csv = String::from("n,level,shellSize,fourthPower,closedForm,quadruples,bruteCount\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.level,
            r.shell_size,
            r.fourth_power,
            r.closed_form,
            r.quadruple_count,
            r.brute_count.map(|b| b.to_string()).unwrap_or_default()
        ));
    }
    let bad: Vec<u32> = rows.iter().filter(|r| !r.verified).map(|r| r.n).collect();
    let v = Verdict::assert(
        "equal-amplitude fourth power is 3 - 3/(4(n+1))",
        bad.is_empty(),
        if bad.is_empty() { format!("n = 0..{n}") } else { format!("fails at n = {bad:?}") },
    );
    Ok(output(
        json!({"cmd": "zygmund sharpness", "n": n, "bruteForceMax": brute_force_max}),
        None,
        to_value(&rows),
        vec![v],
        Some(csv),
    ))
}

fn zygmund_bound(name: &str, level: u64, trials: usize, seed: u64) -> Res<Output<Value>> {
    let torus = Arc::new(load_torus(name)?);
    let shell = torus.shell(level);
    if level == 0 || shell.is_empty() {
        return Err(format!("level {level} carries no nonzero frequencies on {}", torus.name()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut agree) = (0f64, 0f64);
    for _ in 0..trials {
        let k = rng.random_range(1..=shell.len());
        let support: Vec<_> = shell.points.choose_multiple(&mut rng, k).copied().collect();
        let u = SpectralField::random_on(torus.clone(), &support, &mut rng);
        worst = worst.max(zygmund_check(&u).ctx()?.ratio);
        let res = l4_fourth_power(&u).ctx()?;
        let spatial = u.lp_norm_pow(4);
        agree = agree.max((res - spatial).abs() / spatial);
    }
    let result = json!({"level": level, "shellSize": shell.len(), "trials": trials, "maxRatio": worst, "quadratureAgreement": agree});
    let verdicts = vec![
        Verdict::assert("||u||_4^4 <= (3/det A) ||u||_2^4", worst <= 1.0 + 1e-12, format!("max lhs/bound {worst:.6}")),
        Verdict::assert("resonance sum matches quadrature", agree <= 1e-7, format!("{agree:.2e}")),
    ];
    Ok(output(
        json!({"cmd": "zygmund bound", "torus": torus_config(&torus), "level": level, "trials": trials}),
        Some(seed),
        result,
        verdicts,
        None,
    ))
}

fn strichartz_torus_battery(torus: &Arc<TwistedTorus>, trials: usize, rng: &mut ChaCha8Rng, max_level: u64) -> Res<(f64, usize, Value)> {
    let period = torus.period();
    let (mut worst, mut violations, mut worst_field) = (0f64, 0, Value::Null);
    for run in 0..trials {
        let u0 = random_field(torus, max_level, rng.random_range(1..6), rng);
        let src = if run % 2 == 1 {
            let k = rng.random_range(1..=3);
            let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..period)).collect();
            cuts.sort_by(f64::total_cmp);
            let pieces = cuts
                .chunks(2)
                .map(|c| SourcePiece {
                    start: c[0],
                    end: c[1],
                    field: random_field(torus, max_level, rng.random_range(1..4), rng),
                })
                .collect();
            Some(SourceTerm::new(pieces).ctx()?)
        } else {
            None
        };
        let c = strichartz_check(&u0, src.as_ref()).ctx()?;
        if !c.holds {
            violations += 1;
        }
        if c.ratio > worst {
            worst = c.ratio;
            worst_field = json!({"run": run, "forced": src.is_some(), "data": to_value(&u0.to_record())});
        }
    }
    Ok((worst, violations, worst_field))
}

fn strichartz_torus(name: &str, trials: usize, seed: u64, max_level: u64) -> Res<Output<Value>> {
    let torus = Arc::new(load_torus(name)?);
    if torus.enumerate_levels(max_level).iter().all(|s| s.level == 0) {
        return Err(format!("no nonzero frequencies up to level {max_level}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (worst, violations, worst_field) = strichartz_torus_battery(&torus, trials, &mut rng, max_level)?;
    let result = json!({
        "constant": strichartz_constant(&torus),
        "window": torus.period(),
        "maxRatio": worst,
        "violations": violations,
        "worstField": worst_field,
    });
    let v = Verdict::assert("Strichartz bound holds", violations == 0, format!("max ratio {worst:.6} over {trials} runs"));
    Ok(output(
        json!({"cmd": "strichartz check", "domain": "torus", "torus": torus_config(&torus), "trials": trials, "levels": max_level}),
        Some(seed),
        result,
        vec![v],
        None,
    ))
}

/// Runs `trials` triangle checks. The stated-constant verdict is asserted
/// when `assert_stated` is set.
fn strichartz_triangle_battery(trials: usize, seed: u64, levels: usize, assert_stated: bool) -> Res<(Value, Vec<Verdict>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = triangle_window();
    let (mut stated, mut tiling, mut violations) = (0f64, 0f64, 0usize);
    let mut worst_field = Value::Null;
    for run in 0..trials {
        let bc = if run % 4 < 2 { BoundaryCondition::Neumann } else { BoundaryCondition::Dirichlet };
        let f = random_triangle_field(bc, levels, &mut rng);
        let src = if run % 2 == 1 {
            let a = rng.random_range(0.0..window);
            let b = rng.random_range(a..window);
            let piece = SourcePiece {
                start: a,
                end: b,
                field: random_triangle_field(bc, levels, &mut rng),
            };
            Some(SourceTerm::new(vec![piece]).ctx()?)
        } else {
            None
        };
        let c = triangle_strichartz_check(&f, src.as_ref()).ctx()?;
        if !c.holds_stated {
            violations += 1;
        }
        if c.ratio_stated > stated {
            stated = c.ratio_stated;
            let coeffs: Vec<Value> = f
                .modes()
                .iter()
                .map(|(m, c)| json!({"m": m.class[0], "n": m.class[1], "re": c.re, "im": c.im}))
                .collect();
            worst_field = json!({"run": run, "bc": bc, "forced": src.is_some(), "coefficients": coeffs});
        }
        tiling = tiling.max(c.ratio_tiling);
    }
    let id = triangle_constant_identity();
    let result = json!({
        "constantStated": triangle_constant_stated(),
        "constantTiling": triangle_constant_tiling(),
        "window": window,
        "maxRatio": stated,
        "maxRatioTiling": tiling,
        "violations": violations,
        "worstField": worst_field,
        "constantIdentity": to_value(&id),
    });
    let detail = format!("max ratio {stated:.6} over {trials} runs");
    let stated_v = if assert_stated {
        Verdict::assert("triangle Strichartz, stated constant", violations == 0, detail)
    } else {
        Verdict::inform("triangle Strichartz, stated constant", violations == 0, detail)
    };
    let verdicts = vec![
        stated_v,
        Verdict::assert("triangle Strichartz, tiling constant", tiling <= 1.0 + 1e-9, format!("max ratio {tiling:.6}")),
        Verdict::assert("triangle constant and window from the hexagonal torus", id.holds, id.constant_fourth.clone()),
    ];
    Ok((result, verdicts))
}

fn strichartz_triangle(trials: usize, seed: u64, levels: usize, assert_stated: bool) -> Res<Output<Value>> {
    if levels == 0 {
        return Err("levels must be positive".into());
    }
    let (result, verdicts) = strichartz_triangle_battery(trials, seed, levels, assert_stated)?;
    Ok(output(
        json!({"cmd": "strichartz check", "domain": "triangle", "trials": trials, "levels": levels}),
        Some(seed),
        result,
        verdicts,
        None,
    ))
}

fn strichartz_constants(name: &str) -> Res<Output<Value>> {
    let torus = load_torus(name)?;
    let mut result = json!({
        "torus": torus_config(&torus),
        "constantFourth": strichartz_constant_fourth_exact(&torus).to_string(),
        "constant": strichartz_constant(&torus),
        "window": torus.period(),
    });
    let mut verdicts = Vec::new();
    if torus.matrix() == TwistedTorus::hexagonal().matrix() {
        let id = triangle_constant_identity();
        verdicts.push(Verdict::assert("triangle constant and window", id.holds, id.constant_fourth.clone()));
        result["triangle"] = to_value(&id);
    }
    Ok(output(json!({"cmd": "strichartz constants", "torus": torus_config(&torus)}), None, result, verdicts, None))
}

fn reduce_constants(name: &str) -> Res<Output<Value>> {
    let torus = load_torus(name)?;
    let c = conjugation_constants(&torus);
    let minimal = q0_is_minimal(&torus);
    let v = Verdict::assert("q0 is the least period", minimal, format!("q0 = {}", c.q0));
    Ok(output(
        json!({"cmd": "reduce constants", "torus": torus_config(&torus)}),
        None,
        json!({"torus": torus_config(&torus), "constants": to_value(&c.report())}),
        vec![v],
        None,
    ))
}

fn reduce_flow(name: &str, k: i64, grid: usize, modes: usize, seed: u64) -> Res<Output<Value>> {
    let torus = load_torus(name)?;
    if modes == 0 {
        return Err("modes must be positive".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = -((modes / 2) as i64);
    let data: Vec<(i64, Complex64)> = (lo..lo + modes as i64).map(|j| (j, gauss(&mut rng))).collect();
    let r = verify_conjugated_flow(&torus, 2.0 * PI * k as f64, &data, grid, None).ctx()?;
    let verdicts = vec![
        Verdict::assert("conjugated flow solves the free equation", r.residual < 1e-9, format!("{:.2e}", r.residual)),
        Verdict::assert("conjugated flow is mu-periodic", r.periodicity_defect < 1e-9, format!("{:.2e}", r.periodicity_defect)),
    ];
    Ok(output(
        json!({"cmd": "reduce flow", "torus": torus_config(&torus), "k": k, "grid": grid, "modes": modes}),
        Some(seed),
        to_value(&r),
        verdicts,
        None,
    ))
}

fn read_localization(path: &Path) -> Res<(TriangleRule, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let s = TriangleSamples::from_csv(&text).ctx()?;
    if let Some(bad) = s.values.iter().position(|v| v.im != 0.0 || v.re.is_nan() || v.re < 0.0) {
        return Err(format!("row {bad}: localization values must be real and nonnegative"));
    }
    Ok((s.rule, s.values.iter().map(|v| v.re).collect()))
}

/// A built-in name, or a JSON file `{"domain": ..., "preset": ...}` naming one.
fn preset_name(arg: Option<&str>, domain: Domain) -> Res<String> {
    let Some(arg) = arg else { return Ok("one".into()) };
    if !arg.ends_with(".json") {
        return Ok(arg.into());
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{arg}: {e}"))?;
    if v["domain"] != to_value(&domain) {
        return Err(format!("{arg}: preset is for domain {}, not {}", v["domain"], to_value(&domain)));
    }
    v["preset"].as_str().map(str::to_owned).ok_or_else(|| format!("{arg}: missing \"preset\""))
}

fn observe(args: &ObserveArgs) -> Res<Output<Value>> {
    if args.levels == 0 {
        return Err("levels must be positive".into());
    }
    if let Some(&bad) = args.profile.iter().find(|&&n| n > args.levels) {
        return Err(format!("profile truncation {bad} exceeds --levels {}", args.levels));
    }
    let (basis, sampling, config) = match args.domain {
        Domain::Triangle => {
            let bc = parse_bc(&args.bc)?;
            let basis = Basis::triangle_lowest(bc, args.levels);
            let need = 2.0 * max_wavenumber(&basis);
            let rule = match args.depth {
                Some(d) if d > 9 => return Err(format!("depth {d} is too large (at most 9)")),
                Some(d) => TriangleRule::with_depth(d),
                None => TriangleRule::for_wavenumber(need),
            };
            if let Some(path) = &args.export_nodes {
                let mut template = String::from("x,y,a\n");
                for x in rule.nodes() {
                    template.push_str(&format!("{:.17e},{:.17e},1\n", x[0], x[1]));
                }
                fs::write(path, template).map_err(|e| format!("{}: {e}", path.display()))?;
                let result = json!({"exported": path.display().to_string(), "nodes": rule.len(), "depth": rule.depth()});
                return Ok(output(json!({"cmd": "observe export", "depth": rule.depth()}), None, result, vec![], None));
            }
            let (rule, sampling, loc) = match &args.a {
                Some(path) => {
                    let (rule, values) = read_localization(path)?;
                    let s = Sampling::triangle_values(&rule, values.clone()).ctx()?;
                    (rule, s, json!({"values": values}))
                }
                None => {
                    let preset: TrianglePreset = preset_name(args.preset.as_deref(), Domain::Triangle)?.parse().ctx()?;
                    (rule.clone(), preset.sampling(&rule), to_value(&preset))
                }
            };
            let min_depth = TriangleRule::for_wavenumber(need).depth();
            if rule.depth() < min_depth {
                return Err(format!("rule of depth {} does not resolve the basis; depth {min_depth} is needed", rule.depth()));
            }
            let config = json!({"cmd": "observe", "domain": "triangle", "bc": bc, "localization": loc, "depth": rule.depth()});
            (basis, sampling, config)
        }
        Domain::Torus => {
            if args.a.is_some() || args.export_nodes.is_some() {
                return Err("--a and --export-nodes apply to the triangle domain".into());
            }
            let torus = Arc::new(load_torus(&args.torus)?);
            let basis = Basis::torus_lowest(torus.clone(), args.levels);
            let preset: TorusPreset = preset_name(args.preset.as_deref(), Domain::Torus)?.parse().ctx()?;
            if preset == TorusPreset::Hexagon && torus.matrix() != TwistedTorus::hexagonal().matrix() {
                return Err("the hexagon preset is defined on the hexagonal torus only".into());
            }
            let reach = basis.labels().iter().map(|n| n[0].abs().max(n[1].abs())).max().unwrap_or(0) as usize;
            if preset != TorusPreset::Hexagon && args.grid < 2 * reach + 2 {
                return Err(format!("grid {} does not resolve frequencies up to |n| = {reach}; use at least {}", args.grid, 2 * reach + 2));
            }
            let sampling = preset.sampling(&torus, args.grid, 2.0 * max_wavenumber(&basis)).ctx()?;
            let config = json!({"cmd": "observe", "domain": "torus", "torus": torus_config(&torus), "preset": preset, "grid": args.grid});
            (basis, sampling, config)
        }
    };
    let problem = ObservabilityProblem::new(basis, sampling, args.t).ctx()?;
    let report = gramian(&problem);
    let profile = if args.profile.is_empty() { Vec::new() } else { observability_profile(&problem, &args.profile).ctx()? };
    let scale = report.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
    let mut verdicts = vec![
        Verdict::assert("Gramian is positive semidefinite", report.lambda_min >= -1e-10, format!("lambdaMin {:.6e}", report.lambda_min)),
        Verdict::assert("certificate reproduces lambdaMin", report.certified(), format!("Rayleigh {:.6e}", report.rayleigh)),
    ];
    if !profile.is_empty() {
        let mono = profile.windows(2).all(|w| w[1].lambda_min <= w[0].lambda_min + 1e-12 * scale);
        verdicts.push(Verdict::assert("profile is nonincreasing", mono, format!("{} truncations", profile.len())));
    }
    let mut csv = String::from("levels,modes,lambdaMin\n");
    for r in &profile {
        csv.push_str(&format!("{},{},{:.17e}\n", r.levels, r.modes, r.lambda_min));
    }
    let result = json!({
        "modes": problem.basis.len(),
        "T": args.t,
        "mass": problem.sampling.mass(),
        "lambdaMin": report.lambda_min,
        "eigenvalues": report.eigenvalues,
        "hermitianDefect": report.hermitian_defect(),
        "gramian": to_value(&report.summary()),
        "profile": to_value(&profile),
    });
    let mut config = config;
    config["levels"] = json!(args.levels);
    config["T"] = json!(args.t);
    config["profile"] = json!(args.profile);
    Ok(output(config, None, result, verdicts, Some(csv)))
}

fn prefixed(name: &str, vs: Vec<Verdict>) -> impl Iterator<Item = Verdict> + '_ {
    vs.into_iter().map(move |mut v| {
        v.check = format!("{name}: {}", v.check);
        v
    })
}

fn selftest(args: &SelftestArgs) -> Res<Output<Value>> {
    let q = args.quick;
    let seed = args.seed;
    let mut verdicts: Vec<Verdict> = Vec::new();

    let n = if q { 3 } else { 6 };
    let rows = sharpness_sequence(n, Some(2));
    verdicts.push(Verdict::assert("sharpness sequence", rows.iter().all(|r| r.verified), format!("n = 0..{n}")));

    let lemma_level = if q { 50 } else { 200 };
    for torus in [TwistedTorus::identity(), TwistedTorus::hexagonal()] {
        let r = lemma_exhaustiveness(&torus, lemma_level);
        verdicts.push(Verdict::assert(
            format!("{}: every resonant quadruple is classified", torus.name()),
            r.unclassified == 0 && r.count_mismatches == 0,
            format!("{} quadruples on {} shells", r.quadruples, r.shells),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zyg_trials = if q { 50 } else { 500 };
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        let levels = torus.nonempty_levels(100);
        let mut worst: f64 = 0.0;
        for _ in 0..zyg_trials {
            let shell = torus.shell(*levels.choose(&mut rng).expect("nonempty"));
            let k = rng.random_range(1..=shell.len());
            let support: Vec<_> = shell.points.choose_multiple(&mut rng, k).copied().collect();
            worst = worst.max(zygmund_check(&SpectralField::random_on(torus.clone(), &support, &mut rng)).ctx()?.ratio);
        }
        verdicts.push(Verdict::assert(format!("{}: L4 shell bound", torus.name()), worst <= 1.0 + 1e-12, format!("max {worst:.6}")));
    }

    let (_, tile) = tile_battery(if q { 6 } else { 50 }, seed, 6)?;
    verdicts.extend(prefixed("tiling", tile));

    let eig_level = if q { 30 } else { 60 };
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        verdicts.extend(eigenbasis_verdicts(bc, eig_level));
    }

    let st_trials = if q { 40 } else { 1000 };
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        let (worst, violations, _) = strichartz_torus_battery(&torus, st_trials, &mut rng, 10)?;
        verdicts.push(Verdict::assert(format!("{}: Strichartz", torus.name()), violations == 0, format!("max ratio {worst:.6}")));
    }
    let (_, tri) = strichartz_triangle_battery(st_trials, seed, 4, false)?;
    verdicts.extend(tri);

    for (name, lambda, alpha, beta, mu) in [("hexagonal", "4/27", "1/2", "1/9", "2"), ("identity", "1", "0", "1", "1")] {
        let torus = TwistedTorus::preset(name).expect("preset");
        let r = conjugation_constants(&torus).report();
        let ok = r.lambda == lambda && r.alpha == alpha && r.beta == beta && r.mu == mu && r.q0 == "1";
        verdicts.push(Verdict::assert(format!("{name}: reduction constants"), ok, format!("{r:?}")));
    }
    let data: Vec<(i64, Complex64)> = (-2..=2).map(|j| (j, gauss(&mut rng))).collect();
    let flow = verify_conjugated_flow(&TwistedTorus::hexagonal(), 2.0 * PI, &data, if q { 64 } else { 256 }, None).ctx()?;
    verdicts.push(Verdict::assert("conjugated flow", flow.residual < 1e-9 && flow.periodicity_defect < 1e-9, format!("{:.2e}", flow.residual)));

    let id = Arc::new(TwistedTorus::identity());
    let basis = Basis::torus_lowest(id.clone(), 8);
    let one = gramian(&ObservabilityProblem::new(basis, Sampling::torus_grid(&id, 16, |_| 1.0), 1.3).ctx()?);
    let dev = (one.lambda_min - 1.3).abs() / 1.3;
    verdicts.push(Verdict::assert("a = 1 gives lambdaMin = T", dev <= 1e-13 && one.certified(), format!("rel {dev:.1e}")));

    let mut drift: f64 = 0.0;
    for torus in [Arc::new(TwistedTorus::identity()), Arc::new(TwistedTorus::hexagonal())] {
        for _ in 0..if q { 20 } else { 100 } {
            let u0 = random_field(&torus, 400, 12, &mut rng);
            drift = drift.max(evolve(&u0, torus.period(), None).ctx()?.max_diff(&u0));
        }
    }
    verdicts.push(Verdict::assert("revival at the period", drift <= 1e-12, format!("{drift:.1e}")));

    let result = json!({
        "checks": verdicts.len(),
        "failedAsserted": verdicts.iter().filter(|v| v.asserted && !v.passed).count(),
        "failedInformational": verdicts.iter().filter(|v| !v.asserted && !v.passed).count(),
    });
    Ok(output(json!({"cmd": "selftest", "quick": q}), Some(seed), result, verdicts, None))
}
