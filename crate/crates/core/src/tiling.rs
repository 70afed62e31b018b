//! The tiling of the hexagonal torus by 18 copies of the triangle.
//!
//! Points are written in coordinates `(a, b)` of the basis `e = (1, 0)`,
//! `omega = (1/2, sqrt(3)/2)`. The triangle is `{a, b >= 0, a + b <= 1}` and
//! the torus is `R^2 / 3 Z[omega]`, i.e. `(a, b)` modulo 3. The reflections
//! across `R e` and `R omega` act by the integer matrices
//! `R1 (a, b) = (a + b, -b)` and `R2 (a, b) = (-a, a + b)`, and the tiles are
//! `g T + p (e + omega)` for the six group elements `g` and `p in {0, 1, 2}`.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{grid_integral, SpectralField};
use crate::lattice::{Index, TwistedTorus};
use crate::quadrature::{pairwise_sum, TriangleRule};
use crate::scalar::SurdRational;
use crate::triangle::{
    class_representative, level, mode_admissibility, Admissibility, BoundaryCondition, TriangleField, TriangleMode,
};

pub const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// An element of the reflection group generated by `R1` and `R2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    /// Word in the generators, applied right to left (`"12"` is `R1 R2`).
    pub word: &'static str,
    /// Action on `(a, b)` coordinates.
    pub lattice: [[i64; 2]; 2],
    /// Action on Cartesian coordinates, exact over Q(sqrt 3).
    pub cartesian: [[SurdRational; 2]; 2],
    pub sign: i32,
}

const R1: [[i64; 2]; 2] = [[1, 1], [0, -1]];
const R2: [[i64; 2]; 2] = [[-1, 0], [1, 1]];
const ID: [[i64; 2]; 2] = [[1, 0], [0, 1]];

fn mat_mul(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut z = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    z
}

fn det(m: [[i64; 2]; 2]) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inverse(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    // unimodular
    let d = det(m);
    [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]]
}

/// Conjugates a lattice-coordinate matrix into Cartesian coordinates:
/// `P L P^{-1}` with `P = [[1, 1/2], [0, sqrt(3)/2]]`.
fn to_cartesian_matrix(l: [[i64; 2]; 2]) -> [[SurdRational; 2]; 2] {
    let s = |p, q| SurdRational::surd(p, q, 3).expect("squarefree");
    let r = SurdRational::from_ratio;
    let p = [[r(1, 1), r(1, 2)], [SurdRational::zero(), s(1, 2)]];
    // P^{-1} = [[1, -1/sqrt 3], [0, 2/sqrt 3]]
    let pinv = [[r(1, 1), s(-1, 3)], [SurdRational::zero(), s(2, 3)]];
    let li = [
        [SurdRational::from_int(l[0][0]), SurdRational::from_int(l[0][1])],
        [SurdRational::from_int(l[1][0]), SurdRational::from_int(l[1][1])],
    ];
    let mul = |x: &[[SurdRational; 2]; 2], y: &[[SurdRational; 2]; 2]| -> [[SurdRational; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j]))
    };
    mul(&mul(&p, &li), &pinv)
}

impl Isometry {
    fn from_lattice(word: &'static str, lattice: [[i64; 2]; 2]) -> Self {
        Self {
            word,
            lattice,
            cartesian: to_cartesian_matrix(lattice),
            sign: det(lattice) as i32,
        }
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        let l = &self.lattice;
        [
            l[0][0] as f64 * z[0] + l[0][1] as f64 * z[1],
            l[1][0] as f64 * z[0] + l[1][1] as f64 * z[1],
        ]
    }

    pub fn apply_inverse(&self, z: [f64; 2]) -> [f64; 2] {
        let l = inverse(self.lattice);
        [
            l[0][0] as f64 * z[0] + l[0][1] as f64 * z[1],
            l[1][0] as f64 * z[0] + l[1][1] as f64 * z[1],
        ]
    }

    pub fn apply_exact(&self, z: &[BigRational; 2]) -> [BigRational; 2] {
        let l = &self.lattice;
        let c = |v: i64| BigRational::from_integer(BigInt::from(v));
        [
            c(l[0][0]) * &z[0] + c(l[0][1]) * &z[1],
            c(l[1][0]) * &z[0] + c(l[1][1]) * &z[1],
        ]
    }

    fn apply_inverse_exact(&self, z: &[BigRational; 2]) -> [BigRational; 2] {
        Self::from_lattice("", inverse(self.lattice)).apply_exact(z)
    }

    pub fn is_identity(&self) -> bool {
        self.lattice == ID
    }
}

/// The six group elements in the fixed order used for tie-breaking:
/// `1, R1, R2, R1 R2, R2 R1, R1 R2 R1`.
pub fn group() -> &'static [Isometry; 6] {
    static GROUP: LazyLock<[Isometry; 6]> = LazyLock::new(|| {
        [
            Isometry::from_lattice("", ID),
            Isometry::from_lattice("1", R1),
            Isometry::from_lattice("2", R2),
            Isometry::from_lattice("12", mat_mul(R1, R2)),
            Isometry::from_lattice("21", mat_mul(R2, R1)),
            Isometry::from_lattice("121", mat_mul(R1, mat_mul(R2, R1))),
        ]
    });
    &GROUP
}

/// Position of a lattice matrix in [`group`], if any.
pub fn group_position(l: [[i64; 2]; 2]) -> Option<usize> {
    group().iter().position(|g| g.lattice == l)
}

/// `(a, b)` to Cartesian.
pub fn to_cartesian(z: [f64; 2]) -> [f64; 2] {
    [z[0] + 0.5 * z[1], SQRT3_2 * z[1]]
}

pub fn from_cartesian(x: [f64; 2]) -> [f64; 2] {
    let b = x[1] / SQRT3_2;
    [x[0] - 0.5 * b, b]
}

fn in_triangle(z: [f64; 2], tol: f64) -> bool {
    z[0] >= -tol && z[1] >= -tol && z[0] + z[1] <= 1.0 + tol
}

fn in_triangle_exact(z: &[BigRational; 2]) -> bool {
    !z[0].is_negative() && !z[1].is_negative() && &z[0] + &z[1] <= BigRational::from_integer(1.into())
}

/// Where a torus point sits in the tiling.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    /// Index into [`group`].
    pub g: usize,
    pub p: u8,
    /// Preimage in the closed triangle, `(a, b)` coordinates.
    pub xt: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactFoldResult {
    pub g: usize,
    pub p: u8,
    pub xt: [BigRational; 2],
}

const FOLD_TOL: f64 = 1e-12;

fn reduce_mod3(v: f64) -> f64 {
    let r = v.rem_euclid(3.0);
    if r >= 3.0 {
        0.0
    } else {
        r
    }
}

/// Locates `z` (coordinates `(a, b)`, reduced modulo 3 first) in the tiling.
/// Ties on tile boundaries go to the smallest `p`, then the earliest group
/// element in [`group`] order.
pub fn fold_point(z: [f64; 2]) -> FoldResult {
    let z = [reduce_mod3(z[0]), reduce_mod3(z[1])];
    let g_all = group();
    for p in 0..3u8 {
        for (gi, g) in g_all.iter().enumerate() {
            for la in -1..=1 {
                for lb in -1..=1 {
                    let w = [z[0] - p as f64 + 3.0 * la as f64, z[1] - p as f64 + 3.0 * lb as f64];
                    let xt = g.apply_inverse(w);
                    if in_triangle(xt, FOLD_TOL) {
                        return FoldResult { g: gi, p, xt };
                    }
                }
            }
        }
    }
    unreachable!("the 18 tiles cover the torus")
}

/// Exact version of [`fold_point`] for rational coordinates.
pub fn fold_point_exact(z: &[BigRational; 2]) -> ExactFoldResult {
    let three = BigInt::from(3);
    let reduce = |v: &BigRational| {
        // v - 3 floor(v / 3)
        let q = v.numer().div_floor(&(v.denom() * &three));
        v - BigRational::from_integer(q * &three)
    };
    let z = [reduce(&z[0]), reduce(&z[1])];
    let g_all = group();
    let c = |v: i64| BigRational::from_integer(BigInt::from(v));
    for p in 0..3u8 {
        for (gi, g) in g_all.iter().enumerate() {
            for la in -1..=1i64 {
                for lb in -1..=1i64 {
                    let w = [
                        &z[0] - c(p as i64) + c(3 * la),
                        &z[1] - c(p as i64) + c(3 * lb),
                    ];
                    let xt = g.apply_inverse_exact(&w);
                    if in_triangle_exact(&xt) {
                        return ExactFoldResult { g: gi, p, xt };
                    }
                }
            }
        }
    }
    unreachable!("the 18 tiles cover the torus")
}

/// `g xt + p (e + omega)` reduced modulo 3.
pub fn unfold(g: usize, p: u8, xt: [f64; 2]) -> [f64; 2] {
    let y = group()[g].apply(xt);
    [reduce_mod3(y[0] + p as f64), reduce_mod3(y[1] + p as f64)]
}

/// `g xt + p (e + omega)` without reduction, Cartesian.
pub fn image_cartesian(g: &Isometry, p: u8, xt: [f64; 2]) -> [f64; 2] {
    let y = g.apply(xt);
    to_cartesian([y[0] + p as f64, y[1] + p as f64])
}

/// Difference of two `(a, b)` points modulo 3, as the distance to the nearest
/// lattice translate.
pub fn torus_distance(u: [f64; 2], v: [f64; 2]) -> f64 {
    let r = [reduce_mod3(u[0] - v[0]), reduce_mod3(u[1] - v[1])];
    let mut best = f64::INFINITY;
    for la in -1..=0 {
        for lb in -1..=0 {
            let d = to_cartesian([r[0] + 3.0 * la as f64, r[1] + 3.0 * lb as f64]);
            best = best.min(d[0].hypot(d[1]));
        }
    }
    best
}

/// The triangle rule copied onto all 18 tiles.
#[derive(Clone, Debug)]
pub struct PullbackRule {
    pub triangle: TriangleRule,
    /// Cartesian nodes, tile-major (`p` outer, group element inner).
    pub nodes: Vec<[f64; 2]>,
    /// For every node: `(group index, p, triangle node index)`.
    pub origin: Vec<(usize, u8, usize)>,
}

impl PullbackRule {
    pub fn new(triangle: TriangleRule) -> Self {
        let g_all = group();
        let mut nodes = Vec::with_capacity(18 * triangle.len());
        let mut origin = Vec::with_capacity(18 * triangle.len());
        for p in 0..3u8 {
            for (gi, g) in g_all.iter().enumerate() {
                for (i, x) in triangle.nodes().iter().enumerate() {
                    let z = from_cartesian(*x);
                    nodes.push(image_cartesian(g, p, z));
                    origin.push((gi, p, i));
                }
            }
        }
        Self {
            triangle,
            nodes,
            origin,
        }
    }

    pub fn weight(&self, node: usize) -> f64 {
        self.triangle.weights()[self.origin[node].2]
    }

    pub fn integrate(&self, f: impl Fn(usize, [f64; 2]) -> f64) -> f64 {
        let v: Vec<f64> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| self.weight(i) * f(i, x))
            .collect();
        pairwise_sum(&v)
    }
}

fn check_hexagonal(torus: &TwistedTorus) -> Result<()> {
    if torus.matrix() == TwistedTorus::hexagonal().matrix() {
        Ok(())
    } else {
        Err(Error::TorusMismatch)
    }
}

/// Torus amplitudes of the extension of one normalized mode.
fn mode_extension(mode: &TriangleMode, sqrt_det: f64) -> impl Iterator<Item = (Index, f64)> + '_ {
    mode.waves.iter().map(move |w| (w.index, w.coeff * sqrt_det))
}

/// `E^N f` or `E^D f` (by `f.bc`) as a field on the hexagonal torus.
pub fn extend(f: &TriangleField, torus: &Arc<TwistedTorus>) -> Result<SpectralField> {
    check_hexagonal(torus)?;
    let sqrt_det = torus.det_f64().sqrt();
    let mut out = SpectralField::zero(torus.clone());
    for (mode, c) in f.modes() {
        for (n, a) in mode_extension(&mode, sqrt_det) {
            out.add(n, c * a);
        }
    }
    Ok(out)
}

pub fn extend_hex(f: &TriangleField) -> SpectralField {
    extend(f, &Arc::new(TwistedTorus::hexagonal())).expect("hexagonal torus")
}

/// Left inverse of [`extend`]: the triangle coefficients of the orthogonal
/// projection of `field` onto the range, and the L2 norm of the remainder.
pub fn restrict(field: &SpectralField, bc: BoundaryCondition) -> Result<(TriangleField, f64)> {
    check_hexagonal(field.torus())?;
    let sqrt_det = field.torus().det_f64().sqrt();
    let mut classes: BTreeMap<Index, ()> = BTreeMap::new();
    for &n in field.amps().keys() {
        classes.insert(class_representative(n[0], n[1]), ());
    }
    let mut coeffs = BTreeMap::new();
    let mut captured = SpectralField::zero(field.torus_arc().clone());
    for &[m, n] in classes.keys() {
        if !matches!(mode_admissibility(m, n, bc), Admissibility::Admissible { .. }) {
            continue;
        }
        let mode = TriangleMode::new(m, n, bc)?;
        let ext: Vec<(Index, f64)> = mode_extension(&mode, sqrt_det).collect();
        // ||E mode||^2 = 18
        let c: Complex64 = ext.iter().map(|&(k, a)| field.amp(k) * a).sum::<Complex64>() / 18.0;
        for &(k, a) in &ext {
            captured.add(k, c * a);
        }
        coeffs.insert([m, n], c);
    }
    let defect = field.plus(&captured.scale(Complex64::new(-1.0, 0.0)))?.norm();
    Ok((TriangleField { bc, coeffs }, defect))
}

/// Intertwining at the level of indices: every torus frequency produced by the
/// extension of a class lies on the class's level, so extension and the
/// Laplacian commute. Returns the largest relative amplitude mismatch of
/// `E(Delta f)` against `Delta(E f)` (the level check itself is exact).
pub fn intertwining_check(f: &TriangleField) -> Result<f64> {
    let torus = Arc::new(TwistedTorus::hexagonal());
    for (mode, _) in f.modes() {
        for w in &mode.waves {
            if torus.level(w.index) != level(mode.index.m, mode.index.n) {
                return Err(Error::InvalidArgument(format!(
                    "orbit member {:?} of ({}, {}) leaves the shell",
                    w.index, mode.index.m, mode.index.n
                )));
            }
        }
    }
    let lhs = extend(&f.laplacian(), &torus)?;
    let ef = extend(f, &torus)?;
    let gamma = torus.gamma_f64();
    let rhs = SpectralField::from_amps(
        torus.clone(),
        ef.amps().iter().map(|(&n, &a)| (n, a * (-gamma * torus.level(n) as f64))),
    );
    let scale = rhs.amps().values().map(|a| a.norm()).fold(0.0, f64::max).max(1e-300);
    Ok(lhs.max_diff(&rhs) / scale)
}

/// Reflection symmetry at one point: `|u(g x + p(e + omega)) - eps(g)^D u(x)|`.
pub fn symmetry_defect(mode: &TriangleMode, g: &Isometry, p: u8, xt: [f64; 2]) -> f64 {
    let x = to_cartesian(xt);
    let y = image_cartesian(g, p, xt);
    let sign = match mode.bc() {
        BoundaryCondition::Neumann => 1.0,
        BoundaryCondition::Dirichlet => g.sign as f64,
    };
    (mode.eval_plane(y) - mode.eval_plane(x) * sign).norm()
}

/// Both sides of a norm identity and their ratio.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub torus_side: f64,
    pub triangle_side: f64,
    /// `torus_side / triangle_side`; `None` when both vanish.
    pub ratio: Option<f64>,
    /// Both sides are exactly zero.
    pub exact_zero: bool,
}

impl IdentityCheck {
    pub fn new(torus_side: f64, triangle_side: f64) -> Self {
        let exact_zero = torus_side == 0.0 && triangle_side == 0.0;
        Self {
            torus_side,
            triangle_side,
            ratio: (!exact_zero).then(|| torus_side / triangle_side),
            exact_zero,
        }
    }

    /// Passes when the ratio is within `tol` of `target` (or both sides vanish).
    pub fn passes(&self, target: f64, tol: f64) -> bool {
        self.exact_zero || self.ratio.is_some_and(|r| (r - target).abs() <= tol)
    }
}

/// `int_torus |E b| |E f|^2` against `int_T b |f|^2`, with the torus side
/// computed on the pulled-back rule by evaluating the extended field
/// directly at the image nodes.
pub fn weighted_identity_check(b: &[f64], rule: &TriangleRule, f: &TriangleField) -> Result<IdentityCheck> {
    if b.len() != rule.len() {
        return Err(Error::SampleCount {
            got: b.len(),
            expected: rule.len(),
        });
    }
    if let Some((index, &value)) = b.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeSample { index, value });
    }
    let ef = extend_hex(f);
    let pull = PullbackRule::new(rule.clone());
    let torus_side = pull.integrate(|i, x| b[pull.origin[i].2] * ef.eval(x).norm_sqr());
    let modes = f.modes();
    let tri: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(b)
        .map(|((&x, &w), &bv)| {
            let v: Complex64 = modes.iter().map(|(m, c)| m.eval_plane(x) * c).sum();
            w * bv * v.norm_sqr()
        })
        .collect();
    Ok(IdentityCheck::new(torus_side, pairwise_sum(&tri)))
}

/// `||E f||_p^p` on the torus (exact periodic grid) against
/// `||f||_p^p` on the triangle (composite rule), `p` even.
pub fn lp_identity(f: &TriangleField, p: u32) -> IdentityCheck {
    let ef = extend_hex(f);
    let m = ef.grid_size_for_power(p);
    let vals: Vec<f64> = ef.grid_values(m).iter().map(|v| v.norm().powi(p as i32)).collect();
    let torus_side = grid_integral(ef.torus(), &vals);
    let kmax = (crate::triangle::gamma_hex() * f.max_level() as f64).sqrt();
    let rule = TriangleRule::for_wavenumber(p as f64 * kmax);
    let modes = f.modes();
    let tri = rule.integrate(|x| {
        let v: Complex64 = modes.iter().map(|(m, c)| m.eval_plane(x) * c).sum();
        v.norm().powi(p as i32)
    });
    IdentityCheck::new(torus_side, tri)
}

/// The rational point `(a.0 / a.1, b.0 / b.1)`.
pub fn rational_point(a: (i64, i64), b: (i64, i64)) -> [BigRational; 2] {
    [
        BigRational::new(a.0.into(), a.1.into()),
        BigRational::new(b.0.into(), b.1.into()),
    ]
}

pub fn is_zero_point(z: &[BigRational; 2]) -> bool {
    z[0].is_zero() && z[1].is_zero()
}
